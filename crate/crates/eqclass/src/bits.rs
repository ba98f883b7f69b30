//! Bit-packed buffers and fixed-width integer arrays.
//!
//! Bits are stored little-endian within 64-bit words: bit `i` of a buffer
//! lives in word `i / 64` at bit position `i % 64`.

use crate::probe::Probes;

/// Minimal number of bits that can hold the value `v` (at least 1).
///
/// This is also the width of the minimal binary encoding of `v`:
/// `max(1, ceil(lg(v + 1)))`.
#[inline]
pub fn bits_for(v: u64) -> u32 {
    if v == 0 {
        1
    } else {
        64 - v.leading_zeros()
    }
}

/// `ceil(lg v)` for `v >= 1`.
#[inline]
pub fn ceil_lg(v: u64) -> u32 {
    assert!(v >= 1, "ceil_lg of zero");
    if v == 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

/// Growable bit sequence packed into 64-bit words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitBuf {
    words: Vec<u64>,
    len: u64,
}

impl BitBuf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity_bits(bits: u64) -> Self {
        BitBuf {
            words: Vec::with_capacity(bits.div_ceil(64) as usize),
            len: 0,
        }
    }

    /// Reassemble a buffer from raw words; trailing bits past `len` must be zero.
    pub fn from_words(words: Vec<u64>, len: u64) -> crate::Result<Self> {
        let needed = len.div_ceil(64) as usize;
        if words.len() != needed {
            return Err(crate::Error::Malformed(format!(
                "bit buffer length {len} requires {needed} words, got {}",
                words.len()
            )));
        }
        if !len.is_multiple_of(64) {
            if let Some(&last) = words.last() {
                if last >> (len % 64) != 0 {
                    return Err(crate::Error::Malformed(
                        "nonzero padding bits in bit buffer".into(),
                    ));
                }
            }
        }
        Ok(BitBuf { words, len })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Append the low `width` bits of `value`.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value >> width == 0, "value wider than field");
        if width == 0 {
            return;
        }
        let off = (self.len % 64) as u32;
        if off == 0 {
            self.words.push(value);
        } else {
            *self.words.last_mut().unwrap() |= value << off;
            if off + width > 64 {
                self.words.push(value >> (64 - off));
            }
        }
        self.len += width as u64;
    }

    pub fn push_bit(&mut self, bit: bool) {
        self.push_bits(bit as u64, 1);
    }

    /// Read `width` bits starting at bit position `pos` (0-based).
    #[inline]
    pub fn get_bits(&self, pos: u64, width: u32) -> u64 {
        let mut probes = Probes::new();
        self.get_bits_probed(pos, width, &mut probes)
    }

    #[inline]
    pub fn get_bits_probed(&self, pos: u64, width: u32, probes: &mut Probes) -> u64 {
        debug_assert!(width <= 64);
        debug_assert!(
            pos + width as u64 <= self.len,
            "read past end of bit buffer"
        );
        if width == 0 {
            return 0;
        }
        let word = (pos / 64) as usize;
        let off = (pos % 64) as u32;
        let lo = self.words[word] >> off;
        let mask = if width == 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        };
        if off + width <= 64 {
            probes.count(1);
            lo & mask
        } else {
            probes.count(2);
            (lo | (self.words[word + 1] << (64 - off))) & mask
        }
    }

    #[inline]
    pub fn get_bit(&self, pos: u64) -> bool {
        debug_assert!(pos < self.len);
        (self.words[(pos / 64) as usize] >> (pos % 64)) & 1 == 1
    }

    /// Exact payload size in bits.
    pub fn space_bits(&self) -> u64 {
        self.len
    }
}

/// Immutable array of `len` integers, each stored in exactly `width` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedIntVec {
    buf: BitBuf,
    width: u32,
    len: u64,
}

impl PackedIntVec {
    pub fn new(width: u32) -> Self {
        assert!((1..=64).contains(&width));
        PackedIntVec {
            buf: BitBuf::new(),
            width,
            len: 0,
        }
    }

    pub fn from_values(width: u32, values: impl IntoIterator<Item = u64>) -> Self {
        let mut v = Self::new(width);
        for value in values {
            v.push(value);
        }
        v
    }

    /// Rebuild from a serialized buffer; the bit length must be a multiple of `width`.
    pub fn from_buf(width: u32, buf: BitBuf) -> crate::Result<Self> {
        if width == 0 || width > 64 {
            return Err(crate::Error::Malformed(format!(
                "packed array width {width} out of range"
            )));
        }
        if !buf.len().is_multiple_of(width as u64) {
            return Err(crate::Error::Malformed(format!(
                "packed array bit length {} not a multiple of width {width}",
                buf.len()
            )));
        }
        let len = buf.len() / width as u64;
        Ok(PackedIntVec { buf, width, len })
    }

    pub fn push(&mut self, value: u64) {
        self.buf.push_bits(value, self.width);
        self.len += 1;
    }

    #[inline]
    pub fn get(&self, index: u64) -> u64 {
        debug_assert!(index < self.len, "packed array index out of bounds");
        self.buf.get_bits(index * self.width as u64, self.width)
    }

    #[inline]
    pub fn get_probed(&self, index: u64, probes: &mut Probes) -> u64 {
        debug_assert!(index < self.len, "packed array index out of bounds");
        self.buf
            .get_bits_probed(index * self.width as u64, self.width, probes)
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn buf(&self) -> &BitBuf {
        &self.buf
    }

    pub fn space_bits(&self) -> u64 {
        self.buf.space_bits()
    }
}
