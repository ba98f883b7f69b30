//! Plain bit sequences with select/rank support.
//!
//! The select directory stores the position of every `rate`-th one; queries
//! jump to the nearest stored position and scan forward over the payload
//! words. With the default `rate = 1` every one-position is stored and both
//! `select1` and `rank1` touch a small constant number of words regardless of
//! input. Larger rates shrink the directory in exchange for a bounded forward
//! scan, which is what the compact structures use: their one-gaps are capped
//! by the width of a single encoded value.

use crate::bits::{bits_for, BitBuf, PackedIntVec};
use crate::probe::Probes;
use crate::{Error, Result};

const SUPERBLOCK_BITS: u64 = 512;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVector {
    bits: BitBuf,
    ones: u64,
    rate: u32,
    /// 1-based positions of ones number 1, rate+1, 2*rate+1, ...
    select_dir: PackedIntVec,
    /// Ones strictly before each 512-bit superblock.
    rank_super: PackedIntVec,
    /// Ones within the superblock strictly before each word.
    rank_word: PackedIntVec,
}

impl BitVector {
    /// Build with the densest directory: every one-position stored.
    pub fn build(bits: &[bool]) -> Self {
        Self::with_rate_bools(bits, 1)
    }

    pub fn with_rate_bools(bits: &[bool], rate: u32) -> Self {
        let mut buf = BitBuf::with_capacity_bits(bits.len() as u64);
        for &b in bits {
            buf.push_bit(b);
        }
        Self::from_bitbuf(buf, rate)
    }

    // The word index also feeds position arithmetic, so the range loop stays.
    #[allow(clippy::needless_range_loop)]
    pub fn from_bitbuf(bits: BitBuf, rate: u32) -> Self {
        assert!(rate >= 1);
        let len = bits.len();
        let pos_width = bits_for(len.max(1));
        let mut select_dir = PackedIntVec::new(pos_width);
        let words = bits.words();
        let word_count = len.div_ceil(64) as usize;
        let supers = len.div_ceil(SUPERBLOCK_BITS);
        let mut rank_super = PackedIntVec::new(pos_width);
        let mut rank_word = PackedIntVec::new(bits_for(SUPERBLOCK_BITS - 1));
        let mut ones = 0u64;
        for s in 0..supers {
            rank_super.push(ones);
            let mut in_super = 0u64;
            let first_word = (s * SUPERBLOCK_BITS / 64) as usize;
            let last_word = (((s + 1) * SUPERBLOCK_BITS / 64) as usize).min(word_count);
            for w in first_word..last_word {
                rank_word.push(in_super);
                let mut word = words[w];
                if (w as u64 + 1) * 64 > len {
                    word &= (1u64 << (len % 64)) - 1;
                }
                let mut bitset = word;
                while bitset != 0 {
                    let tz = bitset.trailing_zeros() as u64;
                    if ones.is_multiple_of(rate as u64) {
                        select_dir.push(w as u64 * 64 + tz + 1);
                    }
                    ones += 1;
                    bitset &= bitset - 1;
                }
                in_super += word.count_ones() as u64;
            }
        }
        BitVector {
            bits,
            ones,
            rate,
            select_dir,
            rank_super,
            rank_word,
        }
    }

    pub fn len(&self) -> u64 {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> u64 {
        self.ones
    }

    pub fn rate(&self) -> u32 {
        self.rate
    }

    pub fn payload(&self) -> &BitBuf {
        &self.bits
    }

    /// Bit at 1-based position `pos`.
    pub fn get(&self, pos: u64) -> Result<bool> {
        if pos == 0 || pos > self.len() {
            return Err(Error::OutOfRange {
                what: "bit position",
                value: pos,
                max: self.len(),
            });
        }
        Ok(self.bits.get_bit(pos - 1))
    }

    /// Position (1-based) of the `j`-th one, or `None` if fewer than `j` ones.
    pub fn select1(&self, j: u64) -> Option<u64> {
        let mut probes = Probes::new();
        self.select1_probed(j, &mut probes)
    }

    pub fn select1_probed(&self, j: u64, probes: &mut Probes) -> Option<u64> {
        if j == 0 || j > self.ones {
            return None;
        }
        let slot = (j - 1) / self.rate as u64;
        let mut pos = self.select_dir.get_probed(slot, probes);
        let mut remaining = (j - 1) % self.rate as u64;
        while remaining > 0 {
            pos = self
                .next_one_probed(pos + 1, probes)
                .expect("directory counted more ones than exist");
            remaining -= 1;
        }
        Some(pos)
    }

    /// Number of ones in positions `[1, pos]`; `pos` may be 0.
    pub fn rank1(&self, pos: u64) -> Result<u64> {
        let mut probes = Probes::new();
        self.rank1_probed(pos, &mut probes)
    }

    pub fn rank1_probed(&self, pos: u64, probes: &mut Probes) -> Result<u64> {
        if pos > self.len() {
            return Err(Error::OutOfRange {
                what: "rank position",
                value: pos,
                max: self.len(),
            });
        }
        if pos == 0 {
            return Ok(0);
        }
        let idx = pos - 1;
        let sup = idx / SUPERBLOCK_BITS;
        let word = idx / 64;
        let base =
            self.rank_super.get_probed(sup, probes) + self.rank_word.get_probed(word, probes);
        let w = self.bits.words()[word as usize];
        probes.count(1);
        let within = (idx % 64) + 1;
        let mask = if within == 64 {
            u64::MAX
        } else {
            (1u64 << within) - 1
        };
        Ok(base + (w & mask).count_ones() as u64)
    }

    /// First one at 1-based position >= `from`, scanning payload words.
    pub fn next_one(&self, from: u64) -> Option<u64> {
        let mut probes = Probes::new();
        self.next_one_probed(from, &mut probes)
    }

    pub fn next_one_probed(&self, from: u64, probes: &mut Probes) -> Option<u64> {
        if from > self.len() || self.is_empty() {
            return None;
        }
        let start = from.max(1) - 1;
        let words = self.bits.words();
        let mut w = (start / 64) as usize;
        probes.count(1);
        let mut cur = words[w] & (u64::MAX << (start % 64));
        loop {
            if (w as u64 + 1) * 64 > self.len() && cur != 0 {
                cur &= (1u64 << (self.len() % 64)) - 1;
            }
            if cur != 0 {
                let pos = w as u64 * 64 + cur.trailing_zeros() as u64 + 1;
                return if pos <= self.len() { Some(pos) } else { None };
            }
            w += 1;
            if w as u64 * 64 >= self.len() {
                return None;
            }
            probes.count(1);
            cur = words[w];
        }
    }

    /// Recover the exact input bits.
    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.bits.get_bit(i)).collect()
    }

    /// Exact bits: payload plus every directory.
    pub fn space_bits(&self) -> u64 {
        self.bits.space_bits()
            + self.select_dir.space_bits()
            + self.rank_super.space_bits()
            + self.rank_word.space_bits()
    }

    pub fn directory_bits(&self) -> u64 {
        self.space_bits() - self.bits.space_bits()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn from_str(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn reference_select(bits: &[bool], j: u64) -> Option<u64> {
        let mut seen = 0;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                seen += 1;
                if seen == j {
                    return Some(i as u64 + 1);
                }
            }
        }
        None
    }

    fn reference_rank(bits: &[bool], pos: u64) -> u64 {
        bits[..pos as usize].iter().filter(|&&b| b).count() as u64
    }

    #[test]
    fn worked_example() {
        let bits = from_str("101001");
        let v = BitVector::build(&bits);
        assert_eq!(v.select1(1), Some(1));
        assert_eq!(v.select1(2), Some(3));
        assert_eq!(v.select1(3), Some(6));
        assert_eq!(v.select1(4), None);
        assert_eq!(v.rank1(3).unwrap(), 2);
        assert_eq!(v.rank1(0).unwrap(), 0);
        assert_eq!(v.rank1(6).unwrap(), 3);
        assert!(v.rank1(7).is_err());
    }

    #[test]
    fn degenerate_vectors() {
        let zeros = BitVector::build(&[false; 8]);
        assert_eq!(zeros.select1(1), None);
        assert_eq!(zeros.rank1(8).unwrap(), 0);

        let ones = BitVector::build(&[true; 5]);
        for j in 1..=5 {
            assert_eq!(ones.select1(j), Some(j));
        }
        assert_eq!(ones.rank1(5).unwrap(), 5);

        let single = BitVector::build(&[true]);
        assert_eq!(single.select1(1), Some(1));

        let empty = BitVector::build(&[]);
        assert_eq!(empty.select1(1), None);
        assert_eq!(empty.rank1(0).unwrap(), 0);
        assert_eq!(empty.space_bits(), 0);
    }

    #[test]
    fn agrees_with_linear_reference() {
        let mut rng = SplitMix64::new(0xbadc0de);
        for &len in &[1usize, 63, 64, 65, 511, 512, 513, 4097, 100_000, 1_000_000] {
            for &density_pct in &[1u64, 50, 99] {
                let bits: Vec<bool> = (0..len).map(|_| rng.below(100) < density_pct).collect();
                for &rate in &[1u32, 4, 16] {
                    let v = BitVector::with_rate_bools(&bits, rate);
                    let ones = bits.iter().filter(|&&b| b).count() as u64;
                    assert_eq!(v.count_ones(), ones);
                    for j in [1, 2, ones / 2, ones.saturating_sub(1), ones, ones + 1] {
                        if j >= 1 {
                            assert_eq!(v.select1(j), reference_select(&bits, j));
                        }
                    }
                    for pos in [0, 1, len as u64 / 3, len as u64] {
                        assert_eq!(v.rank1(pos).unwrap(), reference_rank(&bits, pos));
                    }
                    assert_eq!(v.to_bools(), bits);
                }
            }
        }
    }

    #[test]
    fn rank_of_select_is_identity() {
        let mut rng = SplitMix64::new(31337);
        let bits: Vec<bool> = (0..5000).map(|_| rng.below(4) == 0).collect();
        let v = BitVector::build(&bits);
        for j in 1..=v.count_ones() {
            let pos = v.select1(j).unwrap();
            assert_eq!(v.rank1(pos).unwrap(), j);
        }
    }

    #[test]
    fn next_one_matches_scan() {
        let bits = from_str("0010010001");
        let v = BitVector::build(&bits);
        assert_eq!(v.next_one(1), Some(3));
        assert_eq!(v.next_one(3), Some(3));
        assert_eq!(v.next_one(4), Some(6));
        assert_eq!(v.next_one(7), Some(10));
        assert_eq!(v.next_one(11), None);
    }

    #[test]
    fn constant_probe_budget_at_rate_one() {
        let mut rng = SplitMix64::new(99);
        for &density_pct in &[1u64, 50, 99] {
            let bits: Vec<bool> = (0..200_000).map(|_| rng.below(100) < density_pct).collect();
            let v = BitVector::build(&bits);
            let ones = v.count_ones();
            let mut worst_select = 0;
            let mut worst_rank = 0;
            for t in 0..500 {
                let j = rng.below(ones.max(1)) + 1;
                let mut p = Probes::new();
                v.select1_probed(j, &mut p);
                worst_select = worst_select.max(p.word_reads);
                let pos = (t * 401) % (bits.len() as u64 + 1);
                let mut p = Probes::new();
                v.rank1_probed(pos, &mut p).unwrap();
                worst_rank = worst_rank.max(p.word_reads);
            }
            // Directory entries may straddle a word boundary, so each packed
            // read costs at most two probes.
            assert!(
                worst_select <= 2,
                "select probes {worst_select} at density {density_pct}"
            );
            assert!(worst_rank <= 5, "rank probes {worst_rank}");
        }
    }

    #[test]
    fn space_doubles_with_length() {
        let mut rng = SplitMix64::new(7);
        let small: Vec<bool> = (0..60_000).map(|_| rng.below(2) == 0).collect();
        let big: Vec<bool> = (0..120_000).map(|_| rng.below(2) == 0).collect();
        let s = BitVector::build(&small).space_bits() as f64;
        let b = BitVector::build(&big).space_bits() as f64;
        let ratio = b / s;
        assert!(
            (1.8..=2.2).contains(&ratio),
            "doubling ratio {ratio} out of bounds"
        );
        assert!(BitVector::build(&[false; 64]).space_bits() >= 64);
    }
}
