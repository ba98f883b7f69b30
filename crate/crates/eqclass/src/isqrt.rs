//! Constant-time ceiling square root by table lookup.
//!
//! For an argument `i`, take `r = floor(lg i)` and keep the top
//! `ceil((r+1)/2)` bits: `a = i >> ceil(r/2)`. For a fixed parity of the bit
//! length of `i`, the slot `a` determines the shift, so a table entry per
//! `(parity, a)` holding `ceil(sqrt(a << shift))` brackets the answer:
//! `ceil(sqrt(i))` is either the entry or the entry plus one, settled by one
//! squaring. Two tables (odd and even bit lengths) of about
//! `2 * ceil(sqrt(2n))` small integers each cover all arguments up to `2n`.
//!
//! Note the second candidate is `entry + 1`, not the next table slot: at
//! slots just below a power of two, the next slot belongs to a different
//! argument range and can hold a far larger value (for example argument 122
//! maps to slot 15 needing candidates {11, 12}, while slot 16 serves
//! arguments 256..271 and must hold 16). Construction validates the
//! two-candidate property exhaustively for every supported argument.

use crate::bits::{bits_for, PackedIntVec};
use crate::probe::Probes;
use crate::{Error, Result};

/// Index of the most significant set bit, 0-based: `floor(lg i)`.
#[inline]
pub fn msb_index(i: u64) -> Result<u32> {
    if i == 0 {
        return Err(Error::InvalidInput("msb of zero is undefined".into()));
    }
    Ok(63 - i.leading_zeros())
}

/// `ceil(sqrt(v))` by Newton iteration; the independent reference the tables
/// are validated against.
pub fn ceil_sqrt_reference(v: u64) -> u64 {
    if v == 0 {
        return 0;
    }
    let mut x = 1u64 << ((63 - v.leading_zeros()) / 2 + 1);
    loop {
        let next = (x + v / x) / 2;
        if next >= x {
            break;
        }
        x = next;
    }
    // x = floor(sqrt(v))
    if x * x == v {
        x
    } else {
        x + 1
    }
}

/// Lookup tables answering `ceil(sqrt(i))` for `1 <= i <= 2n` in a bounded
/// number of word probes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtTables {
    max_arg: u64,
    /// Entries for arguments whose bit length is odd (msb index even).
    odd_len: PackedIntVec,
    /// Entries for arguments whose bit length is even (msb index odd).
    even_len: PackedIntVec,
}

#[inline]
fn slot_of(i: u64) -> (bool, u64) {
    let r = 63 - i.leading_zeros();
    let shift = r.div_ceil(2);
    (r.is_multiple_of(2), i >> shift)
}

/// Smallest argument mapping to `slot` in the given parity class.
fn slot_base(odd_len: bool, slot: u64) -> u64 {
    let bits = 64 - slot.leading_zeros();
    let shift = if odd_len { bits - 1 } else { bits };
    slot << shift
}

impl SqrtTables {
    /// Build tables covering arguments `1..=2n` and prove the candidate
    /// property for every one of them.
    pub fn build(n: u64) -> Self {
        assert!(n >= 1);
        let max_arg = 2 * n;
        // Top slot per table: one entry per msb class, cheap next to validation.
        let mut max_slot = [1u64; 2];
        let mut r = 0u32;
        while r <= 63 && 1u64 << r <= max_arg {
            let hi = max_arg.min((1u64 << (r + 1)) - 1);
            let (odd, slot) = slot_of(hi);
            let idx = if odd { 0 } else { 1 };
            max_slot[idx] = max_slot[idx].max(slot);
            r += 1;
        }
        let fill = |odd: bool, top: u64| {
            let entries: Vec<u64> = (1..=top)
                .map(|a| ceil_sqrt_reference(slot_base(odd, a)))
                .collect();
            let width = bits_for(entries.last().copied().unwrap_or(0));
            let mut table = PackedIntVec::new(width);
            table.push(0); // slot 0 unused
            for e in entries {
                table.push(e);
            }
            table
        };
        let tables = SqrtTables {
            max_arg,
            odd_len: fill(true, max_slot[0]),
            even_len: fill(false, max_slot[1]),
        };
        tables.validate_exhaustively();
        tables
    }

    /// Assert `ceil_sqrt(i)` equals the reference for every supported `i`.
    /// Runs in parallel when the `parallel` feature is enabled.
    fn validate_exhaustively(&self) {
        let check = |i: u64| {
            let got = self.ceil_sqrt(i).expect("argument in range");
            let want = ceil_sqrt_reference(i);
            assert_eq!(got, want, "square-root table wrong at {i}");
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (1..=self.max_arg).into_par_iter().for_each(check);
        }
        #[cfg(not(feature = "parallel"))]
        {
            (1..=self.max_arg).for_each(check);
        }
    }

    pub fn max_arg(&self) -> u64 {
        self.max_arg
    }

    pub fn ceil_sqrt(&self, i: u64) -> Result<u64> {
        let mut probes = Probes::new();
        self.ceil_sqrt_probed(i, &mut probes)
    }

    pub fn ceil_sqrt_probed(&self, i: u64, probes: &mut Probes) -> Result<u64> {
        if i == 0 || i > self.max_arg {
            return Err(Error::OutOfRange {
                what: "square root argument",
                value: i,
                max: self.max_arg,
            });
        }
        let (odd, slot) = slot_of(i);
        let table = if odd { &self.odd_len } else { &self.even_len };
        let candidate = table.get_probed(slot, probes);
        Ok(if candidate * candidate >= i {
            candidate
        } else {
            candidate + 1
        })
    }

    pub fn space_bits(&self) -> u64 {
        self.odd_len.space_bits() + self.even_len.space_bits()
    }

    pub fn space_report(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("sqrt_odd_len_table", self.odd_len.space_bits()),
            ("sqrt_even_len_table", self.even_len.space_bits()),
        ]
    }
}
