//! Static predecessor dictionary over a sorted key set.
//!
//! Keys are bucketed by their high bits: the bucket array is sized to the
//! next power of two above the key count, so locating a bucket is one shift
//! and the binary search inside it runs over the handful of keys sharing
//! that prefix. Because the keys live in one global sorted array, the
//! predecessor of an empty or miss bucket is simply the key just before the
//! bucket's range.

use crate::bits::{bits_for, PackedIntVec};
use crate::probe::Probes;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredecessorDict {
    universe: u64,
    /// Strictly increasing keys in `[1, universe]`.
    keys: PackedIntVec,
    /// Index of the first key in each bucket; one trailing sentinel entry.
    bucket_start: PackedIntVec,
    shift: u32,
}

impl PredecessorDict {
    pub fn build(keys: &[u64], universe: u64) -> Result<Self> {
        if universe == 0 {
            return Err(Error::InvalidInput("empty universe".into()));
        }
        for (i, &key) in keys.iter().enumerate() {
            if key == 0 || key > universe {
                return Err(Error::InvalidInput(format!(
                    "key {key} outside universe [1, {universe}]"
                )));
            }
            if i > 0 && keys[i - 1] >= key {
                return Err(Error::InvalidInput(
                    "keys must be strictly increasing".into(),
                ));
            }
        }
        let m = keys.len() as u64;
        let universe_bits = bits_for(universe);
        let bucket_bits = bits_for(m).min(universe_bits);
        let shift = universe_bits - bucket_bits;
        let buckets = 1u64 << bucket_bits;
        let mut bucket_start = PackedIntVec::new(bits_for(m));
        let mut next = 0usize;
        for b in 0..buckets {
            while next < keys.len() && keys[next] >> shift < b {
                next += 1;
            }
            bucket_start.push(next as u64);
        }
        bucket_start.push(m);
        Ok(PredecessorDict {
            universe,
            keys: PackedIntVec::from_values(bits_for(universe), keys.iter().copied()),
            bucket_start,
            shift,
        })
    }

    pub fn len(&self) -> u64 {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    /// Key at 1-based rank.
    pub fn key(&self, rank: u64) -> u64 {
        self.keys.get(rank - 1)
    }

    pub fn keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.keys.iter()
    }

    /// Largest key `<= x` with its 1-based rank, or `None` below the minimum.
    pub fn predecessor(&self, x: u64) -> Result<Option<(u64, u64)>> {
        let mut probes = Probes::new();
        self.predecessor_probed(x, &mut probes)
    }

    pub fn predecessor_probed(&self, x: u64, probes: &mut Probes) -> Result<Option<(u64, u64)>> {
        if x == 0 || x > self.universe {
            return Err(Error::OutOfRange {
                what: "query point",
                value: x,
                max: self.universe,
            });
        }
        if self.keys.is_empty() {
            return Ok(None);
        }
        let b = x >> self.shift;
        let mut lo = self.bucket_start.get_probed(b, probes);
        let mut hi = self.bucket_start.get_probed(b + 1, probes);
        // Largest index with key <= x, searched within the bucket.
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.keys.get_probed(mid, probes) <= x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == 0 {
            return Ok(None);
        }
        Ok(Some((self.keys.get_probed(lo - 1, probes), lo)))
    }

    pub fn space_bits(&self) -> u64 {
        self.keys.space_bits() + self.bucket_start.space_bits()
    }
}
