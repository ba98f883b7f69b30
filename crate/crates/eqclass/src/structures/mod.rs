//! The three static same-class query structures.
//!
//! All three answer queries through the same two steps: locate the group of
//! a label by a predecessor search over the group prefix sums, then place
//! the label within the group by one division. They differ only in how the
//! predecessor is found:
//!
//! * [`CompactEq`]: binary search over sparse prefix-sum samples, then a
//!   short scan of difference encodings; smallest space.
//! * [`FastEq`]: a bucket predecessor dictionary over denser samples, then
//!   a few-step scan.
//! * [`ConstEq`]: full prefix sums plus an anchor array indexed by a
//!   table-driven square root; a bounded number of probes per query.

mod compact;
mod consttime;
mod fast;

pub use compact::CompactEq;
pub use consttime::ConstEq;
pub use fast::FastEq;

use crate::partition::ClassId;
use crate::probe::Probes;
use crate::{Error, Result};

/// Where a label landed: its group, its class within the group, and the
/// class size. Two labels are equivalent iff group and class match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupLocation {
    pub group: u64,
    pub class_in_group: u64,
    pub class_size: u64,
}

impl GroupLocation {
    pub fn class_id(&self) -> ClassId {
        ClassId {
            group: self.group,
            index_in_group: self.class_in_group,
        }
    }

    #[inline]
    pub fn same_class(&self, other: &GroupLocation) -> bool {
        self.group == other.group && self.class_in_group == other.class_in_group
    }
}

/// Result of the predecessor step shared by all query paths: the last group
/// whose prefix sum is strictly below the label, that sum, and the weight of
/// the following group.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PredStep {
    /// p(x): group count strictly before the label's group.
    pub before: u64,
    /// Prefix sum through group `before`.
    pub sum: u64,
    /// Weight (size * count) of group `before + 1`.
    pub next_weight: u64,
}

impl PredStep {
    /// Finish a query: split the group offset into (class, rank) given the
    /// class count of the group.
    #[inline]
    pub fn locate(&self, x: u64, class_count: u64) -> GroupLocation {
        debug_assert!(self.next_weight.is_multiple_of(class_count));
        let size = self.next_weight / class_count;
        let offset = x - self.sum;
        GroupLocation {
            group: self.before + 1,
            class_in_group: offset.div_ceil(size),
            class_size: size,
        }
    }
}

/// Common query surface of the static structures.
pub trait EquivQuery {
    fn n(&self) -> u64;

    /// Number of groups.
    fn k(&self) -> u64;

    /// Number of classes.
    fn c(&self) -> u64;

    fn find_probed(&self, x: u64, probes: &mut Probes) -> Result<GroupLocation>;

    fn same_class_probed(&self, x: u64, y: u64, probes: &mut Probes) -> Result<bool>;

    fn find(&self, x: u64) -> Result<GroupLocation> {
        self.find_probed(x, &mut Probes::new())
    }

    fn same_class(&self, x: u64, y: u64) -> Result<bool> {
        self.same_class_probed(x, y, &mut Probes::new())
    }

    /// Exact bits of every stored field, auxiliary directories included.
    fn space_report(&self) -> Vec<(&'static str, u64)>;

    fn space_bits(&self) -> u64 {
        self.space_report().iter().map(|(_, b)| b).sum()
    }
}

pub(crate) fn check_label(x: u64, n: u64) -> Result<()> {
    if x == 0 || x > n {
        return Err(Error::OutOfRange {
            what: "label",
            value: x,
            max: n,
        });
    }
    Ok(())
}

/// Bits of the fixed-size scalars every structure stores (n, k, c and the
/// like); counted so space reports stay exact.
pub(crate) const HEADER_BITS: u64 = 4 * 64;

/// Decode every value of a shadow-marked stream. Callers have already
/// checked that the mark count matches the expected entry count and that
/// the two sequences are the same length.
pub(crate) fn decode_marked_stream(
    stream: &crate::bits::BitBuf,
    marks: &crate::bitvec::BitVector,
) -> Vec<u64> {
    let mut values = Vec::with_capacity(marks.count_ones() as usize);
    let mut pos = 1u64;
    while pos <= stream.len() {
        let next = marks.next_one(pos + 1).unwrap_or(stream.len() + 1);
        values.push(stream.get_bits(pos - 1, (next - pos) as u32));
        pos = next;
    }
    values
}

/// Turn untrusted weight differences and class counts back into canonical
/// groups, rejecting zero counts and weights that do not split evenly.
pub(crate) fn groups_from_deltas(
    deltas: &[u64],
    counts: &[u64],
) -> Result<Vec<crate::partition::Group>> {
    let mut groups = Vec::with_capacity(deltas.len());
    let mut weight = 0u64;
    for (&delta, &count) in deltas.iter().zip(counts) {
        weight = weight
            .checked_add(delta)
            .ok_or_else(|| Error::Malformed("group weight overflows".into()))?;
        if count == 0 || weight == 0 || !weight.is_multiple_of(count) {
            return Err(Error::Malformed(format!(
                "group weight {weight} does not split into {count} classes"
            )));
        }
        groups.push(crate::partition::Group {
            size: weight / count,
            count,
        });
    }
    Ok(groups)
}
