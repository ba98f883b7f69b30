//! Canonical partition model.
//!
//! A partition of `n` elements into classes is reduced to its multiset of
//! class sizes, then grouped: all classes sharing one size `s` form a group
//! carrying `(s, count)` with weight `gamma = s * count`. Groups are ordered
//! by nondecreasing weight (ties by size), which induces the implicit
//! labeling: the classes of group 1 own labels `1..=gamma_1`, contiguous
//! class by class, and so on. Every query structure in this crate is built
//! on top of this ordering.

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::{Error, Result};

/// Multiset of class sizes; the raw description of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSizes {
    sizes: Vec<u64>,
    n: u64,
}

impl ClassSizes {
    pub fn new(sizes: Vec<u64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidInput("no class sizes given".into()));
        }
        let mut n = 0u64;
        for &s in &sizes {
            if s == 0 {
                return Err(Error::InvalidInput("class size must be positive".into()));
            }
            n = n
                .checked_add(s)
                .ok_or_else(|| Error::InvalidInput("element count overflows u64".into()))?;
        }
        Ok(ClassSizes { sizes, n })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn class_count(&self) -> u64 {
        self.sizes.len() as u64
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }
}

/// One group of the canonical decomposition: `count` classes of equal `size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Group {
    pub size: u64,
    pub count: u64,
}

impl Group {
    /// Elements contributed by this group.
    #[inline]
    pub fn weight(&self) -> u64 {
        self.size * self.count
    }
}

/// Identity of one class under the canonical ordering: group index and
/// position within the group, both 1-based. Only meaningful against the
/// [`GroupSequence`] it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassId {
    pub group: u64,
    pub index_in_group: u64,
}

/// The grouped, weight-sorted decomposition of a partition, plus its prefix
/// sums. This is the shared input to every query structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSequence {
    groups: Vec<Group>,
    /// prefix[i] = sum of weights of groups 1..=i+1.
    prefix: Vec<u64>,
    n: u64,
    c: u64,
}

impl GroupSequence {
    /// Group the sizes and order by nondecreasing weight, ties by size.
    pub fn from_sizes(sizes: &ClassSizes) -> Self {
        let mut tally: HashMap<u64, u64> = HashMap::new();
        for &s in sizes.sizes() {
            *tally.entry(s).or_insert(0) += 1;
        }
        Self::from_size_counts(tally)
    }

    /// Build from `(size, count)` pairs with distinct sizes and positive counts.
    pub fn from_size_counts(counts: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut groups: Vec<Group> = counts
            .into_iter()
            .map(|(size, count)| {
                assert!(size > 0 && count > 0, "empty group");
                Group { size, count }
            })
            .collect();
        assert!(!groups.is_empty(), "no groups");
        groups.sort_unstable_by_key(|g| (g.weight(), g.size));
        let mut prefix = Vec::with_capacity(groups.len());
        let mut total = 0u64;
        let mut c = 0u64;
        for g in &groups {
            total += g.weight();
            c += g.count;
            prefix.push(total);
        }
        let seq = GroupSequence {
            groups,
            prefix,
            n: total,
            c,
        };
        debug_assert!(seq.validate().is_ok());
        seq
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of classes.
    pub fn c(&self) -> u64 {
        self.c
    }

    /// Number of groups (distinct class sizes).
    pub fn k(&self) -> u64 {
        self.groups.len() as u64
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Group `g`, 1-based.
    pub fn group(&self, g: u64) -> Group {
        self.groups[(g - 1) as usize]
    }

    /// Prefix sum of weights through group `g`; `g = 0` gives 0.
    pub fn prefix_sum(&self, g: u64) -> u64 {
        if g == 0 {
            0
        } else {
            self.prefix[(g - 1) as usize]
        }
    }

    /// Weight difference `gamma_g - gamma_{g-1}` with `gamma_0 = 0`; the
    /// delta sequence the compact structures encode. Nonnegative by the
    /// canonical ordering.
    pub fn delta(&self, g: u64) -> u64 {
        let cur = self.group(g).weight();
        if g == 1 {
            cur
        } else {
            cur - self.group(g - 1).weight()
        }
    }

    /// Label of the element of class `id` with in-class rank `rank` (1-based).
    pub fn label_of(&self, id: ClassId, rank: u64) -> Result<u64> {
        if id.group == 0 || id.group > self.k() {
            return Err(Error::OutOfRange {
                what: "group index",
                value: id.group,
                max: self.k(),
            });
        }
        let g = self.group(id.group);
        if id.index_in_group == 0 || id.index_in_group > g.count {
            return Err(Error::OutOfRange {
                what: "class index in group",
                value: id.index_in_group,
                max: g.count,
            });
        }
        if rank == 0 || rank > g.size {
            return Err(Error::OutOfRange {
                what: "rank in class",
                value: rank,
                max: g.size,
            });
        }
        Ok(self.prefix_sum(id.group - 1) + (id.index_in_group - 1) * g.size + rank)
    }

    /// Inverse of [`GroupSequence::label_of`].
    pub fn decompose(&self, label: u64) -> Result<(ClassId, u64)> {
        if label == 0 || label > self.n {
            return Err(Error::OutOfRange {
                what: "label",
                value: label,
                max: self.n,
            });
        }
        // First group whose prefix sum reaches the label.
        let g = self.prefix.partition_point(|&p| p < label) as u64 + 1;
        let group = self.group(g);
        let offset = label - self.prefix_sum(g - 1);
        let index_in_group = offset.div_ceil(group.size);
        let rank = offset - (index_in_group - 1) * group.size;
        Ok((
            ClassId {
                group: g,
                index_in_group,
            },
            rank,
        ))
    }

    /// Smallest label of the class, used as its representative.
    pub fn smallest_label(&self, id: ClassId) -> Result<u64> {
        self.label_of(id, 1)
    }

    /// Class sizes in canonical order (group by group).
    pub fn class_sizes(&self) -> ClassSizes {
        let mut sizes = Vec::with_capacity(self.c as usize);
        for g in &self.groups {
            sizes.extend(std::iter::repeat_n(g.size, g.count as usize));
        }
        ClassSizes { sizes, n: self.n }
    }

    /// Assemble a sequence from groups already in canonical order,
    /// rejecting anything that violates the structural invariants. Used
    /// when reconstructing from untrusted serialized data.
    pub(crate) fn try_from_groups(groups: Vec<Group>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Malformed("no groups".into()));
        }
        let mut prefix = Vec::with_capacity(groups.len());
        let mut n = 0u64;
        let mut c = 0u64;
        for g in &groups {
            let weight = g
                .size
                .checked_mul(g.count)
                .ok_or_else(|| Error::Malformed("group weight overflows".into()))?;
            n = n
                .checked_add(weight)
                .ok_or_else(|| Error::Malformed("element count overflows".into()))?;
            c = c
                .checked_add(g.count)
                .ok_or_else(|| Error::Malformed("class count overflows".into()))?;
            prefix.push(n);
        }
        let seq = GroupSequence {
            groups,
            prefix,
            n,
            c,
        };
        seq.validate()?;
        Ok(seq)
    }

    /// Check every structural invariant; used by tests and after rebuilds.
    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 {
            return Err(Error::InvalidInput("empty group sequence".into()));
        }
        let mut seen = std::collections::HashSet::new();
        let mut total = 0u64;
        let mut classes = 0u64;
        let mut prev_weight = 0u64;
        for (i, g) in self.groups.iter().enumerate() {
            let idx = i as u64 + 1;
            if g.size == 0 || g.count == 0 {
                return Err(Error::InvalidInput("empty group".into()));
            }
            if !seen.insert(g.size) {
                return Err(Error::InvalidInput("duplicate group size".into()));
            }
            let w = g.weight();
            if w < prev_weight {
                return Err(Error::InvalidInput("weights not nondecreasing".into()));
            }
            if w == prev_weight && i > 0 && g.size <= self.groups[i - 1].size {
                return Err(Error::InvalidInput("weight tie not broken by size".into()));
            }
            if w < idx {
                return Err(Error::InvalidInput(format!(
                    "weight {w} below group index {idx}"
                )));
            }
            prev_weight = w;
            total += w;
            classes += g.count;
            if self.prefix[i] != total {
                return Err(Error::InvalidInput("prefix sums inconsistent".into()));
            }
        }
        if total != self.n || classes != self.c {
            return Err(Error::InvalidInput("totals inconsistent".into()));
        }
        let bound = ceil_sqrt_u64(2 * self.n);
        if k > bound {
            return Err(Error::InvalidInput(format!(
                "group count {k} exceeds ceil(sqrt(2n)) = {bound}"
            )));
        }
        if k > self.c {
            return Err(Error::InvalidInput("more groups than classes".into()));
        }
        Ok(())
    }
}

fn ceil_sqrt_u64(v: u64) -> u64 {
    crate::isqrt::ceil_sqrt_reference(v)
}

/// Explicit label-to-class table; the non-succinct ground truth used by
/// tests and harness cross-checks.
#[derive(Debug, Clone)]
pub struct NaiveOracle {
    class_of: Vec<(u32, u32)>,
}

impl NaiveOracle {
    pub fn new(seq: &GroupSequence) -> Self {
        assert!(
            seq.k() <= u32::MAX as u64 && seq.c() <= u32::MAX as u64,
            "oracle limited to u32 group/class indices"
        );
        let mut class_of = Vec::with_capacity(seq.n() as usize);
        for (gi, g) in seq.groups().iter().enumerate() {
            for idx in 1..=g.count {
                for _ in 0..g.size {
                    class_of.push((gi as u32 + 1, idx as u32));
                }
            }
        }
        NaiveOracle { class_of }
    }

    pub fn n(&self) -> u64 {
        self.class_of.len() as u64
    }

    pub fn class_of(&self, label: u64) -> Result<ClassId> {
        if label == 0 || label > self.n() {
            return Err(Error::OutOfRange {
                what: "label",
                value: label,
                max: self.n(),
            });
        }
        let (g, i) = self.class_of[(label - 1) as usize];
        Ok(ClassId {
            group: g as u64,
            index_in_group: i as u64,
        })
    }

    pub fn same_class(&self, x: u64, y: u64) -> Result<bool> {
        Ok(self.class_of(x)? == self.class_of(y)?)
    }
}

/// Exact number of integer partitions of `n`, by Euler's pentagonal-number
/// recurrence. Independent of everything else in the crate.
pub fn partition_count(n: u64) -> BigUint {
    let n = n as usize;
    let mut table: Vec<BigUint> = Vec::with_capacity(n + 1);
    table.push(BigUint::from(1u32));
    for m in 1..=n {
        let mut acc = BigUint::ZERO;
        let mut k = 1usize;
        loop {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > m {
                break;
            }
            let g2 = k * (3 * k + 1) / 2;
            // Signs alternate in pairs; the running value never dips below
            // zero when terms are applied in this order.
            if k % 2 == 1 {
                acc += &table[m - g1];
                if g2 <= m {
                    acc += &table[m - g2];
                }
            } else {
                acc -= &table[m - g1];
                if g2 <= m {
                    acc -= &table[m - g2];
                }
            }
            k += 1;
        }
        table.push(acc);
    }
    table.pop().unwrap()
}

/// `ceil(lg p(n))`: bits needed to distinguish all partitions of `n`.
pub fn info_lower_bound_bits(n: u64) -> u64 {
    let p = partition_count(n);
    let p_minus_one = p - 1u32;
    p_minus_one.bits()
}

/// Size of the label space needed by unique direct labelings:
/// `sum over i of floor(n / i)`.
pub fn label_space_size(n: u64) -> u64 {
    assert!(n >= 1);
    (1..=n).map(|i| n / i).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_partitions;

    fn seq_of(sizes: &[u64]) -> GroupSequence {
        GroupSequence::from_sizes(&ClassSizes::new(sizes.to_vec()).unwrap())
    }

    #[test]
    fn normalize_worked_example() {
        let seq = seq_of(&[1, 1, 2, 5]);
        assert_eq!(seq.n(), 9);
        assert_eq!(seq.c(), 4);
        assert_eq!(seq.k(), 3);
        assert_eq!(
            seq.groups(),
            &[
                Group { size: 1, count: 2 },
                Group { size: 2, count: 1 },
                Group { size: 5, count: 1 },
            ]
        );
        assert_eq!(
            (1..=3).map(|g| seq.prefix_sum(g)).collect::<Vec<_>>(),
            vec![2, 4, 9]
        );
        assert_eq!(
            (1..=3).map(|g| seq.delta(g)).collect::<Vec<_>>(),
            vec![2, 0, 3]
        );
    }

    #[test]
    fn normalize_degenerate_shapes() {
        let one_class = seq_of(&[7]);
        assert_eq!(one_class.k(), 1);
        assert_eq!(one_class.groups()[0], Group { size: 7, count: 1 });

        let singletons = seq_of(&[1; 7]);
        assert_eq!(singletons.k(), 1);
        assert_eq!(singletons.groups()[0], Group { size: 1, count: 7 });
    }

    #[test]
    fn normalize_rejects_bad_input() {
        assert!(ClassSizes::new(vec![]).is_err());
        assert!(ClassSizes::new(vec![3, 0, 1]).is_err());
    }

    #[test]
    fn label_layout_round_trip() {
        let seq = seq_of(&[1, 1, 2, 5]);
        let id = |group, index_in_group| ClassId {
            group,
            index_in_group,
        };
        assert_eq!(seq.label_of(id(2, 1), 2).unwrap(), 4);
        assert_eq!(seq.label_of(id(1, 1), 1).unwrap(), 1);
        assert_eq!(seq.label_of(id(3, 1), 5).unwrap(), 9);
        assert_eq!(seq.decompose(4).unwrap(), (id(2, 1), 2));
        assert_eq!(seq.decompose(1).unwrap(), (id(1, 1), 1));
        assert_eq!(seq.decompose(5).unwrap(), (id(3, 1), 1));
        assert!(seq.decompose(0).is_err());
        assert!(seq.decompose(10).is_err());
        assert!(seq.label_of(id(1, 1), 2).is_err());
        assert!(seq.label_of(id(4, 1), 1).is_err());
    }

    #[test]
    fn labels_cover_range_exactly_on_all_small_partitions() {
        for n in 1..=10u64 {
            for parts in enumerate_partitions(n) {
                let seq = seq_of(&parts);
                seq.validate().unwrap();
                let mut seen = vec![false; n as usize + 1];
                for (gi, g) in seq.groups().iter().enumerate() {
                    for idx in 1..=g.count {
                        for rank in 1..=g.size {
                            let id = ClassId {
                                group: gi as u64 + 1,
                                index_in_group: idx,
                            };
                            let label = seq.label_of(id, rank).unwrap();
                            assert!(!seen[label as usize], "duplicate label");
                            seen[label as usize] = true;
                            assert_eq!(seq.decompose(label).unwrap(), (id, rank));
                        }
                    }
                }
                assert!(seen[1..].iter().all(|&s| s));
            }
        }
    }

    #[test]
    fn oracle_worked_example() {
        let seq = seq_of(&[1, 1, 2, 5]);
        let oracle = NaiveOracle::new(&seq);
        assert!(oracle.same_class(3, 4).unwrap());
        assert!(oracle.same_class(7, 7).unwrap());
        assert!(!oracle.same_class(1, 2).unwrap());
        assert!(oracle.same_class(5, 9).unwrap());
        assert!(oracle.same_class(0, 1).is_err());
    }

    #[test]
    fn delta_count_claim_on_small_partitions() {
        // For every threshold t, the number of deltas >= t is at most
        // ceil(sqrt(2n/t)).
        for n in 1..=14u64 {
            for parts in enumerate_partitions(n) {
                let seq = seq_of(&parts);
                let deltas: Vec<u64> = (1..=seq.k()).map(|g| seq.delta(g)).collect();
                for &t in deltas.iter().filter(|&&d| d >= 1) {
                    let count = deltas.iter().filter(|&&d| d >= t).count() as u64;
                    let bound = crate::isqrt::ceil_sqrt_reference((2 * n).div_ceil(t));
                    assert!(
                        count <= bound,
                        "n={n} t={t} count={count} bound={bound} parts={parts:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn partition_count_matches_enumeration() {
        for n in 0..=20u64 {
            let enumerated = if n == 0 {
                1
            } else {
                enumerate_partitions(n).len() as u64
            };
            assert_eq!(partition_count(n), BigUint::from(enumerated), "p({n})");
        }
        assert_eq!(partition_count(4), BigUint::from(5u32));
        assert_eq!(partition_count(12), BigUint::from(77u32));
        assert_eq!(partition_count(100), BigUint::from(190569292u64));
    }

    #[test]
    fn info_bound_examples() {
        assert_eq!(info_lower_bound_bits(1), 0);
        assert_eq!(info_lower_bound_bits(4), 3);
        assert_eq!(info_lower_bound_bits(12), 7);
    }

    #[test]
    fn label_space_examples() {
        assert_eq!(label_space_size(1), 1);
        assert_eq!(label_space_size(4), 8);
        assert_eq!(label_space_size(10), 27);
    }
}
