//! Direct labeling schemes: equivalence answered from the labels alone.
//!
//! Two encodings are provided. [`RangeLabelAssignment`] gives every class a
//! contiguous integer range sized by its rank in the nonincreasing size
//! order: the `i`-th largest class holds at most `n/i` elements, so ranges
//! of `floor(n/i)` integers (and `[1, n]` for the largest) always suffice.
//! [`BitLabel`] packs the pair (class rank, in-class rank) into a
//! self-delimiting bit string of at most `lg n + lg lg n + 2` bits.

use crate::bits::ceil_lg;
use crate::partition::{ClassId, ClassSizes, GroupSequence};
use crate::{Error, Result};

/// Contiguous integer ranges per class, classes ordered by nonincreasing
/// size. Element ids `1..=n` follow the same order, class by class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeLabelAssignment {
    n: u64,
    /// Class sizes, nonincreasing.
    sizes: Vec<u64>,
    /// First label of each class range; ranges are consecutive.
    range_lo: Vec<u64>,
    /// First element id (exclusive prefix sum of sizes).
    elem_start: Vec<u64>,
    max_label: u64,
}

impl RangeLabelAssignment {
    pub fn from_sizes(sizes: &ClassSizes) -> Self {
        let n = sizes.n();
        let mut ordered = sizes.sizes().to_vec();
        ordered.sort_unstable_by(|a, b| b.cmp(a));
        let mut range_lo = Vec::with_capacity(ordered.len());
        let mut elem_start = Vec::with_capacity(ordered.len());
        let mut next_label = 1u64;
        let mut next_elem = 0u64;
        let mut max_label = 0u64;
        for (idx, &size) in ordered.iter().enumerate() {
            let i = idx as u64 + 1;
            let span = if i == 1 { n } else { n / i };
            debug_assert!(
                size <= span,
                "class {i} of size {size} exceeds n/i = {span}"
            );
            range_lo.push(next_label);
            elem_start.push(next_elem);
            max_label = max_label.max(next_label + size - 1);
            next_label += span;
            next_elem += size;
        }
        RangeLabelAssignment {
            n,
            sizes: ordered,
            range_lo,
            elem_start,
            max_label,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn class_count(&self) -> u64 {
        self.sizes.len() as u64
    }

    /// Largest label actually assigned to an element.
    pub fn max_label(&self) -> u64 {
        self.max_label
    }

    /// Label range `[lo, hi]` reserved for class `i` (1-based, size order).
    pub fn class_range(&self, i: u64) -> (u64, u64) {
        let lo = self.range_lo[(i - 1) as usize];
        let span = if i == 1 { self.n } else { self.n / i };
        (lo, lo + span - 1)
    }

    /// Label of element `e` (1-based id in the size-ordered layout).
    pub fn label_of_element(&self, e: u64) -> Result<u64> {
        if e == 0 || e > self.n {
            return Err(Error::OutOfRange {
                what: "element id",
                value: e,
                max: self.n,
            });
        }
        let class = self.elem_start.partition_point(|&s| s < e) - 1;
        let offset = e - 1 - self.elem_start[class];
        Ok(self.range_lo[class] + offset)
    }

    /// Class owning an assigned label; unassigned values are rejected.
    pub fn class_of_label(&self, label: u64) -> Result<u64> {
        if label == 0 {
            return Err(Error::InvalidInput("label 0 was never assigned".into()));
        }
        let idx = self.range_lo.partition_point(|&lo| lo <= label);
        if idx == 0 {
            return Err(Error::InvalidInput(format!("label {label} unassigned")));
        }
        let class = idx - 1;
        if label - self.range_lo[class] >= self.sizes[class] {
            return Err(Error::InvalidInput(format!(
                "label {label} lies in a reserved but unassigned slot"
            )));
        }
        Ok(class as u64 + 1)
    }

    pub fn equivalent(&self, x: u64, y: u64) -> Result<bool> {
        Ok(self.class_of_label(x)? == self.class_of_label(y)?)
    }
}

/// Width of the length prefix: enough to store any value in
/// `[0, floor(lg n)]`.
pub fn prefix_width(n: u64) -> u32 {
    assert!(n >= 1);
    let max_len = 63 - n.leading_zeros(); // floor(lg n)
    ceil_lg(max_len as u64 + 1)
}

/// The guaranteed cap on bit-label length, `floor(lg n + lg lg n + 2)`,
/// defined for `n >= 2`.
pub fn bit_label_length_bound(n: u64) -> u32 {
    assert!(n >= 2);
    let lg_n = (n as f64).log2();
    (lg_n + lg_n.log2() + 2.0).floor() as u32
}

/// A packed `(prefix, class, rank)` label. The class rank `i` is written
/// with its leading one dropped, `i - 2^floor(lg i)` in `floor(lg i)` bits,
/// and the prefix holds that field's width, so decoding needs no
/// per-label metadata beyond `n`. The rank field stores `j - 1` in
/// `ceil(lg floor(n/i))` bits. Every field width is forced by `n` and the
/// decoded prefix, and the total never exceeds `lg n + lg lg n + 2` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitLabel {
    bits: u64,
    len: u32,
}

impl BitLabel {
    /// Encode class rank `i` (1-based, by nonincreasing size) and in-class
    /// rank `j`.
    pub fn encode(n: u64, i: u64, j: u64) -> Result<BitLabel> {
        if n == 0 {
            return Err(Error::InvalidInput("empty element set".into()));
        }
        if i == 0 || i > n {
            return Err(Error::OutOfRange {
                what: "class rank",
                value: i,
                max: n,
            });
        }
        let cap = n / i;
        if j == 0 || j > cap {
            return Err(Error::OutOfRange {
                what: "rank in class",
                value: j,
                max: cap,
            });
        }
        let w_p = prefix_width(n);
        let class_width = 63 - i.leading_zeros(); // floor(lg i)
        let rank_width = ceil_lg(cap);
        let mut bits = class_width as u64;
        bits = (bits << class_width) | (i - (1u64 << class_width));
        bits = (bits << rank_width) | (j - 1);
        Ok(BitLabel {
            bits,
            len: w_p + class_width + rank_width,
        })
    }

    /// Inverse of [`BitLabel::encode`] for the same `n`.
    pub fn decode(&self, n: u64) -> Result<(u64, u64)> {
        if n == 0 {
            return Err(Error::InvalidInput("empty element set".into()));
        }
        let w_p = prefix_width(n);
        if self.len < w_p {
            return Err(Error::Malformed(format!(
                "label of {} bits is shorter than its prefix ({w_p} bits)",
                self.len
            )));
        }
        let class_width = (self.take(0, w_p)) as u32;
        if w_p + class_width > self.len {
            return Err(Error::Malformed(
                "class field extends past the label".into(),
            ));
        }
        let i = (1u64 << class_width) + self.take(w_p, class_width);
        if i > n {
            return Err(Error::Malformed(format!("class rank {i} exceeds n = {n}")));
        }
        let rank_width = ceil_lg(n / i);
        if w_p + class_width + rank_width != self.len {
            return Err(Error::Malformed(format!(
                "label length {} inconsistent with class rank {i}",
                self.len
            )));
        }
        let j = self.take(w_p + class_width, rank_width) + 1;
        if j > n / i {
            return Err(Error::Malformed(format!(
                "rank {j} exceeds the capacity of class {i}"
            )));
        }
        Ok((i, j))
    }

    fn take(&self, start: u32, width: u32) -> u64 {
        if width == 0 {
            return 0;
        }
        (self.bits >> (self.len - start - width)) & ((1u64 << width) - 1)
    }

    pub fn len_bits(&self) -> u32 {
        self.len
    }

    /// MSB-first binary rendering, as written by the label export.
    pub fn to_binary_string(&self) -> String {
        (0..self.len)
            .map(|k| if self.take(k, 1) == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn from_binary_string(s: &str) -> Result<BitLabel> {
        if s.len() > 64 {
            return Err(Error::Malformed("label string too long".into()));
        }
        let mut bits = 0u64;
        for ch in s.chars() {
            match ch {
                '0' => bits <<= 1,
                '1' => bits = (bits << 1) | 1,
                _ => return Err(Error::Malformed(format!("bad label character '{ch}'"))),
            }
        }
        Ok(BitLabel {
            bits,
            len: s.len() as u32,
        })
    }

    /// Same-class test straight off the labels: compare class ranks.
    pub fn equivalent(&self, other: &BitLabel, n: u64) -> Result<bool> {
        Ok(self.decode(n)?.0 == other.decode(n)?.0)
    }
}

/// Mapping from the canonical group layout to class ranks by nonincreasing
/// size, bridging [`GroupSequence`] labels to the direct labeling schemes.
#[derive(Debug, Clone)]
pub struct SizeRankOrder {
    /// Classes in strictly larger-size groups, per group (1-based index 0 unused).
    larger_counts: Vec<u64>,
}

impl SizeRankOrder {
    pub fn new(seq: &GroupSequence) -> Self {
        let k = seq.k() as usize;
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_unstable_by(|&a, &b| seq.groups()[b].size.cmp(&seq.groups()[a].size));
        let mut larger_counts = vec![0u64; k + 1];
        let mut seen = 0u64;
        for &gi in &order {
            larger_counts[gi + 1] = seen;
            seen += seq.groups()[gi].count;
        }
        SizeRankOrder { larger_counts }
    }

    /// Class rank by nonincreasing size; within a group, by class index.
    pub fn class_rank(&self, id: ClassId) -> u64 {
        self.larger_counts[id.group as usize] + id.index_in_group
    }

    /// Bit label for the element holding canonical label `x`.
    pub fn bit_label(&self, seq: &GroupSequence, x: u64) -> Result<BitLabel> {
        let (id, rank) = seq.decompose(x)?;
        BitLabel::encode(seq.n(), self.class_rank(id), rank)
    }
}
