//! Constant-probe structure: full prefix sums plus a triangular anchor array.
//!
//! `anchors[i]` records the last group whose prefix sum is at most
//! `i(i+1)/2`. Because the i-th group weight is at least `i`, the prefix
//! sums grow at least quadratically, which pins the group of any label `x`
//! to within one position of `anchors[ceil(sqrt(2x)) - 1]`. The square root
//! itself comes from the lookup tables in [`crate::isqrt`], so a query costs
//! a fixed handful of word probes at any `n`.

use crate::bits::{bits_for, PackedIntVec};
use crate::isqrt::{ceil_sqrt_reference, SqrtTables};
use crate::partition::GroupSequence;
use crate::probe::Probes;
use crate::serialize::{Dump, Field, StructureKind};
use crate::Result;

use super::{check_label, EquivQuery, GroupLocation, PredStep, HEADER_BITS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstEq {
    pub(crate) n: u64,
    pub(crate) c: u64,
    pub(crate) k: u64,
    pub(crate) prefix: PackedIntVec,
    pub(crate) counts: PackedIntVec,
    /// anchors[i-1] = max group j with prefix_sum(j) <= i(i+1)/2.
    pub(crate) anchors: PackedIntVec,
    pub(crate) sqrt: SqrtTables,
}

impl ConstEq {
    pub fn build(seq: &GroupSequence) -> Self {
        let n = seq.n();
        let k = seq.k();
        let width = bits_for(n);
        let prefix = PackedIntVec::from_values(width, (1..=k).map(|g| seq.prefix_sum(g)));
        let counts = PackedIntVec::from_values(width, (1..=k).map(|g| seq.group(g).count));
        let top = ceil_sqrt_reference(2 * n);
        let mut anchors = PackedIntVec::new(bits_for(k));
        let mut j = 0u64;
        for i in 1..=top {
            let threshold = i * (i + 1) / 2;
            while j < k && seq.prefix_sum(j + 1) <= threshold {
                j += 1;
            }
            anchors.push(j);
        }
        let structure = ConstEq {
            n,
            c: seq.c(),
            k,
            prefix,
            counts,
            anchors,
            sqrt: SqrtTables::build(n),
        };
        structure.validate_anchor_property(seq);
        structure
    }

    /// Spot-check that every sampled label's group sits within one position
    /// of its anchor.
    fn validate_anchor_property(&self, seq: &GroupSequence) {
        let stride = (self.n / 1024).max(1);
        let mut x = 1;
        while x <= self.n {
            let want = seq.decompose(x).expect("label in range").0.group - 1;
            let i = ceil_sqrt_reference(2 * x) - 1;
            let a = self.anchors.get(i - 1);
            assert!(
                a.max(want) - a.min(want) <= 1,
                "anchor property violated at x = {x}: predecessor {want}, anchor {a}"
            );
            x += stride;
        }
    }

    #[inline]
    fn prefix_at(&self, j: u64, probes: &mut Probes) -> u64 {
        if j == 0 {
            0
        } else {
            self.prefix.get_probed(j - 1, probes)
        }
    }

    fn pred_step(&self, x: u64, probes: &mut Probes) -> PredStep {
        let i = self
            .sqrt
            .ceil_sqrt_probed(2 * x, probes)
            .expect("2x within table range")
            - 1;
        let anchor = self.anchors.get_probed(i - 1, probes);
        // The true predecessor is the anchor give or take one; test from above.
        let mut p = (anchor + 1).min(self.k.saturating_sub(1));
        loop {
            if p == 0 || self.prefix_at(p, probes) < x {
                break;
            }
            p -= 1;
        }
        let sum = self.prefix_at(p, probes);
        let next = self.prefix_at(p + 1, probes);
        debug_assert!(sum < x && x <= next);
        PredStep {
            before: p,
            sum,
            next_weight: next - sum,
        }
    }

    /// Smallest label of the located class.
    pub fn class_start(&self, loc: &GroupLocation) -> u64 {
        self.class_start_probed(loc, &mut Probes::new())
    }

    pub fn class_start_probed(&self, loc: &GroupLocation, probes: &mut Probes) -> u64 {
        self.prefix_at(loc.group - 1, probes) + (loc.class_in_group - 1) * loc.class_size + 1
    }

    /// Reconstruct the group sequence this structure was built from.
    pub fn group_sequence(&self) -> GroupSequence {
        let mut counts = Vec::with_capacity(self.k as usize);
        let mut prev = 0u64;
        for g in 0..self.k {
            let sum = self.prefix.get(g);
            let weight = sum - prev;
            prev = sum;
            let count = self.counts.get(g);
            counts.push((weight / count, count));
        }
        GroupSequence::from_size_counts(counts)
    }

    /// Anchor entry for 1-based index `i`; exposed for validation sweeps.
    pub fn anchor(&self, i: u64) -> u64 {
        self.anchors.get(i - 1)
    }

    pub fn anchor_count(&self) -> u64 {
        self.anchors.len()
    }

    pub fn sqrt_tables(&self) -> &SqrtTables {
        &self.sqrt
    }

    pub fn to_dump(&self) -> Dump {
        Dump {
            kind: StructureKind::Const,
            n: self.n,
            c: self.c,
            k: self.k,
            fields: self.base_fields(),
        }
    }

    /// Fields shared with the dynamic structure's dump.
    pub(crate) fn base_fields(&self) -> Vec<Field> {
        vec![
            Field::packed("prefix_sums", &self.prefix),
            Field::packed("group_counts", &self.counts),
            Field::packed("anchors", &self.anchors),
        ]
    }

    pub fn from_dump(dump: &mut Dump) -> crate::Result<Self> {
        let (n, c, k) = (dump.n, dump.c, dump.k);
        if n == 0 || k == 0 || k > c || c > n {
            return Err(crate::Error::Malformed(format!(
                "inconsistent header n={n} c={c} k={k}"
            )));
        }
        let width = bits_for(n);
        let prefix = dump
            .take("prefix_sums")?
            .expect_width(width)?
            .into_packed()?;
        let counts = dump
            .take("group_counts")?
            .expect_width(width)?
            .into_packed()?;
        let anchors = dump
            .take("anchors")?
            .expect_width(bits_for(k))?
            .into_packed()?;
        if prefix.len() != k || counts.len() != k {
            return Err(crate::Error::Malformed(
                "prefix or count array length mismatch".into(),
            ));
        }
        if anchors.len() != ceil_sqrt_reference(2 * n) {
            return Err(crate::Error::Malformed("anchor array truncated".into()));
        }
        // Semantic validation: reconstruct the canonical groups and verify
        // both the header and the anchor array against them. Anchors are
        // load-bearing for correctness, so each entry is recomputed.
        let mut groups = Vec::with_capacity(k as usize);
        let mut prev = 0u64;
        for g in 0..k {
            let sum = prefix.get(g);
            let count = counts.get(g);
            if sum <= prev || count == 0 || !(sum - prev).is_multiple_of(count) {
                return Err(crate::Error::Malformed(format!(
                    "group {} has inconsistent prefix sum or count",
                    g + 1
                )));
            }
            groups.push(crate::partition::Group {
                size: (sum - prev) / count,
                count,
            });
            prev = sum;
        }
        let seq = crate::partition::GroupSequence::try_from_groups(groups)?;
        if seq.n() != n || seq.c() != c || seq.k() != k {
            return Err(crate::Error::Malformed(
                "decoded arrays disagree with the header".into(),
            ));
        }
        let mut j = 0u64;
        for i in 1..=anchors.len() {
            let threshold = i * (i + 1) / 2;
            while j < k && seq.prefix_sum(j + 1) <= threshold {
                j += 1;
            }
            if anchors.get(i - 1) != j {
                return Err(crate::Error::Malformed(format!(
                    "anchor {i} disagrees with the prefix sums"
                )));
            }
        }
        // The lookup tables are derived data; rebuilding revalidates them.
        Ok(ConstEq {
            n,
            c,
            k,
            prefix,
            counts,
            anchors,
            sqrt: SqrtTables::build(n),
        })
    }
}

impl EquivQuery for ConstEq {
    fn n(&self) -> u64 {
        self.n
    }

    fn k(&self) -> u64 {
        self.k
    }

    fn c(&self) -> u64 {
        self.c
    }

    fn find_probed(&self, x: u64, probes: &mut Probes) -> Result<GroupLocation> {
        check_label(x, self.n)?;
        let pred = self.pred_step(x, probes);
        let count = self.counts.get_probed(pred.before, probes);
        Ok(pred.locate(x, count))
    }

    fn same_class_probed(&self, x: u64, y: u64, probes: &mut Probes) -> Result<bool> {
        check_label(x, self.n)?;
        check_label(y, self.n)?;
        if x == y {
            return Ok(true);
        }
        let px = self.pred_step(x, probes);
        let py = self.pred_step(y, probes);
        if px.before != py.before {
            return Ok(false);
        }
        let count = self.counts.get_probed(px.before, probes);
        Ok(px.locate(x, count).same_class(&py.locate(y, count)))
    }

    fn space_report(&self) -> Vec<(&'static str, u64)> {
        let mut report = vec![
            ("header", HEADER_BITS),
            ("prefix_sums", self.prefix.space_bits()),
            ("group_counts", self.counts.space_bits()),
            ("anchors", self.anchors.space_bits()),
        ];
        report.extend(self.sqrt.space_report());
        report
    }
}
