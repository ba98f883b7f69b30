//! Smallest structure: difference-encoded group weights.
//!
//! Group weights are stored as first differences in minimal binary, one
//! encoding per group, with a shadow bit sequence marking where each
//! encoding starts; group class-counts get the same treatment. Absolute
//! prefix sums (and the weight at the same point) are kept only every
//! `ceil(lg n)` groups. A query binary-searches the sparse sums, jumps to
//! the matching encoding via the shadow marks, and scans at most one block
//! of differences.

use crate::bits::{bits_for, ceil_lg, BitBuf, PackedIntVec};
use crate::bitvec::BitVector;
use crate::partition::GroupSequence;
use crate::probe::Probes;
use crate::serialize::{Dump, Field, StructureKind};
use crate::Result;

use super::{check_label, EquivQuery, GroupLocation, PredStep, HEADER_BITS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactEq {
    pub(crate) n: u64,
    pub(crate) c: u64,
    pub(crate) k: u64,
    /// Sampling period: one absolute sample every `block` groups.
    pub(crate) block: u32,
    pub(crate) delta_stream: BitBuf,
    pub(crate) delta_marks: BitVector,
    pub(crate) count_stream: BitBuf,
    pub(crate) count_marks: BitVector,
    pub(crate) sample_sums: PackedIntVec,
    pub(crate) sample_weights: PackedIntVec,
}

fn encode_stream(values: impl Iterator<Item = u64>, rate: u32) -> (BitBuf, BitVector) {
    let mut stream = BitBuf::new();
    let mut marks = BitBuf::new();
    for v in values {
        let width = bits_for(v);
        let mark_pos = stream.len();
        stream.push_bits(v, width);
        while marks.len() < mark_pos {
            marks.push_bit(false);
        }
        marks.push_bit(true);
        for _ in 1..width {
            marks.push_bit(false);
        }
    }
    (stream, BitVector::from_bitbuf(marks, rate))
}

impl CompactEq {
    pub fn build(seq: &GroupSequence) -> Self {
        let n = seq.n();
        let k = seq.k();
        let block = ceil_lg(n).max(1);
        let (delta_stream, delta_marks) = encode_stream((1..=k).map(|g| seq.delta(g)), block);
        let (count_stream, count_marks) = encode_stream((1..=k).map(|g| seq.group(g).count), block);
        let width = bits_for(n);
        let mut sample_sums = PackedIntVec::new(width);
        let mut sample_weights = PackedIntVec::new(width);
        let mut q = block as u64;
        while q <= k {
            sample_sums.push(seq.prefix_sum(q));
            sample_weights.push(seq.group(q).weight());
            q += block as u64;
        }
        CompactEq {
            n,
            c: seq.c(),
            k,
            block,
            delta_stream,
            delta_marks,
            count_stream,
            count_marks,
            sample_sums,
            sample_weights,
        }
    }

    /// Decode one stream entry whose encoding starts at 1-based mark
    /// position `pos`; returns the value and the next start position.
    fn decode_at(stream: &BitBuf, marks: &BitVector, pos: u64, probes: &mut Probes) -> (u64, u64) {
        let next = marks
            .next_one_probed(pos + 1, probes)
            .unwrap_or(stream.len() + 1);
        let width = (next - pos) as u32;
        let value = stream.get_bits_probed(pos - 1, width, probes);
        (value, next)
    }

    fn pred_step(&self, x: u64, probes: &mut Probes) -> PredStep {
        // Binary search the sparse sums for the last sample strictly below x.
        let mut lo = 0u64;
        let mut hi = self.sample_sums.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.sample_sums.get_probed(mid, probes) < x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let (mut group, mut sum, mut weight) = if lo == 0 {
            (0u64, 0u64, 0u64)
        } else {
            (
                lo * self.block as u64,
                self.sample_sums.get_probed(lo - 1, probes),
                self.sample_weights.get_probed(lo - 1, probes),
            )
        };
        // The label's group lies within the next block; scan its encodings.
        let mut pos = self
            .delta_marks
            .select1_probed(group + 1, probes)
            .expect("scan start within stream");
        loop {
            let (delta, next) = Self::decode_at(&self.delta_stream, &self.delta_marks, pos, probes);
            weight += delta;
            if sum + weight >= x {
                return PredStep {
                    before: group,
                    sum,
                    next_weight: weight,
                };
            }
            sum += weight;
            group += 1;
            pos = next;
        }
    }

    /// Class count of 1-based group `g`, read from the count stream.
    fn count_of(&self, g: u64, probes: &mut Probes) -> u64 {
        let pos = self
            .count_marks
            .select1_probed(g, probes)
            .expect("group in range");
        Self::decode_at(&self.count_stream, &self.count_marks, pos, probes).0
    }

    pub fn to_dump(&self) -> Dump {
        Dump {
            kind: StructureKind::Compact,
            n: self.n,
            c: self.c,
            k: self.k,
            fields: vec![
                Field::raw("delta_stream", self.delta_stream.clone()),
                Field::raw("delta_marks", self.delta_marks.payload().clone()),
                Field::raw("count_stream", self.count_stream.clone()),
                Field::raw("count_marks", self.count_marks.payload().clone()),
                Field::packed("sample_sums", &self.sample_sums),
                Field::packed("sample_weights", &self.sample_weights),
            ],
        }
    }

    pub fn from_dump(dump: &mut Dump) -> crate::Result<Self> {
        let (n, c, k) = (dump.n, dump.c, dump.k);
        if n == 0 || k == 0 || k > c || c > n {
            return Err(crate::Error::Malformed(format!(
                "inconsistent header n={n} c={c} k={k}"
            )));
        }
        let block = ceil_lg(n).max(1);
        let width = bits_for(n);
        let delta_stream = dump.take("delta_stream")?.into_raw()?;
        let delta_marks = BitVector::from_bitbuf(dump.take("delta_marks")?.into_raw()?, block);
        let count_stream = dump.take("count_stream")?.into_raw()?;
        let count_marks = BitVector::from_bitbuf(dump.take("count_marks")?.into_raw()?, block);
        let sample_sums = dump
            .take("sample_sums")?
            .expect_width(width)?
            .into_packed()?;
        let sample_weights = dump
            .take("sample_weights")?
            .expect_width(width)?
            .into_packed()?;
        for (marks, stream, what) in [
            (&delta_marks, &delta_stream, "delta"),
            (&count_marks, &count_stream, "count"),
        ] {
            if marks.count_ones() != k || marks.len() != stream.len() || marks.select1(1) != Some(1)
            {
                return Err(crate::Error::Malformed(format!(
                    "{what} stream does not hold {k} encodings from position 1"
                )));
            }
        }
        if sample_sums.len() != k / block as u64 || sample_weights.len() != sample_sums.len() {
            return Err(crate::Error::Malformed("sample arrays truncated".into()));
        }
        // Semantic validation: the decoded payload must describe the exact
        // canonical sequence the header promises, or queries could divide
        // by zero or scan forever.
        let deltas = super::decode_marked_stream(&delta_stream, &delta_marks);
        let counts = super::decode_marked_stream(&count_stream, &count_marks);
        let groups = super::groups_from_deltas(&deltas, &counts)?;
        let seq = crate::partition::GroupSequence::try_from_groups(groups)?;
        if seq.n() != n || seq.c() != c || seq.k() != k {
            return Err(crate::Error::Malformed(
                "decoded streams disagree with the header".into(),
            ));
        }
        for q in 0..sample_sums.len() {
            let g = (q + 1) * block as u64;
            if sample_sums.get(q) != seq.prefix_sum(g)
                || sample_weights.get(q) != seq.group(g).weight()
            {
                return Err(crate::Error::Malformed(format!(
                    "absolute sample {q} disagrees with the streams"
                )));
            }
        }
        Ok(CompactEq {
            n,
            c,
            k,
            block,
            delta_stream,
            delta_marks,
            count_stream,
            count_marks,
            sample_sums,
            sample_weights,
        })
    }
}

impl EquivQuery for CompactEq {
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
        let count = self.count_of(pred.before + 1, probes);
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
        let count = self.count_of(px.before + 1, probes);
        Ok(px.locate(x, count).same_class(&py.locate(y, count)))
    }

    fn space_report(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("header", HEADER_BITS),
            ("delta_stream", self.delta_stream.space_bits()),
            ("delta_marks", self.delta_marks.space_bits()),
            ("count_stream", self.count_stream.space_bits()),
            ("count_marks", self.count_marks.space_bits()),
            ("sample_sums", self.sample_sums.space_bits()),
            ("sample_weights", self.sample_weights.space_bits()),
        ]
    }
}
