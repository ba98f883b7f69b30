//! Loglog-time structure: bucket predecessor over dense samples.
//!
//! Prefix sums sampled every `ceil(lg lg n)` groups go into a
//! [`PredecessorDict`]; the differences for the skipped groups stay in the
//! same shadow-marked stream the compact structure uses, so a query is one
//! dictionary lookup plus a scan of at most one short block. Class counts
//! are kept as a plain fixed-width array for single-probe access.

use crate::bits::{bits_for, ceil_lg, BitBuf, PackedIntVec};
use crate::bitvec::BitVector;
use crate::partition::GroupSequence;
use crate::predecessor::PredecessorDict;
use crate::probe::Probes;
use crate::serialize::{Dump, Field, StructureKind};
use crate::Result;

use super::{check_label, EquivQuery, GroupLocation, PredStep, HEADER_BITS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastEq {
    pub(crate) n: u64,
    pub(crate) c: u64,
    pub(crate) k: u64,
    /// Sampling period: `max(1, ceil(lg ceil(lg n)))`.
    pub(crate) step: u32,
    pub(crate) delta_stream: BitBuf,
    pub(crate) delta_marks: BitVector,
    pub(crate) counts: PackedIntVec,
    pub(crate) samples: PredecessorDict,
    pub(crate) sample_weights: PackedIntVec,
}

impl FastEq {
    pub fn build(seq: &GroupSequence) -> Self {
        let n = seq.n();
        let k = seq.k();
        let step = ceil_lg(ceil_lg(n).max(1) as u64).max(1);
        let mut stream = BitBuf::new();
        let mut marks = BitBuf::new();
        for g in 1..=k {
            let delta = seq.delta(g);
            let width = bits_for(delta);
            marks.push_bit(true);
            for _ in 1..width {
                marks.push_bit(false);
            }
            stream.push_bits(delta, width);
        }
        let width = bits_for(n);
        let mut keys = Vec::new();
        let mut sample_weights = PackedIntVec::new(width);
        let mut q = step as u64;
        while q <= k {
            keys.push(seq.prefix_sum(q));
            sample_weights.push(seq.group(q).weight());
            q += step as u64;
        }
        FastEq {
            n,
            c: seq.c(),
            k,
            step,
            delta_stream: stream,
            delta_marks: BitVector::from_bitbuf(marks, step),
            counts: PackedIntVec::from_values(width, (1..=k).map(|g| seq.group(g).count)),
            samples: PredecessorDict::build(&keys, n).expect("prefix sums strictly increase"),
            sample_weights,
        }
    }

    fn pred_step(&self, x: u64, probes: &mut Probes) -> PredStep {
        let hit = if x >= 2 {
            self.samples
                .predecessor_probed(x - 1, probes)
                .expect("x - 1 within universe")
        } else {
            None
        };
        let (mut group, mut sum, mut weight) = match hit {
            None => (0u64, 0u64, 0u64),
            Some((key, rank)) => (
                rank * self.step as u64,
                key,
                self.sample_weights.get_probed(rank - 1, probes),
            ),
        };
        let mut pos = self
            .delta_marks
            .select1_probed(group + 1, probes)
            .expect("scan start within stream");
        loop {
            let next = self
                .delta_marks
                .next_one_probed(pos + 1, probes)
                .unwrap_or(self.delta_stream.len() + 1);
            let delta = self
                .delta_stream
                .get_bits_probed(pos - 1, (next - pos) as u32, probes);
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

    pub fn to_dump(&self) -> Dump {
        let width = bits_for(self.n);
        Dump {
            kind: StructureKind::Fast,
            n: self.n,
            c: self.c,
            k: self.k,
            fields: vec![
                Field::raw("delta_stream", self.delta_stream.clone()),
                Field::raw("delta_marks", self.delta_marks.payload().clone()),
                Field::packed("group_counts", &self.counts),
                Field::packed(
                    "sample_keys",
                    &PackedIntVec::from_values(width, self.samples.keys()),
                ),
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
        let step = ceil_lg(ceil_lg(n).max(1) as u64).max(1);
        let width = bits_for(n);
        let delta_stream = dump.take("delta_stream")?.into_raw()?;
        let delta_marks = BitVector::from_bitbuf(dump.take("delta_marks")?.into_raw()?, step);
        let counts = dump
            .take("group_counts")?
            .expect_width(width)?
            .into_packed()?;
        let sample_keys = dump
            .take("sample_keys")?
            .expect_width(width)?
            .into_packed()?;
        let sample_weights = dump
            .take("sample_weights")?
            .expect_width(width)?
            .into_packed()?;
        if delta_marks.count_ones() != k
            || delta_marks.len() != delta_stream.len()
            || delta_marks.select1(1) != Some(1)
            || counts.len() != k
        {
            return Err(crate::Error::Malformed(
                "stream or count array inconsistent with header".into(),
            ));
        }
        if sample_keys.len() != k / step as u64 || sample_weights.len() != sample_keys.len() {
            return Err(crate::Error::Malformed("sample arrays truncated".into()));
        }
        let deltas = super::decode_marked_stream(&delta_stream, &delta_marks);
        let group_counts: Vec<u64> = counts.iter().collect();
        let groups = super::groups_from_deltas(&deltas, &group_counts)?;
        let seq = crate::partition::GroupSequence::try_from_groups(groups)?;
        if seq.n() != n || seq.c() != c || seq.k() != k {
            return Err(crate::Error::Malformed(
                "decoded streams disagree with the header".into(),
            ));
        }
        for q in 0..sample_keys.len() {
            let g = (q + 1) * step as u64;
            if sample_keys.get(q) != seq.prefix_sum(g)
                || sample_weights.get(q) != seq.group(g).weight()
            {
                return Err(crate::Error::Malformed(format!(
                    "absolute sample {q} disagrees with the streams"
                )));
            }
        }
        let keys: Vec<u64> = sample_keys.iter().collect();
        let samples = PredecessorDict::build(&keys, n)
            .map_err(|e| crate::Error::Malformed(format!("sample keys invalid: {e}")))?;
        Ok(FastEq {
            n,
            c,
            k,
            step,
            delta_stream,
            delta_marks,
            counts,
            samples,
            sample_weights,
        })
    }
}

impl EquivQuery for FastEq {
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
        vec![
            ("header", HEADER_BITS),
            ("delta_stream", self.delta_stream.space_bits()),
            ("delta_marks", self.delta_marks.space_bits()),
            ("group_counts", self.counts.space_bits()),
            ("sample_dict", self.samples.space_bits()),
            ("sample_weights", self.sample_weights.space_bits()),
        ]
    }
}
