//! Batched query evaluation over the read-only structures.
//!
//! The structures are immutable after construction, so batches of
//! independent queries fan out across threads. With the `parallel` feature
//! (default) the plain entry points run on rayon; the `_seq` variants are
//! always available and are what the benchmarks compare against.

use crate::probe::Probes;
use crate::structures::EquivQuery;
use crate::Result;

pub fn same_class_batch_seq<S: EquivQuery>(s: &S, pairs: &[(u64, u64)]) -> Result<Vec<bool>> {
    pairs.iter().map(|&(x, y)| s.same_class(x, y)).collect()
}

/// Per-pair answers plus the word probes each query cost.
pub fn probed_same_class_batch_seq<S: EquivQuery>(
    s: &S,
    pairs: &[(u64, u64)],
) -> Result<Vec<(bool, u64)>> {
    pairs
        .iter()
        .map(|&(x, y)| {
            let mut probes = Probes::new();
            let answer = s.same_class_probed(x, y, &mut probes)?;
            Ok((answer, probes.word_reads))
        })
        .collect()
}

#[cfg(feature = "parallel")]
pub fn same_class_batch<S: EquivQuery + Sync>(s: &S, pairs: &[(u64, u64)]) -> Result<Vec<bool>> {
    use rayon::prelude::*;
    pairs.par_iter().map(|&(x, y)| s.same_class(x, y)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn same_class_batch<S: EquivQuery + Sync>(s: &S, pairs: &[(u64, u64)]) -> Result<Vec<bool>> {
    same_class_batch_seq(s, pairs)
}

#[cfg(feature = "parallel")]
pub fn probed_same_class_batch<S: EquivQuery + Sync>(
    s: &S,
    pairs: &[(u64, u64)],
) -> Result<Vec<(bool, u64)>> {
    use rayon::prelude::*;
    pairs
        .par_iter()
        .map(|&(x, y)| {
            let mut probes = Probes::new();
            let answer = s.same_class_probed(x, y, &mut probes)?;
            Ok((answer, probes.word_reads))
        })
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn probed_same_class_batch<S: EquivQuery + Sync>(
    s: &S,
    pairs: &[(u64, u64)],
) -> Result<Vec<(bool, u64)>> {
    probed_same_class_batch_seq(s, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::random_class_sizes;
    use crate::partition::GroupSequence;
    use crate::rng::SplitMix64;
    use crate::structures::{CompactEq, ConstEq, FastEq};

    #[test]
    fn parallel_and_sequential_agree() {
        let mut rng = SplitMix64::new(0xbeef);
        let sizes = random_class_sizes(20_000, &mut rng);
        let seq = GroupSequence::from_sizes(&sizes);
        let pairs: Vec<(u64, u64)> = (0..5_000)
            .map(|_| (rng.range(1, seq.n()), rng.range(1, seq.n())))
            .collect();

        let compact = CompactEq::build(&seq);
        let fast = FastEq::build(&seq);
        let constant = ConstEq::build(&seq);

        let reference = same_class_batch_seq(&compact, &pairs).unwrap();
        assert_eq!(same_class_batch(&compact, &pairs).unwrap(), reference);
        assert_eq!(same_class_batch_seq(&fast, &pairs).unwrap(), reference);
        assert_eq!(same_class_batch(&fast, &pairs).unwrap(), reference);
        assert_eq!(same_class_batch_seq(&constant, &pairs).unwrap(), reference);
        assert_eq!(same_class_batch(&constant, &pairs).unwrap(), reference);

        let probed = probed_same_class_batch(&constant, &pairs).unwrap();
        let probed_seq = probed_same_class_batch_seq(&constant, &pairs).unwrap();
        assert_eq!(probed, probed_seq);
        for ((answer, _), want) in probed.iter().zip(&reference) {
            assert_eq!(answer, want);
        }
    }

    #[test]
    fn batch_surfaces_errors() {
        let seq = GroupSequence::from_sizes(&random_class_sizes(100, &mut SplitMix64::new(1)));
        let constant = ConstEq::build(&seq);
        assert!(same_class_batch(&constant, &[(1, 2), (0, 5)]).is_err());
        assert!(same_class_batch_seq(&constant, &[(1, 101)]).is_err());
    }
}
