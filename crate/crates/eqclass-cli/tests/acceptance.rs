//! Acceptance suite: every release gate as one test per criterion.
//!
//! Each test prints one `criterion NN PASS` line with its measured numbers
//! (visible under `--nocapture`); the test harness itself provides the
//! pass/fail verdict per criterion. Budget-style constants asserted here
//! (probe ceilings, space constants) were pinned at their first measured
//! values and act as regressions thereafter.

use std::time::Instant;

use eqclass::dynamic::DynEq;
use eqclass::labels::{bit_label_length_bound, BitLabel, RangeLabelAssignment, SizeRankOrder};
use eqclass::oracle::{
    enumerate_partitions, random_class_sizes, random_class_sizes_min_classes, UnionFind,
};
use eqclass::partition::{
    info_lower_bound_bits, label_space_size, partition_count, ClassSizes, GroupSequence,
    NaiveOracle,
};
use eqclass::probe::Probes;
use eqclass::rng::SplitMix64;
use eqclass::structures::{CompactEq, ConstEq, EquivQuery, FastEq};

use eqclass_cli::{cmd_build, cmd_stats, Kind};

fn seq_of(sizes: &[u64]) -> GroupSequence {
    GroupSequence::from_sizes(&ClassSizes::new(sizes.to_vec()).unwrap())
}

/// Criterion 1: on every partition of every n <= 12, all four structures
/// answer every pair exactly like the explicit oracle, within a minute.
#[test]
fn criterion_01_exhaustive_oracle_agreement() {
    let started = Instant::now();
    let mut partitions_checked = 0u64;
    let mut pairs_checked = 0u64;
    for n in 1..=12u64 {
        let partitions = enumerate_partitions(n);
        if n == 12 {
            assert_eq!(partitions.len(), 77);
        }
        for parts in partitions {
            let seq = seq_of(&parts);
            let oracle = NaiveOracle::new(&seq);
            let compact = CompactEq::build(&seq);
            let fast = FastEq::build(&seq);
            let constant = ConstEq::build(&seq);
            let mut dynamic = DynEq::build(&seq);
            for x in 1..=n {
                for y in 1..=n {
                    let want = oracle.same_class(x, y).unwrap();
                    assert_eq!(compact.same_class(x, y).unwrap(), want, "compact {parts:?}");
                    assert_eq!(fast.same_class(x, y).unwrap(), want, "fast {parts:?}");
                    assert_eq!(constant.same_class(x, y).unwrap(), want, "const {parts:?}");
                    assert_eq!(dynamic.same(x, y).unwrap(), want, "dynamic {parts:?}");
                    pairs_checked += 1;
                }
            }
            partitions_checked += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "exhaustive sweep took {elapsed:?}, budget is one minute"
    );
    println!(
        "criterion 01 PASS: {partitions_checked} partitions, {pairs_checked} pairs, \
         4 structures vs oracle, {:.2}s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: across 100 random partitions at each of n = 2^10, 2^16,
/// 2^20, no emitted bit label exceeds floor(lg n + lg lg n + 2) bits.
#[test]
fn criterion_02_bit_label_length_bound() {
    let mut labels_checked = 0u64;
    for exp in [10u32, 16, 20] {
        let n = 1u64 << exp;
        let bound = bit_label_length_bound(n);
        let mut rng = SplitMix64::new(0x1abe1 + exp as u64);
        for _ in 0..100 {
            let sizes = random_class_sizes(n, &mut rng);
            let mut ordered = sizes.sizes().to_vec();
            ordered.sort_unstable_by(|a, b| b.cmp(a));
            // A label's width is fixed by its class rank alone, so checking
            // the first and last rank of each class covers every element.
            for (idx, &size) in ordered.iter().enumerate() {
                let i = idx as u64 + 1;
                for j in [1, size] {
                    let label = BitLabel::encode(n, i, j).unwrap();
                    assert!(
                        label.len_bits() <= bound,
                        "n=2^{exp} class {i} rank {j}: {} > {bound}",
                        label.len_bits()
                    );
                    labels_checked += 1;
                }
            }
        }
        // Belt and braces at the smallest grid point: every element label.
        if exp == 10 {
            let mut rng = SplitMix64::new(0x1abe1 + exp as u64);
            for _ in 0..100 {
                let seq = GroupSequence::from_sizes(&random_class_sizes(n, &mut rng));
                let order = SizeRankOrder::new(&seq);
                for x in 1..=n {
                    let label = order.bit_label(&seq, x).unwrap();
                    assert!(label.len_bits() <= bound);
                    labels_checked += 1;
                }
            }
        }
    }
    println!("criterion 02 PASS: {labels_checked} labels within the length bound, 0 violations");
}

/// Criterion 3: range labelings never emit a label beyond sum(floor(n/i)).
#[test]
fn criterion_03_range_label_space_bound() {
    let mut partitions_checked = 0u64;
    for exp in [10u32, 16, 20] {
        let n = 1u64 << exp;
        let space = label_space_size(n);
        let mut rng = SplitMix64::new(0x1abe1 + exp as u64);
        for _ in 0..100 {
            let sizes = random_class_sizes(n, &mut rng);
            let assignment = RangeLabelAssignment::from_sizes(&sizes);
            assert!(
                assignment.max_label() <= space,
                "n=2^{exp}: label {} beyond space {space}",
                assignment.max_label()
            );
            partitions_checked += 1;
        }
    }
    println!(
        "criterion 03 PASS: {partitions_checked} assignments within the label space, 0 violations"
    );
}

/// Criterion 4: table square roots equal the Newton reference for every
/// argument up to 2^20, inside 30 seconds.
#[test]
fn criterion_04_square_root_exhaustive() {
    let started = Instant::now();
    let tables = eqclass::isqrt::SqrtTables::build(1 << 19);
    assert_eq!(tables.max_arg(), 1 << 20);
    let mut mismatches = 0u64;
    for i in 1..=tables.max_arg() {
        if tables.ceil_sqrt(i).unwrap() != eqclass::isqrt::ceil_sqrt_reference(i) {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed();
    assert_eq!(mismatches, 0);
    assert!(
        elapsed.as_secs() < 30,
        "square-root sweep took {elapsed:?}, budget is 30s"
    );
    println!(
        "criterion 04 PASS: 2^20 arguments, 0 mismatches, {:.2}s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 5: for 50 random partitions of n = 10^4, the anchor array pins
/// every label's group to within one position.
#[test]
fn criterion_05_anchor_candidate_property() {
    let n = 10_000u64;
    let mut rng = SplitMix64::new(0xa2c4);
    let mut checked = 0u64;
    for _ in 0..50 {
        let seq = GroupSequence::from_sizes(&random_class_sizes(n, &mut rng));
        let constant = ConstEq::build(&seq);
        for x in 1..=n {
            let want = seq.decompose(x).unwrap().0.group - 1;
            let i = eqclass::isqrt::ceil_sqrt_reference(2 * x) - 1;
            let anchor = constant.anchor(i);
            assert!(
                want + 1 >= anchor && want <= anchor + 1,
                "x={x}: predecessor {want} vs anchor {anchor}"
            );
            checked += 1;
        }
    }
    println!("criterion 05 PASS: {checked} labels within one step of their anchor, 0 violations");
}

/// Criterion 6: in every partition this suite generates, the count of
/// weight differences at least t never exceeds ceil(sqrt(2n/t)).
#[test]
fn criterion_06_delta_count_claim() {
    let mut partitions_checked = 0u64;
    let mut check = |seq: &GroupSequence| {
        let n = seq.n();
        let mut deltas: Vec<u64> = (1..=seq.k()).map(|g| seq.delta(g)).collect();
        deltas.sort_unstable_by(|a, b| b.cmp(a));
        for (idx, &t) in deltas.iter().enumerate() {
            if t == 0 || (idx + 1 < deltas.len() && deltas[idx + 1] == t) {
                continue;
            }
            // `idx + 1` deltas are >= t; the bound is tightest at t itself.
            let count = idx as u64 + 1;
            let bound = eqclass::isqrt::ceil_sqrt_reference((2 * n).div_ceil(t));
            assert!(
                count <= bound,
                "n={n} t={t}: {count} deltas >= t, bound {bound}"
            );
        }
        partitions_checked += 1;
    };
    for n in 1..=12u64 {
        for parts in enumerate_partitions(n) {
            check(&seq_of(&parts));
        }
    }
    for exp in [10u32, 14, 16, 20] {
        let n = 1u64 << exp;
        let mut rng = SplitMix64::new(0xde17a + exp as u64);
        for _ in 0..60 {
            check(&GroupSequence::from_sizes(&random_class_sizes(n, &mut rng)));
        }
    }
    let mut rng = SplitMix64::new(0xde17a);
    for _ in 0..50 {
        check(&GroupSequence::from_sizes(&random_class_sizes(
            10_000, &mut rng,
        )));
    }
    println!(
        "criterion 06 PASS: delta-count claim on {partitions_checked} partitions, 0 violations"
    );
}

/// Criterion 7: quadrupling n roughly doubles the compact structure
/// (median ratio in [1.5, 3.0]) and the constant-time structure stays under
/// its pinned sqrt(n)-lg(n) budget.
#[test]
fn criterion_07_space_scaling() {
    let mut ratios = Vec::new();
    let mut norms = Vec::new();
    for exp in [14u32, 16] {
        let n = 1u64 << exp;
        let mut rng = SplitMix64::new(0x5bace + exp as u64);
        let median = |n: u64, rng: &mut SplitMix64| -> u64 {
            let mut bits: Vec<u64> = (0..30)
                .map(|_| {
                    let seq = GroupSequence::from_sizes(&random_class_sizes(n, rng));
                    CompactEq::build(&seq).space_bits()
                })
                .collect();
            bits.sort_unstable();
            bits[bits.len() / 2]
        };
        let base = median(n, &mut rng);
        let quadrupled = median(4 * n, &mut rng);
        let ratio = quadrupled as f64 / base as f64;
        assert!(
            (1.5..=3.0).contains(&ratio),
            "n=2^{exp}: median compact space ratio {ratio}"
        );
        ratios.push(ratio);

        // Constant-time structure budget: first measurement came to 4.33
        // and 4.05; pinned with slack for ensemble drift.
        let seq = GroupSequence::from_sizes(&random_class_sizes(n, &mut rng));
        let constant = ConstEq::build(&seq).space_bits() as f64;
        let normalized = constant / ((n as f64).sqrt() * (n as f64).log2());
        assert!(
            normalized <= 7.0,
            "n=2^{exp}: const space constant {normalized}"
        );
        norms.push(normalized);
    }
    println!(
        "criterion 07 PASS: compact 4x-space ratios {ratios:?} within [1.5, 3.0], \
         const space constants {norms:?} <= 7.0"
    );
}

/// Criterion 8: the constant-time query touches a bounded number of words
/// at every scale. First measurement over this deterministic ensemble came
/// to 21 word probes (flat across n = 10^3..10^6); pinned there.
#[test]
fn criterion_08_constant_probe_ceiling() {
    const PROBE_CEILING: u64 = 21;
    let mut worst = 0u64;
    // Every pair of every small partition.
    for n in 1..=12u64 {
        for parts in enumerate_partitions(n) {
            let constant = ConstEq::build(&seq_of(&parts));
            for x in 1..=n {
                for y in 1..=n {
                    let mut probes = Probes::new();
                    constant.same_class_probed(x, y, &mut probes).unwrap();
                    worst = worst.max(probes.word_reads);
                }
            }
        }
    }
    // Random pairs at the anchor-property grid and at growing n.
    let mut rng = SplitMix64::new(0xa2c4);
    for _ in 0..50 {
        let seq = GroupSequence::from_sizes(&random_class_sizes(10_000, &mut rng));
        let constant = ConstEq::build(&seq);
        for _ in 0..2_000 {
            let mut probes = Probes::new();
            constant
                .same_class_probed(rng.range(1, 10_000), rng.range(1, 10_000), &mut probes)
                .unwrap();
            worst = worst.max(probes.word_reads);
        }
    }
    let mut by_n = Vec::new();
    for &n in &[1_000u64, 100_000, 1_000_000] {
        let seq = GroupSequence::from_sizes(&random_class_sizes(n, &mut rng));
        let constant = ConstEq::build(&seq);
        let mut worst_here = 0;
        for _ in 0..20_000 {
            let mut probes = Probes::new();
            constant
                .same_class_probed(rng.range(1, n), rng.range(1, n), &mut probes)
                .unwrap();
            worst_here = worst_here.max(probes.word_reads);
        }
        by_n.push((n, worst_here));
        worst = worst.max(worst_here);
    }
    assert!(
        worst <= PROBE_CEILING,
        "constant-time queries reached {worst} probes"
    );
    println!(
        "criterion 08 PASS: worst probe count {worst} <= {PROBE_CEILING}, per-n {:?}",
        by_n
    );
}

/// Criterion 9: seeded mixed union/query runs agree operation-for-operation
/// with a plain union-find through at least three rebuilds, and every
/// relabel event is a permutation.
#[test]
fn criterion_09_dynamic_oracle_replay() {
    for &n in &[100u64, 10_000] {
        let mut rng = SplitMix64::new(0xd12a + n);
        let sizes = random_class_sizes_min_classes(n, n / 2, &mut rng);
        let seq = GroupSequence::from_sizes(&sizes);
        let mut dyn_eq = DynEq::build(&seq);
        let mut oracle = UnionFind::new(n as usize);
        for x in 2..=n {
            if seq.decompose(x).unwrap().0 == seq.decompose(x - 1).unwrap().0 {
                oracle.union(x as usize - 2, x as usize - 1);
            }
        }
        let mut label_to_id: Vec<usize> = (0..=n as usize).map(|x| x.saturating_sub(1)).collect();
        let mut rebuilds = 0u64;
        let mut checked = 0u64;
        for _ in 0..10 * n {
            let x = rng.range(1, n);
            let y = rng.range(1, n);
            if rng.below(2) == 0 {
                assert_eq!(
                    dyn_eq.same(x, y).unwrap(),
                    oracle.same(label_to_id[x as usize], label_to_id[y as usize]),
                    "n={n}"
                );
                checked += 1;
            } else {
                let report = dyn_eq.union(x, y).unwrap();
                assert_eq!(
                    report.merged,
                    oracle.union(label_to_id[x as usize], label_to_id[y as usize]),
                    "n={n}"
                );
                if let Some(event) = report.relabel {
                    rebuilds += 1;
                    assert!(event.is_permutation(n), "n={n}: relabel not a permutation");
                    let mut next = vec![0usize; n as usize + 1];
                    for (old, new) in event.iter() {
                        next[new as usize] = label_to_id[old as usize];
                    }
                    label_to_id = next;
                }
            }
        }
        assert!(
            rebuilds >= 3,
            "n={n}: only {rebuilds} rebuilds were exercised"
        );
        println!(
            "criterion 09 PASS (n={n}): {} ops replayed, {checked} queries agreed, {rebuilds} rebuilds",
            10 * n
        );
    }
}

/// Criterion 10: the counting bound rests on an exhaustively verified
/// partition count, and stats reports space over that bound above one for
/// every structure kind on every test input.
#[test]
fn criterion_10_information_bound() {
    for n in 0..=20u64 {
        let enumerated = if n == 0 {
            1
        } else {
            enumerate_partitions(n).len() as u64
        };
        assert_eq!(partition_count(n), enumerated.into(), "p({n})");
    }
    assert_eq!(partition_count(4), 5u32.into());
    assert_eq!(partition_count(12), 77u32.into());
    assert_eq!(info_lower_bound_bits(12), 7);

    let dir = std::env::temp_dir().join(format!("eqclass-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut rng = SplitMix64::new(0x10);
    let inputs = vec![
        ("worked", "1\n1\n2\n5\n".to_string()),
        ("edges", "8 4\n0 1\n1 2\n3 4\n5 5\n".to_string()),
        (
            "random",
            random_class_sizes(5_000, &mut rng)
                .sizes()
                .iter()
                .map(|s| format!("{s}\n"))
                .collect::<String>(),
        ),
    ];
    let mut ratios_checked = 0u64;
    for (tag, content) in &inputs {
        let input = dir.join(format!("{tag}.txt"));
        std::fs::write(&input, content).unwrap();
        for kind in [Kind::Compact, Kind::Fast, Kind::Const, Kind::Dynamic] {
            let out = dir.join(format!("{tag}.eq"));
            let mut sink = Vec::new();
            cmd_build(&input, kind, &out, &mut sink).unwrap();
            let mut stats = Vec::new();
            cmd_stats(&out, &mut stats).unwrap();
            let stats = String::from_utf8(stats).unwrap();
            let ratio: f64 = stats
                .split("\"space_over_bound\":")
                .nth(1)
                .unwrap()
                .split(',')
                .next()
                .unwrap()
                .parse()
                .unwrap();
            assert!(
                ratio > 1.0 && ratio.is_finite(),
                "{tag}/{kind:?}: ratio {ratio}"
            );
            ratios_checked += 1;
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    println!("criterion 10 PASS: p(n) verified to n=20, {ratios_checked} stats ratios above 1");
}
