//! Scale check: build every structure over ten million elements, verify a
//! sample of queries three ways against the explicit oracle, and print
//! build times and space. Run with `cargo run --release --example scale`.

use eqclass::dynamic::DynEq;
use eqclass::oracle::random_class_sizes;
use eqclass::partition::GroupSequence;
use eqclass::partition::NaiveOracle;
use eqclass::rng::SplitMix64;
use eqclass::structures::{CompactEq, ConstEq, EquivQuery, FastEq};

fn main() {
    let n: u64 = 10_000_000;
    let mut rng = SplitMix64::new(0x57e55);
    let t0 = std::time::Instant::now();
    let seq = GroupSequence::from_sizes(&random_class_sizes(n, &mut rng));
    println!(
        "normalize: {:?} (c={}, k={})",
        t0.elapsed(),
        seq.c(),
        seq.k()
    );
    let oracle = NaiveOracle::new(&seq);

    let t = std::time::Instant::now();
    let compact = CompactEq::build(&seq);
    println!(
        "compact build {:?}, {} bits ({:.2} per sqrt n)",
        t.elapsed(),
        compact.space_bits(),
        compact.space_bits() as f64 / (n as f64).sqrt()
    );
    let t = std::time::Instant::now();
    let fast = FastEq::build(&seq);
    println!("fast build {:?}, {} bits", t.elapsed(), fast.space_bits());
    let t = std::time::Instant::now();
    let constant = ConstEq::build(&seq);
    println!(
        "const build {:?}, {} bits",
        t.elapsed(),
        constant.space_bits()
    );

    let mut worst = 0u64;
    let t = std::time::Instant::now();
    for _ in 0..200_000 {
        let x = rng.range(1, n);
        let y = rng.range(1, n);
        let want = oracle.same_class(x, y).unwrap();
        let mut probes = eqclass::probe::Probes::new();
        assert_eq!(constant.same_class_probed(x, y, &mut probes).unwrap(), want);
        worst = worst.max(probes.word_reads);
        assert_eq!(compact.same_class(x, y).unwrap(), want);
        assert_eq!(fast.same_class(x, y).unwrap(), want);
    }
    println!(
        "200k 3-way checked queries {:?}, const worst probes {worst}",
        t.elapsed()
    );

    let mut dyn_eq = DynEq::build(&seq);
    let t = std::time::Instant::now();
    let mut rebuilds = 0;
    for _ in 0..20_000 {
        let report = dyn_eq.union(rng.range(1, n), rng.range(1, n)).unwrap();
        if report.rebuilt {
            rebuilds += 1;
        }
    }
    println!("20k unions {:?}, {} rebuilds", t.elapsed(), rebuilds);
}
