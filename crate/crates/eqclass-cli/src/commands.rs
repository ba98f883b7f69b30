//! The four harness commands: build, query, stats, bench.
//!
//! Machine-readable summaries go to the given writer as single JSON lines
//! with deterministic field order; query answers are plain text. Bench
//! timing goes to a separate writer (stderr in the binary) so that stdout
//! is byte-identical across runs with the same seed.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use eqclass::dynamic::DynEq;
use eqclass::labels::SizeRankOrder;
use eqclass::partition::{info_lower_bound_bits, GroupSequence};
use eqclass::probe::Probes;
use eqclass::rng::SplitMix64;
use eqclass::serialize::{AnyEq, Dump, ReadError};
use eqclass::structures::{CompactEq, ConstEq, FastEq};

use crate::ingest::load_input;
use crate::usermap::{UserLabelMap, USER_MAP_FIELD};
use crate::CliError;

/// What `build` and `bench` should construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Compact,
    Fast,
    Const,
    Dynamic,
    Labels,
}

impl Kind {
    pub fn from_arg(s: &str) -> Result<Kind, CliError> {
        match s {
            "compact" => Ok(Kind::Compact),
            "fast" => Ok(Kind::Fast),
            "const" => Ok(Kind::Const),
            "dynamic" => Ok(Kind::Dynamic),
            "labels" => Ok(Kind::Labels),
            other => Err(CliError::Usage(format!(
                "unknown kind {other:?}; expected compact|fast|const|dynamic|labels"
            ))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Kind::Compact => "compact",
            Kind::Fast => "fast",
            Kind::Const => "const",
            Kind::Dynamic => "dynamic",
            Kind::Labels => "labels",
        }
    }
}

fn build_structure(kind: Kind, seq: &GroupSequence) -> AnyEq {
    match kind {
        Kind::Compact => AnyEq::Compact(CompactEq::build(seq)),
        Kind::Fast => AnyEq::Fast(FastEq::build(seq)),
        Kind::Const => AnyEq::Const(ConstEq::build(seq)),
        Kind::Dynamic => AnyEq::Dynamic(DynEq::build(seq)),
        Kind::Labels => unreachable!("labels are not a stored structure"),
    }
}

/// Space-over-counting-bound ratio; the bound is clamped to one bit so the
/// ratio stays finite for n = 1.
fn bound_ratio(bits: u64, bound: u64) -> f64 {
    bits as f64 / bound.max(1) as f64
}

fn load_structure(path: &Path) -> Result<(AnyEq, UserLabelMap), CliError> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(CliError::io(format!("opening {display}")))?;
    let mut reader = std::io::BufReader::new(file);
    let mut dump = Dump::read_from(&mut reader).map_err(|e| match e {
        ReadError::Io(source) => CliError::Io {
            context: format!("reading {display}"),
            source,
        },
        ReadError::Malformed(msg) => CliError::parse(&display, None, msg),
    })?;
    let structure =
        AnyEq::from_dump(&mut dump).map_err(|e| CliError::parse(&display, None, e.to_string()))?;
    let map_field = dump
        .take(USER_MAP_FIELD)
        .map_err(|e| CliError::parse(&display, None, e.to_string()))?;
    let map = UserLabelMap::from_field(structure.n(), map_field, &display)?;
    Ok((structure, map))
}

/// Build a structure (or export labels) from an input file, write it to
/// `out`, and print a one-line JSON summary.
pub fn cmd_build(
    input: &Path,
    kind: Kind,
    out: &Path,
    stdout: &mut impl Write,
) -> Result<(), CliError> {
    let (seq, map) = load_input(input)?;
    let bound = info_lower_bound_bits(seq.n());
    let bits = match kind {
        Kind::Labels => export_labels(&seq, &map, out)?,
        _ => {
            let structure = build_structure(kind, &seq);
            let mut dump = structure.to_dump();
            dump.fields.push(map.to_field());
            let bytes = dump.to_bytes();
            std::fs::write(out, bytes)
                .map_err(CliError::io(format!("writing {}", out.display())))?;
            structure.space_bits()
        }
    };
    writeln!(
        stdout,
        "{{\"kind\":\"{}\",\"n\":{},\"c\":{},\"k\":{},\"bits\":{},\"info_lower_bound_bits\":{},\"ratio\":{:.6}}}",
        kind.name(),
        seq.n(),
        seq.c(),
        seq.k(),
        bits,
        bound,
        bound_ratio(bits, bound),
    )
    .map_err(CliError::io("writing summary"))?;
    Ok(())
}

/// One line per element: `user_id TAB label-bits` (MSB first). Returns the
/// total bits across all labels.
fn export_labels(seq: &GroupSequence, map: &UserLabelMap, out: &Path) -> Result<u64, CliError> {
    let order = SizeRankOrder::new(seq);
    let mut text = String::new();
    let mut total_bits = 0u64;
    for user in 0..seq.n() {
        let label = map.label_of_user(user).expect("map covers all users");
        let bit_label = order
            .bit_label(seq, label)
            .expect("canonical labels encode");
        total_bits += bit_label.len_bits() as u64;
        text.push_str(&format!("{user}\t{}\n", bit_label.to_binary_string()));
    }
    std::fs::write(out, text).map_err(CliError::io(format!("writing {}", out.display())))?;
    Ok(total_bits)
}

/// Answer `x y` pairs of user ids from a stored structure: one output line
/// per pair, `x y 0|1`. Bad lines produce an error line and processing
/// continues; returns whether any line failed.
pub fn cmd_query(
    structure_path: &Path,
    pairs_path: &Path,
    stdout: &mut impl Write,
) -> Result<bool, CliError> {
    let (mut structure, map) = load_structure(structure_path)?;
    let display = pairs_path.display().to_string();
    let text =
        std::fs::read_to_string(pairs_path).map_err(CliError::io(format!("reading {display}")))?;
    let mut had_errors = false;
    let mut answer = |line_no: u64, line: &str, out: &mut dyn Write| -> Result<(), CliError> {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let mut fail = |msg: String| -> Result<(), CliError> {
            had_errors = true;
            writeln!(out, "error: line {line_no}: {msg}").map_err(CliError::io("writing answers"))
        };
        if tokens.len() != 2 {
            return fail(format!("expected 'x y', found {} tokens", tokens.len()));
        }
        let (Ok(x), Ok(y)) = (tokens[0].parse::<u64>(), tokens[1].parse::<u64>()) else {
            return fail(format!("bad pair {:?} {:?}", tokens[0], tokens[1]));
        };
        let (Some(lx), Some(ly)) = (map.label_of_user(x), map.label_of_user(y)) else {
            return fail(format!("id out of range [0, {})", map.n()));
        };
        let same = structure
            .same_class(lx, ly)
            .expect("mapped labels are in range");
        writeln!(out, "{x} {y} {}", same as u8).map_err(CliError::io("writing answers"))
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        answer(i as u64 + 1, line, stdout)?;
    }
    Ok(had_errors)
}

/// Print the exact per-field space accounting of a stored structure as one
/// JSON line, with the counting bound and normalized ratios.
pub fn cmd_stats(structure_path: &Path, stdout: &mut impl Write) -> Result<(), CliError> {
    let (structure, map) = load_structure(structure_path)?;
    let n = structure.n();
    let report = structure.space_report();
    let total: u64 = report.iter().map(|(_, b)| b).sum();
    let bound = info_lower_bound_bits(n);
    let sqrt_n = (n as f64).sqrt();
    let lg_n = (n.max(2) as f64).log2();
    let mut fields = String::new();
    for (i, (name, bits)) in report.iter().enumerate() {
        if i > 0 {
            fields.push(',');
        }
        fields.push_str(&format!("\"{name}\":{bits}"));
    }
    writeln!(
        stdout,
        "{{\"kind\":\"{}\",\"n\":{},\"c\":{},\"k\":{},\"fields\":{{{}}},\"total_bits\":{},\"info_lower_bound_bits\":{},\"space_over_bound\":{:.6},\"bits_per_sqrt_n\":{:.6},\"bits_per_sqrt_n_lg_n\":{:.6},\"user_map_bits\":{}}}",
        structure.kind().name(),
        n,
        structure.class_count(),
        structure.group_count(),
        fields,
        total,
        bound,
        bound_ratio(total, bound),
        total as f64 / sqrt_n,
        total as f64 / (sqrt_n * lg_n),
        map.space_bits(),
    )
    .map_err(CliError::io("writing stats"))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub ops: u64,
    pub seed: u64,
    pub relabel_out: Option<std::path::PathBuf>,
}

/// Run seeded random queries (plus unions for the dynamic kind) against a
/// freshly built structure. Deterministic counters and the probe histogram
/// go to `stdout`; wall-clock timing goes to `timing`.
pub fn cmd_bench(
    input: &Path,
    kind: Kind,
    options: &BenchOptions,
    stdout: &mut impl Write,
    timing: &mut impl Write,
) -> Result<(), CliError> {
    if kind == Kind::Labels {
        return Err(CliError::Usage(
            "bench expects a structure kind: compact|fast|const|dynamic".into(),
        ));
    }
    let (seq, mut map) = load_input(input)?;
    let n = seq.n();
    let mut structure = build_structure(kind, &seq);
    let mut rng = SplitMix64::new(options.seed);
    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    let mut answers_true = 0u64;
    let mut answers_false = 0u64;
    let mut unions_attempted = 0u64;
    let mut effective_merges = 0u64;
    let mut rebuilds = 0u64;
    let mut relabel_lines = String::new();

    let started = Instant::now();
    for _ in 0..options.ops {
        let x = rng.below(n);
        let y = rng.below(n);
        let lx = map.label_of_user(x).expect("bench ids in range");
        let ly = map.label_of_user(y).expect("bench ids in range");
        let mut probes = Probes::new();
        let same = structure
            .same_class_probed(lx, ly, &mut probes)
            .expect("labels valid");
        *histogram.entry(probes.word_reads).or_insert(0) += 1;
        if same {
            answers_true += 1;
        } else {
            answers_false += 1;
        }
        if let AnyEq::Dynamic(dyn_eq) = &mut structure {
            let ux = rng.below(n);
            let uy = rng.below(n);
            let lx = map.label_of_user(ux).expect("bench ids in range");
            let ly = map.label_of_user(uy).expect("bench ids in range");
            unions_attempted += 1;
            let report = dyn_eq.union(lx, ly).expect("labels valid");
            if report.merged {
                effective_merges += 1;
            }
            if let Some(event) = report.relabel {
                rebuilds += 1;
                relabel_lines.push_str(&format!("# rebuild {rebuilds}\n"));
                for (old, new) in event.iter() {
                    relabel_lines.push_str(&format!("{old}\t{new}\n"));
                }
                map.apply_relabel(&event);
            }
        }
    }
    let elapsed = started.elapsed();

    if let Some(path) = &options.relabel_out {
        std::fs::write(path, relabel_lines)
            .map_err(CliError::io(format!("writing {}", path.display())))?;
    }
    let mut hist_json = String::new();
    for (i, (probes, count)) in histogram.iter().enumerate() {
        if i > 0 {
            hist_json.push(',');
        }
        hist_json.push_str(&format!("\"{probes}\":{count}"));
    }
    writeln!(
        stdout,
        "{{\"kind\":\"{}\",\"n\":{},\"ops\":{},\"seed\":{},\"answers_true\":{},\"answers_false\":{},\"unions_attempted\":{},\"effective_merges\":{},\"rebuilds\":{},\"probe_histogram\":{{{}}}}}",
        kind.name(),
        n,
        options.ops,
        options.seed,
        answers_true,
        answers_false,
        unions_attempted,
        effective_merges,
        rebuilds,
        hist_json,
    )
    .map_err(CliError::io("writing bench summary"))?;
    let secs = elapsed.as_secs_f64();
    writeln!(
        timing,
        "elapsed_ms={:.3} ops_per_sec={:.0}",
        secs * 1e3,
        options.ops as f64 / secs.max(1e-9),
    )
    .map_err(CliError::io("writing timing"))?;
    Ok(())
}
