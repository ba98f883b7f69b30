use std::path::PathBuf;
use std::process::ExitCode;

use eqclass_cli::{cmd_bench, cmd_build, cmd_query, cmd_stats, BenchOptions, CliError, Kind};

const USAGE: &str = "\
usage: eqclass <command> [args]

commands:
  build <input> --kind <compact|fast|const|dynamic|labels> --out <path>
      Build a structure (or export per-element bit labels) from a class-size
      file or an edge list and write it to <path>; prints a JSON summary.
  query <structure> <pairs>
      Answer 'x y' same-class queries (user ids, one pair per line).
  stats <structure>
      Print exact per-field space accounting as JSON.
  bench <input> --kind <kind> --ops <N> --seed <S> [--relabel-out <path>]
      Build and run N seeded random queries (and unions when dynamic);
      deterministic counters on stdout, timing on stderr.

inputs: a class-size file (one positive integer per line) or an edge list
('n m' header then m lines 'u v', 0-based); '#' comments and blank lines
are ignored. Exit codes: 0 ok, 1 usage, 2 parse/query errors, 3 io.";

struct Parsed {
    positional: Vec<String>,
    kind: Option<String>,
    out: Option<PathBuf>,
    ops: Option<String>,
    seed: Option<String>,
    relabel_out: Option<PathBuf>,
}

fn parse_flags(args: &[String]) -> Result<Parsed, CliError> {
    let mut parsed = Parsed {
        positional: Vec::new(),
        kind: None,
        out: None,
        ops: None,
        seed: None,
        relabel_out: None,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut flag = |name: &str| -> Result<String, CliError> {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("{name} expects a value")))
        };
        match arg.as_str() {
            "--kind" => parsed.kind = Some(flag("--kind")?),
            "--out" => parsed.out = Some(PathBuf::from(flag("--out")?)),
            "--ops" => parsed.ops = Some(flag("--ops")?),
            "--seed" => parsed.seed = Some(flag("--seed")?),
            "--relabel-out" => parsed.relabel_out = Some(PathBuf::from(flag("--relabel-out")?)),
            other if other.starts_with("--") => {
                return Err(CliError::Usage(format!("unknown flag {other}")));
            }
            other => parsed.positional.push(other.to_string()),
        }
    }
    Ok(parsed)
}

fn parse_number(value: Option<String>, name: &str, default: Option<u64>) -> Result<u64, CliError> {
    match value {
        Some(v) => v
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("{name} expects an integer, got {v:?}"))),
        None => default.ok_or_else(|| CliError::Usage(format!("{name} is required"))),
    }
}

fn run() -> Result<i32, CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        return Err(CliError::Usage("no command given".into()));
    };
    let parsed = parse_flags(&args[1..])?;
    let positional = &parsed.positional;
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    match command.as_str() {
        "build" => {
            let [input] = positional.as_slice() else {
                return Err(CliError::Usage(
                    "build expects exactly one input path".into(),
                ));
            };
            let kind = Kind::from_arg(
                parsed
                    .kind
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("--kind is required".into()))?,
            )?;
            let out = parsed
                .out
                .ok_or_else(|| CliError::Usage("--out is required".into()))?;
            cmd_build(&PathBuf::from(input), kind, &out, &mut stdout)?;
            Ok(0)
        }
        "query" => {
            let [structure, pairs] = positional.as_slice() else {
                return Err(CliError::Usage("query expects <structure> <pairs>".into()));
            };
            let had_errors = cmd_query(
                &PathBuf::from(structure),
                &PathBuf::from(pairs),
                &mut stdout,
            )?;
            Ok(if had_errors { 2 } else { 0 })
        }
        "stats" => {
            let [structure] = positional.as_slice() else {
                return Err(CliError::Usage("stats expects <structure>".into()));
            };
            cmd_stats(&PathBuf::from(structure), &mut stdout)?;
            Ok(0)
        }
        "bench" => {
            let [input] = positional.as_slice() else {
                return Err(CliError::Usage(
                    "bench expects exactly one input path".into(),
                ));
            };
            let kind = Kind::from_arg(
                parsed
                    .kind
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("--kind is required".into()))?,
            )?;
            let options = BenchOptions {
                ops: parse_number(parsed.ops, "--ops", Some(10_000))?,
                seed: parse_number(parsed.seed, "--seed", Some(0))?,
                relabel_out: parsed.relabel_out,
            };
            cmd_bench(
                &PathBuf::from(input),
                kind,
                &options,
                &mut stdout,
                &mut std::io::stderr().lock(),
            )?;
            Ok(0)
        }
        other => Err(CliError::Usage(format!("unknown command {other:?}"))),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("{err}");
            if matches!(err, CliError::Usage(_)) {
                eprintln!("\n{USAGE}");
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
