use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qbridge_cli::config::{Experiment, RunConfig};
use qbridge_cli::{output, sweep, CliError, EXIT_PARTIAL};

#[derive(Parser, Debug)]
#[command(name = "qbridge", version, about = "Bridge bounds between matrix algebras and coset spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate every cell of the configured experiment.
    Sweep(Common),
    /// Compare two-leg trek bounds with the direct bridge for each pair.
    TrekCompare(Common),
    /// Run brute-force oracles on first-class level-1 cells of a finite group.
    OracleCheck(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let (args, forced, oracle) = match &cli.command {
        Command::Sweep(a) => (a, None, None),
        Command::TrekCompare(a) => (a, Some(Experiment::Trek), None),
        Command::OracleCheck(a) => (a, Some(Experiment::First), Some(true)),
    };
    let cfg = RunConfig::load(&args.config)?.finalize(args.seed)?;
    let experiment = forced.unwrap_or(cfg.experiment);
    let oracle = oracle.unwrap_or(cfg.oracle.enabled);
    let summary = sweep::run(&cfg, experiment, args.jobs, oracle)?;
    let paths = output::write_all(&args.out, &cfg.outputs, &summary.records, &cfg.q, experiment == Experiment::Trek)?;
    for p in &paths {
        eprintln!("wrote {}", p.display());
    }
    let failures = summary.failures();
    let violations = summary.oracle_violations();
    if failures > 0 {
        eprintln!("{failures} of {} cells failed", summary.records.len());
    }
    if violations > 0 {
        eprintln!("{violations} oracle values exceed their bounds");
    }
    Ok(if failures + violations > 0 { EXIT_PARTIAL } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use std::fs;
    use std::path::Path;

    use super::*;

    fn code(args: &[&str]) -> (i32, String) {
        let cli = Cli::try_parse_from(std::iter::once("qbridge").chain(args.iter().copied())).unwrap();
        match execute(cli) {
            Ok(c) => (c, String::new()),
            Err(e) => (e.exit_code(), e.to_string()),
        }
    }

    fn write(dir: &Path, name: &str, text: &str) -> String {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    const SU2: &str = r#"{
      "group": {"kind": "su2", "resolution": 6},
      "experiment": "first",
      "spins": [0.5, 1.0],
      "q": [1, 2],
      "seed": 11,
      "optimizer": {"restarts": 2, "steps": 20}
    }"#;

    #[test]
    fn sweep_is_reproducible_across_thread_counts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "run.json", SU2);
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        assert_eq!(code(&["sweep", "--config", &cfg, "--out", a.to_str().unwrap(), "--jobs", "1"]).0, 0);
        assert_eq!(code(&["sweep", "--config", &cfg, "--out", b.to_str().unwrap(), "--jobs", "3"]).0, 0);
        for f in ["summary.csv", "plot.csv"] {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
        }
        let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 5);
        assert!(summary.starts_with("class,m,n,q,gamma_breve_A,gamma_B_low,gamma_B_cap,"));
        let plot = fs::read_to_string(a.join("plot.csv")).unwrap();
        assert_eq!(plot.lines().next().unwrap(), "m,q=1,q=2");
        assert_eq!(fs::read_to_string(a.join("records.jsonl")).unwrap().lines().count(), 4);

        // the seed flag overrides the config
        let c = dir.path().join("c");
        assert_eq!(code(&["sweep", "--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "12"]).0, 0);
        let rec = fs::read_to_string(c.join("records.jsonl")).unwrap();
        let first: serde_json::Value = serde_json::from_str(rec.lines().next().unwrap()).unwrap();
        assert_eq!(first["cell_seed"].as_u64().unwrap(), sweep::cell_seed(12, "first:0.5"));
    }

    #[test]
    fn empty_spin_list_writes_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(
            dir.path(),
            "run.json",
            r#"{"group": {"kind": "su2", "resolution": 6}, "experiment": "first", "spins": [], "seed": 1}"#,
        );
        let out = dir.path().join("o");
        assert_eq!(code(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]).0, 0);
        assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 1);
        assert_eq!(fs::read_to_string(out.join("records.jsonl")).unwrap(), "");
    }

    #[test]
    fn config_errors_exit_with_two() {
        let dir = tempfile::tempdir().unwrap();
        let bad = write(dir.path(), "bad.json", r#"{"group": {"kind": "su2", "resolution": 6}, "experiment": "sideways", "seed": 1}"#);
        let (c, msg) = code(&["sweep", "--config", &bad]);
        assert_eq!(c, 2);
        assert!(msg.contains("line 1"), "{msg}");
        let noseed = write(dir.path(), "noseed.json", r#"{"group": {"kind": "su2", "resolution": 6}, "experiment": "first"}"#);
        assert_eq!(code(&["sweep", "--config", &noseed]).0, 2);
        let toobig = write(
            dir.path(),
            "big.json",
            r#"{"group": {"kind": "su2", "resolution": 6}, "experiment": "first", "spins": [9], "seed": 1}"#,
        );
        assert_eq!(code(&["sweep", "--config", &toobig]).0, 2);
        let missing = dir.path().join("nope.json");
        assert_eq!(code(&["sweep", "--config", missing.to_str().unwrap()]).0, 2);
        let su2 = write(dir.path(), "su2.json", SU2);
        assert_eq!(code(&["oracle-check", "--config", &su2, "--out", dir.path().to_str().unwrap()]).0, 2);
    }

    #[test]
    fn failed_cells_give_partial_exit() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(
            dir.path(),
            "run.json",
            r#"{"group": {"kind": "builtin", "name": "s3"}, "experiment": "second", "pairs": [["std", "std"], ["std", "sign"]], "seed": 1,
                "optimizer": {"restarts": 4, "steps": 60}}"#,
        );
        let out = dir.path().join("o");
        assert_eq!(code(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]).0, EXIT_PARTIAL);
        let rec = fs::read_to_string(out.join("records.jsonl")).unwrap();
        assert_eq!(rec.lines().count(), 2);
        assert!(rec.lines().nth(1).unwrap().contains("\"error\""));
        assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 2);
    }

    #[test]
    fn oracle_check_on_s3_and_group_file() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "group.json", r#"{"kind": "builtin", "name": "s3"}"#);
        let cfg = write(
            dir.path(),
            "run.json",
            r#"{"group": {"file": "group.json"}, "experiment": "first", "irreps": ["std"], "seed": 5,
                "optimizer": {"restarts": 8, "steps": 100},
                "oracle": {"operator_step": 0.25, "function_step": 0.1, "state_resolution": 3}}"#,
        );
        let out = dir.path().join("o");
        assert_eq!(code(&["oracle-check", "--config", &cfg, "--out", out.to_str().unwrap()]).0, 0);
        let line = fs::read_to_string(out.join("records.jsonl")).unwrap();
        let rec: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
        let oracle = &rec["oracle"];
        assert!(oracle["reach"].as_f64().unwrap() <= rec["report"]["reach_bound"].as_f64().unwrap() + 1e-9);
        assert_eq!(oracle["height_ok"], serde_json::Value::Bool(true));
    }

    #[test]
    fn trek_compare_writes_trek_table() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(
            dir.path(),
            "run.json",
            r#"{"group": {"kind": "su2", "resolution": 6}, "experiment": "first", "pairs": [[0.5, 1.0], [1.0, 1.0]], "seed": 3,
                "optimizer": {"restarts": 2, "steps": 20}}"#,
        );
        let out = dir.path().join("o");
        assert_eq!(code(&["trek-compare", "--config", &cfg, "--out", out.to_str().unwrap()]).0, 0);
        let t = fs::read_to_string(out.join("trek.csv")).unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("m,n,reach_sum"));
        assert!(lines[2].starts_with("1,1,"));
    }
}
