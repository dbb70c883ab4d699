use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use hypermis::bench::{
    generate, load_instance, read, records_csv, records_json, run_experiment, run_record_with_output, verify,
    write, Algorithm, Check, ExperimentRecord, Family, GenSpec, SweepConfig,
};
use hypermis::netsim::{Regime, Representation};

#[derive(Parser)]
#[command(name = "hypermis", version, about = "Distributed hypergraph MIS simulator and benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated instance.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        dmax: Option<usize>,
        /// Edge probability (graph family).
        #[arg(long)]
        p: Option<f64>,
        /// Diameter parameter (bridge-ring family).
        #[arg(long = "D")]
        diameter: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
    /// Run one algorithm on an instance and write the records.
    Run {
        #[arg(long)]
        algo: Algorithm,
        #[arg(long, default_value = "sc")]
        repr: Representation,
        #[arg(long, default_value = "congest")]
        regime: Regime,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check a candidate output with the exact oracle.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        check: Check,
        /// Restriction set for rmds (1-based ids).
        #[arg(long)]
        restrict: Option<PathBuf>,
    },
    /// Run the grid described by a TOML file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

/// One run with its output in 1-based ids (colors stay as they are).
#[derive(serde::Serialize)]
struct RunEntry {
    #[serde(flatten)]
    record: ExperimentRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<Vec<usize>>,
}

fn summarize(records: &[ExperimentRecord]) -> bool {
    let failed: Vec<&ExperimentRecord> = records.iter().filter(|r| !r.passed()).collect();
    for r in &failed {
        match &r.error {
            Some(e) => eprintln!("FAIL {} {} seed {}: {e}", r.instance, r.algorithm, r.seed),
            None => eprintln!("FAIL {} {} seed {}: oracle rejected the output", r.instance, r.algorithm, r.seed),
        }
    }
    println!("{} runs, {} passed, {} failed", records.len(), records.len() - failed.len(), failed.len());
    failed.is_empty()
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    match Cli::parse().cmd {
        Cmd::Gen { family, n, m, dmax, p, diameter, seed, out } => {
            let params = GenSpec { family, n, m, dmax, p, diameter, seed };
            let h = generate(&params)?;
            write(&out, &h.serialize())?;
            println!("{}: n = {}, m = {}", out.display(), h.n(), h.m());
            Ok(true)
        }
        Cmd::Run { algo, repr, regime, input, seed, trials, out, csv } => {
            let h = load_instance(&input)?;
            let label = input.display().to_string();
            let mut entries = Vec::new();
            for s in seed..seed + trials {
                let (record, output) = run_record_with_output(&label, &h, &algo, repr, regime, s);
                let output = output.map(|o| match algo {
                    Algorithm::Coloring => o.output,
                    _ => o.output.iter().map(|v| v + 1).collect(),
                });
                entries.push(RunEntry { record, output });
            }
            let records: Vec<ExperimentRecord> = entries.iter().map(|e| e.record.clone()).collect();
            let json = serde_json::to_string_pretty(&entries)?;
            match out {
                Some(p) => write(&p, &json)?,
                None => println!("{json}"),
            }
            if let Some(p) = csv {
                write(&p, &records_csv(&records)?)?;
            }
            Ok(summarize(&records))
        }
        Cmd::Verify { input, candidate, check, restrict } => {
            let h = load_instance(&input)?;
            let cand = read(&candidate)?;
            let restrict = restrict.map(|p| read(&p)).transpose()?;
            let verdict = verify(&h, check, &cand, restrict.as_deref())?;
            println!("{}", serde_json::to_string(&verdict)?);
            Ok(verdict.pass)
        }
        Cmd::Sweep { config } => {
            let cfg = SweepConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            if cfg.algorithms.is_empty() {
                bail!("sweep config lists no algorithms");
            }
            let records = run_experiment(&cfg)?;
            if let Some(p) = &cfg.json {
                write(p, &records_json(&records, true)?)?;
            }
            if let Some(p) = &cfg.csv {
                write(p, &records_csv(&records)?)?;
            }
            if cfg.json.is_none() && cfg.csv.is_none() {
                print!("{}", records_csv(&records)?);
            }
            Ok(summarize(&records))
        }
    }
}
