use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use moment_asymptotics::critical::integrate_l0;
use moment_asymptotics::pipeline::{
    analyze, emit_report, resolve_check, sweep, sweep_csv, verify_pipeline, write_certificates, PipelineError, RunConfig, SweepRow,
};

#[derive(Parser)]
#[command(name = "momasym", version, about = "Small-μ asymptotics of moment-map oscillatory integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run config (or a report.json holding one).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; results go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the action, list orbit types, κ and isotropy branches.
    Analyze(Common),
    /// Integrate the leading coefficient over the regular critical set.
    L0(Common),
    /// Evaluate I(μ) over the configured grid and print the CSV table.
    Oracle(Common),
    /// Run the full pipeline and write report.json, sweep.csv and certificates.
    Verify(Common),
    /// Certify every isotropy branch of the action.
    ResolveCheck(Common),
}

fn write_or_print(out: &Option<PathBuf>, name: &str, text: &str) -> Result<(), PipelineError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), text)?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cmd: Command) -> Result<bool, PipelineError> {
    let common = match &cmd {
        Command::Analyze(c) | Command::L0(c) | Command::Oracle(c) | Command::Verify(c) | Command::ResolveCheck(c) => c.clone(),
    };
    let mut config = RunConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        config.seed = s;
    }
    let out = common.out.clone().or_else(|| config.output.clone());
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| PipelineError::Config(e.to_string()))?;
    pool.install(|| match cmd {
        Command::Analyze(_) => {
            let a = analyze(&config)?;
            write_or_print(&out, "analysis.json", &serde_json::to_string_pretty(&a)?)?;
            Ok(a.validation.is_valid() && a.branch_error.is_none())
        }
        Command::L0(_) => {
            let action = config.group_action()?;
            let l0 = integrate_l0(&action, &config.amplitude, &config.surface, config.seed)?;
            write_or_print(&out, "l0.json", &serde_json::to_string_pretty(&l0)?)?;
            Ok(true)
        }
        Command::Oracle(_) => {
            let rows: Vec<SweepRow> = sweep(&config)?.iter().map(SweepRow::from).collect();
            write_or_print(&out, "sweep.csv", sweep_csv(&rows).trim_end())?;
            Ok(true)
        }
        Command::Verify(_) => {
            let report = verify_pipeline(&config)?;
            for v in &report.verdicts {
                eprintln!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
            }
            match &out {
                Some(dir) => {
                    emit_report(&report, dir)?;
                }
                None => println!("{}", serde_json::to_string_pretty(&report)?),
            }
            Ok(report.passed())
        }
        Command::ResolveCheck(_) => {
            let certs = resolve_check(&config)?;
            match &out {
                Some(dir) => {
                    write_certificates(&certs, dir)?;
                }
                None => println!("{}", serde_json::to_string_pretty(&certs)?),
            }
            for c in &certs {
                eprintln!("{} {}", if c.passed() { "PASS" } else { "FAIL" }, c.branch);
            }
            Ok(certs.iter().all(|c| c.passed()))
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
