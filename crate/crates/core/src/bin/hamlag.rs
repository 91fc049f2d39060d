use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hamlag::harness::{self, selftest, ExperimentConfig};
use hamlag::Result;

#[derive(Parser)]
#[command(name = "hamlag", version, about = "Energy-preserving Lagrange multiplier integrators for Hamiltonian PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured scheme to T and write one series CSV per scheme.
    Run(Common),
    /// Run the Δt ladder against the reference and write convergence.csv.
    Converge(Common),
    /// Run every scheme once and write comparison.csv.
    Compare(Common),
    /// Run the invariant suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run only this scheme id, e.g. `lm-gauss3`.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(id) = &self.scheme {
            cfg.override_scheme(id)?;
        }
        let out = self.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
        std::fs::create_dir_all(&out)?;
        Ok((cfg, out))
    }
}

fn file_stem(label: &str) -> String {
    label.replace(':', "_sweeps")
}

fn run(args: &Common) -> Result<bool> {
    let (cfg, out) = args.load()?;
    for scheme in cfg.scheme_configs()? {
        let report = harness::run_trajectory(&cfg, &scheme)?;
        let path = out.join(format!("{}.csv", file_stem(&scheme.label())));
        harness::emit_csv(&report.series, scheme.kind, &path)?;
        if !args.quiet {
            let s = &report.summary;
            let err = s.final_error.map(|e| format!(" error {e:.3e}")).unwrap_or_default();
            println!(
                "{}: {} steps, max drift {:.3e}, mean iters {:.2}, {:.2} s{err} -> {}",
                s.scheme,
                s.steps,
                s.max_drift,
                s.mean_iters,
                s.total_ns as f64 * 1e-9,
                path.display()
            );
        }
    }
    Ok(true)
}

fn converge(args: &Common) -> Result<bool> {
    let (cfg, out) = args.load()?;
    let table = harness::convergence_study(&cfg)?;
    let path = out.join("convergence.csv");
    table.emit_csv(&path)?;
    if !args.quiet {
        for c in &table.cells {
            if let Ok(r) = &c.outcome {
                println!("{:<12} dt {:<10} error {:.4e} order {:.4}", c.scheme, c.dt, r.error, c.order);
            }
        }
        println!("-> {}", path.display());
    }
    Ok(true)
}

fn compare(args: &Common) -> Result<bool> {
    let (cfg, out) = args.load()?;
    let rows = harness::compare_schemes(&cfg)?;
    let path = out.join("comparison.csv");
    harness::emit_comparison_csv(&rows, &path)?;
    if !args.quiet {
        for r in &rows {
            let modified = r.max_modified_drift.map(|m| format!(", modified {m:.3e}")).unwrap_or_default();
            println!(
                "{:<12} drift {:.3e}{modified}, iters {:.2} (max {}), {:.2} s",
                r.scheme,
                r.max_drift,
                r.mean_iters,
                r.max_iters,
                r.wall_ns as f64 * 1e-9
            );
        }
        println!("-> {}", path.display());
    }
    Ok(true)
}

fn run_selftest(seed: u64, quiet: bool) -> Result<bool> {
    let checks = selftest::run_selftest(seed)?;
    for c in checks.iter().filter(|c| !quiet || !c.passed) {
        println!("{c}");
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => run(a),
        Command::Converge(a) => converge(a),
        Command::Compare(a) => compare(a),
        Command::Selftest { seed, quiet } => run_selftest(*seed, *quiet),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("hamlag: selftest failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("hamlag: error: {e}");
            ExitCode::FAILURE
        }
    }
}
