use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use axielastic::cli::{cmd_convergence, cmd_kernels_selftest, cmd_solve, format_row};
use axielastic::config::{parse_selftest_section, RunConfig};
use axielastic::Error;

/// Elastic scattering by rigid axisymmetric bodies.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// More output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides `solver.workers` (0: all cores).
    #[arg(short, long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configured problem and write its artifacts.
    Solve(Common),
    /// Check modal kernels against adaptive quadrature.
    KernelsSelftest {
        /// Config whose `[selftest]` table is used; defaults otherwise.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Directory for `selftest.json`.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(short, long, default_value_t = 0)]
        workers: usize,
        /// Overrides the highest mode checked.
        #[arg(long)]
        m_max: Option<usize>,
    },
    /// Panel-count sweep of a point-source problem.
    Convergence(Common),
}

fn load(c: &Common) -> Result<(RunConfig, PathBuf), Error> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(w) = c.workers {
        cfg.solver.workers = w;
    }
    let out = c.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<bool, Error> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Solve(c) => {
            let (cfg, out) = load(&c)?;
            let res = cmd_solve(&cfg, &out)?;
            println!("{}", format_row(&res.row));
            if verbose > 0 {
                eprintln!("max backward error {:.2e}, workers {}", res.max_residual, res.workers);
                for f in &res.files {
                    eprintln!("wrote {}", f.display());
                }
            }
            if res.unconverged_points > 0 {
                eprintln!("warning: {} field points hit the sampling cap", res.unconverged_points);
            }
            Ok(true)
        }
        Command::KernelsSelftest { config, out, workers, m_max } => {
            let mut st = match &config {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                    parse_selftest_section(&text)?
                }
                None => Default::default(),
            };
            if let Some(m) = m_max {
                st.m_max = m;
            }
            let rep = cmd_kernels_selftest(&st.options(), workers, out.as_deref())?;
            if verbose > 0 {
                for g in &rep.geometries {
                    eprintln!(
                        "{:<10} far {:.2e} ({} pairs)  near {:.2e} ({} pairs)  recurrence {:.2e}",
                        g.geometry, g.far_max, g.far_pairs, g.near_max, g.near_pairs, g.recurrence_max
                    );
                }
            }
            println!(
                "m_max {}  far {:.2e} (tol {:.0e})  near {:.2e} (tol {:.0e})  recurrence {:.2e} (tol {:.0e})  {}",
                rep.m_max,
                rep.far_max,
                st.far_tol,
                rep.near_max,
                st.near_tol,
                rep.recurrence_max,
                st.recurrence_tol,
                if rep.passed { "PASS" } else { "FAIL" }
            );
            Ok(rep.passed)
        }
        Command::Convergence(c) => {
            let (cfg, out) = load(&c)?;
            let rows = cmd_convergence(&cfg, &out)?;
            println!("n_panels corner_depth n_pts n_f e_error");
            for r in &rows {
                println!("{} {} {} {} {:.3e}", r.n_panels, r.corner_depth, r.n_pts, r.n_f, r.e_error);
            }
            if verbose > 0 {
                eprintln!("wrote {}", Path::new(&out).join("convergence.csv").display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
