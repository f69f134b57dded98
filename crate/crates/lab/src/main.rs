use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use vns_core::diagnostics::compute_t0;
use vns_lab::audit::{audit_inequalities, AuditCorpus};
use vns_lab::config::RunConfig;
use vns_lab::experiments::{run_scheme, run_single, run_twin};
use vns_lab::series_file::read_key_values;

#[derive(Parser)]
#[command(name = "vns", version, about = "Vlasov–Navier–Stokes simulator and diagnostics on the unit torus")]
struct Cli {
    /// `key = value` run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sampling seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single coupled run.
    Run,
    /// Twin run with a perturbed second member.
    Twin,
    /// Inequality audit over the built-in corpora.
    Audit,
    /// Regularized scheme along the configured schedule.
    Scheme,
    /// Short-time horizon from a measured-norms file.
    T0 {
        /// File with `t_final` and either `s` or `u1_l2_linf` and `u2_l2_linf`
        /// (a twin `.meta` file works).
        norms: PathBuf,
    },
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn t0_from_file(path: &Path) -> anyhow::Result<f64> {
    let kv = read_key_values(path)?;
    let get = |name: &str| -> anyhow::Result<Option<f64>> {
        kv.iter()
            .find(|(k, _)| {
                k == name || k.strip_prefix("measured.") == Some(name) || k.strip_prefix("config.") == Some(name)
            })
            .map(|(k, v)| v.parse::<f64>().with_context(|| format!("`{k}` is not a number")))
            .transpose()
    };
    let t_final = get("t_final")?.context("missing `t_final`")?;
    let s = match get("s")? {
        Some(s) => s,
        None => match (get("u1_l2_linf")?, get("u2_l2_linf")?) {
            (Some(a), Some(b)) => a + b,
            _ => bail!("need `s` or both `u1_l2_linf` and `u2_l2_linf`"),
        },
    };
    Ok(compute_t0(s, t_final))
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Run => {
            let cfg = load_config(&cli)?;
            let run = run_single(&cfg)?;
            let (csv, meta) = run.file.write(&cfg.out_dir, "run")?;
            println!("energy residual {:e}", run.energy_residual);
            println!("second-moment residual {:e}", run.m2_residual);
            match run.moment_bound {
                Some(r) => println!("moment bound lhs {:e} rhs {:e} pass {}", r.lhs, r.rhs, r.pass),
                None => println!("moment bound: admissibility integral diverges"),
            }
            println!("wrote {} and {}", csv.display(), meta.display());
        }
        Command::Twin => {
            let cfg = load_config(&cli)?;
            let run = run_twin(&cfg)?;
            let (csv, meta) = run.file.write(&cfg.out_dir, "twin")?;
            println!("K̂ {:e}  T0 {:e}  S {:e}", run.k_hat, run.t0, run.s);
            println!("max H - envelope on [0, T0]: {:e}", run.h_excess);
            println!("Q inequality violation {:e}", run.q_violation);
            println!("wrote {} and {}", csv.display(), meta.display());
        }
        Command::Audit => {
            let report = audit_inequalities(&AuditCorpus::standard())?;
            print!("{}", report.to_table());
            if !report.pass() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Scheme => {
            let cfg = load_config(&cli)?;
            let report = run_scheme(&cfg)?;
            print!("{}", report.to_table());
            let path = report.to_file(&cfg).write(&cfg.out_dir)?;
            println!("wrote {}", path.display());
        }
        Command::T0 { norms } => {
            println!("{:e}", t0_from_file(norms)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}
