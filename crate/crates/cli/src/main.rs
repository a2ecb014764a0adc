use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oscspec::asympt::{classify, critical_coupling, decay_fit, slope_m};
use oscspec::gsrep::Gauge;
use oscspec::hardy::{kats_krein_constant, reverse_hardy_witness, robin_hardy_sigma};
use oscspec::harness::{emit_csv, run_compare, run_sweep, ExperimentConfig, HarnessError, Report};
use oscspec::oracle::assembled_eigenvalues;

#[derive(Parser)]
#[command(
    name = "oscspec",
    version,
    about = "Negative eigenvalue counts for oscillating radial potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count eigenvalues below -E at a single energy.
    Count(Common),
    /// Count over an energy range and fit the slope against |ln E|.
    Sweep(Common),
    /// Compare the Pruefer and oracle counters.
    Compare(Common),
    /// Finite/infinite classification, critical coupling and slope M.
    Classify(Common),
    /// Lowest assembled eigenvalues and their decay rate.
    Eigs {
        #[command(flatten)]
        common: Common,
        /// Number of eigenvalues.
        #[arg(long, default_value_t = 40)]
        k: usize,
        /// First index used in the decay fit.
        #[arg(long, default_value_t = 10)]
        k_min: usize,
    },
    /// Hardy-inequality diagnostics.
    Hardy {
        #[command(flatten)]
        common: Common,
        /// Weight exponent for the Robin constant.
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        /// Boundary radius for the Robin constant.
        #[arg(long, default_value_t = std::f64::consts::E)]
        radius: f64,
        /// Deficit in the reverse Hardy witness.
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
}

#[derive(Args, Default)]
struct Common {
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    /// Adds an attractive z/r term.
    #[arg(long)]
    coulomb: Option<String>,
    #[arg(long, conflicts_with = "energies")]
    energy: Option<String>,
    /// lo:hi:n geometric range, or a comma-separated list.
    #[arg(long)]
    energies: Option<String>,
    /// pruefer, oracle or both.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// Random instances for `compare`.
    #[arg(long)]
    instances: Option<String>,
    #[arg(long)]
    grid_h: Option<String>,
    #[arg(long)]
    grid_ratio: Option<String>,
    #[arg(long)]
    margin: Option<String>,
    /// Record wall time in the CSV.
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("lambda", &self.lambda),
            ("mu", &self.mu),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("dim", &self.dim),
            ("coulomb", &self.coulomb),
            ("energy", &self.energy),
            ("energies", &self.energies),
            ("method", &self.method),
            ("seed", &self.seed),
            ("instances", &self.instances),
            ("grid-h", &self.grid_h),
            ("grid-ratio", &self.grid_ratio),
            ("margin", &self.margin),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        if let Some(p) = &self.csv {
            cfg.csv = Some(p.clone());
        }
        if self.timing {
            cfg.timing = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn finish(report: &Report) -> Result<(), HarnessError> {
    print!("{report}");
    if let Some(path) = &report.config.csv {
        emit_csv(report, path)?;
    }
    Ok(())
}

fn numerical(energy: f64) -> impl Fn(oscspec::Error) -> HarnessError {
    move |source| HarnessError::Numerical { energy, source }
}

fn count(cfg: ExperimentConfig) -> Result<(), HarnessError> {
    let cfg = ExperimentConfig {
        energies: cfg.energies[..1].to_vec(),
        ..cfg
    };
    let report = run_sweep(&cfg)?;
    finish(&report)?;
    for row in &report.rows {
        let r = &row.result;
        println!("{} per channel at E = {:e}:", r.method.as_str(), r.energy);
        for c in &r.channels {
            println!(
                "  l = {:>4}  Lambda = {:>10}  m = {:>6}  N = {} [{}, {}]",
                c.l, c.lambda, c.multiplicity, c.count, c.count_lo, c.count_hi
            );
        }
    }
    Ok(())
}

fn classify_cmd(cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    let (l, mu, a, b, d) = (cfg.lambda, cfg.mu, cfg.alpha, cfg.beta, cfg.dim);
    println!("critical coupling = {:.12}", critical_coupling(mu, a, d));
    println!("slope M = {:.12}", slope_m(l, mu, a, d));
    let c = classify(l, mu, a, b, d).map_err(|e| HarnessError::Config(e.to_string()))?;
    println!("verdict = {:?}", c.verdict);
    println!("branch = {:?}", c.branch);
    Ok(())
}

fn eigs_cmd(cfg: &ExperimentConfig, k: usize, k_min: usize) -> Result<(), HarnessError> {
    let spec = cfg.spec()?;
    let e = cfg.energies[0];
    let eigs =
        assembled_eigenvalues(&spec, cfg.dim, k, e, &cfg.oracle_policy()).map_err(numerical(e))?;
    for (i, v) in eigs.iter().enumerate() {
        println!("{:>4} {:.12e}", i + 1, v);
    }
    if k >= k_min + 2 {
        let fit = decay_fit(&eigs, k_min, k).map_err(numerical(e))?;
        println!(
            "decay fit over k = {k_min}..{k}: M = {:.4} +- {:.4} (theory {:.4}), c = {:.3e}, C = {:.3e}",
            fit.m,
            fit.m_stderr,
            slope_m(cfg.lambda, cfg.mu, cfg.alpha, cfg.dim),
            fit.c_lower,
            fit.c_upper
        );
    }
    Ok(())
}

fn hardy_cmd(
    cfg: &ExperimentConfig,
    rho: f64,
    radius: f64,
    epsilon: f64,
) -> Result<(), HarnessError> {
    let bad = |e: oscspec::Error| HarnessError::Config(e.to_string());
    println!(
        "robin sigma(rho = {rho}, R = {radius}) = {:.12}",
        robin_hardy_sigma(rho, radius)
    );
    let w = reverse_hardy_witness(epsilon, 1.0, 1).map_err(bad)?;
    println!(
        "reverse witness: ln L = {:.6}, kappa = {:.6e}, form = {:.6e}, closed form = {:.6e}",
        w.ln_l, w.kappa, w.form_value, w.closed_form
    );
    let spec = cfg.spec()?;
    let kk = kats_krein_constant(&spec.oscillation(), Gauge::ZeroAtOrigin).map_err(bad)?;
    println!(
        "kats-krein constant = {:.6} at t = {:.4} (4/alpha = {:.6})",
        kk.constant,
        kk.argmax,
        4.0 / cfg.alpha
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Count(c) => count(c.config()?),
        Command::Sweep(c) => finish(&run_sweep(&c.config()?)?),
        Command::Compare(c) => finish(&run_compare(&c.config()?)?),
        Command::Classify(c) => classify_cmd(&c.config()?),
        Command::Eigs { common, k, k_min } => eigs_cmd(&common.config()?, k, k_min),
        Command::Hardy {
            common,
            rho,
            radius,
            epsilon,
        } => hardy_cmd(&common.config()?, rho, radius, epsilon),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
