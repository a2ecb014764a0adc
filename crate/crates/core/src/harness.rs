//! Experiment runner: configuration, sweeps, Prüfer/oracle comparisons and
//! CSV output. Works in `f64` throughout.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::asympt::{classify, fit_slope, slope_m, Classification, SlopeFit};
use crate::error::Error;
use crate::model::{BoundaryCondition, ChannelOperator, PotentialSpec, RadialFn};
use crate::oracle::{count_channel_oracle, count_total_oracle, OraclePolicy};
use crate::pruefer::{count_channel, count_total, ChannelCount, CountPolicy, CountResult, Method};

pub const CSV_HEADER: &str =
    "E,abs_ln_E,l,Lambda,multiplicity,count,count_lo,count_hi,method,seconds";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error("E = {energy:e}: {source}")]
    Numerical {
        energy: f64,
        #[source]
        source: Error,
    },
}

impl HarnessError {
    /// Process exit code: 1 for usage, config and I/O problems, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Numerical { .. } => 2,
            _ => 1,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Pruefer,
    Oracle,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> &'static [Method] {
        match self {
            MethodChoice::Pruefer => &[Method::Pruefer],
            MethodChoice::Oracle => &[Method::Oracle],
            MethodChoice::Both => &[Method::Pruefer, Method::Oracle],
        }
    }
}

impl std::str::FromStr for MethodChoice {
    type Err = HarnessError;
    fn from_str(s: &str) -> HarnessResult<Self> {
        match s {
            "both" => Ok(MethodChoice::Both),
            _ => match s.parse::<Method>() {
                Ok(Method::Pruefer) => Ok(MethodChoice::Pruefer),
                Ok(Method::Oracle) => Ok(MethodChoice::Oracle),
                Err(_) => Err(HarnessError::Config(format!(
                    "method must be pruefer, oracle or both, got {s:?}"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub dim: u32,
    /// Adds an attractive `z/r` term; with `lambda = 0` this is hydrogen.
    pub coulomb: Option<f64>,
    /// Strictly decreasing, strictly positive.
    pub energies: Vec<f64>,
    pub method: MethodChoice,
    /// Oracle `h_max`.
    pub grid_h: Option<f64>,
    /// Oracle geometric grid ratio.
    pub grid_ratio: Option<f64>,
    /// Truncation margin shared by both methods.
    pub margin: Option<f64>,
    pub csv: Option<PathBuf>,
    pub seed: u64,
    /// Number of random instances for [`run_compare`]; zero compares on the
    /// configured potential instead.
    pub instances: usize,
    /// Record wall time in the CSV. Off by default so output is reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lambda: 0.0,
            mu: 1.0,
            alpha: 1.0,
            beta: 0.0,
            dim: 3,
            coulomb: None,
            energies: vec![1e-3],
            method: MethodChoice::Pruefer,
            grid_h: None,
            grid_ratio: None,
            margin: None,
            csv: None,
            seed: 0,
            instances: 0,
            timing: false,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> HarnessResult<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| HarnessError::Config(format!("{key}: not a number: {v:?}")))
}

fn parse_int<I: std::str::FromStr>(key: &str, v: &str) -> HarnessResult<I> {
    v.trim()
        .parse::<I>()
        .map_err(|_| HarnessError::Config(format!("{key}: not an integer: {v:?}")))
}

/// `lo:hi:n` gives `n` geometrically spaced energies from `hi` down to `lo`;
/// a comma-separated list is taken as is.
pub fn parse_energies(s: &str) -> HarnessResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.as_slice() {
        [lo, hi, n] => {
            let lo = parse_f64("energies", lo)?;
            let hi = parse_f64("energies", hi)?;
            let n: usize = parse_int("energies", n)?;
            if n == 0 || !(lo > 0.0) || !(hi > 0.0) {
                return Err(HarnessError::Config(format!("energies: bad range {s:?}")));
            }
            if n == 1 {
                vec![hi]
            } else {
                let (a, b) = (hi.ln(), lo.ln());
                (0..n)
                    .map(|i| {
                        if i == 0 {
                            hi
                        } else if i == n - 1 {
                            lo
                        } else {
                            (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                        }
                    })
                    .collect()
            }
        }
        [_] => s
            .split(',')
            .map(|x| parse_f64("energies", x))
            .collect::<HarnessResult<Vec<f64>>>()?,
        _ => {
            return Err(HarnessError::Config(format!(
                "energies: expected lo:hi:n, got {s:?}"
            )))
        }
    };
    Ok(out)
}

impl ExperimentConfig {
    /// Sets one option by its flag name (with or without the leading `--`,
    /// `_` and `-` interchangeable).
    pub fn set(&mut self, key: &str, value: &str) -> HarnessResult<()> {
        let k = key.trim().trim_start_matches("--").replace('_', "-");
        let v = value.trim();
        match k.as_str() {
            "lambda" => self.lambda = parse_f64(&k, v)?,
            "mu" => self.mu = parse_f64(&k, v)?,
            "alpha" => self.alpha = parse_f64(&k, v)?,
            "beta" => self.beta = parse_f64(&k, v)?,
            "dim" | "d" => self.dim = parse_int(&k, v)?,
            "coulomb" => self.coulomb = Some(parse_f64(&k, v)?),
            "energy" => self.energies = vec![parse_f64(&k, v)?],
            "energies" => self.energies = parse_energies(v)?,
            "method" => self.method = v.parse()?,
            "grid-h" => self.grid_h = Some(parse_f64(&k, v)?),
            "grid-ratio" => self.grid_ratio = Some(parse_f64(&k, v)?),
            "margin" => self.margin = Some(parse_f64(&k, v)?),
            "csv" => self.csv = Some(PathBuf::from(v)),
            "seed" => self.seed = parse_int(&k, v)?,
            "instances" => self.instances = parse_int(&k, v)?,
            "timing" => {
                self.timing = match v {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => {
                        return Err(HarnessError::Config(format!(
                            "timing: expected a boolean, got {v:?}"
                        )))
                    }
                }
            }
            _ => return Err(HarnessError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> HarnessResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected key = value", i + 1))
            })?;
            self.set(k, v)
                .map_err(|e| HarnessError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> HarnessResult<()> {
        if self.energies.is_empty() {
            return Err(HarnessError::Config("no energies".into()));
        }
        if self.energies.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(HarnessError::Config(
                "energies must be positive and finite".into(),
            ));
        }
        if self.energies.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(HarnessError::Config(
                "energies must be strictly decreasing".into(),
            ));
        }
        if self.dim == 0 {
            return Err(HarnessError::Config("dim must be >= 1".into()));
        }
        for (name, v) in [
            ("grid-h", self.grid_h),
            ("grid-ratio", self.grid_ratio),
            ("margin", self.margin),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(HarnessError::Config(format!("{name} must be positive")));
                }
            }
        }
        if matches!(self.grid_ratio, Some(r) if r <= 1.0) {
            return Err(HarnessError::Config("grid-ratio must exceed 1".into()));
        }
        self.spec().map(|_| ())
    }

    pub fn spec(&self) -> HarnessResult<PotentialSpec<f64>> {
        let mut spec = PotentialSpec::new(self.lambda, self.mu, self.alpha, self.beta)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if let Some(z) = self.coulomb {
            spec = spec.with_perturbation(Arc::new(move |r: f64| z / r));
        }
        Ok(spec)
    }

    pub fn pruefer_policy(&self) -> CountPolicy<f64> {
        let mut p = CountPolicy {
            parallel: false,
            ..CountPolicy::default()
        };
        if let Some(m) = self.margin {
            p.margin = m;
        }
        p
    }

    pub fn oracle_policy(&self) -> OraclePolicy<f64> {
        let mut p = OraclePolicy::default();
        if let Some(h) = self.grid_h {
            p.h_max = h;
        }
        if let Some(r) = self.grid_ratio {
            p.ratio = r;
        }
        if let Some(m) = self.margin {
            p.margin = m;
        }
        p
    }
}

/// One counted energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub result: CountResult<f64>,
    pub seconds: f64,
    /// Random instance index in comparison suites.
    pub instance: Option<usize>,
}

/// Per-method slope fit against the theoretical `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodFit {
    pub method: Method,
    pub fit: SlopeFit<f64>,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareSummary {
    pub pairs: usize,
    pub exact: usize,
    pub within_one: usize,
    pub max_deviation: u64,
}

impl CompareSummary {
    pub fn exact_rate(&self) -> f64 {
        if self.pairs == 0 {
            1.0
        } else {
            self.exact as f64 / self.pairs as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub fits: Vec<MethodFit>,
    pub theory_m: f64,
    /// Absent when the parameters fall outside the classifier's range.
    pub classification: Option<Classification<f64>>,
    pub comparison: Option<CompareSummary>,
}

impl Report {
    pub fn empty(config: ExperimentConfig) -> Self {
        Report {
            config,
            rows: Vec::new(),
            fits: Vec::new(),
            theory_m: 0.0,
            classification: None,
            comparison: None,
        }
    }

    /// Rows for `method`, in energy order.
    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.result.method == method)
    }

    /// Tabular content in CSV order.
    pub fn table(&self) -> Vec<CsvRow> {
        let mut out = Vec::new();
        for row in &self.rows {
            let res = &row.result;
            let seconds = if self.config.timing { row.seconds } else { 0.0 };
            let base = CsvRow {
                e: res.energy,
                abs_ln_e: res.energy.ln().abs(),
                l: -1,
                lambda: 0.0,
                multiplicity: 1,
                count: res.total,
                count_lo: res.total_lo,
                count_hi: res.total_hi,
                method: res.method,
                seconds,
            };
            out.push(base.clone());
            for c in &res.channels {
                out.push(CsvRow {
                    l: c.l as i64,
                    lambda: c.lambda,
                    multiplicity: c.multiplicity,
                    count: c.count,
                    count_lo: c.count_lo,
                    count_hi: c.count_hi,
                    ..base.clone()
                });
            }
        }
        out.sort_by(|a, b| b.e.total_cmp(&a.e).then(a.l.cmp(&b.l)));
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        write!(
            f,
            "V(r) = {} r^{} sin({} r^{})",
            c.lambda, c.beta, c.mu, c.alpha
        )?;
        if let Some(z) = c.coulomb {
            write!(f, " + {z}/r")?;
        }
        writeln!(f, ", d = {}", c.dim)?;
        if let Some(cl) = &self.classification {
            write!(f, "classification: {:?} ({:?})", cl.verdict, cl.branch)?;
            if let Some(lc) = cl.critical_coupling {
                write!(f, ", critical coupling {lc:.6}")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "theory slope M = {:.6}", self.theory_m)?;
        if !self.rows.is_empty() {
            writeln!(
                f,
                "{:>12} {:>10} {:>8} {:>8} {:>8}  method",
                "E", "|ln E|", "N", "N_lo", "N_hi"
            )?;
            for r in &self.rows {
                let res = &r.result;
                write!(
                    f,
                    "{:>12.3e} {:>10.4} {:>8} {:>8} {:>8}  {}",
                    res.energy,
                    res.energy.ln().abs(),
                    res.total,
                    res.total_lo,
                    res.total_hi,
                    res.method.as_str()
                )?;
                if let Some(i) = r.instance {
                    write!(f, "  #{i}")?;
                }
                writeln!(f)?;
            }
        }
        for mf in &self.fits {
            writeln!(
                f,
                "{}: slope {:.4}, intercept {:.3}, rms {:.3}, relative error {:.2}%",
                mf.method.as_str(),
                mf.fit.slope,
                mf.fit.intercept,
                mf.fit.residual_rms,
                100.0 * mf.relative_error
            )?;
        }
        if let Some(cmp) = &self.comparison {
            writeln!(
                f,
                "agreement: {}/{} exact ({:.1}%), {}/{} within one, max deviation {}",
                cmp.exact,
                cmp.pairs,
                100.0 * cmp.exact_rate(),
                cmp.within_one,
                cmp.pairs,
                cmp.max_deviation
            )?;
        }
        Ok(())
    }
}

fn count_once(
    spec: &PotentialSpec<f64>,
    d: u32,
    e: f64,
    method: Method,
    cfg: &ExperimentConfig,
) -> HarnessResult<Row> {
    let t0 = Instant::now();
    let result = match method {
        Method::Pruefer => count_total(spec, d, e, &cfg.pruefer_policy()),
        Method::Oracle => count_total_oracle(spec, d, e, &cfg.oracle_policy()),
    }
    .map_err(|source| HarnessError::Numerical { energy: e, source })?;
    Ok(Row {
        result,
        seconds: t0.elapsed().as_secs_f64(),
        instance: None,
    })
}

fn attach_theory(report: &mut Report) {
    let c = &report.config;
    report.theory_m = slope_m(c.lambda, c.mu, c.alpha, c.dim);
    report.classification = classify(c.lambda, c.mu, c.alpha, c.beta, c.dim).ok();
}

fn fit_rows(report: &mut Report) {
    let m = report.theory_m;
    for &method in report.config.method.methods() {
        let pts: Vec<(f64, f64)> = report
            .rows_for(method)
            .map(|r| (r.result.energy.ln().abs(), r.result.total as f64))
            .collect();
        if let Ok(fit) = fit_slope(&pts) {
            let relative_error = (fit.slope - m).abs() / m.max(1e-12);
            report.fits.push(MethodFit {
                method,
                fit,
                relative_error,
            });
        }
    }
}

/// Counts at every configured energy with the chosen method(s) and fits the
/// slope against `|ln E|`.
pub fn run_sweep(cfg: &ExperimentConfig) -> HarnessResult<Report> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let jobs: Vec<(Method, f64)> = cfg
        .method
        .methods()
        .iter()
        .flat_map(|&m| cfg.energies.iter().map(move |&e| (m, e)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(m, e)| count_once(&spec, cfg.dim, e, m, cfg))
        .collect::<HarnessResult<Vec<Row>>>()?;
    let mut report = Report::empty(cfg.clone());
    report.rows = rows;
    attach_theory(&mut report);
    fit_rows(&mut report);
    Ok(report)
}

/// Smooth compactly supported bump sum on `(1, 200)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpPotential {
    /// `(center, half_width, depth)`.
    pub bumps: Vec<(f64, f64, f64)>,
}

impl BumpPotential {
    pub const SUPPORT: (f64, f64) = (1.0, 200.0);

    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let (a, b) = Self::SUPPORT;
        let k = rng.gen_range(1..=4);
        let bumps = (0..k)
            .map(|_| {
                let w = rng.gen_range(2.0..15.0);
                let c = rng.gen_range(a + w + 0.5..b - w - 0.5);
                let depth = rng.gen_range(-0.1..0.4);
                (c, w, depth)
            })
            .collect();
        BumpPotential { bumps }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.bumps
            .iter()
            .map(|&(c, w, depth)| {
                let x = (r - c) / w;
                if x.abs() < 1.0 {
                    depth * (1.0 - 1.0 / (1.0 - x * x)).exp()
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Dirichlet half-line operator `−u″ − V u` on `(1, ∞)`.
    pub fn operator(&self) -> ChannelOperator<f64> {
        let me = self.clone();
        let q: RadialFn<f64> = Arc::new(move |r| -me.eval(r));
        ChannelOperator::from_fn(Self::SUPPORT.0, BoundaryCondition::Dirichlet, q, "bumps")
    }
}

/// The random instances used by [`run_compare`] for a given seed.
pub fn random_instances(seed: u64, n: usize) -> Vec<BumpPotential> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| BumpPotential::random(&mut rng)).collect()
}

fn single_channel(e: f64, method: Method, count: u64, lo: u64, hi: u64) -> CountResult<f64> {
    let ch = ChannelCount {
        l: 0,
        lambda: 0.0,
        multiplicity: 1,
        count,
        count_lo: lo,
        count_hi: hi,
    };
    CountResult::from_channels(e, 1, method, vec![ch])
}

fn compare_instance(
    pot: &BumpPotential,
    e: f64,
    idx: usize,
    cfg: &ExperimentConfig,
) -> HarnessResult<(Row, Row)> {
    let op = pot.operator();
    let mut pp = cfg.pruefer_policy();
    pp.step_ceiling = Some(0.05);
    pp.horizon = 1e6;
    let mut op_policy = cfg.oracle_policy();
    op_policy.horizon = 1e6;
    if cfg.grid_h.is_none() {
        op_policy.h_max = 0.02;
    }
    let numerical = |source| HarnessError::Numerical { energy: e, source };
    let t0 = Instant::now();
    let tr = count_channel(&op, e, &pp).map_err(numerical)?;
    let t1 = Instant::now();
    let n = count_channel_oracle(&op, None, e, &op_policy).map_err(numerical)? as u64;
    let t2 = Instant::now();
    let p = Row {
        result: single_channel(e, Method::Pruefer, tr.count, tr.count_lo, tr.count_hi),
        seconds: (t1 - t0).as_secs_f64(),
        instance: Some(idx),
    };
    let o = Row {
        result: single_channel(e, Method::Oracle, n, n, n),
        seconds: (t2 - t1).as_secs_f64(),
        instance: Some(idx),
    };
    Ok((p, o))
}

fn summarize(rows: &[Row]) -> CompareSummary {
    let mut s = CompareSummary {
        pairs: 0,
        exact: 0,
        within_one: 0,
        max_deviation: 0,
    };
    for pair in rows.chunks(2) {
        let a = pair[0].result.total;
        let b = pair[1].result.total;
        let dev = a.abs_diff(b);
        s.pairs += 1;
        s.exact += usize::from(dev == 0);
        s.within_one += usize::from(dev <= 1);
        s.max_deviation = s.max_deviation.max(dev);
    }
    s
}

/// Runs both methods on identical instances. With `instances > 0` these are
/// seeded random bump potentials on `(1, 200)` with a Dirichlet condition at
/// `r = 1`; otherwise the configured potential itself.
pub fn run_compare(cfg: &ExperimentConfig) -> HarnessResult<Report> {
    cfg.validate()?;
    let mut report = Report::empty(ExperimentConfig {
        method: MethodChoice::Both,
        ..cfg.clone()
    });
    let rows: Vec<Row> = if cfg.instances > 0 {
        let pots = random_instances(cfg.seed, cfg.instances);
        let jobs: Vec<(usize, f64)> = (0..pots.len())
            .flat_map(|i| cfg.energies.iter().map(move |&e| (i, e)))
            .collect();
        let pairs = jobs
            .par_iter()
            .map(|&(i, e)| compare_instance(&pots[i], e, i, cfg))
            .collect::<HarnessResult<Vec<(Row, Row)>>>()?;
        pairs.into_iter().flat_map(|(a, b)| [a, b]).collect()
    } else {
        let spec = cfg.spec()?;
        let pairs = cfg
            .energies
            .par_iter()
            .map(|&e| {
                Ok((
                    count_once(&spec, cfg.dim, e, Method::Pruefer, cfg)?,
                    count_once(&spec, cfg.dim, e, Method::Oracle, cfg)?,
                ))
            })
            .collect::<HarnessResult<Vec<(Row, Row)>>>()?;
        attach_theory(&mut report);
        pairs.into_iter().flat_map(|(a, b)| [a, b]).collect()
    };
    report.comparison = Some(summarize(&rows));
    report.rows = rows;
    Ok(report)
}

/// One parsed CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub e: f64,
    pub abs_ln_e: f64,
    /// `-1` marks the total over channels.
    pub l: i64,
    pub lambda: f64,
    pub multiplicity: u64,
    pub count: u64,
    pub count_lo: u64,
    pub count_hi: u64,
    pub method: Method,
    pub seconds: f64,
}

/// Writes the report as CSV to any sink.
pub fn write_csv<W: Write>(report: &Report, sink: W) -> HarnessResult<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(sink);
    let err = |e: csv::Error| HarnessError::Csv(e.to_string());
    w.write_record(CSV_HEADER.split(',')).map_err(err)?;
    for r in report.table() {
        w.write_record([
            format!("{:e}", r.e),
            format!("{:e}", r.abs_ln_e),
            r.l.to_string(),
            format!("{:e}", r.lambda),
            r.multiplicity.to_string(),
            r.count.to_string(),
            r.count_lo.to_string(),
            r.count_hi.to_string(),
            r.method.as_str().to_string(),
            format!("{:e}", r.seconds),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| HarnessError::Csv(e.to_string()))
}

pub fn emit_csv(report: &Report, path: &Path) -> HarnessResult<()> {
    let io = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv(report, &mut buf)?;
    buf.flush().map_err(io)
}

pub fn read_csv<R: Read>(source: R) -> HarnessResult<Vec<CsvRow>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let err = |m: String| HarnessError::Csv(m);
    let header = rd.headers().map_err(|e| err(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(err(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let f = |i: usize| -> HarnessResult<f64> {
            parse_f64(&header[i], &rec[i]).map_err(|e| err(e.to_string()))
        };
        let u = |i: usize| -> HarnessResult<u64> {
            parse_int(&header[i], &rec[i]).map_err(|e| err(e.to_string()))
        };
        out.push(CsvRow {
            e: f(0)?,
            abs_ln_e: f(1)?,
            l: parse_int::<i64>("l", &rec[2]).map_err(|e| err(e.to_string()))?,
            lambda: f(3)?,
            multiplicity: u(4)?,
            count: u(5)?,
            count_lo: u(6)?,
            count_hi: u(7)?,
            method: rec[8].parse().map_err(|e: Error| err(e.to_string()))?,
            seconds: f(9)?,
        });
    }
    Ok(out)
}

pub fn parse_csv(path: &Path) -> HarnessResult<Vec<CsvRow>> {
    let file = std::fs::File::open(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file)
}
