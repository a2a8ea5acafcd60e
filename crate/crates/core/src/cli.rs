//! Command-line experiments, their configuration and their CSV/JSON output.

use std::f64::consts::{PI, TAU};
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::{self, PhiParams};
use crate::averaging::{self, Disc};
use crate::correlations::{
    nu_correlation_with_cap, pair_correlation_fast, pair_correlation_oracle, poisson_baseline, CorrelationSpec, Engine,
    DEFAULT_WORK_CAP,
};
use crate::divergence::{self, DivergenceConfig};
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, Observer};
use crate::numtheory::{self, HalfOpen, HyperbolaQuery, KloostermanTable, Modulus};
use crate::quadrature::QuadratureConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    Lattice,
    Correlations,
    Averaging,
    Analytic,
    Numtheory,
    Divergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct GlobalOptions {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; all output is independent of this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Step cap for the tuple search.
    #[arg(long, global = true, default_value_t = DEFAULT_WORK_CAP)]
    pub budget: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl Default for GlobalOptions {
    fn default() -> Self {
        Self { seed: 1, threads: None, budget: DEFAULT_WORK_CAP, out: None, format: Format::Csv }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Pair correlation for one observer.
    PairCorrelation {
        #[arg(long = "Q")]
        radius: u64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = Engine::Fast)]
        engine: Engine,
    },
    /// ν-level correlation for one observer.
    NuCorrelation {
        #[arg(long)]
        nu: usize,
        /// ν - 1 comma-separated scales.
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long = "Q")]
        radius: u64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
    /// Pair correlation averaged over observers in a disc.
    AvgPairCorrelation {
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        radius: Vec<u64>,
        /// `x0,y0,r0`.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.5, 0.25])]
        disc: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 128)]
        samples: usize,
        /// Average over a grid with this step instead of random observers.
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Normalised sum of strip areas.
    Gq {
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        radius: Vec<u64>,
        #[arg(long)]
        mu: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.5, 0.25])]
        disc: Vec<f64>,
    },
    /// Normalised pair sum with its limit `π r0² / 6`.
    Sq {
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        radius: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.5, 0.25])]
        disc: Vec<f64>,
    },
    /// Closed-form main term with its limit `π r0² / 6`.
    Mq {
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        radius: Vec<u64>,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
    },
    /// Volume and total variation of the square-root section integrals.
    PhiIntegrals {
        #[arg(long, allow_hyphen_values = true)]
        alpha0: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta0: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// One Kloosterman sum, or the extremes over all primes up to `--max-prime`.
    Kloosterman {
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        max_prime: Option<u64>,
    },
    /// Points of `x y ≡ h (mod q)` in a box.
    HyperbolaCount {
        #[arg(long)]
        q: u64,
        #[arg(long, allow_hyphen_values = true)]
        h: i64,
        /// `lo,hi` for the half-open interval of x.
        #[arg(long, value_delimiter = ',', required = true)]
        i1: Vec<i64>,
        #[arg(long, value_delimiter = ',', required = true)]
        i2: Vec<i64>,
    },
    /// `#{0 <= m < 2d : gcd(a + b m, d) = 1}`.
    CoprimeCount {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        d: u64,
    },
    /// Coprime `(A, B) ∈ [1, 2q]²` with `q | A b - B a`.
    SolutionPairs {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        q: u64,
    },
    /// Aligned-cluster lower bounds for the 6-level correlation.
    DivergenceDemo {
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        y: Option<f64>,
        /// `num_x,num_y,den` for a rational observer.
        #[arg(long, value_delimiter = ',')]
        rational: Option<Vec<u64>>,
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        radius: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0, 1.0, 1.0, 1.0])]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Approximation range; `⌊Q^{3/4}⌋` by default.
        #[arg(long = "T")]
        t: Option<u64>,
        /// Count all 6-tuples when `N` is at most this.
        #[arg(long, default_value_t = 0)]
        count_max_points: u64,
    },
    /// Run the invariant suites; fails if any check fails.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Write a matplotlib script plotting a CSV produced by another command.
    EmitPlots {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        script: PathBuf,
    },
}

/// A complete, serialisable description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub options: GlobalOptions,
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}

#[derive(Debug, Parser)]
#[command(name = "dircorr", version, about = "Correlations of lattice point directions seen from an observer")]
pub struct Cli {
    #[command(flatten)]
    pub options: GlobalOptions,
    /// Read the whole configuration from a JSON file instead of the command line.
    #[arg(long, conflicts_with = "print_config")]
    pub config: Option<PathBuf>,
    /// Print the configuration as JSON and exit.
    #[arg(long)]
    pub print_config: bool,
    #[command(subcommand)]
    pub experiment: Option<Experiment>,
}

/// Rows of one experiment under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// Set when a verification inside the experiment failed.
    pub failed: bool,
}

impl Table {
    fn new(headers: &[&str]) -> Self {
        Self { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new(), failed: false }
    }

    fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.headers.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

/// Exit status for an error: 2 for rejected input, 1 for a failed computation.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Invalid(_)
        | Error::Config(_)
        | Error::Empty(_)
        | Error::Unsupported(_)
        | Error::DegeneratePoint { .. }
        | Error::NoInverse { .. } => 2,
        Error::Size(_) | Error::Quadrature { .. } | Error::Check(_) | Error::Io(_) => 1,
    }
}

fn disc_from(v: &[f64]) -> Result<Disc> {
    match v {
        [x0, y0, r0] => Disc::new(*x0, *y0, *r0),
        _ => Err(Error::Config(format!("--disc needs x0,y0,r0, got {} values", v.len()))),
    }
}

fn interval_from(v: &[i64], name: &str) -> Result<HalfOpen> {
    match v {
        [lo, hi] => HalfOpen::new(*lo, *hi),
        _ => Err(Error::Config(format!("--{name} needs lo,hi"))),
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Runs the experiment on a pool of `threads` workers when given.
pub fn run(config: &ExperimentConfig) -> Result<Table> {
    match config.options.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| run_experiment(config))
        }
        None => run_experiment(config),
    }
}

fn run_experiment(config: &ExperimentConfig) -> Result<Table> {
    let opts = &config.options;
    match &config.experiment {
        Experiment::PairCorrelation { radius, x, y, lambda, engine } => {
            let spec = CorrelationSpec::pair(*radius, *lambda, Observer::new(*x, *y)?)?;
            let res = match engine {
                Engine::Fast => pair_correlation_fast(&spec)?,
                Engine::Oracle => pair_correlation_oracle(&spec)?,
            };
            let mut t = Table::new(&[
                "experiment", "Q", "x", "y", "lambda", "engine", "N", "pair_count", "value", "poisson", "excluded_point",
                "provenance",
            ]);
            t.push(vec![
                json!("pair-correlation"),
                json!(radius),
                json!(x),
                json!(y),
                json!(lambda),
                json!(engine),
                json!(res.n),
                json!(res.tuple_count as u64),
                json!(res.value),
                json!(poisson_baseline(2, &[*lambda])?),
                json!(res.excluded_point.map(|p| format!("({},{})", p.q, p.a))),
                json!("pair correlation against the Poisson value 2λ"),
            ]);
            Ok(t)
        }
        Experiment::NuCorrelation { nu, lambdas, radius, x, y } => {
            let spec = CorrelationSpec::new(*nu, lambdas.clone(), *radius, Observer::new(*x, *y)?)?;
            let res = nu_correlation_with_cap(&spec, opts.budget)?;
            let mut t = Table::new(&[
                "experiment", "nu", "lambdas", "Q", "x", "y", "N", "tuple_count", "value", "poisson", "truncated",
                "provenance",
            ]);
            t.push(vec![
                json!("nu-correlation"),
                json!(nu),
                json!(lambdas.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(";")),
                json!(radius),
                json!(x),
                json!(y),
                json!(res.n),
                json!(res.tuple_count.to_string()),
                json!(res.value),
                json!(poisson_baseline(*nu, lambdas)?),
                json!(res.truncated),
                json!("ν-level correlation against the Poisson value 2^(ν-1) Πλ"),
            ]);
            Ok(t)
        }
        Experiment::AvgPairCorrelation { radius, disc, lambda, samples, grid_step } => {
            let d = disc_from(disc)?;
            let mut t = Table::new(&[
                "experiment", "Q", "lambda", "samples", "mean", "standard_error", "theory", "abs_error", "seed",
                "provenance",
            ]);
            for &q in radius {
                let rep = match grid_step {
                    Some(h) => averaging::grid_average_pair_correlation(&d, q, *lambda, *h)?,
                    None => averaging::average_pair_correlation(&d, q, *lambda, *samples, opts.seed)?,
                };
                t.push(vec![
                    json!("avg-pair-correlation"),
                    json!(q),
                    json!(lambda),
                    json!(rep.sample_count),
                    json!(rep.mean),
                    json!(rep.standard_error),
                    json!(rep.theory),
                    json!(rep.abs_error()),
                    json!(rep.seed),
                    json!("disc-averaged pair correlation tends to 2πλ/3"),
                ]);
            }
            Ok(t)
        }
        Experiment::Gq { radius, mu, disc } => {
            let d = disc_from(disc)?;
            let mut t = Table::new(&["experiment", "Q", "mu", "value", "limit", "abs_error", "provenance"]);
            for &q in radius {
                let v = analytic::g_sum_gq(q, *mu, &d)?;
                let lim = analytic::g_sum_limit(*mu, &d);
                t.push(vec![
                    json!("gq"),
                    json!(q),
                    json!(mu),
                    json!(v),
                    json!(lim),
                    json!((v - lim).abs()),
                    json!("strip-area sum tends to 16π r0² μ / 3"),
                ]);
            }
            Ok(t)
        }
        Experiment::Sq { radius, disc } => {
            let d = disc_from(disc)?;
            let mut t = Table::new(&["experiment", "Q", "value", "limit", "abs_error", "provenance"]);
            let lim = analytic::s_sum_limit(&d);
            for &q in radius {
                let v = analytic::s_sum_sq(q, &d)?;
                t.push(vec![
                    json!("sq"),
                    json!(q),
                    json!(v),
                    json!(lim),
                    json!((v - lim).abs()),
                    json!("pair sum tends to π r0² / 6"),
                ]);
            }
            Ok(t)
        }
        Experiment::Mq { radius, r0 } => {
            let mut t = Table::new(&["experiment", "Q", "r0", "value", "limit", "abs_error", "provenance"]);
            let lim = PI * r0 * r0 / 6.0;
            for &q in radius {
                let v = analytic::mq_main_term(q, *r0)?;
                t.push(vec![
                    json!("mq"),
                    json!(q),
                    json!(r0),
                    json!(v),
                    json!(lim),
                    json!((v - lim).abs()),
                    json!("closed-form main term tends to π r0² / 6"),
                ]);
            }
            Ok(t)
        }
        Experiment::PhiIntegrals { alpha0, beta0, tol } => {
            let p = PhiParams::new(*alpha0, *beta0)?;
            let cfg = QuadratureConfig::new(*tol, 4000)?;
            let s = analytic::section_integrals(&p, &cfg)?;
            let mut t = Table::new(&[
                "experiment", "alpha0", "beta0", "volume", "volume_target", "total_variation", "variation_bound",
                "provenance",
            ]);
            t.push(vec![
                json!("phi-integrals"),
                json!(alpha0),
                json!(beta0),
                json!(s.volume),
                json!(TAU / 3.0),
                json!(s.total_variation),
                json!(analytic::variation_bound()),
                json!("square-root section volume 2π/3 and variation bound √2 + ln(1+√2)"),
            ]);
            Ok(t)
        }
        Experiment::Kloosterman { q, m, n, max_prime } => {
            let mut t =
                Table::new(&["experiment", "q", "m", "n", "re", "im", "abs", "weil_bound", "provenance"]);
            match (max_prime, q) {
                (Some(pmax), _) => {
                    for p in numtheory::primes_up_to(*pmax) {
                        let (abs, im) = numtheory::kloosterman_extremes(Modulus::new(p)?);
                        t.push(vec![
                            json!("kloosterman-extremes"),
                            json!(p),
                            Value::Null,
                            Value::Null,
                            Value::Null,
                            json!(im),
                            json!(abs),
                            json!(2.0 * (p as f64).sqrt()),
                            json!("largest |K(m,n;p)| over 1 <= m,n < p against 2√p"),
                        ]);
                        if abs > 2.0 * (p as f64).sqrt() + 1e-6 || im >= 1e-9 * p as f64 {
                            t.failed = true;
                        }
                    }
                }
                (None, Some(q)) => {
                    let k = KloostermanTable::new(Modulus::new(*q)?).sum(*m, *n);
                    t.push(vec![
                        json!("kloosterman"),
                        json!(q),
                        json!(m),
                        json!(n),
                        json!(k.re),
                        json!(k.im),
                        json!(k.norm()),
                        json!(if numtheory::is_prime(*q) { json!(2.0 * (*q as f64).sqrt()) } else { Value::Null }),
                        json!("Kloosterman sum K(m,n;q)"),
                    ]);
                }
                (None, None) => return Err(Error::Config("kloosterman needs --q or --max-prime".into())),
            }
            Ok(t)
        }
        Experiment::HyperbolaCount { q, h, i1, i2 } => {
            let query =
                HyperbolaQuery::new(Modulus::new(*q)?, *h, interval_from(i1, "i1")?, interval_from(i2, "i2")?)?;
            let c = numtheory::hyperbola_count(&query);
            let mut t = Table::new(&["experiment", "q", "h", "i1", "i2", "count", "main_term", "error", "provenance"]);
            t.push(vec![
                json!("hyperbola-count"),
                json!(q),
                json!(h),
                json!(format!("[{},{})", query.i1.lo, query.i1.hi)),
                json!(format!("[{},{})", query.i2.lo, query.i2.hi)),
                json!(c.count),
                json!(c.main_term),
                json!(c.error),
                json!("modular hyperbola count against φ(q)|I1||I2|/q²"),
            ]);
            Ok(t)
        }
        Experiment::CoprimeCount { a, b, d } => {
            let count = numtheory::coprime_progression_count(*a, *b, *d)?;
            let direct = (0..2 * d).filter(|m| (a + b * m).gcd(d) == 1).count() as u64;
            let (d1, d2) = numtheory::coprime_split(*d, *b);
            let mut t = Table::new(&["experiment", "a", "b", "d", "d1", "d2", "count", "direct", "provenance"]);
            t.push(vec![
                json!("coprime-count"),
                json!(a),
                json!(b),
                json!(d),
                json!(d1),
                json!(d2),
                json!(count),
                json!(direct),
                json!("coprime terms of a progression: 2φ(d1)d2"),
            ]);
            t.failed = count != direct;
            Ok(t)
        }
        Experiment::SolutionPairs { a, b, q } => {
            let set = numtheory::build_solution_pairs(*a, *b, *q)?;
            let mut t = Table::new(&["experiment", "a", "b", "q", "A", "B", "provenance"]);
            for &(ba, bb) in &set.pairs {
                t.push(vec![
                    json!("solution-pairs"),
                    json!(a),
                    json!(b),
                    json!(q),
                    json!(ba),
                    json!(bb),
                    json!("coprime directions with q | Ab - Ba"),
                ]);
            }
            Ok(t)
        }
        Experiment::DivergenceDemo { x, y, rational, radius, lambdas, delta, t: tt, count_max_points } => {
            divergence_table(*x, *y, rational.as_deref(), radius, lambdas, *delta, *tt, *count_max_points, opts.budget)
        }
        Experiment::Verify { suite } => Ok(verify(*suite, opts.seed)),
        Experiment::EmitPlots { input, script } => {
            let (headers, rows) = read_csv(input)?;
            emit_plot_script(&headers, &rows, script)?;
            let mut t = Table::new(&["experiment", "input", "script", "rows", "provenance"]);
            t.push(vec![
                json!("emit-plots"),
                json!(input.display().to_string()),
                json!(script.display().to_string()),
                json!(rows.len()),
                json!("plot script"),
            ]);
            Ok(t)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn divergence_table(
    x: Option<f64>,
    y: Option<f64>,
    rational: Option<&[u64]>,
    radius: &[u64],
    lambdas: &[f64],
    delta: f64,
    t: Option<u64>,
    count_max_points: u64,
    budget: u64,
) -> Result<Table> {
    if let Some(r) = rational {
        let [nx, ny, den] = r else {
            return Err(Error::Config("--rational needs num_x,num_y,den".into()));
        };
        let mut tab = Table::new(&[
            "experiment", "x", "y", "Q", "m0", "line_points", "r6_lower_bound", "r6_counted", "truncated", "consistent",
            "provenance",
        ]);
        for &q in radius {
            let count = LatticeBox::new(q).count()? <= count_max_points;
            let rep = divergence::rational_divergence_demo(*nx, *ny, *den, q, lambdas, count, budget)?;
            let consistent = rep.r6_counted.is_none_or(|c| rep.counted_truncated || c >= rep.r6_lower_bound);
            tab.failed |= !consistent;
            tab.push(vec![
                json!("divergence-demo-rational"),
                json!(format!("{nx}/{den}")),
                json!(format!("{ny}/{den}")),
                json!(q),
                json!(rep.m0),
                json!(rep.line_points),
                json!(rep.r6_lower_bound),
                json!(rep.r6_counted),
                json!(rep.counted_truncated),
                json!(consistent),
                json!("points on the observer's ray give a 6-level lower bound"),
            ]);
        }
        return Ok(tab);
    }
    let (Some(x), Some(y)) = (x, y) else {
        return Err(Error::Config("divergence-demo needs --x and --y, or --rational".into()));
    };
    let cfg = DivergenceConfig { t, delta, count_max_points, work_cap: budget };
    let mut tab = Table::new(&[
        "experiment", "x", "y", "Q", "T", "q", "a", "b", "clusters", "m_formula", "formula_bound", "max_run",
        "r6_lower_bound", "r6_counted", "truncated", "floor", "floor_reached", "construction_ok", "provenance",
    ]);
    for &q in radius {
        let r = divergence::r6_divergence_demo(x, y, q, lambdas, &cfg)?;
        let consistent = r.r6_counted.is_none_or(|c| r.counted_truncated || c >= r.r6_lower_bound);
        tab.failed |= !consistent || !r.check.passed();
        tab.push(vec![
            json!("divergence-demo"),
            json!(x),
            json!(y),
            json!(q),
            json!(r.t),
            json!(r.approx.q),
            json!(r.approx.a),
            json!(r.approx.b),
            json!(r.cluster_count),
            json!(r.m_formula),
            json!(r.formula_bound),
            json!(r.max_run),
            json!(r.r6_lower_bound),
            json!(r.r6_counted),
            json!(r.counted_truncated),
            json!(r.growth_floor),
            json!(r.floor_reached),
            json!(r.check.passed()),
            json!("aligned clusters give a certified 6-level lower bound"),
        ]);
    }
    Ok(tab)
}

/// Writes the table as CSV (with `#` lines echoing the config) or as a JSON array.
pub fn write_table<W: Write>(table: &Table, config: &ExperimentConfig, mut out: W) -> Result<()> {
    match config.options.format {
        Format::Csv => {
            writeln!(out, "# dircorr {VERSION}")?;
            writeln!(out, "# config: {}", config.to_json())?;
            let mut w = csv::Writer::from_writer(out);
            let io_err = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(&table.headers).map_err(io_err)?;
            for row in &table.rows {
                w.write_record(row.iter().map(csv_cell)).map_err(io_err)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let objs: Vec<Value> = table
                .rows
                .iter()
                .map(|row| Value::Object(table.headers.iter().cloned().zip(row.iter().cloned()).collect()))
                .collect();
            serde_json::to_writer_pretty(&mut out, &objs).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Header and rows of a CSV written by [`write_table`], skipping `#` lines.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers = r.headers().map_err(|e| Error::Io(e.to_string()))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()).map_err(|e| Error::Io(e.to_string())))
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok((headers, rows))
}

const Y_COLUMNS: [&str; 6] = ["mean", "value", "r6_lower_bound", "count", "volume", "abs"];
const THEORY_COLUMNS: [&str; 5] = ["theory", "limit", "main_term", "volume_target", "weil_bound"];
const X_COLUMNS: [&str; 4] = ["Q", "q", "alpha0", "d"];

fn numbers(rows: &[Vec<String>], col: usize) -> Vec<f64> {
    rows.iter().map(|r| r[col].parse().unwrap_or(f64::NAN)).collect()
}

fn py_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| if x.is_finite() { format!("{x:?}") } else { "float('nan')".into() }).collect();
    format!("[{}]", items.join(", "))
}

/// Writes a standalone matplotlib script plotting the value column against
/// `Q` (or the first recognised parameter), with the theory column as a line
/// and standard errors as error bars when present.
pub fn emit_plot_script(headers: &[String], rows: &[Vec<String>], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Empty("no rows to plot".into()));
    }
    let find = |names: &[&str]| names.iter().find_map(|n| headers.iter().position(|h| h == n));
    let xc = find(&X_COLUMNS).ok_or_else(|| Error::Invalid("no parameter column to plot against".into()))?;
    let yc = find(&Y_COLUMNS).ok_or_else(|| Error::Invalid("no value column to plot".into()))?;
    let name = headers.iter().position(|h| h == "experiment").map(|c| rows[0][c].clone()).unwrap_or_default();
    let stem = path.with_extension("png");
    let mut s = String::new();
    s.push_str("import matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n");
    s.push_str(&format!("x = {}\ny = {}\n", py_list(&numbers(rows, xc)), py_list(&numbers(rows, yc))));
    s.push_str("fig, ax = plt.subplots()\n");
    match headers.iter().position(|h| h == "standard_error") {
        Some(ec) => {
            s.push_str(&format!("err = {}\n", py_list(&numbers(rows, ec))));
            s.push_str(&format!("ax.errorbar(x, y, yerr=err, marker=\"o\", capsize=3, label=\"{}\")\n", headers[yc]));
        }
        None => s.push_str(&format!("ax.plot(x, y, marker=\"o\", label=\"{}\")\n", headers[yc])),
    }
    if let Some(tc) = find(&THEORY_COLUMNS) {
        s.push_str(&format!("theory = {}\n", py_list(&numbers(rows, tc))));
        s.push_str(&format!("ax.plot(x, theory, linestyle=\"--\", color=\"k\", label=\"{}\")\n", headers[tc]));
    }
    if headers[xc] == "Q" {
        s.push_str("ax.set_xscale(\"log\")\n");
    }
    s.push_str(&format!(
        "ax.set_xlabel(\"{}\")\nax.set_ylabel(\"{}\")\nax.set_title(\"{}\")\nax.legend()\nfig.savefig(\"{}\", dpi=150)\n",
        headers[xc],
        headers[yc],
        name,
        stem.display()
    ));
    std::fs::write(path, s)?;
    Ok(())
}

struct Checks {
    table: Table,
}

impl Checks {
    fn new() -> Self {
        Self { table: Table::new(&["experiment", "suite", "check", "passed", "detail", "provenance"]) }
    }

    fn record(&mut self, suite: &str, check: &str, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
        self.table.failed |= !passed;
        self.table.push(vec![
            json!("verify"),
            json!(suite),
            json!(check),
            json!(passed),
            json!(detail),
            json!("invariant suite"),
        ]);
    }
}

/// Runs small, fast instances of every module's invariants.
pub fn verify(suite: Suite, seed: u64) -> Table {
    let mut c = Checks::new();
    let on = |s: Suite| suite == Suite::All || suite == s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if on(Suite::Lattice) {
        c.record(
            "lattice",
            "box size (2Q+1)^2",
            (|| {
                let n = crate::lattice::enumerate_box(7)?.len() as u64;
                Ok((n == LatticeBox::new(7).count()? && n == 225, format!("{n} points")))
            })(),
        );
    }
    if on(Suite::Correlations) {
        c.record(
            "correlations",
            "fast engine equals the pair oracle",
            (|| {
                for _ in 0..40 {
                    let obs = Observer::new(rng.gen(), rng.gen())?;
                    let spec = CorrelationSpec::pair(rng.gen_range(1..=12), rng.gen_range(0.01..20.0), obs)?;
                    let (f, o) = (pair_correlation_fast(&spec)?, pair_correlation_oracle(&spec)?);
                    if f.tuple_count != o.tuple_count {
                        return Ok((false, format!("{spec:?}: {} vs {}", f.tuple_count, o.tuple_count)));
                    }
                }
                Ok((true, "40 random specs".into()))
            })(),
        );
        c.record(
            "correlations",
            "ν = 2 tuple search equals the pair oracle",
            (|| {
                let spec = CorrelationSpec::new(2, vec![3.0], 9, Observer::new(0.5, 0.5)?)?;
                let (n, o) = (nu_correlation_with_cap(&spec, DEFAULT_WORK_CAP)?, pair_correlation_oracle(&spec)?);
                Ok((n.tuple_count == o.tuple_count, format!("{} tuples", n.tuple_count)))
            })(),
        );
    }
    if on(Suite::Averaging) {
        c.record(
            "averaging",
            "seeded average is reproducible",
            (|| {
                let d = Disc::new(0.5, 0.5, 0.25)?;
                let a = averaging::average_pair_correlation(&d, 30, 1.0, 8, seed)?;
                let b = averaging::average_pair_correlation(&d, 30, 1.0, 8, seed)?;
                Ok((a.mean.to_bits() == b.mean.to_bits(), format!("mean {}", a.mean)))
            })(),
        );
    }
    if on(Suite::Analytic) {
        c.record(
            "analytic",
            "main term near π/6 at Q = 10^4",
            (|| {
                let v = analytic::mq_main_term(10_000, 1.0)?;
                Ok(((v - PI / 6.0).abs() <= 1e-3, format!("{v}")))
            })(),
        );
        c.record(
            "analytic",
            "section volume and variation at the origin",
            (|| {
                let s = analytic::section_integrals(&PhiParams::new(0.0, 0.0)?, &QuadratureConfig::default())?;
                let ok = (s.volume - TAU / 3.0).abs() <= 1e-5 && (s.total_variation - analytic::variation_bound()).abs() <= 1e-5;
                Ok((ok, format!("volume {}, variation {}", s.volume, s.total_variation)))
            })(),
        );
        c.record(
            "analytic",
            "strip covering the disc has the disc's area",
            Ok({
                let a = analytic::strip_disc_area(0.3, -1.0, 1.0);
                ((a - PI * 0.09).abs() <= 1e-12, format!("{a}"))
            }),
        );
    }
    if on(Suite::Numtheory) {
        c.record(
            "numtheory",
            "Weil bound for primes up to 101",
            (|| {
                for p in numtheory::primes_up_to(101) {
                    let (abs, im) = numtheory::kloosterman_extremes(Modulus::new(p)?);
                    if abs > 2.0 * (p as f64).sqrt() + 1e-6 || im >= 1e-9 * p as f64 {
                        return Ok((false, format!("p = {p}: |K| = {abs}, |Im| = {im}")));
                    }
                }
                Ok((true, "all primes <= 101".into()))
            })(),
        );
        c.record(
            "numtheory",
            "coprime progression count for d <= 30",
            (|| {
                for d in 1..=30u64 {
                    for a in 0..d {
                        for b in 0..d {
                            if a.gcd(&b).gcd(&d) != 1 {
                                continue;
                            }
                            let direct = (0..2 * d).filter(|m| (a + b * m).gcd(&d) == 1).count() as u64;
                            if numtheory::coprime_progression_count(a, b, d)? != direct {
                                return Ok((false, format!("a={a}, b={b}, d={d}")));
                            }
                        }
                    }
                }
                Ok((true, "all admissible (a, b, d)".into()))
            })(),
        );
    }
    if on(Suite::Divergence) {
        c.record(
            "divergence",
            "cluster construction and angle bound",
            (|| {
                for _ in 0..10 {
                    let (x, y) = (rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7));
                    let radius = rng.gen_range(2_000..8_000);
                    let t = radius / 64;
                    let q = divergence::minkowski_approx(x, y, t)?.q;
                    let m = divergence::max_cluster_len(q, radius).min(4);
                    let cons = divergence::build_construction(x, y, radius, t, Some(m))?;
                    let check = divergence::validate_construction(&cons.clusters, radius, Some(cons.m as usize));
                    if !check.passed() {
                        return Ok((false, format!("({x}, {y}), Q = {radius}: {:?}", check.violations)));
                    }
                    let obs = Observer::new(x, y)?;
                    for cl in &cons.clusters {
                        if !divergence::cluster_angle_audit(cl, &obs, radius)?.holds() {
                            return Ok((false, format!("angle bound fails at ({x}, {y}), Q = {radius}")));
                        }
                    }
                }
                Ok((true, "10 random observers".into()))
            })(),
        );
        c.record(
            "divergence",
            "rational observer count covers its bound",
            (|| {
                let r = divergence::rational_divergence_demo(1, 1, 2, 8, &[1.0; 5], true, DEFAULT_WORK_CAP)?;
                let counted = r.r6_counted.unwrap_or(0.0);
                Ok((counted >= r.r6_lower_bound && !r.counted_truncated, format!("{counted} >= {}", r.r6_lower_bound)))
            })(),
        );
    }
    c.table
}

fn resolve(cli: Cli) -> Result<ExperimentConfig> {
    match (cli.config, cli.experiment) {
        (Some(_), Some(_)) => Err(Error::Config("give either --config or a subcommand, not both".into())),
        (Some(path), None) => ExperimentConfig::from_json(&std::fs::read_to_string(&path)?),
        (None, Some(experiment)) => Ok(ExperimentConfig { options: cli.options, experiment }),
        (None, None) => Err(Error::Config("a subcommand is required (see --help)".into())),
    }
}

/// Parses `args`, runs the experiment and writes its output; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let print_only = cli.print_config;
    let result = resolve(cli).and_then(|config| {
        if print_only {
            println!("{}", config.to_json());
            return Ok(false);
        }
        let table = run(&config)?;
        match &config.options.out {
            Some(path) => write_table(&table, &config, io::BufWriter::new(File::create(path)?))?,
            None => write_table(&table, &config, io::stdout().lock())?,
        }
        Ok(table.failed)
    });
    match result {
        Ok(false) => 0,
        Ok(true) => {
            eprintln!("dircorr: one or more checks failed");
            1
        }
        Err(e) => {
            eprintln!("dircorr: {e}");
            exit_code(&e)
        }
    }
}
