//! Command-line front end.
//!
//! Exit codes: 0 success, 2 cross-check outside tolerance (the report is
//! still written), 1 usage, configuration or I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::airy::{
    airy_kernel, fredholm_first_moment, fredholm_multiplicative, laplace_r, moment_from_airy_with_err,
    she_moment_from_hk, AiryConfig, FredholmConfig, LaplaceConfig,
};
use crate::airy_sampler::{
    calibrate_series, hk_mc, sample_airy_points, series_moment_mc, AirySampleSet, EnsembleConfig,
    SeriesConvention,
};
use crate::polymer::{
    intermediate_disorder_limit, polymer_moment_contour, simulate_polymer, step_size_check, Convention,
    PolymerConfig,
};
use crate::report::{CrossCheckReport, Format, Method, MomentEstimate, RequestEcho, Tolerances};
use crate::rng::derive_seed;
use crate::she_moments::{
    heat_kernel, moment_contour, moment_gaussian_mc, moment_partition, reduce_to_origin, ContourConfig,
    ContourMode, MomentRequest, PartitionConfig,
};
use crate::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SHE_XVAL_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "she-xval", version, about = "Cross-validated moments of the stochastic heat equation")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed; every random component derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: FormatArg,
    /// Output file (default: stdout, or a file in $SHE_XVAL_OUT_DIR).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock times (excluded from byte-stability).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// A single moment route.
    Moment {
        #[command(subcommand)]
        method: MomentCmd,
    },
    /// Airy kernel and Airy functionals.
    Airy {
        #[command(subcommand)]
        cmd: AiryCmd,
    },
    /// Sampled Airy points and their functionals.
    Sample {
        #[command(subcommand)]
        cmd: SampleCmd,
    },
    /// Semi-discrete polymer.
    Polymer {
        #[command(subcommand)]
        cmd: PolymerCmd,
    },
    /// Every applicable route for (k, T, X) and their pairwise gaps.
    Xcheck(XcheckArgs),
}

#[derive(Debug, Clone, Copy, Args)]
struct MomentArgs {
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 0.0)]
    x: f64,
}

impl MomentArgs {
    fn request(&self) -> Result<MomentRequest> {
        MomentRequest::new(self.k, self.t, self.x)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Tensor,
    Mc,
}

#[derive(Debug, Subcommand)]
enum MomentCmd {
    /// Nested contour integrals over vertical lines.
    Contour {
        #[command(flatten)]
        m: MomentArgs,
        /// Quadrature target accuracy.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        #[arg(long, default_value_t = 400_000)]
        samples: usize,
    },
    /// Sum over partitions of k with Gauss–Hermite determinant averages.
    Partition {
        #[command(flatten)]
        m: MomentArgs,
        #[arg(long)]
        hermite_order: Option<usize>,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
    },
    /// Gaussian Monte Carlo form of the Airy-side Laplace transform.
    GaussianMc {
        #[command(flatten)]
        m: MomentArgs,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
    },
}

#[derive(Debug, Subcommand)]
enum AiryCmd {
    /// E[∏(1 + u e^{Ca})^{−1}] as a Fredholm determinant.
    Fredholm {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        u: f64,
        #[arg(long, default_value_t = 16)]
        order: usize,
    },
    /// R(c₁,…,cₙ) for comma-separated c.
    LaplaceR {
        #[arg(long, value_delimiter = ',', required = true)]
        c: Vec<f64>,
        #[arg(long)]
        hermite_order: Option<usize>,
    },
    /// K_Ai(x, y).
    Kernel {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
}

#[derive(Debug, Clone, Copy, Args)]
struct EnsembleArgs {
    /// Matrix dimension.
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// Points kept per replica.
    #[arg(long, default_value_t = 24)]
    m: usize,
    #[arg(long, default_value_t = 10_000)]
    replicas: usize,
}

impl EnsembleArgs {
    fn sample(&self, seed: u64) -> Result<AirySampleSet> {
        sample_airy_points(&EnsembleConfig::new(self.n, self.m, self.replicas, seed)?)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    Nominal,
    Calibrated,
}

#[derive(Debug, Subcommand)]
enum SampleCmd {
    /// Top points per replica.
    Airy {
        #[command(flatten)]
        e: EnsembleArgs,
    },
    /// Random-series moment.
    Series {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, value_enum, default_value = "calibrated")]
        convention: ConventionArg,
        #[command(flatten)]
        e: EnsembleArgs,
    },
    /// E[h_k(e^{Ca₁},…,e^{Ca_m})].
    Hk {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[command(flatten)]
        e: EnsembleArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolymerConventionArg {
    Raw,
    Compensated,
}

#[derive(Debug, Subcommand)]
enum PolymerCmd {
    /// Monte Carlo moments of 𝐙^N(t).
    Simulate {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        t: f64,
        /// Step size (default t/400).
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        replicas: usize,
        #[arg(long, value_enum, default_value = "compensated")]
        convention: PolymerConventionArg,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Also run the coupled dt against dt/2 comparison.
        #[arg(long)]
        check_step: bool,
    },
    /// Compensated moment by residues.
    Contour {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        t: f64,
    },
    /// Rescaled moments along N and their extrapolation.
    Limit {
        #[command(flatten)]
        m: MomentArgs,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30")]
        n_list: Vec<u32>,
    },
}

#[derive(Debug, Args)]
struct XcheckArgs {
    #[command(flatten)]
    m: MomentArgs,
    /// Relative tolerance for deterministic pairs.
    #[arg(long)]
    tol: Option<f64>,
    /// Combined standard errors allowed for sampled pairs.
    #[arg(long, default_value_t = 3.0)]
    sigmas: f64,
    /// Samples per term for the Gaussian Monte Carlo.
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
    /// Skip the Gaussian Monte Carlo.
    #[arg(long)]
    no_mc: bool,
    /// Add the random-series estimate (k ≤ 2).
    #[arg(long)]
    with_sampler: bool,
    #[command(flatten)]
    e: EnsembleArgs,
    /// Add the polymer limit (k ≤ 2).
    #[arg(long)]
    with_polymer: bool,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30")]
    n_list: Vec<u32>,
}

/// Rendered command output.
struct Output {
    json: Value,
    csv: String,
    default_name: String,
}

impl Output {
    fn estimate(e: &MomentEstimate, name: &str) -> Result<Self> {
        Ok(Output {
            json: serde_json::to_value(e)?,
            csv: format!("method,value,err\n{},{:e},{:e}\n", e.method, e.value, e.err),
            default_name: name.to_string(),
        })
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let start = Instant::now();
    let (body, name, code) = match &cli.command {
        Command::Xcheck(a) => {
            let report = xcheck(a, cli.seed, cli.timing)?;
            let body = match format {
                Format::Json => report.to_json()?,
                Format::Csv => report.to_csv()?,
            };
            let name = format!("xcheck-k{}", a.m.k);
            (body, name, if report.pass { 0 } else { 2 })
        }
        cmd => {
            let mut out = single(cmd, cli.seed)?;
            if cli.timing {
                if let Value::Object(map) = &mut out.json {
                    map.insert("elapsed_s".into(), json!(start.elapsed().as_secs_f64()));
                }
            }
            let body = match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&out.json)?;
                    s.push('\n');
                    s
                }
                Format::Csv => out.csv,
            };
            (body, out.default_name, 0)
        }
    };
    write_output(&body, cli.out.as_ref(), &name, format)?;
    Ok(code)
}

fn write_output(body: &str, out: Option<&PathBuf>, name: &str, format: Format) -> Result<()> {
    let ext = match format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let path = match out {
        Some(p) => Some(p.clone()),
        None => std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("{name}.{ext}"))),
    };
    match path {
        Some(p) => std::fs::write(p, body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn contour_config(mode: ModeArg, tol: Option<f64>, samples: usize, seed: u64) -> ContourConfig {
    ContourConfig {
        mode: match mode {
            ModeArg::Auto => ContourMode::Auto,
            ModeArg::Tensor => ContourMode::Tensor,
            ModeArg::Mc => ContourMode::MonteCarlo,
        },
        tol,
        samples,
        seed: derive_seed(seed, "contour"),
        ..ContourConfig::default()
    }
}

fn partition_config(hermite_order: Option<usize>, samples: usize, seed: u64) -> PartitionConfig {
    PartitionConfig {
        hermite_order,
        samples,
        seed: derive_seed(seed, "partition"),
    }
}

fn single(cmd: &Command, seed: u64) -> Result<Output> {
    match cmd {
        Command::Moment { method } => match method {
            MomentCmd::Contour { m, tol, mode, samples } => {
                let e = moment_contour(&m.request()?, &contour_config(*mode, *tol, *samples, seed))?;
                Output::estimate(&e, "moment-contour")
            }
            MomentCmd::Partition { m, hermite_order, samples } => {
                let e = moment_partition(&m.request()?, &partition_config(*hermite_order, *samples, seed))?;
                Output::estimate(&e, "moment-partition")
            }
            MomentCmd::GaussianMc { m, samples } => {
                let e = moment_gaussian_mc(&m.request()?, *samples, seed)?;
                Output::estimate(&e, "moment-gaussian-mc")
            }
        },
        Command::Airy { cmd } => airy_command(cmd),
        Command::Sample { cmd } => sample_command(cmd, seed),
        Command::Polymer { cmd } => polymer_command(cmd, seed),
        Command::Xcheck(_) => unreachable!("handled by execute"),
    }
}

fn airy_command(cmd: &AiryCmd) -> Result<Output> {
    match cmd {
        AiryCmd::Fredholm { t, u, order } => {
            let cfg = AiryConfig::new(*t)?;
            let f = FredholmConfig {
                order: *order,
                ..FredholmConfig::default()
            };
            let d = fredholm_multiplicative(*u, &cfg, &f)?;
            Ok(Output {
                json: json!({"T": t, "u": u, "value": d.value, "err": d.err, "nodes": d.nodes}),
                csv: format!("T,u,value,err,nodes\n{t:e},{u:e},{:e},{:e},{}\n", d.value, d.err, d.nodes),
                default_name: "airy-fredholm".into(),
            })
        }
        AiryCmd::LaplaceR { c, hermite_order } => {
            let v = laplace_r(c, &LaplaceConfig { hermite_order: *hermite_order })?;
            let cs: Vec<String> = c.iter().map(|x| format!("{x:e}")).collect();
            Ok(Output {
                json: json!({"c": c, "value": v}),
                csv: format!("c,value\n{},{v:e}\n", cs.join(";")),
                default_name: "airy-laplace-r".into(),
            })
        }
        AiryCmd::Kernel { x, y } => {
            let v = airy_kernel(*x, *y)?;
            Ok(Output {
                json: json!({"x": x, "y": y, "value": v}),
                csv: format!("x,y,value\n{x:e},{y:e},{v:e}\n"),
                default_name: "airy-kernel".into(),
            })
        }
    }
}

fn convention(c: ConventionArg) -> SeriesConvention {
    match c {
        ConventionArg::Nominal => SeriesConvention::NOMINAL,
        ConventionArg::Calibrated => SeriesConvention::CALIBRATED,
    }
}

fn sample_command(cmd: &SampleCmd, seed: u64) -> Result<Output> {
    match cmd {
        SampleCmd::Airy { e } => {
            let set = e.sample(seed)?;
            let rows: Vec<&[f64]> = set.replicas().collect();
            let (mean, var) = set.top_point_stats();
            Ok(Output {
                json: json!({
                    "n": e.n, "m": e.m, "replicas": e.replicas, "seed": seed,
                    "retries": set.retries, "top_mean": mean, "top_var": var, "points": rows,
                }),
                csv: set.to_csv(),
                default_name: "sample-airy".into(),
            })
        }
        SampleCmd::Series { k, t, convention: conv, e } => {
            let set = e.sample(seed)?;
            let airy = AiryConfig::new(*t)?;
            let est = series_moment_mc(*k, &set, &airy, convention(*conv))?;
            let target = (f64::from(*k) * t / 24.0).exp() * heat_kernel(*t, 0.0);
            let est = if *k == 1 {
                let cal = calibrate_series(&set, &airy, target)?;
                est.with(
                    "calibration",
                    json!({
                        "target": cal.target,
                        "nominal": {"dof": 1, "scale": 2.0, "mean": cal.nominal.0, "err": cal.nominal.1},
                        "calibrated": {"dof": 2, "scale": 0.5, "mean": cal.calibrated.0, "err": cal.calibrated.1},
                        "nominal_over_target": cal.nominal_ratio,
                        "adopted": {"dof": cal.adopted.dof, "scale": cal.adopted.scale},
                    }),
                )
            } else {
                est
            };
            Output::estimate(&est, "sample-series")
        }
        SampleCmd::Hk { k, t, e } => {
            let set = e.sample(seed)?;
            let airy = AiryConfig::new(*t)?;
            let (mean, se) = hk_mc(*k, &set, &airy)?;
            Ok(Output {
                json: json!({"k": k, "T": t, "mean": mean, "err": se, "she_moment": she_moment_from_hk(*k, *t, mean)}),
                csv: format!("k,T,mean,err\n{k},{t:e},{mean:e},{se:e}\n"),
                default_name: "sample-hk".into(),
            })
        }
    }
}

fn polymer_command(cmd: &PolymerCmd, seed: u64) -> Result<Output> {
    match cmd {
        PolymerCmd::Simulate { n, t, dt, replicas, convention, k, check_step } => {
            let mut cfg = PolymerConfig::new(*n, *t, *replicas, seed)?;
            if let Some(dt) = dt {
                cfg.dt = *dt;
            }
            cfg.convention = match convention {
                PolymerConventionArg::Raw => Convention::Raw,
                PolymerConventionArg::Compensated => Convention::Compensated,
            };
            let s = simulate_polymer(&cfg)?;
            let (mean, se) = s.moment(*k);
            let mut json = json!({
                "N": n, "t": t, "dt": cfg.dt, "replicas": replicas, "convention": cfg.convention,
                "k": k, "mean": mean, "err": se, "seed": seed,
            });
            if *check_step {
                json["step_check"] = serde_json::to_value(step_size_check(&cfg)?)?;
            }
            Ok(Output {
                json,
                csv: format!("N,t,k,mean,err\n{n},{t:e},{k},{mean:e},{se:e}\n"),
                default_name: "polymer-simulate".into(),
            })
        }
        PolymerCmd::Contour { k, n, t } => {
            let v = polymer_moment_contour(*k, *n, *t)?;
            Ok(Output {
                json: json!({"k": k, "N": n, "t": t, "value": v}),
                csv: format!("k,N,t,value\n{k},{n},{t:e},{v:e}\n"),
                default_name: "polymer-contour".into(),
            })
        }
        PolymerCmd::Limit { m, n_list } => {
            let tab = intermediate_disorder_limit(m.k, m.t, m.x, n_list)?;
            Ok(Output {
                json: serde_json::to_value(&tab)?,
                csv: tab.to_csv(),
                default_name: "polymer-limit".into(),
            })
        }
    }
}

fn timed<F>(timing: &mut BTreeMap<String, f64>, method: Method, f: F) -> Result<MomentEstimate>
where
    F: FnOnce() -> Result<MomentEstimate>,
{
    let start = Instant::now();
    let e = f()?;
    timing.insert(method.name().to_string(), start.elapsed().as_secs_f64());
    Ok(e)
}

/// Runs every route that supports (k, T, X) and assembles the report.
pub fn xcheck_report(req: &MomentRequest, seed: u64, tol: Tolerances) -> Result<CrossCheckReport> {
    let args = XcheckArgs {
        m: MomentArgs { k: req.k, t: req.t, x: req.x },
        tol: Some(tol.quadrature),
        sigmas: tol.sigmas,
        samples: 200_000,
        no_mc: false,
        with_sampler: false,
        e: EnsembleArgs { n: 400, m: 24, replicas: 10_000 },
        with_polymer: false,
        n_list: vec![10, 20, 30],
    };
    xcheck(&args, seed, false)
}

fn xcheck(a: &XcheckArgs, seed: u64, timing: bool) -> Result<CrossCheckReport> {
    let req = a.m.request()?;
    let k = req.k;
    let mut tol = Tolerances::for_order(k);
    if let Some(t) = a.tol {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {t}")));
        }
        tol.quadrature = t;
    }
    tol.sigmas = a.sigmas;
    let mut times = BTreeMap::new();
    let mut est = Vec::new();
    let (factor, origin) = reduce_to_origin(&req);
    let kf = f64::from(k);

    if k <= crate::she_moments::MAX_CONTOUR_K {
        let cfg = contour_config(ModeArg::Auto, None, 400_000, seed);
        est.push(timed(&mut times, Method::Contour, || moment_contour(&req, &cfg))?);
    }
    if k <= crate::she_moments::MAX_PARTITION_K {
        let cfg = partition_config(None, 200_000, seed);
        est.push(timed(&mut times, Method::Partition, || moment_partition(&req, &cfg))?);
    }
    if !a.no_mc && k <= crate::she_moments::MAX_GAUSSIAN_MC_K {
        est.push(timed(&mut times, Method::GaussianMc, || {
            moment_gaussian_mc(&req, a.samples, seed)
        })?);
    }
    let airy = AiryConfig::new(origin.t)?;
    if k <= crate::airy::MAX_AIRY_MOMENT_K {
        est.push(timed(&mut times, Method::AiryLaplace, || {
            let (hk, err) = moment_from_airy_with_err(k, &airy)?;
            let s = she_moment_from_hk(k, origin.t, 1.0) * factor;
            Ok(MomentEstimate::new(Method::AiryLaplace, hk * s, err * s))
        })?);
    }
    if k == 1 {
        est.push(timed(&mut times, Method::AiryFredholmSlope, || {
            let f = fredholm_first_moment(1e-3, &airy, &FredholmConfig::default())?;
            let s = (-origin.t / 24.0).exp() * factor;
            Ok(MomentEstimate::new(Method::AiryFredholmSlope, f.value * s, f.err * s)
                .with("u0", 1e-3)
                .with("nodes", f.nodes))
        })?);
    }
    if a.with_sampler && k <= crate::airy_sampler::MAX_SERIES_K {
        est.push(timed(&mut times, Method::SeriesMc, || {
            let set = a.e.sample(derive_seed(seed, "xcheck_sampler"))?;
            let e = series_moment_mc(k, &set, &airy, SeriesConvention::CALIBRATED)?;
            Ok(e.scaled((-kf * origin.t / 24.0).exp() * factor))
        })?);
    }
    if a.with_polymer && k <= 2 {
        est.push(timed(&mut times, Method::PolymerLimit, || {
            let tab = intermediate_disorder_limit(k, req.t, req.x, &a.n_list)?;
            Ok(MomentEstimate::new(Method::PolymerLimit, tab.extrapolated, tab.extrapolation_err)
                .with("n_list", a.n_list.clone()))
        })?);
    }
    let mut report = CrossCheckReport::build(
        RequestEcho { k, t: req.t, x: req.x },
        est,
        tol,
        seed,
    )?;
    if timing {
        report.timing = Some(times);
    }
    Ok(report)
}
