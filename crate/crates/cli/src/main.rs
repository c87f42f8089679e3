//! Command-line driver for the annulus laboratory.
//!
//! Subcommands: points, caps, kernel-norm, energy, examples, expsum, sweep,
//! regions. Outputs are deterministic for a fixed configuration (including
//! the seed), independent of the worker count. Exit codes: 0 success,
//! 2 argument error, 3 capacity error, 4 numerical/integrity failure,
//! 1 I/O failure.

mod config;
mod svg;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use annulus_lab::analysis::{
    self, CurveSide, EnvelopeKind, Quantity, RegimePoint, Region, SweepConfig,
};
use annulus_lab::dyadic;
use annulus_lab::energy::{self, EnergyMethod};
use annulus_lab::kernel::{self, FourierSupport};
use annulus_lab::lattice::{
    enumerate_annulus, enumerate_curve_neighborhood, AnnulusSpec, CurveSpec, LatticeSet,
};
use annulus_lab::serial;
use annulus_lab::{caps, Error};

use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "annulus-lab",
    version,
    about = "Numerical experiments on lattice points in thin annuli: caps, kernels, energies, exponential sums"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Dilation parameter λ (> 2).
    #[arg(long)]
    lambda: Option<f64>,
    /// Annulus half-width δ (exactly one of --delta / --alpha).
    #[arg(long)]
    delta: Option<f64>,
    /// Exponent α with δ = λ^{-α} (exactly one of --delta / --alpha).
    #[arg(long)]
    alpha: Option<f64>,
    /// Lebesgue exponent p.
    #[arg(long)]
    p: Option<f64>,
    /// Cap length scale ℓ (default: canonical (λδ)^{1/2}).
    #[arg(long)]
    scale: Option<f64>,
    /// Quadrature oversampling factor (default 4).
    #[arg(long)]
    oversampling: Option<f64>,
    /// Seed for all randomized sampling (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Also write an SVG plot next to --out.
    #[arg(long)]
    plot: bool,
    /// Flat key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate lattice points of an annulus or curve neighborhood.
    Points {
        #[command(flatten)]
        common: Common,
        /// circle, ellipse, or parabola.
        #[arg(long)]
        curve: Option<String>,
        /// Ellipse semi-axes (with --curve ellipse).
        #[arg(long)]
        ellipse_a: Option<f64>,
        #[arg(long)]
        ellipse_b: Option<f64>,
    },
    /// Cap partition census at a length scale, or the short-cap regime census.
    Caps {
        #[command(flatten)]
        common: Common,
        /// Use the δ⁻¹/100 short-cap regime census.
        #[arg(long)]
        eta: bool,
    },
    /// L^p norm of the all-ones (or Knapp) polynomial on the annulus.
    KernelNorm {
        #[command(flatten)]
        common: Common,
        /// Restrict the support to the cap containing the positive x-axis.
        #[arg(long)]
        knapp: bool,
        /// Also export the full sample grid (binary, complex128).
        #[arg(long)]
        grid_out: Option<PathBuf>,
    },
    /// Exact additive energy of the annulus lattice set.
    Energy {
        #[command(flatten)]
        common: Common,
        /// Energy order m ∈ {2, 3}.
        #[arg(long)]
        m: Option<u8>,
        /// Force a counting path: hash, dense, or transform.
        #[arg(long)]
        method: Option<String>,
    },
    /// Knapp and spherical extremizer ratios against the envelope terms.
    Examples {
        #[command(flatten)]
        common: Common,
    },
    /// Empirical sup of the dyadic exponential sums against their bounds.
    Expsum {
        #[command(flatten)]
        common: Common,
        /// Number of seeded sample points x.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Geometric λ-sweep of a quantity with a log-log slope fit.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// point-count, energy, kernel-lp, knapp-ratio, or spherical-ratio.
        #[arg(long)]
        quantity: Option<String>,
        /// Energy order for --quantity energy.
        #[arg(long)]
        m: Option<u8>,
        #[arg(long)]
        lmin: Option<f64>,
        #[arg(long)]
        lmax: Option<f64>,
        /// Geometric grid ratio (default 2).
        #[arg(long)]
        factor: Option<f64>,
    },
    /// Proved-region status of the conjectured envelopes at a (p, α) point.
    Regions {
        #[command(flatten)]
        common: Common,
        /// operator (alias A) or kernel (alias B).
        #[arg(long)]
        which: Option<String>,
        /// Emit an n×n status grid instead of a single point.
        #[arg(long)]
        grid: Option<usize>,
    },
}

enum CliError {
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("ANNULUS_LAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) => {
            eprintln!("annulus-lab: i/o error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Core(e)) => {
            eprintln!("annulus-lab: {e}");
            match e {
                Error::Argument(_) => ExitCode::from(2),
                Error::Capacity(_) => ExitCode::from(3),
                Error::Numerical(_) | Error::Integrity(_) => ExitCode::from(4),
            }
        }
    }
}

/// Merge config-file values into unset flags.
fn merge_common(common: &mut Common) -> Result<FileConfig, Error> {
    let cfg = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    cfg.fill(&mut common.lambda, "lambda")?;
    cfg.fill(&mut common.delta, "delta")?;
    cfg.fill(&mut common.alpha, "alpha")?;
    cfg.fill(&mut common.p, "p")?;
    cfg.fill(&mut common.scale, "scale")?;
    cfg.fill(&mut common.oversampling, "oversampling")?;
    cfg.fill(&mut common.seed, "seed")?;
    cfg.fill(&mut common.format, "format")?;
    if common.out.is_none() {
        if let Some(v) = cfg.get("out") {
            common.out = Some(PathBuf::from(v));
        }
    }
    common.plot = cfg.flag(common.plot, "plot");
    Ok(cfg)
}

fn resolve_spec(common: &Common) -> Result<AnnulusSpec, Error> {
    let lambda = common
        .lambda
        .ok_or_else(|| Error::argument("--lambda is required"))?;
    match (common.delta, common.alpha) {
        (Some(delta), None) => AnnulusSpec::new(lambda, delta),
        (None, Some(alpha)) => AnnulusSpec::from_alpha(lambda, alpha),
        (Some(_), Some(_)) => {
            Err(Error::argument("provide exactly one of --delta and --alpha, not both"))
        }
        (None, None) => Err(Error::argument("provide exactly one of --delta and --alpha")),
    }
}

fn format_of(common: &Common) -> Result<&str, Error> {
    match common.format.as_deref() {
        None => Ok("csv"),
        Some("csv") => Ok("csv"),
        Some("json") => Ok("json"),
        Some(other) => Err(Error::argument(format!("unknown format '{other}'"))),
    }
}

/// Write bytes to --out or stdout.
fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes),
        None => std::io::stdout().write_all(bytes),
    }
}

fn plot_path(out: &Option<PathBuf>) -> Result<PathBuf, Error> {
    match out {
        Some(p) => Ok(p.with_extension("svg")),
        None => Err(Error::argument("--plot requires --out to name the SVG file")),
    }
}

fn write_plot(path: &Path, spec: &svg::PlotSpec) -> Result<(), CliError> {
    let text = svg::emit_svg(spec)?;
    std::fs::write(path, text)?;
    Ok(())
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serialization of plain data");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Points { mut common, curve, ellipse_a, ellipse_b } => {
            let cfg = merge_common(&mut common)?;
            let mut curve = curve;
            if curve.is_none() {
                curve = cfg.get("curve").map(str::to_string);
            }
            let set = points_set(&common, curve.as_deref(), ellipse_a, ellipse_b)?;
            let fmt = format_of(&common)?;
            let mut buf = Vec::new();
            match fmt {
                "csv" => serial::write_lattice_csv(&set, &mut buf)?,
                _ => serial::write_lattice_json(&set, &mut buf)?,
            }
            emit(&common.out, &buf)?;
            if common.plot {
                let path = plot_path(&common.out)?;
                let pts: Vec<(f64, f64)> =
                    set.points().iter().map(|p| (p.x as f64, p.y as f64)).collect();
                let spec = svg::PlotSpec {
                    title: format!("{} lattice points", set.len()),
                    x_label: "x".into(),
                    y_label: "y".into(),
                    loglog: false,
                    series: vec![svg::Series { label: "points".into(), points: pts, scatter: true }],
                    ref_lines: vec![],
                };
                write_plot(&path, &spec)?;
            }
            Ok(())
        }
        Command::Caps { mut common, eta } => {
            let cfg = merge_common(&mut common)?;
            let eta = cfg.flag(eta, "eta");
            let spec = resolve_spec(&common)?;
            let set = enumerate_annulus(&spec)?;
            let fmt = format_of(&common)?;
            let mut buf = Vec::new();
            if eta {
                let census = caps::eta_regime_census(&set)?;
                match fmt {
                    "csv" => serial::write_eta_csv(&census, &mut buf)?,
                    _ => buf.extend_from_slice(json_line(&census).as_bytes()),
                }
            } else {
                let scale = common.scale.unwrap_or((spec.lambda * spec.delta).sqrt());
                let part = caps::partition(&set, scale)?;
                let census = caps::census(&part);
                match fmt {
                    "csv" => serial::write_census_csv(&census, &mut buf)?,
                    _ => buf.extend_from_slice(json_line(&census).as_bytes()),
                }
            }
            emit(&common.out, &buf)?;
            Ok(())
        }
        Command::KernelNorm { mut common, knapp, grid_out } => {
            merge_common(&mut common)?;
            let spec = resolve_spec(&common)?;
            let p = common.p.unwrap_or(4.0);
            let oversampling = common.oversampling.unwrap_or(kernel::DEFAULT_OVERSAMPLING);
            let support = if knapp {
                kernel::knapp_support(&spec)?
            } else {
                FourierSupport::all_ones(&enumerate_annulus(&spec)?)
            };
            if support.is_empty() {
                return Err(Error::argument("the requested support is empty").into());
            }
            let requested = kernel::lp_norms_streaming(&support, &[p], oversampling)?[0];
            let parseval = kernel::parseval_norm(&support);
            #[derive(serde::Serialize)]
            struct NormOutput {
                lambda: f64,
                delta: f64,
                knapp: bool,
                support_size: usize,
                requested: kernel::NormReport,
                parseval: kernel::NormReport,
            }
            let out = NormOutput {
                lambda: spec.lambda,
                delta: spec.delta,
                knapp,
                support_size: support.len(),
                requested,
                parseval,
            };
            emit(&common.out, json_line(&out).as_bytes())?;
            if let Some(path) = grid_out {
                let grid = kernel::synthesize(&support, oversampling)?;
                let file = std::fs::File::create(path)?;
                kernel::write_grid(&grid, 2, std::io::BufWriter::new(file))?;
            }
            Ok(())
        }
        Command::Energy { mut common, m, method } => {
            let cfg = merge_common(&mut common)?;
            let mut m = m;
            cfg.fill(&mut m, "m")?;
            let m = m.unwrap_or(2);
            let method = match method.as_deref().or(cfg.get("method")) {
                None | Some("auto") => None,
                Some("hash") => Some(EnergyMethod::Hash),
                Some("dense") => Some(EnergyMethod::DenseConvolution),
                Some("transform") => Some(EnergyMethod::TransformConvolution),
                Some(other) => {
                    return Err(Error::argument(format!("unknown energy method '{other}'")).into())
                }
            };
            let spec = resolve_spec(&common)?;
            let set = enumerate_annulus(&spec)?;
            let report = energy::additive_energy_with_method(&set, m, method)?;
            emit(&common.out, json_line(&report).as_bytes())?;
            Ok(())
        }
        Command::Examples { mut common } => {
            merge_common(&mut common)?;
            let spec = resolve_spec(&common)?;
            let p = common.p.unwrap_or(6.0);
            let oversampling = common.oversampling.unwrap_or(kernel::DEFAULT_OVERSAMPLING);
            let set = enumerate_annulus(&spec)?;
            if set.is_empty() {
                return Err(Error::argument("empty annulus").into());
            }
            let spherical = FourierSupport::all_ones(&set);
            let knapp = kernel::knapp_support(&spec)?;
            let knapp_ratio = if knapp.is_empty() {
                None
            } else {
                Some(kernel::ratio_2_to_p(&knapp, p, oversampling)?)
            };
            let spherical_ratio = kernel::ratio_2_to_p(&spherical, p, oversampling)?;
            let (spherical_term, knapp_term) =
                analysis::envelope_terms(EnvelopeKind::Operator, p, spec.lambda, spec.delta)?;
            #[derive(serde::Serialize)]
            struct ExamplesOutput {
                lambda: f64,
                delta: f64,
                p: f64,
                spherical_points: usize,
                spherical_ratio: f64,
                knapp_points: usize,
                knapp_ratio: Option<f64>,
                envelope_spherical_term: f64,
                envelope_knapp_term: f64,
                red_curve_alpha: f64,
            }
            let out = ExamplesOutput {
                lambda: spec.lambda,
                delta: spec.delta,
                p,
                spherical_points: set.len(),
                spherical_ratio,
                knapp_points: knapp.len(),
                knapp_ratio,
                envelope_spherical_term: spherical_term,
                envelope_knapp_term: knapp_term,
                red_curve_alpha: analysis::regime_boundary(EnvelopeKind::Operator, p)?,
            };
            emit(&common.out, json_line(&out).as_bytes())?;
            Ok(())
        }
        Command::Expsum { mut common, samples } => {
            let cfg = merge_common(&mut common)?;
            let mut samples = samples;
            cfg.fill(&mut samples, "samples")?;
            let spec = resolve_spec(&common)?;
            let n = samples.unwrap_or(64);
            let seed = common.seed.unwrap_or(0);
            let report = dyadic::dyadic_bound_report(spec.lambda, spec.delta, n, seed)?;
            let mut buf = Vec::new();
            serial::write_bound_csv(&report, &mut buf)?;
            emit(&common.out, &buf)?;
            if let Some(fit) = &report.fitted_m_exponent {
                eprintln!("{}", json_line(fit).trim_end());
            }
            if common.plot {
                let path = plot_path(&common.out)?;
                let series = |label: &str, f: &dyn Fn(&dyadic::BoundRow) -> f64| svg::Series {
                    label: label.into(),
                    points: report
                        .rows
                        .iter()
                        .filter(|r| f(r) > 0.0)
                        .map(|r| (r.m_level as f64, f(r)))
                        .collect(),
                    scatter: false,
                };
                let spec_plot = svg::PlotSpec {
                    title: format!(
                        "exp-sum sup over {} samples, lambda={}, delta={}",
                        n, spec.lambda, spec.delta
                    ),
                    x_label: "M".into(),
                    y_label: "|S|".into(),
                    loglog: true,
                    series: vec![
                        series("empirical sup", &|r| r.emp_sup),
                        series("triangle envelope", &|r| r.envelope),
                        series("M^{3/2} bound", &|r| r.trivial_bound),
                        series("M^{29/22} bound", &|r| r.muller_bound),
                    ],
                    ref_lines: vec![],
                };
                write_plot(&path, &spec_plot)?;
            }
            Ok(())
        }
        Command::Sweep { mut common, quantity, m, lmin, lmax, factor } => {
            let cfg = merge_common(&mut common)?;
            let mut quantity = quantity;
            if quantity.is_none() {
                quantity = cfg.get("quantity").map(str::to_string);
            }
            let mut m = m;
            cfg.fill(&mut m, "m")?;
            let mut lmin = lmin;
            cfg.fill(&mut lmin, "lmin")?;
            let mut lmax = lmax;
            cfg.fill(&mut lmax, "lmax")?;
            let mut factor = factor;
            cfg.fill(&mut factor, "factor")?;

            let quantity = Quantity::parse(
                quantity.as_deref().ok_or_else(|| Error::argument("--quantity is required"))?,
            )?;
            let alpha = common
                .alpha
                .ok_or_else(|| Error::argument("--alpha is required for sweeps"))?;
            let lmin = lmin.ok_or_else(|| Error::argument("--lmin is required"))?;
            let lmax = lmax.ok_or_else(|| Error::argument("--lmax is required"))?;
            let mut config = SweepConfig::new(quantity, alpha, lmin, lmax);
            config.factor = factor.unwrap_or(2.0);
            config.p = common.p;
            config.m = m;
            config.oversampling =
                common.oversampling.unwrap_or(kernel::DEFAULT_OVERSAMPLING);
            config.seed = common.seed.unwrap_or(0);
            let rows = analysis::run_sweep(&config)?;
            let fmt = format_of(&common)?;
            let mut buf = Vec::new();
            match fmt {
                "csv" => serial::write_sweep_csv(&rows, &mut buf)?,
                _ => buf.extend_from_slice(json_line(&rows).as_bytes()),
            }
            emit(&common.out, &buf)?;
            match analysis::fit_sweep(&rows) {
                Ok(fit) => {
                    let line = json_line(&fit);
                    if common.out.is_some() {
                        print!("{line}");
                    } else {
                        eprint!("{line}");
                    }
                }
                Err(e) => eprintln!("annulus-lab: no slope fit: {e}"),
            }
            if common.plot {
                let path = plot_path(&common.out)?;
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter_map(|r| r.value.map(|v| (r.lambda, v)))
                    .filter(|&(_, v)| v > 0.0)
                    .collect();
                let mut ref_lines = vec![];
                if let Ok(fit) = analysis::fit_sweep(&rows) {
                    ref_lines.push(svg::RefLine {
                        slope: fit.slope,
                        intercept: fit.intercept,
                        label: format!("fit slope {:.3}", fit.slope),
                    });
                }
                let spec_plot = svg::PlotSpec {
                    title: format!("{} sweep, alpha={}", quantity.id(), alpha),
                    x_label: "lambda".into(),
                    y_label: quantity.id().into(),
                    loglog: true,
                    series: vec![svg::Series {
                        label: quantity.id().into(),
                        points: pts,
                        scatter: false,
                    }],
                    ref_lines,
                };
                write_plot(&path, &spec_plot)?;
            }
            Ok(())
        }
        Command::Regions { mut common, which, grid } => {
            let cfg = merge_common(&mut common)?;
            let mut which = which;
            if which.is_none() {
                which = cfg.get("which").map(str::to_string);
            }
            let kind = match which.as_deref() {
                Some("operator") | Some("A") | Some("a") => EnvelopeKind::Operator,
                Some("kernel") | Some("B") | Some("b") => EnvelopeKind::Kernel,
                Some(other) => {
                    return Err(Error::argument(format!(
                        "--which must be operator (A) or kernel (B), got '{other}'"
                    ))
                    .into())
                }
                None => return Err(Error::argument("--which is required").into()),
            };
            if let Some(n) = grid {
                let n = n.max(2);
                let mut rows = Vec::new();
                for i in 0..n {
                    // 1/p from 0 (p=∞) to 1/2 (p=2), matching the chart axes.
                    let inv_p = 0.5 * (i as f64 + 0.5) / n as f64;
                    let p = 1.0 / inv_p;
                    for j in 0..n {
                        let alpha = (j as f64 + 0.5) / n as f64;
                        let point = RegimePoint::new(p, alpha)?;
                        let st = analysis::status(kind, &point);
                        rows.push((p, alpha, st));
                    }
                }
                #[derive(serde::Serialize)]
                struct GridRow {
                    p: f64,
                    alpha: f64,
                    status: analysis::Status,
                    source: String,
                }
                let grid_rows: Vec<GridRow> = rows
                    .iter()
                    .map(|(p, alpha, st)| GridRow {
                        p: *p,
                        alpha: *alpha,
                        status: st.status,
                        source: st.source.clone(),
                    })
                    .collect();
                emit(&common.out, json_line(&grid_rows).as_bytes())?;
                if common.plot {
                    let path = plot_path(&common.out)?;
                    let mut proved = vec![];
                    let mut eps = vec![];
                    let mut open = vec![];
                    for (p, alpha, st) in &rows {
                        let pt = (1.0 / p, *alpha);
                        match st.status {
                            analysis::Status::Proved => proved.push(pt),
                            analysis::Status::ProvedWithEps => eps.push(pt),
                            analysis::Status::Open => open.push(pt),
                        }
                    }
                    let red: Vec<(f64, f64)> = (0..=100)
                        .map(|i| {
                            let inv_p = 0.5 * i as f64 / 100.0;
                            let p = if inv_p == 0.0 { f64::INFINITY } else { 1.0 / inv_p };
                            (inv_p, analysis::regime_boundary(kind, p).unwrap())
                        })
                        .filter(|&(_, a)| (0.0..=1.0).contains(&a))
                        .collect();
                    let spec_plot = svg::PlotSpec {
                        title: format!("{kind:?} envelope status"),
                        x_label: "1/p".into(),
                        y_label: "alpha".into(),
                        loglog: false,
                        series: vec![
                            svg::Series { label: "proved".into(), points: proved, scatter: true },
                            svg::Series {
                                label: "proved-with-eps".into(),
                                points: eps,
                                scatter: true,
                            },
                            svg::Series { label: "open".into(), points: open, scatter: true },
                            svg::Series { label: "red curve".into(), points: red, scatter: false },
                        ],
                        ref_lines: vec![],
                    };
                    write_plot(&path, &spec_plot)?;
                }
                return Ok(());
            }
            let p = common.p.ok_or_else(|| Error::argument("--p is required"))?;
            let alpha = common
                .alpha
                .ok_or_else(|| Error::argument("--alpha is required"))?;
            let point = RegimePoint::new(p, alpha)?;
            let st = analysis::status(kind, &point);
            let boundary = analysis::regime_boundary(kind, p)?;
            let side = if alpha < boundary {
                Some(CurveSide::Below)
            } else if alpha > boundary {
                Some(CurveSide::Above)
            } else {
                None
            };
            let propagated: Vec<Region> = match (st.status, side) {
                (analysis::Status::Open, _) | (_, None) => vec![],
                (_, Some(s)) => analysis::propagate(&[(kind, point, s)])?,
            };
            #[derive(serde::Serialize)]
            struct StatusOutput {
                which: EnvelopeKind,
                p: f64,
                alpha: f64,
                status: analysis::Status,
                source: String,
                red_curve_alpha: f64,
                propagated: Vec<Region>,
            }
            let out = StatusOutput {
                which: kind,
                p,
                alpha,
                status: st.status,
                source: st.source,
                red_curve_alpha: boundary,
                propagated,
            };
            emit(&common.out, json_line(&out).as_bytes())?;
            Ok(())
        }
    }
}

fn points_set(
    common: &Common,
    curve: Option<&str>,
    ellipse_a: Option<f64>,
    ellipse_b: Option<f64>,
) -> Result<LatticeSet, Error> {
    let spec_kind = curve.unwrap_or("circle");
    match spec_kind {
        "circle" => enumerate_annulus(&resolve_spec(common)?),
        "parabola" => {
            let spec = resolve_spec(common)?;
            enumerate_curve_neighborhood(&CurveSpec::parabola(), spec.lambda, spec.delta)
        }
        "ellipse" => {
            let a = ellipse_a.ok_or_else(|| Error::argument("--ellipse-a is required"))?;
            let b = ellipse_b.ok_or_else(|| Error::argument("--ellipse-b is required"))?;
            let spec = resolve_spec(common)?;
            enumerate_curve_neighborhood(&CurveSpec::ellipse(a, b)?, spec.lambda, spec.delta)
        }
        other => Err(Error::argument(format!("unknown curve '{other}'"))),
    }
}
