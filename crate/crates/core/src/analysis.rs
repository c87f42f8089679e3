//! Conjectured exponent envelopes, proved-region classification with its
//! propagation rules, and deterministic log-log parameter sweeps.
//!
//! Points live in the `(p, α)` plane with `α = -log δ / log λ`. The red curve
//! of an envelope is where its two terms balance: `α = 1 - 8/(p+2)` for the
//! operator envelope and `α = 1 - 4/p` for the kernel envelope.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy;
use crate::fit::{fit_loglog, FitResult};
use crate::kernel::{self, FourierSupport};
use crate::lattice::{count_annulus, enumerate_annulus, AnnulusSpec};
use crate::{Error, Result};

/// Which conjectured envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeKind {
    /// `L² → L^p` operator-norm envelope: λ^{1/2-2/p} δ^{1/2} + (λδ)^{1/4-1/(2p)}.
    #[serde(rename = "operator")]
    Operator,
    /// Kernel `L^p`-norm envelope: λ^{1-2/p} δ + (λδ)^{1/2}.
    #[serde(rename = "kernel")]
    Kernel,
}

/// A point of the (p, α) regime plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimePoint {
    pub p: f64,
    pub alpha: f64,
}

impl RegimePoint {
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(Error::argument(format!("p must be at least 2, got {p}")));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::argument(format!("alpha must be finite and ≥ 0, got {alpha}")));
        }
        Ok(RegimePoint { p, alpha })
    }
}

/// Proof status of an envelope at a regime point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "proved")]
    Proved,
    #[serde(rename = "proved-with-eps")]
    ProvedWithEps,
    #[serde(rename = "open")]
    Open,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionStatus {
    pub status: Status,
    /// Which encoded statement decided it.
    pub source: String,
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Both envelope terms; the first is the spherical/Bernstein term, the second
/// the diagonal/Knapp term.
pub fn envelope_terms(which: EnvelopeKind, p: f64, lambda: f64, delta: f64) -> Result<(f64, f64)> {
    if !(p >= 2.0) {
        return Err(Error::argument(format!("p must be at least 2, got {p}")));
    }
    if !(lambda > 2.0) {
        return Err(Error::argument("lambda must exceed 2"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::argument("delta must lie in (0, 1)"));
    }
    let ip = inv(p);
    Ok(match which {
        EnvelopeKind::Operator => (
            lambda.powf(0.5 - 2.0 * ip) * delta.sqrt(),
            (lambda * delta).powf(0.25 - 0.5 * ip),
        ),
        EnvelopeKind::Kernel => {
            (lambda.powf(1.0 - 2.0 * ip) * delta, (lambda * delta).sqrt())
        }
    })
}

/// The conjectured envelope value (sum of the two terms).
pub fn envelope(which: EnvelopeKind, p: f64, lambda: f64, delta: f64) -> Result<f64> {
    let (a, b) = envelope_terms(which, p, lambda, delta)?;
    Ok(a + b)
}

/// α of the red curve at exponent p: the two envelope terms balance exactly
/// on `δ = λ^{-boundary}`.
pub fn regime_boundary(which: EnvelopeKind, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::argument(format!("p must be at least 2, got {p}")));
    }
    Ok(match which {
        EnvelopeKind::Operator => {
            if p.is_infinite() {
                1.0
            } else {
                1.0 - 8.0 / (p + 2.0)
            }
        }
        EnvelopeKind::Kernel => {
            if p.is_infinite() {
                1.0
            } else {
                1.0 - 4.0 / p
            }
        }
    })
}

/// Operator envelope, fully proved range: p < 6 outright, and for p ≥ 6 the
/// union of the interpolation range α < (1-6/p)/(3-2/p) and the
/// exponential-sum range α < (10-64/p)/(29-14/p) (the latter carries an ε in
/// its source, hence the strict inequality). `δ > min(λ^{-x}, λ^{-y})` is
/// `α < max(x, y)`.
fn operator_proved_alpha(p: f64) -> f64 {
    let ip = inv(p);
    let x = (1.0 - 6.0 * ip) / (3.0 - 2.0 * ip);
    let y = (10.0 - 64.0 * ip) / (29.0 - 14.0 * ip);
    x.max(y)
}

/// Encoded proved-range statements for a regime point. ε-loss margins are treated
/// as open boundaries (strict inequalities).
pub fn status(which: EnvelopeKind, point: &RegimePoint) -> RegionStatus {
    let (p, alpha) = (point.p, point.alpha);
    match which {
        EnvelopeKind::Operator => {
            if p < 6.0 {
                return RegionStatus { status: Status::Proved, source: "operator-(i)".into() };
            }
            if alpha < operator_proved_alpha(p) {
                return RegionStatus { status: Status::Proved, source: "operator-(i)".into() };
            }
            if p <= 10.0 || alpha < 1.0 / 3.0 || p.is_infinite() {
                return RegionStatus {
                    status: Status::ProvedWithEps,
                    source: "operator-(ii)".into(),
                };
            }
            RegionStatus { status: Status::Open, source: "none".into() }
        }
        EnvelopeKind::Kernel => {
            if p <= 6.0 || alpha < 1.0 / 3.0 {
                return RegionStatus {
                    status: Status::ProvedWithEps,
                    source: "kernel-critical".into(),
                };
            }
            RegionStatus { status: Status::Open, source: "none".into() }
        }
    }
}

/// Side of the red curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveSide {
    #[serde(rename = "below")]
    Below,
    #[serde(rename = "above")]
    Above,
}

/// A primitive propagated region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Region {
    /// All (p', α') with p' ≥ p and α' ≤ alpha.
    Rectangle { p: f64, alpha: f64 },
    /// The segment 2 < p' ≤ p at fixed α.
    Segment { p: f64, alpha: f64 },
}

impl Region {
    pub fn contains(&self, p: f64, alpha: f64) -> bool {
        match *self {
            Region::Rectangle { p: p0, alpha: a0 } => p >= p0 && alpha <= a0,
            Region::Segment { p: p0, alpha: a0 } => p > 2.0 && p <= p0 && alpha == a0,
        }
    }
}

/// Propagate verified points: below-curve points fill the rectangle with the
/// point as its top-right vertex (in (1/p, α) coordinates); above-curve
/// points extend along the segment toward p = 2 at fixed α.
pub fn propagate(verified: &[(EnvelopeKind, RegimePoint, CurveSide)]) -> Result<Vec<Region>> {
    let mut out = Vec::new();
    for (which, point, side) in verified {
        let boundary = regime_boundary(*which, point.p)?;
        let actual = if point.alpha < boundary {
            CurveSide::Below
        } else if point.alpha > boundary {
            CurveSide::Above
        } else {
            return Err(Error::argument(format!(
                "point (p={}, α={}) lies exactly on the red curve",
                point.p, point.alpha
            )));
        };
        if actual != *side {
            return Err(Error::argument(format!(
                "declared side {side:?} does not match the red curve at (p={}, α={})",
                point.p, point.alpha
            )));
        }
        out.push(match side {
            CurveSide::Below => Region::Rectangle { p: point.p, alpha: point.alpha },
            CurveSide::Above => Region::Segment { p: point.p, alpha: point.alpha },
        });
    }
    Ok(out)
}

/// Regime flags for a concrete (λ, δ) pair; the conjectures address
/// λ^{-1} < δ < 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegimeFlags {
    pub alpha: f64,
    pub in_conjecture_range: bool,
}

pub fn regime_flags(lambda: f64, delta: f64) -> RegimeFlags {
    let alpha = -delta.ln() / lambda.ln();
    RegimeFlags { alpha, in_conjecture_range: delta > 1.0 / lambda && delta < 1.0 }
}

/// Sweep quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "point-count")]
    PointCount,
    #[serde(rename = "energy")]
    Energy,
    #[serde(rename = "kernel-lp")]
    KernelLp,
    #[serde(rename = "knapp-ratio")]
    KnappRatio,
    #[serde(rename = "spherical-ratio")]
    SphericalRatio,
}

impl Quantity {
    pub fn id(&self) -> &'static str {
        match self {
            Quantity::PointCount => "point-count",
            Quantity::Energy => "energy",
            Quantity::KernelLp => "kernel-lp",
            Quantity::KnappRatio => "knapp-ratio",
            Quantity::SphericalRatio => "spherical-ratio",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "point-count" => Quantity::PointCount,
            "energy" => Quantity::Energy,
            "kernel-lp" => Quantity::KernelLp,
            "knapp-ratio" => Quantity::KnappRatio,
            "spherical-ratio" => Quantity::SphericalRatio,
            other => {
                return Err(Error::argument(format!("unknown sweep quantity '{other}'")))
            }
        })
    }
}

/// Sweep configuration: a geometric λ-grid with δ = λ^{-α} per row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub quantity: Quantity,
    pub alpha: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Geometric grid ratio (default 2).
    pub factor: f64,
    /// Lebesgue exponent for kernel-lp and the ratio quantities.
    pub p: Option<f64>,
    /// Energy order for the energy quantity.
    pub m: Option<u8>,
    pub oversampling: f64,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(quantity: Quantity, alpha: f64, lambda_min: f64, lambda_max: f64) -> Self {
        SweepConfig {
            quantity,
            alpha,
            lambda_min,
            lambda_max,
            factor: 2.0,
            p: None,
            m: None,
            oversampling: kernel::DEFAULT_OVERSAMPLING,
            seed: 0,
        }
    }

    pub fn lambdas(&self) -> Result<Vec<f64>> {
        if !(self.lambda_min > 2.0) || self.lambda_max < self.lambda_min {
            return Err(Error::argument("need 2 < lambda_min ≤ lambda_max"));
        }
        if !(self.factor > 1.0) {
            return Err(Error::argument("grid factor must exceed 1"));
        }
        let mut out = Vec::new();
        let mut l = self.lambda_min;
        while l <= self.lambda_max * (1.0 + 1e-12) {
            out.push(l);
            l *= self.factor;
        }
        Ok(out)
    }
}

/// One sweep row. Capacity errors annotate the row instead of aborting the
/// sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub delta: f64,
    pub p: Option<f64>,
    pub quantity: String,
    pub value: Option<f64>,
    pub method: String,
    pub error: Option<String>,
    pub in_conjecture_range: bool,
}

/// Exact-energy work estimate for the dense path: P · (4R+2)².
fn dense_energy_work(set_len: usize, radius: i64) -> u128 {
    set_len as u128 * (4 * radius as u128 + 2).pow(2)
}

fn sweep_value(config: &SweepConfig, lambda: f64) -> SweepRow {
    let delta = lambda.powf(-config.alpha);
    let flags = regime_flags(lambda, delta);
    let base = SweepRow {
        lambda,
        delta,
        p: config.p,
        quantity: config.quantity.id().to_string(),
        value: None,
        method: String::new(),
        error: None,
        in_conjecture_range: flags.in_conjecture_range,
    };
    let annotated = |mut row: SweepRow, e: Error| {
        row.error = Some(e.to_string());
        row
    };
    let spec = match AnnulusSpec::new(lambda, delta) {
        Ok(s) => s,
        Err(e) => return annotated(base, e),
    };
    match config.quantity {
        Quantity::PointCount => match count_annulus(&spec) {
            Ok(c) => SweepRow {
                value: Some(c as f64),
                method: "exact-count".into(),
                ..base
            },
            Err(e) => annotated(base, e),
        },
        Quantity::Energy => {
            let m = config.m.unwrap_or(3);
            let set = match enumerate_annulus(&spec) {
                Ok(s) => s,
                Err(e) => return annotated(base, e),
            };
            let radius = set.max_coord().max(1);
            let exact_feasible = m == 2 || dense_energy_work(set.len(), radius) <= 2_000_000_000;
            if exact_feasible {
                match energy::additive_energy(&set, m) {
                    Ok(rep) => SweepRow {
                        value: Some(rep.energy as f64),
                        method: rep.method.to_string(),
                        p: Some(2.0 * m as f64),
                        ..base
                    },
                    Err(e) => annotated(base, e),
                }
            } else {
                // Large instances: the even-p identity E_m = ‖Φ‖_{2m}^{2m},
                // integrated exactly by the streaming quadrature.
                let p = 2.0 * m as f64;
                let support = FourierSupport::all_ones(&set);
                match kernel::lp_norms_streaming(&support, &[p], config.oversampling) {
                    Ok(reports) => SweepRow {
                        value: Some(reports[0].value.powf(p)),
                        method: "grid-quadrature".into(),
                        p: Some(p),
                        ..base
                    },
                    Err(e) => annotated(base, e),
                }
            }
        }
        Quantity::KernelLp => {
            let p = config.p.unwrap_or(4.0);
            let set = match enumerate_annulus(&spec) {
                Ok(s) => s,
                Err(e) => return annotated(base, e),
            };
            if set.is_empty() {
                return annotated(base, Error::argument("empty annulus"));
            }
            let support = FourierSupport::all_ones(&set);
            match kernel::lp_norms_streaming(&support, &[p], config.oversampling) {
                Ok(reports) => SweepRow {
                    value: Some(reports[0].value),
                    method: "grid-quadrature".into(),
                    ..base
                },
                Err(e) => annotated(base, e),
            }
        }
        Quantity::KnappRatio => {
            let p = config.p.unwrap_or(6.0);
            let support = match kernel::knapp_support(&spec) {
                Ok(s) => s,
                Err(e) => return annotated(base, e),
            };
            if support.is_empty() {
                return annotated(base, Error::argument("empty cap at angle 0"));
            }
            match kernel::ratio_2_to_p(&support, p, config.oversampling) {
                Ok(v) => SweepRow {
                    value: Some(v),
                    method: "grid-quadrature".into(),
                    ..base
                },
                Err(e) => annotated(base, e),
            }
        }
        Quantity::SphericalRatio => {
            let p = config.p.unwrap_or(6.0);
            let set = match enumerate_annulus(&spec) {
                Ok(s) => s,
                Err(e) => return annotated(base, e),
            };
            if set.is_empty() {
                return annotated(base, Error::argument("empty annulus"));
            }
            let support = FourierSupport::all_ones(&set);
            match kernel::ratio_2_to_p(&support, p, config.oversampling) {
                Ok(v) => SweepRow {
                    value: Some(v),
                    method: "grid-quadrature".into(),
                    ..base
                },
                Err(e) => annotated(base, e),
            }
        }
    }
}

/// Run a sweep: rows are computed in parallel but emitted in λ order, and the
/// output is a pure function of the config.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let lambdas = config.lambdas()?;
    Ok(lambdas.par_iter().map(|&l| sweep_value(config, l)).collect())
}

/// Fit the log-log slope of the sweep's successful rows against λ.
pub fn fit_sweep(rows: &[SweepRow]) -> Result<FitResult> {
    let pairs: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.value.map(|v| (r.lambda, v)))
        .filter(|&(_, v)| v > 0.0)
        .collect();
    fit_loglog(&pairs)
}
