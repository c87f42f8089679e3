//! Mollified annulus symbol, Poisson-summation kernel split, and the dyadic
//! exponential sums.
//!
//! The mollifier is `χ_{λ,δ} = δ⁻¹ χ(δ⁻¹·) * dσ_λ` with a fixed positive χ
//! whose transform is compactly supported in `[-1,1]²`: per coordinate
//! `χ₁(x) = sinc⁸(x/4) / (4 B₈(0))`, whose transform is the degree-7 B-spline
//! profile `B₈(4ξ)/B₈(0)`. The x⁻⁸ spatial decay makes the truncated
//! frequency-side sum of the Poisson identity converge to well below 1e-6.
//!
//! Fourier convention: `f̂(ξ) = ∫ f(x) e^{-2πi x·ξ} dx`; all phases carry the
//! 2π factor (so the circle transform is `J(r) = 2π J₀(2πr)`).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::fit::{fit_loglog, FitResult};
use crate::lattice::IntPoint;
use crate::{Error, Result};

/// Van der Corput iteration depth of the pointwise exponential-sum bound.
pub const MULLER_Q: u32 = 3;
/// 2^q.
pub const MULLER_BIG_Q: u32 = 1 << MULLER_Q;
/// ω = 2 / (4(Q-1) + 2Q) = 1/22 at q = 3.
pub const MULLER_OMEGA: f64 =
    2.0 / (4.0 * (MULLER_BIG_Q as f64 - 1.0) + 2.0 * MULLER_BIG_Q as f64);

/// `λ^{1/2+ω} δ M^{3/2-(q+1)ω}`, valid for `λ > M^{q-2+2/Q}`.
pub fn muller_bound(lambda: f64, delta: f64, m: f64) -> f64 {
    lambda.powf(0.5 + MULLER_OMEGA) * delta * m.powf(1.5 - (MULLER_Q as f64 + 1.0) * MULLER_OMEGA)
}

/// The validity threshold `λ > M^{q-2+2/Q}` (= M^{5/4} at q = 3).
pub fn muller_applicable(lambda: f64, m: f64) -> bool {
    lambda > m.powf(MULLER_Q as f64 - 2.0 + 2.0 / MULLER_BIG_Q as f64)
}

/// Transform of the unit-circle arc-length measure: `J(r) = 2π J₀(2πr)`.
pub fn bessel_j(r: f64) -> f64 {
    std::f64::consts::TAU * crate::bessel::j0(std::f64::consts::TAU * r)
}

// ---------------------------------------------------------------------------
// The fixed coordinate factor χ₁ and its compactly supported transform.
// ---------------------------------------------------------------------------

/// Horner coefficients of the degree-7 pieces of the cardinal B-spline B₈ on
/// [j-4, j-3), j = 0..8, computed exactly in integers once.
fn bspline8_pieces() -> &'static [[f64; 8]; 8] {
    static PIECES: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    PIECES.get_or_init(|| {
        let binom8: [i128; 9] = [1, 8, 28, 56, 70, 56, 28, 8, 1];
        let binom7: [i128; 8] = [1, 7, 21, 35, 35, 21, 7, 1];
        let mut pieces = [[0.0f64; 8]; 8];
        for (j, piece) in pieces.iter_mut().enumerate() {
            for i in 0..8usize {
                let mut acc: i128 = 0;
                for (k, b8) in binom8.iter().enumerate().take(j + 1) {
                    let t = (j - k) as i128;
                    let sign = if k % 2 == 0 { 1 } else { -1 };
                    acc += sign * b8 * binom7[i] * t.pow((7 - i) as u32);
                }
                piece[i] = acc as f64 / 5040.0;
            }
        }
        pieces
    })
}

/// Cardinal B-spline B₈ (8-fold convolution of the unit indicator),
/// supported on [-4, 4], evaluated from exact per-piece polynomials.
pub fn bspline8(u: f64) -> f64 {
    let u = u.abs();
    if u >= 4.0 {
        return 0.0;
    }
    let t = u + 4.0;
    let j = (t.floor() as usize).min(7);
    let v = t - j as f64;
    let c = &bspline8_pieces()[j];
    let mut acc = 0.0f64;
    for i in (0..8).rev() {
        acc = acc * v + c[i];
    }
    acc
}

fn bspline8_center() -> f64 {
    // 2416/5040 = 151/315.
    151.0 / 315.0
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        let z = std::f64::consts::PI * t;
        1.0 - z * z / 6.0
    } else {
        let z = std::f64::consts::PI * t;
        z.sin() / z
    }
}

/// Coordinate factor of the mollifier seed: positive, unit mass, transform
/// supported in [-1, 1].
pub fn chi1(x: f64) -> f64 {
    sinc(x / 4.0).powi(8) / (4.0 * bspline8_center())
}

/// Transform of [`chi1`]: the normalized B-spline profile on [-1, 1].
pub fn chi1_hat(t: f64) -> f64 {
    bspline8(4.0 * t) / bspline8_center()
}

/// The 2-D seed `χ(x) = χ₁(x₁) χ₁(x₂)`.
pub fn chi2(x: [f64; 2]) -> f64 {
    chi1(x[0]) * chi1(x[1])
}

/// `χ̂_{λ,δ}(ξ) = λδ · J(λ|ξ|) · χ̂₁(δξ₁) χ̂₁(δξ₂)`; vanishes as soon as
/// either |δξᵢ| ≥ 1.
pub fn chi_hat(lambda: f64, delta: f64, xi: [f64; 2]) -> f64 {
    let t1 = delta * xi[0];
    let t2 = delta * xi[1];
    if t1.abs() >= 1.0 || t2.abs() >= 1.0 {
        return 0.0;
    }
    let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
    lambda * delta * bessel_j(lambda * r) * chi1_hat(t1) * chi1_hat(t2)
}

// ---------------------------------------------------------------------------
// Mollified symbol χ_{λ,δ} by circle quadrature.
// ---------------------------------------------------------------------------

/// Nodes for the circle quadrature of `χ_{λ,δ}`: the integrand develops
/// angular features at scale δ/λ, so the floor 10⁴ is raised proportionally.
pub fn circle_quadrature_nodes(lambda: f64, delta: f64) -> usize {
    let need = (40.0 * lambda / delta).ceil() as usize;
    need.max(10_000)
}

/// `χ_{λ,δ}(x) = δ⁻¹ ∫ χ((x - y)/δ) dσ_λ(y)` by the trapezoid rule with
/// `nodes` points (spectrally accurate: the integrand is analytic and
/// periodic).
pub fn chi_mollified_at(lambda: f64, delta: f64, x: [f64; 2], nodes: usize) -> f64 {
    let inv_delta = 1.0 / delta;
    let weight = lambda * std::f64::consts::TAU / nodes as f64 * inv_delta;
    let mut sum = 0.0f64;
    for i in 0..nodes {
        let theta = std::f64::consts::TAU * i as f64 / nodes as f64;
        let (s, c) = theta.sin_cos();
        let u1 = (x[0] - lambda * c) * inv_delta;
        let u2 = (x[1] - lambda * s) * inv_delta;
        // sinc⁸ tails beyond |u| = 100 are below 1e-15 of the peak.
        if u1 * u1 > 1.0e4 || u2 * u2 > 1.0e4 {
            continue;
        }
        sum += chi1(u1) * chi1(u2);
    }
    sum * weight
}

/// The mollifier with its verified positivity floor on the annulus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mollifier {
    pub lambda: f64,
    pub delta: f64,
    /// Verified lower bound for χ_{λ,δ} on sampled annulus radii.
    pub floor_c: f64,
    pub quadrature_nodes: usize,
}

impl Mollifier {
    pub fn new(lambda: f64, delta: f64) -> Result<Self> {
        if !(lambda > 2.0) || !(delta > 0.0) || delta >= lambda {
            return Err(Error::argument("mollifier requires lambda > 2 and 0 < delta < lambda"));
        }
        let nodes = circle_quadrature_nodes(lambda, delta);
        // The seed χ is a coordinate product, so χ_{λ,δ} is only nearly
        // radial; the floor is sampled over radii and angles.
        let mut floor_c = f64::INFINITY;
        for i in 0..17 {
            let t = -0.99 + 1.98 * i as f64 / 16.0;
            let r = lambda + delta * t;
            for k in 0..5 {
                let phi = std::f64::consts::FRAC_PI_4 * k as f64 / 4.0;
                let v =
                    chi_mollified_at(lambda, delta, [r * phi.cos(), r * phi.sin()], nodes);
                floor_c = floor_c.min(v);
            }
        }
        if !(floor_c > 0.0) {
            return Err(Error::numerical(format!(
                "mollifier positivity floor failed: min sampled value {floor_c}"
            )));
        }
        Ok(Mollifier { lambda, delta, floor_c, quadrature_nodes: nodes })
    }

    pub fn value_at(&self, x: [f64; 2]) -> f64 {
        chi_mollified_at(self.lambda, self.delta, x, self.quadrature_nodes)
    }
}

// ---------------------------------------------------------------------------
// Smooth dyadic partition of unity.
// ---------------------------------------------------------------------------

/// Radial partition `φ(r) + Σ_{M ∈ 2^ℕ} ψ(r/M) = 1` built from the classical
/// e^{-1/t} transition: ψ is supported in [1/2, 2], φ = h(2·) in the unit
/// ball.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    psi_table: Vec<f64>,
}

fn bump_g(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 1 for r ≤ 1, 0 for r ≥ 2.
fn smooth_h(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = bump_g(2.0 - r);
        let b = bump_g(r - 1.0);
        a / (a + b)
    }
}

const PSI_TABLE_SIZE: usize = 1 << 14;

impl Default for DyadicPartition {
    fn default() -> Self {
        Self::new()
    }
}

impl DyadicPartition {
    pub fn new() -> Self {
        let psi_table = (0..PSI_TABLE_SIZE)
            .map(|i| {
                let r = 0.5 + 1.5 * i as f64 / (PSI_TABLE_SIZE - 1) as f64;
                Self::psi_exact(r)
            })
            .collect();
        DyadicPartition { psi_table }
    }

    /// φ(r) = h(2r): 1 on [0, 1/2], supported in [0, 1].
    pub fn phi(r: f64) -> f64 {
        smooth_h(2.0 * r)
    }

    /// ψ(r) = h(r) - h(2r): supported in [1/2, 2].
    pub fn psi_exact(r: f64) -> f64 {
        smooth_h(r) - smooth_h(2.0 * r)
    }

    /// Table lookup with linear interpolation; used in the hot exp-sum loops.
    #[inline]
    pub fn psi_fast(&self, r: f64) -> f64 {
        if !(0.5..=2.0).contains(&r) {
            return 0.0;
        }
        let t = (r - 0.5) / 1.5 * (PSI_TABLE_SIZE - 1) as f64;
        let i = t.floor() as usize;
        if i + 1 >= PSI_TABLE_SIZE {
            return self.psi_table[PSI_TABLE_SIZE - 1];
        }
        let frac = t - i as f64;
        self.psi_table[i] * (1.0 - frac) + self.psi_table[i + 1] * frac
    }

    /// Residual of the partition identity at radius r, truncated at levels
    /// M ≤ m_max (exact once 2·r ≤ m_max).
    pub fn partition_residual(r: f64, m_max: u64) -> f64 {
        let mut sum = Self::phi(r);
        let mut m = 1u64;
        while m <= m_max {
            sum += Self::psi_exact(r / m as f64);
            m *= 2;
        }
        sum - 1.0
    }
}

/// Dyadic levels `M = 1, 2, 4, … ≤ 1/δ`.
pub fn dyadic_levels(delta: f64) -> Vec<u64> {
    let mut out = Vec::new();
    let top = 1.0 / delta;
    let mut m = 1u64;
    while (m as f64) <= top {
        out.push(m);
        m *= 2;
    }
    out
}

// ---------------------------------------------------------------------------
// Poisson identity: frequency-side and shift-side evaluation of the mollified
// kernel.
// ---------------------------------------------------------------------------

/// Exact shift-side truncation radius: `χ̂_{λ,δ}` is supported in the box
/// `[-1/δ, 1/δ]²`, so shifts beyond `√2/δ + 1` contribute nothing.
pub fn exact_spatial_radius(delta: f64) -> f64 {
    std::f64::consts::SQRT_2 / delta + 1.0
}

/// Shift-side sum `Σ_{|m - x| ≤ radius} χ̂_{λ,δ}(m - x)`; exact at
/// [`exact_spatial_radius`] and beyond.
pub fn phi_flat_spatial(lambda: f64, delta: f64, x: [f64; 2], radius: f64) -> Result<Complex64> {
    if !(radius >= 4.0) {
        return Err(Error::argument("spatial truncation radius must be at least 4"));
    }
    let r2 = radius * radius;
    let lo0 = (x[0] - radius).floor() as i64;
    let hi0 = (x[0] + radius).ceil() as i64;
    let lo1 = (x[1] - radius).floor() as i64;
    let hi1 = (x[1] + radius).ceil() as i64;
    let mut sum = 0.0f64;
    for m0 in lo0..=hi0 {
        for m1 in lo1..=hi1 {
            let d = [m0 as f64 - x[0], m1 as f64 - x[1]];
            if d[0] * d[0] + d[1] * d[1] > r2 {
                continue;
            }
            sum += chi_hat(lambda, delta, d);
        }
    }
    Ok(Complex64::new(sum, 0.0))
}

/// Frequency-side evaluator: caches the mollified symbol on the lattice shell
/// `λ - T/δ ≤ |k| ≤ λ + T/δ`. The sinc⁸ tails put everything outside the
/// shell below ~1e-10 for T ≥ 4.
pub struct PhiFlatEvaluator {
    pub lambda: f64,
    pub delta: f64,
    pub truncation: f64,
    weights: Vec<(IntPoint, f64)>,
}

impl PhiFlatEvaluator {
    pub fn new(lambda: f64, delta: f64, truncation: f64) -> Result<Self> {
        if !(truncation >= 4.0) {
            return Err(Error::argument("spectral truncation must be at least 4"));
        }
        let outer = lambda + truncation / delta;
        if outer > 1.0e7 {
            return Err(Error::capacity(format!(
                "spectral enumeration radius {outer} exceeds capacity; λ + T/δ must stay below 1e7"
            )));
        }
        let inner = (lambda - truncation / delta).max(0.0);
        let nodes = circle_quadrature_nodes(lambda, delta);
        let kmax = outer.floor() as i64;
        let inner2 = inner * inner;
        let outer2 = outer * outer;
        let columns: Vec<i64> = (-kmax..=kmax).collect();
        let weights: Vec<(IntPoint, f64)> = columns
            .par_iter()
            .map(|&kx| {
                let mut col = Vec::new();
                let x2 = (kx * kx) as f64;
                if x2 > outer2 {
                    return col;
                }
                let ymax = (outer2 - x2).sqrt().floor() as i64;
                for ky in -ymax..=ymax {
                    let n2 = x2 + (ky * ky) as f64;
                    if n2 < inner2 {
                        continue;
                    }
                    let w =
                        chi_mollified_at(lambda, delta, [kx as f64, ky as f64], nodes);
                    col.push((IntPoint::new(kx, ky), w));
                }
                col
            })
            .flatten()
            .collect();
        // Richardson check on the worst-case weights: doubling the node count
        // must not move them.
        let mut probes: Vec<&(IntPoint, f64)> = weights.iter().collect();
        probes.sort_by(|a, b| b.1.abs().partial_cmp(&a.1.abs()).unwrap());
        for (k, w) in probes.into_iter().take(8) {
            let refined =
                chi_mollified_at(lambda, delta, [k.x as f64, k.y as f64], 2 * nodes);
            if (refined - w).abs() > 1e-8 * (1.0 + w.abs()) {
                return Err(Error::numerical(format!(
                    "circle quadrature failed its Richardson check at k = ({}, {}): \
                     {w} vs {refined} at doubled nodes",
                    k.x, k.y
                )));
            }
        }
        Ok(PhiFlatEvaluator { lambda, delta, truncation, weights })
    }

    pub fn weight_count(&self) -> usize {
        self.weights.len()
    }

    /// Σ_k χ_{λ,δ}(k) e^{2πi k·x} over the cached shell.
    pub fn eval(&self, x: [f64; 2]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, w) in &self.weights {
            let phase = std::f64::consts::TAU * (k.x as f64 * x[0] + k.y as f64 * x[1]);
            let (s, c) = phase.sin_cos();
            acc += Complex64::new(w * c, w * s);
        }
        acc
    }
}

/// Evaluation mode of the mollified kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiFlatMode {
    /// Frequency sum with quadrature weights.
    Spectral,
    /// Poisson shift sum of the compactly supported transform.
    Spatial,
}

/// One-shot evaluation of `Φ^♭_{λ,δ}(x)`; for repeated spectral calls build a
/// [`PhiFlatEvaluator`] once.
pub fn phi_flat(
    lambda: f64,
    delta: f64,
    x: [f64; 2],
    mode: PhiFlatMode,
    truncation: f64,
) -> Result<Complex64> {
    match mode {
        PhiFlatMode::Spatial => phi_flat_spatial(lambda, delta, x, truncation),
        PhiFlatMode::Spectral => {
            let eval = PhiFlatEvaluator::new(lambda, delta, truncation)?;
            Ok(eval.eval(x))
        }
    }
}

// ---------------------------------------------------------------------------
// Exponential sums over dyadic annuli.
// ---------------------------------------------------------------------------

/// One sample of the dyadic exponential sum at level M.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpSumSample {
    pub lambda: f64,
    pub delta: f64,
    pub m_level: u64,
    pub x: [f64; 2],
    pub value: Complex64,
    /// Exact triangle-inequality envelope λ^{1/2} δ Σ |ψ| ⟨n-x⟩^{-1/2}.
    pub abs_sum: f64,
    /// Constant-free bound λ^{1/2} δ M^{3/2}.
    pub trivial_bound: f64,
    /// λ^{6/11} δ M^{29/22}, valid for λ > M^{5/4}.
    pub muller_bound: f64,
    pub muller_applicable: bool,
    /// M exceeded 1/δ; the sample is computed anyway and flagged.
    pub beyond_range: bool,
}

/// `S_{λ,M,x} = λ^{1/2} δ Σ_n ψ((n-x)/M) e^{2πiλ|n-x|} ⟨n-x⟩^{-1/2}`,
/// summed directly over the lattice points of the ψ-annulus.
pub fn exp_sum(
    lambda: f64,
    delta: f64,
    m_level: u64,
    x: [f64; 2],
    part: &DyadicPartition,
) -> ExpSumSample {
    exp_sum_at_scale(lambda, delta, m_level, m_level as f64, x, part)
}

/// [`exp_sum`] at an arbitrary positive scale (the dyadic levels use integer
/// M; fractional scales exercise the empty-annulus case).
pub fn exp_sum_at_scale(
    lambda: f64,
    delta: f64,
    m_level: u64,
    m: f64,
    x: [f64; 2],
    part: &DyadicPartition,
) -> ExpSumSample {
    let pref = lambda.sqrt() * delta;
    let reach = 2.0 * m + 1.0;
    let lo0 = (x[0] - reach).floor() as i64;
    let hi0 = (x[0] + reach).ceil() as i64;
    let lo1 = (x[1] - reach).floor() as i64;
    let hi1 = (x[1] + reach).ceil() as i64;
    let (rmin2, rmax2) = ((0.5 * m) * (0.5 * m), (2.0 * m) * (2.0 * m));
    let mut acc = Complex64::new(0.0, 0.0);
    let mut abs = 0.0f64;
    for n0 in lo0..=hi0 {
        let d0 = n0 as f64 - x[0];
        let d0sq = d0 * d0;
        if d0sq > rmax2 {
            continue;
        }
        for n1 in lo1..=hi1 {
            let d1 = n1 as f64 - x[1];
            let r2 = d0sq + d1 * d1;
            if r2 < rmin2 || r2 > rmax2 {
                continue;
            }
            let r = r2.sqrt();
            let w = part.psi_fast(r / m);
            if w == 0.0 {
                continue;
            }
            let decay = w / (1.0 + r2).sqrt().sqrt();
            let phase = std::f64::consts::TAU * lambda * r;
            let (s, c) = phase.sin_cos();
            acc += Complex64::new(decay * c, decay * s);
            abs += decay;
        }
    }
    ExpSumSample {
        lambda,
        delta,
        m_level,
        x,
        value: acc * pref,
        abs_sum: abs * pref,
        trivial_bound: pref * m.powf(1.5),
        muller_bound: muller_bound(lambda, delta, m),
        muller_applicable: muller_applicable(lambda, m),
        beyond_range: m > 1.0 / delta,
    }
}

/// Per-level empirical bound comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRow {
    pub m_level: u64,
    /// max |S| over the seeded samples.
    pub emp_sup: f64,
    /// max of the exact triangle-inequality envelopes over the same samples.
    pub envelope: f64,
    pub trivial_bound: f64,
    pub muller_bound: f64,
    pub ratio_trivial: f64,
    pub ratio_muller: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub lambda: f64,
    pub delta: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub rows: Vec<BoundRow>,
    /// Log-log slope of emp_sup against M (rows with emp_sup > 0).
    pub fitted_m_exponent: Option<FitResult>,
}

/// Empirical sup of |S_{λ,M,x}| over seeded x for every dyadic M ≤ 1/δ.
pub fn dyadic_bound_report(
    lambda: f64,
    delta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<BoundReport> {
    if n_samples == 0 {
        return Err(Error::argument("need at least one x sample"));
    }
    let part = DyadicPartition::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<[f64; 2]> =
        (0..n_samples).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let rows: Vec<BoundRow> = dyadic_levels(delta)
        .into_iter()
        .map(|m_level| {
            let samples: Vec<(f64, f64)> = xs
                .par_iter()
                .map(|&x| {
                    let s = exp_sum(lambda, delta, m_level, x, &part);
                    (s.value.norm(), s.abs_sum)
                })
                .collect();
            let emp_sup = samples.iter().map(|s| s.0).fold(0.0, f64::max);
            let envelope = samples.iter().map(|s| s.1).fold(0.0, f64::max) * 1.01;
            let m = m_level as f64;
            let trivial = lambda.sqrt() * delta * m.powf(1.5);
            let muller = muller_bound(lambda, delta, m);
            BoundRow {
                m_level,
                emp_sup,
                envelope,
                trivial_bound: trivial,
                muller_bound: muller,
                ratio_trivial: emp_sup / trivial,
                ratio_muller: emp_sup / muller,
            }
        })
        .collect();
    let fit_rows: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.emp_sup > 0.0)
        .map(|r| (r.m_level as f64, r.emp_sup))
        .collect();
    let fitted_m_exponent = if fit_rows.len() >= 3 { fit_loglog(&fit_rows).ok() } else { None };
    Ok(BoundReport { lambda, delta, n_samples, seed, rows, fitted_m_exponent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bspline_basics() {
        assert!((bspline8(0.0) - 151.0 / 315.0).abs() < 1e-15);
        assert_eq!(bspline8(4.0), 0.0);
        assert_eq!(bspline8(-4.2), 0.0);
        // Symmetry and positivity inside the support.
        for i in 0..100 {
            let u = -3.95 + 7.9 * i as f64 / 99.0;
            assert!(bspline8(u) > 0.0, "B8({u})");
            assert!((bspline8(u) - bspline8(-u)).abs() < 1e-16);
        }
        // Partition of unity of integer translates.
        for x in [0.0, 0.3, 0.7, 1.9] {
            let s: f64 = (-8..=8).map(|k| bspline8(x - k as f64)).sum();
            assert!((s - 1.0).abs() < 1e-13, "x={x}: {s}");
        }
    }

    #[test]
    fn chi1_pair_is_consistent() {
        // ∫ χ₁(x) e^{-2πi t x} dx = χ̂₁(t), checked by midpoint quadrature
        // over |x| ≤ 3000 (tails beyond decay like x⁻⁸).
        for t in [0.0, 0.15, 0.3, 0.62, 0.95] {
            let mut acc = 0.0f64;
            let n = 600_000usize;
            let h = 6000.0 / n as f64;
            for i in 0..n {
                let x = -3000.0 + (i as f64 + 0.5) * h;
                acc += chi1(x) * (std::f64::consts::TAU * t * x).cos();
            }
            acc *= h;
            let expected = chi1_hat(t);
            assert!(
                (acc - expected).abs() < 5e-6,
                "t={t}: quadrature {acc} vs closed form {expected}"
            );
        }
        // Compact support.
        assert_eq!(chi1_hat(1.0), 0.0);
        assert_eq!(chi1_hat(-1.3), 0.0);
        assert!((chi1_hat(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bessel_j_convention() {
        assert!((bessel_j(0.0) - std::f64::consts::TAU).abs() < 1e-12);
        // Direct quadrature of ∫ e^{-2πi r cosθ} dθ.
        let r = 1.0;
        let n = 4096;
        let mut acc = 0.0;
        for i in 0..n {
            let theta = std::f64::consts::TAU * i as f64 / n as f64;
            acc += (std::f64::consts::TAU * r * theta.cos()).cos();
        }
        acc *= std::f64::consts::TAU / n as f64;
        assert!((bessel_j(r) - acc).abs() < 1e-9);
    }

    #[test]
    fn bessel_second_order_equation() {
        // J(r) = 2π J0(2πr) solves J'' + J'/r + (2π)² J = 0; check by central
        // differences.
        let h = 1e-4;
        for r in [0.5, 1.7, 3.9, 12.3, 40.1] {
            let j0 = bessel_j(r - h);
            let j1 = bessel_j(r);
            let j2 = bessel_j(r + h);
            let d2 = (j2 - 2.0 * j1 + j0) / (h * h);
            let d1 = (j2 - j0) / (2.0 * h);
            let residual = d2 + d1 / r + std::f64::consts::TAU.powi(2) * j1;
            let scale = std::f64::consts::TAU.powi(2) * j1.abs().max(1e-2);
            assert!(residual.abs() / scale < 1e-5, "r={r}: residual {residual}");
        }
    }

    #[test]
    fn chi_hat_values() {
        let (lambda, delta) = (30.0, 0.25);
        assert!(
            (chi_hat(lambda, delta, [0.0, 0.0]) - lambda * delta * std::f64::consts::TAU)
                .abs()
                < 1e-9
        );
        assert_eq!(chi_hat(lambda, delta, [4.0, 1.0]), 0.0);
        assert_eq!(chi_hat(lambda, delta, [1.0, 4.1]), 0.0);
    }

    #[test]
    fn chi_hat_factor_crosscheck() {
        // λδ J(λ|ξ|) against direct quadrature of the circle transform.
        let (lambda, delta) = (100.0, 0.1);
        let xi = [3.0f64, 4.0];
        let r = 5.0f64;
        let n = 60_000;
        let mut acc = 0.0;
        for i in 0..n {
            let theta = std::f64::consts::TAU * i as f64 / n as f64;
            let (s, c) = theta.sin_cos();
            let dot = xi[0] * lambda * c + xi[1] * lambda * s;
            acc += (std::f64::consts::TAU * dot).cos();
        }
        acc *= lambda * std::f64::consts::TAU / n as f64;
        let closed = lambda * bessel_j(lambda * r);
        assert!(
            (acc - closed).abs() < 1e-6 * closed.abs().max(1.0),
            "quadrature {acc} vs closed {closed}"
        );
        let full = chi_hat(lambda, delta, xi);
        let expected = lambda * delta * bessel_j(500.0) * chi1_hat(0.3) * chi1_hat(0.4);
        assert!((full - expected).abs() < 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn partition_identity() {
        for i in 0..1000 {
            let r = 0.001 + 80.0 * i as f64 / 999.0;
            let residual = DyadicPartition::partition_residual(r, 1 << 9);
            assert!(residual.abs() < 1e-12, "r={r}: {residual}");
        }
    }

    #[test]
    fn psi_support() {
        assert_eq!(DyadicPartition::psi_exact(0.49), 0.0);
        assert_eq!(DyadicPartition::psi_exact(2.01), 0.0);
        assert!(DyadicPartition::psi_exact(1.0) > 0.0);
        let part = DyadicPartition::new();
        for i in 0..500 {
            let r = 0.4 + 1.8 * i as f64 / 499.0;
            assert!((part.psi_fast(r) - DyadicPartition::psi_exact(r)).abs() < 1e-7);
        }
    }

    #[test]
    fn mollifier_floor_positive() {
        let m = Mollifier::new(20.0, 0.2).unwrap();
        assert!(m.floor_c > 0.0);
        // The product-form χ makes χ_{λ,δ} only nearly radial: angular
        // variation stays at the sub-percent level.
        let a = m.value_at([20.1, 0.0]);
        let ang = 1.1f64;
        let b = m.value_at([20.1 * ang.cos(), 20.1 * ang.sin()]);
        assert!((a - b).abs() < 1e-2 * a.abs());
        assert!(a >= m.floor_c * 0.999);
        assert!(b >= m.floor_c * 0.999);
    }

    #[test]
    fn poisson_identity_small() {
        let (lambda, delta) = (20.0, 0.2);
        let eval = PhiFlatEvaluator::new(lambda, delta, 4.0).unwrap();
        let radius = exact_spatial_radius(delta);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            let spec = eval.eval(x);
            let spat = phi_flat_spatial(lambda, delta, x, radius).unwrap();
            assert!(
                (spec - spat).norm() < 1e-6,
                "x={x:?}: spectral {spec} vs spatial {spat}"
            );
        }
    }

    #[test]
    fn spatial_truncation_is_exact() {
        let (lambda, delta) = (25.0, 0.3);
        let x = [0.37, 0.82];
        let r1 = exact_spatial_radius(delta);
        let a = phi_flat_spatial(lambda, delta, x, r1).unwrap();
        let b = phi_flat_spatial(lambda, delta, x, 2.0 * r1).unwrap();
        assert_eq!(a, b);
    }

    fn annulus_count(lambda: f64, delta: f64) -> usize {
        crate::lattice::enumerate_annulus(
            &crate::lattice::AnnulusSpec::new(lambda, delta).unwrap(),
        )
        .unwrap()
        .len()
    }

    #[test]
    fn phi_flat_at_origin_dominates_point_count() {
        let (lambda, delta) = (20.0, 0.2);
        let count = annulus_count(lambda, delta);
        let moll = Mollifier::new(lambda, delta).unwrap();
        let v = phi_flat_spatial(lambda, delta, [0.0, 0.0], exact_spatial_radius(delta))
            .unwrap();
        assert!(v.re >= moll.floor_c * count as f64 * 0.99, "{} vs floor·count", v.re);
    }

    #[test]
    fn exp_sum_empty_annulus_is_zero() {
        // Scale 0.1: the ψ-annulus 0.05 ≤ |n-x| ≤ 0.2 around (0.5, 0.5)
        // holds no lattice point.
        let part = DyadicPartition::new();
        let s = exp_sum_at_scale(50.0, 0.1, 1, 0.1, [0.5, 0.5], &part);
        assert_eq!(s.value, Complex64::new(0.0, 0.0));
        assert_eq!(s.abs_sum, 0.0);
    }

    #[test]
    fn exponential_sum_bound_exponents() {
        // ω = 1/22 at q = 3, giving λ^{6/11} δ M^{29/22}.
        assert!((MULLER_OMEGA - 1.0 / 22.0).abs() < 1e-15);
        let (lambda, delta, m) = (777.0f64, 0.013f64, 16.0f64);
        let closed = lambda.powf(6.0 / 11.0) * delta * m.powf(29.0 / 22.0);
        assert!((muller_bound(lambda, delta, m) - closed).abs() < 1e-12 * closed);
        // 16^{5/4} = 32: the strict threshold excludes equality.
        assert!(!muller_applicable(32.0, 16.0));
        assert!(muller_applicable(33.0, 16.0));
    }

    #[test]
    fn exp_sum_triangle_inequality_and_flags() {
        let part = DyadicPartition::new();
        let s = exp_sum(64.0, 0.125, 4, [0.21, 0.86], &part);
        assert!(s.value.norm() <= 1.01 * s.abs_sum + 1e-12);
        assert!(!s.beyond_range);
        assert!(s.muller_applicable); // 64 > 4^{5/4}
        let s2 = exp_sum(64.0, 0.125, 16, [0.21, 0.86], &part);
        assert!(s2.beyond_range); // 16 > 1/δ = 8
    }

    #[test]
    fn bound_report_deterministic() {
        let a = dyadic_bound_report(64.0, 1.0 / 16.0, 8, 42).unwrap();
        let b = dyadic_bound_report(64.0, 1.0 / 16.0, 8, 42).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.emp_sup, rb.emp_sup);
            assert_eq!(ra.envelope, rb.envelope);
        }
        for row in &a.rows {
            assert!(row.emp_sup <= row.envelope + 1e-12);
        }
    }
}
