//! Exact enumeration and counting of integer points in annuli and in
//! δ-neighborhoods of dilated curves.
//!
//! Annulus membership `λ-δ < |k| < λ+δ` is decided on squared magnitudes in
//! exact rational arithmetic: the window `((λ-δ)², (λ+δ)²)` is converted once
//! into an inclusive integer range, after which everything is pure integer
//! work. Boundary points are excluded (strict inequalities).

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Coordinate guard: desk scale keeps |x|,|y| ≤ 2³¹ so that squared norms and
/// cross products stay well inside i64/i128.
pub const COORD_LIMIT: i64 = 1 << 31;

/// Largest admissible squared radius for [`r2`].
pub const R2_INPUT_LIMIT: u64 = 1 << 62;

/// Default cap on the number of enumerated points.
pub const DEFAULT_POINT_CAP: usize = 10_000_000;

/// A lattice point in ℤ².
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntPoint {
    pub x: i64,
    pub y: i64,
}

impl IntPoint {
    pub fn new(x: i64, y: i64) -> Self {
        IntPoint { x, y }
    }

    /// Squared Euclidean norm, exact.
    pub fn norm2(&self) -> u64 {
        (self.x as i128 * self.x as i128 + self.y as i128 * self.y as i128) as u64
    }

    pub fn norm(&self) -> f64 {
        (self.norm2() as f64).sqrt()
    }

    /// Angle in [0, 2π).
    pub fn angle(&self) -> f64 {
        let a = (self.y as f64).atan2(self.x as f64);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}

/// Thin annulus `λ-δ < |x| < λ+δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub lambda: f64,
    pub delta: f64,
}

impl AnnulusSpec {
    pub fn new(lambda: f64, delta: f64) -> Result<Self> {
        if !lambda.is_finite() || !delta.is_finite() {
            return Err(Error::argument("lambda and delta must be finite"));
        }
        if lambda <= 2.0 {
            return Err(Error::argument(format!("lambda must exceed 2, got {lambda}")));
        }
        if delta <= 0.0 || delta >= lambda {
            return Err(Error::argument(format!(
                "delta must satisfy 0 < delta < lambda, got {delta}"
            )));
        }
        Ok(AnnulusSpec { lambda, delta })
    }

    /// Annulus at `λ = lambda`, `δ = λ^{-alpha}`.
    pub fn from_alpha(lambda: f64, alpha: f64) -> Result<Self> {
        AnnulusSpec::new(lambda, lambda.powf(-alpha))
    }

    /// Inclusive integer window `[n_lo, n_hi]` of squared norms inside the
    /// annulus, computed exactly from the f64 inputs (which are dyadic
    /// rationals). Returns `None` when the window is empty.
    pub fn squared_window(&self) -> Result<Option<(u64, u64)>> {
        let lambda = BigRational::from_f64(self.lambda)
            .ok_or_else(|| Error::argument("lambda is not finite"))?;
        let delta = BigRational::from_f64(self.delta)
            .ok_or_else(|| Error::argument("delta is not finite"))?;
        let lo = (&lambda - &delta) * (&lambda - &delta);
        let hi = (&lambda + &delta) * (&lambda + &delta);
        // Strict inequalities: first integer strictly above lo, last strictly
        // below hi. `ceil(hi) - 1` handles both the exact-integer boundary and
        // the generic case.
        let n_lo = lo.floor().to_integer() + 1i32;
        let n_hi = hi.ceil().to_integer() - 1i32;
        let n_lo = if n_lo.is_negative() { BigInt::from(0) } else { n_lo };
        if n_hi < n_lo {
            return Ok(None);
        }
        let hi_u = n_hi
            .to_u64()
            .ok_or_else(|| Error::capacity("squared-norm window exceeds u64"))?;
        if hi_u > R2_INPUT_LIMIT {
            return Err(Error::capacity(format!(
                "squared-norm window {hi_u} exceeds the 2^62 guard"
            )));
        }
        let lo_u = n_lo.to_u64().unwrap_or(0);
        Ok(Some((lo_u, hi_u)))
    }
}

/// Supported curve families for neighborhood enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CurveKind {
    UnitCircle,
    Ellipse { a: f64, b: f64 },
    Parabola,
}

/// A compact curve to dilate by λ. The parabola is `ξ ↦ (ξ, ξ²)` on the fixed
/// parameter interval `[-1, 1]`; circle and ellipse are closed curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub kind: CurveKind,
    pub domain: (f64, f64),
}

impl CurveSpec {
    pub fn unit_circle() -> Self {
        CurveSpec { kind: CurveKind::UnitCircle, domain: (0.0, std::f64::consts::TAU) }
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::argument("ellipse semi-axes must be positive"));
        }
        Ok(CurveSpec { kind: CurveKind::Ellipse { a, b }, domain: (0.0, std::f64::consts::TAU) })
    }

    pub fn parabola() -> Self {
        CurveSpec { kind: CurveKind::Parabola, domain: (-1.0, 1.0) }
    }
}

/// Where a lattice set came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SetSource {
    Annulus(AnnulusSpec),
    CurveNeighborhood { curve: CurveSpec, lambda: f64, delta: f64 },
    Derived,
}

impl SetSource {
    pub fn lambda(&self) -> Option<f64> {
        match self {
            SetSource::Annulus(s) => Some(s.lambda),
            SetSource::CurveNeighborhood { lambda, .. } => Some(*lambda),
            SetSource::Derived => None,
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match self {
            SetSource::Annulus(s) => Some(s.delta),
            SetSource::CurveNeighborhood { delta, .. } => Some(*delta),
            SetSource::Derived => None,
        }
    }
}

/// An immutable, lexicographically sorted, duplicate-free set of lattice
/// points together with its defining source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSet {
    points: Vec<IntPoint>,
    source: SetSource,
}

impl LatticeSet {
    /// Builds a set from arbitrary points: sorts, deduplicates, checks the
    /// coordinate guard.
    pub fn from_points(mut points: Vec<IntPoint>, source: SetSource) -> Result<Self> {
        for p in &points {
            if p.x.abs() > COORD_LIMIT || p.y.abs() > COORD_LIMIT {
                return Err(Error::capacity(format!(
                    "point ({}, {}) exceeds the coordinate guard 2^31",
                    p.x, p.y
                )));
            }
        }
        points.sort_unstable();
        points.dedup();
        Ok(LatticeSet { points, source })
    }

    pub fn points(&self) -> &[IntPoint] {
        &self.points
    }

    pub fn source(&self) -> &SetSource {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &IntPoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    /// Maximum coordinate magnitude, 0 for the empty set.
    pub fn max_coord(&self) -> i64 {
        self.points.iter().map(|p| p.x.abs().max(p.y.abs())).max().unwrap_or(0)
    }
}

/// Number of representations of `n` as a sum of two squares (ordered, signed),
/// by trial-division factorization: `r2(n) = 4(d_1(n) - d_3(n))` for `n ≥ 1`
/// via the multiplicative rule, and `r2(0) = 1`.
pub fn r2(n: u64) -> Result<u64> {
    if n > R2_INPUT_LIMIT {
        return Err(Error::argument(format!("r2 input {n} exceeds the 2^62 guard")));
    }
    if n == 0 {
        return Ok(1);
    }
    let mut m = n;
    while m % 2 == 0 {
        m /= 2;
    }
    let mut count: u64 = 4;
    let mut d: u64 = 3;
    while d * d <= m {
        if m % d == 0 {
            let mut exp = 0u64;
            while m % d == 0 {
                m /= d;
                exp += 1;
            }
            match d % 4 {
                1 => count *= exp + 1,
                3 if exp % 2 == 1 => return Ok(0),
                _ => {}
            }
        }
        d += 2;
    }
    if m > 1 {
        match m % 4 {
            1 => count *= 2,
            3 => return Ok(0),
            _ => unreachable!("odd residue"),
        }
    }
    Ok(count)
}

/// Exact floor square root.
fn isqrt(n: u64) -> u64 {
    n.sqrt()
}

/// Smallest `y ≥ 0` with `y² ≥ t`.
fn ceil_sqrt(t: u64) -> u64 {
    let s = isqrt(t);
    if s * s == t {
        s
    } else {
        s + 1
    }
}

/// Column-scan enumeration of `n_lo ≤ x²+y² ≤ n_hi`, emitted in lexicographic
/// order.
fn enumerate_by_columns(n_lo: u64, n_hi: u64, cap: usize) -> Result<Vec<IntPoint>> {
    let xmax = isqrt(n_hi) as i64;
    let mut out = Vec::new();
    for x in -xmax..=xmax {
        let x2 = (x * x) as u64;
        let ymax = isqrt(n_hi - x2) as i64;
        let ymin = if x2 >= n_lo { 0 } else { ceil_sqrt(n_lo - x2) as i64 };
        if ymin > ymax {
            continue;
        }
        if out.len() + 2 * (ymax - ymin) as usize + 2 > cap {
            return Err(Error::capacity(format!("point count exceeds the cap {cap}")));
        }
        for y in -ymax..=-ymin {
            out.push(IntPoint::new(x, y));
        }
        // ymin = 0 already emitted y = 0 as the top of the negative range.
        for y in ymin.max(1)..=ymax {
            out.push(IntPoint::new(x, y));
        }
    }
    Ok(out)
}

/// Shell enumeration: walk integers `n` in the window and expand each shell's
/// representations `x²+y² = n`. Preferable when the window holds few shells.
fn enumerate_by_shells(n_lo: u64, n_hi: u64, cap: usize) -> Result<Vec<IntPoint>> {
    let mut out = Vec::new();
    for n in n_lo..=n_hi {
        // Base solutions with 0 ≤ x ≤ y, expanded by the 8-fold symmetry.
        let xmax = isqrt(n / 2);
        for x in 0..=xmax {
            let t = n - x * x;
            let y = isqrt(t);
            if y * y != t {
                continue;
            }
            let (x, y) = (x as i64, y as i64);
            let mut push = |p: IntPoint| out.push(p);
            if x == 0 && y == 0 {
                push(IntPoint::new(0, 0));
            } else if x == 0 {
                push(IntPoint::new(0, y));
                push(IntPoint::new(0, -y));
                push(IntPoint::new(y, 0));
                push(IntPoint::new(-y, 0));
            } else if x == y {
                push(IntPoint::new(x, y));
                push(IntPoint::new(x, -y));
                push(IntPoint::new(-x, y));
                push(IntPoint::new(-x, -y));
            } else {
                for &(sx, sy) in &[(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
                    push(IntPoint::new(sx * x, sy * y));
                    push(IntPoint::new(sx * y, sy * x));
                }
            }
        }
        if out.len() > cap {
            return Err(Error::capacity(format!("point count exceeds the cap {cap}")));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// All lattice points with `λ-δ < |k| < λ+δ`, lexicographically sorted.
///
/// Two integer-exact strategies are available; the crossover is chosen by
/// predicted work and both are kept equivalent by tests.
pub fn enumerate_annulus(spec: &AnnulusSpec) -> Result<LatticeSet> {
    enumerate_annulus_capped(spec, DEFAULT_POINT_CAP)
}

pub fn enumerate_annulus_capped(spec: &AnnulusSpec, cap: usize) -> Result<LatticeSet> {
    let window = spec.squared_window()?;
    let points = match window {
        None => Vec::new(),
        Some((n_lo, n_hi)) => {
            let shells = n_hi - n_lo + 1;
            let shell_work = shells.saturating_mul(isqrt(n_hi / 2) + 1);
            let column_work = 4 * isqrt(n_hi) + 2;
            if shell_work < column_work {
                enumerate_by_shells(n_lo, n_hi, cap)?
            } else {
                enumerate_by_columns(n_lo, n_hi, cap)?
            }
        }
    };
    LatticeSet::from_points(points, SetSource::Annulus(*spec))
}

/// Σ r2(n) over the annulus's integer shells. Equals the enumeration length.
pub fn count_annulus(spec: &AnnulusSpec) -> Result<u64> {
    match spec.squared_window()? {
        None => Ok(0),
        Some((n_lo, n_hi)) => {
            let mut total = 0u64;
            for n in n_lo..=n_hi {
                total += r2(n)?;
            }
            Ok(total)
        }
    }
}

/// Absolute tolerance used by the curve projection root-finders.
pub fn curve_distance_tolerance(lambda: f64) -> f64 {
    1e-12 * lambda
}

/// Distance from `p` to the dilated parabola `{(λξ, λξ²): ξ ∈ [-1,1]}` by
/// minimizing the squared distance; interior stationary points are roots of
/// `2λξ³ + (λ - 2 p_y) ξ - p_x`.
fn parabola_distance(lambda: f64, px: f64, py: f64) -> Result<f64> {
    let tol = curve_distance_tolerance(lambda) / lambda.max(1.0);
    let cubic = |xi: f64| 2.0 * lambda * xi.powi(3) + (lambda - 2.0 * py) * xi - px;
    let dist_at = |xi: f64| ((px - lambda * xi).powi(2) + (py - lambda * xi * xi).powi(2)).sqrt();

    let mut candidates = vec![-1.0f64, 1.0];
    // Brackets split at the critical points of the cubic.
    let lin = lambda - 2.0 * py;
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    if lin >= 0.0 {
        brackets.push((-1.0, 1.0));
    } else {
        let crit = (-lin / (6.0 * lambda)).sqrt();
        if crit >= 1.0 {
            brackets.push((-1.0, 1.0));
        } else {
            brackets.push((-1.0, -crit));
            brackets.push((-crit, crit));
            brackets.push((crit, 1.0));
        }
    }
    for (mut a, mut b) in brackets {
        let (fa, fb) = (cubic(a), cubic(b));
        if fa == 0.0 {
            candidates.push(a);
            continue;
        }
        if fb == 0.0 {
            candidates.push(b);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        let mut converged = false;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let fm = cubic(mid);
            if fm == 0.0 || (b - a) < tol {
                candidates.push(mid);
                converged = true;
                break;
            }
            if fm.signum() == fa.signum() {
                a = mid;
            } else {
                b = mid;
            }
        }
        if !converged {
            return Err(Error::numerical(format!(
                "parabola projection did not converge at point ({px}, {py})"
            )));
        }
    }
    let mut best = f64::INFINITY;
    for xi in candidates {
        best = best.min(dist_at(xi));
    }
    Ok(best)
}

/// Distance from `p` to the axis-aligned ellipse with semi-axes `(big_a, big_b)`,
/// reduced to the first quadrant and solved by bisection on the projection
/// equation.
fn ellipse_distance(big_a: f64, big_b: f64, px: f64, py: f64) -> Result<f64> {
    let (px, py) = (px.abs(), py.abs());
    let dist_at = |t: f64| {
        let (s, c) = t.sin_cos();
        ((big_a * c - px).powi(2) + (big_b * s - py).powi(2)).sqrt()
    };
    // d/dt of half the squared distance; g(0) ≥ 0, g(π/2) ≤ 0.
    let g = |t: f64| {
        let (s, c) = t.sin_cos();
        (big_a * big_a - big_b * big_b) * s * c - big_a * px * s + big_b * py * c
    };
    let (mut a, mut b) = (0.0f64, std::f64::consts::FRAC_PI_2);
    let ga = g(a);
    if ga <= 0.0 {
        return Ok(dist_at(a).min(dist_at(b)));
    }
    if g(b) >= 0.0 {
        return Ok(dist_at(a).min(dist_at(b)));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if g(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    Ok(dist_at(0.5 * (a + b)))
}

/// All lattice points at Euclidean distance strictly less than `δ` from the
/// dilated curve `λΓ`.
///
/// Circle sources reuse the exact annulus window so they agree bit-for-bit
/// with [`enumerate_annulus`]. Ellipse and parabola candidates come from a
/// per-column bounding strip of half-width `δ + 2·tolerance` and are filtered
/// by projection distance.
pub fn enumerate_curve_neighborhood(
    curve: &CurveSpec,
    lambda: f64,
    delta: f64,
) -> Result<LatticeSet> {
    enumerate_curve_neighborhood_capped(curve, lambda, delta, DEFAULT_POINT_CAP)
}

pub fn enumerate_curve_neighborhood_capped(
    curve: &CurveSpec,
    lambda: f64,
    delta: f64,
    cap: usize,
) -> Result<LatticeSet> {
    if lambda <= 2.0 {
        return Err(Error::argument("lambda must exceed 2"));
    }
    if delta <= 0.0 || delta >= lambda {
        return Err(Error::argument("delta must satisfy 0 < delta < lambda"));
    }
    let source = SetSource::CurveNeighborhood { curve: *curve, lambda, delta };
    let pad = delta + 2.0 * curve_distance_tolerance(lambda);

    let points = match curve.kind {
        CurveKind::UnitCircle => {
            let spec = AnnulusSpec::new(lambda, delta)?;
            return LatticeSet::from_points(
                enumerate_annulus_capped(&spec, cap)?.points.clone(),
                source,
            );
        }
        CurveKind::Ellipse { a, b } => {
            let (big_a, big_b) = (lambda * a, lambda * b);
            let mut pts = Vec::new();
            let kmax = (big_a + pad).floor() as i64;
            for k in -kmax..=kmax {
                // Curve points with x-coordinate within pad of the column.
                let c_lo = ((k as f64 - pad) / big_a).clamp(-1.0, 1.0);
                let c_hi = ((k as f64 + pad) / big_a).clamp(-1.0, 1.0);
                if c_lo > c_hi {
                    continue;
                }
                // |sin t| range over cos t ∈ [c_lo, c_hi].
                let s_hi = (1.0 - c_lo.min(c_hi).powi(2))
                    .max(1.0 - c_lo.max(c_hi).powi(2))
                    .max(if c_lo <= 0.0 && c_hi >= 0.0 { 1.0 } else { 0.0 })
                    .sqrt();
                let s_lo = if c_lo.abs().min(c_hi.abs()) >= 1.0 {
                    0.0
                } else {
                    (1.0 - c_lo.abs().min(c_hi.abs()).powi(2)).max(0.0).sqrt().min(
                        (1.0 - c_lo.abs().max(c_hi.abs()).powi(2)).max(0.0).sqrt(),
                    )
                };
                let bands = [
                    (big_b * s_lo - pad, big_b * s_hi + pad),
                    (-big_b * s_hi - pad, -big_b * s_lo + pad),
                ];
                for (ylo, yhi) in bands {
                    for y in ylo.ceil() as i64..=yhi.floor() as i64 {
                        let d = ellipse_distance(big_a, big_b, k as f64, y as f64)?;
                        if d < delta {
                            pts.push(IntPoint::new(k, y));
                        }
                        if pts.len() > cap {
                            return Err(Error::capacity(format!(
                                "point count exceeds the cap {cap}"
                            )));
                        }
                    }
                }
            }
            pts
        }
        CurveKind::Parabola => {
            let mut pts = Vec::new();
            let kmax = (lambda + pad).floor() as i64;
            for k in -kmax..=kmax {
                let xi_lo = ((k as f64 - pad) / lambda).clamp(-1.0, 1.0);
                let xi_hi = ((k as f64 + pad) / lambda).clamp(-1.0, 1.0);
                if xi_lo > xi_hi {
                    continue;
                }
                let q_lo = if xi_lo <= 0.0 && xi_hi >= 0.0 {
                    0.0
                } else {
                    xi_lo.abs().min(xi_hi.abs()).powi(2)
                };
                let q_hi = xi_lo.powi(2).max(xi_hi.powi(2));
                let ylo = lambda * q_lo - pad;
                let yhi = lambda * q_hi + pad;
                for y in ylo.ceil() as i64..=yhi.floor() as i64 {
                    let d = parabola_distance(lambda, k as f64, y as f64)?;
                    if d < delta {
                        pts.push(IntPoint::new(k, y));
                    }
                    if pts.len() > cap {
                        return Err(Error::capacity(format!("point count exceeds the cap {cap}")));
                    }
                }
            }
            pts
        }
    };
    LatticeSet::from_points(points, source)
}
