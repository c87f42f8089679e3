//! Angular cap decomposition of annulus lattice sets and the dyadic
//! (s, m)-census used by the counting arguments.
//!
//! Caps are equal-width angular sectors (half-open, boundary points join the
//! lower-index sector). Collinearity and spacing inside a cap are decided in
//! exact integer arithmetic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lattice::{IntPoint, LatticeSet};
use crate::{Error, Result};

/// One angular cap with its classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cap {
    pub index: usize,
    /// Half-open angular range `[lo, hi)` in radians (sector 0 starts at 0).
    pub angular_range: (f64, f64),
    pub points: Vec<IntPoint>,
    /// ⌊log₂ count⌋ for nonempty caps.
    pub s_class: Option<u32>,
    /// All points on one line (vacuously true below 3 points).
    pub collinear: bool,
    /// Consecutive differences along the line are all equal.
    pub equal_spacing: bool,
    /// ⌊log₂ gap⌋ of the minimal consecutive spacing, for collinear caps with
    /// at least two points.
    pub m_class: Option<u32>,
    /// Primitive integer direction of the cap's line, sign-normalized to
    /// lexicographically positive.
    pub direction: Option<(i64, i64)>,
    /// Angle in [0, π/2] between the cap's line and the tangent at the cap's
    /// angular center.
    pub alpha: Option<f64>,
}

/// A full partition of a lattice set into angular caps at one length scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapPartition {
    pub lambda: f64,
    pub delta: f64,
    pub cap_length: f64,
    pub n_caps: usize,
    pub caps: Vec<Cap>,
    pub total_points: usize,
}

impl CapPartition {
    /// The small-cap exponent implied by the length scale: ℓ = λ(δ/λ)^β.
    pub fn implied_beta(&self) -> f64 {
        (self.cap_length / self.lambda).ln() / (self.delta / self.lambda).ln()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Reduce to a primitive vector, sign-normalized so that x > 0, or x = 0 and
/// y > 0.
fn primitive(dx: i64, dy: i64) -> (i64, i64) {
    let g = gcd(dx, dy).max(1);
    let (mut px, mut py) = (dx / g, dy / g);
    if px < 0 || (px == 0 && py < 0) {
        px = -px;
        py = -py;
    }
    (px, py)
}

fn cross(a: (i64, i64), b: (i64, i64)) -> i128 {
    a.0 as i128 * b.1 as i128 - a.1 as i128 * b.0 as i128
}

/// Classify a cap's point list: exact collinearity, spacing, direction, and
/// the line-to-tangent angle at `center_angle`.
fn classify(index: usize, range: (f64, f64), mut points: Vec<IntPoint>) -> Cap {
    let n = points.len();
    let s_class = if n >= 1 { Some((n as u64).ilog2()) } else { None };
    if n < 2 {
        return Cap {
            index,
            angular_range: range,
            points,
            s_class,
            collinear: true,
            equal_spacing: true,
            m_class: None,
            direction: None,
            alpha: None,
        };
    }
    let base = points[0];
    let d0 = (points[1].x - base.x, points[1].y - base.y);
    let collinear = points
        .iter()
        .all(|p| cross((p.x - base.x, p.y - base.y), d0) == 0);
    if !collinear {
        return Cap {
            index,
            angular_range: range,
            points,
            s_class,
            collinear: false,
            equal_spacing: false,
            m_class: None,
            direction: None,
            alpha: None,
        };
    }
    let dir = primitive(d0.0, d0.1);
    // Sort along the line by projection onto the primitive direction.
    points.sort_by_key(|p| p.x as i128 * dir.0 as i128 + p.y as i128 * dir.1 as i128);
    let diffs: Vec<(i64, i64)> = points
        .windows(2)
        .map(|w| (w[1].x - w[0].x, w[1].y - w[0].y))
        .collect();
    let equal_spacing = diffs.windows(2).all(|d| d[0] == d[1]);
    let min_gap2 = diffs
        .iter()
        .map(|d| (d.0 as i128 * d.0 as i128 + d.1 as i128 * d.1 as i128) as u128)
        .min()
        .unwrap();
    // ⌊log₂ √g²⌋ = ⌊log₂(g²)⌋ / 2, exact in integer arithmetic.
    let m_class = Some(min_gap2.ilog2() / 2);
    let center = 0.5 * (range.0 + range.1);
    let tangent = (-center.sin(), center.cos());
    let dlen = ((dir.0 * dir.0 + dir.1 * dir.1) as f64).sqrt();
    let cosang =
        ((dir.0 as f64 * tangent.0 + dir.1 as f64 * tangent.1) / dlen).abs().min(1.0);
    let alpha = Some(cosang.acos());
    Cap {
        index,
        angular_range: range,
        points,
        s_class,
        collinear: true,
        equal_spacing,
        m_class,
        direction: Some(dir),
        alpha,
    }
}

/// Partition a lattice set into `⌈2πλ/ℓ⌉` equal angular sectors.
///
/// A point exactly on a sector boundary joins the lower-index sector.
pub fn partition(set: &LatticeSet, cap_length: f64) -> Result<CapPartition> {
    let lambda = set
        .source()
        .lambda()
        .ok_or_else(|| Error::argument("cap partition requires a set with a known lambda"))?;
    let delta = set.source().delta().unwrap_or(0.0);
    if !(cap_length > 0.0) {
        return Err(Error::argument("cap length must be positive"));
    }
    let circumference = std::f64::consts::TAU * lambda;
    if cap_length > circumference {
        return Err(Error::argument(format!(
            "cap length {cap_length} exceeds the circumference {circumference}"
        )));
    }
    let n_caps = (circumference / cap_length).ceil() as usize;
    let width = std::f64::consts::TAU / n_caps as f64;
    let mut buckets: Vec<Vec<IntPoint>> = vec![Vec::new(); n_caps];
    for &p in set.points() {
        let angle = p.angle();
        let mut idx = (angle / width).floor() as usize;
        // Exactly on a boundary: drop to the lower-index sector.
        if idx > 0 && angle == idx as f64 * width {
            idx -= 1;
        }
        if idx >= n_caps {
            idx = n_caps - 1;
        }
        buckets[idx].push(p);
    }
    let caps: Vec<Cap> = buckets
        .into_iter()
        .enumerate()
        .map(|(i, pts)| classify(i, (i as f64 * width, (i + 1) as f64 * width), pts))
        .collect();
    Ok(CapPartition {
        lambda,
        delta,
        cap_length,
        n_caps,
        caps,
        total_points: set.len(),
    })
}

/// One dyadic class row: #C_s together with its normalized ratio
/// `#C_s · 2^{2s} / (λδ)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SClassRow {
    pub s: u32,
    pub count: u64,
    pub ratio: f64,
}

/// One (s, m) refinement row (collinear caps only): #S_{s,m} with the ratio
/// `#S_{s,m} · 2^{s-m} / (λδ)^{1/2}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmClassRow {
    pub s: u32,
    pub m: u32,
    pub count: u64,
    pub ratio: f64,
}

/// Census of a partition: the small-cap reservoir C₀, the dyadic classes C_s,
/// and their (s, m) refinements, with the normalized counting ratios.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapCensus {
    pub lambda: f64,
    pub delta: f64,
    pub scale: f64,
    /// Caps with 1 ≤ count ≤ threshold.
    pub c0_caps: u64,
    pub c0_points: u64,
    /// Point-count threshold separating C₀ from the dyadic classes.
    pub threshold: f64,
    pub s_classes: Vec<SClassRow>,
    pub sm_classes: Vec<SmClassRow>,
    pub total_points: u64,
}

impl CapCensus {
    pub fn max_ratio_s(&self) -> f64 {
        self.s_classes.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }
    pub fn max_ratio_sm(&self) -> f64 {
        self.sm_classes.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }
}

/// C₀ threshold: caps with at most `4 (δℓ + 1)` points stay in the reservoir.
/// At the canonical scale `ℓ = (λδ)^{1/2}` the product δℓ is the cap area
/// `λ^{1/2} δ^{3/2}` up to the fixed constant.
pub fn c0_threshold(delta: f64, scale: f64) -> f64 {
    4.0 * (delta * scale + 1.0)
}

pub fn census(partition: &CapPartition) -> CapCensus {
    census_with_threshold_factor(partition, 4.0)
}

/// Census with an explicit C₀ threshold factor (the default is 4; slope fits
/// must be insensitive to the exact choice).
pub fn census_with_threshold_factor(partition: &CapPartition, factor: f64) -> CapCensus {
    let lambda = partition.lambda;
    let delta = partition.delta;
    let threshold = factor / 4.0 * c0_threshold(delta, partition.cap_length);
    let ld = lambda * delta;
    let mut c0_caps = 0u64;
    let mut c0_points = 0u64;
    let mut s_counts: BTreeMap<u32, u64> = BTreeMap::new();
    let mut sm_counts: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for cap in &partition.caps {
        let n = cap.points.len() as u64;
        if n == 0 {
            continue;
        }
        if (n as f64) <= threshold {
            c0_caps += 1;
            c0_points += n;
            continue;
        }
        let s = cap.s_class.expect("nonempty cap has an s-class");
        *s_counts.entry(s).or_insert(0) += 1;
        if cap.collinear {
            if let Some(m) = cap.m_class {
                *sm_counts.entry((s, m)).or_insert(0) += 1;
            }
        }
    }
    let s_classes = s_counts
        .iter()
        .map(|(&s, &count)| SClassRow {
            s,
            count,
            ratio: count as f64 * 4f64.powi(s as i32) / ld,
        })
        .collect();
    let sm_classes = sm_counts
        .iter()
        .map(|(&(s, m), &count)| SmClassRow {
            s,
            m,
            count,
            ratio: count as f64 * 2f64.powi(s as i32 - m as i32) / ld.sqrt(),
        })
        .collect();
    CapCensus {
        lambda,
        delta,
        scale: partition.cap_length,
        c0_caps,
        c0_points,
        threshold,
        s_classes,
        sm_classes,
        total_points: partition.total_points as u64,
    }
}

/// Rigorous upper bound for the area of a sector cap's convex hull: the
/// between-radii sector plus the inner-chord sliver. Three non-collinear
/// lattice points span area ≥ 1/2, so a bound below 1/2 forces collinearity.
pub fn hull_area_bound(lambda: f64, delta: f64, n_caps: usize) -> f64 {
    let w = std::f64::consts::TAU / n_caps as f64;
    let sector = 2.0 * lambda * delta * w;
    let sliver = 0.5 * (w - w.sin()) * (lambda + delta) * (lambda + delta);
    sector + sliver
}

/// Eccentricity-regime classification of a multi-point cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtaRegime {
    /// Single lattice point.
    Single,
    /// Line-to-tangent angle well above the cap eccentricity.
    Steep,
    /// Angle between the big-cap and small-cap eccentricities.
    Intermediate,
    /// Angle below the big-cap eccentricity.
    Shallow,
}

/// One multi-point cap row of the regime census.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaRow {
    pub index: usize,
    pub count: usize,
    pub s_class: u32,
    pub m_class: u32,
    pub alpha: f64,
    pub regime: EtaRegime,
}

/// Census of the short caps of length `δ⁻¹/100`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaCensus {
    pub lambda: f64,
    pub delta: f64,
    pub scale: f64,
    pub n_caps: usize,
    pub total_points: u64,
    /// Caps holding exactly one lattice point.
    pub single_caps: u64,
    pub steep_caps: u64,
    pub intermediate_caps: u64,
    pub shallow_caps: u64,
    pub multi_caps: u64,
    /// Multi-point caps failing collinearity or equal spacing. Always zero
    /// while `structure_forced` holds.
    pub violations: u64,
    /// δ ≥ λ^{-1/3}, the recommended regime.
    pub in_regime: bool,
    /// Hull-area bound below 1/2: collinearity is geometrically forced and
    /// violations raise an integrity error instead of being counted.
    pub structure_forced: bool,
    pub hull_area: f64,
    /// Fixed regime cutoffs: Steep needs α > steep_cutoff, Shallow needs
    /// α < shallow_cutoff.
    pub steep_cutoff: f64,
    pub shallow_cutoff: f64,
    pub rows: Vec<EtaRow>,
}

/// Partition the annulus at scale `δ⁻¹/100` and classify every multi-point
/// cap by its line-to-tangent angle α: steep (α ≫ ecc(η), factor 10),
/// intermediate, or shallow (α below ecc(τ)/10 with ecc(τ) = (δ/λ)^{1/2}).
///
/// While the hull-area bound sits below 1/2 (always, in the recommended
/// regime δ ≥ λ^{-1/3}), multi-point caps are asserted to be collinear with
/// equal spacing; a failure is an integrity error.
pub fn eta_regime_census(set: &LatticeSet) -> Result<EtaCensus> {
    let lambda = set
        .source()
        .lambda()
        .ok_or_else(|| Error::argument("eta census requires a set with a known lambda"))?;
    let delta = set
        .source()
        .delta()
        .ok_or_else(|| Error::argument("eta census requires a set with a known delta"))?;
    let scale = (1.0 / delta) / 100.0;
    if scale > std::f64::consts::TAU * lambda {
        return Err(Error::argument(format!(
            "eta scale {scale} exceeds the circumference; delta is too small for this lambda"
        )));
    }
    let part = partition(set, scale)?;
    let in_regime = delta >= lambda.powf(-1.0 / 3.0);
    let hull_area = hull_area_bound(lambda, delta, part.n_caps);
    let structure_forced = hull_area < 0.499_999;
    let ecc_eta = delta / scale;
    let ecc_tau = (delta / lambda).sqrt();
    let steep_cutoff = 10.0 * ecc_eta;
    let shallow_cutoff = ecc_tau / 10.0;

    let mut single = 0u64;
    let mut steep = 0u64;
    let mut inter = 0u64;
    let mut shallow = 0u64;
    let mut multi = 0u64;
    let mut violations = 0u64;
    let mut rows = Vec::new();
    for cap in &part.caps {
        match cap.points.len() {
            0 => {}
            1 => single += 1,
            n => {
                multi += 1;
                if !(cap.collinear && cap.equal_spacing) {
                    if structure_forced {
                        return Err(Error::integrity(format!(
                            "cap {} holds {} points that are not collinear with equal spacing \
                             although the hull-area bound {hull_area:.6} < 1/2 forces it",
                            cap.index, n
                        )));
                    }
                    violations += 1;
                    continue;
                }
                let alpha = cap.alpha.expect("collinear multi-point cap has alpha");
                let regime = if alpha > steep_cutoff {
                    steep += 1;
                    EtaRegime::Steep
                } else if alpha >= shallow_cutoff {
                    inter += 1;
                    EtaRegime::Intermediate
                } else {
                    shallow += 1;
                    EtaRegime::Shallow
                };
                rows.push(EtaRow {
                    index: cap.index,
                    count: n,
                    s_class: cap.s_class.unwrap(),
                    m_class: cap.m_class.unwrap(),
                    alpha,
                    regime,
                });
            }
        }
    }
    Ok(EtaCensus {
        lambda,
        delta,
        scale,
        n_caps: part.n_caps,
        total_points: set.len() as u64,
        single_caps: single,
        steep_caps: steep,
        intermediate_caps: inter,
        shallow_caps: shallow,
        multi_caps: multi,
        violations,
        in_regime,
        structure_forced,
        hull_area,
        steep_cutoff,
        shallow_cutoff,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_annulus, AnnulusSpec, SetSource};

    fn annulus(lambda: f64, delta: f64) -> LatticeSet {
        enumerate_annulus(&AnnulusSpec::new(lambda, delta).unwrap()).unwrap()
    }

    #[test]
    fn partition_cap_count() {
        // ⌈2π√10⌉ = 20 caps at the canonical scale for λ=5, δ=0.5.
        let set = annulus(5.0, 0.5);
        let scale = (5.0f64 * 0.5).sqrt();
        let part = partition(&set, scale).unwrap();
        assert_eq!(part.n_caps, 20);
        assert_eq!(part.caps.iter().map(|c| c.points.len()).sum::<usize>(), 28);
    }

    #[test]
    fn partition_empty_set() {
        let set = LatticeSet::from_points(
            vec![],
            SetSource::Annulus(AnnulusSpec::new(4.6, 0.01).unwrap()),
        )
        .unwrap();
        let part = partition(&set, 1.0).unwrap();
        assert!(part.caps.iter().all(|c| c.points.is_empty()));
    }

    #[test]
    fn tight_circle_caps_are_singletons() {
        // The 12 points of x²+y²=25 have pairwise angular gaps exceeding the
        // canonical sector width at δ=0.01.
        let set = annulus(5.0, 0.01);
        let part = partition(&set, (5.0f64 * 0.01).sqrt()).unwrap();
        for cap in &part.caps {
            assert!(cap.points.len() <= 1);
        }
        assert_eq!(part.caps.iter().filter(|c| c.points.len() == 1).count(), 12);
    }

    #[test]
    fn classify_examples() {
        let two = classify(0, (0.0, 0.1), vec![IntPoint::new(3, 4), IntPoint::new(4, 3)]);
        assert!(two.collinear);
        assert_eq!(two.direction, Some((1, -1)));
        assert_eq!(two.m_class, Some(0));

        let three = classify(
            0,
            (0.0, 0.5),
            vec![IntPoint::new(0, 5), IntPoint::new(3, 4), IntPoint::new(4, 3)],
        );
        assert!(!three.collinear);

        let spaced = classify(
            0,
            (0.0, 0.1),
            vec![IntPoint::new(0, 0), IntPoint::new(2, 2), IntPoint::new(4, 4)],
        );
        assert!(spaced.collinear && spaced.equal_spacing);
        assert_eq!(spaced.direction, Some((1, 1)));
        // gap = 2√2, m = ⌊log₂ 2.83⌋ = 1.
        assert_eq!(spaced.m_class, Some(1));

        let uneven = classify(
            0,
            (0.0, 0.1),
            vec![IntPoint::new(0, 0), IntPoint::new(1, 1), IntPoint::new(4, 4)],
        );
        assert!(uneven.collinear && !uneven.equal_spacing);
    }

    #[test]
    fn boundary_point_joins_lower_sector() {
        // (0, 5) sits at angle π/2. With 4 sectors of width π/2 it lands
        // exactly on the boundary between sectors 0 and 1 and must join 0.
        let set = annulus(5.0, 0.5);
        let part = partition(&set, std::f64::consts::TAU * 5.0 / 4.0).unwrap();
        assert_eq!(part.n_caps, 4);
        let cap0 = &part.caps[0];
        assert!(cap0.points.contains(&IntPoint::new(0, 5)));
        assert!(!part.caps[1].points.contains(&IntPoint::new(0, 5)));
    }

    #[test]
    fn census_conserves_points() {
        let set = annulus(5.0, 0.5);
        let part = partition(&set, (5.0f64 * 0.5).sqrt()).unwrap();
        let c = census(&part);
        let class_points: u64 = part
            .caps
            .iter()
            .filter(|cap| cap.points.len() as f64 > c.threshold)
            .map(|cap| cap.points.len() as u64)
            .sum();
        assert_eq!(class_points + c.c0_points, 28);
    }

    #[test]
    fn census_all_empty() {
        let set = LatticeSet::from_points(
            vec![],
            SetSource::Annulus(AnnulusSpec::new(4.6, 0.01).unwrap()),
        )
        .unwrap();
        let part = partition(&set, 0.5).unwrap();
        let c = census(&part);
        assert_eq!(c.c0_caps, 0);
        assert!(c.s_classes.is_empty());
        assert_eq!(c.total_points, 0);
    }

    #[test]
    fn eta_census_small() {
        // λ = 64, δ = 64^{-1/3} = 0.25: scale = 4/100 · 1/δ = 0.04·4 = wait,
        // scale = (1/0.25)/100 = 0.04; n_caps ≈ 2π·64/0.04 ≈ 10053.
        let set = annulus(64.0, 0.25);
        let census = eta_regime_census(&set).unwrap();
        assert!(census.in_regime);
        assert!(census.structure_forced);
        assert_eq!(census.violations, 0);
        assert_eq!(
            census.single_caps + census.rows.iter().map(|_| 1).sum::<u64>(),
            census.single_caps + census.multi_caps
        );
        // Conservation: singles + multi-cap points = total.
        let multi_points: u64 = census.rows.iter().map(|r| r.count as u64).sum();
        assert_eq!(census.single_caps + multi_points, census.total_points);
    }

    #[test]
    fn eta_census_no_multi_caps_means_zero_regime_counts() {
        let set = annulus(5.0, 0.4);
        // δ⁻¹/100 = 0.025: sector count huge, every cap ≤ 1 point here.
        let census = eta_regime_census(&set).unwrap();
        if census.multi_caps == 0 {
            assert_eq!(census.steep_caps + census.intermediate_caps + census.shallow_caps, 0);
        }
    }

    #[test]
    fn conservation_across_scales() {
        let set = annulus(41.0, 0.6);
        for scale in [0.3, 1.0, 3.0, 10.0, 40.0] {
            let part = partition(&set, scale).unwrap();
            let total: usize = part.caps.iter().map(|c| c.points.len()).sum();
            assert_eq!(total, set.len(), "scale {scale}");
        }
    }
}
