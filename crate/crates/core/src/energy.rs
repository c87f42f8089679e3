//! Exact additive energies of planar lattice sets via sumset multiplicity
//! counting.
//!
//! `r_j(v)` counts ordered j-tuples summing to `v`; the j-th energy is
//! `Σ_v r_j(v)²` as an exact 128-bit integer. Three interchangeable paths
//! (hash, dense accumulation, FFT convolution) must agree exactly; the FFT
//! path verifies its rounded output mass and falls back to dense on any
//! mismatch, so correctness never rests on floating point.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::kernel::{self, FourierSupport};
use crate::lattice::LatticeSet;
use crate::{Error, Result};

/// Hard precondition on the set size.
pub const MAX_SET_SIZE: usize = 100_000;

/// Dense-path cell-count contract.
pub const MAX_DENSE_CELLS: u64 = 1 << 30;

/// Multiply-xor hasher for packed lattice vectors; the default SipHash is
/// needlessly slow inside the convolution loops.
#[derive(Default)]
pub struct VecHasher {
    state: u64,
}

impl Hasher for VecHasher {
    fn finish(&self) -> u64 {
        self.state
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.state = (self.state ^ b as u64).wrapping_mul(0x100000001b3);
        }
    }
    fn write_u64(&mut self, v: u64) {
        self.state = (self.state ^ v).wrapping_mul(0x9e3779b97f4a7c15);
        self.state ^= self.state >> 29;
    }
    fn write_i64(&mut self, v: i64) {
        self.write_u64(v as u64);
    }
    fn write_usize(&mut self, v: usize) {
        self.write_u64(v as u64);
    }
    fn write_u8(&mut self, v: u8) {
        self.write_u64(v as u64);
    }
    fn write_u32(&mut self, v: u32) {
        self.write_u64(v as u64);
    }
}

type VecMap = HashMap<(i64, i64), u64, BuildHasherDefault<VecHasher>>;

/// Multiplicity function r_j of ordered j-fold sums.
#[derive(Debug, Clone)]
pub struct SumsetCounts {
    pub order: u8,
    /// Sparse multiplicities, always materialized in sorted order on demand.
    map: VecMap,
    pub total_mass: u128,
}

impl SumsetCounts {
    pub fn support_size(&self) -> u64 {
        self.map.len() as u64
    }

    pub fn get(&self, v: (i64, i64)) -> u64 {
        self.map.get(&v).copied().unwrap_or(0)
    }

    /// Entries sorted by vector, for deterministic output.
    pub fn sorted_entries(&self) -> Vec<((i64, i64), u64)> {
        let mut v: Vec<_> = self.map.iter().map(|(&k, &c)| (k, c)).collect();
        v.sort_unstable();
        v
    }

    fn energy(&self) -> u128 {
        self.map.values().map(|&c| (c as u128) * (c as u128)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyMethod {
    #[serde(rename = "hash")]
    Hash,
    #[serde(rename = "dense-convolution")]
    DenseConvolution,
    #[serde(rename = "transform-convolution")]
    TransformConvolution,
}

impl std::fmt::Display for EnergyMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EnergyMethod::Hash => "hash",
            EnergyMethod::DenseConvolution => "dense-convolution",
            EnergyMethod::TransformConvolution => "transform-convolution",
        };
        f.write_str(s)
    }
}

/// Exact additive energy with provenance and normalized diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    pub m: u8,
    #[serde(serialize_with = "ser_u128", deserialize_with = "de_u128")]
    pub energy: u128,
    pub set_size: u64,
    pub method: EnergyMethod,
    /// Whether the transform path had to fall back to dense accumulation.
    pub transform_fallback: bool,
    pub support_size: u64,
    /// energy / P^m (≥ 1 by the diagonal bound).
    pub diagonal_ratio: f64,
    /// energy · |supp r_m| / P^{2m} (≥ 1 by Cauchy-Schwarz).
    pub cauchy_schwarz_ratio: f64,
    /// energy / P^{7/2}, reported for m = 3 only.
    pub bb_ratio: Option<f64>,
}

fn ser_u128<S: serde::Serializer>(v: &u128, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn de_u128<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<u128, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn check_size(set: &LatticeSet) -> Result<()> {
    if set.len() > MAX_SET_SIZE {
        return Err(Error::capacity(format!(
            "set size {} exceeds the energy-module cap {MAX_SET_SIZE}",
            set.len()
        )));
    }
    Ok(())
}

fn coord_radius(set: &LatticeSet) -> i64 {
    set.max_coord()
}

/// Sparse r_j by direct accumulation (j = 1, 2) and sparse convolution
/// (j = 3).
fn sumset_hash(set: &LatticeSet, j: u8) -> SumsetCounts {
    let pts = set.points();
    let mut map: VecMap = VecMap::default();
    match j {
        1 => {
            for p in pts {
                *map.entry((p.x, p.y)).or_insert(0) += 1;
            }
        }
        2 => {
            map.reserve(pts.len() * 2);
            for a in pts {
                for b in pts {
                    *map.entry((a.x + b.x, a.y + b.y)).or_insert(0) += 1;
                }
            }
        }
        3 => {
            let r2 = sumset_hash(set, 2);
            map.reserve(r2.map.len() * 2);
            for a in pts {
                for (&(vx, vy), &c) in &r2.map {
                    *map.entry((vx + a.x, vy + a.y)).or_insert(0) += c;
                }
            }
        }
        _ => unreachable!("order must be 1, 2, or 3"),
    }
    let total_mass = map.values().map(|&c| c as u128).sum();
    SumsetCounts { order: j, map, total_mass }
}

/// Dense accumulation over the box [-jR, jR]².
struct DenseGrid {
    radius: i64,
    width: usize,
    cells: Vec<u64>,
}

impl DenseGrid {
    fn new(radius: i64) -> Result<Self> {
        let width = (2 * radius + 1) as u64;
        if width * width > MAX_DENSE_CELLS {
            return Err(Error::capacity(format!(
                "dense grid of {width}×{width} cells exceeds the cap {MAX_DENSE_CELLS}"
            )));
        }
        Ok(DenseGrid {
            radius,
            width: width as usize,
            cells: vec![0u64; (width * width) as usize],
        })
    }

    #[inline]
    fn idx(&self, x: i64, y: i64) -> usize {
        ((x + self.radius) as usize) * self.width + (y + self.radius) as usize
    }

    fn to_sparse(&self, order: u8) -> SumsetCounts {
        let mut map: VecMap = VecMap::default();
        let mut total: u128 = 0;
        for (i, &c) in self.cells.iter().enumerate() {
            if c > 0 {
                let x = (i / self.width) as i64 - self.radius;
                let y = (i % self.width) as i64 - self.radius;
                map.insert((x, y), c);
                total += c as u128;
            }
        }
        SumsetCounts { order, map, total_mass: total }
    }
}

fn sumset_dense(set: &LatticeSet, j: u8) -> Result<SumsetCounts> {
    let r = coord_radius(set).max(1);
    let pts = set.points();
    match j {
        1 => {
            let mut g = DenseGrid::new(r)?;
            for p in pts {
                let i = g.idx(p.x, p.y);
                g.cells[i] += 1;
            }
            Ok(g.to_sparse(1))
        }
        2 => {
            let mut g = DenseGrid::new(2 * r)?;
            for a in pts {
                for b in pts {
                    let i = g.idx(a.x + b.x, a.y + b.y);
                    g.cells[i] += 1;
                }
            }
            Ok(g.to_sparse(2))
        }
        3 => {
            let mut g2 = DenseGrid::new(2 * r)?;
            for a in pts {
                for b in pts {
                    let i = g2.idx(a.x + b.x, a.y + b.y);
                    g2.cells[i] += 1;
                }
            }
            // Nonzero column span per row of r₂, so the shifted adds skip the
            // empty frame of the box.
            let w2 = g2.width;
            let row_span: Vec<Option<(usize, usize)>> = (0..w2)
                .map(|row| {
                    let cells = &g2.cells[row * w2..(row + 1) * w2];
                    let lo = cells.iter().position(|&c| c > 0)?;
                    let hi = cells.iter().rposition(|&c| c > 0)?;
                    Some((lo, hi))
                })
                .collect();
            let mut g3 = DenseGrid::new(3 * r)?;
            let w3 = g3.width;
            for a in pts {
                for (row, span) in row_span.iter().enumerate() {
                    let Some((lo, hi)) = span else { continue };
                    // r₂ row index `row` covers x = row - 2r; target x+a.x has
                    // dense-3 row index row + a.x + r.
                    let trow = (row as i64 + a.x + r) as usize;
                    let tcol = (*lo as i64 + a.y + r) as usize;
                    let src = &g2.cells[row * w2 + lo..=row * w2 + hi];
                    let dst = &mut g3.cells[trow * w3 + tcol..trow * w3 + tcol + src.len()];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += s;
                    }
                }
            }
            Ok(g3.to_sparse(3))
        }
        _ => unreachable!(),
    }
}

/// FFT convolution path. Returns Err(Integrity) when the rounded output fails
/// the exact mass check; callers fall back to the dense path.
fn sumset_transform(set: &LatticeSet, j: u8) -> Result<SumsetCounts> {
    let r = coord_radius(set).max(1);
    let span = (2 * (j as i64) * r + 2) as usize;
    let n = span.next_power_of_two();
    if (n as u64) * (n as u64) > MAX_DENSE_CELLS {
        return Err(Error::capacity(format!(
            "transform grid {n}×{n} exceeds the cap {MAX_DENSE_CELLS}"
        )));
    }
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for p in set.points() {
        let ix = (p.x + r) as usize;
        let iy = (p.y + r) as usize;
        data[ix * n + iy] += Complex64::new(1.0, 0.0);
    }
    let fwd = FftPlanner::new().plan_fft(n, FftDirection::Forward);
    let inv = FftPlanner::new().plan_fft(n, FftDirection::Inverse);
    let mut scratch = vec![
        Complex64::new(0.0, 0.0);
        fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())
    ];
    let transpose = |d: &mut [Complex64]| {
        for i in 0..n {
            for k in (i + 1)..n {
                d.swap(i * n + k, k * n + i);
            }
        }
    };
    for row in data.chunks_exact_mut(n) {
        fwd.process_with_scratch(row, &mut scratch);
    }
    transpose(&mut data);
    for row in data.chunks_exact_mut(n) {
        fwd.process_with_scratch(row, &mut scratch);
    }
    transpose(&mut data);
    for z in data.iter_mut() {
        *z = z.powu(j as u32);
    }
    for row in data.chunks_exact_mut(n) {
        inv.process_with_scratch(row, &mut scratch);
    }
    transpose(&mut data);
    for row in data.chunks_exact_mut(n) {
        inv.process_with_scratch(row, &mut scratch);
    }
    transpose(&mut data);

    let scale = 1.0 / ((n * n) as f64);
    let mut map: VecMap = VecMap::default();
    let mut total: u128 = 0;
    for (i, z) in data.iter().enumerate() {
        let v = z.re * scale;
        let c = v.round();
        if c < -0.25 {
            return Err(Error::integrity(format!(
                "transform convolution produced a negative count {v}"
            )));
        }
        if (v - c).abs() > 0.25 {
            return Err(Error::integrity(format!(
                "transform convolution value {v} is not close to an integer"
            )));
        }
        if c >= 0.5 {
            // Input offset +r per factor: sums v sit at v + j·r.
            let x = (i / n) as i64 - (j as i64) * r;
            let y = (i % n) as i64 - (j as i64) * r;
            map.insert((x, y), c as u64);
            total += c as u128;
        }
    }
    let p = set.len() as u128;
    let expected = p.pow(j as u32);
    if total != expected {
        return Err(Error::integrity(format!(
            "transform convolution mass {total} differs from P^{j} = {expected}"
        )));
    }
    Ok(SumsetCounts { order: j, map, total_mass: total })
}

/// Multiplicities of ordered j-fold sums. Method chosen by predicted work;
/// the transform path self-verifies and falls back to dense accumulation.
pub fn sumset_counts(set: &LatticeSet, j: u8) -> Result<SumsetCounts> {
    let (c, _, _) = sumset_counts_with_method(set, j, None)?;
    Ok(c)
}

/// As [`sumset_counts`] with an optional forced method. Returns the counts,
/// the method actually used, and whether a transform fallback occurred.
pub fn sumset_counts_with_method(
    set: &LatticeSet,
    j: u8,
    method: Option<EnergyMethod>,
) -> Result<(SumsetCounts, EnergyMethod, bool)> {
    if !(1..=3).contains(&j) {
        return Err(Error::argument(format!("sumset order must be 1, 2, or 3, got {j}")));
    }
    check_size(set)?;
    let p = set.len() as u64;
    let r = coord_radius(set).max(1) as u64;
    let chosen = method.unwrap_or_else(|| {
        let cells = (2 * (j as u64) * r + 1).pow(2);
        // Sparse-to-dense crossover at 5% expected load of the dense box.
        let expected_support = (p.pow((j as u32).min(2)) as u128).min(cells as u128);
        if j == 3 {
            let fft_n = ((6 * r + 2) as usize).next_power_of_two() as u64;
            if fft_n * fft_n <= (1 << 26) && p > 64 {
                EnergyMethod::TransformConvolution
            } else if expected_support * 20 >= cells as u128 && cells <= MAX_DENSE_CELLS {
                EnergyMethod::DenseConvolution
            } else {
                EnergyMethod::Hash
            }
        } else if expected_support * 20 >= cells as u128 && cells <= MAX_DENSE_CELLS {
            EnergyMethod::DenseConvolution
        } else {
            EnergyMethod::Hash
        }
    });
    match chosen {
        EnergyMethod::Hash => Ok((sumset_hash(set, j), EnergyMethod::Hash, false)),
        EnergyMethod::DenseConvolution => {
            Ok((sumset_dense(set, j)?, EnergyMethod::DenseConvolution, false))
        }
        EnergyMethod::TransformConvolution => match sumset_transform(set, j) {
            Ok(c) => Ok((c, EnergyMethod::TransformConvolution, false)),
            Err(Error::Integrity(_)) => {
                Ok((sumset_dense(set, j)?, EnergyMethod::DenseConvolution, true))
            }
            Err(e) => Err(e),
        },
    }
}

/// Exact m-th additive energy `Σ_v r_m(v)²`.
pub fn additive_energy(set: &LatticeSet, m: u8) -> Result<EnergyReport> {
    additive_energy_with_method(set, m, None)
}

pub fn additive_energy_with_method(
    set: &LatticeSet,
    m: u8,
    method: Option<EnergyMethod>,
) -> Result<EnergyReport> {
    if m != 2 && m != 3 {
        return Err(Error::argument(format!("energy order must be 2 or 3, got {m}")));
    }
    let (counts, used, fallback) = sumset_counts_with_method(set, m, method)?;
    let energy = counts.energy();
    let p = set.len() as u128;
    let pm = p.pow(m as u32);
    let support = counts.support_size();
    let diagonal_ratio = if pm > 0 { energy as f64 / pm as f64 } else { 0.0 };
    let cs_ratio = if pm > 0 && support > 0 {
        energy as f64 * support as f64 / (pm as f64 * pm as f64)
    } else {
        0.0
    };
    let bb_ratio = if m == 3 && p > 0 {
        Some(energy as f64 / (p as f64).powf(3.5))
    } else {
        None
    };
    Ok(EnergyReport {
        m,
        energy,
        set_size: set.len() as u64,
        method: used,
        transform_fallback: fallback,
        support_size: support,
        diagonal_ratio,
        cauchy_schwarz_ratio: cs_ratio,
        bb_ratio,
    })
}

/// Consistency record of the even-p identity `E_{p/2} = ‖Φ‖_p^p` for the
/// all-ones polynomial on the set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrosscheckRecord {
    pub p: f64,
    #[serde(serialize_with = "ser_u128", deserialize_with = "de_u128")]
    pub energy: u128,
    pub quadrature_pth_power: f64,
    pub rel_diff: f64,
    pub error_estimate: f64,
    pub within_estimate: bool,
}

/// Compare the exact energy against the kernel module's quadrature
/// `‖Φ‖_p^p` at the given oversampling.
pub fn energy_lp_crosscheck(
    set: &LatticeSet,
    p: u8,
    oversampling: f64,
) -> Result<CrosscheckRecord> {
    if p != 4 && p != 6 {
        return Err(Error::argument(format!("crosscheck requires p in {{4, 6}}, got {p}")));
    }
    let m = p / 2;
    let report = additive_energy(set, m)?;
    let support = FourierSupport::all_ones(set);
    let norm = kernel::lp_norms_streaming(&support, &[p as f64], oversampling)?[0];
    let q = norm.value.powi(p as i32);
    let e = report.energy as f64;
    let rel_diff = if e > 0.0 { (e - q).abs() / e } else { q.abs() };
    Ok(CrosscheckRecord {
        p: p as f64,
        energy: report.energy,
        quadrature_pth_power: q,
        rel_diff,
        error_estimate: norm.error_estimate,
        within_estimate: (e - q).abs() <= norm.error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_annulus, AnnulusSpec, IntPoint, SetSource};

    fn set_of(points: Vec<(i64, i64)>) -> LatticeSet {
        LatticeSet::from_points(
            points.into_iter().map(|(x, y)| IntPoint::new(x, y)).collect(),
            SetSource::Derived,
        )
        .unwrap()
    }

    #[test]
    fn singleton_counts() {
        let s = set_of(vec![(2, -1)]);
        let r2 = sumset_counts(&s, 2).unwrap();
        assert_eq!(r2.total_mass, 1);
        assert_eq!(r2.get((4, -2)), 1);
        let e = additive_energy(&s, 2).unwrap();
        assert_eq!(e.energy, 1);
    }

    #[test]
    fn two_point_counts() {
        let s = set_of(vec![(0, 0), (1, 2)]);
        let r2 = sumset_counts(&s, 2).unwrap();
        assert_eq!(r2.total_mass, 4);
        assert_eq!(r2.get((0, 0)), 1);
        assert_eq!(r2.get((1, 2)), 2);
        assert_eq!(r2.get((2, 4)), 1);
        // 1² + 2² + 1² = 6 ordered quadruples.
        assert_eq!(additive_energy(&s, 2).unwrap().energy, 6);
    }

    #[test]
    fn circle_pair_counts() {
        let s = enumerate_annulus(&AnnulusSpec::new(5.0, 0.01).unwrap()).unwrap();
        assert_eq!(s.len(), 12);
        let r2 = sumset_counts(&s, 2).unwrap();
        assert_eq!(r2.total_mass, 144);
        // Every point pairs with its antipode.
        assert_eq!(r2.get((0, 0)), 12);
    }

    /// O(P⁵) oracle: count ordered sextuples by solving for the sixth point.
    fn e3_brute(set: &LatticeSet) -> u128 {
        let pts = set.points();
        let mut count: u128 = 0;
        for a in pts {
            for b in pts {
                for c in pts {
                    for d in pts {
                        for e in pts {
                            let fx = a.x + b.x + c.x - d.x - e.x;
                            let fy = a.y + b.y + c.y - d.y - e.y;
                            if set.contains(&IntPoint::new(fx, fy)) {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn circle_triple_energy_matches_brute_force() {
        let s = enumerate_annulus(&AnnulusSpec::new(5.0, 0.01).unwrap()).unwrap();
        let oracle = e3_brute(&s);
        let e = additive_energy(&s, 3).unwrap();
        assert_eq!(e.energy, oracle);
    }

    #[test]
    fn paths_agree_on_small_sets() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for trial in 0..12 {
            let n = 2 + (next() % 40) as usize;
            let mut pts = Vec::new();
            for _ in 0..n {
                pts.push(((next() % 41) as i64 - 20, (next() % 41) as i64 - 20));
            }
            let s = set_of(pts);
            for m in [2u8, 3] {
                let h = additive_energy_with_method(&s, m, Some(EnergyMethod::Hash)).unwrap();
                let d =
                    additive_energy_with_method(&s, m, Some(EnergyMethod::DenseConvolution))
                        .unwrap();
                let t = additive_energy_with_method(
                    &s,
                    m,
                    Some(EnergyMethod::TransformConvolution),
                )
                .unwrap();
                assert_eq!(h.energy, d.energy, "trial {trial} m {m}");
                assert_eq!(h.energy, t.energy, "trial {trial} m {m}");
            }
        }
    }

    #[test]
    fn mass_and_floors() {
        let s = set_of(vec![(0, 0), (3, 1), (-2, 2), (5, -4), (1, 1)]);
        let p = s.len() as u128;
        for m in [2u8, 3] {
            let counts = sumset_counts(&s, m).unwrap();
            assert_eq!(counts.total_mass, p.pow(m as u32));
            let e = additive_energy(&s, m).unwrap();
            assert!(e.energy >= p.pow(m as u32), "diagonal floor");
            let lhs = e.energy.checked_mul(e.support_size as u128);
            let rhs = p.pow(m as u32).pow(2);
            match lhs {
                Some(v) => assert!(v >= rhs, "Cauchy-Schwarz floor"),
                None => {} // overflow: the product certainly exceeds rhs
            }
        }
    }

    #[test]
    fn symmetry_under_negation() {
        let s = enumerate_annulus(&AnnulusSpec::new(6.5, 0.6).unwrap()).unwrap();
        let r2 = sumset_counts(&s, 2).unwrap();
        for (v, c) in r2.sorted_entries() {
            assert_eq!(r2.get((-v.0, -v.1)), c);
        }
    }

    #[test]
    fn crosscheck_small_cases() {
        let s = set_of(vec![(1, 0)]);
        let rec = energy_lp_crosscheck(&s, 4, 4.0).unwrap();
        assert_eq!(rec.energy, 1);
        assert!(rec.rel_diff < 1e-9);

        let s = set_of(vec![(1, 0), (0, 1)]);
        let rec = energy_lp_crosscheck(&s, 4, 4.0).unwrap();
        assert_eq!(rec.energy, 6);
        assert!(rec.rel_diff < 1e-9);
        assert!(rec.within_estimate);

        let s = enumerate_annulus(&AnnulusSpec::new(5.0, 0.5).unwrap()).unwrap();
        let rec = energy_lp_crosscheck(&s, 4, 4.0).unwrap();
        assert!(rec.rel_diff < 1e-3, "rel diff {}", rec.rel_diff);
        assert!(rec.within_estimate);
    }

    #[test]
    fn rejects_bad_orders() {
        let s = set_of(vec![(0, 0)]);
        assert!(sumset_counts(&s, 0).is_err());
        assert!(sumset_counts(&s, 4).is_err());
        assert!(additive_energy(&s, 1).is_err());
    }
}
