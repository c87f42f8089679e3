//! Deterministic text encodings: CSV and JSON for lattice sets, censuses,
//! sweeps, and bound reports.
//!
//! All writers emit bytes that are a pure function of their input (fixed
//! field orders, fixed float formatting via Rust's shortest-roundtrip `{}`).

use std::io::Write;

use crate::analysis::SweepRow;
use crate::caps::{CapCensus, EtaCensus, EtaRegime};
use crate::dyadic::BoundReport;
use crate::lattice::{IntPoint, LatticeSet, SetSource};
use crate::{Error, Result};

/// CSV with header `x,y`, one sorted point per row.
pub fn write_lattice_csv<W: Write>(set: &LatticeSet, mut w: W) -> std::io::Result<()> {
    writeln!(w, "x,y")?;
    for p in set.points() {
        writeln!(w, "{},{}", p.x, p.y)?;
    }
    Ok(())
}

/// JSON array of `[x, y]` pairs.
pub fn write_lattice_json<W: Write>(set: &LatticeSet, mut w: W) -> std::io::Result<()> {
    let pairs: Vec<[i64; 2]> = set.points().iter().map(|p| [p.x, p.y]).collect();
    let text = serde_json::to_string(&pairs).expect("serializing integer pairs cannot fail");
    w.write_all(text.as_bytes())?;
    writeln!(w)
}

/// Parse the `x,y` CSV back into a set (source recorded as derived).
pub fn parse_lattice_csv(text: &str) -> Result<LatticeSet> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "x,y" => {}
        other => {
            return Err(Error::argument(format!(
                "expected header 'x,y', got {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::argument(format!("line {} is not 'x,y'", i + 2)))?;
        let x = a
            .trim()
            .parse::<i64>()
            .map_err(|e| Error::argument(format!("line {}: {e}", i + 2)))?;
        let y = b
            .trim()
            .parse::<i64>()
            .map_err(|e| Error::argument(format!("line {}: {e}", i + 2)))?;
        points.push(IntPoint::new(x, y));
    }
    LatticeSet::from_points(points, SetSource::Derived)
}

/// Parse the JSON pair-array form.
pub fn parse_lattice_json(text: &str) -> Result<LatticeSet> {
    let pairs: Vec<[i64; 2]> = serde_json::from_str(text)
        .map_err(|e| Error::argument(format!("invalid lattice JSON: {e}")))?;
    LatticeSet::from_points(
        pairs.into_iter().map(|[x, y]| IntPoint::new(x, y)).collect(),
        SetSource::Derived,
    )
}

/// Census CSV: rows `(scale, s, m, regime, count, ratio)`. The s-classes come
/// first (empty m and regime), then the (s, m) classes, then the C₀ line.
pub fn write_census_csv<W: Write>(census: &CapCensus, mut w: W) -> std::io::Result<()> {
    writeln!(w, "scale,s,m,regime,count,ratio")?;
    for r in &census.s_classes {
        writeln!(w, "{},{},,,{},{}", census.scale, r.s, r.count, r.ratio)?;
    }
    for r in &census.sm_classes {
        writeln!(w, "{},{},{},,{},{}", census.scale, r.s, r.m, r.count, r.ratio)?;
    }
    writeln!(w, "{},,,c0,{},", census.scale, census.c0_caps)?;
    Ok(())
}

fn regime_name(r: EtaRegime) -> &'static str {
    match r {
        EtaRegime::Single => "single",
        EtaRegime::Steep => "steep",
        EtaRegime::Intermediate => "intermediate",
        EtaRegime::Shallow => "shallow",
    }
}

/// Eta-census CSV: per-regime summary rows followed by one row per
/// multi-point cap.
pub fn write_eta_csv<W: Write>(census: &EtaCensus, mut w: W) -> std::io::Result<()> {
    writeln!(w, "scale,s,m,regime,count,ratio")?;
    writeln!(w, "{},,,single,{},", census.scale, census.single_caps)?;
    writeln!(w, "{},,,steep,{},", census.scale, census.steep_caps)?;
    writeln!(w, "{},,,intermediate,{},", census.scale, census.intermediate_caps)?;
    writeln!(w, "{},,,shallow,{},", census.scale, census.shallow_caps)?;
    for row in &census.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            census.scale,
            row.s_class,
            row.m_class,
            regime_name(row.regime),
            row.count,
            row.alpha
        )?;
    }
    Ok(())
}

/// Sweep CSV: `(lambda, delta, p, quantity, value, method, error)`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "lambda,delta,p,quantity,value,method,error")?;
    for r in rows {
        let p = r.p.map(|v| v.to_string()).unwrap_or_default();
        let value = r.value.map(|v| v.to_string()).unwrap_or_default();
        let error = r.error.clone().unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.lambda, r.delta, p, r.quantity, value, r.method, error
        )?;
    }
    Ok(())
}

/// Exponential-sum bound report CSV:
/// `(M, emp_sup, envelope, trivial, muller, ratio_trivial, ratio_muller)`.
pub fn write_bound_csv<W: Write>(report: &BoundReport, mut w: W) -> std::io::Result<()> {
    writeln!(w, "M,emp_sup,envelope,trivial,muller,ratio_trivial,ratio_muller")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.m_level,
            r.emp_sup,
            r.envelope,
            r.trivial_bound,
            r.muller_bound,
            r.ratio_trivial,
            r.ratio_muller
        )?;
    }
    Ok(())
}
