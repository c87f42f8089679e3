//! Minimal deterministic SVG plotting: line/scatter series, reference slope
//! lines, linear or log-log axes. Identical input produces byte-identical
//! output (fixed palette, fixed coordinate formatting).

use annulus_lab::Error;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

const PALETTE: [&str; 6] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Markers only, no connecting line.
    pub scatter: bool,
}

/// A straight reference line `ln y = slope · ln x + intercept` on log-log
/// axes (or `y = slope·x + intercept` on linear axes).
#[derive(Debug, Clone)]
pub struct RefLine {
    pub slope: f64,
    pub intercept: f64,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub loglog: bool,
    pub series: Vec<Series>,
    pub ref_lines: Vec<RefLine>,
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{v:.2e}")
    }
}

/// Render the plot. On log-log axes every plotted value must be finite and
/// positive.
pub fn emit_svg(spec: &PlotSpec) -> Result<String, Error> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in &spec.series {
        for &(x, y) in &s.points {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::argument(format!(
                    "non-finite point ({x}, {y}) in series '{}'",
                    s.label
                )));
            }
            if spec.loglog && (x <= 0.0 || y <= 0.0) {
                return Err(Error::argument(format!(
                    "log-log axes require positive values, got ({x}, {y}) in '{}'",
                    s.label
                )));
            }
            xs.push(x);
            ys.push(y);
        }
    }
    let transform = |v: f64| if spec.loglog { v.ln() } else { v };
    let (x_lo, x_hi) = bounds(&xs, spec.loglog);
    let (y_lo, y_hi) = bounds(&ys, spec.loglog);
    let (tx_lo, tx_hi) = (transform(x_lo), transform(x_hi));
    let (ty_lo, ty_hi) = (transform(y_lo), transform(y_hi));
    let sx = (WIDTH - MARGIN_L - MARGIN_R) / (tx_hi - tx_lo).max(1e-12);
    let sy = (HEIGHT - MARGIN_T - MARGIN_B) / (ty_hi - ty_lo).max(1e-12);
    let px = |x: f64| MARGIN_L + (transform(x) - tx_lo) * sx;
    let py = |y: f64| HEIGHT - MARGIN_B - (transform(y) - ty_lo) * sy;
    let pxt = |tx: f64| MARGIN_L + (tx - tx_lo) * sx;
    let pyt = |ty: f64| HEIGHT - MARGIN_B - (ty - ty_lo) * sy;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>\n",
        fmt((WIDTH - MARGIN_R + MARGIN_L) / 2.0),
        xml_escape(&spec.title)
    ));

    // Axes box.
    out.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"black\" stroke-width=\"1\"/>\n",
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(WIDTH - MARGIN_L - MARGIN_R),
        fmt(HEIGHT - MARGIN_T - MARGIN_B)
    ));

    // Ticks.
    for (t, label) in ticks(x_lo, x_hi, spec.loglog) {
        let x = px(t);
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
            fmt(x),
            fmt(HEIGHT - MARGIN_B),
            fmt(HEIGHT - MARGIN_B + 5.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>\n",
            fmt(x),
            fmt(HEIGHT - MARGIN_B + 18.0),
            label
        ));
    }
    for (t, label) in ticks(y_lo, y_hi, spec.loglog) {
        let y = py(t);
        out.push_str(&format!(
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"black\"/>\n",
            fmt(y),
            fmt(MARGIN_L - 5.0),
            fmt(MARGIN_L)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>\n",
            fmt(MARGIN_L - 8.0),
            fmt(y + 4.0),
            label
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"middle\">{}</text>\n",
        fmt((WIDTH - MARGIN_R + MARGIN_L) / 2.0),
        fmt(HEIGHT - 16.0),
        xml_escape(&spec.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        fmt(HEIGHT / 2.0),
        fmt(HEIGHT / 2.0),
        xml_escape(&spec.y_label)
    ));

    // Reference lines span the x-range in transformed coordinates.
    for (i, line) in spec.ref_lines.iter().enumerate() {
        let ty_at = |tx: f64| line.slope * tx + line.intercept;
        let (a, b) = (tx_lo, tx_hi);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888888\" \
             stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n",
            fmt(pxt(a)),
            fmt(pyt(ty_at(a))),
            fmt(pxt(b)),
            fmt(pyt(ty_at(b)))
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" \
             fill=\"#555555\">{}</text>\n",
            fmt(WIDTH - MARGIN_R + 8.0),
            fmt(MARGIN_T + 16.0 * (spec.series.len() + i + 1) as f64),
            xml_escape(&line.label)
        ));
    }

    for (si, s) in spec.series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        if !s.scatter && s.points.len() > 1 {
            let pts: Vec<String> =
                s.points.iter().map(|&(x, y)| format!("{},{}", fmt(px(x)), fmt(py(y)))).collect();
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-width=\"1.5\"/>\n",
                pts.join(" ")
            ));
        }
        for &(x, y) in &s.points {
            out.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{color}\"/>\n",
                fmt(px(x)),
                fmt(py(y))
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" \
             fill=\"{color}\">{}</text>\n",
            fmt(WIDTH - MARGIN_R + 8.0),
            fmt(MARGIN_T + 16.0 * (si + 1) as f64),
            xml_escape(&s.label)
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(vals: &[f64], positive: bool) -> (f64, f64) {
    if vals.is_empty() {
        return if positive { (1.0, 10.0) } else { (0.0, 1.0) };
    }
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        if positive {
            (lo * 0.5, hi * 2.0)
        } else {
            (lo - 1.0, hi + 1.0)
        }
    } else {
        (lo, hi)
    }
}

fn ticks(lo: f64, hi: f64, loglog: bool) -> Vec<(f64, String)> {
    let mut out = Vec::new();
    if loglog {
        let e_lo = lo.log10().floor() as i32;
        let e_hi = hi.log10().ceil() as i32;
        let step = (((e_hi - e_lo) as usize / 8) + 1) as i32;
        let mut e = e_lo;
        while e <= e_hi {
            let v = 10f64.powi(e);
            if v >= lo * 0.999 && v <= hi * 1.001 {
                out.push((v, format!("1e{e}")));
            }
            e += step;
        }
        if out.is_empty() {
            out.push((lo, tick_label(lo)));
            out.push((hi, tick_label(hi)));
        }
    } else {
        let span = hi - lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|&s| span / s <= 6.0)
            .unwrap_or(mag * 10.0);
        let mut t = (lo / step).ceil() * step;
        while t <= hi + 1e-12 * span {
            out.push((t, tick_label(t)));
            t += step;
        }
    }
    out
}
