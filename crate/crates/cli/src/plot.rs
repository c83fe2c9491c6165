//! Static SVG charts: learning curves from `metrics.csv`, and an activation
//! heatmap and centre-of-mass path from trajectory records. Output depends
//! only on the input data, so identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use crate::traj::TrajRecord;
use crate::CliError;

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// Non-finite values break the line.
    pub points: Vec<(f64, f64)>,
}

/// A vertical annotation at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub x: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_step(range: f64) -> f64 {
    let raw = range / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f < 1.5 {
        1.0
    } else if f < 3.0 {
        2.0
    } else if f < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

/// Axis range widened to whole ticks, and the tick step.
fn axis(lo: f64, hi: f64) -> (f64, f64, f64) {
    let (lo, hi) = if hi - lo > 1e-12 {
        (lo, hi)
    } else {
        let pad = lo.abs().max(1.0) * 0.5;
        (lo - pad, hi + pad)
    };
    let step = nice_step(hi - lo);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{:.*}", decimals, v);
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

struct Frame {
    x: (f64, f64, f64),
    y: (f64, f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn header(svg: &mut String, title: &str) {
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title)).unwrap();
}

fn axes(svg: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    writeln!(svg, r##"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="#444"/>"##, x1 - x0, y1 - y0).unwrap();
    let mut v = f.x.0;
    while v <= f.x.1 + f.x.2 * 1e-9 {
        let px = f.px(v);
        writeln!(svg, r##"<line x1="{px:.2}" y1="{y1}" x2="{px:.2}" y2="{:.2}" stroke="#444"/>"##, y1 + 5.0).unwrap();
        writeln!(svg, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y1 + 18.0, tick_label(v, f.x.2)).unwrap();
        v += f.x.2;
    }
    let mut v = f.y.0;
    while v <= f.y.1 + f.y.2 * 1e-9 {
        let py = f.py(v);
        writeln!(svg, r##"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="#444"/>"##, x0 - 5.0).unwrap();
        writeln!(svg, r##"<line x1="{x0}" y1="{py:.2}" x2="{x1}" y2="{py:.2}" stroke="#ddd"/>"##).unwrap();
        writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, py + 4.0, tick_label(v, f.y.2)).unwrap();
        v += f.y.2;
    }
    writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(x_label)).unwrap();
    writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    )
    .unwrap();
}

impl LineChart {
    pub fn to_svg(&self) -> String {
        let finite = || self.series.iter().flat_map(|s| &s.points).filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in finite() {
            xlo = xlo.min(x);
            xhi = xhi.max(x);
            ylo = ylo.min(y);
            yhi = yhi.max(y);
        }
        if !xlo.is_finite() {
            (xlo, xhi, ylo, yhi) = (0.0, 1.0, 0.0, 1.0);
        }
        let f = Frame {
            x: axis(xlo, xhi),
            y: axis(ylo, yhi),
        };
        let mut svg = String::new();
        header(&mut svg, &self.title);
        axes(&mut svg, &f, &self.x_label, &self.y_label);
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mut run: Vec<String> = Vec::new();
            let flush = |run: &mut Vec<String>, svg: &mut String| {
                if !run.is_empty() {
                    writeln!(
                        svg,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                        run.join(" ")
                    )
                    .unwrap();
                    run.clear();
                }
            };
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    run.push(format!("{:.2},{:.2}", f.px(x), f.py(y)));
                } else {
                    flush(&mut run, &mut svg);
                }
            }
            flush(&mut run, &mut svg);
            if self.series.len() > 1 {
                let ly = TOP + 16.0 + 16.0 * i as f64;
                let lx = W - RIGHT - 150.0;
                writeln!(svg, r#"<line x1="{lx}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#, ly - 4.0, lx + 20.0, ly - 4.0).unwrap();
                writeln!(svg, r#"<text x="{}" y="{ly:.2}">{}</text>"#, lx + 26.0, escape(&s.label)).unwrap();
            }
        }
        for m in &self.markers {
            let px = f.px(m.x);
            writeln!(
                svg,
                r##"<line class="marker" x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{}" stroke="#555" stroke-dasharray="6 4"/>"##,
                H - BOTTOM
            )
            .unwrap();
            writeln!(svg, r#"<text class="marker-label" x="{:.2}" y="{:.2}">{}</text>"#, px + 4.0, TOP + 14.0, escape(&m.label)).unwrap();
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Columns of `metrics.csv` used for plotting.
pub const METRIC_COLUMNS: [&str; 7] = ["iteration", "stage", "mean_return", "max_return", "mean_length", "mean_met", "mean_cot"];

/// Reads the plotted columns by name.
pub fn read_metric_columns(path: &Path) -> Result<BTreeMap<&'static str, Vec<f64>>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let headers = rdr.headers().map_err(|e| CliError::csv(path, e))?.clone();
    if headers.is_empty() {
        return Err(CliError::NoData {
            path: path.to_path_buf(),
            what: "metrics file is empty: no header and no data rows".into(),
        });
    }
    let idx: Vec<Option<usize>> = METRIC_COLUMNS.iter().map(|c| headers.iter().position(|h| h == *c)).collect();
    let missing: Vec<String> = METRIC_COLUMNS
        .iter()
        .zip(&idx)
        .filter(|(_, i)| i.is_none())
        .map(|(c, _)| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::MissingColumns {
            path: path.to_path_buf(),
            names: missing,
        });
    }
    let mut cols: BTreeMap<&'static str, Vec<f64>> = METRIC_COLUMNS.iter().map(|c| (*c, Vec::new())).collect();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::csv(path, e))?;
        for (c, i) in METRIC_COLUMNS.iter().zip(&idx) {
            let raw = rec.get(i.unwrap()).unwrap_or("");
            let v = raw.trim().parse::<f64>().map_err(|_| CliError::NoData {
                path: path.to_path_buf(),
                what: format!("column {c} has non-numeric value '{raw}'"),
            })?;
            cols.get_mut(c).unwrap().push(v);
        }
    }
    if cols["iteration"].is_empty() {
        return Err(CliError::NoData {
            path: path.to_path_buf(),
            what: "metrics file has a header but no data rows".into(),
        });
    }
    Ok(cols)
}

/// First iteration run in stage 2 after a stage-1 iteration.
pub fn stage_switch(iteration: &[f64], stage: &[f64]) -> Option<f64> {
    stage.windows(2).position(|w| w[0] == 1.0 && w[1] == 2.0).map(|i| iteration[i + 1])
}

/// `(file name, SVG)` pairs for the metrics charts.
pub fn metrics_charts(cols: &BTreeMap<&'static str, Vec<f64>>) -> Vec<(&'static str, String)> {
    let it = &cols["iteration"];
    let series = |label: &str, key: &str| Series {
        label: label.into(),
        points: it.iter().copied().zip(cols[key].iter().copied()).collect(),
    };
    let markers: Vec<Marker> = stage_switch(it, &cols["stage"])
        .map(|x| Marker {
            x,
            label: format!("stage 2 from iteration {x}"),
        })
        .into_iter()
        .collect();
    let chart = |title: &str, y: &str, s: Vec<Series>| LineChart {
        title: title.into(),
        x_label: "iteration".into(),
        y_label: y.into(),
        series: s,
        markers: markers.clone(),
    };
    vec![
        (
            "learning_curve.svg",
            chart("Episode return", "return", vec![series("mean", "mean_return"), series("max", "max_return")]).to_svg(),
        ),
        ("met.svg", chart("Mean MET", "MET (W/kg)", vec![series("MET", "mean_met")]).to_svg()),
        ("cot.svg", chart("Cost of transport", "CoT", vec![series("CoT", "mean_cot")]).to_svg()),
        (
            "episode_length.svg",
            chart("Episode length", "control steps", vec![series("length", "mean_length")]).to_svg(),
        ),
    ]
}

/// Muscle activations of one episode over time, one row per muscle.
pub fn activation_heatmap(records: &[TrajRecord], episode: usize) -> String {
    let recs: Vec<&TrajRecord> = records.iter().filter(|r| r.episode == episode).collect();
    let mut svg = String::new();
    header(&mut svg, &format!("Muscle activation, episode {episode}"));
    let n_m = recs.first().map_or(0, |r| r.activations.len());
    let t_max = recs.last().map_or(1.0, |r| r.t).max(1e-9);
    let f = Frame {
        x: axis(0.0, t_max),
        y: axis(0.0, n_m.max(1) as f64),
    };
    axes(&mut svg, &f, "time (s)", "muscle index");
    if n_m > 0 {
        let cols = recs.len();
        let w = (f.px(t_max) - f.px(0.0)) / cols as f64;
        let h = (f.py(0.0) - f.py(n_m as f64)) / n_m as f64;
        for (c, r) in recs.iter().enumerate() {
            for (m, &a) in r.activations.iter().enumerate() {
                let a = a.clamp(0.0, 1.0);
                let shade = |lo: f64, hi: f64| (lo + (hi - lo) * a).round() as u8;
                writeln!(
                    svg,
                    r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#{:02x}{:02x}{:02x}"/>"##,
                    f.px(0.0) + c as f64 * w,
                    f.py((m + 1) as f64),
                    w + 0.05,
                    h + 0.05,
                    shade(255.0, 8.0),
                    shade(255.0, 48.0),
                    shade(255.0, 107.0)
                )
                .unwrap();
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Side view (forward vs height) of the centre-of-mass path, one line per episode.
pub fn com_path(records: &[TrajRecord]) -> String {
    let mut by_ep: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        by_ep.entry(r.episode).or_default().push((r.com[0], r.com[1]));
    }
    LineChart {
        title: "Centre-of-mass path".into(),
        x_label: "forward x (m)".into(),
        y_label: "height y (m)".into(),
        series: by_ep
            .into_iter()
            .map(|(e, points)| Series {
                label: format!("episode {e}"),
                points,
            })
            .collect(),
        markers: Vec::new(),
    }
    .to_svg()
}

/// Writes each `(name, svg)` into `dir` and returns the paths.
pub fn write_all(dir: &Path, files: Vec<(String, String)>) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    files
        .into_iter()
        .map(|(name, svg)| {
            let p = dir.join(name);
            std::fs::write(&p, svg).map_err(|e| CliError::io(&p, e))?;
            Ok(p)
        })
        .collect()
}
