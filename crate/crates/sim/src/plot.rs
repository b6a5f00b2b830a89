//! Self-contained SVG line charts of sweep results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use subgroup_ofdm::estimators::Method;

use crate::harness::{AggregateRow, METHODS};

/// Lower clamp for log-scale axes, so zero error rates stay drawable.
pub const LOG_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mse,
    Ser,
    Throughput,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Mse, Metric::Ser, Metric::Throughput];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::Ser => "ser",
            Metric::Throughput => "throughput",
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Metric::Mse => "mean MSE",
            Metric::Ser => "mean SER",
            Metric::Throughput => "throughput (bits/tone)",
        }
    }

    pub fn log_scale(&self) -> bool {
        !matches!(self, Metric::Throughput)
    }

    fn value(&self, r: &AggregateRow) -> f64 {
        match self {
            Metric::Mse => r.mean_mse,
            Metric::Ser => r.mean_ser,
            Metric::Throughput => r.mean_throughput,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("no rows to plot")]
    Empty,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn colour(m: Method) -> &'static str {
    match m {
        Method::Ls => "#d62728",
        Method::Lmmse => "#1f77b4",
        Method::Subgroup => "#2ca02c",
    }
}

type Series = BTreeMap<Method, Vec<(f64, f64)>>;

/// Per-estimator `(snr, mean over rows)` points, sorted by SNR.
fn series(rows: &[&AggregateRow], metric: Metric) -> Series {
    let mut acc: BTreeMap<Method, Vec<(f64, f64, usize)>> = BTreeMap::new();
    for r in rows {
        let pts = acc.entry(r.estimator).or_default();
        let v = metric.value(r);
        match pts.iter_mut().find(|p| p.0 == r.snr_db) {
            Some(p) => {
                p.1 += v;
                p.2 += 1;
            }
            None => pts.push((r.snr_db, v, 1)),
        }
    }
    acc.into_iter()
        .map(|(m, mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (m, pts.into_iter().map(|(x, s, k)| (x, s / k as f64)).collect())
        })
        .collect()
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            lo = lo.max(LOG_FLOOR).log10().floor();
            hi = hi.max(LOG_FLOOR).log10().ceil();
            if hi <= lo {
                hi = lo + 1.0;
            }
        } else {
            lo = lo.min(0.0);
            if hi <= lo {
                hi = lo + 1.0;
            }
            hi += 0.05 * (hi - lo);
        }
        Axis { lo, hi, log }
    }

    fn x(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() || hi <= lo {
            let c = if lo.is_finite() { lo } else { 0.0 };
            (lo, hi) = (c - 1.0, c + 1.0);
        }
        Axis { lo, hi, log: false }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.max(LOG_FLOOR).log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            (self.lo as i32..=self.hi as i32)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect()
        } else {
            (0..=5)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 5.0;
                    (v, format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string())
                })
                .collect()
        }
    }
}

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

#[allow(clippy::too_many_arguments)]
fn panel(svg: &mut String, ox: f64, oy: f64, title: &str, data: &Series, metric: Metric, y: &Axis, x: &Axis) {
    let (pw, ph) = (PANEL_W - MARGIN_L - MARGIN_R, PANEL_H - MARGIN_T - MARGIN_B);
    let (x0, y0) = (ox + MARGIN_L, oy + MARGIN_T);
    let px = |v: f64| x0 + x.unit(v) * pw;
    let py = |v: f64| y0 + (1.0 - y.unit(v)) * ph;

    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{title}</text>"#,
        x0 + pw / 2.0,
        oy + 22.0
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{x0:.1}" y="{y0:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#333"/>"##
    );
    for (v, label) in y.ticks() {
        let yy = py(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{x0:.1}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{label}</text>"##,
            x0 + pw,
            x0 - 6.0,
            yy + 4.0
        );
    }
    let mut xs: Vec<f64> = data.values().flatten().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for v in xs {
        let xx = px(v);
        let _ = writeln!(
            svg,
            r#"<text x="{xx:.1}" y="{:.1}" text-anchor="middle" font-size="11">{v}</text>"#,
            y0 + ph + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">SNR (dB)</text>"#,
        x0 + pw / 2.0,
        y0 + ph + 36.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate({:.1},{:.1}) rotate(-90)" text-anchor="middle" font-size="12">{}</text>"#,
        ox + 16.0,
        y0 + ph / 2.0,
        metric.label()
    );

    for (&m, pts) in data {
        let path: Vec<String> = pts.iter().map(|&(a, b)| format!("{:.2},{:.2}", px(a), py(b))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            colour(m),
            path.join(" ")
        );
        for &(a, b) in pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                px(a),
                py(b),
                colour(m)
            );
        }
    }

    let mut ly = y0 + 12.0;
    for m in METHODS.iter().filter(|m| data.contains_key(m)) {
        let lx = x0 + pw - 90.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            lx + 20.0,
            colour(*m),
            lx + 25.0,
            ly + 4.0,
            m.as_str()
        );
        ly += 16.0;
    }
}

/// Renders one chart for `metric`. Rows are averaged over `d` unless
/// `facet` is set, in which case each `d` gets its own panel.
pub fn render_svg(rows: &[AggregateRow], metric: Metric, facet: bool) -> Result<String, PlotError> {
    if rows.is_empty() {
        return Err(PlotError::Empty);
    }
    let mut groups: Vec<(String, Vec<&AggregateRow>)> = Vec::new();
    if facet {
        let mut by_d: BTreeMap<usize, Vec<&AggregateRow>> = BTreeMap::new();
        for r in rows {
            by_d.entry(r.d).or_default().push(r);
        }
        groups.extend(by_d.into_iter().map(|(d, rs)| (format!("d = {d}"), rs)));
    } else {
        let mut ds: Vec<usize> = rows.iter().map(|r| r.d).collect();
        ds.sort_unstable();
        ds.dedup();
        let ds: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
        groups.push((format!("averaged over d = {}", ds.join(", ")), rows.iter().collect()));
    }
    let mut channels: Vec<&str> = rows.iter().map(|r| r.channel.as_str()).collect();
    channels.sort_unstable();
    channels.dedup();

    let data: Vec<(String, Series)> = groups
        .into_iter()
        .map(|(t, rs)| (t, series(&rs, metric)))
        .collect();
    let all_y = || data.iter().flat_map(|(_, s)| s.values().flatten().map(|p| p.1));
    let y = Axis::fit(all_y(), metric.log_scale());
    let x = Axis::x(rows.iter().map(|r| r.snr_db));
    let clamped = metric.log_scale() && all_y().any(|v| v < LOG_FLOOR);

    let cols = data.len().min(3);
    let nrows = data.len().div_ceil(cols);
    let header = 36.0;
    let footer = if clamped { 24.0 } else { 0.0 };
    let (w, h) = (PANEL_W * cols as f64, header + PANEL_H * nrows as f64 + footer);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="16">{} vs SNR, channel: {}</text>"#,
        w / 2.0,
        metric.label(),
        channels.join(", ")
    );
    for (i, (title, s)) in data.iter().enumerate() {
        let (c, r) = (i % cols, i / cols);
        panel(&mut svg, c as f64 * PANEL_W, header + r as f64 * PANEL_H, title, s, metric, &y, &x);
    }
    if clamped {
        let _ = writeln!(
            svg,
            r##"<text x="10" y="{:.1}" font-size="11" fill="#555">values below {LOG_FLOOR:e} are drawn at {LOG_FLOOR:e}</text>"##,
            h - 8.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(rows: &[AggregateRow], metric: Metric, facet: bool, path: &Path) -> Result<(), PlotError> {
    let svg = render_svg(rows, metric, facet)?;
    std::fs::write(path, svg).map_err(|source| PlotError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use subgroup_ofdm::config::ChannelKind;

    fn row(estimator: Method, d: usize, snr_db: f64, ser: f64) -> AggregateRow {
        AggregateRow {
            channel: ChannelKind::Tdl,
            estimator,
            d,
            snr_db,
            trials: 10,
            mean_mse: 0.1 / (1.0 + snr_db),
            stderr_mse: 0.0,
            mean_ser: ser,
            stderr_ser: 0.0,
            mean_ber: ser / 2.0,
            mean_throughput: 1.0 - ser,
            mean_chosen_d: None,
        }
    }

    fn grid() -> Vec<AggregateRow> {
        let mut rows = Vec::new();
        for d in [2, 8] {
            for snr in [0.0, 5.0, 10.0] {
                for m in METHODS {
                    rows.push(row(m, d, snr, if snr == 10.0 { 0.0 } else { 0.1 }));
                }
            }
        }
        rows
    }

    #[test]
    fn one_line_per_estimator() {
        let svg = render_svg(&grid(), Metric::Mse, false).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("1e-"));
        assert!(!svg.contains("are drawn at"));
    }

    #[test]
    fn facets_split_by_d() {
        let svg = render_svg(&grid(), Metric::Throughput, true).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 6);
        assert!(svg.contains("d = 2") && svg.contains("d = 8"));
    }

    #[test]
    fn zero_ser_is_clamped_and_annotated() {
        let svg = render_svg(&grid(), Metric::Ser, false).unwrap();
        assert!(svg.contains("are drawn at 1e-6"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn single_point_renders() {
        let svg = render_svg(&[row(Method::Ls, 2, 5.0, 0.0)], Metric::Ser, false).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(render_svg(&[], Metric::Mse, false), Err(PlotError::Empty)));
    }

    #[test]
    fn averaging_over_d() {
        let mut rows = grid();
        rows.retain(|r| r.estimator == Method::Ls && r.snr_db == 0.0);
        rows[0].mean_throughput = 0.0;
        rows[1].mean_throughput = 1.0;
        let s = series(&rows.iter().collect::<Vec<_>>(), Metric::Throughput);
        assert_eq!(s[&Method::Ls], vec![(0.0, 0.5)]);
    }
}
