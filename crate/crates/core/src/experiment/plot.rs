//! Deterministic SVG charts with CSV twins.
//!
//! The SVG text depends only on the input data: fixed canvas sizes, a
//! fixed palette, fixed decimal formatting and no generated ids, so two
//! runs over the same results produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{write_file, ExperimentError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlotError {
    #[error("nothing to plot: {0}")]
    NoData(String),
    #[error("{kind:?} plots cannot hold {panel} panels")]
    WrongPanel { kind: PlotKind, panel: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    MetricVsVigilance,
    ClusterCount,
    CompositionBars,
    CvBars,
}

impl PlotKind {
    fn name(self) -> &'static str {
        match self {
            Self::MetricVsVigilance => "metric_vs_vigilance",
            Self::ClusterCount => "cluster_count",
            Self::CompositionBars => "composition_bars",
            Self::CvBars => "cv_bars",
        }
    }
}

/// One line, optionally with a symmetric confidence band.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Half-widths aligned with `points`.
    pub ci: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Panel {
    Lines {
        title: String,
        x_label: String,
        y_label: String,
        series: Vec<Series>,
        /// Horizontal dashed lines `(label, y)`.
        references: Vec<(String, f64)>,
    },
    /// One bar per category; `layers[l].1[c]` is the height of layer `l` in
    /// category `c`.
    StackedBars {
        title: String,
        categories: Vec<String>,
        layers: Vec<(String, Vec<f64>)>,
    },
    /// Side-by-side bars; same data layout as `StackedBars`.
    GroupedBars {
        title: String,
        categories: Vec<String>,
        groups: Vec<(String, Vec<f64>)>,
    },
}

impl Panel {
    fn variant(&self) -> &'static str {
        match self {
            Self::Lines { .. } => "line",
            Self::StackedBars { .. } => "stacked-bar",
            Self::GroupedBars { .. } => "grouped-bar",
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            Self::Lines { series, .. } => series.iter().all(|s| s.points.is_empty()),
            Self::StackedBars { categories, layers: g, .. }
            | Self::GroupedBars { categories, groups: g, .. } => categories.is_empty() || g.is_empty(),
        }
    }
}

/// SVG document and its CSV data twin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plot {
    pub svg: String,
    pub csv: String,
}

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 340.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 56.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn csv_field(s: &str) -> String {
    crate::eval::report::csv_field(s)
}

/// Fixed-precision number for SVG coordinates.
fn n(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s.is_empty() {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Axis range with a little headroom; degenerate ranges are widened.
fn range(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        let pad = if lo.abs() < 1e-12 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

struct Frame {
    top: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn left(&self) -> f64 {
        MARGIN_LEFT
    }
    fn right(&self) -> f64 {
        WIDTH - MARGIN_RIGHT
    }
    fn plot_top(&self) -> f64 {
        self.top + MARGIN_TOP
    }
    fn bottom(&self) -> f64 {
        self.top + PANEL_HEIGHT - MARGIN_BOTTOM
    }
    fn sx(&self, x: f64) -> f64 {
        self.left() + (x - self.x0) / (self.x1 - self.x0) * (self.right() - self.left())
    }
    fn sy(&self, y: f64) -> f64 {
        self.bottom() - (y - self.y0) / (self.y1 - self.y0) * (self.bottom() - self.plot_top())
    }

    fn axes(&self, svg: &mut String, title: &str, x_label: &str, y_label: &str, x_ticks: bool) {
        let (l, r, t, b) = (self.left(), self.right(), self.plot_top(), self.bottom());
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
            n((l + r) / 2.0),
            n(self.top + 22.0),
            esc(title)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
            n(l),
            n(t),
            n(r - l),
            n(b - t)
        );
        for i in 0..=4 {
            let v = self.y0 + (self.y1 - self.y0) * i as f64 / 4.0;
            let y = self.sy(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end" font-size="10">{}</text>"##,
                n(l),
                n(r),
                n(l - 4.0),
                n(y + 3.0),
                tick_label(v),
                y = n(y)
            );
        }
        if x_ticks {
            for i in 0..=5 {
                let v = self.x0 + (self.x1 - self.x0) * i as f64 / 5.0;
                let x = self.sx(v);
                let _ = writeln!(
                    svg,
                    r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#333"/><text x="{x}" y="{}" text-anchor="middle" font-size="10">{}</text>"##,
                    n(b),
                    n(b + 4.0),
                    n(b + 16.0),
                    tick_label(v),
                    x = n(x)
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
            n((l + r) / 2.0),
            n(b + 36.0),
            esc(x_label)
        );
        let cy = (t + b) / 2.0;
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{cy}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {cy})">{}</text>"#,
            esc(y_label),
            cy = n(cy)
        );
    }

    fn legend(&self, svg: &mut String, row: usize, label: &str, col: &str, dashed: bool) {
        let x = self.right() + 12.0;
        let y = self.plot_top() + 8.0 + 16.0 * row as f64;
        let dash = if dashed { r#" stroke-dasharray="6 3""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{col}" stroke-width="2"{dash}/><text x="{}" y="{}" font-size="11">{}</text>"#,
            n(x),
            n(y),
            n(x + 18.0),
            n(y),
            n(x + 24.0),
            n(y + 4.0),
            esc(label)
        );
    }
}

fn lines_panel(
    svg: &mut String,
    top: f64,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    references: &[(String, f64)],
) {
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for (i, &(x, y)) in s.points.iter().enumerate() {
            if !y.is_finite() {
                continue;
            }
            let h = s.ci.as_ref().map_or(0.0, |c| if c[i].is_finite() { c[i] } else { 0.0 });
            xs = (xs.0.min(x), xs.1.max(x));
            ys = (ys.0.min(y - h), ys.1.max(y + h));
        }
    }
    for &(_, y) in references {
        if y.is_finite() {
            ys = (ys.0.min(y), ys.1.max(y));
        }
    }
    let (x0, x1) = range(xs.0, xs.1);
    let (y0, y1) = range(ys.0, ys.1);
    let f = Frame { top, x0, x1, y0, y1 };
    f.axes(svg, title, x_label, y_label, true);

    for (si, s) in series.iter().enumerate() {
        let col = color(si);
        let pts: Vec<(f64, f64, f64)> = s
            .points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.1.is_finite())
            .map(|(i, &(x, y))| {
                let h = s.ci.as_ref().map_or(0.0, |c| if c[i].is_finite() { c[i] } else { 0.0 });
                (x, y, h)
            })
            .collect();
        if s.ci.is_some() && pts.len() > 1 {
            let upper = pts.iter().map(|&(x, y, h)| format!("{},{}", n(f.sx(x)), n(f.sy(y + h))));
            let lower = pts.iter().rev().map(|&(x, y, h)| format!("{},{}", n(f.sx(x)), n(f.sy(y - h))));
            let poly: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(
                svg,
                r#"<polygon points="{}" fill="{col}" fill-opacity="0.18" stroke="none"/>"#,
                poly.join(" ")
            );
        }
        if pts.len() > 1 {
            let line: Vec<String> = pts.iter().map(|&(x, y, _)| format!("{},{}", n(f.sx(x)), n(f.sy(y)))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{col}" stroke-width="1.5"/>"#,
                line.join(" ")
            );
        }
        for &(x, y, _) in &pts {
            let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="2.5" fill="{col}"/>"#, n(f.sx(x)), n(f.sy(y)));
        }
        f.legend(svg, si, &s.name, col, false);
    }
    for (ri, (label, y)) in references.iter().enumerate() {
        if !y.is_finite() {
            continue;
        }
        let col = color(series.len() + ri);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{col}" stroke-width="1.5" stroke-dasharray="6 3"/>"#,
            n(f.left()),
            n(f.right()),
            y = n(f.sy(*y))
        );
        f.legend(svg, series.len() + ri, label, col, true);
    }
}

fn bars_panel(
    svg: &mut String,
    top: f64,
    title: &str,
    categories: &[String],
    layers: &[(String, Vec<f64>)],
    stacked: bool,
) {
    let value = |l: usize, c: usize| layers[l].1.get(c).copied().filter(|v| v.is_finite()).unwrap_or(0.0);
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for c in 0..categories.len() {
        if stacked {
            hi = hi.max((0..layers.len()).map(|l| value(l, c)).sum());
        } else {
            for l in 0..layers.len() {
                hi = hi.max(value(l, c));
                lo = lo.min(value(l, c));
            }
        }
    }
    let (y0, y1) = if hi - lo < 1e-12 { (lo, lo + 1.0) } else { (lo, hi + (hi - lo) * 0.05) };
    let f = Frame {
        top,
        x0: 0.0,
        x1: categories.len() as f64,
        y0,
        y1,
    };
    f.axes(svg, title, "", "", false);
    let slot = (f.right() - f.left()) / categories.len() as f64;
    let bar_w = slot * 0.8;
    for (c, name) in categories.iter().enumerate() {
        let x_slot = f.left() + slot * c as f64 + slot * 0.1;
        let mut base = 0.0;
        for l in 0..layers.len() {
            let v = value(l, c);
            let (x, w, from, to) = if stacked {
                let r = (x_slot, bar_w, base, base + v);
                base += v;
                r
            } else {
                let w = bar_w / layers.len() as f64;
                (x_slot + w * l as f64, w, 0.0f64.max(y0), v)
            };
            let (ya, yb) = (f.sy(from.max(to)), f.sy(from.min(to)));
            if yb - ya <= 0.0 {
                continue;
            }
            let _ = writeln!(
                svg,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                n(x),
                n(ya),
                n(w),
                n(yb - ya),
                color(l)
            );
        }
        let cx = f.left() + slot * (c as f64 + 0.5);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="10">{}</text>"#,
            n(cx),
            n(f.bottom() + 14.0),
            esc(name)
        );
    }
    for (l, (label, _)) in layers.iter().enumerate() {
        f.legend(svg, l, label, color(l), false);
    }
}

fn check_kind(kind: PlotKind, panel: &Panel) -> Result<(), PlotError> {
    let ok = matches!(
        (kind, panel),
        (PlotKind::MetricVsVigilance | PlotKind::ClusterCount, Panel::Lines { .. })
            | (PlotKind::CompositionBars, Panel::StackedBars { .. })
            | (PlotKind::CvBars, Panel::GroupedBars { .. })
    );
    if ok {
        Ok(())
    } else {
        Err(PlotError::WrongPanel {
            kind,
            panel: panel.variant(),
        })
    }
}

fn csv_twin(panels: &[Panel]) -> String {
    let mut csv = String::from("panel,type,series,x,y,ci\n");
    for (p, panel) in panels.iter().enumerate() {
        match panel {
            Panel::Lines { series, references, .. } => {
                for s in series {
                    for (i, &(x, y)) in s.points.iter().enumerate() {
                        let ci = s.ci.as_ref().map(|c| c[i].to_string()).unwrap_or_default();
                        let _ = writeln!(csv, "{p},line,{},{x},{y},{ci}", csv_field(&s.name));
                    }
                }
                for (label, y) in references {
                    let _ = writeln!(csv, "{p},reference,{},,{y},", csv_field(label));
                }
            }
            Panel::StackedBars { categories, layers: g, .. } | Panel::GroupedBars { categories, groups: g, .. } => {
                for (label, values) in g {
                    for (c, v) in categories.iter().zip(values) {
                        let _ = writeln!(csv, "{p},bar,{},{},{v},", csv_field(label), csv_field(c));
                    }
                }
            }
        }
    }
    csv
}

/// Renders `panels` stacked vertically into one SVG.
pub fn emit_plot(kind: PlotKind, panels: &[Panel]) -> Result<Plot, PlotError> {
    if panels.is_empty() {
        return Err(PlotError::NoData("no panels".into()));
    }
    for p in panels {
        check_kind(kind, p)?;
        if p.is_empty() {
            return Err(PlotError::NoData(format!("empty {} panel", p.variant())));
        }
    }
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" data-kind="{}">"#,
        kind.name(),
        w = WIDTH,
        h = height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        let top = PANEL_HEIGHT * i as f64;
        match p {
            Panel::Lines {
                title,
                x_label,
                y_label,
                series,
                references,
            } => lines_panel(&mut svg, top, title, x_label, y_label, series, references),
            Panel::StackedBars {
                title,
                categories,
                layers,
            } => bars_panel(&mut svg, top, title, categories, layers, true),
            Panel::GroupedBars {
                title,
                categories,
                groups,
            } => bars_panel(&mut svg, top, title, categories, groups, false),
        }
    }
    svg.push_str("</svg>\n");
    Ok(Plot {
        svg,
        csv: csv_twin(panels),
    })
}

/// Writes `<stem>.svg` and its twin `<stem>_plot.csv` into `dir`.
pub fn write_plot(dir: &Path, stem: &str, kind: PlotKind, panels: &[Panel]) -> Result<(), ExperimentError> {
    let plot = emit_plot(kind, panels)?;
    write_file(&dir.join(format!("{stem}.svg")), plot.svg)?;
    write_file(&dir.join(format!("{stem}_plot.csv")), plot.csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: Vec<(f64, f64)>) -> Panel {
        Panel::Lines {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                name: "s".into(),
                points,
                ci: None,
            }],
            references: vec![],
        }
    }

    #[test]
    fn one_point_gives_one_marker() {
        let p = emit_plot(PlotKind::MetricVsVigilance, &[line(vec![(0.1, 0.5)])]).unwrap();
        assert_eq!(p.svg.matches("<circle").count(), 1);
        assert!(p.svg.starts_with("<svg") && p.svg.ends_with("</svg>\n"));
        assert_eq!(p.csv, "panel,type,series,x,y,ci\n0,line,s,0.1,0.5,\n");
    }

    #[test]
    fn deterministic() {
        let panels = vec![
            line(vec![(0.0, 0.2), (0.1, 0.9), (0.2, 0.4)]),
            Panel::Lines {
                title: "k".into(),
                x_label: "v".into(),
                y_label: "n".into(),
                series: vec![Series {
                    name: "clusters".into(),
                    points: vec![(0.0, 1.0), (0.1, 4.0)],
                    ci: Some(vec![0.0, 0.5]),
                }],
                references: vec![("attested".into(), 3.0)],
            },
        ];
        let a = emit_plot(PlotKind::MetricVsVigilance, &panels).unwrap();
        let b = emit_plot(PlotKind::MetricVsVigilance, &panels).unwrap();
        assert_eq!(a, b);
        assert!(a.svg.contains("stroke-dasharray"));
    }

    #[test]
    fn empty_and_mismatched() {
        assert!(matches!(emit_plot(PlotKind::CvBars, &[]), Err(PlotError::NoData(_))));
        assert!(matches!(
            emit_plot(PlotKind::MetricVsVigilance, &[line(vec![])]),
            Err(PlotError::NoData(_))
        ));
        assert!(matches!(
            emit_plot(PlotKind::CvBars, &[line(vec![(0.0, 0.0)])]),
            Err(PlotError::WrongPanel { .. })
        ));
    }

    #[test]
    fn bars_render() {
        let stacked = Panel::StackedBars {
            title: "c".into(),
            categories: vec!["a".into(), "b".into()],
            layers: vec![("I".into(), vec![3.0, 1.0]), ("II".into(), vec![0.0, 2.0])],
        };
        let p = emit_plot(PlotKind::CompositionBars, &[stacked]).unwrap();
        // the zero-height segment is skipped
        assert_eq!(p.svg.matches("<rect x=").count(), 1 + 3);
    }
}
