//! SVG scatter plots of a `front.csv`, one panel per objective pair.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct FrontRow {
    pub index: usize,
    pub objectives: Vec<f64>,
    pub violation: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontTable {
    pub objective_names: Vec<String>,
    pub rows: Vec<FrontRow>,
}

impl FrontTable {
    /// Parses `index,<objectives...>,violation,feasible,genotype`.
    pub fn parse(csv: &str) -> Result<Self, String> {
        let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or("empty front table")?.split(',').map(str::trim).collect();
        let n = header.len();
        if n < 6 || header[0] != "index" || header[n - 3] != "violation" || header[n - 2] != "feasible" {
            return Err(format!("unexpected front header {header:?}"));
        }
        let objective_names: Vec<String> = header[1..n - 3].iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (line_no, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != n {
                return Err(format!("row {}: expected {n} fields, got {}", line_no + 1, fields.len()));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| format!("row {}: {s:?}: {e}", line_no + 1));
            rows.push(FrontRow {
                index: fields[0].parse().map_err(|e| format!("row {}: {e}", line_no + 1))?,
                objectives: fields[1..n - 3].iter().map(|s| num(s)).collect::<Result<_, _>>()?,
                violation: num(fields[n - 3])?,
                feasible: fields[n - 2].parse().map_err(|e| format!("row {}: {e}", line_no + 1))?,
            });
        }
        Ok(Self { objective_names, rows })
    }
}

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 16.0;
const MARGIN_B: f64 = 48.0;
const TICKS: usize = 5;

/// Closed axis range covering every value, padded by 5%.
pub fn axis_range(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.into_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5_f64.max(0.05 * lo.abs()) };
    (lo - pad, hi + pad)
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{:.4}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn panel(svg: &mut String, table: &FrontTable, i: usize, j: usize, offset_x: f64) {
    let (x0, x1) = axis_range(table.rows.iter().map(|r| r.objectives[i]));
    let (y0, y1) = axis_range(table.rows.iter().map(|r| r.objectives[j]));
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let left = offset_x + MARGIN_L;
    let sx = |v: f64| left + (v - x0) / (x1 - x0) * plot_w;
    let sy = |v: f64| MARGIN_T + plot_h - (v - y0) / (y1 - y0) * plot_h;

    writeln!(
        svg,
        r##"<g class="panel" data-x="{}" data-y="{}" data-xmin="{x0}" data-xmax="{x1}" data-ymin="{y0}" data-ymax="{y1}">"##,
        escape(&table.objective_names[i]),
        escape(&table.objective_names[j])
    )
    .ok();
    writeln!(svg, r##"<rect x="{left}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##).ok();
    for t in 0..TICKS {
        let f = t as f64 / (TICKS - 1) as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        let bottom = MARGIN_T + plot_h;
        writeln!(svg, r##"<line x1="{px}" y1="{bottom}" x2="{px}" y2="{}" stroke="#444"/>"##, bottom + 4.0).ok();
        writeln!(svg, r##"<text x="{px}" y="{}" font-size="10" text-anchor="middle">{}</text>"##, bottom + 16.0, label(xv)).ok();
        writeln!(svg, r##"<line x1="{}" y1="{py}" x2="{left}" y2="{py}" stroke="#444"/>"##, left - 4.0).ok();
        writeln!(svg, r##"<text x="{}" y="{}" font-size="10" text-anchor="end">{}</text>"##, left - 6.0, py + 3.0, label(yv)).ok();
    }
    writeln!(
        svg,
        r##"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"##,
        left + plot_w / 2.0,
        PANEL_H - 10.0,
        escape(&table.objective_names[i])
    )
    .ok();
    writeln!(
        svg,
        r##"<text x="{}" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"##,
        offset_x + 14.0,
        MARGIN_T + plot_h / 2.0,
        offset_x + 14.0,
        MARGIN_T + plot_h / 2.0,
        escape(&table.objective_names[j])
    )
    .ok();
    for r in &table.rows {
        let (fill, stroke) = if r.feasible { ("#1f77b4", "#1f77b4") } else { ("none", "#d62728") };
        writeln!(
            svg,
            r##"<circle cx="{}" cy="{}" r="3" fill="{fill}" stroke="{stroke}"><title>#{} ({}, {})</title></circle>"##,
            sx(r.objectives[i]),
            sy(r.objectives[j]),
            r.index,
            r.objectives[i],
            r.objectives[j]
        )
        .ok();
    }
    svg.push_str("</g>\n");
}

/// Scatter of every objective pair, side by side. Feasible points are
/// filled, infeasible ones hollow.
pub fn render_svg(table: &FrontTable) -> String {
    let n = table.objective_names.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let width = PANEL_W * pairs.len().max(1) as f64;
    let mut svg = format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif">
<rect width="100%" height="100%" fill="white"/>
"##
    );
    for (k, &(i, j)) in pairs.iter().enumerate() {
        panel(&mut svg, table, i, j, k as f64 * PANEL_W);
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn plot_file(front_csv: &std::path::Path, out_svg: &std::path::Path) -> Result<(), crate::CliError> {
    let text = std::fs::read_to_string(front_csv)?;
    let table = FrontTable::parse(&text).map_err(crate::CliError::config)?;
    std::fs::write(out_svg, render_svg(&table))?;
    Ok(())
}
