//! Minimal SVG line charts of a metric against a sweep axis.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("column {missing:?} not found; available: {}", available.join(", "))]
    MissingColumn { missing: String, available: Vec<String> },
    #[error("row {row}: {column} = {value:?} is not a number")]
    BadNumber { row: usize, column: String, value: String },
    #[error("no data rows")]
    Empty,
}

/// Horizontal axis of a plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    Nodes,
    Failures,
}

impl XAxis {
    fn column(self) -> &'static str {
        match self {
            XAxis::Nodes => "n_nodes",
            XAxis::Failures => "failure_pct",
        }
    }

    fn label(self) -> &'static str {
        match self {
            XAxis::Nodes => "number of nodes",
            XAxis::Failures => "failed nodes (%)",
        }
    }
}

/// Mean and sample standard deviation at one x value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Per-protocol series, protocols and x values in ascending order.
pub fn aggregate(csv_text: &str, metric: &str, x: XAxis) -> Result<BTreeMap<String, Vec<Point2>>, PlotError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv_text.as_bytes());
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PlotError::MissingColumn { missing: name.to_string(), available: headers.clone() })
    };
    let (mi, xi, pi) = (col(metric)?, col(x.column())?, col("protocol")?);
    let mut groups: BTreeMap<String, BTreeMap<u64, (f64, Vec<f64>)>> = BTreeMap::new();
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        rows += 1;
        let num = |idx: usize| {
            let v = rec.get(idx).unwrap_or("");
            v.parse::<f64>().map_err(|_| PlotError::BadNumber {
                row: i + 1,
                column: headers[idx].clone(),
                value: v.to_string(),
            })
        };
        let xv = num(xi)?;
        let slot = groups.entry(rec.get(pi).unwrap_or("").to_string()).or_default();
        let entry = slot.entry(xv.to_bits()).or_insert((xv, Vec::new()));
        // absent values do not enter the mean
        if rec.get(mi) != Some("NA") {
            entry.1.push(num(mi)?);
        }
    }
    if rows == 0 {
        return Err(PlotError::Empty);
    }
    Ok(groups
        .into_iter()
        .map(|(proto, by_x)| {
            let mut pts: Vec<Point2> = by_x
                .into_values()
                .filter(|(_, v)| !v.is_empty())
                .map(|(x, v)| {
                    let n = v.len();
                    let mean = v.iter().sum::<f64>() / n as f64;
                    let var =
                        if n > 1 { v.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
                    Point2 { x, mean, std: var.sqrt(), n }
                })
                .collect();
            pts.sort_by(|a, b| a.x.total_cmp(&b.x));
            (proto, pts)
        })
        .collect())
}

/// Unit shown next to a metric column name.
pub fn metric_unit(metric: &str) -> &'static str {
    match metric {
        m if m.ends_with("_j") => "J",
        m if m.ends_with("_s") => "s",
        _ => "",
    }
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Renders mean lines with a ±1 standard deviation band per protocol.
pub fn render_svg(csv_text: &str, metric: &str, x: XAxis) -> Result<String, PlotError> {
    let series = aggregate(csv_text, metric, x)?;
    let (w, h, ml, mr, mt, mb) = (640.0, 420.0, 70.0, 130.0, 30.0, 55.0);
    let all: Vec<&Point2> = series.values().flatten().collect();
    let (mut x0, mut x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (mut y0, mut y1) =
        all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.mean - p.std), b.max(p.mean + p.std)));
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let pad = (y1 - y0) * 0.05;
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |v: f64| ml + (v - x0) / (x1 - x0) * (w - ml - mr);
    let sy = |v: f64| h - mb - (v - y0) / (y1 - y0) * (h - mt - mb);

    let mut s = String::new();
    let unit = metric_unit(metric);
    let ylabel = if unit.is_empty() { metric.to_string() } else { format!("{metric} ({unit})") };
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<path d="M{ml} {mt} V{} H{}" fill="none" stroke="black"/>"#, h - mb, w - mr);
    for i in 0..=4 {
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
            ml - 6.0,
            sy(fy) + 4.0,
            tick(fy)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            sx(fx),
            h - mb + 16.0,
            tick(fx)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
        (ml + w - mr) / 2.0,
        h - 12.0,
        x.label()
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0,
        ylabel
    );
    for (k, (proto, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        if pts.len() > 1 && pts.iter().any(|p| p.std > 0.0) {
            let upper: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.mean + p.std))).collect();
            let lower: Vec<String> =
                pts.iter().rev().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.mean - p.std))).collect();
            let _ = writeln!(
                s,
                r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                upper.join(" "),
                lower.join(" ")
            );
        }
        let line: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.mean))).collect();
        if pts.len() > 1 {
            let _ =
                writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        }
        for p in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(p.x), sy(p.mean));
        }
        let ly = mt + 18.0 * k as f64 + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            w - mr + 10.0,
            w - mr + 30.0
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="12">{proto}</text>"#, w - mr + 36.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.round() {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "# v\nprotocol,n_nodes,failure_pct,avg_energy_j\nproposed,50,0,1.0\nproposed,50,0,3.0\nbaseline,50,0,NA\nbaseline,100,0,2.0\n";

    #[test]
    fn means_and_stddev() {
        let g = aggregate(CSV, "avg_energy_j", XAxis::Nodes).unwrap();
        assert_eq!(g["proposed"], vec![Point2 { x: 50.0, mean: 2.0, std: 2f64.sqrt(), n: 2 }]);
        assert_eq!(g["baseline"].len(), 1);
    }

    #[test]
    fn missing_column_lists_available() {
        let e = aggregate(CSV, "nope", XAxis::Nodes).unwrap_err().to_string();
        assert!(e.contains("avg_energy_j"));
    }

    #[test]
    fn single_row_has_no_band() {
        let csv = "protocol,n_nodes,failure_pct,avg_energy_j\nproposed,50,0,1.5\n";
        let svg = render_svg(csv, "avg_energy_j", XAxis::Nodes).unwrap();
        assert!(!svg.contains("polygon"));
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg, render_svg(csv, "avg_energy_j", XAxis::Nodes).unwrap());
    }
}
