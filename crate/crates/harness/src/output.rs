//! CSV tables and plain-text SVG plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::report::ApproxReport;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "CSV row width");
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn ratio_csv(report: &ApproxReport) -> String {
    let mut csv = Csv::new(&[
        "n", "order", "z_re", "z_im", "error", "rho", "bound", "ratio",
    ]);
    for d in &report.degrees {
        for (l, table) in d.boundary.iter().enumerate() {
            for row in table {
                csv.row(&[
                    d.n.to_string(),
                    l.to_string(),
                    num(row.z.re),
                    num(row.z.im),
                    num(row.error),
                    num(row.rho),
                    num(row.bound),
                    num(row.ratio),
                ]);
            }
        }
    }
    csv.into_string()
}

pub fn summary_csv(report: &ApproxReport) -> String {
    let mut csv = Csv::new(&[
        "n",
        "degree",
        "boundary_sup",
        "max_ratio",
        "interior_error",
        "max_node_residual",
    ]);
    for d in &report.degrees {
        csv.row(&[
            d.n.to_string(),
            d.degree.to_string(),
            num(d.boundary_sup),
            num(d.max_ratio.first().copied().unwrap_or(f64::NAN)),
            num(d.interior.first().map(|i| i.error).unwrap_or(f64::NAN)),
            num(d.max_node_residual),
        ]);
    }
    csv.into_string()
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Log-log plot with decade ticks.
pub fn loglog_svg(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (w, h, left, right, top, bottom) = (640.0, 420.0, 70.0, 20.0, 40.0, 50.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        w / 2.0,
        escape(title)
    );
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(f64, f64)) -> f64| {
        pts.iter().map(sel).fold(init, f)
    };
    let (x0, mut x1) = (
        fold(f64::min, f64::INFINITY, |p| p.0).floor(),
        fold(f64::max, f64::NEG_INFINITY, |p| p.0).ceil(),
    );
    let (y0, mut y1) = (
        fold(f64::min, f64::INFINITY, |p| p.1).floor(),
        fold(f64::max, f64::NEG_INFINITY, |p| p.1).ceil(),
    );
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);
    let _ = writeln!(
        svg,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        w - left - right,
        h - top - bottom
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = px(d as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>",
            h - bottom,
            h - bottom + 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">1e{d}</text>",
            h - bottom + 18.0
        );
    }
    let ystep = ((y1 - y0) / 10.0).ceil().max(1.0) as usize;
    for d in ((y0 as i32)..=(y1 as i32)).step_by(ystep) {
        let y = py(d as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{left}\" y2=\"{y:.2}\" stroke=\"black\"/>",
            left - 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">1e{d}</text>",
            left - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        (left + w - right) / 2.0,
        h - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        (top + h - bottom) / 2.0,
        (top + h - bottom) / 2.0,
        escape(ylabel)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", px(x.log10()), py(y.log10())))
            .collect();
        if coords.is_empty() {
            continue;
        }
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            coords.join(" ")
        );
        for c in &coords {
            let (cx, cy) = c.split_once(',').expect("coordinate pair");
            let _ = writeln!(
                svg,
                "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"2.5\" fill=\"{color}\"/>"
            );
        }
        let ly = top + 16.0 + 16.0 * i as f64;
        let _ = writeln!(svg, "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>", w - right - 140.0, w - right - 120.0);
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            w - right - 114.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// Writes `report.json`, `ratios.csv`, `summary.csv` and, if enabled, the
/// SVG plots into `dir`.
pub fn write_outputs(report: &ApproxReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: &str| -> Result<()> {
        let p = dir.join(name);
        write(&p, text)?;
        written.push(p);
        Ok(())
    };
    put("report.json", &(report.to_json()? + "\n"))?;
    put("ratios.csv", &ratio_csv(report))?;
    put("summary.csv", &summary_csv(report))?;
    if report.config.svg && !report.degrees.is_empty() {
        let n: Vec<f64> = report.degrees.iter().map(|d| d.n as f64).collect();
        let mut errors = vec![Series {
            name: "boundary".into(),
            points: n
                .iter()
                .zip(&report.degrees)
                .map(|(x, d)| (*x, d.boundary_sup))
                .collect(),
        }];
        if report.degrees.iter().all(|d| !d.interior.is_empty()) {
            errors.push(Series {
                name: "interior".into(),
                points: n
                    .iter()
                    .zip(&report.degrees)
                    .map(|(x, d)| (*x, d.interior[0].error))
                    .collect(),
            });
        }
        put(
            "errors.svg",
            &loglog_svg("approximation error", "n", "sup error", &errors),
        )?;
        let ratios = Series {
            name: "max ratio".into(),
            points: n
                .iter()
                .zip(&report.degrees)
                .map(|(x, d)| (*x, d.max_ratio[0]))
                .collect(),
        };
        put(
            "ratios.svg",
            &loglog_svg("|f - p_n| / omega(rho_1/n)", "n", "ratio", &[ratios]),
        )?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        let x = std::f64::consts::PI * 1e-7;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_has_header_and_lf() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&["1".into(), num(2.0)]);
        let s = c.into_string();
        assert_eq!(s, "a,b\n1,2.0000000000000000e0\n");
        assert!(!s.contains('\r'));
    }

    #[test]
    fn svg_is_well_formed_text() {
        let s = loglog_svg(
            "t",
            "x",
            "y",
            &[Series {
                name: "a<b".into(),
                points: vec![(1.0, 1e-3), (10.0, 1e-6), (100.0, 0.0)],
            }],
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("polyline") && s.contains("a&lt;b"));
        assert_eq!(s.matches("<circle").count(), 2);
    }
}
