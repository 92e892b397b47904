use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::eval::EvalReport;
use crate::pipeline::store::write_file;
use crate::vote::{exact_pv_recall, TheoremReport, VoteParams};

const WIDTH: f64 = 520.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Line {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Axis-aligned line chart as a standalone SVG document.
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub lines: Vec<Line>,
    /// Dashed y = x reference, for ROC plots.
    pub diagonal: bool,
}

impl Chart {
    fn sx(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        LEFT + (x - lo) / (hi - lo) * (WIDTH - LEFT - RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        HEIGHT - BOTTOM - (y - lo) / (hi - lo) * (HEIGHT - TOP - BOTTOM)
    }

    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            escape(&self.title)
        );
        let (x0, x1, y0, y1) = (self.sx(self.x_range.0), self.sx(self.x_range.1), self.sy(self.y_range.0), self.sy(self.y_range.1));
        let _ = writeln!(s, r##"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##, x1 - x0, y0 - y1);
        for k in 0..=5 {
            let f = k as f64 / 5.0;
            let xv = self.x_range.0 + f * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + f * (self.y_range.1 - self.y_range.0);
            let (px, py) = (self.sx(xv), self.sy(yv));
            let _ = writeln!(s, r##"<line x1="{px:.1}" y1="{y0:.1}" x2="{px:.1}" y2="{:.1}" stroke="#444"/>"##, y0 + 4.0);
            let _ = writeln!(s, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, y0 + 18.0, tick(xv));
            let _ = writeln!(s, r##"<line x1="{:.1}" y1="{py:.1}" x2="{x0:.1}" y2="{py:.1}" stroke="#444"/>"##, x0 - 4.0);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 7.0, py + 4.0, tick(yv));
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );
        if self.diagonal {
            let _ = writeln!(s, r##"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y1:.1}" stroke="#999" stroke-dasharray="4 4"/>"##);
        }
        for (k, line) in self.lines.iter().enumerate() {
            let colour = PALETTE[k % PALETTE.len()];
            let pts: Vec<String> = line.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.sx(x), self.sy(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#, pts.join(" "));
            let ly = TOP + 10.0 + 20.0 * k as f64;
            let lx = WIDTH - RIGHT + 14.0;
            let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#, lx + 18.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 24.0, ly + 4.0, escape(&line.name));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.1}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn roc_chart(report: &EvalReport) -> Chart {
    Chart {
        title: "ROC curve (test split)".into(),
        x_label: "false positive rate".into(),
        y_label: "true positive rate".into(),
        x_range: (0.0, 1.0),
        y_range: (0.0, 1.0),
        lines: vec![
            Line { name: format!("segment {:.3}", report.segment.auc_roc), points: report.segment_roc.clone() },
            Line { name: format!("session {:.3}", report.session.auc_roc), points: report.session_roc.clone() },
        ],
        diagonal: true,
    }
}

fn recall_chart(title: &str, lines: Vec<Line>) -> Chart {
    let n_max = lines.iter().flat_map(|l| l.points.iter().map(|p| p.0)).fold(1.0, f64::max);
    Chart {
        title: title.into(),
        x_label: "segments per session N".into(),
        y_label: "session recall".into(),
        x_range: (0.0, n_max),
        y_range: (0.0, 1.0),
        lines,
        diagonal: false,
    }
}

/// Plurality-vote session recall against N for each class's measured segment recall.
pub fn measured_recall_chart(report: &EvalReport, n_max: usize) -> Result<Chart> {
    let mut lines = Vec::new();
    for c in &report.lift.per_class {
        let points = (1..=n_max)
            .map(|n| Ok((n as f64, exact_pv_recall(&VoteParams::new(c.segment_recall, n)?))))
            .collect::<Result<Vec<_>>>()?;
        lines.push(Line { name: format!("{} p0={:.3}", c.class.short(), c.segment_recall), points });
    }
    Ok(recall_chart("Session recall at measured segment recall", lines))
}

pub fn theorem_chart(report: &TheoremReport) -> Chart {
    let lines = report
        .curves
        .iter()
        .map(|c| Line {
            name: format!("p0={:.2}", c.p0),
            points: c.n.iter().zip(&c.recall).map(|(&n, &r)| (n as f64, r)).collect(),
        })
        .collect();
    recall_chart("Plurality-vote session recall", lines)
}

/// Renders charts for each metrics or theorem-sweep JSON file into
/// `out_dir`, named after the input file. Returns the written paths.
pub fn run_plot(inputs: &[PathBuf], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for input in inputs {
        let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::json(input, e))?;
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot").to_owned();
        let charts: Vec<(String, Chart)> = if value.get("segment_roc").is_some() {
            let report: EvalReport = serde_json::from_value(value).map_err(|e| Error::json(input, e))?;
            vec![
                (format!("{stem}_roc.svg"), roc_chart(&report)),
                (format!("{stem}_recall_vs_n.svg"), measured_recall_chart(&report, 50)?),
            ]
        } else if value.get("curves").is_some() {
            let report: TheoremReport = serde_json::from_value(value).map_err(|e| Error::json(input, e))?;
            vec![(format!("{stem}_recall_vs_n.svg"), theorem_chart(&report))]
        } else {
            return Err(Error::Format {
                path: input.clone(),
                msg: "neither an evaluation report nor a theorem sweep".into(),
            });
        };
        for (name, chart) in charts {
            let path = out_dir.join(name);
            write_file(&path, chart.to_svg().as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}
