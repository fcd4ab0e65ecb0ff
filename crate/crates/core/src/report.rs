//! Text and JSON renderings of helicity reports.

use std::fmt::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::helicity::{HelicityReport, ReportKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed 17-significant-digit rendering.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Common preamble: tool version and the configuration echo.
pub fn preamble(config: &impl Serialize) -> String {
    let cfg = serde_json::to_string(config).unwrap_or_else(|_| "{}".into());
    format!("winding-helicity {VERSION}\nconfig: {cfg}\n")
}

pub fn helicity_text(report: &HelicityReport, config: &impl Serialize) -> String {
    let mut s = preamble(config);
    let kind = match report.kind {
        ReportKind::Volume => "volume winding helicity",
        ReportKind::Flux => "time-integrated helicity flux",
    };
    writeln!(s, "kind: {kind}").unwrap();
    writeln!(s, "total: {}", num(report.total)).unwrap();
    if report.kind == ReportKind::Flux {
        writeln!(s, "total (winding-accumulation convention): {}", num(-report.total)).unwrap();
    }
    writeln!(s, "reconstruction: {}", num(report.reconstruction())).unwrap();
    writeln!(s, "reconstruction error (relative): {}", num(report.reconstruction_error())).unwrap();
    writeln!(s, "kernel magnitude: {}", num(report.magnitude)).unwrap();
    writeln!(s, "excluded weight: {}", num(report.excluded_weight)).unwrap();
    writeln!(s, "excluded pair magnitude: {}", num(report.excluded_pair_mass)).unwrap();
    writeln!(s, "self:").unwrap();
    for (i, v) in report.self_helicity.iter().enumerate() {
        writeln!(s, "  {i} {}", num(*v)).unwrap();
    }
    let n = report.label_count();
    if n < 2 {
        writeln!(s, "mutual: none (single label)").unwrap();
    } else {
        writeln!(s, "mutual: i j H_ij 2H_ij").unwrap();
        for i in 0..n {
            for j in i + 1..n {
                writeln!(
                    s,
                    "  {i} {j} {} {}",
                    num(report.mutual[i][j]),
                    num(report.mutual_total(i, j))
                )
                .unwrap();
            }
        }
    }
    let m = &report.metadata;
    writeln!(s, "grid: {}x{}x{}", m.dims[0], m.dims[1], m.dims[2]).unwrap();
    writeln!(s, "quadrature: {}; {}", m.rule, m.diagonal).unwrap();
    if let Some(e) = m.eps_bz {
        writeln!(s, "eps_bz: {}", num(e)).unwrap();
    }
    s
}

pub fn helicity_json(report: &HelicityReport, config: &impl Serialize) -> Value {
    let n = report.label_count();
    let doubled: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { report.mutual_total(i, j) }).collect())
        .collect();
    let mut v = json!({
        "version": VERSION,
        "config": config,
        "report": report,
        "reconstruction": report.reconstruction(),
        "reconstruction_error": report.reconstruction_error(),
        "mutual_total": doubled,
    });
    if report.kind == ReportKind::Flux {
        v["winding_accumulation_total"] = json!(-report.total);
    }
    v
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}
