//! Residual-history artifacts: CSV table and a static SVG plot.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::krylov::SolveReport;
use crate::orthopoly::RecurrenceCoeffs;

pub const CSV_HEADER: &str = "iteration,residual_norm,relative_residual";
pub const COEFFS_HEADER: &str = "n,a_prime,b_prime,c_prime";

/// One row per recorded iteration, `relative_residual = residual_norm / bnorm`.
pub fn residuals_csv(report: &SolveReport, bnorm: f64) -> String {
    let mut s = String::with_capacity(32 * (report.residual_history.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for (k, r) in report.residual_history.iter().enumerate() {
        let rel = if bnorm > 0.0 { r / bnorm } else { 0.0 };
        let _ = writeln!(s, "{k},{r:e},{rel:e}");
    }
    s
}

/// The primed recurrence coefficients, one row per index `n = 0..=m`,
/// printed with 17 significant digits.
pub fn coefficients_csv(c: &RecurrenceCoeffs<f64>) -> String {
    let mut s = String::with_capacity(80 * (c.degree + 2));
    s.push_str(COEFFS_HEADER);
    s.push('\n');
    for n in 0..=c.degree {
        let _ = writeln!(s, "{n},{:.16e},{:.16e},{:.16e}", c.a_prime[n], c.b_prime[n], c.c_prime[n]);
    }
    s
}

/// Semilog plot of `‖r_k‖/‖b‖` against `k`, one polyline per series.
pub fn residuals_svg(series: &[(&str, &[f64])]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

    let finite_logs = |v: &[f64]| -> Vec<f64> { v.iter().filter(|x| **x > 0.0).map(|x| x.log10()).collect() };
    let all: Vec<f64> = series.iter().flat_map(|(_, v)| finite_logs(v)).collect();
    let (lo, hi) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (lo, hi) = if lo.is_finite() { (lo.floor(), hi.ceil().max(lo.floor() + 1.0)) } else { (-1.0, 0.0) };
    let kmax = series.iter().map(|(_, v)| v.len()).max().unwrap_or(1).saturating_sub(1).max(1) as f64;
    let px = |k: f64| PAD + k / kmax * (W - 2.0 * PAD);
    let py = |l: f64| H - PAD - (l - lo) / (hi - lo) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<path d="M{PAD},{PAD} V{} H{}" fill="none" stroke="black"/>"#, H - PAD, W - PAD);
    let mut e = lo as i64;
    while e as f64 <= hi {
        let y = py(e as f64);
        let _ = writeln!(s, r##"<line x1="{}" y1="{y:.1}" x2="{PAD}" y2="{y:.1}" stroke="black"/>"##, PAD - 5.0);
        let _ =
            writeln!(s, r#"<text x="{}" y="{:.1}" font-size="11" text-anchor="end">1e{e}</text>"#, PAD - 8.0, y + 4.0);
        e += 1;
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">iteration (0 to {})</text>"#,
        W / 2.0,
        H - 12.0,
        kmax as usize
    );
    for (idx, (name, v)) in series.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let pts: Vec<String> = v
            .iter()
            .enumerate()
            .filter(|(_, x)| **x > 0.0)
            .map(|(k, x)| format!("{:.1},{:.1}", px(k as f64), py(x.log10())))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, pts.join(" "));
        let ly = PAD + 16.0 * idx as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" font-size="12" fill="{color}" text-anchor="end">{}</text>"#,
            W - PAD - 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::SolveStatus;

    fn report(h: Vec<f64>) -> SolveReport {
        SolveReport {
            status: SolveStatus::Converged,
            iterations: h.len() - 1,
            relative_residual: h[h.len() - 1] / 2.0,
            residual_history: h,
            wall_time: 0.0,
            matvec_count: 0,
            precond_applications: 0,
        }
    }

    #[test]
    fn csv_schema() {
        let csv = residuals_csv(&report(vec![2.0, 1.0, 0.25]), 2.0);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,2e0,1e0");
        assert_eq!(lines[3], "2,2.5e-1,1.25e-1");
        for (k, l) in lines[1..].iter().enumerate() {
            assert!(l.starts_with(&format!("{k},")));
        }
    }

    #[test]
    fn coefficient_table() {
        let csv = coefficients_csv(&crate::orthopoly::closed_jacobi_coeffs(2));
        let rows: Vec<Vec<f64>> =
            csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
        assert!(csv.starts_with(COEFFS_HEADER));
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0], vec![0.0, 1.5, 0.0, 0.0]);
        assert_eq!(rows[1][1], -10.0 / 3.0);
        assert_eq!(rows[1][2], 4.0);
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let a = [1.0, 0.1, 0.01];
        let b = [1.0, 0.5, 0.0, 0.2];
        let svg = residuals_svg(&[("cocg", &a), ("cocr <x>", &b)]);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("cocr &lt;x&gt;"));
        assert!(!svg.contains("NaN"));
        let empty = residuals_svg(&[("none", &[])]);
        assert!(!empty.contains("NaN") && !empty.contains("inf"));
    }
}
