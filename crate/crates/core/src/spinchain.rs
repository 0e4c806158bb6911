//! Isotropic spin-1/2 XY chain with three-spin interaction.
//!
//! The nearest-neighbour reduced state is the X-form matrix
//!
//! ```text
//! rho = | (1-G^2)/4      0          0         0     |
//!       |     0      (1+G^2)/4     G/2        0     |
//!       |     0         G/2     (1+G^2)/4     0     |
//!       |     0          0          0     (1-G^2)/4 |
//! ```
//!
//! with `G = 2/pi` for `lambda < 1` and `G = 2/(pi lambda)` beyond. The
//! ground state is grouped as (site i, site i+1, rest of the chain), so the
//! tripartite monotone and the concurrence are both functions of `rho`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{format_sig, SIG_DIGITS};
use crate::linalg::{c64, ComplexMatrix};
use crate::states::DensityMatrix;
use crate::tripartite::{concurrence, tripartite_e_from_rho, TripartiteFrame};

pub const CSV_HEADER: &str = "lambda,G,E,C,dE_dlambda,dC_dlambda";

/// Relative spacing error tolerated when checking that a grid is uniform.
const GRID_UNIFORMITY: f64 = 1e-6;
/// Second differences at distance 2..=LOCAL_WINDOW form a point's background.
const LOCAL_WINDOW: usize = 6;
/// A kink must beat its local background by this factor...
const LOCAL_RATIO: f64 = 10.0;
/// ...and the series-wide median absolute second difference by this one.
const GLOBAL_RATIO: f64 = 10.0;
/// Slope changes below this (per unit lambda) are never reported.
const ABSOLUTE_FLOOR: f64 = 1e-6;

/// Nearest-neighbour correlation `G(lambda)`.
pub fn g_factor(lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let two_over_pi = 2.0 / std::f64::consts::PI;
    Ok(if lambda < 1.0 {
        two_over_pi
    } else {
        two_over_pi / lambda
    })
}

pub fn neighbor_rho(g: f64) -> Result<DensityMatrix> {
    if !(0.0..1.0).contains(&g) {
        return Err(Error::InvalidParameter(format!(
            "correlation G must lie in [0, 1), got {g}"
        )));
    }
    let outer = (1.0 - g * g) / 4.0;
    let inner = (1.0 + g * g) / 4.0;
    let mut m = ComplexMatrix::from_real_diagonal(&[outer, inner, inner, outer]);
    m.set(1, 2, c64(g / 2.0, 0.0));
    m.set(2, 1, c64(g / 2.0, 0.0));
    DensityMatrix::new(m)
}

pub fn ground_state_e(lambda: f64, frame: TripartiteFrame) -> Result<f64> {
    tripartite_e_from_rho(&neighbor_rho(g_factor(lambda)?)?, frame)
}

pub fn ground_state_concurrence(lambda: f64) -> Result<f64> {
    concurrence(&neighbor_rho(g_factor(lambda)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub lambda: f64,
    pub g: f64,
    pub e: f64,
    pub c: f64,
    pub de_dlambda: f64,
    pub dc_dlambda: f64,
}

/// Uniform grid over `[lambda_min, lambda_max]`, endpoints included.
pub fn grid(lambda_min: f64, lambda_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lambda_min.is_finite()
        && lambda_max.is_finite()
        && 0.0 < lambda_min
        && lambda_min < lambda_max)
    {
        return Err(Error::InvalidParameter(format!(
            "need 0 < lambda_min < lambda_max, got [{lambda_min}, {lambda_max}]"
        )));
    }
    if steps < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 steps, got {steps}"
        )));
    }
    let h = (lambda_max - lambda_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                lambda_max
            } else {
                lambda_min + i as f64 * h
            }
        })
        .collect())
}

/// Central differences inside, one-sided at the two ends.
pub fn derivative(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert_eq!(n, ys.len());
    assert!(n >= 2, "need two points for a derivative");
    (0..n)
        .map(|i| {
            let (lo, hi) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            (ys[hi] - ys[lo]) / (xs[hi] - xs[lo])
        })
        .collect()
}

/// Evaluates E and C on the grid. Points are computed in parallel and
/// returned in grid order.
pub fn scan(
    lambda_min: f64,
    lambda_max: f64,
    steps: usize,
    frame: TripartiteFrame,
) -> Result<Vec<ScanRecord>> {
    let lambdas = grid(lambda_min, lambda_max, steps)?;
    let frame = frame.validate()?;
    let values: Vec<(f64, f64, f64)> = lambdas
        .par_iter()
        .map(|&l| {
            let g = g_factor(l)?;
            let rho = neighbor_rho(g)?;
            Ok((g, tripartite_e_from_rho(&rho, frame)?, concurrence(&rho)?))
        })
        .collect::<Result<_>>()?;
    let es: Vec<f64> = values.iter().map(|v| v.1).collect();
    let cs: Vec<f64> = values.iter().map(|v| v.2).collect();
    let de = derivative(&lambdas, &es);
    let dc = derivative(&lambdas, &cs);
    Ok((0..steps)
        .map(|i| ScanRecord {
            lambda: lambdas[i],
            g: values[i].0,
            e: es[i],
            c: cs[i],
            de_dlambda: de[i],
            dc_dlambda: dc[i],
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KinkMeasure {
    E,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkReport {
    /// Estimated position of the slope discontinuity.
    pub location: f64,
    pub measure: KinkMeasure,
    /// `|f'(x+) - f'(x-)|`, always positive.
    pub jump: f64,
    /// Grid points on either side of the flagged cluster.
    pub bracket: (f64, f64),
}

/// Slope discontinuities of `measure` along a scan.
pub fn detect_kinks(records: &[ScanRecord], measure: KinkMeasure) -> Result<Vec<KinkReport>> {
    let xs: Vec<f64> = records.iter().map(|r| r.lambda).collect();
    let ys: Vec<f64> = records
        .iter()
        .map(|r| match measure {
            KinkMeasure::E => r.e,
            KinkMeasure::C => r.c,
        })
        .collect();
    Ok(detect_series_kinks(&xs, &ys)?
        .into_iter()
        .map(|k| KinkReport {
            location: k.location,
            measure,
            jump: k.jump,
            bracket: k.bracket,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesKink {
    pub location: f64,
    pub jump: f64,
    pub bracket: (f64, f64),
}

/// Kink finder for any series on a uniform grid.
///
/// `d2_i = (y_{i+1} - 2 y_i + y_{i-1}) / h` tends to `f'' h` on smooth stretches
/// and to the slope jump at a kink. A point is flagged when `|d2_i|` exceeds
/// [`GLOBAL_RATIO`] times the median `|d2|`, [`LOCAL_RATIO`] times the largest
/// `|d2|` at distance 2..=[`LOCAL_WINDOW`], and [`ABSOLUTE_FLOOR`]. Adjacent
/// flagged points form one kink; its jump is the slope change across the
/// cluster, with each one-sided slope extrapolated to the kink location.
pub fn detect_series_kinks(xs: &[f64], ys: &[f64]) -> Result<Vec<SeriesKink>> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: ys.len(),
        });
    }
    if n < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            found: n,
        });
    }
    let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    if h.is_nan()
        || h <= 0.0
        || xs
            .windows(2)
            .any(|w| ((w[1] - w[0]) - h).abs() > GRID_UNIFORMITY * h)
    {
        return Err(Error::InvalidParameter(
            "kink detection needs an increasing uniform grid".into(),
        ));
    }

    // d2[i] belongs to grid point i; the end points have none.
    let mut d2 = vec![0.0; n];
    for i in 1..n - 1 {
        d2[i] = (ys[i + 1] - 2.0 * ys[i] + ys[i - 1]) / h;
    }
    let interior = 1..n - 1;
    let mut sorted: Vec<f64> = d2[interior.clone()].iter().map(|v| v.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let global = (GLOBAL_RATIO * median).max(ABSOLUTE_FLOOR);

    let background = |i: usize| -> f64 {
        let lo = i.saturating_sub(LOCAL_WINDOW).max(1);
        let hi = (i + LOCAL_WINDOW).min(n - 2);
        (lo..=hi)
            .filter(|&j| j.abs_diff(i) >= 2)
            .map(|j| d2[j].abs())
            .fold(0.0, f64::max)
    };
    let flagged: Vec<usize> = interior
        .filter(|&i| {
            let a = d2[i].abs();
            a > global && a > LOCAL_RATIO * background(i)
        })
        .collect();

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    for i in flagged {
        match clusters.last_mut() {
            Some((_, end)) if i <= *end + 2 => *end = i,
            _ => clusters.push((i, i)),
        }
    }

    Ok(clusters
        .into_iter()
        .map(|(a, b)| {
            let weight: f64 = (a..=b).map(|i| d2[i].abs()).sum();
            let location = (a..=b).map(|i| xs[i] * d2[i].abs()).sum::<f64>() / weight;
            // Slope change from just left of the cluster to just right of it.
            let lo = a.saturating_sub(1).max(1);
            let hi = (b + 1).min(n - 2);
            let mut jump: f64 = (lo..=hi).map(|i| d2[i]).sum();
            // The raw sum compares slopes at the midpoints lo - 1/2 and
            // hi + 1/2; move both to `location` using the neighbouring curvature.
            if hi < n - 2 {
                let right_mid = xs[hi] + 0.5 * h;
                jump -= d2[hi + 1] / h * (right_mid - location);
            }
            if lo >= 2 {
                let left_mid = xs[lo] - 0.5 * h;
                jump -= d2[lo - 1] / h * (location - left_mid);
            }
            SeriesKink {
                location,
                jump: jump.abs(),
                bracket: (xs[a - 1], xs[b + 1]),
            }
        })
        .collect())
}

pub fn to_csv(records: &[ScanRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 96);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let cols = [r.lambda, r.g, r.e, r.c, r.de_dlambda, r.dc_dlambda];
        let line: Vec<String> = cols.iter().map(|v| format_sig(*v, SIG_DIGITS)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Static line plot: E solid, C dashed, kinks as circles.
pub fn to_svg(records: &[ScanRecord], kinks: &[KinkReport]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const PAD: f64 = 60.0;
    let (x0, x1) = match (records.first(), records.last()) {
        (Some(a), Some(b)) => (a.lambda, b.lambda),
        _ => (0.0, 1.0),
    };
    let y1 = records.iter().map(|r| r.e.max(r.c)).fold(1.0, f64::max) * 1.05;
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - y / y1 * (H - 2.0 * PAD);
    let polyline = |f: &dyn Fn(&ScanRecord) -> f64| {
        records
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.lambda), py(f(r))))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD},{PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    for k in 0..=4 {
        let x = x0 + (x1 - x0) * k as f64 / 4.0;
        let y = y1 * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            px(x),
            H - PAD + 18.0,
            format_sig(x, 4)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            PAD - 6.0,
            py(y) + 4.0,
            format_sig(y, 3)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">lambda</text>"#,
        W / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
        polyline(&|r| r.e)
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2" stroke-dasharray="8,5"/>"#,
        polyline(&|r| r.c)
    );
    for k in kinks {
        let y = records
            .iter()
            .min_by(|a, b| {
                (a.lambda - k.location)
                    .abs()
                    .total_cmp(&(b.lambda - k.location).abs())
            })
            .map(|r| match k.measure {
                KinkMeasure::E => r.e,
                KinkMeasure::C => r.c,
            })
            .unwrap_or(0.0);
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="none" stroke="red" stroke-width="2"/>"#,
            px(k.location),
            py(y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="30" font-size="13">E (solid), C (dashed)</text>"#,
        W - PAD - 170.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn g_factor_branches() {
        close(g_factor(0.5).unwrap(), 2.0 / PI, 0.0);
        close(g_factor(1.0).unwrap(), 2.0 / PI, 1e-16);
        close(g_factor(2.0).unwrap(), 1.0 / PI, 1e-16);
        close(g_factor(0.5).unwrap(), 0.636_619_8, 1e-7);
        close(g_factor(2.0).unwrap(), 0.318_309_9, 1e-7);
        assert!(g_factor(0.0).is_err());
        assert!(g_factor(-1.0).is_err());
    }

    #[test]
    fn neighbor_rho_examples() {
        let r = neighbor_rho(0.0).unwrap();
        assert!(
            r.matrix()
                .max_abs_diff(&ComplexMatrix::identity(4).scale(0.25))
                < 1e-16
        );

        let g = 2.0 / PI;
        let r = neighbor_rho(g).unwrap();
        assert_eq!(r.matrix().trace().re, 1.0);
        let eig = crate::linalg::hermitian_eig(r.matrix()).unwrap();
        let expected = [
            (1.0 + g).powi(2) / 4.0,
            (1.0 - g * g) / 4.0,
            (1.0 - g * g) / 4.0,
            (1.0 - g).powi(2) / 4.0,
        ];
        for (a, b) in eig.eigenvalues.iter().zip(expected) {
            close(*a, b, 1e-14);
        }
        close(expected[1], 0.1487, 1e-4);
        close(expected[0], 0.6696, 1e-4);
        close(expected[3], 0.0330, 1e-4);

        assert!(neighbor_rho(1.0).is_err());
        assert!(neighbor_rho(-0.1).is_err());
    }

    #[test]
    fn grid_is_inclusive() {
        let g = grid(0.5, 2.5, 2001).unwrap();
        assert_eq!(g.len(), 2001);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[2000], 2.5);
        assert!(grid(2.0, 1.0, 10).is_err());
        assert!(grid(0.0, 1.0, 10).is_err());
        assert!(grid(0.5, 1.0, 2).is_err());
    }

    #[test]
    fn derivative_of_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert_eq!(derivative(&xs, &ys), vec![2.0; 4]);
    }

    #[test]
    fn smooth_series_has_no_kinks() {
        let xs = grid(0.5, 2.5, 2001).unwrap();
        for f in [f64::sin, f64::exp, |x: f64| x * x * x - x] {
            let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
            assert!(detect_series_kinks(&xs, &ys).unwrap().is_empty());
        }
        let flat = vec![0.3; xs.len()];
        assert!(detect_series_kinks(&xs, &flat).unwrap().is_empty());
    }

    #[test]
    fn synthetic_kink_off_grid() {
        let xs = grid(0.0 + 1e-9, 2.0, 801).unwrap();
        let at = 1.23456;
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| x.sin() + 0.7 * (x - at).max(0.0))
            .collect();
        let k = detect_series_kinks(&xs, &ys).unwrap();
        assert_eq!(k.len(), 1, "{k:?}");
        close(k[0].location, at, xs[1] - xs[0]);
        close(k[0].jump, 0.7, 1e-3);
        assert!(k[0].bracket.0 < at && at < k[0].bracket.1);
    }

    #[test]
    fn kink_detection_validates_input() {
        assert!(matches!(
            detect_series_kinks(&[1.0, 2.0, 3.0], &[0.0; 3]),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(detect_series_kinks(&[1.0, 2.0, 3.0, 5.0, 6.0], &[0.0; 5]).is_err());
    }

    #[test]
    fn csv_layout() {
        let recs = scan(0.5, 1.5, 5, TripartiteFrame::Raw).unwrap();
        let csv = to_csv(&recs);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("0.5,0.636619772368,2.13707"));
    }

    #[test]
    fn svg_mentions_both_curves() {
        let recs = scan(0.5, 2.5, 101, TripartiteFrame::Raw).unwrap();
        let kinks = detect_kinks(&recs, KinkMeasure::E).unwrap();
        let svg = to_svg(&recs, &kinks);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(svg.matches("<circle").count(), kinks.len());
    }
}
