//! Small fitting helpers for log-log error curves.

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Slope of log(error) versus log(h), skipping points whose error is below
/// `floor`. Returns the slope and the number of points used.
pub fn loglog_slope(hs: &[f64], errors: &[f64], floor: f64) -> (Option<f64>, usize) {
    let (xs, ys): (Vec<f64>, Vec<f64>) = hs
        .iter()
        .zip(errors)
        .filter(|(h, e)| **e >= floor && e.is_finite() && **h > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .unzip();
    (ls_slope(&xs, &ys), xs.len())
}

/// Log-log linear interpolation of `(x, y)` samples at `x0`. Samples may come
/// in any order; `None` outside their range.
pub fn loglog_interpolate(points: &[(f64, f64)], x0: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first = pts.first()?;
    let last = pts.last()?;
    if x0 < first.0 || x0 > last.0 {
        return None;
    }
    for w in pts.windows(2) {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        if x0 >= x1 && x0 <= x2 {
            if x2 == x1 {
                return Some(y1);
            }
            let t = (x0.ln() - x1.ln()) / (x2.ln() - x1.ln());
            return Some((y1.ln() + t * (y2.ln() - y1.ln())).exp());
        }
    }
    Some(first.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let hs = [0.5, 0.25, 0.125, 0.0625];
        let es: Vec<f64> = hs.iter().map(|h: &f64| 3.0 * h.powi(4)).collect();
        let (s, n) = loglog_slope(&hs, &es, 0.0);
        assert_eq!(n, 4);
        assert!((s.unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn floor_removes_points() {
        let (s, n) = loglog_slope(&[1.0, 0.5, 0.25], &[1e-3, 1e-13, 1e-14], 1e-12);
        assert_eq!(n, 1);
        assert!(s.is_none());
    }

    #[test]
    fn interpolation_is_exact_on_power_laws() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x: &f64| (x, x.powf(-2.5))).collect();
        let y = loglog_interpolate(&pts, 3.0).unwrap();
        assert!((y / 3f64.powf(-2.5) - 1.0).abs() < 1e-12);
        assert!(loglog_interpolate(&pts, 9.0).is_none());
    }
}
