use super::bch::{estimate_error_coefficients, EstimateOptions};
use super::{require_consistent, TwoStageScheme};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_distance, random_hermitian, CMatrix, HermitianEigen};
use crate::multistage::{apply_two_stage, Direction};
use crate::stats::loglog_slope;
use crate::tolerance;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct EfficiencyScore {
    pub order_n: u32,
    pub q: usize,
    /// `1 / (q^n * leading_error)`; infinite when the order is underclaimed.
    pub eff: f64,
    /// Norm of the leading error coefficients, `sqrt(|alpha|^2 + |beta|^2)`
    /// for order 2 or `sqrt(sum |gamma_j|^2)` for order 4.
    pub leading_error: f64,
    /// The leading error vanished: the scheme is of higher order than claimed.
    pub underclaimed: bool,
}

/// Efficiency of an order-2 or order-4 scheme.
pub fn efficiency(scheme: &TwoStageScheme, opts: &EstimateOptions) -> Result<EfficiencyScore> {
    let max_order = match scheme.order_n {
        2 => 3,
        4 => 5,
        n => {
            return Err(Error::Range(format!(
                "efficiency is defined here for orders 2 and 4, not {n}"
            )))
        }
    };
    let est = estimate_error_coefficients(scheme, &EstimateOptions { max_order, ..opts.clone() })?;
    let leading_error = if scheme.order_n == 2 {
        est.third_order_norm()
    } else {
        est.fifth_order_norm()
    };
    let q = scheme.q();
    let underclaimed = leading_error < tolerance::ORDER4_RESIDUAL;
    let eff = if underclaimed {
        f64::INFINITY
    } else {
        1.0 / ((q as f64).powi(scheme.order_n as i32) * leading_error)
    };
    Ok(EfficiencyScore {
        order_n: scheme.order_n,
        q,
        eff,
        leading_error,
        underclaimed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderFit {
    pub slope: f64,
    /// `(effective h, error)` for every grid point.
    pub points: Vec<(f64, f64)>,
    /// Points above the round-off plateau that entered the fit.
    pub used: usize,
}

fn check_grid(h_grid: &[f64]) -> Result<()> {
    if h_grid.len() < 4 {
        return Err(Error::Range(format!("need at least 4 step sizes, got {}", h_grid.len())));
    }
    if h_grid.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::Range("step sizes must be positive".into()));
    }
    let ratio = h_grid[1] / h_grid[0];
    let geometric = h_grid
        .windows(2)
        .all(|w| ((w[1] / w[0]) / ratio - 1.0).abs() < 1e-9);
    if !geometric {
        return Err(Error::Range("step-size grid must be geometric".into()));
    }
    Ok(())
}

/// Fits the global order of a propagator builder at total time `t`.
///
/// `step(h)` must return the one-step operator for step size `h`; the
/// propagator after `round(t/h)` steps is compared with `exact`.
pub fn fit_order(
    h_grid: &[f64],
    t: f64,
    exact: &CMatrix,
    mut evolve: impl FnMut(f64, usize) -> Result<CMatrix>,
) -> Result<OrderFit> {
    check_grid(h_grid)?;
    let mut points = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let steps = ((t / h).round() as usize).max(1);
        let h_eff = t / steps as f64;
        let u = evolve(h_eff, steps)?;
        points.push((h_eff, frobenius_distance(&u, exact)?));
    }
    let hs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let es: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (slope, used) = loglog_slope(&hs, &es, tolerance::ROUNDOFF_PLATEAU);
    match slope {
        Some(slope) if used >= 3 => Ok(OrderFit { slope, points, used }),
        _ => Err(Error::GridUnusable { usable: used }),
    }
}

/// Global order of `scheme` on random Hermitian `A`, `B` of dimension `dim`,
/// real-time evolution to `t = 1`.
pub fn empirical_order(scheme: &TwoStageScheme, dim: usize, h_grid: &[f64], seed: u64) -> Result<OrderFit> {
    scheme.check_structure()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_hermitian(&mut rng, dim);
    let b = random_hermitian(&mut rng, dim);
    let exact = HermitianEigen::new(&(&a + &b))?.exp(Complex64::new(0.0, -1.0));
    fit_order(h_grid, 1.0, &exact, |h, steps| {
        let one = apply_two_stage(&a, &b, scheme, h, Direction::Forward)?;
        Ok(crate::linalg::power(&one, steps))
    })
}

/// Geometric grid `start, start*ratio, ...` with `n` points.
pub fn geometric_grid(start: f64, ratio: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start * ratio.powi(i as i32)).collect()
}

/// Default grid used when gate-keeping catalog entries.
pub fn default_order_grid() -> Vec<f64> {
    geometric_grid(0.2, 0.5, 5)
}

/// Confirms that `scheme` is consistent and that its fitted order is within
/// [`tolerance::CATALOG_SLOPE`] of the claimed order.
pub fn gatekeep(scheme: &TwoStageScheme) -> Result<OrderFit> {
    require_consistent(scheme)?;
    let fit = empirical_order(scheme, 8, &default_order_grid(), 0x0dde)?;
    if (fit.slope - scheme.order_n as f64).abs() > tolerance::CATALOG_SLOPE {
        return Err(Error::Invalid(format!(
            "scheme {} claims order {} but fits slope {:.3}",
            scheme.name, scheme.order_n, fit.slope
        )));
    }
    Ok(fit)
}
