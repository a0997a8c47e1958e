//! Polynomial approximations of the exponential evaluated as products over
//! their zeros.
//!
//! A truncated series `p(w) ~ e^w` of degree `k` is written as
//! `p(w) = C prod_i (1 + gamma_i w / k)` with `gamma_i = -k / z_i`, where
//! `z_i` are the zeros of `p`. Applied to an operator, `w = s H h` with `s`
//! the direction prefactor, every factor costs one multiplication by `H` and
//! none of them can cancel catastrophically the way the plain sum does.
//!
//! Two families are supported: the Taylor polynomial (`C = 1`) and the
//! Chebyshev expansion on an interval of half-width `Gamma h` along the real
//! or imaginary axis (`C = p(0)`).

pub mod bessel;
pub mod cache;
pub mod ddouble;
mod factor;
mod roots;
mod series;

pub use cache::{quantize_gamma_h, ZeroCache};
pub use factor::{eval_factorized, eval_factorized_with, order_factors, FactorGroup, GroupMode};
pub use roots::MAX_TAYLOR_DEGREE;
pub use series::{
    chebyshev_coefficients, chebyshev_cutoff, chebyshev_t, eval_summed, eval_summed_scalar, taylor_cutoff,
};

use crate::error::{Error, Result};
use ddouble::CDd;
use num_complex::Complex64;
use roots::Evaluator;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Taylor,
    Chebyshev,
}

/// Direction of the approximation interval for the Chebyshev family.
/// Real-time evolution `e^{-iHh}` needs the imaginary axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Real,
    #[default]
    Imaginary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub family: Family,
    /// Truncation order, the polynomial degree.
    pub k: usize,
    /// Spectral scale `Gamma`; only used by the Chebyshev family.
    #[serde(default)]
    pub gamma_scale: f64,
    #[serde(default)]
    pub axis: Axis,
    /// Step size.
    pub h: f64,
}

impl SeriesSpec {
    pub fn taylor(k: usize) -> Self {
        SeriesSpec {
            family: Family::Taylor,
            k,
            gamma_scale: 0.0,
            axis: Axis::Imaginary,
            h: 1.0,
        }
    }

    pub fn chebyshev(k: usize, gamma_scale: f64, h: f64, axis: Axis) -> Self {
        SeriesSpec {
            family: Family::Chebyshev,
            k,
            gamma_scale,
            axis,
            h,
        }
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn gamma_h(&self) -> f64 {
        self.gamma_scale * self.h
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Range("truncation order k must be at least 1".into()));
        }
        if !self.h.is_finite() {
            return Err(Error::Range(format!("step size must be finite, got {}", self.h)));
        }
        if self.family == Family::Chebyshev {
            if !(self.gamma_scale > 0.0 && self.gamma_scale.is_finite()) {
                return Err(Error::Range(format!("Gamma must be positive, got {}", self.gamma_scale)));
            }
            if self.h < 0.0 {
                return Err(Error::Range(format!("Chebyshev step size must be >= 0, got {}", self.h)));
            }
        }
        Ok(())
    }
}

/// The spectral scale used for Chebyshev expansions: 1% above a bound on the
/// spectral radius.
pub fn gamma_for_bound(spectral_bound: f64) -> f64 {
    1.01 * spectral_bound
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizedPolynomial {
    pub spec: SeriesSpec,
    pub zeros: Vec<Complex64>,
    /// `gamma_i = -k / z_i`, in the order of `zeros`.
    pub gammas: Vec<Complex64>,
    /// Evaluation plan.
    pub groups: Vec<FactorGroup>,
    /// `p(0)`; exactly 1 for Taylor.
    pub overall_scale: f64,
    /// Largest `|p(z_i) / p'(z_i)|` reported by the root finder.
    pub worst_residual: f64,
}

impl FactorizedPolynomial {
    /// Computes (or loads from `cache`) the zeros for `spec` and builds the
    /// evaluation plan.
    pub fn new(spec: SeriesSpec, cache: Option<&ZeroCache>) -> Result<Self> {
        spec.validate()?;
        let (gh, axis) = match spec.family {
            Family::Taylor => (0.0, Axis::Imaginary),
            Family::Chebyshev => (quantize_gamma_h(spec.gamma_h()), spec.axis),
        };
        let cached = match cache {
            Some(c) => c.load(spec.family, spec.k, gh, axis)?,
            None => None,
        };
        let eval = match spec.family {
            Family::Taylor => Evaluator::taylor(spec.k),
            Family::Chebyshev => Evaluator::chebyshev(spec.k, gh, axis)?,
        };
        let (zeros_dd, worst) = match cached {
            Some(z) => (z, 0.0),
            None => {
                let set = match spec.family {
                    Family::Taylor => roots::taylor_roots(spec.k)?,
                    Family::Chebyshev => roots::chebyshev_roots(spec.k, gh, axis)?,
                };
                if let Some(c) = cache {
                    c.store(spec.family, spec.k, gh, axis, &set.zeros)?;
                }
                (set.zeros, set.worst_residual)
            }
        };
        let overall_scale = match spec.family {
            Family::Taylor => 1.0,
            Family::Chebyshev => roots::reference_value(&eval, CDd::ZERO)
                .ok_or(Error::NonConvergence {
                    iterations: 0,
                    worst_residual: f64::INFINITY,
                })?
                .re
                .to_f64(),
        };
        let k = Complex64::new(spec.k as f64, 0.0);
        let gammas_dd: Vec<Complex64> = zeros_dd.iter().map(|z| (-(CDd::from_c64(k) / *z)).to_c64()).collect();
        let groups = order_factors(&gammas_dd)?;
        Ok(FactorizedPolynomial {
            spec,
            zeros: zeros_dd.iter().map(|z| z.to_c64()).collect(),
            gammas: gammas_dd,
            groups,
            overall_scale,
            worst_residual: worst,
        })
    }

    pub fn taylor(k: usize, cache: Option<&ZeroCache>) -> Result<Self> {
        Self::new(SeriesSpec::taylor(k), cache)
    }

    /// The exact value of the truncated series at `w`, computed in
    /// double-double and rounded.
    pub fn reference(&self, w: Complex64) -> Result<Complex64> {
        truncated_reference(&self.spec, w)
    }
}

/// All `k` zeros of `sum_{i<=k} z^i / i!`, `1 <= k <= 400`.
pub fn taylor_zeros(k: usize) -> Result<Vec<Complex64>> {
    Ok(roots::taylor_roots(k)?.zeros.iter().map(|z| z.to_c64()).collect())
}

/// All zeros of the Chebyshev expansion described by `spec`.
pub fn chebyshev_zeros(spec: &SeriesSpec) -> Result<Vec<Complex64>> {
    if spec.family != Family::Chebyshev {
        return Err(Error::Invalid("chebyshev_zeros needs a Chebyshev spec".into()));
    }
    spec.validate()?;
    Ok(roots::chebyshev_roots(spec.k, quantize_gamma_h(spec.gamma_h()), spec.axis)?
        .zeros
        .iter()
        .map(|z| z.to_c64())
        .collect())
}

/// The truncated series at `w` evaluated stably in double-double.
pub fn truncated_reference(spec: &SeriesSpec, w: Complex64) -> Result<Complex64> {
    spec.validate()?;
    let eval = match spec.family {
        Family::Taylor => Evaluator::taylor(spec.k),
        Family::Chebyshev => Evaluator::chebyshev(spec.k, quantize_gamma_h(spec.gamma_h()), spec.axis)?,
    };
    roots::reference_value(&eval, CDd::from_c64(w))
        .map(CDd::to_c64)
        .ok_or(Error::NonConvergence {
            iterations: 0,
            worst_residual: f64::INFINITY,
        })
}

/// Taylor zeros scaled by `1/k`, which approach the Szegő curve
/// `|w e^{1-w}| = 1`, `|w| <= 1`.
#[derive(Clone, Debug, Serialize)]
pub struct SzegoDatum {
    pub k: usize,
    pub normalized_zeros: Vec<Complex64>,
}

impl SzegoDatum {
    pub fn new(k: usize) -> Result<Self> {
        let kf = k as f64;
        Ok(SzegoDatum {
            k,
            normalized_zeros: taylor_zeros(k)?.into_iter().map(|z| z / kf).collect(),
        })
    }

    /// `| |w e^{1-w}| - 1 |` for each normalized zero.
    pub fn deviations(&self) -> Vec<f64> {
        self.normalized_zeros
            .iter()
            .map(|w| ((w * (1.0 - w).exp()).norm() - 1.0).abs())
            .collect()
    }

    /// Largest deviation, ignoring the `skip` zeros closest to `w = 1` where
    /// convergence to the curve is slowest.
    pub fn max_deviation(&self, skip: usize) -> f64 {
        let mut idx: Vec<usize> = (0..self.normalized_zeros.len()).collect();
        idx.sort_by(|&a, &b| {
            let da = (self.normalized_zeros[a] - 1.0).norm();
            let db = (self.normalized_zeros[b] - 1.0).norm();
            da.total_cmp(&db)
        });
        let dev = self.deviations();
        idx.iter().skip(skip).map(|&i| dev[i]).fold(0.0, f64::max)
    }
}

/// Points on the upper half of the Szegő curve, `n` of them, from `w = 1`
/// round to the negative real axis.
pub fn szego_curve(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            let theta = std::f64::consts::PI * j as f64 / (n.max(2) - 1) as f64;
            let (re, im) = roots::szego_point(theta);
            Complex64::new(re, im)
        })
        .collect()
}
