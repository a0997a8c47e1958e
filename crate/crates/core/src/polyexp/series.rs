use super::bessel::{bessel_sequence, BesselKind};
use super::ddouble::{CDd, Dd};
use super::{Axis, Family, SeriesSpec};
use crate::error::{Error, Result};
use crate::linalg::{matmul, CMatrix};
use crate::multistage::Direction;
use num_complex::Complex64;

/// Smallest `k >= 1` with `(lambda_max h)^k / (k+1)! < epsilon`, scanned in
/// log space so that large arguments cannot overflow.
pub fn taylor_cutoff(lambda_max: f64, h: f64, epsilon: f64) -> Result<usize> {
    if !(lambda_max >= 0.0 && lambda_max.is_finite()) {
        return Err(Error::Range(format!("lambda_max must be finite and >= 0, got {lambda_max}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Range(format!("h must be positive, got {h}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Range(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let x = lambda_max * h;
    if x == 0.0 {
        return Ok(1);
    }
    let (lx, le) = (x.ln(), epsilon.ln());
    // ln (k+1)! accumulated incrementally, starting at ln 2!.
    let mut ln_fact = 2f64.ln();
    let mut k = 1usize;
    while k as f64 * lx - ln_fact >= le {
        k += 1;
        ln_fact += ((k + 1) as f64).ln();
    }
    Ok(k)
}

/// `mu_0 ..= mu_n` for the expansion `e^z = sum mu_n T_n(x(z))` where
/// `x = z / (Gamma h)` on the real axis and `x = z / (i Gamma h)` on the
/// imaginary axis. In the second case `mu_0 = J_0`, `mu_n = 2 i^n J_n`.
pub(crate) fn chebyshev_mu(gamma_h: f64, axis: Axis, nmax: usize) -> Result<Vec<CDd>> {
    let kind = match axis {
        Axis::Real => BesselKind::I,
        Axis::Imaginary => BesselKind::J,
    };
    let vals = bessel_sequence(kind, nmax, gamma_h)?;
    Ok(vals
        .into_iter()
        .enumerate()
        .map(|(n, v)| {
            let v = if n == 0 { v } else { v.mul_pow2(2.0) };
            match (axis, n % 4) {
                (Axis::Real, _) | (Axis::Imaginary, 0) => CDd::real(v),
                (Axis::Imaginary, 1) => CDd::new(Dd::ZERO, v),
                (Axis::Imaginary, 2) => CDd::real(-v),
                (Axis::Imaginary, _) => CDd::new(Dd::ZERO, -v),
            }
        })
        .collect())
}

/// Chebyshev coefficients `mu_0 ..= mu_k` of `spec`.
pub fn chebyshev_coefficients(spec: &SeriesSpec) -> Result<Vec<Complex64>> {
    if spec.family != Family::Chebyshev {
        return Err(Error::Invalid("chebyshev_coefficients needs a Chebyshev spec".into()));
    }
    spec.validate()?;
    Ok(chebyshev_mu(spec.gamma_h(), spec.axis, spec.k)?
        .into_iter()
        .map(CDd::to_c64)
        .collect())
}

/// Smallest `k >= 1` with `|mu_n| < epsilon` for every `n > k`.
pub fn chebyshev_cutoff(gamma_h: f64, axis: Axis, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Range(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let nmax = (3.0 * gamma_h).ceil() as usize + 100;
    let mu = chebyshev_mu(gamma_h, axis, nmax)?;
    let last_big = mu.iter().rposition(|m| m.abs_f64() >= epsilon).unwrap_or(0);
    Ok(last_big.max(1))
}

/// Maps the exponent `z` onto the Chebyshev variable.
pub(crate) fn chebyshev_arg(axis: Axis, gamma_h: f64, z: Complex64) -> Complex64 {
    match axis {
        Axis::Real => z / gamma_h,
        Axis::Imaginary => Complex64::new(z.im, -z.re) / gamma_h,
    }
}

/// `T_n(x)` by the three-term recurrence.
pub fn chebyshev_t(n: usize, x: Complex64) -> Complex64 {
    let (mut t_prev, mut t) = (Complex64::new(1.0, 0.0), x);
    if n == 0 {
        return t_prev;
    }
    for _ in 1..n {
        let next = 2.0 * x * t - t_prev;
        t_prev = t;
        t = next;
    }
    t
}

/// Direct evaluation of the truncated series at a scalar exponent `z`:
/// running-term summation for Taylor, the three-term recurrence for
/// Chebyshev. For Taylor with large `|z|` this suffers cancellation.
pub fn eval_summed_scalar(spec: &SeriesSpec, z: Complex64) -> Result<Complex64> {
    spec.validate()?;
    Ok(match spec.family {
        Family::Taylor => {
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = term;
            for i in 1..=spec.k {
                term = term * z / i as f64;
                sum += term;
            }
            sum
        }
        Family::Chebyshev => {
            let mu = chebyshev_coefficients(spec)?;
            let x = chebyshev_arg(spec.axis, spec.gamma_h(), z);
            let (mut t_prev, mut t) = (Complex64::new(1.0, 0.0), x);
            let mut sum = mu[0] + mu[1] * x;
            for m in &mu[2..] {
                let next = 2.0 * x * t - t_prev;
                t_prev = t;
                t = next;
                sum += m * t;
            }
            sum
        }
    })
}

/// `p(s H h) * target` by direct summation, with `s` the direction prefactor.
pub fn eval_summed(h_mat: &CMatrix, target: &CMatrix, spec: &SeriesSpec, direction: Direction) -> Result<CMatrix> {
    spec.validate()?;
    check_dims(h_mat, target)?;
    let zscale = direction.prefactor() * spec.h;
    Ok(match spec.family {
        Family::Taylor => {
            let mut term = target.clone();
            let mut sum = target.clone();
            for i in 1..=spec.k {
                term = matmul(h_mat, &term) * (zscale / i as f64);
                sum += &term;
            }
            sum
        }
        Family::Chebyshev => {
            let mu = chebyshev_coefficients(spec)?;
            // X = x(s H h) as a multiple of H.
            let xscale = chebyshev_arg(spec.axis, spec.gamma_h(), zscale);
            let mut t_prev = target.clone();
            let mut t = matmul(h_mat, target) * xscale;
            let mut sum = target * mu[0] + &t * mu[1];
            for m in &mu[2..] {
                let next = matmul(h_mat, &t) * (2.0 * xscale) - &t_prev;
                t_prev = std::mem::replace(&mut t, next);
                sum += &t * *m;
            }
            sum
        }
    })
}

pub(crate) fn check_dims(h_mat: &CMatrix, target: &CMatrix) -> Result<()> {
    if !h_mat.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h_mat.nrows(),
            found: h_mat.ncols(),
        });
    }
    if h_mat.ncols() != target.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h_mat.ncols(),
            found: target.nrows(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_examples() {
        assert_eq!(taylor_cutoff(1.0, 1.0, 1e-16).unwrap(), 18);
        assert_eq!(taylor_cutoff(0.0, 1.0, 1e-16).unwrap(), 1);
        assert_eq!(taylor_cutoff(10.0, 1.0, 2.2e-16).unwrap(), 50);
        assert!(taylor_cutoff(1.0, 0.0, 1e-3).is_err());
        assert!(taylor_cutoff(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn chebyshev_coefficients_small() {
        let spec = SeriesSpec::chebyshev(3, 1.0, 1.0, Axis::Real);
        let mu = chebyshev_coefficients(&spec).unwrap();
        assert!((mu[0].re - 1.2660658777520084).abs() < 1e-15);
        assert!((mu[1].re - 1.13031820798497).abs() < 1e-14);
        let zero = SeriesSpec::chebyshev(3, 1.0, 0.0, Axis::Imaginary);
        let mu = chebyshev_coefficients(&zero).unwrap();
        assert_eq!(mu[0], Complex64::new(1.0, 0.0));
        assert!(mu[1..].iter().all(|m| m.norm() == 0.0));
    }

    #[test]
    fn chebyshev_cutoff_at_100() {
        let k = chebyshev_cutoff(100.0, Axis::Imaginary, 1e-14).unwrap();
        assert!((140..=155).contains(&k), "{k}");
    }

    #[test]
    fn t2_by_recurrence() {
        assert!((chebyshev_t(2, Complex64::new(0.5, 0.0)).re + 0.5).abs() < 1e-16);
        assert_eq!(chebyshev_t(0, Complex64::new(3.0, 1.0)), Complex64::new(1.0, 0.0));
        let x = Complex64::new(0.3, 0.2);
        let t5 = 16.0 * x.powi(5) - 20.0 * x.powi(3) + 5.0 * x;
        assert!((chebyshev_t(5, x) - t5).norm() < 1e-15);
    }

    #[test]
    fn summed_matches_exp() {
        let spec = SeriesSpec::taylor(20);
        let z = Complex64::new(0.3, -1.1);
        assert!((eval_summed_scalar(&spec, z).unwrap() - z.exp()).norm() < 1e-15);
        let spec = SeriesSpec::chebyshev(60, 1.0, 20.0, Axis::Imaginary);
        for y in [-19.0, -3.0, 0.0, 7.5, 20.0] {
            let z = Complex64::new(0.0, y);
            let v = eval_summed_scalar(&spec, z).unwrap();
            assert!((v - z.exp()).norm() < 1e-12, "{y}: {v}");
        }
    }

    #[test]
    fn matrix_summed_on_diagonal() {
        let d = [0.5, -1.0, 2.0];
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(3, d.iter().map(|&x| Complex64::new(x, 0.0))));
        let id = crate::linalg::identity(3);
        for spec in [SeriesSpec::taylor(30).with_h(0.5), SeriesSpec::chebyshev(30, 2.5, 0.5, Axis::Imaginary)] {
            let u = eval_summed(&h, &id, &spec, Direction::Forward).unwrap();
            for (i, &x) in d.iter().enumerate() {
                let want = Complex64::new(0.0, -0.5 * x).exp();
                assert!((u[(i, i)] - want).norm() < 1e-13, "{:?}", spec.family);
            }
        }
    }
}
