use super::series::check_dims;
use super::FactorizedPolynomial;
use crate::error::{Error, Result};
use crate::linalg::{matmul, CMatrix};
use crate::multistage::Direction;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One step of the evaluation plan, in terms of `w = H h` times the
/// direction prefactor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FactorGroup {
    /// `1 + b w + c w^2` with `b = 2 Re(gamma)/k`, `c = |gamma|^2/k^2`; the
    /// product of the factors for `gamma` and its conjugate.
    Quadratic { gamma: Complex64, b: f64, c: f64 },
    /// `1 + b w` with `b = gamma/k` for a real `gamma`.
    Linear { gamma: f64, b: f64 },
}

impl FactorGroup {
    fn real_sum(&self) -> f64 {
        match *self {
            FactorGroup::Quadratic { gamma, .. } => 2.0 * gamma.re,
            FactorGroup::Linear { gamma, .. } => gamma,
        }
    }

    fn size(&self) -> usize {
        match self {
            FactorGroup::Quadratic { .. } => 2,
            FactorGroup::Linear { .. } => 1,
        }
    }

    fn imag_size(&self) -> f64 {
        match *self {
            FactorGroup::Quadratic { gamma, .. } => gamma.im.abs(),
            FactorGroup::Linear { .. } => 0.0,
        }
    }

    /// The group's value at a scalar `w`.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        match *self {
            FactorGroup::Quadratic { b, c, .. } => 1.0 + w * (b + c * w),
            FactorGroup::Linear { b, .. } => 1.0 + b * w,
        }
    }
}

/// Builds the evaluation plan for `gammas`.
///
/// Conjugate pairs become quadratic groups and real values linear ones. The
/// groups are then ordered greedily: each pick is the unused group that brings
/// the running sum of `Re(gamma)` closest to the straight line from zero to the
/// total, measured at the number of factors consumed after the pick. Ties go
/// to the smaller `|Im(gamma)|`, then to the earlier position in `gammas`.
pub fn order_factors(gammas: &[Complex64]) -> Result<Vec<FactorGroup>> {
    let k = gammas.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let kf = k as f64;
    let tol = |g: Complex64| 1e-10 * g.norm().max(1e-300);
    let mut used = vec![false; k];
    // (first index, group)
    let mut groups: Vec<(usize, FactorGroup)> = Vec::new();
    for i in 0..k {
        if used[i] {
            continue;
        }
        let g = gammas[i];
        used[i] = true;
        if g.im.abs() <= tol(g) {
            groups.push((i, FactorGroup::Linear { gamma: g.re, b: g.re / kf }));
            continue;
        }
        let partner = (i + 1..k)
            .filter(|&j| !used[j])
            .map(|j| (j, (gammas[j] - g.conj()).norm()))
            .filter(|&(_, d)| d <= tol(g))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let Some((j, _)) = partner else {
            return Err(Error::NotConjugateClosed(format!("gamma {g} has no conjugate partner")));
        };
        used[j] = true;
        let upper = if g.im > 0.0 { g } else { gammas[j] };
        groups.push((
            i,
            FactorGroup::Quadratic {
                gamma: upper,
                b: 2.0 * upper.re / kf,
                c: upper.norm_sqr() / (kf * kf),
            },
        ));
    }

    let total: f64 = groups.iter().map(|(_, g)| g.real_sum()).sum();
    let mut remaining: Vec<(usize, FactorGroup)> = groups;
    let mut plan = Vec::with_capacity(remaining.len());
    let (mut consumed, mut running) = (0usize, 0.0f64);
    while !remaining.is_empty() {
        let score = |g: &FactorGroup| {
            let ideal = total * (consumed + g.size()) as f64 / kf;
            (running + g.real_sum() - ideal).abs()
        };
        let best = remaining
            .iter()
            .enumerate()
            .min_by(|(_, (ia, a)), (_, (ib, b))| {
                score(a)
                    .total_cmp(&score(b))
                    .then(a.imag_size().total_cmp(&b.imag_size()))
                    .then(ia.cmp(ib))
            })
            .map(|(pos, _)| pos)
            .expect("non-empty");
        let (_, g) = remaining.remove(best);
        consumed += g.size();
        running += g.real_sum();
        plan.push(g);
    }
    Ok(plan)
}

/// How quadratic groups are applied to matrices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GroupMode {
    /// One real-coefficient quadratic per conjugate pair.
    #[default]
    Quadratic,
    /// Two complex linear factors per pair; kept for cross-checking.
    ComplexSingletons,
}

impl FactorizedPolynomial {
    /// The factorized polynomial at a scalar exponent `w`.
    pub fn eval_scalar(&self, w: Complex64) -> Complex64 {
        let mut acc = Complex64::new(self.overall_scale, 0.0);
        for g in &self.groups {
            acc *= g.eval(w);
        }
        acc
    }

    /// Same product, with every conjugate pair applied as two complex factors.
    pub fn eval_scalar_singletons(&self, w: Complex64) -> Complex64 {
        let k = self.gammas.len() as f64;
        let mut acc = Complex64::new(self.overall_scale, 0.0);
        for g in &self.groups {
            match *g {
                FactorGroup::Quadratic { gamma, .. } => {
                    acc *= 1.0 + gamma / k * w;
                    acc *= 1.0 + gamma.conj() / k * w;
                }
                FactorGroup::Linear { b, .. } => acc *= 1.0 + b * w,
            }
        }
        acc
    }
}

/// `p(s H h) * target` through the factorization, with `s` the direction
/// prefactor and `h` taken from the polynomial's spec.
pub fn eval_factorized(
    h_mat: &CMatrix,
    target: &CMatrix,
    fact: &FactorizedPolynomial,
    direction: Direction,
) -> Result<CMatrix> {
    eval_factorized_with(h_mat, None, target, fact, direction, GroupMode::Quadratic)
}

/// [`eval_factorized`] with an optional precomputed `H^2` and a choice of
/// group mode. Without `H^2`, quadratic groups apply `H` twice.
pub fn eval_factorized_with(
    h_mat: &CMatrix,
    h_squared: Option<&CMatrix>,
    target: &CMatrix,
    fact: &FactorizedPolynomial,
    direction: Direction,
    mode: GroupMode,
) -> Result<CMatrix> {
    check_dims(h_mat, target)?;
    if let Some(h2) = h_squared {
        if h2.shape() != h_mat.shape() {
            return Err(Error::DimensionMismatch {
                expected: h_mat.nrows(),
                found: h2.nrows(),
            });
        }
    }
    let s = direction.prefactor() * fact.spec.h;
    let is_real = |m: &CMatrix| m.iter().all(|z| z.im == 0.0);
    if mode == GroupMode::Quadratic
        && direction == Direction::Imaginary
        && h_squared.is_none()
        && is_real(h_mat)
        && is_real(target)
    {
        return Ok(eval_real(h_mat, target, fact, s.re));
    }
    let k = fact.gammas.len() as f64;
    let mut v = target * Complex64::new(fact.overall_scale, 0.0);
    for g in &fact.groups {
        match (*g, mode) {
            (FactorGroup::Linear { b, .. }, _) => {
                let hv = matmul(h_mat, &v);
                v += hv * (b * s);
            }
            (FactorGroup::Quadratic { b, c, .. }, GroupMode::Quadratic) => {
                let hv = matmul(h_mat, &v);
                let hhv = match h_squared {
                    Some(h2) => matmul(h2, &v),
                    None => matmul(h_mat, &hv),
                };
                v += hv * (b * s) + hhv * (c * s * s);
            }
            (FactorGroup::Quadratic { gamma, .. }, GroupMode::ComplexSingletons) => {
                for gm in [gamma, gamma.conj()] {
                    let hv = matmul(h_mat, &v);
                    v += hv * (gm / k * s);
                }
            }
        }
    }
    Ok(v)
}

/// Real arithmetic path: real `H`, real target, real scale `s`.
fn eval_real(h_mat: &CMatrix, target: &CMatrix, fact: &FactorizedPolynomial, s: f64) -> CMatrix {
    let h: DMatrix<f64> = h_mat.map(|z| z.re);
    let mut v: DMatrix<f64> = target.map(|z| z.re) * fact.overall_scale;
    for g in &fact.groups {
        let hv = &h * &v;
        match *g {
            FactorGroup::Linear { b, .. } => v += hv * (b * s),
            FactorGroup::Quadratic { b, c, .. } => {
                let hhv = &h * &hv;
                v += hv * (b * s) + hhv * (c * s * s);
            }
        }
    }
    v.map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_pair() {
        let plan = order_factors(&[c(1.0, 1.0), c(1.0, -1.0)]).unwrap();
        assert_eq!(plan.len(), 1);
        match plan[0] {
            FactorGroup::Quadratic { gamma, b, c: cc } => {
                assert_eq!(gamma, c(1.0, 1.0));
                assert_eq!(b, 1.0);
                assert_eq!(cc, 0.5);
            }
            _ => panic!("expected a quadratic group"),
        }
    }

    #[test]
    fn golden_real_order() {
        let plan = order_factors(&[c(4.0, 0.0), c(3.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        let order: Vec<f64> = plan
            .iter()
            .map(|g| match g {
                FactorGroup::Linear { gamma, .. } => *gamma,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(order, vec![3.0, 2.0, 4.0, 1.0]);
    }

    #[test]
    fn unpaired_rejected() {
        assert!(matches!(
            order_factors(&[c(1.0, 1.0), c(2.0, -1.0)]),
            Err(Error::NotConjugateClosed(_))
        ));
    }

    #[test]
    fn quadratic_equals_pair_product() {
        let g = FactorGroup::Quadratic {
            gamma: c(0.7, 1.3),
            b: 2.0 * 0.7 / 5.0,
            c: c(0.7, 1.3).norm_sqr() / 25.0,
        };
        for w in [c(0.3, -2.0), c(-4.0, 0.5), c(10.0, 10.0)] {
            let direct = (1.0 + c(0.7, 1.3) / 5.0 * w) * (1.0 + c(0.7, -1.3) / 5.0 * w);
            assert!((g.eval(w) - direct).norm() < 4.0 * f64::EPSILON * direct.norm().max(1.0));
        }
    }
}
