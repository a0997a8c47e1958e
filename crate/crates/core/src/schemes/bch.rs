//! Numerical estimation of the leading error terms of a splitting scheme.
//!
//! For a consistent scheme `log S(h) = h(A+B) + h^2 M_2 + h^3 M_3 + ...`.
//! The odd part `(log S(h) - log S(-h)) / 2h = M_1 + h^2 M_3 + h^4 M_5 + ...`
//! is sampled on a geometric grid of step sizes and extrapolated to `h -> 0`
//! by polynomial interpolation in `h^2`. The extracted `M_3` and `M_5` are then
//! projected onto the nested-commutator basis. All matrix work here runs in
//! double-double so the extrapolation does not amplify round-off.

use super::{require_consistent, TwoStageScheme};
use crate::error::{Error, Result};
use crate::linalg::{commutator, random_hermitian, CMatrix};
use crate::polyexp::ddouble::{CDd, Dd};
use crate::tolerance;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct ErrorCoefficients {
    pub nu_minus_1: Complex64,
    pub sigma_minus_1: Complex64,
    /// Coefficient of `[A, [A, B]]`.
    pub alpha: Complex64,
    /// Coefficient of `[B, [A, B]]`.
    pub beta: Complex64,
    /// Fifth-order coefficients in the order
    /// `[A,[A,[A,[A,B]]]]`, `[A,[A,[B,[A,B]]]]`, `[B,[A,[A,[A,B]]]]`,
    /// `[B,[B,[B,[A,B]]]]`, `[B,[B,[A,[A,B]]]]`, `[A,[B,[B,[A,B]]]]`.
    /// Empty when only third order was requested.
    pub gamma: Vec<Complex64>,
    /// Largest sample standard deviation over all reported coefficients.
    pub spread: f64,
    /// Largest relative projection residual seen across draws.
    pub projection_residual: f64,
    pub draws: usize,
}

impl ErrorCoefficients {
    pub fn third_order_norm(&self) -> f64 {
        (self.alpha.norm_sqr() + self.beta.norm_sqr()).sqrt()
    }

    pub fn fifth_order_norm(&self) -> f64 {
        self.gamma.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct EstimateOptions {
    /// 3 or 5.
    pub max_order: u32,
    pub draws: usize,
    pub dim: usize,
    pub seed: u64,
    /// Largest step of the extrapolation grid.
    pub base_step: f64,
    /// Number of grid points (each halving the step).
    pub levels: usize,
    /// Attempts per draw before a degenerate draw is reported.
    pub retries: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            max_order: 5,
            draws: 5,
            dim: 8,
            seed: 0x5eed,
            base_step: 0.05,
            levels: 6,
            retries: 4,
        }
    }
}

impl EstimateOptions {
    pub fn with_order(max_order: u32) -> Self {
        EstimateOptions {
            max_order,
            ..Default::default()
        }
    }
}

/// Averaged estimate over `opts.draws` random Hermitian operator pairs.
pub fn estimate_error_coefficients(
    scheme: &TwoStageScheme,
    opts: &EstimateOptions,
) -> Result<ErrorCoefficients> {
    require_consistent(scheme)?;
    if opts.max_order != 3 && opts.max_order != 5 {
        return Err(Error::Range(format!("max_order must be 3 or 5, got {}", opts.max_order)));
    }
    if opts.draws == 0 || opts.dim < 2 {
        return Err(Error::Range("need at least one draw of dimension >= 2".into()));
    }
    let singles: Vec<Result<ErrorCoefficients>> = (0..opts.draws)
        .into_par_iter()
        .map(|draw| {
            let mut last = None;
            for attempt in 0..opts.retries.max(1) {
                let seed = opts
                    .seed
                    .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add((draw as u64) << 8 | attempt as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_hermitian(&mut rng, opts.dim);
                let b = random_hermitian(&mut rng, opts.dim);
                match estimate_with_operators(scheme, &a, &b, opts) {
                    Err(e @ Error::DegenerateDraw(_)) => last = Some(e),
                    other => return other,
                }
            }
            Err(last.expect("at least one attempt"))
        })
        .collect();
    let singles = singles.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(average(&singles))
}

fn average(samples: &[ErrorCoefficients]) -> ErrorCoefficients {
    let n = samples.len() as f64;
    let mean = |f: &dyn Fn(&ErrorCoefficients) -> Complex64| -> (Complex64, f64) {
        let m = samples.iter().map(f).sum::<Complex64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (f(s) - m).norm_sqr()).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (m, var.sqrt())
    };
    let mut spread = 0.0f64;
    let mut take = |f: &dyn Fn(&ErrorCoefficients) -> Complex64| {
        let (m, s) = mean(f);
        spread = spread.max(s);
        m
    };
    let nu = take(&|s| s.nu_minus_1);
    let sigma = take(&|s| s.sigma_minus_1);
    let alpha = take(&|s| s.alpha);
    let beta = take(&|s| s.beta);
    let n_gamma = samples[0].gamma.len();
    let gamma = (0..n_gamma).map(|j| take(&|s| s.gamma[j])).collect();
    ErrorCoefficients {
        nu_minus_1: nu,
        sigma_minus_1: sigma,
        alpha,
        beta,
        gamma,
        spread,
        projection_residual: samples.iter().map(|s| s.projection_residual).fold(0.0, f64::max),
        draws: samples.len(),
    }
}

/// Single-draw estimate for caller-supplied operators.
pub fn estimate_with_operators(
    scheme: &TwoStageScheme,
    a: &CMatrix,
    b: &CMatrix,
    opts: &EstimateOptions,
) -> Result<ErrorCoefficients> {
    require_consistent(scheme)?;
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let ab = commutator(a, b);
    let scale = a.norm() * b.norm();
    if ab.norm() <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateDraw("operators commute, the commutator basis vanishes".into()));
    }

    let moments = odd_moments(scheme, a, b, opts.base_step, opts.levels.max(4))?;

    // First order: M_1 = nu A + sigma B.
    let (first, _) = project(&moments[0], &[a.clone(), b.clone()], 0.0)?;

    let aab = commutator(a, &ab);
    let bab = commutator(b, &ab);
    let third_basis = [aab.clone(), bab.clone()];
    let floor3 = 1e-13 * (aab.norm() + bab.norm());
    let (third, res3) = project(&moments[1], &third_basis, floor3)?;

    let (gamma, res5) = if opts.max_order >= 5 {
        let fifth_basis = [
            commutator(a, &commutator(a, &aab)),
            commutator(a, &commutator(a, &bab)),
            commutator(b, &commutator(a, &aab)),
            commutator(b, &commutator(b, &bab)),
            commutator(b, &commutator(b, &aab)),
            commutator(a, &commutator(b, &bab)),
        ];
        let floor5 = 1e-13 * fifth_basis.iter().map(|m| m.norm()).sum::<f64>();
        project(&moments[2], &fifth_basis, floor5)?
    } else {
        (Vec::new(), 0.0)
    };

    Ok(ErrorCoefficients {
        nu_minus_1: first[0] - 1.0,
        sigma_minus_1: first[1] - 1.0,
        alpha: third[0],
        beta: third[1],
        gamma,
        spread: 0.0,
        projection_residual: res3.max(res5),
        draws: 1,
    })
}

/// Least-squares coefficients of `target` in the span of `basis` under the
/// Frobenius inner product, with the relative residual. Targets below `floor`
/// are reported as zero.
fn project(target: &CMatrix, basis: &[CMatrix], floor: f64) -> Result<(Vec<Complex64>, f64)> {
    let n = basis.len();
    let tnorm = target.norm();
    if tnorm <= floor {
        return Ok((vec![Complex64::new(0.0, 0.0); n], 0.0));
    }
    let dot = |x: &CMatrix, y: &CMatrix| -> Complex64 { x.iter().zip(y.iter()).map(|(u, v)| u.conj() * v).sum() };
    let gram = DMatrix::from_fn(n, n, |i, j| dot(&basis[i], &basis[j]));
    let rhs = DVector::from_fn(n, |i, _| dot(&basis[i], target));
    let coeffs = gram
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
        .ok_or_else(|| Error::DegenerateDraw("commutator basis is linearly dependent".into()))?;
    let mut fit = CMatrix::zeros(target.nrows(), target.ncols());
    for (c, m) in coeffs.iter().zip(basis) {
        fit += m * *c;
    }
    let residual = (target - fit).norm() / tnorm;
    if residual > tolerance::PROJECTION_RESIDUAL {
        return Err(Error::DegenerateDraw(format!(
            "projection residual {residual:.3e} exceeds {:.0}% of the error",
            tolerance::PROJECTION_RESIDUAL * 100.0
        )));
    }
    Ok((coeffs.iter().copied().collect(), residual))
}

/// Returns `[M_1, M_3, M_5]` rounded to double precision.
fn odd_moments(
    scheme: &TwoStageScheme,
    a: &CMatrix,
    b: &CMatrix,
    base_step: f64,
    levels: usize,
) -> Result<Vec<CMatrix>> {
    let n = a.nrows();
    let ad = DdMat::from_cmatrix(a);
    let bd = DdMat::from_cmatrix(b);
    let mut xs = Vec::with_capacity(levels);
    let mut samples = Vec::with_capacity(levels);
    for level in 0..levels {
        let h = Dd::from_f64(base_step) * Dd::from_f64(0.5).powi(level as i32);
        let plus = scheme_product(scheme, &ad, &bd, h).log()?;
        let minus = scheme_product(scheme, &ad, &bd, -h).log()?;
        let odd = (plus - minus).scale(CDd::real((h + h).recip()));
        xs.push(h.sqr());
        samples.push(odd);
    }
    // Newton divided differences in x = h^2, then convert to monomial
    // coefficients of the interpolating polynomial.
    let m = levels;
    let mut coef: Vec<DdMat> = samples.clone();
    for j in 1..m {
        for i in (j..m).rev() {
            let denom = CDd::real((xs[i] - xs[i - j]).recip());
            coef[i] = (coef[i].clone() - coef[i - 1].clone()).scale(denom);
        }
    }
    let mut mono: Vec<DdMat> = vec![DdMat::zeros(n); m];
    for i in (0..m).rev() {
        // mono <- mono * (x - xs[i]) + coef[i]
        let mut next = vec![DdMat::zeros(n); m];
        for p in 0..m {
            if p + 1 < m {
                next[p + 1] = next[p + 1].clone() + mono[p].clone();
            }
            next[p] = next[p].clone() - mono[p].scale(CDd::real(xs[i]));
        }
        next[0] = next[0].clone() + coef[i].clone();
        mono = next;
    }
    Ok(mono.into_iter().take(3).map(|m| m.to_cmatrix()).collect())
}

fn scheme_product(scheme: &TwoStageScheme, a: &DdMat, b: &DdMat, h: Dd) -> DdMat {
    let mut s = DdMat::identity(a.n);
    let q = scheme.q();
    for i in 0..q {
        s = s.mul(&a.scale(CDd::from_c64(scheme.a[i]).scale(h)).exp());
        s = s.mul(&b.scale(CDd::from_c64(scheme.b[i]).scale(h)).exp());
    }
    s.mul(&a.scale(CDd::from_c64(scheme.a[q]).scale(h)).exp())
}

/// Small dense complex double-double matrix, column-major.
#[derive(Clone, Debug)]
struct DdMat {
    n: usize,
    data: Vec<CDd>,
}

impl DdMat {
    fn zeros(n: usize) -> Self {
        DdMat {
            n,
            data: vec![CDd::ZERO; n * n],
        }
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i + i * n] = CDd::ONE;
        }
        m
    }

    fn from_cmatrix(m: &CMatrix) -> Self {
        DdMat {
            n: m.nrows(),
            data: m.iter().map(|&z| CDd::from_c64(z)).collect(),
        }
    }

    fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_iterator(self.n, self.n, self.data.iter().map(|z| z.to_c64()))
    }

    fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.data[i + j * self.n].abs_f64()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn scale(&self, z: CDd) -> Self {
        DdMat {
            n: self.n,
            data: self.data.iter().map(|&x| x * z).collect(),
        }
    }

    fn mul(&self, other: &DdMat) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for j in 0..n {
            for k in 0..n {
                let b = other.data[k + j * n];
                if b == CDd::ZERO {
                    continue;
                }
                for i in 0..n {
                    out.data[i + j * n] += self.data[i + k * n] * b;
                }
            }
        }
        out
    }

    /// Taylor series; callers keep the norm well below one.
    fn exp(&self) -> Self {
        let mut sum = Self::identity(self.n);
        let mut term = Self::identity(self.n);
        for i in 1..80 {
            term = term.mul(self).scale(CDd::real(Dd::from_f64(i as f64).recip()));
            sum = sum + term.clone();
            if term.norm1() < 1e-36 {
                break;
            }
        }
        sum
    }

    /// Principal logarithm via `2 atanh((S - 1)(S + 1)^{-1})`.
    fn log(&self) -> Result<Self> {
        let id = Self::identity(self.n);
        let y = (self.clone() - id.clone()).mul(&(self.clone() + id).inverse()?);
        if y.norm1() >= 0.9 {
            return Err(Error::Range("matrix too far from the identity for the log series".into()));
        }
        let y2 = y.mul(&y);
        let mut power = y.clone();
        let mut sum = y;
        for k in 1..400 {
            power = power.mul(&y2);
            let term = power.scale(CDd::real(Dd::from_f64((2 * k + 1) as f64).recip()));
            sum = sum + term.clone();
            if term.norm1() < 1e-36 {
                break;
            }
        }
        Ok(sum.scale(CDd::real(Dd::from_f64(2.0))))
    }

    /// Gauss-Jordan inverse with partial pivoting.
    fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a.data[i + col * n].abs_f64().total_cmp(&a.data[j + col * n].abs_f64()))
                .expect("non-empty range");
            if a.data[pivot + col * n].abs_f64() == 0.0 {
                return Err(Error::Invalid("singular matrix".into()));
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(col + j * n, pivot + j * n);
                    inv.data.swap(col + j * n, pivot + j * n);
                }
            }
            let d = a.data[col + col * n].recip();
            for j in 0..n {
                a.data[col + j * n] *= d;
                inv.data[col + j * n] *= d;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a.data[i + col * n];
                if f == CDd::ZERO {
                    continue;
                }
                for j in 0..n {
                    let ac = a.data[col + j * n];
                    let ic = inv.data[col + j * n];
                    a.data[i + j * n] -= f * ac;
                    inv.data[i + j * n] -= f * ic;
                }
            }
        }
        Ok(inv)
    }
}

impl std::ops::Add for DdMat {
    type Output = DdMat;
    fn add(mut self, o: DdMat) -> DdMat {
        self.data.iter_mut().zip(o.data).for_each(|(x, y)| *x += y);
        self
    }
}

impl std::ops::Sub for DdMat {
    type Output = DdMat;
    fn sub(mut self, o: DdMat) -> DdMat {
        self.data.iter_mut().zip(o.data).for_each(|(x, y)| *x -= y);
        self
    }
}
