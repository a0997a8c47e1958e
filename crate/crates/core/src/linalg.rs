//! Dense complex matrix helpers built on nalgebra storage.

use crate::error::{Error, Result};
use matrixmultiply::CGemmOption;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn zgemm_raw(
    a: &CMatrix,
    a_adjoint: bool,
    b: &CMatrix,
    b_adjoint: bool,
    out: &mut CMatrix,
) {
    let (m, k) = if a_adjoint {
        (a.ncols(), a.nrows())
    } else {
        (a.nrows(), a.ncols())
    };
    let (kb, n) = if b_adjoint {
        (b.ncols(), b.nrows())
    } else {
        (b.nrows(), b.ncols())
    };
    assert_eq!(k, kb, "inner dimensions differ");
    assert_eq!(out.shape(), (m, n));
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        out.fill(ZERO);
        return;
    }
    // nalgebra is column-major; an adjoint is the same buffer with swapped
    // strides; conjugation is applied to a temporary copy.
    let a_conj;
    let (a, rsa, csa) = if a_adjoint {
        a_conj = a.map(|z| z.conj());
        (&a_conj, a.nrows() as isize, 1)
    } else {
        (a, 1, a.nrows() as isize)
    };
    let b_conj;
    let (b, rsb, csb) = if b_adjoint {
        b_conj = b.map(|z| z.conj());
        (&b_conj, b.nrows() as isize, 1)
    } else {
        (b, 1, b.nrows() as isize)
    };
    // SAFETY: Complex64 is repr(C) {re, im}, layout-identical to [f64; 2]; the
    // strides above describe exactly the allocated column-major buffers.
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            rsa,
            csa,
            b.as_ptr() as *const [f64; 2],
            rsb,
            csb,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
}

/// `a * b` through a blocked complex GEMM.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows(), b.ncols());
    zgemm_raw(a, false, b, false, &mut out);
    out
}

/// `a * b^dagger`.
pub fn matmul_adjoint(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows(), b.nrows());
    zgemm_raw(a, false, b, true, &mut out);
    out
}

/// `a^dagger * b`.
pub fn adjoint_matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.ncols(), b.ncols());
    zgemm_raw(a, true, b, false, &mut out);
    out
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    matmul(a, b) - matmul(b, a)
}

/// Frobenius norm of `a - b`.
pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    (0..n).all(|j| (0..=j).all(|i| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol))
}

/// ||U^dagger U - 1||_F.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let g = adjoint_matmul(u, u);
    frobenius_distance(&g, &identity(u.nrows())).unwrap_or(f64::INFINITY)
}

/// Largest Gershgorin radius, an upper bound on the spectral radius.
pub fn gershgorin_bound(m: &CMatrix) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `m^n` by binary powering; `m^0` is the identity.
pub fn power(m: &CMatrix, mut n: usize) -> CMatrix {
    let mut result: Option<CMatrix> = None;
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => matmul(&base, &r),
            });
        }
        n >>= 1;
        if n > 0 {
            base = matmul(&base, &base);
        }
    }
    result.unwrap_or_else(|| identity(m.nrows()))
}

/// Eigendecomposition `H = V diag(values) V^dagger` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                found: h.ncols(),
            });
        }
        let scale = h.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1.0);
        if !is_hermitian(h, crate::tolerance::HERMITIAN * scale) {
            return Err(Error::Invalid("matrix is not Hermitian".into()));
        }
        let n = h.nrows();
        if n == 0 {
            return Ok(Self {
                values: DVector::zeros(0),
                vectors: CMatrix::zeros(0, 0),
            });
        }
        let eig = h.clone().symmetric_eigen();
        let mut vectors = eig.eigenvectors;
        // One Newton-Schulz step pulls V back onto the unitary group:
        // V <- V (3 - V^dagger V) / 2.
        let gram = adjoint_matmul(&vectors, &vectors);
        let correction = identity(n) * Complex64::new(1.5, 0.0) - gram * Complex64::new(0.5, 0.0);
        vectors = matmul(&vectors, &correction);
        Ok(Self {
            values: eig.eigenvalues,
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            scaled.column_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        matmul_adjoint(&scaled, &self.vectors)
    }

    /// `exp(z H)` for a complex scalar `z`.
    pub fn exp(&self, z: Complex64) -> CMatrix {
        if z == ZERO {
            return identity(self.dim());
        }
        self.map(|lambda| (z * lambda).exp())
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Random Hermitian matrix with Gaussian entries (real diagonal, conjugate
/// symmetric off-diagonal), rescaled to unit spectral norm.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        m[(j, j)] = Complex64::new(rng.sample(StandardNormal), 0.0);
        for i in 0..j {
            let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    let norm = HermitianEigen::new(&m)
        .map(|e| e.spectral_radius())
        .unwrap_or(1.0);
    if norm > 0.0 {
        m /= Complex64::new(norm, 0.0);
    }
    m
}
