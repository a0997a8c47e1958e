//! Two-operator splitting schemes
//! `exp((A+B)h) ~ e^{A a_1 h} e^{B b_1 h} ... e^{B b_q h} e^{A a_{q+1} h}`.

mod bch;
mod catalog;
mod order;

pub use bch::{estimate_error_coefficients, estimate_with_operators, ErrorCoefficients, EstimateOptions};
pub use catalog::{Catalog, BUNDLED_CATALOG};
pub use order::{
    default_order_grid, efficiency, empirical_order, fit_order, gatekeep, geometric_grid, EfficiencyScore, OrderFit,
};

use crate::error::{Error, Result};
use crate::tolerance;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex coefficient stored as `[re, im]` in catalog files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Coeff(pub Complex64);

impl From<[f64; 2]> for Coeff {
    fn from(v: [f64; 2]) -> Self {
        Coeff(Complex64::new(v[0], v[1]))
    }
}

impl From<Coeff> for [f64; 2] {
    fn from(c: Coeff) -> Self {
        [c.0.re, c.0.im]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStageScheme {
    pub name: String,
    #[serde(rename = "order")]
    pub order_n: u32,
    #[serde(with = "coeff_list")]
    pub a: Vec<Complex64>,
    #[serde(with = "coeff_list")]
    pub b: Vec<Complex64>,
    #[serde(default)]
    pub symmetric: bool,
    #[serde(default)]
    pub source: String,
}

mod coeff_list {
    use super::Coeff;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|&z| Coeff(z)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<Coeff>::deserialize(d)?.into_iter().map(|c| c.0).collect())
    }
}

/// Outcome of [`validate_consistency`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub pass: bool,
    /// |sum(a) - 1|
    pub a_residual: f64,
    /// |sum(b) - 1|
    pub b_residual: f64,
    /// Whether the coefficient lists are palindromic.
    pub palindromic: bool,
    /// `symmetric` flag agrees with the coefficients (a scheme not flagged
    /// symmetric always agrees).
    pub symmetry_ok: bool,
}

impl TwoStageScheme {
    pub fn new(name: impl Into<String>, order_n: u32, a: Vec<Complex64>, b: Vec<Complex64>) -> Self {
        let mut s = TwoStageScheme {
            name: name.into(),
            order_n,
            a,
            b,
            symmetric: false,
            source: String::new(),
        };
        s.symmetric = s.is_palindromic(tolerance::SYMMETRY);
        s
    }

    /// Real-coefficient convenience constructor.
    pub fn real(name: impl Into<String>, order_n: u32, a: &[f64], b: &[f64]) -> Self {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(name, order_n, c(a), c(b))
    }

    /// The symmetric second-order Strang scheme `e^{Ah/2} e^{Bh} e^{Ah/2}`.
    pub fn strang() -> Self {
        let mut s = Self::real("strang", 2, &[0.5, 0.5], &[1.0]);
        s.source = "Strang splitting".into();
        s
    }

    /// First-order Lie-Trotter `e^{Ah} e^{Bh}`, written with a trailing zero
    /// A-coefficient so that len(a) = len(b) + 1.
    pub fn lie_trotter() -> Self {
        Self::real("lie-trotter", 1, &[1.0, 0.0], &[1.0])
    }

    /// Number of cycles q = len(b).
    pub fn q(&self) -> usize {
        self.b.len()
    }

    pub fn check_structure(&self) -> Result<()> {
        if self.b.is_empty() {
            return Err(Error::Structural {
                name: self.name.clone(),
                reason: "b must contain at least one coefficient".into(),
            });
        }
        if self.a.len() != self.b.len() + 1 {
            return Err(Error::Structural {
                name: self.name.clone(),
                reason: format!(
                    "len(a) = {} but len(b) + 1 = {}",
                    self.a.len(),
                    self.b.len() + 1
                ),
            });
        }
        if self.a.iter().chain(&self.b).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Structural {
                name: self.name.clone(),
                reason: "non-finite coefficient".into(),
            });
        }
        Ok(())
    }

    pub fn is_palindromic(&self, tol: f64) -> bool {
        let pal = |v: &[Complex64]| v.iter().zip(v.iter().rev()).all(|(x, y)| (x - y).norm() <= tol);
        pal(&self.a) && pal(&self.b)
    }

    pub fn has_complex_coefficients(&self) -> bool {
        self.a.iter().chain(&self.b).any(|z| z.im != 0.0)
    }

    /// Coefficients in reverse order (the adjoint scheme).
    pub fn reversed(&self) -> Self {
        let mut r = self.clone();
        r.a.reverse();
        r.b.reverse();
        r.name = format!("{}-reversed", self.name);
        r
    }

    /// The same scheme applied `copies` times with step `h / copies`, merging
    /// the adjacent A-exponentials at the seams. Useful for cost bookkeeping.
    pub fn repeated(&self, copies: usize) -> Self {
        assert!(copies >= 1);
        let f = Complex64::new(1.0 / copies as f64, 0.0);
        let mut a: Vec<Complex64> = Vec::new();
        let mut b: Vec<Complex64> = Vec::new();
        for c in 0..copies {
            for (i, &ai) in self.a.iter().enumerate() {
                if c > 0 && i == 0 {
                    *a.last_mut().expect("non-empty") += ai * f;
                } else {
                    a.push(ai * f);
                }
            }
            b.extend(self.b.iter().map(|&bi| bi * f));
        }
        let mut s = Self::new(format!("{}x{}", self.name, copies), self.order_n, a, b);
        s.source = self.source.clone();
        s
    }
}

/// Checks `sum(a) = sum(b) = 1` and the symmetry flag.
pub fn validate_consistency(scheme: &TwoStageScheme) -> Result<ValidationReport> {
    scheme.check_structure()?;
    let a_residual = (scheme.a.iter().sum::<Complex64>() - 1.0).norm();
    let b_residual = (scheme.b.iter().sum::<Complex64>() - 1.0).norm();
    let palindromic = scheme.is_palindromic(tolerance::SYMMETRY);
    let symmetry_ok = !scheme.symmetric || palindromic;
    Ok(ValidationReport {
        name: scheme.name.clone(),
        pass: a_residual < tolerance::CONSISTENCY && b_residual < tolerance::CONSISTENCY && symmetry_ok,
        a_residual,
        b_residual,
        palindromic,
        symmetry_ok,
    })
}

/// Like [`validate_consistency`] but turns a failed report into an error.
pub fn require_consistent(scheme: &TwoStageScheme) -> Result<ValidationReport> {
    let report = validate_consistency(scheme)?;
    if report.a_residual >= tolerance::CONSISTENCY || report.b_residual >= tolerance::CONSISTENCY {
        return Err(Error::Inconsistent {
            name: scheme.name.clone(),
            a_residual: report.a_residual,
            b_residual: report.b_residual,
        });
    }
    if !report.symmetry_ok {
        return Err(Error::Structural {
            name: scheme.name.clone(),
            reason: "flagged symmetric but coefficients are not palindromic".into(),
        });
    }
    Ok(report)
}
