//! Bessel functions of the first kind, `I_n(x)` and `J_n(x)`, for integer
//! order and real `0 <= x <= 500`.
//!
//! Values are computed in double-double. For `x <= 1` the power series is
//! summed directly; otherwise Miller's backward recurrence is run from well
//! above the requested orders and normalized with
//! `e^x = I_0 + 2 sum I_n` or `1 = J_0 + 2 sum J_2n`.

use super::ddouble::Dd;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselKind {
    /// Modified Bessel function `I_n`.
    I,
    /// Ordinary Bessel function `J_n`.
    J,
}

pub const MAX_ARGUMENT: f64 = 500.0;

/// `I_n(x)` or `J_n(x)` rounded to `f64`.
pub fn bessel(kind: BesselKind, order: u32, x: f64) -> Result<f64> {
    if !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::Range(format!("Bessel argument {x} outside [0, {MAX_ARGUMENT}]")));
    }
    if order as f64 > 2.0 * x + 200.0 {
        return Err(Error::Range(format!("Bessel order {order} exceeds 2x + 200 at x = {x}")));
    }
    Ok(bessel_sequence(kind, order as usize, x)?[order as usize].to_f64())
}

/// Orders `0..=nmax` in double-double. Unlike [`bessel`] there is no cap on
/// the order; values far beyond the argument simply become tiny.
pub fn bessel_sequence(kind: BesselKind, nmax: usize, x: f64) -> Result<Vec<Dd>> {
    if !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::Range(format!("Bessel argument {x} outside [0, {MAX_ARGUMENT}]")));
    }
    if x == 0.0 {
        let mut v = vec![Dd::ZERO; nmax + 1];
        v[0] = Dd::ONE;
        return Ok(v);
    }
    Ok(if x <= 1.0 {
        power_series(kind, nmax, x)
    } else {
        miller(kind, nmax, x)
    })
}

fn power_series(kind: BesselKind, nmax: usize, x: f64) -> Vec<Dd> {
    let half = Dd::from_f64(x) * Dd::from_f64(0.5);
    let q = match kind {
        BesselKind::I => half.sqr(),
        BesselKind::J => -half.sqr(),
    };
    let mut out = Vec::with_capacity(nmax + 1);
    // lead = (x/2)^n / n!
    let mut lead = Dd::ONE;
    for n in 0..=nmax {
        if n > 0 {
            lead = lead * half / Dd::from_f64(n as f64);
        }
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        let mut m = 1.0;
        loop {
            term = term * q / Dd::from_f64(m * (m + n as f64));
            sum += term;
            if term.abs().hi <= 1e-34 * sum.abs().hi {
                break;
            }
            m += 1.0;
        }
        out.push(lead * sum);
    }
    out
}

fn miller(kind: BesselKind, nmax: usize, x: f64) -> Vec<Dd> {
    // Beyond n ~ x the minimal solution falls off at least geometrically, so
    // a fixed margin plus a sqrt(x) allowance gives far more than 32 digits.
    let start = nmax.max(x.ceil() as usize) + 60 + (4.0 * x.sqrt()).ceil() as usize;
    let xd = Dd::from_f64(x);
    let mut b = vec![Dd::ZERO; start + 2];
    b[start] = Dd::ONE;
    for n in (1..=start).rev() {
        let f = Dd::from_f64(2.0 * n as f64) / xd;
        b[n - 1] = match kind {
            BesselKind::I => f * b[n] + b[n + 1],
            BesselKind::J => f * b[n] - b[n + 1],
        };
        if b[n - 1].hi.abs() > 1e250 {
            for v in b.iter_mut().skip(n - 1) {
                *v = v.mul_pow2(2f64.powi(-800));
            }
        }
    }
    let (sum, target) = match kind {
        BesselKind::I => {
            let mut s = Dd::ZERO;
            for v in b[1..=start].iter().rev() {
                s += *v;
            }
            (b[0] + s.mul_pow2(2.0), xd.exp())
        }
        BesselKind::J => {
            let mut s = Dd::ZERO;
            for v in b[2..=start].iter().step_by(2).rev() {
                s += *v;
            }
            (b[0] + s.mul_pow2(2.0), Dd::ONE)
        }
    };
    let norm = target / sum;
    b.truncate(nmax + 1);
    b.iter().map(|v| *v * norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel(BesselKind::I, 0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel(BesselKind::J, 0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel(BesselKind::I, 3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn small_argument_values() {
        assert!(rel(bessel(BesselKind::I, 0, 1.0).unwrap(), 1.2660658777520084) < 1e-15);
        assert!(rel(bessel(BesselKind::I, 1, 1.0).unwrap(), 0.565159103992485) < 1e-14);
        assert!(rel(bessel(BesselKind::J, 0, 1.0).unwrap(), 0.7651976865579666) < 1e-15);
    }

    #[test]
    fn reference_values() {
        // Reference digits from a 50-digit evaluation.
        let cases = [
            (BesselKind::J, 0, 10.0, -0.24593576445134834),
            (BesselKind::J, 5, 10.0, -0.23406152818679364),
            (BesselKind::J, 150, 100.0, 2.722_902_171_882_048e-16),
            (BesselKind::J, 1, 100.0, -0.077_145_352_014_112_16),
            (BesselKind::I, 0, 10.0, 2815.7166284662545),
            (BesselKind::I, 20, 10.0, 1.2507997356449476e-4),
            (BesselKind::I, 3, 500.0, 2.482345010072729e215),
        ];
        for (kind, n, x, want) in cases {
            let got = bessel(kind, n, x).unwrap();
            assert!(rel(got, want) < 1e-13, "{kind:?} {n} {x}: {got} vs {want}");
        }
    }

    #[test]
    fn first_zero_of_j0() {
        assert!(bessel(BesselKind::J, 0, 2.404825557695773).unwrap().abs() < 1e-10);
    }

    #[test]
    fn series_and_recurrence_agree_near_the_switch() {
        for kind in [BesselKind::I, BesselKind::J] {
            let a = power_series(kind, 30, 1.0);
            let b = miller(kind, 30, 1.0);
            for n in 0..=30 {
                let d = ((a[n] - b[n]) / a[n]).to_f64().abs();
                assert!(d < 1e-28, "{kind:?} n={n}: {d}");
            }
        }
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(bessel(BesselKind::I, 0, 501.0), Err(Error::Range(_))));
        assert!(matches!(bessel(BesselKind::J, 0, -1.0), Err(Error::Range(_))));
        assert!(matches!(bessel(BesselKind::J, 203, 1.0), Err(Error::Range(_))));
    }
}
