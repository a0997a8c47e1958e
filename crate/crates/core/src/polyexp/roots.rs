//! Zeros of the truncated Taylor and Chebyshev expansions of `e^z`.
//!
//! Expanding these polynomials in monomials and evaluating them near their
//! zeros cancels catastrophically, because most zeros sit where `|e^z|` is far
//! smaller than the individual terms. Both families are therefore evaluated as
//! `p(z) = e^z - tail(z)`, the tail being the rapidly convergent remainder of
//! the infinite series, all in double-double. Aberth-Ehrlich iteration with
//! simultaneous (Jacobi) updates then finds all zeros at once.

use super::ddouble::{CDd, Dd};
use super::series::chebyshev_mu;
use super::Axis;
use crate::error::{Error, Result};
use crate::tolerance;
use std::f64::consts::PI;

pub const MAX_TAYLOR_DEGREE: usize = 400;

/// Stable evaluator of `p` and `p'` for one polynomial.
#[derive(Clone, Debug)]
pub(crate) enum Evaluator {
    Taylor {
        k: usize,
    },
    Chebyshev {
        k: usize,
        gamma_h: f64,
        axis: Axis,
        /// `mu_0 ..= mu_N` with `N` well beyond `k`.
        mu: Vec<CDd>,
    },
}

const TAIL_TOL: f64 = 1e-34;

impl Evaluator {
    pub fn taylor(k: usize) -> Self {
        Evaluator::Taylor { k }
    }

    pub fn chebyshev(k: usize, gamma_h: f64, axis: Axis) -> Result<Self> {
        let nmax = 3 * k + (3.0 * gamma_h).ceil() as usize + 200;
        let mu = chebyshev_mu(gamma_h, axis, nmax)?;
        Ok(Evaluator::Chebyshev { k, gamma_h, axis, mu })
    }

    pub fn degree(&self) -> usize {
        match self {
            Evaluator::Taylor { k } | Evaluator::Chebyshev { k, .. } => *k,
        }
    }

    /// `(p(z), p'(z))`, or `None` when the tail fails to converge.
    pub fn eval(&self, z: CDd) -> Option<(CDd, CDd)> {
        match self {
            Evaluator::Taylor { k } => Some(taylor_eval(*k, z)),
            Evaluator::Chebyshev { k, gamma_h, axis, mu } => chebyshev_eval(*k, *gamma_h, *axis, mu, z),
        }
    }
}

fn taylor_eval(k: usize, z: CDd) -> (CDd, CDd) {
    // z^k / k!
    let mut pw = CDd::ONE;
    for j in 1..=k {
        pw *= z.scale(Dd::from_f64(j as f64).recip());
    }
    let first = pw * z.scale(Dd::from_f64((k + 1) as f64).recip());
    // 1F1(1; k+2; z) = sum_m z^m / ((k+2)(k+3)...(k+1+m))
    let mut term = CDd::ONE;
    let mut hyp = CDd::ONE;
    let mut m = 1usize;
    loop {
        term *= z.scale(Dd::from_f64((k + 1 + m) as f64).recip());
        hyp += term;
        if term.abs_f64() <= TAIL_TOL * hyp.abs_f64() || m > 100_000 {
            break;
        }
        m += 1;
    }
    let p = z.exp() - first * hyp;
    (p, p - pw)
}

fn chebyshev_eval(k: usize, gamma_h: f64, axis: Axis, mu: &[CDd], z: CDd) -> Option<(CDd, CDd)> {
    let inv = Dd::from_f64(gamma_h).recip();
    // dx/dz as a complex constant.
    let dxdz = match axis {
        Axis::Real => CDd::real(inv),
        Axis::Imaginary => CDd::new(Dd::ZERO, -inv),
    };
    let x = z * dxdz;
    let two_x = x.scale(Dd::from_f64(2.0));
    let ez = z.exp();
    let scale = ez.abs_f64();
    // T_{n-1}, T_n and U_{n-2}, U_{n-1}; T'_n = n U_{n-1}.
    let (mut t_prev, mut t) = (CDd::ONE, x);
    let (mut u_prev, mut u) = (CDd::ZERO, CDd::ONE);
    let mut tail = CDd::ZERO;
    let mut dtail = CDd::ZERO;
    let mut quiet = 0;
    for (n, m) in mu.iter().enumerate().skip(1) {
        if n > 1 {
            let tn = two_x * t - t_prev;
            t_prev = t;
            t = tn;
            let un = two_x * u - u_prev;
            u_prev = u;
            u = un;
        }
        if n <= k {
            continue;
        }
        let term = *m * t;
        let dterm = *m * u.scale(Dd::from_f64(n as f64));
        tail += term;
        dtail += dterm;
        let size = term.abs_f64().max(dterm.abs_f64());
        if !size.is_finite() {
            return None;
        }
        if size <= TAIL_TOL * scale.max(tail.abs_f64()) {
            quiet += 1;
            if quiet >= 3 {
                return Some((ez - tail, ez - dtail * dxdz));
            }
        } else {
            quiet = 0;
        }
    }
    None
}

/// Outcome of a root computation.
#[derive(Clone, Debug)]
pub(crate) struct RootSet {
    pub zeros: Vec<CDd>,
    pub worst_residual: f64,
}

fn ratio(eval: &Evaluator, z: CDd) -> Option<CDd> {
    let (p, dp) = eval.eval(z)?;
    if dp.abs_f64() == 0.0 {
        return None;
    }
    Some(p / dp)
}

/// Aberth-Ehrlich iteration from `init`; returns the converged zeros.
fn aberth(eval: &Evaluator, init: Vec<CDd>, sweeps: usize) -> std::result::Result<Vec<CDd>, f64> {
    let n = init.len();
    let mut z = init;
    let mut worst = f64::INFINITY;
    for _ in 0..sweeps {
        let mut newton = Vec::with_capacity(n);
        for &zi in &z {
            match ratio(eval, zi) {
                Some(r) => newton.push(r),
                None => return Err(f64::INFINITY),
            }
        }
        let mut s = vec![CDd::ZERO; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let r = (z[i] - z[j]).recip();
                s[i] += r;
                s[j] -= r;
            }
        }
        worst = 0.0f64;
        for i in 0..n {
            let w = newton[i] / (CDd::ONE - newton[i] * s[i]);
            let mag = w.abs_f64();
            if !mag.is_finite() {
                return Err(f64::INFINITY);
            }
            worst = worst.max(mag / z[i].abs_f64().max(1.0));
            z[i] -= w;
        }
        if worst < 1e-29 {
            return Ok(z);
        }
    }
    Err(worst)
}

/// Forces exact conjugate symmetry on a numerically symmetric set.
pub(crate) fn symmetrize(zeros: &mut [CDd]) -> Result<()> {
    let scale = zeros.iter().map(|z| z.abs_f64()).fold(1.0, f64::max);
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for (i, z) in zeros.iter_mut().enumerate() {
        if z.im.abs().hi <= 1e-22 * scale {
            z.im = Dd::ZERO;
        } else if z.im.hi > 0.0 {
            upper.push(i);
        } else {
            lower.push(i);
        }
    }
    if upper.len() != lower.len() {
        return Err(Error::NotConjugateClosed(format!(
            "{} zeros above the real axis, {} below",
            upper.len(),
            lower.len()
        )));
    }
    let mut taken = vec![false; lower.len()];
    for &u in &upper {
        let target = zeros[u].conj();
        let (best, dist) = lower
            .iter()
            .enumerate()
            .filter(|(j, _)| !taken[*j])
            .map(|(j, &l)| (j, (zeros[l] - target).abs_f64()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("counts match");
        if dist > 1e-20 * scale {
            return Err(Error::NotConjugateClosed(format!(
                "zero {} has no conjugate partner (nearest at distance {dist:e})",
                zeros[u]
            )));
        }
        taken[best] = true;
        let l = lower[best];
        let avg = CDd::new(
            (zeros[u].re + zeros[l].re).mul_pow2(0.5),
            (zeros[u].im - zeros[l].im).mul_pow2(0.5),
        );
        zeros[u] = avg;
        zeros[l] = avg.conj();
    }
    Ok(())
}

fn polish_and_check(eval: &Evaluator, mut zeros: Vec<CDd>) -> Result<RootSet> {
    let k = eval.degree();
    for z in zeros.iter_mut() {
        if let Some(r) = ratio(eval, *z) {
            *z -= r;
        }
    }
    symmetrize(&mut zeros)?;
    let mut worst = 0.0f64;
    for &z in &zeros {
        let r = ratio(eval, z).map_or(f64::INFINITY, |r| r.abs_f64());
        worst = worst.max(r);
    }
    if !(worst < tolerance::ROOT_RESIDUAL_PER_DEGREE * k as f64) {
        return Err(Error::NonConvergence {
            iterations: tolerance::ROOT_SWEEPS,
            worst_residual: worst,
        });
    }
    // Canonical order: by real part, then imaginary part.
    zeros.sort_by(|a, b| a.re.hi.total_cmp(&b.re.hi).then(a.im.hi.total_cmp(&b.im.hi)));
    Ok(RootSet {
        zeros,
        worst_residual: worst,
    })
}

fn solve(eval: &Evaluator, guesses: Vec<Vec<CDd>>) -> Result<RootSet> {
    let mut worst = f64::INFINITY;
    for init in guesses {
        match aberth(eval, init, tolerance::ROOT_SWEEPS) {
            Ok(z) => match polish_and_check(eval, z) {
                Ok(set) => return Ok(set),
                Err(Error::NonConvergence { worst_residual, .. }) => worst = worst.min(worst_residual),
                Err(e) => return Err(e),
            },
            Err(w) => worst = worst.min(w),
        }
    }
    Err(Error::NonConvergence {
        iterations: tolerance::ROOT_SWEEPS,
        worst_residual: worst,
    })
}

/// Angles `2 pi (j + 1/2) / k`, symmetric under `theta -> 2 pi - theta`.
fn angles(k: usize) -> impl Iterator<Item = f64> {
    (0..k).map(move |j| 2.0 * PI * (j as f64 + 0.5) / k as f64)
}

fn circle(k: usize, radius: f64) -> Vec<CDd> {
    angles(k)
        .enumerate()
        .map(|(j, th)| {
            if 2 * j + 1 == k {
                CDd::from_f64(-radius, 0.0)
            } else {
                CDd::from_f64(radius * th.cos(), radius * th.sin())
            }
        })
        .collect()
}

/// Point `w` in the upper half of the Szegő curve `|w e^{1-w}| = 1`,
/// `|w| <= 1`, at which `arg(w e^{1-w}) = theta`, for `theta` in `[0, pi]`.
pub(crate) fn szego_point(theta: f64) -> (f64, f64) {
    // For polar angle phi the modulus r solves ln r + 1 - r cos(phi) = 0.
    let radius = |phi: f64| {
        let (mut lo, mut hi) = (1e-12f64, 1.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid.ln() + 1.0 - mid * phi.cos() < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let arg = |phi: f64| phi - radius(phi) * phi.sin();
    let (mut lo, mut hi) = (0.0f64, PI);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if arg(mid) < theta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi = 0.5 * (lo + hi);
    let r = radius(phi);
    (r * phi.cos(), r * phi.sin())
}

fn szego_guesses(k: usize) -> Vec<CDd> {
    angles(k)
        .enumerate()
        .map(|(j, th)| {
            if 2 * j + 1 == k {
                return CDd::from_f64(-0.2784645427610738 * k as f64, 0.0);
            }
            let (re, im) = szego_point(if th <= PI { th } else { 2.0 * PI - th });
            let im = if th <= PI { im } else { -im };
            CDd::from_f64(re * k as f64, im * k as f64)
        })
        .collect()
}

/// All `k` zeros of `sum_{i<=k} z^i / i!`.
pub(crate) fn taylor_roots(k: usize) -> Result<RootSet> {
    if k == 0 || k > MAX_TAYLOR_DEGREE {
        return Err(Error::Range(format!("Taylor degree must lie in 1..={MAX_TAYLOR_DEGREE}, got {k}")));
    }
    if k == 1 {
        return Ok(RootSet {
            zeros: vec![CDd::from_f64(-1.0, 0.0)],
            worst_residual: 0.0,
        });
    }
    let eval = Evaluator::taylor(k);
    solve(&eval, vec![szego_guesses(k), circle(k, 0.6 * k as f64)])
}

/// All `k` zeros of the degree-`k` Chebyshev expansion of `e^z` on the given
/// axis, scaled to the interval `[-Gamma h, Gamma h]`.
pub(crate) fn chebyshev_roots(k: usize, gamma_h: f64, axis: Axis) -> Result<RootSet> {
    if k == 0 {
        return Err(Error::Range("Chebyshev degree must be at least 1".into()));
    }
    if !(gamma_h > 0.0) {
        return Err(Error::Range(format!("zeros need Gamma h > 0, got {gamma_h}")));
    }
    let eval = Evaluator::chebyshev(k, gamma_h, axis)?;
    let Evaluator::Chebyshev { mu, .. } = &eval else { unreachable!() };
    let lead = mu[k].abs_f64();
    if !(lead > 1e-280) {
        return Err(Error::Range(format!(
            "degree {k} is far beyond what Gamma h = {gamma_h} needs; leading coefficient underflows"
        )));
    }
    if k == 1 {
        // mu_0 + mu_1 x(z) = 0.
        let (m0, m1) = (mu[0], mu[1]);
        let x = -(m0 / m1);
        let z = match axis {
            Axis::Real => x.scale(Dd::from_f64(gamma_h)),
            Axis::Imaginary => (x * CDd::I).scale(Dd::from_f64(gamma_h)),
        };
        return polish_and_check(&eval, vec![z]);
    }
    // Ellipse through the Bernstein parameter rho at which |mu_k| rho^k ~ 1.
    let rho = lead.powf(-1.0 / k as f64).max(1.05);
    let (major, minor) = (0.5 * (rho + 1.0 / rho) * gamma_h, 0.5 * (rho - 1.0 / rho) * gamma_h);
    let (a, b) = match axis {
        Axis::Real => (major, minor),
        Axis::Imaginary => (minor, major),
    };
    let ellipse = angles(k)
        .enumerate()
        .map(|(j, th)| {
            if 2 * j + 1 == k {
                CDd::from_f64(-a, 0.0)
            } else {
                CDd::from_f64(a * th.cos(), b * th.sin())
            }
        })
        .collect();
    solve(&eval, vec![ellipse, circle(k, major.max(minor) * 1.1)])
}

/// `p(z)` in double-double.
pub(crate) fn reference_value(eval: &Evaluator, z: CDd) -> Option<CDd> {
    eval.eval(z).map(|(p, _)| p)
}
