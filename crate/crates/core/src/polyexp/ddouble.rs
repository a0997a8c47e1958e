//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`s giving
//! roughly 32 significant decimal digits, plus a complex type built on it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };
    pub const TWO_PI: Dd = Dd {
        hi: std::f64::consts::TAU,
        lo: 2.4492935982947064e-16,
    };
    pub const HALF_PI: Dd = Dd {
        hi: std::f64::consts::FRAC_PI_2,
        lo: 6.123233995736766e-17,
    };
    pub const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };
    pub const EPSILON: f64 = 4.93038065763132e-32;

    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn recip(self) -> Self {
        Dd::ONE / self
    }

    pub fn mul_pow2(self, p: f64) -> Self {
        Dd::new(self.hi * p, self.lo * p)
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        // One Newton step from the double approximation (Karp's trick).
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (p, e) = two_prod(ax, ax);
        let diff = (self - Dd::new(p, e)).hi;
        Dd::from_f64(ax) + Dd::from_f64(diff * (x * 0.5))
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (s, e) = quick_two_sum(hi, self.lo.floor());
            Dd::new(s, e)
        } else {
            Dd::from_f64(hi)
        }
    }

    pub fn round(self) -> Self {
        (self + Dd::from_f64(0.5)).floor()
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.is_zero() {
            return Dd::ONE;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let r = self - Dd::LN2 * Dd::from_f64(k);
        // exp(r) = exp(r / 1024)^1024 with a short Taylor series for the core.
        let s = r.mul_pow2(1.0 / 1024.0);
        let mut term = s;
        let mut sum = s;
        let mut i = 2.0;
        while term.hi.abs() > 1e-36 * sum.hi.abs().max(1e-300) {
            term = term * s / Dd::from_f64(i);
            sum += term;
            i += 1.0;
            if i > 40.0 {
                break;
            }
        }
        // expm1 form keeps precision through the repeated squaring.
        for _ in 0..10 {
            sum = sum.mul_pow2(2.0) + sum.sqr();
        }
        let result = sum + Dd::ONE;
        scale_by_pow2(result, k as i32)
    }

    /// Returns `(sin x, cos x)`.
    pub fn sin_cos(self) -> (Self, Self) {
        if self.is_zero() {
            return (Dd::ZERO, Dd::ONE);
        }
        let n = (self / Dd::TWO_PI).round();
        let r = self - Dd::TWO_PI * n;
        let q = (r / Dd::HALF_PI).round();
        let t = r - Dd::HALF_PI * q;
        let (s, c) = sin_cos_taylor(t);
        match (q.hi as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    /// Decimal representation with `digits` significant digits in scientific
    /// notation, e.g. `-1.2345e-3`.
    pub fn to_sci_string(self, digits: usize) -> String {
        if self.is_zero() {
            return format!("0.{}e0", "0".repeat(digits.saturating_sub(1)));
        }
        if !self.is_finite() {
            return format!("{}", self.hi);
        }
        let negative = self.hi < 0.0;
        let mut x = self.abs();
        let mut e = x.hi.log10().floor() as i32;
        x *= Dd::from_f64(10.0).powi(-e);
        if x.hi >= 10.0 {
            x /= Dd::from_f64(10.0);
            e += 1;
        } else if x.hi < 1.0 {
            x *= Dd::from_f64(10.0);
            e -= 1;
        }
        let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = x.hi.floor().clamp(0.0, 9.0);
            ds.push(d as u8);
            x = (x - Dd::from_f64(d)) * Dd::from_f64(10.0);
        }
        // Round on the extra digit.
        if ds[digits] >= 5 {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    e += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        ds.truncate(digits);
        let mut s = String::new();
        if negative {
            s.push('-');
        }
        s.push((b'0' + ds[0]) as char);
        if digits > 1 {
            s.push('.');
            ds[1..].iter().for_each(|d| s.push((b'0' + d) as char));
        }
        s.push('e');
        s.push_str(&e.to_string());
        s
    }

    /// Parses decimal notation (`123.45`, `-1.2e-7`, ...) into double-double.
    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim();
        let (negative, body) = match t.as_bytes().first()? {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        let (mantissa, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
            None => (body, 0),
        };
        let mut value = Dd::ZERO;
        let mut frac_digits = 0i32;
        let mut seen_point = false;
        let mut any = false;
        for c in mantissa.chars() {
            match c {
                '.' if !seen_point => seen_point = true,
                '0'..='9' => {
                    any = true;
                    value = value * Dd::from_f64(10.0) + Dd::from_f64((c as u8 - b'0') as f64);
                    if seen_point {
                        frac_digits += 1;
                    }
                }
                _ => return None,
            }
        }
        if !any {
            return None;
        }
        let p = exp - frac_digits;
        value = if p >= 0 {
            value * Dd::from_f64(10.0).powi(p)
        } else {
            value / Dd::from_f64(10.0).powi(-p)
        };
        Some(if negative { -value } else { value })
    }
}

fn scale_by_pow2(x: Dd, k: i32) -> Dd {
    // Split large shifts so the intermediate power of two never overflows.
    let mut out = x;
    let mut k = k;
    while k != 0 {
        let step = k.clamp(-1000, 1000);
        let p = 2f64.powi(step);
        out = out.mul_pow2(p);
        k -= step;
    }
    out
}

fn sin_cos_taylor(t: Dd) -> (Dd, Dd) {
    let t2 = t.sqr();
    let mut term = t;
    let mut sin = t;
    let mut i = 1.0;
    loop {
        term = -(term * t2) / Dd::from_f64((i + 1.0) * (i + 2.0));
        i += 2.0;
        sin += term;
        if term.hi.abs() < 1e-35 || i > 60.0 {
            break;
        }
    }
    let mut term = Dd::ONE;
    let mut cos = Dd::ONE;
    let mut i = 0.0;
    loop {
        term = -(term * t2) / Dd::from_f64((i + 1.0) * (i + 2.0));
        i += 2.0;
        cos += term;
        if term.hi.abs() < 1e-35 || i > 60.0 {
            break;
        }
    }
    (sin, cos)
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(32);
        f.write_str(&self.to_sci_string(digits))
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd::new(-self.hi, -self.lo)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

macro_rules! assign_ops {
    ($t:ty) => {
        impl AddAssign for $t {
            fn add_assign(&mut self, b: $t) {
                *self = *self + b;
            }
        }
        impl SubAssign for $t {
            fn sub_assign(&mut self, b: $t) {
                *self = *self - b;
            }
        }
        impl MulAssign for $t {
            fn mul_assign(&mut self, b: $t) {
                *self = *self * b;
            }
        }
        impl DivAssign for $t {
            fn div_assign(&mut self, b: $t) {
                *self = *self / b;
            }
        }
    };
}

assign_ops!(Dd);
assign_ops!(CDd);

/// Complex number with double-double parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub const ZERO: CDd = CDd {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };
    pub const ONE: CDd = CDd {
        re: Dd::ONE,
        im: Dd::ZERO,
    };
    pub const I: CDd = CDd {
        re: Dd::ZERO,
        im: Dd::ONE,
    };

    pub const fn new(re: Dd, im: Dd) -> Self {
        CDd { re, im }
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        CDd::new(Dd::from_f64(re), Dd::from_f64(im))
    }

    pub fn from_c64(z: num_complex::Complex64) -> Self {
        CDd::from_f64(z.re, z.im)
    }

    pub fn real(x: Dd) -> Self {
        CDd::new(x, Dd::ZERO)
    }

    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(self) -> Self {
        CDd::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> Dd {
        self.re.sqr() + self.im.sqr()
    }

    /// Modulus rounded to double; enough for convergence tests and sorting.
    pub fn abs_f64(self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }

    pub fn abs(self) -> Dd {
        let m = self.re.abs().hi.max(self.im.abs().hi);
        if m == 0.0 {
            return Dd::ZERO;
        }
        // Scale to avoid overflow in the squares.
        let s = Dd::from_f64(m);
        let (a, b) = (self.re / s, self.im / s);
        (a.sqr() + b.sqr()).sqrt() * s
    }

    pub fn scale(self, x: Dd) -> Self {
        CDd::new(self.re * x, self.im * x)
    }

    pub fn recip(self) -> Self {
        CDd::ONE / self
    }

    pub fn exp(self) -> Self {
        let m = self.re.exp();
        let (s, c) = self.im.sin_cos();
        CDd::new(m * c, m * s)
    }

    pub fn powi(self, n: u32) -> Self {
        let mut base = self;
        let mut e = n;
        let mut acc = CDd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            e >>= 1;
            if e > 0 {
                base *= base;
            }
        }
        acc
    }
}

impl Neg for CDd {
    type Output = CDd;
    fn neg(self) -> CDd {
        CDd::new(-self.re, -self.im)
    }
}

impl Add for CDd {
    type Output = CDd;
    #[inline]
    fn add(self, b: CDd) -> CDd {
        CDd::new(self.re + b.re, self.im + b.im)
    }
}

impl Sub for CDd {
    type Output = CDd;
    #[inline]
    fn sub(self, b: CDd) -> CDd {
        CDd::new(self.re - b.re, self.im - b.im)
    }
}

impl Mul for CDd {
    type Output = CDd;
    #[inline]
    fn mul(self, b: CDd) -> CDd {
        CDd::new(
            self.re * b.re - self.im * b.im,
            self.re * b.im + self.im * b.re,
        )
    }
}

impl Div for CDd {
    type Output = CDd;
    #[inline]
    fn div(self, b: CDd) -> CDd {
        // Smith-style scaling by the larger component of the divisor.
        if b.re.abs() >= b.im.abs() {
            let r = b.im / b.re;
            let d = b.re + b.im * r;
            CDd::new((self.re + self.im * r) / d, (self.im - self.re * r) / d)
        } else {
            let r = b.re / b.im;
            let d = b.re * r + b.im;
            CDd::new((self.re * r + self.im) / d, (self.im * r - self.re) / d)
        }
    }
}

impl fmt::Display for CDd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(32);
        write!(
            f,
            "({}, {})",
            self.re.to_sci_string(digits),
            self.im.to_sci_string(digits)
        )
    }
}
