//! Fixed-point ball arithmetic over big integers.
//!
//! A [`Ball`] at precision `p` is a midpoint `m` and radius `r`, both in
//! units of `2^-p`, and encloses the real interval `[(m-r)/2^p, (m+r)/2^p]`.
//! Every operation rounds so the true result stays enclosed.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Extra bits carried inside transcendental kernels.
const GUARD_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    mid: BigInt,
    rad: BigUint,
    prec: u32,
}

#[inline]
fn ceil_shr(x: BigUint, s: u32) -> BigUint {
    if s == 0 {
        return x;
    }
    let mask = (BigUint::one() << s) - 1u32;
    let round_up = !(&x & &mask).is_zero();
    let mut q = x >> s;
    if round_up {
        q += 1u32;
    }
    q
}

fn ceil_sqrt(x: &BigUint) -> BigUint {
    let s = x.sqrt();
    if &(&s * &s) == x {
        s
    } else {
        s + 1u32
    }
}

/// Closest `f64` to `m · 2^shift`.
pub(crate) fn scaled_to_f64(m: &BigInt, shift: i64) -> f64 {
    let bits = m.bits() as i64;
    let (top, exp) = if bits > 62 {
        ((m >> (bits - 62) as usize).to_i64().unwrap_or(0), shift + bits - 62)
    } else {
        (m.to_i64().unwrap_or(0), shift)
    };
    let mut v = top as f64;
    let mut e = exp;
    // powi saturates, so walk the exponent in steps that stay representable
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            break;
        }
    }
    v * 2f64.powi(e as i32)
}

impl Ball {
    pub fn new(mid: BigInt, rad: BigUint, prec: u32) -> Self {
        Ball { mid, rad, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Ball::new(BigInt::zero(), BigUint::zero(), prec)
    }

    pub fn from_int(v: &BigInt, prec: u32) -> Self {
        Ball::new(v << prec, BigUint::zero(), prec)
    }

    pub fn from_u64(v: u64, prec: u32) -> Self {
        Ball::from_int(&BigInt::from(v), prec)
    }

    /// Encloses `num / den`.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::IndeterminateSign);
        }
        let scaled = num << prec;
        let (q, r) = scaled.div_mod_floor(den);
        let rad = if r.is_zero() { 0u32 } else { 1u32 };
        Ok(Ball::new(q, BigUint::from(rad), prec))
    }

    /// Encloses a finite `f64` exactly when representable at `prec`.
    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite(), "non-finite f64");
        if x == 0.0 {
            return Ball::zero(prec);
        }
        let bits = x.abs().to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let mut m = BigInt::from(mant);
        if x < 0.0 {
            m = -m;
        }
        let shift = exp + prec as i64;
        if shift >= 0 {
            Ball::new(m << shift as usize, BigUint::zero(), prec)
        } else {
            let s = (-shift) as u32;
            let floored = m.clone() >> s as usize;
            let exact = (&floored << s as usize) == m;
            Ball::new(floored, BigUint::from(if exact { 0u32 } else { 1u32 }), prec)
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mid(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad(&self) -> &BigUint {
        &self.rad
    }

    /// Lower end of the enclosure, in ulps.
    pub fn lower_ulps(&self) -> BigInt {
        &self.mid - BigInt::from(self.rad.clone())
    }

    /// Upper end of the enclosure, in ulps.
    pub fn upper_ulps(&self) -> BigInt {
        &self.mid + BigInt::from(self.rad.clone())
    }

    /// Upper bound on `|x|` over the enclosure, in ulps.
    pub fn abs_upper_ulps(&self) -> BigUint {
        self.mid.magnitude() + &self.rad
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.magnitude() <= &self.rad
    }

    pub fn is_positive(&self) -> bool {
        self.lower_ulps().is_positive()
    }

    /// Rescales to `prec`, rounding outward when precision drops.
    pub fn with_prec(&self, prec: u32) -> Ball {
        use std::cmp::Ordering::*;
        match prec.cmp(&self.prec) {
            Equal => self.clone(),
            Greater => {
                let s = (prec - self.prec) as usize;
                Ball::new(&self.mid << s, &self.rad << s, prec)
            }
            Less => {
                let s = self.prec - prec;
                let mid = &self.mid >> s as usize;
                let rad = ceil_shr(self.rad.clone(), s) + 1u32;
                Ball::new(mid, rad, prec)
            }
        }
    }

    fn check_prec(&self, other: &Ball) {
        assert_eq!(self.prec, other.prec, "ball precision mismatch");
    }

    pub fn add(&self, other: &Ball) -> Ball {
        self.check_prec(other);
        Ball::new(&self.mid + &other.mid, &self.rad + &other.rad, self.prec)
    }

    pub fn sub(&self, other: &Ball) -> Ball {
        self.check_prec(other);
        Ball::new(&self.mid - &other.mid, &self.rad + &other.rad, self.prec)
    }

    pub fn neg(&self) -> Ball {
        Ball::new(-&self.mid, self.rad.clone(), self.prec)
    }

    pub fn abs(&self) -> Ball {
        Ball::new(self.mid.abs(), self.rad.clone(), self.prec)
    }

    pub fn mul(&self, other: &Ball) -> Ball {
        self.check_prec(other);
        let p = self.prec;
        let full = &self.mid * &other.mid;
        let mid = full >> p as usize;
        let spread = self.mid.magnitude() * &other.rad
            + other.mid.magnitude() * &self.rad
            + &self.rad * &other.rad;
        let rad = ceil_shr(spread, p) + 1u32;
        Ball::new(mid, rad, p)
    }

    pub fn mul_int(&self, k: &BigInt) -> Ball {
        Ball::new(&self.mid * k, &self.rad * k.magnitude(), self.prec)
    }

    pub fn div_int(&self, k: &BigInt) -> Result<Ball> {
        if k.is_zero() {
            return Err(Error::IndeterminateSign);
        }
        let (q, r) = self.mid.div_mod_floor(k);
        let (rq, rr) = self.rad.div_rem(k.magnitude());
        let mut rad = rq;
        if !rr.is_zero() {
            rad += 1u32;
        }
        if !r.is_zero() {
            rad += 1u32;
        }
        Ok(Ball::new(q, rad, self.prec))
    }

    pub fn div(&self, other: &Ball) -> Result<Ball> {
        self.check_prec(other);
        if other.contains_zero() {
            return Err(Error::IndeterminateSign);
        }
        let p = self.prec;
        let q = (&self.mid << p as usize).div_floor(&other.mid);
        let slack = other.mid.magnitude() - &other.rad;
        let num = (&self.rad << p as usize) + (q.magnitude() + 1u32) * &other.rad;
        let (mut rad, rem) = num.div_rem(&slack);
        if !rem.is_zero() {
            rad += 1u32;
        }
        rad += 1u32;
        Ok(Ball::new(q, rad, p))
    }

    /// Square root of a ball whose true value is known to be nonnegative.
    /// The negative part of the enclosure is clipped.
    pub fn sqrt(&self) -> Result<Ball> {
        let upper = self.upper_ulps();
        if upper.is_negative() {
            return Err(Error::IndeterminateSign);
        }
        let p = self.prec as usize;
        let lower = self.lower_ulps();
        let lo = if lower.is_positive() {
            (lower.magnitude() << p).sqrt()
        } else {
            BigUint::zero()
        };
        let hi = ceil_sqrt(&(upper.magnitude() << p));
        let mid: BigUint = (&lo + &hi) >> 1;
        let rad = &hi - &mid;
        Ok(Ball::new(BigInt::from(mid), rad, self.prec))
    }

    /// `n^(1/k)` for a nonnegative integer `n`.
    pub fn nth_root_of(n: &BigUint, k: u32, prec: u32) -> Ball {
        assert!(k >= 1);
        let scaled = n << (k as usize * prec as usize);
        let r = scaled.nth_root(k);
        let exact = r.pow(k) == scaled;
        Ball::new(
            BigInt::from(r),
            BigUint::from(if exact { 0u32 } else { 1u32 }),
            prec,
        )
    }

    /// True when every point of `self` is ≤ every point of `other`.
    pub fn certainly_le(&self, other: &Ball) -> bool {
        self.check_prec(other);
        self.upper_ulps() <= other.lower_ulps()
    }

    /// True when the enclosures intersect.
    pub fn overlaps(&self, other: &Ball) -> bool {
        self.check_prec(other);
        self.lower_ulps() <= other.upper_ulps() && other.lower_ulps() <= self.upper_ulps()
    }

    pub fn to_f64(&self) -> f64 {
        scaled_to_f64(&self.mid, -(self.prec as i64))
    }

    /// Upper bound on the radius as an `f64`.
    pub fn rad_f64(&self) -> f64 {
        let r = scaled_to_f64(&BigInt::from(self.rad.clone()), -(self.prec as i64));
        if r == 0.0 && !self.rad.is_zero() {
            f64::MIN_POSITIVE
        } else {
            r * (1.0 + 1e-12)
        }
    }

    /// Upper bound on `rad / |mid|`; infinite if the ball touches zero.
    pub fn rel_error(&self) -> f64 {
        if self.rad.is_zero() {
            return 0.0;
        }
        if self.contains_zero() {
            return f64::INFINITY;
        }
        let lower = self.mid.magnitude() - &self.rad;
        let shift = (lower.bits().max(self.rad.bits()) as i64 - 60).max(0);
        let r = scaled_to_f64(&BigInt::from(self.rad.clone()), -shift);
        let l = scaled_to_f64(&BigInt::from(lower), -shift);
        (r / l) * (1.0 + 1e-12)
    }

    /// Midpoint in scientific notation with `sig` significant digits.
    pub fn mid_to_sci(&self, sig: usize) -> String {
        sci_string(&self.mid, self.prec, sig)
    }

    /// Radius in scientific notation, rounded up.
    pub fn rad_to_sci(&self) -> String {
        if self.rad.is_zero() {
            return "0".to_string();
        }
        format!("{:.3e}", self.rad_f64())
    }
}

/// Renders `m · 2^-prec` with `sig` significant digits (round half away).
pub(crate) fn sci_string(m: &BigInt, prec: u32, sig: usize) -> String {
    let sig = sig.max(1);
    if m.is_zero() {
        return "0".to_string();
    }
    let neg = m.is_negative();
    let mag = m.magnitude();
    let approx = scaled_to_f64(&BigInt::from(mag.clone()), -(prec as i64));
    let mut exp10 = if approx > 0.0 && approx.is_finite() {
        approx.log10().floor() as i64
    } else {
        // value is far outside f64 range; estimate from bit length
        ((mag.bits() as f64 - prec as f64) * std::f64::consts::LOG10_2).floor() as i64
    };
    let ten = BigUint::from(10u32);
    let digits = loop {
        // q = round(mag · 10^(sig-1-exp10) / 2^prec)
        let s = sig as i64 - 1 - exp10;
        let (num, den) = if s >= 0 {
            (mag * ten.pow(s as u32), BigUint::one() << prec as usize)
        } else {
            (mag.clone(), (BigUint::one() << prec as usize) * ten.pow((-s) as u32))
        };
        let (q, r) = num.div_rem(&den);
        let q = if (&r << 1usize) >= den { q + 1u32 } else { q };
        let text = q.to_str_radix(10);
        if text.len() > sig {
            exp10 += 1;
            continue;
        }
        if text.len() < sig {
            exp10 -= 1;
            continue;
        }
        break text;
    };
    let (head, tail) = digits.split_at(1);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(head);
    if !tail.is_empty() {
        out.push('.');
        out.push_str(tail);
    }
    out.push_str(&format!("e{exp10}"));
    out
}

/// Complex disk: midpoint `re + i·im` and radius, all in ulps of `2^-prec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexBall {
    pub(crate) re: BigInt,
    pub(crate) im: BigInt,
    pub(crate) rad: BigUint,
    pub(crate) prec: u32,
}

impl ComplexBall {
    pub fn from_parts(re: &Ball, im: &Ball) -> ComplexBall {
        re.check_prec(im);
        ComplexBall {
            re: re.mid.clone(),
            im: im.mid.clone(),
            rad: &re.rad + &im.rad,
            prec: re.prec,
        }
    }

    pub fn zero(prec: u32) -> Self {
        ComplexBall {
            re: BigInt::zero(),
            im: BigInt::zero(),
            rad: BigUint::zero(),
            prec,
        }
    }

    /// `e^(2πi·a/m)`.
    pub fn root_of_unity(a: &BigInt, m: &BigInt, prec: u32) -> Result<ComplexBall> {
        let two_a: BigInt = a * 2;
        let re = cos_pi_ratio(&two_a, m, prec)?;
        let im = sin_pi_ratio(&two_a, m, prec)?;
        Ok(ComplexBall::from_parts(&re, &im))
    }

    /// Ceiling of the midpoint modulus, in ulps.
    pub fn mid_abs_upper(&self) -> BigUint {
        let norm = self.re.magnitude().pow(2) + self.im.magnitude().pow(2);
        ceil_sqrt(&norm)
    }

    /// Encloses `|z|`.
    pub fn abs(&self) -> Ball {
        let norm = self.re.magnitude().pow(2) + self.im.magnitude().pow(2);
        let lo_mid = norm.sqrt();
        let hi_mid = ceil_sqrt(&norm);
        let lo = if lo_mid > self.rad {
            &lo_mid - &self.rad
        } else {
            BigUint::zero()
        };
        let hi = hi_mid + &self.rad;
        let mid: BigUint = (&lo + &hi) >> 1;
        let rad = &hi - &mid;
        Ball::new(BigInt::from(mid), rad, self.prec)
    }

    pub fn mul(&self, other: &ComplexBall) -> ComplexBall {
        assert_eq!(self.prec, other.prec, "ball precision mismatch");
        let p = self.prec as usize;
        let re = (&self.re * &other.re - &self.im * &other.im) >> p;
        let im = (&self.re * &other.im + &self.im * &other.re) >> p;
        let spread = self.mid_abs_upper() * &other.rad
            + other.mid_abs_upper() * &self.rad
            + &self.rad * &other.rad;
        let rad = ceil_shr(spread, self.prec) + 2u32;
        ComplexBall {
            re,
            im,
            rad,
            prec: self.prec,
        }
    }
}

/// π at `prec` bits, cached per precision.
pub fn pi(prec: u32) -> Ball {
    static CACHE: OnceLock<Mutex<HashMap<u32, Ball>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().expect("pi cache poisoned").get(&prec) {
        return b.clone();
    }
    let w = prec + GUARD_BITS;
    let (a5, r5) = atan_inv(5, w);
    let (a239, r239) = atan_inv(239, w);
    let mid = a5 * 16 - a239 * 4;
    let rad = BigUint::from(16 * r5 + 4 * r239);
    let value = Ball::new(mid, rad, w).with_prec(prec);
    cache
        .lock()
        .expect("pi cache poisoned")
        .insert(prec, value.clone());
    value
}

/// `atan(1/m) · 2^w` as a floor-sum plus an error bound in ulps.
fn atan_inv(m: u64, w: u32) -> (BigInt, u64) {
    let one = BigUint::one() << w as usize;
    let m2 = BigUint::from(m * m);
    let mut power = BigUint::from(m);
    let mut sum = BigInt::zero();
    let mut terms = 0u64;
    let mut j = 0u64;
    while power <= one {
        let term = &one / (&power * BigUint::from(2 * j + 1));
        if j % 2 == 0 {
            sum += BigInt::from(term);
        } else {
            sum -= BigInt::from(term);
        }
        terms += 1;
        power *= &m2;
        j += 1;
    }
    // each floor loses < 1 ulp; the omitted tail is < 1 ulp
    (sum, terms + 1)
}

/// `sin(x)` or `cos(x)` by Taylor series for a ball `0 ≤ x ≤ π/4`.
fn taylor_kernel(x: &Ball, cosine: bool) -> Ball {
    let p = x.prec;
    let x2 = x.mul(x);
    let (mut term, mut k) = if cosine {
        (Ball::from_u64(1, p), 0u64)
    } else {
        (x.clone(), 1u64)
    };
    let mut sum = term.clone();
    let mut negate = true;
    loop {
        term = term
            .mul(&x2)
            .div_int(&BigInt::from((k + 1) * (k + 2)))
            .expect("nonzero divisor");
        k += 2;
        if term.abs_upper_ulps() <= BigUint::one() {
            break;
        }
        sum = if negate { sum.sub(&term) } else { sum.add(&term) };
        negate = !negate;
    }
    // alternating series with decreasing terms: the tail is below the first omitted term
    let tail = term.abs_upper_ulps();
    Ball::new(sum.mid, sum.rad + tail, p)
}

/// Encloses `sin(π · num/den)` for arbitrary integers; the ratio is reduced
/// exactly before any rounding occurs.
pub fn sin_pi_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Result<Ball> {
    if den.is_zero() {
        return Err(Error::IndeterminateSign);
    }
    let (num, den) = if den.is_negative() {
        (-num, -den)
    } else {
        (num.clone(), den.clone())
    };
    // sin has period 2 in units of π
    let two_den: BigInt = &den * 2;
    let mut r = num.mod_floor(&two_den);
    let mut negative = false;
    if r >= den {
        r -= &den;
        negative = true;
    }
    // now angle = rπ/den in [0, π); fold onto [0, π/2]
    if &r * 2 > den {
        r = &den - &r;
    }
    let w = prec + GUARD_BITS;
    let value = if r.is_zero() {
        Ball::zero(w)
    } else if &r * 4 <= den {
        let x = pi(w).mul_int(&r).div_int(&den)?;
        taylor_kernel(&x, false)
    } else {
        // sin(θ) = cos(π/2 − θ), with π/2 − θ = (den − 2r)π / (2den)
        let num2 = &den - &r * 2;
        let x = pi(w).mul_int(&num2).div_int(&two_den)?;
        taylor_kernel(&x, true)
    };
    let value = if negative { value.neg() } else { value };
    Ok(value.with_prec(prec))
}

/// Encloses `cos(π · num/den)`.
pub fn cos_pi_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Result<Ball> {
    // cos(x) = sin(x + π/2)
    let num2: BigInt = num * 2 + den;
    let den2: BigInt = den * 2;
    sin_pi_ratio(&num2, &den2, prec)
}

/// Encloses `|sin(π · num/den)|`.
pub fn abs_sin_pi_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Result<Ball> {
    let s = sin_pi_ratio(num, den, prec)?;
    Ok(if s.mid.sign() == Sign::Minus { s.neg() } else { s })
}
