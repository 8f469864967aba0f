//! Dense polynomials with exact big-integer coefficients, and certified
//! evaluation on the unit circle.

pub mod ball;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use ball::{Ball, ComplexBall};

/// Above this many coefficients (in the shorter factor) multiplication
/// switches from schoolbook to Karatsuba.
pub const KARATSUBA_THRESHOLD: usize = 512;

/// Largest working precision any evaluation will accept.
pub const MAX_PRECISION_BITS: u32 = 16_384;

/// Smallest working precision any evaluation will accept.
pub const MIN_PRECISION_BITS: u32 = 64;

/// Polynomial with integer coefficients, lowest degree first.
///
/// The zero polynomial has no coefficients; otherwise the last
/// coefficient is nonzero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter().map(|c| c.to_string())).finish()
    }
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        IntPoly { coeffs: vec![BigInt::one()] }
    }

    /// `z^m − 1`.
    pub fn binomial(m: usize) -> Self {
        assert!(m >= 1);
        let mut coeffs = vec![BigInt::zero(); m + 1];
        coeffs[0] = BigInt::from(-1);
        coeffs[m] = BigInt::one();
        IntPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Largest absolute coefficient; zero for the zero polynomial.
    pub fn height(&self) -> BigUint {
        self.coeffs
            .iter()
            .map(|c| c.magnitude())
            .max()
            .cloned()
            .unwrap_or_default()
    }

    pub fn is_palindromic(&self) -> bool {
        self.coeffs.iter().eq(self.coeffs.iter().rev())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        IntPoly::new(mul_slices(&self.coeffs, &other.coeffs))
    }

    /// Quotient `q` with `q · g = self`, or [`Error::InexactDivision`].
    pub fn exact_div(&self, g: &IntPoly) -> Result<IntPoly> {
        let dg = g.degree().ok_or(Error::DivisionByZero)?;
        let Some(df) = self.degree() else {
            return Ok(IntPoly::zero());
        };
        if df < dg {
            return Err(Error::InexactDivision);
        }
        let lead = &g.coeffs[dg];
        let unit_lead = lead.is_one();
        let support: Vec<(usize, &BigInt)> = g.coeffs[..dg]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); df - dg + 1];
        for i in (0..=df - dg).rev() {
            let top = std::mem::take(&mut rem[i + dg]);
            if top.is_zero() {
                continue;
            }
            let q = if unit_lead {
                top
            } else {
                let (q, r) = top.div_rem(lead);
                if !r.is_zero() {
                    return Err(Error::InexactDivision);
                }
                q
            };
            for &(j, c) in &support {
                sub_scaled(&mut rem[i + j], &q, c);
            }
            quot[i] = q;
        }
        if rem[..dg].iter().any(|c| !c.is_zero()) {
            return Err(Error::InexactDivision);
        }
        Ok(IntPoly::new(quot))
    }

    /// Substitutes `z ↦ z^e`.
    pub fn inflate(&self, e: usize) -> IntPoly {
        assert!(e >= 1, "inflation exponent must be positive");
        if e == 1 || self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![BigInt::zero(); (self.coeffs.len() - 1) * e + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * e] = c.clone();
        }
        IntPoly { coeffs }
    }

    /// Multiplies by `z^m − 1` in linear time.
    pub fn mul_binomial(&self, m: usize) -> IntPoly {
        assert!(m >= 1);
        if self.is_zero() {
            return IntPoly::zero();
        }
        let len = self.coeffs.len() + m;
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            let shifted = i.checked_sub(m).and_then(|j| self.coeffs.get(j));
            let here = self.coeffs.get(i);
            out.push(match (shifted, here) {
                (Some(a), Some(b)) => a - b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => -b,
                (None, None) => BigInt::zero(),
            });
        }
        IntPoly::new(out)
    }

    /// Divides by `z^m − 1` in linear time, failing unless exact.
    pub fn div_binomial(&self, m: usize) -> Result<IntPoly> {
        assert!(m >= 1);
        let Some(d) = self.degree() else {
            return Ok(IntPoly::zero());
        };
        if d < m {
            return Err(Error::InexactDivision);
        }
        let dq = d - m;
        // f_i = q_{i−m} − q_i, solved upward
        let mut q: Vec<BigInt> = Vec::with_capacity(dq + 1);
        for i in 0..=dq {
            let prev = if i >= m { q[i - m].clone() } else { BigInt::zero() };
            q.push(prev - &self.coeffs[i]);
        }
        for i in dq + 1..=d {
            let expect = if i >= m { &q[i - m] } else { &BigInt::ZERO };
            if &self.coeffs[i] != expect {
                return Err(Error::InexactDivision);
            }
        }
        Ok(IntPoly::new(q))
    }

    /// Certified `|f(e^(2πi·a/m))|`.
    ///
    /// `a` is reduced modulo `m` exactly before the root of unity is formed,
    /// and Horner's rule runs in complex ball arithmetic, so the returned
    /// radius bounds every rounding made along the way.
    pub fn eval_unit_circle(
        &self,
        a: &BigInt,
        m: &BigUint,
        precision_bits: u32,
    ) -> Result<HighPrecisionMagnitude> {
        check_precision(precision_bits)?;
        if m.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let modulus = BigInt::from(m.clone());
        let a = a.mod_floor(&modulus);
        let guard = 32 + usize::BITS - self.coeffs.len().leading_zeros();
        let w = precision_bits + guard;
        let z = ComplexBall::root_of_unity(&a, &modulus, w)?;
        let value = horner(&self.coeffs, &z).abs();
        Ok(HighPrecisionMagnitude::from_ball(value.with_prec(precision_bits)))
    }
}

pub(crate) fn check_precision(bits: u32) -> Result<()> {
    if bits > MAX_PRECISION_BITS {
        return Err(Error::PrecisionOverflow {
            requested: bits,
            cap: MAX_PRECISION_BITS,
        });
    }
    if bits < MIN_PRECISION_BITS {
        return Err(Error::PrecisionTooLow {
            requested: bits,
            min: MIN_PRECISION_BITS,
        });
    }
    Ok(())
}

/// `acc -= q·c`, avoiding a multiplication for unit `c`.
#[inline]
fn sub_scaled(acc: &mut BigInt, q: &BigInt, c: &BigInt) {
    if c.is_one() {
        *acc -= q;
    } else if c.magnitude().is_one() {
        *acc += q;
    } else {
        *acc -= q * c;
    }
}

#[inline]
fn add_scaled(acc: &mut BigInt, q: &BigInt, c: &BigInt) {
    if c.is_one() {
        *acc += q;
    } else if c.magnitude().is_one() {
        *acc -= q;
    } else {
        *acc += q * c;
    }
}

fn schoolbook(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    // iterate the sparser operand in the outer loop
    let (outer, inner) = if a.iter().filter(|c| !c.is_zero()).count()
        <= b.iter().filter(|c| !c.is_zero()).count()
    {
        (a, b)
    } else {
        (b, a)
    };
    for (i, x) in outer.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in inner.iter().enumerate() {
            if !y.is_zero() {
                add_scaled(&mut out[i + j], y, x);
            }
        }
    }
    out
}

fn add_into(dst: &mut [BigInt], src: &[BigInt]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

fn add_slices(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = long.to_vec();
    add_into(&mut out, short);
    out
}

/// Full product of two nonempty coefficient slices.
pub(crate) fn mul_slices(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let (a, b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if b.len() < KARATSUBA_THRESHOLD {
        return schoolbook(a, b);
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    if b.len() <= a.len() / 2 {
        for (k, chunk) in a.chunks(b.len()).enumerate() {
            let part = mul_slices(chunk, b);
            add_into(&mut out[k * b.len()..], &part);
        }
        return out;
    }
    let m = a.len() / 2;
    let (a0, a1) = a.split_at(m);
    let (b0, b1) = b.split_at(m);
    let z0 = mul_slices(a0, b0);
    let z2 = mul_slices(a1, b1);
    let mut z1 = mul_slices(&add_slices(a0, a1), &add_slices(b0, b1));
    for (d, s) in z1.iter_mut().zip(&z0) {
        *d -= s;
    }
    for (d, s) in z1.iter_mut().zip(&z2) {
        *d -= s;
    }
    add_into(&mut out, &z0);
    add_into(&mut out[m..], &z1);
    add_into(&mut out[2 * m..], &z2);
    out
}

/// Horner's rule in complex ball arithmetic with exact integer coefficients.
fn horner(coeffs: &[BigInt], z: &ComplexBall) -> ComplexBall {
    let w = z.prec;
    let shift = w as usize;
    let z_abs = z.mid_abs_upper();
    let mut re = BigInt::zero();
    let mut im = BigInt::zero();
    let mut rad = BigUint::zero();
    let mut first = true;
    for c in coeffs.iter().rev() {
        if first {
            re = c << shift;
            first = false;
            continue;
        }
        let l1 = re.magnitude() + im.magnitude();
        let new_re = ((&re * &z.re - &im * &z.im) >> shift) + (c << shift);
        let new_im = (&re * &z.im + &im * &z.re) >> shift;
        // |s·z − s̃·z̃| ≤ |s̃|·r_z + |z̃|·r_s + r_s·r_z, plus two floor roundings
        let spread = l1 * &z.rad + &z_abs * &rad + &rad * &z.rad;
        rad = (spread >> shift) + 3u32;
        re = new_re;
        im = new_im;
    }
    ComplexBall {
        re,
        im,
        rad,
        prec: w,
    }
}

impl std::ops::Mul for &IntPoly {
    type Output = IntPoly;

    fn mul(self, rhs: &IntPoly) -> IntPoly {
        IntPoly::mul(self, rhs)
    }
}

/// A certified nonnegative real: `value ± abs_error` at a working precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HighPrecisionMagnitude {
    ball: Ball,
}

impl HighPrecisionMagnitude {
    /// Wraps an enclosure of a quantity known to be nonnegative.
    pub fn from_ball(ball: Ball) -> Self {
        let ball = if ball.mid().is_negative() { ball.abs() } else { ball };
        HighPrecisionMagnitude { ball }
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn precision_bits(&self) -> u32 {
        self.ball.prec()
    }

    pub fn value_f64(&self) -> f64 {
        self.ball.to_f64()
    }

    /// Upper bound on the absolute error.
    pub fn abs_error(&self) -> f64 {
        self.ball.rad_f64()
    }

    pub fn rel_error(&self) -> f64 {
        self.ball.rel_error()
    }

    /// Decimal rendering of the value with `sig` significant digits.
    pub fn value_string(&self, sig: usize) -> String {
        self.ball.mid_to_sci(sig)
    }

    pub fn error_string(&self) -> String {
        self.ball.rad_to_sci()
    }

    pub fn is_positive(&self) -> bool {
        self.ball.is_positive()
    }
}

impl fmt::Display for HighPrecisionMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {}", self.value_string(20), self.error_string())
    }
}
