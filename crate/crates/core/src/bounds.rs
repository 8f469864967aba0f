//! Exact evaluation of the known upper bounds on A(n) and of the
//! lower-bound target shape `d_k · n^(2^(k−1)/k − 1)`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::cyclo;
use crate::error::{Error, Result};
use crate::ntheory::{factorize, is_prime};
use crate::polyx::ball::Ball;
use crate::polyx::{HighPrecisionMagnitude, MAX_PRECISION_BITS};

/// Working precision for `n^(e_k)`.
pub const POWER_PRECISION_BITS: u32 = 128;

/// Constant in the refined bound `A(n) ≤ c_k · ∏ p_l^(2^(k−1−l) − 1)`.
pub fn ck_constant(k: usize) -> BigRational {
    assert!(k >= 1, "k must be positive");
    match k {
        1 | 2 => BigRational::one(),
        3 | 4 => BigRational::new(3.into(), 4.into()),
        _ => {
            let base = BigRational::new(3.into(), 8.into());
            Pow::pow(base, BigUint::one() << (k - 5))
        }
    }
}

/// The exponent `2^(k−1)/k − 1`.
pub fn exponent(k: usize) -> BigRational {
    assert!(k >= 1, "k must be positive");
    let top = BigInt::one() << (k - 1);
    BigRational::new(top, BigInt::from(k)) - BigRational::one()
}

/// Rejects anything but a nonempty strictly ascending list of odd primes.
pub fn validate_odd_primes(primes: &[u64]) -> Result<()> {
    if primes.is_empty() {
        return Err(Error::MalformedTuple("empty tuple".into()));
    }
    for &p in primes {
        if p == 2 {
            return Err(Error::MalformedTuple("contains the even prime 2".into()));
        }
        if !is_prime(p) {
            return Err(Error::MalformedTuple(format!("{p} is not prime")));
        }
    }
    if primes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::MalformedTuple(
            "primes must be strictly ascending".into(),
        ));
    }
    Ok(())
}

pub fn product(primes: &[u64]) -> BigUint {
    primes.iter().map(|&p| BigUint::from(p)).product()
}

/// `∏_{l=1}^{k−2} p_l^(2^(k−1−l) − 1)`; the empty product is 1.
pub fn bateman_bound(primes: &[u64]) -> Result<BigUint> {
    validate_odd_primes(primes)?;
    let k = primes.len();
    let mut out = BigUint::one();
    for l in 1..=k.saturating_sub(2) {
        let e = (1u32 << (k - 1 - l)) - 1;
        out *= BigUint::from(primes[l - 1]).pow(e);
    }
    Ok(out)
}

/// Decides `bateman ≤ n^(e_k)` exactly via `bateman^k ≤ n^(2^(k−1) − k)`.
pub fn bridging_holds_exact(primes: &[u64]) -> Result<bool> {
    let b = bateman_bound(primes)?;
    let k = primes.len() as u32;
    let n = product(primes);
    let lhs = b.pow(k);
    let rhs = n.pow((1u32 << (k - 1)) - k);
    Ok(lhs <= rhs)
}

/// Encloses `n^(2^(k−1)/k − 1)` as the k-th root of `n^(2^(k−1) − k)`.
pub fn n_pow_exponent(n: &BigUint, k: usize, prec: u32) -> Ball {
    let k32 = k as u32;
    let power = n.pow((1u32 << (k32 - 1)) - k32);
    Ball::nth_root_of(&power, k32, prec)
}

fn rational_times(ball: &Ball, r: &BigRational) -> Result<Ball> {
    ball.mul_int(r.numer()).div_int(r.denom())
}

/// Decides `bateman ≤ n^(e_k)` in interval arithmetic, widening precision
/// until the enclosure separates the two sides.
pub fn bridging_holds_interval(primes: &[u64]) -> Result<bool> {
    let b = BigInt::from(bateman_bound(primes)?);
    let n = product(primes);
    let mut prec = POWER_PRECISION_BITS;
    loop {
        let rhs = n_pow_exponent(&n, primes.len(), prec);
        let lhs = Ball::from_int(&b, prec);
        if lhs.certainly_le(&rhs) {
            return Ok(true);
        }
        if rhs.upper_ulps() < lhs.lower_ulps() {
            return Ok(false);
        }
        if prec >= MAX_PRECISION_BITS {
            return Err(Error::Internal(
                "bridging inequality undecided at maximum precision".into(),
            ));
        }
        prec *= 2;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: BigUint,
    pub k: usize,
    pub primes: Vec<u64>,
    pub bateman: BigUint,
    pub c_k: BigRational,
    /// `c_k · bateman`.
    pub refined: BigRational,
    pub exponent: BigRational,
    /// `n^(e_k)`.
    pub n_power: HighPrecisionMagnitude,
    /// `c_k · n^(e_k)`.
    pub power_bound: HighPrecisionMagnitude,
    pub d_k: f64,
    /// `d_k · n^(e_k)`.
    pub lower_target: HighPrecisionMagnitude,
    /// `bateman ≤ n^(e_k)`, decided exactly.
    pub bridging: bool,
}

pub fn bound_report(primes: &[u64], d_k: f64) -> Result<BoundReport> {
    if !(d_k.is_finite() && d_k >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "d_k must be finite and nonnegative, got {d_k}"
        )));
    }
    let bateman = bateman_bound(primes)?;
    let k = primes.len();
    let n = product(primes);
    let c_k = ck_constant(k);
    let refined = &c_k * BigRational::from(BigInt::from(bateman.clone()));
    let prec = POWER_PRECISION_BITS;
    let root = n_pow_exponent(&n, k, prec);
    let power_bound = rational_times(&root, &c_k)?;
    let lower_target = Ball::from_f64(d_k, prec).mul(&root);
    Ok(BoundReport {
        n,
        k,
        primes: primes.to_vec(),
        bridging: bridging_holds_exact(primes)?,
        bateman,
        c_k,
        refined,
        exponent: exponent(k),
        n_power: HighPrecisionMagnitude::from_ball(root),
        power_bound: HighPrecisionMagnitude::from_ball(power_bound),
        d_k,
        lower_target: HighPrecisionMagnitude::from_ball(lower_target),
    })
}

/// Outcome of comparing an exact height against the upper bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightBoundCheck {
    pub n: u64,
    pub height: BigUint,
    pub bateman: BigUint,
    pub refined: BigRational,
    pub within_bateman: bool,
    pub within_refined: bool,
    pub bridging_exact: bool,
    pub bridging_interval: bool,
}

impl HeightBoundCheck {
    pub fn passed(&self) -> bool {
        self.within_bateman && self.within_refined && self.bridging_exact && self.bridging_interval
    }
}

/// Checks A(n) against both upper bounds for an odd squarefree n > 1.
pub fn check_height_bounds(n: u64) -> Result<HeightBoundCheck> {
    let fact = factorize(n);
    if n < 3 || n % 2 == 0 || !fact.is_squarefree() {
        return Err(Error::InvalidArgument(format!(
            "{n} is not an odd squarefree integer above 1"
        )));
    }
    let primes: Vec<u64> = fact.primes().collect();
    let height = cyclo::height(n)?;
    let bateman = bateman_bound(&primes)?;
    let refined = ck_constant(primes.len()) * BigRational::from(BigInt::from(bateman.clone()));
    let h = BigRational::from(BigInt::from(height.clone()));
    Ok(HeightBoundCheck {
        n,
        within_bateman: height <= bateman,
        within_refined: h <= refined,
        bridging_exact: bridging_holds_exact(&primes)?,
        bridging_interval: bridging_holds_interval(&primes)?,
        height,
        bateman,
        refined,
    })
}
