//! Cyclotomic polynomials Φₙ by two independent constructions, and their
//! heights A(n).

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::ntheory::{divisors, euler_phi, factorize, mobius};
use crate::polyx::IntPoly;

/// Default cap on φ(n), the degree of Φₙ.
pub const DEFAULT_DEGREE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicRecord {
    pub n: u64,
    pub poly: IntPoly,
    /// A(n), the largest absolute coefficient.
    pub height: BigUint,
    /// Distinct odd primes dividing n.
    pub k: usize,
}

impl CyclotomicRecord {
    fn new(n: u64, poly: IntPoly) -> Self {
        let height = poly.height();
        let k = factorize(n).primes().filter(|&p| p != 2).count();
        CyclotomicRecord { n, poly, height, k }
    }
}

fn check_cap(n: u64, cap: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::ZeroArgument);
    }
    let degree = euler_phi(n);
    if degree > cap {
        return Err(Error::DegreeCapExceeded {
            n: n.into(),
            degree: degree.into(),
            cap,
        });
    }
    Ok(())
}

/// Φₙ via the Möbius product over divisors of the radical, then inflated.
pub fn cyclotomic(n: u64) -> Result<CyclotomicRecord> {
    cyclotomic_with_cap(n, DEFAULT_DEGREE_CAP)
}

pub fn cyclotomic_with_cap(n: u64, cap: u64) -> Result<CyclotomicRecord> {
    check_cap(n, cap)?;
    let fact = factorize(n);
    let r: u64 = fact.primes().product();
    let (num, den): (Vec<u64>, Vec<u64>) = divisors(r)
        .into_iter()
        .filter(|&d| mobius(d) != 0)
        .partition(|&d| mobius(d) == 1);
    // all multiplications first, so every division below is exact
    let mut poly = IntPoly::one();
    for d in num {
        poly = poly.mul_binomial((r / d) as usize);
    }
    for d in den {
        poly = poly.div_binomial((r / d) as usize)?;
    }
    Ok(CyclotomicRecord::new(n, poly.inflate((n / r) as usize)))
}

/// Φₙ built prime by prime from Φ₁ using Φ_{mp}(z) = Φ_m(z^p) / Φ_m(z)
/// with general polynomial division. Independent of [`cyclotomic`].
pub fn cyclotomic_alt(n: u64) -> Result<CyclotomicRecord> {
    cyclotomic_alt_with_cap(n, DEFAULT_DEGREE_CAP)
}

pub fn cyclotomic_alt_with_cap(n: u64, cap: u64) -> Result<CyclotomicRecord> {
    check_cap(n, cap)?;
    let fact = factorize(n);
    let mut poly = IntPoly::from_i64s(&[-1, 1]);
    let mut r = 1u64;
    for p in fact.primes() {
        poly = poly.inflate(p as usize).exact_div(&poly)?;
        r *= p;
    }
    Ok(CyclotomicRecord::new(n, poly.inflate((n / r) as usize)))
}

fn height_memo() -> &'static RwLock<HashMap<u64, BigUint>> {
    static MEMO: OnceLock<RwLock<HashMap<u64, BigUint>>> = OnceLock::new();
    MEMO.get_or_init(|| RwLock::new(HashMap::new()))
}

/// A(n), memoized for the lifetime of the process.
///
/// Heights are keyed by the radical since inflation preserves coefficients.
pub fn height(n: u64) -> Result<BigUint> {
    check_cap(n, DEFAULT_DEGREE_CAP)?;
    let r: u64 = factorize(n).primes().product();
    if let Some(h) = height_memo().read().expect("height memo poisoned").get(&r) {
        return Ok(h.clone());
    }
    let h = cyclotomic(r)?.height;
    height_memo()
        .write()
        .expect("height memo poisoned")
        .insert(r, h.clone());
    Ok(h)
}

/// Checks ∏_{d|n} Φ_d(z) = zⁿ − 1 exactly.
pub fn divisor_product_identity(n: u64) -> Result<bool> {
    let mut factors = Vec::new();
    for d in divisors(n) {
        factors.push(cyclotomic(d)?.poly);
    }
    // multiply low degrees first to keep the running product small
    factors.sort_by_key(|f| f.degree());
    let product = factors.iter().fold(IntPoly::one(), |acc, f| acc.mul(f));
    Ok(product == IntPoly::binomial(n as usize))
}
