//! Lower-bound witnesses for A(n).
//!
//! For odd primes `p₁ < … < p_k` with `n = ∏ p_l` and `M = n / p_k`, the
//! point `ε^a` with `ε = e^(2πi/M)` and
//! `a = Σ_{l=1}^{⌊k/2⌋} f_l(p₁)` makes `|Φₙ(ε^a)|` large. At such a point
//!
//! ```text
//! |Φₙ(ε^a)| = p_k · ∏_U |sin(aπ/P_U)|^(±1) · |sin(a·p_k·π/P_U)|^(∓1)
//! ```
//!
//! over nonempty `U ⊆ {1, …, k−1}` with `P_U = ∏_{s∈U} p_s`, the sign
//! being `+` for odd `|U|`. This module evaluates that product with
//! certified error bounds and cross-checks it against direct Horner
//! evaluation of Φₙ.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, validate_odd_primes};
use crate::cyclo;
use crate::error::{Error, Result};
use crate::ntheory;
use crate::polyx::ball::{abs_sin_pi_ratio, Ball};
use crate::polyx::{check_precision, HighPrecisionMagnitude, MAX_PRECISION_BITS};
use crate::scan;

/// Precision used when the caller does not choose one.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

/// Relative error at which [`eval_product`] stops doubling precision.
pub const TARGET_REL_ERROR: f64 = 1e-10;

/// Largest φ(n) for which a certificate also runs the Horner cross-check.
pub const DIRECT_EVAL_DEGREE_CAP: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// `j₂` odd, i.e. `4 | p₁ + p₂`.
    Case1,
    /// `j₂` even, i.e. `4 | p₁ + p₂ − 2`.
    Case2,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Case1 => "case1",
            Case::Case2 => "case2",
        })
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "case1" => Ok(Case::Case1),
            "case2" => Ok(Case::Case2),
            _ => Err(Error::InvalidArgument(format!("unknown case tag {s:?}"))),
        }
    }
}

/// Ascending odd primes with their half-gaps `j_l = (p_l − p₁)/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTuple {
    primes: Vec<u64>,
    n: BigUint,
    modulus: BigUint,
    half_gaps: Vec<u64>,
    case: Case,
}

impl PrimeTuple {
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn k(&self) -> usize {
        self.primes.len()
    }

    /// `⌊k/2⌋`.
    pub fn k1(&self) -> usize {
        self.primes.len() / 2
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    /// `M = n / p_k`.
    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn half_gaps(&self) -> &[u64] {
        &self.half_gaps
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn p1(&self) -> u64 {
        self.primes[0]
    }

    pub fn pk(&self) -> u64 {
        *self.primes.last().expect("nonempty tuple")
    }

    /// `p_k − p₁`.
    pub fn window(&self) -> u64 {
        self.pk() - self.p1()
    }

    /// φ(n) = ∏ (p_l − 1).
    pub fn degree(&self) -> BigUint {
        self.primes.iter().map(|&p| BigUint::from(p - 1)).product()
    }

    /// n as a machine word, when it fits.
    pub fn n_u64(&self) -> Option<u64> {
        u64::try_from(&self.n).ok()
    }
}

pub fn classify(primes: &[u64]) -> Result<PrimeTuple> {
    if primes.len() < 2 {
        return Err(Error::MalformedTuple("need at least two primes".into()));
    }
    validate_odd_primes(primes)?;
    let p1 = primes[0];
    let half_gaps: Vec<u64> = primes.iter().map(|&p| (p - p1) / 2).collect();
    let case = if half_gaps[1] % 2 == 1 {
        Case::Case1
    } else {
        Case::Case2
    };
    let n = bounds::product(primes);
    let modulus = bounds::product(&primes[..primes.len() - 1]);
    Ok(PrimeTuple {
        primes: primes.to_vec(),
        n,
        modulus,
        half_gaps,
        case,
    })
}

/// `f_l(p₁)`: `(p₁^(2l−1) + p₂^(2l−1))/4` in case 1 and
/// `(p₁^(2l−1) + (p₂−2)^(2l−1))/4` in case 2.
pub fn f_value(l: usize, tuple: &PrimeTuple) -> Result<BigUint> {
    if l == 0 || l > tuple.k1() {
        return Err(Error::InvalidArgument(format!(
            "l = {l} outside 1..={}",
            tuple.k1()
        )));
    }
    let e = 2 * l as u32 - 1;
    let p1 = BigUint::from(tuple.primes[0]);
    let second = match tuple.case {
        Case::Case1 => tuple.primes[1],
        Case::Case2 => tuple.primes[1] - 2,
    };
    let sum = p1.pow(e) + BigUint::from(second).pow(e);
    let (q, r) = sum.div_rem(&BigUint::from(4u32));
    if !r.is_zero() {
        return Err(Error::Internal(format!(
            "f_{l} not divisible by 4 for {:?}",
            tuple.primes
        )));
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessPoint {
    pub a: BigUint,
    /// `M = n / p_k`.
    pub modulus: BigUint,
    /// `gcd(a, M)`.
    pub gcd: BigUint,
}

impl WitnessPoint {
    pub fn coprime(&self) -> bool {
        self.gcd.is_one()
    }
}

pub fn witness_point(tuple: &PrimeTuple) -> Result<WitnessPoint> {
    let mut a = BigUint::zero();
    for l in 1..=tuple.k1() {
        a += f_value(l, tuple)?;
    }
    let gcd = a.gcd(&tuple.modulus);
    Ok(WitnessPoint {
        a,
        modulus: tuple.modulus.clone(),
        gcd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Multiplier {
    One,
    Pk,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SineFactor {
    /// 1-based indices into `p₁ … p_{k−1}`, ascending.
    pub subset: Vec<usize>,
    pub multiplier: Multiplier,
    /// `+1` for a numerator factor, `−1` for a denominator factor.
    pub exponent: i8,
    /// `∏_{s∈U} p_s`.
    pub denomprod: BigUint,
    /// `a · multiplier mod 2·denomprod`.
    pub residue: BigUint,
    /// `|sin(residue · π / denomprod)|`.
    pub magnitude: HighPrecisionMagnitude,
}

/// Numerator iff `|U|` odd with multiplier 1, or `|U|` even with multiplier `p_k`.
pub fn factor_exponent(subset_len: usize, multiplier: Multiplier) -> i8 {
    let odd = subset_len % 2 == 1;
    match (multiplier, odd) {
        (Multiplier::One, true) | (Multiplier::Pk, false) => 1,
        _ => -1,
    }
}

fn subset_of(mask: usize, k_minus_1: usize) -> Vec<usize> {
    (0..k_minus_1).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

fn factor_residue(
    tuple: &PrimeTuple,
    point: &WitnessPoint,
    subset: &[usize],
    multiplier: Multiplier,
) -> (BigUint, BigUint) {
    let denomprod: BigUint = subset
        .iter()
        .map(|&i| BigUint::from(tuple.primes[i - 1]))
        .product();
    let period = &denomprod * 2u32;
    let scaled = match multiplier {
        Multiplier::One => point.a.clone(),
        Multiplier::Pk => &point.a * tuple.pk(),
    };
    (denomprod, scaled % period)
}

fn sine_ball(residue: &BigUint, denomprod: &BigUint, prec: u32) -> Result<Ball> {
    abs_sin_pi_ratio(
        &BigInt::from(residue.clone()),
        &BigInt::from(denomprod.clone()),
        prec,
    )
}

/// A single sine factor, evaluated at `prec` bits.
pub fn single_factor(
    tuple: &PrimeTuple,
    point: &WitnessPoint,
    subset: &[usize],
    multiplier: Multiplier,
    prec: u32,
) -> Result<SineFactor> {
    let k = tuple.k();
    if subset.is_empty()
        || subset.iter().any(|&i| i == 0 || i >= k)
        || subset.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidArgument(format!(
            "subset {subset:?} is not a nonempty ascending subset of 1..={}",
            k - 1
        )));
    }
    let (denomprod, residue) = factor_residue(tuple, point, subset, multiplier);
    let magnitude = HighPrecisionMagnitude::from_ball(sine_ball(&residue, &denomprod, prec)?);
    Ok(SineFactor {
        subset: subset.to_vec(),
        multiplier,
        exponent: factor_exponent(subset.len(), multiplier),
        denomprod,
        residue,
        magnitude,
    })
}

/// Every factor of the sine product, magnitudes at `prec` bits.
pub fn enumerate_factors_at(
    tuple: &PrimeTuple,
    point: &WitnessPoint,
    prec: u32,
) -> Result<Vec<SineFactor>> {
    let k1 = tuple.k() - 1;
    let mut out = Vec::with_capacity(2 * ((1 << k1) - 1));
    for mask in 1..(1usize << k1) {
        let subset = subset_of(mask, k1);
        for multiplier in [Multiplier::One, Multiplier::Pk] {
            out.push(single_factor(tuple, point, &subset, multiplier, prec)?);
        }
    }
    Ok(out)
}

pub fn enumerate_factors(tuple: &PrimeTuple, point: &WitnessPoint) -> Result<Vec<SineFactor>> {
    enumerate_factors_at(tuple, point, DEFAULT_PRECISION_BITS)
}

fn product_at(tuple: &PrimeTuple, point: &WitnessPoint, w: u32) -> Result<Ball> {
    let factors = enumerate_factors_at(tuple, point, w)?;
    let mut num = Ball::from_u64(tuple.pk(), w);
    let mut den = Ball::from_u64(1, w);
    for f in &factors {
        if f.magnitude.ball().contains_zero() {
            return Err(Error::Internal(format!(
                "sine factor over {:?} vanishes although gcd(a, M) = 1",
                f.subset
            )));
        }
        if f.exponent > 0 {
            num = num.mul(f.magnitude.ball());
        } else {
            den = den.mul(f.magnitude.ball());
        }
    }
    num.div(&den)
}

/// `|Φₙ(ε^a)|` through the sine product.
///
/// Precision is doubled until the relative error drops to
/// [`TARGET_REL_ERROR`], up to [`MAX_PRECISION_BITS`].
pub fn eval_product(
    tuple: &PrimeTuple,
    point: &WitnessPoint,
    precision_bits: u32,
) -> Result<HighPrecisionMagnitude> {
    check_precision(precision_bits)?;
    if !point.coprime() {
        return Err(Error::NonCoprimePoint {
            gcd: point.gcd.to_string(),
        });
    }
    // fixed-point sines near zero lose about log2(P_U) relative bits
    let guard = 32 + tuple.modulus.bits() as u32 + (2 * tuple.k() as u32);
    let mut prec = precision_bits;
    loop {
        let value = product_at(tuple, point, prec + guard)?.with_prec(prec);
        if value.rel_error() <= TARGET_REL_ERROR {
            return Ok(HighPrecisionMagnitude::from_ball(value));
        }
        if prec >= MAX_PRECISION_BITS {
            return Err(Error::PrecisionOverflow {
                requested: prec * 2,
                cap: MAX_PRECISION_BITS,
            });
        }
        prec = (prec * 2).min(MAX_PRECISION_BITS);
    }
}

/// `|Φₙ(e^(2πi·a/M))|` by building Φₙ and evaluating it directly.
pub fn direct_eval(
    tuple: &PrimeTuple,
    point: &WitnessPoint,
    precision_bits: u32,
) -> Result<HighPrecisionMagnitude> {
    direct_eval_with_cap(tuple, point, precision_bits, cyclo::DEFAULT_DEGREE_CAP)
}

pub fn direct_eval_with_cap(
    tuple: &PrimeTuple,
    point: &WitnessPoint,
    precision_bits: u32,
    cap: u64,
) -> Result<HighPrecisionMagnitude> {
    check_precision(precision_bits)?;
    let degree = tuple.degree();
    let n = match tuple.n_u64() {
        Some(n) if degree <= BigUint::from(cap) => n,
        _ => {
            return Err(Error::DegreeCapExceeded {
                n: tuple.n.clone(),
                degree,
                cap,
            })
        }
    };
    let record = cyclo::cyclotomic_with_cap(n, cap)?;
    record
        .poly
        .eval_unit_circle(&BigInt::from(point.a.clone()), &point.modulus, precision_bits)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateStatus {
    Coprime,
    /// `gcd(a, M) > 1`; only the direct evaluation is available.
    Degenerate { gcd: BigUint },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCertificate {
    pub tuple: PrimeTuple,
    pub point: WitnessPoint,
    pub status: CertificateStatus,
    pub product_value: Option<HighPrecisionMagnitude>,
    pub direct_value: Option<HighPrecisionMagnitude>,
    /// Exact A(n), when requested and within the degree cap.
    pub height: Option<BigUint>,
    /// `(value − error)/n`, a proven lower bound on A(n).
    pub a_lower: f64,
    /// `value / p₁^(2^(k−1))`.
    pub growth_ratio: f64,
    /// `a_lower / n^(2^(k−1)/k − 1)`.
    pub dk_estimate: f64,
    /// Whether the two pipelines overlap, when both ran.
    pub pipelines_agree: Option<bool>,
    /// Whether `n·A(n) ≥ value − error`, when the height is known.
    pub chain_holds: Option<bool>,
}

impl WitnessCertificate {
    pub fn is_degenerate(&self) -> bool {
        matches!(self.status, CertificateStatus::Degenerate { .. })
    }

    /// The value used for derived quantities: the sine product when
    /// available, otherwise the direct evaluation.
    pub fn value(&self) -> &HighPrecisionMagnitude {
        self.product_value
            .as_ref()
            .or(self.direct_value.as_ref())
            .expect("certificate always carries a value")
    }
}

fn lower_f64(ball: &Ball) -> f64 {
    let lower = Ball::new(ball.lower_ulps(), BigUint::zero(), ball.prec());
    let v = lower.to_f64();
    // step below the rounded value so the result stays a lower bound
    v - v.abs() * 1e-15
}

pub fn certificate(
    tuple: &PrimeTuple,
    precision_bits: u32,
    with_height: bool,
) -> Result<WitnessCertificate> {
    check_precision(precision_bits)?;
    let point = witness_point(tuple)?;
    let status = if point.coprime() {
        CertificateStatus::Coprime
    } else {
        CertificateStatus::Degenerate {
            gcd: point.gcd.clone(),
        }
    };
    let product_value = if point.coprime() {
        Some(eval_product(tuple, &point, precision_bits)?)
    } else {
        None
    };
    let direct_possible = tuple.degree() <= BigUint::from(DIRECT_EVAL_DEGREE_CAP);
    let direct_value = if direct_possible {
        Some(direct_eval_with_cap(
            tuple,
            &point,
            precision_bits,
            DIRECT_EVAL_DEGREE_CAP,
        )?)
    } else if product_value.is_none() {
        return Err(Error::DegreeCapExceeded {
            n: tuple.n.clone(),
            degree: tuple.degree(),
            cap: DIRECT_EVAL_DEGREE_CAP,
        });
    } else {
        None
    };
    let pipelines_agree = match (&product_value, &direct_value) {
        (Some(p), Some(d)) => {
            let w = p.precision_bits().max(d.precision_bits());
            Some(p.ball().with_prec(w).overlaps(&d.ball().with_prec(w)))
        }
        _ => None,
    };
    if pipelines_agree == Some(false) {
        return Err(Error::Internal(format!(
            "sine product and direct evaluation disagree for {:?}",
            tuple.primes
        )));
    }
    let value = product_value
        .as_ref()
        .or(direct_value.as_ref())
        .expect("one pipeline ran")
        .ball()
        .clone();
    let prec = value.prec();
    let n_int = BigInt::from(tuple.n.clone());

    let lower = Ball::new(value.lower_ulps(), BigUint::zero(), prec);
    let a_lower_ball = lower.div_int(&n_int)?;
    let a_lower = lower_f64(&a_lower_ball);

    let exponent = 1u32 << (tuple.k() - 1);
    let p1_power = BigInt::from(tuple.p1()).pow(exponent);
    let growth_ratio = value.div_int(&p1_power)?.to_f64();

    let n_pow = bounds::n_pow_exponent(&tuple.n, tuple.k(), prec);
    let dk_estimate = lower_f64(&a_lower_ball.div(&n_pow)?);

    let (height, chain_holds) = match tuple.n_u64() {
        Some(n) if with_height && tuple.degree() <= BigUint::from(cyclo::DEFAULT_DEGREE_CAP) => {
            let h = cyclo::height(n)?;
            let bound = Ball::from_int(&(&n_int * BigInt::from(h.clone())), prec);
            let holds = lower.certainly_le(&bound);
            (Some(h), Some(holds))
        }
        _ => (None, None),
    };

    Ok(WitnessCertificate {
        tuple: tuple.clone(),
        point,
        status,
        product_value,
        direct_value,
        height,
        a_lower,
        growth_ratio,
        dk_estimate,
        pipelines_agree,
        chain_holds,
    })
}

/// Which observable an asymptotic series reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    /// `|sin(aπ/P_U)|`, `|U|` odd (numerator).
    OddFactor(Vec<usize>),
    /// `|sin(aπ/P_U)|`, `|U|` even (denominator).
    EvenFactor(Vec<usize>),
    /// `|sin(a·p_k·π/P_U)|`, `|U|` odd (denominator).
    PkOddFactor(Vec<usize>),
    /// `|sin(a·p_k·π/P_U)|`, `|U|` even (numerator).
    PkEvenFactor(Vec<usize>),
    GrowthRatio,
    DkEstimate,
}

impl Selector {
    fn factor(&self) -> Option<(&[usize], Multiplier)> {
        match self {
            Selector::OddFactor(u) | Selector::EvenFactor(u) => Some((u, Multiplier::One)),
            Selector::PkOddFactor(u) | Selector::PkEvenFactor(u) => Some((u, Multiplier::Pk)),
            _ => None,
        }
    }

    /// Checks the subset against the selector's parity and `k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        let Some((subset, _)) = self.factor() else {
            return Ok(());
        };
        let want_odd = matches!(self, Selector::OddFactor(_) | Selector::PkOddFactor(_));
        if subset.is_empty()
            || subset.iter().any(|&i| i == 0 || i >= k)
            || subset.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidArgument(format!(
                "subset {subset:?} must be a nonempty ascending subset of 1..={}",
                k - 1
            )));
        }
        if (subset.len() % 2 == 1) != want_odd {
            return Err(Error::InvalidArgument(format!(
                "selector {self} needs a subset of {} size",
                if want_odd { "odd" } else { "even" }
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |u: &[usize]| {
            u.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Selector::OddFactor(u) => write!(f, "odd_factor({})", set(u)),
            Selector::EvenFactor(u) => write!(f, "even_factor({})", set(u)),
            Selector::PkOddFactor(u) => write!(f, "pk_odd_factor({})", set(u)),
            Selector::PkEvenFactor(u) => write!(f, "pk_even_factor({})", set(u)),
            Selector::GrowthRatio => f.write_str("growth_ratio"),
            Selector::DkEstimate => f.write_str("dk_estimate"),
        }
    }
}

impl FromStr for Selector {
    type Err = Error;

    /// Accepts `growth_ratio`, `dk_estimate`, or `odd_factor(1)`,
    /// `even_factor({1,2})` and friends.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "growth_ratio" => return Ok(Selector::GrowthRatio),
            "dk_estimate" => return Ok(Selector::DkEstimate),
            _ => {}
        }
        let bad = || Error::InvalidArgument(format!("unknown selector {s:?}"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let inner = rest.strip_suffix(')').ok_or_else(bad)?;
        let inner = inner.trim().trim_start_matches('{').trim_end_matches('}');
        let subset = inner
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        match name.trim() {
            "odd_factor" => Ok(Selector::OddFactor(subset)),
            "even_factor" => Ok(Selector::EvenFactor(subset)),
            "pk_odd_factor" => Ok(Selector::PkOddFactor(subset)),
            "pk_even_factor" => Ok(Selector::PkEvenFactor(subset)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub p1: u64,
    pub primes: Vec<u64>,
    /// The factor magnitude, or `|Φₙ(ε^a)|` for the ratio selectors.
    pub magnitude: HighPrecisionMagnitude,
    /// `1 − magnitude` for numerator factors, `p₁ · magnitude` for
    /// denominator factors, or the ratio itself.
    pub observable: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesSkip {
    pub p1: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub selector: Selector,
    pub rows: Vec<SeriesRow>,
    pub skipped: Vec<SeriesSkip>,
}

fn series_row(tuple: &PrimeTuple, selector: &Selector, prec: u32) -> Result<std::result::Result<SeriesRow, SeriesSkip>> {
    let point = witness_point(tuple)?;
    if !point.coprime() {
        return Ok(Err(SeriesSkip {
            p1: tuple.p1(),
            reason: format!("gcd(a, M) = {}", point.gcd),
        }));
    }
    let (magnitude, observable) = match selector.factor() {
        Some((subset, multiplier)) => {
            let f = single_factor(tuple, &point, subset, multiplier, prec)?;
            let m = f.magnitude.ball();
            let obs = if f.exponent > 0 {
                Ball::from_u64(1, prec).sub(m).to_f64()
            } else {
                m.mul_int(&BigInt::from(tuple.p1())).to_f64()
            };
            (f.magnitude, obs)
        }
        None => {
            let value = eval_product(tuple, &point, prec)?;
            let exponent = 1u32 << (tuple.k() - 1);
            let p1_power = BigInt::from(tuple.p1()).pow(exponent);
            let obs = match selector {
                Selector::GrowthRatio => value.ball().div_int(&p1_power)?.to_f64(),
                _ => {
                    let w = value.precision_bits();
                    let n = BigInt::from(tuple.n.clone());
                    let n_pow = bounds::n_pow_exponent(&tuple.n, tuple.k(), w);
                    value.ball().div_int(&n)?.div(&n_pow)?.to_f64()
                }
            };
            (value, obs)
        }
    };
    Ok(Ok(SeriesRow {
        p1: tuple.p1(),
        primes: tuple.primes.clone(),
        magnitude,
        observable,
    }))
}

/// Walks `p₁` upward from `p1_min` over tuples with half-gap pattern
/// `(j₂, …, j_k)` and reports `count` rows of the selected observable.
/// Tuples whose witness is not coprime to `M` are skipped and recorded.
pub fn asymptotic_series(
    pattern: &[u64],
    p1_min: u64,
    count: usize,
    selector: &Selector,
    precision_bits: u32,
) -> Result<SeriesTable> {
    check_precision(precision_bits)?;
    let check = scan::check_pattern(pattern)?;
    selector.validate(pattern.len() + 1)?;
    let mut table = SeriesTable {
        selector: selector.clone(),
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    if count == 0 {
        return Ok(table);
    }
    let span = 2 * pattern.last().copied().unwrap_or(0);
    let limit = match check.obstruction {
        // every solution must contain the obstructing prime itself
        Some(q) => q.min(ntheory::SIEVE_CAPACITY - span),
        None => ntheory::SIEVE_CAPACITY - span,
    };
    let mut lo = p1_min.max(3);
    let mut block = 1u64 << 16;
    while lo <= limit && table.rows.len() < count {
        let hi = lo.saturating_add(block - 1).min(limit);
        let starts = scan::find_pattern(pattern, lo, hi)?.p1s;
        let tuples = starts
            .iter()
            .map(|&p1| {
                let mut primes = vec![p1];
                primes.extend(pattern.iter().map(|j| p1 + 2 * j));
                classify(&primes)
            })
            .collect::<Result<Vec<_>>>()?;
        let results: Vec<_> = tuples
            .par_iter()
            .map(|t| series_row(t, selector, precision_bits))
            .collect::<Result<Vec<_>>>()?;
        for r in results {
            if table.rows.len() == count {
                break;
            }
            match r {
                Ok(row) => table.rows.push(row),
                Err(skip) => table.skipped.push(skip),
            }
        }
        lo = hi + 1;
        block = (block * 2).min(1 << 24);
    }
    if table.rows.len() < count {
        return Err(Error::NotEnoughTuples {
            found: table.rows.len(),
            wanted: count,
            limit,
        });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tuple(p: &[u64]) -> PrimeTuple {
        classify(p).unwrap()
    }

    #[test]
    fn classify_examples() {
        let t = tuple(&[3, 5, 7]);
        assert_eq!(t.case(), Case::Case1);
        assert_eq!(t.half_gaps(), &[0, 1, 2]);
        assert_eq!(t.modulus(), &BigUint::from(15u32));
        let t = tuple(&[3, 7, 11]);
        assert_eq!(t.case(), Case::Case2);
        assert_eq!(t.half_gaps(), &[0, 2, 4]);
        assert!(classify(&[2, 3, 5]).is_err());
        assert!(classify(&[3, 9, 11]).is_err());
        assert!(classify(&[5, 3]).is_err());
        assert!(classify(&[5]).is_err());
    }

    #[test]
    fn f_value_examples() {
        assert_eq!(f_value(1, &tuple(&[3, 5, 7])).unwrap(), BigUint::from(2u32));
        assert_eq!(f_value(2, &tuple(&[5, 7, 11, 13])).unwrap(), BigUint::from(117u32));
        assert_eq!(f_value(1, &tuple(&[3, 7, 11])).unwrap(), BigUint::from(2u32));
        assert!(f_value(2, &tuple(&[3, 5, 7])).is_err());
        assert!(f_value(0, &tuple(&[3, 5, 7])).is_err());
    }

    #[test]
    fn witness_point_examples() {
        let w = witness_point(&tuple(&[3, 5, 7])).unwrap();
        assert_eq!((w.a.clone(), w.modulus.clone()), (2u32.into(), 15u32.into()));
        assert!(w.coprime());
        let w = witness_point(&tuple(&[5, 7, 11, 13])).unwrap();
        assert_eq!(w.a, BigUint::from(120u32));
        assert_eq!(w.modulus, BigUint::from(385u32));
        assert_eq!(w.gcd, BigUint::from(5u32));
        let w = witness_point(&tuple(&[11, 13, 17, 19, 23])).unwrap();
        assert_eq!(w.a, BigUint::from(888u32));
        assert_eq!(w.modulus, BigUint::from(46189u32));
        assert!(w.coprime());
    }

    #[test]
    fn factors_for_3_5_7() {
        let t = tuple(&[3, 5, 7]);
        let w = witness_point(&t).unwrap();
        let fs = enumerate_factors(&t, &w).unwrap();
        assert_eq!(fs.len(), 6);
        let mut num: Vec<(u64, u64)> = Vec::new();
        let mut den: Vec<(u64, u64)> = Vec::new();
        for f in &fs {
            let pair = (
                u64::try_from(&f.residue).unwrap(),
                u64::try_from(&f.denomprod).unwrap(),
            );
            if f.exponent > 0 { num.push(pair) } else { den.push(pair) }
        }
        num.sort();
        den.sort();
        // residues are reduced mod 2·P_U: 14 mod 6 = 2, 14 mod 10 = 4
        assert_eq!(num, vec![(2, 3), (2, 5), (14, 15)]);
        assert_eq!(den, vec![(2, 3), (2, 15), (4, 5)]);
    }

    #[test]
    fn factor_counts() {
        for primes in [&[3u64, 5, 7, 11][..], &[11, 13, 17, 19, 23], &[3, 5]] {
            let t = tuple(primes);
            let w = witness_point(&t).unwrap();
            let fs = enumerate_factors(&t, &w).unwrap();
            let k = primes.len() as u32;
            assert_eq!(fs.len(), (1 << k) - 2);
            let den = fs.iter().filter(|f| f.exponent < 0).count();
            assert_eq!(den, (1 << (k - 1)) - 1);
            assert_eq!(fs.len() - den, den);
        }
    }

    /// The product written out by hand with f64 sines.
    #[test]
    fn product_for_3_5_7() {
        let t = tuple(&[3, 5, 7]);
        let w = witness_point(&t).unwrap();
        let v = eval_product(&t, &w, 256).unwrap();
        let s = |x: f64| (x * PI).sin().abs();
        let hand = 7.0 * s(2.0 / 3.0) * s(2.0 / 5.0) * s(14.0 / 15.0)
            / (s(2.0 / 15.0) * s(2.0 / 3.0) * s(4.0 / 5.0));
        assert!((v.value_f64() - hand).abs() < 1e-12);
        assert!((v.value_f64() - 5.789636406996412).abs() < 1e-12);
        assert!(v.rel_error() < 1e-60);
        let d = direct_eval(&t, &w, 256).unwrap();
        assert!(d.ball().overlaps(v.ball()));
    }

    #[test]
    fn product_refuses_degenerate() {
        let t = tuple(&[5, 7, 11, 13]);
        let w = witness_point(&t).unwrap();
        assert!(matches!(
            eval_product(&t, &w, 256),
            Err(Error::NonCoprimePoint { .. })
        ));
        let d = direct_eval(&t, &w, 256).unwrap();
        assert!(d.value_f64().is_finite());
    }

    #[test]
    fn direct_at_one_is_one() {
        let t = tuple(&[3, 5, 7]);
        let w = WitnessPoint {
            a: BigUint::zero(),
            modulus: t.modulus().clone(),
            gcd: t.modulus().clone(),
        };
        let d = direct_eval(&t, &w, 128).unwrap();
        assert!(d.ball().overlaps(&Ball::from_u64(1, 128)));
    }

    #[test]
    fn certificate_small() {
        let c = certificate(&tuple(&[3, 5, 7]), 256, true).unwrap();
        assert_eq!(c.status, CertificateStatus::Coprime);
        assert!((c.a_lower - 5.789636406996412 / 105.0).abs() < 1e-12);
        assert!((c.growth_ratio - 5.789636406996412 / 81.0).abs() < 1e-12);
        assert_eq!(c.pipelines_agree, Some(true));
        assert_eq!(c.chain_holds, Some(true));
        assert_eq!(c.height, Some(BigUint::from(2u32)));

        let c = certificate(&tuple(&[5, 7, 11, 13]), 256, false).unwrap();
        assert!(c.is_degenerate());
        assert!(c.product_value.is_none());
        assert!(c.direct_value.is_some());
    }

    #[test]
    fn certificate_k2() {
        let c = certificate(&tuple(&[3, 5]), 128, true).unwrap();
        // a = 2, M = 3: |Φ₁₅(e^(4πi/3))| = 5 · |sin(2π/3)| / |sin(10π/3)| = 5
        assert!((c.value().value_f64() - 5.0).abs() < 1e-20);
        assert_eq!(c.chain_holds, Some(true));
    }

    #[test]
    fn residue_shift_invariance() {
        let t = tuple(&[11, 13, 17, 19, 23]);
        let w = witness_point(&t).unwrap();
        for f in enumerate_factors_at(&t, &w, 128).unwrap() {
            for shift in [1u32, 7, 1000] {
                let moved = &f.residue + &f.denomprod * 2u32 * shift;
                let m = sine_ball(&moved, &f.denomprod, 128).unwrap();
                assert_eq!(&m, f.magnitude.ball());
            }
        }
    }

    #[test]
    fn selector_parsing() {
        assert_eq!("growth_ratio".parse::<Selector>().unwrap(), Selector::GrowthRatio);
        assert_eq!(
            "even_factor({1,2})".parse::<Selector>().unwrap(),
            Selector::EvenFactor(vec![1, 2])
        );
        assert_eq!("odd_factor(1)".parse::<Selector>().unwrap(), Selector::OddFactor(vec![1]));
        assert!("bogus".parse::<Selector>().is_err());
        assert!("odd_factor(x)".parse::<Selector>().is_err());
        let s = Selector::PkEvenFactor(vec![1, 2]);
        assert_eq!(s.to_string().parse::<Selector>().unwrap(), s);
        assert!(Selector::OddFactor(vec![1, 2]).validate(3).is_err());
        assert!(Selector::OddFactor(vec![3]).validate(3).is_err());
    }

    #[test]
    fn odd_factor_closed_form() {
        let table =
            asymptotic_series(&[1, 3], 100, 10, &Selector::OddFactor(vec![1]), 256).unwrap();
        assert_eq!(table.rows.len(), 10);
        for row in &table.rows {
            let p1 = BigInt::from(row.p1);
            let closed = crate::polyx::ball::cos_pi_ratio(&BigInt::one(), &(p1 * 2), 256).unwrap();
            let diff = row.magnitude.ball().sub(&closed);
            assert!(diff.abs_upper_ulps() < (BigUint::one() << 150usize), "p1 = {}", row.p1);
        }
        assert!(table.rows.windows(2).all(|w| w[0].p1 < w[1].p1));
    }

    #[test]
    fn series_edges() {
        let t = asymptotic_series(&[1, 3], 100, 0, &Selector::GrowthRatio, 256).unwrap();
        assert!(t.rows.is_empty());
        // (p, p+2, p+4) only has the solution p = 3
        let err = asymptotic_series(&[1, 2], 5, 1, &Selector::GrowthRatio, 128);
        assert!(matches!(err, Err(Error::NotEnoughTuples { .. })));
    }
}
