//! Invariant suites behind `cyclo verify`.

use std::io::Write;

use clap::ValueEnum;
use num_bigint::BigUint;
use rayon::prelude::*;

use cyclo_core::ntheory::{self, factorize, mobius};
use cyclo_core::{bounds, cyclo, scan, witness, Error};

use crate::output::{Format, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Product of Φ_d over d | n equals z^n - 1.
    Identity,
    /// Both constructions agree on squarefree odd n.
    Oracle,
    /// A(n) = 1 below 105, A(105) = 2, A(np) = A(n) for p | n.
    Heights,
    /// Heights within both upper bounds; bridging inequality.
    Bounds,
    /// Sine product matches direct evaluation on small tuples.
    Witness,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Identity => "identity",
            Suite::Oracle => "oracle",
            Suite::Heights => "heights",
            Suite::Bounds => "bounds",
            Suite::Witness => "witness",
        }
    }

    fn default_max(self) -> u64 {
        match self {
            Suite::Identity => 2000,
            Suite::Oracle | Suite::Bounds => 20000,
            Suite::Heights => 5000,
            Suite::Witness => 1_000_000,
        }
    }
}

/// `Ok(None)` means the case passed; `Ok(Some(msg))` is a failure.
type Check = Result<Option<String>, Error>;

fn tally(cases: Vec<Check>) -> Result<(usize, Vec<String>), Error> {
    let total = cases.len();
    let mut failures = Vec::new();
    for c in cases {
        if let Some(msg) = c? {
            failures.push(msg);
        }
    }
    Ok((total, failures))
}

fn odd_squarefree(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| n % 2 == 1 && mobius(n) != 0).collect()
}

fn identity(max: u64) -> Vec<Check> {
    (1..=max)
        .into_par_iter()
        .map(|n| Ok((!cyclo::divisor_product_identity(n)?).then(|| format!("n={n}"))))
        .collect()
}

fn oracle(max: u64) -> Vec<Check> {
    odd_squarefree(1, max)
        .into_par_iter()
        .map(|n| {
            let same = cyclo::cyclotomic(n)?.poly == cyclo::cyclotomic_alt(n)?.poly;
            Ok((!same).then(|| format!("n={n}")))
        })
        .collect()
}

fn heights(max: u64) -> Vec<Check> {
    let mut pairs = Vec::new();
    for n in 2..=max {
        for p in factorize(n).primes() {
            if ntheory::euler_phi(n) * p <= cyclo::DEFAULT_DEGREE_CAP {
                pairs.push((n, p));
            }
        }
    }
    let one = BigUint::from(1u32);
    let mut cases: Vec<Check> = (1..=max.min(104))
        .map(|n| {
            let h = cyclo::cyclotomic(n)?.height;
            Ok((h != one).then(|| format!("A({n})={h}")))
        })
        .collect();
    if max >= 105 {
        let h = cyclo::cyclotomic(105).map(|r| r.height);
        cases.push(h.map(|h| (h != BigUint::from(2u32)).then(|| format!("A(105)={h}"))));
    }
    cases.extend(pairs.into_par_iter().map(|(n, p)| {
        let base = cyclo::cyclotomic(n)?.height;
        let up = cyclo::cyclotomic(n * p)?.height;
        Ok((base != up).then(|| format!("A({})={up} but A({n})={base}", n * p)))
    }).collect::<Vec<_>>());
    cases
}

fn bounds_suite(max: u64) -> Vec<Check> {
    odd_squarefree(3, max)
        .into_par_iter()
        .map(|n| {
            let c = bounds::check_height_bounds(n)?;
            Ok((!c.passed()).then(|| format!("n={n}")))
        })
        .collect()
}

/// Tuples with k = 2, 3, 4 in a window of 14 and n ≤ max.
fn witness_suite(max: u64) -> Result<Vec<Check>, Error> {
    let mut tuples = Vec::new();
    for k in 2..=4u32 {
        // p₁^k ≤ n bounds the search range
        let p1_max = (max as f64).powf(1.0 / k as f64).ceil() as u64;
        for t in scan::find_tuples(k as usize, 14, 3, p1_max)? {
            if t.iter().try_fold(1u64, |acc, &p| acc.checked_mul(p)).is_some_and(|n| n <= max) {
                tuples.push(t);
            }
        }
    }
    Ok(tuples
        .into_par_iter()
        .map(|t| {
            let tuple = witness::classify(&t)?;
            let cert = witness::certificate(&tuple, witness::DEFAULT_PRECISION_BITS, true)?;
            let ok = cert.is_degenerate()
                || (cert.pipelines_agree != Some(false) && cert.chain_holds != Some(false));
            Ok((!ok).then(|| format!("{t:?}")))
        })
        .collect())
}

pub fn run(
    suite: Suite,
    max_n: Option<u64>,
    format: Format,
    out: &mut dyn Write,
) -> Result<bool, Box<dyn std::error::Error>> {
    let max = max_n.unwrap_or(suite.default_max());
    let cases = match suite {
        Suite::Identity => identity(max),
        Suite::Oracle => oracle(max),
        Suite::Heights => heights(max),
        Suite::Bounds => bounds_suite(max),
        Suite::Witness => witness_suite(max)?,
    };
    let (total, failures) = tally(cases)?;
    let passed = total - failures.len();
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    if format == Format::Text {
        writeln!(out, "{status} {passed}/{total} ({} suite, max-n {max})", suite.name())?;
        for f in failures.iter().take(20) {
            writeln!(out, "  failed: {f}")?;
        }
    } else {
        let mut t = Table::new(&["suite", "max_n", "checked", "passed", "status", "first_failure"]);
        t.push(vec![
            suite.name().into(),
            max.into(),
            total.into(),
            passed.into(),
            status.into(),
            failures.first().cloned().into(),
        ]);
        t.write(format, out)?;
    }
    Ok(failures.is_empty())
}
