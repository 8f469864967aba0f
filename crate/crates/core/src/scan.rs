//! Prime-constellation search and the append-only record store.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::ntheory::{self, primes_in};
use crate::witness::{Case, WitnessCertificate};

/// Result of the admissibility test for a half-gap pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternCheck {
    pub admissible: bool,
    /// Smallest prime whose residues the offsets cover completely.
    pub obstruction: Option<u64>,
}

/// Validates `(j₂, …, j_k)` and tests admissibility of the offsets
/// `0, 2j₂, …, 2j_k` against every prime `q ≤ k`.
pub fn check_pattern(pattern: &[u64]) -> Result<PatternCheck> {
    if pattern.is_empty() {
        return Err(Error::MalformedPattern("pattern is empty".into()));
    }
    if pattern[0] == 0 || pattern.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::MalformedPattern(
            "half-gaps must be strictly increasing positive integers".into(),
        ));
    }
    let offsets: Vec<u64> = std::iter::once(0).chain(pattern.iter().map(|j| 2 * j)).collect();
    let k = offsets.len() as u64;
    for q in (2..=k).filter(|&q| ntheory::is_prime(q)) {
        let mut seen = vec![false; q as usize];
        for o in &offsets {
            seen[(o % q) as usize] = true;
        }
        if seen.iter().all(|&s| s) {
            return Ok(PatternCheck {
                admissible: false,
                obstruction: Some(q),
            });
        }
    }
    Ok(PatternCheck {
        admissible: true,
        obstruction: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternHits {
    pub p1s: Vec<u64>,
    /// Set when the pattern is inadmissible.
    pub warning: Option<String>,
}

/// Every `p₁ ∈ [p1_min, p1_max]` with `p₁` and all `p₁ + 2j_l` prime.
pub fn find_pattern(pattern: &[u64], p1_min: u64, p1_max: u64) -> Result<PatternHits> {
    let check = check_pattern(pattern)?;
    let warning = check.obstruction.map(|q| {
        format!("pattern {pattern:?} is inadmissible modulo {q}; only tuples containing {q} exist")
    });
    let lo = p1_min.max(3);
    if lo > p1_max {
        return Ok(PatternHits {
            p1s: Vec::new(),
            warning,
        });
    }
    let span = 2 * pattern.last().copied().unwrap_or(0);
    let hi = p1_max
        .checked_add(span)
        .ok_or(Error::CapacityExceeded {
            hi: u64::MAX,
            capacity: ntheory::SIEVE_CAPACITY,
        })?;
    let primes = primes_in(lo, hi)?;
    let mut is_p = vec![false; (hi - lo + 1) as usize];
    for &p in &primes {
        is_p[(p - lo) as usize] = true;
    }
    let p1s = primes
        .iter()
        .copied()
        .take_while(|&p| p <= p1_max)
        .filter(|&p| pattern.iter().all(|j| is_p[(p + 2 * j - lo) as usize]))
        .collect();
    Ok(PatternHits { p1s, warning })
}

/// All k-subsets of odd primes with `p_k − p₁ ≤ window` and
/// `p₁ ∈ [p1_min, p1_max]`, ordered by `p₁` then lexicographically.
pub fn find_tuples(k: usize, window: u64, p1_min: u64, p1_max: u64) -> Result<Vec<Vec<u64>>> {
    if k < 2 {
        return Err(Error::InvalidArgument("k must be at least 2".into()));
    }
    if window < 2 * (k as u64 - 1) {
        return Err(Error::InvalidArgument(format!(
            "window {window} cannot hold {k} odd primes"
        )));
    }
    let lo = p1_min.max(3);
    if lo > p1_max {
        return Ok(Vec::new());
    }
    let primes = primes_in(lo, p1_max.saturating_add(window))?;
    let mut out = Vec::new();
    let mut tail: Vec<u64> = Vec::with_capacity(k);
    for (i, &p1) in primes.iter().enumerate() {
        if p1 > p1_max {
            break;
        }
        let end = primes[i + 1..].partition_point(|&p| p <= p1 + window);
        let pool = &primes[i + 1..i + 1 + end];
        tail.clear();
        tail.push(p1);
        combinations(pool, k - 1, &mut tail, &mut out);
    }
    Ok(out)
}

fn combinations(pool: &[u64], need: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if need == 0 {
        out.push(prefix.clone());
        return;
    }
    for i in 0..pool.len() {
        if pool.len() - i < need {
            break;
        }
        prefix.push(pool[i]);
        combinations(&pool[i + 1..], need - 1, prefix, out);
        prefix.pop();
    }
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        BigUint::from_str(&text).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => s.serialize_some(&v.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| BigUint::from_str(&t).map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

/// A certified value as decimal text with an explicit error bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecimalValue {
    pub value: String,
    pub error: String,
}

/// Significant digits written for high-precision values.
pub const RECORD_DIGITS: usize = 40;

impl DecimalValue {
    pub fn from_magnitude(m: &crate::HighPrecisionMagnitude) -> Self {
        DecimalValue {
            value: m.value_string(RECORD_DIGITS),
            error: m.error_string(),
        }
    }
}

/// One line of the record store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub primes: Vec<u64>,
    #[serde(with = "decimal")]
    pub n: BigUint,
    pub k: usize,
    pub window: u64,
    pub case_tag: Case,
    #[serde(with = "decimal")]
    pub a: BigUint,
    pub coprime: bool,
    pub product_value: Option<DecimalValue>,
    pub direct_value: Option<DecimalValue>,
    #[serde(with = "decimal::option", default)]
    pub height: Option<BigUint>,
    #[serde(with = "decimal")]
    pub bateman: BigUint,
    pub growth_ratio: f64,
    pub dk_estimate: f64,
}

impl ScanRecord {
    pub fn from_certificate(cert: &WitnessCertificate, timestamp: u64) -> Result<Self> {
        let t = &cert.tuple;
        Ok(ScanRecord {
            timestamp,
            primes: t.primes().to_vec(),
            n: t.n().clone(),
            k: t.k(),
            window: t.window(),
            case_tag: t.case(),
            a: cert.point.a.clone(),
            coprime: cert.point.coprime(),
            product_value: cert.product_value.as_ref().map(DecimalValue::from_magnitude),
            direct_value: cert.direct_value.as_ref().map(DecimalValue::from_magnitude),
            height: cert.height.clone(),
            bateman: bounds::bateman_bound(t.primes())?,
            growth_ratio: cert.growth_ratio,
            dk_estimate: cert.dk_estimate,
        })
    }

    /// One line of structured text, no trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }

    pub fn from_line(line: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(line).map_err(|e| e.to_string())
    }

    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::GrowthRatio => self.growth_ratio,
            Metric::DkEstimate => self.dk_estimate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    GrowthRatio,
    DkEstimate,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "growth_ratio" => Ok(Metric::GrowthRatio),
            "dk_estimate" => Ok(Metric::DkEstimate),
            _ => Err(Error::InvalidArgument(format!("unknown metric {s:?}"))),
        }
    }
}

/// Appends one record as a single line. Never rewrites existing lines.
pub fn record_append(path: &Path, record: &ScanRecord) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = record.to_line();
    line.push('\n');
    file.write_all(line.as_bytes())?;
    Ok(())
}

/// Reads every record; blank lines are ignored.
pub fn read_records(path: &Path) -> Result<Vec<ScanRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = ScanRecord::from_line(&line).map_err(|message| Error::Parse {
            line: i + 1,
            message,
        })?;
        out.push(record);
    }
    Ok(out)
}

/// The `top` records with `k` primes, best metric first, ties to smaller n.
pub fn record_best(path: &Path, k: usize, metric: Metric, top: usize) -> Result<Vec<ScanRecord>> {
    let mut records: Vec<ScanRecord> = read_records(path)?
        .into_iter()
        .filter(|r| r.k == k && r.metric(metric).is_finite())
        .collect();
    records.sort_by(|a, b| {
        b.metric(metric)
            .total_cmp(&a.metric(metric))
            .then_with(|| a.n.cmp(&b.n))
    });
    records.truncate(top);
    Ok(records)
}
