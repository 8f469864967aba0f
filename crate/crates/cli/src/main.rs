mod output;
mod verify;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use cyclo_core::bounds;
use cyclo_core::cyclo;
use cyclo_core::scan::{self, ScanRecord, RECORD_DIGITS};
use cyclo_core::witness::{self, CertificateStatus, Selector, WitnessCertificate};
use cyclo_core::HighPrecisionMagnitude;

use output::{big, join, Cell, Format, Table};

/// Default working precision in bits when `--precision` is absent.
pub const PRECISION_ENV: &str = "CYCLO_PRECISION";

#[derive(Parser)]
#[command(name = "cyclo", version, about = "Cyclotomic polynomial heights and witness evaluation")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct Precision {
    /// Working precision in bits.
    #[arg(long, env = PRECISION_ENV, default_value_t = witness::DEFAULT_PRECISION_BITS)]
    precision: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficients of Φₙ in ascending degree.
    Poly {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// The height A(n).
    Height {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// Upper bounds and the lower-bound target for a prime tuple.
    Bounds {
        #[arg(value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        /// Constant multiplying n^(2^(k-1)/k - 1) in the lower target.
        #[arg(long, default_value_t = 0.0)]
        dk: f64,
    },
    /// Witness certificate for a prime tuple.
    Witness {
        #[arg(value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[command(flatten)]
        precision: Precision,
        /// Also compute the exact height A(n).
        #[arg(long)]
        with_height: bool,
    },
    /// Search prime tuples and certify each one.
    Scan {
        #[arg(long)]
        k: usize,
        /// Largest allowed p_k - p_1.
        #[arg(long, conflicts_with = "pattern", required_unless_present = "pattern")]
        window: Option<u64>,
        /// Half-gaps j_2,...,j_k.
        #[arg(long, value_delimiter = ',')]
        pattern: Option<Vec<u64>>,
        #[arg(long, default_value_t = 3)]
        min: u64,
        #[arg(long)]
        max: u64,
        /// Append every record to this file.
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        with_height: bool,
        /// Record timestamp in Unix seconds; defaults to now.
        #[arg(long)]
        timestamp: Option<u64>,
        #[command(flatten)]
        precision: Precision,
    },
    /// Asymptotic series of one observable along a pattern.
    Asympt {
        #[arg(long, value_delimiter = ',', required = true)]
        pattern: Vec<u64>,
        /// growth_ratio, dk_estimate, odd_factor(U), even_factor(U),
        /// pk_odd_factor(U) or pk_even_factor(U).
        #[arg(long, value_parser = parse_selector)]
        selector: Selector,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        min: u64,
        #[command(flatten)]
        precision: Precision,
    },
    /// Run an invariant suite and report pass/fail counts.
    Verify {
        #[arg(long, value_enum)]
        suite: verify::Suite,
        #[arg(long)]
        max_n: Option<u64>,
    },
}

fn parse_selector(s: &str) -> Result<Selector, String> {
    s.parse().map_err(|e: cyclo_core::Error| e.to_string())
}

type CmdResult = Result<bool, Box<dyn std::error::Error>>;

fn magnitude_cells(m: Option<&HighPrecisionMagnitude>) -> [Cell; 2] {
    match m {
        Some(m) => [
            Cell::Text(m.value_string(RECORD_DIGITS)),
            Cell::Text(m.error_string()),
        ],
        None => [Cell::Empty, Cell::Empty],
    }
}

fn cmd_poly(n: u64, format: Format, out: &mut dyn Write) -> CmdResult {
    let record = cyclo::cyclotomic(n)?;
    if format == Format::Text {
        let line: Vec<String> = record.poly.coeffs().iter().map(ToString::to_string).collect();
        writeln!(out, "{}", line.join(" "))?;
        return Ok(true);
    }
    let mut t = Table::new(&["degree", "coefficient"]);
    for (d, c) in record.poly.coeffs().iter().enumerate() {
        t.push(vec![d.into(), big(c)]);
    }
    t.write(format, out)?;
    Ok(true)
}

fn cmd_height(n: u64, format: Format, out: &mut dyn Write) -> CmdResult {
    let h = cyclo::height(n)?;
    if format == Format::Text {
        writeln!(out, "{h}")?;
        return Ok(true);
    }
    let mut t = Table::new(&["n", "height"]);
    t.push(vec![n.into(), big(h)]);
    t.write(format, out)?;
    Ok(true)
}

fn cmd_bounds(primes: &[u64], dk: f64, format: Format, out: &mut dyn Write) -> CmdResult {
    let r = bounds::bound_report(primes, dk)?;
    let mut t = Table::new(&[
        "primes",
        "n",
        "k",
        "bateman",
        "c_k",
        "refined",
        "exponent",
        "n_power",
        "n_power_error",
        "power_bound",
        "power_bound_error",
        "d_k",
        "lower_target",
        "lower_target_error",
        "bridging",
    ]);
    let [np, npe] = magnitude_cells(Some(&r.n_power));
    let [pb, pbe] = magnitude_cells(Some(&r.power_bound));
    let [lt, lte] = magnitude_cells(Some(&r.lower_target));
    t.push(vec![
        join(&r.primes).into(),
        big(&r.n),
        r.k.into(),
        big(&r.bateman),
        r.c_k.to_string().into(),
        r.refined.to_string().into(),
        r.exponent.to_string().into(),
        np,
        npe,
        pb,
        pbe,
        r.d_k.into(),
        lt,
        lte,
        r.bridging.into(),
    ]);
    emit_record(&t, format, out)?;
    Ok(true)
}

fn emit_record(t: &Table, format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Text => t.write_record_text(out),
        _ => t.write(format, out),
    }
}

fn status_text(cert: &WitnessCertificate) -> String {
    match &cert.status {
        CertificateStatus::Coprime => "COPRIME".into(),
        CertificateStatus::Degenerate { gcd } => format!("DEGENERATE(gcd={gcd})"),
    }
}

fn cmd_witness(
    primes: &[u64],
    precision: u32,
    with_height: bool,
    format: Format,
    out: &mut dyn Write,
) -> CmdResult {
    let tuple = witness::classify(primes)?;
    let cert = witness::certificate(&tuple, precision, with_height)?;
    let mut t = Table::new(&[
        "primes",
        "n",
        "k",
        "case",
        "a",
        "modulus",
        "gcd",
        "status",
        "value",
        "value_error",
        "product_value",
        "product_error",
        "direct_value",
        "direct_error",
        "height",
        "a_lower",
        "growth_ratio",
        "dk_estimate",
        "pipelines_agree",
        "chain_holds",
    ]);
    let [v, ve] = magnitude_cells(Some(cert.value()));
    let [pv, pe] = magnitude_cells(cert.product_value.as_ref());
    let [dv, de] = magnitude_cells(cert.direct_value.as_ref());
    t.push(vec![
        join(tuple.primes()).into(),
        big(tuple.n()),
        tuple.k().into(),
        tuple.case().to_string().into(),
        big(&cert.point.a),
        big(&cert.point.modulus),
        big(&cert.point.gcd),
        status_text(&cert).into(),
        v,
        ve,
        pv,
        pe,
        dv,
        de,
        cert.height.as_ref().map(big).unwrap_or(Cell::Empty),
        cert.a_lower.into(),
        cert.growth_ratio.into(),
        cert.dk_estimate.into(),
        cert.pipelines_agree.into(),
        cert.chain_holds.into(),
    ]);
    emit_record(&t, format, out)?;
    Ok(true)
}

const SCAN_HEADERS: [&str; 17] = [
    "timestamp",
    "primes",
    "n",
    "k",
    "window",
    "case_tag",
    "a",
    "coprime",
    "product_value",
    "product_error",
    "direct_value",
    "direct_error",
    "height",
    "bateman",
    "growth_ratio",
    "dk_estimate",
    "status",
];

fn scan_row(r: &ScanRecord) -> Vec<Cell> {
    let pair = |d: &Option<scan::DecimalValue>| match d {
        Some(d) => [Cell::Text(d.value.clone()), Cell::Text(d.error.clone())],
        None => [Cell::Empty, Cell::Empty],
    };
    let [pv, pe] = pair(&r.product_value);
    let [dv, de] = pair(&r.direct_value);
    vec![
        r.timestamp.into(),
        join(&r.primes).into(),
        big(&r.n),
        r.k.into(),
        r.window.into(),
        r.case_tag.to_string().into(),
        big(&r.a),
        r.coprime.into(),
        pv,
        pe,
        dv,
        de,
        r.height.as_ref().map(big).unwrap_or(Cell::Empty),
        big(&r.bateman),
        r.growth_ratio.into(),
        r.dk_estimate.into(),
        (if r.coprime { "COPRIME" } else { "DEGENERATE" }).into(),
    ]
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    k: usize,
    window: Option<u64>,
    pattern: Option<Vec<u64>>,
    min: u64,
    max: u64,
    store: Option<PathBuf>,
    with_height: bool,
    timestamp: Option<u64>,
    precision: u32,
    format: Format,
    out: &mut dyn Write,
) -> CmdResult {
    let tuples: Vec<Vec<u64>> = match (&pattern, window) {
        (Some(pattern), _) => {
            if pattern.len() + 1 != k {
                return Err(cyclo_core::Error::InvalidArgument(format!(
                    "pattern has {} half-gaps but k = {k}",
                    pattern.len()
                ))
                .into());
            }
            let hits = scan::find_pattern(pattern, min, max)?;
            if let Some(w) = &hits.warning {
                eprintln!("warning: {w}");
            }
            hits.p1s
                .iter()
                .map(|&p| std::iter::once(p).chain(pattern.iter().map(|j| p + 2 * j)).collect())
                .collect()
        }
        (None, Some(w)) => scan::find_tuples(k, w, min, max)?,
        (None, None) => unreachable!("clap requires --window or --pattern"),
    };
    let timestamp = timestamp.unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    let results: Vec<Result<ScanRecord, String>> = tuples
        .par_iter()
        .map(|primes| {
            let tuple = witness::classify(primes).map_err(|e| e.to_string())?;
            let cert = witness::certificate(&tuple, precision, with_height)
                .map_err(|e| format!("skipping {primes:?}: {e}"))?;
            ScanRecord::from_certificate(&cert, timestamp).map_err(|e| e.to_string())
        })
        .collect();
    let mut table = Table::new(&SCAN_HEADERS);
    let mut records = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(msg) => eprintln!("warning: {msg}"),
        }
    }
    let degenerate = records.iter().filter(|r| !r.coprime).count();
    eprintln!(
        "scanned {} tuples, {degenerate} degenerate (gcd(a, M) > 1)",
        records.len()
    );
    if let Some(path) = &store {
        for rec in &records {
            scan::record_append(path, rec)?;
        }
    }
    if format == Format::Json {
        for rec in &records {
            writeln!(out, "{}", rec.to_line())?;
        }
    } else {
        for rec in &records {
            table.push(scan_row(rec));
        }
        table.write(format, out)?;
    }
    Ok(true)
}

fn cmd_asympt(
    pattern: &[u64],
    selector: &Selector,
    count: usize,
    min: u64,
    precision: u32,
    format: Format,
    out: &mut dyn Write,
) -> CmdResult {
    let table = witness::asymptotic_series(pattern, min, count, selector, precision)?;
    for s in &table.skipped {
        eprintln!("skipped p1={}: {}", s.p1, s.reason);
    }
    let mut t = Table::new(&["p1", "primes", "magnitude", "magnitude_error", "observable"]);
    for row in &table.rows {
        let [m, me] = magnitude_cells(Some(&row.magnitude));
        t.push(vec![row.p1.into(), join(&row.primes).into(), m, me, row.observable.into()]);
    }
    t.write(format, out)?;
    Ok(true)
}

fn run(cli: Cli, out: &mut dyn Write) -> CmdResult {
    let format = cli.format;
    match cli.command {
        Command::Poly { n } => cmd_poly(n, format, out),
        Command::Height { n } => cmd_height(n, format, out),
        Command::Bounds { primes, dk } => cmd_bounds(&primes, dk, format, out),
        Command::Witness {
            primes,
            precision,
            with_height,
        } => cmd_witness(&primes, precision.precision, with_height, format, out),
        Command::Scan {
            k,
            window,
            pattern,
            min,
            max,
            store,
            with_height,
            timestamp,
            precision,
        } => cmd_scan(
            k,
            window,
            pattern,
            min,
            max,
            store,
            with_height,
            timestamp,
            precision.precision,
            format,
            out,
        ),
        Command::Asympt {
            pattern,
            selector,
            count,
            min,
            precision,
        } => cmd_asympt(&pattern, &selector, count, min, precision.precision, format, out),
        Command::Verify { suite, max_n } => verify::run(suite, max_n, format, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(cli, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(true), Ok(())) => ExitCode::SUCCESS,
        (Ok(false), Ok(())) => ExitCode::FAILURE,
        (Err(e), _) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
        (_, Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
