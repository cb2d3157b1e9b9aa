use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use markoff_core::approx::{phi_certified, verify_thm31, CertificateStatus};
use markoff_core::markoff::{
    alpha_expansion_for, beta_plus3_expansion_for, coordinates_for, enumerate_markoff, form_roots,
    markoff_form, triple_for, uniqueness_scan,
};
use markoff_core::seqlab::{classify_theta, companion, Classification, Family, RunLengthSeq};
use markoff_core::{ContinuedFraction, Error, QuadraticIrrational as Qi};
use serde_json::{json, Value};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "markoff", version)]
#[command(about = "Markoff triples, Markoff forms and the constant inf q‖qθ‖ in exact arithmetic")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Output::Text, global = true)]
    output: Output,
    /// Digits after the decimal point in decimal renderings.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u16).range(1..), global = true)]
    precision: u16,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List Markoff triples with maximal element at most the bound.
    Tree {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        bound: u64,
    },
    /// The Markoff form of m, its roots and their expansions.
    Form {
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(5..))]
        cap: u64,
    },
    /// Certified inf q‖qθ‖ for a quadratic irrational.
    Phi {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        qmax: u64,
    },
    /// Check that q = m is the unique best q‖qθ‖ for both roots of f_m.
    Verify {
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        qmax: u64,
    },
    /// Match θ, up to θ ↦ ±θ + k, with a root of a Markoff form.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(5..))]
        cap: u64,
    },
    /// The other member of the family equivalent to a run-length sequence.
    Companion {
        #[arg(long)]
        seq: String,
        #[arg(long, default_value = "m01", value_parser = parse_family)]
        family: Family,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Rendered result of a command: JSON plus flat views for text and CSV.
struct Report {
    json: Value,
    text: String,
    csv: String,
    exit: u8,
}

impl Report {
    fn new(json: Value, text: String, csv: String) -> Self {
        Self {
            json,
            text,
            csv,
            exit: 0,
        }
    }
}

fn parse_theta(s: &str) -> Result<ContinuedFraction, Error> {
    if s.trim_start().starts_with('[') {
        s.parse()
    } else {
        Ok(ContinuedFraction::expand(&s.parse::<Qi>()?))
    }
}

fn csv_line(fields: &[String]) -> String {
    let quoted: Vec<String> = fields
        .iter()
        .map(|f| {
            if f.contains([',', '"', '\n']) {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect();
    quoted.join(",") + "\n"
}

fn key_value_csv(rows: &[(&str, String)]) -> String {
    let mut out = csv_line(&["key".into(), "value".into()]);
    for (k, v) in rows {
        out += &csv_line(&[k.to_string(), v.clone()]);
    }
    out
}

fn key_value_text(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn polynomial(a: &num_bigint::BigInt, b: &num_bigint::BigInt, c: &num_bigint::BigInt) -> String {
    let mut out = String::new();
    for (coef, mono) in [(a, "x^2"), (b, "xy"), (c, "y^2")] {
        if coef.sign() == num_bigint::Sign::NoSign {
            continue;
        }
        let mag = coef.magnitude();
        let sign = if coef.sign() == num_bigint::Sign::Minus {
            "-"
        } else {
            "+"
        };
        if out.is_empty() {
            if sign == "-" {
                out.push('-');
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        if *mag != 1u32.into() {
            let _ = write!(out, "{mag}");
        }
        out.push_str(mono);
    }
    out
}

fn tree(bound: u64) -> Result<Report, Error> {
    let triples = enumerate_markoff(bound)?;
    let scan = uniqueness_scan(bound)?;
    let max_m = triples.last().map(|t| t.m);
    let json = json!({
        "bound": bound,
        "count": triples.len(),
        "max_m": max_m,
        "triples": triples,
        "uniqueness": { "collisions": scan.collisions, "unique": scan.collisions.is_empty() },
    });
    let mut text = String::new();
    for t in &triples {
        let _ = writeln!(text, "{t}");
    }
    let _ = writeln!(
        text,
        "{} triples, max m = {}, {}",
        triples.len(),
        max_m.map_or("-".into(), |m| m.to_string()),
        if scan.collisions.is_empty() {
            "every maximal element occurs once"
        } else {
            "REPEATED maximal elements"
        }
    );
    let mut csv = csv_line(&["m".into(), "m1".into(), "m2".into()]);
    for t in &triples {
        csv += &csv_line(&[t.m.to_string(), t.m1.to_string(), t.m2.to_string()]);
    }
    Ok(Report::new(json, text, csv))
}

fn form(m: u64, cap: u64, digits: usize) -> Result<Report, Error> {
    let f = markoff_form(&triple_for(m, cap)?)?;
    let (alpha, beta) = form_roots(&f);
    let (a, b, c) = f.coefficients();
    let coords = if m > 2 {
        Some(coordinates_for(&f)?)
    } else {
        None
    };
    let alpha_cf = alpha_expansion_for(&f)?;
    let beta3_cf = beta_plus3_expansion_for(&f)?;
    let minus_cf = ContinuedFraction::expand(&-&(&beta + &Qi::from_integer(2)));
    let poly = polynomial(&a, &b, &c);
    let rows = vec![
        ("m", m.to_string()),
        ("u", f.u.to_string()),
        ("v", f.v.to_string()),
        ("form", poly.clone()),
        ("disc", f.discriminant().to_string()),
        ("alpha", alpha.to_string()),
        ("alpha_decimal", alpha.to_decimal(digits)),
        ("beta", beta.to_string()),
        ("beta_decimal", beta.to_decimal(digits)),
        ("alpha_cf", alpha_cf.to_string()),
        ("minus_beta_minus_2_cf", minus_cf.to_string()),
        ("beta_plus_3_cf", beta3_cf.to_string()),
        ("coordinates", coords.map_or("-".into(), |c| c.to_string())),
    ];
    let json = json!({
        "form": f,
        "polynomial": poly,
        "alpha": alpha.to_string(),
        "alpha_decimal": alpha.to_decimal(digits),
        "beta": beta.to_string(),
        "beta_decimal": beta.to_decimal(digits),
        "alpha_cf": alpha_cf.to_string(),
        "minus_beta_minus_2_cf": minus_cf.to_string(),
        "beta_plus_3_cf": beta3_cf.to_string(),
        "coordinates": coords,
    });
    Ok(Report::new(
        json,
        key_value_text(&rows),
        key_value_csv(&rows),
    ))
}

fn phi(theta: &str, qmax: u64, digits: usize) -> Result<Report, Error> {
    let cert = phi_certified(&parse_theta(theta)?, qmax)?;
    let record = cert.record(digits);
    let rows = vec![
        ("theta", record.theta.clone()),
        ("phi", record.phi.clone()),
        ("phi_decimal", record.phi_decimal.clone()),
        (
            "argmin_q",
            cert.argmin()
                .map_or("not attained".into(), |q| q.to_string()),
        ),
        ("unique", record.unique.to_string()),
        ("checked_upto", record.checked_upto.to_string()),
        ("status", record.status.to_string()),
        ("method_notes", record.method_notes.clone()),
    ];
    let mut report = Report::new(
        serde_json::to_value(&record).map_err(internal)?,
        key_value_text(&rows),
        key_value_csv(&rows),
    );
    if cert.status == CertificateStatus::Inconclusive {
        report.exit = EXIT_INCONCLUSIVE;
    }
    Ok(report)
}

fn verify(m: u64, qmax: u64, digits: usize) -> Result<Report, Error> {
    let report = verify_thm31(m, qmax)?;
    let mut text = format!(
        "m = {m}, q ≤ {qmax}\nexpected m‖mθ‖ = {} ≈ {}\n",
        report.expected,
        report.expected.to_decimal(digits)
    );
    let mut csv = csv_line(&[
        "root".into(),
        "expansion".into(),
        "value_at_m".into(),
        "equality".into(),
        "counterexamples".into(),
    ]);
    for c in &report.checks {
        let counter: Vec<String> = c.counterexamples.iter().map(u64::to_string).collect();
        let _ = writeln!(
            text,
            "{:<12} {}  equality {}  counterexamples [{}]",
            c.label,
            c.expansion,
            c.equality_holds,
            counter.join(", ")
        );
        csv += &csv_line(&[
            c.label.into(),
            c.expansion.to_string(),
            c.value_at_m.to_string(),
            c.equality_holds.to_string(),
            counter.join(" "),
        ]);
    }
    let _ = writeln!(text, "{}", if report.passed { "PASSED" } else { "FAILED" });
    let mut out = Report::new(serde_json::to_value(&report).map_err(internal)?, text, csv);
    if !report.passed {
        out.exit = EXIT_FAILED;
    }
    Ok(out)
}

fn classify(theta: &str, cap: u64, digits: usize) -> Result<Report, Error> {
    let value = parse_theta(theta)?.value();
    let rows: Vec<(&str, String)>;
    let json = match classify_theta(&value, cap)? {
        Classification::Markoff(a) => {
            rows = vec![
                ("verdict", "markoff".into()),
                ("m", a.m.to_string()),
                ("root", a.root.to_string()),
                ("normalized_theta", a.normalized_theta.to_string()),
                ("normalized_decimal", a.normalized_theta.to_decimal(digits)),
                ("shift", a.shift.to_string()),
                ("sign", a.sign.to_string()),
            ];
            let mut v = serde_json::to_value(&a).map_err(internal)?;
            v["verdict"] = json!("markoff");
            v
        }
        Classification::NotMarkoff(w) => {
            rows = vec![
                ("verdict", "none".into()),
                ("n", w.n.to_string()),
                ("mu_n", w.mu_n.to_string()),
                ("phi_upper_bound", w.phi_upper_bound.to_string()),
                (
                    "phi_upper_bound_decimal",
                    w.phi_upper_bound.to_decimal(digits),
                ),
            ];
            json!({ "verdict": "none", "witness": w })
        }
    };
    Ok(Report::new(
        json,
        key_value_text(&rows),
        key_value_csv(&rows),
    ))
}

fn companion_cmd(seq: &str, family: Family) -> Result<Report, Error> {
    let s: RunLengthSeq = seq.parse()?;
    let c = companion(&s, family)?;
    let name = format!("{family:?}");
    let json = json!({ "input": s.to_string(), "family": name, "companion": c.to_string() });
    let rows = vec![
        ("input", s.to_string()),
        ("family", name),
        ("companion", c.to_string()),
    ];
    Ok(Report::new(json, format!("{c}\n"), key_value_csv(&rows)))
}

fn internal(e: serde_json::Error) -> Error {
    Error::Internal(e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => EXIT_USAGE,
        Error::Domain(_) | Error::Unsupported(_) | Error::ResourceLimit(_) => EXIT_DOMAIN,
        Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
        Error::Internal(_) => EXIT_FAILED,
    }
}

fn run(cli: &Cli) -> Result<Report, Error> {
    let digits = usize::from(cli.precision);
    match &cli.cmd {
        Command::Tree { bound } => tree(*bound),
        Command::Form { m, cap } => form(*m, *cap, digits),
        Command::Phi { theta, qmax } => phi(theta, *qmax, digits),
        Command::Verify { m, qmax } => verify(*m, *qmax, digits),
        Command::Classify { theta, cap } => classify(theta, *cap, digits),
        Command::Companion { seq, family } => companion_cmd(seq, *family),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let body = match cli.output {
                Output::Json => {
                    serde_json::to_string_pretty(&report.json).unwrap_or_default() + "\n"
                }
                Output::Csv => report.csv,
                Output::Text => report.text,
            };
            // a closed pipe (e.g. `| head`) is not an error
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            ExitCode::from(report.exit)
        }
        Err(e) => {
            if cli.output == Output::Json {
                println!(
                    "{}",
                    json!({ "error": e.to_string(), "exit_code": exit_code(&e) })
                );
            }
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
