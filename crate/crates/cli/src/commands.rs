use std::io::Write;

use khier_core::generators::{Family, FamilySpec};
use khier_core::hierarchy::{
    derive_quadratics, exponents_fourier_motzkin, exponents_recursion, magnitude_gap, ExponentHierarchy,
};
use khier_core::instance::{tail_indices, validate_regular, SdpSystem, TailIndexVector};
use khier_core::reduce::{facial_reduction, FrCertificate};
use khier_core::scalar::{format_float, parse_float, parse_rational, Float, Rational, Real};
use khier_core::verify::{check_hierarchy, check_scales, fit_sweep, log_spaced_scales, sweep_point, HierarchyReport, ScaleSweep};
use khier_core::Error;
use rayon::prelude::*;

use crate::report::{analyze, AnalysisReport};
use crate::CliError;

/// Digits for floats written to CSV.
pub const CSV_DIGITS: usize = 17;

pub fn parse_list<T>(s: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| f(p.trim()).ok_or_else(|| CliError::Parse(format!("invalid {what} \"{}\"", p.trim()))))
        .collect()
}

pub fn family_spec(family: &str, size: usize, coeffs: Option<&str>) -> Result<FamilySpec, CliError> {
    let family = Family::from_name(family).ok_or_else(|| {
        let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
        CliError::Parse(format!("unknown family \"{family}\" (expected one of {})", names.join(", ")))
    })?;
    let coeffs = coeffs.map(|c| parse_list(c, "coefficient", parse_rational)).transpose()?;
    Ok(FamilySpec { family, size, coeffs })
}

pub fn cmd_generate(spec: &FamilySpec) -> Result<String, CliError> {
    Ok(crate::io::instance_to_string(&spec.build()?))
}

pub fn cmd_analyze(sys: &SdpSystem, reduce_first: bool, tol: f64) -> Result<AnalysisReport, CliError> {
    if reduce_first && validate_regular(sys).k() == 0 {
        let out = cmd_reduce(sys, tol)?;
        let mut report = analyze(&out.output)?;
        report.warnings.insert(0, format!("analysed the reformulation found by facial reduction (k = {})", out.certificate.k));
        if out.certificate.heuristic {
            report.warnings.push("heuristic reduction: maximal rank was not certified at some step".into());
        }
        if out.certificate.ambiguous {
            report.warnings.push("reduction reported numerical ambiguity".into());
        }
        return Ok(report);
    }
    analyze(sys)
}

pub struct ReduceOutcome {
    pub output: SdpSystem,
    pub certificate: FrCertificate,
    pub round_trip_error: f64,
}

pub fn cmd_reduce(sys: &SdpSystem, tol: f64) -> Result<ReduceOutcome, CliError> {
    let (output, certificate) = facial_reduction(sys, tol)?;
    let round_trip_error = certificate.verify(sys, &output)?;
    Ok(ReduceOutcome { output, certificate, round_trip_error })
}

/// `"lo:hi:count"` (log-spaced) or a comma-separated list of scales.
pub fn parse_scales(s: &str) -> Result<Vec<Float>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let bound = |p: &str| {
            parse_float(p)
                .filter(|x| *x > Float::ZERO)
                .ok_or_else(|| CliError::Parse(format!("invalid scale \"{p}\"")))
        };
        let (lo, hi) = (bound(parts[0])?, bound(parts[1])?);
        let count: usize = parts[2].trim().parse().map_err(|_| CliError::Parse(format!("invalid count \"{}\"", parts[2])))?;
        let log10 = |x: &Float| Real::log2(x) / std::f64::consts::LOG2_10;
        return Ok(log_spaced_scales(log10(&lo), log10(&hi), count));
    }
    parse_list(s, "scale", parse_float)
}

pub struct VerifyOutcome {
    pub sweep: ScaleSweep,
    pub alpha: Vec<Rational>,
    pub report: HierarchyReport,
    /// `(scale index, j)` of derived quadratics that were not strictly positive.
    pub quadratic_failures: Vec<(usize, usize)>,
}

impl VerifyOutcome {
    pub fn pass(&self) -> bool {
        self.report.pass() && self.quadratic_failures.is_empty()
    }
}

pub fn cmd_verify(sys: &SdpSystem, scales: &[Float], alpha: Option<Vec<Rational>>, tol: f64) -> Result<VerifyOutcome, CliError> {
    let part = validate_regular(sys);
    if part.k() == 0 {
        return Err(Error::Malformed("system is not in regular form; run `reduce` first".into()).into());
    }
    check_scales(scales)?;
    let points = scales
        .par_iter()
        .map(|s| sweep_point(sys, &part, s))
        .collect::<Result<Vec<_>, Error>>()?;
    let sweep = fit_sweep(scales.to_vec(), points)?;
    let mut quadratic_failures = Vec::new();
    let derived = if part.k() >= 2 {
        let tails = tail_indices(sys, &part)?;
        let alpha = exponents_recursion(&tails.tails)?.alpha().to_vec();
        (alpha, derive_quadratics(sys, &part, &tails)?)
    } else {
        (Vec::new(), Vec::new())
    };
    for (idx, x) in sweep.points.iter().enumerate() {
        let full = sys.complete(x)?;
        for q in &derived.1 {
            if q.evaluate(&full) <= Float::ZERO {
                quadratic_failures.push((idx, q.j));
            }
        }
    }
    let alpha = alpha.unwrap_or(derived.0);
    if alpha.len() + 1 != part.k() && !(alpha.is_empty() && part.k() <= 1) {
        return Err(Error::DimensionMismatch(format!("{} exponents for k = {}", alpha.len(), part.k())).into());
    }
    let report = check_hierarchy(&sweep, &alpha, tol);
    Ok(VerifyOutcome { sweep, alpha, report, quadratic_failures })
}

fn csv_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("writing CSV: {e}"))
}

pub fn write_sweep_csv<W: Write>(sweep: &ScaleSweep, out: W) -> Result<(), CliError> {
    let k = sweep.points.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["scale".to_string()];
    header.extend((1..=k).map(|j| format!("x{j}")));
    w.write_record(&header).map_err(csv_err)?;
    for (s, x) in sweep.scales.iter().zip(&sweep.points) {
        let mut row = vec![format_float(s, CSV_DIGITS)];
        row.extend(x.iter().map(|v| format_float(v, CSV_DIGITS)));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_summary_csv<W: Write>(report: &HierarchyReport, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "predicted_alpha", "fitted_slope", "residual", "verdict"]).map_err(csv_err)?;
    for p in &report.pairs {
        w.write_record([
            p.j.to_string(),
            khier_core::scalar::format_rational(&p.predicted),
            format!("{:.16e}", p.slope),
            format!("{:.16e}", p.residual),
            if p.pass { "PASS" } else { "FAIL" }.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub struct ExponentsOutcome {
    pub recursion: ExponentHierarchy,
    pub fourier_motzkin: ExponentHierarchy,
    pub gap: Rational,
}

pub fn cmd_exponents(tails: &[usize], k: Option<usize>) -> Result<ExponentsOutcome, CliError> {
    if let Some(k) = k {
        if tails.len() + 1 != k {
            return Err(Error::InvalidTails(format!("{} tail indices given for k = {k}, expected {}", tails.len(), k.saturating_sub(1))).into());
        }
    }
    let t = TailIndexVector::new(tails.to_vec());
    t.validate()?;
    let recursion = exponents_recursion(&t)?;
    let fourier_motzkin = exponents_fourier_motzkin(&t)?;
    let gap = magnitude_gap(&recursion);
    Ok(ExponentsOutcome { recursion, fourier_motzkin, gap })
}
