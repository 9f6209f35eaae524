//! Structural analysis of a system: blocks, tails, quadratics and exponents.

use khier_core::hierarchy::{
    derive_quadratics, exponents_fourier_motzkin, exponents_recursion, magnitude_gap, DerivedQuadratic,
    ExponentHierarchy,
};
use khier_core::instance::{tail_indices, validate_regular, SdpSystem};
use khier_core::scalar::{format_rational, Rational};
use serde_json::{json, Value};

use crate::io::{hierarchy_json, quadratic_json, quadratic_text, rational_json};
use crate::CliError;

#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub label: String,
    pub regular: bool,
    pub k: usize,
    pub r: Vec<usize>,
    pub tails: Vec<usize>,
    pub alpha_recursion: Option<ExponentHierarchy>,
    pub alpha_fm: Option<ExponentHierarchy>,
    pub alpha_match: bool,
    pub magnitude_gap: Option<Rational>,
    pub quadratics: Vec<DerivedQuadratic>,
    pub warnings: Vec<String>,
}

pub fn analyze(sys: &SdpSystem) -> Result<AnalysisReport, CliError> {
    let part = validate_regular(sys);
    let k = part.k();
    let mut report = AnalysisReport {
        label: sys.label().to_string(),
        regular: k > 0,
        k,
        r: part.r().to_vec(),
        tails: Vec::new(),
        alpha_recursion: None,
        alpha_fm: None,
        alpha_match: true,
        magnitude_gap: None,
        quadratics: Vec::new(),
        warnings: Vec::new(),
    };
    if k == 0 {
        report.warnings.push("not in regular form: A_1 has no leading identity block; run `reduce` first".into());
        return Ok(report);
    }
    if part.is_degenerate() {
        report.warnings.push(format!(
            "degenerate partition: r_1 + ... + r_k = n = {}, the trailing block is empty and the hierarchy holds vacuously",
            sys.n()
        ));
    }
    if k < 2 {
        return Ok(report);
    }
    let tails = tail_indices(sys, &part)?;
    report.tails = tails.tails.as_slice().to_vec();
    let rec = exponents_recursion(&tails.tails)?;
    let fm = exponents_fourier_motzkin(&tails.tails)?;
    report.alpha_match = rec.alpha() == fm.alpha();
    report.magnitude_gap = Some(magnitude_gap(&rec));
    match derive_quadratics(sys, &part, &tails) {
        Ok(q) => report.quadratics = q,
        Err(e) => report.warnings.push(format!("quadratics unavailable: {e}")),
    }
    report.alpha_recursion = Some(rec);
    report.alpha_fm = Some(fm);
    Ok(report)
}

fn list<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

fn alpha_text(h: &Option<ExponentHierarchy>) -> String {
    h.as_ref().map_or("-".into(), |h| format!("({})", h.alpha().iter().map(format_rational).collect::<Vec<_>>().join(", ")))
}

impl AnalysisReport {
    pub fn to_json(&self) -> Value {
        json!({
            "label": self.label,
            "regular": self.regular,
            "k": self.k,
            "r": self.r,
            "tails": self.tails,
            "alpha_recursion": self.alpha_recursion.as_ref().map(hierarchy_json),
            "alpha_fm": self.alpha_fm.as_ref().map(hierarchy_json),
            "alpha_match": self.alpha_match,
            "magnitude_gap": self.magnitude_gap.as_ref().map(rational_json),
            "quadratics": self.quadratics.iter().map(quadratic_json).collect::<Vec<_>>(),
            "warnings": self.warnings,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let label = if self.label.is_empty() { "(unlabelled)" } else { &self.label };
        out += &format!("instance:        {label}\n");
        out += &format!("regular:         {}\n", self.regular);
        out += &format!("k:               {}\n", self.k);
        out += &format!("r:               ({})\n", list(&self.r));
        if !self.tails.is_empty() {
            out += &format!("tails t_2..t_k:  ({})\n", list(&self.tails));
        }
        if self.alpha_recursion.is_some() {
            out += &format!("alpha recursion: {}\n", alpha_text(&self.alpha_recursion));
            out += &format!("alpha FM:        {}\n", alpha_text(&self.alpha_fm));
            out += &format!("alpha match:     {}\n", self.alpha_match);
        }
        if let Some(g) = &self.magnitude_gap {
            out += &format!("magnitude gap:   {}\n", format_rational(g));
        }
        for q in &self.quadratics {
            out += &format!("  {}\n", quadratic_text(q));
        }
        for w in &self.warnings {
            out += &format!("warning: {w}\n");
        }
        out
    }
}

