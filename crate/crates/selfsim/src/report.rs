//! Machine-checkable verdicts shared by the theorem checkers.

use serde::Serialize;

/// One predicted-vs-measured comparison inside a theorem check.
///
/// Values are rendered as canonical strings: integers in full, reals with
/// shortest round-trip formatting, booleans as `true`/`false`. Integer
/// predictions must match exactly; real-valued ones carry their tolerance
/// in the producing checker.
#[derive(Debug, Clone, Serialize)]
pub struct Measurement {
    pub n: usize,
    pub quantity: String,
    pub predicted: String,
    pub measured: String,
    pub pass: bool,
}

impl Measurement {
    pub fn exact<T: PartialEq + std::fmt::Display>(
        n: usize,
        quantity: &str,
        predicted: T,
        measured: T,
    ) -> Self {
        let pass = predicted == measured;
        Measurement {
            n,
            quantity: quantity.to_string(),
            predicted: predicted.to_string(),
            measured: measured.to_string(),
            pass,
        }
    }

    /// An inequality-style measurement: `pass` is supplied by the caller,
    /// `predicted` documents the bound and `measured` the observed value.
    pub fn bound<T: std::fmt::Display>(
        n: usize,
        quantity: &str,
        bound: T,
        measured: T,
        pass: bool,
    ) -> Self {
        Measurement {
            n,
            quantity: quantity.to_string(),
            predicted: bound.to_string(),
            measured: measured.to_string(),
            pass,
        }
    }
}

/// Pass/fail verdict for one theorem on one model, with witnesses.
///
/// `applicable` is false when the theorem's hypothesis is unmet (for
/// example no constant inner degree); such reports never count as
/// failures. `pass` is the conjunction of the measurement verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub model: String,
    pub depth_range: (usize, usize),
    pub applicable: bool,
    pub pass: bool,
    pub measurements: Vec<Measurement>,
    pub witnesses: Vec<String>,
    pub notes: Vec<String>,
}

impl TheoremReport {
    pub fn new(theorem: &str, model: &str, depth_range: (usize, usize)) -> Self {
        TheoremReport {
            theorem: theorem.to_string(),
            model: model.to_string(),
            depth_range,
            applicable: true,
            pass: true,
            measurements: Vec::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn inapplicable(theorem: &str, model: &str, reason: &str) -> Self {
        let mut r = TheoremReport::new(theorem, model, (0, 0));
        r.applicable = false;
        r.notes.push(reason.to_string());
        r
    }

    pub fn push(&mut self, m: Measurement) {
        if !m.pass {
            self.pass = false;
        }
        self.measurements.push(m);
    }

    pub fn fail(&mut self, witness: String) {
        self.pass = false;
        self.witnesses.push(witness);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// True when the report raises no objection: it either passed or its
    /// hypothesis was unmet.
    pub fn ok(&self) -> bool {
        !self.applicable || self.pass
    }
}
