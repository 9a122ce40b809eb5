//! Verification reports: a flat table of rows, the bundles used, and a
//! ledger of externally quoted values next to ours. Serialisation is
//! deterministic (ordered maps, shortest round-trip floats), so equal inputs
//! give equal bytes.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::constants::{ConstantsBundle, Margin};
use crate::error::{Error, Result};
use crate::precision::{CertifiedReal, Interval};

/// Significant digits used when printing high-precision values.
pub const REPORT_DIGITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A valid bound that is at least one, so the comparison says nothing.
    Vacuous,
    Info,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub section: String,
    pub quantity: String,
    pub theoretical: Option<String>,
    pub observed: Option<String>,
    /// Slack, residual or relative deviation, depending on the row.
    pub deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub verdict: Status,
}

/// A quoted external value next to ours.
#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub quantity: String,
    pub ours: String,
    pub quoted: String,
    pub relative_deviation: f64,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BundleSummary {
    pub label: String,
    pub a: String,
    pub epsilon: String,
    pub z0: String,
    pub z0_minus_one: String,
    pub u: String,
    pub admissible: bool,
    pub margins: Vec<Margin>,
}

impl BundleSummary {
    pub fn new(label: &str, b: &ConstantsBundle) -> Self {
        BundleSummary {
            label: label.to_string(),
            a: up(&b.a),
            epsilon: mid(&b.epsilon),
            z0: mid(&b.z0),
            z0_minus_one: mid(&b.w),
            u: mid(&b.u),
            admissible: b.admissible,
            margins: b.margins.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub precision_digits: u32,
    pub seeds: BTreeMap<String, u64>,
    pub bundles: Vec<BundleSummary>,
    pub rows: Vec<Row>,
    pub ledger: Vec<LedgerEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    pub passed: bool,
}

/// Upper end of an enclosure, rounded up.
pub fn up(x: &Interval) -> String {
    x.upper().to_sci(REPORT_DIGITS)
}

/// Lower end of an enclosure, rounded down.
pub fn down(x: &Interval) -> String {
    x.lower().to_sci(REPORT_DIGITS)
}

pub fn mid(x: &Interval) -> String {
    x.to_sci(REPORT_DIGITS)
}

pub fn real(x: &CertifiedReal) -> String {
    x.to_sci(REPORT_DIGITS)
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// `|ours - quoted| / |quoted|`.
pub fn rel_dev(ours: f64, quoted: f64) -> f64 {
    if quoted == 0.0 {
        ours.abs()
    } else {
        (ours - quoted).abs() / quoted.abs()
    }
}

impl VerificationReport {
    pub fn new(command: &str, precision_digits: u32) -> Self {
        VerificationReport {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            precision_digits,
            seeds: BTreeMap::new(),
            bundles: Vec::new(),
            rows: Vec::new(),
            ledger: Vec::new(),
            wall_clock_seconds: None,
            passed: true,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.inputs
            .insert(key.to_string(), serde_json::to_value(value).expect("serialisable input"));
        self
    }

    pub fn seed(&mut self, key: &str, seed: u64) -> &mut Self {
        self.seeds.insert(key.to_string(), seed);
        self
    }

    pub fn bundle(&mut self, label: &str, b: &ConstantsBundle) -> &mut Self {
        self.bundles.push(BundleSummary::new(label, b));
        self
    }

    /// A judged row; `holds` decides pass or fail.
    #[allow(clippy::too_many_arguments)]
    pub fn check(
        &mut self,
        section: &str,
        quantity: &str,
        theoretical: impl Into<Option<String>>,
        observed: impl Into<Option<String>>,
        deviation: f64,
        tolerance: f64,
        holds: bool,
    ) -> &mut Self {
        let verdict = if holds { Status::Pass } else { Status::Fail };
        self.push(section, quantity, theoretical.into(), observed.into(), Some(deviation), Some(tolerance), verdict)
    }

    /// `observed <= theoretical` for a probability-type bound; a bound that
    /// is at least `vacuous_at` is reported but not judged.
    #[allow(clippy::too_many_arguments)]
    pub fn domination(
        &mut self,
        section: &str,
        quantity: &str,
        bound: f64,
        bound_text: String,
        observed: f64,
        tolerance: f64,
        vacuous_at: f64,
    ) -> &mut Self {
        let slack = bound - observed;
        let verdict = if bound >= vacuous_at {
            Status::Vacuous
        } else if slack >= -tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        self.push(section, quantity, Some(bound_text), Some(num(observed)), Some(slack), Some(tolerance), verdict)
    }

    /// A bound on a probability; flagged when it is at least one.
    pub fn probability(&mut self, section: &str, quantity: &str, value: String, vacuous: bool) -> &mut Self {
        let verdict = if vacuous { Status::Vacuous } else { Status::Info };
        self.push(section, quantity, Some(value), None, None, None, verdict)
    }

    pub fn info(
        &mut self,
        section: &str,
        quantity: &str,
        theoretical: impl Into<Option<String>>,
        observed: impl Into<Option<String>>,
    ) -> &mut Self {
        self.push(section, quantity, theoretical.into(), observed.into(), None, None, Status::Info)
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        section: &str,
        quantity: &str,
        theoretical: Option<String>,
        observed: Option<String>,
        deviation: Option<f64>,
        tolerance: Option<f64>,
        verdict: Status,
    ) -> &mut Self {
        if verdict == Status::Fail {
            self.passed = false;
        }
        self.rows.push(Row {
            section: section.to_string(),
            quantity: quantity.to_string(),
            theoretical,
            observed,
            deviation,
            tolerance,
            verdict,
        });
        self
    }

    pub fn ledger(&mut self, quantity: &str, ours: String, ours_f64: f64, quoted: &str, note: &str) -> &mut Self {
        let q: f64 = quoted.parse().unwrap_or(f64::NAN);
        self.ledger.push(LedgerEntry {
            quantity: quantity.to_string(),
            ours,
            quoted: quoted.to_string(),
            relative_deviation: rel_dev(ours_f64, q),
            note: note.to_string(),
        });
        self
    }

    pub fn rows_in(&self, section: &str) -> impl Iterator<Item = &Row> {
        let section = section.to_string();
        self.rows.iter().filter(move |r| r.section == section)
    }

    pub fn row(&self, section: &str, quantity: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.section == section && r.quantity == quantity)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// The row table as CSV.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}
