//! Structured verdicts produced by every check.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize};

use crate::tolerance::Tolerances;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "N/A",
        }
    }
}

/// Evidence attached to a report. Complex numbers are `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    Indices(Vec<usize>),
    Count(usize),
    Flag(bool),
    Scalar([f64; 2]),
    Vector(Vec<[f64; 2]>),
    Text(String),
}

impl Witness {
    pub fn scalar(z: C64) -> Self {
        Witness::Scalar([z.re, z.im])
    }

    pub fn vector<'a>(zs: impl IntoIterator<Item = &'a C64>) -> Self {
        Witness::Vector(zs.into_iter().map(|z| [z.re, z.im]).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub group: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub verdict: Verdict,
    #[serde(deserialize_with = "nullable_reals")]
    pub residuals: BTreeMap<String, f64>,
    pub witnesses: BTreeMap<String, Witness>,
    pub provenance: Provenance,
    #[serde(default)]
    pub subchecks: Vec<VerificationReport>,
}

// Non-finite residuals are emitted as `null`.
fn nullable_reals<'de, D>(d: D) -> Result<BTreeMap<String, f64>, D::Error>
where
    D: Deserializer<'de>,
{
    let raw: BTreeMap<String, Option<f64>> = BTreeMap::deserialize(d)?;
    Ok(raw.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect())
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, group: impl Into<String>, tolerances: Tolerances) -> Self {
        Self {
            check: check.into(),
            verdict: Verdict::Pass,
            residuals: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            provenance: Provenance {
                seed: None,
                tolerances,
                group: group.into(),
            },
            subchecks: Vec::new(),
        }
    }

    pub fn not_applicable(mut self, reason: impl Into<String>) -> Self {
        self.verdict = Verdict::NotApplicable;
        self.witnesses.insert("reason".into(), Witness::Text(reason.into()));
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.provenance.seed = Some(seed);
        for sub in &mut self.subchecks {
            sub.provenance.seed = Some(seed);
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Record an informational residual.
    pub fn record(&mut self, name: impl Into<String>, value: f64) {
        self.residuals.insert(name.into(), value);
    }

    /// Record a residual and fail the report if it exceeds `threshold`
    /// (or is not finite). Returns whether it was within bounds.
    pub fn bound(&mut self, name: impl Into<String>, value: f64, threshold: f64) -> bool {
        let ok = value.is_finite() && value <= threshold;
        self.residuals.insert(name.into(), value);
        if !ok {
            self.fail();
        }
        ok
    }

    pub fn witness(&mut self, name: impl Into<String>, w: Witness) {
        self.witnesses.insert(name.into(), w);
    }

    pub fn fail(&mut self) {
        if self.verdict != Verdict::NotApplicable {
            self.verdict = Verdict::Fail;
        }
    }

    /// Mark failure with an explanatory witness.
    pub fn fail_with(&mut self, name: impl Into<String>, w: Witness) {
        self.witness(name, w);
        self.fail();
    }

    pub fn push(&mut self, sub: VerificationReport) {
        if sub.verdict == Verdict::Fail {
            self.fail();
        }
        self.subchecks.push(sub);
    }

    /// Largest recorded residual, ignoring subchecks.
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |m, &v| m.max(v))
    }

    pub fn subcheck(&self, name: &str) -> Option<&VerificationReport> {
        self.subchecks.iter().find(|s| s.check == name)
    }
}
