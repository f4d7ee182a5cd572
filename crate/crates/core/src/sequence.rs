//! Discretization of rating matrices into (acute set, late set) sequences.

use serde::{Deserialize, Serialize};

use crate::cohort::{CohortTable, PatientRecord, MAX_RATING};
use crate::error::{Error, Result};
use crate::symptom::{Stage, Symptom, SymptomSet};

/// Inclusive severity bounds: a symptom enters a stage set when some rating
/// in that stage is `>=` the stage bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawThresholds")]
pub struct Thresholds {
    #[serde(rename = "theta_acute")]
    pub acute: u8,
    #[serde(rename = "theta_late")]
    pub late: u8,
}

#[derive(Deserialize)]
struct RawThresholds {
    #[serde(default = "default_acute")]
    theta_acute: u8,
    #[serde(default = "default_late")]
    theta_late: u8,
}

fn default_acute() -> u8 {
    5
}

fn default_late() -> u8 {
    3
}

impl TryFrom<RawThresholds> for Thresholds {
    type Error = Error;

    fn try_from(raw: RawThresholds) -> Result<Self> {
        Thresholds::new(raw.theta_acute, raw.theta_late)
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { acute: 5, late: 3 }
    }
}

impl Thresholds {
    pub fn new(acute: u8, late: u8) -> Result<Self> {
        for (name, v) in [("theta_acute", acute), ("theta_late", late)] {
            if v > MAX_RATING {
                return Err(Error::param(name, format!("{v} outside 0..=10")));
            }
        }
        Ok(Thresholds { acute, late })
    }

    pub fn for_stage(self, stage: Stage) -> u8 {
        match stage {
            Stage::Acute => self.acute,
            Stage::Late => self.late,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientSequence {
    pub patient_id: String,
    #[serde(rename = "acute_set")]
    pub acute: SymptomSet,
    #[serde(rename = "late_set")]
    pub late: SymptomSet,
}

impl PatientSequence {
    pub fn stage(&self, stage: Stage) -> SymptomSet {
        match stage {
            Stage::Acute => self.acute,
            Stage::Late => self.late,
        }
    }

    pub fn supports(&self, antecedent: SymptomSet, consequent: SymptomSet) -> bool {
        self.acute.is_superset(antecedent) && self.late.is_superset(consequent)
    }
}

/// Symptoms with at least one present rating `>= threshold` in `stage`.
pub fn stage_itemset(record: &PatientRecord, stage: Stage, threshold: u8) -> SymptomSet {
    Symptom::ALL
        .into_iter()
        .filter(|&s| record.ratings.stage_ratings(s, stage).any(|r| r >= threshold))
        .collect()
}

/// One sequence per patient, ordered by patient id. Patients with two empty
/// sets are kept: they still count in the support denominator.
pub fn build_sequences(stratum: &CohortTable, thresholds: Thresholds) -> Vec<PatientSequence> {
    let mut out: Vec<PatientSequence> = stratum
        .patients
        .iter()
        .map(|p| PatientSequence {
            patient_id: p.patient_id.clone(),
            acute: stage_itemset(p, Stage::Acute, thresholds.acute),
            late: stage_itemset(p, Stage::Late, thresholds.late),
        })
        .collect();
    out.sort_by(|a, b| a.patient_id.cmp(&b.patient_id));
    out
}
