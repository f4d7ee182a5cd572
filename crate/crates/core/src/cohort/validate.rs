use std::collections::HashMap;

use serde::Serialize;

use crate::cohort::{CohortTable, MAX_RATING};
use crate::symptom::{Stage, Symptom};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    DuplicatePatientId,
    RatingOutOfRange,
    NoAcuteRatings,
    UnratedSymptom,
    EmptyCohort,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Issue {
    pub kind: IssueKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patient_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symptom: Option<Symptom>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Reports problems without modifying the cohort.
///
/// Errors: duplicate ids, ratings above the scale. Warnings: patients with no
/// acute-stage ratings at all, and symptoms no patient ever rated. Symptom
/// names are typed, so out-of-vocabulary names are rejected at load time.
pub fn validate_cohort(cohort: &CohortTable) -> ValidationReport {
    let mut report = ValidationReport::default();
    if cohort.patients.is_empty() {
        report.errors.push(Issue {
            kind: IssueKind::EmptyCohort,
            patient_id: None,
            symptom: None,
            message: "cohort has no patients".into(),
        });
        return report;
    }

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for p in &cohort.patients {
        *counts.entry(p.patient_id.as_str()).or_default() += 1;
    }
    let mut duplicates: Vec<(&str, usize)> = counts.into_iter().filter(|(_, n)| *n > 1).collect();
    duplicates.sort();
    for (id, n) in duplicates {
        report.errors.push(Issue {
            kind: IssueKind::DuplicatePatientId,
            patient_id: Some(id.to_string()),
            symptom: None,
            message: format!("patient id `{id}` appears {n} times"),
        });
    }

    let mut rated = [false; Symptom::ALL.len()];
    for p in &cohort.patients {
        for (symptom, timepoint, rating) in p.ratings.present() {
            rated[symptom.index()] = true;
            if rating > MAX_RATING {
                report.errors.push(Issue {
                    kind: IssueKind::RatingOutOfRange,
                    patient_id: Some(p.patient_id.clone()),
                    symptom: Some(symptom),
                    message: format!("rating {rating} at timepoint {timepoint} exceeds {MAX_RATING}"),
                });
            }
        }
        if !p.ratings.has_stage_data(Stage::Acute) {
            report.warnings.push(Issue {
                kind: IssueKind::NoAcuteRatings,
                patient_id: Some(p.patient_id.clone()),
                symptom: None,
                message: format!("patient `{}` did not report any acute-stage ratings", p.patient_id),
            });
        }
    }

    for s in Symptom::ALL {
        if !rated[s.index()] {
            report.warnings.push(Issue {
                kind: IssueKind::UnratedSymptom,
                patient_id: None,
                symptom: Some(s),
                message: format!("no patient rated `{s}`"),
            });
        }
    }
    report
}
