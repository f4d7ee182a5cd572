use serde::Serialize;

use crate::clustering::RuleCluster;
use crate::cohort::{NStage, PatientRecord, TStage};
use crate::symptom::{Stage, Symptom, SymptomSet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimelineEntry {
    pub symptom: Symptom,
    pub acute_mean: Option<f64>,
    pub late_mean: Option<f64>,
    pub in_cluster: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimelineRow {
    pub patient_id: String,
    pub t_stage: TStage,
    pub n_stage: NStage,
    pub age: Option<f64>,
    pub dose: Option<f64>,
    pub clusters: Vec<usize>,
    /// Sum of the per-symptom acute and late means.
    pub cumulative_severity: f64,
    pub entries: Vec<TimelineEntry>,
}

fn mean(ratings: impl Iterator<Item = u8>) -> Option<f64> {
    let (sum, n) = ratings.fold((0u32, 0u32), |(s, n), r| (s + u32::from(r), n + 1));
    (n > 0).then(|| f64::from(sum) / f64::from(n))
}

/// One timeline row; `ordering` fixes the symptom order of the entries.
pub fn patient_timeline(patient: &PatientRecord, ordering: &[Symptom], clusters: &[RuleCluster]) -> TimelineRow {
    let clustered = clusters.iter().fold(SymptomSet::EMPTY, |acc, c| {
        acc.union(c.acute_symptoms).union(c.late_symptoms)
    });
    let entries: Vec<TimelineEntry> = ordering
        .iter()
        .map(|&s| TimelineEntry {
            symptom: s,
            acute_mean: mean(patient.ratings.stage_ratings(s, Stage::Acute)),
            late_mean: mean(patient.ratings.stage_ratings(s, Stage::Late)),
            in_cluster: clustered.contains(s),
        })
        .collect();
    let cumulative_severity = entries
        .iter()
        .map(|e| e.acute_mean.unwrap_or(0.0) + e.late_mean.unwrap_or(0.0))
        .sum();
    TimelineRow {
        patient_id: patient.patient_id.clone(),
        t_stage: patient.t_stage,
        n_stage: patient.n_stage,
        age: patient.age,
        dose: patient.dose,
        clusters: clusters
            .iter()
            .filter(|c| c.patients.binary_search(&patient.patient_id).is_ok())
            .map(|c| c.cluster_id)
            .collect(),
        cumulative_severity,
        entries,
    }
}

/// Rows sorted by cumulative severity, then cluster-membership count (both
/// descending), then patient id.
pub fn timeline_rows(patients: &[&PatientRecord], ordering: &[Symptom], clusters: &[RuleCluster]) -> Vec<TimelineRow> {
    let mut rows: Vec<TimelineRow> = patients
        .iter()
        .map(|p| patient_timeline(p, ordering, clusters))
        .collect();
    rows.sort_by(|a, b| {
        b.cumulative_severity
            .total_cmp(&a.cumulative_severity)
            .then(b.clusters.len().cmp(&a.clusters.len()))
            .then(a.patient_id.cmp(&b.patient_id))
    });
    rows
}
