use serde::Serialize;

use crate::analytics::layout::{relax, LayoutParams};
use crate::analytics::pca::pca;
use crate::clustering::{jaccard, RuleCluster};
use crate::cohort::CohortTable;
use crate::error::{Error, Result};
use crate::mining::SequentialRule;
use crate::sequence::PatientSequence;
use crate::symptom::{Stage, Symptom, SymptomSet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionPoint {
    pub id: String,
    pub x: f64,
    pub y: f64,
    /// Coordinates before overlap removal.
    pub initial_x: f64,
    pub initial_y: f64,
    /// Ids of rule clusters the entity belongs to.
    pub clusters: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acute_total: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub late_total: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LateSymptom {
    pub symptom: Symptom,
    /// False for symptoms seen only in consequents of rules that failed the lift bound.
    pub predicted: bool,
    pub clusters: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymptomProjection {
    pub acute: Vec<ProjectionPoint>,
    pub late: Vec<LateSymptom>,
    pub explained_variance: Vec<f64>,
}

/// Sorted ids of patients whose acute set contains each symptom.
pub fn symptom_supporters(symptoms: &[Symptom], sequences: &[PatientSequence]) -> Vec<Vec<String>> {
    symptoms
        .iter()
        .map(|&s| {
            let mut ids: Vec<String> = sequences
                .iter()
                .filter(|q| q.acute.contains(s))
                .map(|q| q.patient_id.clone())
                .collect();
            ids.sort();
            ids
        })
        .collect()
}

/// Pairwise Jaccard similarity of symptom supporter sets.
pub fn symptom_similarity(supporters: &[Vec<String>]) -> Vec<Vec<f64>> {
    supporters
        .iter()
        .map(|a| supporters.iter().map(|b| jaccard(a, b)).collect())
        .collect()
}

/// Acute half: clustered acute symptoms placed by the first two principal
/// components of their similarity matrix, then de-overlapped. Late half:
/// predicted late symptoms plus those only present in lift-rejected rules.
pub fn symptom_projection(
    clusters: &[RuleCluster],
    sequences: &[PatientSequence],
    lift_rejected: &[SequentialRule],
    layout: &LayoutParams,
) -> Result<SymptomProjection> {
    let acute_set = clusters.iter().fold(SymptomSet::EMPTY, |acc, c| acc.union(c.acute_symptoms));
    let symptoms = acute_set.to_vec();
    if symptoms.len() < 2 {
        return Err(Error::TooFewSymptoms(symptoms.len()));
    }
    let matrix = symptom_similarity(&symptom_supporters(&symptoms, sequences));
    let decomposition = pca(&matrix);
    let initial = decomposition.plane();
    let placed = relax(&initial, layout);

    let member_of = |s: Symptom, stage: Stage| -> Vec<usize> {
        clusters
            .iter()
            .filter(|c| match stage {
                Stage::Acute => c.acute_symptoms.contains(s),
                Stage::Late => c.late_symptoms.contains(s),
            })
            .map(|c| c.cluster_id)
            .collect()
    };
    let acute = symptoms
        .iter()
        .zip(initial.iter().zip(&placed))
        .map(|(&s, (&(ix, iy), &(x, y)))| ProjectionPoint {
            id: s.name().to_string(),
            x,
            y,
            initial_x: ix,
            initial_y: iy,
            clusters: member_of(s, Stage::Acute),
            acute_total: None,
            late_total: None,
        })
        .collect();

    let predicted = clusters.iter().fold(SymptomSet::EMPTY, |acc, c| acc.union(c.late_symptoms));
    let rejected = lift_rejected
        .iter()
        .fold(SymptomSet::EMPTY, |acc, r| acc.union(r.consequent));
    let late = predicted
        .union(rejected)
        .iter()
        .map(|s| LateSymptom {
            symptom: s,
            predicted: predicted.contains(s),
            clusters: member_of(s, Stage::Late),
        })
        .collect();

    Ok(SymptomProjection {
        acute,
        late,
        explained_variance: decomposition.explained_variance,
    })
}

/// Places each patient at (acute total, late total) of present ratings,
/// optionally over a symptom subset, then removes overlaps.
pub fn patient_projection(
    stratum: &CohortTable,
    clusters: &[RuleCluster],
    symptoms: Option<SymptomSet>,
    layout: &LayoutParams,
) -> Vec<ProjectionPoint> {
    let mut patients: Vec<_> = stratum.patients.iter().collect();
    patients.sort_by(|a, b| a.patient_id.cmp(&b.patient_id));
    let totals: Vec<(u32, u32)> = patients
        .iter()
        .map(|p| {
            (
                p.ratings.stage_total(Stage::Acute, symptoms),
                p.ratings.stage_total(Stage::Late, symptoms),
            )
        })
        .collect();
    let initial: Vec<(f64, f64)> = totals.iter().map(|&(a, l)| (f64::from(a), f64::from(l))).collect();
    let placed = relax(&initial, layout);
    patients
        .iter()
        .zip(totals.iter().zip(placed))
        .map(|(p, (&(a, l), (x, y)))| ProjectionPoint {
            id: p.patient_id.clone(),
            x,
            y,
            initial_x: f64::from(a),
            initial_y: f64::from(l),
            clusters: clusters
                .iter()
                .filter(|c| c.patients.binary_search(&p.patient_id).is_ok())
                .map(|c| c.cluster_id)
                .collect(),
            acute_total: Some(a),
            late_total: Some(l),
        })
        .collect()
}
