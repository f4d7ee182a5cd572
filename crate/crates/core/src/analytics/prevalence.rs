use serde::Serialize;

use crate::cohort::{CohortTable, NStage, TStage};
use crate::sequence::{stage_itemset, Thresholds};
use crate::symptom::{Stage, Symptom, SymptomSet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrevalenceRow {
    pub symptom: Symptom,
    pub pct_acute: f64,
    pub pct_late: f64,
    pub in_cluster: bool,
}

/// Share of (optionally stage-filtered) patients reaching the stage threshold
/// at least once, per symptom, sorted by `pct_acute + pct_late` descending.
pub fn prevalence_query(
    stratum: &CohortTable,
    thresholds: Thresholds,
    t_stage: Option<TStage>,
    n_stage: Option<NStage>,
    clustered: SymptomSet,
) -> Vec<PrevalenceRow> {
    let selected: Vec<_> = stratum
        .patients
        .iter()
        .filter(|p| t_stage.is_none_or(|t| p.t_stage == t))
        .filter(|p| n_stage.is_none_or(|n| p.n_stage == n))
        .collect();
    let mut acute = [0usize; Symptom::ALL.len()];
    let mut late = [0usize; Symptom::ALL.len()];
    for p in &selected {
        for s in stage_itemset(p, Stage::Acute, thresholds.acute).iter() {
            acute[s.index()] += 1;
        }
        for s in stage_itemset(p, Stage::Late, thresholds.late).iter() {
            late[s.index()] += 1;
        }
    }
    let n = selected.len();
    let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let mut rows: Vec<PrevalenceRow> = Symptom::ALL
        .into_iter()
        .map(|s| PrevalenceRow {
            symptom: s,
            pct_acute: frac(acute[s.index()]),
            pct_late: frac(late[s.index()]),
            in_cluster: clustered.contains(s),
        })
        .collect();
    rows.sort_by(|a, b| {
        (b.pct_acute + b.pct_late)
            .total_cmp(&(a.pct_acute + a.pct_late))
            .then(a.symptom.cmp(&b.symptom))
    });
    rows
}
