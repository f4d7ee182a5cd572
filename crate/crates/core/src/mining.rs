//! Acute→late sequential rule mining over two-itemset patient sequences.
//!
//! Every sequence holds exactly two itemsets (acute, late), so a rule X→Y is
//! frequent exactly when X is frequent in the acute column, Y is frequent in
//! the late column, and their joint count clears the bar. Each stage lattice
//! is grown levelwise with vertical bitset tid-lists; rules are then joined
//! pairwise and scored.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bitset::PatientBits;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::sequence::PatientSequence;
use crate::symptom::{Stage, Symptom, SymptomSet, SYMPTOM_COUNT};

/// Strata smaller than this default to the higher minimum support.
pub const SMALL_STRATUM_CUTOFF: usize = 100;
pub const SMALL_STRATUM_MIN_SUPPORT: f64 = 0.40;
pub const DEFAULT_MIN_SUPPORT: f64 = 0.30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiningParams {
    pub min_support: f64,
    pub min_confidence: f64,
    /// Strict lower bound: rules need `lift > min_lift`.
    pub min_lift: f64,
    pub max_itemset_size: usize,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            min_support: DEFAULT_MIN_SUPPORT,
            min_confidence: 0.50,
            min_lift: 1.0,
            max_itemset_size: 4,
        }
    }
}

impl MiningParams {
    /// Defaults with the minimum support chosen from the stratum size.
    pub fn for_stratum_size(sequences: usize) -> Self {
        MiningParams {
            min_support: if sequences < SMALL_STRATUM_CUTOFF {
                SMALL_STRATUM_MIN_SUPPORT
            } else {
                DEFAULT_MIN_SUPPORT
            },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fraction = |name: &'static str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} outside (0, 1]")))
            }
        };
        fraction("min_support", self.min_support)?;
        fraction("min_confidence", self.min_confidence)?;
        if !(self.min_lift >= 0.0 && self.min_lift.is_finite()) {
            return Err(Error::param("min_lift", format!("{} must be finite and >= 0", self.min_lift)));
        }
        if self.max_itemset_size == 0 {
            return Err(Error::param("max_itemset_size", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequentItemset {
    pub items: SymptomSet,
    pub count: usize,
    pub support: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequentialRule {
    pub antecedent: SymptomSet,
    pub consequent: SymptomSet,
    pub support: f64,
    pub confidence: f64,
    pub lift: f64,
    /// Support of the antecedent in the acute column.
    pub antecedent_support: f64,
    /// Support of the consequent in the late column.
    pub consequent_support: f64,
    /// Sorted ids of patients whose sequences contain the rule.
    pub supporters: Vec<String>,
}

impl SequentialRule {
    pub fn shape(&self) -> (SymptomSet, SymptomSet) {
        (self.antecedent, self.consequent)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiningResult {
    pub sequence_count: usize,
    pub params: MiningParams,
    /// Rules passing support, confidence and lift.
    pub rules: Vec<SequentialRule>,
    /// Rules passing support and confidence that failed the lift bound.
    pub lift_rejected: Vec<SequentialRule>,
}

#[inline]
fn frequent(count: usize, n: usize, min_support: f64) -> bool {
    count as f64 / n as f64 >= min_support
}

/// Per-stage vertical index: one patient bitset per symptom.
struct StageIndex {
    n: usize,
    tids: Vec<PatientBits>,
}

impl StageIndex {
    fn build(sequences: &[PatientSequence], stage: Stage) -> Self {
        let n = sequences.len();
        let mut tids = vec![PatientBits::new(n); SYMPTOM_COUNT];
        for (i, seq) in sequences.iter().enumerate() {
            for s in seq.stage(stage).iter() {
                tids[s.index()].insert(i);
            }
        }
        StageIndex { n, tids }
    }

    /// Levelwise growth. Results come out ordered by size, then lexicographically.
    fn frequent_itemsets(
        &self,
        min_support: f64,
        max_size: usize,
        exec: Execution,
    ) -> Vec<(SymptomSet, PatientBits)> {
        let mut level: Vec<(SymptomSet, PatientBits)> = Symptom::ALL
            .into_iter()
            .filter(|s| frequent(self.tids[s.index()].count(), self.n, min_support))
            .map(|s| (SymptomSet::singleton(s), self.tids[s.index()].clone()))
            .collect();
        let mut out = Vec::new();
        let mut size = 1;
        while !level.is_empty() {
            if size >= max_size {
                out.append(&mut level);
                break;
            }
            let members: HashSet<SymptomSet> = level.iter().map(|(s, _)| *s).collect();
            // join pairs sharing everything but their last item
            let mut pairs = Vec::new();
            for i in 0..level.len() {
                let a = level[i].0;
                let prefix = a.without(a.last().unwrap());
                for (j, (b, _)) in level.iter().enumerate().skip(i + 1) {
                    if b.without(b.last().unwrap()) != prefix {
                        continue;
                    }
                    let candidate = a.union(*b);
                    if candidate.iter().all(|s| members.contains(&candidate.without(s))) {
                        pairs.push((i, j, candidate));
                    }
                }
            }
            let counted = exec.map(&pairs, |&(i, j, candidate)| {
                let tids = level[i].1.and(&level[j].1);
                frequent(tids.count(), self.n, min_support).then_some((candidate, tids))
            });
            let mut next: Vec<(SymptomSet, PatientBits)> = counted.into_iter().flatten().collect();
            next.sort_by_key(|a| a.0);
            out.append(&mut level);
            level = next;
            size += 1;
        }
        out
    }
}

/// Frequent itemsets of one stage with their supports.
pub fn mine_frequent_stage_itemsets(
    sequences: &[PatientSequence],
    stage: Stage,
    min_support: f64,
    max_size: usize,
) -> Vec<FrequentItemset> {
    mine_frequent_stage_itemsets_with(sequences, stage, min_support, max_size, Execution::default())
}

pub fn mine_frequent_stage_itemsets_with(
    sequences: &[PatientSequence],
    stage: Stage,
    min_support: f64,
    max_size: usize,
    exec: Execution,
) -> Vec<FrequentItemset> {
    if sequences.is_empty() || max_size == 0 {
        return Vec::new();
    }
    let index = StageIndex::build(sequences, stage);
    index
        .frequent_itemsets(min_support, max_size, exec)
        .into_iter()
        .map(|(items, tids)| {
            let count = tids.count();
            FrequentItemset {
                items,
                count,
                support: count as f64 / index.n as f64,
            }
        })
        .collect()
}

/// Rules passing all three filters.
pub fn generate_rules(sequences: &[PatientSequence], params: &MiningParams) -> Result<Vec<SequentialRule>> {
    mine(sequences, params).map(|r| r.rules)
}

pub fn mine(sequences: &[PatientSequence], params: &MiningParams) -> Result<MiningResult> {
    mine_with(sequences, params, Execution::default())
}

pub fn mine_with(
    sequences: &[PatientSequence],
    params: &MiningParams,
    exec: Execution,
) -> Result<MiningResult> {
    params.validate()?;
    if sequences.is_empty() {
        return Err(Error::NoSequences);
    }
    let n = sequences.len();
    let acute_index = StageIndex::build(sequences, Stage::Acute);
    let late_index = StageIndex::build(sequences, Stage::Late);
    let acute = acute_index.frequent_itemsets(params.min_support, params.max_itemset_size, exec);
    let late = late_index.frequent_itemsets(params.min_support, params.max_itemset_size, exec);
    let late_counts: Vec<usize> = late.iter().map(|(_, t)| t.count()).collect();

    let per_antecedent = exec.map(&acute, |(x, x_tids)| {
        let x_count = x_tids.count();
        let mut accepted = Vec::new();
        let mut rejected = Vec::new();
        for ((y, y_tids), &y_count) in late.iter().zip(&late_counts) {
            let joint = x_tids.and(y_tids);
            let xy_count = joint.count();
            if !frequent(xy_count, n, params.min_support) {
                continue;
            }
            let confidence = xy_count as f64 / x_count as f64;
            if confidence < params.min_confidence {
                continue;
            }
            // integer products keep lift == 1 exact under independence
            let lift = (xy_count * n) as f64 / (x_count * y_count) as f64;
            let mut supporters: Vec<String> =
                joint.iter().map(|i| sequences[i].patient_id.clone()).collect();
            supporters.sort();
            let rule = SequentialRule {
                antecedent: *x,
                consequent: *y,
                support: xy_count as f64 / n as f64,
                confidence,
                lift,
                antecedent_support: x_count as f64 / n as f64,
                consequent_support: y_count as f64 / n as f64,
                supporters,
            };
            if lift > params.min_lift {
                accepted.push(rule);
            } else {
                rejected.push(rule);
            }
        }
        (accepted, rejected)
    });

    let mut rules = Vec::new();
    let mut lift_rejected = Vec::new();
    for (a, r) in per_antecedent {
        rules.extend(a);
        lift_rejected.extend(r);
    }
    Ok(MiningResult {
        sequence_count: n,
        params: *params,
        rules,
        lift_rejected,
    })
}

/// Mines several strata independently; strata run in parallel under the
/// default execution mode.
pub fn mine_strata(
    strata: &[Vec<PatientSequence>],
    params: &MiningParams,
    exec: Execution,
) -> Vec<Result<MiningResult>> {
    exec.map(strata, |seqs| mine_with(seqs, params, Execution::Sequential))
}

/// Sorted ids of patients whose sequences contain `antecedent` in the acute
/// set and `consequent` in the late set.
pub fn supporting_patients(
    antecedent: SymptomSet,
    consequent: SymptomSet,
    sequences: &[PatientSequence],
) -> Vec<String> {
    let mut ids: Vec<String> = sequences
        .iter()
        .filter(|s| s.supports(antecedent, consequent))
        .map(|s| s.patient_id.clone())
        .collect();
    ids.sort();
    ids
}

/// Fraction of sequences that contain the pattern; 0 for no sequences.
pub fn pattern_support(antecedent: SymptomSet, consequent: SymptomSet, sequences: &[PatientSequence]) -> f64 {
    if sequences.is_empty() {
        return 0.0;
    }
    let count = sequences.iter().filter(|s| s.supports(antecedent, consequent)).count();
    count as f64 / sequences.len() as f64
}
