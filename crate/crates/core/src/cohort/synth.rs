//! Seeded synthetic cohorts with planted acute→late patterns.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cohort::{CohortTable, NStage, PatientRecord, TStage, Treatment, MAX_RATING};
use crate::error::{Error, Result};
use crate::sequence::Thresholds;
use crate::symptom::{Stage, Symptom, SymptomSet, SYMPTOM_COUNT, TIMEPOINT_COUNT};

/// A pattern planted into `⌊penetrance × n⌋` patients of one stratum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedPattern {
    pub treatment: Treatment,
    pub acute: SymptomSet,
    pub late: SymptomSet,
    pub penetrance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub counts: BTreeMap<Treatment, usize>,
    #[serde(default)]
    pub patterns: Vec<PlantedPattern>,
    #[serde(default)]
    pub noise_rate: f64,
    #[serde(default)]
    pub missingness_rate: f64,
    pub seed: u64,
    /// Severity bounds used to realize planted and background ratings.
    #[serde(default)]
    pub thresholds: Thresholds,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} outside [0, 1]")))
            }
        };
        unit("noise_rate", self.noise_rate)?;
        unit("missingness_rate", self.missingness_rate)?;
        for p in &self.patterns {
            unit("penetrance", p.penetrance)?;
            if p.acute.is_empty() || p.late.is_empty() {
                return Err(Error::param("patterns", "planted acute and late sets must be non-empty"));
            }
        }
        if self.counts.values().sum::<usize>() == 0 {
            return Err(Error::EmptyCohort);
        }
        Thresholds::new(self.thresholds.acute, self.thresholds.late)?;
        Ok(())
    }

    /// Number of patients that carry `pattern`.
    pub fn planted_count(&self, pattern: &PlantedPattern) -> usize {
        let n = self.counts.get(&pattern.treatment).copied().unwrap_or(0);
        (pattern.penetrance * n as f64).floor() as usize
    }
}

const T_STAGES: [TStage; 5] = [TStage::T0, TStage::T1, TStage::T2, TStage::T3, TStage::T4];
const N_STAGES: [NStage; 4] = [NStage::N0, NStage::N1, NStage::N2, NStage::N3];
const DOSES: [f64; 4] = [60.0, 66.0, 70.0, 72.0];

fn stage_threshold(thresholds: Thresholds, stage: Stage) -> u8 {
    match stage {
        Stage::Acute => thresholds.acute,
        Stage::Late => thresholds.late,
    }
}

fn above(rng: &mut ChaCha8Rng, threshold: u8) -> u8 {
    rng.random_range(threshold..=MAX_RATING)
}

/// Builds a cohort from `spec`; the same spec always yields the same cohort.
///
/// Background ratings stay strictly below the stage threshold. Planted and
/// noise ratings are placed at one uniformly chosen timepoint of their stage
/// and are never blanked by missingness.
pub fn generate_synthetic_cohort(spec: &SyntheticSpec) -> Result<CohortTable> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let thresholds = spec.thresholds;
    let mut patients = Vec::with_capacity(spec.counts.values().sum());

    for (&treatment, &n) in &spec.counts {
        if n == 0 {
            continue;
        }
        // (acute, late) sets planted per patient of this stratum
        let mut planted = vec![(SymptomSet::EMPTY, SymptomSet::EMPTY); n];
        let mut order: Vec<usize> = (0..n).collect();
        for pattern in spec.patterns.iter().filter(|p| p.treatment == treatment) {
            order.shuffle(&mut rng);
            for &i in &order[..spec.planted_count(pattern)] {
                planted[i].0 = planted[i].0.union(pattern.acute);
                planted[i].1 = planted[i].1.union(pattern.late);
            }
        }

        for (i, &(acute, late)) in planted.iter().enumerate() {
            let mut p = PatientRecord::new(format!("{}-{:04}", treatment.label(), i + 1), treatment);
            p.t_stage = if rng.random_bool(0.05) {
                TStage::Unspecified
            } else {
                T_STAGES[rng.random_range(0..T_STAGES.len())]
            };
            p.n_stage = if rng.random_bool(0.05) {
                NStage::Unspecified
            } else {
                N_STAGES[rng.random_range(0..N_STAGES.len())]
            };
            p.age = Some(f64::from(rng.random_range(35u8..=80)));
            p.dose = Some(DOSES[rng.random_range(0..DOSES.len())]);

            let mut protected = [[false; TIMEPOINT_COUNT]; SYMPTOM_COUNT];
            for s in Symptom::ALL {
                for t in 0..TIMEPOINT_COUNT {
                    let bound = stage_threshold(thresholds, Stage::of_timepoint(t).unwrap());
                    let background = (bound > 0).then(|| rng.random_range(0..bound));
                    p.ratings.set(s, t, background);
                }
            }
            for s in Symptom::ALL {
                for stage in [Stage::Acute, Stage::Late] {
                    if rng.random_bool(spec.noise_rate) {
                        let t = rng.random_range(stage.timepoints());
                        let r = above(&mut rng, stage_threshold(thresholds, stage));
                        p.ratings.set(s, t, Some(r));
                        protected[s.index()][t] = true;
                    }
                }
            }
            for (stage, set) in [(Stage::Acute, acute), (Stage::Late, late)] {
                for s in set.iter() {
                    let t = rng.random_range(stage.timepoints());
                    let r = above(&mut rng, stage_threshold(thresholds, stage));
                    p.ratings.set(s, t, Some(r));
                    protected[s.index()][t] = true;
                }
            }
            if spec.missingness_rate > 0.0 {
                for s in Symptom::ALL {
                    for (t, &kept) in protected[s.index()].iter().enumerate() {
                        if rng.random_bool(spec.missingness_rate) && !kept {
                            p.ratings.set(s, t, None);
                        }
                    }
                }
            }
            patients.push(p);
        }
    }
    CohortTable::new(patients, format!("synthetic(seed={})", spec.seed))
}
