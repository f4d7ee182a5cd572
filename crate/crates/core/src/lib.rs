//! Predicting late (post-treatment) patient-reported symptoms from acute
//! (on-treatment) symptoms.
//!
//! The pipeline: a [`CohortTable`] of 28×12 rating matrices is split by
//! treatment, each patient is reduced to an (acute set, late set)
//! [`PatientSequence`] under severity thresholds, acute→late
//! [`SequentialRule`]s are mined and scored by support, confidence and lift,
//! and redundant rules are grouped into [`RuleCluster`]s by complete-linkage
//! clustering of their supporter sets. [`analytics`] derives the
//! per-stratum products shown to analysts.
//!
//! Counting and per-stratum work run on rayon when the `parallel` feature is
//! enabled (the default); see [`Execution`].

pub mod analytics;
mod bitset;
pub mod clustering;
pub mod cohort;
mod error;
pub mod exec;
pub mod mining;
pub mod sequence;
mod symptom;

pub use bitset::PatientBits;
pub use clustering::{agglomerate, build_clusters, cut, rule_similarity, CutPolicy, Dendrogram, Ratio, RuleCluster, SimilarityMatrix};
pub use cohort::{
    generate_synthetic_cohort, load_cohort, stratify_by_treatment, validate_cohort, write_cohort, CohortTable, NStage,
    PatientRecord, PlantedPattern, Stratum, SyntheticSpec, TStage, Treatment, ValidationReport,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use mining::{generate_rules, mine, mine_frequent_stage_itemsets, supporting_patients, MiningParams, MiningResult, SequentialRule};
pub use sequence::{build_sequences, stage_itemset, PatientSequence, Thresholds};
pub use symptom::{Stage, Symptom, SymptomSet, SYMPTOM_COUNT, TIMEPOINT_COUNT};
