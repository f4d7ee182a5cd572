use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use seqsym_core::{
    generate_synthetic_cohort, load_cohort, validate_cohort, CohortTable, MiningParams, SyntheticSpec, Thresholds,
    ValidationReport,
};

/// Where the cohort comes from. A session has exactly one source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Files { clinical: PathBuf, ratings: PathBuf },
    Synthetic(SyntheticSpec),
}

impl DataSource {
    /// `clinical.csv` and `ratings.csv` inside `dir`.
    pub fn directory(dir: &Path) -> Self {
        DataSource::Files {
            clinical: dir.join("clinical.csv"),
            ratings: dir.join("ratings.csv"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub source: DataSource,
    /// Mining defaults for requests that omit them. `None` picks the minimum
    /// support from each stratum's size.
    #[serde(default)]
    pub params: Option<MiningParams>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub seed: u64,
}

impl SessionConfig {
    pub fn new(source: DataSource) -> Self {
        SessionConfig {
            source,
            params: None,
            thresholds: Thresholds::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Core(#[from] seqsym_core::Error),
    #[error("cohort failed validation with {} error(s)", .0.errors.len())]
    Invalid(ValidationReport),
}

/// Loads and validates the configured cohort. Validation errors abort;
/// warnings are returned with the cohort.
pub fn load(source: &DataSource) -> Result<(CohortTable, ValidationReport), LoadError> {
    let cohort = match source {
        DataSource::Files { clinical, ratings } => load_cohort(clinical, ratings)?,
        DataSource::Synthetic(spec) => generate_synthetic_cohort(spec)?,
    };
    let report = validate_cohort(&cohort);
    if !report.is_valid() {
        return Err(LoadError::Invalid(report));
    }
    Ok((cohort, report))
}
