//! Patient records, cohort tables, and treatment strata.

mod io;
mod synth;
mod validate;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symptom::{Stage, Symptom, SYMPTOM_COUNT, TIMEPOINT_COUNT};

pub use io::{load_cohort, read_cohort, write_cohort, write_cohort_to, CLINICAL_HEADER, RATINGS_HEADER};
pub use synth::{generate_synthetic_cohort, PlantedPattern, SyntheticSpec};
pub use validate::{validate_cohort, Issue, IssueKind, ValidationReport};

/// Highest valid questionnaire rating.
pub const MAX_RATING: u8 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Treatment {
    #[serde(rename = "ICC")]
    Icc,
    #[serde(rename = "CC")]
    Cc,
    #[serde(rename = "IRT")]
    Irt,
    #[serde(rename = "RT")]
    Rt,
    #[serde(rename = "S_and_others")]
    SAndOthers,
    #[serde(rename = "S")]
    S,
}

impl Treatment {
    pub const ALL: [Treatment; 6] = [
        Treatment::Icc,
        Treatment::Cc,
        Treatment::Irt,
        Treatment::Rt,
        Treatment::SAndOthers,
        Treatment::S,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Treatment::Icc => "ICC",
            Treatment::Cc => "CC",
            Treatment::Irt => "IRT",
            Treatment::Rt => "RT",
            Treatment::SAndOthers => "S_and_others",
            Treatment::S => "S",
        }
    }

    /// Surgery-alone patients have no on-treatment weekly reports and are
    /// left out of rule mining.
    pub fn is_minable(self) -> bool {
        self != Treatment::S
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Treatment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Treatment::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| format!("unknown treatment `{s}`"))
    }
}

macro_rules! ordinal {
    ($name:ident, $($variant:ident => $label:literal),+) => {
        #[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $label)] $variant,)+
            #[default]
            #[serde(rename = "unspecified")]
            Unspecified,
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant,)+ $name::Unspecified];

            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label,)+
                    $name::Unspecified => "unspecified",
                }
            }

            /// Parses a CSV field; the empty string means unspecified.
            pub fn parse_field(s: &str) -> Option<$name> {
                match s {
                    "" | "unspecified" => Some($name::Unspecified),
                    $($label => Some($name::$variant),)+
                    _ => None,
                }
            }

            fn csv_field(self) -> &'static str {
                match self {
                    $name::Unspecified => "",
                    other => other.label(),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

ordinal!(TStage, T0 => "T0", T1 => "T1", T2 => "T2", T3 => "T3", T4 => "T4");
ordinal!(NStage, N0 => "N0", N1 => "N1", N2 => "N2", N3 => "N3");

/// 28 symptoms × 12 timepoints of optional 0..=10 ratings.
#[derive(Clone, PartialEq, Eq)]
pub struct RatingMatrix {
    cells: [[Option<u8>; TIMEPOINT_COUNT]; SYMPTOM_COUNT],
}

impl Default for RatingMatrix {
    fn default() -> Self {
        RatingMatrix {
            cells: [[None; TIMEPOINT_COUNT]; SYMPTOM_COUNT],
        }
    }
}

impl fmt::Debug for RatingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.present().map(|(s, t, r)| ((s.name(), t), r)))
            .finish()
    }
}

impl RatingMatrix {
    pub fn get(&self, symptom: Symptom, timepoint: usize) -> Option<u8> {
        self.cells[symptom.index()][timepoint]
    }

    /// Panics if `timepoint` is not below 12.
    pub fn set(&mut self, symptom: Symptom, timepoint: usize, rating: Option<u8>) {
        self.cells[symptom.index()][timepoint] = rating;
    }

    pub fn row(&self, symptom: Symptom) -> &[Option<u8>; TIMEPOINT_COUNT] {
        &self.cells[symptom.index()]
    }

    /// All present cells as (symptom, timepoint, rating).
    pub fn present(&self) -> impl Iterator<Item = (Symptom, usize, u8)> + '_ {
        Symptom::ALL.into_iter().flat_map(move |s| {
            self.cells[s.index()]
                .iter()
                .enumerate()
                .filter_map(move |(t, r)| r.map(|r| (s, t, r)))
        })
    }

    pub fn stage_ratings(&self, symptom: Symptom, stage: Stage) -> impl Iterator<Item = u8> + '_ {
        self.cells[symptom.index()][stage.timepoints()]
            .iter()
            .filter_map(|r| *r)
    }

    pub fn has_stage_data(&self, stage: Stage) -> bool {
        Symptom::ALL
            .into_iter()
            .any(|s| self.stage_ratings(s, stage).next().is_some())
    }

    /// Sum of present ratings in a stage, optionally restricted to some symptoms.
    pub fn stage_total(&self, stage: Stage, symptoms: Option<crate::SymptomSet>) -> u32 {
        Symptom::ALL
            .into_iter()
            .filter(|s| symptoms.is_none_or(|set| set.contains(*s)))
            .flat_map(|s| self.stage_ratings(s, stage))
            .map(u32::from)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatientRecord {
    pub patient_id: String,
    pub treatment: Treatment,
    pub t_stage: TStage,
    pub n_stage: NStage,
    pub age: Option<f64>,
    pub dose: Option<f64>,
    pub ratings: RatingMatrix,
}

impl PatientRecord {
    pub fn new(patient_id: impl Into<String>, treatment: Treatment) -> Self {
        PatientRecord {
            patient_id: patient_id.into(),
            treatment,
            t_stage: TStage::Unspecified,
            n_stage: NStage::Unspecified,
            age: None,
            dose: None,
            ratings: RatingMatrix::default(),
        }
    }
}

/// A set of patient records plus a description of where they came from.
///
/// Fields are public so that malformed tables can be assembled and then
/// inspected with [`validate_cohort`]; [`CohortTable::new`] enforces the
/// non-empty and unique-id invariants.
#[derive(Clone, Debug, PartialEq)]
pub struct CohortTable {
    pub patients: Vec<PatientRecord>,
    pub provenance: String,
}

impl CohortTable {
    pub fn new(patients: Vec<PatientRecord>, provenance: impl Into<String>) -> Result<Self> {
        if patients.is_empty() {
            return Err(Error::EmptyCohort);
        }
        let mut seen = HashSet::with_capacity(patients.len());
        for p in &patients {
            if !seen.insert(p.patient_id.as_str()) {
                return Err(Error::DuplicatePatient(p.patient_id.clone()));
            }
        }
        Ok(CohortTable {
            patients,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.patients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patients.is_empty()
    }

    pub fn get(&self, patient_id: &str) -> Option<&PatientRecord> {
        self.patients.iter().find(|p| p.patient_id == patient_id)
    }
}

/// One treatment sub-cohort.
#[derive(Clone, Debug, PartialEq)]
pub struct Stratum {
    pub treatment: Treatment,
    pub cohort: CohortTable,
    /// False for strata left out of rule mining.
    pub minable: bool,
}

/// Partitions a cohort by treatment. Treatments without patients get no entry.
pub fn stratify_by_treatment(cohort: &CohortTable) -> BTreeMap<Treatment, Stratum> {
    let mut groups: BTreeMap<Treatment, Vec<PatientRecord>> = BTreeMap::new();
    for p in &cohort.patients {
        groups.entry(p.treatment).or_default().push(p.clone());
    }
    groups
        .into_iter()
        .map(|(treatment, patients)| {
            let stratum = Stratum {
                treatment,
                cohort: CohortTable {
                    patients,
                    provenance: format!("{} [treatment={}]", cohort.provenance, treatment),
                },
                minable: treatment.is_minable(),
            };
            (treatment, stratum)
        })
        .collect()
}
