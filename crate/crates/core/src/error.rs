use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}: row {row}: {message}")]
    MalformedRow {
        file: String,
        row: u64,
        message: String,
    },

    #[error("{file}: row {row}: rating {value} outside 0..=10")]
    RatingOutOfRange { file: String, row: u64, value: String },

    #[error("unknown symptom name `{0}`")]
    UnknownSymptom(String),

    #[error("{file}: row {row}: duplicate rating for patient `{patient_id}`, symptom `{symptom}`, timepoint {timepoint}")]
    DuplicateRating {
        file: String,
        row: u64,
        patient_id: String,
        symptom: String,
        timepoint: usize,
    },

    #[error("duplicate patient id `{0}`")]
    DuplicatePatient(String),

    #[error("{file}: row {row}: patient `{patient_id}` has no clinical record")]
    UnknownPatient {
        file: String,
        row: u64,
        patient_id: String,
    },

    #[error("cohort is empty")]
    EmptyCohort,

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("no sequences to mine: support denominators are undefined")]
    NoSequences,

    #[error("cluster count {k} outside 1..={rules}")]
    ClusterCountOutOfRange { k: usize, rules: usize },

    #[error("cluster assignment covers {got} rules, expected {expected}")]
    AssignmentMismatch { got: usize, expected: usize },

    #[error("anchor symptom `{0}` has no profile or an all-zero profile; cosine similarity undefined")]
    DegenerateAnchor(String),

    #[error("symptom projection needs at least 2 distinct acute symptoms, found {0}")]
    TooFewSymptoms(usize),
}

impl Error {
    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Error {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}
