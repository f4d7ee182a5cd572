use serde::Serialize;

use crate::cohort::PatientRecord;
use crate::error::{Error, Result};
use crate::symptom::{Symptom, SymptomSet, TIMEPOINT_COUNT};

/// Mean severity per timepoint; `None` where no selected patient rated the symptom.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeverityProfile {
    pub symptom: Symptom,
    pub values: [Option<f64>; TIMEPOINT_COUNT],
}

impl SeverityProfile {
    /// The profile as a 12-vector with "no data" read as zero.
    pub fn dense(&self) -> [f64; TIMEPOINT_COUNT] {
        self.values.map(|v| v.unwrap_or(0.0))
    }
}

pub fn severity_profiles(patients: &[&PatientRecord], symptoms: Option<SymptomSet>) -> Vec<SeverityProfile> {
    let selected = symptoms.unwrap_or_else(SymptomSet::all);
    selected
        .iter()
        .map(|symptom| {
            let mut sums = [0u32; TIMEPOINT_COUNT];
            let mut counts = [0u32; TIMEPOINT_COUNT];
            for p in patients {
                for (t, r) in p.ratings.row(symptom).iter().enumerate() {
                    if let Some(r) = r {
                        sums[t] += u32::from(*r);
                        counts[t] += 1;
                    }
                }
            }
            let mut values = [None; TIMEPOINT_COUNT];
            for t in 0..TIMEPOINT_COUNT {
                if counts[t] > 0 {
                    values[t] = Some(f64::from(sums[t]) / f64::from(counts[t]));
                }
            }
            SeverityProfile { symptom, values }
        })
        .collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (na > 0.0 && nb > 0.0).then(|| dot / (na * nb))
}

/// Anchor first, then descending cosine similarity to the anchor's profile.
/// All-zero profiles go last; ties break alphabetically.
pub fn order_symptoms(profiles: &[SeverityProfile], anchor: Symptom) -> Result<Vec<Symptom>> {
    let anchor_vec = profiles
        .iter()
        .find(|p| p.symptom == anchor)
        .map(SeverityProfile::dense)
        .filter(|v| v.iter().any(|x| *x != 0.0))
        .ok_or_else(|| Error::DegenerateAnchor(anchor.name().to_string()))?;

    let mut rest: Vec<(Option<f64>, Symptom)> = profiles
        .iter()
        .filter(|p| p.symptom != anchor)
        .map(|p| (cosine(&anchor_vec, &p.dense()), p.symptom))
        .collect();
    rest.sort_by(|(ca, sa), (cb, sb)| match (ca, cb) {
        (Some(a), Some(b)) => b.total_cmp(a).then(sa.cmp(sb)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => sa.cmp(sb),
    });
    let mut out = vec![anchor];
    out.extend(rest.into_iter().map(|(_, s)| s));
    Ok(out)
}
