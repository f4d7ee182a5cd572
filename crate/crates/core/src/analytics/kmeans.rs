//! Three-tier symptom burden from 1-D k-means over stage totals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cohort::CohortTable;
use crate::symptom::Stage;

pub const MAX_ITERATIONS: usize = 100;

// Relative slack for treating two distances as equal; keeps assignments
// invariant under rescaling of the input.
const TIE_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Low,
    Medium,
    High,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Low, Tier::Medium, Tier::High];

    pub fn label(self) -> &'static str {
        match self {
            Tier::Low => "low",
            Tier::Medium => "medium",
            Tier::High => "high",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KMeans1d {
    /// Cluster index per value; clusters are numbered by ascending centroid.
    pub labels: Vec<usize>,
    pub centroids: Vec<f64>,
    pub iterations: usize,
}

/// Lloyd's algorithm on a line with seeded farthest-point initialization.
///
/// The first center is a seeded uniform pick; each further center is the
/// value farthest from its nearest chosen center (lowest index on ties).
/// Distance ties resolve toward the smaller centroid. Callers must supply at
/// least `k` distinct values.
pub fn kmeans_1d(values: &[f64], k: usize, seed: u64) -> KMeans1d {
    assert!(k > 0 && values.len() >= k, "need at least k values");
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tie = TIE_EPS * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centers = vec![values[rng.random_range(0..values.len())]];
    while centers.len() < k {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, v) in values.iter().enumerate() {
            let nearest = centers.iter().map(|c| (v - c).abs()).fold(f64::INFINITY, f64::min);
            if nearest > best.0 + tie {
                best = (nearest, i);
            }
        }
        centers.push(values[best.1]);
    }
    centers.sort_by(f64::total_cmp);

    let assign = |centers: &[f64], v: f64| -> usize {
        let mut best = 0;
        for c in 1..centers.len() {
            if (v - centers[c]).abs() < (v - centers[best]).abs() - tie {
                best = c;
            }
        }
        best
    };

    let mut labels: Vec<usize> = values.iter().map(|&v| assign(&centers, v)).collect();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&v, &l) in values.iter().zip(&labels) {
            sums[l] += v;
            counts[l] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c] / counts[c] as f64;
            }
        }
        // keep labels ordered by centroid
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| centers[a].total_cmp(&centers[b]));
        centers = order.iter().map(|&i| centers[i]).collect();
        let next: Vec<usize> = values.iter().map(|&v| assign(&centers, v)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    KMeans1d {
        labels,
        centroids: centers,
        iterations,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageTiering {
    pub stage: Stage,
    /// Centroids low→high; empty when the quantile fallback was used.
    pub centroids: Vec<f64>,
    /// True when fewer than three distinct totals forced quantile tiers.
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatientTiers {
    pub patient_id: String,
    pub acute_total: u32,
    pub late_total: u32,
    pub acute_tier: Tier,
    pub late_tier: Tier,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BurdenTiers {
    pub patients: Vec<PatientTiers>,
    pub acute: StageTiering,
    pub late: StageTiering,
}

impl BurdenTiers {
    pub fn get(&self, patient_id: &str) -> Option<&PatientTiers> {
        self.patients
            .binary_search_by(|p| p.patient_id.as_str().cmp(patient_id))
            .ok()
            .map(|i| &self.patients[i])
    }
}

/// Tiers for arbitrary totals: k-means when there are three distinct values,
/// otherwise rank quantiles (`⌊3 · #smaller / n⌋`).
pub fn tier_values(values: &[f64], seed: u64) -> (Vec<Tier>, Vec<f64>, bool) {
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() >= 3 {
        let km = kmeans_1d(values, 3, seed);
        let tiers = km.labels.iter().map(|&l| Tier::ALL[l]).collect();
        (tiers, km.centroids, false)
    } else {
        let n = values.len().max(1);
        let tiers = values
            .iter()
            .map(|v| {
                let smaller = values.iter().filter(|w| *w < v).count();
                Tier::ALL[(3 * smaller / n).min(2)]
            })
            .collect();
        (tiers, Vec::new(), true)
    }
}

pub fn burden_tiers(stratum: &CohortTable, seed: u64) -> BurdenTiers {
    let mut patients: Vec<_> = stratum.patients.iter().collect();
    patients.sort_by(|a, b| a.patient_id.cmp(&b.patient_id));
    let acute: Vec<u32> = patients.iter().map(|p| p.ratings.stage_total(Stage::Acute, None)).collect();
    let late: Vec<u32> = patients.iter().map(|p| p.ratings.stage_total(Stage::Late, None)).collect();
    let as_f64 = |v: &[u32]| v.iter().map(|&x| f64::from(x)).collect::<Vec<_>>();
    let (acute_tiers, acute_centroids, acute_fallback) = tier_values(&as_f64(&acute), seed);
    // independent stream for the late run
    let (late_tiers, late_centroids, late_fallback) = tier_values(&as_f64(&late), seed.wrapping_add(1));
    BurdenTiers {
        patients: patients
            .iter()
            .enumerate()
            .map(|(i, p)| PatientTiers {
                patient_id: p.patient_id.clone(),
                acute_total: acute[i],
                late_total: late[i],
                acute_tier: acute_tiers[i],
                late_tier: late_tiers[i],
            })
            .collect(),
        acute: StageTiering {
            stage: Stage::Acute,
            centroids: acute_centroids,
            fallback: acute_fallback,
        },
        late: StageTiering {
            stage: Stage::Late,
            centroids: late_centroids,
            fallback: late_fallback,
        },
    }
}
