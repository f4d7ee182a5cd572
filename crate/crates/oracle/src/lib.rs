//! Brute-force reference implementations and shared fixtures.
//!
//! Nothing here calls into the mining, clustering or PCA code of
//! `seqsym-core`; only plain data types are shared.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqsym_core::{CohortTable, PatientRecord, PatientSequence, PlantedPattern, Symptom, SymptomSet, SyntheticSpec, Treatment};

pub type Items = BTreeSet<Symptom>;

pub fn items(set: SymptomSet) -> Items {
    set.iter().collect()
}

pub fn to_set(items: &Items) -> SymptomSet {
    items.iter().copied().collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRule {
    pub antecedent: Items,
    pub consequent: Items,
    pub support: f64,
    pub confidence: f64,
    pub lift: f64,
    pub supporters: Vec<String>,
}

/// Compares the rational `num/den` with the exact binary value of `t`
/// (finite, non-negative, not tiny). Thresholds on a dyadic grid therefore
/// compare exactly as written.
pub fn exact_cmp(num: u128, den: u128, t: f64) -> Ordering {
    assert!(t.is_finite() && t >= 0.0 && den > 0);
    if t == 0.0 {
        return num.cmp(&0);
    }
    let bits = t.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mut mant = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    let mut e = exp - 1075;
    while mant.is_multiple_of(2) {
        mant /= 2;
        e += 1;
    }
    // num/den vs mant·2^e
    if e >= 0 {
        num.cmp(&((u128::from(mant) * den) << e))
    } else {
        assert!(-e < 64, "threshold too fine for exact comparison");
        (num << -e).cmp(&(u128::from(mant) * den))
    }
}

/// Every non-empty subset of `universe` with at most `max` members.
pub fn subsets(universe: &Items, max: usize) -> Vec<Items> {
    let elems: Vec<Symptom> = universe.iter().copied().collect();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << elems.len()) {
        if mask.count_ones() as usize > max {
            continue;
        }
        out.push(
            elems
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, s)| *s)
                .collect(),
        );
    }
    out
}

fn contains(haystack: SymptomSet, needle: &Items) -> bool {
    let have = items(haystack);
    needle.is_subset(&have)
}

/// Frequent itemsets of one stage by exhaustive subset enumeration.
pub fn brute_force_itemsets(
    sequences: &[PatientSequence],
    acute: bool,
    min_support: f64,
    max_size: usize,
) -> Vec<(Items, usize)> {
    let pick = |s: &PatientSequence| if acute { s.acute } else { s.late };
    let universe: Items = sequences.iter().flat_map(|s| pick(s).iter()).collect();
    let n = sequences.len();
    subsets(&universe, max_size)
        .into_iter()
        .map(|x| {
            let count = sequences.iter().filter(|s| contains(pick(s), &x)).count();
            (x, count)
        })
        .filter(|(_, c)| exact_cmp(*c as u128, n as u128, min_support).is_ge())
        .collect()
}

/// All rules X→Y over subset pairs of the active symptoms, scored directly
/// from the definitions and filtered like the miner.
pub fn brute_force_rules(
    sequences: &[PatientSequence],
    min_support: f64,
    min_confidence: f64,
    min_lift: f64,
    max_size: usize,
) -> Vec<OracleRule> {
    let n = sequences.len();
    let acute_universe: Items = sequences.iter().flat_map(|s| s.acute.iter()).collect();
    let late_universe: Items = sequences.iter().flat_map(|s| s.late.iter()).collect();
    let mut out = Vec::new();
    for x in subsets(&acute_universe, max_size) {
        let x_count = sequences.iter().filter(|s| contains(s.acute, &x)).count();
        for y in subsets(&late_universe, max_size) {
            let y_count = sequences.iter().filter(|s| contains(s.late, &y)).count();
            let mut supporters: Vec<String> = sequences
                .iter()
                .filter(|s| contains(s.acute, &x) && contains(s.late, &y))
                .map(|s| s.patient_id.clone())
                .collect();
            supporters.sort();
            let xy = supporters.len();
            if xy == 0
                || exact_cmp(xy as u128, n as u128, min_support).is_lt()
                || exact_cmp(xy as u128, x_count as u128, min_confidence).is_lt()
                || exact_cmp((xy * n) as u128, (x_count * y_count) as u128, min_lift).is_le()
            {
                continue;
            }
            let support = xy as f64 / n as f64;
            let sup_x = x_count as f64 / n as f64;
            let sup_y = y_count as f64 / n as f64;
            let confidence = support / sup_x;
            let lift = support / (sup_x * sup_y);
            out.push(OracleRule {
                antecedent: x.clone(),
                consequent: y,
                support,
                confidence,
                lift,
                supporters,
            });
        }
    }
    out
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues (descending) and matching unit eigenvectors.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let values = order.iter().map(|&k| a[k][k]).collect();
    let vectors = order.iter().map(|&k| (0..n).map(|i| v[i][k]).collect()).collect();
    (values, vectors)
}

/// Reference PCA: column-center, covariance, Jacobi. Returns (variances, scores per row).
pub fn pca_oracle(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = rows.len();
    let d = rows[0].len();
    let means: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / m as f64).collect();
    let centered: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&means).map(|(x, mu)| x - mu).collect()).collect();
    let denom = (m.max(2) - 1) as f64;
    let cov: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| centered.iter().map(|r| r[i] * r[j]).sum::<f64>() / denom).collect())
        .collect();
    let (values, vectors) = jacobi_eigen(&cov);
    let scores = centered
        .iter()
        .map(|r| vectors.iter().map(|v| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect())
        .collect();
    (values, scores)
}

pub fn sequence(id: &str, acute: &[Symptom], late: &[Symptom]) -> PatientSequence {
    PatientSequence {
        patient_id: id.to_string(),
        acute: acute.iter().copied().collect(),
        late: late.iter().copied().collect(),
    }
}

/// The five-patient fixture as sequences.
pub fn five_patient_sequences() -> Vec<PatientSequence> {
    use Symptom::{DryMouth, Nausea, Taste};
    vec![
        sequence("P1", &[Taste, Nausea], &[DryMouth]),
        sequence("P2", &[Taste, Nausea], &[DryMouth]),
        sequence("P3", &[Taste], &[DryMouth]),
        sequence("P4", &[Nausea], &[]),
        sequence("P5", &[Taste, Nausea], &[DryMouth]),
    ]
}

/// The five-patient fixture realized as ratings: 7 at week 3 for acute members, 4 at
/// month 6 (timepoint 9) for late members, everything else missing.
pub fn five_patient_cohort() -> CohortTable {
    let patients = five_patient_sequences()
        .into_iter()
        .map(|s| {
            let mut p = PatientRecord::new(s.patient_id, Treatment::Cc);
            for sym in s.acute.iter() {
                p.ratings.set(sym, 3, Some(7));
            }
            for sym in s.late.iter() {
                p.ratings.set(sym, 9, Some(4));
            }
            p
        })
        .collect();
    CohortTable::new(patients, "five-patient fixture").expect("valid fixture")
}

/// The two-treatment fixture: treatment A has 4 patients (2 with taste→dryMouth), B has 5 (1 with it).
pub fn two_treatment_sequences() -> (Vec<PatientSequence>, Vec<PatientSequence>) {
    use Symptom::{DryMouth, Taste};
    let a = (0..4)
        .map(|i| if i < 2 { sequence(&format!("A{i}"), &[Taste], &[DryMouth]) } else { sequence(&format!("A{i}"), &[], &[]) })
        .collect();
    let b = (0..5)
        .map(|i| if i < 1 { sequence(&format!("B{i}"), &[Taste], &[DryMouth]) } else { sequence(&format!("B{i}"), &[], &[]) })
        .collect();
    (a, b)
}

/// A random stratum over the first `symptoms` vocabulary entries.
pub fn random_stratum(rng: &mut ChaCha8Rng, patients: usize, symptoms: usize) -> Vec<PatientSequence> {
    let pool = &Symptom::ALL[..symptoms];
    let density = rng.random_range(0.2..0.8);
    (0..patients)
        .map(|i| {
            let acute: Vec<Symptom> = pool.iter().copied().filter(|_| rng.random_bool(density)).collect();
            let late: Vec<Symptom> = pool.iter().copied().filter(|_| rng.random_bool(density)).collect();
            sequence(&format!("R{i:02}"), &acute, &late)
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One merge of the reference agglomeration: (height, left id, right id, merged leaves).
pub type OracleMerge = (f64, usize, usize, Vec<usize>);

/// Complete linkage recomputed from leaf distances at every step.
/// Ties go to the smallest (left id, right id); merged clusters get id `n + step`.
pub fn naive_complete_linkage(distance: &[Vec<f64>]) -> Vec<OracleMerge> {
    let n = distance.len();
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..active.len() {
            for b in (a + 1)..active.len() {
                let d = active[a]
                    .1
                    .iter()
                    .flat_map(|&i| active[b].1.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| distance[i][j])
                    .fold(f64::NEG_INFINITY, f64::max);
                let lo = active[a].0.min(active[b].0);
                let hi = active[a].0.max(active[b].0);
                let better = match best {
                    None => true,
                    Some((bd, bl, bh, _, _)) => d < bd || (d == bd && (lo, hi) < (bl, bh)),
                };
                if better {
                    best = Some((d, lo, hi, a, b));
                }
            }
        }
        let (d, lo, hi, a, b) = best.unwrap();
        let mut leaves = active[a].1.clone();
        leaves.extend(active[b].1.iter().copied());
        leaves.sort();
        active.remove(b);
        active.remove(a);
        active.push((n + step, leaves.clone()));
        merges.push((d, lo, hi, leaves));
    }
    merges
}

/// Jaccard index of two id lists; two empty lists count as identical.
pub fn jaccard_sets(a: &[String], b: &[String]) -> f64 {
    let a: BTreeSet<&String> = a.iter().collect();
    let b: BTreeSet<&String> = b.iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(&b).count() as f64 / union as f64
    }
}

/// Stratum sizes of the reference cohort (S excluded).
pub const FULL_COHORT_STRATA: [(Treatment, usize); 5] = [
    (Treatment::Icc, 97),
    (Treatment::Cc, 329),
    (Treatment::Irt, 66),
    (Treatment::Rt, 199),
    (Treatment::SAndOthers, 75),
];

/// Three symptom-disjoint patterns planted per stratum at `penetrance`.
pub fn full_scale_spec(seed: u64, penetrance: f64) -> SyntheticSpec {
    use Symptom::*;
    let triples: [[(&[Symptom], &[Symptom]); 3]; 5] = [
        [(&[Taste, Nausea], &[DryMouth]), (&[Pain, Swallow], &[Mucus]), (&[Fatigue], &[Sleep])],
        [(&[Taste], &[DryMouth, Swallow]), (&[Skin, Pain], &[Numbness]), (&[Mood, Sadness], &[Distress])],
        [(&[MouthSores, Pain], &[Swallow]), (&[Appetite], &[Taste]), (&[Drowsiness, Fatigue], &[Memory])],
        [(&[Mucus, Choking], &[Speech]), (&[Nausea], &[Appetite, Enjoyment]), (&[Breath], &[Activity])],
        [(&[Skin], &[Pain]), (&[Taste, DryMouth], &[Mucus]), (&[Constipation, Relations], &[Mood])],
    ];
    let mut patterns = Vec::new();
    for ((treatment, _), planted) in FULL_COHORT_STRATA.iter().zip(triples) {
        for (acute, late) in planted {
            patterns.push(PlantedPattern {
                treatment: *treatment,
                acute: acute.iter().copied().collect(),
                late: late.iter().copied().collect(),
                penetrance,
            });
        }
    }
    SyntheticSpec {
        counts: FULL_COHORT_STRATA.iter().copied().collect(),
        patterns,
        noise_rate: 0.03,
        missingness_rate: 0.1,
        seed,
        thresholds: Default::default(),
    }
}
