//! Rule clusters: Jaccard similarity over supporter sets, complete-linkage
//! agglomeration, dendrogram cuts, and per-cluster metrics.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mining::SequentialRule;
use crate::sequence::PatientSequence;
use crate::symptom::SymptomSet;

/// Dense symmetric matrix of pairwise Jaccard indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Builds from row-major values. Panics if `values.len() != n * n`.
    pub fn from_values(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n * n, "similarity matrix must be n×n");
        SimilarityMatrix { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n.max(1))
    }
}

/// `|a ∩ b| / |a ∪ b|` over sorted, deduplicated slices. Two empty sets give 1.
pub fn jaccard<T: Ord>(a: &[T], b: &[T]) -> f64 {
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - common;
    if union == 0 {
        1.0
    } else {
        common as f64 / union as f64
    }
}

pub fn rule_similarity(rules: &[SequentialRule]) -> SimilarityMatrix {
    rule_similarity_with(rules, Execution::default())
}

pub fn rule_similarity_with(rules: &[SequentialRule], exec: Execution) -> SimilarityMatrix {
    let n = rules.len();
    let rows = exec.map_range(n, |i| {
        (0..n)
            .map(|j| if i == j { 1.0 } else { jaccard(&rules[i].supporters, &rules[j].supporters) })
            .collect::<Vec<_>>()
    });
    SimilarityMatrix {
        n,
        values: rows.into_iter().flatten().collect(),
    }
}

/// One agglomeration step. Leaves are `0..n`; the cluster formed at step `k`
/// gets id `n + k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: usize,
    pub merges: Vec<Merge>,
}

/// Complete-linkage agglomeration with distance `1 − similarity`.
///
/// At each step the closest pair of active clusters merges; ties go to the
/// pair with the smallest (left id, right id).
pub fn agglomerate(matrix: &SimilarityMatrix) -> Dendrogram {
    let n = matrix.len();
    if n == 0 {
        return Dendrogram { leaves: 0, merges: Vec::new() };
    }
    // distances between active clusters, indexed by slot; slot i holds cluster ids[i]
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 1.0 - matrix.get(i, j)).collect())
        .collect();
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..n {
            if !active[a] {
                continue;
            }
            for b in (a + 1)..n {
                if !active[b] {
                    continue;
                }
                let (lo, hi) = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                let d = dist[a][b];
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => d < bd || (d == bd && (lo, hi) < (blo, bhi)),
                };
                if better {
                    best = Some((d, lo, hi, a, b));
                }
            }
        }
        let (height, left, right, a, b) = best.expect("at least two active clusters");
        // complete linkage: merged cluster is as far as its farthest member
        for c in 0..n {
            if active[c] && c != a && c != b {
                let d = dist[a][c].max(dist[b][c]);
                dist[a][c] = d;
                dist[c][a] = d;
            }
        }
        active[b] = false;
        sizes[a] += sizes[b];
        ids[a] = n + step;
        merges.push(Merge {
            left,
            right,
            height,
            size: sizes[a],
        });
    }
    Dendrogram { leaves: n, merges }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutPolicy {
    /// Exactly this many clusters.
    Clusters(usize),
    /// Keep merges at or below this distance.
    Height(f64),
}

impl Default for CutPolicy {
    fn default() -> Self {
        CutPolicy::Height(0.5)
    }
}

/// Slack for `1 − jaccard` rounding when comparing merge heights to a cut.
const HEIGHT_EPS: f64 = 1e-12;

/// Cluster label per leaf. Labels are numbered in order of each cluster's
/// smallest leaf.
pub fn cut(dendrogram: &Dendrogram, policy: CutPolicy) -> Result<Vec<usize>> {
    let n = dendrogram.leaves;
    let applied = match policy {
        CutPolicy::Clusters(k) => {
            if k == 0 || k > n {
                return Err(Error::ClusterCountOutOfRange { k, rules: n });
            }
            n - k
        }
        CutPolicy::Height(h) => {
            if !(0.0..=1.0).contains(&h) {
                return Err(Error::param("cut_height", format!("{h} outside [0, 1]")));
            }
            dendrogram
                .merges
                .iter()
                .take_while(|m| m.height <= h + HEIGHT_EPS)
                .count()
        }
    };

    // union-find over node ids 0..n+merges
    let total = n + dendrogram.merges.len();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (step, m) in dendrogram.merges.iter().take(applied).enumerate() {
        let node = n + step;
        let l = find(&mut parent, m.left);
        let r = find(&mut parent, m.right);
        parent[l] = node;
        parent[r] = node;
    }
    let mut label_of_root = std::collections::HashMap::new();
    let mut labels = Vec::with_capacity(n);
    for leaf in 0..n {
        let root = find(&mut parent, leaf);
        let next = label_of_root.len();
        labels.push(*label_of_root.entry(root).or_insert(next));
    }
    Ok(labels)
}

/// Cross-treatment likelihood ratio; `Unbounded` when the pattern never
/// occurs outside the stratum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Unbounded,
}

impl Ratio {
    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(v),
            Ratio::Unbounded => None,
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Finite(v) => serializer.serialize_f64(*v),
            Ratio::Unbounded => serializer.serialize_str("unbounded"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleCluster {
    /// 1-based.
    pub cluster_id: usize,
    /// Indices into the rule list that was clustered.
    pub rules: Vec<usize>,
    pub acute_symptoms: SymptomSet,
    pub late_symptoms: SymptomSet,
    /// Union of member supporter sets, sorted.
    pub patients: Vec<String>,
    /// Support of the merged acute set within the stratum.
    pub acute_support: f64,
    /// Support of the merged acute→late pattern within the stratum.
    pub pattern_support: f64,
    /// `None` when the merged acute set never occurs (degenerate cluster).
    pub cluster_confidence: Option<f64>,
    pub cross_treatment_ratio: Ratio,
    pub outside_support: f64,
    pub degenerate: bool,
    pub below_mining_threshold: bool,
}

/// Builds one cluster per label. `other` is the pooled sequences of every
/// other treatment stratum; `min_support` only drives the
/// `below_mining_threshold` flag.
pub fn build_clusters(
    rules: &[SequentialRule],
    assignment: &[usize],
    stratum: &[PatientSequence],
    other: &[PatientSequence],
    min_support: f64,
) -> Result<Vec<RuleCluster>> {
    if assignment.len() != rules.len() {
        return Err(Error::AssignmentMismatch {
            got: assignment.len(),
            expected: rules.len(),
        });
    }
    if stratum.is_empty() {
        return Err(Error::NoSequences);
    }
    let k = assignment.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (rule, &label) in assignment.iter().enumerate() {
        members[label].push(rule);
    }

    let n = stratum.len();
    let mut clusters = Vec::with_capacity(k);
    for (label, member_rules) in members.into_iter().enumerate().filter(|(_, m)| !m.is_empty()) {
        let mut acute = SymptomSet::EMPTY;
        let mut late = SymptomSet::EMPTY;
        let mut patients: Vec<String> = Vec::new();
        for &r in &member_rules {
            acute = acute.union(rules[r].antecedent);
            late = late.union(rules[r].consequent);
            patients.extend(rules[r].supporters.iter().cloned());
        }
        patients.sort();
        patients.dedup();

        let acute_count = stratum.iter().filter(|s| s.acute.is_superset(acute)).count();
        let pattern_count = stratum.iter().filter(|s| s.supports(acute, late)).count();
        let outside_count = other.iter().filter(|s| s.supports(acute, late)).count();
        let acute_support = acute_count as f64 / n as f64;
        let pattern_support = pattern_count as f64 / n as f64;
        let outside_support = if other.is_empty() {
            0.0
        } else {
            outside_count as f64 / other.len() as f64
        };
        let cross_treatment_ratio = if outside_count == 0 {
            Ratio::Unbounded
        } else {
            Ratio::Finite((pattern_count * other.len()) as f64 / (n * outside_count) as f64)
        };
        clusters.push(RuleCluster {
            cluster_id: label + 1,
            rules: member_rules,
            acute_symptoms: acute,
            late_symptoms: late,
            patients,
            acute_support,
            pattern_support,
            cluster_confidence: (acute_count > 0).then(|| pattern_count as f64 / acute_count as f64),
            cross_treatment_ratio,
            outside_support,
            degenerate: acute_count == 0,
            below_mining_threshold: pattern_support < min_support,
        });
    }
    Ok(clusters)
}
