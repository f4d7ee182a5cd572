//! Acceptance suite. Runs every primary criterion and prints one PASS/FAIL
//! line each. Exits non-zero on any failure not listed in `KNOWN_FAILURES`;
//! set ACCEPTANCE_STRICT=1 to fail on those as well.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value;
use seqsym_core::analytics::kmeans::tier_values;
use seqsym_core::analytics::projection::{symptom_similarity, symptom_supporters};
use seqsym_core::analytics::{burden_tiers, min_pairwise_distance, pca, relax, sankey_flows, LayoutParams};
use seqsym_core::{
    agglomerate, build_clusters, build_sequences, cut, generate_rules, generate_synthetic_cohort, rule_similarity,
    stratify_by_treatment, CohortTable, CutPolicy, MiningParams, NStage, PatientRecord, PatientSequence, PlantedPattern,
    Ratio, SequentialRule, SimilarityMatrix, Symptom, SymptomSet, SyntheticSpec, TStage, Thresholds, Treatment,
};
use seqsym_oracle::{
    brute_force_rules, five_patient_sequences, two_treatment_sequences, items, jaccard_sets, naive_complete_linkage, full_scale_spec,
    pca_oracle, random_stratum, rng, FULL_COHORT_STRATA,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Criteria that cannot hold as stated; see the README.
const KNOWN_FAILURES: [&str; 1] = ["monotonicity: raising θ never adds rules"];

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

// Dyadic thresholds compare identically as decimals and as binary floats.
const SUPPORTS: [f64; 6] = [0.125, 0.25, 0.375, 0.5, 0.625, 0.75];
const CONFIDENCES: [f64; 5] = [0.125, 0.25, 0.5, 0.75, 1.0];
const LIFTS: [f64; 6] = [0.0, 0.5, 1.0, 1.25, 1.5, 2.0];

fn shapes(rules: &[SequentialRule]) -> BTreeSet<(SymptomSet, SymptomSet)> {
    rules.iter().map(|r| r.shape()).collect()
}

fn clusters_for(
    rules: &[SequentialRule],
    seqs: &[PatientSequence],
    other: &[PatientSequence],
    policy: CutPolicy,
    min_support: f64,
) -> Vec<seqsym_core::RuleCluster> {
    if rules.is_empty() {
        return Vec::new();
    }
    let labels = cut(&agglomerate(&rule_similarity(rules)), policy).unwrap();
    build_clusters(rules, &labels, seqs, other, min_support).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut r = rng(0xacce);
    let strata = 240;
    let mut rules_seen = 0;
    for case in 0..strata {
        let patients = r.random_range(1..=12);
        let symptoms = r.random_range(1..=6);
        let seqs = random_stratum(&mut rng(case), patients, symptoms);
        let p = MiningParams {
            min_support: SUPPORTS[r.random_range(0..SUPPORTS.len())],
            min_confidence: CONFIDENCES[r.random_range(0..CONFIDENCES.len())],
            min_lift: LIFTS[r.random_range(0..LIFTS.len())],
            max_itemset_size: r.random_range(1..=6),
        };
        let mut got = generate_rules(&seqs, &p).map_err(|e| e.to_string())?;
        let mut want = brute_force_rules(&seqs, p.min_support, p.min_confidence, p.min_lift, p.max_itemset_size);
        got.sort_by_key(|a| (items(a.antecedent), items(a.consequent)));
        want.sort_by(|a, b| (&a.antecedent, &a.consequent).cmp(&(&b.antecedent, &b.consequent)));
        ensure!(got.len() == want.len(), "stratum {case}: {} rules vs oracle {}", got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            ensure!(items(g.antecedent) == w.antecedent && items(g.consequent) == w.consequent, "stratum {case}: rule sets differ");
            ensure!(
                (g.support - w.support).abs() <= 1e-12
                    && (g.confidence - w.confidence).abs() <= 1e-12
                    && (g.lift - w.lift).abs() <= 1e-12,
                "stratum {case}: metrics differ"
            );
            ensure!(g.supporters == w.supporters, "stratum {case}: supporters differ");
        }
        rules_seen += got.len();
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{strata} strata, {rules_seen} rules, {:.2?}", elapsed))
}

fn identities_hold(rules: &[SequentialRule], n: usize) -> Result<(), String> {
    for r in rules {
        let sup = r.support;
        ensure!((r.confidence * r.antecedent_support - sup).abs() <= 1e-12, "conf·sup(X) ≠ sup for {:?}", r.shape());
        ensure!(
            (r.lift * r.antecedent_support * r.consequent_support - sup).abs() <= 1e-12,
            "lift·sup(X)·sup(Y) ≠ sup for {:?}",
            r.shape()
        );
        ensure!(r.supporters.len() as f64 / n as f64 == sup, "|supporters|/n ≠ support for {:?}", r.shape());
    }
    Ok(())
}

fn identities() -> Outcome {
    let mut checked = 0;
    for case in 0..300u64 {
        let mut r = rng(case ^ 0x1d);
        let patients = r.random_range(1..=40);
        let seqs = random_stratum(&mut r, patients, 8);
        let p = MiningParams { min_support: 0.1, min_confidence: 0.1, min_lift: 0.0, max_itemset_size: 4 };
        let rules = generate_rules(&seqs, &p).map_err(|e| e.to_string())?;
        identities_hold(&rules, patients)?;
        checked += rules.len();
    }
    let cohort = generate_synthetic_cohort(&full_scale_spec(3, 0.45)).map_err(|e| e.to_string())?;
    for stratum in stratify_by_treatment(&cohort).values().filter(|s| s.minable) {
        let seqs = build_sequences(&stratum.cohort, Thresholds::default());
        let rules = generate_rules(&seqs, &MiningParams::default()).map_err(|e| e.to_string())?;
        identities_hold(&rules, seqs.len())?;
        checked += rules.len();
    }
    Ok(format!("{checked} rules"))
}

fn five_patient_fixture() -> Outcome {
    use Symptom::{DryMouth, Nausea, Taste};
    let seqs = five_patient_sequences();
    let params = MiningParams { min_support: 0.5, min_confidence: 0.5, min_lift: 1.0, max_itemset_size: 4 };
    let result = seqsym_core::mine(&seqs, &params).map_err(|e| e.to_string())?;
    let got: Vec<_> = result.rules.iter().map(|r| (r.shape(), r.support, r.confidence, r.lift)).collect();
    let set = |s: &[Symptom]| s.iter().copied().collect::<SymptomSet>();
    let want = vec![
        ((set(&[Taste]), set(&[DryMouth])), 0.8, 1.0, 1.25),
        ((set(&[Taste, Nausea]), set(&[DryMouth])), 0.6, 1.0, 1.25),
    ];
    let close = |a: &[((SymptomSet, SymptomSet), f64, f64, f64)], b: &[((SymptomSet, SymptomSet), f64, f64, f64)]| {
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| {
                x.0 == y.0 && (x.1 - y.1).abs() <= 1e-12 && (x.2 - y.2).abs() <= 1e-12 && (x.3 - y.3).abs() <= 1e-12
            })
    };
    ensure!(close(&got, &want), "got {got:?}");
    let excluded = (set(&[Nausea]), set(&[DryMouth]));
    ensure!(!result.rules.iter().any(|r| r.shape() == excluded), "nausea→dryMouth was emitted");
    let rejected = result.lift_rejected.iter().find(|r| r.shape() == excluded).ok_or("nausea→dryMouth not scored")?;
    ensure!((rejected.lift - 0.9375).abs() <= 1e-12, "excluded rule lift {}", rejected.lift);
    let oracle = brute_force_rules(&seqs, 0.5, 0.5, 1.0, 4);
    ensure!(oracle.len() == 2, "oracle disagrees: {} rules", oracle.len());
    Ok("2 rules; nausea→dryMouth excluded at lift 0.9375".into())
}

fn random_cohort(seed: u64, patients: usize) -> CohortTable {
    let mut r = rng(seed);
    let records = (0..patients)
        .map(|i| {
            let mut p = PatientRecord::new(format!("p{i:02}"), Treatment::Cc);
            for s in &Symptom::ALL[..6] {
                for t in 0..12 {
                    if r.random_bool(0.7) {
                        p.ratings.set(*s, t, Some(r.random_range(0..=10)));
                    }
                }
            }
            p
        })
        .collect();
    CohortTable::new(records, "random").unwrap()
}

const MONOTONE_COHORTS: u64 = 150;

fn filter_monotonicity() -> Outcome {
    let mut comparisons = 0;
    for seed in 0..MONOTONE_COHORTS {
        let mut r = rng(seed ^ 0xf117);
        let cohort = random_cohort(seed, r.random_range(2..=12));
        let seqs = build_sequences(&cohort, Thresholds::default());
        for _ in 0..4 {
            let (s, c, l) = (r.random_range(0..5), r.random_range(0..4), r.random_range(0..5));
            let base = MiningParams {
                min_support: SUPPORTS[s],
                min_confidence: CONFIDENCES[c],
                min_lift: LIFTS[l],
                max_itemset_size: 3,
            };
            let loose = shapes(&generate_rules(&seqs, &base).unwrap());
            for strict in [
                MiningParams { min_support: SUPPORTS[r.random_range(s + 1..SUPPORTS.len())], ..base },
                MiningParams { min_confidence: CONFIDENCES[r.random_range(c + 1..CONFIDENCES.len())], ..base },
                MiningParams { min_lift: LIFTS[r.random_range(l + 1..LIFTS.len())], ..base },
            ] {
                let tight = shapes(&generate_rules(&seqs, &strict).unwrap());
                ensure!(tight.is_subset(&loose), "cohort {seed}: {strict:?} added rules over {base:?}");
                comparisons += 1;
            }
        }
    }
    Ok(format!("{MONOTONE_COHORTS} cohorts, {comparisons} comparisons"))
}

fn theta_pairs(r: &mut rand_chacha::ChaCha8Rng) -> (Thresholds, [Thresholds; 2]) {
    let acute = r.random_range(0..=9);
    let late = r.random_range(0..=9);
    (
        Thresholds::new(acute, late).unwrap(),
        [Thresholds::new(acute + 1, late).unwrap(), Thresholds::new(acute, late + 1).unwrap()],
    )
}

fn theta_rule_monotonicity() -> Outcome {
    let params = MiningParams { min_support: 0.25, min_confidence: 0.5, min_lift: 1.0, max_itemset_size: 3 };
    let mut violations = 0;
    let mut cohorts = Vec::new();
    let mut comparisons = 0;
    for seed in 0..MONOTONE_COHORTS {
        let mut r = rng(seed ^ 0x7e7a);
        let cohort = random_cohort(seed, r.random_range(2..=12));
        for _ in 0..4 {
            let (base, raised) = theta_pairs(&mut r);
            let loose = shapes(&generate_rules(&build_sequences(&cohort, base), &params).unwrap());
            for t in raised {
                let tight = shapes(&generate_rules(&build_sequences(&cohort, t), &params).unwrap());
                comparisons += 1;
                if !tight.is_subset(&loose) {
                    violations += 1;
                    cohorts.push(seed);
                }
            }
        }
    }
    cohorts.dedup();
    ensure!(
        violations == 0,
        "{violations} of {comparisons} θ raises added rules in {} cohorts, e.g. {:?}: a higher θ can shrink sup(X) \
         more than sup(X∪Y), lifting confidence or lift over the bar",
        cohorts.len(),
        &cohorts[..cohorts.len().min(5)]
    );
    Ok(format!("{MONOTONE_COHORTS} cohorts, {comparisons} comparisons"))
}

fn theta_pattern_monotonicity() -> Outcome {
    let mut comparisons = 0;
    for seed in 0..MONOTONE_COHORTS {
        let mut r = rng(seed ^ 0x9a77);
        let cohort = random_cohort(seed, r.random_range(2..=12));
        let params = MiningParams {
            min_support: SUPPORTS[r.random_range(0..SUPPORTS.len())],
            min_confidence: f64::MIN_POSITIVE,
            min_lift: 0.0,
            max_itemset_size: 3,
        };
        for _ in 0..4 {
            let (base, raised) = theta_pairs(&mut r);
            let loose = generate_rules(&build_sequences(&cohort, base), &params).unwrap();
            for t in raised {
                for rule in generate_rules(&build_sequences(&cohort, t), &params).unwrap() {
                    let before = loose.iter().find(|l| l.shape() == rule.shape());
                    ensure!(before.is_some(), "cohort {seed}: pattern {:?} appeared at {t:?}", rule.shape());
                    let before = before.unwrap();
                    ensure!(
                        rule.supporters.iter().all(|id| before.supporters.contains(id)),
                        "cohort {seed}: supporters grew"
                    );
                }
                comparisons += 1;
            }
        }
    }
    Ok(format!("{MONOTONE_COHORTS} cohorts, {comparisons} comparisons"))
}

fn clustering() -> Outcome {
    let mut strata = 0;
    for seed in 0..200u64 {
        let seqs = random_stratum(&mut rng(seed), 2 + seed as usize % 11, 4);
        let params = MiningParams { min_support: 0.25, min_confidence: 0.25, min_lift: 0.0, max_itemset_size: 3 };
        let rules = generate_rules(&seqs, &params).unwrap();
        if rules.len() < 2 {
            continue;
        }
        strata += 1;
        let d = agglomerate(&rule_similarity(&rules));
        ensure!(d.merges.windows(2).all(|w| w[0].height <= w[1].height), "stratum {seed}: heights decrease");
        if rules.len() <= 40 {
            let dist: Vec<Vec<f64>> = rules
                .iter()
                .map(|a| rules.iter().map(|b| 1.0 - jaccard_sets(&a.supporters, &b.supporters)).collect())
                .collect();
            let naive = naive_complete_linkage(&dist);
            for (m, (h, l, r, _)) in d.merges.iter().zip(&naive) {
                ensure!((m.height, m.left, m.right) == (*h, *l, *r), "stratum {seed}: linkage differs from recomputation");
            }
        }
        let singletons = clusters_for(&rules, &seqs, &[], CutPolicy::Clusters(rules.len()), 0.25);
        ensure!(singletons.len() == rules.len(), "stratum {seed}: k = n cut gave {} clusters", singletons.len());
        for c in &singletons {
            let r = &rules[c.rules[0]];
            ensure!(
                c.rules.len() == 1
                    && c.pattern_support == r.support
                    && c.acute_support == r.antecedent_support
                    && (c.cluster_confidence.unwrap_or(f64::NAN) - r.confidence).abs() <= 1e-12
                    && c.patients == r.supporters,
                "stratum {seed}: singleton cluster {} differs from its rule",
                c.cluster_id
            );
        }
        for k in [1, rules.len().div_ceil(2)] {
            for c in clusters_for(&rules, &seqs, &[], CutPolicy::Clusters(k), 0.25) {
                let union: BTreeSet<&String> = c.rules.iter().flat_map(|&i| &rules[i].supporters).collect();
                let got: BTreeSet<&String> = c.patients.iter().collect();
                ensure!(union == got, "stratum {seed}: cluster {} patients are not the supporter union", c.cluster_id);
            }
        }
    }
    let m = SimilarityMatrix::from_values(3, vec![1.0, 0.9, 0.2, 0.9, 1.0, 0.2, 0.2, 0.2, 1.0]);
    let d = agglomerate(&m);
    ensure!((d.merges[0].left, d.merges[0].right) == (0, 1), "fixture: first merge is not (A,B)");
    ensure!((d.merges[0].height - 0.1).abs() <= 1e-12, "fixture: first height {}", d.merges[0].height);
    ensure!((d.merges[1].height - 0.8).abs() <= 1e-12, "fixture: second height {}", d.merges[1].height);
    Ok(format!("{strata} strata; fixture merges at 0.1 then 0.8"))
}

fn cross_treatment_ratio() -> Outcome {
    let (a, b) = two_treatment_sequences();
    let params = MiningParams { min_support: 0.5, min_confidence: 0.5, min_lift: 1.0, max_itemset_size: 1 };
    let rules = generate_rules(&a, &params).unwrap();
    ensure!(rules.len() == 1, "two-treatment fixture mined {} rules", rules.len());
    let fixed = build_clusters(&rules, &[0], &a, &b, 0.5).unwrap()[0].cross_treatment_ratio;
    ensure!(fixed == Ratio::Finite(2.5), "two-treatment ratio {fixed:?}");

    // 47 of 100 carry the pattern inside the stratum, 25 of 100 outside
    use Symptom::{DryMouth, Nausea, Taste};
    let pattern = |treatment, penetrance| PlantedPattern {
        treatment,
        acute: [Taste, Nausea].into_iter().collect(),
        late: [DryMouth].into_iter().collect(),
        penetrance,
    };
    let spec = SyntheticSpec {
        counts: BTreeMap::from([(Treatment::Icc, 100), (Treatment::Cc, 100)]),
        patterns: vec![pattern(Treatment::Icc, 0.47), pattern(Treatment::Cc, 0.25)],
        noise_rate: 0.02,
        missingness_rate: 0.1,
        seed: 188,
        thresholds: Thresholds::default(),
    };
    let strata = stratify_by_treatment(&generate_synthetic_cohort(&spec).unwrap());
    let inside = build_sequences(&strata[&Treatment::Icc].cohort, Thresholds::default());
    let outside = build_sequences(&strata[&Treatment::Cc].cohort, Thresholds::default());
    let params = MiningParams::for_stratum_size(inside.len());
    let rules = generate_rules(&inside, &params).unwrap();
    let clusters = clusters_for(&rules, &inside, &outside, CutPolicy::Height(0.5), params.min_support);
    let target = (pattern(Treatment::Icc, 0.0).acute, pattern(Treatment::Icc, 0.0).late);
    let planted = clusters
        .iter()
        .find(|c| (c.acute_symptoms, c.late_symptoms) == target)
        .ok_or("no cluster covers the planted pattern")?;
    let ratio = planted.cross_treatment_ratio.value().ok_or("ratio unbounded")?;
    ensure!((ratio - 1.88).abs() <= 0.01, "planted ratio {ratio}");
    Ok(format!("two-treatment = 2.5; planted = {ratio:.4}"))
}

fn full_scale_recovery() -> Outcome {
    let penetrance = 0.45;
    let spec = full_scale_spec(2024, penetrance);
    let cohort = generate_synthetic_cohort(&spec).map_err(|e| e.to_string())?;
    ensure!(cohort.patients.len() == 766, "cohort has {} patients", cohort.patients.len());
    let strata = stratify_by_treatment(&cohort);
    let seqs: BTreeMap<Treatment, Vec<PatientSequence>> = strata
        .iter()
        .map(|(t, s)| (*t, build_sequences(&s.cohort, Thresholds::default())))
        .collect();
    let params = MiningParams { min_support: 0.3, min_confidence: 0.5, min_lift: 1.0, max_itemset_size: 4 };
    let mut slowest = Duration::ZERO;
    let mut recovered = 0;
    for (treatment, size) in FULL_COHORT_STRATA {
        let inside = &seqs[&treatment];
        ensure!(inside.len() == size, "{} has {} patients", treatment.label(), inside.len());
        let outside: Vec<PatientSequence> =
            seqs.iter().filter(|(t, _)| **t != treatment).flat_map(|(_, s)| s.iter().cloned()).collect();

        let started = Instant::now();
        let rules = generate_rules(inside, &params).map_err(|e| e.to_string())?;
        let clusters = clusters_for(&rules, inside, &outside, CutPolicy::Height(0.5), params.min_support);
        let elapsed = started.elapsed();
        slowest = slowest.max(elapsed);
        ensure!(elapsed < Duration::from_secs(5), "{}: mine + cluster took {elapsed:?}", treatment.label());
        ensure!(!clusters.is_empty(), "{}: no clusters", treatment.label());

        let n = inside.len() as f64;
        for p in spec.patterns.iter().filter(|p| p.treatment == treatment) {
            let rule = rules
                .iter()
                .find(|r| r.shape() == (p.acute, p.late))
                .ok_or_else(|| format!("{}: planted {:?}→{:?} not recovered", treatment.label(), items(p.acute), items(p.late)))?;
            ensure!(
                (rule.support - penetrance).abs() <= 1.0 / n,
                "{}: planted support {} vs penetrance {penetrance}",
                treatment.label(),
                rule.support
            );
            recovered += 1;
        }
    }
    Ok(format!("{recovered}/15 planted patterns; slowest stratum {slowest:.2?}"))
}

fn eigen_groups(values: &[f64]) -> Vec<Vec<usize>> {
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (values[*g.last().unwrap()] - v).abs() <= 1e-6 * scale => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

fn pca_agrees(rows: &[Vec<f64>], tol: f64) -> Result<(), String> {
    let got = pca(rows);
    let (values, scores) = pca_oracle(rows);
    for (g, w) in got.explained_variance.iter().zip(&values) {
        ensure!((g - w.max(0.0)).abs() <= tol, "variance {g} vs {w}");
    }
    ensure!(got.explained_variance.windows(2).all(|w| w[0] >= w[1]), "variances increase");
    for group in eigen_groups(&values) {
        if group.len() == 1 {
            let k = group[0];
            let dot: f64 = got.scores.iter().zip(&scores).map(|(g, w)| g[k] * w[k]).sum();
            let sign = if dot < 0.0 { -1.0 } else { 1.0 };
            for (g, w) in got.scores.iter().zip(&scores) {
                ensure!((g[k] - sign * w[k]).abs() <= tol, "component {k}: {} vs {}", g[k], sign * w[k]);
            }
        } else {
            // repeated eigenvalues: only the spanned subspace is determined
            for i in 0..rows.len() {
                for j in 0..rows.len() {
                    let a: f64 = group.iter().map(|&k| got.scores[i][k] * got.scores[j][k]).sum();
                    let b: f64 = group.iter().map(|&k| scores[i][k] * scores[j][k]).sum();
                    ensure!((a - b).abs() <= tol, "components {group:?} span differs");
                }
            }
        }
    }
    Ok(())
}

fn pca_check() -> Outcome {
    let mut matrices = 0;
    for seed in 0..40u64 {
        let mut r = rng(seed ^ 0x9ca);
        let patients = r.random_range(20..200);
        let density = r.random_range(0.05..0.9);
        let supporters: Vec<Vec<String>> = (0..28)
            .map(|_| (0..patients).filter(|_| r.random_bool(density)).map(|p| format!("p{p:03}")).collect())
            .collect();
        pca_agrees(&symptom_similarity(&supporters), 1e-9).map_err(|e| format!("random {seed}: {e}"))?;
        matrices += 1;
    }
    let cohort = generate_synthetic_cohort(&full_scale_spec(5, 0.45)).unwrap();
    for stratum in stratify_by_treatment(&cohort).values() {
        let seqs = build_sequences(&stratum.cohort, Thresholds::default());
        let m = symptom_similarity(&symptom_supporters(&Symptom::ALL, &seqs));
        pca_agrees(&m, 1e-9).map_err(|e| format!("{}: {e}", stratum.treatment.label()))?;
        matrices += 1;
    }
    Ok(format!("{matrices} 28×28 matrices"))
}

fn random_clinical_stratum(seed: u64, patients: usize) -> CohortTable {
    let mut r = rng(seed);
    let records = (0..patients)
        .map(|i| {
            let mut p = PatientRecord::new(format!("p{i:03}"), Treatment::Irt);
            p.t_stage = TStage::ALL[r.random_range(0..TStage::ALL.len())];
            p.n_stage = NStage::ALL[r.random_range(0..NStage::ALL.len())];
            for s in &Symptom::ALL[..6] {
                for t in 0..12 {
                    if r.random_bool(0.6) {
                        p.ratings.set(*s, t, Some(r.random_range(0..=10)));
                    }
                }
            }
            p
        })
        .collect();
    CohortTable::new(records, "random").unwrap()
}

fn layout_and_tiers() -> Outcome {
    // seeded determinism and separation
    let bits = |v: &[(f64, f64)]| v.iter().map(|(x, y)| (x.to_bits(), y.to_bits())).collect::<Vec<_>>();
    let cohort = generate_synthetic_cohort(&full_scale_spec(9, 0.45)).unwrap();
    let mut layouts = 0;
    for stratum in stratify_by_treatment(&cohort).values() {
        let seqs = build_sequences(&stratum.cohort, Thresholds::default());
        let plane = pca(&symptom_similarity(&symptom_supporters(&Symptom::ALL, &seqs))).plane();
        for (seed, d) in [(1u64, 0.02), (2, 0.05), (3, 0.2)] {
            let params = LayoutParams::new(d, seed);
            let a = relax(&plane, &params);
            ensure!(bits(&a) == bits(&relax(&plane, &params)), "layout not reproducible");
            ensure!(min_pairwise_distance(&a) >= d, "min distance {} < {d}", min_pairwise_distance(&a));
            layouts += 1;
        }
        let a = serde_json::to_string(&burden_tiers(&stratum.cohort, 4)).unwrap();
        let b = serde_json::to_string(&burden_tiers(&stratum.cohort, 4)).unwrap();
        ensure!(a == b, "tiers not reproducible");
    }
    for seed in 0..100u64 {
        let mut r = rng(seed ^ 0x1a7);
        let pts: Vec<(f64, f64)> = (0..r.random_range(2..60))
            .map(|_| ((r.random_range(0.0..10.0f64) * 2.0).round() / 2.0, (r.random_range(0.0..10.0f64) * 2.0).round() / 2.0))
            .collect();
        let d = r.random_range(0.1..2.0);
        let params = LayoutParams::new(d, seed);
        let a = relax(&pts, &params);
        ensure!(bits(&a) == bits(&relax(&pts, &params)), "layout {seed} not reproducible");
        ensure!(min_pairwise_distance(&a) >= d, "layout {seed}: min distance below {d}");
        layouts += 1;
    }

    // tier assignment under positive rescaling
    for seed in 0..200u64 {
        let mut r = rng(seed ^ 0x5ca1e);
        let values: Vec<f64> = (0..r.random_range(1..120)).map(|_| f64::from(r.random_range(0u32..300))).collect();
        let scale = r.random_range(0.001..1000.0);
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let (a, _, fa) = tier_values(&values, seed);
        let (b, _, fb) = tier_values(&scaled, seed);
        ensure!(a == b && fa == fb, "tiers {seed} change under scale {scale}");
    }

    // flow conservation
    for seed in 0..100u64 {
        let n = 3 + (seed as usize % 40);
        let stratum = random_clinical_stratum(seed, n);
        let seqs = build_sequences(&stratum, Thresholds::default());
        let params = MiningParams { min_support: 0.25, min_confidence: 0.5, min_lift: 1.0, max_itemset_size: 2 };
        let rules = generate_rules(&seqs, &params).unwrap();
        let clusters = clusters_for(&rules, &seqs, &[], CutPolicy::Height(0.5), 0.25);
        let g = sankey_flows(&stratum, &clusters, &burden_tiers(&stratum, seed)).map_err(|e| e.to_string())?;
        let mut inflow: BTreeMap<(usize, &str), usize> = BTreeMap::new();
        let mut outflow: BTreeMap<(usize, &str), usize> = BTreeMap::new();
        for l in &g.links {
            *outflow.entry((l.source_axis, &l.source)).or_default() += l.count;
            *inflow.entry((l.source_axis + 1, &l.target)).or_default() += l.count;
        }
        for axis in 0..g.axes.len() {
            let total: usize = g.nodes.iter().filter(|x| x.axis == axis).map(|x| x.count).sum();
            ensure!(total == n, "stratum {seed}: axis {axis} holds {total} of {n}");
        }
        for node in &g.nodes {
            let key = (node.axis, node.label.as_str());
            ensure!(
                node.axis == 0 || inflow.get(&key) == Some(&node.count),
                "stratum {seed}: inflow to {key:?} differs from its count"
            );
            ensure!(
                node.axis + 1 == g.axes.len() || outflow.get(&key) == Some(&node.count),
                "stratum {seed}: outflow from {key:?} differs from its count"
            );
        }
    }
    Ok(format!("{layouts} layouts, 200 tier rescalings, 100 flow graphs"))
}

fn service_contract() -> Outcome {
    let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    let first = runtime.block_on(common::run_script());
    let second = runtime.block_on(common::run_script());
    for (name, actual) in &first {
        let path = common::golden_dir().join(format!("{name}.json"));
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let expected: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        common::json_close(actual, &expected, 1e-9).map_err(|e| format!("{name}: {e}"))?;
        if actual["status"] == 200 {
            let body = &actual["body"];
            let echo = body["params"].as_object().ok_or(format!("{name}: no parameter echo"))?;
            let takes_params = !matches!(body["endpoint"].as_str(), Some("health" | "treatments" | "cohort/summary"));
            ensure!(!takes_params || !echo.is_empty(), "{name}: empty parameter echo");
        }
    }
    // every route, by method and path, must have a successful golden
    let routes: BTreeSet<(&str, &str)> = common::script()
        .into_iter()
        .zip(&first)
        .filter(|(_, (_, v))| v["status"] == 200)
        .map(|((_, method, uri, _), _)| (method, uri.split('?').next().unwrap()))
        .collect();
    ensure!(routes.len() == 13, "golden files cover {} routes: {routes:?}", routes.len());
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        ensure!(serde_json::to_string(a).unwrap() == serde_json::to_string(b).unwrap(), "{name}: payload differs");
    }
    Ok(format!("{} requests over {} routes", first.len(), routes.len()))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("oracle equivalence", oracle_equivalence),
        ("support/confidence/lift identities", identities),
        ("five-patient fixture", five_patient_fixture),
        ("monotonicity: stricter filters never add rules", filter_monotonicity),
        ("monotonicity: raising θ never adds rules", theta_rule_monotonicity),
        ("monotonicity: raising θ never adds support-qualified patterns", theta_pattern_monotonicity),
        ("clustering", clustering),
        ("cross-treatment ratio", cross_treatment_ratio),
        ("full-scale planted recovery", full_scale_recovery),
        ("PCA", pca_check),
        ("layout and tiers", layout_and_tiers),
        ("service contract", service_contract),
    ];
    let strict = std::env::var_os("ACCEPTANCE_STRICT").is_some();
    let mut unexpected = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}  ({detail})"),
            Err(reason) => {
                let known = KNOWN_FAILURES.contains(&name);
                println!("FAIL  {name}  ({reason}){}", if known { "  [known]" } else { "" });
                if strict || !known {
                    unexpected += 1;
                }
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
