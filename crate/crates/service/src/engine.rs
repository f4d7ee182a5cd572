//! Request handling shared by the HTTP server and the CLI.
//!
//! Every product is returned in an envelope that carries the schema version,
//! the endpoint name and the full effective parameter set, so a response can
//! be reproduced from its own `params` block.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use seqsym_core::analytics::{
    burden_tiers, order_symptoms, patient_projection, prevalence_query, severity_profiles, symptom_projection,
    timeline_rows, LayoutParams, ProjectionPoint,
};
use seqsym_core::{
    agglomerate, build_clusters, build_sequences, cut, mine, rule_similarity, stratify_by_treatment, CohortTable,
    CutPolicy, Dendrogram, MiningParams, MiningResult, NStage, PatientRecord, PatientSequence, RuleCluster,
    SequentialRule, Stratum, Symptom, SymptomSet, TStage, Thresholds, Treatment, ValidationReport, SYMPTOM_COUNT,
    TIMEPOINT_COUNT,
};

use crate::config::SessionConfig;
use crate::error::ApiError;

pub const SCHEMA_VERSION: u32 = 1;

/// Symptom the analyst ordering is anchored on.
pub const ORDERING_ANCHOR: Symptom = Symptom::DryMouth;

/// Default collision diameter as a fraction of the larger coordinate span.
pub const DIAMETER_FRACTION: f64 = 0.04;

type Result<T> = std::result::Result<T, ApiError>;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MineRequest {
    pub treatment: String,
    pub theta_acute: Option<u8>,
    pub theta_late: Option<u8>,
    pub min_support: Option<f64>,
    pub min_confidence: Option<f64>,
    pub min_lift: Option<f64>,
    pub max_itemset_size: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterRequest {
    pub treatment: String,
    pub cut_height: Option<f64>,
    pub clusters: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreatmentQuery {
    pub treatment: String,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulesQuery {
    pub treatment: String,
    pub filtered: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesQuery {
    pub treatment: String,
    pub symptoms: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrevalenceQuery {
    pub treatment: String,
    pub theta_acute: Option<u8>,
    pub theta_late: Option<u8>,
    pub t_stage: Option<String>,
    pub n_stage: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymptomProjectionQuery {
    pub treatment: String,
    pub seed: Option<u64>,
    pub diameter: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientProjectionQuery {
    pub treatment: String,
    pub symptoms: Option<String>,
    pub seed: Option<u64>,
    pub diameter: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SankeyQuery {
    pub treatment: String,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelineQuery {
    pub treatment: String,
    pub patients: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct MineKey {
    treatment: Treatment,
    thresholds: (u8, u8),
    // f64 bit patterns; requests differing only in float spelling share an entry
    params: [u64; 3],
    max_itemset_size: usize,
}

struct Mined {
    treatment: Treatment,
    thresholds: Thresholds,
    params: MiningParams,
    sequences: Vec<PatientSequence>,
    /// Pooled sequences of every other minable stratum.
    outside: Vec<PatientSequence>,
    result: MiningResult,
}

/// What a treatment was last mined and cut with.
struct Current {
    mined: Arc<Mined>,
    cut: CutPolicy,
    dendrogram: Dendrogram,
    clusters: Vec<RuleCluster>,
}

impl Current {
    fn clustered_symptoms(&self) -> SymptomSet {
        self.clusters
            .iter()
            .fold(SymptomSet::EMPTY, |acc, c| acc.union(c.acute_symptoms).union(c.late_symptoms))
    }
}

#[derive(Serialize)]
struct RuleView<'a> {
    #[serde(flatten)]
    rule: &'a SequentialRule,
    passed_lift: bool,
}

#[derive(Serialize)]
struct StratumSize {
    treatment: Treatment,
    size: usize,
    minable: bool,
}

pub struct Engine {
    config: SessionConfig,
    cohort: CohortTable,
    report: ValidationReport,
    strata: BTreeMap<Treatment, Stratum>,
    memo: Mutex<HashMap<MineKey, Arc<Mined>>>,
    current: RwLock<HashMap<Treatment, Arc<Current>>>,
}

fn envelope(endpoint: &str, params: Value, data: impl Serialize) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "endpoint": endpoint,
        "params": params,
        "data": data,
    })
}

fn parse_symptoms(list: Option<&str>) -> Result<Option<SymptomSet>> {
    let Some(list) = list.filter(|s| !s.trim().is_empty()) else {
        return Ok(None);
    };
    list.split(',')
        .map(|s| s.trim().parse::<Symptom>().map_err(ApiError::from))
        .collect::<Result<SymptomSet>>()
        .map(Some)
}

fn symptom_names(set: Option<SymptomSet>) -> Value {
    match set {
        Some(s) => json!(s.iter().map(Symptom::name).collect::<Vec<_>>()),
        None => Value::Null,
    }
}

fn cut_echo(cut: CutPolicy) -> Value {
    match cut {
        CutPolicy::Clusters(k) => json!({ "cut_height": null, "clusters": k }),
        CutPolicy::Height(h) => json!({ "cut_height": h, "clusters": null }),
    }
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(a), Value::Object(b)) = (a.as_object_mut(), b) {
        a.extend(b);
    }
    a
}

/// A diameter proportional to the spread of `points`, or `fallback` when
/// every point coincides.
fn default_diameter(points: &[(f64, f64)], fallback: f64) -> f64 {
    let span = |f: fn(&(f64, f64)) -> f64| {
        let (lo, hi) = points
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if points.is_empty() { 0.0 } else { hi - lo }
    };
    let spread = span(|p| p.0).max(span(|p| p.1));
    if spread > 0.0 { spread * DIAMETER_FRACTION } else { fallback }
}

fn initial_points(points: &[ProjectionPoint]) -> Vec<(f64, f64)> {
    points.iter().map(|p| (p.initial_x, p.initial_y)).collect()
}

impl Engine {
    pub fn new(config: SessionConfig, cohort: CohortTable, report: ValidationReport) -> Self {
        let strata = stratify_by_treatment(&cohort);
        Engine {
            config,
            cohort,
            report,
            strata,
            memo: Mutex::new(HashMap::new()),
            current: RwLock::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn cohort(&self) -> &CohortTable {
        &self.cohort
    }

    fn stratum(&self, label: &str) -> Result<&Stratum> {
        let treatment: Treatment = label.parse().map_err(ApiError::BadRequest)?;
        self.strata
            .get(&treatment)
            .ok_or_else(|| ApiError::NotFound(format!("no patients with treatment `{treatment}`")))
    }

    fn current(&self, treatment: Treatment) -> Option<Arc<Current>> {
        self.current.read().unwrap().get(&treatment).cloned()
    }

    fn require_current(&self, treatment: Treatment) -> Result<Arc<Current>> {
        self.current(treatment).ok_or_else(|| {
            ApiError::Conflict(format!("treatment `{treatment}` has not been mined yet; POST /mine first"))
        })
    }

    fn thresholds(&self, acute: Option<u8>, late: Option<u8>) -> Result<Thresholds> {
        let d = self.config.thresholds;
        Ok(Thresholds::new(acute.unwrap_or(d.acute), late.unwrap_or(d.late))?)
    }

    fn ordering(&self, patients: &[&PatientRecord]) -> (Vec<Symptom>, bool) {
        match order_symptoms(&severity_profiles(patients, None), ORDERING_ANCHOR) {
            Ok(order) => (order, true),
            Err(_) => (Symptom::ALL.to_vec(), false),
        }
    }

    fn mined(&self, stratum: &Stratum, thresholds: Thresholds, params: MiningParams) -> Result<Arc<Mined>> {
        let key = MineKey {
            treatment: stratum.treatment,
            thresholds: (thresholds.acute, thresholds.late),
            params: [params.min_support.to_bits(), params.min_confidence.to_bits(), params.min_lift.to_bits()],
            max_itemset_size: params.max_itemset_size,
        };
        if let Some(hit) = self.memo.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        // computed outside the lock so distinct keys mine concurrently
        let sequences = build_sequences(&stratum.cohort, thresholds);
        let mut outside: Vec<PatientSequence> = self
            .strata
            .values()
            .filter(|s| s.minable && s.treatment != stratum.treatment)
            .flat_map(|s| build_sequences(&s.cohort, thresholds))
            .collect();
        outside.sort_by(|a, b| a.patient_id.cmp(&b.patient_id));
        let result = mine(&sequences, &params)?;
        let mined = Arc::new(Mined {
            treatment: stratum.treatment,
            thresholds,
            params,
            sequences,
            outside,
            result,
        });
        Ok(self.memo.lock().unwrap().entry(key).or_insert(mined).clone())
    }

    fn clustered(&self, mined: Arc<Mined>, policy: CutPolicy) -> Result<Current> {
        let rules = &mined.result.rules;
        let dendrogram = agglomerate(&rule_similarity(rules));
        let labels = cut(&dendrogram, policy)?;
        let clusters = build_clusters(rules, &labels, &mined.sequences, &mined.outside, mined.params.min_support)?;
        Ok(Current {
            mined,
            cut: policy,
            dendrogram,
            clusters,
        })
    }

    fn mining_echo(current: &Current) -> Value {
        let m = &current.mined;
        let base = json!({
            "treatment": m.treatment,
            "theta_acute": m.thresholds.acute,
            "theta_late": m.thresholds.late,
            "min_support": m.params.min_support,
            "min_confidence": m.params.min_confidence,
            "min_lift": m.params.min_lift,
            "max_itemset_size": m.params.max_itemset_size,
        });
        merge(base, cut_echo(current.cut))
    }

    pub fn health(&self) -> Value {
        envelope("health", json!({}), json!({ "status": "ok", "patients": self.cohort.len() }))
    }

    pub fn treatments(&self) -> Value {
        let rows: Vec<StratumSize> = Treatment::ALL
            .into_iter()
            .map(|t| StratumSize {
                treatment: t,
                size: self.strata.get(&t).map_or(0, |s| s.cohort.len()),
                minable: t.is_minable(),
            })
            .collect();
        envelope("treatments", json!({}), rows)
    }

    pub fn cohort_summary(&self) -> Value {
        let cells = self.cohort.len() * SYMPTOM_COUNT * TIMEPOINT_COUNT;
        let present: usize = self.cohort.patients.iter().map(|p| p.ratings.present().count()).sum();
        let strata: Vec<StratumSize> = self
            .strata
            .values()
            .map(|s| StratumSize {
                treatment: s.treatment,
                size: s.cohort.len(),
                minable: s.minable,
            })
            .collect();
        let data = json!({
            "provenance": self.cohort.provenance,
            "patients": self.cohort.len(),
            "symptoms": SYMPTOM_COUNT,
            "timepoints": TIMEPOINT_COUNT,
            "present_ratings": present,
            "missing_fraction": 1.0 - present as f64 / cells as f64,
            "strata": strata,
            "validation": self.report,
        });
        envelope(
            "cohort/summary",
            json!({
                "theta_acute": self.config.thresholds.acute,
                "theta_late": self.config.thresholds.late,
                "seed": self.config.seed,
            }),
            data,
        )
    }

    /// Mines a stratum (memoized per parameter set), cuts it with the default
    /// policy and makes it the treatment's current state.
    pub fn mine(&self, req: &MineRequest) -> Result<Value> {
        let stratum = self.stratum(&req.treatment)?;
        if !stratum.minable {
            return Err(ApiError::BadRequest(format!(
                "treatment `{}` has no on-treatment reports and is not mined",
                stratum.treatment
            )));
        }
        let thresholds = self.thresholds(req.theta_acute, req.theta_late)?;
        let base = self
            .config
            .params
            .unwrap_or_else(|| MiningParams::for_stratum_size(stratum.cohort.len()));
        let params = MiningParams {
            min_support: req.min_support.unwrap_or(base.min_support),
            min_confidence: req.min_confidence.unwrap_or(base.min_confidence),
            min_lift: req.min_lift.unwrap_or(base.min_lift),
            max_itemset_size: req.max_itemset_size.unwrap_or(base.max_itemset_size),
        };
        params.validate()?;
        let mined = self.mined(stratum, thresholds, params)?;
        let current = Arc::new(self.clustered(mined, CutPolicy::default())?);
        self.current.write().unwrap().insert(stratum.treatment, current.clone());

        let result = &current.mined.result;
        let data = json!({
            "sequence_count": result.sequence_count,
            "rule_count": result.rules.len(),
            "lift_rejected_count": result.lift_rejected.len(),
            "rules": result.rules,
        });
        Ok(envelope("mine", Self::mining_echo(&current), data))
    }

    pub fn rules(&self, q: &RulesQuery) -> Result<Value> {
        let stratum = self.stratum(&q.treatment)?;
        let current = self.require_current(stratum.treatment)?;
        let filtered = q.filtered.unwrap_or(true);
        let result = &current.mined.result;
        let mut rules: Vec<RuleView> = result.rules.iter().map(|rule| RuleView { rule, passed_lift: true }).collect();
        if !filtered {
            rules.extend(result.lift_rejected.iter().map(|rule| RuleView { rule, passed_lift: false }));
            rules.sort_by_key(|a| a.rule.shape());
        }
        let params = merge(Self::mining_echo(&current), json!({ "filtered": filtered }));
        Ok(envelope("rules", params, json!({ "sequence_count": result.sequence_count, "rules": rules })))
    }

    /// Re-cuts the current rules of a mined treatment.
    pub fn cluster(&self, req: &ClusterRequest) -> Result<Value> {
        let stratum = self.stratum(&req.treatment)?;
        let policy = match (req.cut_height, req.clusters) {
            (Some(_), Some(_)) => {
                return Err(ApiError::BadRequest("give either cut_height or clusters, not both".into()));
            }
            (Some(h), None) => CutPolicy::Height(h),
            (None, Some(k)) => CutPolicy::Clusters(k),
            (None, None) => CutPolicy::default(),
        };
        let previous = self.require_current(stratum.treatment)?;
        let current = Arc::new(self.clustered(previous.mined.clone(), policy)?);
        self.current.write().unwrap().insert(stratum.treatment, current.clone());
        Ok(self.cluster_payload(&current))
    }

    pub fn clusters(&self, q: &TreatmentQuery) -> Result<Value> {
        let stratum = self.stratum(&q.treatment)?;
        let current = self.require_current(stratum.treatment)?;
        Ok(self.cluster_payload(&current))
    }

    fn cluster_payload(&self, current: &Current) -> Value {
        let rules: Vec<Value> = current
            .mined
            .result
            .rules
            .iter()
            .map(|r| json!({ "antecedent": r.antecedent, "consequent": r.consequent }))
            .collect();
        let data = json!({
            "outside_pool": current.mined.outside.len(),
            "clusters": current.clusters,
            "dendrogram": current.dendrogram,
            "rules": rules,
        });
        envelope("clusters", Self::mining_echo(current), data)
    }

    pub fn profiles(&self, q: &ProfilesQuery) -> Result<Value> {
        let stratum = self.stratum(&q.treatment)?;
        let subset = parse_symptoms(q.symptoms.as_deref())?;
        let patients: Vec<&PatientRecord> = stratum.cohort.patients.iter().collect();
        let profiles = severity_profiles(&patients, subset);
        let (ordering, anchored) = self.ordering(&patients);
        let current = self.current(stratum.treatment);
        let predicted = current.as_ref().map_or(SymptomSet::EMPTY, |c| {
            c.clusters.iter().fold(SymptomSet::EMPTY, |acc, c| acc.union(c.late_symptoms))
        });
        let params = json!({
            "treatment": stratum.treatment,
            "symptoms": symptom_names(subset),
            "anchor": ORDERING_ANCHOR,
            "mined": current.is_some(),
        });
        let data = json!({
            "profiles": profiles,
            "ordering": ordering,
            "anchored": anchored,
            "predicted": predicted,
        });
        Ok(envelope("profiles", params, data))
    }

    pub fn prevalence(&self, q: &PrevalenceQuery) -> Result<Value> {
        let stratum = self.stratum(&q.treatment)?;
        let thresholds = self.thresholds(q.theta_acute, q.theta_late)?;
        let t_stage = q
            .t_stage
            .as_deref()
            .map(|s| TStage::parse_field(s).ok_or_else(|| ApiError::BadRequest(format!("unknown t_stage `{s}`"))))
            .transpose()?;
        let n_stage = q
            .n_stage
            .as_deref()
            .map(|s| NStage::parse_field(s).ok_or_else(|| ApiError::BadRequest(format!("unknown n_stage `{s}`"))))
            .transpose()?;
        let current = self.current(stratum.treatment);
        let clustered = current.as_ref().map_or(SymptomSet::EMPTY, |c| c.clustered_symptoms());
        let rows = prevalence_query(&stratum.cohort, thresholds, t_stage, n_stage, clustered);
        let selected = stratum
            .cohort
            .patients
            .iter()
            .filter(|p| t_stage.is_none_or(|t| p.t_stage == t) && n_stage.is_none_or(|n| p.n_stage == n))
            .count();
        let params = json!({
            "treatment": stratum.treatment,
            "theta_acute": thresholds.acute,
            "theta_late": thresholds.late,
            "t_stage": t_stage,
            "n_stage": n_stage,
            "mined": current.is_some(),
        });
        Ok(envelope("prevalence", params, json!({ "patients": selected, "rows": rows })))
    }

    pub fn symptom_projection(&self, q: &SymptomProjectionQuery) -> Result<Value> {
        let stratum = self.stratum(&q.treatment)?;
        let current = self.require_current(stratum.treatment)?;
        let seed = q.seed.unwrap_or(self.config.seed);
        let project = |diameter: f64| {
            symptom_projection(
                &current.clusters,
                &current.mined.sequences,
                &current.mined.result.lift_rejected,
                &LayoutParams::new(diameter, seed),
            )
        };
        let diameter = match q.diameter {
            Some(d) if d.is_finite() && d > 0.0 => d,
            Some(d) => return Err(ApiError::BadRequest(format!("diameter {d} must be positive"))),
            // a zero diameter leaves the initial coordinates untouched
            None => default_diameter(&initial_points(&project(0.0)?.acute), 0.05),
        };
        let projection = project(diameter)?;
        let params = merge(Self::mining_echo(&current), json!({ "seed": seed, "diameter": diameter }));
        Ok(envelope("projection/symptoms", params, projection))
    }

    pub fn patient_projection(&self, q: &PatientProjectionQuery) -> Result<Value> {
        let stratum = self.stratum(&q.treatment)?;
        let subset = parse_symptoms(q.symptoms.as_deref())?;
        let seed = q.seed.unwrap_or(self.config.seed);
        let current = self.current(stratum.treatment);
        let clusters: &[RuleCluster] = current.as_ref().map_or(&[], |c| &c.clusters);
        let project = |diameter: f64| patient_projection(&stratum.cohort, clusters, subset, &LayoutParams::new(diameter, seed));
        let diameter = match q.diameter {
            Some(d) if d.is_finite() && d > 0.0 => d,
            Some(d) => return Err(ApiError::BadRequest(format!("diameter {d} must be positive"))),
            None => default_diameter(&initial_points(&project(0.0)), 1.0),
        };
        let points = project(diameter);
        let params = json!({
            "treatment": stratum.treatment,
            "symptoms": symptom_names(subset),
            "seed": seed,
            "diameter": diameter,
            "mined": current.is_some(),
        });
        Ok(envelope("projection/patients", params, json!({ "points": points })))
    }

    pub fn sankey(&self, q: &SankeyQuery) -> Result<Value> {
        let stratum = self.stratum(&q.treatment)?;
        let seed = q.seed.unwrap_or(self.config.seed);
        let current = self.current(stratum.treatment);
        let clusters: &[RuleCluster] = current.as_ref().map_or(&[], |c| &c.clusters);
        let tiers = burden_tiers(&stratum.cohort, seed);
        let graph = seqsym_core::analytics::sankey_flows(&stratum.cohort, clusters, &tiers)?;
        let params = json!({ "treatment": stratum.treatment, "seed": seed, "mined": current.is_some() });
        let data = json!({
            "graph": graph,
            "tiers": { "acute": tiers.acute, "late": tiers.late, "patients": tiers.patients },
        });
        Ok(envelope("sankey", params, data))
    }

    pub fn timeline(&self, q: &TimelineQuery) -> Result<Value> {
        let stratum = self.stratum(&q.treatment)?;
        let all: Vec<&PatientRecord> = stratum.cohort.patients.iter().collect();
        let wanted: Option<Vec<String>> = q
            .patients
            .as_deref()
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.split(',').map(|id| id.trim().to_string()).collect());
        let selected: Vec<&PatientRecord> = match &wanted {
            None => all.clone(),
            Some(ids) => ids
                .iter()
                .map(|id| {
                    stratum.cohort.get(id).ok_or_else(|| {
                        ApiError::NotFound(format!("patient `{id}` is not in stratum `{}`", stratum.treatment))
                    })
                })
                .collect::<Result<_>>()?,
        };
        let (ordering, anchored) = self.ordering(&all);
        let current = self.current(stratum.treatment);
        let clusters: &[RuleCluster] = current.as_ref().map_or(&[], |c| &c.clusters);
        let rows = timeline_rows(&selected, &ordering, clusters);
        let params = json!({
            "treatment": stratum.treatment,
            "patients": wanted,
            "anchor": ORDERING_ANCHOR,
            "mined": current.is_some(),
        });
        Ok(envelope("timeline", params, json!({ "ordering": ordering, "anchored": anchored, "rows": rows })))
    }
}
