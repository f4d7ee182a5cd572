#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use seqsym::{DataSource, Engine, SessionConfig};
use seqsym_core::{generate_synthetic_cohort, CohortTable, PlantedPattern, Symptom, SyntheticSpec, Treatment};
use tower::ServiceExt;

pub fn engine_for(cohort: CohortTable, source: DataSource) -> Arc<Engine> {
    let report = seqsym_core::validate_cohort(&cohort);
    Arc::new(Engine::new(SessionConfig::new(source), cohort, report))
}

pub fn five_patient_engine() -> Arc<Engine> {
    let source = DataSource::directory(std::path::Path::new("five-patient-fixture"));
    engine_for(seqsym_oracle::five_patient_cohort(), source)
}

/// A small multi-stratum cohort used for the golden files.
pub fn small_spec() -> SyntheticSpec {
    use Symptom::*;
    let pattern = |treatment, acute: &[Symptom], late: &[Symptom], penetrance| PlantedPattern {
        treatment,
        acute: acute.iter().copied().collect(),
        late: late.iter().copied().collect(),
        penetrance,
    };
    SyntheticSpec {
        counts: BTreeMap::from([(Treatment::Icc, 14), (Treatment::Cc, 12), (Treatment::Rt, 10), (Treatment::S, 3)]),
        patterns: vec![
            pattern(Treatment::Icc, &[Taste, Nausea], &[DryMouth], 0.6),
            pattern(Treatment::Icc, &[Pain], &[Swallow, Mucus], 0.5),
            pattern(Treatment::Cc, &[Taste], &[DryMouth], 0.5),
        ],
        noise_rate: 0.05,
        missingness_rate: 0.1,
        seed: 11,
        thresholds: Default::default(),
    }
}

pub fn small_engine() -> Arc<Engine> {
    let spec = small_spec();
    let cohort = generate_synthetic_cohort(&spec).unwrap();
    engine_for(cohort, DataSource::Synthetic(spec))
}

pub async fn call(engine: &Arc<Engine>, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let response = seqsym::http::router(engine.clone())
        .oneshot(req.body(body).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

/// Structural equality with a relative tolerance on numbers.
pub fn json_close(a: &Value, b: &Value, tol: f64) -> Result<(), String> {
    fn walk(a: &Value, b: &Value, tol: f64, path: &str) -> Result<(), String> {
        match (a, b) {
            (Value::Number(x), Value::Number(y)) => {
                let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                if (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0) {
                    Ok(())
                } else {
                    Err(format!("{path}: {x} != {y}"))
                }
            }
            (Value::Array(x), Value::Array(y)) => {
                if x.len() != y.len() {
                    return Err(format!("{path}: length {} != {}", x.len(), y.len()));
                }
                x.iter().zip(y).enumerate().try_for_each(|(i, (x, y))| walk(x, y, tol, &format!("{path}[{i}]")))
            }
            (Value::Object(x), Value::Object(y)) => {
                let kx: Vec<_> = x.keys().collect();
                let ky: Vec<_> = y.keys().collect();
                if kx != ky {
                    return Err(format!("{path}: keys {kx:?} != {ky:?}"));
                }
                x.iter().try_for_each(|(k, v)| walk(v, &y[k], tol, &format!("{path}.{k}")))
            }
            _ if a == b => Ok(()),
            _ => Err(format!("{path}: {a} != {b}")),
        }
    }
    walk(a, b, tol, "$")
}

/// The scripted session behind the golden files. Order matters: mining
/// creates the state that clusters and projections read.
pub fn script() -> Vec<(&'static str, &'static str, &'static str, Option<Value>)> {
    vec![
        ("health", "GET", "/health", None),
        ("treatments", "GET", "/treatments", None),
        ("cohort_summary", "GET", "/cohort/summary", None),
        ("clusters_before_mine", "GET", "/clusters?treatment=ICC", None),
        ("sankey_before_mine", "GET", "/sankey?treatment=ICC&seed=2", None),
        (
            "mine",
            "POST",
            "/mine",
            Some(json!({ "treatment": "ICC", "min_support": 0.4, "min_confidence": 0.5, "min_lift": 1.0 })),
        ),
        ("rules_filtered", "GET", "/rules?treatment=ICC", None),
        ("rules_unfiltered", "GET", "/rules?treatment=ICC&filtered=false", None),
        ("clusters_default", "GET", "/clusters?treatment=ICC", None),
        ("clusters_cut", "POST", "/clusters", Some(json!({ "treatment": "ICC", "clusters": 2 }))),
        ("profiles", "GET", "/profiles?treatment=ICC", None),
        ("profiles_subset", "GET", "/profiles?treatment=ICC&symptoms=taste,dryMouth", None),
        ("prevalence", "GET", "/prevalence?treatment=ICC&theta_acute=5&theta_late=3", None),
        ("prevalence_staged", "GET", "/prevalence?treatment=ICC&t_stage=T2", None),
        ("projection_symptoms", "GET", "/projection/symptoms?treatment=ICC&seed=7", None),
        ("projection_patients", "GET", "/projection/patients?treatment=ICC&seed=7", None),
        ("projection_patients_subset", "GET", "/projection/patients?treatment=ICC&symptoms=taste,nausea&seed=7&diameter=2", None),
        ("sankey", "GET", "/sankey?treatment=ICC&seed=2", None),
        ("timeline", "GET", "/timeline?treatment=ICC", None),
        ("timeline_subset", "GET", "/timeline?treatment=ICC&patients=ICC-0001,ICC-0002", None),
        ("mine_surgery", "POST", "/mine", Some(json!({ "treatment": "S" }))),
        ("unknown_treatment", "GET", "/profiles?treatment=XRT", None),
        ("absent_treatment", "GET", "/profiles?treatment=IRT", None),
        ("bad_cut", "POST", "/clusters", Some(json!({ "treatment": "ICC", "clusters": 2, "cut_height": 0.3 }))),
        ("unknown_field", "POST", "/mine", Some(json!({ "treatment": "ICC", "support": 0.3 }))),
    ]
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub async fn run_script() -> Vec<(String, Value)> {
    let engine = small_engine();
    let mut out = Vec::new();
    for (name, method, uri, body) in script() {
        let (status, value) = call(&engine, method, uri, body).await;
        out.push((name.to_string(), json!({ "status": status.as_u16(), "body": value })));
    }
    out
}
