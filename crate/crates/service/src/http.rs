use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::Value;

use crate::engine::{
    ClusterRequest, Engine, MineRequest, PatientProjectionQuery, PrevalenceQuery, ProfilesQuery, RulesQuery,
    SankeyQuery, SymptomProjectionQuery, TimelineQuery, TreatmentQuery,
};
use crate::error::ApiError;

type Shared = State<Arc<Engine>>;
type Reply = Result<Json<Value>, ApiError>;
type Q<T> = Result<Query<T>, QueryRejection>;
type B<T> = Result<Json<T>, JsonRejection>;

// Extractor failures are reported in the same JSON shape as engine errors.
fn query<T>(q: Q<T>) -> Result<T, ApiError> {
    q.map(|Query(t)| t).map_err(|e| ApiError::BadRequest(e.body_text()))
}

fn body<T>(b: B<T>) -> Result<T, ApiError> {
    b.map(|Json(t)| t).map_err(|e| ApiError::BadRequest(e.body_text()))
}

async fn health(State(e): Shared) -> Json<Value> {
    Json(e.health())
}

async fn treatments(State(e): Shared) -> Json<Value> {
    Json(e.treatments())
}

async fn cohort_summary(State(e): Shared) -> Json<Value> {
    Json(e.cohort_summary())
}

async fn mine(State(e): Shared, b: B<MineRequest>) -> Reply {
    let req = body(b)?;
    // mining is CPU-bound; keep it off the async workers
    let value = tokio::task::spawn_blocking(move || e.mine(&req))
        .await
        .map_err(|err| ApiError::Internal(format!("mining task failed: {err}")))??;
    Ok(Json(value))
}

async fn rules(State(e): Shared, q: Q<RulesQuery>) -> Reply {
    e.rules(&query(q)?).map(Json)
}

async fn clusters(State(e): Shared, q: Q<TreatmentQuery>) -> Reply {
    e.clusters(&query(q)?).map(Json)
}

async fn cluster(State(e): Shared, b: B<ClusterRequest>) -> Reply {
    e.cluster(&body(b)?).map(Json)
}

async fn profiles(State(e): Shared, q: Q<ProfilesQuery>) -> Reply {
    e.profiles(&query(q)?).map(Json)
}

async fn prevalence(State(e): Shared, q: Q<PrevalenceQuery>) -> Reply {
    e.prevalence(&query(q)?).map(Json)
}

async fn symptom_projection(State(e): Shared, q: Q<SymptomProjectionQuery>) -> Reply {
    e.symptom_projection(&query(q)?).map(Json)
}

async fn patient_projection(State(e): Shared, q: Q<PatientProjectionQuery>) -> Reply {
    e.patient_projection(&query(q)?).map(Json)
}

async fn sankey(State(e): Shared, q: Q<SankeyQuery>) -> Reply {
    e.sankey(&query(q)?).map(Json)
}

async fn timeline(State(e): Shared, q: Q<TimelineQuery>) -> Reply {
    e.timeline(&query(q)?).map(Json)
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/treatments", get(treatments))
        .route("/cohort/summary", get(cohort_summary))
        .route("/mine", post(mine))
        .route("/rules", get(rules))
        .route("/clusters", get(clusters).post(cluster))
        .route("/profiles", get(profiles))
        .route("/prevalence", get(prevalence))
        .route("/projection/symptoms", get(symptom_projection))
        .route("/projection/patients", get(patient_projection))
        .route("/sankey", get(sankey))
        .route("/timeline", get(timeline))
        .with_state(engine)
}
