//! Derived products for the analyst views: severity profiles, symptom
//! ordering, prevalence, projections, burden tiers, flows and timelines.

pub mod kmeans;
pub mod layout;
pub mod pca;
mod prevalence;
mod profiles;
pub mod projection;
mod sankey;
mod timeline;

pub use kmeans::{burden_tiers, kmeans_1d, BurdenTiers, PatientTiers, StageTiering, Tier};
pub use layout::{min_pairwise_distance, relax, LayoutParams};
pub use pca::{pca, Pca};
pub use prevalence::{prevalence_query, PrevalenceRow};
pub use profiles::{cosine, order_symptoms, severity_profiles, SeverityProfile};
pub use projection::{patient_projection, symptom_projection, LateSymptom, ProjectionPoint, SymptomProjection};
pub use sankey::{sankey_flows, SankeyGraph, SankeyLink, SankeyNode, AXES as SANKEY_AXES};
pub use timeline::{patient_timeline, timeline_rows, TimelineEntry, TimelineRow};
