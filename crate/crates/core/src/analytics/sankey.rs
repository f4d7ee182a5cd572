use std::collections::BTreeMap;

use serde::Serialize;

use crate::analytics::kmeans::{BurdenTiers, Tier};
use crate::clustering::RuleCluster;
use crate::cohort::{CohortTable, NStage, TStage};
use crate::error::{Error, Result};

pub const AXES: [&str; 5] = ["t_stage", "n_stage", "clusters", "acute_tier", "late_tier"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SankeyNode {
    pub axis: usize,
    pub label: String,
    pub count: usize,
    pub patients: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SankeyLink {
    /// The link runs from `source_axis` to `source_axis + 1`.
    pub source_axis: usize,
    pub source: String,
    pub target: String,
    pub count: usize,
    pub patients: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SankeyGraph {
    pub axes: Vec<&'static str>,
    pub nodes: Vec<SankeyNode>,
    pub links: Vec<SankeyLink>,
}

/// Ordinal position of a node within its axis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum NodeKey {
    T(TStage),
    N(NStage),
    Clusters(usize, Vec<usize>),
    Tier(Tier),
}

impl NodeKey {
    fn label(&self) -> String {
        match self {
            NodeKey::T(t) => t.label().to_string(),
            NodeKey::N(n) => n.label().to_string(),
            NodeKey::Clusters(_, ids) if ids.is_empty() => "none".to_string(),
            NodeKey::Clusters(_, ids) => ids.iter().map(|i| format!("c{i}")).collect::<Vec<_>>().join(","),
            NodeKey::Tier(t) => t.label().to_string(),
        }
    }
}

/// Flows through T stage → N stage → cluster combination → acute tier → late tier.
/// Only non-empty nodes appear; links carry patient ids for brushing.
pub fn sankey_flows(stratum: &CohortTable, clusters: &[RuleCluster], tiers: &BurdenTiers) -> Result<SankeyGraph> {
    let mut patients: Vec<_> = stratum.patients.iter().collect();
    patients.sort_by(|a, b| a.patient_id.cmp(&b.patient_id));

    let mut paths: Vec<(&str, [NodeKey; 5])> = Vec::with_capacity(patients.len());
    for p in patients {
        let t = tiers.get(&p.patient_id).ok_or_else(|| {
            Error::param("tiers", format!("no burden tier for patient `{}`", p.patient_id))
        })?;
        let member: Vec<usize> = clusters
            .iter()
            .filter(|c| c.patients.binary_search(&p.patient_id).is_ok())
            .map(|c| c.cluster_id)
            .collect();
        paths.push((
            &p.patient_id,
            [
                NodeKey::T(p.t_stage),
                NodeKey::N(p.n_stage),
                NodeKey::Clusters(member.len(), member),
                NodeKey::Tier(t.acute_tier),
                NodeKey::Tier(t.late_tier),
            ],
        ));
    }

    let mut nodes = Vec::new();
    for axis in 0..AXES.len() {
        let mut groups: BTreeMap<&NodeKey, Vec<String>> = BTreeMap::new();
        for (id, path) in &paths {
            groups.entry(&path[axis]).or_default().push(id.to_string());
        }
        nodes.extend(groups.into_iter().map(|(key, patients)| SankeyNode {
            axis,
            label: key.label(),
            count: patients.len(),
            patients,
        }));
    }

    let mut links = Vec::new();
    for axis in 0..AXES.len() - 1 {
        let mut groups: BTreeMap<(&NodeKey, &NodeKey), Vec<String>> = BTreeMap::new();
        for (id, path) in &paths {
            groups.entry((&path[axis], &path[axis + 1])).or_default().push(id.to_string());
        }
        links.extend(groups.into_iter().map(|((s, t), patients)| SankeyLink {
            source_axis: axis,
            source: s.label(),
            target: t.label(),
            count: patients.len(),
            patients,
        }));
    }

    Ok(SankeyGraph {
        axes: AXES.to_vec(),
        nodes,
        links,
    })
}
