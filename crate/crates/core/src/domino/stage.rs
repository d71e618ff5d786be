use serde::{Deserialize, Serialize};

use super::{DominoError, KRule};
use crate::gmm::{gmm_fit, gmm_predict, GmmConfig, GmmModel};
use crate::seed::derive_seed;

/// An item clustered at some stage: a word, or a cluster of a lower stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Element {
    Word { word: String },
    Cluster { scope: String, cluster: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Indices into the stage's `elements`, ascending.
    pub members: Vec<usize>,
    /// Mean of the fitted mixture component.
    pub center: Vec<f64>,
    /// `|members| / |elements|`
    pub expert_weight: f64,
}

/// Clustering result for one scope (a language, a family, or the multi pool).
///
/// Only non-empty mixture components become clusters; cluster ids are dense
/// and follow component order.
#[derive(Debug, Clone, PartialEq)]
pub struct StageClusters {
    pub scope_id: String,
    pub elements: Vec<Element>,
    pub clusters: Vec<Cluster>,
    pub k_requested: usize,
    pub k_used: usize,
    pub seed: u64,
    pub em_iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    pub warnings: Vec<String>,
    pub(crate) element_cluster: Vec<usize>,
    pub(crate) component_to_cluster: Vec<Option<usize>>,
    pub(crate) gmm: Option<GmmModel>,
}

impl StageClusters {
    pub(crate) fn from_parts(
        scope_id: String,
        elements: Vec<Element>,
        clusters: Vec<Cluster>,
        meta: StageMeta,
    ) -> Result<Self, DominoError> {
        let mut element_cluster = vec![usize::MAX; elements.len()];
        for (c, cl) in clusters.iter().enumerate() {
            for &m in &cl.members {
                if m >= elements.len() || element_cluster[m] != usize::MAX {
                    return Err(DominoError::Format(format!("`{scope_id}`: members do not partition the elements")));
                }
                element_cluster[m] = c;
            }
        }
        if element_cluster.contains(&usize::MAX) {
            return Err(DominoError::Format(format!("`{scope_id}`: element without a cluster")));
        }
        Ok(Self {
            scope_id,
            elements,
            clusters,
            k_requested: meta.k_requested,
            k_used: meta.k_used,
            seed: meta.seed,
            em_iterations: meta.em_iterations,
            converged: meta.converged,
            log_likelihood: meta.log_likelihood,
            warnings: meta.warnings,
            element_cluster,
            component_to_cluster: Vec::new(),
            gmm: None,
        })
    }

    pub fn cluster_of(&self, element: usize) -> usize {
        self.element_cluster[element]
    }

    pub fn weight_sum(&self) -> f64 {
        self.clusters.iter().map(|c| c.expert_weight).sum()
    }

    /// The fitted mixture; absent on models read back from disk.
    pub fn mixture(&self) -> Option<&GmmModel> {
        self.gmm.as_ref()
    }

    /// Cluster id of the component most responsible for `point`.
    pub fn predict(&self, point: &[f64]) -> Result<usize, DominoError> {
        let gmm = self
            .gmm
            .as_ref()
            .ok_or_else(|| DominoError::Chain(format!("`{}` has no fitted mixture", self.scope_id)))?;
        let comp = gmm_predict(gmm, point)?;
        self.component_to_cluster[comp].ok_or_else(|| {
            DominoError::Chain(format!("`{}`: point resolved to empty component {comp}", self.scope_id))
        })
    }
}

pub(crate) struct StageMeta {
    pub k_requested: usize,
    pub k_used: usize,
    pub seed: u64,
    pub em_iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    pub warnings: Vec<String>,
}

/// `expert_weight · center` for every cluster, in cluster order.
pub fn weighted_centers(stage: &StageClusters) -> Vec<Vec<f64>> {
    stage
        .clusters
        .iter()
        .map(|c| c.center.iter().map(|x| c.expert_weight * x).collect())
        .collect()
}

pub(crate) fn cluster_points(
    scope: &str,
    elements: Vec<Element>,
    points: Vec<Vec<f64>>,
    k_rule: KRule,
    cfg: &GmmConfig,
) -> Result<StageClusters, DominoError> {
    let n = points.len();
    if n == 0 {
        return Err(DominoError::EmptyScope(scope.to_string()));
    }
    let k_requested = k_rule.resolve(n).max(1);
    let mut warnings = Vec::new();
    let k_used = if k_requested > n {
        warnings.push(format!("{scope}: k={k_requested} exceeds {n} elements; clamped to {n}"));
        n
    } else {
        k_requested
    };
    let seed = derive_seed(cfg.seed, scope);
    let gmm = gmm_fit(&points, &GmmConfig { k: k_used, seed, ..*cfg })?;

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k_used];
    for (i, &a) in gmm.assignments.iter().enumerate() {
        members[a].push(i);
    }
    let mut component_to_cluster = vec![None; k_used];
    let mut clusters = Vec::new();
    for (comp, m) in members.into_iter().enumerate() {
        if m.is_empty() {
            continue;
        }
        component_to_cluster[comp] = Some(clusters.len());
        clusters.push(Cluster {
            expert_weight: m.len() as f64 / n as f64,
            members: m,
            center: gmm.means[comp].clone(),
        });
    }
    let meta = StageMeta {
        k_requested,
        k_used,
        seed,
        em_iterations: gmm.iterations,
        converged: gmm.converged,
        log_likelihood: gmm.final_log_likelihood(),
        warnings,
    };
    let mut stage = StageClusters::from_parts(scope.to_string(), elements, clusters, meta)?;
    stage.component_to_cluster = component_to_cluster;
    stage.gmm = Some(gmm);
    Ok(stage)
}
