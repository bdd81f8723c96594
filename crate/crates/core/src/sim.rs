//! Ancestral sampling from a fully specified model, observationally and
//! under intervention.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpt::{check_complete, CptError, CptRowsJson, CptSet};
use crate::data::Dataset;
use crate::graph::{CausalGraph, GraphError, GraphSpec, Intervention};
use crate::rng::{sample_categorical, seeded_rng};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cpt(#[from] CptError),
}

/// JSON form of a complete model: a graph plus one table per node.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub graph: GraphSpec,
    pub cpts: CptRowsJson,
}

/// A graph together with point tables for every node: the data generating
/// process experiments sample from.
#[derive(Debug, Clone)]
pub struct GroundTruthModel {
    pub graph: CausalGraph,
    pub cpts: CptSet,
}

impl GroundTruthModel {
    pub fn new(graph: CausalGraph, cpts: CptSet) -> Result<Self, SimError> {
        check_complete(&graph, &cpts, true)?;
        Ok(Self { graph, cpts })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self, SimError> {
        let graph = CausalGraph::build(&spec.graph)?;
        let cpts = crate::cpt::tables_from_json(&graph, &spec.cpts)?;
        Ok(Self { graph, cpts })
    }

    /// Draw `m` i.i.d. rows in topological order, each variable from its
    /// table given the already-sampled parents. Columns follow declaration
    /// order. Identical (model, m, seed) give identical datasets.
    pub fn forward_sample(&self, m: usize, seed: u64) -> Dataset {
        self.sample_impl(m, seed, None)
    }

    /// Sample from the mutilated model: the target column is clamped to the
    /// intervention value, everything else keeps its mechanism.
    pub fn interventional_sample(
        &self,
        iv: &Intervention,
        m: usize,
        seed: u64,
    ) -> Result<Dataset, GraphError> {
        let target = iv.validate(&self.graph)?;
        Ok(self.sample_impl(m, seed, Some((target, iv.value))))
    }

    fn sample_impl(&self, m: usize, seed: u64, clamp: Option<(usize, usize)>) -> Dataset {
        let g = &self.graph;
        let order = g.topological_ids();
        let mut rng = seeded_rng(seed);
        let mut data = Dataset::empty(g.names().to_vec());
        let mut states = vec![0usize; g.len()];
        let mut parent_buf = Vec::new();
        for _ in 0..m {
            for &v in &order {
                if let Some((t, value)) = clamp {
                    if v == t {
                        states[v] = value;
                        continue;
                    }
                }
                let cpt = &self.cpts[g.name(v)];
                parent_buf.clear();
                parent_buf.extend(g.parents_of(v).iter().map(|&p| states[p]));
                let row = cpt.row_index(&parent_buf);
                let table = cpt.table.as_ref().expect("ground truth has tables");
                let weights = &table[row * cpt.card..(row + 1) * cpt.card];
                states[v] = sample_categorical(&mut rng, weights);
            }
            data.push_row(states.iter().map(|&s| Some(s as u32)).collect());
        }
        data
    }
}
