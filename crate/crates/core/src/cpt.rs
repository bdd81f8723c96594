//! Conditional probability tables with per-row Dirichlet pseudo-count priors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{index_of, kahan_sum};
use crate::graph::CausalGraph;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CptError {
    #[error("cpt for `{var}`: expected {expected} rows of {states} states, got {got}")]
    ShapeMismatch {
        var: String,
        expected: usize,
        states: usize,
        got: String,
    },
    #[error("cpt for `{var}`: row {row} sums to {sum}, not 1")]
    RowNotNormalized { var: String, row: usize, sum: f64 },
    #[error("cpt for `{var}`: row {row} has a negative entry")]
    NegativeEntry { var: String, row: usize },
    #[error("prior for `{var}`: row {row} has a non-positive pseudo-count")]
    NonPositivePrior { var: String, row: usize },
    #[error("no table defined for variable `{0}`")]
    MissingVariable(String),
    #[error("table given for `{0}`, which is not in the graph")]
    ExtraVariable(String),
    #[error("cpt for `{0}` has no point probabilities")]
    MissingPointTable(String),
}

/// The table for one variable given its parents.
///
/// Rows are indexed by the joint parent configuration (parents in graph
/// declaration order, last parent varying fastest); columns by the variable's
/// own state. `prior` holds strictly positive Dirichlet pseudo-counts per
/// cell; `table` optionally holds point probabilities (ground truth or a
/// fitted posterior mean).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Cpt {
    pub variable: String,
    pub parents: Vec<String>,
    pub parent_cards: Vec<usize>,
    pub card: usize,
    pub prior: Vec<f64>,
    pub table: Option<Vec<f64>>,
}

impl Cpt {
    /// A flat prior with `alpha` pseudo-counts in every cell and no point table.
    pub fn flat(graph: &CausalGraph, var: &str, alpha: f64) -> Result<Self, CptError> {
        let (parents, parent_cards, card) = shape_for(graph, var)?;
        let rows: usize = parent_cards.iter().product();
        let cpt = Self {
            variable: var.to_owned(),
            parents,
            parent_cards,
            card,
            prior: vec![alpha; rows * card],
            table: None,
        };
        cpt.check()?;
        Ok(cpt)
    }

    /// A point table from per-row probability vectors, with a flat unit prior.
    pub fn from_rows(graph: &CausalGraph, var: &str, rows: &[Vec<f64>]) -> Result<Self, CptError> {
        let (parents, parent_cards, card) = shape_for(graph, var)?;
        let n_rows: usize = parent_cards.iter().product();
        if rows.len() != n_rows || rows.iter().any(|r| r.len() != card) {
            return Err(CptError::ShapeMismatch {
                var: var.to_owned(),
                expected: n_rows,
                states: card,
                got: format!(
                    "{} rows of {:?} states",
                    rows.len(),
                    rows.iter().map(Vec::len).collect::<Vec<_>>()
                ),
            });
        }
        let cpt = Self {
            variable: var.to_owned(),
            parents,
            parent_cards,
            card,
            prior: vec![1.0; n_rows * card],
            table: Some(rows.concat()),
        };
        cpt.check()?;
        Ok(cpt)
    }

    /// A prior from per-row pseudo-count vectors.
    pub fn prior_from_rows(
        graph: &CausalGraph,
        var: &str,
        rows: &[Vec<f64>],
    ) -> Result<Self, CptError> {
        let mut cpt = Self::from_rows_unchecked(graph, var, rows)?;
        cpt.prior = cpt.table.take().expect("set by from_rows_unchecked");
        cpt.check()?;
        Ok(cpt)
    }

    fn from_rows_unchecked(
        graph: &CausalGraph,
        var: &str,
        rows: &[Vec<f64>],
    ) -> Result<Self, CptError> {
        let (parents, parent_cards, card) = shape_for(graph, var)?;
        let n_rows: usize = parent_cards.iter().product();
        if rows.len() != n_rows || rows.iter().any(|r| r.len() != card) {
            return Err(CptError::ShapeMismatch {
                var: var.to_owned(),
                expected: n_rows,
                states: card,
                got: format!("{} rows", rows.len()),
            });
        }
        Ok(Self {
            variable: var.to_owned(),
            parents,
            parent_cards,
            card,
            prior: vec![1.0; n_rows * card],
            table: Some(rows.concat()),
        })
    }

    fn check(&self) -> Result<(), CptError> {
        for row in 0..self.n_rows() {
            let cells = &self.prior[row * self.card..(row + 1) * self.card];
            if cells.iter().any(|&a| a <= 0.0) {
                return Err(CptError::NonPositivePrior {
                    var: self.variable.clone(),
                    row,
                });
            }
        }
        if let Some(table) = &self.table {
            for row in 0..self.n_rows() {
                let cells = &table[row * self.card..(row + 1) * self.card];
                if cells.iter().any(|&p| p < 0.0) {
                    return Err(CptError::NegativeEntry {
                        var: self.variable.clone(),
                        row,
                    });
                }
                let sum = kahan_sum(cells.iter().copied());
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(CptError::RowNotNormalized {
                        var: self.variable.clone(),
                        row,
                        sum,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn n_cells(&self) -> usize {
        self.n_rows() * self.card
    }

    /// Row index for a parent configuration (aligned with `self.parents`).
    pub fn row_index(&self, parent_states: &[usize]) -> usize {
        index_of(&self.parent_cards, parent_states)
    }

    /// Point probability of `state` given a parent configuration.
    pub fn prob(&self, state: usize, parent_states: &[usize]) -> f64 {
        let table = self.table.as_ref().expect("point table present");
        table[self.row_index(parent_states) * self.card + state]
    }

    pub fn row(&self, row: usize) -> Option<&[f64]> {
        self.table
            .as_ref()
            .map(|t| &t[row * self.card..(row + 1) * self.card])
    }

    pub fn has_table(&self) -> bool {
        self.table.is_some()
    }
}

/// Parents (declaration order), their cardinalities, and the variable's own
/// cardinality.
fn shape_for(
    graph: &CausalGraph,
    var: &str,
) -> Result<(Vec<String>, Vec<usize>, usize), CptError> {
    let id = graph
        .node_id(var)
        .map_err(|_| CptError::ExtraVariable(var.to_owned()))?;
    let parents: Vec<String> = graph
        .parents_of(id)
        .iter()
        .map(|&p| graph.name(p).to_owned())
        .collect();
    let parent_cards: Vec<usize> = graph
        .parents_of(id)
        .iter()
        .map(|&p| graph.cardinality(p))
        .collect();
    Ok((parents, parent_cards, graph.cardinality(id)))
}

/// One table per graph node, keyed by variable name.
pub type CptSet = BTreeMap<String, Cpt>;

/// JSON form for CPTs and priors: variable name to a list of rows, one
/// per parent configuration in row index order.
pub type CptRowsJson = BTreeMap<String, Vec<Vec<f64>>>;

/// Load point tables for every node of the graph from the JSON row map.
pub fn tables_from_json(graph: &CausalGraph, rows: &CptRowsJson) -> Result<CptSet, CptError> {
    set_from_json(graph, rows, Cpt::from_rows)
}

/// Load pseudo-count priors for every node of the graph from the JSON row map.
pub fn priors_from_json(graph: &CausalGraph, rows: &CptRowsJson) -> Result<CptSet, CptError> {
    set_from_json(graph, rows, Cpt::prior_from_rows)
}

fn set_from_json(
    graph: &CausalGraph,
    rows: &CptRowsJson,
    build: impl Fn(&CausalGraph, &str, &[Vec<f64>]) -> Result<Cpt, CptError>,
) -> Result<CptSet, CptError> {
    for var in rows.keys() {
        if !graph.contains(var) {
            return Err(CptError::ExtraVariable(var.clone()));
        }
    }
    let mut set = CptSet::new();
    for name in graph.names() {
        let entry = rows
            .get(name)
            .ok_or_else(|| CptError::MissingVariable(name.clone()))?;
        set.insert(name.clone(), build(graph, name, entry)?);
    }
    Ok(set)
}

/// Flat priors with the same pseudo-count in every cell of every table.
pub fn flat_priors(graph: &CausalGraph, alpha: f64) -> Result<CptSet, CptError> {
    graph
        .names()
        .iter()
        .map(|name| Cpt::flat(graph, name, alpha).map(|c| (name.clone(), c)))
        .collect()
}

/// Check a set covers every node with consistent shapes; optionally require
/// point tables (for ground-truth use).
pub fn check_complete(
    graph: &CausalGraph,
    set: &CptSet,
    require_tables: bool,
) -> Result<(), CptError> {
    for var in set.keys() {
        if !graph.contains(var) {
            return Err(CptError::ExtraVariable(var.clone()));
        }
    }
    for name in graph.names() {
        let cpt = set
            .get(name)
            .ok_or_else(|| CptError::MissingVariable(name.clone()))?;
        let (parents, parent_cards, card) = shape_for(graph, name)?;
        if cpt.parents != parents || cpt.parent_cards != parent_cards || cpt.card != card {
            return Err(CptError::ShapeMismatch {
                var: name.clone(),
                expected: parent_cards.iter().product(),
                states: card,
                got: format!("parents {:?}, {} states", cpt.parents, cpt.card),
            });
        }
        if cpt.prior.len() != cpt.n_cells() {
            return Err(CptError::ShapeMismatch {
                var: name.clone(),
                expected: cpt.n_rows(),
                states: card,
                got: format!("{} prior cells", cpt.prior.len()),
            });
        }
        // Fields are public; re-check positivity for hand-built values.
        for row in 0..cpt.n_rows() {
            if cpt.prior[row * card..(row + 1) * card].iter().any(|&a| a <= 0.0) {
                return Err(CptError::NonPositivePrior {
                    var: name.clone(),
                    row,
                });
            }
        }
        if let Some(t) = &cpt.table {
            if t.len() != cpt.n_cells() {
                return Err(CptError::ShapeMismatch {
                    var: name.clone(),
                    expected: cpt.n_rows(),
                    states: card,
                    got: format!("{} table cells", t.len()),
                });
            }
        } else if require_tables {
            return Err(CptError::MissingPointTable(name.clone()));
        }
    }
    Ok(())
}
