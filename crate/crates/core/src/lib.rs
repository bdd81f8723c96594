//! Causal inference with ordinary Bayesian machinery.
//!
//! The crate converts a causal graph plus an atomic intervention `do(T=t)`
//! into a joint model of the pre- and post-intervention worlds with shared
//! parameter nodes, runs exact Dirichlet-categorical inference for
//! post-interventional marginals, and cross-checks the answers against the
//! do-calculus and the truncated-product formula.
//!
//! Modules:
//! - [`graph`]: DAGs, mutilation, d-separation.
//! - [`twin`]: the pre/post twin model, its validator, factorization, DOT.
//! - [`docalc`]: the three rules, truncated product, exact enumeration.
//! - [`infer`]: conjugate, Monte Carlo, and Gibbs posterior predictives.
//! - [`sim`]: ancestral sampling, observational and interventional.
//! - [`cli`]: the `causal-twin` command-line surface.

pub mod cli;
pub mod cpt;
pub mod data;
pub mod dist;
pub mod docalc;
pub mod graph;
pub mod infer;
pub mod rng;
pub mod sim;
pub mod twin;

#[cfg(test)]
pub(crate) mod testkit;

pub use cpt::{Cpt, CptError, CptSet};
pub use data::{DataError, Dataset};
pub use dist::{DistError, Distribution};
pub use docalc::{
    interventional_marginal, joint_distribution, rule1_applies, rule2_applies, rule3_applies,
    truncated_product, DoCalcError, RuleQuery,
};
pub use graph::{CausalGraph, GraphError, GraphSpec, Intervention, NodeSpec};
pub use infer::{
    fit_counts, latent_posterior_predictive, mc_posterior_predictive, posterior_mean_cpt,
    posterior_predictive, prior_sensitivity, InferError, PosteriorCounts,
};
pub use sim::{GroundTruthModel, ModelSpec, SimError};
pub use twin::{causal_bayes_construct, export_dot, factorization, validate_twin, TwinPgm};
