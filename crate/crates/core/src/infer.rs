//! Bayesian inference over the twin model with Dirichlet-categorical
//! conjugacy.
//!
//! Observing the plate turns per-row Dirichlet priors into per-row Dirichlet
//! posteriors by adding counts. The post-intervention marginal then follows
//! by integrating the parameters out: because every starred variable touches
//! each parameter row exactly once, the parameter integral of the predictive
//! factorizes, and the exact answer is the interventional marginal evaluated
//! at the posterior-mean tables. A Monte Carlo path and a Gibbs path (for
//! latent variables) compute the same integral by sampling.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::cpt::{check_complete, Cpt, CptError, CptSet};
use crate::data::{DataError, Dataset};
use crate::dist::{DistError, Distribution};
use crate::docalc::{interventional_marginal, DoCalcError};
use crate::graph::{CausalGraph, GraphError, Intervention};
use crate::rng::{derive_seed, sample_categorical, sample_dirichlet, seeded_rng, CrateRng};

/// Gibbs chain defaults; override through [`SensitivityConfig`] or the CLI.
pub const DEFAULT_BURN: usize = 1_000;
pub const DEFAULT_KEEP: usize = 4_000;

#[derive(Debug, Error)]
pub enum InferError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cpt(#[from] CptError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    DoCalc(#[from] DoCalcError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("observed variable `{0}` has no column in the dataset")]
    MissingColumn(String),
    #[error("row {row}: missing value in observed column `{col}`")]
    MissingValueInObservedColumn { row: usize, col: String },
    #[error("row {row}, column `{col}`: state {value} exceeds cardinality {cardinality}")]
    StateOutOfRange {
        row: usize,
        col: String,
        value: u32,
        cardinality: usize,
    },
    #[error("graph has latent nodes; use latent_posterior_predictive")]
    LatentNodePresent,
    #[error("graph has no latent nodes; use posterior_predictive")]
    NoLatentNodes,
    #[error("sample count must be positive")]
    BadSampleCount,
    #[error("query variable `{0}` is latent")]
    LatentQueryVariable(String),
    #[error("prior sensitivity needs at least two priors")]
    NotEnoughPriors,
}

/// Dirichlet posterior state: per variable, per table cell, the prior
/// pseudo-count plus the number of matching observations.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub variable: String,
    pub parents: Vec<String>,
    pub parent_cards: Vec<usize>,
    pub card: usize,
    pub prior: Vec<f64>,
    pub cells: Vec<f64>,
}

impl CountTable {
    pub fn n_rows(&self) -> usize {
        self.parent_cards.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorCounts {
    tables: BTreeMap<String, CountTable>,
}

impl PosteriorCounts {
    fn from_priors(priors: &CptSet) -> Self {
        let tables = priors
            .iter()
            .map(|(name, cpt)| {
                (
                    name.clone(),
                    CountTable {
                        variable: cpt.variable.clone(),
                        parents: cpt.parents.clone(),
                        parent_cards: cpt.parent_cards.clone(),
                        card: cpt.card,
                        prior: cpt.prior.clone(),
                        cells: cpt.prior.clone(),
                    },
                )
            })
            .collect();
        Self { tables }
    }

    pub fn tables(&self) -> &BTreeMap<String, CountTable> {
        &self.tables
    }

    pub fn get(&self, var: &str) -> Option<&CountTable> {
        self.tables.get(var)
    }
}

/// Normalize each posterior row into a point table: cell / row total.
/// Strictly positive priors guarantee nonzero totals.
pub fn posterior_mean_cpt(pc: &PosteriorCounts) -> CptSet {
    pc.tables
        .iter()
        .map(|(name, ct)| {
            let mut table = vec![0.0; ct.cells.len()];
            for row in 0..ct.n_rows() {
                let cells = &ct.cells[row * ct.card..(row + 1) * ct.card];
                let total: f64 = cells.iter().sum();
                for (j, &c) in cells.iter().enumerate() {
                    table[row * ct.card + j] = c / total;
                }
            }
            (
                name.clone(),
                Cpt {
                    variable: ct.variable.clone(),
                    parents: ct.parents.clone(),
                    parent_cards: ct.parent_cards.clone(),
                    card: ct.card,
                    prior: ct.cells.clone(),
                    table: Some(table),
                },
            )
        })
        .collect()
}

/// Add observation counts to the priors.
///
/// Every non-latent variable must have a complete column. Latent variables
/// may lack a column or hold missing entries; a row contributes to a table
/// only when the variable and all of its parents are present in that row.
pub fn fit_counts(
    g: &CausalGraph,
    data: &Dataset,
    priors: &CptSet,
) -> Result<PosteriorCounts, InferError> {
    check_complete(g, priors, false)?;
    let col_of = map_columns(g, data)?;
    validate_cells(g, data, &col_of)?;
    let mut pc = PosteriorCounts::from_priors(priors);
    let mut parent_buf = Vec::new();
    for row in data.rows() {
        for (v, name) in g.names().iter().enumerate() {
            let Some(state) = col_of[v].and_then(|c| row[c]) else {
                continue;
            };
            parent_buf.clear();
            let mut complete = true;
            for &p in g.parents_of(v) {
                match col_of[p].and_then(|c| row[c]) {
                    Some(s) => parent_buf.push(s as usize),
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if !complete {
                continue;
            }
            let ct = pc.tables.get_mut(name).expect("covers all nodes");
            let row_idx = crate::dist::index_of(&ct.parent_cards, &parent_buf);
            ct.cells[row_idx * ct.card + state as usize] += 1.0;
        }
    }
    Ok(pc)
}

fn map_columns(g: &CausalGraph, data: &Dataset) -> Result<Vec<Option<usize>>, InferError> {
    let mut col_of = Vec::with_capacity(g.len());
    for (v, name) in g.names().iter().enumerate() {
        match data.column_index(name) {
            Ok(c) => col_of.push(Some(c)),
            Err(_) if g.is_latent(v) => col_of.push(None),
            Err(_) => return Err(InferError::MissingColumn(name.clone())),
        }
    }
    Ok(col_of)
}

fn validate_cells(
    g: &CausalGraph,
    data: &Dataset,
    col_of: &[Option<usize>],
) -> Result<(), InferError> {
    for (r, row) in data.rows().iter().enumerate() {
        for (v, name) in g.names().iter().enumerate() {
            let Some(c) = col_of[v] else { continue };
            match row[c] {
                Some(value) => {
                    if value as usize >= g.cardinality(v) {
                        return Err(InferError::StateOutOfRange {
                            row: r,
                            col: name.clone(),
                            value,
                            cardinality: g.cardinality(v),
                        });
                    }
                }
                None => {
                    if !g.is_latent(v) {
                        return Err(InferError::MissingValueInObservedColumn {
                            row: r,
                            col: name.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Exact post-interventional marginal P(y* | data, do(target=value)) for
/// fully observed graphs: the parameter integral collapses to the
/// interventional marginal at the posterior-mean tables.
pub fn posterior_predictive(
    g: &CausalGraph,
    data: &Dataset,
    priors: &CptSet,
    iv: &Intervention,
    y: &str,
) -> Result<Distribution, InferError> {
    if g.has_latent() {
        return Err(InferError::LatentNodePresent);
    }
    let pc = fit_counts(g, data, priors)?;
    let means = posterior_mean_cpt(&pc);
    Ok(interventional_marginal(g, &means, iv, y)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloPredictive {
    pub distribution: Distribution,
    /// Per-state standard error of the Monte Carlo average.
    pub std_error: Vec<f64>,
    pub n_samples: usize,
}

/// The same parameter integral as [`posterior_predictive`], computed by
/// averaging the interventional marginal over posterior parameter draws.
/// Draw `s` uses the sub-seed `derive_seed(seed, s)`, so the result is
/// reproducible and independent of evaluation order.
pub fn mc_posterior_predictive(
    g: &CausalGraph,
    data: &Dataset,
    priors: &CptSet,
    iv: &Intervention,
    y: &str,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloPredictive, InferError> {
    if n_samples == 0 {
        return Err(InferError::BadSampleCount);
    }
    if g.has_latent() {
        return Err(InferError::LatentNodePresent);
    }
    let pc = fit_counts(g, data, priors)?;
    let mut moments = RunningMoments::new(g.cardinality_of(y)?);
    for s in 0..n_samples {
        let mut rng = seeded_rng(derive_seed(seed, s as u64));
        let draw = sample_parameter_tables(&pc, &mut rng);
        let dist = interventional_marginal(g, &draw, iv, y)?;
        moments.push(dist.table());
    }
    Ok(MonteCarloPredictive {
        distribution: Distribution::from_weights(
            vec![y.to_owned()],
            vec![moments.mean.len()],
            moments.mean.clone(),
        )?,
        std_error: moments.std_error(),
        n_samples,
    })
}

/// One θ draw: every table row sampled from its Dirichlet posterior.
fn sample_parameter_tables(pc: &PosteriorCounts, rng: &mut CrateRng) -> CptSet {
    pc.tables
        .iter()
        .map(|(name, ct)| {
            let mut table = vec![0.0; ct.cells.len()];
            for row in 0..ct.n_rows() {
                let alphas = &ct.cells[row * ct.card..(row + 1) * ct.card];
                sample_dirichlet(rng, alphas, &mut table[row * ct.card..(row + 1) * ct.card]);
            }
            (
                name.clone(),
                Cpt {
                    variable: ct.variable.clone(),
                    parents: ct.parents.clone(),
                    parent_cards: ct.parent_cards.clone(),
                    card: ct.card,
                    prior: ct.cells.clone(),
                    table: Some(table),
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GibbsPredictive {
    pub distribution: Distribution,
    /// Per-state standard deviation across kept parameter draws: how much
    /// the posterior itself spreads, not a Monte Carlo error bar.
    pub spread: Vec<f64>,
    pub n_burn: usize,
    pub n_kept: usize,
}

/// Posterior predictive when the graph has latent variables, by Gibbs
/// sampling: alternate imputing each row's missing values from their full
/// conditional given θ, and redrawing θ from the Dirichlet posterior of the
/// completed data. The predictive is averaged over kept θ draws.
#[allow(clippy::too_many_arguments)]
pub fn latent_posterior_predictive(
    g: &CausalGraph,
    data: &Dataset,
    priors: &CptSet,
    iv: &Intervention,
    y: &str,
    n_burn: usize,
    n_keep: usize,
    seed: u64,
) -> Result<GibbsPredictive, InferError> {
    if !g.has_latent() {
        return Err(InferError::NoLatentNodes);
    }
    if n_keep == 0 {
        return Err(InferError::BadSampleCount);
    }
    let y_id = g.node_id(y)?;
    if g.is_latent(y_id) {
        return Err(InferError::LatentQueryVariable(y.to_owned()));
    }
    iv.validate(g)?;
    check_complete(g, priors, false)?;
    let col_of = map_columns(g, data)?;
    validate_cells(g, data, &col_of)?;

    // Node-aligned observation matrix; None marks the slots to impute.
    let observed: Vec<Vec<Option<u32>>> = data
        .rows()
        .iter()
        .map(|row| {
            (0..g.len())
                .map(|v| col_of[v].and_then(|c| row[c]))
                .collect()
        })
        .collect();
    let mut completed: Vec<Vec<usize>> = observed
        .iter()
        .map(|row| row.iter().map(|v| v.unwrap_or(0) as usize).collect())
        .collect();

    let mut rng = seeded_rng(seed);
    let mut theta = sample_parameter_tables(&PosteriorCounts::from_priors(priors), &mut rng);
    let mut moments = RunningMoments::new(g.cardinality(y_id));
    // Rows sharing an observation pattern share a full conditional, so the
    // per-sweep enumeration is keyed by pattern.
    type PatternCache<'a> = BTreeMap<&'a Vec<Option<u32>>, (Vec<usize>, Vec<f64>)>;
    let mut conditional_cache: PatternCache = BTreeMap::new();
    for sweep in 0..(n_burn + n_keep) {
        conditional_cache.clear();
        for (r, pattern) in observed.iter().enumerate() {
            if pattern.iter().all(Option::is_some) {
                continue;
            }
            let (missing, probs) = conditional_cache
                .entry(pattern)
                .or_insert_with(|| missing_value_conditional(g, &theta, pattern));
            let config = sample_categorical(&mut rng, probs);
            write_config(&mut completed[r], missing, config, g);
        }
        let pc = counts_from_completed(g, priors, &completed);
        theta = sample_parameter_tables(&pc, &mut rng);
        if sweep >= n_burn {
            let dist = interventional_marginal(g, &theta, iv, y)?;
            moments.push(dist.table());
        }
    }
    Ok(GibbsPredictive {
        distribution: Distribution::from_weights(
            vec![y.to_owned()],
            vec![moments.mean.len()],
            moments.mean.clone(),
        )?,
        spread: moments.std_dev(),
        n_burn,
        n_kept: n_keep,
    })
}

/// Joint full conditional over a row's missing variables given θ and the
/// observed part: enumerate missing configurations, score each by the
/// complete-row likelihood, and return unnormalized weights.
fn missing_value_conditional(
    g: &CausalGraph,
    theta: &CptSet,
    pattern: &[Option<u32>],
) -> (Vec<usize>, Vec<f64>) {
    let missing: Vec<usize> = (0..g.len()).filter(|&v| pattern[v].is_none()).collect();
    let cards: Vec<usize> = missing.iter().map(|&v| g.cardinality(v)).collect();
    let n_configs: usize = cards.iter().product();
    let mut full = vec![0usize; g.len()];
    for (v, value) in pattern.iter().enumerate() {
        if let Some(x) = value {
            full[v] = *x as usize;
        }
    }
    let mut weights = vec![0.0; n_configs];
    let mut config_buf = vec![0usize; missing.len()];
    let mut parent_buf = Vec::new();
    for (cfg, w) in weights.iter_mut().enumerate() {
        crate::dist::decode_into(cfg, &cards, &mut config_buf);
        for (slot, &v) in config_buf.iter().zip(&missing) {
            full[v] = *slot;
        }
        let mut p = 1.0;
        for (v, name) in g.names().iter().enumerate() {
            let cpt = &theta[name];
            parent_buf.clear();
            parent_buf.extend(g.parents_of(v).iter().map(|&pid| full[pid]));
            p *= cpt.prob(full[v], &parent_buf);
        }
        *w = p;
    }
    (missing, weights)
}

fn write_config(row: &mut [usize], missing: &[usize], config: usize, g: &CausalGraph) {
    let cards: Vec<usize> = missing.iter().map(|&v| g.cardinality(v)).collect();
    let mut buf = vec![0usize; missing.len()];
    crate::dist::decode_into(config, &cards, &mut buf);
    for (&v, &s) in missing.iter().zip(&buf) {
        row[v] = s;
    }
}

fn counts_from_completed(
    g: &CausalGraph,
    priors: &CptSet,
    completed: &[Vec<usize>],
) -> PosteriorCounts {
    let mut pc = PosteriorCounts::from_priors(priors);
    let mut parent_buf = Vec::new();
    for row in completed {
        for (v, name) in g.names().iter().enumerate() {
            parent_buf.clear();
            parent_buf.extend(g.parents_of(v).iter().map(|&p| row[p]));
            let ct = pc.tables.get_mut(name).expect("covers all nodes");
            let row_idx = crate::dist::index_of(&ct.parent_cards, &parent_buf);
            ct.cells[row_idx * ct.card + row[v]] += 1.0;
        }
    }
    pc
}

#[derive(Debug, Clone)]
pub struct SensitivityConfig {
    pub n_burn: usize,
    pub n_keep: usize,
    pub seed: u64,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            n_burn: DEFAULT_BURN,
            n_keep: DEFAULT_KEEP,
            seed: 0,
        }
    }
}

/// One predictive per prior, through the conjugate path for fully observed
/// graphs and the Gibbs path otherwise. Every prior sees the same seed, so
/// differences come from the priors alone.
pub fn prior_sensitivity(
    g: &CausalGraph,
    data: &Dataset,
    priors: &[(String, CptSet)],
    iv: &Intervention,
    y: &str,
    cfg: &SensitivityConfig,
) -> Result<Vec<(String, Distribution)>, InferError> {
    if priors.len() < 2 {
        return Err(InferError::NotEnoughPriors);
    }
    priors
        .iter()
        .map(|(label, prior)| {
            let dist = if g.has_latent() {
                latent_posterior_predictive(
                    g, data, prior, iv, y, cfg.n_burn, cfg.n_keep, cfg.seed,
                )?
                .distribution
            } else {
                posterior_predictive(g, data, prior, iv, y)?
            };
            Ok((label.clone(), dist))
        })
        .collect()
}

/// Largest pairwise max-abs gap between the tables of a sensitivity result.
pub fn max_pairwise_gap(results: &[(String, Distribution)]) -> f64 {
    let mut gap: f64 = 0.0;
    for i in 0..results.len() {
        for j in (i + 1)..results.len() {
            gap = gap.max(results[i].1.max_abs_diff(&results[j].1));
        }
    }
    gap
}

struct RunningMoments {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningMoments {
    fn new(k: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; k],
            m2: vec![0.0; k],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for (i, &x) in xs.iter().enumerate() {
            let delta = x - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += delta * (x - self.mean[i]);
        }
    }

    fn std_dev(&self) -> Vec<f64> {
        if self.n < 2 {
            return vec![0.0; self.mean.len()];
        }
        self.m2
            .iter()
            .map(|&m| (m / (self.n as f64 - 1.0)).sqrt())
            .collect()
    }

    fn std_error(&self) -> Vec<f64> {
        let scale = (self.n as f64).sqrt();
        self.std_dev().into_iter().map(|s| s / scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpt::{flat_priors, CptSet};
    use crate::sim::GroundTruthModel;
    use crate::testkit::{confounder_graph, confounder_cpts, graph};

    fn m4_dataset() -> Dataset {
        Dataset::new(
            vec!["Z".into(), "T".into(), "Y".into()],
            vec![
                vec![Some(0), Some(0), Some(1)],
                vec![Some(0), Some(1), Some(1)],
                vec![Some(1), Some(1), Some(0)],
                vec![Some(1), Some(1), Some(1)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_data_leaves_counts_at_priors() {
        let g = confounder_graph();
        let priors = flat_priors(&g, 1.0).unwrap();
        let pc = fit_counts(&g, &Dataset::empty(g.names().to_vec()), &priors).unwrap();
        for ct in pc.tables().values() {
            assert_eq!(ct.cells, ct.prior);
        }
    }

    #[test]
    fn counts_match_hand_tally() {
        let g = confounder_graph();
        let priors = flat_priors(&g, 1.0).unwrap();
        let pc = fit_counts(&g, &m4_dataset(), &priors).unwrap();
        // Z column is (0, 0, 1, 1): two of each on top of the unit prior.
        assert_eq!(pc.get("Z").unwrap().cells, vec![3.0, 3.0]);
        // Y row for (Z=1, T=1) is row index 3: one Y=0 and one Y=1.
        let y = pc.get("Y").unwrap();
        assert_eq!(&y.cells[3 * 2..4 * 2], &[2.0, 2.0]);
        // Y row for (Z=0, T=1): a single Y=1 observation.
        assert_eq!(&y.cells[2..4], &[1.0, 2.0]);
        // Totals per fully observed variable: prior mass + M.
        let z = pc.get("Z").unwrap();
        let total: f64 = z.cells.iter().sum();
        let prior_total: f64 = z.prior.iter().sum();
        assert!((total - prior_total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn missing_column_and_missing_value_are_rejected() {
        let g = confounder_graph();
        let priors = flat_priors(&g, 1.0).unwrap();
        let narrow = Dataset::new(vec!["Z".into(), "T".into()], vec![]).unwrap();
        assert!(matches!(
            fit_counts(&g, &narrow, &priors),
            Err(InferError::MissingColumn(_))
        ));
        let holey = m4_dataset().hide_columns(&["Y"]).unwrap();
        assert!(matches!(
            fit_counts(&g, &holey, &priors),
            Err(InferError::MissingValueInObservedColumn { .. })
        ));
    }

    #[test]
    fn posterior_means_normalize_counts() {
        let g = confounder_graph();
        let priors = flat_priors(&g, 1.0).unwrap();
        // No data: symmetric prior means 0.5 everywhere.
        let pc = fit_counts(&g, &Dataset::empty(g.names().to_vec()), &priors).unwrap();
        let means = posterior_mean_cpt(&pc);
        assert_eq!(means["Z"].table.as_ref().unwrap(), &vec![0.5, 0.5]);
        // Z column (0, 0, 0, 1) gives counts [4, 2] -> means [2/3, 1/3].
        let single = graph(&[("Z", 2, false)], &[]);
        let zdata = Dataset::new(
            vec!["Z".into()],
            vec![vec![Some(0)], vec![Some(0)], vec![Some(0)], vec![Some(1)]],
        )
        .unwrap();
        let pc = fit_counts(&single, &zdata, &flat_priors(&single, 1.0).unwrap()).unwrap();
        let means = posterior_mean_cpt(&pc);
        let z = means["Z"].table.as_ref().unwrap();
        assert!((z[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((z[1] - 1.0 / 3.0).abs() < 1e-12);
        // Symmetric counts stay symmetric: the (Z=1, T=1) row of Y.
        let pc = fit_counts(&g, &m4_dataset(), &priors).unwrap();
        let means = posterior_mean_cpt(&pc);
        let y = means["Y"].table.as_ref().unwrap();
        assert_eq!(&y[3 * 2..4 * 2], &[0.5, 0.5]);
    }

    #[test]
    fn prior_predictive_is_symmetric() {
        let g = confounder_graph();
        let priors = flat_priors(&g, 1.0).unwrap();
        let d = posterior_predictive(
            &g,
            &Dataset::empty(g.names().to_vec()),
            &priors,
            &Intervention::new("T", 1),
            "Y",
        )
        .unwrap();
        assert!((d.prob(&[1]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn m4_predictive_matches_closed_form() {
        // Posterior means: E[Z] = [1/2, 1/2] (counts [3,3]);
        // E[Y=1 | T=1, Z=0] = 2/3 (counts [1,2]); E[Y=1 | T=1, Z=1] = 1/2.
        // Predictive: 1/2 * 2/3 + 1/2 * 1/2 = 7/12.
        let g = confounder_graph();
        let priors = flat_priors(&g, 1.0).unwrap();
        let d = posterior_predictive(&g, &m4_dataset(), &priors, &Intervention::new("T", 1), "Y")
            .unwrap();
        assert!((d.prob(&[1]) - 7.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn latent_graph_is_rejected_by_conjugate_path() {
        let g = graph(
            &[("Z", 2, true), ("T", 2, false), ("Y", 2, false)],
            &[("Z", "T"), ("Z", "Y"), ("T", "Y")],
        );
        let priors = flat_priors(&g, 1.0).unwrap();
        let data = m4_dataset().hide_columns(&["Z"]).unwrap();
        assert!(matches!(
            posterior_predictive(&g, &data, &priors, &Intervention::new("T", 1), "Y"),
            Err(InferError::LatentNodePresent)
        ));
    }

    #[test]
    fn mc_is_reproducible_and_close_to_exact() {
        let g = confounder_graph();
        let priors = flat_priors(&g, 1.0).unwrap();
        let iv = Intervention::new("T", 1);
        let a = mc_posterior_predictive(&g, &m4_dataset(), &priors, &iv, "Y", 4_000, 99).unwrap();
        let b = mc_posterior_predictive(&g, &m4_dataset(), &priors, &iv, "Y", 4_000, 99).unwrap();
        assert_eq!(a.distribution, b.distribution);
        assert_eq!(a.std_error, b.std_error);

        let exact = posterior_predictive(&g, &m4_dataset(), &priors, &iv, "Y").unwrap();
        for s in 0..2 {
            let gap = (a.distribution.prob(&[s]) - exact.prob(&[s])).abs();
            assert!(gap < 4.0 * a.std_error[s], "state {s}: gap {gap}");
        }
        assert!(matches!(
            mc_posterior_predictive(&g, &m4_dataset(), &priors, &iv, "Y", 0, 1),
            Err(InferError::BadSampleCount)
        ));
    }

    #[test]
    fn mc_prior_predictive_centers_on_half() {
        let g = confounder_graph();
        let priors = flat_priors(&g, 1.0).unwrap();
        let empty = Dataset::empty(g.names().to_vec());
        let mc = mc_posterior_predictive(
            &g,
            &empty,
            &priors,
            &Intervention::new("T", 1),
            "Y",
            20_000,
            5,
        )
        .unwrap();
        let gap = (mc.distribution.prob(&[1]) - 0.5).abs();
        assert!(gap < 3.0 * mc.std_error[1], "gap {gap}");
    }

    #[test]
    fn disconnected_latent_node_changes_nothing() {
        // H is latent and isolated; the predictive must match the
        // fully-observed answer on the rest of the graph.
        let g = graph(
            &[("H", 2, true), ("T", 2, false), ("Y", 2, false)],
            &[("T", "Y")],
        );
        let observed = graph(&[("T", 2, false), ("Y", 2, false)], &[("T", "Y")]);
        let mut cpts = CptSet::new();
        cpts.insert("T".into(), Cpt::from_rows(&observed, "T", &[vec![0.5, 0.5]]).unwrap());
        cpts.insert(
            "Y".into(),
            Cpt::from_rows(&observed, "Y", &[vec![0.7, 0.3], vec![0.2, 0.8]]).unwrap(),
        );
        let truth = GroundTruthModel::new(observed.clone(), cpts).unwrap();
        let data = truth.forward_sample(2_000, 7);

        let iv = Intervention::new("T", 1);
        let gibbs = latent_posterior_predictive(
            &g,
            &data,
            &flat_priors(&g, 1.0).unwrap(),
            &iv,
            "Y",
            200,
            800,
            13,
        )
        .unwrap();
        let exact = posterior_predictive(
            &observed,
            &data,
            &flat_priors(&observed, 1.0).unwrap(),
            &iv,
            "Y",
        )
        .unwrap();
        let gap = (gibbs.distribution.prob(&[1]) - exact.prob(&[1])).abs();
        assert!(gap < 0.02, "gap {gap}");
    }

    #[test]
    fn gibbs_with_fully_observed_latents_matches_conjugate() {
        let latent_g = graph(
            &[("Z", 2, true), ("T", 2, false), ("Y", 2, false)],
            &[("Z", "T"), ("Z", "Y"), ("T", "Y")],
        );
        let truth = GroundTruthModel::new(confounder_graph(), confounder_cpts(&confounder_graph())).unwrap();
        let data = truth.forward_sample(1_000, 21);
        let iv = Intervention::new("T", 1);
        // Nothing is actually missing, so imputation is a no-op and the chain
        // reduces to independent posterior draws.
        let gibbs = latent_posterior_predictive(
            &latent_g,
            &data,
            &flat_priors(&latent_g, 1.0).unwrap(),
            &iv,
            "Y",
            100,
            900,
            31,
        )
        .unwrap();
        let exact = posterior_predictive(
            &confounder_graph(),
            &data,
            &flat_priors(&confounder_graph(), 1.0).unwrap(),
            &iv,
            "Y",
        )
        .unwrap();
        let gap = (gibbs.distribution.prob(&[1]) - exact.prob(&[1])).abs();
        assert!(gap < 0.01, "gap {gap}");
    }

    #[test]
    fn unconfounded_latent_recovers_observational_conditional() {
        // Z influences nothing but itself and is hidden; data generated with
        // Z independent of T, so do(T=1) matches observing T=1.
        let g = graph(
            &[("Z", 2, true), ("T", 2, false), ("Y", 2, false)],
            &[("T", "Y")],
        );
        let mut cpts = CptSet::new();
        cpts.insert("Z".into(), Cpt::from_rows(&g, "Z", &[vec![0.6, 0.4]]).unwrap());
        cpts.insert("T".into(), Cpt::from_rows(&g, "T", &[vec![0.5, 0.5]]).unwrap());
        cpts.insert(
            "Y".into(),
            Cpt::from_rows(&g, "Y", &[vec![0.7, 0.3], vec![0.25, 0.75]]).unwrap(),
        );
        let truth = GroundTruthModel::new(g.clone(), cpts).unwrap();
        let data = truth.forward_sample(4_000, 41).hide_columns(&["Z"]).unwrap();
        let gibbs = latent_posterior_predictive(
            &g,
            &data,
            &flat_priors(&g, 1.0).unwrap(),
            &Intervention::new("T", 1),
            "Y",
            200,
            800,
            43,
        )
        .unwrap();
        // Enumeration oracle on the generating model: P(Y=1 | T=1) = 0.75.
        let gap = (gibbs.distribution.prob(&[1]) - 0.75).abs();
        assert!(gap < 0.03, "gap {gap}");
    }

    #[test]
    fn gibbs_guards_its_preconditions() {
        let g = confounder_graph();
        let priors = flat_priors(&g, 1.0).unwrap();
        assert!(matches!(
            latent_posterior_predictive(
                &g,
                &m4_dataset(),
                &priors,
                &Intervention::new("T", 1),
                "Y",
                10,
                10,
                1
            ),
            Err(InferError::NoLatentNodes)
        ));
        let latent_g = graph(
            &[("Z", 2, true), ("T", 2, false), ("Y", 2, false)],
            &[("Z", "T"), ("Z", "Y"), ("T", "Y")],
        );
        let latent_priors = flat_priors(&latent_g, 1.0).unwrap();
        let data = m4_dataset().hide_columns(&["Z"]).unwrap();
        assert!(matches!(
            latent_posterior_predictive(
                &latent_g,
                &data,
                &latent_priors,
                &Intervention::new("T", 1),
                "Z",
                10,
                10,
                1
            ),
            Err(InferError::LatentQueryVariable(_))
        ));
    }

    #[test]
    fn sensitivity_runs_each_prior_and_duplicates_agree() {
        let g = confounder_graph();
        let flat = flat_priors(&g, 1.0).unwrap();
        let heavy = flat_priors(&g, 10.0).unwrap();
        let priors = vec![
            ("flat".to_owned(), flat.clone()),
            ("flat_again".to_owned(), flat),
            ("heavy".to_owned(), heavy),
        ];
        let out = prior_sensitivity(
            &g,
            &m4_dataset(),
            &priors,
            &Intervention::new("T", 1),
            "Y",
            &SensitivityConfig::default(),
        )
        .unwrap();
        assert_eq!(out[0].1, out[1].1);
        assert!(max_pairwise_gap(&out) > 0.0);
        assert!(matches!(
            prior_sensitivity(
                &g,
                &m4_dataset(),
                &priors[..1],
                &Intervention::new("T", 1),
                "Y",
                &SensitivityConfig::default(),
            ),
            Err(InferError::NotEnoughPriors)
        ));
    }
}
