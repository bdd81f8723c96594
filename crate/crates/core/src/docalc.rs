//! Do-calculus rules as d-separation checks on mutilated graphs, and the
//! truncated-product evaluator for ground-truth interventional quantities.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpt::{check_complete, CptError, CptSet};
use crate::dist::{decode_into, DistError, Distribution};
use crate::graph::{CausalGraph, GraphError, Intervention};

/// Exact enumeration refuses joints beyond this many configurations.
pub const ENUM_LIMIT: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum DoCalcError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cpt(#[from] CptError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("joint over {configs} configurations exceeds the exact limit of {limit}")]
    TooLarge { configs: usize, limit: usize },
    #[error("query variable `{0}` is the intervention target")]
    QueryIsTarget(String),
}

/// A single-intervention identification query: is some P(y | do(t), z [, w])
/// rewritable by one of the three rules?
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RuleQuery {
    pub y: Vec<String>,
    pub t: String,
    #[serde(default)]
    pub z: Vec<String>,
    #[serde(default)]
    pub w: Vec<String>,
}

impl RuleQuery {
    fn validate(&self, g: &CausalGraph) -> Result<(), GraphError> {
        let y = g.resolve_set(&as_strs(&self.y))?;
        let t = vec![g.node_id(&self.t)?];
        let z = g.resolve_set(&as_strs(&self.z))?;
        let w = g.resolve_set(&as_strs(&self.w))?;
        g.check_disjoint(&[&y, &t, &z, &w])
    }
}

fn as_strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Rule 1 (insertion/deletion of observations):
/// P(y | do(t), z, w) = P(y | do(t), z) holds when Y and W are d-separated
/// by Z together with T in the graph with edges into T removed.
///
/// With an empty `w` the identity is vacuous and this returns true.
pub fn rule1_applies(g: &CausalGraph, q: &RuleQuery) -> Result<bool, GraphError> {
    q.validate(g)?;
    let gin = g.mutilate_incoming(&q.t)?;
    let mut cond = as_strs(&q.z);
    cond.push(&q.t);
    gin.d_separated(&as_strs(&q.y), &as_strs(&q.w), &cond)
}

/// Rule 2 (action/observation exchange):
/// P(y | do(t), z) = P(y | t, z) holds when Y and T are d-separated by Z in
/// the graph with edges out of T removed.
pub fn rule2_applies(g: &CausalGraph, q: &RuleQuery) -> Result<bool, GraphError> {
    q.validate(g)?;
    let gout = g.mutilate_outgoing(&q.t)?;
    gout.d_separated(&as_strs(&q.y), &[&q.t], &as_strs(&q.z))
}

/// Rule 3 (insertion/deletion of actions):
/// P(y | do(t), z) = P(y | z) holds when Y and T are d-separated by Z in the
/// graph with edges into T removed, and no member of Z descends from T.
pub fn rule3_applies(g: &CausalGraph, q: &RuleQuery) -> Result<bool, GraphError> {
    q.validate(g)?;
    let gin = g.mutilate_incoming(&q.t)?;
    if !gin.d_separated(&as_strs(&q.y), &[&q.t], &as_strs(&q.z))? {
        return Ok(false);
    }
    let t = g.node_id(&q.t)?;
    let descendants = g.descendant_ids(t);
    for name in &q.z {
        let id = g.node_id(name)?;
        if descendants.contains(&id) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact joint distribution over all graph variables by enumeration.
pub fn joint_distribution(g: &CausalGraph, cpts: &CptSet) -> Result<Distribution, DoCalcError> {
    check_complete(g, cpts, true)?;
    let cards: Vec<usize> = (0..g.len()).map(|i| g.cardinality(i)).collect();
    let configs: usize = cards.iter().product();
    if configs > ENUM_LIMIT {
        return Err(DoCalcError::TooLarge {
            configs,
            limit: ENUM_LIMIT,
        });
    }
    let mut weights = vec![0.0; configs];
    let mut assignment = vec![0usize; g.len()];
    let mut parent_buf = Vec::new();
    for (idx, w) in weights.iter_mut().enumerate() {
        decode_into(idx, &cards, &mut assignment);
        let mut p = 1.0;
        for (v, name) in g.names().iter().enumerate() {
            let cpt = &cpts[name];
            parent_buf.clear();
            parent_buf.extend(g.parents_of(v).iter().map(|&pid| assignment[pid]));
            p *= cpt.prob(assignment[v], &parent_buf);
        }
        *w = p;
    }
    Ok(Distribution::from_weights(
        g.names().to_vec(),
        cards,
        weights,
    )?)
}

/// Post-interventional joint over every variable except the target: the
/// product of all conditional tables except the target's, with the target
/// fixed to the intervention value wherever it appears as a parent.
pub fn truncated_product(
    g: &CausalGraph,
    cpts: &CptSet,
    iv: &Intervention,
) -> Result<Distribution, DoCalcError> {
    let target = iv.validate(g)?;
    check_complete(g, cpts, true)?;
    let scope_ids: Vec<usize> = (0..g.len()).filter(|&i| i != target).collect();
    let scope: Vec<String> = scope_ids.iter().map(|&i| g.name(i).to_owned()).collect();
    let cards: Vec<usize> = scope_ids.iter().map(|&i| g.cardinality(i)).collect();
    let configs: usize = cards.iter().product();
    if configs > ENUM_LIMIT {
        return Err(DoCalcError::TooLarge {
            configs,
            limit: ENUM_LIMIT,
        });
    }
    let mut weights = vec![0.0; configs];
    let mut scope_assignment = vec![0usize; scope_ids.len()];
    let mut full = vec![0usize; g.len()];
    full[target] = iv.value;
    let mut parent_buf = Vec::new();
    for (idx, w) in weights.iter_mut().enumerate() {
        decode_into(idx, &cards, &mut scope_assignment);
        for (pos, &id) in scope_ids.iter().enumerate() {
            full[id] = scope_assignment[pos];
        }
        let mut p = 1.0;
        for &v in &scope_ids {
            let cpt = &cpts[g.name(v)];
            parent_buf.clear();
            parent_buf.extend(g.parents_of(v).iter().map(|&pid| full[pid]));
            p *= cpt.prob(full[v], &parent_buf);
        }
        *w = p;
    }
    Ok(Distribution::from_weights(scope, cards, weights)?)
}

/// Marginal P(y | do(target = value)) computed by factor elimination rather
/// than by materializing the full truncated joint.
pub fn interventional_marginal(
    g: &CausalGraph,
    cpts: &CptSet,
    iv: &Intervention,
    y: &str,
) -> Result<Distribution, DoCalcError> {
    let target = iv.validate(g)?;
    let y_id = g.node_id(y)?;
    if y_id == target {
        return Err(DoCalcError::QueryIsTarget(y.to_owned()));
    }
    check_complete(g, cpts, true)?;

    let mut factors: Vec<Factor> = Vec::with_capacity(g.len() - 1);
    for v in 0..g.len() {
        if v == target {
            continue;
        }
        factors.push(Factor::from_cpt(g, cpts, v, target, iv.value));
    }
    // Eliminate in reverse topological order; any order is exact, this one
    // keeps intermediate factors small for ancestral queries.
    for &v in g.topological_ids().iter().rev() {
        if v == y_id || v == target {
            continue;
        }
        let (mut touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = rest;
        if touching.is_empty() {
            continue;
        }
        let mut product = touching.pop().expect("nonempty");
        for f in touching {
            product = product.multiply(&f);
        }
        factors.push(product.sum_out(v));
    }
    let mut result = Factor::unit();
    for f in factors {
        result = result.multiply(&f);
    }
    debug_assert_eq!(result.vars, vec![y_id]);
    Ok(Distribution::from_weights(
        vec![y.to_owned()],
        result.cards.clone(),
        result.data,
    )?)
}

/// A nonnegative table over a sorted set of node ids.
struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    data: Vec<f64>,
}

impl Factor {
    fn unit() -> Self {
        Factor {
            vars: Vec::new(),
            cards: Vec::new(),
            data: vec![1.0],
        }
    }

    /// The CPT of `v` as a factor over `v` and its parents, with the
    /// intervention target fixed to `t_value` where it appears as a parent.
    fn from_cpt(g: &CausalGraph, cpts: &CptSet, v: usize, target: usize, t_value: usize) -> Self {
        let cpt = &cpts[g.name(v)];
        let mut vars: Vec<usize> = g
            .parents_of(v)
            .iter()
            .copied()
            .filter(|&p| p != target)
            .collect();
        vars.push(v);
        vars.sort_unstable();
        let cards: Vec<usize> = vars.iter().map(|&id| g.cardinality(id)).collect();
        let mut data = vec![0.0; cards.iter().product()];
        let mut assignment = vec![0usize; vars.len()];
        let mut parent_buf = Vec::with_capacity(g.parents_of(v).len());
        for (idx, cell) in data.iter_mut().enumerate() {
            decode_into(idx, &cards, &mut assignment);
            let lookup = |id: usize| {
                if id == target {
                    t_value
                } else {
                    assignment[vars.iter().position(|&x| x == id).expect("in scope")]
                }
            };
            parent_buf.clear();
            parent_buf.extend(g.parents_of(v).iter().map(|&p| lookup(p)));
            *cell = cpt.prob(lookup(v), &parent_buf);
        }
        Factor { vars, cards, data }
    }

    fn multiply(&self, other: &Factor) -> Factor {
        let mut vars: Vec<usize> = self.vars.clone();
        for &v in &other.vars {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        vars.sort_unstable();
        let pos_a: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|x| x == v).expect("subset"))
            .collect();
        let pos_b: Vec<usize> = other
            .vars
            .iter()
            .map(|v| vars.iter().position(|x| x == v).expect("subset"))
            .collect();
        let cards: Vec<usize> = vars
            .iter()
            .map(|v| {
                if let Some(i) = self.vars.iter().position(|x| x == v) {
                    self.cards[i]
                } else {
                    let i = other.vars.iter().position(|x| x == v).expect("subset");
                    other.cards[i]
                }
            })
            .collect();
        let mut data = vec![0.0; cards.iter().product()];
        let mut assignment = vec![0usize; vars.len()];
        let mut a_buf = vec![0usize; self.vars.len()];
        let mut b_buf = vec![0usize; other.vars.len()];
        for (idx, cell) in data.iter_mut().enumerate() {
            decode_into(idx, &cards, &mut assignment);
            for (slot, &p) in a_buf.iter_mut().zip(&pos_a) {
                *slot = assignment[p];
            }
            for (slot, &p) in b_buf.iter_mut().zip(&pos_b) {
                *slot = assignment[p];
            }
            *cell = self.at(&a_buf) * other.at(&b_buf);
        }
        Factor { vars, cards, data }
    }

    fn sum_out(&self, var: usize) -> Factor {
        let pos = self
            .vars
            .iter()
            .position(|&v| v == var)
            .expect("var in factor");
        let vars: Vec<usize> = self
            .vars
            .iter()
            .copied()
            .filter(|&v| v != var)
            .collect();
        let cards: Vec<usize> = self
            .cards
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .map(|(_, &c)| c)
            .collect();
        let mut data = vec![0.0; cards.iter().product::<usize>().max(1)];
        let mut assignment = vec![0usize; self.vars.len()];
        let mut out_buf = vec![0usize; vars.len()];
        for (idx, &p) in self.data.iter().enumerate() {
            decode_into(idx, &self.cards, &mut assignment);
            let mut k = 0;
            for (i, &s) in assignment.iter().enumerate() {
                if i != pos {
                    out_buf[k] = s;
                    k += 1;
                }
            }
            data[crate::dist::index_of(&cards, &out_buf)] += p;
        }
        Factor { vars, cards, data }
    }

    fn at(&self, assignment: &[usize]) -> f64 {
        self.data[crate::dist::index_of(&self.cards, assignment)]
    }
}
