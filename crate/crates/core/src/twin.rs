//! Joint pre/post-intervention model construction.
//!
//! Given a causal graph and an atomic intervention `do(T=t)`, the twin model
//! places the original graph inside an i.i.d. plate, adds one parameter node
//! per variable feeding its conditional table, copies the graph with all
//! edges into `T` removed for the post-intervention world (starred names),
//! and shares every parameter across the two worlds except the target's.
//! Holding all other mechanisms invariant is exactly what licenses reading
//! the starred marginals as interventional quantities.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CausalGraph, GraphError, Intervention};

/// Suffix appended to a variable name for its post-intervention copy.
/// `valid_name` guarantees user names can never collide with these.
pub const STAR: &str = "*";

pub fn starred(name: &str) -> String {
    format!("{name}{STAR}")
}

pub fn param_name(name: &str) -> String {
    format!("theta({name})")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwinError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid twin model: {0}")]
    InvalidTwin(String),
}

/// The joint model over observed data, parameters, and the post-intervention
/// world. Plain data, serializable, and checkable after hand edits.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TwinPgm {
    /// Variables inside the data plate, one conceptual copy per observation.
    pub pre_nodes: Vec<String>,
    /// Starred post-intervention copies, including the clamped target.
    pub post_nodes: Vec<String>,
    /// One parameter node per original variable.
    pub param_nodes: Vec<String>,
    /// Original-graph edges among the plate variables.
    pub pre_edges: Vec<(String, String)>,
    /// Mutilated-graph edges among the starred copies.
    pub post_edges: Vec<(String, String)>,
    /// Parameter-to-variable edges for both worlds.
    pub param_edges: Vec<(String, String)>,
    pub intervention: Intervention,
}

impl TwinPgm {
    /// All edges of the combined model: plate, starred, and parameter links.
    pub fn edges(&self) -> impl Iterator<Item = &(String, String)> {
        self.pre_edges
            .iter()
            .chain(&self.post_edges)
            .chain(&self.param_edges)
    }
}

/// Build the twin model for `do(target = value)`.
///
/// Construction: draw the original graph in a plate; attach a parameter node
/// to every variable; copy the graph with all edges into the target removed,
/// renaming each variable `X` to `X*`; link each parameter to its starred
/// copy for every variable except the target. The target's starred copy is a
/// clamped constant with no parents.
pub fn causal_bayes_construct(g: &CausalGraph, iv: &Intervention) -> Result<TwinPgm, GraphError> {
    let target = iv.validate(g)?;
    let pre_nodes: Vec<String> = g.names().to_vec();
    let post_nodes: Vec<String> = g.names().iter().map(|n| starred(n)).collect();
    let param_nodes: Vec<String> = g.names().iter().map(|n| param_name(n)).collect();

    let pre_edges: Vec<(String, String)> = g
        .edges()
        .map(|(p, c)| (g.name(p).to_owned(), g.name(c).to_owned()))
        .collect();
    let mutilated = g.mutilate_incoming(&iv.target)?;
    let post_edges: Vec<(String, String)> = mutilated
        .edges()
        .map(|(p, c)| (starred(mutilated.name(p)), starred(mutilated.name(c))))
        .collect();

    let mut param_edges: Vec<(String, String)> = Vec::with_capacity(2 * g.len());
    for name in g.names() {
        param_edges.push((param_name(name), name.clone()));
    }
    for (i, name) in g.names().iter().enumerate() {
        if i != target {
            param_edges.push((param_name(name), starred(name)));
        }
    }

    Ok(TwinPgm {
        pre_nodes,
        post_nodes,
        param_nodes,
        pre_edges,
        post_edges,
        param_edges,
        intervention: iv.clone(),
    })
}

/// A violated structural invariant of a twin model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TwinViolation {
    NameCollision(String),
    WrongPostNodes { missing: Vec<String>, extra: Vec<String> },
    WrongParamNodes { missing: Vec<String>, extra: Vec<String> },
    PostGraphNotMutilated { missing: Vec<String>, extra: Vec<String> },
    ClampedTargetHasParent(String),
    ParamSharingIncludesTarget,
    ParamSharingBroken { missing: Vec<String>, extra: Vec<String> },
    EdgeEndpointUnknown(String),
    CombinedGraphCyclic,
    TargetMissing(String),
}

impl fmt::Display for TwinViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NameCollision(n) => write!(f, "name `{n}` appears in more than one node group"),
            Self::WrongPostNodes { missing, extra } => {
                write!(f, "post nodes are not the starred copies (missing {missing:?}, extra {extra:?})")
            }
            Self::WrongParamNodes { missing, extra } => {
                write!(f, "parameter nodes do not cover the variables (missing {missing:?}, extra {extra:?})")
            }
            Self::PostGraphNotMutilated { missing, extra } => {
                write!(f, "post graph not mutilated (missing {missing:?}, extra {extra:?})")
            }
            Self::ClampedTargetHasParent(e) => {
                write!(f, "clamped target has incoming edge {e}")
            }
            Self::ParamSharingIncludesTarget => {
                write!(f, "parameter sharing includes target")
            }
            Self::ParamSharingBroken { missing, extra } => {
                write!(f, "parameter links wrong (missing {missing:?}, extra {extra:?})")
            }
            Self::EdgeEndpointUnknown(e) => write!(f, "edge endpoint not a declared node: {e}"),
            Self::CombinedGraphCyclic => write!(f, "combined twin graph has a directed cycle"),
            Self::TargetMissing(t) => write!(f, "intervention target `{t}` is not a plate node"),
        }
    }
}

/// Outcome of [`validate_twin`]: empty means every invariant holds.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct TwinReport {
    pub violations: Vec<TwinViolation>,
}

impl TwinReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for TwinReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "twin model valid")
        } else {
            for v in &self.violations {
                writeln!(f, "violation: {v}")?;
            }
            Ok(())
        }
    }
}

fn diff_sets(expected: &BTreeSet<String>, actual: &BTreeSet<String>) -> (Vec<String>, Vec<String>) {
    let missing = expected.difference(actual).cloned().collect();
    let extra = actual.difference(expected).cloned().collect();
    (missing, extra)
}

fn edge_label(e: &(String, String)) -> String {
    format!("{} -> {}", e.0, e.1)
}

/// Check every structural invariant of a twin model, reporting all
/// violations instead of stopping at the first.
pub fn validate_twin(tw: &TwinPgm) -> TwinReport {
    let mut violations = Vec::new();

    // Node groups must be disjoint.
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for n in tw
        .pre_nodes
        .iter()
        .chain(&tw.post_nodes)
        .chain(&tw.param_nodes)
    {
        *seen.entry(n.as_str()).or_insert(0) += 1;
    }
    for (n, count) in &seen {
        if *count > 1 {
            violations.push(TwinViolation::NameCollision((*n).to_owned()));
        }
    }

    let target = tw.intervention.target.as_str();
    if !tw.pre_nodes.iter().any(|n| n == target) {
        violations.push(TwinViolation::TargetMissing(target.to_owned()));
        return TwinReport { violations };
    }
    let star_target = starred(target);

    // Post nodes are exactly the starred plate nodes.
    let expected_post: BTreeSet<String> = tw.pre_nodes.iter().map(|n| starred(n)).collect();
    let actual_post: BTreeSet<String> = tw.post_nodes.iter().cloned().collect();
    if expected_post != actual_post {
        let (missing, extra) = diff_sets(&expected_post, &actual_post);
        violations.push(TwinViolation::WrongPostNodes { missing, extra });
    }

    // One parameter node per plate node.
    let expected_params: BTreeSet<String> = tw.pre_nodes.iter().map(|n| param_name(n)).collect();
    let actual_params: BTreeSet<String> = tw.param_nodes.iter().cloned().collect();
    if expected_params != actual_params {
        let (missing, extra) = diff_sets(&expected_params, &actual_params);
        violations.push(TwinViolation::WrongParamNodes { missing, extra });
    }

    // Post edges are exactly the pre edges minus those into the target,
    // renamed to starred form.
    let expected_post_edges: BTreeSet<(String, String)> = tw
        .pre_edges
        .iter()
        .filter(|(_, child)| child != target)
        .map(|(p, c)| (starred(p), starred(c)))
        .collect();
    let actual_post_edges: BTreeSet<(String, String)> = tw.post_edges.iter().cloned().collect();
    if expected_post_edges != actual_post_edges {
        let missing = expected_post_edges
            .difference(&actual_post_edges)
            .map(edge_label)
            .collect();
        let extra = actual_post_edges
            .difference(&expected_post_edges)
            .map(edge_label)
            .collect();
        violations.push(TwinViolation::PostGraphNotMutilated { missing, extra });
    }
    for e in &tw.post_edges {
        if e.1 == star_target {
            violations.push(TwinViolation::ClampedTargetHasParent(edge_label(e)));
        }
    }

    // Parameter links: theta(V) -> V for all V, theta(V) -> V* for V != T.
    let mut expected_links: BTreeSet<(String, String)> = tw
        .pre_nodes
        .iter()
        .map(|n| (param_name(n), n.clone()))
        .collect();
    for n in &tw.pre_nodes {
        if n != target {
            expected_links.insert((param_name(n), starred(n)));
        }
    }
    let actual_links: BTreeSet<(String, String)> = tw.param_edges.iter().cloned().collect();
    if actual_links.contains(&(param_name(target), star_target.clone())) {
        violations.push(TwinViolation::ParamSharingIncludesTarget);
    }
    if expected_links != actual_links {
        let missing: Vec<String> = expected_links
            .difference(&actual_links)
            .map(edge_label)
            .collect();
        // The target link is already reported above; don't double-count it.
        let extra: Vec<String> = actual_links
            .difference(&expected_links)
            .filter(|e| !(e.0 == param_name(target) && e.1 == star_target))
            .map(edge_label)
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            violations.push(TwinViolation::ParamSharingBroken { missing, extra });
        }
    }

    // All edges must reference declared nodes, and the combined graph must
    // stay acyclic.
    let names: BTreeSet<&str> = tw
        .pre_nodes
        .iter()
        .chain(&tw.post_nodes)
        .chain(&tw.param_nodes)
        .map(String::as_str)
        .collect();
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        ids.insert(n, i);
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); names.len()];
    let mut endpoints_ok = true;
    for e in tw.edges() {
        match (ids.get(e.0.as_str()), ids.get(e.1.as_str())) {
            (Some(&a), Some(&b)) => adjacency[a].push(b),
            _ => {
                violations.push(TwinViolation::EdgeEndpointUnknown(edge_label(e)));
                endpoints_ok = false;
            }
        }
    }
    if endpoints_ok && has_cycle(&adjacency) {
        violations.push(TwinViolation::CombinedGraphCyclic);
    }

    TwinReport { violations }
}

fn has_cycle(adjacency: &[Vec<usize>]) -> bool {
    let n = adjacency.len();
    let mut indegree = vec![0usize; n];
    for targets in adjacency {
        for &t in targets {
            indegree[t] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut done = 0;
    while let Some(v) = stack.pop() {
        done += 1;
        for &t in &adjacency[v] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                stack.push(t);
            }
        }
    }
    done != n
}

/// One multiplicative term of the twin model's joint density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SymbolicFactor {
    /// Prior over one parameter node.
    Prior { param: String },
    /// Plate likelihood term P(V | parents(V), theta(V)).
    Pre {
        var: String,
        given: Vec<String>,
        param: String,
    },
    /// Post-intervention term P(V* | parents(V*), theta(V)); the clamped
    /// target enters as a constant parent where it appears.
    Post {
        var: String,
        given: Vec<String>,
        clamped: Option<(String, usize)>,
        param: String,
    },
}

impl fmt::Display for SymbolicFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Prior { param } => write!(f, "P({param})"),
            Self::Pre { var, given, param } => {
                write!(f, "P({var} | ")?;
                for g in given {
                    write!(f, "{g}, ")?;
                }
                write!(f, "{param})")
            }
            Self::Post {
                var,
                given,
                clamped,
                param,
            } => {
                write!(f, "P({var} | ")?;
                for g in given {
                    write!(f, "{g}, ")?;
                }
                if let Some((t, v)) = clamped {
                    write!(f, "{t}={v}, ")?;
                }
                write!(f, "{param})")
            }
        }
    }
}

/// The ordered joint factorization: parameter priors, then one likelihood
/// term per plate variable, then one predictive term per starred variable
/// except the clamped target. The product of the three groups is the joint
/// density of (parameters, plate data, post-intervention world).
pub fn factorization(tw: &TwinPgm) -> Result<Vec<SymbolicFactor>, TwinError> {
    let report = validate_twin(tw);
    if !report.is_valid() {
        return Err(TwinError::InvalidTwin(report.to_string()));
    }
    let target = tw.intervention.target.as_str();
    let star_target = starred(target);
    let mut factors = Vec::new();
    for p in &tw.param_nodes {
        factors.push(SymbolicFactor::Prior { param: p.clone() });
    }
    for v in &tw.pre_nodes {
        let given: Vec<String> = tw
            .pre_edges
            .iter()
            .filter(|(_, child)| child == v)
            .map(|(parent, _)| parent.clone())
            .collect();
        factors.push(SymbolicFactor::Pre {
            var: v.clone(),
            given,
            param: param_name(v),
        });
    }
    for (v, v_star) in tw.pre_nodes.iter().zip(&tw.post_nodes) {
        if v == target {
            continue; // clamped constant, contributes no factor
        }
        let mut given = Vec::new();
        let mut clamped = None;
        for (parent, child) in &tw.post_edges {
            if child == v_star {
                if *parent == star_target {
                    clamped = Some((parent.clone(), tw.intervention.value));
                } else {
                    given.push(parent.clone());
                }
            }
        }
        factors.push(SymbolicFactor::Post {
            var: v_star.clone(),
            given,
            clamped,
            param: param_name(v),
        });
    }
    Ok(factors)
}

/// Graphviz rendering: the plate as a cluster, parameter nodes dashed,
/// clamped target labelled with its value. Output is byte-stable.
pub fn export_dot(tw: &TwinPgm) -> String {
    let star_target = starred(&tw.intervention.target);
    let mut out = String::new();
    out.push_str("digraph twin {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle, fontsize=11];\n");
    out.push_str("  subgraph cluster_plate {\n");
    out.push_str("    label=\"m=1..M\";\n    style=rounded;\n");
    for n in &tw.pre_nodes {
        out.push_str(&format!(
            "    \"{n}\" [style=filled, fillcolor=gray85];\n"
        ));
    }
    out.push_str("  }\n");
    for p in &tw.param_nodes {
        out.push_str(&format!("  \"{p}\" [shape=ellipse, style=dashed];\n"));
    }
    for n in &tw.post_nodes {
        if *n == star_target {
            out.push_str(&format!(
                "  \"{n}\" [label=\"{n}={}\", style=filled, fillcolor=gray85];\n",
                tw.intervention.value
            ));
        } else {
            out.push_str(&format!("  \"{n}\";\n"));
        }
    }
    for (a, b) in tw.edges() {
        out.push_str(&format!("  \"{a}\" -> \"{b}\";\n"));
    }
    out.push_str("}\n");
    out
}
