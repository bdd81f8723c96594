//! Directed acyclic graphs over named discrete variables, plus the graph
//! surgery and d-separation queries everything else is built on.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Node names must be plain identifiers. This keeps the `*` suffix used for
/// post-intervention copies and the `theta(..)` parameter names collision-free,
/// and keeps CSV headers and DOT ids unquoted-safe.
pub fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("directed cycle: {0}")]
    Cycle(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{node}` has cardinality {cardinality}; discrete variables need at least 2 states")]
    BadCardinality { node: String, cardinality: usize },
    #[error("invalid node name `{0}` (expected an identifier: [A-Za-z_][A-Za-z0-9_]*)")]
    InvalidName(String),
    #[error("node `{0}` declared more than once")]
    DuplicateNode(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("node sets must be pairwise disjoint; `{0}` appears twice")]
    OverlappingSets(String),
    #[error("cannot intervene on latent node `{0}`")]
    LatentTarget(String),
    #[error("state {value} out of range for `{node}` (cardinality {cardinality})")]
    StateOutOfRange {
        node: String,
        value: usize,
        cardinality: usize,
    },
}

/// On-disk graph description. Unknown fields are rejected.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub name: String,
    pub cardinality: usize,
    #[serde(default, skip_serializing_if = "is_false")]
    pub latent: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl GraphSpec {
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    /// Collect every violation instead of stopping at the first, so a
    /// validation report can show them all.
    pub fn problems(&self) -> Vec<GraphError> {
        let mut errs = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if !valid_name(&node.name) {
                errs.push(GraphError::InvalidName(node.name.clone()));
            }
            if index.insert(node.name.as_str(), i).is_some() {
                errs.push(GraphError::DuplicateNode(node.name.clone()));
            }
            if node.cardinality < 2 {
                errs.push(GraphError::BadCardinality {
                    node: node.name.clone(),
                    cardinality: node.cardinality,
                });
            }
        }
        let mut seen = std::collections::HashSet::new();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for (parent, child) in &self.edges {
            let p = index.get(parent.as_str()).copied();
            let c = index.get(child.as_str()).copied();
            if p.is_none() {
                errs.push(GraphError::UnknownNode(parent.clone()));
            }
            if c.is_none() {
                errs.push(GraphError::UnknownNode(child.clone()));
            }
            if parent == child {
                errs.push(GraphError::SelfLoop(parent.clone()));
                continue;
            }
            if !seen.insert((parent.as_str(), child.as_str())) {
                errs.push(GraphError::DuplicateEdge(parent.clone(), child.clone()));
                continue;
            }
            if let (Some(p), Some(c)) = (p, c) {
                adjacency[p].push(c);
            }
        }
        if let Some(cycle) = find_cycle(&adjacency) {
            let path = cycle
                .iter()
                .map(|&i| self.nodes[i].name.as_str())
                .collect::<Vec<_>>()
                .join(" -> ");
            errs.push(GraphError::Cycle(path));
        }
        errs
    }
}

/// Returns a cycle as a node-index path `v0 .. vk v0`, if one exists.
fn find_cycle(adjacency: &[Vec<usize>]) -> Option<Vec<usize>> {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let n = adjacency.len();
    let mut color = vec![WHITE; n];
    let mut parent = vec![usize::MAX; n];

    fn dfs(
        v: usize,
        adjacency: &[Vec<usize>],
        color: &mut [u8],
        parent: &mut [usize],
    ) -> Option<(usize, usize)> {
        color[v] = GRAY;
        for &c in &adjacency[v] {
            if color[c] == GRAY {
                return Some((v, c));
            }
            if color[c] == WHITE {
                parent[c] = v;
                if let Some(found) = dfs(c, adjacency, color, parent) {
                    return Some(found);
                }
            }
        }
        color[v] = BLACK;
        None
    }

    for start in 0..n {
        if color[start] == WHITE {
            if let Some((tail, head)) = dfs(start, adjacency, &mut color, &mut parent) {
                // Walk back from tail to head to recover the cycle.
                let mut path = vec![tail];
                let mut v = tail;
                while v != head {
                    v = parent[v];
                    path.push(v);
                }
                path.reverse();
                path.push(head);
                return Some(path);
            }
        }
    }
    None
}

/// A validated DAG over named discrete variables.
///
/// Immutable after construction; the mutilation operators return new graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalGraph {
    names: Vec<String>,
    cards: Vec<usize>,
    latent: Vec<bool>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
}

impl CausalGraph {
    /// Validate a spec and build the graph. Node order is preserved.
    pub fn build(spec: &GraphSpec) -> Result<Self, GraphError> {
        if let Some(err) = spec.problems().into_iter().next() {
            return Err(err);
        }
        let n = spec.nodes.len();
        let mut index = HashMap::with_capacity(n);
        for (i, node) in spec.nodes.iter().enumerate() {
            index.insert(node.name.clone(), i);
        }
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (parent, child) in &spec.edges {
            let p = index[parent.as_str()];
            let c = index[child.as_str()];
            parents[c].push(p);
            children[p].push(c);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        Ok(Self {
            names: spec.nodes.iter().map(|s| s.name.clone()).collect(),
            cards: spec.nodes.iter().map(|s| s.cardinality).collect(),
            latent: spec.nodes.iter().map(|s| s.latent).collect(),
            parents,
            children,
            index,
        })
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            nodes: (0..self.len())
                .map(|i| NodeSpec {
                    name: self.names[i].clone(),
                    cardinality: self.cards[i],
                    latent: self.latent[i],
                })
                .collect(),
            edges: self
                .edges()
                .map(|(p, c)| (self.names[p].clone(), self.names[c].clone()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn node_id(&self, name: &str) -> Result<usize, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_owned()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn cardinality(&self, id: usize) -> usize {
        self.cards[id]
    }

    pub fn cardinality_of(&self, name: &str) -> Result<usize, GraphError> {
        Ok(self.cards[self.node_id(name)?])
    }

    pub fn is_latent(&self, id: usize) -> bool {
        self.latent[id]
    }

    pub fn latent_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.latent[i]).collect()
    }

    pub fn has_latent(&self) -> bool {
        self.latent.iter().any(|&l| l)
    }

    pub fn parents_of(&self, id: usize) -> &[usize] {
        &self.parents[id]
    }

    pub fn children_of(&self, id: usize) -> &[usize] {
        &self.children[id]
    }

    /// Edges in deterministic (parent, child) index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |p| self.children[p].iter().map(move |&c| (p, c)))
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    /// The graph with every edge into `target` removed.
    pub fn mutilate_incoming(&self, target: &str) -> Result<Self, GraphError> {
        let t = self.node_id(target)?;
        let mut g = self.clone();
        for &p in &g.parents[t] {
            let pos = g.children[p].binary_search(&t).expect("edge stored both ways");
            g.children[p].remove(pos);
        }
        g.parents[t].clear();
        Ok(g)
    }

    /// The graph with every edge out of `target` removed.
    pub fn mutilate_outgoing(&self, target: &str) -> Result<Self, GraphError> {
        let t = self.node_id(target)?;
        let mut g = self.clone();
        for &c in &g.children[t] {
            let pos = g.parents[c].binary_search(&t).expect("edge stored both ways");
            g.parents[c].remove(pos);
        }
        g.children[t].clear();
        Ok(g)
    }

    /// Nodes reachable from `v` by directed paths, excluding `v` itself,
    /// in declaration order.
    pub fn descendants(&self, v: &str) -> Result<Vec<String>, GraphError> {
        Ok(self
            .descendant_ids(self.node_id(v)?)
            .into_iter()
            .map(|i| self.names[i].clone())
            .collect())
    }

    pub fn descendant_ids(&self, v: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &c in &self.children[u] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        (0..self.len()).filter(|&i| seen[i]).collect()
    }

    /// A topological order with ties broken by declaration order, so the
    /// result is unique and byte-stable.
    pub fn topological_order(&self) -> Vec<String> {
        self.topological_ids()
            .into_iter()
            .map(|i| self.names[i].clone())
            .collect()
    }

    pub fn topological_ids(&self) -> Vec<usize> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> = (0..self.len())
            .filter(|&i| indegree[i] == 0)
            .map(Reverse)
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        debug_assert_eq!(order.len(), self.len(), "graph validated acyclic");
        order
    }

    /// Standard d-separation, decided by ball-passing reachability.
    ///
    /// Returns true iff every path between `x` and `y` is blocked by `z`:
    /// chains and forks block when their middle node is in `z`; a collider
    /// blocks when neither it nor any of its descendants is in `z`.
    pub fn d_separated(&self, x: &[&str], y: &[&str], z: &[&str]) -> Result<bool, GraphError> {
        let xs = self.resolve_set(x)?;
        let ys = self.resolve_set(y)?;
        let zs = self.resolve_set(z)?;
        self.check_disjoint(&[&xs, &ys, &zs])?;
        Ok(self.d_separated_ids(&xs, &ys, &zs))
    }

    pub(crate) fn resolve_set(&self, names: &[&str]) -> Result<Vec<usize>, GraphError> {
        names.iter().map(|n| self.node_id(n)).collect()
    }

    pub(crate) fn check_disjoint(&self, sets: &[&Vec<usize>]) -> Result<(), GraphError> {
        let mut seen = vec![false; self.len()];
        for set in sets {
            for &v in set.iter() {
                if seen[v] {
                    return Err(GraphError::OverlappingSets(self.names[v].clone()));
                }
                seen[v] = true;
            }
        }
        Ok(())
    }

    pub(crate) fn d_separated_ids(&self, xs: &[usize], ys: &[usize], zs: &[usize]) -> bool {
        let n = self.len();
        let mut in_z = vec![false; n];
        for &v in zs {
            in_z[v] = true;
        }
        // z together with its ancestors: the nodes at which a collider is open.
        let mut anc_z = in_z.clone();
        let mut stack: Vec<usize> = zs.to_vec();
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if !anc_z[p] {
                    anc_z[p] = true;
                    stack.push(p);
                }
            }
        }
        let mut in_y = vec![false; n];
        for &v in ys {
            in_y[v] = true;
        }

        // Ball states: (node, arrived-from-child?). Arriving from a child lets
        // the ball continue through parents and children unless blocked by z;
        // arriving from a parent continues to children unless blocked, and
        // bounces back to parents only at an open collider.
        let mut visited_up = vec![false; n];
        let mut visited_down = vec![false; n];
        let mut queue: Vec<(usize, bool)> = xs.iter().map(|&v| (v, true)).collect();
        while let Some((v, from_child)) = queue.pop() {
            let visited = if from_child {
                &mut visited_up
            } else {
                &mut visited_down
            };
            if visited[v] {
                continue;
            }
            visited[v] = true;
            if in_y[v] {
                return false;
            }
            if from_child {
                if !in_z[v] {
                    for &p in &self.parents[v] {
                        queue.push((p, true));
                    }
                    for &c in &self.children[v] {
                        queue.push((c, false));
                    }
                }
            } else {
                if !in_z[v] {
                    for &c in &self.children[v] {
                        queue.push((c, false));
                    }
                }
                if anc_z[v] {
                    for &p in &self.parents[v] {
                        queue.push((p, true));
                    }
                }
            }
        }
        true
    }
}

impl fmt::Display for CausalGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nodes, {} edges", self.len(), self.edge_count())
    }
}

/// An atomic intervention: clamp `target` to the state `value`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Intervention {
    pub target: String,
    pub value: usize,
}

impl Intervention {
    pub fn new(target: impl Into<String>, value: usize) -> Self {
        Self {
            target: target.into(),
            value,
        }
    }

    /// Parse the CLI form `VAR=STATE`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let (var, state) = text
            .split_once('=')
            .ok_or_else(|| format!("expected VAR=STATE, got `{text}`"))?;
        let value: usize = state
            .trim()
            .parse()
            .map_err(|_| format!("state `{state}` is not a nonnegative integer"))?;
        Ok(Self::new(var.trim(), value))
    }

    /// Check the target against a graph and return its node id.
    pub fn validate(&self, g: &CausalGraph) -> Result<usize, GraphError> {
        let t = g.node_id(&self.target)?;
        if g.is_latent(t) {
            return Err(GraphError::LatentTarget(self.target.clone()));
        }
        if self.value >= g.cardinality(t) {
            return Err(GraphError::StateOutOfRange {
                node: self.target.clone(),
                value: self.value,
                cardinality: g.cardinality(t),
            });
        }
        Ok(t)
    }
}

impl fmt::Display for Intervention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "do({}={})", self.target, self.value)
    }
}
