//! Independent oracles and corpus generators shared by the integration
//! tests. Everything here recomputes results from first principles, on
//! purpose: none of it calls the reachability d-separation, the factor
//! elimination, or the conjugate shortcut it is used to check.
#![allow(dead_code)] // each test binary uses its own subset

use causal_twin::cpt::{Cpt, CptSet};
use causal_twin::dist::Distribution;
use causal_twin::graph::{CausalGraph, GraphSpec, NodeSpec};
use causal_twin::infer::PosteriorCounts;
use causal_twin::rng::CrateRng;
use rand::Rng;

pub fn graph_from(nodes: &[(&str, usize, bool)], edges: &[(&str, &str)]) -> CausalGraph {
    let spec = GraphSpec {
        nodes: nodes
            .iter()
            .map(|&(name, cardinality, latent)| NodeSpec {
                name: name.to_owned(),
                cardinality,
                latent,
            })
            .collect(),
        edges: edges
            .iter()
            .map(|&(p, c)| (p.to_owned(), c.to_owned()))
            .collect(),
    };
    CausalGraph::build(&spec).expect("valid test graph")
}

/// The confounder triangle Z -> T, Z -> Y, T -> Y with the 0.41 backdoor
/// instance used across the experiments.
pub fn confounder_graph() -> CausalGraph {
    graph_from(
        &[("Z", 2, false), ("T", 2, false), ("Y", 2, false)],
        &[("Z", "T"), ("Z", "Y"), ("T", "Y")],
    )
}

pub fn confounder_tables(g: &CausalGraph) -> CptSet {
    let mut cpts = CptSet::new();
    cpts.insert("Z".into(), Cpt::from_rows(g, "Z", &[vec![0.7, 0.3]]).unwrap());
    cpts.insert(
        "T".into(),
        Cpt::from_rows(g, "T", &[vec![0.6, 0.4], vec![0.3, 0.7]]).unwrap(),
    );
    cpts.insert(
        "Y".into(),
        Cpt::from_rows(
            g,
            "Y",
            &[
                vec![0.5, 0.5],
                vec![0.8, 0.2],
                vec![0.5, 0.5],
                vec![0.1, 0.9],
            ],
        )
        .unwrap(),
    );
    cpts
}

// ---------------------------------------------------------------------------
// random corpus

/// A random DAG: random node count up to `max_n`, random acyclic edge set
/// over a random node order, mixed cardinalities 2 or 3.
pub fn random_dag(rng: &mut CrateRng, max_n: usize, edge_prob: f64) -> CausalGraph {
    let n = rng.random_range(1..=max_n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let nodes: Vec<NodeSpec> = (0..n)
        .map(|i| NodeSpec {
            name: format!("V{i}"),
            cardinality: if rng.random::<f64>() < 0.25 { 3 } else { 2 },
            latent: false,
        })
        .collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.random::<f64>() < edge_prob {
                edges.push((format!("V{}", order[a]), format!("V{}", order[b])));
            }
        }
    }
    CausalGraph::build(&GraphSpec { nodes, edges }).expect("construction is acyclic")
}

/// Strictly positive random tables: uniform weights floored at 0.05, then
/// normalized per row.
pub fn random_tables(rng: &mut CrateRng, g: &CausalGraph) -> CptSet {
    let mut set = CptSet::new();
    for (id, name) in g.names().iter().enumerate() {
        let card = g.cardinality(id);
        let rows: usize = g
            .parents_of(id)
            .iter()
            .map(|&p| g.cardinality(p))
            .product();
        let mut table_rows = Vec::with_capacity(rows);
        for _ in 0..rows {
            let mut row: Vec<f64> = (0..card)
                .map(|_| 0.05 + 0.95 * rng.random::<f64>())
                .collect();
            let total: f64 = row.iter().sum();
            for w in &mut row {
                *w /= total;
            }
            table_rows.push(row);
        }
        set.insert(name.clone(), Cpt::from_rows(g, name, &table_rows).unwrap());
    }
    set
}

/// Split the nodes into disjoint (X, Y, Z) with X and Y nonempty, dropping
/// the rest; None when the draw leaves X or Y empty.
pub fn random_triple(
    rng: &mut CrateRng,
    g: &CausalGraph,
) -> Option<(Vec<String>, Vec<String>, Vec<String>)> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut z = Vec::new();
    for name in g.names() {
        match rng.random_range(0..4u8) {
            0 => x.push(name.clone()),
            1 => y.push(name.clone()),
            2 => z.push(name.clone()),
            _ => {}
        }
    }
    if x.is_empty() || y.is_empty() {
        None
    } else {
        Some((x, y, z))
    }
}

pub fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Every assignment of the listed variables, as (name, state) pairs.
pub fn all_contexts<'a>(g: &CausalGraph, vars: &[&'a str]) -> Vec<Vec<(&'a str, usize)>> {
    let cards: Vec<usize> = vars
        .iter()
        .map(|v| g.cardinality_of(v).unwrap())
        .collect();
    let total: usize = cards.iter().product();
    (0..total)
        .map(|mut idx| {
            let mut ctx = vec![("", 0usize); vars.len()];
            for pos in (0..vars.len()).rev() {
                ctx[pos] = (vars[pos], idx % cards[pos]);
                idx /= cards[pos];
            }
            ctx
        })
        .collect()
}

// ---------------------------------------------------------------------------
// d-separation by exhaustive trail enumeration

/// True iff no active trail connects `xs` and `ys` given `zs`. Enumerates
/// every simple trail and evaluates the collider/chain/fork rules node by
/// node; a second opinion that shares no code with the reachability version.
pub fn dsep_by_path_enumeration(g: &CausalGraph, xs: &[&str], ys: &[&str], zs: &[&str]) -> bool {
    let n = g.len();
    let x_ids: Vec<usize> = xs.iter().map(|s| g.node_id(s).unwrap()).collect();
    let mut in_y = vec![false; n];
    for s in ys {
        in_y[g.node_id(s).unwrap()] = true;
    }
    let mut in_z = vec![false; n];
    for s in zs {
        in_z[g.node_id(s).unwrap()] = true;
    }
    // collider_open[v]: v or one of its descendants is conditioned on.
    let mut collider_open = vec![false; n];
    for v in 0..n {
        collider_open[v] =
            in_z[v] || g.descendant_ids(v).iter().any(|&d| in_z[d]);
    }

    fn walk(
        g: &CausalGraph,
        u: usize,
        entered_into_u: Option<bool>,
        visited: &mut Vec<bool>,
        in_y: &[bool],
        in_z: &[bool],
        collider_open: &[bool],
    ) -> bool {
        if in_y[u] {
            return true;
        }
        visited[u] = true;
        // Exit moves: to a child c along u -> c (arrowhead away from u), or
        // to a parent p against p -> u (arrowhead at u).
        let moves: Vec<(usize, bool)> = g
            .children_of(u)
            .iter()
            .map(|&c| (c, false))
            .chain(g.parents_of(u).iter().map(|&p| (p, true)))
            .collect();
        for (v, exit_into_u) in moves {
            if visited[v] {
                continue;
            }
            let passable = match entered_into_u {
                None => true, // endpoints impose no constraint
                Some(entered) => {
                    let collider = entered && exit_into_u;
                    if collider {
                        collider_open[u]
                    } else {
                        !in_z[u]
                    }
                }
            };
            if !passable {
                continue;
            }
            // Arriving at v: entered_into_v is true when the edge points at v.
            let entered_into_v = !exit_into_u;
            if walk(g, v, Some(entered_into_v), visited, in_y, in_z, collider_open) {
                return true;
            }
        }
        visited[u] = false;
        false
    }

    for &x in &x_ids {
        let mut visited = vec![false; n];
        if walk(g, x, None, &mut visited, &in_y, &in_z, &collider_open) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// numerical conditional independence

/// Max over contexts z (with mass > 1e-9) and configurations (x, y) of
/// |P(x,y|z) - P(x|z)P(y|z)| under the exact joint.
pub fn ci_residual(joint: &Distribution, x: &[&str], y: &[&str], z: &[&str]) -> f64 {
    let z_cards: Vec<usize> = z
        .iter()
        .map(|name| joint.cards()[joint.position(name).unwrap()])
        .collect();
    let n_ctx: usize = z_cards.iter().product();
    let mut worst: f64 = 0.0;
    for ctx in 0..n_ctx {
        let mut given = Vec::with_capacity(z.len());
        let mut rem = ctx;
        for pos in (0..z.len()).rev() {
            given.push((z[pos], rem % z_cards[pos]));
            rem /= z_cards[pos];
        }
        let mass = joint.prob_event(&given).unwrap();
        if mass <= 1e-9 {
            continue;
        }
        let xy: Vec<&str> = x.iter().chain(y.iter()).copied().collect();
        let p_xy = joint.conditional(&xy, &given).unwrap();
        let p_x = joint.conditional(x, &given).unwrap();
        let p_y = joint.conditional(y, &given).unwrap();
        let x_len: usize = p_x.table().len();
        let y_len: usize = p_y.table().len();
        for ix in 0..x_len {
            for iy in 0..y_len {
                let lhs = p_xy.table()[ix * y_len + iy];
                let rhs = p_x.table()[ix] * p_y.table()[iy];
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// predictive by Dirichlet moments

/// Exact parameter integral of the single-copy post-interventional
/// predictive, straight from the posterior counts: enumerate post-world
/// configurations and weight each by the product of first Dirichlet moments
/// (cell count over row total). No conditional-table or elimination code.
pub fn predictive_by_moments(
    g: &CausalGraph,
    counts: &PosteriorCounts,
    target: &str,
    t_value: usize,
    y: &str,
) -> Vec<f64> {
    let t_id = g.node_id(target).unwrap();
    let y_id = g.node_id(y).unwrap();
    let free: Vec<usize> = (0..g.len()).filter(|&v| v != t_id).collect();
    let cards: Vec<usize> = free.iter().map(|&v| g.cardinality(v)).collect();
    let n_cfg: usize = cards.iter().product();
    let mut out = vec![0.0; g.cardinality(y_id)];
    let mut full = vec![0usize; g.len()];
    full[t_id] = t_value;
    for cfg in 0..n_cfg {
        let mut rem = cfg;
        for pos in (0..free.len()).rev() {
            full[free[pos]] = rem % cards[pos];
            rem /= cards[pos];
        }
        let mut weight = 1.0;
        for &v in &free {
            let ct = counts.get(g.name(v)).unwrap();
            let mut row = 0usize;
            for (pp, &p) in g.parents_of(v).iter().enumerate() {
                row = row * ct.parent_cards[pp] + full[p];
            }
            let cells = &ct.cells[row * ct.card..(row + 1) * ct.card];
            let total: f64 = cells.iter().sum();
            weight *= cells[full[v]] / total;
        }
        out[full[y_id]] += weight;
    }
    out
}
