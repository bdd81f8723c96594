//! Shared builders for unit tests.

use crate::cpt::{Cpt, CptSet};
use crate::graph::{CausalGraph, GraphSpec, NodeSpec};

pub fn graph(nodes: &[(&str, usize, bool)], edges: &[(&str, &str)]) -> CausalGraph {
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
    CausalGraph::build(&spec).expect("test graph is valid")
}

/// The three-node confounder: Z -> T, Z -> Y, T -> Y, all binary.
pub fn confounder_graph() -> CausalGraph {
    graph(
        &[("Z", 2, false), ("T", 2, false), ("Y", 2, false)],
        &[("Z", "T"), ("Z", "Y"), ("T", "Y")],
    )
}

/// A binary chain with edges between consecutive names.
pub fn chain(names: &[&str]) -> CausalGraph {
    let nodes: Vec<(&str, usize, bool)> = names.iter().map(|&n| (n, 2, false)).collect();
    let edges: Vec<(&str, &str)> = names.windows(2).map(|w| (w[0], w[1])).collect();
    graph(&nodes, &edges)
}

/// Ground-truth tables for the confounder graph with a backdoor-adjusted
/// interventional value of P(Y=1 | do(T=1)) = 0.7*0.2 + 0.3*0.9 = 0.41.
pub fn confounder_cpts(g: &CausalGraph) -> CptSet {
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
                vec![0.5, 0.5], // Z=0, T=0
                vec![0.8, 0.2], // Z=0, T=1
                vec![0.5, 0.5], // Z=1, T=0
                vec![0.1, 0.9], // Z=1, T=1
            ],
        )
        .unwrap(),
    );
    cpts
}
