use std::collections::BTreeMap;

use serde::Serialize;

use super::ContactGraph;
use crate::world::AgentId;

/// Department label used for nodes without one.
pub const OTHER_DEPARTMENT: &str = "other";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeMetrics {
    pub agent: AgentId,
    pub department: String,
    pub in_degree: usize,
    pub out_degree: usize,
    pub weighted_in: u64,
    pub weighted_out: u64,
}

impl NodeMetrics {
    pub fn degree(&self) -> usize {
        self.in_degree + self.out_degree
    }

    pub fn weighted_total(&self) -> u64 {
        self.weighted_in + self.weighted_out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GraphMetrics {
    /// One entry per node, ascending agent id.
    pub nodes: Vec<NodeMetrics>,
    /// Total degree (in + out) → number of nodes.
    pub degree_histogram: BTreeMap<usize, usize>,
    /// Up to `top_k` nodes with the largest weighted total degree (ties: lower id).
    pub hubs: Vec<AgentId>,
    /// Summed edge weight from one department to another.
    pub department_matrix: BTreeMap<(String, String), u64>,
}

pub fn graph_metrics(graph: &ContactGraph, top_k: usize) -> GraphMetrics {
    let dept = |a: &AgentId| {
        graph
            .nodes
            .get(a)
            .and_then(|d| d.clone())
            .unwrap_or_else(|| OTHER_DEPARTMENT.to_owned())
    };
    let mut nodes: BTreeMap<AgentId, NodeMetrics> = graph
        .nodes
        .keys()
        .map(|a| {
            (*a, NodeMetrics { agent: *a, department: dept(a), in_degree: 0, out_degree: 0, weighted_in: 0, weighted_out: 0 })
        })
        .collect();
    let mut department_matrix = BTreeMap::new();
    for (&(from, to), &w) in &graph.edges {
        let f = nodes.get_mut(&from).expect("edge endpoints are nodes");
        f.out_degree += 1;
        f.weighted_out += w;
        let t = nodes.get_mut(&to).expect("edge endpoints are nodes");
        t.in_degree += 1;
        t.weighted_in += w;
        *department_matrix.entry((dept(&from), dept(&to))).or_default() += w;
    }
    let nodes: Vec<NodeMetrics> = nodes.into_values().collect();
    let mut degree_histogram = BTreeMap::new();
    for n in &nodes {
        *degree_histogram.entry(n.degree()).or_default() += 1;
    }
    let mut ranked: Vec<&NodeMetrics> = nodes.iter().filter(|n| n.weighted_total() > 0).collect();
    ranked.sort_by(|a, b| b.weighted_total().cmp(&a.weighted_total()).then(a.agent.cmp(&b.agent)));
    let hubs = ranked.into_iter().take(top_k).map(|n| n.agent).collect();
    GraphMetrics { nodes, degree_histogram, hubs, department_matrix }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn star_graph_hub() {
        let mut g = ContactGraph::default();
        for a in 0..5 {
            g.nodes.insert(a, None);
        }
        for spoke in 1..5 {
            g.edges.insert((spoke, 0), 10);
        }
        let m = graph_metrics(&g, 1);
        assert_eq!(m.nodes[0].in_degree, 4);
        assert!(m.nodes[1..].iter().all(|n| n.out_degree == 1 && n.in_degree == 0));
        assert_eq!(m.hubs, vec![0]);
        assert_eq!(m.degree_histogram, [(1, 4), (4, 1)].into());
        assert_eq!(m.department_matrix, [(("other".to_owned(), "other".to_owned()), 40)].into());
    }

    #[test]
    fn empty_graph() {
        assert_eq!(graph_metrics(&ContactGraph::default(), 3), GraphMetrics::default());
    }

    #[test]
    fn degrees_match_recount_on_random_graphs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let mut g = ContactGraph::default();
            for a in 0..6 {
                g.nodes.insert(a, Some(["Research", "Development"][a as usize % 2].to_owned()));
            }
            for a in 0..6 {
                for b in 0..6 {
                    if a != b && rng.gen_bool(0.3) {
                        g.edges.insert((a, b), rng.gen_range(1..30));
                    }
                }
            }
            let m = graph_metrics(&g, 6);
            for n in &m.nodes {
                let outs: Vec<_> = g.edges.iter().filter(|((f, _), _)| *f == n.agent).collect();
                let ins: Vec<_> = g.edges.iter().filter(|((_, t), _)| *t == n.agent).collect();
                assert_eq!(n.out_degree, outs.len());
                assert_eq!(n.in_degree, ins.len());
                assert_eq!(n.weighted_out, outs.iter().map(|(_, w)| **w).sum::<u64>());
                assert_eq!(n.weighted_in, ins.iter().map(|(_, w)| **w).sum::<u64>());
            }
            let total: u64 = m.department_matrix.values().sum();
            assert_eq!(total, g.edges.values().sum::<u64>());
        }
    }
}
