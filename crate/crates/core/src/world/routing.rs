use std::collections::VecDeque;

use thiserror::Error;

use super::{FloorPlan, LocationId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("location {0} is not on the floor plan")]
    UnknownLocation(LocationId),
    #[error("no path from {from} to {to}")]
    NoPath { from: LocationId, to: LocationId },
}

const UNREACHABLE: u32 = u32::MAX;

fn hop_distances(plan: &FloorPlan, to: LocationId) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; plan.len()];
    dist[to] = 0;
    let mut queue = VecDeque::from([to]);
    while let Some(at) = queue.pop_front() {
        for &next in plan.neighbors(at) {
            if dist[next] == UNREACHABLE {
                dist[next] = dist[at] + 1;
                queue.push_back(next);
            }
        }
    }
    dist
}

/// Lowest-id neighbor of `at` that is one hop closer to the target.
fn next_hop(plan: &FloorPlan, dist: &[u32], at: LocationId) -> LocationId {
    *plan
        .neighbors(at)
        .iter()
        .find(|&&n| dist[n] + 1 == dist[at])
        .expect("a reachable non-target location has a closer neighbor")
}

/// Minimum-hop path from `from` to `to`, both endpoints included.
///
/// Among equally short paths the one with the lowest next location id at
/// every step is returned, which is also the lexicographically smallest.
pub fn shortest_path(plan: &FloorPlan, from: LocationId, to: LocationId) -> Result<Vec<LocationId>, RouteError> {
    for loc in [from, to] {
        if !plan.contains(loc) {
            return Err(RouteError::UnknownLocation(loc));
        }
    }
    let dist = hop_distances(plan, to);
    if dist[from] == UNREACHABLE {
        return Err(RouteError::NoPath { from, to });
    }
    let mut path = vec![from];
    let mut at = from;
    while at != to {
        at = next_hop(plan, &dist, at);
        path.push(at);
    }
    Ok(path)
}

/// All-pairs next-hop table, consistent with [`shortest_path`].
#[derive(Debug, Clone)]
pub struct RoutingTable {
    n: usize,
    // next[from * n + to]
    next: Vec<LocationId>,
}

impl RoutingTable {
    pub fn new(plan: &FloorPlan) -> Self {
        let n = plan.len();
        let mut next = vec![0; n * n];
        for to in 0..n {
            let dist = hop_distances(plan, to);
            for from in 0..n {
                next[from * n + to] = if from == to || dist[from] == UNREACHABLE {
                    from
                } else {
                    next_hop(plan, &dist, from)
                };
            }
        }
        RoutingTable { n, next }
    }

    /// First step from `from` towards `to` (`from` itself when already there).
    pub fn next_hop(&self, from: LocationId, to: LocationId) -> LocationId {
        self.next[from * self.n + to]
    }

    /// Waypoints after `from`, ending at `to`; empty when `from == to`.
    pub fn tail(&self, from: LocationId, to: LocationId) -> VecDeque<LocationId> {
        let mut out = VecDeque::new();
        let mut at = from;
        while at != to {
            at = self.next_hop(at, to);
            out.push_back(at);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line3() -> FloorPlan {
        FloorPlan::with_tags(3, [(0, 1), (1, 2)], &[]).unwrap()
    }

    fn cycle4() -> FloorPlan {
        FloorPlan::with_tags(4, [(0, 1), (1, 2), (2, 3), (3, 0)], &[]).unwrap()
    }

    /// Every simple path from `from` to `to`, by depth-first enumeration.
    fn all_simple_paths(plan: &FloorPlan, from: LocationId, to: LocationId) -> Vec<Vec<LocationId>> {
        fn go(plan: &FloorPlan, to: LocationId, path: &mut Vec<LocationId>, out: &mut Vec<Vec<LocationId>>) {
            let at = *path.last().unwrap();
            if at == to {
                out.push(path.clone());
                return;
            }
            for &n in plan.neighbors(at) {
                if !path.contains(&n) {
                    path.push(n);
                    go(plan, to, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(plan, to, &mut vec![from], &mut out);
        out
    }

    #[test]
    fn line_graph_unique_path() {
        assert_eq!(shortest_path(&line3(), 0, 2).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn identity_path() {
        assert_eq!(shortest_path(&line3(), 1, 1).unwrap(), vec![1]);
    }

    #[test]
    fn cycle_tie_breaks_on_lowest_next_id() {
        let plan = cycle4();
        let mut shortest: Vec<_> = all_simple_paths(&plan, 0, 2);
        let min = shortest.iter().map(Vec::len).min().unwrap();
        shortest.retain(|p| p.len() == min);
        shortest.sort();
        assert_eq!(shortest, vec![vec![0, 1, 2], vec![0, 3, 2]]);
        assert_eq!(shortest_path(&plan, 0, 2).unwrap(), shortest[0]);
    }

    #[test]
    fn unknown_location() {
        assert_eq!(shortest_path(&line3(), 0, 5), Err(RouteError::UnknownLocation(5)));
    }

    #[test]
    fn routing_table_matches_shortest_path() {
        let plan = cycle4();
        let table = RoutingTable::new(&plan);
        for a in 0..4 {
            for b in 0..4 {
                let p = shortest_path(&plan, a, b).unwrap();
                assert_eq!(table.tail(a, b).into_iter().collect::<Vec<_>>(), p[1..].to_vec());
            }
        }
    }

    fn connected_graph(max_nodes: usize) -> impl Strategy<Value = FloorPlan> {
        (2..=max_nodes).prop_flat_map(|n| {
            // a random spanning tree plus random extra edges
            let parents = (1..n).map(|i| 0..i).collect::<Vec<_>>();
            let extra = proptest::collection::vec((0..n, 0..n), 0..n);
            (Just(n), parents, extra).prop_map(|(n, parents, extra)| {
                let mut edges: std::collections::BTreeSet<(usize, usize)> =
                    parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
                for (a, b) in extra {
                    if a != b {
                        edges.insert((a.min(b), a.max(b)));
                    }
                }
                FloorPlan::with_tags(n, edges, &[]).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn shortest_path_is_minimal_and_lexicographically_first(plan in connected_graph(8), a in 0usize..8, b in 0usize..8) {
            let (a, b) = (a % plan.len(), b % plan.len());
            let got = shortest_path(&plan, a, b).unwrap();
            let paths = all_simple_paths(&plan, a, b);
            let min = paths.iter().map(Vec::len).min().unwrap();
            prop_assert_eq!(got.len(), min);
            let best = paths.iter().filter(|p| p.len() == min).min().unwrap();
            prop_assert_eq!(&got, best);
            for w in got.windows(2) {
                prop_assert!(plan.is_adjacent(w[0], w[1]));
            }
        }
    }
}
