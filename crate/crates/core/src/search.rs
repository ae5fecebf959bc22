//! Shortest-path search over implicit graphs.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::hash::Hash;

/// Heap entry ordered by cost, then by node so pops are deterministic.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frontier<N> {
    pub cost: f64,
    pub node: N,
}

impl<N: Ord> PartialEq for Frontier<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<N: Ord> Eq for Frontier<N> {}
impl<N: Ord> PartialOrd for Frontier<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<N: Ord> Ord for Frontier<N> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Single-source Dijkstra. `expand` appends `(neighbour, edge_cost)` pairs.
/// Stops early once `is_goal` accepts a settled node and returns it.
pub(crate) fn dijkstra<N, E, G>(source: N, mut expand: E, mut is_goal: G) -> (HashMap<N, f64>, Option<N>)
where
    N: Copy + Ord + Hash,
    E: FnMut(N, &mut Vec<(N, f64)>),
    G: FnMut(N) -> bool,
{
    let mut dist: HashMap<N, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(source, 0.0);
    heap.push(Frontier { cost: 0.0, node: source });
    let mut buf = Vec::new();
    while let Some(Frontier { cost, node }) = heap.pop() {
        if cost > dist[&node] {
            continue;
        }
        if is_goal(node) {
            return (dist, Some(node));
        }
        buf.clear();
        expand(node, &mut buf);
        for &(next, w) in &buf {
            let nc = cost + w;
            if dist.get(&next).is_none_or(|&d| nc < d) {
                dist.insert(next, nc);
                heap.push(Frontier { cost: nc, node: next });
            }
        }
    }
    (dist, None)
}
