//! Connectivity helpers for comparison graphs.

use crate::error::{Error, Result};
use crate::matrices::ComparisonMatrices;

/// Connected components of the undirected graph with an edge wherever
/// `edge(i, j)` holds. Components are listed by smallest member.
pub fn components(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut comp = vec![start];
        label[start] = id;
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for w in 0..n {
                if w != v && label[w] == usize::MAX && edge(v, w) {
                    label[w] = id;
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn count_components(m: &ComparisonMatrices) -> Vec<Vec<usize>> {
    components(m.len(), |i, j| m.count(i, j) > 0)
}

/// `DisconnectedGraph` naming each component when the count graph is split.
pub(crate) fn require_connected(m: &ComparisonMatrices) -> Result<()> {
    let comps = count_components(m);
    if comps.len() <= 1 {
        return Ok(());
    }
    Err(Error::DisconnectedGraph {
        components: comps
            .iter()
            .map(|c| c.iter().map(|&i| m.roster()[i].id.clone()).collect())
            .collect(),
    })
}

fn reachable(n: usize, from: usize, arc: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            if !seen[w] && arc(v, w) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Models that break strong connectivity of the directed "beat" graph
/// (arc i -> j when i beat j at least once). Empty when every model can reach
/// every other through a chain of wins, which is the condition for a finite
/// Bradley-Terry maximizer.
pub fn win_graph_violators(wins: impl Fn(usize, usize) -> bool, n: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let fwd = reachable(n, 0, &wins);
    let bwd = reachable(n, 0, |v, w| wins(w, v));
    (0..n).filter(|&i| !(fwd[i] && bwd[i])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_and_isolated_vertex() {
        let edges = [(0, 1), (1, 2)];
        let comps = components(4, |i, j| edges.contains(&(i.min(j), i.max(j))));
        assert_eq!(comps, vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn cycle_is_strongly_connected() {
        let arcs = [(0, 1), (1, 2), (2, 0)];
        assert!(win_graph_violators(|i, j| arcs.contains(&(i, j)), 3).is_empty());
        let chain = [(0, 1), (1, 2)];
        assert_eq!(win_graph_violators(|i, j| chain.contains(&(i, j)), 3), vec![1, 2]);
    }
}
