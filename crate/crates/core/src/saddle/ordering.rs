//! Fill-reducing ordering by exact minimum degree on the elimination graph.

use std::collections::BTreeSet;

/// Returns the elimination order (`order[k]` is the node eliminated at step
/// `k`). `adj[i]` lists the neighbors of `i`; self-loops are ignored. Ties
/// are broken by the smaller node index, so the result is deterministic.
pub(crate) fn minimum_degree(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut graph: Vec<Vec<usize>> = adj
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<usize> = row.iter().copied().filter(|&j| j != i).collect();
            r.sort_unstable();
            r.dedup();
            r
        })
        .collect();
    let mut queue: BTreeSet<(usize, usize)> = graph.iter().enumerate().map(|(i, r)| (r.len(), i)).collect();
    let mut mark = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);

    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let clique = std::mem::take(&mut graph[v]);
        for &u in &clique {
            mark[u] = v;
        }
        for &u in &clique {
            queue.remove(&(graph[u].len(), u));
            let mut merged: Vec<usize> = graph[u]
                .iter()
                .copied()
                .filter(|&w| w != v && mark[w] != v)
                .collect();
            merged.extend(clique.iter().copied().filter(|&w| w != u));
            merged.sort_unstable();
            graph[u] = merged;
            queue.insert((graph[u].len(), u));
        }
    }
    order
}
