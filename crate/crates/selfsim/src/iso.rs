//! Label-preserving graph isomorphism by backtracking over a color
//! refinement of the (label, degree) partition.
//!
//! Compared graphs here are small (at most a few thousand vertices) and
//! heavily labeled by F-levels, which makes the refined partition nearly
//! discrete. Candidates are tried in canonical (label, degree, id) order,
//! so the first bijection found is deterministic. Every bijection is
//! re-verified edge by edge before being returned.

use std::collections::BTreeMap;

use crate::graph::FiniteGraph;

/// A label-preserving isomorphism `g1 -> g2`, or `None`.
pub fn isomorphism(
    g1: &FiniteGraph,
    l1: &[usize],
    g2: &FiniteGraph,
    l2: &[usize],
) -> Option<Vec<usize>> {
    assert_eq!(g1.vertex_count(), l1.len(), "label arity mismatch");
    assert_eq!(g2.vertex_count(), l2.len(), "label arity mismatch");
    if g1.vertex_count() != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return None;
    }
    let n = g1.vertex_count();
    if n == 0 {
        return Some(Vec::new());
    }

    let (c1, c2) = refine_joint(g1, l1, g2, l2)?;

    // Map g1 vertices in canonical (label, degree, id) order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&v| (l1[v], g1.degree(v), v));

    // Candidate lists per color, each sorted by (label, degree, id).
    let mut by_color: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        by_color.entry(c2[v]).or_default().push(v);
    }
    for list in by_color.values_mut() {
        list.sort_unstable_by_key(|&v| (l2[v], g2.degree(v), v));
    }

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if !extend(g1, g2, &c1, &by_color, &order, 0, &mut map, &mut used) {
        return None;
    }
    debug_assert!(verify(g1, l1, g2, l2, &map));
    if verify(g1, l1, g2, l2, &map) {
        Some(map)
    } else {
        None
    }
}

fn extend(
    g1: &FiniteGraph,
    g2: &FiniteGraph,
    c1: &[u32],
    by_color: &BTreeMap<u32, Vec<usize>>,
    order: &[usize],
    pos: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if pos == order.len() {
        return true;
    }
    let u = order[pos];
    let Some(candidates) = by_color.get(&c1[u]) else {
        return false;
    };
    'cand: for &v in candidates {
        if used[v] {
            continue;
        }
        // Mapped neighbors of u must be exactly the mapped preimages among
        // v's neighbors.
        let mut mapped_deg = 0;
        for &w in g1.neighbors(u) {
            if map[w] != usize::MAX {
                mapped_deg += 1;
                if !g2.has_edge(v, map[w]) {
                    continue 'cand;
                }
            }
        }
        let mut back_deg = 0;
        for &w2 in g2.neighbors(v) {
            if used[w2] {
                back_deg += 1;
            }
        }
        if back_deg != mapped_deg {
            continue;
        }
        map[u] = v;
        used[v] = true;
        if extend(g1, g2, c1, by_color, order, pos + 1, map, used) {
            return true;
        }
        map[u] = usize::MAX;
        used[v] = false;
    }
    false
}

/// Joint color refinement: seeds colors with (label, degree) and iterates
/// on sorted multisets of neighbor colors until stable. Returns `None`
/// when the color histograms of the two graphs diverge.
fn refine_joint(
    g1: &FiniteGraph,
    l1: &[usize],
    g2: &FiniteGraph,
    l2: &[usize],
) -> Option<(Vec<u32>, Vec<u32>)> {
    let n1 = g1.vertex_count();
    let n2 = g2.vertex_count();

    let mut seed: Vec<(usize, usize)> = Vec::with_capacity(n1 + n2);
    seed.extend((0..n1).map(|v| (l1[v], g1.degree(v))));
    seed.extend((0..n2).map(|v| (l2[v], g2.degree(v))));
    let mut palette: Vec<(usize, usize)> = seed.clone();
    palette.sort_unstable();
    palette.dedup();
    let mut colors: Vec<u32> = seed
        .iter()
        .map(|s| palette.binary_search(s).unwrap() as u32)
        .collect();
    let mut color_count = palette.len();

    loop {
        let mut sigs: Vec<(u32, Vec<u32>)> = Vec::with_capacity(n1 + n2);
        for v in 0..n1 {
            let mut nb: Vec<u32> = g1.neighbors(v).iter().map(|&w| colors[w]).collect();
            nb.sort_unstable();
            sigs.push((colors[v], nb));
        }
        for v in 0..n2 {
            let mut nb: Vec<u32> = g2.neighbors(v).iter().map(|&w| colors[n1 + w]).collect();
            nb.sort_unstable();
            sigs.push((colors[n1 + v], nb));
        }
        let mut sig_palette: Vec<(u32, Vec<u32>)> = sigs.clone();
        sig_palette.sort_unstable();
        sig_palette.dedup();
        let next: Vec<u32> = sigs
            .iter()
            .map(|s| sig_palette.binary_search(s).unwrap() as u32)
            .collect();
        let next_count = sig_palette.len();
        if next_count == color_count {
            // Stable partition; check histograms match across the graphs.
            let mut h1: BTreeMap<u32, usize> = BTreeMap::new();
            let mut h2: BTreeMap<u32, usize> = BTreeMap::new();
            for v in 0..n1 {
                *h1.entry(next[v]).or_default() += 1;
            }
            for v in 0..n2 {
                *h2.entry(next[n1 + v]).or_default() += 1;
            }
            if h1 != h2 {
                return None;
            }
            return Some((next[..n1].to_vec(), next[n1..].to_vec()));
        }
        colors = next;
        color_count = next_count;
    }
}

fn verify(g1: &FiniteGraph, l1: &[usize], g2: &FiniteGraph, l2: &[usize], map: &[usize]) -> bool {
    let n = g1.vertex_count();
    let mut seen = vec![false; n];
    for u in 0..n {
        let v = map[u];
        if v >= n || seen[v] || l1[u] != l2[v] {
            return false;
        }
        seen[v] = true;
    }
    for (u, w) in g1.edges() {
        if !g2.has_edge(map[u], map[w]) {
            return false;
        }
    }
    g1.edge_count() == g2.edge_count()
}
