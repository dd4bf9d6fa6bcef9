//! Finite undirected graphs and the exact metric operations everything
//! else is built on: multi-source BFS, connected components, vertex and
//! edge boundaries, degree volumes, reduction, and exact diameters.
//!
//! All operations are pure functions on immutable inputs with
//! deterministic, id-sorted outputs. Distances are unit-weight edge
//! counts; unreachable is an explicit `None`, never a sentinel.

use std::collections::VecDeque;

use thiserror::Error;

use crate::DIAMETER_CAP;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range (graph has {vertex_count} vertices)")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(usize, usize),
    #[error("source set is empty")]
    EmptySources,
    #[error("reduction by the empty vertex set is rejected")]
    EmptyReduction,
    #[error("graph is disconnected")]
    Disconnected,
    #[error(
        "exact diameter on {vertices} vertices exceeds the cap {cap}; opt in with an explicit cap"
    )]
    DiameterCapExceeded { vertices: usize, cap: usize },
}

/// Simple undirected graph on dense vertex ids `0..vertex_count`.
///
/// No loops, no multiple edges; adjacency lists are sorted, so neighbor
/// iteration and all derived outputs are deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    adj: Vec<Vec<usize>>,
}

impl FiniteGraph {
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            check_vertex(u, vertex_count)?;
            check_vertex(v, vertex_count)?;
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                let v = list.windows(2).find(|w| w[0] == w[1]).unwrap()[0];
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
        }
        Ok(FiniteGraph { adj })
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.adj.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.adj.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.adj.len()
    }
}

fn check_vertex(v: usize, vertex_count: usize) -> Result<(), GraphError> {
    if v >= vertex_count {
        Err(GraphError::VertexOutOfRange {
            vertex: v,
            vertex_count,
        })
    } else {
        Ok(())
    }
}

fn check_set(set: &[usize], vertex_count: usize) -> Result<(), GraphError> {
    for &v in set {
        check_vertex(v, vertex_count)?;
    }
    Ok(())
}

/// Exact distances to a source set; `None` marks unreachable.
#[derive(Debug, Clone)]
pub struct DistanceMap {
    pub sources: Vec<usize>,
    pub dist: Vec<Option<usize>>,
}

impl DistanceMap {
    pub fn get(&self, v: usize) -> Option<usize> {
        self.dist[v]
    }

    pub fn max_finite(&self) -> Option<usize> {
        self.dist.iter().flatten().copied().max()
    }
}

/// Multi-source BFS distances (edge-count metric).
pub fn bfs_distances(g: &FiniteGraph, sources: &[usize]) -> Result<DistanceMap, GraphError> {
    if sources.is_empty() {
        return Err(GraphError::EmptySources);
    }
    check_set(sources, g.vertex_count())?;
    let mut dist = vec![None; g.vertex_count()];
    let mut queue = VecDeque::new();
    let mut srcs: Vec<usize> = sources.to_vec();
    srcs.sort_unstable();
    srcs.dedup();
    for &s in &srcs {
        if dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    Ok(DistanceMap {
        sources: srcs,
        dist,
    })
}

/// Connected components of `V \ removed`, each sorted ascending, the list
/// sorted by smallest member.
pub fn components(g: &FiniteGraph, removed: &[usize]) -> Result<Vec<Vec<usize>>, GraphError> {
    check_set(removed, g.vertex_count())?;
    let mut gone = vec![false; g.vertex_count()];
    for &v in removed {
        gone[v] = true;
    }
    let mut seen = vec![false; g.vertex_count()];
    let mut out = Vec::new();
    for start in 0..g.vertex_count() {
        if gone[start] || seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if !gone[v] && !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    // Scanning starts in id order, so the list is already sorted by
    // smallest member.
    Ok(out)
}

/// Vertex boundary, edge boundary and closure of a vertex set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryInfo {
    /// Vertices outside `C` adjacent to `C`, sorted.
    pub theta: Vec<usize>,
    /// Edges with exactly one endpoint in `C`, as `(inside, outside)`
    /// normalized to `(min, max)`, sorted.
    pub delta: Vec<(usize, usize)>,
    /// `C` together with its vertex boundary, sorted.
    pub closure: Vec<usize>,
}

pub fn boundary(g: &FiniteGraph, c: &[usize]) -> Result<BoundaryInfo, GraphError> {
    check_set(c, g.vertex_count())?;
    let mut inside = vec![false; g.vertex_count()];
    for &v in c {
        inside[v] = true;
    }
    let mut theta = Vec::new();
    let mut delta = Vec::new();
    for v in 0..g.vertex_count() {
        if inside[v] {
            continue;
        }
        let mut adjacent = false;
        for &u in g.neighbors(v) {
            if inside[u] {
                adjacent = true;
                delta.push((u.min(v), u.max(v)));
            }
        }
        if adjacent {
            theta.push(v);
        }
    }
    delta.sort_unstable();
    let mut closure: Vec<usize> = c.to_vec();
    closure.sort_unstable();
    closure.dedup();
    closure.extend_from_slice(&theta);
    closure.sort_unstable();
    Ok(BoundaryInfo {
        theta,
        delta,
        closure,
    })
}

/// Sum of degrees over `A` (each vertex counted once).
pub fn volume(g: &FiniteGraph, a: &[usize]) -> Result<usize, GraphError> {
    check_set(a, g.vertex_count())?;
    let mut seen = vec![false; g.vertex_count()];
    let mut total = 0;
    for &v in a {
        if !seen[v] {
            seen[v] = true;
            total += g.degree(v);
        }
    }
    Ok(total)
}

/// Result of reducing a graph to a vertex set `F`.
#[derive(Debug, Clone)]
pub struct ReducedGraph {
    /// Graph on `F`, re-indexed by ascending original id.
    pub graph: FiniteGraph,
    /// `vertex_map[new_id] = original_id`.
    pub vertex_map: Vec<usize>,
    /// True when `F` was all of `V`: no components existed, the result is
    /// edgeless.
    pub no_complement: bool,
}

/// Reduced graph on `F`: x ~ y iff some component of `V \ F` has both in
/// its boundary.
pub fn reduce(g: &FiniteGraph, f: &[usize]) -> Result<ReducedGraph, GraphError> {
    if f.is_empty() {
        return Err(GraphError::EmptyReduction);
    }
    check_set(f, g.vertex_count())?;
    let mut vertex_map: Vec<usize> = f.to_vec();
    vertex_map.sort_unstable();
    vertex_map.dedup();
    let mut new_id = vec![usize::MAX; g.vertex_count()];
    for (i, &v) in vertex_map.iter().enumerate() {
        new_id[v] = i;
    }
    let comps = components(g, &vertex_map)?;
    let no_complement = comps.is_empty();
    let mut edges = Vec::new();
    for comp in &comps {
        let info = boundary(g, comp)?;
        for i in 0..info.theta.len() {
            for j in (i + 1)..info.theta.len() {
                edges.push((new_id[info.theta[i]], new_id[info.theta[j]]));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let graph = FiniteGraph::new(vertex_map.len(), &edges)?;
    Ok(ReducedGraph {
        graph,
        vertex_map,
        no_complement,
    })
}

/// Exact diameter by all-sources BFS, guarded by [`DIAMETER_CAP`].
pub fn diameter(g: &FiniteGraph) -> Result<usize, GraphError> {
    diameter_with_cap(g, DIAMETER_CAP)
}

pub fn diameter_with_cap(g: &FiniteGraph, cap: usize) -> Result<usize, GraphError> {
    if g.vertex_count() > cap {
        return Err(GraphError::DiameterCapExceeded {
            vertices: g.vertex_count(),
            cap,
        });
    }
    if g.vertex_count() == 0 {
        return Err(GraphError::Disconnected);
    }
    let mut best = 0;
    for v in 0..g.vertex_count() {
        let dm = bfs_distances(g, &[v])?;
        if dm.dist.iter().any(|d| d.is_none()) {
            return Err(GraphError::Disconnected);
        }
        best = best.max(dm.max_finite().unwrap_or(0));
    }
    Ok(best)
}

/// Induced subgraph on a vertex set; returns the subgraph and the map
/// `new_id -> original_id` (ascending original ids).
pub fn induced(g: &FiniteGraph, verts: &[usize]) -> Result<(FiniteGraph, Vec<usize>), GraphError> {
    check_set(verts, g.vertex_count())?;
    let mut map: Vec<usize> = verts.to_vec();
    map.sort_unstable();
    map.dedup();
    let mut new_id = vec![usize::MAX; g.vertex_count()];
    for (i, &v) in map.iter().enumerate() {
        new_id[v] = i;
    }
    let mut edges = Vec::new();
    for &u in &map {
        for &v in g.neighbors(u) {
            if u < v && new_id[v] != usize::MAX {
                edges.push((new_id[u], new_id[v]));
            }
        }
    }
    let graph = FiniteGraph::new(map.len(), &edges)?;
    Ok((graph, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(n: usize) -> FiniteGraph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        FiniteGraph::new(n, &edges).unwrap()
    }

    /// The 6-vertex cell graph of the gasket model: corners 0,1,2 and
    /// midpoints 3,4,5; triangles {0,3,5}, {1,3,4}, {2,4,5}.
    fn gasket_cell() -> FiniteGraph {
        FiniteGraph::new(
            6,
            &[
                (0, 3),
                (0, 5),
                (3, 5),
                (1, 3),
                (1, 4),
                (3, 4),
                (2, 4),
                (2, 5),
                (4, 5),
            ],
        )
        .unwrap()
    }

    #[test]
    fn constructor_rejects_bad_edges() {
        assert_eq!(
            FiniteGraph::new(2, &[(0, 0)]).unwrap_err(),
            GraphError::SelfLoop(0)
        );
        assert_eq!(
            FiniteGraph::new(2, &[(0, 1), (1, 0)]).unwrap_err(),
            GraphError::DuplicateEdge(0, 1)
        );
        assert!(matches!(
            FiniteGraph::new(2, &[(0, 2)]).unwrap_err(),
            GraphError::VertexOutOfRange { .. }
        ));
    }

    #[test]
    fn bfs_on_path() {
        let g = path(3);
        let dm = bfs_distances(&g, &[0]).unwrap();
        assert_eq!(dm.dist, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn bfs_all_sources_is_zero() {
        let g = gasket_cell();
        let dm = bfs_distances(&g, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert!(dm.dist.iter().all(|d| *d == Some(0)));
    }

    #[test]
    fn bfs_on_gasket_cell_from_corner() {
        let g = gasket_cell();
        let dm = bfs_distances(&g, &[0]).unwrap();
        // Corners 1 and 2 at distance 2, adjacent midpoints 3 and 5 at 1.
        assert_eq!(dm.get(1), Some(2));
        assert_eq!(dm.get(2), Some(2));
        assert_eq!(dm.get(3), Some(1));
        assert_eq!(dm.get(5), Some(1));
        assert_eq!(dm.get(4), Some(2));
    }

    #[test]
    fn bfs_rejects_empty_and_out_of_range() {
        let g = path(3);
        assert_eq!(
            bfs_distances(&g, &[]).unwrap_err(),
            GraphError::EmptySources
        );
        assert!(bfs_distances(&g, &[7]).is_err());
    }

    #[test]
    fn components_basics() {
        let g = path(3);
        assert_eq!(components(&g, &[1]).unwrap(), vec![vec![0], vec![2]]);
        assert_eq!(components(&g, &[]).unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn components_of_gasket_cell_minus_corners() {
        let g = gasket_cell();
        assert_eq!(components(&g, &[0, 1, 2]).unwrap(), vec![vec![3, 4, 5]]);
    }

    #[test]
    fn boundary_cases() {
        let g = gasket_cell();
        let empty = boundary(&g, &[]).unwrap();
        assert!(empty.theta.is_empty() && empty.delta.is_empty() && empty.closure.is_empty());

        let mids = boundary(&g, &[3, 4, 5]).unwrap();
        assert_eq!(mids.theta, vec![0, 1, 2]);
        assert_eq!(mids.delta.len(), 6);
        assert_eq!(mids.closure, vec![0, 1, 2, 3, 4, 5]);

        // 4-cycle v-a-vt-b with C = {a, b}: theta 2, delta 4.
        let diamond = FiniteGraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let info = boundary(&diamond, &[1, 3]).unwrap();
        assert_eq!(info.theta.len(), 2);
        assert_eq!(info.delta.len(), 4);
    }

    #[test]
    fn volume_cases() {
        let g = gasket_cell();
        assert_eq!(volume(&g, &[]).unwrap(), 0);
        assert_eq!(volume(&g, &[0, 1, 2, 3, 4, 5]).unwrap(), 18);
        assert_eq!(volume(&g, &[3, 4, 5]).unwrap(), 12);
    }

    #[test]
    fn reduce_path_to_endpoints() {
        let g = path(3);
        let red = reduce(&g, &[0, 2]).unwrap();
        assert_eq!(red.graph.edges(), vec![(0, 1)]);
        assert_eq!(red.vertex_map, vec![0, 2]);
        assert!(!red.no_complement);
    }

    #[test]
    fn reduce_by_everything_is_flagged_edgeless() {
        let g = gasket_cell();
        let red = reduce(&g, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert!(red.no_complement);
        assert_eq!(red.graph.edge_count(), 0);
    }

    #[test]
    fn reduce_rejects_empty_set() {
        let g = path(3);
        assert_eq!(reduce(&g, &[]).unwrap_err(), GraphError::EmptyReduction);
    }

    #[test]
    fn diameter_cases() {
        assert_eq!(diameter(&path(2)).unwrap(), 1);
        assert_eq!(diameter(&gasket_cell()).unwrap(), 2);
        // Cell graph of the tree model: u-m-w path plus pendant m-p-q.
        let tree = FiniteGraph::new(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert_eq!(diameter(&tree).unwrap(), 3);

        let two = FiniteGraph::new(2, &[]).unwrap();
        assert_eq!(diameter(&two).unwrap_err(), GraphError::Disconnected);
        assert!(matches!(
            diameter_with_cap(&path(10), 5).unwrap_err(),
            GraphError::DiameterCapExceeded { .. }
        ));
    }

    #[test]
    fn induced_subgraph() {
        let g = gasket_cell();
        let (sub, map) = induced(&g, &[3, 4, 5]).unwrap();
        assert_eq!(map, vec![3, 4, 5]);
        assert_eq!(sub.edge_count(), 3);
    }

    fn arb_graph() -> impl Strategy<Value = FiniteGraph> {
        (2usize..24).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
                .collect();
            proptest::collection::vec(proptest::bool::ANY, pairs.len()).prop_map(move |mask| {
                let edges: Vec<(usize, usize)> = pairs
                    .iter()
                    .zip(mask.iter())
                    .filter(|(_, &keep)| keep)
                    .map(|(&e, _)| e)
                    .collect();
                FiniteGraph::new(n, &edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn volume_of_all_vertices_is_twice_edges(g in arb_graph()) {
            let all: Vec<usize> = (0..g.vertex_count()).collect();
            prop_assert_eq!(volume(&g, &all).unwrap(), 2 * g.edge_count());
        }

        #[test]
        fn closure_volume_identity(g in arb_graph(), mask in proptest::collection::vec(proptest::bool::ANY, 24)) {
            // Vol of the closure inside the spanned subgraph equals
            // Vol_g(C) + |delta C| + twice the edges inside theta C; the
            // last term vanishes exactly when the boundary is independent,
            // which is the case the cell lemma uses (F1).
            let c: Vec<usize> = (0..g.vertex_count()).filter(|&v| mask[v]).collect();
            let info = boundary(&g, &c).unwrap();
            let (sub, map) = induced(&g, &info.closure).unwrap();
            let all_sub: Vec<usize> = (0..sub.vertex_count()).collect();
            let vol_closure_in_sub = volume(&sub, &all_sub).unwrap();
            let _ = map;
            let theta_internal = g
                .edges()
                .iter()
                .filter(|(u, v)| info.theta.contains(u) && info.theta.contains(v))
                .count();
            prop_assert_eq!(
                vol_closure_in_sub,
                volume(&g, &c).unwrap() + info.delta.len() + 2 * theta_internal
            );
            if theta_internal == 0 {
                prop_assert_eq!(vol_closure_in_sub, volume(&g, &c).unwrap() + info.delta.len());
            }
        }

        #[test]
        fn bfs_triangle_inequality(g in arb_graph(), a in 0usize..24, b in 0usize..24, c in 0usize..24) {
            let n = g.vertex_count();
            let (a, b, c) = (a % n, b % n, c % n);
            let da = bfs_distances(&g, &[a]).unwrap();
            let db = bfs_distances(&g, &[b]).unwrap();
            if let (Some(ab), Some(bc), Some(ac)) = (da.get(b), db.get(c), da.get(c)) {
                prop_assert!(ac <= ab + bc);
            }
        }

        #[test]
        fn bfs_adjacent_levels_differ_by_at_most_one(g in arb_graph()) {
            let dm = bfs_distances(&g, &[0]).unwrap();
            for (u, v) in g.edges() {
                if let (Some(du), Some(dv)) = (dm.get(u), dm.get(v)) {
                    prop_assert!(du.abs_diff(dv) <= 1);
                }
            }
        }

        #[test]
        fn reduce_components_have_boundaries(g in arb_graph(), mask in proptest::collection::vec(proptest::bool::ANY, 24)) {
            prop_assume!(g.is_connected());
            let f: Vec<usize> = (0..g.vertex_count()).filter(|&v| mask[v]).collect();
            prop_assume!(!f.is_empty() && f.len() < g.vertex_count());
            for comp in components(&g, &f).unwrap() {
                let info = boundary(&g, &comp).unwrap();
                prop_assert!(!info.theta.is_empty());
                prop_assert!(info.theta.iter().all(|t| f.contains(t)));
            }
        }
    }
}
