//! Deep parameter censuses and the structural theorem checkers: the
//! edge-boundary formula, the bounded-geometry equivalences, the degree
//! trichotomy, cell volumes, diameters, and the cells lemma.
//!
//! Degree censuses exclude the theta outer vertices of `G_n`: every other
//! vertex has all of its incident cells inside the closed top cell, so
//! finite measurements are exact values of the infinite graph, not
//! approximations. Integer-valued predictions are compared exactly.

use thiserror::Error;

use crate::engine::{
    detect_origin, generate_chain, EngineError, HierarchicalGraph, OriginInfo, OriginKind,
};
use crate::graph::{self, GraphError};
use crate::model::{model_parameters, CellModel, ModelError, Observed, Parameters};
use crate::report::{Measurement, TheoremReport};
use crate::K_MAX_DEFAULT;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("depth must be at least {need}, got {got}")]
    DepthTooSmall { need: usize, got: usize },
    #[error("census inconsistency (engine defect): {0}")]
    CensusInconsistent(String),
}

/// Number of 1-cells having each vertex in their boundary.
pub fn cells_per_vertex(hg: &HierarchicalGraph) -> Vec<usize> {
    let mut count = vec![0usize; hg.graph().vertex_count()];
    for cell in hg.cells().iter().filter(|c| c.level == 1) {
        for &w in &cell.boundary {
            count[w] += 1;
        }
    }
    count
}

pub(crate) struct DegreeCensus {
    /// Common degree of 1-cell boundary vertices inside their closed
    /// cells, if constant.
    pub inner_degree: Option<usize>,
    /// Max incident 1-cells over interior level>=1 vertices.
    pub cells_max: usize,
    /// Max degree over interior vertices.
    pub degree_max: usize,
}

pub(crate) fn census(hg: &HierarchicalGraph) -> DegreeCensus {
    let g = hg.graph();
    let mut inner: Option<usize> = None;
    let mut constant = true;
    for cell in hg.cells().iter().filter(|c| c.level == 1) {
        for &w in &cell.boundary {
            // F1 makes cell boundaries independent, so the degree of w
            // inside the closed cell counts neighbors in the interior.
            let d = g
                .neighbors(w)
                .iter()
                .filter(|v| cell.interior.binary_search(v).is_ok())
                .count();
            match inner {
                None => inner = Some(d),
                Some(b) if b != d => constant = false,
                _ => {}
            }
        }
    }
    let cells_count = cells_per_vertex(hg);
    let mut cells_max = 0;
    let mut degree_max = 0;
    for v in 0..g.vertex_count() {
        if hg.is_top_boundary(v) {
            continue;
        }
        degree_max = degree_max.max(g.degree(v));
        if hg.level(v) >= 1 {
            cells_max = cells_max.max(cells_count[v]);
        }
    }
    DegreeCensus {
        inner_degree: if constant { inner } else { None },
        cells_max,
        degree_max,
    }
}

/// Per-vertex cells lemma on interior level>=1 vertices:
/// `cells(v) * (theta - 1) == reduced degree of v`. Returns the list of
/// violations (empty for a sound construction).
fn cells_lemma_violations(hg: &HierarchicalGraph) -> Result<Vec<String>, LabError> {
    let theta = hg.model().theta();
    let f = hg.f_vertices(1);
    let red = graph::reduce(hg.graph(), &f)?;
    let cells_count = cells_per_vertex(hg);
    let mut violations = Vec::new();
    for (new_id, &orig) in red.vertex_map.iter().enumerate() {
        if hg.is_top_boundary(orig) {
            continue;
        }
        let lhs = cells_count[orig] * (theta - 1);
        let rhs = red.graph.degree(new_id);
        if lhs != rhs {
            violations.push(format!(
                "vertex {orig} (address {}): cells {} * (theta-1) = {lhs} != reduced degree {rhs}",
                hg.address_string(orig),
                cells_count[orig]
            ));
        }
    }
    Ok(violations)
}

/// Refines the model-level parameters with censuses at `depth - 1` and
/// `depth`: constant inner degree over all 1-cells, max incident-cell
/// count, max degree, each with a stabilization flag. The per-vertex
/// cells lemma and (on stabilized censuses) its corollary
/// `c * (theta - 1) = M` are cross-checked and an inconsistency is an
/// error, not a report entry.
pub fn deep_parameters(m: &CellModel, depth: usize) -> Result<Parameters, LabError> {
    if depth < 3 {
        return Err(LabError::DepthTooSmall {
            need: 3,
            got: depth,
        });
    }
    let base = model_parameters(m)?;
    let chain = generate_chain(m, depth)?;
    let prev = census(&chain[depth - 2]);
    let curr = census(&chain[depth - 1]);

    for hg in [&chain[depth - 2], &chain[depth - 1]] {
        let violations = cells_lemma_violations(hg)?;
        if let Some(first) = violations.first() {
            return Err(LabError::CensusInconsistent(format!(
                "cells lemma fails at depth {}: {first}",
                hg.n()
            )));
        }
    }

    let cells_max = Observed {
        value: curr.cells_max,
        stabilized: curr.cells_max == prev.cells_max,
    };
    let degree_max = Observed {
        value: curr.degree_max,
        stabilized: curr.degree_max == prev.degree_max,
    };
    if cells_max.stabilized && degree_max.stabilized {
        let lhs = cells_max.value * (m.theta() - 1);
        if lhs != degree_max.value {
            return Err(LabError::CensusInconsistent(format!(
                "stabilized censuses violate c * (theta - 1) = M: {lhs} != {}",
                degree_max.value
            )));
        }
    }
    Ok(Parameters {
        inner_degree: curr.inner_degree,
        cells_max,
        degree_max,
        ..base
    })
}

fn top_cell_edge_boundary(hg: &HierarchicalGraph) -> Result<usize, LabError> {
    Ok(graph::boundary(hg.graph(), &hg.interior_vertices())?
        .delta
        .len())
}

/// `|delta C_n| = (b / (theta - 1))^(n-1) * delta`, checked in exact
/// rational arithmetic for every n up to `n_max`.
pub fn check_edge_boundary(m: &CellModel, n_max: usize) -> Result<TheoremReport, LabError> {
    let params = model_parameters(m)?;
    let Some(b) = params.inner_degree else {
        let mut rep = TheoremReport::inapplicable(
            "edge-boundary-formula",
            m.name(),
            "no constant inner degree",
        );
        let chain = generate_chain(m, n_max.min(4))?;
        for hg in &chain {
            rep.note(format!(
                "measured |delta C_{}| = {}",
                hg.n(),
                top_cell_edge_boundary(hg)?
            ));
        }
        return Ok(rep);
    };
    let mut rep = TheoremReport::new("edge-boundary-formula", m.name(), (1, n_max));
    let chain = generate_chain(m, n_max)?;
    let theta = params.theta;
    for hg in &chain {
        let n = hg.n();
        let measured = top_cell_edge_boundary(hg)? as u128;
        let num = (params.delta as u128) * (b as u128).pow((n - 1) as u32);
        let den = ((theta - 1) as u128).pow((n - 1) as u32);
        let pass = measured * den == num;
        let predicted = if num % den == 0 {
            (num / den).to_string()
        } else {
            format!("{num}/{den}")
        };
        rep.push(Measurement {
            n,
            quantity: "|delta C_n|".into(),
            predicted,
            measured: measured.to_string(),
            pass,
        });
        if !pass {
            rep.fail(format!(
                "n={n}: measured edge boundary {measured} off the formula"
            ));
        }
    }
    Ok(rep)
}

/// The six bounded-geometry conditions, each evaluated independently on
/// `G_{n_max}`; the report passes iff they all agree. Without a constant
/// inner degree the equivalence is out of hypothesis and only the
/// empirical measurements are reported.
pub fn check_bounded_geometry(m: &CellModel, n_max: usize) -> Result<TheoremReport, LabError> {
    if n_max < 3 {
        return Err(LabError::DepthTooSmall {
            need: 3,
            got: n_max,
        });
    }
    let params = model_parameters(m)?;
    let theta = params.theta;
    let chain = generate_chain(m, n_max)?;
    let top = &chain[n_max - 1];
    let prev_census = census(&chain[n_max - 2]);
    let curr_census = census(top);

    // (i) empirical: max interior degree equal across the last two depths.
    let cond_i = curr_census.degree_max == prev_census.degree_max;

    // (iii) empirical: graph degree equals reduced degree on interior
    // level>=1 vertices.
    let f = top.f_vertices(1);
    let red = graph::reduce(top.graph(), &f)?;
    let mut cond_iii = true;
    let mut iii_witness = None;
    for (new_id, &orig) in red.vertex_map.iter().enumerate() {
        if top.is_top_boundary(orig) {
            continue;
        }
        if top.graph().degree(orig) != red.graph.degree(new_id) {
            cond_iii = false;
            iii_witness.get_or_insert(format!(
                "vertex {orig}: degree {} vs reduced degree {}",
                top.graph().degree(orig),
                red.graph.degree(new_id)
            ));
        }
    }

    // (iv) |delta C_n| = delta for every n.
    let mut cond_iv = true;
    let mut delta_series = Vec::new();
    for hg in &chain {
        let measured = top_cell_edge_boundary(hg)?;
        delta_series.push((hg.n(), measured));
        if measured != params.delta {
            cond_iv = false;
        }
    }

    // (v) every boundary vertex of every k-cell meets exactly one 1-cell
    // of that k-cell.
    let one_cells: Vec<&crate::engine::Cell> =
        top.cells().iter().filter(|c| c.level == 1).collect();
    let mut cond_v = true;
    let mut v_witness = None;
    'outer: for cell in top.cells() {
        for &w in &cell.boundary {
            let count = one_cells
                .iter()
                .filter(|c| c.slot_path.starts_with(&cell.slot_path) && c.boundary.contains(&w))
                .count();
            if count != 1 {
                cond_v = false;
                v_witness.get_or_insert(format!(
                    "level-{} cell {:?}: boundary vertex {w} meets {count} interior 1-cells",
                    cell.level, cell.slot_path
                ));
                break 'outer;
            }
        }
    }

    // (vi) delta = theta (theta - 1).
    let cond_vi = params.delta == theta * (theta - 1);

    let Some(b) = curr_census.inner_degree else {
        let mut rep = TheoremReport::inapplicable(
            "bounded-geometry-equivalence",
            m.name(),
            "equivalence hypothesis (constant inner degree) unmet",
        );
        rep.depth_range = (1, n_max);
        rep.push(Measurement::exact(
            n_max,
            "delta",
            params.delta,
            params.delta,
        ));
        rep.push(Measurement::exact(
            n_max,
            "theta*(theta-1)",
            theta * (theta - 1),
            theta * (theta - 1),
        ));
        rep.push(Measurement::exact(
            n_max,
            "max degree stabilized",
            cond_i,
            cond_i,
        ));
        rep.push(Measurement::exact(
            n_max,
            "max interior degree",
            curr_census.degree_max,
            curr_census.degree_max,
        ));
        for (n, d) in &delta_series {
            rep.note(format!("measured |delta C_{n}| = {d}"));
        }
        rep.note(format!(
            "empirical: (i) degree stabilized = {cond_i}, (iii) deg = reduced deg = {cond_iii}, (iv) |delta C_n| constant = {cond_iv}, (v) unique interior cell per boundary vertex = {cond_v}, (vi) delta = theta(theta-1) = {cond_vi}"
        ));
        return Ok(rep);
    };

    // (ii) b = theta - 1, the reference value for the equivalence.
    let cond_ii = b == theta - 1;
    let mut rep = TheoremReport::new("bounded-geometry-equivalence", m.name(), (1, n_max));
    let conditions = [
        ("(i) bounded geometry (max degree stabilized)", cond_i),
        ("(ii) b = theta - 1", cond_ii),
        ("(iii) degree = reduced degree on F", cond_iii),
        ("(iv) |delta C_n| = delta for all n", cond_iv),
        ("(v) one interior 1-cell per boundary vertex", cond_v),
        ("(vi) delta = theta (theta - 1)", cond_vi),
    ];
    for (name, value) in conditions {
        rep.push(Measurement::exact(n_max, name, cond_ii, value));
    }
    if !rep.pass {
        if let Some(w) = iii_witness {
            rep.fail(w);
        }
        if let Some(w) = v_witness {
            rep.fail(w);
        }
        rep.fail(format!(
            "conditions disagree: (i)={cond_i} (ii)={cond_ii} (iii)={cond_iii} (iv)={cond_iv} (v)={cond_v} (vi)={cond_vi}"
        ));
    }
    for (n, d) in &delta_series {
        rep.note(format!("measured |delta C_{n}| = {d}"));
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GeometryClass {
    Bounded,
    LocallyFiniteUnbounded,
    NonLocallyFinite,
}

impl std::fmt::Display for GeometryClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeometryClass::Bounded => write!(f, "bounded"),
            GeometryClass::LocallyFiniteUnbounded => write!(f, "locally-finite-unbounded"),
            GeometryClass::NonLocallyFinite => write!(f, "non-locally-finite"),
        }
    }
}

/// Trichotomy verdict with its origin witness and a degree trace across
/// generations.
#[derive(Debug, serde::Serialize)]
pub struct GeometryReport {
    pub model: String,
    pub depth: usize,
    pub applicable: bool,
    pub class: Option<GeometryClass>,
    pub origin: Option<OriginInfo>,
    /// `(n, degree)` of the witness vertex per generation: the origin
    /// vertex for the non-locally-finite case, the marching boundary
    /// vertex otherwise.
    pub degree_trace: Vec<(usize, usize)>,
    pub notes: Vec<String>,
}

/// Classifies the limit geometry: bounded when `b = theta - 1`; otherwise
/// locally finite with unbounded geometry when no origin vertex exists,
/// and non-locally-finite when one does (witnessed by a strictly
/// increasing degree trace).
pub fn classify_geometry(m: &CellModel, depth: usize) -> Result<GeometryReport, LabError> {
    if depth < 3 {
        return Err(LabError::DepthTooSmall {
            need: 3,
            got: depth,
        });
    }
    let params = deep_parameters(m, depth)?;
    let mut report = GeometryReport {
        model: m.name().to_string(),
        depth,
        applicable: true,
        class: None,
        origin: None,
        degree_trace: Vec::new(),
        notes: Vec::new(),
    };
    let Some(b) = params.inner_degree else {
        report.applicable = false;
        report
            .notes
            .push("no constant inner degree; trichotomy hypothesis unmet".into());
        report.notes.push(format!(
            "empirical: max degree {} (stabilized: {})",
            params.degree_max.value, params.degree_max.stabilized
        ));
        return Ok(report);
    };
    let origin = detect_origin(m, depth, K_MAX_DEFAULT)?;
    let chain = generate_chain(m, depth)?;

    if b == params.theta - 1 {
        report.class = Some(GeometryClass::Bounded);
        report.notes.push(format!(
            "b = theta - 1 = {b}; degrees are uniformly bounded"
        ));
    } else {
        match &origin.kind {
            OriginKind::Cell { .. } => {
                report.class = Some(GeometryClass::LocallyFiniteUnbounded);
                // Degrees of the marching boundary vertices: the image of
                // G_n's first boundary vertex is interior in G_{n+1} and
                // its degree is stable from then on.
                for n in 1..depth {
                    let v = chain[n - 1].boundary()[0];
                    let img = chain[n].embedding().expect("depth >= 2")[v];
                    if !chain[n].is_top_boundary(img) {
                        report.degree_trace.push((n, chain[n].graph().degree(img)));
                    }
                }
                report.notes.push(
                    "no origin vertex: every vertex has finite degree but the maxima grow".into(),
                );
            }
            OriginKind::Vertex { vertex, address } => {
                report.class = Some(GeometryClass::NonLocallyFinite);
                // Walk the origin vertex down the embedding tower and
                // trace its in-window degree per generation.
                let mut ids = vec![None; depth + 1];
                ids[depth] = Some(*vertex);
                for n in (2..=depth).rev() {
                    let Some(v) = ids[n] else { break };
                    let emb = chain[n - 1].embedding().expect("n >= 2");
                    ids[n - 1] = emb.iter().position(|&img| img == v);
                }
                for (n, id) in ids.iter().enumerate() {
                    if let Some(v) = id {
                        if n >= 2 {
                            report
                                .degree_trace
                                .push((n, chain[n - 1].graph().degree(*v)));
                        }
                    }
                }
                let increasing = report.degree_trace.windows(2).all(|w| w[1].1 > w[0].1);
                report.notes.push(format!(
                    "origin vertex at address {address}; in-window degree strictly increasing: {increasing}"
                ));
                if !increasing {
                    report
                        .notes
                        .push("WARNING: degree trace not strictly increasing".into());
                }
            }
        }
    }
    report.origin = Some(origin);
    Ok(report)
}

/// Closed and interior volumes of the top cell per level:
/// `Vol closed = 2|E| = mu^n theta (theta-1)` and
/// `Vol interior = Vol closed - |delta C_n|`.
pub fn check_cell_volume(m: &CellModel, n_max: usize) -> Result<TheoremReport, LabError> {
    let params = model_parameters(m)?;
    let mut rep = TheoremReport::new("cell-volume", m.name(), (1, n_max));
    let chain = generate_chain(m, n_max)?;
    let theta = params.theta;
    for hg in &chain {
        let n = hg.n();
        let g = hg.graph();
        let all: Vec<usize> = (0..g.vertex_count()).collect();
        let closed = graph::volume(g, &all)? as u128;
        let predicted = (params.mu as u128).pow(n as u32) * (theta * (theta - 1)) as u128;
        rep.push(Measurement::exact(
            n,
            "closed volume (= 2|E|)",
            predicted,
            closed,
        ));
        rep.push(Measurement::exact(
            n,
            "2|E|",
            2 * g.edge_count() as u128,
            closed,
        ));

        let interior = graph::volume(g, &hg.interior_vertices())? as u128;
        let delta_n = top_cell_edge_boundary(hg)? as u128;
        rep.push(Measurement::exact(
            n,
            "interior volume (closed - |delta C_n|)",
            closed - delta_n,
            interior,
        ));

        let literal = closed.checked_sub(params.delta as u128);
        if literal == Some(interior) {
            rep.note(format!(
                "n={n}: literal -delta_X form holds (|delta C_n| = delta_X = {delta_n})"
            ));
        } else {
            rep.note(format!(
                "n={n}: literal -delta_X form fails: interior {interior} != {} (|delta C_n| = {delta_n}, delta_X = {})",
                literal.unwrap_or(0),
                params.delta
            ));
        }
    }
    if !rep.pass {
        rep.fail("volume law violated".into());
    }
    Ok(rep)
}

/// BFS truncated at `cap`; distances beyond the cap stay `None`.
fn bounded_bfs(g: &crate::graph::FiniteGraph, source: usize, cap: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.vertex_count()];
    dist[source] = Some(0);
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued vertices have distances");
        if du == cap {
            continue;
        }
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Boundary diameters, boundary-to-vertex maxima, and cell diameters per
/// level. All bounds are integer-exact.
///
/// Boundary distances and the boundary-to-vertex maximum are read off the
/// window `G_n`. Cell diameters concern the metric of the infinite graph,
/// which the window can only overestimate near its own boundary (true
/// geodesics may leave the top cell). They are therefore measured on the
/// deepest level-n cell of `G_{n_max}` whenever it clears a safety buffer
/// wider than the bound itself, which makes the values exact; for the top
/// levels, where no buffer exists, the window value is used when it
/// confirms the bound and is reported as inconclusive otherwise.
pub fn check_diameters(m: &CellModel, n_max: usize) -> Result<TheoremReport, LabError> {
    let params = model_parameters(m)?;
    let (nu, rho) = (params.nu, params.rho);
    let mut rep = TheoremReport::new("diameters", m.name(), (1, n_max));
    let chain = generate_chain(m, n_max)?;
    let top = &chain[n_max - 1];
    let top_bd = graph::bfs_distances(top.graph(), top.boundary())?;

    for hg in &chain {
        let n = hg.n();
        let g = hg.graph();
        let nu_n = (nu as u128).pow(n as u32);

        // (i) pairwise boundary distances are exactly nu^n.
        let mut boundary_ok = true;
        let mut max_to_boundary = 0u128;
        for (i, &u) in hg.boundary().iter().enumerate() {
            let dm = graph::bfs_distances(g, &[u])?;
            max_to_boundary = max_to_boundary.max(dm.max_finite().unwrap_or(0) as u128);
            for &v in hg.boundary().iter().skip(i + 1) {
                let d = dm.get(v).map(|d| d as u128);
                if d != Some(nu_n) {
                    boundary_ok = false;
                    rep.fail(format!("n={n}: d({u},{v}) = {d:?}, expected {nu_n}"));
                }
            }
        }
        rep.push(Measurement::exact(
            n,
            "diam theta C_n = nu^n",
            true,
            boundary_ok,
        ));

        // (ii) nu^n <= max distance to the boundary <= nu^n + rho (nu^n - 1)/(nu - 1).
        let bound_ii = nu_n + (rho as u128) * (nu_n - 1) / (nu as u128 - 1);
        let pass_ii = nu_n <= max_to_boundary && max_to_boundary <= bound_ii;
        rep.push(Measurement::bound(
            n,
            "max distance to boundary",
            format!("[{nu_n}, {bound_ii}]"),
            max_to_boundary.to_string(),
            pass_ii,
        ));
        if max_to_boundary == bound_ii {
            rep.note(format!("n={n}: boundary-distance upper bound attained"));
        }

        // (iii) nu^n <= diam of the closed cell. The stated upper bound
        // nu^n + rho (nu^(n-1)(nu+1) - 2)/(nu - 1) assumes a geodesic
        // meets at most lambda cells of scale n-1; its cell-to-cell
        // projection walk has length at most lambda, which permits
        // lambda + 1 cells, so the provable bound carries one extra
        // nu^(n-1) crossing. The unbounded lens model realizes the extra
        // cell (diam = 3 * 2^(n-1) - 2 against a stated bound of 2^n);
        // the bounded builtins satisfy the stated bound and the tree
        // attains it. Both verdicts are recorded.
        let nu_n1 = (nu as u128).pow((n - 1) as u32);
        let bound_stated = nu_n + (rho as u128) * (nu_n1 * (nu as u128 + 1) - 2) / (nu as u128 - 1);
        let bound_iii = bound_stated + nu_n1;

        let deep_cell = if n + 2 <= n_max {
            // Deepest level-n cell of the top graph, by closure distance
            // from the outer boundary; exact when the buffer exceeds the
            // bound.
            top.cells()
                .iter()
                .filter(|c| c.level == n)
                .map(|c| {
                    let buffer = c
                        .interior
                        .iter()
                        .chain(c.boundary.iter())
                        .map(|&v| top_bd.get(v).expect("connected"))
                        .min()
                        .expect("nonempty closure");
                    (buffer, c)
                })
                .max_by_key(|&(buffer, _)| buffer)
                .filter(|&(buffer, _)| buffer as u128 > bound_iii)
        } else {
            None
        };

        let record_diam = |rep: &mut TheoremReport, diam: u128, flavor: &str| {
            let pass_iii = nu_n <= diam && diam <= bound_iii;
            rep.push(Measurement::bound(
                n,
                "diam of closed cell",
                format!("[{nu_n}, {bound_iii}]"),
                diam.to_string(),
                pass_iii,
            ));
            if !pass_iii {
                rep.fail(format!(
                    "n={n}: {flavor} diameter {diam} violates [{nu_n}, {bound_iii}]"
                ));
            }
            if diam > bound_stated {
                rep.note(format!(
                    "n={n}: stated bound {bound_stated} exceeded ({flavor} diameter {diam}); \
                     the extra nu^(n-1) crossing is realized"
                ));
            }
            if diam == bound_stated {
                rep.note(format!("n={n}: diameter upper bound attained"));
            }
        };

        match deep_cell {
            Some((_, cell)) => {
                let closure: Vec<usize> = cell
                    .interior
                    .iter()
                    .chain(cell.boundary.iter())
                    .copied()
                    .collect();
                let cap = (bound_iii + 1) as usize;
                let mut diam = 0u128;
                for &x in &closure {
                    let dist = bounded_bfs(top.graph(), x, cap);
                    for &y in &closure {
                        diam = diam.max(dist[y].unwrap_or(cap) as u128);
                    }
                }
                // Deep, exact boundary-pair distances of the same cell.
                let mut deep_pairs_ok = true;
                for (i, &u) in cell.boundary.iter().enumerate() {
                    let dist = bounded_bfs(top.graph(), u, (nu_n + 1) as usize);
                    for &v in cell.boundary.iter().skip(i + 1) {
                        if dist[v].map(|d| d as u128) != Some(nu_n) {
                            deep_pairs_ok = false;
                            rep.fail(format!(
                                "n={n}: deep cell boundary pair ({u},{v}) not at distance {nu_n}"
                            ));
                        }
                    }
                }
                rep.push(Measurement::exact(
                    n,
                    "deep n-cell boundary distance",
                    true,
                    deep_pairs_ok,
                ));
                record_diam(&mut rep, diam, "exact deep-cell");
            }
            None => match graph::diameter(g) {
                Ok(diam) => {
                    // The window metric can only overestimate distances of
                    // the infinite graph, so a window value inside the
                    // bound confirms it; one outside does not refute it,
                    // but no builtin exercises that case within the
                    // corrected bound.
                    record_diam(&mut rep, diam as u128, "window");
                    rep.note(format!("n={n}: diameter measured on the window graph"));
                }
                Err(GraphError::DiameterCapExceeded { vertices, cap }) => {
                    rep.note(format!(
                        "n={n}: diameter skipped, {vertices} vertices over the exact-BFS cap {cap}"
                    ));
                }
                Err(e) => return Err(e.into()),
            },
        }
    }

    // Shortcut scan at the deepest level: boundary distances of every
    // 1-cell, measured in the full graph metric, must equal nu.
    let mut min_cell_dist = usize::MAX;
    let mut shortcut = None;
    for cell in top.cells().iter().filter(|c| c.level == 1) {
        for (i, &u) in cell.boundary.iter().enumerate() {
            let dist = bounded_bfs(top.graph(), u, nu);
            for &v in cell.boundary.iter().skip(i + 1) {
                let d = dist[v].unwrap_or(usize::MAX);
                min_cell_dist = min_cell_dist.min(d);
                if d != nu {
                    shortcut.get_or_insert(format!(
                        "1-cell {:?}: d({u},{v}) = {} in the full metric, model nu = {nu}",
                        cell.slot_path,
                        if d == usize::MAX {
                            "> nu".to_string()
                        } else {
                            d.to_string()
                        }
                    ));
                }
            }
        }
    }
    rep.push(Measurement::exact(
        n_max,
        "1-cell boundary distance in full metric",
        nu,
        min_cell_dist,
    ));
    if let Some(w) = shortcut {
        rep.fail(w);
    }
    Ok(rep)
}

/// Per-vertex cells lemma on `G_n` plus the corollary
/// `c (theta - 1) = M` on stabilized censuses.
pub fn check_cells_lemma(m: &CellModel, n: usize) -> Result<TheoremReport, LabError> {
    if n < 3 {
        return Err(LabError::DepthTooSmall { need: 3, got: n });
    }
    let mut rep = TheoremReport::new("cells-lemma", m.name(), (n, n));
    let chain = generate_chain(m, n)?;
    let top = &chain[n - 1];
    let violations = cells_lemma_violations(top)?;
    rep.push(Measurement::exact(
        n,
        "cells lemma violations",
        0usize,
        violations.len(),
    ));
    for v in violations.into_iter().take(5) {
        rep.fail(v);
    }

    let prev = census(&chain[n - 2]);
    let curr = census(top);
    let stabilized = prev.cells_max == curr.cells_max && prev.degree_max == curr.degree_max;
    if stabilized {
        rep.push(Measurement::exact(
            n,
            "c (theta - 1) = M",
            curr.degree_max,
            curr.cells_max * (m.theta() - 1),
        ));
    } else {
        rep.note(format!(
            "censuses not stabilized (c: {} -> {}, M: {} -> {}); corollary out of window",
            prev.cells_max, curr.cells_max, prev.degree_max, curr.degree_max
        ));
    }
    Ok(rep)
}
