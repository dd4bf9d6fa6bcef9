//! Cell models: the substitution rules that define a self-similar graph.
//!
//! A model is a finite cell graph given as a clique decomposition: an
//! ordered boundary of `theta` vertices and `mu` ordered `K_theta` slots.
//! Slot tuple order is the gluing bijection — position `j` of a slot
//! receives `boundary[j]` of the copy substituted into it. The clique
//! form is the definition of admissible input: cell graphs of the class
//! this engine generates decompose into exactly `mu` copies of `K_theta`,
//! one per cell boundary.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{self, FiniteGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("vertex count must be positive")]
    NoVertices,
    #[error("boundary must list at least 2 distinct vertices, got {0}")]
    BoundaryTooSmall(usize),
    #[error("need at least 2 slots, got {0}")]
    TooFewSlots(usize),
    #[error("duplicate vertex {0} in boundary")]
    DuplicateBoundaryVertex(usize),
    #[error("slot {slot} has arity {got}, expected {expected}")]
    SlotArity {
        slot: usize,
        got: usize,
        expected: usize,
    },
    #[error("slot {slot} lists vertex {vertex} twice")]
    DuplicateSlotVertex { slot: usize, vertex: usize },
    #[error("vertex {vertex} out of range (model has {vertex_count} vertices)")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    #[error("anchor slot {0} out of range")]
    AnchorOutOfRange(usize),
    #[error("unknown builtin model '{0}'")]
    UnknownBuiltin(String),
    #[error("model '{model}' fails axiom check '{check}': {witness}")]
    Validation {
        model: String,
        check: String,
        witness: String,
    },
}

/// A substitution rule: cell graph as boundary plus ordered clique slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellModel {
    name: String,
    vertex_count: usize,
    boundary: Vec<usize>,
    slots: Vec<Vec<usize>>,
    anchor_slot: usize,
}

impl CellModel {
    /// Structural well-formedness only; the axioms are checked by
    /// [`validate`].
    pub fn new(
        name: impl Into<String>,
        vertex_count: usize,
        boundary: Vec<usize>,
        slots: Vec<Vec<usize>>,
        anchor_slot: usize,
    ) -> Result<Self, ModelError> {
        if vertex_count == 0 {
            return Err(ModelError::NoVertices);
        }
        if boundary.len() < 2 {
            return Err(ModelError::BoundaryTooSmall(boundary.len()));
        }
        if slots.len() < 2 {
            return Err(ModelError::TooFewSlots(slots.len()));
        }
        let mut seen = vec![false; vertex_count];
        for &v in &boundary {
            if v >= vertex_count {
                return Err(ModelError::VertexOutOfRange {
                    vertex: v,
                    vertex_count,
                });
            }
            if seen[v] {
                return Err(ModelError::DuplicateBoundaryVertex(v));
            }
            seen[v] = true;
        }
        let theta = boundary.len();
        for (s, slot) in slots.iter().enumerate() {
            if slot.len() != theta {
                return Err(ModelError::SlotArity {
                    slot: s,
                    got: slot.len(),
                    expected: theta,
                });
            }
            let mut in_slot = vec![false; vertex_count];
            for &v in slot {
                if v >= vertex_count {
                    return Err(ModelError::VertexOutOfRange {
                        vertex: v,
                        vertex_count,
                    });
                }
                if in_slot[v] {
                    return Err(ModelError::DuplicateSlotVertex { slot: s, vertex: v });
                }
                in_slot[v] = true;
            }
        }
        if anchor_slot >= slots.len() {
            return Err(ModelError::AnchorOutOfRange(anchor_slot));
        }
        Ok(CellModel {
            name: name.into(),
            vertex_count,
            boundary,
            slots,
            anchor_slot,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn slots(&self) -> &[Vec<usize>] {
        &self.slots
    }

    pub fn anchor_slot(&self) -> usize {
        self.anchor_slot
    }

    pub fn theta(&self) -> usize {
        self.boundary.len()
    }

    pub fn mu(&self) -> usize {
        self.slots.len()
    }

    /// 1 for boundary vertices, 0 otherwise.
    pub fn level_of(&self, v: usize) -> usize {
        usize::from(self.boundary.contains(&v))
    }

    /// True when the model graph minus the boundary is connected. Cells
    /// of the generated graphs then coincide with the components of the
    /// deep vertex levels; models without this property produce ragged
    /// deepest cells and sit outside the strict self-similar class.
    pub fn has_connected_interior(&self) -> bool {
        let g = self.graph();
        graph::components(&g, &self.boundary)
            .map(|c| c.len() == 1)
            .unwrap_or(false)
    }

    /// The model graph: union of the slot cliques.
    pub fn graph(&self) -> FiniteGraph {
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for slot in &self.slots {
            for i in 0..slot.len() {
                for j in (i + 1)..slot.len() {
                    let (u, v) = (slot[i].min(slot[j]), slot[i].max(slot[j]));
                    edges.push((u, v));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        FiniteGraph::new(self.vertex_count, &edges).expect("structural checks ran in new()")
    }
}

/// One axiom check with a concrete witness on failure.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AxiomCheck {
    pub name: String,
    pub pass: bool,
    pub witness: Option<String>,
}

/// Per-axiom validation verdicts; `pass` iff every check passes.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub model: String,
    pub checks: Vec<AxiomCheck>,
    /// Common boundary distance when H2 holds at level 1.
    pub nu: Option<usize>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Checks the level-1 consequences of the axioms: boundary independence
/// (F1), cell-closure intersections (F2), the clique edge partition,
/// connectivity, equal boundary distances (H2 at level 1), and slot
/// coverage. Failures are report entries with witnesses, not errors.
pub fn validate(m: &CellModel) -> ValidationReport {
    let mut checks = Vec::new();

    // F1: no slot may contain two boundary vertices.
    let mut f1 = AxiomCheck {
        name: "F1".into(),
        pass: true,
        witness: None,
    };
    'f1: for (s, slot) in m.slots.iter().enumerate() {
        let bnd: Vec<usize> = slot
            .iter()
            .copied()
            .filter(|v| m.boundary.contains(v))
            .collect();
        if bnd.len() >= 2 {
            f1.pass = false;
            f1.witness = Some(format!(
                "slot {s} contains boundary vertices {} and {}",
                bnd[0], bnd[1]
            ));
            break 'f1;
        }
    }
    checks.push(f1);

    // F2: two slots (closures of the cells glued into them) share at most
    // one vertex.
    let mut f2 = AxiomCheck {
        name: "F2".into(),
        pass: true,
        witness: None,
    };
    'f2: for s in 0..m.slots.len() {
        for t in (s + 1)..m.slots.len() {
            let shared: Vec<usize> = m.slots[s]
                .iter()
                .copied()
                .filter(|v| m.slots[t].contains(v))
                .collect();
            if shared.len() > 1 {
                f2.pass = false;
                f2.witness = Some(format!(
                    "slots {s} and {t} share vertices {} and {}",
                    shared[0], shared[1]
                ));
                break 'f2;
            }
        }
    }
    checks.push(f2);

    // Edge partition: each unordered pair lies in at most one slot.
    let mut part = AxiomCheck {
        name: "edge-partition".into(),
        pass: true,
        witness: None,
    };
    let mut pair_owner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    'part: for (s, slot) in m.slots.iter().enumerate() {
        for i in 0..slot.len() {
            for j in (i + 1)..slot.len() {
                let key = (slot[i].min(slot[j]), slot[i].max(slot[j]));
                if let Some(&owner) = pair_owner.get(&key) {
                    part.pass = false;
                    part.witness = Some(format!(
                        "edge {} -- {} lies in slots {owner} and {s}",
                        key.0, key.1
                    ));
                    break 'part;
                }
                pair_owner.insert(key, s);
            }
        }
    }
    checks.push(part);

    // Connectivity of the model graph.
    let g = m.graph();
    let mut conn = AxiomCheck {
        name: "connectivity".into(),
        pass: true,
        witness: None,
    };
    if !g.is_connected() {
        let comps = graph::components(&g, &[]).expect("no removed set");
        conn.pass = false;
        conn.witness = Some(format!(
            "model graph splits into {} components; vertex {} unreachable from 0",
            comps.len(),
            comps.get(1).map(|c| c[0]).unwrap_or(0)
        ));
    }
    checks.push(conn);

    // H2 at level 1: all boundary pairs at one common distance.
    let mut h2 = AxiomCheck {
        name: "H2-level-1".into(),
        pass: true,
        witness: None,
    };
    let mut nu = None;
    if conn_pass(&checks) {
        let mut dists: Vec<((usize, usize), usize)> = Vec::new();
        for (i, &u) in m.boundary.iter().enumerate() {
            let dm = graph::bfs_distances(&g, &[u]).expect("validated ids");
            for &v in m.boundary.iter().skip(i + 1) {
                match dm.get(v) {
                    Some(d) => dists.push(((u, v), d)),
                    None => {
                        h2.pass = false;
                        h2.witness = Some(format!("boundary vertices {u} and {v} disconnected"));
                    }
                }
            }
        }
        if h2.pass {
            if let Some(&(_, first)) = dists.first() {
                if let Some(&((u, v), d)) = dists.iter().find(|&&(_, d)| d != first) {
                    h2.pass = false;
                    h2.witness = Some(format!(
                        "boundary distance d({},{}) = {first} but d({u},{v}) = {d}",
                        dists[0].0 .0, dists[0].0 .1
                    ));
                } else {
                    nu = Some(first);
                }
            }
        }
    } else {
        h2.pass = false;
        h2.witness = Some("model graph disconnected".into());
    }
    checks.push(h2);

    // Slot coverage: every vertex belongs to at least one slot.
    let mut cover = AxiomCheck {
        name: "slot-overlap".into(),
        pass: true,
        witness: None,
    };
    let mut hit = vec![false; m.vertex_count];
    for slot in &m.slots {
        for &v in slot {
            hit[v] = true;
        }
    }
    if let Some(v) = hit.iter().position(|&h| !h) {
        cover.pass = false;
        cover.witness = Some(format!("vertex {v} belongs to no slot"));
    }
    checks.push(cover);

    let pass = checks.iter().all(|c| c.pass);
    ValidationReport {
        model: m.name.clone(),
        checks,
        nu,
        pass,
    }
}

fn conn_pass(checks: &[AxiomCheck]) -> bool {
    checks.iter().any(|c| c.name == "connectivity" && c.pass)
}

/// An observed census value together with its stabilization status across
/// two consecutive depths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Observed {
    pub value: usize,
    pub stabilized: bool,
}

/// Scalar invariants of a model: boundary size, slot count, length and
/// volume scaling, cell diameter, edge boundary, plus the derived
/// exponents and the predicted growth dimension.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Parameters {
    pub theta: usize,
    pub mu: usize,
    pub nu: usize,
    pub lambda: usize,
    pub rho: usize,
    pub delta: usize,
    /// Common degree of boundary vertices inside the closed cell graph,
    /// when it exists.
    pub inner_degree: Option<usize>,
    /// Largest number of cells meeting at one vertex.
    pub cells_max: Observed,
    /// Largest vertex degree.
    pub degree_max: Observed,
    pub kappa_tilde: f64,
    pub kappa: usize,
    pub dim_predicted: f64,
}

/// Least integer `k >= 0` with `nu^(k+1) >= nu + 3 rho`, computed in
/// integer arithmetic so no float rounding can shift the ceiling.
fn kappa_exact(nu: usize, rho: usize) -> usize {
    let target = (nu + 3 * rho) as u128;
    let nu = nu as u128;
    let mut power = nu;
    let mut k = 0;
    while power < target {
        power *= nu;
        k += 1;
    }
    k
}

/// Level-1 parameters read off the model graph. `cells_max` and
/// `degree_max` are model-level observations, left unstabilized; deep
/// censuses refine them.
pub fn model_parameters(m: &CellModel) -> Result<Parameters, ModelError> {
    let report = validate(m);
    if !report.pass {
        let failing = report.first_failure().expect("some check failed");
        return Err(ModelError::Validation {
            model: m.name.clone(),
            check: failing.name.clone(),
            witness: failing.witness.clone().unwrap_or_default(),
        });
    }
    let g = m.graph();
    let theta = m.theta();
    let mu = m.mu();
    let nu = report.nu.expect("H2 passed");
    debug_assert!(nu >= 2, "boundary independence forces nu >= 2");
    let lambda = graph::diameter(&g).expect("connected model graph");
    let rho = lambda - nu;
    let interior: Vec<usize> = (0..m.vertex_count)
        .filter(|v| !m.boundary.contains(v))
        .collect();
    let delta = graph::boundary(&g, &interior)
        .expect("validated ids")
        .delta
        .len();

    let boundary_degrees: Vec<usize> = m.boundary.iter().map(|&v| g.degree(v)).collect();
    let inner_degree = if boundary_degrees.windows(2).all(|w| w[0] == w[1]) {
        Some(boundary_degrees[0])
    } else {
        None
    };

    let mut slot_count = vec![0usize; m.vertex_count];
    for slot in &m.slots {
        for &v in slot {
            slot_count[v] += 1;
        }
    }
    let cells_max = Observed {
        value: *slot_count.iter().max().unwrap(),
        stabilized: false,
    };
    let degree_max = Observed {
        value: (0..m.vertex_count).map(|v| g.degree(v)).max().unwrap(),
        stabilized: false,
    };

    let kappa = kappa_exact(nu, rho);
    let kappa_tilde = ((nu + 3 * rho) as f64).ln() / (nu as f64).ln() - 1.0;
    let dim_predicted = (mu as f64).ln() / (nu as f64).ln();

    Ok(Parameters {
        theta,
        mu,
        nu,
        lambda,
        rho,
        delta,
        inner_degree,
        cells_max,
        degree_max,
        kappa_tilde,
        kappa,
        dim_predicted,
    })
}

pub const BUILTIN_NAMES: [&str; 6] = [
    "line",
    "sierpinski",
    "tree4",
    "diamond_open",
    "diamond_fixed",
    "lopsided3",
];

/// The built-in models.
///
/// * `line` — path substitution, dimension 1.
/// * `sierpinski` — the gasket cell: three corner-to-midpoint triangles.
/// * `tree4` — path u-m-w with pendant path m-p-q; cell diameter exceeds
///   the boundary distance.
/// * `diamond_open` — lens cell (4-cycle v-a-vt-b plus the interior
///   diagonal a-b, so the cell interior stays connected); the anchor
///   orientation fixes no vertex, so the limit has an origin cell and
///   unbounded geometry with `|delta C_n| = 2^(n+1)` and marching
///   boundary degrees `3 * 2^n`.
/// * `diamond_fixed` — same lens, anchor fixing one boundary corner,
///   giving an origin vertex of unbounded degree.
/// * `lopsided3` — two-slot side chain with a third slot hanging off one
///   boundary vertex: edge boundary 3 exceeds theta(theta-1) = 2 while the
///   geometry stays bounded; no constant inner degree. Its interior is
///   deliberately disconnected, so its deepest cells are ragged; it
///   exists to exercise the hypothesis-unmet paths of the checkers.
pub fn builtin(name: &str) -> Result<CellModel, ModelError> {
    match name {
        "line" => CellModel::new("line", 3, vec![0, 2], vec![vec![0, 1], vec![1, 2]], 0),
        "sierpinski" => CellModel::new(
            "sierpinski",
            6,
            vec![0, 1, 2],
            vec![vec![0, 3, 5], vec![1, 3, 4], vec![2, 4, 5]],
            0,
        ),
        "tree4" => CellModel::new(
            "tree4",
            5,
            vec![0, 2],
            vec![vec![0, 1], vec![1, 2], vec![1, 3], vec![3, 4]],
            0,
        ),
        "diamond_open" => CellModel::new(
            "diamond_open",
            4,
            vec![0, 2],
            vec![vec![1, 0], vec![1, 2], vec![3, 2], vec![3, 0], vec![1, 3]],
            0,
        ),
        "diamond_fixed" => CellModel::new(
            "diamond_fixed",
            4,
            vec![0, 2],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0], vec![1, 3]],
            0,
        ),
        "lopsided3" => CellModel::new(
            "lopsided3",
            4,
            vec![0, 2],
            vec![vec![0, 1], vec![2, 1], vec![2, 3]],
            0,
        ),
        other => Err(ModelError::UnknownBuiltin(other.to_string())),
    }
}
