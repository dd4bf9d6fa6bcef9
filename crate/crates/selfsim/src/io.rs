//! Model file parsing and all textual output formats: DOT, edge lists,
//! JSON graph dumps, growth CSVs, and the versioned report document.
//!
//! Everything rendered here is canonical: sorted edges, fixed field
//! order, LF line endings, '.' decimal separator, shortest round-trip
//! float formatting. Reruns on identical input are byte-identical.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::HierarchicalGraph;
use crate::growth::{GlobalGrowth, GrowthCurve};
use crate::model::{CellModel, ModelError};
use crate::{DIAMETER_CAP, EDGE_CAP, K_MAX_DEFAULT};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("model file: {0}")]
    Parse(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown export format '{0}' (expected dot, edges or json)")]
    UnknownFormat(String),
}

/// The flat model document. Unknown fields are rejected; `anchor_slot`
/// defaults to 0.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    name: String,
    vertices: usize,
    boundary: Vec<usize>,
    slots: Vec<Vec<usize>>,
    #[serde(default)]
    anchor_slot: usize,
}

/// Parses a model document (JSON). Syntax errors carry line/column;
/// structural errors name the offending field or slot.
pub fn parse_model(text: &str) -> Result<CellModel, IoError> {
    let mf: ModelFile = serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    Ok(CellModel::new(
        mf.name,
        mf.vertices,
        mf.boundary,
        mf.slots,
        mf.anchor_slot,
    )?)
}

pub fn model_to_json(m: &CellModel) -> String {
    let mf = ModelFile {
        name: m.name().to_string(),
        vertices: m.vertex_count(),
        boundary: m.boundary().to_vec(),
        slots: m.slots().to_vec(),
        anchor_slot: m.anchor_slot(),
    };
    let mut s = serde_json::to_string_pretty(&mf).expect("plain data");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Edges,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "edges" => Ok(ExportFormat::Edges),
            "json" => Ok(ExportFormat::Json),
            other => Err(IoError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Serialize)]
struct JsonVertex {
    id: usize,
    level: usize,
}

#[derive(Serialize)]
struct JsonGraph<'a> {
    model: &'a str,
    n: usize,
    vertices: Vec<JsonVertex>,
    edges: Vec<(usize, usize)>,
}

pub fn export_graph(hg: &HierarchicalGraph, format: ExportFormat) -> String {
    match format {
        ExportFormat::Edges => {
            let mut out = String::new();
            for (u, v) in hg.graph().edges() {
                out.push_str(&format!("{u} {v}\n"));
            }
            out
        }
        ExportFormat::Dot => {
            let mut out = String::from("graph G {\n");
            for v in 0..hg.graph().vertex_count() {
                out.push_str(&format!("  {v} [level={}];\n", hg.level(v)));
            }
            for (u, v) in hg.graph().edges() {
                out.push_str(&format!("  {u} -- {v};\n"));
            }
            out.push_str("}\n");
            out
        }
        ExportFormat::Json => {
            let doc = JsonGraph {
                model: hg.model().name(),
                n: hg.n(),
                vertices: (0..hg.graph().vertex_count())
                    .map(|id| JsonVertex {
                        id,
                        level: hg.level(id),
                    })
                    .collect(),
                edges: hg.graph().edges(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("plain data");
            s.push('\n');
            s
        }
    }
}

pub fn write_growth_csv(curve: &GrowthCurve) -> String {
    let mut out = String::from("r,volume\n");
    for (r, v) in curve.volumes.iter().enumerate() {
        out.push_str(&format!("{r},{v}\n"));
    }
    out
}

pub fn write_global_csv(series: &[GlobalGrowth]) -> String {
    let mut out = String::from("r,lower,upper\n");
    for g in series {
        out.push_str(&format!("{},{},{}\n", g.radius, g.lower, g.upper));
    }
    out
}

/// Caps in force during a run; embedded in every report so that
/// "verified to depth n" claims stay auditable.
#[derive(Debug, Serialize)]
pub struct Caps {
    pub edge_cap: u64,
    pub diameter_cap: u64,
    pub k_max: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            edge_cap: EDGE_CAP as u64,
            diameter_cap: DIAMETER_CAP as u64,
            k_max: K_MAX_DEFAULT as u64,
        }
    }
}

/// Versioned wrapper for any serializable payload.
#[derive(Serialize)]
pub struct ReportDocument<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub model: String,
    pub depth: usize,
    pub caps: Caps,
    pub payload: T,
}

pub fn render_report<T: Serialize>(command: &str, model: &str, depth: usize, payload: T) -> String {
    let doc = ReportDocument {
        tool: "selfsim",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        model: model.to_string(),
        depth,
        caps: Caps::default(),
        payload,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report payloads are plain data");
    s.push('\n');
    s
}
