//! Graph file format and DOT export.
//!
//! Graphs are stored as UTF-8 JSON:
//!
//! ```json
//! {
//!   "vertices": ["u", "v"],
//!   "edges": [{"id": "a", "ends": ["u", "v"], "length": "3/2"}],
//!   "cusps": [{"id": "x", "end": "u"}]
//! }
//! ```
//!
//! Lengths are exact rationals written `num/den` (denominator omitted when
//! it is 1) and may be left out per edge when only the combinatorial
//! structure matters. Serialization is canonical: vertices and edges are
//! sorted, so parse-then-write is the identity on canonical files.

use crate::currents::Current;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, MetricGraph};
use crate::rational::{format_q, parse_q, Q};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    id: String,
    ends: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CuspRecord {
    id: String,
    end: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphRecord {
    vertices: Vec<String>,
    edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    cusps: Vec<CuspRecord>,
}

/// A parsed graph file: structure plus whatever lengths were present.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub lengths: BTreeMap<EdgeId, Q>,
}

impl LoadedGraph {
    /// Requires a length on every edge.
    pub fn into_metric(self) -> Result<MetricGraph> {
        MetricGraph::new(self.graph, self.lengths)
    }
}

pub fn parse_graph(text: &str) -> Result<LoadedGraph> {
    let rec: GraphRecord =
        serde_json::from_str(text).map_err(|e| Error::BadGraphFile(e.to_string()))?;
    let mut graph = Graph::new();
    for v in &rec.vertices {
        graph.add_vertex(v.as_str());
    }
    let mut lengths = BTreeMap::new();
    for e in &rec.edges {
        let id = graph.add_edge(e.id.as_str(), e.ends[0].as_str(), e.ends[1].as_str())?;
        if let Some(text) = &e.length {
            lengths.insert(id, parse_q(text)?);
        }
    }
    for c in &rec.cusps {
        graph.add_cusp(c.id.as_str(), c.end.as_str())?;
    }
    Ok(LoadedGraph { graph, lengths })
}

pub fn format_graph(g: &Graph, lengths: &BTreeMap<EdgeId, Q>) -> String {
    let rec = GraphRecord {
        vertices: g.vertices().map(|v| v.as_str().to_string()).collect(),
        edges: g
            .edges()
            .map(|(id, (u, v))| EdgeRecord {
                id: id.as_str().to_string(),
                ends: [u.as_str().to_string(), v.as_str().to_string()],
                length: lengths.get(id).map(format_q),
            })
            .collect(),
        cusps: g
            .cusps()
            .map(|(id, v)| CuspRecord {
                id: id.as_str().to_string(),
                end: v.as_str().to_string(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&rec).expect("serializable") + "\n"
}

pub fn format_metric_graph(m: &MetricGraph) -> String {
    format_graph(m.graph(), m.lengths())
}

pub fn read_graph(path: &std::path::Path) -> Result<LoadedGraph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::BadGraphFile(format!("{}: {e}", path.display())))?;
    parse_graph(&text)
}

/// Reads a plain map `{"edge id": "num/den", ...}` of hidden lengths.
pub fn read_lengths(path: &std::path::Path) -> Result<BTreeMap<EdgeId, Q>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::BadGraphFile(format!("{}: {e}", path.display())))?;
    parse_lengths(&text)
}

pub fn parse_lengths(text: &str) -> Result<BTreeMap<EdgeId, Q>> {
    let raw: BTreeMap<String, String> =
        serde_json::from_str(text).map_err(|e| Error::BadGraphFile(e.to_string()))?;
    raw.into_iter()
        .map(|(e, l)| Ok((EdgeId::new(e), parse_q(&l)?)))
        .collect()
}

pub fn format_lengths(lengths: &BTreeMap<EdgeId, Q>) -> String {
    let raw: BTreeMap<&str, String> = lengths
        .iter()
        .map(|(e, l)| (e.as_str(), format_q(l)))
        .collect();
    serde_json::to_string_pretty(&raw).expect("serializable") + "\n"
}

fn dot_escape(s: &str) -> String {
    s.replace('"', "\\\"")
}

/// DOT rendering with edge lengths as labels; cusps appear as point-shaped
/// ghost nodes.
pub fn graph_dot(name: &str, g: &Graph, lengths: &BTreeMap<EdgeId, Q>) -> String {
    let mut out = String::new();
    out.push_str(&format!("graph \"{}\" {{\n", dot_escape(name)));
    for v in g.vertices() {
        out.push_str(&format!("  \"{}\";\n", dot_escape(v.as_str())));
    }
    for (e, (u, v)) in g.edges() {
        let label = match lengths.get(e) {
            Some(l) => format!("{} = {}", e, format_q(l)),
            None => e.to_string(),
        };
        out.push_str(&format!(
            "  \"{}\" -- \"{}\" [label=\"{}\"];\n",
            dot_escape(u.as_str()),
            dot_escape(v.as_str()),
            dot_escape(&label)
        ));
    }
    for (c, v) in g.cusps() {
        out.push_str(&format!(
            "  \"cusp:{c}\" [shape=point];\n  \"{}\" -- \"cusp:{c}\" [style=dashed, label=\"{c}\"];\n",
            dot_escape(v.as_str())
        ));
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of a current: signed flow as edge labels, zero-flow edges
/// dimmed.
pub fn current_dot(name: &str, g: &Graph, c: &Current) -> String {
    let mut out = String::new();
    out.push_str(&format!("digraph \"{}\" {{\n", dot_escape(name)));
    for v in g.vertices() {
        out.push_str(&format!("  \"{}\";\n", dot_escape(v.as_str())));
    }
    for (e, (u, v)) in g.edges() {
        let f = c.flow(e);
        if f == 0 {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [dir=none, color=gray, label=\"{}: 0\"];\n",
                dot_escape(u.as_str()),
                dot_escape(v.as_str()),
                dot_escape(e.as_str())
            ));
        } else {
            let (from, to) = if f > 0 { (u, v) } else { (v, u) };
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}: {}\"];\n",
                dot_escape(from.as_str()),
                dot_escape(to.as_str()),
                dot_escape(e.as_str()),
                f.abs()
            ));
        }
    }
    out.push_str("}\n");
    out
}
