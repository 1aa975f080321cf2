//! Graph, histogram and table renderers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use dsr_core::analytics::{Histogram, ThemeEdge, ThemeGraph, ThemeNode, ThemePattern};
use dsr_core::Dimension;
use serde::{Deserialize, Serialize};

use crate::formats::FormatError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GraphFormat {
    Dot,
    Json,
}

impl GraphFormat {
    /// Format implied by a file extension.
    pub fn from_extension(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "dot" | "gv" => Some(Self::Dot),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

pub fn export_graph(graph: &ThemeGraph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Dot => graph_to_dot(graph),
        GraphFormat::Json => graph_to_json(graph),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Fill colour for a mean Oppose–Advocate score: red at -1, white at 0,
/// blue at +1.
pub fn regard_color(oa: f64) -> String {
    let t = oa.clamp(-1.0, 1.0);
    let fade = |x: f64| (255.0 * (1.0 - x.abs())).round() as u8;
    let (r, g, b) = if t < 0.0 {
        (255, fade(t), fade(t))
    } else {
        (fade(t), fade(t), 255)
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn edge_color(pattern: ThemePattern) -> &'static str {
    match pattern {
        ThemePattern::Harm => "#b2182b",
        ThemePattern::Help => "#2166ac",
    }
}

/// Graphviz rendering. Node width and edge pen width grow linearly with
/// frequency relative to the largest one.
pub fn graph_to_dot(graph: &ThemeGraph) -> String {
    let max_node = graph.nodes.values().map(|n| n.frequency).max().unwrap_or(1) as f64;
    let max_edge = graph.edges.iter().map(|e| e.frequency).max().unwrap_or(1) as f64;
    let mut out = String::from("digraph themes {\n");
    out.push_str("  node [shape=circle, style=filled, fixedsize=true, fontname=\"Helvetica\"];\n");
    out.push_str("  edge [fontname=\"Helvetica\"];\n");
    for (key, node) in &graph.nodes {
        let width = 0.5 + 1.5 * node.frequency as f64 / max_node;
        let _ = writeln!(
            out,
            "  {} [label={}, width={width:.3}, fillcolor=\"{}\"];",
            quote(key),
            quote(&format!("{key}\n{}", node.frequency)),
            regard_color(node.mean_oa)
        );
    }
    for e in &graph.edges {
        let pen = 1.0 + 4.0 * e.frequency as f64 / max_edge;
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{} ({})\", penwidth={pen:.3}, color=\"{}\"];",
            quote(&e.source),
            quote(&e.target),
            e.pattern.as_str(),
            e.frequency,
            edge_color(e.pattern)
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRec {
    id: String,
    frequency: usize,
    mean_oa: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRec {
    source: String,
    target: String,
    pattern: String,
    frequency: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRec {
    nodes: Vec<NodeRec>,
    edges: Vec<EdgeRec>,
}

pub fn graph_to_json(graph: &ThemeGraph) -> String {
    let rec = GraphRec {
        nodes: graph
            .nodes
            .iter()
            .map(|(id, n)| NodeRec {
                id: id.clone(),
                frequency: n.frequency,
                mean_oa: n.mean_oa,
            })
            .collect(),
        edges: graph
            .edges
            .iter()
            .map(|e| EdgeRec {
                source: e.source.clone(),
                target: e.target.clone(),
                pattern: e.pattern.as_str().to_string(),
                frequency: e.frequency,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&rec).expect("graph serializes");
    s.push('\n');
    s
}

pub fn graph_from_json(s: &str) -> Result<ThemeGraph, FormatError> {
    let rec: GraphRec = serde_json::from_str(s).map_err(|e| FormatError::Invalid(format!("graph: {e}")))?;
    let mut nodes = BTreeMap::new();
    for n in rec.nodes {
        let node = ThemeNode {
            frequency: n.frequency,
            mean_oa: n.mean_oa,
        };
        if nodes.insert(n.id.clone(), node).is_some() {
            return Err(FormatError::Invalid(format!("graph: node `{}` listed twice", n.id)));
        }
    }
    let edges = rec
        .edges
        .into_iter()
        .map(|e| {
            let pattern = ThemePattern::parse(&e.pattern)
                .ok_or_else(|| FormatError::Invalid(format!("graph: unknown pattern `{}`", e.pattern)))?;
            Ok(ThemeEdge {
                source: e.source,
                target: e.target,
                pattern,
                frequency: e.frequency,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(ThemeGraph::new(nodes, edges)?)
}

pub fn histogram_csv(hist: &Histogram, dimension: Dimension) -> String {
    let mut out = String::from("dimension,lower,upper,count\n");
    for (i, count) in hist.counts.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{count}", dimension.code(), hist.edges[i], hist.edges[i + 1]);
    }
    out
}

/// Two-decimal cell without the leading zero, as in published tables.
pub fn table_cell(v: f64) -> String {
    let s = format!("{v:.2}");
    match s.strip_prefix("0.") {
        Some(rest) => format!(".{rest}"),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colours_span_red_white_blue() {
        assert_eq!(regard_color(-1.0), "#ff0000");
        assert_eq!(regard_color(0.0), "#ffffff");
        assert_eq!(regard_color(1.0), "#0000ff");
        assert_eq!(regard_color(-0.5), "#ff8080");
        assert_eq!(regard_color(7.0), "#0000ff");
    }

    #[test]
    fn labels_are_escaped() {
        assert_eq!(quote("say \"hi\"\\"), "\"say \\\"hi\\\"\\\\\"");
    }

    #[test]
    fn histogram_rows_cover_the_range() {
        let h = dsr_core::analytics::histogram(&[-1.0, 0.0, 1.0], 4).unwrap();
        assert_eq!(
            histogram_csv(&h, Dimension::OpposeAdvocate),
            "dimension,lower,upper,count\noa,-1,-0.5,1\noa,-0.5,0,0\noa,0,0.5,1\noa,0.5,1,1\n"
        );
    }

    #[test]
    fn cells_drop_leading_zero() {
        assert_eq!(table_cell(0.944), ".94");
        assert_eq!(table_cell(1.0), "1.00");
        assert_eq!(table_cell(-0.25), "-0.25");
    }
}
