use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{MetaEdge, MetaGraph, MetaNode, NodeKind, Relation};
use crate::error::{Error, Result};

pub const GRAPH_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    GraphJson,
    Dot,
    Cypher,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 3] = [ExportFormat::GraphJson, ExportFormat::Dot, ExportFormat::Cypher];

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::GraphJson => "graph.json",
            ExportFormat::Dot => "dot",
            ExportFormat::Cypher => "cypher",
        }
    }

    /// Picks the format from an output file name.
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        match ext {
            "json" => Ok(ExportFormat::GraphJson),
            "dot" | "gv" => Ok(ExportFormat::Dot),
            "cypher" | "cql" => Ok(ExportFormat::Cypher),
            _ => Err(Error::Usage(format!(
                "cannot infer graph format from {}; use .json, .dot or .cypher",
                path.display()
            ))),
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph-json" | "json" => Ok(ExportFormat::GraphJson),
            "dot" => Ok(ExportFormat::Dot),
            "cypher" => Ok(ExportFormat::Cypher),
            other => Err(Error::Usage(format!("unknown graph format {other:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    version: u32,
    doc_id: String,
    nodes: Vec<MetaNode>,
    edges: Vec<MetaEdge>,
}

pub fn export(graph: &MetaGraph, format: ExportFormat) -> String {
    match format {
        ExportFormat::GraphJson => to_graph_json(graph),
        ExportFormat::Dot => to_dot(graph),
        ExportFormat::Cypher => to_cypher(graph),
    }
}

fn to_graph_json(graph: &MetaGraph) -> String {
    let file = GraphFile {
        version: GRAPH_FORMAT_VERSION,
        doc_id: graph.doc_id.clone(),
        nodes: graph.nodes().cloned().collect(),
        edges: graph.edges().cloned().collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("graph serializes");
    s.push('\n');
    s
}

pub fn parse_graph_json(text: &str) -> Result<MetaGraph> {
    let file: GraphFile = serde_json::from_str(text)?;
    if file.version != GRAPH_FORMAT_VERSION {
        return Err(Error::Validation(format!(
            "unsupported graph format version {}",
            file.version
        )));
    }
    let mut graph = MetaGraph::new(file.doc_id);
    for n in file.nodes {
        if graph.nodes.contains_key(&n.id) {
            return Err(Error::Validation(format!("duplicate node id {}", n.id)));
        }
        graph.nodes.insert(n.id.clone(), n);
    }
    graph.edges.extend(file.edges);
    graph.validate()?;
    Ok(graph)
}

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn to_dot(graph: &MetaGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quoted(&graph.doc_id));
    let _ = writeln!(out, "  rankdir=TB;");
    for n in graph.nodes() {
        let shape = match n.kind {
            NodeKind::Document => "doubleoctagon",
            NodeKind::Section => "box",
            NodeKind::Paragraph => "note",
            NodeKind::Reference => "ellipse",
            NodeKind::Entity | NodeKind::Attribute => continue,
        };
        let mut label: String = n.label.chars().take(40).collect();
        if n.label.chars().count() > 40 {
            label.push_str("...");
        }
        let _ = writeln!(
            out,
            "  {} [label={}, shape={shape}];",
            quoted(&n.id),
            quoted(&label)
        );
    }
    for e in graph.edges() {
        let style = match e.rel {
            Relation::HasSection | Relation::HasParagraph => "solid",
            Relation::Cites => "dashed",
            _ => continue,
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}, style={style}];",
            quoted(&e.src),
            quoted(&e.dst),
            quoted(e.rel.name())
        );
    }
    out.push_str("}\n");
    out
}

fn to_cypher(graph: &MetaGraph) -> String {
    let mut lines = vec![format!("// graph {}", graph.doc_id)];
    for n in graph.nodes() {
        let mut props = vec![
            format!("id: {}", quoted(&n.id)),
            format!("label: {}", quoted(&n.label)),
            format!("level: {}", n.level),
        ];
        if let Some(w) = n.weight {
            props.push(format!("pi: {}, si: {}", w.pi, w.si));
        }
        for (k, v) in &n.props {
            props.push(format!("{k}: {}", quoted(v)));
        }
        lines.push(format!(
            "CREATE (n{}:{} {{{}}})",
            n.id,
            n.kind.as_str(),
            props.join(", ")
        ));
    }
    for e in graph.edges() {
        let rel = e.rel.name().to_uppercase();
        let props = match &e.rel {
            Relation::Relates(p) => format!(" {{predicate: {}}}", quoted(p)),
            _ => String::new(),
        };
        lines.push(format!("CREATE (n{})-[:{rel}{props}]->(n{})", e.src, e.dst));
    }
    let statements = lines.len() > 1;
    let mut out = lines.join("\n");
    if statements {
        out.push(';');
    }
    out.push('\n');
    out
}
