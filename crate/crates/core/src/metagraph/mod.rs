//! Metaknowledge graph generated from a Document Structure Tree.
//!
//! The document node is the first layer and carries attribute nodes
//! (issuing authority, date, addressee, ...). Section vertices form the
//! following layers and paragraphs hang off them. Contextual triples become
//! entity nodes joined by a `relates` edge and attached to the section that
//! owns their origin sentence through `mentions` edges. The reference
//! network adds one node per bibliography entry with `cites` edges.

mod export;
mod references;
mod triples;

pub use export::{export, parse_graph_json, ExportFormat, GRAPH_FORMAT_VERSION};
pub use references::{build_reference_network, citation_markers, parse_reference_list, Reference};
pub use triples::{parse_triples, write_triples, ContextTriple, TripleExtractor};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diag::Diagnostic;
use crate::dst::{Dst, NodeId, VertexKind};
use crate::error::{Error, Result};
use crate::model::{Element, SentenceCoord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Document,
    Section,
    Paragraph,
    Entity,
    Attribute,
    Reference,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Document => "Document",
            NodeKind::Section => "Section",
            NodeKind::Paragraph => "Paragraph",
            NodeKind::Entity => "Entity",
            NodeKind::Attribute => "Attribute",
            NodeKind::Reference => "Reference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaNode {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    pub level: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<SentenceCoord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub props: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    HasSection,
    HasParagraph,
    HasAttribute,
    Mentions,
    Relates(String),
    Cites,
}

impl Relation {
    pub fn name(&self) -> &'static str {
        match self {
            Relation::HasSection => "has_section",
            Relation::HasParagraph => "has_paragraph",
            Relation::HasAttribute => "has_attribute",
            Relation::Mentions => "mentions",
            Relation::Relates(_) => "relates",
            Relation::Cites => "cites",
        }
    }

    pub fn is_hierarchy(&self) -> bool {
        matches!(self, Relation::HasSection | Relation::HasParagraph)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "EdgeRecord", try_from = "EdgeRecord")]
pub struct MetaEdge {
    pub src: String,
    pub dst: String,
    pub rel: Relation,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    src: String,
    dst: String,
    rel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    predicate: Option<String>,
}

impl From<MetaEdge> for EdgeRecord {
    fn from(e: MetaEdge) -> Self {
        let predicate = match &e.rel {
            Relation::Relates(p) => Some(p.clone()),
            _ => None,
        };
        EdgeRecord {
            src: e.src,
            dst: e.dst,
            rel: e.rel.name().to_string(),
            predicate,
        }
    }
}

impl TryFrom<EdgeRecord> for MetaEdge {
    type Error = String;

    fn try_from(r: EdgeRecord) -> std::result::Result<Self, String> {
        let rel = match (r.rel.as_str(), r.predicate) {
            ("has_section", None) => Relation::HasSection,
            ("has_paragraph", None) => Relation::HasParagraph,
            ("has_attribute", None) => Relation::HasAttribute,
            ("mentions", None) => Relation::Mentions,
            ("cites", None) => Relation::Cites,
            ("relates", Some(p)) if !p.is_empty() => Relation::Relates(p),
            (other, _) => return Err(format!("bad edge relation {other:?}")),
        };
        Ok(MetaEdge {
            src: r.src,
            dst: r.dst,
            rel,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetaGraph {
    pub doc_id: String,
    nodes: BTreeMap<String, MetaNode>,
    edges: BTreeSet<MetaEdge>,
}

/// Stable content hash for a node.
pub fn node_id(kind: NodeKind, scope: &str, label: &str, weight: Option<SentenceCoord>) -> String {
    let mut h = Sha256::new();
    h.update(kind.as_str().as_bytes());
    h.update([0x1f]);
    h.update(scope.as_bytes());
    h.update([0x1f]);
    h.update(label.as_bytes());
    h.update([0x1f]);
    if let Some(w) = weight {
        h.update(format!("{},{}", w.pi, w.si).as_bytes());
    }
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

impl MetaGraph {
    pub fn new(doc_id: impl Into<String>) -> Self {
        MetaGraph {
            doc_id: doc_id.into(),
            ..Default::default()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &MetaNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &MetaEdge> {
        self.edges.iter()
    }

    pub fn node(&self, id: &str) -> Option<&MetaNode> {
        self.nodes.get(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Inserts a node, keeping an existing node with the same id.
    pub fn add_node(&mut self, node: MetaNode) -> &str {
        let id = node.id.clone();
        self.nodes.entry(id).or_insert(node).id.as_str()
    }

    pub fn add_edge(&mut self, src: &str, dst: &str, rel: Relation) -> Result<()> {
        for end in [src, dst] {
            if !self.nodes.contains_key(end) {
                return Err(Error::Contract(format!("edge endpoint {end} not in graph")));
            }
        }
        self.edges.insert(MetaEdge {
            src: src.to_string(),
            dst: dst.to_string(),
            rel,
        });
        Ok(())
    }

    pub fn children(&self, id: &str, hierarchy_only: bool) -> Vec<&MetaNode> {
        self.edges
            .iter()
            .filter(|e| e.src == id && (!hierarchy_only || e.rel.is_hierarchy()))
            .filter_map(|e| self.nodes.get(&e.dst))
            .collect()
    }

    pub fn document_node(&self) -> Option<&MetaNode> {
        self.nodes.values().find(|n| n.kind == NodeKind::Document)
    }

    /// Checks that every edge endpoint exists.
    pub fn validate(&self) -> Result<()> {
        for e in &self.edges {
            for end in [&e.src, &e.dst] {
                if !self.nodes.contains_key(end) {
                    return Err(Error::Validation(format!("edge endpoint {end} not in graph")));
                }
            }
        }
        Ok(())
    }
}

/// Graph node id of a tree vertex.
pub fn vertex_node_id(tree: &Dst, id: NodeId) -> String {
    let v = tree.node(id);
    match v.kind {
        VertexKind::Root => node_id(NodeKind::Document, tree.doc_id(), "", None),
        VertexKind::Section => node_id(NodeKind::Section, tree.doc_id(), &v.label(), v.weight),
        _ => node_id(NodeKind::Paragraph, tree.doc_id(), &v.label(), v.weight),
    }
}

/// Document attributes carried on the tree root.
pub fn document_attributes(tree: &Dst) -> Vec<Element> {
    tree.root()
        .content
        .iter()
        .filter(|e| e.class.is_document_attribute())
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphBuild {
    pub graph: MetaGraph,
    pub diagnostics: Vec<Diagnostic>,
}

/// Builds the graph: hierarchy nodes mirroring the tree, attribute nodes on
/// the document, and triples attached to the section owning their origin.
/// Triples whose origin lies past the document's last paragraph are skipped
/// with a diagnostic.
pub fn generate(tree: &Dst, attributes: &[Element], triples: &[ContextTriple]) -> GraphBuild {
    let mut graph = MetaGraph::new(tree.doc_id());
    let mut diagnostics = Vec::new();

    for vid in tree.preorder() {
        let v = tree.node(vid);
        let (kind, label) = match v.kind {
            VertexKind::Root => {
                let title = v.label();
                (
                    NodeKind::Document,
                    if title.is_empty() {
                        tree.doc_id().to_string()
                    } else {
                        title
                    },
                )
            }
            VertexKind::Section => (NodeKind::Section, v.label()),
            _ => (NodeKind::Paragraph, v.label()),
        };
        let mut props = BTreeMap::new();
        if let Some(class) = v.content.first().map(|e| e.class) {
            if v.kind != VertexKind::Root {
                props.insert("class".to_string(), class.to_string());
            }
        }
        if v.kind == VertexKind::Root {
            props.insert("doc_id".to_string(), tree.doc_id().to_string());
        }
        let id = vertex_node_id(tree, vid);
        graph.add_node(MetaNode {
            id: id.clone(),
            kind,
            label,
            level: v.level,
            weight: v.weight,
            props,
        });
        if let Some(parent) = v.parent {
            let rel = if v.kind == VertexKind::Section {
                Relation::HasSection
            } else {
                Relation::HasParagraph
            };
            graph
                .add_edge(&vertex_node_id(tree, parent), &id, rel)
                .expect("parents are inserted first in pre-order");
        }
    }

    let doc = vertex_node_id(tree, NodeId::ROOT);
    for a in attributes {
        let mut props = BTreeMap::new();
        props.insert("class".to_string(), a.class.to_string());
        let label = a.text.clone();
        let id = node_id(
            NodeKind::Attribute,
            tree.doc_id(),
            &format!("{}:{}", a.class, label),
            a.coord,
        );
        graph.add_node(MetaNode {
            id: id.clone(),
            kind: NodeKind::Attribute,
            label,
            level: 0,
            weight: a.coord,
            props,
        });
        graph
            .add_edge(&doc, &id, Relation::HasAttribute)
            .expect("both nodes exist");
    }

    let last_pi = tree
        .elements_in_order()
        .iter()
        .filter_map(|e| e.coord)
        .map(|c| c.pi)
        .max();
    for t in triples {
        if last_pi.is_none_or(|p| t.origin.pi > p) {
            diagnostics.push(Diagnostic::new(
                "graph",
                tree.doc_id(),
                format!(
                    "triple ({}, {}, {}) at {} lies outside the document; skipped",
                    t.subject, t.predicate, t.object, t.origin
                ),
            ));
            continue;
        }
        let owner = vertex_node_id(tree, tree.locate(t.origin));
        let mut entity = |label: &str| {
            let id = node_id(NodeKind::Entity, "", label, None);
            graph.add_node(MetaNode {
                id: id.clone(),
                kind: NodeKind::Entity,
                label: label.to_string(),
                level: 0,
                weight: None,
                props: BTreeMap::new(),
            });
            id
        };
        let s = entity(&t.subject);
        let o = entity(&t.object);
        graph
            .add_edge(&s, &o, Relation::Relates(t.predicate.clone()))
            .expect("entities exist");
        graph
            .add_edge(&owner, &s, Relation::Mentions)
            .expect("owner exists");
        graph
            .add_edge(&owner, &o, Relation::Mentions)
            .expect("owner exists");
    }

    GraphBuild { graph, diagnostics }
}
