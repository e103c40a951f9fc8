use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Dst, NodeId, VertexKind};
use crate::error::{Error, Result};
use crate::model::{Element, SentenceCoord};

pub const DST_FORMAT_VERSION: u32 = 1;

/// Recursive vertex record: `{level, weight: [pi, si], content, subtree}`.
/// The root's weight is `null`. ARS vertices are never written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerNode {
    pub kind: VertexKind,
    pub level: u8,
    pub weight: Option<SentenceCoord>,
    pub content: Vec<Element>,
    pub subtree: Vec<SerNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DstFile {
    pub version: u32,
    pub doc_id: String,
    pub max_depth: u8,
    pub root: SerNode,
}

impl Dst {
    fn ser_node(&self, id: NodeId) -> SerNode {
        let n = self.node(id);
        SerNode {
            kind: n.kind,
            level: n.level,
            weight: n.weight,
            content: n.content.clone(),
            subtree: n.subtree.iter().map(|&c| self.ser_node(c)).collect(),
        }
    }

    pub fn to_file(&self) -> DstFile {
        DstFile {
            version: DST_FORMAT_VERSION,
            doc_id: self.doc_id.clone(),
            max_depth: self.max_depth,
            root: self.ser_node(NodeId::ROOT),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("tree serializes");
        s.push('\n');
        s
    }

    pub fn from_file(file: &DstFile) -> Result<Dst> {
        if file.version != DST_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported tree format version {}",
                file.version
            )));
        }
        if file.root.kind != VertexKind::Root || file.root.level != 0 || file.root.weight.is_some() {
            return Err(Error::Validation(
                "tree root must be a level-0 root with null weight".into(),
            ));
        }
        let mut tree = Dst::new(file.doc_id.clone(), file.max_depth)?;
        tree.root_mut().content = file.root.content.clone();
        // pre-order insertion keeps level rows left to right
        let mut stack: Vec<(NodeId, &SerNode)> = file
            .root
            .subtree
            .iter()
            .rev()
            .map(|c| (NodeId::ROOT, c))
            .collect();
        while let Some((parent, node)) = stack.pop() {
            let weight = node
                .weight
                .ok_or_else(|| Error::Validation("non-root vertex without weight".into()))?;
            let id = tree.push_vertex(parent, node.kind, node.level, weight, node.content.clone())?;
            stack.extend(node.subtree.iter().rev().map(|c| (id, c)));
        }
        Ok(tree)
    }

    pub fn from_json(text: &str) -> Result<Dst> {
        let file: DstFile = serde_json::from_str(text)?;
        Dst::from_file(&file)
    }

    /// Indented human-readable outline.
    pub fn to_outline(&self) -> String {
        let mut out = String::new();
        let root = self.root();
        let title = root.label();
        let _ = writeln!(
            out,
            "{} {}",
            self.doc_id,
            if title.is_empty() {
                "(untitled)".to_string()
            } else {
                format!("\"{}\"", title)
            }
        );
        for e in root.content.iter().filter(|e| e.class.is_document_attribute()) {
            let _ = writeln!(out, "  @{}: {}", e.class, e.text);
        }
        for &c in &root.subtree {
            self.outline_node(c, 1, &mut out);
        }
        out
    }

    fn outline_node(&self, id: NodeId, depth: usize, out: &mut String) {
        let n = self.node(id);
        let w = n.weight.unwrap_or_default();
        let marker = match n.kind {
            VertexKind::Leaf => "-".to_string(),
            _ => format!("L{}", n.level),
        };
        let mut label = n.label();
        if label.chars().count() > 60 {
            label = label.chars().take(57).collect::<String>() + "...";
        }
        let _ = writeln!(out, "{}{marker} {w} {label}", "  ".repeat(depth));
        for &c in &n.subtree {
            self.outline_node(c, depth + 1, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::build_dst;
    use super::*;
    use crate::model::ElementClass::{self, *};

    fn el(class: ElementClass, pi: u32) -> Element {
        Element::from_text(class, format!("{class} {pi}"), SentenceCoord::new(pi, 0))
    }

    #[test]
    fn json_round_trip_and_shape() {
        let els = vec![
            el(Title, 0),
            el(Addressee, 1),
            el(Section1, 2),
            el(Paragraph, 3),
            el(Section2, 4),
        ];
        let t = build_dst("doc", &els, 4).unwrap();
        let json = t.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["root"]["weight"], serde_json::Value::Null);
        assert_eq!(v["root"]["subtree"][0]["weight"], serde_json::json!([2, 0]));
        assert_eq!(v["root"]["subtree"][0]["level"], 1);
        assert!(!json.contains("ars"));
        let back = Dst::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
        assert_eq!(back.elements_in_order(), t.elements_in_order());
    }

    #[test]
    fn outline_text() {
        let els = vec![
            el(Title, 0),
            el(IssuingAuthority, 1),
            el(Section1, 2),
            el(Paragraph, 3),
        ];
        let t = build_dst("doc", &els, 4).unwrap();
        assert_eq!(
            t.to_outline(),
            "doc \"Title 0\"\n  @IssuingAuthority: IssuingAuthority 1\n  L1 (2,0) Section1 2\n    - (3,0) Paragraph 3\n"
        );
    }
}
