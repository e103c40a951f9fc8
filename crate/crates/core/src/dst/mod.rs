//! Document Structure Tree.
//!
//! A rooted tree whose vertex weights are sentence coordinates. The root sits
//! at level 0 and carries the title and document attributes as content;
//! section headings open vertices at their own level and paragraphs become
//! leaves one level below the deepest open section. Children are ordered by
//! strictly increasing weight and every child outweighs its parent.
//!
//! Each level below the deepest one is closed on the right by an absolute
//! right subtree (ARS): a vertex with sentinel weight `(0x3F3F3F3F,
//! 0x3F3F3F3F)` that takes part in weight comparisons but is never visited.
//!
//! Vertices live in an arena and point to their parent by [`NodeId`].

mod check;
mod export;
mod query;

pub use check::Violation;
pub use export::{DstFile, SerNode};
pub use query::RightParent;

use crate::diag::Diagnostic;
use crate::error::{Error, Result};
use crate::model::{Element, ElementClass, SentenceCoord};

pub const DEFAULT_MAX_DEPTH: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Root,
    Section,
    Leaf,
    Ars,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DstNode {
    pub kind: VertexKind,
    pub level: u8,
    /// `None` only for the root, which precedes every coordinate.
    pub weight: Option<SentenceCoord>,
    pub content: Vec<Element>,
    pub parent: Option<NodeId>,
    pub subtree: Vec<NodeId>,
}

impl DstNode {
    fn ars(level: u8) -> Self {
        DstNode {
            kind: VertexKind::Ars,
            level,
            weight: Some(SentenceCoord::SENTINEL),
            content: Vec::new(),
            parent: None,
            subtree: Vec::new(),
        }
    }

    pub fn is_section(&self) -> bool {
        self.kind == VertexKind::Section
    }

    /// Heading or first sentence text, empty for the root without a title.
    pub fn label(&self) -> String {
        match self.kind {
            VertexKind::Root => self
                .content
                .iter()
                .filter(|e| e.class == ElementClass::Title)
                .map(|e| e.text.as_str())
                .collect::<Vec<_>>()
                .join(" "),
            _ => self
                .content
                .iter()
                .map(|e| e.text.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dst {
    doc_id: String,
    max_depth: u8,
    nodes: Vec<DstNode>,
    /// Vertices of each level, left to right.
    rows: Vec<Vec<NodeId>>,
    /// ARS of levels `1..max_depth`, index `level - 1`.
    ars: Vec<DstNode>,
    warnings: Vec<Diagnostic>,
}

impl Dst {
    /// A tree holding only an empty root.
    pub fn new(doc_id: impl Into<String>, max_depth: u8) -> Result<Self> {
        if max_depth < 2 {
            return Err(Error::Usage(format!(
                "max depth must be at least 2, got {max_depth}"
            )));
        }
        let root = DstNode {
            kind: VertexKind::Root,
            level: 0,
            weight: None,
            content: Vec::new(),
            parent: None,
            subtree: Vec::new(),
        };
        let mut rows = vec![Vec::new(); usize::from(max_depth) + 1];
        rows[0].push(NodeId::ROOT);
        Ok(Dst {
            doc_id: doc_id.into(),
            max_depth,
            nodes: vec![root],
            rows,
            ars: (1..max_depth).map(DstNode::ars).collect(),
            warnings: Vec::new(),
        })
    }

    /// Appends a vertex as the rightmost child of `parent`. Vertices must be
    /// pushed in pre-order so that level rows stay left-to-right. No weight
    /// ordering is enforced here; [`Dst::check_properties`] reports breaches.
    pub fn push_vertex(
        &mut self,
        parent: NodeId,
        kind: VertexKind,
        level: u8,
        weight: SentenceCoord,
        content: Vec<Element>,
    ) -> Result<NodeId> {
        if parent.0 >= self.nodes.len() {
            return Err(Error::Contract(format!("unknown parent vertex {}", parent.0)));
        }
        if kind == VertexKind::Root || kind == VertexKind::Ars {
            return Err(Error::Contract("root and ARS vertices cannot be pushed".into()));
        }
        if level == 0 || level > self.max_depth {
            return Err(Error::Validation(format!(
                "vertex level {level} outside 1..={}",
                self.max_depth
            )));
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(DstNode {
            kind,
            level,
            weight: Some(weight),
            content,
            parent: Some(parent),
            subtree: Vec::new(),
        });
        self.nodes[parent.0].subtree.push(id);
        self.rows[usize::from(level)].push(id);
        Ok(id)
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn max_depth(&self) -> u8 {
        self.max_depth
    }

    pub fn root(&self) -> &DstNode {
        &self.nodes[0]
    }

    pub fn root_mut(&mut self) -> &mut DstNode {
        &mut self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &DstNode {
        &self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1 && self.nodes[0].content.is_empty()
    }

    /// All real vertices in pre-order, root first.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![NodeId::ROOT];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id.0].subtree.iter().rev().copied());
        }
        out
    }

    pub fn row(&self, level: u8) -> &[NodeId] {
        self.rows.get(usize::from(level)).map_or(&[], Vec::as_slice)
    }

    /// The ARS closing `level`, for levels `1..max_depth`.
    pub fn ars(&self, level: u8) -> Option<&DstNode> {
        usize::from(level).checked_sub(1).and_then(|i| self.ars.get(i))
    }

    pub fn ars_levels(&self) -> impl Iterator<Item = u8> + '_ {
        self.ars.iter().map(|n| n.level)
    }

    pub fn warnings(&self) -> &[Diagnostic] {
        &self.warnings
    }

    /// Elements in reading order. A vertex's content and its subtrees are
    /// interleaved by weight, so document attributes that trail the body
    /// (signature, date) come out after it.
    pub fn elements_in_order(&self) -> Vec<&Element> {
        let mut out = Vec::new();
        self.collect_in_order(NodeId::ROOT, &mut out);
        out
    }

    fn collect_in_order<'a>(&'a self, id: NodeId, out: &mut Vec<&'a Element>) {
        let node = &self.nodes[id.0];
        let mut content = node.content.iter().peekable();
        for &child in &node.subtree {
            let cw = self.nodes[child.0].weight;
            while let Some(e) = content.next_if(|e| e.coord < cw) {
                out.push(e);
            }
            self.collect_in_order(child, out);
        }
        out.extend(content);
    }
}

/// Builds the tree from elements sorted by sentence coordinate in a single
/// left-to-right pass.
///
/// * `Title` and document attributes go to the root's content.
/// * `SectionN` opens a vertex at level `N` under the most recent open vertex
///   of a lower level. A missing intermediate level is recorded as a warning.
/// * `Paragraph` becomes a leaf under the deepest open vertex; consecutive
///   sentences of one paragraph share a leaf.
pub fn build_dst(doc_id: &str, elements: &[Element], max_depth: u8) -> Result<Dst> {
    let mut tree = Dst::new(doc_id, max_depth)?;
    let mut open: Vec<NodeId> = vec![NodeId::ROOT];
    let mut last_leaf: Option<(NodeId, u32)> = None;
    let mut prev: Option<SentenceCoord> = None;

    for e in elements {
        let coord = e.coord.ok_or_else(|| {
            Error::Validation(format!(
                "{doc_id}: element {:?} has no sentence coordinate",
                e.text
            ))
        })?;
        if !coord.is_real() {
            return Err(Error::Validation(format!(
                "{doc_id}: coordinate {coord} is out of range"
            )));
        }
        if let Some(p) = prev {
            if coord <= p {
                return Err(Error::Validation(format!(
                    "{doc_id}: elements not sorted, {coord} follows {p}"
                )));
            }
        }
        prev = Some(coord);

        if let Some(level) = e.class.section_level() {
            last_leaf = None;
            if level >= max_depth {
                return Err(Error::Validation(format!(
                    "{doc_id}: {} needs level {level} but max depth is {max_depth}",
                    e.class
                )));
            }
            while tree.node(*open.last().expect("root stays open")).level >= level {
                open.pop();
            }
            let parent = *open.last().expect("root stays open");
            let parent_level = tree.node(parent).level;
            if parent_level + 1 < level {
                tree.warnings.push(Diagnostic::new(
                    "tree",
                    doc_id,
                    format!(
                        "{} at {coord} skips level {}; attached under level {parent_level}",
                        e.class,
                        parent_level + 1
                    ),
                ));
            }
            let id = tree.push_vertex(parent, VertexKind::Section, level, coord, vec![e.clone()])?;
            open.push(id);
        } else if e.class == ElementClass::Paragraph {
            match last_leaf {
                Some((leaf, pi)) if pi == coord.pi => tree.nodes[leaf.0].content.push(e.clone()),
                _ => {
                    let parent = *open.last().expect("root stays open");
                    let level = tree.node(parent).level + 1;
                    let id = tree.push_vertex(parent, VertexKind::Leaf, level, coord, vec![e.clone()])?;
                    last_leaf = Some((id, coord.pi));
                }
            }
        } else {
            last_leaf = None;
            tree.nodes[0].content.push(e.clone());
        }
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ElementClass::*;

    pub(crate) fn el(class: ElementClass, pi: u32) -> Element {
        Element::from_text(class, format!("{class} {pi}"), SentenceCoord::new(pi, 0))
    }

    fn weights(t: &Dst, ids: &[NodeId]) -> Vec<(u32, u32)> {
        ids.iter().map(|&i| t.node(i).weight.unwrap().into()).collect()
    }

    #[test]
    fn outline_example() {
        let els = vec![
            el(Title, 0),
            el(Section1, 2),
            el(Section2, 3),
            el(Section2, 5),
            el(Section1, 8),
        ];
        let t = build_dst("d", &els, 4).unwrap();
        let top = &t.root().subtree;
        assert_eq!(weights(&t, top), vec![(2, 0), (8, 0)]);
        assert_eq!(weights(&t, &t.node(top[0]).subtree), vec![(3, 0), (5, 0)]);
        assert!(t.node(top[1]).subtree.is_empty());
        assert_eq!(t.root().content.len(), 1);
        assert!(t.warnings().is_empty());
    }

    #[test]
    fn title_only_is_single_root() {
        let t = build_dst("d", &[el(Title, 0)], 4).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.root().label(), "Title 0");
    }

    #[test]
    fn ars_per_level() {
        let t = build_dst("d", &[], 4).unwrap();
        assert_eq!(t.ars_levels().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(t.ars(2).unwrap().weight, Some(SentenceCoord::SENTINEL));
        assert!(t.ars(0).is_none() && t.ars(4).is_none());
    }

    #[test]
    fn paragraphs_become_leaves() {
        let els = vec![
            el(Title, 0),
            el(Paragraph, 1),
            el(Section1, 2),
            Element::from_text(Paragraph, "a", SentenceCoord::new(3, 0)),
            Element::from_text(Paragraph, "b", SentenceCoord::new(3, 1)),
            el(Section2, 4),
            el(Section3, 5),
            el(Paragraph, 6),
        ];
        let t = build_dst("d", &els, 4).unwrap();
        let top = &t.root().subtree;
        assert_eq!(t.node(top[0]).kind, VertexKind::Leaf);
        assert_eq!(t.node(top[0]).level, 1);
        let s1 = t.node(top[1]);
        let leaf = t.node(s1.subtree[0]);
        assert_eq!((leaf.level, leaf.content.len()), (2, 2));
        let s3 = t.row(3)[0];
        let deep = t.node(t.node(s3).subtree[0]);
        assert_eq!(deep.level, 4);
        assert_eq!(
            t.elements_in_order().into_iter().cloned().collect::<Vec<_>>(),
            els
        );
    }

    #[test]
    fn trailing_attributes_keep_reading_order() {
        let els = vec![
            el(DocumentNumber, 0),
            el(Title, 1),
            el(Section1, 2),
            el(Paragraph, 3),
            el(IssuingAuthority, 4),
            el(DateOfWriting, 5),
        ];
        let t = build_dst("d", &els, 4).unwrap();
        assert_eq!(t.root().content.len(), 4);
        assert_eq!(
            t.elements_in_order().into_iter().cloned().collect::<Vec<_>>(),
            els
        );
    }

    #[test]
    fn level_skip_warns() {
        let t = build_dst(
            "d",
            &[el(Title, 0), el(Section2, 1), el(Section1, 2), el(Section3, 3)],
            4,
        )
        .unwrap();
        assert_eq!(t.warnings().len(), 2);
        assert_eq!(t.node(t.root().subtree[0]).level, 2);
        assert!(t.check_properties().is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_dst("d", &[el(Section1, 3), el(Section1, 2)], 4).is_err());
        assert!(build_dst("d", &[el(Section1, 3), el(Section1, 3)], 4).is_err());
        let mut no_coord = el(Title, 0);
        no_coord.coord = None;
        assert!(build_dst("d", &[no_coord], 4).is_err());
        assert!(build_dst("d", &[el(Section3, 0)], 3).is_err());
        assert!(build_dst("d", &[], 1).is_err());
    }

    #[test]
    fn configurable_depth() {
        let t = build_dst("d", &[el(Section1, 0), el(Section2, 1), el(Paragraph, 2)], 3).unwrap();
        assert_eq!(t.ars_levels().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(t.row(3).len(), 1);
    }
}
