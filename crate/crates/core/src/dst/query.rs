use super::{Dst, DstNode, NodeId, VertexKind};
use crate::error::{Error, Result};
use crate::model::SentenceCoord;

/// The upper neighbour used in `parent < child < right parent` checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightParent {
    Vertex(NodeId),
    /// No real vertex to the right of the parent on its level; the bound is
    /// the sentinel. `level` is the parent's level. Children of the root are
    /// bounded by the sentinel as well.
    Sentinel {
        level: u8,
    },
}

impl RightParent {
    pub fn weight(self, tree: &Dst) -> SentenceCoord {
        match self {
            RightParent::Vertex(id) => tree.node(id).weight.unwrap_or(SentenceCoord::SENTINEL),
            RightParent::Sentinel { .. } => SentenceCoord::SENTINEL,
        }
    }

    /// The ARS vertex behind a sentinel bound, when that level has one.
    pub fn node(self, tree: &Dst) -> Option<&DstNode> {
        match self {
            RightParent::Vertex(id) => Some(tree.node(id)),
            RightParent::Sentinel { level } => tree.ars(level),
        }
    }
}

impl Dst {
    fn row_neighbour(&self, id: NodeId, step: isize) -> Option<NodeId> {
        let row = self.row(self.node(id).level);
        let pos = row.iter().position(|&n| n == id)?;
        let target = pos as isize + step;
        usize::try_from(target).ok().and_then(|t| row.get(t).copied())
    }

    /// Nearest vertex to the right of `id`'s parent on the parent's level,
    /// or that level's ARS.
    pub fn right_parent(&self, id: NodeId) -> Result<RightParent> {
        let parent = self.parent_of(id)?;
        Ok(match self.row_neighbour(parent, 1) {
            Some(rp) => RightParent::Vertex(rp),
            None => RightParent::Sentinel {
                level: self.node(parent).level,
            },
        })
    }

    /// Nearest vertex to the left of `id`'s parent on the parent's level.
    pub fn left_parent(&self, id: NodeId) -> Result<Option<NodeId>> {
        let parent = self.parent_of(id)?;
        Ok(self.row_neighbour(parent, -1))
    }

    fn parent_of(&self, id: NodeId) -> Result<NodeId> {
        if id.0 >= self.nodes.len() {
            return Err(Error::Contract(format!("unknown vertex {}", id.0)));
        }
        self.node(id)
            .parent
            .ok_or_else(|| Error::Contract("the root has no parent".into()))
    }

    /// Exclusive upper bound of the weights in `id`'s subtree: the weight of
    /// the first vertex after that subtree in pre-order, else the sentinel.
    pub fn upper_bound(&self, id: NodeId) -> SentenceCoord {
        let mut cur = id;
        while let Some(parent) = self.node(cur).parent {
            let siblings = &self.node(parent).subtree;
            let pos = siblings
                .iter()
                .position(|&s| s == cur)
                .expect("child listed by parent");
            if let Some(&next) = siblings.get(pos + 1) {
                return self.node(next).weight.unwrap_or(SentenceCoord::SENTINEL);
            }
            cur = parent;
        }
        SentenceCoord::SENTINEL
    }

    /// The deepest section vertex whose interval `[weight, upper_bound)`
    /// contains `coord`; the root when `coord` precedes every section.
    pub fn locate(&self, coord: SentenceCoord) -> NodeId {
        let mut cur = NodeId::ROOT;
        loop {
            let next = self
                .node(cur)
                .subtree
                .iter()
                .copied()
                .filter(|&c| self.node(c).kind == VertexKind::Section)
                .take_while(|&c| self.node(c).weight.is_some_and(|w| w <= coord))
                .last();
            match next {
                Some(c) if coord < self.upper_bound(c) => cur = c,
                _ => return cur,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::build_dst;
    use super::*;
    use crate::model::{Element, ElementClass, ElementClass::*};

    fn el(class: ElementClass, pi: u32) -> Element {
        Element::from_text(class, format!("{class} {pi}"), SentenceCoord::new(pi, 0))
    }

    fn outline() -> Dst {
        let els = vec![
            el(Title, 0),
            el(Section1, 2),
            el(Section2, 3),
            el(Section2, 5),
            el(Section1, 8),
        ];
        build_dst("d", &els, 4).unwrap()
    }

    #[test]
    fn right_parent_is_next_on_parent_level() {
        // root -> A, B, C (level 1); A -> x, y, z (level 2)
        let els = vec![
            el(Section1, 0),
            el(Section2, 1),
            el(Section2, 2),
            el(Section2, 3),
            el(Section1, 4),
            el(Section1, 5),
            el(Section2, 6),
        ];
        let t = build_dst("d", &els, 4).unwrap();
        let a = t.root().subtree[0];
        let b = t.root().subtree[1];
        let c = t.root().subtree[2];
        let y = t.node(a).subtree[1];
        assert_eq!(t.right_parent(y).unwrap(), RightParent::Vertex(b));
        assert_eq!(t.left_parent(y).unwrap(), None);

        let under_c = t.node(c).subtree[0];
        let rp = t.right_parent(under_c).unwrap();
        assert_eq!(rp, RightParent::Sentinel { level: 1 });
        assert_eq!(rp.node(&t).unwrap().kind, VertexKind::Ars);
        assert_eq!(rp.weight(&t), SentenceCoord::SENTINEL);
        assert_eq!(t.left_parent(under_c).unwrap(), Some(b));

        assert_eq!(t.right_parent(a).unwrap(), RightParent::Sentinel { level: 0 });
        assert!(matches!(t.right_parent(NodeId::ROOT), Err(Error::Contract(_))));
    }

    #[test]
    fn locate_cases() {
        let t = outline();
        let s1a = t.root().subtree[0];
        let s2a = t.node(s1a).subtree[0];
        let s2b = t.node(s1a).subtree[1];
        let s1b = t.root().subtree[1];
        assert_eq!(t.locate(SentenceCoord::new(4, 0)), s2a);
        assert_eq!(t.locate(SentenceCoord::new(5, 0)), s2b);
        assert_eq!(t.locate(SentenceCoord::new(7, 3)), s2b);
        assert_eq!(t.locate(SentenceCoord::new(40, 0)), s1b);
        assert_eq!(t.locate(SentenceCoord::new(1, 9)), NodeId::ROOT);
        assert_eq!(t.upper_bound(s2a), SentenceCoord::new(5, 0));
        assert_eq!(t.upper_bound(s2b), SentenceCoord::new(8, 0));
        assert_eq!(t.upper_bound(s1b), SentenceCoord::SENTINEL);
    }
}
