use std::fmt;

use super::{Dst, NodeId, RightParent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `weight(parent) < weight(child)` fails.
    ParentOrder { parent: NodeId, child: NodeId },
    /// `weight(vertex) < weight(right_parent(vertex))` fails.
    RightParentOrder {
        vertex: NodeId,
        right_parent: RightParent,
    },
    /// Siblings are not in strictly increasing weight order.
    SiblingOrder { left: NodeId, right: NodeId },
    /// A vertex of `scope`'s subtree falls between `scope` and its lightest
    /// child, so the weights no longer determine its level.
    LevelBracket { vertex: NodeId, scope: NodeId },
}

impl Violation {
    /// Whether this is a breach of the parent / child / right-parent sandwich.
    pub fn is_sandwich(&self) -> bool {
        matches!(
            self,
            Violation::ParentOrder { .. } | Violation::RightParentOrder { .. }
        )
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ParentOrder { parent, child } => {
                write!(f, "vertex {} does not outweigh its parent {}", child.0, parent.0)
            }
            Violation::RightParentOrder { vertex, right_parent } => match right_parent {
                RightParent::Vertex(rp) => {
                    write!(
                        f,
                        "vertex {} does not precede its right parent {}",
                        vertex.0, rp.0
                    )
                }
                RightParent::Sentinel { level } => {
                    write!(f, "vertex {} reaches the level-{level} sentinel", vertex.0)
                }
            },
            Violation::SiblingOrder { left, right } => {
                write!(f, "siblings {} and {} out of weight order", left.0, right.0)
            }
            Violation::LevelBracket { vertex, scope } => write!(
                f,
                "vertex {} lies between vertex {} and its first child",
                vertex.0, scope.0
            ),
        }
    }
}

impl Dst {
    /// Checks every real vertex for
    ///
    /// * `weight(parent) < weight(vertex) < weight(right_parent(vertex))`,
    ///   with the sentinel standing in for a missing right parent;
    /// * strictly increasing sibling weights;
    /// * level bracketing, scoped to each vertex `P` and its children: no
    ///   vertex of `P`'s subtree other than `P` may weigh at least `P` and
    ///   less than `P`'s lightest child.
    ///
    /// Returns the violations found; an empty list means the tree is sound.
    pub fn check_properties(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for id in self.preorder() {
            let node = self.node(id);
            if let Some(parent) = node.parent {
                if self.node(parent).weight >= node.weight {
                    out.push(Violation::ParentOrder { parent, child: id });
                }
                let rp = self.right_parent(id).expect("non-root vertex");
                if node.weight.is_none_or(|w| w >= rp.weight(self)) {
                    out.push(Violation::RightParentOrder {
                        vertex: id,
                        right_parent: rp,
                    });
                }
            }
            for pair in node.subtree.windows(2) {
                if self.node(pair[0]).weight >= self.node(pair[1]).weight {
                    out.push(Violation::SiblingOrder {
                        left: pair[0],
                        right: pair[1],
                    });
                }
            }
            if let Some(hi) = node.subtree.iter().map(|&c| self.node(c).weight).min() {
                let lo = node.weight;
                for v in self.descendants(id) {
                    let w = self.node(v).weight;
                    if lo <= w && w < hi {
                        out.push(Violation::LevelBracket { vertex: v, scope: id });
                    }
                }
            }
        }
        out
    }

    fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.node(id).subtree.clone();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.node(n).subtree.iter().copied());
        }
        out
    }
}
