use std::collections::{BTreeMap, BTreeSet};

use super::{node_id, vertex_node_id, MetaGraph, MetaNode, NodeKind, Relation};
use crate::diag::Diagnostic;
use crate::dst::{Dst, NodeId};
use crate::error::{Error, Result};
use crate::model::SentenceTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reference {
    pub number: u32,
    pub text: String,
}

/// Longest `[a-b]` range expanded before it is treated as prose.
const MAX_RANGE: u32 = 1000;

fn entry_number(line: &str) -> Option<(u32, &str)> {
    let rest = line.strip_prefix('[')?;
    let close = rest.find(']')?;
    let n = rest[..close].trim().parse().ok()?;
    Some((n, rest[close + 1..].trim()))
}

/// Parses a bracket-numbered reference list. Each entry starts with `[n]`;
/// following lines without a marker continue the previous entry. Blank
/// input yields an empty list.
pub fn parse_reference_list(text: &str) -> Result<Vec<Reference>> {
    let mut out: Vec<Reference> = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match entry_number(line) {
            Some((number, body)) => {
                if !seen.insert(number) {
                    return Err(Error::Validation(format!(
                        "duplicate reference number [{number}] on line {}",
                        i + 1
                    )));
                }
                out.push(Reference {
                    number,
                    text: body.to_string(),
                });
            }
            None => match out.last_mut() {
                Some(prev) => {
                    if !prev.text.is_empty() {
                        prev.text.push(' ');
                    }
                    prev.text.push_str(line);
                }
                None => {
                    return Err(Error::Validation(format!(
                        "reference list is not bracket-numbered: line {} has no [n] marker",
                        i + 1
                    )))
                }
            },
        }
    }
    Ok(out)
}

/// Citation numbers in `sentence`: `[3]`, `[1, 4]`, `[2-5]` and mixes.
/// Bracketed text that is not a number list is ignored.
pub fn citation_markers(sentence: &str) -> Vec<u32> {
    let mut out = Vec::new();
    let mut rest = sentence;
    while let Some(open) = rest.find('[') {
        rest = &rest[open + 1..];
        let Some(close) = rest.find(']') else { break };
        if let Some(nums) = marker_list(&rest[..close]) {
            out.extend(nums);
            rest = &rest[close + 1..];
        }
    }
    out
}

fn marker_list(inner: &str) -> Option<Vec<u32>> {
    let mut out = Vec::new();
    for part in inner.split(',') {
        let part = part.trim();
        let bounds: Vec<&str> = part.split(['-', '–']).map(str::trim).collect();
        match bounds.as_slice() {
            [n] => out.push(n.parse().ok()?),
            [a, b] => {
                let (a, b): (u32, u32) = (a.parse().ok()?, b.parse().ok()?);
                if a > b || b - a > MAX_RANGE {
                    return None;
                }
                out.extend(a..=b);
            }
            _ => return None,
        }
    }
    Some(out)
}

/// Adds one Reference node per entry and `cites` edges from the section
/// owning each in-text marker. Entries never cited attach to the document
/// node. Markers without an entry produce a diagnostic. The graph is left
/// untouched when the list fails to parse.
pub fn build_reference_network(
    reference_text: &str,
    paragraphs: &SentenceTable,
    tree: &Dst,
    graph: &mut MetaGraph,
) -> Result<Vec<Diagnostic>> {
    let refs = parse_reference_list(reference_text)?;
    let mut diagnostics = Vec::new();
    if refs.is_empty() {
        return Ok(diagnostics);
    }
    let mut ref_ids = BTreeMap::new();
    for r in &refs {
        let label = format!("[{}] {}", r.number, r.text);
        let id = node_id(NodeKind::Reference, "", &r.text, None);
        let mut props = BTreeMap::new();
        props.insert("number".to_string(), r.number.to_string());
        graph.add_node(MetaNode {
            id: id.clone(),
            kind: NodeKind::Reference,
            label,
            level: 0,
            weight: None,
            props,
        });
        ref_ids.insert(r.number, id);
    }

    let mut cited = BTreeSet::new();
    for (&coord, sentence) in paragraphs {
        for n in citation_markers(sentence) {
            match ref_ids.get(&n) {
                Some(rid) => {
                    let owner = vertex_node_id(tree, tree.locate(coord));
                    graph.add_edge(&owner, rid, Relation::Cites)?;
                    cited.insert(n);
                }
                None => diagnostics.push(Diagnostic::new(
                    "graph",
                    tree.doc_id(),
                    format!("citation [{n}] at {coord} has no reference entry"),
                )),
            }
        }
    }
    let doc = vertex_node_id(tree, NodeId::ROOT);
    for (n, rid) in &ref_ids {
        if !cited.contains(n) {
            graph.add_edge(&doc, rid, Relation::Cites)?;
        }
    }
    Ok(diagnostics)
}
