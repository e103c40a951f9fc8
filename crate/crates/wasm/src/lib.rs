//! Browser bindings for the demo page. Every entry point takes plain
//! strings and returns a JSON document, with `{"error": ...}` on failure.

use metaforge::dst::build_dst;
use metaforge::fusion::{fuse_document, write_fused, DecisionMatrix};
use metaforge::ingest::{merge_modalities, parse_image_modal, parse_text_modal};
use metaforge::metagraph::{document_attributes, export, generate, ExportFormat};
use metaforge::model::Taxonomy;
use metaforge::text_metrics::{
    levenshtein_table, normalize, reconcile, NormalizeOptions, ReconcileConfig, Threshold,
};
use metaforge::{ElementClass, Result};
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

#[derive(Serialize)]
struct EditTable {
    a: Vec<String>,
    b: Vec<String>,
    table: Vec<Vec<usize>>,
    distance: usize,
    /// Cells of one optimal alignment from `(0,0)` to the bottom-right corner.
    path: Vec<(usize, usize)>,
}

fn to_json<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

/// Edit-distance table between `a` and `b` with one optimal path.
pub fn edit_table(a: &str, b: &str) -> String {
    let t = levenshtein_table(a, b);
    let ac: Vec<char> = a.chars().collect();
    let bc: Vec<char> = b.chars().collect();
    let (mut i, mut j) = (ac.len(), bc.len());
    let mut path = vec![(i, j)];
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && t[i][j] == t[i - 1][j - 1] + usize::from(ac[i - 1] != bc[j - 1]) {
            i -= 1;
            j -= 1;
        } else if i > 0 && t[i][j] == t[i - 1][j] + 1 {
            i -= 1;
        } else {
            j -= 1;
        }
        path.push((i, j));
    }
    path.reverse();
    to_json(Ok(EditTable {
        a: ac.iter().map(char::to_string).collect(),
        b: bc.iter().map(char::to_string).collect(),
        distance: t[ac.len()][bc.len()],
        table: t,
        path,
    }))
}

#[derive(Serialize)]
struct MatchRow {
    doc_id: String,
    image_index: usize,
    ocr: String,
    text_index: Option<usize>,
    text: Option<String>,
    distance: usize,
    accepted: bool,
}

#[derive(Serialize)]
struct FuseView {
    matches: Vec<MatchRow>,
    fused: String,
    diagnostics: Vec<String>,
}

/// Reconciles and fuses pasted text-modal and image-modal tables with an
/// untrained decision matrix.
pub fn reconcile_and_fuse(text_tsv: &str, image_tsv: &str, threshold: usize) -> String {
    to_json((|| {
        let tax = Taxonomy::default();
        let docs = merge_modalities(
            parse_text_modal(text_tsv, "text", &tax)?,
            parse_image_modal(image_tsv, "image", &tax)?,
        );
        let cfg = ReconcileConfig {
            threshold: Threshold::Absolute(threshold),
            ..ReconcileConfig::default()
        };
        let matrix = DecisionMatrix::untrained(ElementClass::COUNT)?;
        let mut view = FuseView {
            matches: Vec::new(),
            fused: String::new(),
            diagnostics: Vec::new(),
        };
        let mut fused = Vec::new();
        for d in &docs {
            let m = reconcile(&d.image_elements, &d.text_elements, &cfg);
            for r in &m {
                view.matches.push(MatchRow {
                    doc_id: d.doc_id.clone(),
                    image_index: r.image_index,
                    ocr: normalize(
                        &d.image_elements[r.image_index].text,
                        &NormalizeOptions::default(),
                    ),
                    text_index: r.text_index,
                    text: r.text_index.map(|t| d.text_elements[t].text.clone()),
                    distance: r.distance,
                    accepted: r.accepted,
                });
            }
            let f = fuse_document(d, &m, &matrix)?;
            view.diagnostics
                .extend(f.diagnostics.iter().map(ToString::to_string));
            fused.push((d.doc_id.clone(), f.elements));
        }
        view.fused = write_fused(&fused);
        Ok(view)
    })())
}

#[derive(Serialize)]
struct TreeView {
    doc_id: String,
    outline: String,
    violations: Vec<String>,
    warnings: Vec<String>,
    dot: String,
}

/// Builds the structure tree and graph of every document in a pasted
/// text-modal table.
pub fn structure(text_tsv: &str, max_depth: u8) -> String {
    to_json((|| {
        let docs = parse_text_modal(text_tsv, "text", &Taxonomy::default())?;
        docs.iter()
            .map(|d| {
                let tree = build_dst(&d.doc_id, &d.text_elements, max_depth)?;
                let graph = generate(&tree, &document_attributes(&tree), &[]).graph;
                Ok(TreeView {
                    doc_id: d.doc_id.clone(),
                    outline: tree.to_outline(),
                    violations: tree.check_properties().iter().map(ToString::to_string).collect(),
                    warnings: tree.warnings().iter().map(ToString::to_string).collect(),
                    dot: export(&graph, ExportFormat::Dot),
                })
            })
            .collect::<Result<Vec<_>>>()
    })())
}

#[wasm_bindgen(js_name = editTable)]
pub fn edit_table_js(a: &str, b: &str) -> String {
    edit_table(a, b)
}

#[wasm_bindgen(js_name = reconcileAndFuse)]
pub fn reconcile_and_fuse_js(text_tsv: &str, image_tsv: &str, threshold: u32) -> String {
    reconcile_and_fuse(text_tsv, image_tsv, threshold as usize)
}

#[wasm_bindgen(js_name = structure)]
pub fn structure_js(text_tsv: &str, max_depth: u8) -> String {
    structure(text_tsv, max_depth)
}
