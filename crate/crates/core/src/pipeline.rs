//! File-to-file stages and their composition.
//!
//! Each stage reads the previous stage's files and writes its own:
//!
//! | stage     | reads                              | writes                       |
//! |-----------|------------------------------------|------------------------------|
//! | reconcile | text modal, image modal            | `matches.tsv`                |
//! | fuse      | text, image, matches, matrix       | `fused.tsv`                  |
//! | tree      | `fused.tsv`                        | `<doc>.dst.json`             |
//! | graph     | `<doc>.dst.json`, triples, refs    | `<doc>.graph.json` and peers |
//!
//! [`run_pipeline`] validates every input before writing anything and
//! removes whatever it wrote when a stage fails.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::diag::Diagnostic;
use crate::dst::{build_dst, Dst, DEFAULT_MAX_DEPTH};
use crate::error::{Error, Result};
use crate::fusion::{fuse_document, parse_fused, write_fused, DecisionMatrix};
use crate::ingest::{ingest_image_modal, ingest_text_modal, merge_modalities, read_file};
use crate::metagraph::{
    build_reference_network, document_attributes, export, generate, parse_triples, ExportFormat,
    TripleExtractor,
};
use crate::model::{DocumentRecord, ElementClass, SentenceTable, Taxonomy};
use crate::text_metrics::{parse_matches, reconcile, write_matches, MatchResult, ReconcileConfig};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub text: PathBuf,
    pub image: PathBuf,
    /// Directory of `<doc_id>.tsv` triple files. Without it, triples come
    /// from the built-in heuristic extractor.
    pub triples_dir: Option<PathBuf>,
    /// Directory of `<doc_id>.txt` reference lists.
    pub refs_dir: Option<PathBuf>,
    /// Trained decision matrix; an untrained one is used when absent.
    pub matrix: Option<PathBuf>,
    pub reconcile: ReconcileConfig,
    pub max_depth: u8,
    pub formats: Vec<ExportFormat>,
    pub out_dir: PathBuf,
    pub taxonomy: Taxonomy,
    /// Worker threads for per-document stages; `None` uses every core.
    pub jobs: Option<usize>,
}

impl PipelineConfig {
    pub fn new(text: impl Into<PathBuf>, image: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            text: text.into(),
            image: image.into(),
            triples_dir: None,
            refs_dir: None,
            matrix: None,
            reconcile: ReconcileConfig::default(),
            max_depth: DEFAULT_MAX_DEPTH,
            formats: ExportFormat::ALL.to_vec(),
            out_dir: out_dir.into(),
            taxonomy: Taxonomy::default(),
            jobs: None,
        }
    }

    fn validate(&self) -> Result<()> {
        for p in [&self.text, &self.image].into_iter().chain(&self.matrix) {
            if !p.is_file() {
                return Err(Error::Usage(format!("input file {} does not exist", p.display())));
            }
        }
        for d in self.triples_dir.iter().chain(&self.refs_dir) {
            if !d.is_dir() {
                return Err(Error::Usage(format!(
                    "input directory {} does not exist",
                    d.display()
                )));
            }
        }
        if self.jobs == Some(0) {
            return Err(Error::Usage("--jobs must be at least 1".into()));
        }
        if self.formats.is_empty() {
            return Err(Error::Usage("no graph output format selected".into()));
        }
        self.reconcile.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineReport {
    pub artifacts: Vec<PathBuf>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Files written so far, removed again on failure.
#[derive(Debug, Default)]
struct Artifacts {
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn write(&mut self, path: &Path, content: &str) -> Result<()> {
        std::fs::write(path, content).map_err(|e| Error::io(path, e))?;
        self.written.push(path.to_path_buf());
        Ok(())
    }

    fn rollback(&mut self) {
        for p in self.written.drain(..) {
            let _ = std::fs::remove_file(p);
        }
    }
}

fn check_doc_id(doc_id: &str) -> Result<()> {
    let bad = doc_id.is_empty() || doc_id == "." || doc_id == ".." || doc_id.contains(['/', '\\', '\0']);
    if bad {
        return Err(Error::Validation(format!(
            "document id {doc_id:?} cannot name an output file"
        )));
    }
    Ok(())
}

fn load_records(text: &Path, image: &Path, taxonomy: &Taxonomy) -> Result<Vec<DocumentRecord>> {
    let docs = merge_modalities(
        ingest_text_modal(text, taxonomy)?,
        ingest_image_modal(image, taxonomy)?,
    );
    for d in &docs {
        check_doc_id(&d.doc_id)?;
    }
    Ok(docs)
}

fn load_matrix(path: Option<&Path>) -> Result<DecisionMatrix> {
    match path {
        Some(p) => DecisionMatrix::from_text(&read_file(p)?, &p.display().to_string()),
        None => DecisionMatrix::untrained(ElementClass::COUNT),
    }
}

fn with_cleanup<T>(f: impl FnOnce(&mut Artifacts) -> Result<T>) -> Result<T> {
    let mut artifacts = Artifacts::default();
    let out = f(&mut artifacts);
    if out.is_err() {
        artifacts.rollback();
    }
    out
}

/// Matches every image element against its document's text elements and
/// writes the match table.
pub fn reconcile_stage(
    text: &Path,
    image: &Path,
    taxonomy: &Taxonomy,
    config: &ReconcileConfig,
    out: &Path,
) -> Result<()> {
    config.validate()?;
    let docs = load_records(text, image, taxonomy)?;
    let rows: Vec<(String, Vec<_>)> = docs
        .iter()
        .map(|d| {
            (
                d.doc_id.clone(),
                reconcile(&d.image_elements, &d.text_elements, config),
            )
        })
        .collect();
    with_cleanup(|a| a.write(out, &write_matches(&rows)))
}

/// Fuses the two modalities of every document and writes the fused table.
/// Matches are recomputed with `config` when no match table is given.
pub fn fuse_stage(
    text: &Path,
    image: &Path,
    matches: Option<&Path>,
    matrix: Option<&Path>,
    taxonomy: &Taxonomy,
    config: &ReconcileConfig,
    out: &Path,
) -> Result<Vec<Diagnostic>> {
    let docs = load_records(text, image, taxonomy)?;
    let matrix = load_matrix(matrix)?;
    let table: HashMap<String, Vec<MatchResult>> = match matches {
        Some(p) => parse_matches(&read_file(p)?, &p.display().to_string())?,
        None => docs
            .iter()
            .map(|d| {
                (
                    d.doc_id.clone(),
                    reconcile(&d.image_elements, &d.text_elements, config),
                )
            })
            .collect(),
    }
    .into_iter()
    .collect();
    let mut diagnostics = Vec::new();
    let mut fused = Vec::with_capacity(docs.len());
    for d in &docs {
        let m = table.get(&d.doc_id).map_or(&[][..], Vec::as_slice);
        if m.len() != d.image_elements.len() {
            return Err(Error::Validation(format!(
                "{}: match table has {} rows for {} image elements",
                d.doc_id,
                m.len(),
                d.image_elements.len()
            )));
        }
        let f = fuse_document(d, m, &matrix)?;
        diagnostics.extend(f.diagnostics);
        fused.push((d.doc_id.clone(), f.elements));
    }
    with_cleanup(|a| a.write(out, &write_fused(&fused)))?;
    Ok(diagnostics)
}

/// Builds one tree per document of a fused table. Elements without a
/// sentence coordinate have no place in the outline and are skipped with a
/// diagnostic.
pub fn build_trees(fused: &Path, taxonomy: &Taxonomy, max_depth: u8) -> Result<(Vec<Dst>, Vec<Diagnostic>)> {
    let docs = parse_fused(&read_file(fused)?, &fused.display().to_string(), taxonomy)?;
    let mut diagnostics = Vec::new();
    let mut trees = Vec::with_capacity(docs.len());
    for (doc_id, elements) in docs {
        check_doc_id(&doc_id)?;
        let (placed, loose): (Vec<_>, Vec<_>) = elements.into_iter().partition(|e| e.coord.is_some());
        for e in loose {
            diagnostics.push(Diagnostic::new(
                "tree",
                doc_id.clone(),
                format!(
                    "{} element {:?} has no sentence coordinate; left out of the tree",
                    e.class, e.text
                ),
            ));
        }
        let tree = build_dst(&doc_id, &placed, max_depth)?;
        diagnostics.extend(tree.warnings().iter().cloned());
        trees.push(tree);
    }
    Ok((trees, diagnostics))
}

/// Writes `<doc_id>.dst.json` for every document of a fused table.
pub fn tree_stage(
    fused: &Path,
    taxonomy: &Taxonomy,
    max_depth: u8,
    out_dir: &Path,
) -> Result<(Vec<PathBuf>, Vec<Diagnostic>)> {
    let (trees, diagnostics) = build_trees(fused, taxonomy, max_depth)?;
    with_cleanup(|a| {
        for t in &trees {
            a.write(&out_dir.join(format!("{}.dst.json", t.doc_id())), &t.to_json())?;
        }
        Ok((a.written.clone(), diagnostics))
    })
}

/// Sentence table recovered from the elements stored in a tree.
pub fn sentence_table(tree: &Dst) -> SentenceTable {
    tree.elements_in_order()
        .into_iter()
        .filter_map(|e| e.coord.map(|c| (c, e.text.clone())))
        .collect()
}

/// Where the graph stage gets its triples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TripleSource<'a> {
    File(&'a Path),
    Heuristic,
    None,
}

/// Generates the graph of one tree file and writes it in every requested
/// format.
pub fn graph_stage(
    dst: &Path,
    triples: TripleSource<'_>,
    refs: Option<&Path>,
    outputs: &[(ExportFormat, PathBuf)],
) -> Result<Vec<Diagnostic>> {
    let tree = Dst::from_json(&read_file(dst)?)?;
    let table = sentence_table(&tree);
    let triples = match triples {
        TripleSource::File(p) => parse_triples(&read_file(p)?, &p.display().to_string())?,
        TripleSource::Heuristic => TripleExtractor::default().extract(&table),
        TripleSource::None => Vec::new(),
    };
    let build = generate(&tree, &document_attributes(&tree), &triples);
    let mut graph = build.graph;
    let mut diagnostics = build.diagnostics;
    if let Some(p) = refs {
        diagnostics.extend(build_reference_network(
            &read_file(p)?,
            &table,
            &tree,
            &mut graph,
        )?);
    }
    with_cleanup(|a| {
        for (format, path) in outputs {
            a.write(path, &export(&graph, *format))?;
        }
        Ok(())
    })?;
    Ok(diagnostics)
}

#[cfg(feature = "parallel")]
fn for_each_doc<T: Sync, U: Send>(
    jobs: Option<usize>,
    items: &[T],
    f: impl Fn(&T) -> U + Sync + Send,
) -> Result<Vec<U>> {
    use rayon::prelude::*;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Contract(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn for_each_doc<T: Sync, U: Send>(
    _jobs: Option<usize>,
    items: &[T],
    f: impl Fn(&T) -> U + Sync + Send,
) -> Result<Vec<U>> {
    Ok(items.iter().map(f).collect())
}

/// Runs reconcile, fuse, tree and graph over every document.
///
/// Inputs are all parsed before the first file is written. On failure the
/// error names the stage and every artifact of this run is removed.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport> {
    config.validate()?;
    let docs = load_records(&config.text, &config.image, &config.taxonomy)?;
    load_matrix(config.matrix.as_deref())?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;

    let mut report = PipelineReport::default();
    let result = run_stages(config, &docs, &mut report);
    if let Err(e) = result {
        for p in report.artifacts.drain(..) {
            let _ = std::fs::remove_file(p);
        }
        return Err(e);
    }
    Ok(report)
}

fn run_stages(config: &PipelineConfig, docs: &[DocumentRecord], report: &mut PipelineReport) -> Result<()> {
    let out = &config.out_dir;
    let matches = out.join("matches.tsv");
    reconcile_stage(
        &config.text,
        &config.image,
        &config.taxonomy,
        &config.reconcile,
        &matches,
    )
    .map_err(|e| e.in_stage("reconcile"))?;
    report.artifacts.push(matches.clone());

    let fused = out.join("fused.tsv");
    let diags = fuse_stage(
        &config.text,
        &config.image,
        Some(&matches),
        config.matrix.as_deref(),
        &config.taxonomy,
        &config.reconcile,
        &fused,
    )
    .map_err(|e| e.in_stage("fuse"))?;
    report.artifacts.push(fused.clone());
    report.diagnostics.extend(diags);

    let (trees, diags) =
        tree_stage(&fused, &config.taxonomy, config.max_depth, out).map_err(|e| e.in_stage("tree"))?;
    report.artifacts.extend(trees.iter().cloned());
    report.diagnostics.extend(diags);

    let ids: Vec<&str> = docs.iter().map(|d| d.doc_id.as_str()).collect();
    let results = for_each_doc(config.jobs, &ids, |id| {
        let dst = out.join(format!("{id}.dst.json"));
        let outputs: Vec<(ExportFormat, PathBuf)> = config
            .formats
            .iter()
            .map(|&f| (f, out.join(format!("{id}.{}", f.extension()))))
            .collect();
        let triples_file = config.triples_dir.as_ref().map(|d| d.join(format!("{id}.tsv")));
        let source = match &triples_file {
            Some(p) if p.is_file() => TripleSource::File(p),
            Some(_) => TripleSource::None,
            None => TripleSource::Heuristic,
        };
        let refs = config
            .refs_dir
            .as_ref()
            .map(|d| d.join(format!("{id}.txt")))
            .filter(|p| p.is_file());
        let r = graph_stage(&dst, source, refs.as_deref(), &outputs);
        (outputs.into_iter().map(|(_, p)| p).collect::<Vec<_>>(), r)
    })?;
    let mut first_err = None;
    for (paths, r) in results {
        match r {
            Ok(diags) => {
                report.artifacts.extend(paths);
                report.diagnostics.extend(diags);
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e.in_stage("graph")),
        None => Ok(()),
    }
}
