//! Decision-matrix fusion of text-modal and image-modal class predictions.
//!
//! For a text prediction `k1` and an image prediction `k2` the matrix row
//! `k1 * k + k2` holds a weight pair `(w1, w2)`; the fused score vector is
//! `w1 * onehot(k1) + w2 * onehot(k2)`.

use std::fmt::Write as _;

use crate::diag::Diagnostic;
use crate::error::{Error, Result};
use crate::ingest::{escape_field, parse_num, records, text_field};
use crate::model::{
    DetectionVector, DocumentRecord, Element, ElementClass, Modality, SentenceCoord, Taxonomy,
};
use crate::text_metrics::MatchResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneHot {
    k: usize,
    index: usize,
}

impl OneHot {
    pub fn new(k: usize, index: usize) -> Result<Self> {
        if index >= k {
            return Err(Error::Validation(format!(
                "one-hot index {index} out of range for k={k}"
            )));
        }
        Ok(OneHot { k, index })
    }

    pub fn of(class: ElementClass) -> Self {
        OneHot {
            k: ElementClass::COUNT,
            index: class.code(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.k];
        v[self.index] = 1.0;
        v
    }
}

/// The three admissible weight pairs of a matrix row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// `(1, 0)`: trust the text modality.
    Text,
    /// `(0, 1)`: trust the image modality.
    Image,
    /// `(0.5, 0.5)`: both, also the untrained default.
    #[default]
    Even,
}

impl Weighting {
    pub fn weights(self) -> (f64, f64) {
        match self {
            Weighting::Text => (1.0, 0.0),
            Weighting::Image => (0.0, 1.0),
            Weighting::Even => (0.5, 0.5),
        }
    }

    pub fn from_weights(w1: f64, w2: f64) -> Option<Self> {
        [Weighting::Text, Weighting::Image, Weighting::Even]
            .into_iter()
            .find(|w| w.weights() == (w1, w2))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionMatrix {
    k: usize,
    rows: Vec<Weighting>,
}

impl DecisionMatrix {
    /// All rows `(0.5, 0.5)`.
    pub fn untrained(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Validation(format!("need at least 2 classes, got {k}")));
        }
        Ok(DecisionMatrix {
            k,
            rows: vec![Weighting::Even; k * k],
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Row address of the combination (text class `k1`, image class `k2`).
    pub fn row_index(&self, k1: usize, k2: usize) -> usize {
        k1 * self.k + k2
    }

    pub fn row(&self, k1: usize, k2: usize) -> Weighting {
        self.rows[self.row_index(k1, k2)]
    }

    pub fn set_row(&mut self, k1: usize, k2: usize, w: Weighting) {
        let j = self.row_index(k1, k2);
        self.rows[j] = w;
    }

    /// Text form: `k=<int>` followed by `k*k` lines `k1 k2 w1 w2`.
    pub fn to_text(&self) -> String {
        let mut out = format!("k={}\n", self.k);
        for k1 in 0..self.k {
            for k2 in 0..self.k {
                let (w1, w2) = self.row(k1, k2).weights();
                let _ = writeln!(out, "{k1} {k2} {w1} {w2}");
            }
        }
        out
    }

    pub fn from_text(text: &str, source_name: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines
            .next()
            .ok_or_else(|| Error::parse(source_name, 1, "missing k=<int> header"))?;
        let k: usize = header
            .trim()
            .strip_prefix("k=")
            .ok_or_else(|| Error::parse(source_name, hl + 1, "missing k=<int> header"))
            .and_then(|v| parse_num(v.trim(), "class count", source_name, hl + 1))?;
        let mut m = DecisionMatrix::untrained(k)?;
        let mut seen = vec![false; k * k];
        for (i, line) in lines {
            let ln = i + 1;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(Error::parse(source_name, ln, "expected `k1 k2 w1 w2`"));
            }
            let k1: usize = parse_num(f[0], "class", source_name, ln)?;
            let k2: usize = parse_num(f[1], "class", source_name, ln)?;
            let w1: f64 = parse_num(f[2], "weight", source_name, ln)?;
            let w2: f64 = parse_num(f[3], "weight", source_name, ln)?;
            if k1 >= k || k2 >= k {
                return Err(Error::parse(
                    source_name,
                    ln,
                    format!("class out of range for k={k}"),
                ));
            }
            let w = Weighting::from_weights(w1, w2).ok_or_else(|| {
                Error::parse(
                    source_name,
                    ln,
                    format!("weights ({w1},{w2}) not in {{(1,0),(0,1),(0.5,0.5)}}"),
                )
            })?;
            let j = m.row_index(k1, k2);
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::parse(
                    source_name,
                    ln,
                    format!("duplicate row ({k1},{k2})"),
                ));
            }
            m.rows[j] = w;
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(Error::parse(
                source_name,
                0,
                format!("missing row ({},{})", j / k, j % k),
            ));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionSample {
    pub text_pred: ElementClass,
    pub image_pred: ElementClass,
    pub gold: ElementClass,
}

/// Sets each row by majority vote between "text was right, image wrong" and
/// "image was right, text wrong" samples. Ties, rows where both modalities
/// agree, and rows with no samples get `(0.5, 0.5)`. Samples where both
/// modalities are wrong count for neither side.
pub fn train_decision_matrix(samples: &[FusionSample], k: usize) -> Result<DecisionMatrix> {
    let mut m = DecisionMatrix::untrained(k)?;
    let mut votes = vec![(0usize, 0usize); k * k];
    for s in samples {
        let (t, i, g) = (s.text_pred.code(), s.image_pred.code(), s.gold.code());
        if t >= k || i >= k || g >= k {
            return Err(Error::Validation(format!(
                "sample ({}, {}, {}) has a class outside [0,{k})",
                s.text_pred, s.image_pred, s.gold
            )));
        }
        let j = m.row_index(t, i);
        match (t == g, i == g) {
            (true, false) => votes[j].0 += 1,
            (false, true) => votes[j].1 += 1,
            _ => {}
        }
    }
    for (j, (text_right, image_right)) in votes.into_iter().enumerate() {
        m.rows[j] = match text_right.cmp(&image_right) {
            std::cmp::Ordering::Greater => Weighting::Text,
            std::cmp::Ordering::Less => Weighting::Image,
            std::cmp::Ordering::Equal => Weighting::Even,
        };
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fusion {
    pub scores: Vec<f64>,
    pub decided: usize,
}

/// Weighted sum of the two one-hot vectors; the arg-max wins and ties go to
/// the text prediction.
pub fn fuse(text: OneHot, image: OneHot, matrix: &DecisionMatrix) -> Result<Fusion> {
    if text.k != image.k || text.k != matrix.k {
        return Err(Error::Validation(format!(
            "dimension mismatch: text k={}, image k={}, matrix k={}",
            text.k, image.k, matrix.k
        )));
    }
    let (w1, w2) = matrix.row(text.index, image.index).weights();
    let mut scores = vec![0.0; matrix.k];
    scores[text.index] += w1;
    scores[image.index] += w2;
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let decided = if scores[text.index] >= best {
        text.index
    } else {
        scores.iter().position(|&s| s >= best).unwrap_or(text.index)
    };
    Ok(Fusion { scores, decided })
}

pub fn fuse_classes(
    text: ElementClass,
    image: ElementClass,
    matrix: &DecisionMatrix,
) -> Result<ElementClass> {
    let f = fuse(
        OneHot::new(matrix.k, text.code())?,
        OneHot::new(matrix.k, image.code())?,
        matrix,
    )?;
    ElementClass::from_code(f.decided)
        .ok_or_else(|| Error::Validation(format!("decided class {} unknown", f.decided)))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FusedDocument {
    pub elements: Vec<Element>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Merges the two modalities of one document.
///
/// Each text element with an accepted image match becomes a fused element
/// carrying the decided class, the text-modal string and coordinate, and the
/// image box. When several image elements accept the same text element the
/// closest one (then the lowest index) is used and the rest are dropped.
/// Unmatched text elements pass through unchanged; unmatched image elements
/// are appended after them, in image order, without a coordinate.
pub fn fuse_document(
    record: &DocumentRecord,
    matches: &[MatchResult],
    matrix: &DecisionMatrix,
) -> Result<FusedDocument> {
    let n_text = record.text_elements.len();
    let n_image = record.image_elements.len();
    let mut best_for_text: Vec<Option<&MatchResult>> = vec![None; n_text];
    let mut diagnostics = Vec::new();

    for m in matches {
        if m.image_index >= n_image {
            return Err(Error::Validation(format!(
                "{}: match refers to image element {} of {n_image}",
                record.doc_id, m.image_index
            )));
        }
        if let Some(ti) = m.text_index {
            if ti >= n_text {
                return Err(Error::Validation(format!(
                    "{}: match refers to text element {ti} of {n_text}",
                    record.doc_id
                )));
            }
        }
        if !m.accepted {
            continue;
        }
        let ti = m.text_index.expect("accepted implies a text index");
        let slot = &mut best_for_text[ti];
        match slot {
            Some(prev) if (prev.distance, prev.image_index) <= (m.distance, m.image_index) => {
                diagnostics.push(Diagnostic::new(
                    "fuse",
                    &record.doc_id,
                    format!(
                        "image element {} duplicates text element {ti}; dropped",
                        m.image_index
                    ),
                ));
            }
            Some(prev) => {
                diagnostics.push(Diagnostic::new(
                    "fuse",
                    &record.doc_id,
                    format!(
                        "image element {} duplicates text element {ti}; dropped",
                        prev.image_index
                    ),
                ));
                *slot = Some(m);
            }
            None => *slot = Some(m),
        }
    }

    let mut elements = Vec::with_capacity(n_text + n_image);
    for (text_el, best) in record.text_elements.iter().zip(&best_for_text) {
        match best {
            Some(m) => {
                let img = &record.image_elements[m.image_index];
                elements.push(Element {
                    class: fuse_classes(text_el.class, img.class, matrix)?,
                    text: text_el.text.clone(),
                    coord: text_el.coord,
                    bbox: img.bbox,
                    modality: Modality::Fused,
                    page: img.page,
                });
            }
            None => elements.push(text_el.clone()),
        }
    }

    let mut accepted_image = vec![false; n_image];
    for m in matches.iter().filter(|m| m.accepted) {
        accepted_image[m.image_index] = true;
    }
    for (ii, img) in record.image_elements.iter().enumerate() {
        if !accepted_image[ii] {
            diagnostics.push(Diagnostic::new(
                "fuse",
                &record.doc_id,
                format!(
                    "image element {ii} ({:?}) has no text match; passed through",
                    img.text
                ),
            ));
            let mut e = img.clone();
            e.coord = None;
            e.modality = Modality::Image;
            elements.push(e);
        }
    }

    Ok(FusedDocument {
        elements,
        diagnostics,
    })
}

/// Reads training samples, one per line, as
/// `text_pred<TAB>image_pred<TAB>gold`.
pub fn parse_samples(text: &str, source_name: &str, taxonomy: &Taxonomy) -> Result<Vec<FusionSample>> {
    records(text, source_name, 3)
        .map(|rec| {
            let (_, f) = rec?;
            Ok(FusionSample {
                text_pred: taxonomy.resolve(f[0])?,
                image_pred: taxonomy.resolve(f[1])?,
                gold: taxonomy.resolve(f[2])?,
            })
        })
        .collect()
}

pub fn write_samples(samples: &[FusionSample]) -> String {
    let mut out = String::new();
    for s in samples {
        let _ = writeln!(out, "{}\t{}\t{}", s.text_pred, s.image_pred, s.gold);
    }
    out
}

/// Fused element table, 13 columns:
/// `doc_id class modality pi si page prob x y w d box_label text`,
/// `-` marking an absent coordinate or box.
pub fn write_fused(docs: &[(String, Vec<Element>)]) -> String {
    let mut out = String::new();
    for (doc_id, elements) in docs {
        for e in elements {
            let (pi, si) = match e.coord {
                Some(c) => (c.pi.to_string(), c.si.to_string()),
                None => ("-".into(), "-".into()),
            };
            let boxf = match &e.bbox {
                Some(b) => [
                    b.prob.to_string(),
                    b.x.to_string(),
                    b.y.to_string(),
                    b.w.to_string(),
                    b.d.to_string(),
                    b.label.to_string(),
                ],
                None => std::array::from_fn(|_| "-".to_string()),
            };
            let _ = writeln!(
                out,
                "{doc_id}\t{}\t{}\t{pi}\t{si}\t{}\t{}\t{}",
                e.class,
                e.modality.as_str(),
                e.page,
                boxf.join("\t"),
                escape_field(&e.text)
            );
        }
    }
    out
}

pub fn parse_fused(
    text: &str,
    source_name: &str,
    taxonomy: &Taxonomy,
) -> Result<Vec<(String, Vec<Element>)>> {
    let mut out: Vec<(String, Vec<Element>)> = Vec::new();
    for rec in records(text, source_name, 13) {
        let (ln, f) = rec?;
        let class = taxonomy.resolve(f[1])?;
        let modality: Modality = f[2].parse()?;
        let coord = match (f[3], f[4]) {
            ("-", "-") => None,
            (pi, si) => Some(SentenceCoord::new(
                parse_num(pi, "paragraph index", source_name, ln)?,
                parse_num(si, "sentence index", source_name, ln)?,
            )),
        };
        let page: u32 = parse_num(f[5], "page", source_name, ln)?;
        let bbox = if f[6..12].iter().all(|v| *v == "-") {
            None
        } else {
            let num = |i: usize, what: &str| parse_num::<f64>(f[i], what, source_name, ln);
            Some(DetectionVector::new(
                taxonomy.resolve(f[11])?,
                num(6, "prob")?,
                num(7, "x")?,
                num(8, "y")?,
                num(9, "w")?,
                num(10, "d")?,
            )?)
        };
        let e = Element {
            class,
            text: text_field(f[12], source_name, ln)?,
            coord,
            bbox,
            modality,
            page,
        };
        e.validate()
            .map_err(|err| Error::parse(source_name, ln, err.to_string()))?;
        match out.iter_mut().find(|(d, _)| d == f[0]) {
            Some((_, v)) => v.push(e),
            None => out.push((f[0].to_string(), vec![e])),
        }
    }
    Ok(out)
}
