//! Edit distance and OCR-to-text reconciliation.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ingest::{parse_num, records};
use crate::model::Element;

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    // keep the shorter string in the row
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            let above = row[j + 1];
            let sub = diag + usize::from(lc != sc);
            row[j + 1] = sub.min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[short.len()]
}

/// Full dynamic-programming table, row `i` column `j` holding the distance
/// between the first `i` chars of `a` and the first `j` chars of `b`.
pub fn levenshtein_table(a: &str, b: &str) -> Vec<Vec<usize>> {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in t[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = t[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            t[i][j] = sub.min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeOptions {
    /// Strip ends and collapse internal whitespace runs to one space.
    pub collapse_whitespace: bool,
    pub fold_case: bool,
    /// Map full-width ASCII variants and the ideographic space to their
    /// half-width forms.
    pub fold_width: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            collapse_whitespace: true,
            fold_case: false,
            fold_width: false,
        }
    }
}

impl NormalizeOptions {
    pub fn none() -> Self {
        NormalizeOptions {
            collapse_whitespace: false,
            fold_case: false,
            fold_width: false,
        }
    }
}

pub fn normalize(s: &str, opts: &NormalizeOptions) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for c in s.chars() {
        let mut c = c;
        if opts.fold_width {
            c = match c {
                '\u{3000}' => ' ',
                '\u{FF01}'..='\u{FF5E}' => char::from_u32(c as u32 - 0xFEE0).unwrap_or(c),
                _ => c,
            };
        }
        if opts.collapse_whitespace && c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        if opts.fold_case {
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// Accept when the distance is at most this many edits.
    Absolute(usize),
    /// Accept when the distance is at most this fraction of the OCR length.
    Relative(f64),
}

impl Threshold {
    fn accepts(self, distance: usize, ocr_len: usize) -> bool {
        match self {
            Threshold::Absolute(n) => distance <= n,
            Threshold::Relative(rho) => (distance as f64) <= rho * ocr_len as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconcileConfig {
    pub threshold: Threshold,
    pub normalize: NormalizeOptions,
}

impl Default for ReconcileConfig {
    fn default() -> Self {
        ReconcileConfig {
            threshold: Threshold::Absolute(3),
            normalize: NormalizeOptions::default(),
        }
    }
}

impl ReconcileConfig {
    pub fn validate(&self) -> Result<()> {
        if let Threshold::Relative(rho) = self.threshold {
            if !(rho.is_finite() && rho >= 0.0) {
                return Err(Error::Usage(format!(
                    "relative threshold must be >= 0, got {rho}"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of matching one image element against the text side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchResult {
    pub image_index: usize,
    pub text_index: Option<usize>,
    /// Distance to the best candidate, or the normalized OCR length when
    /// there is no candidate at all.
    pub distance: usize,
    pub accepted: bool,
}

/// Finds, for every image element, the text element at the smallest edit
/// distance. Ties go to the candidate with the smaller sentence coordinate.
/// One text element may be the best match of several image elements.
pub fn reconcile(
    image_elements: &[Element],
    text_elements: &[Element],
    config: &ReconcileConfig,
) -> Vec<MatchResult> {
    let candidates: Vec<Vec<char>> = text_elements
        .iter()
        .map(|e| normalize(&e.text, &config.normalize).chars().collect())
        .collect();

    let match_one = |(image_index, img): (usize, &Element)| {
        let ocr: Vec<char> = normalize(&img.text, &config.normalize).chars().collect();
        let mut best: Option<(usize, usize)> = None;
        for (ti, cand) in candidates.iter().enumerate() {
            let d = levenshtein_chars(&ocr, cand);
            let better = match best {
                None => true,
                Some((bi, bd)) => d < bd || (d == bd && text_elements[ti].coord < text_elements[bi].coord),
            };
            if better {
                best = Some((ti, d));
            }
        }
        match best {
            Some((ti, d)) => MatchResult {
                image_index,
                text_index: Some(ti),
                distance: d,
                accepted: config.threshold.accepts(d, ocr.len()),
            },
            None => MatchResult {
                image_index,
                text_index: None,
                distance: ocr.len(),
                accepted: false,
            },
        }
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        image_elements.par_iter().enumerate().map(match_one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        image_elements.iter().enumerate().map(match_one).collect()
    }
}

/// Copies the text-modal string and coordinate onto every image element
/// with an accepted match.
pub fn correct_ocr(
    image_elements: &[Element],
    text_elements: &[Element],
    matches: &[MatchResult],
) -> Vec<Element> {
    let mut out = image_elements.to_vec();
    for m in matches.iter().filter(|m| m.accepted) {
        if let (Some(ti), Some(img)) = (m.text_index, out.get_mut(m.image_index)) {
            img.text = text_elements[ti].text.clone();
            img.coord = text_elements[ti].coord;
        }
    }
    out
}

/// Match table rows: `doc_id<TAB>image_idx<TAB>text_idx<TAB>distance<TAB>accepted`,
/// with `-` for a missing text index.
pub fn write_matches(rows: &[(String, Vec<MatchResult>)]) -> String {
    let mut out = String::new();
    for (doc_id, matches) in rows {
        for m in matches {
            let ti = m.text_index.map_or_else(|| "-".to_string(), |t| t.to_string());
            let _ = writeln!(
                out,
                "{doc_id}\t{}\t{ti}\t{}\t{}",
                m.image_index, m.distance, m.accepted
            );
        }
    }
    out
}

pub fn parse_matches(text: &str, source_name: &str) -> Result<Vec<(String, Vec<MatchResult>)>> {
    let mut out: Vec<(String, Vec<MatchResult>)> = Vec::new();
    for rec in records(text, source_name, 5) {
        let (line, f) = rec?;
        let text_index = match f[2] {
            "-" => None,
            t => Some(parse_num::<usize>(t, "text index", source_name, line)?),
        };
        let m = MatchResult {
            image_index: parse_num(f[1], "image index", source_name, line)?,
            text_index,
            distance: parse_num(f[3], "distance", source_name, line)?,
            accepted: parse_num(f[4], "accepted flag", source_name, line)?,
        };
        if m.accepted && m.text_index.is_none() {
            return Err(Error::parse(
                source_name,
                line,
                "accepted match without text index",
            ));
        }
        match out.iter_mut().find(|(d, _)| d == f[0]) {
            Some((_, v)) => v.push(m),
            None => out.push((f[0].to_string(), vec![m])),
        }
    }
    Ok(out)
}
