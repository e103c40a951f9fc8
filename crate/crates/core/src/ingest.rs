//! Line-oriented readers and writers for the two modal input formats.
//!
//! Text modal, one element per line:
//!
//! ```text
//! doc_id<TAB>class<TAB>pi<TAB>si<TAB>text
//! ```
//!
//! Image modal, one detection per line:
//!
//! ```text
//! doc_id<TAB>page<TAB>class<TAB>prob<TAB>x<TAB>y<TAB>w<TAB>d<TAB>ocr_text
//! ```
//!
//! Free-text fields escape `\`, tab, newline and carriage return as `\\`,
//! `\t`, `\n` and `\r`. Floats are written in shortest round-trip form.
//! Empty lines are ignored. A file may hold several documents; they come
//! back in order of first appearance.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{DetectionVector, DocumentRecord, Element, SentenceCoord, Taxonomy};

pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_field(s: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => return Err(format!("unknown escape sequence \\{other}")),
            None => return Err("dangling backslash".to_string()),
        }
    }
    Ok(out)
}

/// Reads a whole UTF-8 file, naming the path on failure.
pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Iterates the non-empty lines of `text` with 1-based line numbers,
/// split into exactly `arity` tab-separated fields.
pub(crate) fn records<'a>(
    text: &'a str,
    source_name: &'a str,
    arity: usize,
) -> impl Iterator<Item = Result<(usize, Vec<&'a str>)>> + 'a {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(move |(i, line)| {
            let line_no = i + 1;
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != arity {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!("expected {arity} tab-separated fields, found {}", fields.len()),
                ));
            }
            Ok((line_no, fields))
        })
}

pub(crate) fn parse_num<T: std::str::FromStr>(
    field: &str,
    what: &str,
    source_name: &str,
    line: usize,
) -> Result<T> {
    field
        .parse::<T>()
        .map_err(|_| Error::parse(source_name, line, format!("invalid {what} {field:?}")))
}

pub(crate) fn text_field(field: &str, source_name: &str, line: usize) -> Result<String> {
    unescape_field(field).map_err(|m| Error::parse(source_name, line, m))
}

fn record_for<'a>(docs: &'a mut Vec<DocumentRecord>, doc_id: &str) -> &'a mut DocumentRecord {
    let pos = match docs.iter().position(|d| d.doc_id == doc_id) {
        Some(p) => p,
        None => {
            docs.push(DocumentRecord::new(doc_id));
            docs.len() - 1
        }
    };
    &mut docs[pos]
}

/// Parses text-modal records. Within a document, coordinates must be
/// strictly increasing in file order.
pub fn parse_text_modal(text: &str, source_name: &str, taxonomy: &Taxonomy) -> Result<Vec<DocumentRecord>> {
    let mut docs = Vec::new();
    for rec in records(text, source_name, 5) {
        let (line, f) = rec?;
        let class = taxonomy.resolve(f[1])?;
        let pi: u32 = parse_num(f[2], "paragraph index", source_name, line)?;
        let si: u32 = parse_num(f[3], "sentence index", source_name, line)?;
        let body = text_field(f[4], source_name, line)?;
        let element = Element::from_text(class, body, SentenceCoord::new(pi, si));
        record_for(&mut docs, f[0])
            .push_text(element)
            .map_err(|e| Error::parse(source_name, line, e.to_string()))?;
    }
    Ok(docs)
}

pub fn ingest_text_modal(path: &Path, taxonomy: &Taxonomy) -> Result<Vec<DocumentRecord>> {
    let text = read_file(path)?;
    parse_text_modal(&text, &path.display().to_string(), taxonomy)
}

pub fn write_text_modal(docs: &[DocumentRecord]) -> String {
    let mut out = String::new();
    for doc in docs {
        for e in &doc.text_elements {
            let c = e.coord.unwrap_or_default();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                doc.doc_id,
                e.class,
                c.pi,
                c.si,
                escape_field(&e.text)
            );
        }
    }
    out
}

/// Parses image-modal records into documents whose `image_elements` are
/// filled. Overlapping boxes are kept as distinct elements.
pub fn parse_image_modal(text: &str, source_name: &str, taxonomy: &Taxonomy) -> Result<Vec<DocumentRecord>> {
    let mut docs = Vec::new();
    for rec in records(text, source_name, 9) {
        let (line, f) = rec?;
        let page: u32 = parse_num(f[1], "page", source_name, line)?;
        let class = taxonomy.resolve(f[2])?;
        let mut nums = [0.0f64; 5];
        for (slot, (field, what)) in nums
            .iter_mut()
            .zip(f[3..8].iter().zip(["prob", "x", "y", "w", "d"]))
        {
            *slot = parse_num(field, what, source_name, line)?;
        }
        let [prob, x, y, w, d] = nums;
        let bbox = DetectionVector::new(class, prob, x, y, w, d)?;
        let ocr = text_field(f[8], source_name, line)?;
        let element = Element::from_image(bbox, ocr, page);
        element.validate()?;
        record_for(&mut docs, f[0]).image_elements.push(element);
    }
    Ok(docs)
}

pub fn ingest_image_modal(path: &Path, taxonomy: &Taxonomy) -> Result<Vec<DocumentRecord>> {
    let text = read_file(path)?;
    parse_image_modal(&text, &path.display().to_string(), taxonomy)
}

pub fn write_image_modal(docs: &[DocumentRecord]) -> String {
    let mut out = String::new();
    for doc in docs {
        for e in &doc.image_elements {
            let Some(b) = &e.bbox else { continue };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                doc.doc_id,
                e.page,
                b.label,
                b.prob,
                b.x,
                b.y,
                b.w,
                b.d,
                escape_field(&e.text)
            );
        }
    }
    out
}

/// Pairs text-side and image-side records by document id. Documents seen on
/// only one side are kept with the other side empty. Order follows the text
/// side, then image-only documents.
pub fn merge_modalities(
    text_docs: Vec<DocumentRecord>,
    image_docs: Vec<DocumentRecord>,
) -> Vec<DocumentRecord> {
    let mut merged = text_docs;
    for img in image_docs {
        let rec = record_for(&mut merged, &img.doc_id);
        rec.image_elements.extend(img.image_elements);
    }
    merged
}
