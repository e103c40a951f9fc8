//! Adapter from BIO-tagged token files to text-modal records.
//!
//! Input has one `token<TAB>tag` pair per line; a blank line marks a hard
//! line break and starts a new paragraph. `B-X` opens a span of class `X`,
//! `I-X` continues it and `O` closes it. A stray `I-X` opens a new span.

use crate::error::{Error, Result};
use crate::model::{DocumentRecord, Element, ElementClass, SentenceCoord, Taxonomy};

#[derive(Debug, Clone)]
pub struct BioOptions {
    /// Inserted between tokens of a span. Empty for character-level CJK input.
    pub joiner: String,
    pub terminators: Vec<char>,
}

impl Default for BioOptions {
    fn default() -> Self {
        BioOptions {
            joiner: " ".to_string(),
            terminators: crate::segment::SegmentConfig::default().terminators,
        }
    }
}

struct OpenSpan {
    class: ElementClass,
    tokens: Vec<String>,
    sentence: u32,
}

/// Collapses B-/I- runs into spans. Sentence indices count terminator tokens
/// seen earlier in the paragraph; two spans in the same sentence get
/// consecutive indices so coordinates stay unique.
pub fn bio_to_record(
    doc_id: &str,
    text: &str,
    source_name: &str,
    taxonomy: &Taxonomy,
    options: &BioOptions,
) -> Result<DocumentRecord> {
    let mut doc = DocumentRecord::new(doc_id);
    let mut pi: u32 = 0;
    let mut sentence: u32 = 0;
    let mut last_si: Option<u32> = None;
    let mut open: Option<OpenSpan> = None;
    let mut paragraph_has_tokens = false;

    let close = |open: &mut Option<OpenSpan>,
                 doc: &mut DocumentRecord,
                 pi: u32,
                 last_si: &mut Option<u32>|
     -> Result<()> {
        if let Some(span) = open.take() {
            let si = match *last_si {
                Some(prev) if span.sentence <= prev => prev + 1,
                _ => span.sentence,
            };
            *last_si = Some(si);
            let body = span.tokens.join(&options.joiner);
            doc.push_text(Element::from_text(span.class, body, SentenceCoord::new(pi, si)))?;
        }
        Ok(())
    };

    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            close(&mut open, &mut doc, pi, &mut last_si)?;
            if paragraph_has_tokens {
                pi += 1;
                sentence = 0;
                last_si = None;
                paragraph_has_tokens = false;
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(source_name, i + 1, "expected token<TAB>tag"));
        }
        let (token, tag) = (fields[0], fields[1].trim());
        paragraph_has_tokens = true;

        if tag == "O" {
            close(&mut open, &mut doc, pi, &mut last_si)?;
        } else if let Some(label) = tag.strip_prefix("B-") {
            close(&mut open, &mut doc, pi, &mut last_si)?;
            open = Some(OpenSpan {
                class: taxonomy.resolve(label)?,
                tokens: vec![token.to_string()],
                sentence,
            });
        } else if let Some(label) = tag.strip_prefix("I-") {
            let class = taxonomy.resolve(label)?;
            match open.as_mut() {
                Some(span) if span.class == class => span.tokens.push(token.to_string()),
                _ => {
                    close(&mut open, &mut doc, pi, &mut last_si)?;
                    open = Some(OpenSpan {
                        class,
                        tokens: vec![token.to_string()],
                        sentence,
                    });
                }
            }
        } else {
            return Err(Error::parse(source_name, i + 1, format!("bad BIO tag {tag:?}")));
        }

        if !token.is_empty() && token.chars().all(|c| options.terminators.contains(&c)) {
            sentence += 1;
        }
    }
    close(&mut open, &mut doc, pi, &mut last_si)?;
    Ok(doc)
}
