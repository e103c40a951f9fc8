use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{escape_field, parse_num, records, text_field};
use crate::model::{SentenceCoord, SentenceTable};

/// A (subject, predicate, object) fact anchored at the sentence it came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContextTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub origin: SentenceCoord,
}

impl ContextTriple {
    pub fn new(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
        origin: SentenceCoord,
    ) -> Result<Self> {
        let t = ContextTriple {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
            origin,
        };
        for (name, v) in [
            ("subject", &t.subject),
            ("predicate", &t.predicate),
            ("object", &t.object),
        ] {
            if v.trim().is_empty() {
                return Err(Error::Validation(format!("triple {name} is empty")));
            }
        }
        Ok(t)
    }
}

const DEFAULT_VERBS: &[&str] = &[
    "achieves",
    "adopts",
    "announces",
    "applies",
    "builds",
    "combines",
    "contains",
    "defines",
    "describes",
    "detects",
    "employs",
    "extends",
    "extracts",
    "generates",
    "governs",
    "improves",
    "includes",
    "introduces",
    "issues",
    "outperforms",
    "presents",
    "proposes",
    "provides",
    "regulates",
    "reports",
    "requires",
    "specifies",
    "supports",
    "uses",
];

const CONNECTIVES: &[&str] = &["and", "or", "but", "then", "also"];

/// Baseline subject-verb-object extractor over a verb lexicon.
///
/// Words before the first lexicon verb form the subject. Each verb takes the
/// words up to the next verb as its object, minus trailing connectives, so
/// "YOLO uses CNN and detects objects." yields two triples sharing "YOLO".
/// Real deployments should feed triples from a proper extractor instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleExtractor {
    verbs: BTreeSet<String>,
}

impl Default for TripleExtractor {
    fn default() -> Self {
        TripleExtractor::with_verbs(DEFAULT_VERBS.iter().copied())
    }
}

fn bare(word: &str) -> &str {
    word.trim_matches(|c: char| !c.is_alphanumeric())
}

impl TripleExtractor {
    pub fn with_verbs<I, S>(verbs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        TripleExtractor {
            verbs: verbs.into_iter().map(|v| v.as_ref().to_lowercase()).collect(),
        }
    }

    fn is_verb(&self, word: &str) -> bool {
        self.verbs.contains(&bare(word).to_lowercase())
    }

    pub fn extract_sentence(&self, sentence: &str, origin: SentenceCoord) -> Vec<ContextTriple> {
        let words: Vec<&str> = sentence.split_whitespace().collect();
        let verb_at: Vec<usize> = (0..words.len()).filter(|&i| self.is_verb(words[i])).collect();
        let Some(&first) = verb_at.first() else {
            return Vec::new();
        };
        let subject = join(&words[..first]);
        if subject.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (n, &v) in verb_at.iter().enumerate() {
            let end = verb_at.get(n + 1).copied().unwrap_or(words.len());
            let mut obj = &words[v + 1..end];
            while let Some(last) = obj.last() {
                if CONNECTIVES.contains(&bare(last).to_lowercase().as_str()) || bare(last).is_empty() {
                    obj = &obj[..obj.len() - 1];
                } else {
                    break;
                }
            }
            let object = join(obj);
            if let Ok(t) = ContextTriple::new(subject.clone(), bare(words[v]), object, origin) {
                out.push(t);
            }
        }
        out
    }

    pub fn extract(&self, table: &SentenceTable) -> Vec<ContextTriple> {
        table
            .iter()
            .flat_map(|(&coord, s)| self.extract_sentence(s, coord))
            .collect()
    }
}

fn join(words: &[&str]) -> String {
    let s = words.join(" ");
    s.trim_matches(|c: char| !c.is_alphanumeric()).to_string()
}

/// Reads `subject<TAB>predicate<TAB>object<TAB>pi<TAB>si` lines.
pub fn parse_triples(text: &str, source_name: &str) -> Result<Vec<ContextTriple>> {
    let mut out = Vec::new();
    for rec in records(text, source_name, 5) {
        let (line, f) = rec?;
        let pi = parse_num(f[3], "paragraph index", source_name, line)?;
        let si = parse_num(f[4], "sentence index", source_name, line)?;
        let t = ContextTriple::new(
            text_field(f[0], source_name, line)?,
            text_field(f[1], source_name, line)?,
            text_field(f[2], source_name, line)?,
            SentenceCoord::new(pi, si),
        )
        .map_err(|e| Error::parse(source_name, line, e.to_string()))?;
        out.push(t);
    }
    Ok(out)
}

pub fn write_triples(triples: &[ContextTriple]) -> String {
    let mut out = String::new();
    for t in triples {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            escape_field(&t.subject),
            escape_field(&t.predicate),
            escape_field(&t.object),
            t.origin.pi,
            t.origin.si
        );
    }
    out
}
