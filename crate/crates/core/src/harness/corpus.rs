use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{map_docs, stream};
use crate::error::{Error, Result};
use crate::model::{DetectionVector, DocumentRecord, Element, ElementClass, SentenceCoord};

/// Shape of generated documents. Count distributions are weight lists
/// indexed by the count they produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutProfile {
    pub sign_prob: f64,
    pub number_prob: f64,
    pub addressee_prob: f64,
    pub top_sections_min: u32,
    pub top_sections_max: u32,
    pub subsections: Vec<f64>,
    pub subsubsections: Vec<f64>,
    pub paragraphs: Vec<f64>,
    pub sentences: Vec<f64>,
    pub authorities: Vec<f64>,
    pub date_prob: f64,
}

impl Default for LayoutProfile {
    /// Per-document element mix of a governmental notice: about 4
    /// first-level sections, 3.6 second-level, 1 third-level and 8
    /// paragraph sentences per title.
    fn default() -> Self {
        LayoutProfile {
            sign_prob: 1.0,
            number_prob: 1.0,
            addressee_prob: 0.78,
            top_sections_min: 2,
            top_sections_max: 6,
            subsections: vec![0.35, 0.4, 0.25],
            subsubsections: vec![0.75, 0.2, 0.05],
            paragraphs: vec![0.4, 0.4, 0.2],
            sentences: vec![0.0, 0.85, 0.15],
            authorities: vec![0.0, 0.47, 0.53],
            date_prob: 0.87,
        }
    }
}

impl LayoutProfile {
    /// Title, one section and one single-sentence paragraph.
    pub fn minimal() -> Self {
        LayoutProfile {
            sign_prob: 0.0,
            number_prob: 0.0,
            addressee_prob: 0.0,
            top_sections_min: 1,
            top_sections_max: 1,
            subsections: vec![1.0],
            subsubsections: vec![1.0],
            paragraphs: vec![0.0, 1.0],
            sentences: vec![0.0, 1.0],
            authorities: vec![1.0],
            date_prob: 0.0,
        }
    }

    pub fn named(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(LayoutProfile::default()),
            "minimal" => Ok(LayoutProfile::minimal()),
            other => Err(Error::Usage(format!("unknown layout profile {other:?}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("sign_prob", self.sign_prob),
            ("number_prob", self.number_prob),
            ("addressee_prob", self.addressee_prob),
            ("date_prob", self.date_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!("{name} {p} outside [0,1]")));
            }
        }
        if self.top_sections_min > self.top_sections_max {
            return Err(Error::Validation(
                "top_sections_min exceeds top_sections_max".into(),
            ));
        }
        for (name, w) in [
            ("subsections", &self.subsections),
            ("subsubsections", &self.subsubsections),
            ("paragraphs", &self.paragraphs),
            ("sentences", &self.sentences),
            ("authorities", &self.authorities),
        ] {
            WeightedIndex::new(w).map_err(|e| Error::Validation(format!("{name} weights: {e}")))?;
        }
        Ok(())
    }
}

const AGENCIES: &[&str] = &[
    "Provincial Education Bureau",
    "Municipal Health Commission",
    "University Office",
    "Department of Transport",
    "City Planning Committee",
    "Bureau of Statistics",
    "Water Resources Office",
    "Science and Technology Agency",
];

const TOPICS: &[&str] = &[
    "epidemic prevention",
    "campus safety",
    "budget review",
    "data reporting",
    "energy saving",
    "flood control",
    "staff training",
    "procurement rules",
    "road maintenance",
    "archive management",
    "public health",
    "exam scheduling",
    "grant applications",
    "waste sorting",
    "fire inspection",
];

const NOUNS: &[&str] = &[
    "schools",
    "hospitals",
    "units",
    "offices",
    "departments",
    "committees",
    "staff",
    "students",
    "records",
    "funds",
    "reports",
    "inspections",
    "materials",
    "schedules",
    "contracts",
    "vehicles",
    "facilities",
    "procedures",
    "deadlines",
    "guidelines",
    "measures",
    "districts",
    "projects",
    "applications",
    "budgets",
    "surveys",
    "notices",
    "permits",
];

const ADJECTIVES: &[&str] = &[
    "local",
    "annual",
    "urgent",
    "relevant",
    "public",
    "quarterly",
    "internal",
    "regional",
    "temporary",
    "detailed",
    "written",
    "preliminary",
    "municipal",
    "independent",
];

const VERBS: &[&str] = &[
    "requires",
    "provides",
    "supports",
    "specifies",
    "includes",
    "reports",
    "regulates",
    "defines",
    "issues",
    "improves",
    "applies",
    "describes",
];

const UNITS: &[&str] = &[
    "all district offices",
    "all affiliated units",
    "all schools",
    "all hospitals",
];

const MONTHS: &[&str] = &[
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

fn phrase<R: Rng>(rng: &mut R, words: usize) -> String {
    (0..words)
        .map(|i| {
            let pool = if i + 1 == words || rng.random_bool(0.5) {
                NOUNS
            } else {
                ADJECTIVES
            };
            *pool.choose(rng).expect("non-empty")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn words<R: Rng>(rng: &mut R, min: usize, max: usize) -> String {
    let n = rng.random_range(min..=max);
    phrase(rng, n)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn sentence<R: Rng>(rng: &mut R) -> String {
    let subject = format!("The {}", words(rng, 1, 2));
    let verb = VERBS.choose(rng).expect("non-empty");
    let object = words(rng, 2, 4);
    if rng.random_bool(0.3) {
        let verb2 = VERBS.choose(rng).expect("non-empty");
        let object2 = words(rng, 1, 3);
        format!("{subject} {verb} {object} and {verb2} {object2}.")
    } else {
        format!("{subject} {verb} {object}.")
    }
}

fn roman(n: u32) -> &'static str {
    const R: [&str; 12] = [
        "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII",
    ];
    R.get(n as usize - 1).copied().unwrap_or("XII")
}

struct DocBuilder {
    record: DocumentRecord,
    pi: u32,
    page: u32,
    y: f64,
}

impl DocBuilder {
    fn push<R: Rng>(&mut self, rng: &mut R, class: ElementClass, sentences: Vec<String>) {
        for (si, text) in sentences.into_iter().enumerate() {
            let lines = (text.chars().count() / 60 + 1) as f64;
            let d = 18.0 * lines;
            if self.y + d > 1000.0 {
                self.page += 1;
                self.y = 60.0;
            }
            let x = if class == ElementClass::Title { 160.0 } else { 80.0 };
            let w = (text.chars().count().min(60) as f64 * 8.0).max(24.0);
            let prob = f64::from(rng.random_range(80u32..=99)) / 100.0;
            let bbox = DetectionVector::new(class, prob, x, self.y, w, d).expect("generated box is valid");
            self.y += d + 12.0;
            let image = Element::from_image(bbox, text.clone(), self.page);
            let element = Element::from_text(class, text, SentenceCoord::new(self.pi, si as u32));
            self.record.push_text(element).expect("coordinates increase");
            self.record.image_elements.push(image);
        }
        self.pi += 1;
    }
}

fn count<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    WeightedIndex::new(weights)
        .expect("validated weights")
        .sample(rng)
}

fn generate_document(doc_id: &str, profile: &LayoutProfile, seed: u64) -> DocumentRecord {
    let mut rng = stream(seed, doc_id);
    let rng = &mut rng;
    let mut b = DocBuilder {
        record: DocumentRecord::new(doc_id),
        pi: 0,
        page: 1,
        y: 60.0,
    };
    let agency = *AGENCIES.choose(rng).expect("non-empty");
    let topic = *TOPICS.choose(rng).expect("non-empty");
    let year = rng.random_range(2015..=2023);

    if rng.random_bool(profile.sign_prob) {
        b.push(
            rng,
            ElementClass::SignOfIssuingAuthority,
            vec![format!("{agency} Document")],
        );
    }
    if rng.random_bool(profile.number_prob) {
        let abbrev: String = agency
            .split_whitespace()
            .filter_map(|w| w.chars().next())
            .collect();
        let n = rng.random_range(1..=120);
        b.push(
            rng,
            ElementClass::DocumentNumber,
            vec![format!("{abbrev} [{year}] No. {n}")],
        );
    }
    let title = format!("Notice on {} of {}", capitalize(topic), phrase(rng, 2));
    b.push(rng, ElementClass::Title, vec![title]);
    if rng.random_bool(profile.addressee_prob) {
        let unit = UNITS.choose(rng).expect("non-empty");
        b.push(rng, ElementClass::Addressee, vec![format!("To {unit}:")]);
    }

    let body = |b: &mut DocBuilder, rng: &mut rand_chacha::ChaCha8Rng| {
        for _ in 0..count(rng, &profile.paragraphs) {
            let n = count(rng, &profile.sentences).max(1);
            let sentences = (0..n).map(|_| sentence(rng)).collect();
            b.push(rng, ElementClass::Paragraph, sentences);
        }
    };
    let tops = rng.random_range(profile.top_sections_min..=profile.top_sections_max);
    for s1 in 1..=tops {
        let heading = format!("{}. {}", roman(s1), capitalize(&words(rng, 2, 3)));
        b.push(rng, ElementClass::Section1, vec![heading]);
        body(&mut b, rng);
        for s2 in 1..=count(rng, &profile.subsections) {
            let heading = format!("({s2}) {}", capitalize(&words(rng, 2, 4)));
            b.push(rng, ElementClass::Section2, vec![heading]);
            body(&mut b, rng);
            for s3 in 1..=count(rng, &profile.subsubsections) {
                let heading = format!("{s3}) {}", capitalize(&words(rng, 2, 4)));
                b.push(rng, ElementClass::Section3, vec![heading]);
                body(&mut b, rng);
            }
        }
    }

    for i in 0..count(rng, &profile.authorities) {
        let name = if i == 0 {
            agency
        } else {
            *AGENCIES.choose(rng).expect("non-empty")
        };
        b.push(rng, ElementClass::IssuingAuthority, vec![name.to_string()]);
    }
    if rng.random_bool(profile.date_prob) {
        let month = MONTHS.choose(rng).expect("non-empty");
        let day = rng.random_range(1..=28);
        b.push(
            rng,
            ElementClass::DateOfWriting,
            vec![format!("{month} {day}, {year}")],
        );
    }
    b.record
}

/// Generates `n_docs` gold-labelled documents with both modal views. The
/// image view holds one box per text element, in the same order, with the
/// OCR text equal to the gold text.
pub fn generate_corpus(n_docs: usize, profile: &LayoutProfile, seed: u64) -> Result<Vec<DocumentRecord>> {
    if n_docs == 0 {
        return Err(Error::Usage("corpus size must be at least 1".into()));
    }
    profile.validate()?;
    let ids: Vec<String> = (1..=n_docs).map(|i| format!("doc{i:05}")).collect();
    Ok(map_docs(&ids, |_, id| generate_document(id, profile, seed)))
}
