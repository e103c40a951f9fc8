//! Domain types shared by every pipeline stage.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ten metaknowledge element classes of a governmental document.
///
/// The discriminant is the class code used for one-hot encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElementClass {
    SignOfIssuingAuthority = 0,
    DocumentNumber = 1,
    Title = 2,
    Addressee = 3,
    Section1 = 4,
    Section2 = 5,
    Section3 = 6,
    IssuingAuthority = 7,
    DateOfWriting = 8,
    Paragraph = 9,
}

impl ElementClass {
    pub const COUNT: usize = 10;

    pub const ALL: [ElementClass; Self::COUNT] = [
        ElementClass::SignOfIssuingAuthority,
        ElementClass::DocumentNumber,
        ElementClass::Title,
        ElementClass::Addressee,
        ElementClass::Section1,
        ElementClass::Section2,
        ElementClass::Section3,
        ElementClass::IssuingAuthority,
        ElementClass::DateOfWriting,
        ElementClass::Paragraph,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementClass::SignOfIssuingAuthority => "SignOfIssuingAuthority",
            ElementClass::DocumentNumber => "DocumentNumber",
            ElementClass::Title => "Title",
            ElementClass::Addressee => "Addressee",
            ElementClass::Section1 => "Section1",
            ElementClass::Section2 => "Section2",
            ElementClass::Section3 => "Section3",
            ElementClass::IssuingAuthority => "IssuingAuthority",
            ElementClass::DateOfWriting => "DateOfWriting",
            ElementClass::Paragraph => "Paragraph",
        }
    }

    /// Human-readable row label, as used in result tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ElementClass::SignOfIssuingAuthority => "Sign of issuing authority",
            ElementClass::DocumentNumber => "Document number",
            ElementClass::Title => "Title",
            ElementClass::Addressee => "Addressee",
            ElementClass::Section1 => "1st level section",
            ElementClass::Section2 => "2nd level section",
            ElementClass::Section3 => "3rd level section",
            ElementClass::IssuingAuthority => "Issuing authority",
            ElementClass::DateOfWriting => "Date of writing",
            ElementClass::Paragraph => "Paragraph",
        }
    }

    /// Outline level of a section heading, `None` for everything else.
    pub fn section_level(self) -> Option<u8> {
        match self {
            ElementClass::Section1 => Some(1),
            ElementClass::Section2 => Some(2),
            ElementClass::Section3 => Some(3),
            _ => None,
        }
    }

    /// Classes that describe the document as a whole rather than its body.
    pub fn is_document_attribute(self) -> bool {
        matches!(
            self,
            ElementClass::SignOfIssuingAuthority
                | ElementClass::DocumentNumber
                | ElementClass::Addressee
                | ElementClass::IssuingAuthority
                | ElementClass::DateOfWriting
        )
    }
}

impl fmt::Display for ElementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ElementClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown element class {s:?}")))
    }
}

/// Maps external label strings onto [`ElementClass`].
///
/// The canonical names and the human-readable row labels are always
/// accepted. Extra aliases come from a TOML file with an `[aliases]` table,
/// e.g. `"1st level section" = "Section1"`, which lets label sets from other
/// annotation schemes feed the same pipeline.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    aliases: HashMap<String, ElementClass>,
}

#[derive(Deserialize)]
struct TaxonomyFile {
    #[serde(default)]
    aliases: BTreeMap<String, String>,
}

impl Default for Taxonomy {
    fn default() -> Self {
        let mut aliases = HashMap::new();
        for class in ElementClass::ALL {
            aliases.insert(class.name().to_string(), class);
            aliases.insert(class.display_name().to_string(), class);
        }
        Taxonomy { aliases }
    }
}

impl Taxonomy {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: TaxonomyFile = toml::from_str(text)?;
        Self::from_aliases(file.aliases)
    }

    /// Default class names plus `alias -> class name` entries.
    pub fn from_aliases(aliases: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut taxonomy = Taxonomy::default();
        for (alias, target) in aliases {
            let class = target.parse::<ElementClass>()?;
            taxonomy.aliases.insert(alias, class);
        }
        Ok(taxonomy)
    }

    pub fn lookup(&self, label: &str) -> Option<ElementClass> {
        self.aliases.get(label).copied()
    }

    pub fn resolve(&self, label: &str) -> Result<ElementClass> {
        self.lookup(label)
            .ok_or_else(|| Error::Validation(format!("unknown element class {label:?}")))
    }

    pub fn k(&self) -> usize {
        ElementClass::COUNT
    }
}

/// Paragraph index / sentence index pair.
///
/// Ordering is lexicographic: the paragraph index is compared first and the
/// sentence index breaks ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(from = "(u32, u32)", into = "(u32, u32)")]
pub struct SentenceCoord {
    pub pi: u32,
    pub si: u32,
}

impl SentenceCoord {
    /// Weight component carried by sentinel vertices. Twice this value still
    /// fits in a `u32`.
    pub const SENTINEL_COMPONENT: u32 = 0x3F3F_3F3F;

    pub const SENTINEL: SentenceCoord = SentenceCoord {
        pi: Self::SENTINEL_COMPONENT,
        si: Self::SENTINEL_COMPONENT,
    };

    pub const fn new(pi: u32, si: u32) -> Self {
        SentenceCoord { pi, si }
    }

    /// Real document coordinates must stay strictly below the sentinel.
    pub fn is_real(self) -> bool {
        self.pi < Self::SENTINEL_COMPONENT && self.si < Self::SENTINEL_COMPONENT
    }
}

impl From<(u32, u32)> for SentenceCoord {
    fn from((pi, si): (u32, u32)) -> Self {
        SentenceCoord { pi, si }
    }
}

impl From<SentenceCoord> for (u32, u32) {
    fn from(c: SentenceCoord) -> Self {
        (c.pi, c.si)
    }
}

impl fmt::Display for SentenceCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.pi, self.si)
    }
}

/// Object-detector output for one region: label, confidence and box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionVector {
    pub label: ElementClass,
    pub prob: f64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub d: f64,
}

impl DetectionVector {
    pub fn new(label: ElementClass, prob: f64, x: f64, y: f64, w: f64, d: f64) -> Result<Self> {
        let v = DetectionVector {
            label,
            prob,
            x,
            y,
            w,
            d,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.prob) {
            return Err(Error::Validation(format!(
                "detection probability {} outside [0,1]",
                self.prob
            )));
        }
        if !(self.w > 0.0 && self.d > 0.0) {
            return Err(Error::Validation(format!(
                "box dimensions must be positive, got w={} d={}",
                self.w, self.d
            )));
        }
        if !self.x.is_finite() || !self.y.is_finite() || !self.w.is_finite() || !self.d.is_finite() {
            return Err(Error::Validation("box coordinates must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Image,
    Fused,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Image => "image",
            Modality::Fused => "fused",
        }
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Modality::Text),
            "image" => Ok(Modality::Image),
            "fused" => Ok(Modality::Fused),
            other => Err(Error::Validation(format!("unknown modality {other:?}"))),
        }
    }
}

/// One extracted metaknowledge element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub class: ElementClass,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord: Option<SentenceCoord>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bbox: Option<DetectionVector>,
    pub modality: Modality,
    pub page: u32,
}

impl Element {
    pub fn from_text(class: ElementClass, text: impl Into<String>, coord: SentenceCoord) -> Self {
        Element {
            class,
            text: text.into(),
            coord: Some(coord),
            bbox: None,
            modality: Modality::Text,
            page: 1,
        }
    }

    pub fn from_image(bbox: DetectionVector, ocr_text: impl Into<String>, page: u32) -> Self {
        Element {
            class: bbox.label,
            text: ocr_text.into(),
            coord: None,
            bbox: Some(bbox),
            modality: Modality::Image,
            page,
        }
    }

    /// Checks the modality-dependent field requirements.
    pub fn validate(&self) -> Result<()> {
        if self.page == 0 {
            return Err(Error::Validation("page numbers start at 1".into()));
        }
        if let Some(c) = self.coord {
            if !c.is_real() {
                return Err(Error::Validation(format!(
                    "coordinate {c} reaches the sentinel range"
                )));
            }
        }
        if let Some(b) = &self.bbox {
            b.validate()?;
        }
        let ok = match self.modality {
            Modality::Text => self.coord.is_some(),
            Modality::Image => self.bbox.is_some(),
            Modality::Fused => self.coord.is_some() || self.bbox.is_some(),
        };
        if !ok {
            return Err(Error::Validation(format!(
                "{} element lacks its required coordinate or box",
                self.modality.as_str()
            )));
        }
        Ok(())
    }
}

/// All sentence coordinates of a document with their text.
pub type SentenceTable = BTreeMap<SentenceCoord, String>;

/// Both modal views of one document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DocumentRecord {
    pub doc_id: String,
    /// Text-modal elements in reading order.
    pub text_elements: Vec<Element>,
    pub image_elements: Vec<Element>,
    pub sentence_table: SentenceTable,
}

impl DocumentRecord {
    pub fn new(doc_id: impl Into<String>) -> Self {
        DocumentRecord {
            doc_id: doc_id.into(),
            ..Default::default()
        }
    }

    /// Appends a text-modal element, keeping reading order and coordinate
    /// uniqueness intact.
    pub fn push_text(&mut self, element: Element) -> Result<()> {
        let coord = element
            .coord
            .ok_or_else(|| Error::Validation("text element without coordinate".into()))?;
        element.validate()?;
        if let Some(last) = self.text_elements.last().and_then(|e| e.coord) {
            if coord <= last {
                return Err(Error::Validation(format!(
                    "coordinate {coord} does not follow {last} in reading order"
                )));
            }
        }
        self.sentence_table.insert(coord, element.text.clone());
        self.text_elements.push(element);
        Ok(())
    }
}
