use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{map_docs, stream};
use crate::error::{Error, Result};
use crate::model::{DocumentRecord, ElementClass};

/// Row-stochastic class confusion: `rows[gold][predicted]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionTable {
    rows: Vec<Vec<f64>>,
}

impl Default for ConfusionTable {
    fn default() -> Self {
        ConfusionTable::identity()
    }
}

impl ConfusionTable {
    pub fn identity() -> Self {
        let k = ElementClass::COUNT;
        ConfusionTable {
            rows: (0..k)
                .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let t = ConfusionTable { rows };
        t.validate()?;
        Ok(t)
    }

    /// Identity table with the listed rows replaced. Keys are class names;
    /// each listed row must itself sum to 1.
    pub fn from_overrides(overrides: &BTreeMap<String, BTreeMap<String, f64>>) -> Result<Self> {
        let mut t = ConfusionTable::identity();
        for (gold, row) in overrides {
            let g: ElementClass = gold.parse()?;
            let mut new_row = vec![0.0; ElementClass::COUNT];
            for (pred, p) in row {
                let c: ElementClass = pred.parse()?;
                new_row[c.code()] = *p;
            }
            t.rows[g.code()] = new_row;
        }
        t.validate()?;
        Ok(t)
    }

    pub fn set_row(&mut self, gold: ElementClass, row: &[(ElementClass, f64)]) -> Result<()> {
        let mut new_row = vec![0.0; ElementClass::COUNT];
        for &(c, p) in row {
            new_row[c.code()] += p;
        }
        let old = std::mem::replace(&mut self.rows[gold.code()], new_row);
        if let Err(e) = self.validate() {
            self.rows[gold.code()] = old;
            return Err(e);
        }
        Ok(())
    }

    pub fn row(&self, gold: ElementClass) -> &[f64] {
        &self.rows[gold.code()]
    }

    pub fn validate(&self) -> Result<()> {
        let k = ElementClass::COUNT;
        if self.rows.len() != k || self.rows.iter().any(|r| r.len() != k) {
            return Err(Error::Validation(format!("confusion table must be {k}x{k}")));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Validation(format!(
                    "confusion row {i} has a value outside [0,1]"
                )));
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Validation(format!(
                    "confusion row {i} sums to {sum}, not 1"
                )));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, gold: ElementClass, rng: &mut R) -> ElementClass {
        let row = &self.rows[gold.code()];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = gold.code();
        for (j, &p) in row.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = j;
            if u < acc {
                break;
            }
        }
        ElementClass::from_code(last).expect("row index is a class code")
    }
}

/// Simulated extractor errors for both modalities.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub text: ConfusionTable,
    pub image: ConfusionTable,
    /// Per-character substitution probability for OCR strings.
    pub ocr_rate: f64,
    /// Replacement characters used for OCR substitutions.
    pub alphabet: Vec<char>,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            text: ConfusionTable::identity(),
            image: ConfusionTable::identity(),
            ocr_rate: 0.0,
            alphabet: "abcdefghijklmnopqrstuvwxyz0123456789".chars().collect(),
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        self.text.validate()?;
        self.image.validate()?;
        if !(0.0..=1.0).contains(&self.ocr_rate) {
            return Err(Error::Validation(format!(
                "OCR corruption rate {} outside [0,1]",
                self.ocr_rate
            )));
        }
        if self.ocr_rate > 0.0 && self.alphabet.is_empty() {
            return Err(Error::Validation(
                "OCR corruption needs a non-empty alphabet".into(),
            ));
        }
        Ok(())
    }
}

fn corrupt<R: Rng>(text: &str, rate: f64, alphabet: &[char], rng: &mut R) -> String {
    if rate == 0.0 {
        return text.to_string();
    }
    text.chars()
        .map(|c| {
            if !rng.random_bool(rate) {
                return c;
            }
            let choices: Vec<char> = alphabet.iter().copied().filter(|&a| a != c).collect();
            choices.choose(rng).copied().unwrap_or(c)
        })
        .collect()
}

/// Resamples class labels of both modal views through the model's
/// confusion tables and corrupts the OCR strings of the image view.
pub fn apply_noise(corpus: &[DocumentRecord], model: &NoiseModel) -> Result<Vec<DocumentRecord>> {
    model.validate()?;
    Ok(map_docs(corpus, |_, doc| {
        let mut rng = stream(model.seed, &format!("noise/{}", doc.doc_id));
        let mut out = doc.clone();
        for e in &mut out.text_elements {
            e.class = model.text.sample(e.class, &mut rng);
        }
        for e in &mut out.image_elements {
            e.class = model.image.sample(e.class, &mut rng);
            if let Some(b) = &mut e.bbox {
                b.label = e.class;
            }
            e.text = corrupt(&e.text, model.ocr_rate, &model.alphabet, &mut rng);
        }
        out
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{generate_corpus, LayoutProfile};
    use crate::text_metrics::levenshtein;

    fn corpus() -> Vec<DocumentRecord> {
        generate_corpus(10, &LayoutProfile::default(), 5).unwrap()
    }

    #[test]
    fn identity_noise_is_a_no_op() {
        let c = corpus();
        assert_eq!(apply_noise(&c, &NoiseModel::default()).unwrap(), c);
    }

    #[test]
    fn full_rate_disjoint_alphabet() {
        let c = corpus();
        let model = NoiseModel {
            ocr_rate: 1.0,
            alphabet: vec!['\u{25a1}'],
            ..NoiseModel::default()
        };
        let noisy = apply_noise(&c, &model).unwrap();
        for (g, n) in c.iter().zip(&noisy) {
            for (a, b) in g.image_elements.iter().zip(&n.image_elements) {
                assert_eq!(levenshtein(&a.text, &b.text), a.text.chars().count());
            }
        }
    }

    #[test]
    fn image_only_swap() {
        let c = corpus();
        let mut model = NoiseModel::default();
        model
            .image
            .set_row(ElementClass::Section2, &[(ElementClass::Section3, 1.0)])
            .unwrap();
        model
            .image
            .set_row(ElementClass::Section3, &[(ElementClass::Section2, 1.0)])
            .unwrap();
        let noisy = apply_noise(&c, &model).unwrap();
        for (g, n) in c.iter().zip(&noisy) {
            assert_eq!(g.text_elements, n.text_elements);
            for (a, b) in g.image_elements.iter().zip(&n.image_elements) {
                let swapped = matches!(a.class, ElementClass::Section2 | ElementClass::Section3);
                assert_eq!(a.class != b.class, swapped);
                assert_eq!(b.bbox.unwrap().label, b.class);
            }
        }
    }

    #[test]
    fn overrides_and_validation() {
        let mut o = BTreeMap::new();
        o.insert(
            "Title".to_string(),
            BTreeMap::from([("Title".to_string(), 0.5), ("Addressee".to_string(), 0.5)]),
        );
        let t = ConfusionTable::from_overrides(&o).unwrap();
        assert_eq!(t.row(ElementClass::Title)[ElementClass::Addressee.code()], 0.5);
        o.insert(
            "DateOfWriting".to_string(),
            BTreeMap::from([("Title".to_string(), 0.7)]),
        );
        assert!(ConfusionTable::from_overrides(&o).is_err());
        let mut t = ConfusionTable::identity();
        assert!(t
            .set_row(ElementClass::Title, &[(ElementClass::Title, 0.3)])
            .is_err());
        assert_eq!(t, ConfusionTable::identity());
        let bad = NoiseModel {
            ocr_rate: 1.5,
            ..NoiseModel::default()
        };
        assert!(apply_noise(&corpus(), &bad).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let c = corpus();
        let mut model = NoiseModel {
            ocr_rate: 0.2,
            seed: 11,
            ..NoiseModel::default()
        };
        model
            .text
            .set_row(
                ElementClass::Paragraph,
                &[(ElementClass::Paragraph, 0.5), (ElementClass::Title, 0.5)],
            )
            .unwrap();
        assert_eq!(apply_noise(&c, &model).unwrap(), apply_noise(&c, &model).unwrap());
        let other = NoiseModel {
            seed: 12,
            ..model.clone()
        };
        assert_ne!(apply_noise(&c, &model).unwrap(), apply_noise(&c, &other).unwrap());
    }
}
