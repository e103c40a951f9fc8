use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{apply_noise, evaluate, generate_corpus, ConfusionTable, EvalReport, LayoutProfile, NoiseModel};
use crate::error::{Error, Result};
use crate::fusion::{fuse_classes, train_decision_matrix, DecisionMatrix, FusionSample};
use crate::model::{DocumentRecord, ElementClass};

type Overrides = BTreeMap<String, BTreeMap<String, f64>>;

/// Declarative description of one fusion experiment.
///
/// ```toml
/// n_docs = 500
/// seed = 7
/// train_fraction = 0.5
/// profile = "default"
/// ocr_rate = 0.0
///
/// [text_noise]
/// Section2 = { Section3 = 1.0 }
///
/// [image_noise]
/// Section1 = { Section2 = 1.0 }
/// ```
///
/// Noise tables list only the gold rows that differ from the identity.
/// A `[layout]` table replaces the named profile field by field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_docs: usize,
    pub seed: u64,
    pub train_fraction: f64,
    pub profile: String,
    pub layout: Option<LayoutProfile>,
    pub ocr_rate: f64,
    pub text_noise: Overrides,
    pub image_noise: Overrides,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_docs: 500,
            seed: 0,
            train_fraction: 0.5,
            profile: "default".into(),
            layout: None,
            ocr_rate: 0.0,
            text_noise: Overrides::new(),
            image_noise: Overrides::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn layout_profile(&self) -> Result<LayoutProfile> {
        match &self.layout {
            Some(l) => Ok(l.clone()),
            None => LayoutProfile::named(&self.profile),
        }
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        Ok(NoiseModel {
            text: ConfusionTable::from_overrides(&self.text_noise)?,
            image: ConfusionTable::from_overrides(&self.image_noise)?,
            ocr_rate: self.ocr_rate,
            seed: self.seed,
            ..NoiseModel::default()
        })
    }

    /// Number of training documents; both splits must be non-empty.
    pub fn train_docs(&self) -> Result<usize> {
        if !(0.0..=1.0).contains(&self.train_fraction) {
            return Err(Error::Usage(format!(
                "train_fraction {} outside [0,1]",
                self.train_fraction
            )));
        }
        let n = (self.n_docs as f64 * self.train_fraction).round() as usize;
        if n == 0 || n >= self.n_docs {
            return Err(Error::Usage(format!(
                "split of {} documents at {} leaves an empty train or test set",
                self.n_docs, self.train_fraction
            )));
        }
        Ok(n)
    }
}

/// Training samples from index-aligned gold and noisy documents.
pub fn fusion_samples(gold: &[DocumentRecord], noisy: &[DocumentRecord]) -> Vec<FusionSample> {
    gold.iter()
        .zip(noisy)
        .flat_map(|(g, n)| {
            g.text_elements
                .iter()
                .zip(&n.text_elements)
                .zip(&n.image_elements)
                .map(|((g, t), i)| FusionSample {
                    text_pred: t.class,
                    image_pred: i.class,
                    gold: g.class,
                })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub matrix: DecisionMatrix,
    pub text: EvalReport<ElementClass>,
    pub image: EvalReport<ElementClass>,
    pub fused: EvalReport<ElementClass>,
    pub train_docs: usize,
    pub test_docs: usize,
}

impl ExperimentResult {
    /// Per-class F1 table with one column per modality and two average
    /// rows: macro over classes and micro over pooled elements.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("Type\tText modal\tImage modal\tFused\n");
        let cell = |r: &EvalReport<ElementClass>, c: ElementClass| {
            r.per_class
                .get(&c)
                .map_or("-".to_string(), |s| format!("{:.4}", s.f1))
        };
        for c in ElementClass::ALL {
            let present = [&self.text, &self.image, &self.fused]
                .iter()
                .any(|r| r.per_class.contains_key(&c));
            if present {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    c.display_name(),
                    cell(&self.text, c),
                    cell(&self.image, c),
                    cell(&self.fused, c)
                );
            }
        }
        let _ = writeln!(
            out,
            "Average (macro)\t{:.4}\t{:.4}\t{:.4}",
            self.text.macro_f1, self.image.macro_f1, self.fused.macro_f1
        );
        let _ = writeln!(
            out,
            "Average (micro)\t{:.4}\t{:.4}\t{:.4}",
            self.text.micro_f1, self.image.micro_f1, self.fused.micro_f1
        );
        out
    }
}

/// Generates a corpus, corrupts it, trains the decision matrix on the
/// leading documents and scores text, image and fused predictions on the
/// rest.
pub fn run_fusion_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let n_train = config.train_docs()?;
    let profile = config.layout_profile()?;
    let model = config.noise_model()?;
    let gold = generate_corpus(config.n_docs, &profile, config.seed)?;
    let noisy = apply_noise(&gold, &model)?;

    let matrix = train_decision_matrix(
        &fusion_samples(&gold[..n_train], &noisy[..n_train]),
        ElementClass::COUNT,
    )?;
    let test = fusion_samples(&gold[n_train..], &noisy[n_train..]);
    let golds: Vec<ElementClass> = test.iter().map(|s| s.gold).collect();
    let text: Vec<ElementClass> = test.iter().map(|s| s.text_pred).collect();
    let image: Vec<ElementClass> = test.iter().map(|s| s.image_pred).collect();
    let fused = test
        .iter()
        .map(|s| fuse_classes(s.text_pred, s.image_pred, &matrix))
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentResult {
        text: evaluate(&text, &golds)?,
        image: evaluate(&image, &golds)?,
        fused: evaluate(&fused, &golds)?,
        matrix,
        train_docs: n_train,
        test_docs: config.n_docs - n_train,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_scores_one_everywhere() {
        let cfg = ExperimentConfig {
            n_docs: 20,
            ..ExperimentConfig::default()
        };
        let r = run_fusion_experiment(&cfg).unwrap();
        assert_eq!(
            (r.text.micro_f1, r.image.micro_f1, r.fused.micro_f1),
            (1.0, 1.0, 1.0)
        );
        assert_eq!((r.train_docs, r.test_docs), (10, 10));
    }

    #[test]
    fn complementary_noise_from_toml() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            n_docs = 40
            seed = 3
            [text_noise]
            Section2 = { Section3 = 1.0 }
            [image_noise]
            Section1 = { Section2 = 1.0 }
            "#,
        )
        .unwrap();
        let r = run_fusion_experiment(&cfg).unwrap();
        assert!(r.text.micro_f1 < 1.0 && r.image.micro_f1 < 1.0);
        assert_eq!(r.fused.micro_f1, 1.0);
        let tsv = r.to_tsv();
        assert!(tsv.starts_with("Type\tText modal\tImage modal\tFused\n"));
        assert!(tsv.contains("\nAverage (macro)\t"));
        assert!(tsv.ends_with("\t1.0000\n"));
    }

    #[test]
    fn degenerate_splits() {
        for (n, f) in [(10, 0.0), (10, 1.0), (1, 0.5), (10, 1.5)] {
            let cfg = ExperimentConfig {
                n_docs: n,
                train_fraction: f,
                ..ExperimentConfig::default()
            };
            assert!(
                matches!(run_fusion_experiment(&cfg), Err(Error::Usage(_))),
                "{n} {f}"
            );
        }
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
    }
}
