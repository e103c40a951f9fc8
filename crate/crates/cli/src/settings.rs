use std::collections::BTreeMap;
use std::path::Path;

use metaforge::ingest::read_file;
use metaforge::model::Taxonomy;
use metaforge::Result;
use serde::Deserialize;

/// Defaults read from `--config`. Command-line flags win over these.
///
/// ```toml
/// seed = 7
/// threshold = 3
/// relative = 0.25
/// normalize = true
/// max_depth = 4
/// jobs = 4
/// formats = ["graph-json", "dot"]
///
/// [aliases]
/// "Heading 1" = "Section1"
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub seed: Option<u64>,
    pub threshold: Option<usize>,
    pub relative: Option<f64>,
    pub normalize: Option<bool>,
    pub max_depth: Option<u8>,
    pub jobs: Option<usize>,
    pub formats: Option<Vec<String>>,
    pub aliases: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Ok(toml::from_str(&read_file(p)?)?),
            None => Ok(Settings::default()),
        }
    }

    pub fn taxonomy(&self) -> Result<Taxonomy> {
        Taxonomy::from_aliases(self.aliases.clone())
    }
}
