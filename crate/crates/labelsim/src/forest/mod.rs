//! Random-forest ensemble over in-repo CART trees.
//!
//! Prediction confidence is the fraction of trees voting malicious, which
//! is what the active-learning ranking consumes. Per-tree randomness
//! derives from `(forest seed, tree index)`, so parallel and serial
//! training build identical forests.

mod tree;

pub use tree::{best_split, gini, Node, Split, Tree};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label, Sample, Seed};
use crate::error::{Error, Result};
use tree::{Grower, TrainingView};

/// How many candidate features each node considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureRule {
    /// `max(1, floor(sqrt(n_features)))`, the usual forest default.
    Sqrt,
    /// Every feature at every node (deterministic CART given no bootstrap).
    All,
    /// A fixed count, validated against the feature width.
    Fixed(usize),
}

impl FeatureRule {
    pub fn resolve(&self, n_features: usize) -> usize {
        match self {
            FeatureRule::Sqrt => ((n_features as f64).sqrt().floor() as usize).max(1),
            FeatureRule::All => n_features,
            FeatureRule::Fixed(k) => *k,
        }
    }
}

// Config files spell the rule as "sqrt", "all", or a bare integer.
impl Serialize for FeatureRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FeatureRule::Sqrt => s.serialize_str("sqrt"),
            FeatureRule::All => s.serialize_str("all"),
            FeatureRule::Fixed(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for FeatureRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = FeatureRule;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "\"sqrt\", \"all\", or a positive integer")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<FeatureRule, E> {
                match v {
                    "sqrt" => Ok(FeatureRule::Sqrt),
                    "all" => Ok(FeatureRule::All),
                    other => Err(E::custom(format!(
                        "unknown features_per_split {other:?} (expected \"sqrt\", \"all\", or an integer)"
                    ))),
                }
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<FeatureRule, E> {
                Ok(FeatureRule::Fixed(v as usize))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<FeatureRule, E> {
                if v < 1 {
                    return Err(E::custom("features_per_split must be >= 1"));
                }
                Ok(FeatureRule::Fixed(v as usize))
            }
        }
        d.deserialize_any(V)
    }
}

/// Forest hyperparameters without a seed, as experiment configs carry them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: FeatureRule,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: FeatureRule::Sqrt,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn with_seed(&self, seed: Seed) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            features_per_split: self.features_per_split,
            bootstrap: self.bootstrap,
            seed,
        }
    }
}

/// Full training configuration for one forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: FeatureRule,
    pub bootstrap: bool,
    pub seed: Seed,
}

impl ForestConfig {
    pub fn defaults(seed: Seed) -> ForestConfig {
        ForestParams::default().with_seed(seed)
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::OutOfRange {
                what: "n_trees",
                range: "[1, ..)",
                value: self.n_trees as f64,
            });
        }
        if self.min_samples_split < 1 {
            return Err(Error::OutOfRange {
                what: "min_samples_split",
                range: "[1, ..)",
                value: self.min_samples_split as f64,
            });
        }
        if let FeatureRule::Fixed(k) = self.features_per_split {
            if k < 1 || k > n_features {
                return Err(Error::OutOfRange {
                    what: "features_per_split",
                    range: "[1, n_features]",
                    value: k as f64,
                });
            }
        }
        Ok(())
    }

    pub fn params(&self) -> ForestParams {
        ForestParams {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            features_per_split: self.features_per_split,
            bootstrap: self.bootstrap,
        }
    }
}

/// A trained ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
    config: ForestConfig,
    n_features: usize,
}

const MODEL_FORMAT: &str = "labelsim-forest";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    forest: Forest,
}

impl Forest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    fn check_width(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: features.len(),
            });
        }
        Ok(())
    }

    /// Fraction of trees voting malicious; always a multiple of `1/n_trees`.
    pub fn predict_proba(&self, features: &[f64]) -> Result<f64> {
        self.check_width(features)?;
        let votes = self
            .trees
            .iter()
            .filter(|t| t.predict(features).is_malicious())
            .count();
        Ok(votes as f64 / self.trees.len() as f64)
    }

    /// Majority label; an exact half-split votes benign.
    pub fn predict(&self, features: &[f64]) -> Result<Label> {
        self.check_width(features)?;
        let votes = self
            .trees
            .iter()
            .filter(|t| t.predict(features).is_malicious())
            .count();
        Ok(if votes * 2 > self.trees.len() {
            Label::Malicious
        } else {
            Label::Benign
        })
    }

    pub fn predict_sample(&self, sample: &Sample) -> Result<Label> {
        self.predict(&sample.features)
    }

    /// Predicted labels for every sample of `ds`, in dataset order.
    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<Label>> {
        ds.samples()
            .iter()
            .map(|s| self.predict(&s.features))
            .collect()
    }

    /// Versioned JSON serialization; round-trips exactly (float values
    /// are emitted with shortest-round-trip formatting).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            forest: self.clone(),
        })
        .expect("forest serializes")
    }

    pub fn from_json(text: &str) -> Result<Forest> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!(
                "unexpected format {:?}",
                file.format
            )));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported version {} (supported: {MODEL_VERSION})",
                file.version
            )));
        }
        Ok(file.forest)
    }
}

// Stream indices under each per-tree seed.
const TREE_BOOTSTRAP: u64 = 0;
const TREE_GROWTH: u64 = 1;

/// Train a single CART tree. With `FeatureRule::All` and rows `0..n` this
/// is plain deterministic CART; the seed only matters for feature
/// subsampling.
pub fn train_tree(set: &Dataset, cfg: &ForestConfig, seed: &Seed) -> Result<Tree> {
    if set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    cfg.validate(set.n_features())?;
    let view = TrainingView::from_dataset(set);
    let mut rows: Vec<u32> = (0..view.len() as u32).collect();
    Ok(grow_one(&view, &mut rows, cfg, seed))
}

fn grow_one(view: &TrainingView, rows: &mut [u32], cfg: &ForestConfig, seed: &Seed) -> Tree {
    let grower = Grower::new(
        view,
        seed.child(TREE_GROWTH).rng(),
        cfg.max_depth,
        cfg.min_samples_split,
        cfg.features_per_split.resolve(view.columns.len()),
    );
    grower.grow(rows)
}

/// Train a forest of `cfg.n_trees` trees.
///
/// With `bootstrap` on, each tree trains on `|set|` rows drawn with
/// replacement from its own seed stream; off, every tree sees the full
/// set and diversity comes from per-node feature sampling alone.
pub fn train_forest(set: &Dataset, cfg: &ForestConfig) -> Result<Forest> {
    if set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    cfg.validate(set.n_features())?;
    let view = TrainingView::from_dataset(set);
    let n = view.len();
    let trees: Vec<Tree> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let tree_seed = cfg.seed.child(t as u64);
            let mut rows: Vec<u32> = if cfg.bootstrap {
                let mut rng = tree_seed.child(TREE_BOOTSTRAP).rng();
                (0..n)
                    .map(|_| rand::Rng::gen_range(&mut rng, 0..n as u32))
                    .collect()
            } else {
                (0..n as u32).collect()
            };
            grow_one(&view, &mut rows, cfg, &tree_seed)
        })
        .collect();
    Ok(Forest {
        trees,
        config: cfg.clone(),
        n_features: set.n_features(),
    })
}
