//! Datasets, deterministic splitting, balanced subsampling, and label
//! flipping.
//!
//! The types here carry the three ingredients every experiment needs: a
//! corpus of labeled feature vectors ([`Dataset`]), a reproducible way to
//! cut it up ([`split_holdout`], [`sample_balanced_subset`]), and a
//! controlled way to corrupt it ([`flip_labels`]).

mod csv;
mod seed;
pub mod synthetic;

pub use csv::{load_csv, CsvSchema};
pub use seed::{derive_seed, Seed};

use std::collections::HashSet;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class label. Malicious is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "benign")]
    Benign,
    #[serde(rename = "malicious")]
    Malicious,
}

impl Label {
    pub fn index(self) -> usize {
        match self {
            Label::Benign => 0,
            Label::Malicious => 1,
        }
    }

    pub fn from_index(index: usize) -> Option<Label> {
        match index {
            0 => Some(Label::Benign),
            1 => Some(Label::Malicious),
            _ => None,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Benign => Label::Malicious,
            Label::Malicious => Label::Benign,
        }
    }

    pub fn is_malicious(self) -> bool {
        self == Label::Malicious
    }
}

/// One labeled observation: a stable id, a feature vector, and its ground
/// truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: u32,
    pub features: Vec<f64>,
    pub label: Label,
}

/// An ordered collection of samples with uniform feature width.
///
/// Invariants enforced at construction: every feature vector has the same
/// length as `feature_names`, every feature value is finite, and ids are
/// unique within the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<Sample>,
    feature_names: Vec<String>,
    class_counts: [usize; 2],
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, feature_names: Vec<String>) -> Result<Dataset> {
        let width = feature_names.len();
        let mut class_counts = [0usize; 2];
        let mut seen = HashSet::with_capacity(samples.len());
        for (row, s) in samples.iter().enumerate() {
            if s.features.len() != width {
                return Err(Error::RaggedRow {
                    row,
                    expected: width,
                    found: s.features.len(),
                });
            }
            if let Some(pos) = s.features.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonNumericFeature {
                    row,
                    column: feature_names[pos].clone(),
                    value: s.features[pos].to_string(),
                });
            }
            if !seen.insert(s.id) {
                return Err(Error::Config {
                    path: Default::default(),
                    message: format!("duplicate sample id {}", s.id),
                });
            }
            class_counts[s.label.index()] += 1;
        }
        Ok(Dataset {
            samples,
            feature_names,
            class_counts,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Per-class totals, indexed by [`Label::index`] (benign first).
    pub fn class_counts(&self) -> [usize; 2] {
        self.class_counts
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.samples.iter().map(|s| s.id)
    }

    /// Positions (indices into `samples`) of each class, in dataset order.
    fn class_positions(&self) -> [Vec<usize>; 2] {
        let mut by_class = [Vec::new(), Vec::new()];
        for (i, s) in self.samples.iter().enumerate() {
            by_class[s.label.index()].push(i);
        }
        by_class
    }

    /// New dataset containing the samples at `positions`, in dataset order.
    pub(crate) fn select_positions(&self, positions: &[usize]) -> Dataset {
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        let samples: Vec<Sample> = sorted.iter().map(|&p| self.samples[p].clone()).collect();
        let mut class_counts = [0usize; 2];
        for s in &samples {
            class_counts[s.label.index()] += 1;
        }
        Dataset {
            samples,
            feature_names: self.feature_names.clone(),
            class_counts,
        }
    }

    /// Copy of the dataset with the labels of `ids` inverted. Applying it
    /// twice with the same id set restores the original labels.
    pub fn flip_by_ids(&self, ids: &HashSet<u32>) -> Dataset {
        let mut samples = self.samples.clone();
        let mut class_counts = self.class_counts;
        for s in &mut samples {
            if ids.contains(&s.id) {
                class_counts[s.label.index()] -= 1;
                s.label = s.label.flipped();
                class_counts[s.label.index()] += 1;
            }
        }
        Dataset {
            samples,
            feature_names: self.feature_names.clone(),
            class_counts,
        }
    }
}

/// Outcome of a stratified holdout split: disjoint train/eval partitions.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: Dataset,
    pub eval: Dataset,
    pub seed: Seed,
}

/// Per-class label-flip ratios.
///
/// The nominal poisoning percentage follows the sum convention: ratios
/// (0.10, 0.10) are reported as "20%" even though in a balanced set the
/// flipped fraction of all samples is half that. [`FlipSpec::actual_flip_fraction`]
/// reports the unambiguous number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipSpec {
    pub malicious_ratio: f64,
    pub benign_ratio: f64,
}

impl FlipSpec {
    pub fn new(malicious_ratio: f64, benign_ratio: f64) -> Result<FlipSpec> {
        let spec = FlipSpec {
            malicious_ratio,
            benign_ratio,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn clean() -> FlipSpec {
        FlipSpec {
            malicious_ratio: 0.0,
            benign_ratio: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("malicious_ratio", self.malicious_ratio),
            ("benign_ratio", self.benign_ratio),
        ] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::OutOfRange {
                    what,
                    range: "[0, 1]",
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// Nominal poisoning percentage, sum convention: `100 * (mal + ben)`.
    pub fn nominal_poison_pct(&self) -> u32 {
        (self.malicious_ratio * 100.0 + self.benign_ratio * 100.0).round() as u32
    }

    /// Fraction of `ds` samples that would actually be flipped.
    pub fn actual_flip_fraction(&self, ds: &Dataset) -> f64 {
        if ds.is_empty() {
            return 0.0;
        }
        let [ben, mal] = ds.class_counts();
        let flipped = flip_count(self.benign_ratio, ben) + flip_count(self.malicious_ratio, mal);
        flipped as f64 / ds.len() as f64
    }

    pub fn is_clean(&self) -> bool {
        self.malicious_ratio == 0.0 && self.benign_ratio == 0.0
    }
}

/// Record of which samples a [`flip_labels`] call corrupted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipAudit {
    /// Flipped sample ids, ascending.
    pub flipped_ids: Vec<u32>,
    /// How many were flipped per original class, benign first.
    pub per_class_counts: [usize; 2],
}

impl FlipAudit {
    pub fn id_set(&self) -> HashSet<u32> {
        self.flipped_ids.iter().copied().collect()
    }
}

fn flip_count(ratio: f64, class_count: usize) -> usize {
    (ratio * class_count as f64).floor() as usize
}

fn check_fraction(what: &'static str, value: f64, max_inclusive: bool) -> Result<()> {
    let ok = value.is_finite()
        && value > 0.0
        && if max_inclusive {
            value <= 1.0
        } else {
            value < 1.0
        };
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            range: if max_inclusive { "(0, 1]" } else { "(0, 1)" },
            value,
        })
    }
}

/// Draw `k` distinct positions from `pool` uniformly, deterministic in `seed`.
/// The result is returned in ascending order so downstream datasets keep
/// source order regardless of draw order.
fn draw_without_replacement(pool: &[usize], k: usize, seed: &Seed) -> Vec<usize> {
    debug_assert!(k <= pool.len());
    let mut rng = seed.rng();
    let mut picked: Vec<usize> = index::sample(&mut rng, pool.len(), k)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// Stratified holdout split: the eval side receives
/// `round(holdout_fraction * count_c)` samples of each class, drawn
/// uniformly without replacement; train is the remainder. Deterministic in
/// `seed`.
pub fn split_holdout(ds: &Dataset, holdout_fraction: f64, seed: &Seed) -> Result<SplitResult> {
    check_fraction("holdout_fraction", holdout_fraction, false)?;
    let by_class = ds.class_positions();
    let mut eval_positions = Vec::new();
    for (c, positions) in by_class.iter().enumerate() {
        let want = (holdout_fraction * positions.len() as f64).round() as usize;
        if want >= positions.len() && !positions.is_empty() {
            return Err(Error::ClassTooSmall {
                class: if c == 0 { "benign" } else { "malicious" },
                available: positions.len(),
                needed: want + 1,
            });
        }
        eval_positions.extend(draw_without_replacement(positions, want, &seed.child(c as u64)));
    }
    let eval_set: HashSet<usize> = eval_positions.iter().copied().collect();
    let train_positions: Vec<usize> = (0..ds.len()).filter(|p| !eval_set.contains(p)).collect();
    Ok(SplitResult {
        train: ds.select_positions(&train_positions),
        eval: ds.select_positions(&eval_positions),
        seed: seed.clone(),
    })
}

/// Balanced subsample: `floor(fraction * |train| / 2)` samples of each
/// class, drawn uniformly without replacement. Deterministic in `seed`.
pub fn sample_balanced_subset(train: &Dataset, fraction: f64, seed: &Seed) -> Result<Dataset> {
    check_fraction("fraction", fraction, true)?;
    let per_class = ((fraction * train.len() as f64) / 2.0).floor() as usize;
    let by_class = train.class_positions();
    let mut positions = Vec::with_capacity(per_class * 2);
    for (c, pool) in by_class.iter().enumerate() {
        if pool.len() < per_class {
            return Err(Error::ClassTooSmall {
                class: if c == 0 { "benign" } else { "malicious" },
                available: pool.len(),
                needed: per_class,
            });
        }
        positions.extend(draw_without_replacement(pool, per_class, &seed.child(c as u64)));
    }
    Ok(train.select_positions(&positions))
}

/// Invert the labels of `floor(ratio_c * count_c)` samples per class,
/// chosen uniformly without replacement. Features are untouched; the audit
/// lists exactly the flipped ids. Deterministic in `seed`.
pub fn flip_labels(set: &Dataset, spec: &FlipSpec, seed: &Seed) -> Result<(Dataset, FlipAudit)> {
    spec.validate()?;
    let by_class = set.class_positions();
    let ratios = [spec.benign_ratio, spec.malicious_ratio];
    let mut flipped_ids = Vec::new();
    let mut per_class_counts = [0usize; 2];
    for (c, pool) in by_class.iter().enumerate() {
        let k = flip_count(ratios[c], pool.len());
        per_class_counts[c] = k;
        flipped_ids.extend(
            draw_without_replacement(pool, k, &seed.child(c as u64))
                .into_iter()
                .map(|p| set.samples[p].id),
        );
    }
    flipped_ids.sort_unstable();
    let audit = FlipAudit {
        flipped_ids,
        per_class_counts,
    };
    let flipped = set.flip_by_ids(&audit.id_set());
    Ok((flipped, audit))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_dataset(n_per_class: usize) -> Dataset {
        let mut samples = Vec::new();
        for i in 0..n_per_class * 2 {
            let label = if i % 2 == 0 { Label::Benign } else { Label::Malicious };
            samples.push(Sample {
                id: i as u32,
                features: vec![i as f64, (i * i) as f64 % 7.0],
                label,
            });
        }
        Dataset::new(samples, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn dataset_counts_and_invariants() {
        let ds = tiny_dataset(2);
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.class_counts(), [2, 2]);
        assert_eq!(ds.n_features(), 2);
    }

    #[test]
    fn dataset_rejects_ragged_and_nonfinite() {
        let samples = vec![
            Sample { id: 0, features: vec![1.0], label: Label::Benign },
            Sample { id: 1, features: vec![1.0, 2.0], label: Label::Benign },
        ];
        let err = Dataset::new(samples, vec!["a".into()]).unwrap_err();
        assert!(matches!(err, Error::RaggedRow { row: 1, .. }));

        let samples = vec![Sample { id: 0, features: vec![f64::NAN], label: Label::Benign }];
        let err = Dataset::new(samples, vec!["a".into()]).unwrap_err();
        assert!(matches!(err, Error::NonNumericFeature { row: 0, .. }));
    }

    #[test]
    fn split_holdout_small_enumeration() {
        // 10-sample balanced set, fraction 0.2 -> eval 2 (1 per class), train 8.
        let ds = tiny_dataset(5);
        let seed = Seed::new(13);
        let split = split_holdout(&ds, 0.2, &seed).unwrap();
        assert_eq!(split.eval.len(), 2);
        assert_eq!(split.eval.class_counts(), [1, 1]);
        assert_eq!(split.train.len(), 8);

        // Partition: disjoint by id, union = everything.
        let eval_ids: HashSet<u32> = split.eval.ids().collect();
        let train_ids: HashSet<u32> = split.train.ids().collect();
        assert!(eval_ids.is_disjoint(&train_ids));
        assert_eq!(eval_ids.len() + train_ids.len(), ds.len());
    }

    #[test]
    fn split_holdout_deterministic() {
        let ds = tiny_dataset(50);
        let seed = Seed::new(99);
        let a = split_holdout(&ds, 0.2, &seed).unwrap();
        let b = split_holdout(&ds, 0.2, &seed).unwrap();
        assert_eq!(a.eval, b.eval);
        assert_eq!(a.train, b.train);
    }

    #[test]
    fn split_holdout_fraction_range() {
        let ds = tiny_dataset(5);
        for bad in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(split_holdout(&ds, bad, &Seed::new(1)).is_err());
        }
    }

    #[test]
    fn balanced_subset_floor_arithmetic() {
        let ds = tiny_dataset(4000); // |train| = 8000
        let sub = sample_balanced_subset(&ds, 0.01, &Seed::new(7)).unwrap();
        assert_eq!(sub.len(), 80);
        assert_eq!(sub.class_counts(), [40, 40]);

        let sub = sample_balanced_subset(&ds, 0.12, &Seed::new(7)).unwrap();
        assert_eq!(sub.len(), 960);
        assert_eq!(sub.class_counts(), [480, 480]);
    }

    #[test]
    fn balanced_subset_full_fraction_is_identity() {
        let ds = tiny_dataset(20);
        let sub = sample_balanced_subset(&ds, 1.0, &Seed::new(3)).unwrap();
        let a: HashSet<u32> = sub.ids().collect();
        let b: HashSet<u32> = ds.ids().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_masters_draw_distinct_subsets() {
        let ds = tiny_dataset(50); // 100 samples
        let a = sample_balanced_subset(&ds, 0.2, &derive_seed(0, &[1, 2])).unwrap();
        let b = sample_balanced_subset(&ds, 0.2, &derive_seed(1, &[1, 2])).unwrap();
        let ia: HashSet<u32> = a.ids().collect();
        let ib: HashSet<u32> = b.ids().collect();
        assert_ne!(ia, ib);
    }

    #[test]
    fn flip_exact_counts_and_audit_replay() {
        // 10-sample set (5/5), spec (mal 0.2, ben 0.4) -> 1 malicious + 2 benign.
        let ds = tiny_dataset(5);
        let spec = FlipSpec::new(0.2, 0.4).unwrap();
        let (out, audit) = flip_labels(&ds, &spec, &Seed::new(21)).unwrap();
        assert_eq!(audit.per_class_counts, [2, 1]); // benign first
        assert_eq!(audit.flipped_ids.len(), 3);

        // Features untouched, flipped ids carry the opposite label.
        let idset = audit.id_set();
        for (orig, new) in ds.samples().iter().zip(out.samples()) {
            assert_eq!(orig.features, new.features);
            if idset.contains(&orig.id) {
                assert_eq!(new.label, orig.label.flipped());
            } else {
                assert_eq!(new.label, orig.label);
            }
        }

        // Involution: replaying the audit restores the original labels.
        let restored = out.flip_by_ids(&idset);
        assert_eq!(restored, ds);
    }

    #[test]
    fn flip_clean_spec_is_identity() {
        let ds = tiny_dataset(10);
        let (out, audit) = flip_labels(&ds, &FlipSpec::clean(), &Seed::new(2)).unwrap();
        assert_eq!(out, ds);
        assert!(audit.flipped_ids.is_empty());
        assert_eq!(audit.per_class_counts, [0, 0]);
    }

    #[test]
    fn flip_table_convention() {
        let ds = tiny_dataset(4000);
        let spec = FlipSpec::new(0.20, 0.20).unwrap();
        let (_, audit) = flip_labels(&ds, &spec, &Seed::new(5)).unwrap();
        assert_eq!(audit.per_class_counts, [800, 800]);
        assert_eq!(spec.nominal_poison_pct(), 40);
        assert!((spec.actual_flip_fraction(&ds) - 0.2).abs() < 1e-12);

        assert_eq!(FlipSpec::new(0.10, 0.20).unwrap().nominal_poison_pct(), 30);
        assert_eq!(FlipSpec::clean().nominal_poison_pct(), 0);
    }

    #[test]
    fn flip_spec_range_checks() {
        assert!(FlipSpec::new(-0.1, 0.0).is_err());
        assert!(FlipSpec::new(0.0, 1.1).is_err());
        assert!(FlipSpec::new(f64::NAN, 0.0).is_err());
    }
}
