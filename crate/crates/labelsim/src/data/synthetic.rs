//! Built-in synthetic corpora.
//!
//! [`reference_corpus`] produces the bundled benchmark dataset: 10,000
//! samples, balanced, 48 numeric features, generated deterministically from
//! a fixed seed. It mirrors the contract of the public phishing-webpage
//! corpus the experiment defaults were designed around (same size, balance,
//! and a comparable random-forest learnability profile), so the full
//! experiment pipelines can run out of the box where that corpus is not
//! present. Point the CLI at a CSV file to use real data instead.
//!
//! The generator mixes three kinds of mass:
//! - *plain* samples carry class signal in individually informative
//!   features (a forest picks these up from a handful of labels);
//! - *paired* samples carry signal only in feature-pair interactions,
//!   which need depth and sample count to learn — they keep the learning
//!   curve rising and give uncertainty sampling something to find;
//! - *contradictory* samples are drawn from the opposite class's
//!   distribution, capping attainable accuracy like real label ambiguity.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};

use super::{Dataset, Label, Sample, Seed};

pub const N_FEATURES: usize = 48;

// Feature layout.
const BERNOULLI: std::ops::Range<usize> = 0..3;
const STRONG: std::ops::Range<usize> = 3..6;
const MEDIUM: std::ops::Range<usize> = 6..18;
const WEAK: std::ops::Range<usize> = 18..28;
const PAIRED: std::ops::Range<usize> = 28..36; // four (a, b) interaction pairs
const COUNTS: std::ops::Range<usize> = 42..45;
const UNIFORM: std::ops::Range<usize> = 45..48;

// Tier mix and signal strengths. Calibrated against the experiment
// tolerances in tests/acceptance.rs; touch with care.
const PLAIN_FRACTION: f64 = 0.86;
const PAIRED_FRACTION: f64 = 0.125;
const BERNOULLI_HIT: f64 = 0.78;
const STRONG_SHIFT: f64 = 1.0;
const MEDIUM_SHIFT: f64 = 0.5;
const WEAK_SHIFT: f64 = 0.2;
const PAIR_SPREAD: f64 = 0.5;

/// The bundled 10,000-sample balanced benchmark corpus.
pub fn reference_corpus() -> Dataset {
    synthetic_corpus(10_000, 20240 + 1)
}

/// Balanced synthetic corpus with `n_samples` rows (even labels benign,
/// odd malicious) and 48 features, deterministic in `master_seed`.
pub fn synthetic_corpus(n_samples: usize, master_seed: u64) -> Dataset {
    let seed = Seed::new(master_seed);
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let label = if i % 2 == 0 { Label::Benign } else { Label::Malicious };
        let mut rng = seed.child(i as u64).rng();
        samples.push(Sample {
            id: i as u32,
            features: gen_features(label, &mut rng),
            label,
        });
    }
    let feature_names = (0..N_FEATURES).map(|i| format!("f{i:02}")).collect();
    Dataset::new(samples, feature_names).expect("generated corpus is well-formed")
}

fn gen_features(label: Label, rng: &mut impl Rng) -> Vec<f64> {
    let tier: f64 = rng.gen();
    let (signed, tiered) = if tier < PLAIN_FRACTION {
        (label, Tier::Plain)
    } else if tier < PLAIN_FRACTION + PAIRED_FRACTION {
        (label, Tier::Paired)
    } else {
        // Contradictory: feature profile of the opposite class.
        (label.flipped(), Tier::Plain)
    };
    let s = if signed.is_malicious() { 1.0 } else { -1.0 };

    let mut f = vec![0.0; N_FEATURES];
    let normal = |rng: &mut dyn rand::RngCore| -> f64 { StandardNormal.sample(rng) };

    for i in BERNOULLI {
        let p = match tiered {
            Tier::Plain => {
                if s > 0.0 {
                    BERNOULLI_HIT
                } else {
                    1.0 - BERNOULLI_HIT
                }
            }
            Tier::Paired => 0.5,
        };
        f[i] = if rng.gen_bool(p) { 1.0 } else { 0.0 };
    }
    for (range, shift) in [
        (STRONG, STRONG_SHIFT),
        (MEDIUM, MEDIUM_SHIFT),
        (WEAK, WEAK_SHIFT),
    ] {
        let mu = match tiered {
            Tier::Plain => s * shift,
            Tier::Paired => 0.0,
        };
        for i in range {
            f[i] = mu + normal(rng);
        }
    }
    let mut i = PAIRED.start;
    while i < PAIRED.end {
        match tiered {
            Tier::Plain => {
                f[i] = normal(rng);
                f[i + 1] = normal(rng);
            }
            Tier::Paired => {
                // Interaction signal: the product sign of the pair encodes
                // the class; neither half is informative alone.
                let flip = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                f[i] = flip + PAIR_SPREAD * normal(rng);
                f[i + 1] = s * flip + PAIR_SPREAD * normal(rng);
            }
        }
        i += 2;
    }
    for i in PAIRED.end..COUNTS.start {
        f[i] = normal(rng);
    }
    let counts = LogNormal::new(1.0, 0.7).expect("valid lognormal");
    for i in COUNTS {
        f[i] = counts.sample(rng).floor();
    }
    for i in UNIFORM {
        f[i] = rng.gen::<f64>();
    }
    f
}

#[derive(Clone, Copy)]
enum Tier {
    Plain,
    Paired,
}

/// Two Gaussian blobs at `±separation/2` on every feature, alternating
/// labels. Large separations give a cleanly separable toy set.
pub fn toy_clusters(n_samples: usize, n_features: usize, separation: f64, master_seed: u64) -> Dataset {
    let seed = Seed::new(master_seed);
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let label = if i % 2 == 0 { Label::Benign } else { Label::Malicious };
        let s = if label.is_malicious() { 1.0 } else { -1.0 };
        let mut rng = seed.child(i as u64).rng();
        let features = (0..n_features)
            .map(|_| s * separation / 2.0 + StandardNormal.sample(&mut rng))
            .collect();
        samples.push(Sample {
            id: i as u32,
            features,
            label,
        });
    }
    let feature_names = (0..n_features).map(|i| format!("f{i:02}")).collect();
    Dataset::new(samples, feature_names).expect("generated toy set is well-formed")
}
