//! Pool-based active learning with uncertainty sampling.
//!
//! The simulation keeps three pools: labeled (L), unlabeled (U, ground
//! truth hidden from ranking but known to the simulated oracle), and a
//! fixed evaluation set (E). A campaign spends a labeling budget over a
//! number of iterations: the first batch is drawn at random (class
//! balanced), every later batch takes the samples the current model is
//! least sure about, labeled with their ground truth. The model is
//! retrained from scratch on L after every batch and measured on E.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Seed};
use crate::error::{Error, Result};
use crate::forest::{train_forest, Forest, ForestConfig};
use crate::metrics::{compute_metrics, confusion, MetricsRecord};

/// The three pools of a campaign, before any labeling has happened.
#[derive(Debug, Clone)]
pub struct PoolState {
    labeled: Dataset,
    unlabeled: Dataset,
    eval: Dataset,
}

impl PoolState {
    /// Fresh state: everything unlabeled, `eval` held out. Fails if `eval`
    /// shares ids with the pool or the feature widths differ.
    pub fn fresh(pool: Dataset, eval: Dataset) -> Result<PoolState> {
        if pool.n_features() != eval.n_features() {
            return Err(Error::DimensionMismatch {
                expected: pool.n_features(),
                found: eval.n_features(),
            });
        }
        let pool_ids: HashSet<u32> = pool.ids().collect();
        if eval.ids().any(|id| pool_ids.contains(&id)) {
            return Err(Error::Config {
                path: Default::default(),
                message: "eval set shares sample ids with the training pool".into(),
            });
        }
        let labeled = Dataset::new(Vec::new(), pool.feature_names().to_vec())?;
        Ok(PoolState {
            labeled,
            unlabeled: pool,
            eval,
        })
    }

    pub fn labeled(&self) -> &Dataset {
        &self.labeled
    }

    pub fn unlabeled(&self) -> &Dataset {
        &self.unlabeled
    }

    pub fn eval(&self) -> &Dataset {
        &self.eval
    }
}

/// Margin from an even vote: `|p - 0.5|`. Lower means more uncertain;
/// rankings sort ascending.
pub fn uncertainty(p_malicious: f64) -> f64 {
    (p_malicious - 0.5).abs()
}

/// Unlabeled ids ordered most-uncertain first (ascending score, ties by
/// ascending id).
pub fn rank_unlabeled(model: &Forest, pool: &PoolState) -> Result<Vec<u32>> {
    rank_ids(model, pool.unlabeled())
}

fn rank_ids(model: &Forest, unlabeled: &Dataset) -> Result<Vec<u32>> {
    if unlabeled.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut scored: Vec<(f64, u32)> = unlabeled
        .samples()
        .iter()
        .map(|s| Ok((uncertainty(model.predict_proba(&s.features)?), s.id)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().map(|(_, id)| id).collect())
}

/// First `k` ids of a ranking.
pub fn select_batch(ranking: &[u32], k: usize) -> Result<Vec<u32>> {
    if k > ranking.len() {
        return Err(Error::BatchExceedsPool {
            requested: k,
            available: ranking.len(),
        });
    }
    Ok(ranking[..k].to_vec())
}

/// A labeling budget spread over a fixed number of iterations.
///
/// Every batch is `total_budget / iterations`, with the remainder folded
/// into the final batch so the budget is spent exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSchedule {
    total_budget: usize,
    iterations: usize,
    batch_sizes: Vec<usize>,
}

impl CampaignSchedule {
    pub fn new(total_budget: usize, iterations: usize) -> Result<CampaignSchedule> {
        if iterations < 1 {
            return Err(Error::OutOfRange {
                what: "iterations",
                range: "[1, ..)",
                value: iterations as f64,
            });
        }
        if total_budget < iterations {
            return Err(Error::OutOfRange {
                what: "total_budget",
                range: ">= iterations",
                value: total_budget as f64,
            });
        }
        let base = total_budget / iterations;
        let mut batch_sizes = vec![base; iterations];
        *batch_sizes.last_mut().expect("iterations >= 1") += total_budget - base * iterations;
        Ok(CampaignSchedule {
            total_budget,
            iterations,
            batch_sizes,
        })
    }

    pub fn total_budget(&self) -> usize {
        self.total_budget
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn batch_sizes(&self) -> &[usize] {
        &self.batch_sizes
    }
}

/// One campaign iteration: what was added, and how the retrained model
/// scored on the eval set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub cumulative_labeled: usize,
    pub metrics: MetricsRecord,
    pub selected_ids: Vec<u32>,
}

/// Full per-iteration history of one campaign.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignTrace {
    pub iterations: Vec<IterationRecord>,
}

impl CampaignTrace {
    /// (cumulative labels, accuracy) points, the shape plateau detection
    /// consumes.
    pub fn accuracy_curve(&self) -> Vec<(usize, f64)> {
        self.iterations
            .iter()
            .map(|r| (r.cumulative_labeled, r.metrics.accuracy))
            .collect()
    }
}

// Stream indices under the campaign seed.
const DRAW_BENIGN: u64 = 0;
const DRAW_MALICIOUS: u64 = 1;
const ITER_FOREST: u64 = 2;

/// Run one uncertainty-sampling campaign.
///
/// The first batch is a class-balanced uniform draw from U (the benign
/// class receives the extra sample when a batch is odd). Each later batch
/// takes the most uncertain remaining samples under the model trained on
/// the current L, labels them with their ground truth, and retrains. The
/// model is evaluated on E after every iteration, the initial random one
/// included. Per-iteration randomness derives from `(seed, iteration)`;
/// the seed inside `cfg` is ignored.
pub fn run_campaign(
    pool: &PoolState,
    schedule: &CampaignSchedule,
    cfg: &ForestConfig,
    seed: &Seed,
) -> Result<CampaignTrace> {
    if !pool.labeled().is_empty() {
        return Err(Error::Config {
            path: Default::default(),
            message: "campaigns start with an empty labeled pool".into(),
        });
    }
    let budget = schedule.total_budget();
    let pool_size = pool.unlabeled().len();
    if budget > pool_size {
        return Err(Error::BudgetExceedsPool {
            budget,
            pool: pool_size,
        });
    }
    let truth: Vec<_> = pool.eval().samples().iter().map(|s| s.label).collect();

    let train = pool.unlabeled();
    let mut labeled_positions: Vec<usize> = Vec::with_capacity(budget);
    let mut unlabeled_positions: Vec<usize> = (0..train.len()).collect();
    let mut records = Vec::with_capacity(schedule.iterations());
    let mut model: Option<Forest> = None;

    for (i, &batch) in schedule.batch_sizes().iter().enumerate() {
        let iter_seed = seed.child(i as u64);
        let selected_positions = if i == 0 {
            draw_balanced(train, &unlabeled_positions, batch, &iter_seed)
        } else {
            let current = model.as_ref().expect("model trained in iteration > 0");
            rank_positions(current, train, &unlabeled_positions, batch)?
        };
        debug_assert_eq!(selected_positions.len(), batch);

        let selected_set: HashSet<usize> = selected_positions.iter().copied().collect();
        unlabeled_positions.retain(|p| !selected_set.contains(p));
        labeled_positions.extend(&selected_positions);

        // Oracle step: labels come from ground truth by construction,
        // because positions index the original pool.
        let labeled_ds = train.select_positions(&labeled_positions);
        let forest = train_forest(&labeled_ds, &cfg.params().with_seed(iter_seed.child(ITER_FOREST)))?;

        let preds = forest.predict_dataset(pool.eval())?;
        let metrics = compute_metrics(&confusion(&preds, &truth)?)?;
        let mut selected_ids: Vec<u32> = selected_positions
            .iter()
            .map(|&p| train.samples()[p].id)
            .collect();
        selected_ids.sort_unstable();
        records.push(IterationRecord {
            cumulative_labeled: labeled_positions.len(),
            metrics,
            selected_ids,
        });
        model = Some(forest);
    }
    Ok(CampaignTrace { iterations: records })
}

/// Class-balanced uniform draw of `batch` positions. If one class runs
/// short the deficit is drawn from the other, so the requested count is
/// always met (the caller has checked the budget fits the pool).
fn draw_balanced(train: &Dataset, available: &[usize], batch: usize, seed: &Seed) -> Vec<usize> {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for &p in available {
        by_class[train.samples()[p].label.index()].push(p);
    }
    let mut want = [batch - batch / 2, batch / 2]; // benign first, gets the odd extra
    // Rebalance deficits both ways.
    for c in 0..2 {
        let short = want[c].saturating_sub(by_class[c].len());
        if short > 0 {
            want[c] -= short;
            want[1 - c] += short;
        }
    }
    let mut out = Vec::with_capacity(batch);
    for (c, stream) in [(0, DRAW_BENIGN), (1, DRAW_MALICIOUS)] {
        let mut rng = seed.child(stream).rng();
        let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, by_class[c].len(), want[c])
            .into_iter()
            .map(|i| by_class[c][i])
            .collect();
        picked.sort_unstable();
        out.extend(picked);
    }
    out
}

/// Most-uncertain `k` positions under `model`, ties by ascending id.
fn rank_positions(
    model: &Forest,
    train: &Dataset,
    available: &[usize],
    k: usize,
) -> Result<Vec<usize>> {
    if available.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k > available.len() {
        return Err(Error::BatchExceedsPool {
            requested: k,
            available: available.len(),
        });
    }
    let mut scored: Vec<(f64, u32, usize)> = available
        .iter()
        .map(|&p| {
            let s = &train.samples()[p];
            Ok((uncertainty(model.predict_proba(&s.features)?), s.id, p))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(k).map(|(_, _, p)| p).collect())
}
