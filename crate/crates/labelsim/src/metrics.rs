//! Confusion-matrix metrics, cross-trial aggregation, and Welch's t-test.
//!
//! Malicious is the positive class everywhere. Undefined ratios (division
//! by zero in precision/recall/F1) are reported as 0 with the
//! [`MetricsRecord::degenerate`] flag set, so aggregates stay total without
//! silently hiding degenerate classifiers.

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

/// Standard binary confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Count prediction outcomes against ground truth.
pub fn confusion(predictions: &[Label], truth: &[Label]) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            truth: truth.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyConfusion);
    }
    let mut cm = ConfusionMatrix {
        true_pos: 0,
        false_pos: 0,
        true_neg: 0,
        false_neg: 0,
    };
    for (&p, &t) in predictions.iter().zip(truth) {
        match (p.is_malicious(), t.is_malicious()) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_pos += 1,
            (false, false) => cm.true_neg += 1,
            (false, true) => cm.false_neg += 1,
        }
    }
    Ok(cm)
}

/// Point metrics for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fp_count: u64,
    pub fn_count: u64,
    /// True when any ratio had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

/// Derive point metrics from a confusion matrix.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsRecord> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyConfusion);
    }
    let mut degenerate = false;
    let mut ratio = |num: u64, den: u64| -> f64 {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = (cm.true_pos + cm.true_neg) as f64 / total as f64;
    let precision = ratio(cm.true_pos, cm.true_pos + cm.false_pos);
    let recall = ratio(cm.true_pos, cm.true_pos + cm.false_neg);
    let f1 = if precision + recall == 0.0 {
        degenerate = true;
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(MetricsRecord {
        accuracy,
        precision,
        recall,
        f1,
        fp_count: cm.false_pos,
        fn_count: cm.false_neg,
        degenerate,
    })
}

/// Mean / sample standard deviation / extrema for one metric across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub mean: f64,
    /// Sample (n-1) standard deviation; absent for a single trial.
    pub std: Option<f64>,
    pub min: f64,
    pub max: f64,
}

fn summarize(values: &[f64]) -> StatSummary {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n >= 2 {
        let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        Some((ss / (n - 1) as f64).sqrt())
    } else {
        None
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    StatSummary { mean, std, min, max }
}

/// Per-metric summaries across repeated trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub accuracy: StatSummary,
    pub precision: StatSummary,
    pub recall: StatSummary,
    pub f1: StatSummary,
    pub fp: StatSummary,
    pub fn_: StatSummary,
    pub trials: usize,
    /// Count of records that carried the degenerate flag.
    pub degenerate_trials: usize,
}

/// Aggregate trial records: arithmetic mean and sample standard deviation
/// per metric.
pub fn aggregate(records: &[MetricsRecord]) -> Result<AggregateStats> {
    if records.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let col = |f: fn(&MetricsRecord) -> f64| -> Vec<f64> { records.iter().map(f).collect() };
    Ok(AggregateStats {
        accuracy: summarize(&col(|r| r.accuracy)),
        precision: summarize(&col(|r| r.precision)),
        recall: summarize(&col(|r| r.recall)),
        f1: summarize(&col(|r| r.f1)),
        fp: summarize(&col(|r| r.fp_count as f64)),
        fn_: summarize(&col(|r| r.fn_count as f64)),
        trials: records.len(),
        degenerate_trials: records.iter().filter(|r| r.degenerate).count(),
    })
}

/// Welch's unequal-variance two-sample t-test, two-sided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub significant_at_0_05: bool,
}

/// Welch's t statistic with Welch–Satterthwaite degrees of freedom and a
/// two-sided p-value from the t distribution.
///
/// Convention for zero variance in both groups: equal means give `t = 0,
/// p = 1`; unequal means give an infinite statistic and `p = 0`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    for group in [a, b] {
        if group.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: group.len(),
            });
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_var(a, ma), sample_var(b, mb));
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        let equal = ma == mb;
        return Ok(TTestResult {
            t_statistic: if equal {
                0.0
            } else {
                f64::INFINITY * (ma - mb).signum()
            },
            degrees_of_freedom: na + nb - 2.0,
            p_value: if equal { 1.0 } else { 0.0 },
            significant_at_0_05: !equal,
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let p = student_t_two_sided_p(t, df);
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        significant_at_0_05: p < 0.05,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Two-sided p-value for a t statistic: `P(|T_df| >= |t|)`, computed as
/// `I_x(df/2, 1/2)` with `x = df / (df + t^2)` via the regularized
/// incomplete beta function. Accurate to about 1e-8.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    reg_incomplete_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Regularized incomplete beta `I_x(a, b)` by the Lentz continued
/// fraction, using the symmetry transform for fast convergence.
fn reg_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    // Prefactor x^a (1-x)^b / B(a, b), in log space.
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() / a) * beta_cf(a, b, x)
    } else {
        // Symmetry: I_x(a, b) = 1 - I_{1-x}(b, a), where the continued
        // fraction converges quickly.
        1.0 - (ln_front.exp() / b) * beta_cf(b, a, 1.0 - x)
    }
}

/// Modified Lentz evaluation of the continued fraction for the incomplete
/// beta function (Numerical Recipes `betacf`).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-14;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Lanczos (g = 7, n = 9) log-gamma; |error| < 1e-13 for positive reals.
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection for the left half-plane.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn confusion_enumerated() {
        use Label::{Benign as B, Malicious as M};
        let cm = confusion(&[M, B, M, B], &[M, M, B, B]).unwrap();
        assert_eq!(cm.true_pos, 1);
        assert_eq!(cm.false_neg, 1);
        assert_eq!(cm.false_pos, 1);
        assert_eq!(cm.true_neg, 1);
    }

    #[test]
    fn confusion_perfect_and_constant() {
        use Label::{Benign as B, Malicious as M};
        let truth: Vec<Label> = (0..2000).map(|i| if i < 1000 { M } else { B }).collect();
        let cm = confusion(&truth, &truth).unwrap();
        assert_eq!((cm.false_pos, cm.false_neg), (0, 0));

        let all_mal = vec![M; 2000];
        let cm = confusion(&all_mal, &truth).unwrap();
        assert_eq!((cm.true_pos, cm.false_pos), (1000, 1000));
    }

    #[test]
    fn confusion_length_mismatch() {
        use Label::Benign as B;
        assert!(confusion(&[B], &[B, B]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn metrics_formulas() {
        let cm = ConfusionMatrix { true_pos: 1000, true_neg: 1000, false_pos: 0, false_neg: 0 };
        let m = compute_metrics(&cm).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
        assert!(!m.degenerate);

        let cm = ConfusionMatrix { true_pos: 1, true_neg: 1, false_pos: 1, false_neg: 1 };
        let m = compute_metrics(&cm).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (0.5, 0.5, 0.5, 0.5));
    }

    #[test]
    fn metrics_degenerate_never_positive() {
        let cm = ConfusionMatrix { true_pos: 0, false_pos: 0, true_neg: 3, false_neg: 2 };
        let m = compute_metrics(&cm).unwrap();
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f1, 0.0);
        assert!(m.degenerate);
    }

    #[test]
    fn aggregate_hand_values() {
        let rec = |acc: f64| MetricsRecord {
            accuracy: acc,
            precision: acc,
            recall: acc,
            f1: acc,
            fp_count: 0,
            fn_count: 0,
            degenerate: false,
        };
        let stats = aggregate(&[rec(0.9), rec(1.0)]).unwrap();
        close(stats.accuracy.mean, 0.95, 1e-15);
        close(stats.accuracy.std.unwrap(), 0.07071067811865474, 1e-12);

        let single = aggregate(&[rec(0.7)]).unwrap();
        assert_eq!(single.accuracy.mean, 0.7);
        assert!(single.accuracy.std.is_none());

        let constant = aggregate(&vec![rec(0.8); 30]).unwrap();
        close(constant.accuracy.std.unwrap(), 0.0, 1e-15);
        assert_eq!(constant.trials, 30);
    }

    #[test]
    fn welch_textbook_example() {
        // Frozen against SciPy: t = -3.6742346142, df = 4, p = 0.0213116411.
        let r = welch_t_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        close(r.t_statistic, -3.6742346141747673, 1e-9);
        close(r.degrees_of_freedom, 4.0, 1e-9);
        close(r.p_value, 0.0213116411, 1e-6);
        assert!(r.significant_at_0_05);
    }

    #[test]
    fn welch_identical_groups() {
        let a = [1.0, 2.0, 3.0];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.t_statistic, 0.0);
        close(r.p_value, 1.0, 1e-12);
    }

    #[test]
    fn welch_zero_variance_conventions() {
        let r = welch_t_test(&[2.0, 2.0], &[2.0, 2.0]).unwrap();
        assert_eq!(r.p_value, 1.0);
        let r = welch_t_test(&[2.0, 2.0], &[3.0, 3.0]).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(r.t_statistic.is_infinite() && r.t_statistic < 0.0);
    }

    #[test]
    fn welch_needs_two_per_group() {
        assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
        assert!(welch_t_test(&[1.0, 2.0], &[]).is_err());
    }

    #[test]
    fn welch_symmetry_and_shift_invariance() {
        let a = [0.91, 0.93, 0.92, 0.95, 0.90];
        let b = [0.89, 0.88, 0.90, 0.87, 0.91];
        let ab = welch_t_test(&a, &b).unwrap();
        let ba = welch_t_test(&b, &a).unwrap();
        close(ab.t_statistic, -ba.t_statistic, 1e-12);
        close(ab.p_value, ba.p_value, 1e-12);

        let shift = 5.0;
        let a2: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let b2: Vec<f64> = b.iter().map(|x| x + shift).collect();
        let shifted = welch_t_test(&a2, &b2).unwrap();
        close(shifted.t_statistic, ab.t_statistic, 1e-9);
        close(shifted.p_value, ab.p_value, 1e-9);
    }

    #[test]
    fn p_value_grid_frozen_against_scipy() {
        // (t, df, two-sided p) triples computed independently.
        let cases = [
            (3.674234614174767, 4.0, 0.021311641128756727),
            (1.0, 1.0, 0.49999999999999956),
            (2.5, 10.0, 0.031446844236608776),
            (0.5, 30.0, 0.6207230048851273),
            (6.0, 2.0, 0.02667147321542477),
            (0.001, 5.0, 0.9992407867721976),
        ];
        for (t, df, want) in cases {
            close(student_t_two_sided_p(t, df), want, 1e-8);
            close(student_t_two_sided_p(-t, df), want, 1e-8);
        }
    }

    #[test]
    fn p_value_matches_statrs_on_grid() {
        use statrs::distribution::{ContinuousCDF, StudentsT};
        for df in [1.5, 2.0, 3.0, 7.0, 29.0, 58.0, 120.0] {
            for t in [0.0, 0.1, 0.7, 1.3, 2.2, 3.9, 8.0] {
                let dist = StudentsT::new(0.0, 1.0, df).unwrap();
                let want = 2.0 * (1.0 - dist.cdf(t.abs()));
                close(student_t_two_sided_p(t, df), want, 1e-8);
            }
        }
    }
}
