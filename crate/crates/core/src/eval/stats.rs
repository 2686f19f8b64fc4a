//! Paired significance testing.
//!
//! Two-sided Wilcoxon signed-rank over per-subject accuracies: exact null
//! distribution (all sign assignments) up to 25 nonzero differences, normal
//! approximation with tie and continuity corrections beyond. Accuracy
//! distributions over subjects are bounded and small-n, which is exactly
//! where the rank test is preferable to a paired t-test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Significance level for the `significant` verdict.
pub const ALPHA: f64 = 0.05;

/// Largest number of nonzero differences handled with the exact
/// distribution.
pub const EXACT_LIMIT: usize = 25;

/// Outcome of a paired comparison of two per-subject accuracy vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `min(W+, W-)`: the smaller signed-rank sum.
    pub statistic: f64,
    pub p_value: f64,
    /// `p_value < 0.05`.
    pub significant: bool,
    /// Nonzero differences actually ranked.
    pub n_effective: usize,
    pub method: String,
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped (standard practice); ties among the
/// absolute differences receive midranks. When every difference is zero the
/// result is the degenerate `p = 1.0`.
pub fn compare_paired(a: &[f64], b: &[f64]) -> Result<ComparisonResult> {
    if a.len() != b.len() {
        return Err(Error::Stats(format!("paired vectors differ in length: {} vs {}", a.len(), b.len())));
    }
    if a.len() < 6 {
        return Err(Error::Stats(format!(
            "paired comparison needs at least 6 subjects, got {}",
            a.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Stats("non-finite accuracy value".into()));
    }

    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(ComparisonResult {
            a: a.to_vec(),
            b: b.to_vec(),
            statistic: 0.0,
            p_value: 1.0,
            significant: false,
            n_effective: 0,
            method: "wilcoxon-signed-rank-degenerate".into(),
        });
    }

    // Midranks of |d|, doubled so ties stay integral.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut doubled_ranks = vec![0u64; n];
    let mut tie_groups: Vec<u64> = Vec::new();
    let mut at = 0;
    while at < n {
        let mut end = at + 1;
        while end < n && diffs[order[end]].abs() == diffs[order[at]].abs() {
            end += 1;
        }
        // Ranks at+1 ..= end, averaged, doubled: (at+1 + end).
        let doubled = (at + 1 + end) as u64;
        for &idx in &order[at..end] {
            doubled_ranks[idx] = doubled;
        }
        tie_groups.push((end - at) as u64);
        at = end;
    }

    let w_plus_doubled: u64 = diffs
        .iter()
        .zip(&doubled_ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, &r)| r)
        .sum();
    let total_doubled: u64 = doubled_ranks.iter().sum();
    let w_minus_doubled = total_doubled - w_plus_doubled;
    let statistic = w_plus_doubled.min(w_minus_doubled) as f64 / 2.0;

    let (p_value, method) = if n <= EXACT_LIMIT {
        (exact_p(&doubled_ranks, w_plus_doubled), "wilcoxon-signed-rank-exact".to_string())
    } else {
        (
            normal_p(n, &tie_groups, w_plus_doubled as f64 / 2.0),
            "wilcoxon-signed-rank-normal".to_string(),
        )
    };
    let p_value = p_value.min(1.0);

    Ok(ComparisonResult {
        a: a.to_vec(),
        b: b.to_vec(),
        statistic,
        p_value,
        significant: p_value < ALPHA,
        n_effective: n,
        method,
    })
}

/// Exact two-sided p: enumerate the distribution of the doubled positive
/// rank sum over all 2^n sign assignments with a subset-sum table.
fn exact_p(doubled_ranks: &[u64], w_plus_doubled: u64) -> f64 {
    let total: u64 = doubled_ranks.iter().sum();
    // counts[s] = number of sign assignments whose positive set sums to s.
    let mut counts = vec![0.0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        reach += r;
        for s in (r..=reach).rev() {
            counts[s] += counts[s - r];
        }
    }
    let denom = 2f64.powi(doubled_ranks.len() as i32);
    let below: f64 = counts[..=w_plus_doubled as usize].iter().sum();
    let above: f64 = counts[w_plus_doubled as usize..].iter().sum();
    2.0 * (below.min(above)) / denom
}

/// Normal approximation with tie correction and a 0.5 continuity
/// correction.
fn normal_p(n: usize, tie_groups: &[u64], w_plus: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 =
        tie_groups.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    if variance <= 0.0 {
        return 1.0;
    }
    let centered = w_plus - mean;
    let corrected = centered - 0.5 * centered.signum();
    let z = corrected / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    2.0 * normal.cdf(-z.abs())
}
