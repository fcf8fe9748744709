//! Rank statistics: average ranks, Friedman, Wilcoxon signed-rank, Holm,
//! and Pearson correlation.

use std::collections::HashMap;

use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use crate::error::{BenchError, Result};

/// Upper bound on the number of distinct rank-sum states the exact
/// Friedman recursion may track before giving up.
const FRIEDMAN_EXACT_MAX_STATES: usize = 200_000;

/// Largest number of nonzero pairs for the exact Wilcoxon null.
pub const WILCOXON_EXACT_MAX_N: usize = 25;

/// Fewer nonzero pairs than this are reported as not significant.
pub const WILCOXON_MIN_PAIRS: usize = 5;

/// Running minimum.
pub fn best_so_far(y: &[f64]) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Err(BenchError::Invalid("best_so_far of an empty series".into()));
    }
    let mut best = f64::INFINITY;
    Ok(y.iter()
        .map(|v| {
            best = best.min(*v);
            best
        })
        .collect())
}

/// 1-based ranks, ascending, with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df / 2.0, x / 2.0).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub df: usize,
    /// Chi-square approximation.
    pub p_value: f64,
    /// Exact permutation p-value when the enumeration is small enough.
    pub p_exact: Option<f64>,
    pub n_blocks: usize,
    pub n_treatments: usize,
}

impl FriedmanResult {
    /// The exact p-value when available, else the approximation.
    pub fn p(&self) -> f64 {
        self.p_exact.unwrap_or(self.p_value)
    }
}

/// Tie-corrected statistic from within-block ranks:
/// `(k-1) Σ_j (R_j - N(k+1)/2)² / (Σ r² - N k (k+1)²/4)`.
fn friedman_statistic(ranks: &[Vec<f64>]) -> f64 {
    let n = ranks.len() as f64;
    let k = ranks[0].len();
    let kf = k as f64;
    let sums: Vec<f64> = (0..k).map(|j| ranks.iter().map(|r| r[j]).sum()).collect();
    let centre = n * (kf + 1.0) / 2.0;
    let num: f64 = sums.iter().map(|s| (s - centre).powi(2)).sum::<f64>() * (kf - 1.0);
    let sq: f64 = ranks.iter().flatten().map(|r| r * r).sum();
    let den = sq - n * kf * (kf + 1.0).powi(2) / 4.0;
    if den <= 1e-12 * sq.max(1.0) {
        return 0.0;
    }
    num / den
}

fn permutations(items: &[f64]) -> Vec<Vec<f64>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Exact null distribution: every within-block permutation of the observed
/// ranks is equally likely. Rank sums are tracked in half units.
fn friedman_exact(ranks: &[Vec<f64>], observed: f64) -> Option<f64> {
    let k = ranks[0].len();
    if k > 6 {
        return None;
    }
    let mut states: HashMap<Vec<i64>, f64> = HashMap::new();
    states.insert(vec![0; k], 1.0);
    for block in ranks {
        let halves: Vec<f64> = block.iter().map(|r| r * 2.0).collect();
        let perms = permutations(&halves);
        let mut next: HashMap<Vec<i64>, f64> = HashMap::new();
        for (s, w) in &states {
            for p in &perms {
                let key: Vec<i64> = s.iter().zip(p).map(|(a, b)| a + *b as i64).collect();
                *next.entry(key).or_insert(0.0) += w;
            }
        }
        if next.len() > FRIEDMAN_EXACT_MAX_STATES {
            return None;
        }
        states = next;
    }
    // The denominator of the statistic is permutation-invariant, so the
    // statistic is a function of the rank-sum vector alone.
    let total: f64 = states.values().sum();
    let n = ranks.len() as f64;
    let kf = k as f64;
    let sq: f64 = ranks.iter().flatten().map(|r| r * r).sum();
    let den = sq - n * kf * (kf + 1.0).powi(2) / 4.0;
    if den <= 1e-12 * sq.max(1.0) {
        return Some(1.0);
    }
    let centre = n * (kf + 1.0) / 2.0;
    let tol = 1e-9 * observed.abs().max(1.0);
    let tail: f64 = states
        .iter()
        .filter(|(s, _)| {
            let q = s.iter().map(|h| (*h as f64 / 2.0 - centre).powi(2)).sum::<f64>() * (kf - 1.0)
                / den;
            q >= observed - tol
        })
        .map(|(_, w)| w)
        .sum();
    Some((tail / total).min(1.0))
}

/// Friedman test on a blocks × treatments matrix of raw values (lower is
/// better); values are ranked within each block.
pub fn friedman_test(values: &[Vec<f64>]) -> Result<FriedmanResult> {
    let n = values.len();
    let k = values.first().map_or(0, |r| r.len());
    if n < 2 || k < 2 {
        return Err(BenchError::Invalid(format!(
            "Friedman test needs >= 2 blocks and >= 2 treatments (got {n} x {k})"
        )));
    }
    if values.iter().any(|r| r.len() != k) {
        return Err(BenchError::Invalid("ragged Friedman matrix".into()));
    }
    if values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(BenchError::Invalid("non-finite value in Friedman matrix".into()));
    }
    let ranks: Vec<Vec<f64>> = values.iter().map(|r| average_ranks(r)).collect();
    let statistic = friedman_statistic(&ranks);
    let df = k - 1;
    Ok(FriedmanResult {
        statistic,
        df,
        p_value: chi2_sf(statistic, df as f64),
        p_exact: friedman_exact(&ranks, statistic),
        n_blocks: n,
        n_treatments: k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of positive differences `x - y`.
    pub w_plus: f64,
    pub n_nonzero: usize,
    pub p_value: f64,
    pub exact: bool,
    /// Set when fewer than [`WILCOXON_MIN_PAIRS`] differences are nonzero.
    pub too_few: bool,
}

/// Two-sided Wilcoxon signed-rank test of paired samples. Zero differences
/// are dropped; tied magnitudes share their average rank.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(BenchError::Invalid(format!(
            "paired samples differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|v| *v != 0.0).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(BenchError::Invalid("non-finite paired difference".into()));
    }
    let n = d.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            w_plus: 0.0,
            n_nonzero: 0,
            p_value: 1.0,
            exact: true,
            too_few: true,
        });
    }
    let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = average_ranks(&mags);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let (p_value, exact) = if n <= WILCOXON_EXACT_MAX_N {
        (wilcoxon_exact_p(&ranks, w_plus), true)
    } else {
        (wilcoxon_normal_p(&ranks, w_plus), false)
    };
    Ok(WilcoxonResult {
        w_plus,
        n_nonzero: n,
        p_value,
        exact,
        too_few: n < WILCOXON_MIN_PAIRS,
    })
}

/// Exact null: each rank carries a positive sign with probability ½.
/// Doubled ranks keep the sums integral under ties.
fn wilcoxon_exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; max + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total = 2f64.powi(ranks.len() as i32);
    let w = (w_plus * 2.0).round() as usize;
    let lower: f64 = counts[..=w].iter().sum::<f64>() / total;
    let upper: f64 = counts[w..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

fn wilcoxon_normal_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    // Tie correction: Σ r² / 4 equals the untied variance minus Σ(t³-t)/48.
    let var: f64 = ranks.iter().map(|r| r * r).sum::<f64>() / 4.0;
    if var <= 0.0 {
        return 1.0;
    }
    let diff = w_plus - mean;
    let corrected = (diff.abs() - 0.5).max(0.0);
    let z = corrected / var.sqrt();
    (2.0 * mixbo::acquisitions::normal_cdf(-z)).min(1.0)
}

/// Holm step-down adjusted p-values, in the input order.
pub fn holm(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut adjusted = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (i, &idx) in order.iter().enumerate() {
        let a = ((m - i) as f64 * p[idx]).min(1.0);
        running = running.max(a);
        adjusted[idx] = running;
    }
    adjusted
}

/// Pearson correlation, two-pass (means first).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(BenchError::Invalid(
            "Pearson correlation needs two equal-length series of length >= 2".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(BenchError::Invalid("Pearson correlation of a constant series".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_so_far_examples() {
        assert_eq!(best_so_far(&[3.0, 1.0, 2.0]).unwrap(), vec![3.0, 1.0, 1.0]);
        assert_eq!(best_so_far(&[2.0; 3]).unwrap(), vec![2.0; 3]);
        assert_eq!(best_so_far(&[3.0, 2.0, 1.0]).unwrap(), vec![3.0, 2.0, 1.0]);
        assert!(best_so_far(&[]).is_err());
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[1.0, 1.0]), vec![1.5, 1.5]);
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0, 1.0]), vec![4.0, 1.5, 3.0, 1.5]);
    }

    #[test]
    fn degenerate_inputs() {
        let f = friedman_test(&[vec![1.0; 3], vec![2.0; 3]]).unwrap();
        assert_eq!(f.statistic, 0.0);
        assert_eq!(f.p_value, 1.0);
        assert_eq!(f.p_exact, Some(1.0));
        let w = wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(w.p_value, 1.0);
        assert!(w.too_few);
    }

    #[test]
    fn holm_example() {
        let adj = holm(&[0.01, 0.04, 0.03]);
        assert!((adj[0] - 0.03).abs() < 1e-15);
        assert!((adj[2] - 0.06).abs() < 1e-15);
        assert!((adj[1] - 0.06).abs() < 1e-15);
    }
}
