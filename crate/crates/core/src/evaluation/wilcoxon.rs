//! One-sided Wilcoxon signed-rank test.
//!
//! Zero differences are dropped and tied magnitudes receive average
//! ranks. Up to n = 20 the p-value is exact, by enumerating all 2^n
//! sign patterns; beyond that a normal approximation with continuity
//! and tie correction takes over.

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    /// Median of (a - b) is greater than zero.
    Greater,
    /// Median of (a - b) is less than zero.
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of the positive differences.
    pub w_plus: f64,
    /// Differences that survived the zero filter.
    pub n_used: usize,
    pub p: f64,
    pub exact: bool,
}

const EXACT_LIMIT: usize = 20;

/// Runs the test on paired observations `(a_i, b_i)`.
pub fn wilcoxon_signed_rank(
    pairs: &[(f64, f64)],
    alternative: Alternative,
) -> Result<WilcoxonResult, EvalError> {
    wilcoxon_signed_rank_with(pairs, alternative, None)
}

/// Like [`wilcoxon_signed_rank`] but with a forced method, for
/// comparing the exact and approximate branches.
pub fn wilcoxon_signed_rank_with(
    pairs: &[(f64, f64)],
    alternative: Alternative,
    force: Option<Method>,
) -> Result<WilcoxonResult, EvalError> {
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n < 5 {
        return Err(EvalError::TooFewPairs { have: n, need: 5 });
    }

    // Average ranks of |d|.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut ranks = vec![0.0; n];
    let mut tie_sizes = Vec::new();
    let mut k = 0;
    while k < n {
        let mut j = k;
        while j + 1 < n && diffs[order[j + 1]].abs() == diffs[order[k]].abs() {
            j += 1;
        }
        let avg = (k + 1 + j + 1) as f64 / 2.0;
        for &o in &order[k..=j] {
            ranks[o] = avg;
        }
        tie_sizes.push(j - k + 1);
        k = j + 1;
    }

    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();

    let method = force.unwrap_or(if n <= EXACT_LIMIT {
        Method::Exact
    } else {
        Method::Normal
    });
    let p = match method {
        Method::Exact => exact_p(&ranks, w_plus, alternative),
        Method::Normal => normal_p(w_plus, n, &tie_sizes, alternative),
    };
    Ok(WilcoxonResult {
        w_plus,
        n_used: n,
        p,
        exact: method == Method::Exact,
    })
}

/// Exhaustive sign enumeration: every subset of indices is "positive".
fn exact_p(ranks: &[f64], w_obs: f64, alternative: Alternative) -> f64 {
    let n = ranks.len();
    let total = 1u64 << n;
    let mut hits = 0u64;
    for mask in 0..total {
        let mut w = 0.0;
        for (i, r) in ranks.iter().enumerate() {
            if mask & (1 << i) != 0 {
                w += r;
            }
        }
        let hit = match alternative {
            Alternative::Greater => w >= w_obs - 1e-9,
            Alternative::Less => w <= w_obs + 1e-9,
        };
        if hit {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

fn normal_p(w_plus: f64, n: usize, tie_sizes: &[usize], alternative: Alternative) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    let sd = var.max(1e-12).sqrt();
    match alternative {
        Alternative::Greater => 1.0 - std_normal_cdf((w_plus - mean - 0.5) / sd),
        Alternative::Less => std_normal_cdf((w_plus - mean + 0.5) / sd),
    }
}

/// 0.5 * erfc(-z / sqrt(2)) via the Abramowitz-Stegun 7.1.26 rational
/// approximation (absolute error below 1.5e-7).
fn std_normal_cdf(z: f64) -> f64 {
    let x = z / std::f64::consts::SQRT_2;
    let (sign, x) = if x < 0.0 { (-1.0, -x) } else { (1.0, x) };
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-x * x).exp();
    0.5 * (1.0 + sign * erf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_positive_n5_is_one_in_thirtytwo() {
        let pairs: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64 + 10.0, 10.0)).collect();
        let r = wilcoxon_signed_rank(&pairs, Alternative::Greater).unwrap();
        assert!(r.exact);
        assert_eq!(r.n_used, 5);
        assert!((r.p - 1.0 / 32.0).abs() < 1e-12, "p = {}", r.p);
    }

    #[test]
    fn all_positive_n6_is_one_in_sixtyfour() {
        let pairs: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64 * 2.0, 0.0)).collect();
        let r = wilcoxon_signed_rank(&pairs, Alternative::Greater).unwrap();
        assert!((r.p - 1.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_differences_are_insignificant() {
        let pairs = vec![
            (1.0, 0.0),
            (0.0, 1.0),
            (2.5, 0.0),
            (0.0, 2.5),
            (3.0, 0.0),
            (0.0, 3.0),
        ];
        let r = wilcoxon_signed_rank(&pairs, Alternative::Greater).unwrap();
        assert!(r.p >= 0.5, "p = {}", r.p);
    }

    #[test]
    fn zero_differences_are_dropped() {
        let pairs = vec![
            (5.0, 5.0),
            (1.0, 0.0),
            (2.0, 0.0),
            (3.0, 0.0),
            (4.0, 0.0),
            (6.0, 0.0),
        ];
        let r = wilcoxon_signed_rank(&pairs, Alternative::Greater).unwrap();
        assert_eq!(r.n_used, 5);
        assert!((r.p - 1.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_pairs_is_an_error() {
        let pairs = vec![(1.0, 0.0), (2.0, 0.0), (3.0, 3.0)];
        assert!(matches!(
            wilcoxon_signed_rank(&pairs, Alternative::Greater),
            Err(EvalError::TooFewPairs { .. })
        ));
    }

    #[test]
    fn normal_branch_tracks_exact_branch() {
        // Deterministic pseudo-random pairs, n = 15.
        let mut state = 0x2545f491u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1000) as f64 / 100.0
        };
        for case in 0..15 {
            let pairs: Vec<(f64, f64)> = (0..15)
                .map(|_| {
                    let a = next();
                    let b = next();
                    (a + 0.3, b)
                })
                .collect();
            let exact =
                wilcoxon_signed_rank_with(&pairs, Alternative::Greater, Some(Method::Exact))
                    .unwrap();
            let approx =
                wilcoxon_signed_rank_with(&pairs, Alternative::Greater, Some(Method::Normal))
                    .unwrap();
            assert!(
                (exact.p - approx.p).abs() < 0.01,
                "case {case}: exact {} vs normal {}",
                exact.p,
                approx.p
            );
        }
    }
}
