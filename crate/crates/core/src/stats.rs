//! Exact binomial tails at p = 1/2.

/// Largest trial count for which tails are computed with exact integer sums.
/// Counts stay below 2^53, so the final division by 2^n is exact.
const EXACT_LIMIT: u64 = 52;

fn choose_row(n: u64) -> Vec<u64> {
    let mut row = vec![1u64; n as usize + 1];
    for k in 1..=n {
        row[k as usize] = row[k as usize - 1] * (n - k + 1) / k;
    }
    row
}

fn ln_choose_row(n: u64) -> Vec<f64> {
    let mut row = vec![0.0f64; n as usize + 1];
    for k in 1..=n {
        row[k as usize] = row[k as usize - 1] + ((n - k + 1) as f64).ln() - (k as f64).ln();
    }
    row
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`.
pub fn upper_tail_half(k: u64, n: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    if n <= EXACT_LIMIT {
        let row = choose_row(n);
        let s: u64 = row[k as usize..].iter().sum();
        return s as f64 / (1u64 << n) as f64;
    }
    let row = ln_choose_row(n);
    let ln_tail = log_sum_exp(&row[k as usize..]) - n as f64 * std::f64::consts::LN_2;
    ln_tail.exp().min(1.0)
}

/// `P(X <= k)` for `X ~ Binomial(n, 1/2)`.
pub fn lower_tail_half(k: u64, n: u64) -> f64 {
    if k >= n {
        return 1.0;
    }
    // symmetry: P(X <= k) = P(X >= n - k)
    upper_tail_half(n - k, n)
}

/// One-sided exact sign test: probability of at least `positives` positive
/// signs among `nonzero` non-tied pairs under the null of no shift.
pub fn sign_test_upper(positives: u64, nonzero: u64) -> f64 {
    upper_tail_half(positives, nonzero)
}
