//! Summary statistics for success-rate sweeps.

/// Weighted isotonic (non-decreasing) least-squares fit, pool-adjacent-violators.
pub fn isotonic_fit(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // blocks of (mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (m2, w2, l2) = blocks[blocks.len() - 1];
            let (m1, w1, l1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let w = w1 + w2;
            let mean = if w > 0.0 { (m1 * w1 + m2 * w2) / w } else { 0.5 * (m1 + m2) };
            blocks.push((mean, w, l1 + l2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, l)| std::iter::repeat_n(m, l))
        .collect()
}

/// `√(p̄(1 − p̄)/N̄)` with `p̄` pooled over rows and `N̄` the mean row size.
pub fn pooled_stderr(successes: &[u64], evaluated: &[u64]) -> f64 {
    let total: u64 = evaluated.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let p = successes.iter().sum::<u64>() as f64 / total as f64;
    let mean_n = total as f64 / evaluated.len() as f64;
    (p * (1.0 - p) / mean_n).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCheck {
    pub fitted: Vec<f64>,
    pub max_residual: f64,
    pub pooled_stderr: f64,
    pub passes: bool,
}

/// Fits a non-decreasing curve to the success rates (weighted by rows sizes)
/// and requires every residual to stay within `2·pooled_stderr`.
pub fn monotone_check(successes: &[u64], evaluated: &[u64]) -> MonotoneCheck {
    let p: Vec<f64> = successes
        .iter()
        .zip(evaluated)
        .map(|(&s, &n)| if n > 0 { s as f64 / n as f64 } else { 0.0 })
        .collect();
    let w: Vec<f64> = evaluated.iter().map(|&n| n as f64).collect();
    let fitted = isotonic_fit(&p, &w);
    let max_residual = p
        .iter()
        .zip(&fitted)
        .zip(evaluated)
        .filter(|(_, &n)| n > 0)
        .map(|((a, b), _)| (a - b).abs())
        .fold(0.0, f64::max);
    let pooled = pooled_stderr(successes, evaluated);
    MonotoneCheck {
        passes: max_residual <= 2.0 * pooled,
        fitted,
        max_residual,
        pooled_stderr: pooled,
    }
}

/// First rate at which the (non-decreasing) curve reaches `level`, linearly
/// interpolated between neighbouring rates.
pub fn crossing_rate(rates: &[f64], curve: &[f64], level: f64) -> Option<f64> {
    let i = curve.iter().position(|&p| p >= level)?;
    if i == 0 {
        return Some(rates[0]);
    }
    let (r0, r1, p0, p1) = (rates[i - 1], rates[i], curve[i - 1], curve[i]);
    Some(r0 + (level - p0) / (p1 - p0) * (r1 - r0))
}

/// Empirical ε-achievability: the error rate plus two standard errors is at
/// most `eps`.
pub fn empirically_achievable(p_success: f64, stderr: f64, eps: f64) -> bool {
    1.0 - p_success + 2.0 * stderr <= eps
}
