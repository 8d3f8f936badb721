use alloc::vec;
use alloc::vec::Vec;

use super::{check_beta, MetricsError};

/// Largest label sequence the permutation enumerator accepts.
pub const BRUTEFORCE_CAP: usize = 10;

/// Length of the run of in-set transitions at the end of `replay`.
pub fn count_trailing_safe<T, F>(replay: &[(T, T)], mut member: F) -> usize
where
    F: FnMut(&T) -> bool,
{
    let mut n = 0;
    for (a, b) in replay {
        if member(a) && member(b) {
            n += 1;
        } else {
            n = 0;
        }
    }
    n
}

/// Trailing run over precomputed pair labels (`true` = safe pair).
pub fn trailing_run(labels: &[bool]) -> usize {
    labels.iter().rev().take_while(|&&l| l).count()
}

/// `1 - exp(ln(beta) / n)`, and 1 for `n = 0`.
pub fn epsilon_from_count(n: usize, beta: f64) -> Result<f64, MetricsError> {
    check_beta(beta)?;
    if n == 0 {
        return Ok(1.0);
    }
    Ok(-libm::expm1(libm::log(beta) / n as f64))
}

/// `1 / C(t, i)`: exact while the binomial fits in an f64 mantissa, through
/// log-gamma beyond.
fn inverse_binomial(t: usize, i: usize) -> f64 {
    let k = i.min(t - i);
    let mut c: u128 = 1;
    let mut exact = true;
    for j in 0..k {
        match c.checked_mul((t - j) as u128) {
            Some(v) if v / (j as u128 + 1) < (1u128 << 53) => c = v / (j as u128 + 1),
            _ => {
                exact = false;
                break;
            }
        }
    }
    if exact {
        return 1.0 / c as f64;
    }
    let ln = libm::lgamma(i as f64 + 1.0) + libm::lgamma((t - i) as f64 + 1.0) - libm::lgamma(t as f64 + 1.0);
    libm::exp(ln)
}

/// Weighted sum `sum_{i=1..s} eps_i * i!(T-i)!/T!` over `T = td_total`
/// transitions, taken literally from the quantification loop.
pub fn loop_epsilon_bar(s: usize, td_total: usize, beta: f64) -> Result<f64, MetricsError> {
    check_beta(beta)?;
    if td_total == 0 {
        return Err(MetricsError::InvalidCounts("transition count must be positive"));
    }
    if s > td_total {
        return Err(MetricsError::InvalidCounts("safe count exceeds transition count"));
    }
    let mut acc = 0.0;
    for i in 1..=s {
        acc += epsilon_from_count(i, beta)? * inverse_binomial(td_total, i);
    }
    Ok(acc)
}

/// Distribution of the trailing safe run over uniformly random orderings of
/// `s` safe and `c` unsafe transitions; entry `i` is `P(N = i)`.
///
/// `P(N = i) = s!/(s-i)! * c * (s+c-i-1)! / (s+c)!`, evaluated through the
/// ratio `P(N = i+1) / P(N = i) = (s-i) / (s+c-i-1)` from `P(N = 0) = c/(s+c)`.
pub fn trailing_run_pmf(s: usize, c: usize) -> Result<Vec<f64>, MetricsError> {
    if s + c == 0 {
        return Err(MetricsError::InvalidCounts("at least one transition is required"));
    }
    let mut pmf = vec![0.0; s + 1];
    if c == 0 {
        pmf[s] = 1.0;
        return Ok(pmf);
    }
    pmf[0] = c as f64 / (s + c) as f64;
    for i in 0..s {
        pmf[i + 1] = pmf[i] * (s - i) as f64 / (s + c - i - 1) as f64;
    }
    Ok(pmf)
}

/// Expected bound over uniformly random replays.
pub fn epsilon_bar_exact(s: usize, c: usize, beta: f64) -> Result<f64, MetricsError> {
    check_beta(beta)?;
    let pmf = trailing_run_pmf(s, c)?;
    let mut acc = 0.0;
    for (n, p) in pmf.iter().enumerate() {
        if *p > 0.0 {
            acc += p * epsilon_from_count(n, beta)?;
        }
    }
    Ok(acc)
}

/// Average bound over every permutation of `labels` (Heap's algorithm).
pub fn epsilon_bar_bruteforce(labels: &[bool], beta: f64, cap: usize) -> Result<f64, MetricsError> {
    check_beta(beta)?;
    let cap = cap.min(BRUTEFORCE_CAP);
    if labels.len() > cap {
        return Err(MetricsError::TooLarge { len: labels.len(), cap });
    }
    if labels.is_empty() {
        return Err(MetricsError::InvalidCounts("at least one transition is required"));
    }
    let eps: Vec<f64> = (0..=labels.len()).map(|n| epsilon_from_count(n, beta)).collect::<Result<_, _>>()?;
    let mut a = labels.to_vec();
    let n = a.len();
    let mut c = vec![0usize; n];
    let mut sum = eps[trailing_run(&a)];
    let mut count = 1usize;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sum += eps[trailing_run(&a)];
            count += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(sum / count as f64)
}
