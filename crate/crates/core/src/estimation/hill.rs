use super::ParamEstimate;
use crate::error::{param, Error, Result};
use serde::Serialize;

/// Hill statistic H on the top-k order statistics of |sizes|. H estimates
/// 1/β for tails P(|V| > x) ~ C x^{−β}; `tail_index` reports β = 1/H.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HillEstimate {
    pub hill: ParamEstimate,
    /// 95% interval for H from asymptotic normality, H(1 ± 1.96/√k).
    pub ci: [f64; 2],
    pub tail_index: f64,
    pub k: usize,
}

pub fn default_hill_k(n: usize) -> usize {
    ((n as f64).powf(0.6).floor() as usize).max(1)
}

pub fn hill_estimator(sizes: &[f64], k: Option<usize>) -> Result<HillEstimate> {
    let n = sizes.len();
    let k = k.unwrap_or_else(|| default_hill_k(n));
    if k == 0 || 2 * k >= n {
        return Err(param("k", format!("need 1 <= k < n/2, got k={k}, n={n}")));
    }
    let mut a: Vec<f64> = sizes.iter().map(|v| v.abs()).collect();
    // descending: a[..k] are the k largest, a[k] the threshold
    a.select_nth_unstable_by(k, |x, y| y.total_cmp(x));
    let thr = a[k];
    if !(thr > 0.0) || !thr.is_finite() {
        return Err(Error::InsufficientData(format!("order statistic {k} of |sizes| is {thr}")));
    }
    let lt = thr.ln();
    let h = a[..k].iter().map(|x| x.ln() - lt).sum::<f64>() / k as f64;
    let se = h / (k as f64).sqrt();
    Ok(HillEstimate {
        hill: ParamEstimate { value: h, std_error: se, n_used: k },
        ci: [h - 1.96 * se, h + 1.96 * se],
        tail_index: 1.0 / h,
        k,
    })
}
