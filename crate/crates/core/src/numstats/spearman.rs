use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Rank correlation coefficient with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

impl CorrelationResult {
    /// The result of correlating a sequence with itself.
    pub fn identity(n: usize) -> Self {
        CorrelationResult {
            rho: 1.0,
            p_value: 0.0,
            n,
        }
    }
}

/// 1-based ranks with ties replaced by the average of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation. Returns `None` when either input has zero spread.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of a correlation under the t approximation with
/// `n - 2` degrees of freedom.
pub fn correlation_p_value(rho: f64, n: usize) -> f64 {
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Spearman rank correlation: Pearson correlation of average-tie ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "spearman needs at least 3 observations, got {n}"
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite observation".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let rho = pearson(&rx, &ry).ok_or(Error::ConstantInput)?;
    Ok(CorrelationResult {
        rho,
        p_value: correlation_p_value(rho, n),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn perfect_monotone() {
        let r = spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(r.rho, 1.0);
        assert_eq!(r.p_value, 0.0);
        assert_eq!(r.n, 3);
        let r = spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(r.rho, -1.0);
    }

    #[test]
    fn ties_use_average_ranks() {
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
        // ranks x: 1, 2.5, 2.5, 4; y: 1, 3, 2, 4
        // mean 2.5; dx = -1.5, 0, 0, 1.5; dy = -1.5, .5, -.5, 1.5
        // sxy = 4.5, sxx = 4.5, syy = 5  => rho = 4.5 / sqrt(22.5)
        let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(r.rho, 4.5 / 22.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.rho, 0.948_683_298_050_513_8, epsilon = 1e-15);
    }

    #[test]
    fn p_value_reference() {
        // t = 0.5 * sqrt(8 / 0.75) = 1.6330; two-sided p with 8 df (scipy: 0.1411133)
        let p = correlation_p_value(0.5, 10);
        assert_abs_diff_eq!(p, 0.141_113_281_25, epsilon = 1e-9);
        assert_eq!(correlation_p_value(0.0, 10), 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(spearman(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ConstantInput)
        ));
    }

    fn seq() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((0i32..12).prop_map(f64::from), 3..30)
    }

    proptest! {
        #[test]
        fn symmetric_and_rank_invariant((x, y) in seq().prop_flat_map(|x| {
            let n = x.len();
            (Just(x), prop::collection::vec((0i32..12).prop_map(f64::from), n))
        })) {
            let (Ok(a), Ok(b)) = (spearman(&x, &y), spearman(&y, &x)) else { return Ok(()); };
            prop_assert_eq!(a.rho, b.rho);
            let fx: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0 * v).collect();
            let gy: Vec<f64> = y.iter().map(|v| v.exp()).collect();
            let c = spearman(&fx, &gy).unwrap();
            prop_assert_eq!(a.rho, c.rho);
            prop_assert!(a.p_value >= 0.0 && a.p_value <= 1.0);
        }
    }
}
