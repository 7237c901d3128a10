//! Rank and linear correlation with exact small-sample significance.
//!
//! For n ≤ [`MAX_EXACT_N`] the p-value is computed by enumerating all n!
//! re-pairings of the inputs. A Student-t approximation is reported next to
//! it so the two references can be compared.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Largest sample size handled by exhaustive enumeration (9! = 362,880).
pub const MAX_EXACT_N: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    /// Spearman's ρ.
    Rank,
    /// Pearson's r.
    Linear,
}

/// Direction of a one-sided test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Greater,
    Less,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Greater => 1.0,
            Side::Less => -1.0,
        }
    }

    /// The side a coefficient points to; zero counts as positive.
    pub fn of(coefficient: f64) -> Side {
        if coefficient < 0.0 {
            Side::Less
        } else {
            Side::Greater
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub kind: Statistic,
    pub coefficient: f64,
    pub n: usize,
    pub side: Side,
    /// Exact permutation p-value; `None` when n exceeds [`MAX_EXACT_N`].
    pub p_value: Option<f64>,
    /// One-sided Student-t approximation with n − 2 degrees of freedom.
    pub p_value_t: f64,
}

/// Ranks starting at 1; tied values share the mean of their positions.
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
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn check_inputs(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::arg(format!(
            "sample lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::arg(format!("need at least 3 observations, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::arg("observations must be finite"));
    }
    Ok(())
}

fn centered(values: &[f64]) -> (Vec<f64>, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let c: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let ss = c.iter().map(|v| v * v).sum::<f64>();
    (c, ss)
}

/// Product-moment correlation of two equal-length samples.
pub fn pearson_coefficient(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let (xc, sxx) = centered(xs);
    let (yc, syy) = centered(ys);
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("a sample has zero variance".into()));
    }
    let sxy: f64 = xc.iter().zip(&yc).map(|(a, b)| a * b).sum();
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// One-sided p-value of `r` from the t distribution with n − 2 df.
pub fn t_test_p(r: f64, n: usize, side: Side) -> f64 {
    let df = (n - 2) as f64;
    let r = r.clamp(-1.0, 1.0);
    if r.abs() == 1.0 {
        return if side.sign() * r > 0.0 { 0.0 } else { 1.0 };
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
    match side {
        Side::Greater => 1.0 - dist.cdf(t),
        Side::Less => dist.cdf(t),
    }
}

/// Smallest |r| significant at one-sided level `alpha` under the t
/// approximation.
pub fn t_critical_r(n: usize, alpha: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::arg("need at least 3 observations"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg("alpha must be in (0, 1)"));
    }
    let df = (n - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, df)
        .expect("df is positive")
        .inverse_cdf(1.0 - alpha);
    Ok(t / (t * t + df).sqrt())
}

/// Visits every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// The statistic under every re-pairing of `ys` against `xs`, observed
/// pairing first.
fn permutation_distribution(xs: &[f64], ys: &[f64], statistic: Statistic) -> Result<Vec<f64>> {
    check_inputs(xs, ys)?;
    let n = xs.len();
    if n > MAX_EXACT_N {
        return Err(Error::Capability(format!(
            "exact permutation test enumerates n! pairings and is limited to n <= {MAX_EXACT_N} (got {n}); use an asymptotic approximation"
        )));
    }
    let (x, y) = match statistic {
        Statistic::Rank => (average_ranks(xs), average_ranks(ys)),
        Statistic::Linear => (xs.to_vec(), ys.to_vec()),
    };
    let (xc, sxx) = centered(&x);
    let (yc, syy) = centered(&y);
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("a sample has zero variance".into()));
    }
    let denom = (sxx * syy).sqrt();
    let mut out = Vec::with_capacity((1..=n).product());
    for_each_permutation(n, |perm| {
        let s: f64 = perm.iter().enumerate().map(|(i, &p)| xc[i] * yc[p]).sum();
        out.push(s / denom);
    });
    Ok(out)
}

// Permuted statistics equal to the observed one can differ in the last
// bits depending on summation order.
const TIE_EPS: f64 = 1e-9;

/// Share of the n! pairings whose statistic is at least as extreme as the
/// observed one in the direction of `side` (the observed pairing included).
pub fn exact_permutation_p(xs: &[f64], ys: &[f64], statistic: Statistic, side: Side) -> Result<f64> {
    let dist = permutation_distribution(xs, ys, statistic)?;
    let s = side.sign();
    let observed = s * dist[0];
    let hits = dist.iter().filter(|&&v| s * v >= observed - TIE_EPS).count();
    Ok(hits as f64 / dist.len() as f64)
}

/// Smallest statistic magnitude (in the direction of `side`) whose exact
/// permutation p-value is ≤ `alpha`, over the distribution generated by
/// re-pairing `xs` and `ys`. `None` if no pairing reaches that level.
pub fn permutation_critical_value(
    xs: &[f64],
    ys: &[f64],
    statistic: Statistic,
    side: Side,
    alpha: f64,
) -> Result<Option<f64>> {
    let s = side.sign();
    let mut values: Vec<f64> = permutation_distribution(xs, ys, statistic)?
        .into_iter()
        .map(|v| s * v)
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let total = values.len() as f64;
    let mut best = None;
    let mut i = 0;
    while i < values.len() {
        // Group values equal within tolerance; p counts the whole group.
        let mut j = i;
        while j + 1 < values.len() && values[j + 1] >= values[i] - TIE_EPS {
            j += 1;
        }
        if (j + 1) as f64 / total > alpha {
            break;
        }
        best = Some(values[j]);
        i = j + 1;
    }
    Ok(best)
}

fn correlate(xs: &[f64], ys: &[f64], kind: Statistic, side: Option<Side>) -> Result<CorrelationResult> {
    check_inputs(xs, ys)?;
    let coefficient = match kind {
        Statistic::Rank => pearson_coefficient(&average_ranks(xs), &average_ranks(ys))?,
        Statistic::Linear => pearson_coefficient(xs, ys)?,
    };
    let side = side.unwrap_or_else(|| Side::of(coefficient));
    let p_value = if xs.len() <= MAX_EXACT_N {
        Some(exact_permutation_p(xs, ys, kind, side)?)
    } else {
        None
    };
    Ok(CorrelationResult {
        kind,
        coefficient,
        n: xs.len(),
        side,
        p_value,
        p_value_t: t_test_p(coefficient, xs.len(), side),
    })
}

/// Spearman's ρ, tested one-sided for positive association.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult> {
    correlate(xs, ys, Statistic::Rank, Some(Side::Greater))
}

/// Pearson's r, tested one-sided in the direction of its sign.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult> {
    correlate(xs, ys, Statistic::Linear, None)
}

/// Either statistic with an explicit test direction.
pub fn correlation(xs: &[f64], ys: &[f64], kind: Statistic, side: Side) -> Result<CorrelationResult> {
    correlate(xs, ys, kind, Some(side))
}

/// Significance marks: `**` for p < 0.01, `*` for p < 0.05.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}
