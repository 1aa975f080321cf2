//! Exact and asymptotic tests used by the corpus analytics.

use crate::error::{Error, Result};

/// Relative slack when comparing table probabilities against the observed one.
const FISHER_REL_TOL: f64 = 1e-12;
const BETA_TOL: f64 = 1e-12;
const BETA_MAX_ITER: usize = 10_000;

/// A 2x2 table: rows are in-corpus / out-corpus, columns are has / lacks the
/// attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContingencyTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Self { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn has_zero_margin(&self) -> bool {
        self.a + self.b == 0 || self.c + self.d == 0 || self.a + self.c == 0 || self.b + self.d == 0
    }

    pub fn has_zero_cell(&self) -> bool {
        self.a == 0 || self.b == 0 || self.c == 0 || self.d == 0
    }

    /// Sample odds ratio `ad / bc`; infinite when `bc = 0 < ad`, NaN when both are 0.
    pub fn odds_ratio(&self) -> f64 {
        let num = self.a as f64 * self.d as f64;
        let den = self.b as f64 * self.c as f64;
        num / den
    }

    /// Odds ratio with 0.5 added to every cell.
    pub fn haldane_odds_ratio(&self) -> f64 {
        ((self.a as f64 + 0.5) * (self.d as f64 + 0.5)) / ((self.b as f64 + 0.5) * (self.c as f64 + 0.5))
    }

    /// Swaps both rows and columns.
    pub fn transposed_rows_and_columns(&self) -> Self {
        Self::new(self.d, self.c, self.b, self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherResult {
    pub odds_ratio: f64,
    pub p_two_sided: f64,
}

fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Two-sided Fisher exact test.
///
/// The p-value sums the hypergeometric probabilities of every table sharing
/// the observed margins whose probability does not exceed the observed one.
pub fn fisher_exact(table: ContingencyTable) -> Result<FisherResult> {
    if table.has_zero_margin() {
        return Err(Error::ZeroMargin);
    }
    let row1 = table.a + table.b;
    let row2 = table.c + table.d;
    let col1 = table.a + table.c;
    let n = table.total();
    let ln_norm = ln_choose(n, col1);
    let ln_p = |x: u64| ln_choose(row1, x) + ln_choose(row2, col1 - x) - ln_norm;

    let lo = col1.saturating_sub(row2);
    let hi = row1.min(col1);
    let observed = ln_p(table.a);
    // compare in log space: p(x) <= p_obs (1 + tol)
    let cut = observed + libm::log1p(FISHER_REL_TOL);
    let mut p = 0.0;
    for x in lo..=hi {
        let lp = ln_p(x);
        if lp <= cut {
            p += libm::exp(lp);
        }
    }
    Ok(FisherResult {
        odds_ratio: table.odds_ratio(),
        p_two_sided: p.min(1.0),
    })
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if libm::fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < BETA_TOL {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
    pub mean_a: f64,
    pub sd_a: f64,
    pub mean_b: f64,
    pub sd_b: f64,
}

fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of freedom.
pub fn welch_t(sample_a: &[f64], sample_b: &[f64]) -> Result<WelchResult> {
    if sample_a.len() < 2 || sample_b.len() < 2 {
        return Err(Error::DegenerateSamples("each sample needs at least two values"));
    }
    if sample_a.iter().chain(sample_b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("t-test sample"));
    }
    let (mean_a, var_a) = mean_and_variance(sample_a);
    let (mean_b, var_b) = mean_and_variance(sample_b);
    if var_a == 0.0 && var_b == 0.0 {
        return Err(Error::DegenerateSamples("both samples have zero variance"));
    }
    let se_a = var_a / sample_a.len() as f64;
    let se_b = var_b / sample_b.len() as f64;
    let se = se_a + se_b;
    let t = (mean_a - mean_b) / libm::sqrt(se);
    let df = se * se
        / (se_a * se_a / (sample_a.len() - 1) as f64 + se_b * se_b / (sample_b.len() - 1) as f64);
    Ok(WelchResult {
        t,
        df,
        p_two_sided: student_t_two_sided(t, df),
        mean_a,
        sd_a: libm::sqrt(var_a),
        mean_b,
        sd_b: libm::sqrt(var_b),
    })
}

/// Median of a non-empty slice (mean of the two middle values for even sizes).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: alloc::vec::Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

/// Significance marker used in reports: `***` p<.0001, `**` p<.001,
/// `*` p<.01, `~` p<.05, empty otherwise.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.0001 {
        "***"
    } else if p < 0.001 {
        "**"
    } else if p < 0.01 {
        "*"
    } else if p < 0.05 {
        "~"
    } else {
        ""
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_table() {
        let r = fisher_exact(ContingencyTable::new(5, 5, 5, 5)).unwrap();
        assert_eq!(r.odds_ratio, 1.0);
        assert!((r.p_two_sided - 1.0).abs() < 1e-12);
    }

    #[test]
    fn odds_ratio_of_reference_table() {
        let t = ContingencyTable::new(1, 9, 11, 3);
        assert!((t.odds_ratio() - 3.0 / 99.0).abs() < 1e-15);
        assert_eq!(ContingencyTable::new(3, 0, 2, 1).odds_ratio(), f64::INFINITY);
        assert_eq!(libm::log(ContingencyTable::new(2, 3, 4, 6).odds_ratio()), 0.0);
    }

    #[test]
    fn zero_margin_rejected() {
        assert_eq!(fisher_exact(ContingencyTable::new(0, 0, 3, 4)), Err(Error::ZeroMargin));
        assert_eq!(fisher_exact(ContingencyTable::new(0, 3, 0, 4)), Err(Error::ZeroMargin));
    }

    #[test]
    fn incomplete_beta_edges() {
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0);
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0);
        // I_x(1, 1) = x
        assert!((regularized_incomplete_beta(1.0, 1.0, 0.3) - 0.3).abs() < 1e-14);
        // I_x(a, b) = 1 - I_{1-x}(b, a)
        let lhs = regularized_incomplete_beta(2.5, 0.5, 0.7);
        let rhs = 1.0 - regularized_incomplete_beta(0.5, 2.5, 0.3);
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn identical_samples() {
        let a = [0.1, 0.5, -0.3, 0.2];
        let r = welch_t(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_two_sided, 1.0);
    }

    #[test]
    fn degenerate_samples() {
        assert!(welch_t(&[1.0], &[1.0, 2.0]).is_err());
        assert!(welch_t(&[1.0, 1.0], &[2.0, 2.0]).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn stars() {
        assert_eq!(significance_stars(0.00005), "***");
        assert_eq!(significance_stars(0.0005), "**");
        assert_eq!(significance_stars(0.005), "*");
        assert_eq!(significance_stars(0.03), "~");
        assert_eq!(significance_stars(0.2), "");
    }
}
