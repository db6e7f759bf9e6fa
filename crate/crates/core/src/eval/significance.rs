use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Pooled two-proportion z statistic for `a/n` against `b/n`; 0 when the
/// pooled proportion is 0 or 1.
pub fn proportions_z(correct_a: usize, correct_b: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Validation("proportion test over zero entities".into()));
    }
    if correct_a > n || correct_b > n {
        return Err(Error::Validation(format!(
            "counts {correct_a} and {correct_b} exceed the sample size {n}"
        )));
    }
    let n = n as f64;
    let (pa, pb) = (correct_a as f64 / n, correct_b as f64 / n);
    let pooled = (pa + pb) / 2.0;
    let var = pooled * (1.0 - pooled) * 2.0 / n;
    if var == 0.0 {
        return Ok(0.0);
    }
    Ok((pa - pb) / var.sqrt())
}

/// Two-sided p-value of [`proportions_z`].
pub fn proportions_p_value(correct_a: usize, correct_b: usize, n: usize) -> Result<f64> {
    let z = proportions_z(correct_a, correct_b, n)?;
    let normal = Normal::standard();
    Ok(2.0 * (1.0 - normal.cdf(z.abs())))
}

/// Test of equal proportions without continuity correction; true when the
/// two-sided p-value is below `alpha`.
pub fn equal_proportions_test(correct_a: usize, correct_b: usize, n: usize, alpha: f64) -> Result<bool> {
    Ok(proportions_p_value(correct_a, correct_b, n)? < alpha)
}

/// Pairwise matrix over systems: cell `(r, c)` is true when system `r` is
/// correct significantly more often than system `c`.
pub fn significance_matrix(correct: &[usize], n: usize, alpha: f64) -> Result<Vec<Vec<bool>>> {
    correct
        .iter()
        .map(|&a| {
            correct
                .iter()
                .map(|&b| Ok(a > b && equal_proportions_test(a, b, n, alpha)?))
                .collect()
        })
        .collect()
}

/// Renders a matrix as rows of `*` (significant) and `0`, with system labels.
pub fn render_matrix(labels: &[String], m: &[Vec<bool>]) -> String {
    let width = labels.iter().map(|l| l.len()).max().unwrap_or(0);
    let mut out = format!("{:width$}", "");
    for i in 0..labels.len() {
        out.push_str(&format!(" {:>3}", i + 1));
    }
    out.push('\n');
    for (i, (l, row)) in labels.iter().zip(m).enumerate() {
        out.push_str(&format!("{l:width$}"));
        for &c in row {
            out.push_str(&format!(" {:>3}", if c { "*" } else { "0" }));
        }
        out.push_str(&format!("  ({})\n", i + 1));
    }
    out
}
