//! Convergence-bound coefficients for the Wilcox expansion.
//!
//! With `‖A(t)‖ ≤ k(t)` and `K(t) = ∫_0^t k`, the recursion yields
//! `‖W_n(t)‖ ≤ c_n K(t)^n` where
//!
//! ```text
//! α_{0,1} = 1,  α_{0,l} = 0 (l > 1)
//! α_{n,l} = Σ_{j=0}^{⌊(l-1)/n⌋-1} 2^j c_n^j / j! · (α_{n-1,l-nj} + β_{n,l-nj})
//! β_{n,nm} = 2^{m-1} n c_n^m / m!,  β_{n,r} = 0 otherwise
//! c_1 = 1,  c_2 = 1/2,  c_n = α_{n-2,n} / n  (n > 2)
//! D_n = n/(n+1) · α_{n-1,n+1} / α_{n-2,n}
//! ```
//!
//! The coefficients grow like `D_∞^n`, so everything is kept as logarithms.

use std::io::{self, Write};

use crate::csv::{format_f64, CsvTable};
use crate::error::{Error, Result};
use crate::fit::least_squares;

/// `∫‖A‖` threshold for the Fer expansion.
pub fn fer_bound() -> f64 {
    crate::fer::FER_CONVERGENCE_BOUND
}

/// `ln(e^a + e^b)`, with `-∞` as the log of zero.
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

fn log_sum(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Log-domain table of `α_{n,l}`, `c_n` and `D_n`.
#[derive(Debug, Clone)]
pub struct BoundTable {
    n_max: usize,
    // row n holds ln α_{n,l} at index l, 0 ≤ l ≤ N+1
    log_alpha: Vec<Vec<f64>>,
    // index n, 1 ≤ n ≤ N
    log_c: Vec<f64>,
    // index n, 3 ≤ n ≤ N
    d: Vec<f64>,
}

impl BoundTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `ln α_{n,l}` for `0 ≤ n < N`, `n < l ≤ N+1`.
    pub fn log_alpha(&self, n: usize, l: usize) -> Result<f64> {
        if n >= self.n_max || l <= n || l > self.n_max + 1 {
            return Err(Error::IndexOutOfRange {
                index: l,
                len: self.n_max + 2,
            });
        }
        Ok(self.log_alpha[n][l])
    }

    /// `ln c_n` for `1 ≤ n ≤ N`.
    pub fn log_c(&self, n: usize) -> Result<f64> {
        if !(1..=self.n_max).contains(&n) {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.n_max + 1,
            });
        }
        Ok(self.log_c[n])
    }

    /// `D_n` for `3 ≤ n ≤ N`.
    pub fn d(&self, n: usize) -> Result<f64> {
        if !(3..=self.n_max).contains(&n) {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.n_max + 1,
            });
        }
        Ok(self.d[n])
    }

    /// `(n, D_n)` for `3 ≤ n ≤ N`.
    pub fn d_series(&self) -> Vec<(usize, f64)> {
        (3..=self.n_max).map(|n| (n, self.d[n])).collect()
    }

    /// Columns `n, c_n_log, D_n`; `D_n` is empty for `n < 3`.
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["n", "c_n_log", "D_n"]);
        t.meta("n_max", self.n_max);
        for n in 1..=self.n_max {
            let d = if n >= 3 { format_f64(self.d[n]) } else { String::new() };
            t.push_row(vec![n.to_string(), format_f64(self.log_c[n]), d]);
        }
        t
    }

    pub fn write_csv(&self, out: impl Write) -> io::Result<()> {
        self.to_csv().write(out)
    }
}

/// Fills the bound recursion up to `N ≥ 3`.
pub fn bound_coefficients(n_max: usize) -> Result<BoundTable> {
    if n_max < 3 {
        return Err(Error::OrderOutOfRange {
            order: n_max,
            min: 3,
            max: usize::MAX,
        });
    }
    let width = n_max + 2;
    let ln2 = std::f64::consts::LN_2;
    let mut log_alpha = vec![vec![f64::NEG_INFINITY; width]; n_max];
    let mut log_c = vec![f64::NEG_INFINITY; n_max + 1];
    log_alpha[0][1] = 0.0;
    log_c[1] = 0.0;
    log_c[2] = -ln2;

    // ln j! up to the largest j needed (row 1)
    let mut log_fact = vec![0.0; width];
    for j in 1..width {
        log_fact[j] = log_fact[j - 1] + (j as f64).ln();
    }

    let mut terms = Vec::with_capacity(width);
    for n in 1..n_max {
        if n > 2 {
            log_c[n] = log_alpha[n - 2][n] - (n as f64).ln();
        }
        let lc = log_c[n];
        let ln_n = (n as f64).ln();
        // ln β_{n,nm}
        let log_beta = |r: usize| {
            if r % n != 0 {
                return f64::NEG_INFINITY;
            }
            let m = r / n;
            (m as f64 - 1.0) * ln2 + ln_n + m as f64 * lc - log_fact[m]
        };
        for l in n + 1..width {
            terms.clear();
            let j_max = (l - 1) / n;
            for j in 0..j_max {
                let r = l - n * j;
                let inner = log_add(log_alpha[n - 1][r], log_beta(r));
                if inner == f64::NEG_INFINITY {
                    continue;
                }
                terms.push(j as f64 * (ln2 + lc) - log_fact[j] + inner);
            }
            log_alpha[n][l] = log_sum(&terms);
        }
    }
    log_c[n_max] = log_alpha[n_max - 2][n_max] - (n_max as f64).ln();

    let mut d = vec![f64::NAN; n_max + 1];
    for n in 3..=n_max {
        let nf = n as f64;
        d[n] = nf / (nf + 1.0) * (log_alpha[n - 1][n + 1] - log_alpha[n - 2][n]).exp();
    }
    Ok(BoundTable {
        n_max,
        log_alpha,
        log_c,
        d,
    })
}

/// Extrapolated limit of the ratio sequence and the implied radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radius {
    pub d_inf: f64,
    pub xi_w: f64,
}

/// Least-squares line of `D_n` against `1/n` over the last `tail_fraction`
/// of the sequence; the intercept is `D_∞` and `ξ_W = 1/D_∞`.
pub fn extrapolate_radius(d: &[(usize, f64)], tail_fraction: f64) -> Result<Radius> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let take = (d.len() as f64 * tail_fraction).ceil() as usize;
    if take < 10 {
        return Err(Error::InvalidParameter(format!("need at least 10 tail points, got {take}")));
    }
    let pts: Vec<(f64, f64)> = d[d.len() - take..]
        .iter()
        .map(|&(n, v)| (1.0 / n as f64, v))
        .collect();
    let fit = least_squares(&pts)
        .ok_or_else(|| Error::InvalidParameter("degenerate tail".into()))?;
    Ok(Radius {
        d_inf: fit.intercept,
        xi_w: 1.0 / fit.intercept,
    })
}
