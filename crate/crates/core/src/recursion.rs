//! The Wilcox transformation recursion, shared by the numeric sweep and the
//! symbolic Zassenhaus construction.
//!
//! Given the λ-graded coefficients `b_{0,l}` of `B_0 = Σ λ^l b_{0,l}`, the
//! recursion produces each generator from the previous residual:
//!
//! ```text
//! Ẇ_n      = b_{n-1,n}
//! g_{n,nl} = ad_{W_n}^{l-1}(Ẇ_n) / l!          (zero off multiples of n)
//! c_{n,r}  = b_{n-1,r} - g_{n,r}
//! b_{n,l}  = Σ_{k=0}^{⌊(l-1)/n⌋-1} (-1)^k/k! · ad_{W_n}^k c_{n,l-nk}
//! ```
//!
//! Only `l ≤ N` is tracked. Integration `Ẇ_n ↦ W_n` is supplied by the caller,
//! which is what distinguishes the grid sweep from the `t`-power calculus.

/// Minimal Lie-algebra surface the recursion needs.
pub trait LieElement: Clone {
    fn zero_like(&self) -> Self;
    fn bracket(&self, other: &Self) -> Self;
    /// `self += (num/den) · other`
    fn add_ratio(&mut self, num: i64, den: i64, other: &Self);
    fn is_zero(&self) -> bool;
}

impl LieElement for crate::linalg::Matrix {
    fn zero_like(&self) -> Self {
        crate::linalg::Matrix::zeros(self.dim())
    }

    fn bracket(&self, other: &Self) -> Self {
        crate::linalg::Matrix::bracket(self, other)
    }

    fn add_ratio(&mut self, num: i64, den: i64, other: &Self) {
        self.axpy_real(num as f64 / den as f64, other);
    }

    fn is_zero(&self) -> bool {
        crate::linalg::Matrix::is_zero(self)
    }
}

pub(crate) fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// Generator and its time derivative for one order.
#[derive(Debug, Clone)]
pub struct Generator<T> {
    pub w: T,
    pub wdot: T,
}

/// Runs the recursion to order `b0.len()`. `b0[l-1]` holds `b_{0,l}`;
/// `integrate(n, Ẇ_n)` must return `W_n`.
pub fn wilcox_recursion<T: LieElement>(
    b0: &[T],
    mut integrate: impl FnMut(usize, &T) -> T,
) -> Vec<Generator<T>> {
    let order = b0.len();
    let mut out = Vec::with_capacity(order);
    if order == 0 {
        return out;
    }
    // b[l-1] = b_{n-1,l}; entries with l < n are stale and never read.
    let mut b: Vec<T> = b0.to_vec();
    for n in 1..=order {
        let wdot = b[n - 1].clone();
        let w = integrate(n, &wdot);
        if n == order {
            out.push(Generator { w, wdot });
            break;
        }

        // c_{n,r} for r = n+1..=order
        let mut c: Vec<T> = b[n..].to_vec();
        if !wdot.is_zero() {
            let mut ad = wdot.clone();
            let mut l = 2;
            while n * l <= order {
                ad = w.bracket(&ad);
                c[n * l - n - 1].add_ratio(-1, factorial(l), &ad);
                l += 1;
            }
        }

        let zero = wdot.zero_like();
        let mut next = vec![zero; order];
        for r in n + 1..=order {
            let mut term = c[r - n - 1].clone();
            let mut k = 0;
            while r + n * k <= order {
                if term.is_zero() {
                    break;
                }
                let sign = if k % 2 == 0 { 1 } else { -1 };
                next[r + n * k - 1].add_ratio(sign, factorial(k), &term);
                k += 1;
                if r + n * k <= order {
                    term = w.bracket(&term);
                }
            }
        }
        b = next;
        out.push(Generator { w, wdot });
    }
    out
}
