//! Numeric Wilcox expansion on a uniform grid.
//!
//! All generators are advanced together node by node: at a node, `Ẇ_n`
//! depends only on `A(t)` and the `W_m(t)`, `m < n`, at that same node, so
//! each `W_n(t_j)` is the trapezoid update from node `j-1` taken the moment
//! `Ẇ_n(t_j)` is known. Only the current and previous node states are kept.

use crate::error::{Error, Result};
use crate::linalg::{expm, Matrix};
use crate::operator::{trapezoid_step, Grid, GridSeries, TimeOperator};
use crate::recursion::wilcox_recursion;

/// Largest order the numeric sweep accepts.
pub const MAX_ORDER: usize = 12;

/// `W_1..W_N` and their derivatives sampled on a grid.
#[derive(Debug, Clone)]
pub struct WilcoxTerms {
    w: Vec<GridSeries>,
    wdot: Vec<GridSeries>,
}

impl WilcoxTerms {
    pub fn order(&self) -> usize {
        self.w.len()
    }

    pub fn grid(&self) -> &Grid {
        self.w[0].grid()
    }

    /// `W_n` for `n` in `1..=order`.
    pub fn w(&self, n: usize) -> &GridSeries {
        &self.w[n - 1]
    }

    pub fn wdot(&self, n: usize) -> &GridSeries {
        &self.wdot[n - 1]
    }

    pub fn terms(&self) -> &[GridSeries] {
        &self.w
    }

    pub fn into_terms(self) -> Vec<GridSeries> {
        self.w
    }

    pub fn propagator(&self, t_index: usize, lambda: f64, m: usize) -> Result<Matrix> {
        wilcox_propagator(&self.w, t_index, lambda, m)
    }
}

/// Computes `W_1..W_N` for `dx/dt = A(t) x` over `grid`.
pub fn wilcox_terms(a: &dyn TimeOperator, grid: Grid, order: usize) -> Result<WilcoxTerms> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::OrderOutOfRange {
            order,
            min: 1,
            max: MAX_ORDER,
        });
    }
    let dim = a.dim();
    let h = grid.step();
    let n_nodes = grid.n_nodes();
    let mut w_vals: Vec<Vec<Matrix>> = vec![Vec::with_capacity(n_nodes); order];
    let mut wdot_vals: Vec<Vec<Matrix>> = vec![Vec::with_capacity(n_nodes); order];

    let zero = Matrix::zeros(dim);
    for (j, t) in grid.nodes().enumerate() {
        let mut b0 = vec![zero.clone(); order];
        b0[0] = a.eval(t);
        let gens = wilcox_recursion(&b0, |n, wdot| {
            if j == 0 {
                zero.clone()
            } else {
                let prev_w = &w_vals[n - 1][j - 1];
                let prev_wdot = &wdot_vals[n - 1][j - 1];
                trapezoid_step(prev_w, prev_wdot, wdot, h)
            }
        });
        for (n, g) in gens.into_iter().enumerate() {
            w_vals[n].push(g.w);
            wdot_vals[n].push(g.wdot);
        }
    }

    let to_series = |vals: Vec<Vec<Matrix>>| -> Result<Vec<GridSeries>> {
        vals.into_iter().map(|v| GridSeries::new(grid, v)).collect()
    };
    Ok(WilcoxTerms {
        w: to_series(w_vals)?,
        wdot: to_series(wdot_vals)?,
    })
}

/// `exp(λ W_1(t)) · exp(λ² W_2(t)) ⋯ exp(λ^m W_m(t))` at node `t_index`.
pub fn wilcox_propagator(
    w: &[GridSeries],
    t_index: usize,
    lambda: f64,
    m: usize,
) -> Result<Matrix> {
    if m > w.len() {
        return Err(Error::OrderOutOfRange {
            order: m,
            min: 0,
            max: w.len(),
        });
    }
    let dim = match w.first() {
        Some(s) => s.dim(),
        None => return Ok(Matrix::identity(1)),
    };
    let mut out = Matrix::identity(dim);
    let mut lam_pow = 1.0;
    for series in &w[..m] {
        lam_pow *= lambda;
        let factor = expm(&series.at(t_index)?.scale_real(lam_pow));
        out = &out * &factor;
    }
    Ok(out)
}
