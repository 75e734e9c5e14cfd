//! Worked examples: the SU(2) Bellman problem, SO(3) rotations, and the
//! Dyson-series cross-check.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::csv::{format_f64, CsvTable};
use crate::error::{Error, Result};
use crate::linalg::basis::{rho_x, rho_y, rho_z, sigma_x, sigma_y, sigma_z};
use crate::linalg::{expm, Matrix};
use crate::operator::{cumint, Grid, GridSeries, OperatorFunction, ScalarFn, TimeOperator};
use crate::perm::partitions;
use crate::wilcox::{wilcox_terms, WilcoxTerms};
use crate::zassenhaus::BellmanExpansion;

/// `∫_0^1 ‖ε Ã‖ dt = ε` below this value lies inside the guaranteed region.
pub const SU2_BOUND_MARKER: f64 = 0.658;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "EXPFACT_THREADS";

fn i_unit() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Runs `f` on a pool capped by `EXPFACT_THREADS` when set.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match cap.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// `i a σz`
pub fn su2_generator(a: f64) -> Matrix {
    sigma_z().scale(Complex64::new(0.0, a))
}

/// `i σx`
pub fn su2_perturbation() -> Matrix {
    sigma_x().scale(i_unit())
}

/// `scale · e^{-iatσz} (iσx) e^{iatσz} = scale · i (cos 2at σx + sin 2at σy)`
pub fn su2_operator(a: f64, scale: f64) -> OperatorFunction {
    let c = Complex64::new(0.0, scale);
    OperatorFunction::new(
        2,
        vec![
            (ScalarFn::Cos(2.0 * a), sigma_x().scale(c)),
            (ScalarFn::Sin(2.0 * a), sigma_y().scale(c)),
        ],
    )
    .expect("Pauli terms share dimension 2")
}

/// `exp(-A) exp(A + λB)` with `A = iaσz`, `B = iσx`: the exact propagator
/// of `λ su2_operator(a)` over `[0, 1]`.
pub fn su2_exact(a: f64, lambda: f64) -> Matrix {
    let gen = su2_generator(a);
    let mut full = gen.clone();
    full.axpy_real(lambda, &su2_perturbation());
    &expm(&gen.scale_real(-1.0)) * &expm(&full)
}

/// Closed-form `T_k(t)`, `k = 1..=5`, of the SU(2) Bellman problem, where the
/// Wilcox generators of `su2_operator(a, 1)` are `W_k = i T_k`. With
/// `S = sin 2at`, `C = cos 2at`:
///
/// ```text
/// T_1 = [S σx + (1-C) σy] / 2a
/// T_2 = (2at - S) σz / 4a²
/// T_3 = {[6at + (C-4)S] σx - (1-C)² σy} / 12a³
/// T_4 = -[6at + (C-4)S] σz / 16a⁴
/// T_5 = {[56S - (4C+7)SC - 10at(7+4C-2C²)] σx
///        + [4C³ - 7C² - 28C + 31 + 10at(2SC - 8S + 6at)] σy} / 240a⁵
/// ```
pub fn su2_table1(a: f64, t: f64, k: usize) -> Result<Matrix> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("a must be nonzero, got {a}")));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("t"));
    }
    let (s, c) = (2.0 * a * t).sin_cos();
    let at = a * t;
    let combo = |x: f64, y: f64, z: f64| {
        let mut m = sigma_x().scale_real(x);
        m.axpy_real(y, &sigma_y());
        m.axpy_real(z, &sigma_z());
        m
    };
    let m = match k {
        1 => combo(s, 1.0 - c, 0.0).scale_real(1.0 / (2.0 * a)),
        2 => combo(0.0, 0.0, 2.0 * at - s).scale_real(1.0 / (4.0 * a.powi(2))),
        3 => {
            let x = 6.0 * at + (c - 4.0) * s;
            combo(x, -(1.0 - c).powi(2), 0.0).scale_real(1.0 / (12.0 * a.powi(3)))
        }
        4 => combo(0.0, 0.0, -(6.0 * at + (c - 4.0) * s)).scale_real(1.0 / (16.0 * a.powi(4))),
        5 => {
            let x = 56.0 * s - (4.0 * c + 7.0) * s * c - 10.0 * at * (7.0 + 4.0 * c - 2.0 * c * c);
            let y = 4.0 * c.powi(3) - 7.0 * c * c - 28.0 * c
                + 31.0
                + 10.0 * at * (2.0 * s * c - 8.0 * s + 6.0 * at);
            combo(x, y, 0.0).scale_real(1.0 / (240.0 * a.powi(5)))
        }
        _ => {
            return Err(Error::OrderOutOfRange {
                order: k,
                min: 1,
                max: 5,
            })
        }
    };
    Ok(m)
}

/// `φ ρz` with `φ = α cos θ`.
pub fn so3_generator(alpha: f64, theta: f64) -> Matrix {
    rho_z().scale_real(alpha * theta.cos())
}

/// `e^{-tφρz} ρx e^{tφρz} = cos(φt) ρx - sin(φt) ρy`, `φ = α cos θ`.
pub fn so3_operator(alpha: f64, theta: f64) -> OperatorFunction {
    let phi = alpha * theta.cos();
    OperatorFunction::new(
        3,
        vec![
            (ScalarFn::Cos(phi), rho_x()),
            (ScalarFn::Sin(phi), rho_y().scale_real(-1.0)),
        ],
    )
    .expect("rotation generators share dimension 3")
}

/// `tr exp(α (cos θ ρz + sin θ ρx)) = 1 + 2 cos α`
pub fn so3_exact_trace(alpha: f64) -> f64 {
    1.0 + 2.0 * alpha.cos()
}

/// Trace of `e^{φρz} e^{(α sinθ) W_1(1)}`:
/// `(1 + cos φ)(1 + cos β) - 1` with `β = 2 tan θ sin(φ/2)`.
pub fn so3_trace_order1(alpha: f64, theta: f64) -> f64 {
    let phi = alpha * theta.cos();
    let beta = 2.0 * theta.tan() * (phi / 2.0).sin();
    (1.0 + phi.cos()) * (1.0 + beta.cos()) - 1.0
}

/// Trace of `e^{φρz} e^{sW_1(1)} e^{s²W_2(1)}`:
/// `(1 + cos β)(1 + cos(φ + γ)) - 1` with `γ = tan²θ (φ - sin φ)/2`.
pub fn so3_trace_order2(alpha: f64, theta: f64) -> f64 {
    let phi = alpha * theta.cos();
    let tan = theta.tan();
    let beta = 2.0 * tan * (phi / 2.0).sin();
    let gamma = tan * tan * (phi - phi.sin()) / 2.0;
    (1.0 + beta.cos()) * (1.0 + (phi + gamma).cos()) - 1.0
}

/// Errors of successive approximants over a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSweep {
    pub parameter: String,
    pub values: Vec<f64>,
    pub orders: Vec<usize>,
    pub oracle: String,
    /// Exact observable per parameter value.
    pub reference: Vec<f64>,
    /// `approx[i][j]`: observable of order `orders[j]` at `values[i]`.
    pub approx: Vec<Vec<f64>>,
    /// `errors[i][j] = |approx[i][j] - reference[i]|`
    pub errors: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl ErrorSweep {
    fn from_rows(
        parameter: &str,
        values: Vec<f64>,
        orders: Vec<usize>,
        oracle: &str,
        rows: Vec<(f64, Vec<f64>)>,
    ) -> Self {
        let reference: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let errors = rows
            .iter()
            .map(|(exact, approx)| approx.iter().map(|v| (v - exact).abs()).collect())
            .collect();
        Self {
            parameter: parameter.to_string(),
            values,
            orders,
            oracle: oracle.to_string(),
            reference,
            approx: rows.into_iter().map(|r| r.1).collect(),
            errors,
            metadata: Vec::new(),
        }
    }

    /// Error column of one order.
    pub fn error_column(&self, order: usize) -> Option<Vec<f64>> {
        let j = self.orders.iter().position(|&o| o == order)?;
        Some(self.errors.iter().map(|row| row[j]).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.reference.iter().all(|v| v.is_finite())
            && self.errors.iter().flatten().all(|v| v.is_finite())
            && self.approx.iter().flatten().all(|v| v.is_finite())
    }

    /// Columns: parameter, `exact`, `approx_m…`, `error_m…`.
    pub fn to_csv(&self) -> CsvTable {
        let mut header = vec![self.parameter.clone(), "exact".to_string()];
        header.extend(self.orders.iter().map(|m| format!("approx_{m}")));
        header.extend(self.orders.iter().map(|m| format!("error_{m}")));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut t = CsvTable::new(&header_refs);
        t.meta("oracle", &self.oracle);
        for (k, v) in &self.metadata {
            t.meta(k, v);
        }
        for (i, v) in self.values.iter().enumerate() {
            let mut row = vec![format_f64(*v), format_f64(self.reference[i])];
            row.extend(self.approx[i].iter().map(|x| format_f64(*x)));
            row.extend(self.errors[i].iter().map(|x| format_f64(*x)));
            t.push_row(row);
        }
        t
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

pub fn default_eps_values() -> Vec<f64> {
    log_space(0.01, 1.2, 60)
}

pub fn default_theta_values() -> Vec<f64> {
    lin_space(0.0, std::f64::consts::FRAC_PI_2, 181)
}

pub const DEFAULT_SWEEP_NODES: usize = 20_001;

fn unit_grid_check(grid: &Grid) -> Result<()> {
    if grid.t0() != 0.0 || grid.t1() != 1.0 {
        return Err(Error::InvalidGrid("sweep needs a grid over [0, 1]".into()));
    }
    Ok(())
}

/// `|U_12|²` of `e^{iaσz} e^{εW_1(1)} ⋯ e^{ε^m W_m(1)}` for odd `m ≤ max_order`
/// against `exp(i(aσz + εσx))`.
pub fn su2_sweep(a: f64, eps_values: &[f64], max_order: usize, grid: Grid) -> Result<ErrorSweep> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("a must be nonzero, got {a}")));
    }
    unit_grid_check(&grid)?;
    let orders: Vec<usize> = (1..=max_order).step_by(2).collect();
    if orders.is_empty() {
        return Err(Error::OrderOutOfRange {
            order: max_order,
            min: 1,
            max: crate::wilcox::MAX_ORDER,
        });
    }
    let exp = BellmanExpansion::with_operator(
        su2_generator(a),
        su2_perturbation(),
        &su2_operator(a, 1.0),
        max_order,
        grid,
    )?;
    let u12 = |m: &Matrix| m[(0, 1)].norm_sqr();
    let rows = with_thread_cap(|| {
        eps_values
            .par_iter()
            .map(|&eps| -> Result<(f64, Vec<f64>)> {
                let exact = u12(&exp.exact(eps));
                let approx = orders
                    .iter()
                    .map(|&m| exp.approximant(eps, m).map(|u| u12(&u)))
                    .collect::<Result<Vec<_>>>()?;
                Ok((exact, approx))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut sweep = ErrorSweep::from_rows(
        "eps",
        eps_values.to_vec(),
        orders,
        "|U12|^2 of expm(i(a sigma_z + eps sigma_x))",
        rows,
    );
    sweep.metadata.push(("a".into(), format_f64(a)));
    sweep.metadata.push(("nodes".into(), grid.n_nodes().to_string()));
    sweep.metadata.push(("bound_marker".into(), SU2_BOUND_MARKER.to_string()));
    Ok(sweep)
}

/// Trace of `e^{φρz} Π_{k≤m} e^{(α sinθ)^k W_k(1)}` against `1 + 2cos α`,
/// orders `1..=max_order`.
pub fn so3_trace_experiment(
    alpha: f64,
    theta_values: &[f64],
    max_order: usize,
    grid: Grid,
) -> Result<ErrorSweep> {
    unit_grid_check(&grid)?;
    if max_order < 1 {
        return Err(Error::OrderOutOfRange {
            order: max_order,
            min: 1,
            max: crate::wilcox::MAX_ORDER,
        });
    }
    let orders: Vec<usize> = (1..=max_order).collect();
    let exact = so3_exact_trace(alpha);
    let rows = with_thread_cap(|| {
        theta_values
            .par_iter()
            .map(|&theta| -> Result<(f64, Vec<f64>)> {
                let exp = BellmanExpansion::with_operator(
                    so3_generator(alpha, theta),
                    rho_x(),
                    &so3_operator(alpha, theta),
                    max_order,
                    grid,
                )?;
                let s = alpha * theta.sin();
                let approx = orders
                    .iter()
                    .map(|&m| exp.approximant(s, m).map(|u| u.trace().re))
                    .collect::<Result<Vec<_>>>()?;
                Ok((exact, approx))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut sweep = ErrorSweep::from_rows(
        "theta",
        theta_values.to_vec(),
        orders,
        "trace 1 + 2 cos(alpha)",
        rows,
    );
    sweep.metadata.push(("alpha".into(), format_f64(alpha)));
    sweep.metadata.push(("nodes".into(), grid.n_nodes().to_string()));
    Ok(sweep)
}

/// Dyson terms `P_0 = I, P_1, …, P_K` with `P_k = ∫_0^t A P_{k-1}`.
pub fn dyson_terms(a: &dyn TimeOperator, grid: Grid, k_max: usize) -> Result<Vec<GridSeries>> {
    if k_max < 1 {
        return Err(Error::OrderOutOfRange {
            order: k_max,
            min: 1,
            max: usize::MAX,
        });
    }
    let a_vals = GridSeries::sample(a, grid);
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(GridSeries::new(grid, vec![Matrix::identity(a.dim()); grid.n_nodes()])?);
    for k in 1..=k_max {
        let integrand = GridSeries::new(
            grid,
            a_vals
                .values()
                .iter()
                .zip(out[k - 1].values())
                .map(|(a, p)| a * p)
                .collect(),
        )?;
        out.push(cumint(&integrand));
    }
    Ok(out)
}

/// `I + Σ_k λ^k P_k(t)` at node `t_index`.
pub fn dyson_sum(p: &[GridSeries], t_index: usize, lambda: f64) -> Result<Matrix> {
    let mut out = p[0].at(t_index)?.clone();
    let mut lp = 1.0;
    for pk in &p[1..] {
        lp *= lambda;
        out.axpy_real(lp, pk.at(t_index)?);
    }
    Ok(out)
}

/// `P_n = Σ_{partitions i_1 ≤ … ≤ i_k of n} (Π 1/m_j!) W_{i_1} ⋯ W_{i_k}` at a node.
pub fn dyson_from_wilcox(w: &WilcoxTerms, n: usize, t_index: usize) -> Result<Matrix> {
    if n < 1 || n > w.order() {
        return Err(Error::OrderOutOfRange {
            order: n,
            min: 1,
            max: w.order(),
        });
    }
    let dim = w.w(1).dim();
    let mut out = Matrix::zeros(dim);
    for part in partitions(n)? {
        let coeff = part.coefficient().to_f64().unwrap_or(f64::NAN);
        let mut prod = Matrix::identity(dim);
        for &i in part.parts() {
            prod = &prod * w.w(i).at(t_index)?;
        }
        out.axpy_real(coeff, &prod);
    }
    Ok(out)
}

/// `max_t ‖P_n(t) - Σ_partitions …‖` for `n = 1..=n_max`, reported on a few
/// sample times.
pub fn dyson_check(a: &dyn TimeOperator, grid: Grid, n_max: usize, samples: usize) -> Result<ErrorSweep> {
    let p = dyson_terms(a, grid, n_max)?;
    let w = wilcox_terms(a, grid, n_max)?;
    let last = grid.n_nodes() - 1;
    let idx: Vec<usize> = (0..samples.max(2))
        .map(|k| (k * last) / (samples.max(2) - 1))
        .collect();
    let orders: Vec<usize> = (1..=n_max).collect();
    let rows = idx
        .iter()
        .map(|&j| -> Result<(f64, Vec<f64>)> {
            let errs = orders
                .iter()
                .map(|&n| {
                    let rec = dyson_from_wilcox(&w, n, j)?;
                    Ok((&rec - p[n].at(j)?).max_abs())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((0.0, errs))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sweep = ErrorSweep::from_rows(
        "t",
        idx.iter().map(|&j| grid.node(j)).collect(),
        orders,
        "max-abs difference between P_n and its partition sum of W products",
        rows,
    );
    sweep.metadata.push(("nodes".into(), grid.n_nodes().to_string()));
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_at_simple_points() {
        let t1 = su2_table1(1.0, 0.4, 1).unwrap();
        let (s, c) = (0.8f64).sin_cos();
        let want = &sigma_x().scale_real(s / 2.0) + &sigma_y().scale_real((1.0 - c) / 2.0);
        assert!((&t1 - &want).max_abs() < 1e-15);
        for k in 1..=5 {
            assert!(su2_table1(1.3, 0.0, k).unwrap().max_abs() < 1e-15);
        }
        assert!(su2_table1(0.0, 1.0, 1).is_err());
        assert!(su2_table1(1.0, 1.0, 0).is_err());
        assert!(su2_table1(1.0, 1.0, 6).is_err());
    }

    #[test]
    fn table_matches_numeric_generators() {
        let g = Grid::new(0.0, 1.0, 20_001).unwrap();
        for a in [1.0, 0.6] {
            let w = wilcox_terms(&su2_operator(a, 1.0), g, 5).unwrap();
            for k in 1..=5 {
                for j in (0..g.n_nodes()).step_by(1000) {
                    let want = su2_table1(a, g.node(j), k).unwrap().scale(i_unit());
                    let got = &w.w(k).values()[j];
                    assert!((got - &want).max_abs() < 1e-6, "a={a} k={k} t={}", g.node(j));
                }
            }
        }
    }

    #[test]
    fn operators_are_conjugations() {
        for t in [0.0, 0.3, 1.0] {
            let a = su2_generator(0.8);
            let conj = &(&expm(&a.scale_real(-t)) * &su2_perturbation()) * &expm(&a.scale_real(t));
            assert!((&su2_operator(0.8, 1.0).eval(t) - &conj).max_abs() < 1e-14);

            let g = so3_generator(2.0, 0.4);
            let conj = &(&expm(&g.scale_real(-t)) * &rho_x()) * &expm(&g.scale_real(t));
            assert!((&so3_operator(2.0, 0.4).eval(t) - &conj).max_abs() < 1e-14);
        }
    }

    #[test]
    fn so3_exact_trace_identity() {
        for alpha in [0.3, 1.0, std::f64::consts::PI, 4.0] {
            for theta in lin_space(0.0, std::f64::consts::FRAC_PI_2, 7) {
                let gen = &rho_z().scale_real(alpha * theta.cos()) + &rho_x().scale_real(alpha * theta.sin());
                assert!((expm(&gen).trace().re - so3_exact_trace(alpha)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn so3_closed_form_traces() {
        let g = Grid::new(0.0, 1.0, 100_001).unwrap();
        let thetas = [0.2, 0.7, 1.2];
        for alpha in [std::f64::consts::FRAC_PI_4, 2.0] {
            let sw = so3_trace_experiment(alpha, &thetas, 2, g).unwrap();
            for (i, &th) in thetas.iter().enumerate() {
                assert!((sw.approx[i][0] - so3_trace_order1(alpha, th)).abs() < 1e-10);
                assert!((sw.approx[i][1] - so3_trace_order2(alpha, th)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn so3_zero_tilt_is_exact() {
        let g = Grid::new(0.0, 1.0, 201).unwrap();
        let sw = so3_trace_experiment(1.7, &[0.0], 5, g).unwrap();
        assert!(sw.errors[0].iter().all(|e| *e < 1e-14));
    }

    #[test]
    fn su2_sweep_shape() {
        let g = Grid::new(0.0, 1.0, 2001).unwrap();
        let eps = log_space(0.01, 1.2, 9);
        let sw = su2_sweep(1.0, &eps, 11, g).unwrap();
        assert_eq!(sw.orders, vec![1, 3, 5, 7, 9, 11]);
        assert!(sw.is_finite());
        assert!(sw.metadata.iter().any(|(k, v)| k == "bound_marker" && v == "0.658"));
        let csv = sw.to_csv().to_string_lossy();
        assert!(csv.contains("eps,exact,approx_1,approx_3"));
        assert!(su2_sweep(0.0, &eps, 3, g).is_err());
    }

    #[test]
    fn su2_errors_decrease_with_eps() {
        let g = Grid::new(0.0, 1.0, 20_001).unwrap();
        let eps = log_space(0.02, 0.2, 6);
        let sw = su2_sweep(1.0, &eps, 5, g).unwrap();
        for m in [1, 3, 5] {
            let col = sw.error_column(m).unwrap();
            for w in col.windows(2) {
                assert!(w[0] < w[1], "order {m}: {col:?}");
            }
        }
    }

    #[test]
    fn dyson_constant_operator() {
        let m = &sigma_x().scale_real(0.4) + &sigma_z().scale(Complex64::new(0.0, 0.3));
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        let p = dyson_terms(&OperatorFunction::constant(m.clone()), g, 4).unwrap();
        let mut power = Matrix::identity(2);
        let mut fact = 1.0;
        for k in 1..=4 {
            power = &power * &m;
            fact *= k as f64;
            for (j, t) in g.nodes().enumerate().step_by(10) {
                let want = power.scale_real(t.powi(k as i32) / fact);
                assert!((&p[k].values()[j] - &want).max_abs() < 1e-4 * t.powi(k as i32).max(1e-12));
            }
        }
    }

    #[test]
    fn dyson_low_order_identities() {
        let g = Grid::new(0.0, 1.0, 20_001).unwrap();
        let a = su2_operator(1.0, 1.0);
        let p = dyson_terms(&a, g, 4).unwrap();
        let w = wilcox_terms(&a, g, 4).unwrap();
        for j in (0..g.n_nodes()).step_by(2000) {
            let w1 = &w.w(1).values()[j];
            let w2 = &w.w(2).values()[j];
            let w3 = &w.w(3).values()[j];
            let w4 = &w.w(4).values()[j];
            let p2 = w2 + &(w1 * w1).scale_real(0.5);
            assert!((&p[2].values()[j] - &p2).max_abs() < 1e-6);
            let w1sq = w1 * w1;
            let mut p4 = w4 + &(w1 * w3);
            p4.axpy_real(0.5, &(&w1sq * w2));
            p4.axpy_real(0.5, &(w2 * w2));
            p4.axpy_real(1.0 / 24.0, &(&w1sq * &w1sq));
            assert!((&p[4].values()[j] - &p4).max_abs() < 1e-6);
        }
        let sw = dyson_check(&a, g, 4, 5).unwrap();
        assert!(sw.errors.iter().flatten().all(|e| *e < 1e-6));
    }

    #[test]
    fn dyson_series_matches_exact_propagator() {
        let g = Grid::new(0.0, 1.0, 20_001).unwrap();
        let a = su2_operator(1.0, 1.0);
        let p = dyson_terms(&a, g, 12).unwrap();
        for eps in [0.05, 0.2, 0.3] {
            let got = dyson_sum(&p, g.n_nodes() - 1, eps).unwrap();
            assert!((&got - &su2_exact(1.0, eps)).max_abs() < 1e-8);
        }
    }

    #[test]
    fn thread_cap_runs_closure() {
        assert_eq!(with_thread_cap(|| 7), 7);
    }

    #[test]
    fn spacing_helpers() {
        let v = log_space(0.01, 1.0, 3);
        assert!((v[1] - 0.1).abs() < 1e-15 && (v[2] - 1.0).abs() < 1e-15);
        assert_eq!(lin_space(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(default_theta_values().len(), 181);
    }
}
