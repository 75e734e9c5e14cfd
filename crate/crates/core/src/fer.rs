//! Fer expansion and its modified (intermediate) variant on a grid.
//!
//! Each transformation is completed over the whole grid before the next
//! residual is formed: `Ω_n = ∫ B_{n-1}` and
//! `B_n = Σ_{k≥1} (-1)^k k/(k+1)! ad_{Ω_n}^k B_{n-1}`.

use crate::error::{Error, Result};
use crate::linalg::{expm, Matrix};
use crate::operator::{cumint, Grid, GridSeries, TimeOperator};

/// `∫_0^t ‖A(s)‖ ds` below this value guarantees convergence.
pub const FER_CONVERGENCE_BOUND: f64 = 0.8604065;
pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_KMAX: usize = 40;

/// `Σ_{k=1}^{kmax} coef(k) ad_Ω^k X`, stopping once a term is negligible
/// against the running sum.
pub fn ad_series(
    omega: &Matrix,
    x: &Matrix,
    coef: impl Fn(usize) -> f64,
    tol: f64,
    kmax: usize,
) -> Matrix {
    let mut acc = Matrix::zeros(x.dim());
    let mut ad = x.clone();
    for k in 1..=kmax {
        ad = omega.bracket(&ad);
        if ad.is_zero() {
            break;
        }
        let term = ad.scale_real(coef(k));
        let term_norm = term.norm();
        acc += &term;
        if term_norm < tol * acc.norm() {
            break;
        }
    }
    acc
}

fn factorial_f64(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `(-1)^k k / (k+1)!`
fn fer_coef(k: usize) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * k as f64 / factorial_f64(k + 1)
}

fn check_series_params(tol: f64, kmax: usize) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if kmax < 1 {
        return Err(Error::InvalidParameter("kmax must be at least 1".into()));
    }
    Ok(())
}

/// Fer exponents `Ω_1..Ω_n` and residuals `B_0..B_n`.
#[derive(Debug, Clone)]
pub struct FerState {
    omegas: Vec<GridSeries>,
    b_series: Vec<GridSeries>,
    tol: f64,
    kmax: usize,
}

impl FerState {
    pub fn n_transforms(&self) -> usize {
        self.omegas.len()
    }

    /// `Ω_n` for `n` in `1..=n_transforms`.
    pub fn omega(&self, n: usize) -> &GridSeries {
        &self.omegas[n - 1]
    }

    /// `B_n` for `n` in `0..=n_transforms`.
    pub fn b(&self, n: usize) -> &GridSeries {
        &self.b_series[n]
    }

    pub fn omegas(&self) -> &[GridSeries] {
        &self.omegas
    }

    pub fn b_series(&self) -> &[GridSeries] {
        &self.b_series
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// `e^{Ω_1} ⋯ e^{Ω_m}` at node `t_index`.
    pub fn propagator(&self, t_index: usize, m: usize) -> Result<Matrix> {
        exponential_product(&self.omegas, t_index, m)
    }
}

/// `e^{Ω_1(t)} ⋯ e^{Ω_m(t)}` at node `t_index`.
pub fn exponential_product(omegas: &[GridSeries], t_index: usize, m: usize) -> Result<Matrix> {
    if m > omegas.len() {
        return Err(Error::OrderOutOfRange {
            order: m,
            min: 0,
            max: omegas.len(),
        });
    }
    let dim = omegas.first().map_or(1, GridSeries::dim);
    let mut out = Matrix::identity(dim);
    for om in &omegas[..m] {
        out = &out * &expm(om.at(t_index)?);
    }
    Ok(out)
}

/// Runs `n_transforms` Fer transformations of `dx/dt = A(t) x`.
pub fn fer_terms(
    a: &dyn TimeOperator,
    grid: Grid,
    n_transforms: usize,
    tol: f64,
    kmax: usize,
) -> Result<FerState> {
    if n_transforms < 1 {
        return Err(Error::OrderOutOfRange {
            order: n_transforms,
            min: 1,
            max: usize::MAX,
        });
    }
    check_series_params(tol, kmax)?;
    let mut b_series = vec![GridSeries::sample(a, grid)];
    let mut omegas = Vec::with_capacity(n_transforms);
    for _ in 0..n_transforms {
        let b_prev = b_series.last().expect("B_0 present");
        let omega = cumint(b_prev);
        let next: Vec<Matrix> = omega
            .values()
            .iter()
            .zip(b_prev.values())
            .map(|(om, b)| ad_series(om, b, fer_coef, tol, kmax))
            .collect();
        b_series.push(GridSeries::new(grid, next)?);
        omegas.push(omega);
    }
    Ok(FerState {
        omegas,
        b_series,
        tol,
        kmax,
    })
}

/// Three-factor modified Fer expansion.
#[derive(Debug, Clone)]
pub struct ModifiedFer {
    omegas: [GridSeries; 3],
    omega2_dot: GridSeries,
}

impl ModifiedFer {
    /// `Ω_n` for `n` in `1..=3`.
    pub fn omega(&self, n: usize) -> &GridSeries {
        &self.omegas[n - 1]
    }

    pub fn omegas(&self) -> &[GridSeries] {
        &self.omegas
    }

    pub fn omega2_dot(&self) -> &GridSeries {
        &self.omega2_dot
    }

    /// `e^{Ω_1} ⋯ e^{Ω_m}` at node `t_index`, `m ≤ 3`.
    pub fn propagator(&self, t_index: usize, m: usize) -> Result<Matrix> {
        exponential_product(&self.omegas, t_index, m)
    }

    /// Residual after the second transformation,
    /// `B_2 = Σ_{k≥1} (-1)^k/(k+1)! ((k+1) ad_{Ω_2}^k B_1 - ad_{Ω_2}^k Ω̇_2)`,
    /// with the full Fer residual `B_1` of `B_0 = A`.
    pub fn residual_b2(&self, a: &dyn TimeOperator, tol: f64, kmax: usize) -> Result<GridSeries> {
        check_series_params(tol, kmax)?;
        let grid = *self.omegas[0].grid();
        let vals = grid
            .nodes()
            .enumerate()
            .map(|(j, t)| {
                let om1 = &self.omegas[0].values()[j];
                let om2 = &self.omegas[1].values()[j];
                let b1 = ad_series(om1, &a.eval(t), fer_coef, tol, kmax);
                let coef = |k: usize| {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign / factorial_f64(k + 1)
                };
                let from_b1 = ad_series(om2, &b1, |k| coef(k) * (k + 1) as f64, tol, kmax);
                let from_dot = ad_series(om2, &self.omega2_dot.values()[j], coef, tol, kmax);
                &from_b1 - &from_dot
            })
            .collect();
        GridSeries::new(grid, vals)
    }
}

/// `Ω_1, Ω_2, Ω_3` of the modified Fer expansion:
///
/// ```text
/// Ω̇_1 = A
/// Ω̇_2 = -½ ad_{Ω_1} A + ⅓ ad_{Ω_1}^2 A
/// Ω̇_3 = -ad_{Ω_2} B_1^{[4]} + ½ ad_{Ω_2} Ω̇_2 + ½ ad_{Ω_2}^2 B_1^{[2]} - ⅙ ad_{Ω_2}^2 Ω̇_2
/// B_1^{[j]} = Σ_{k=1}^{j} (-1)^k k/(k+1)! ad_{Ω_1}^k A
/// ```
pub fn modified_fer_terms(a: &dyn TimeOperator, grid: Grid) -> Result<ModifiedFer> {
    let b0 = GridSeries::sample(a, grid);
    let omega1 = cumint(&b0);

    // ad_{Ω_1}^k A for k = 1..4 at every node
    let ads: Vec<[Matrix; 4]> = omega1
        .values()
        .iter()
        .zip(b0.values())
        .map(|(om, a)| {
            let a1 = om.bracket(a);
            let a2 = om.bracket(&a1);
            let a3 = om.bracket(&a2);
            let a4 = om.bracket(&a3);
            [a1, a2, a3, a4]
        })
        .collect();

    let partial_b1 = |ad: &[Matrix; 4], j: usize| {
        let mut acc = Matrix::zeros(a.dim());
        for (k, term) in ad.iter().enumerate().take(j) {
            acc.axpy_real(fer_coef(k + 1), term);
        }
        acc
    };

    let omega2_dot = GridSeries::new(
        grid,
        ads.iter().map(|ad| &ad[0].scale_real(-0.5) + &ad[1].scale_real(1.0 / 3.0)).collect(),
    )?;
    let omega2 = cumint(&omega2_dot);

    let omega3_dot = GridSeries::new(
        grid,
        ads.iter()
            .enumerate()
            .map(|(j, ad)| {
                let om2 = &omega2.values()[j];
                let od2 = &omega2_dot.values()[j];
                let b4 = partial_b1(ad, 4);
                let b2 = partial_b1(ad, 2);
                let mut out = om2.bracket(&b4).scale_real(-1.0);
                out.axpy_real(0.5, &om2.bracket(od2));
                out.axpy_real(0.5, &om2.bracket(&om2.bracket(&b2)));
                out.axpy_real(-1.0 / 6.0, &om2.bracket(&om2.bracket(od2)));
                out
            })
            .collect(),
    )?;
    let omega3 = cumint(&omega3_dot);

    Ok(ModifiedFer {
        omegas: [omega1, omega2, omega3],
        omega2_dot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis::*;
    use crate::operator::{OperatorFunction, ScalarFn};
    use crate::wilcox::wilcox_terms;
    use num_complex::Complex64;

    fn su2_rotating(a: f64, lambda: f64) -> OperatorFunction {
        let i = Complex64::new(0.0, lambda);
        OperatorFunction::new(
            2,
            vec![
                (ScalarFn::Cos(2.0 * a), sigma_x().scale(i)),
                (ScalarFn::Sin(2.0 * a), sigma_y().scale(i)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn coefficients() {
        assert_eq!(fer_coef(1), -0.5);
        assert!((fer_coef(2) - 1.0 / 3.0).abs() < 1e-16);
        assert!((fer_coef(3) + 0.125).abs() < 1e-16);
    }

    #[test]
    fn parameter_validation() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        let a = su2_rotating(1.0, 1.0);
        assert!(fer_terms(&a, g, 0, 1e-14, 40).is_err());
        assert!(fer_terms(&a, g, 2, 0.0, 40).is_err());
        assert!(fer_terms(&a, g, 2, -1.0, 40).is_err());
        assert!(fer_terms(&a, g, 2, 1e-14, 0).is_err());
        let st = fer_terms(&a, g, 2, 1e-14, 40).unwrap();
        assert!(st.propagator(3, 3).is_err());
    }

    #[test]
    fn constant_operator() {
        let m = &sigma_x().scale(Complex64::new(0.0, 0.8)) + &sigma_z().scale_real(0.3);
        let g = Grid::new(0.0, 2.0, 101).unwrap();
        let a = OperatorFunction::constant(m.clone());
        let st = fer_terms(&a, g, 3, DEFAULT_TOL, DEFAULT_KMAX).unwrap();
        for (k, t) in g.nodes().enumerate() {
            assert!((&st.omega(1).values()[k] - &m.scale_real(t)).max_abs() < 1e-14);
        }
        assert!(st.b(1).max_abs() < 1e-14);
        assert!(st.omega(2).max_abs() < 1e-14 && st.omega(3).max_abs() < 1e-14);
        let mf = modified_fer_terms(&a, g).unwrap();
        assert!(mf.omega(2).max_abs() < 1e-14 && mf.omega(3).max_abs() < 1e-14);
    }

    #[test]
    fn initial_values_and_b0() {
        let g = Grid::new(0.0, 1.0, 51).unwrap();
        let a = su2_rotating(1.0, 1.0);
        let st = fer_terms(&a, g, 3, DEFAULT_TOL, DEFAULT_KMAX).unwrap();
        for n in 1..=3 {
            assert!(st.omega(n).values()[0].is_zero());
        }
        assert_eq!(st.b(0), &GridSeries::sample(&a, g));
    }

    #[test]
    fn first_exponent_matches_wilcox() {
        let g = Grid::new(0.0, 1.0, 501).unwrap();
        let a = su2_rotating(1.0, 0.7);
        let st = fer_terms(&a, g, 1, DEFAULT_TOL, DEFAULT_KMAX).unwrap();
        let w = wilcox_terms(&a, g, 1).unwrap();
        assert_eq!(st.omega(1), w.w(1));
    }

    #[test]
    fn modified_second_exponent_is_wilcox_pair() {
        let g = Grid::new(0.0, 1.0, 2001).unwrap();
        let a = su2_rotating(1.0, 1.0);
        let mf = modified_fer_terms(&a, g).unwrap();
        let w = wilcox_terms(&a, g, 3).unwrap();
        for k in 0..g.n_nodes() {
            let sum = &w.w(2).values()[k] + &w.w(3).values()[k];
            assert!((&mf.omega(2).values()[k] - &sum).max_abs() < 1e-8);
        }
    }

    #[test]
    fn exponents_are_skew_hermitian() {
        let g = Grid::new(0.0, 1.0, 1001).unwrap();
        let a = su2_rotating(1.0, 1.0);
        let st = fer_terms(&a, g, 4, DEFAULT_TOL, DEFAULT_KMAX).unwrap();
        let mf = modified_fer_terms(&a, g).unwrap();
        for om in st.omegas().iter().chain(mf.omegas()) {
            for v in om.values() {
                assert!(v.skew_hermitian_defect() < 1e-10);
            }
        }
    }

    #[test]
    fn residuals_shrink_inside_convergence_region() {
        // ∫‖λA‖ = λ√2 with the Frobenius norm of iσx
        let lambda = 0.5;
        assert!(lambda * 2f64.sqrt() < FER_CONVERGENCE_BOUND);
        let g = Grid::new(0.0, 1.0, 2001).unwrap();
        let st = fer_terms(&su2_rotating(1.0, lambda), g, 4, DEFAULT_TOL, DEFAULT_KMAX).unwrap();
        let norms: Vec<f64> = (0..=4).map(|n| st.b(n).max_abs()).collect();
        for w in norms.windows(2) {
            assert!(w[1] < w[0], "{norms:?}");
        }
    }

    fn residual_slopes(op: impl Fn(f64) -> OperatorFunction, lambdas: &[f64]) -> [f64; 3] {
        let g = Grid::new(0.0, 1.0, 4001).unwrap();
        let mut norms = [Vec::new(), Vec::new(), Vec::new()];
        for &l in lambdas {
            let a = op(l);
            let st = fer_terms(&a, g, 2, DEFAULT_TOL, DEFAULT_KMAX).unwrap();
            norms[0].push(st.b(1).max_abs());
            norms[1].push(st.b(2).max_abs());
            let mf = modified_fer_terms(&a, g).unwrap();
            norms[2].push(mf.residual_b2(&a, DEFAULT_TOL, DEFAULT_KMAX).unwrap().max_abs());
        }
        norms.map(|n| crate::fit::loglog_slope(lambdas, &n))
    }

    #[test]
    fn residual_scaling_planar_drive() {
        // The λ² part of B_1 is ∝ σz at every t, so the λ⁴ part of B_2 vanishes.
        let [s1, s2, s3] = residual_slopes(|l| su2_rotating(1.0, l), &[0.2, 0.1, 0.05, 0.025]);
        assert!((s1 - 2.0).abs() < 0.1, "B_1 slope {s1}");
        assert!((s2 - 5.0).abs() < 0.2, "B_2 slope {s2}");
        assert!((s3 - 5.0).abs() < 0.2, "modified B_2 slope {s3}");
    }

    #[test]
    fn residual_scaling_generic_drive() {
        let i = Complex64::new(0.0, 1.0);
        let op = |l: f64| {
            OperatorFunction::new(
                2,
                vec![
                    (ScalarFn::Cos(2.0), sigma_x().scale(i * l)),
                    (ScalarFn::Sin(2.0), sigma_y().scale(i * l)),
                    (ScalarFn::Power(1), sigma_z().scale(i * l * 0.7)),
                ],
            )
            .unwrap()
        };
        let [s1, s2, s3] = residual_slopes(op, &[0.1, 0.05, 0.025, 0.0125]);
        assert!((s1 - 2.0).abs() < 0.1, "B_1 slope {s1}");
        assert!((s2 - 4.0).abs() < 0.2, "B_2 slope {s2}");
        assert!((s3 - 4.0).abs() < 0.2, "modified B_2 slope {s3}");
    }
}
