//! Time-dependent coefficient operators `A(t)`, uniform grids and cumulative
//! trapezoid quadrature.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm, Matrix};

/// Anything that can be evaluated as a square matrix at time `t`.
pub trait TimeOperator: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64) -> Matrix;
}

/// Closed catalog of real scalar coefficient functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ScalarFn {
    /// `c`
    Const(f64),
    /// `t^k`
    Power(u32),
    /// `sin(ωt)`
    Sin(f64),
    /// `cos(ωt)`
    Cos(f64),
    /// `exp(at)`
    Exp(f64),
}

impl ScalarFn {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ScalarFn::Const(c) => c,
            ScalarFn::Power(k) => t.powi(k as i32),
            ScalarFn::Sin(w) => (w * t).sin(),
            ScalarFn::Cos(w) => (w * t).cos(),
            ScalarFn::Exp(a) => (a * t).exp(),
        }
    }

    fn params_finite(&self) -> bool {
        match *self {
            ScalarFn::Const(x) | ScalarFn::Sin(x) | ScalarFn::Cos(x) | ScalarFn::Exp(x) => {
                x.is_finite()
            }
            ScalarFn::Power(_) => true,
        }
    }
}

/// `A(t) = Σ_i f_i(t) M_i` with `f_i` drawn from [`ScalarFn`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFunction {
    dim: usize,
    terms: Vec<(ScalarFn, Matrix)>,
}

impl OperatorFunction {
    pub fn new(dim: usize, terms: Vec<(ScalarFn, Matrix)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("operator dimension must be >= 1".into()));
        }
        for (f, m) in &terms {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: m.dim(),
                });
            }
            if !f.params_finite() {
                return Err(Error::NonFinite("scalar function parameters"));
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn constant(m: Matrix) -> Self {
        Self {
            dim: m.dim(),
            terms: vec![(ScalarFn::Const(1.0), m)],
        }
    }

    pub fn terms(&self) -> &[(ScalarFn, Matrix)] {
        &self.terms
    }

    /// Multiplies every term by `c`; used to attach the perturbation parameter.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(f, m)| (*f, m.scale(c))).collect(),
        }
    }
}

/// One `{kind, params, matrix}` entry of an operator document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermConfig {
    #[serde(flatten)]
    pub scalar: ScalarFn,
    /// Row-major `[re, im]` pairs.
    pub matrix: Vec<[f64; 2]>,
}

/// Declarative operator document `{dim, terms}` read from JSON or TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub dim: usize,
    pub terms: Vec<TermConfig>,
}

impl OperatorConfig {
    pub fn build(&self) -> Result<OperatorFunction> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let data = t.matrix.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                Ok((t.scalar, Matrix::new(self.dim, data)?))
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorFunction::new(self.dim, terms)
    }

    pub fn from_operator(op: &OperatorFunction) -> Self {
        Self {
            dim: op.dim,
            terms: op
                .terms
                .iter()
                .map(|(f, m)| TermConfig {
                    scalar: *f,
                    matrix: m.entries().iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }
}

impl TimeOperator for OperatorFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64) -> Matrix {
        let mut out = Matrix::zeros(self.dim);
        for (f, m) in &self.terms {
            out.axpy_real(f.eval(t), m);
        }
        out
    }
}

/// `Ã(t) = exp(-tG) · B · exp(tG)`, evaluated with two exponentials per call.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjugated {
    generator: Matrix,
    inner: Matrix,
}

impl Conjugated {
    pub fn new(generator: Matrix, inner: Matrix) -> Result<Self> {
        if generator.dim() != inner.dim() {
            return Err(Error::DimensionMismatch {
                left: generator.dim(),
                right: inner.dim(),
            });
        }
        Ok(Self { generator, inner })
    }
}

impl TimeOperator for Conjugated {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, t: f64) -> Matrix {
        let left = expm(&self.generator.scale_real(-t));
        let right = expm(&self.generator.scale_real(t));
        &(&left * &self.inner) * &right
    }
}

/// Uniform grid on `[t0, t1]` with `n_nodes` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    t0: f64,
    t1: f64,
    n_nodes: usize,
}

impl Grid {
    pub fn new(t0: f64, t1: f64, n_nodes: usize) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if t1 <= t0 {
            return Err(Error::InvalidGrid(format!("t1 = {t1} must exceed t0 = {t0}")));
        }
        if n_nodes < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {n_nodes}")));
        }
        Ok(Self { t0, t1, n_nodes })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / (self.n_nodes - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k + 1 == self.n_nodes {
            self.t1
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(|k| self.node(k))
    }
}

/// Matrix values sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSeries {
    grid: Grid,
    values: Vec<Matrix>,
}

impl GridSeries {
    pub fn new(grid: Grid, values: Vec<Matrix>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        if let Some(first) = values.first() {
            if let Some(bad) = values.iter().find(|m| m.dim() != first.dim()) {
                return Err(Error::DimensionMismatch {
                    left: first.dim(),
                    right: bad.dim(),
                });
            }
        }
        Ok(Self { grid, values })
    }

    pub fn sample(op: &dyn TimeOperator, grid: Grid) -> Self {
        Self {
            grid,
            values: grid.nodes().map(|t| op.eval(t)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Matrix] {
        &self.values
    }

    pub fn at(&self, k: usize) -> Result<&Matrix> {
        self.values.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            len: self.values.len(),
        })
    }

    pub fn last(&self) -> &Matrix {
        self.values.last().expect("grid has at least two nodes")
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    /// Largest entry modulus over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(Matrix::max_abs).fold(0.0, f64::max)
    }

    /// Node-wise `max_abs(self - other)`.
    pub fn max_abs_diff(&self, other: &GridSeries) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).max_abs())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&Matrix) -> Matrix) -> GridSeries {
        GridSeries {
            grid: self.grid,
            values: self.values.iter().map(f).collect(),
        }
    }
}

/// One trapezoid step: `acc + h/2 (left + right)`.
pub(crate) fn trapezoid_step(acc: &Matrix, left: &Matrix, right: &Matrix, h: f64) -> Matrix {
    let mut out = acc.clone();
    out.axpy_real(0.5 * h, left);
    out.axpy_real(0.5 * h, right);
    out
}

/// Cumulative integral from the first node, zero there, composite trapezoid.
pub fn cumint(s: &GridSeries) -> GridSeries {
    let h = s.grid.step();
    let mut values = Vec::with_capacity(s.values.len());
    let mut acc = Matrix::zeros(s.dim());
    values.push(acc.clone());
    for w in s.values.windows(2) {
        acc = trapezoid_step(&acc, &w[0], &w[1], h);
        values.push(acc.clone());
    }
    GridSeries {
        grid: s.grid,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis::*;

    #[test]
    fn constant_operator_is_constant() {
        let a = &sigma_x() + &sigma_z().scale(Complex64::new(0.0, 0.4));
        let f = OperatorFunction::constant(a.clone());
        for t in [-3.0, 0.0, 0.7, 100.0] {
            assert_eq!(f.eval(t), a);
        }
    }

    #[test]
    fn rotating_field_evaluation() {
        let f = OperatorFunction::new(
            2,
            vec![(ScalarFn::Cos(2.0), sigma_x()), (ScalarFn::Sin(2.0), sigma_y())],
        )
        .unwrap();
        assert_eq!(f.eval(0.0), sigma_x());
        let at = f.eval(std::f64::consts::FRAC_PI_2);
        assert!((&at + &sigma_x()).max_abs() < 1e-15);
    }

    #[test]
    fn operator_rejects_mixed_dims() {
        let err = OperatorFunction::new(2, vec![(ScalarFn::Const(1.0), rho_x())]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 3 });
        assert!(OperatorFunction::new(2, vec![(ScalarFn::Sin(f64::NAN), sigma_x())]).is_err());
    }

    #[test]
    fn conjugated_matches_closed_form() {
        // exp(-iatσz) σx exp(iatσz) = cos(2at)σx + sin(2at)σy
        let a = 0.8;
        let op = Conjugated::new(sigma_z().scale(Complex64::new(0.0, a)), sigma_x()).unwrap();
        for t in [0.0, 0.3, 1.0, 2.5] {
            let mut want = sigma_x().scale_real((2.0 * a * t).cos());
            want.axpy_real((2.0 * a * t).sin(), &sigma_y());
            assert!((&op.eval(t) - &want).max_abs() < 1e-14);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(Grid::new(1.0, 1.0, 10).is_err());
        assert!(Grid::new(0.0, f64::NAN, 10).is_err());
        let g = Grid::new(0.0, 2.0, 5).unwrap();
        assert_eq!(g.step(), 0.5);
        assert_eq!(g.nodes().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn cumint_exact_on_constants_and_lines() {
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        let m = &sigma_x() + &sigma_y().scale_real(3.0);
        let s = GridSeries::sample(&OperatorFunction::constant(m.clone()), g);
        let c = cumint(&s);
        for (k, v) in c.values().iter().enumerate() {
            assert!((v - &m.scale_real(k as f64 / 100.0)).max_abs() < 1e-14);
        }
        let lin = OperatorFunction::new(2, vec![(ScalarFn::Power(1), m.clone())]).unwrap();
        let c = cumint(&GridSeries::sample(&lin, g));
        for (k, v) in c.values().iter().enumerate() {
            let t = g.node(k);
            assert!((v - &m.scale_real(t * t / 2.0)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn cumint_cosine_antiderivative() {
        let g = Grid::new(0.0, 1.0, 100_000).unwrap();
        let f = OperatorFunction::new(2, vec![(ScalarFn::Cos(2.0), sigma_x())]).unwrap();
        let c = cumint(&GridSeries::sample(&f, g));
        for (k, v) in c.values().iter().enumerate() {
            let t = g.node(k);
            assert!((v - &sigma_x().scale_real((2.0 * t).sin() / 2.0)).max_abs() < 5e-10);
        }
    }

    #[test]
    fn cumint_is_linear() {
        let g = Grid::new(0.0, 2.0, 257).unwrap();
        let f = OperatorFunction::new(2, vec![(ScalarFn::Exp(0.3), sigma_x())]).unwrap();
        let h = OperatorFunction::new(2, vec![(ScalarFn::Sin(1.7), sigma_z())]).unwrap();
        let (sf, sh) = (GridSeries::sample(&f, g), GridSeries::sample(&h, g));
        let combo = GridSeries::new(
            g,
            sf.values()
                .iter()
                .zip(sh.values())
                .map(|(a, b)| &a.scale_real(2.0) - &b.scale_real(0.5))
                .collect(),
        )
        .unwrap();
        let lhs = cumint(&combo);
        let (cf, ch) = (cumint(&sf), cumint(&sh));
        for k in 0..g.n_nodes() {
            let rhs = &cf.values()[k].scale_real(2.0) - &ch.values()[k].scale_real(0.5);
            assert!((&lhs.values()[k] - &rhs).max_abs() < 1e-14);
        }
    }

    #[test]
    fn trapezoid_is_second_order() {
        let f = OperatorFunction::new(2, vec![(ScalarFn::Exp(1.5), sigma_x())]).unwrap();
        let exact = ((1.5f64 * 2.0).exp() - 1.0) / 1.5;
        let mut pts = Vec::new();
        for n in [41, 81, 161, 321, 641] {
            let g = Grid::new(0.0, 2.0, n).unwrap();
            let c = cumint(&GridSeries::sample(&f, g));
            let err = (c.last()[(0, 1)].re - exact).abs();
            pts.push((g.step().ln(), err.ln()));
        }
        let slope = crate::fit::least_squares_slope(&pts);
        assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn config_json_round_trip() {
        let doc = r#"{"dim":2,"terms":[
            {"kind":"cos","params":2.0,"matrix":[[0,0],[0,1],[0,1],[0,0]]},
            {"kind":"power","params":1,"matrix":[[0,1],[0,0],[0,0],[0,-1]]}]}"#;
        let cfg: OperatorConfig = serde_json::from_str(doc).unwrap();
        let op = cfg.build().unwrap();
        let at = op.eval(0.5);
        assert!((at[(0, 1)] - Complex64::new(0.0, 1f64.cos())).norm() < 1e-15);
        assert!((at[(1, 1)] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert_eq!(OperatorConfig::from_operator(&op), cfg);
    }

    #[test]
    fn config_rejects_wrong_entry_count() {
        let doc = r#"{"dim":2,"terms":[{"kind":"const","params":1.0,"matrix":[[1,0]]}]}"#;
        let cfg: OperatorConfig = serde_json::from_str(doc).unwrap();
        assert!(matches!(cfg.build(), Err(Error::EntryCount { .. })));
    }
}
