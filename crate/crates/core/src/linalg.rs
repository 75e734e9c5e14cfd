//! Dense small-matrix arithmetic over `Complex64`.
//!
//! Matrices here are tiny (2×2, 3×3 in every worked case) so the storage is a
//! flat row-major `Vec` and products are the naive triple loop.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{})[", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    /// Builds a matrix from `dim²` row-major entries; every entry must be finite.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::EntryCount {
                dim,
                expected: dim * dim,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be >= 1");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: Complex64, other: &Matrix) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn axpy_real(&mut self, c: f64, other: &Matrix) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Frobenius norm, the default submultiplicative norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Bracket without the dimension check; panics on mismatch.
    pub fn bracket(&self, other: &Matrix) -> Matrix {
        let mut out = self * other;
        out -= &(other * self);
        out
    }

    /// `max |(M^† M - I)_{ij}|`, zero for a unitary matrix.
    pub fn unitarity_defect(&self) -> f64 {
        let p = &self.adjoint() * self;
        (&p - &Matrix::identity(self.dim)).max_abs()
    }

    /// `max |(M^† + M)_{ij}|`, zero for a skew-Hermitian matrix.
    pub fn skew_hermitian_defect(&self) -> f64 {
        (&self.adjoint() + self).max_abs()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&Matrix> for Matrix {
    fn add_assign(&mut self, rhs: &Matrix) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&Matrix> for Matrix {
    fn sub_assign(&mut self, rhs: &Matrix) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

fn check_dims(x: &Matrix, y: &Matrix) -> Result<()> {
    if x.dim != y.dim {
        return Err(Error::DimensionMismatch {
            left: x.dim,
            right: y.dim,
        });
    }
    Ok(())
}

/// `[x, y] = xy - yx`.
pub fn commutator(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    check_dims(x, y)?;
    Ok(x.bracket(y))
}

/// `ad_x^k(y)`, with `ad_x^0(y) = y`.
pub fn ad_pow(x: &Matrix, y: &Matrix, k: usize) -> Result<Matrix> {
    check_dims(x, y)?;
    let mut acc = y.clone();
    for _ in 0..k {
        acc = x.bracket(&acc);
    }
    Ok(acc)
}

/// Truncated `d exp_Ω(C) = Σ_{k=0}^{kmax} ad_Ω^k(C) / (k+1)!`.
pub fn dexp_series(omega: &Matrix, c: &Matrix, kmax: usize) -> Result<Matrix> {
    check_dims(omega, c)?;
    let mut term = c.clone();
    let mut sum = c.clone();
    let mut fact = 1.0;
    for k in 1..=kmax {
        term = omega.bracket(&term);
        fact *= (k + 1) as f64;
        sum.axpy_real(1.0 / fact, &term);
    }
    Ok(sum)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// The argument is halved until its Frobenius norm is below 0.5; the series is
/// summed until a term's norm drops under `1e-16` times the running sum's
/// norm, then the result is squared back.
pub fn expm(x: &Matrix) -> Matrix {
    let n = x.dim;
    let norm = x.norm();
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm >= 0.5 {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let a = x.scale_real(0.5f64.powi(squarings as i32));

    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=60 {
        term = &term * &a;
        term = term.scale_real(1.0 / k as f64);
        sum += &term;
        if term.norm() < 1e-16 * sum.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Pauli matrices and the 3D rotation generators used throughout the examples.
pub mod basis {
    use super::Matrix;
    use num_complex::Complex64;

    const O: Complex64 = Complex64::new(0.0, 0.0);
    const ONE: Complex64 = Complex64::new(1.0, 0.0);
    const I: Complex64 = Complex64::new(0.0, 1.0);

    pub fn sigma_x() -> Matrix {
        Matrix::new(2, vec![O, ONE, ONE, O]).unwrap()
    }

    pub fn sigma_y() -> Matrix {
        Matrix::new(2, vec![O, -I, I, O]).unwrap()
    }

    pub fn sigma_z() -> Matrix {
        Matrix::new(2, vec![ONE, O, O, -ONE]).unwrap()
    }

    pub fn rho_x() -> Matrix {
        Matrix::from_real(3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]).unwrap()
    }

    pub fn rho_y() -> Matrix {
        Matrix::from_real(3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]).unwrap()
    }

    pub fn rho_z() -> Matrix {
        Matrix::from_real(3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::basis::*;
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn commutator_of_self_vanishes() {
        let x = &sigma_x() + &sigma_z().scale(c(0.3, -1.0));
        assert!(commutator(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn pauli_commutator() {
        let got = commutator(&sigma_x(), &sigma_y()).unwrap();
        assert!(close(&got, &sigma_z().scale(c(0.0, 2.0)), 0.0));
    }

    #[test]
    fn rotation_generator_commutator() {
        let got = commutator(&rho_z(), &rho_x()).unwrap();
        assert!(close(&got, &rho_y(), 0.0));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = commutator(&sigma_x(), &rho_x()).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 3 });
        assert!(ad_pow(&sigma_x(), &rho_x(), 1).is_err());
        assert!(dexp_series(&sigma_x(), &rho_x(), 1).is_err());
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(Matrix::new(2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(Matrix::new(0, vec![]).is_err());
        assert!(Matrix::from_real(1, &[f64::NAN]).is_err());
        assert!(Matrix::from_real(1, &[f64::INFINITY]).is_err());
    }

    #[test]
    fn ad_pow_cases() {
        let y = &sigma_x() + &sigma_y().scale_real(2.0);
        assert_eq!(ad_pow(&sigma_z(), &y, 0).unwrap(), y);
        // [σz,σx] = 2iσy, [σz, 2iσy] = 4σx
        let got = ad_pow(&sigma_z(), &sigma_x(), 2).unwrap();
        assert!(close(&got, &sigma_x().scale_real(4.0), 0.0));
        let d = Matrix::from_real(2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        let e = Matrix::from_real(2, &[-3.0, 0.0, 0.0, 0.5]).unwrap();
        for k in 1..4 {
            assert!(ad_pow(&d, &e, k).unwrap().is_zero());
        }
    }

    #[test]
    fn dexp_trivial_cases() {
        let cm = &sigma_x() + &sigma_z().scale(c(0.0, 0.7));
        let zero = Matrix::zeros(2);
        assert_eq!(dexp_series(&zero, &cm, 12).unwrap(), cm);
        assert_eq!(dexp_series(&sigma_y(), &cm, 0).unwrap(), cm);
    }

    /// ad_σz acts on σx ± iσy with eigenvalues ±2, so
    /// dexp(σx) = ½[f(2)(σx + iσy) + f(-2)(σx - iσy)], f(z) = Σ z^k/(k+1)!.
    fn dexp_sigma_oracle(kmax: Option<usize>) -> Matrix {
        let f = |z: f64| match kmax {
            Some(km) => {
                let mut s = 0.0;
                let mut fact = 1.0;
                for k in 0..=km {
                    fact *= (k + 1) as f64;
                    s += z.powi(k as i32) / fact;
                }
                s
            }
            None => (z.exp() - 1.0) / z,
        };
        let plus = &sigma_x() + &sigma_y().scale(c(0.0, 1.0));
        let minus = &sigma_x() - &sigma_y().scale(c(0.0, 1.0));
        let mut out = plus.scale_real(0.5 * f(2.0));
        out.axpy_real(0.5 * f(-2.0), &minus);
        out
    }

    #[test]
    fn dexp_matches_eigen_decomposition() {
        let got = dexp_series(&sigma_z(), &sigma_x(), 8).unwrap();
        assert!(close(&got, &dexp_sigma_oracle(Some(8)), 1e-14));
        let got = dexp_series(&sigma_z(), &sigma_x(), 40).unwrap();
        assert!(close(&got, &dexp_sigma_oracle(None), 1e-14));
    }

    #[test]
    fn expm_closed_forms() {
        assert_eq!(expm(&Matrix::zeros(3)), Matrix::identity(3));

        let a = 0.83;
        let got = expm(&sigma_z().scale(c(0.0, a)));
        let want = Matrix::new(
            2,
            vec![c(0.0, a).exp(), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -a).exp()],
        )
        .unwrap();
        assert!(close(&got, &want, 1e-14));

        // exp(i v·σ) = cos v I + i sin v / v (v·σ)
        for v in [[0.3, -1.2, 0.5], [2.0, 1.0, -3.0], [1e-3, 0.0, 2e-3]] {
            let vs = &(&sigma_x().scale_real(v[0]) + &sigma_y().scale_real(v[1]))
                + &sigma_z().scale_real(v[2]);
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let mut want = Matrix::identity(2).scale_real(norm.cos());
            want.axpy(c(0.0, norm.sin() / norm), &vs);
            let got = expm(&vs.scale(c(0.0, 1.0)));
            assert!(close(&got, &want, 1e-13), "v = {v:?}");
        }
    }

    fn arb_matrix(dim: usize, max_entry: f64) -> impl Strategy<Value = Matrix> {
        prop::collection::vec((-max_entry..max_entry, -max_entry..max_entry), dim * dim)
            .prop_map(move |v| Matrix::new(dim, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
    }

    /// Rescales so the Frobenius norm is at most `bound`.
    fn clamp_norm(m: Matrix, bound: f64) -> Matrix {
        let n = m.norm();
        if n > bound {
            m.scale_real(bound / n)
        } else {
            m
        }
    }

    proptest! {
        #[test]
        fn commutator_norm_bound(x in arb_matrix(3, 2.0), y in arb_matrix(3, 2.0)) {
            let lhs = commutator(&x, &y).unwrap().norm();
            prop_assert!(lhs <= 2.0 * x.norm() * y.norm() * (1.0 + 1e-12));
        }

        #[test]
        fn expm_inverse(x in arb_matrix(3, 3.0)) {
            let x = clamp_norm(x, 5.0);
            let p = &expm(&x) * &expm(&(-&x));
            prop_assert!((&p - &Matrix::identity(3)).max_abs() < 1e-12);
        }

        #[test]
        fn expm_of_skew_hermitian_is_unitary(x in arb_matrix(3, 3.0)) {
            let x = clamp_norm(x, 5.0);
            let skew = (&x - &x.adjoint()).scale_real(0.5);
            prop_assert!(expm(&skew).unitarity_defect() < 1e-12);
        }

        #[test]
        fn expm_one_parameter_group(x in arb_matrix(2, 1.0), s in -2.0..2.0f64, u in -2.0..2.0f64) {
            let lhs = expm(&x.scale_real(s + u));
            let rhs = &expm(&x.scale_real(s)) * &expm(&x.scale_real(u));
            prop_assert!((&lhs - &rhs).max_abs() < 1e-12);
        }
    }
}
