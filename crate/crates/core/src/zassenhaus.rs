//! Constant-operator specializations of the Wilcox recursion.
//!
//! For `dU/dt = (X + Y) U` factorized as `e^{tX} e^{W_1(t)} e^{W_2(t)} ⋯`, the
//! interaction-picture generator is a power series in `t`, so the recursion
//! runs over noncommutative polynomials in `X, Y` with an explicit `t` power
//! attached to every word. `C_n(X, Y) = W_n(1)` are the Zassenhaus exponents.
//!
//! The Bellman problem `exp(A + εB) = e^A e^{εC_1} e^{ε²C_2} ⋯` is handled
//! numerically by running the grid sweep on `Ã(t) = e^{-tA} B e^{tA}`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm, Matrix};
use crate::operator::{Conjugated, Grid, TimeOperator};
use crate::perm::{rational, Rational};
use crate::recursion::{factorial, wilcox_recursion, LieElement};
use crate::wilcox::{wilcox_terms, WilcoxTerms};

/// Default cap on symbolic orders.
pub const MAX_SYMBOLIC_ORDER: usize = 8;

/// Letter of the two-generator alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    X,
    Y,
}

/// Word over `{X, Y}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NcWord(Vec<Letter>);

impl NcWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::str::FromStr for NcWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                other => Err(Error::InvalidParameter(format!("letter {other:?} not in {{X, Y}}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(NcWord)
    }
}

impl fmt::Display for NcWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            f.write_str(match l {
                Letter::X => "X",
                Letter::Y => "Y",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for NcWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Rational combination of `t^p · word` terms.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct NcPolynomial {
    terms: BTreeMap<(NcWord, u32), Rational>,
}

impl fmt::Debug for NcPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, ((w, p), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c}) t^{p} {w}")?;
        }
        Ok(())
    }
}

impl NcPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn x() -> Self {
        Self::monomial(NcWord(vec![Letter::X]), 0, Rational::one())
    }

    pub fn y() -> Self {
        Self::monomial(NcWord(vec![Letter::Y]), 0, Rational::one())
    }

    pub fn monomial(word: NcWord, t_power: u32, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(word, t_power, &c);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NcWord, u32, &Rational)> {
        self.terms.iter().map(|((w, p), c)| (w, *p, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &NcWord, t_power: u32) -> Rational {
        self.terms
            .get(&(word.clone(), t_power))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, word: NcWord, t_power: u32, c: &Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((word, t_power)) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, c: &Rational, other: &NcPolynomial) {
        for ((w, p), k) in &other.terms {
            self.add_term(w.clone(), *p, &(c * k));
        }
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        out.add_scaled(c, self);
        out
    }

    pub fn mul(&self, other: &NcPolynomial) -> NcPolynomial {
        let mut out = Self::zero();
        for ((wa, pa), ca) in &self.terms {
            for ((wb, pb), cb) in &other.terms {
                let mut w = wa.0.clone();
                w.extend_from_slice(&wb.0);
                out.add_term(NcWord(w), pa + pb, &(ca * cb));
            }
        }
        out
    }

    pub fn commutator(&self, other: &NcPolynomial) -> NcPolynomial {
        let mut out = self.mul(other);
        out.add_scaled(&-Rational::one(), &other.mul(self));
        out
    }

    /// Multiplies by `t^k`.
    pub fn shift_time(&self, k: u32) -> NcPolynomial {
        let mut out = Self::zero();
        for ((w, p), c) in &self.terms {
            out.add_term(w.clone(), p + k, c);
        }
        out
    }

    /// `∫_0^t (·) ds`, term by term.
    pub fn integrate(&self) -> NcPolynomial {
        let mut out = Self::zero();
        for ((w, p), c) in &self.terms {
            out.add_term(w.clone(), p + 1, &(c / Rational::from_integer(BigInt::from(p + 1))));
        }
        out
    }

    /// Sets `t = value` (exact), dropping the time grading.
    pub fn at_time(&self, value: &Rational) -> NcPolynomial {
        let mut out = Self::zero();
        for ((w, p), c) in &self.terms {
            let mut f = Rational::one();
            for _ in 0..*p {
                f *= value;
            }
            out.add_term(w.clone(), 0, &(c * f));
        }
        out
    }

    /// Substitutes matrices for `X`, `Y` and a number for `t`.
    pub fn eval(&self, x: &Matrix, y: &Matrix, t: f64) -> Result<Matrix> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: y.dim(),
            });
        }
        let mut out = Matrix::zeros(x.dim());
        for ((w, p), c) in &self.terms {
            let mut m = Matrix::identity(x.dim());
            for l in &w.0 {
                m = &m
                    * match l {
                        Letter::X => x,
                        Letter::Y => y,
                    };
            }
            let coeff = c.to_f64().unwrap_or(f64::NAN) * t.powi(*p as i32);
            out.axpy_real(coeff, &m);
        }
        Ok(out)
    }

    /// True when every word has length `n` and `t` power `n`.
    pub fn is_homogeneous(&self, n: usize) -> bool {
        self.terms.keys().all(|(w, p)| w.len() == n && *p as usize == n)
    }

    pub fn to_json(&self) -> Result<NcPolynomialJson> {
        let too_big = |c: &Rational| Error::InvalidParameter(format!("coefficient {c} exceeds i64"));
        Ok(NcPolynomialJson {
            terms: self
                .terms
                .iter()
                .map(|((w, p), c)| {
                    Ok(NcTermJson {
                        word: w.to_string(),
                        t_power: *p,
                        num: c.numer().to_i64().ok_or_else(|| too_big(c))?,
                        den: c.denom().to_i64().ok_or_else(|| too_big(c))?,
                    })
                })
                .collect::<Result<_>>()?,
        })
    }

    pub fn from_json(doc: &NcPolynomialJson) -> Result<Self> {
        let mut out = Self::zero();
        for t in &doc.terms {
            if t.den == 0 {
                return Err(Error::InvalidParameter("zero denominator".into()));
            }
            out.add_term(t.word.parse()?, t.t_power, &rational(t.num, t.den));
        }
        Ok(out)
    }
}

impl LieElement for NcPolynomial {
    fn zero_like(&self) -> Self {
        Self::zero()
    }

    fn bracket(&self, other: &Self) -> Self {
        self.commutator(other)
    }

    fn add_ratio(&mut self, num: i64, den: i64, other: &Self) {
        self.add_scaled(&rational(num, den), other);
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NcTermJson {
    pub word: String,
    pub t_power: u32,
    pub num: i64,
    pub den: i64,
}

/// `{terms: [{word: "XYYX…", t_power, num, den}]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NcPolynomialJson {
    pub terms: Vec<NcTermJson>,
}

/// `ad_x^k(y)`
pub fn ad_pow(x: &NcPolynomial, y: &NcPolynomial, k: usize) -> NcPolynomial {
    let mut acc = y.clone();
    for _ in 0..k {
        acc = x.commutator(&acc);
    }
    acc
}

/// `W_1(t), …, W_N(t)` with `e^{t(X+Y)} = e^{tX} e^{W_1(t)} e^{W_2(t)} ⋯`.
pub fn zassenhaus_terms(order: usize) -> Result<Vec<NcPolynomial>> {
    if !(1..=MAX_SYMBOLIC_ORDER).contains(&order) {
        return Err(Error::OrderOutOfRange {
            order,
            min: 1,
            max: MAX_SYMBOLIC_ORDER,
        });
    }
    let (x, y) = (NcPolynomial::x(), NcPolynomial::y());
    // b_{0,l} = (-1)^{l-1} t^{l-1} ad_X^{l-1} Y / (l-1)!
    let b0: Vec<NcPolynomial> = (1..=order)
        .map(|l| {
            let k = l - 1;
            let sign = if k % 2 == 0 { 1 } else { -1 };
            ad_pow(&x, &y, k)
                .shift_time(k as u32)
                .scaled(&rational(sign, factorial(k)))
        })
        .collect();
    let gens = wilcox_recursion(&b0, |_, wdot| wdot.integrate());
    Ok(gens.into_iter().map(|g| g.w).collect())
}

/// `C_n(X, Y) = W_n(1)` of `e^{X+Y} = e^X e^Y e^{C_2} e^{C_3} ⋯`.
pub fn zassenhaus_exponents(order: usize) -> Result<Vec<NcPolynomial>> {
    let one = Rational::one();
    Ok(zassenhaus_terms(order)?.iter().map(|w| w.at_time(&one)).collect())
}

/// `C_1 = Σ_{k=0}^{K} (-1)^k ad_X^k Y / (k+1)!`, with `X ↔ A`, `Y ↔ B`.
pub fn bellman_c1_series(k_max: usize) -> NcPolynomial {
    let (x, y) = (NcPolynomial::x(), NcPolynomial::y());
    let mut out = NcPolynomial::zero();
    let mut term = y;
    let mut fact = BigInt::one();
    for k in 0..=k_max {
        if k > 0 {
            term = x.commutator(&term);
        }
        fact *= BigInt::from(k + 1);
        let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        out.add_scaled(&Rational::new(sign, fact.clone()), &term);
    }
    out
}

/// Wilcox generators of `Ã(t) = e^{-tA} B e^{tA}` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct BellmanExpansion {
    a: Matrix,
    exp_a: Matrix,
    b: Matrix,
    terms: WilcoxTerms,
}

impl BellmanExpansion {
    /// Builds `Ã` by two matrix exponentials per node.
    pub fn new(a: Matrix, b: Matrix, order: usize, grid: Grid) -> Result<Self> {
        let a_tilde = Conjugated::new(a.clone(), b.clone())?;
        Self::with_operator(a, b, &a_tilde, order, grid)
    }

    /// Uses a caller-supplied closed form of `Ã(t)`.
    pub fn with_operator(
        a: Matrix,
        b: Matrix,
        a_tilde: &dyn TimeOperator,
        order: usize,
        grid: Grid,
    ) -> Result<Self> {
        if a.dim() != b.dim() || a_tilde.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                left: a.dim(),
                right: if a.dim() != b.dim() { b.dim() } else { a_tilde.dim() },
            });
        }
        if grid.t0() != 0.0 || grid.t1() != 1.0 {
            return Err(Error::InvalidGrid("Bellman expansion needs a grid over [0, 1]".into()));
        }
        let terms = wilcox_terms(a_tilde, grid, order)?;
        Ok(Self {
            exp_a: expm(&a),
            a,
            b,
            terms,
        })
    }

    pub fn order(&self) -> usize {
        self.terms.order()
    }

    pub fn terms(&self) -> &WilcoxTerms {
        &self.terms
    }

    /// `W_k(1)`.
    pub fn exponent(&self, k: usize) -> &Matrix {
        self.terms.w(k).last()
    }

    /// `e^A e^{εW_1(1)} ⋯ e^{ε^m W_m(1)}` for `m` in `0..=order`.
    pub fn approximant(&self, eps: f64, m: usize) -> Result<Matrix> {
        let last = self.terms.grid().n_nodes() - 1;
        let v = self.terms.propagator(last, eps, m)?;
        Ok(&self.exp_a * &v)
    }

    /// Approximants for `m = 1..=order`.
    pub fn approximants(&self, eps: f64) -> Result<Vec<Matrix>> {
        (1..=self.order()).map(|m| self.approximant(eps, m)).collect()
    }

    /// `exp(A + εB)`.
    pub fn exact(&self, eps: f64) -> Matrix {
        let mut s = self.a.clone();
        s.axpy_real(eps, &self.b);
        expm(&s)
    }
}

/// Approximants `m = 1..=N` of `exp(A + εB)` and the exact value.
pub fn bellman_numeric(
    a: &Matrix,
    b: &Matrix,
    eps: f64,
    order: usize,
    grid: Grid,
) -> Result<(Vec<Matrix>, Matrix)> {
    let exp = BellmanExpansion::new(a.clone(), b.clone(), order, grid)?;
    Ok((exp.approximants(eps)?, exp.exact(eps)))
}

/// Largest coefficient magnitude, for quick diagnostics.
pub fn max_abs_coefficient(p: &NcPolynomial) -> Rational {
    p.terms
        .values()
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}
