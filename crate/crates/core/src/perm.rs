//! Exact Wilcox weights on permutation words.
//!
//! A permutation word `A(σ)` stands for the iterated integral
//! `∫_{t ≥ t_1 ≥ ⋯ ≥ t_n ≥ 0} A(t_{σ(1)}) ⋯ A(t_{σ(n)})`. Products of such
//! integrals are again sums of words ([`word_product`]), which turns the
//! Dyson/Wilcox identity `P_n = Σ_partitions Π W_{i_j} / Π m_j!` into an exact
//! recursion for `W_n` over `S_n` ([`wilcox_weights`]). The right-nested
//! commutator form uses the basis with a fixed rightmost label
//! ([`to_commutator_basis`]).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::operator::{Grid, OperatorFunction};

pub type Rational = BigRational;

/// Largest degree [`wilcox_weights`] will generate (`8! = 40320` words).
pub const MAX_DEGREE: usize = 8;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// A permutation of `{1..n}` written as its letter sequence.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PermWord(Vec<u8>);

fn is_permutation(letters: &[u8]) -> bool {
    let n = letters.len();
    let mut seen = vec![false; n + 1];
    letters.iter().all(|&l| {
        let l = l as usize;
        if l == 0 || l > n || seen[l] {
            false
        } else {
            seen[l] = true;
            true
        }
    })
}

impl PermWord {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if letters.is_empty() || !is_permutation(&letters) {
            return Err(Error::InvalidParameter(format!(
                "{letters:?} is not a permutation of 1..n"
            )));
        }
        Ok(Self(letters))
    }

    /// `(1 2 … n)`, the word of the Dyson term `P_n`.
    pub fn identity(n: usize) -> Self {
        Self((1..=n as u8).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for PermWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A(")?;
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Right-nested commutator word `A[i_1 … i_n]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommWord(Vec<u8>);

impl CommWord {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if letters.len() < 2 || !is_permutation(&letters) {
            return Err(Error::InvalidParameter(format!(
                "{letters:?} is not a commutator word of degree >= 2"
            )));
        }
        Ok(Self(letters))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Debug for CommWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A[")?;
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

/// Homogeneous rational combination of permutation words.
#[derive(Clone, PartialEq, Eq)]
pub struct WeightedPermSum {
    degree: usize,
    terms: BTreeMap<PermWord, Rational>,
}

impl fmt::Debug for WeightedPermSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c}){w:?}")?;
        }
        Ok(())
    }
}

impl WeightedPermSum {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn word(word: PermWord) -> Self {
        let mut s = Self::zero(word.degree());
        s.terms.insert(word, Rational::one());
        s
    }

    /// Builds a sum from `(letters, num, den)` triples.
    pub fn from_terms(degree: usize, terms: &[(&[u8], i64, i64)]) -> Result<Self> {
        let mut s = Self::zero(degree);
        for &(letters, num, den) in terms {
            let w = PermWord::new(letters.to_vec())?;
            s.add_term(w, &rational(num, den))?;
        }
        Ok(s)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PermWord, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &PermWord) -> Rational {
        self.terms.get(w).cloned().unwrap_or_else(Rational::zero)
    }

    /// Sum of all weights.
    pub fn total(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |acc, c| acc + c)
    }

    pub fn add_term(&mut self, w: PermWord, c: &Rational) -> Result<()> {
        if w.degree() != self.degree {
            return Err(Error::DimensionMismatch {
                left: self.degree,
                right: w.degree(),
            });
        }
        self.add_term_unchecked(w, c);
        Ok(())
    }

    fn add_term_unchecked(&mut self, w: PermWord, c: &Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, c: &Rational, other: &WeightedPermSum) -> Result<()> {
        if other.degree != self.degree {
            return Err(Error::DimensionMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        for (w, k) in &other.terms {
            self.add_term_unchecked(w.clone(), &(c * k));
        }
        Ok(())
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.degree);
        for (w, k) in &self.terms {
            out.add_term_unchecked(w.clone(), &(c * k));
        }
        out
    }

    pub fn to_json(&self) -> Result<PermSumJson> {
        Ok(PermSumJson {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| TermJson::new(w.letters().to_vec(), c))
                .collect::<Result<_>>()?,
        })
    }

    pub fn from_json(doc: &PermSumJson) -> Result<Self> {
        let mut out = Self::zero(doc.degree);
        for t in &doc.terms {
            out.add_term(PermWord::new(t.word.clone())?, &t.rational()?)?;
        }
        Ok(out)
    }
}

/// One `{word, num, den}` entry of the JSON encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub word: Vec<u8>,
    pub num: i64,
    pub den: i64,
}

impl TermJson {
    fn new(word: Vec<u8>, c: &Rational) -> Result<Self> {
        let too_big = || Error::InvalidParameter(format!("coefficient {c} exceeds i64"));
        Ok(Self {
            word,
            num: c.numer().to_i64().ok_or_else(too_big)?,
            den: c.denom().to_i64().ok_or_else(too_big)?,
        })
    }

    fn rational(&self) -> Result<Rational> {
        if self.den == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        Ok(rational(self.num, self.den))
    }
}

/// `{degree, terms: [{word, num, den}]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermSumJson {
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

/// Commutator-basis expansion with its fixed rightmost label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutatorJson {
    pub degree: usize,
    pub fixed_last: u8,
    pub terms: Vec<TermJson>,
}

pub fn commutator_json(
    degree: usize,
    fixed_last: u8,
    terms: &[(CommWord, Rational)],
) -> Result<CommutatorJson> {
    Ok(CommutatorJson {
        degree,
        fixed_last,
        terms: terms
            .iter()
            .map(|(w, c)| TermJson::new(w.letters().to_vec(), c))
            .collect::<Result<_>>()?,
    })
}

/// Visits every `k`-subset of `{1..n}` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[u8])) {
    let mut idx: Vec<u8> = (1..=k as u8).collect();
    loop {
        f(&idx);
        // rightmost position that can still be incremented; position p tops out at n-k+1+p
        let mut i = k;
        while i > 0 && idx[i - 1] as usize == n - k + i {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Product of iterated integrals as a sum of words of degree `p + q`.
///
/// For single words `u` (degree `p`) and `v` (degree `q`), every `p`-subset
/// `S` of `{1..p+q}` contributes the word `u` relabelled increasingly onto `S`
/// followed by `v` relabelled increasingly onto the complement.
pub fn word_product(u: &WeightedPermSum, v: &WeightedPermSum) -> WeightedPermSum {
    let (p, q) = (u.degree, v.degree);
    let n = p + q;
    let mut out = WeightedPermSum::zero(n);
    if u.is_empty() || v.is_empty() {
        return out;
    }
    let mut comp = vec![0u8; q];
    let mut letters = vec![0u8; n];
    for_each_subset(n, p, |s| {
        let mut j = 0;
        let mut si = 0;
        for x in 1..=n as u8 {
            if si < p && s[si] == x {
                si += 1;
            } else {
                comp[j] = x;
                j += 1;
            }
        }
        for (wu, cu) in &u.terms {
            for (slot, &l) in letters.iter_mut().zip(&wu.0) {
                *slot = s[l as usize - 1];
            }
            for (wv, cv) in &v.terms {
                for (slot, &l) in letters[p..].iter_mut().zip(&wv.0) {
                    *slot = comp[l as usize - 1];
                }
                out.add_term_unchecked(PermWord(letters.clone()), &(cu * cv));
            }
        }
    });
    out
}

/// Integer partition with nondecreasing parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) || parts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter(format!(
                "{parts:?} is not a nondecreasing list of positive parts"
            )));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn sum(&self) -> usize {
        self.parts.iter().sum()
    }

    /// `(part value, multiplicity)` in increasing part order.
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((v, m)) if *v == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// `Π_j 1/m_j!` over distinct part values.
    pub fn coefficient(&self) -> Rational {
        let den: i64 = self
            .multiplicities()
            .iter()
            .map(|&(_, m)| crate::recursion::factorial(m))
            .product();
        rational(1, den)
    }
}

/// All partitions of `n`, ordered by number of parts and then
/// lexicographically: `(5), (1,4), (2,3), (1,1,3), (1,2,2), …`.
pub fn partitions(n: usize) -> Result<Vec<Partition>> {
    if n < 1 {
        return Err(Error::InvalidParameter("partitions need n >= 1".into()));
    }
    fn rec(remaining: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(cur.clone());
            return;
        }
        for p in min..=remaining {
            cur.push(p);
            rec(remaining - p, p, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    rec(n, 1, &mut Vec::new(), &mut all);
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(all.into_iter().map(|parts| Partition { parts }).collect())
}

/// `Σ_partitions coeff · W_{i_1} ∗ ⋯ ∗ W_{i_k}`; `ws[i-1]` holds `W_i`.
/// With `skip_trivial` the one-part partition `(n)` is left out.
fn partition_sum(ws: &[WeightedPermSum], n: usize, skip_trivial: bool) -> Result<WeightedPermSum> {
    let mut acc = WeightedPermSum::zero(n);
    for part in partitions(n)? {
        if skip_trivial && part.parts.len() == 1 {
            continue;
        }
        let mut prod = ws[part.parts[0] - 1].clone();
        for &i in &part.parts[1..] {
            prod = word_product(&prod, &ws[i - 1]);
        }
        acc.add_scaled(&part.coefficient(), &prod)?;
    }
    Ok(acc)
}

/// `W_1, …, W_n` as weighted permutation sums.
pub fn wilcox_weights_upto(n: usize) -> Result<Vec<WeightedPermSum>> {
    if !(1..=MAX_DEGREE).contains(&n) {
        return Err(Error::OrderOutOfRange {
            order: n,
            min: 1,
            max: MAX_DEGREE,
        });
    }
    let mut ws: Vec<WeightedPermSum> = Vec::with_capacity(n);
    for m in 1..=n {
        let mut w = WeightedPermSum::word(PermWord::identity(m));
        if m > 1 {
            let rest = partition_sum(&ws, m, true)?;
            w.add_scaled(&-Rational::one(), &rest)?;
        }
        ws.push(w);
    }
    Ok(ws)
}

/// `W_n = Σ_σ ω_σ A(σ)` with exact rational weights.
pub fn wilcox_weights(n: usize) -> Result<WeightedPermSum> {
    Ok(wilcox_weights_upto(n)?.pop().expect("n >= 1"))
}

/// Re-assembles `P_n` from `W_1..W_n` over all partitions of `n`.
pub fn dyson_reconstruction(ws: &[WeightedPermSum], n: usize) -> Result<WeightedPermSum> {
    if n == 0 || n > ws.len() {
        return Err(Error::OrderOutOfRange {
            order: n,
            min: 1,
            max: ws.len(),
        });
    }
    partition_sum(ws, n, false)
}

/// Expands `[A(t_{i_1}), [A(t_{i_2}), … [A(t_{i_{n-1}}), A(t_{i_n})]…]]` into
/// signed words.
pub fn comm_to_words(c: &CommWord) -> WeightedPermSum {
    let n = c.degree();
    // innermost letter first
    let mut cur: Vec<(Vec<u8>, i64)> = vec![(vec![c.0[n - 1]], 1)];
    for &l in c.0[..n - 1].iter().rev() {
        let mut next = Vec::with_capacity(cur.len() * 2);
        for (w, s) in &cur {
            let mut left = Vec::with_capacity(w.len() + 1);
            left.push(l);
            left.extend_from_slice(w);
            next.push((left, *s));
            let mut right = w.clone();
            right.push(l);
            next.push((right, -*s));
        }
        cur = next;
    }
    let mut out = WeightedPermSum::zero(n);
    for (w, s) in cur {
        out.add_term_unchecked(PermWord(w), &Rational::from_integer(BigInt::from(s)));
    }
    out
}

fn permutations_of(items: &[u8]) -> Vec<Vec<u8>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations_of(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Rewrites `w` over right-nested commutators ending in `fixed_last`.
///
/// The coefficient of `A[τ, fixed_last]` is the weight of the word
/// `(τ, fixed_last)`; the result is expanded back and compared with `w`, and
/// a mismatch (an element outside the Lie subspace) is an error.
pub fn to_commutator_basis(
    w: &WeightedPermSum,
    fixed_last: u8,
) -> Result<Vec<(CommWord, Rational)>> {
    let n = w.degree();
    if n < 2 {
        return Err(Error::InvalidParameter("commutator form needs degree >= 2".into()));
    }
    if fixed_last == 0 || fixed_last as usize > n {
        return Err(Error::InvalidParameter(format!(
            "fixed label {fixed_last} outside 1..={n}"
        )));
    }
    let rest: Vec<u8> = (1..=n as u8).filter(|&l| l != fixed_last).collect();
    let mut out = Vec::new();
    let mut check = WeightedPermSum::zero(n);
    for mut tau in permutations_of(&rest) {
        tau.push(fixed_last);
        let coeff = w.coefficient(&PermWord(tau.clone()));
        if coeff.is_zero() {
            continue;
        }
        let cw = CommWord(tau);
        check.add_scaled(&coeff, &comm_to_words(&cw))?;
        out.push((cw, coeff));
    }
    if &check != w {
        return Err(Error::NotRepresentable(format!(
            "degree-{n} element is not a Lie element (fixed label {fixed_last})"
        )));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Re-expands a commutator list into permutation words.
pub fn commutators_to_words(n: usize, terms: &[(CommWord, Rational)]) -> Result<WeightedPermSum> {
    let mut out = WeightedPermSum::zero(n);
    for (c, k) in terms {
        out.add_scaled(k, &comm_to_words(c))?;
    }
    Ok(out)
}

fn scalar_cumint(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(acc);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Numerically evaluates `Σ_σ ω_σ A(σ)` at the final grid time.
///
/// Each word's integrand is expanded over the operator's scalar terms, so only
/// one-dimensional nested trapezoid integrals of products of scalar functions
/// are needed; they are shared between all words.
pub fn evaluate_on_grid(w: &WeightedPermSum, op: &OperatorFunction, grid: Grid) -> Result<Matrix> {
    let n = w.degree();
    let terms = op.terms();
    let dim = crate::operator::TimeOperator::dim(op);
    let mut out = Matrix::zeros(dim);
    if terms.is_empty() || w.is_empty() {
        return Ok(out);
    }
    let h = grid.step();
    let samples: Vec<Vec<f64>> = terms
        .iter()
        .map(|(f, _)| grid.nodes().map(|t| f.eval(t)).collect())
        .collect();
    let n_terms = terms.len();
    let n_assign = n_terms.pow(n as u32);
    // assignment a encodes term index per time label 1..n (base n_terms digits)
    for a in 0..n_assign {
        let mut choice = vec![0usize; n];
        let mut x = a;
        for c in choice.iter_mut() {
            *c = x % n_terms;
            x /= n_terms;
        }
        // innermost time t_n first
        let mut g = scalar_cumint(&samples[choice[n - 1]], h);
        for label in (0..n - 1).rev() {
            let prod: Vec<f64> = samples[choice[label]]
                .iter()
                .zip(&g)
                .map(|(f, gv)| f * gv)
                .collect();
            g = scalar_cumint(&prod, h);
        }
        let weight = *g.last().expect("grid has nodes");
        if weight == 0.0 {
            continue;
        }
        let mut word_sum = Matrix::zeros(dim);
        for (word, coeff) in w.terms() {
            let mut m = terms[choice[word.0[0] as usize - 1]].1.clone();
            for &l in &word.0[1..] {
                m = &m * &terms[choice[l as usize - 1]].1;
            }
            word_sum.axpy_real(coeff.to_f64().unwrap_or(f64::NAN), &m);
        }
        out.axpy_real(weight, &word_sum);
    }
    Ok(out)
}

/// Absolute value of the largest weight, handy for sanity checks.
pub fn max_abs_weight(w: &WeightedPermSum) -> Rational {
    w.terms()
        .map(|(_, c)| c.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}
