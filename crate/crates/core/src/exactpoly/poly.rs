use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{ExactPolyError, NVARS, Q};

/// Exponent vector of a monomial in `x1..x5`.
///
/// Ordered graded-lexicographically with `x1 > x2 > ... > x5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Monomial(pub [u8; NVARS]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; NVARS]);

    pub fn var(i: usize) -> Self {
        let mut e = [0; NVARS];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| u32::from(e)).sum()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut e = [0; NVARS];
        for (k, v) in e.iter_mut().enumerate() {
            *v = self.0[k] + o.0[k];
        }
        Monomial(e)
    }

    pub fn divides(&self, o: &Self) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a <= b)
    }

    /// `o / self`, assuming `self.divides(o)`.
    pub fn quotient_of(&self, o: &Self) -> Self {
        let mut e = [0; NVARS];
        for (k, v) in e.iter_mut().enumerate() {
            *v = o.0[k] - self.0[k];
        }
        Monomial(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree()
            .cmp(&o.degree())
            .then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Sparse polynomial in `x1..x5` with exact rational coefficients.
///
/// No zero coefficients are ever stored; the zero polynomial is the empty map.
#[derive(Clone, PartialEq, Eq, Default, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Q>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::ONE, c);
        p
    }

    /// The variable `x_{i+1}` (zero-based index).
    pub fn var(i: usize) -> Self {
        Self::monomial(Monomial::var(i), Q::one())
    }

    pub fn monomial(m: Monomial, c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in increasing monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// The common degree of all terms, if the polynomial is homogeneous and
    /// nonzero.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(Monomial::degree);
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Q {
        self.leading_term()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    /// Scale so the leading coefficient is one. Zero stays zero.
    pub fn monic(&self) -> Self {
        match self.leading_term() {
            None => Self::zero(),
            Some((_, c)) => self.scale(&(Q::one() / c)),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn evaluate(&self, p: &[Q]) -> Q {
        assert_eq!(p.len(), NVARS);
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (k, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &p[k];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn evaluate_f64(&self, p: &[f64]) -> f64 {
        assert_eq!(p.len(), NVARS);
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = crate::linalg::Field::to_f64(c);
                for (k, &e) in m.0.iter().enumerate() {
                    t *= p[k].powi(i32::from(e));
                }
                t
            })
            .sum()
    }

    /// Euclidean norm of the coefficient vector, as `f64`.
    pub fn coeff_norm_f64(&self) -> f64 {
        self.terms
            .values()
            .map(|c| crate::linalg::Field::to_f64(c).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Degree in variable `v`; zero for the zero polynomial.
    pub fn degree_in(&self, v: usize) -> u8 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    pub fn involves(&self, v: usize) -> bool {
        self.terms.keys().any(|m| m.0[v] > 0)
    }

    /// Coefficients as a univariate polynomial in `v`: entry `i` is the
    /// coefficient of `v^i`, a polynomial free of `v`.
    pub fn coefficients_in(&self, v: usize) -> Vec<Polynomial> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![Polynomial::zero(); d + 1];
        for (m, c) in &self.terms {
            let mut e = *m;
            let k = e.0[v] as usize;
            e.0[v] = 0;
            out[k].add_term(e, c.clone());
        }
        out
    }

    /// Substitute each variable by a polynomial.
    pub fn substitute(&self, images: &[Polynomial]) -> Polynomial {
        assert_eq!(images.len(), NVARS);
        let mut acc = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(c.clone());
            for (k, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t = &t * &images[k];
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Exact quotient `self / g`.
    pub fn divide_exact(&self, g: &Polynomial) -> Result<Polynomial, ExactPolyError> {
        let (lm, lc) = match g.leading_term() {
            None => return Err(ExactPolyError::DivisionByZero),
            Some((m, c)) => (*m, c.clone()),
        };
        let mut quotient = Polynomial::zero();
        let mut rem = self.clone();
        while let Some((rm, rc)) = rem.leading_term() {
            if !lm.divides(rm) {
                return Err(ExactPolyError::NotDivisible);
            }
            let m = lm.quotient_of(rm);
            let c = rc / &lc;
            rem = &rem - &g.mul_monomial(&m, &c);
            quotient.add_term(m, c);
        }
        Ok(quotient)
    }

    pub fn divides(&self, f: &Polynomial) -> bool {
        !self.is_zero() && f.divide_exact(self).is_ok()
    }

    /// Coefficients of a polynomial of degree at most one.
    pub fn to_linear_form(&self) -> Option<LinearForm> {
        let mut c: [Q; NVARS] = Default::default();
        for (m, v) in &self.terms {
            match m.degree() {
                1 => {
                    let k = m.0.iter().position(|&e| e == 1).unwrap();
                    c[k] = v.clone();
                }
                _ => return None,
            }
        }
        Some(LinearForm(c))
    }

    /// Symmetric 5x5 coefficient matrix `S` with `f(x) = x^T S x` for a
    /// quadratic form.
    pub fn quadric_matrix(&self) -> Option<crate::linalg::QMat> {
        if !self.is_zero() && self.homogeneous_degree() != Some(2) {
            return None;
        }
        let mut s = crate::linalg::QMat::zeros(NVARS, NVARS);
        let half = Q::new(1.into(), 2.into());
        for (m, c) in &self.terms {
            let idx: Vec<usize> = (0..NVARS)
                .flat_map(|k| std::iter::repeat(k).take(m.0[k] as usize))
                .collect();
            let (i, j) = (idx[0], idx[1]);
            if i == j {
                s[(i, i)] = c.clone();
            } else {
                s[(i, j)] = c * &half;
                s[(j, i)] = c * &half;
            }
        }
        Some(s)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, -c.clone());
        }
        r
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        let mut r = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                r.add_term(ma.mul(mb), ca * cb);
            }
        }
        r
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Q::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $f(self, o: Polynomial) -> Polynomial {
                (&self).$f(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl From<&LinearForm> for Polynomial {
    fn from(l: &LinearForm) -> Self {
        Polynomial::from_terms(
            l.0.iter()
                .enumerate()
                .map(|(k, c)| (Monomial::var(k), c.clone())),
        )
    }
}

impl From<LinearForm> for Polynomial {
    fn from(l: LinearForm) -> Self {
        Polynomial::from(&l)
    }
}

/// Homogeneous linear form `c1*x1 + ... + c5*x5`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LinearForm(pub [Q; NVARS]);

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(i: usize) -> Self {
        let mut c: [Q; NVARS] = Default::default();
        c[i] = Q::one();
        LinearForm(c)
    }

    pub fn from_i64(c: [i64; NVARS]) -> Self {
        LinearForm(c.map(|v| Q::from_integer(v.into())))
    }

    pub fn from_slice(c: &[Q]) -> Self {
        assert_eq!(c.len(), NVARS);
        LinearForm(std::array::from_fn(|k| c[k].clone()))
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        LinearForm(std::array::from_fn(|k| &self.0[k] + &o.0[k]))
    }

    pub fn sub(&self, o: &Self) -> Self {
        LinearForm(std::array::from_fn(|k| &self.0[k] - &o.0[k]))
    }

    pub fn scale(&self, c: &Q) -> Self {
        LinearForm(std::array::from_fn(|k| &self.0[k] * c))
    }

    pub fn evaluate(&self, p: &[Q]) -> Q {
        self.0.iter().zip(p).map(|(a, b)| a * b).sum()
    }

    pub fn evaluate_f64(&self, p: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(p)
            .map(|(a, b)| crate::linalg::Field::to_f64(a) * b)
            .sum()
    }

    pub fn to_poly(&self) -> Polynomial {
        Polynomial::from(self)
    }

    /// `Some(c)` with `self = c * other`, when the two are proportional and
    /// `other` is nonzero.
    pub fn ratio_to(&self, other: &Self) -> Option<Q> {
        let k = other.0.iter().position(|c| !c.is_zero())?;
        let c = &self.0[k] / &other.0[k];
        (other.scale(&c) == *self).then_some(c)
    }
}

/// Linear combination `sum coeffs[i] * forms[i]`.
pub fn combine(forms: &[LinearForm], coeffs: &[Q]) -> LinearForm {
    forms
        .iter()
        .zip(coeffs)
        .fold(LinearForm::zero(), |acc, (f, c)| acc.add(&f.scale(c)))
}
