//! Exact polynomials in `x1..x5` over the rationals.

pub(crate) mod gcd;
pub(crate) mod modular;
mod poly;
mod text;

use num_traits::Zero;
use rand::Rng;
use thiserror::Error;

pub use gcd::{gcd, gcd_many, MAX_GCD_DEGREE};
#[allow(unused_imports)]
pub(crate) use gcd::{gcd_many_unchecked, gcd_unchecked};
pub use poly::{combine, LinearForm, Monomial, Polynomial};
pub use text::{format_rational, parse_linear_form, parse_polynomial, parse_rational};

use crate::linalg::QMat;

pub type Q = num_rational::BigRational;

/// Number of variables: homogeneous coordinates of P^4.
pub const NVARS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactPolyError {
    #[error("gcd supports degree at most 3, got {0}")]
    UnsupportedDegree(u32),
    #[error("polynomial is not divisible")]
    NotDivisible,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
}

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant(m: &[Vec<Polynomial>]) -> Polynomial {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "matrix must be square");
    let cols: Vec<usize> = (0..n).collect();
    det_rec(m, 0, &cols)
}

fn det_rec(m: &[Vec<Polynomial>], row: usize, cols: &[usize]) -> Polynomial {
    match cols.len() {
        0 => Polynomial::one(),
        1 => m[row][cols[0]].clone(),
        _ => {
            let mut acc = Polynomial::zero();
            for (k, &c) in cols.iter().enumerate() {
                if m[row][c].is_zero() {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let t = &m[row][c] * &det_rec(m, row + 1, &rest);
                acc = if k % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

/// Cofactor expansion along row `r`; same value as [`determinant`].
pub fn determinant_along_row(m: &[Vec<Polynomial>], r: usize) -> Polynomial {
    let n = m.len();
    let mut acc = Polynomial::zero();
    for c in 0..n {
        let minor: Vec<Vec<Polynomial>> = (0..n)
            .filter(|&i| i != r)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != c)
                    .map(|j| m[i][j].clone())
                    .collect()
            })
            .collect();
        let t = &m[r][c] * &determinant(&minor);
        acc = if (r + c) % 2 == 0 {
            &acc + &t
        } else {
            &acc - &t
        };
    }
    acc
}

/// 5-column coefficient matrix of a list of linear forms.
pub fn coefficient_matrix(forms: &[LinearForm]) -> QMat {
    QMat::from_fn(forms.len(), NVARS, |i, j| forms[i].0[j].clone())
}

/// Dimension of the span of the given forms.
pub fn span_dimension(forms: &[LinearForm]) -> usize {
    if forms.is_empty() {
        return 0;
    }
    coefficient_matrix(forms).rank()
}

/// Dimension of the span of arbitrary polynomials, as vectors of coefficients.
pub fn poly_span_dimension(polys: &[Polynomial]) -> usize {
    let mut monos: Vec<Monomial> = polys
        .iter()
        .flat_map(|p| p.terms().map(|(m, _)| *m))
        .collect();
    monos.sort();
    monos.dedup();
    if monos.is_empty() {
        return 0;
    }
    QMat::from_fn(polys.len(), monos.len(), |i, j| polys[i].coeff(&monos[j])).rank()
}

/// Random linear form with integer coefficients in `[-9, 9]`, never zero.
pub fn random_linear_form<R: Rng + ?Sized>(rng: &mut R) -> LinearForm {
    loop {
        let l = LinearForm(std::array::from_fn(|_| q(rng.random_range(-9..=9))));
        if !l.is_zero() {
            return l;
        }
    }
}

/// Random rational point with integer coordinates in `[-9, 9]`, not all zero.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R) -> Vec<Q> {
    loop {
        let p: Vec<Q> = (0..NVARS).map(|_| q(rng.random_range(-9..=9))).collect();
        if p.iter().any(|c| !c.is_zero()) {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    #[test]
    fn arithmetic_basics() {
        assert_eq!(&p("x1+x2") * &p("x1-x2"), p("x1^2-x2^2"));
        assert_eq!(&p("x1+x2") + &Polynomial::zero(), p("x1+x2"));
        assert_eq!(&p("x1") * &p("x2*x3"), p("x1*x2*x3"));
        assert!((&p("x1+x2") - &p("x2+x1")).is_zero());
    }

    #[test]
    fn evaluation() {
        assert_eq!(p("x1^2-x2").evaluate(&[q(1), q(1), q(0), q(0), q(0)]), q(0));
        assert_eq!(p("x1*x4").evaluate(&[q(2), q(0), q(0), q(3), q(0)]), q(6));
        assert_eq!(p("x1*x4").evaluate_f64(&[2.0, 0.0, 0.0, 3.0, 0.0]), 6.0);
    }

    #[test]
    fn small_determinants() {
        let m = vec![vec![p("x1"), p("x2")], vec![p("x3"), p("x4")]];
        assert_eq!(determinant(&m), p("x1*x4-x2*x3"));
        let id: Vec<Vec<Polynomial>> = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        if i == j {
                            Polynomial::one()
                        } else {
                            Polynomial::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        assert_eq!(determinant(&id), Polynomial::one());
        let r = vec![p("x1"), p("x2+x3"), p("2")];
        let m = vec![r.clone(), vec![p("x4"), p("x5"), p("x1")], r];
        assert!(determinant(&m).is_zero());
    }

    #[test]
    fn exact_division() {
        assert_eq!(
            p("x1^2-x2^2").divide_exact(&p("x1-x2")).unwrap(),
            p("x1+x2")
        );
        assert_eq!(
            p("x1*x2").divide_exact(&p("x3")),
            Err(ExactPolyError::NotDivisible)
        );
    }

    #[test]
    fn spans() {
        let f = |s: &str| parse_linear_form(s).unwrap();
        assert_eq!(span_dimension(&[f("x1"), f("x2"), f("x1+x2")]), 2);
        assert_eq!(span_dimension(&[LinearForm::zero()]), 0);
    }

    #[test]
    fn quadric_matrix_round_trip() {
        let f = p("x1^2-2*x1*x2+3*x3*x1");
        let s = f.quadric_matrix().unwrap();
        let x: Vec<Q> = vec![q(1), q(2), q(-3), q(4), q(5)];
        let sx = s.mul_vec(&x);
        let val: Q = x.iter().zip(&sx).map(|(a, b)| a * b).sum();
        assert_eq!(val, f.evaluate(&x));
    }

    fn arb_linear() -> impl Strategy<Value = Polynomial> {
        prop::array::uniform5(-9i64..=9).prop_map(|c| LinearForm::from_i64(c).to_poly())
    }

    fn arb_form(deg: usize) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(arb_linear(), deg..=deg)
            .prop_map(|ls| ls.iter().fold(Polynomial::one(), |a, l| &a * l))
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        (prop::collection::vec(
            (prop::array::uniform5(0u8..3), -20i64..20, 1i64..6),
            0..6,
        ),)
            .prop_map(|(ts,)| {
                Polynomial::from_terms(ts.into_iter().map(|(e, n, d)| (Monomial(e), qr(n, d))))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gcd_divides_inputs(f in arb_form(2), g in arb_form(3), h in arb_linear()) {
            let a = &f * &h;
            let b = &g;
            prop_assume!(a.total_degree().unwrap_or(0) <= 3);
            let d = gcd(&a, b).unwrap();
            if !d.is_zero() {
                prop_assert!(a.divide_exact(&d).is_ok());
                prop_assert!(b.divide_exact(&d).is_ok());
            }
        }

        #[test]
        fn gcd_scales_with_common_factor(f in arb_linear(), g in arb_form(2), h in arb_linear()) {
            prop_assume!(!h.is_zero());
            let lhs = gcd(&(&f * &h), &(&g * &h)).unwrap();
            let rhs = (&h * &gcd(&f, &g).unwrap()).monic();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn cofactor_any_row(entries in prop::collection::vec(arb_linear(), 16)) {
            let m: Vec<Vec<Polynomial>> = entries.chunks(4).map(|c| c.to_vec()).collect();
            let d = determinant(&m);
            for r in 0..4 {
                prop_assert_eq!(&determinant_along_row(&m, r), &d);
            }
        }

        #[test]
        fn divide_round_trip(f in arb_poly(), g in arb_poly()) {
            prop_assume!(!g.is_zero());
            prop_assert_eq!((&f * &g).divide_exact(&g).unwrap(), f);
        }

        #[test]
        fn span_invariant(
            forms in prop::collection::vec(prop::array::uniform5(-9i64..=9), 4),
            mix in prop::collection::vec(-5i64..=5, 16),
        ) {
            let forms: Vec<LinearForm> = forms.into_iter().map(LinearForm::from_i64).collect();
            let a = QMat::from_fn(4, 4, |i, j| q(mix[4 * i + j]));
            prop_assume!(!a.det().is_zero());
            let mixed: Vec<LinearForm> = (0..4)
                .map(|i| combine(&forms, a.row(i)))
                .collect();
            prop_assert_eq!(span_dimension(&forms), span_dimension(&mixed));
        }

        #[test]
        fn text_round_trip(f in arb_poly()) {
            prop_assert_eq!(parse_polynomial(&f.to_string()).unwrap(), f);
        }
    }
}
