use super::poly::{Monomial, Polynomial};
use num_traits::One;

use super::{modular, ExactPolyError, NVARS, Q};
use crate::linalg::QMat;

/// Largest total degree accepted by [`gcd`] and [`gcd_many`].
pub const MAX_GCD_DEGREE: u32 = 3;

fn check_degree(f: &Polynomial) -> Result<(), ExactPolyError> {
    match f.total_degree() {
        Some(d) if d > MAX_GCD_DEGREE => Err(ExactPolyError::UnsupportedDegree(d)),
        _ => Ok(()),
    }
}

/// Greatest common divisor, normalized to leading coefficient one.
///
/// `gcd(0, 0) = 0`. Inputs above degree three are rejected.
pub fn gcd(f: &Polynomial, g: &Polynomial) -> Result<Polynomial, ExactPolyError> {
    check_degree(f)?;
    check_degree(g)?;
    Ok(gcd_unchecked(f, g))
}

/// Gcd of a list; the gcd of an empty or all-zero list is zero.
pub fn gcd_many(fs: &[Polynomial]) -> Result<Polynomial, ExactPolyError> {
    for f in fs {
        check_degree(f)?;
    }
    Ok(gcd_many_unchecked(fs))
}

pub(crate) fn gcd_many_unchecked(fs: &[Polynomial]) -> Polynomial {
    let mut acc = Polynomial::zero();
    for f in fs {
        acc = gcd_unchecked(&acc, f);
        if acc.is_constant() && !acc.is_zero() {
            break;
        }
    }
    acc
}

/// Gcd with no degree limit. Fine for the small inputs used internally.
pub(crate) fn gcd_unchecked(f: &Polynomial, g: &Polynomial) -> Polynomial {
    if f.is_zero() {
        return g.monic();
    }
    if g.is_zero() {
        return f.monic();
    }
    if f.is_constant() || g.is_constant() {
        return Polynomial::one();
    }
    match (f.homogeneous_degree(), g.homogeneous_degree()) {
        (Some(df), Some(dg)) => gcd_homogeneous(f, df, g, dg),
        _ => gcd_prs(f, g),
    }
}

/// Gcd of homogeneous forms through the smallest cofactor relation
/// `u*f = v*g`: then `u = g / gcd` up to a constant.
fn gcd_homogeneous(f: &Polynomial, df: u32, g: &Polynomial, dg: u32) -> Polynomial {
    let vars: Vec<usize> = (0..NVARS)
        .filter(|&v| f.involves(v) || g.involves(v))
        .collect();
    let first = dg.saturating_sub(df);
    // s = dg always has the relation u = g, v = f, meaning a trivial gcd
    for s in first..dg {
        let mu = monomials_of_degree(&vars, s);
        let mv = monomials_of_degree(&vars, s + df - dg);
        let one = Q::one();
        let cols: Vec<Polynomial> = mu
            .iter()
            .map(|m| f.mul_monomial(m, &one))
            .chain(mv.iter().map(|m| g.mul_monomial(m, &-one.clone())))
            .collect();
        let target = monomials_of_degree(&vars, s + df);
        let a = QMat::from_fn(target.len(), cols.len(), |i, j| cols[j].coeff(&target[i]));
        // full rank modulo a prime implies full rank over Q
        if modular::nullity_mod_p(&a) == 0 {
            continue;
        }
        let from_kernel = |k: Vec<Q>| {
            let u = Polynomial::from_terms(mu.iter().copied().zip(k));
            let d = g.divide_exact(&u).ok()?;
            f.divide_exact(&d).ok()?;
            Some(d.monic())
        };
        if let Some(d) = modular::kernel_vector_candidate(&a).and_then(&from_kernel) {
            return d;
        }
        if let Some(k) = a.kernel_basis().into_iter().next() {
            return from_kernel(k).expect("cofactor divides the second input");
        }
    }
    Polynomial::one()
}

/// All monomials of total degree `d` in the listed variables.
pub(crate) fn monomials_of_degree(vars: &[usize], d: u32) -> Vec<Monomial> {
    fn rec(vars: &[usize], d: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        match vars.split_first() {
            None => {
                if d == 0 {
                    out.push(*cur);
                }
            }
            Some((&v, rest)) => {
                for e in (0..=d).rev() {
                    cur.0[v] = e as u8;
                    rec(rest, d - e, cur, out);
                }
                cur.0[v] = 0;
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = Monomial::ONE;
    rec(vars, d, &mut cur, &mut out);
    out
}

/// Primitive pseudo-remainder sequence, used for inhomogeneous inputs.
fn gcd_prs(f: &Polynomial, g: &Polynomial) -> Polynomial {
    if f.is_zero() {
        return g.monic();
    }
    if g.is_zero() {
        return f.monic();
    }
    if f.is_constant() || g.is_constant() {
        return Polynomial::one();
    }
    let v = main_variable(f, g);
    let (cf, pf) = content_split(f, v);
    let (cg, pg) = content_split(g, v);
    let c = gcd_prs(&cf, &cg);
    if !pf.involves(v) || !pg.involves(v) {
        // one of the primitive parts is a nonzero constant
        return c.monic();
    }
    let mut a = pf;
    let mut b = pg;
    if a.degree_in(v) < b.degree_in(v) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let r = pseudo_remainder(&a, &b, v);
        if r.is_zero() {
            return (&c * &b).monic();
        }
        if !r.involves(v) {
            return c.monic();
        }
        a = b;
        b = content_split(&r, v).1;
    }
}

/// Variable present in either input that occurs in the fewest terms.
fn main_variable(f: &Polynomial, g: &Polynomial) -> usize {
    let count = |v: usize| {
        f.terms()
            .chain(g.terms())
            .filter(|(m, _)| m.0[v] > 0)
            .count()
    };
    (0..NVARS)
        .filter(|&v| f.involves(v) || g.involves(v))
        .min_by_key(|&v| count(v))
        .expect("non-constant input")
}

/// Split `f` into (content, primitive part) with respect to `v`.
fn content_split(f: &Polynomial, v: usize) -> (Polynomial, Polynomial) {
    let content = f
        .coefficients_in(v)
        .iter()
        .fold(Polynomial::zero(), |acc, c| gcd_prs(&acc, c));
    let prim = f
        .divide_exact(&content)
        .expect("content divides its polynomial");
    (content, prim)
}

/// Pseudo-remainder of `a` by `b` viewed as univariate polynomials in `v`.
fn pseudo_remainder(a: &Polynomial, b: &Polynomial, v: usize) -> Polynomial {
    let n = b.degree_in(v);
    let lb = b.coefficients_in(v).pop().unwrap();
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= n {
        let d = r.degree_in(v);
        let lr = r.coefficients_in(v).pop().unwrap();
        let mut shift = Monomial::ONE;
        shift.0[v] = d - n;
        let t = (&lr * b).mul_monomial(&shift, &Q::one());
        r = &(&lb * &r) - &t;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::parse_polynomial;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    #[test]
    fn simple_common_factor() {
        assert_eq!(gcd(&p("x1*x2"), &p("x1*x3")).unwrap(), p("x1"));
    }

    #[test]
    fn zero_cases() {
        assert!(gcd_many(&[Polynomial::zero(), Polynomial::zero()])
            .unwrap()
            .is_zero());
        assert_eq!(gcd(&Polynomial::zero(), &p("2*x3")).unwrap(), p("x3"));
    }

    #[test]
    fn coprime_gives_one() {
        assert_eq!(
            gcd(&p("x1^2+x2^2"), &p("x1+x3")).unwrap(),
            Polynomial::one()
        );
    }

    #[test]
    fn shared_quadric() {
        let q = p("x1^2-2*x1*x2+3*x1*x3+x1*x4-6*x2*x3");
        let f = &q * &p("x1+x5");
        let g = &q * &p("x2-3*x4");
        assert_eq!(gcd(&f, &g).unwrap(), q.monic());
    }

    #[test]
    fn inhomogeneous_inputs() {
        let f = &p("x1+1") * &p("x2-x3^2");
        let g = &p("x1+1") * &p("x2+2");
        assert_eq!(gcd_unchecked(&f, &g), p("x1+1"));
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials_of_degree(&[0, 1, 2, 3, 4], 3).len(), 35);
        assert_eq!(monomials_of_degree(&[1, 3], 2).len(), 3);
    }

    #[test]
    fn degree_limit() {
        assert!(matches!(
            gcd(&p("x1^4"), &p("x1")),
            Err(ExactPolyError::UnsupportedDegree(4))
        ));
    }
}
