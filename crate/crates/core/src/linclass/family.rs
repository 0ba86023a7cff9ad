//! Constructors for the normal forms.

use num_traits::{One, Zero};
use rand::Rng;

use super::{CanonicalFamily, LinClassError, LinFormMatrix};
use crate::exactpoly::{
    gcd_many, q, random_linear_form, span_dimension, LinearForm, Polynomial, Q,
};

/// Parameters of a normal form.
///
/// Layout of `forms` / `scalars` per family:
/// - A: `n11 n12 n21 n22 n31 n32 n41 n42 n43` / none
/// - B: `n13 n31 n32 n33 n41 n42 n43` / none
/// - C: `n31 n22 n41 n42` / `alpha beta`
/// - D: `n13 n31 n23 n33 n41 n42 n43` / none
/// - S1X1: `l1 l2 l3 l4` / `X1` row-major (18)
/// - S2X2: `l2 l3 l4` then the first row of `X2` / `z2 z3 z4`, then rows
///   2..4 of `X2` row-major (9)
/// - S3X3: `l3 l4` then rows 1..2 of `X3` / `z31 z32 z41 z42`, then row 3
///   of `X3`
/// - NonDegenerate: the 12 entries row-major / none
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyParams {
    pub forms: Vec<LinearForm>,
    pub scalars: Vec<Q>,
}

fn counts(tag: CanonicalFamily) -> Option<(usize, usize)> {
    use CanonicalFamily::*;
    match tag {
        A => Some((9, 0)),
        B => Some((7, 0)),
        C => Some((4, 2)),
        D => Some((7, 0)),
        S1X1 => Some((4, 18)),
        S2X2 => Some((6, 12)),
        S3X3 => Some((8, 7)),
        NonDegenerate => Some((12, 0)),
        Degenerate => None,
    }
}

/// Whether a family can arise from three projections P^4 -> P^2.
pub fn family_realizable(tag: CanonicalFamily) -> bool {
    !matches!(
        tag,
        CanonicalFamily::C | CanonicalFamily::NonDegenerate | CanonicalFamily::Degenerate
    )
}

pub(crate) fn poly_matmul(a: &[Vec<Polynomial>], b: &[Vec<Polynomial>]) -> Vec<Vec<Polynomial>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner);
            (0..cols)
                .map(|j| (0..inner).fold(Polynomial::zero(), |acc, k| &acc + &(&row[k] * &b[k][j])))
                .collect()
        })
        .collect()
}

fn to_linform_matrix(m: &[Vec<Polynomial>]) -> Result<LinFormMatrix, LinClassError> {
    LinFormMatrix::new(
        m.iter()
            .map(|r| {
                r.iter()
                    .map(|p| {
                        p.to_linear_form().ok_or_else(|| {
                            LinClassError::InvalidParams("product is not linear".into())
                        })
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>, _>>()?,
    )
}

fn consts(vals: &[Q], rows: usize, cols: usize) -> Vec<Vec<Polynomial>> {
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| Polynomial::constant(vals[i * cols + j].clone()))
                .collect()
        })
        .collect()
}

/// `S_1(l)`, 4x6.
pub fn s1_matrix(l: &[LinearForm]) -> Vec<Vec<Polynomial>> {
    let p = |i: usize| l[i].to_poly();
    let n = |i: usize| -l[i].to_poly();
    let z = Polynomial::zero;
    vec![
        vec![z(), n(2), p(1), z(), z(), p(3)],
        vec![p(2), z(), n(0), z(), p(3), z()],
        vec![n(1), p(0), z(), p(3), z(), z()],
        vec![z(), z(), z(), n(2), n(1), n(0)],
    ]
}

/// `S_2(l, z)`, 4x4; `l` holds `l1..l4`, `z` holds `z2 z3 z4`.
pub fn s2_matrix(l: &[LinearForm], z: &[Q]) -> Vec<Vec<Polynomial>> {
    let p = |i: usize| l[i].to_poly();
    let n = |i: usize| -l[i].to_poly();
    let c = |x: &Q| Polynomial::constant(x.clone());
    let o = Polynomial::zero;
    vec![
        vec![Polynomial::one(), o(), o(), o()],
        vec![c(&z[0]), o(), n(3), p(2)],
        vec![c(&z[1]), p(3), o(), n(1)],
        vec![c(&z[2]), n(2), p(1), o()],
    ]
}

/// `S_3(l, z)`, 4x3; `l` holds `l1..l4`, `z` holds `z31 z32 z41 z42`.
pub fn s3_matrix(l: &[LinearForm], z: &[Q]) -> Vec<Vec<Polynomial>> {
    let c = |x: &Q| Polynomial::constant(x.clone());
    let o = Polynomial::zero;
    vec![
        vec![Polynomial::one(), o(), o()],
        vec![o(), Polynomial::one(), o()],
        vec![c(&z[0]), c(&z[1]), -l[3].to_poly()],
        vec![c(&z[2]), c(&z[3]), l[2].to_poly()],
    ]
}

/// Assemble the normal form of `tag` from its parameters.
pub fn build_family(
    tag: CanonicalFamily,
    params: &FamilyParams,
) -> Result<LinFormMatrix, LinClassError> {
    use CanonicalFamily::*;
    let (nf, ns) = counts(tag)
        .ok_or_else(|| LinClassError::InvalidParams(format!("{tag} has no normal form")))?;
    if params.forms.len() != nf || params.scalars.len() != ns {
        return Err(LinClassError::InvalidParams(format!(
            "{tag} needs {nf} forms and {ns} scalars, got {} and {}",
            params.forms.len(),
            params.scalars.len()
        )));
    }
    let f = |i: usize| params.forms[i].clone();
    let o = LinearForm::zero;
    let nonzero = |l: &LinearForm, what: &str| {
        if l.is_zero() {
            Err(LinClassError::InvalidParams(format!(
                "{what} must be nonzero"
            )))
        } else {
            Ok(())
        }
    };
    let independent = |ls: &[LinearForm], what: &str| {
        if span_dimension(ls) < ls.len() {
            Err(LinClassError::InvalidParams(format!(
                "{what} must be linearly independent"
            )))
        } else {
            Ok(())
        }
    };
    match tag {
        A => {
            nonzero(&f(8), "n43")?;
            LinFormMatrix::new(vec![
                vec![f(0), f(1), o()],
                vec![f(2), f(3), o()],
                vec![f(4), f(5), o()],
                vec![f(6), f(7), f(8)],
            ])
        }
        B => {
            nonzero(&f(0), "n13")?;
            LinFormMatrix::new(vec![
                vec![o(), o(), f(0)],
                vec![o(), f(0), o()],
                vec![f(1), f(2), f(3)],
                vec![f(4), f(5), f(6)],
            ])
        }
        C => {
            let (alpha, beta) = (&params.scalars[0], &params.scalars[1]);
            if alpha.is_zero() && beta.is_zero() {
                return Err(LinClassError::InvalidParams(
                    "(alpha, beta) must not be (0, 0)".into(),
                ));
            }
            let (n31, n22, n41, n42) = (f(0), f(1), f(2), f(3));
            let h = n31.scale(alpha).add(&n22.scale(beta));
            nonzero(&h, "alpha n31 + beta n22")?;
            LinFormMatrix::new(vec![
                vec![o(), o(), h],
                vec![o(), n22, n41.scale(alpha)],
                vec![n31, o(), n42.scale(beta)],
                vec![n41, n42, o()],
            ])
        }
        D => {
            nonzero(&f(1), "n31")?;
            LinFormMatrix::new(vec![
                vec![o(), o(), f(0)],
                vec![o(), f(1), f(2)],
                vec![f(1), o(), f(3)],
                vec![f(4), f(5), f(6)],
            ])
        }
        S1X1 => {
            independent(&params.forms, "l1..l4")?;
            let s = s1_matrix(&params.forms);
            to_linform_matrix(&poly_matmul(&s, &consts(&params.scalars, 6, 3)))
        }
        S2X2 => {
            let l234 = &params.forms[..3];
            independent(l234, "l2, l3, l4")?;
            let z = &params.scalars[..3];
            let l1 = crate::exactpoly::combine(l234, z).scale(&-Q::one());
            let ell = [l1, f(0), f(1), f(2)];
            let s = s2_matrix(&ell, z);
            let mut x = vec![params.forms[3..6].iter().map(LinearForm::to_poly).collect()];
            x.extend(consts(&params.scalars[3..], 3, 3));
            to_linform_matrix(&poly_matmul(&s, &x))
        }
        S3X3 => {
            independent(&params.forms[..2], "l3, l4")?;
            let z = &params.scalars[..4];
            let ell = [LinearForm::zero(), LinearForm::zero(), f(0), f(1)];
            let s = s3_matrix(&ell, z);
            let mut x: Vec<Vec<Polynomial>> = params.forms[2..8]
                .chunks(3)
                .map(|r| r.iter().map(LinearForm::to_poly).collect())
                .collect();
            x.extend(consts(&params.scalars[4..], 1, 3));
            to_linform_matrix(&poly_matmul(&s, &x))
        }
        NonDegenerate => {
            LinFormMatrix::new(params.forms.chunks(3).map(<[LinearForm]>::to_vec).collect())
        }
        Degenerate => unreachable!(),
    }
}

fn small_scalar<R: Rng + ?Sized>(rng: &mut R, nonzero: bool) -> Q {
    loop {
        let v = rng.random_range(-3i64..=3);
        if v != 0 || !nonzero {
            return q(v);
        }
    }
}

/// Parameters drawn with integer coefficients in `[-9, 9]` for forms and
/// `[-3, 3]` for scalars.
pub fn random_params<R: Rng + ?Sized>(tag: CanonicalFamily, rng: &mut R) -> Option<FamilyParams> {
    let (nf, ns) = counts(tag)?;
    let forms = (0..nf).map(|_| random_linear_form(rng)).collect();
    // alpha = 0 or beta = 0 collapses C onto B
    let nonzero = tag == CanonicalFamily::C;
    let scalars = (0..ns).map(|_| small_scalar(rng, nonzero)).collect();
    Some(FamilyParams { forms, scalars })
}

/// A random member of `tag` whose minors have a common factor of exactly the
/// family's degree. Degenerate draws are rejected; the number of draws used
/// is returned alongside.
pub fn random_instance<R: Rng + ?Sized>(
    tag: CanonicalFamily,
    rng: &mut R,
) -> Result<(LinFormMatrix, FamilyParams, usize), LinClassError> {
    let want = tag
        .factor_degree()
        .ok_or_else(|| LinClassError::InvalidParams(format!("cannot sample {tag}")))?;
    for draw in 1..=100 {
        let Some(params) = random_params(tag, rng) else {
            break;
        };
        let Ok(m) = build_family(tag, &params) else {
            continue;
        };
        let g = gcd_many(&m.maximal_minors_signed()?)?;
        if g.total_degree() == Some(want) {
            if draw > 1 {
                log::debug!("{tag}: accepted draw {draw}");
            }
            return Ok((m, params, draw));
        }
    }
    Err(LinClassError::InvalidParams(format!(
        "no nondegenerate {tag} instance in 100 draws"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::{parse_linear_form, parse_polynomial};

    fn lf(s: &str) -> LinearForm {
        parse_linear_form(s).unwrap()
    }

    #[test]
    fn c_with_beta_zero_shares_n31() {
        let params = FamilyParams {
            forms: vec![lf("x1"), lf("x2"), lf("x3"), lf("x4")],
            scalars: vec![q(1), q(0)],
        };
        let m = build_family(CanonicalFamily::C, &params).unwrap();
        for d in m.maximal_minors_signed().unwrap() {
            assert!(d.divide_exact(&lf("x1").to_poly()).is_ok());
        }
    }

    #[test]
    fn a_minors_divisible_by_n43() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let params = random_params(CanonicalFamily::A, &mut rng).unwrap();
        let m = build_family(CanonicalFamily::A, &params).unwrap();
        let n43 = params.forms[8].to_poly();
        for d in m.maximal_minors_signed().unwrap() {
            assert!(d.divide_exact(&n43).is_ok());
        }
    }

    #[test]
    fn rejects_bad_params() {
        let params = FamilyParams {
            forms: vec![lf("x1"), lf("x2"), lf("x3"), lf("x4")],
            scalars: vec![q(0), q(0)],
        };
        assert!(build_family(CanonicalFamily::C, &params).is_err());
        assert!(build_family(CanonicalFamily::B, &params).is_err());
        let dep = FamilyParams {
            forms: vec![lf("x1"), lf("x2"), lf("x1 + x2"), lf("x4")],
            scalars: vec![q(1); 18],
        };
        assert!(build_family(CanonicalFamily::S1X1, &dep).is_err());
    }

    #[test]
    fn s_families_have_quadric_factor() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for tag in [
            CanonicalFamily::S1X1,
            CanonicalFamily::S2X2,
            CanonicalFamily::S3X3,
        ] {
            let (m, _, _) = random_instance(tag, &mut rng).unwrap();
            let g = gcd_many(&m.maximal_minors_signed().unwrap()).unwrap();
            assert_eq!(g.total_degree(), Some(2), "{tag}");
        }
    }

    #[test]
    fn printed_cone_example() {
        let x1 = [
            [0, 6, 0],
            [0, -3, 0],
            [1, 0, 0],
            [0, -3, 12],
            [0, 0, 0],
            [0, 0, 4],
        ];
        let params = FamilyParams {
            forms: (0..4).map(LinearForm::var).collect(),
            scalars: x1.iter().flatten().map(|&v| q(v)).collect(),
        };
        let m = build_family(CanonicalFamily::S1X1, &params).unwrap();
        let g = gcd_many(&m.maximal_minors_signed().unwrap()).unwrap();
        // q = l^T D l with D built from the 3x3 minors of X1, worked by hand
        let by_hand = parse_polynomial("x1^2+2*x1*x2+3*x1*x3+x1*x4+6*x2*x3").unwrap();
        assert_eq!(g, by_hand);
        // the printed cone is the same quadric after x2 -> -x2
        let printed = parse_polynomial("x1^2-2*x1*x2+3*x3*x1+x1*x4-6*x3*x2").unwrap();
        let flip: Vec<Polynomial> = (0..5)
            .map(|i| Polynomial::var(i).scale(&q(if i == 1 { -1 } else { 1 })))
            .collect();
        assert_eq!(g, printed.substitute(&flip));
    }

    use rand::SeedableRng;
}
