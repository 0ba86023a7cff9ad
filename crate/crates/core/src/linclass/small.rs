//! 2x2 and 3x2 matrices.

use num_traits::{One, Signed, Zero};

use super::forms::{form_kernel, form_solve, ModH};
use super::{LinClassError, LinFormMatrix};
use crate::exactpoly::{gcd_many, span_dimension, LinearForm, Polynomial, Q};
use crate::linalg::QMat;

/// Outcome of the column reduction of a 2x2 matrix with split determinant.
#[derive(Clone, Debug)]
pub struct Reduction2x2 {
    /// Column operation: `transformed = input * c`.
    pub c: QMat,
    pub transformed: LinFormMatrix,
    /// Column whose entries span at most one dimension after the operation.
    pub dependent_column: usize,
    /// Factors with `det = u * v`.
    pub u: LinearForm,
    pub v: LinearForm,
    /// 0: a column was already dependent; 1 or 2: which branch of the
    /// argument produced the operation.
    pub case: u8,
    /// `(x1, x2, x3)` in case 1, `(alpha, beta, gamma)` in case 2.
    pub constants: Vec<Q>,
}

fn rational_sqrt(q: &Q) -> Option<Q> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| Q::new(sn, sd))
}

/// Split a quadratic form into two rational linear factors.
pub(crate) fn factor_quadric(f: &Polynomial) -> Result<(LinearForm, LinearForm), LinClassError> {
    let s = f
        .quadric_matrix()
        .ok_or_else(|| LinClassError::HypothesisViolated("not a quadratic form".into()))?;
    let (rref, pivots) = s.rref();
    match pivots.len() {
        0 => Err(LinClassError::HypothesisViolated(
            "determinant vanishes identically".into(),
        )),
        1 | 2 => {
            let ls: Vec<LinearForm> = (0..pivots.len())
                .map(|i| LinearForm::from_slice(rref.row(i)))
                .collect();
            let l1 = ls[0].to_poly();
            if ls.len() == 1 {
                let a = f.leading_coeff() / l1.pow(2).leading_coeff();
                return Ok((ls[0].clone(), ls[0].scale(&a)));
            }
            let l2 = ls[1].to_poly();
            let basis = [l1.pow(2), &l1 * &l2, l2.pow(2)];
            let abc = solve_poly_combination(&basis, f)
                .expect("a rank-2 quadric is a form in its two row-space forms");
            let (a, b, c) = (&abc[0], &abc[1], &abc[2]);
            if a.is_zero() {
                // t (b s + c t)
                return Ok((ls[1].clone(), ls[0].scale(b).add(&ls[1].scale(c))));
            }
            let disc = b * b - Q::from_integer(4.into()) * a * c;
            let root = rational_sqrt(&disc).ok_or(LinClassError::NotReducibleOverQ)?;
            let two_a = a * Q::from_integer(2.into());
            let r1 = (-b + &root) / &two_a;
            let r2 = (-b - &root) / &two_a;
            let u = ls[0].sub(&ls[1].scale(&r1));
            let v = ls[0].sub(&ls[1].scale(&r2)).scale(a);
            Ok((u, v))
        }
        _ => Err(LinClassError::NotReducible),
    }
}

/// Scalars `y` with `sum y_k basis[k] = target`.
pub(crate) fn solve_poly_combination(basis: &[Polynomial], target: &Polynomial) -> Option<Vec<Q>> {
    let mut monos: Vec<_> = basis
        .iter()
        .chain(std::iter::once(target))
        .flat_map(|p| p.terms().map(|(m, _)| *m))
        .collect();
    monos.sort();
    monos.dedup();
    let a = QMat::from_fn(monos.len(), basis.len(), |i, j| basis[j].coeff(&monos[i]));
    let b: Vec<Q> = monos.iter().map(|m| target.coeff(m)).collect();
    a.solve(&b)
}

fn require_shape(m: &LinFormMatrix, r: usize, c: usize) -> Result<(), LinClassError> {
    if m.nrows() != r || m.ncols() != c {
        return Err(LinClassError::ShapeMismatch {
            expected: format!("{r}x{c}"),
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Column operation making the entries of one column of a 2x2 matrix
/// linearly dependent, given that its determinant splits into linear factors.
pub fn reduce_2x2(a: &LinFormMatrix) -> Result<Reduction2x2, LinClassError> {
    require_shape(a, 2, 2)?;
    let det = &(&a.get(0, 0).to_poly() * &a.get(1, 1).to_poly())
        - &(&a.get(0, 1).to_poly() * &a.get(1, 0).to_poly());
    let (u, v) = factor_quadric(&det)?;
    let id = QMat::identity(2);
    for j in [1, 0] {
        if span_dimension(&a.col(j)) <= 1 {
            return Ok(Reduction2x2 {
                c: id,
                transformed: a.clone(),
                dependent_column: j,
                u,
                v,
                case: 0,
                constants: Vec::new(),
            });
        }
    }
    let (a11, a12, a21, a22) = (a.get(0, 0), a.get(0, 1), a.get(1, 0), a.get(1, 1));
    let zero = LinearForm::zero();
    let (case, constants, gamma) = if span_dimension(&[a11.clone(), a21.clone(), u.clone()]) == 3 {
        // (a22, a12, v) = [[0, u, a21], [-u, 0, a11], [a21, a11, 0]] x
        let cols = vec![
            vec![zero.clone(), u.scale(&-Q::one()), a21.clone()],
            vec![u.clone(), zero.clone(), a11.clone()],
            vec![a21.clone(), a11.clone(), zero.clone()],
        ];
        let x = form_solve(&cols, &[a22.clone(), a12.clone(), v.clone()])
            .ok_or_else(|| LinClassError::HypothesisViolated("no Koszul coefficients".into()))?;
        let g = x[2].clone();
        (1, x, g)
    } else {
        let ab = form_solve(&[vec![a11.clone()], vec![a21.clone()]], &[u.clone()])
            .ok_or_else(|| LinClassError::HypothesisViolated("u outside <a11, a21>".into()))?;
        let (alpha, beta) = (ab[0].clone(), ab[1].clone());
        // a22 - alpha v = gamma a21, a12 + beta v = gamma a11
        let lhs = vec![a22.sub(&v.scale(&alpha)), a12.add(&v.scale(&beta))];
        let g = form_solve(&[vec![a21.clone(), a11.clone()]], &lhs)
            .ok_or_else(|| LinClassError::HypothesisViolated("no gamma".into()))?;
        (2, vec![alpha, beta, g[0].clone()], g[0].clone())
    };
    let c = QMat::from_rows(vec![vec![Q::one(), -gamma], vec![Q::zero(), Q::one()]]);
    let transformed = a.right_mul(&c);
    debug_assert!(span_dimension(&transformed.col(1)) <= 1);
    Ok(Reduction2x2 {
        c,
        transformed,
        dependent_column: 1,
        u,
        v,
        case,
        constants,
    })
}

/// Normal forms of a 3x2 matrix whose minors share a linear factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Template3x2 {
    /// `[[0, n12], [0, n22], [n31, n32]]`
    Left,
    /// `[[0, n12], [n12, 0], [n31, n32]]`
    Right,
    NonDegenerate,
    Degenerate,
}

#[derive(Clone, Debug)]
pub struct Classification3x2 {
    pub template: Template3x2,
    pub r: QMat,
    pub c: QMat,
    pub canonical: LinFormMatrix,
    pub common_factor: Polynomial,
}

impl Classification3x2 {
    pub fn verify(&self, n: &LinFormMatrix) -> bool {
        if self.r.det().is_zero() || self.c.det().is_zero() {
            return false;
        }
        if n.transform(&self.r, &self.c) != self.canonical {
            return false;
        }
        let m = &self.canonical;
        match self.template {
            Template3x2::Left => m.get(0, 0).is_zero() && m.get(1, 0).is_zero(),
            Template3x2::Right => {
                m.get(0, 0).is_zero() && m.get(1, 1).is_zero() && m.get(0, 1) == m.get(1, 0)
            }
            _ => true,
        }
    }
}

/// Square matrix with `cols` as its leading columns.
pub(crate) fn complete_columns(cols: &[Vec<Q>], n: usize) -> Option<QMat> {
    QMat::complete_rows(cols, n).map(|m| m.transpose())
}

/// Row operations `r` with `r * t = e_k` for a nonzero vector `t`.
pub(crate) fn rows_sending_to_basis(t: &[Q], k: usize) -> Option<QMat> {
    let n = t.len();
    let full = complete_columns(&[t.to_vec()], n)?;
    // move t to column k
    let mut order: Vec<usize> = (1..n).collect();
    order.insert(k, 0);
    let all: Vec<usize> = (0..n).collect();
    full.select(&all, &order).inverse()
}

pub fn classify_3x2(n: &LinFormMatrix) -> Result<Classification3x2, LinClassError> {
    require_shape(n, 3, 2)?;
    let minors = n.maximal_minors_signed()?;
    let g = gcd_many(&minors)?;
    let trivial = |template| Classification3x2 {
        template,
        r: QMat::identity(3),
        c: QMat::identity(2),
        canonical: n.clone(),
        common_factor: g.clone(),
    };
    let h = match g.total_degree() {
        None => return Ok(trivial(Template3x2::Degenerate)),
        Some(0) => return Ok(trivial(Template3x2::NonDegenerate)),
        Some(1) => g.to_linear_form().unwrap(),
        Some(_) => return Ok(trivial(Template3x2::Degenerate)),
    };
    let modh = ModH::new(&h);

    let reduced_cols: Vec<Vec<LinearForm>> = (0..2)
        .map(|j| n.col(j).iter().map(|l| modh.reduce(l)).collect())
        .collect();
    if let Some(c0) = form_kernel(&reduced_cols).into_iter().next() {
        let c = complete_columns(&[c0], 2).expect("nonzero vector");
        let col = n.right_mul(&c).col(0);
        let t: Vec<Q> = col.iter().map(|l| modh.quotient(l).unwrap()).collect();
        if let Some(r) = rows_sending_to_basis(&t, 2) {
            let canonical = n.transform(&r, &c);
            return Ok(Classification3x2 {
                template: Template3x2::Left,
                r,
                c,
                canonical,
                common_factor: g,
            });
        }
    }

    let reduced_rows: Vec<Vec<LinearForm>> = (0..3)
        .map(|i| n.row(i).iter().map(|l| modh.reduce(l)).collect())
        .collect();
    let rows = form_kernel(&reduced_rows);
    if rows.len() >= 2 {
        let s: Vec<Vec<Q>> = rows[..2]
            .iter()
            .map(|r| {
                super::forms_row(r, n)
                    .iter()
                    .map(|l| modh.quotient(l).unwrap())
                    .collect()
            })
            .collect();
        let smat = QMat::from_rows(vec![s[1].clone(), s[0].clone()]);
        if let (Some(c), Some(r)) = (smat.inverse(), QMat::complete_rows(&rows[..2], 3)) {
            let canonical = n.transform(&r, &c);
            return Ok(Classification3x2 {
                template: Template3x2::Right,
                r,
                c,
                canonical,
                common_factor: g,
            });
        }
    }
    Ok(trivial(Template3x2::Degenerate))
}
