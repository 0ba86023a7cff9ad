//! Normal forms of 4x3 matrices whose maximal minors share a factor.
//!
//! The degree-one case works with the matrix modulo the common factor `h`:
//! - A: a constant column combination vanishes mod `h`;
//! - B: a 2-dimensional space of constant row combinations vanishes mod `h`;
//! - C: a single such row combination;
//! - D: the kernel of `N mod h` is spanned by a vector of linear forms whose
//!   coefficients fill a plane.
//!
//! Each branch builds explicit row and column operations and the result is
//! accepted only if it matches the family's template exactly.

use num_traits::{One, Zero};

use super::family::{poly_matmul, s1_matrix, s2_matrix, s3_matrix};
use super::forms::{form_kernel, form_solve, ModH};
use super::small::{complete_columns, factor_quadric, rows_sending_to_basis};
use super::{
    forms_row, CanonicalFamily, Canonicalization, FamilyExtras, LinClassError, LinFormMatrix,
};
use crate::exactpoly::gcd::monomials_of_degree;
use crate::exactpoly::{
    determinant, gcd_many, gcd_many_unchecked, span_dimension, LinearForm, Polynomial, NVARS, Q,
};
use crate::linalg::QMat;

/// Accumulated operations: `cur = r * input * c`.
struct Work {
    r: QMat,
    c: QMat,
    cur: LinFormMatrix,
}

impl Work {
    fn new(n: &LinFormMatrix) -> Self {
        Work {
            r: QMat::identity(n.nrows()),
            c: QMat::identity(n.ncols()),
            cur: n.clone(),
        }
    }

    fn apply(&mut self, rs: &QMat, cs: &QMat) {
        self.r = rs.mul(&self.r);
        self.c = self.c.mul(cs);
        self.cur = self.cur.transform(rs, cs);
    }

    fn rows(&mut self, rs: &QMat) {
        let id = QMat::identity(self.cur.ncols());
        self.apply(rs, &id);
    }

    fn cols(&mut self, cs: &QMat) {
        let id = QMat::identity(self.cur.nrows());
        self.apply(&id, cs);
    }
}

struct Found {
    family: CanonicalFamily,
    work: Work,
    extras: FamilyExtras,
    specialized: bool,
}

pub fn classify_4x3(n: &LinFormMatrix) -> Result<Canonicalization, LinClassError> {
    if n.nrows() != 4 || n.ncols() != 3 {
        return Err(LinClassError::ShapeMismatch {
            expected: "4x3".into(),
            rows: n.nrows(),
            cols: n.ncols(),
        });
    }
    let minors = n.maximal_minors_signed()?;
    let g = gcd_many(&minors)?;
    let unresolved = |g: Polynomial, note: &str| Canonicalization {
        family: CanonicalFamily::Degenerate,
        r: QMat::identity(4),
        c: QMat::identity(3),
        canonical: n.clone(),
        common_factor: g,
        extras: FamilyExtras::default(),
        specialized: true,
        note: Some(note.to_string()),
    };
    let found = match g.total_degree() {
        None => return Ok(unresolved(g, "maximal minors vanish identically")),
        Some(0) => {
            return Ok(Canonicalization {
                family: CanonicalFamily::NonDegenerate,
                specialized: false,
                note: None,
                ..unresolved(g, "")
            })
        }
        Some(1) => {
            let h = g.to_linear_form().expect("degree one");
            degree_one(n, &h)
        }
        Some(2) => degree_two(n, &g, &minors),
        Some(_) => {
            return Ok(unresolved(
                g,
                "common factor of degree three: the matrix drops rank on a cubic",
            ))
        }
    };
    match found {
        Some(f) => Ok(Canonicalization {
            family: f.family,
            r: f.work.r,
            c: f.work.c,
            canonical: f.work.cur,
            common_factor: g,
            extras: f.extras,
            specialized: f.specialized,
            note: None,
        }),
        None => Ok(unresolved(g, "no normal form could be certified")),
    }
}

fn degree_one(n: &LinFormMatrix, h: &LinearForm) -> Option<Found> {
    let modh = ModH::new(h);
    let attempts: [fn(&LinFormMatrix, &ModH) -> Option<Found>; 4] = [try_a, try_b, try_c, try_d];
    attempts
        .iter()
        .find_map(|t| t(n, &modh).filter(|f| matches_template(f.family, &f.work.cur, &f.extras)))
}

fn reduced_cols(n: &LinFormMatrix, modh: &ModH) -> Vec<Vec<LinearForm>> {
    (0..n.ncols())
        .map(|j| n.col(j).iter().map(|l| modh.reduce(l)).collect())
        .collect()
}

fn reduced_rows(n: &LinFormMatrix, modh: &ModH) -> Vec<Vec<LinearForm>> {
    (0..n.nrows())
        .map(|i| n.row(i).iter().map(|l| modh.reduce(l)).collect())
        .collect()
}

fn quotients(forms: &[LinearForm], modh: &ModH) -> Option<Vec<Q>> {
    forms.iter().map(|l| modh.quotient(l)).collect()
}

fn embed(block: &QMat, offset: usize, n: usize) -> QMat {
    let mut m = QMat::identity(n);
    for i in 0..block.nrows() {
        for j in 0..block.ncols() {
            m[(i + offset, j + offset)] = block[(i, j)].clone();
        }
    }
    m
}

fn unit(n: usize, entries: &[(usize, usize, Q)]) -> QMat {
    let mut m = QMat::identity(n);
    for (i, j, v) in entries {
        m[(*i, *j)] = v.clone();
    }
    m
}

fn try_a(n: &LinFormMatrix, modh: &ModH) -> Option<Found> {
    let kernel = form_kernel(&reduced_cols(n, modh));
    let c0 = kernel.first()?.clone();
    let full = complete_columns(&[c0], 3)?;
    let c = full.select(&[0, 1, 2], &[1, 2, 0]);
    let mut w = Work::new(n);
    w.cols(&c);
    let t = quotients(&w.cur.col(2), modh)?;
    w.rows(&rows_sending_to_basis(&t, 3)?);
    Some(Found {
        family: CanonicalFamily::A,
        work: w,
        extras: FamilyExtras::default(),
        specialized: kernel.len() > 1,
    })
}

fn try_b(n: &LinFormMatrix, modh: &ModH) -> Option<Found> {
    let rows = form_kernel(&reduced_rows(n, modh));
    if rows.len() < 2 {
        return None;
    }
    let s1 = quotients(&forms_row(&rows[0], n), modh)?;
    let s2 = quotients(&forms_row(&rows[1], n), modh)?;
    let full = QMat::complete_rows(&[s2, s1], 3)?;
    let s = full.select(&[2, 0, 1], &[0, 1, 2]);
    let c = s.inverse()?;
    let r = QMat::complete_rows(&rows[..2], 4)?;
    let mut w = Work::new(n);
    w.apply(&r, &c);
    Some(Found {
        family: CanonicalFamily::B,
        work: w,
        extras: FamilyExtras::default(),
        specialized: rows.len() > 2,
    })
}

/// Directions `(c1 : c2)` in which `c1 * p1 + c2 * p2` has linearly
/// dependent entries.
fn dependent_directions(p1: &[LinearForm], p2: &[LinearForm]) -> Option<[[Q; 2]; 2]> {
    let (s, t) = (Polynomial::var(0), Polynomial::var(1));
    let entry = |k: usize, v: usize| &s.scale(&p1[k].0[v]) + &t.scale(&p2[k].0[v]);
    let mut minors = Vec::new();
    for a in 0..NVARS {
        for b in a + 1..NVARS {
            for c in b + 1..NVARS {
                let m: Vec<Vec<Polynomial>> = (0..3)
                    .map(|k| vec![entry(k, a), entry(k, b), entry(k, c)])
                    .collect();
                minors.push(determinant(&m));
            }
        }
    }
    let g = gcd_many_unchecked(&minors);
    if g.total_degree() != Some(2) {
        return None;
    }
    let (u, v) = factor_quadric(&g).ok()?;
    let root = |l: &LinearForm| [l.0[1].clone(), -l.0[0].clone()];
    let (a, b) = (root(&u), root(&v));
    if &a[0] * &b[1] - &a[1] * &b[0] == Q::zero() {
        return None;
    }
    Some([a, b])
}

fn try_c(n: &LinFormMatrix, modh: &ModH) -> Option<Found> {
    let rows = form_kernel(&reduced_rows(n, modh));
    if rows.len() != 1 {
        return None;
    }
    let mut w = Work::new(n);

    // first row becomes (0, 0, h)
    let s = quotients(&forms_row(&rows[0], n), modh)?;
    let smat = QMat::from_rows(vec![s.clone()]);
    let ker = smat.kernel_basis();
    let ss: Q = s.iter().map(|x| x * x).sum();
    let c3: Vec<Q> = s.iter().map(|x| x / &ss).collect();
    let c0 = QMat::from_rows(vec![ker[0].clone(), ker[1].clone(), c3]).transpose();
    w.apply(&QMat::complete_rows(&rows[..1], 4)?, &c0);

    // columns 1, 2 turned into the two dependent directions of their pencil
    let lower = |w: &Work, j: usize| w.cur.col(j)[1..].to_vec();
    let [a, b] = dependent_directions(&lower(&w, 0), &lower(&w, 1))?;
    let c1 = QMat::from_rows(vec![
        vec![a[0].clone(), b[0].clone(), Q::zero()],
        vec![a[1].clone(), b[1].clone(), Q::zero()],
        vec![Q::zero(), Q::zero(), Q::one()],
    ]);
    w.cols(&c1);

    // rows 2, 3 kill one entry of column 1, 2 respectively
    let left_kernel = |forms: Vec<LinearForm>| {
        let cols: Vec<Vec<LinearForm>> = forms.into_iter().map(|f| vec![f]).collect();
        let k = form_kernel(&cols);
        (k.len() == 1).then(|| k[0].clone())
    };
    let g1 = left_kernel(lower(&w, 0))?;
    let g2 = left_kernel(lower(&w, 1))?;
    let g = QMat::complete_rows(&[g1, g2], 3)?;
    w.rows(&embed(&g, 1, 4));

    let m = &w.cur;
    let (h, a, b) = (
        m.get(0, 2).clone(),
        m.get(2, 0).clone(),
        m.get(1, 1).clone(),
    );
    let (d, e) = (m.get(3, 0).clone(), m.get(3, 1).clone());
    let (f2, f3) = (m.get(1, 2).clone(), m.get(2, 2).clone());
    let ab = form_solve(&[vec![a.clone()], vec![b.clone()]], &[h.clone()])?;
    let (alpha, beta) = (ab[0].clone(), ab[1].clone());
    // Unknowns u2, c2, t3, u3, c1, t2, rho for
    //   f2 + u2 h + c2 b = alpha (rho d + t3 a)
    //   f3 + u3 h + c1 a = beta (rho e + t2 b)
    // where row 4 becomes rho row4 + t2 row2 + t3 row3.
    let z = LinearForm::zero();
    let cols = [
        vec![h.clone(), z.clone()],
        vec![b.clone(), z.clone()],
        vec![a.scale(&-&alpha), z.clone()],
        vec![z.clone(), h.clone()],
        vec![z.clone(), a.clone()],
        vec![z.clone(), b.scale(&-&beta)],
        vec![d.scale(&-&alpha), e.scale(&-&beta)],
    ];
    let rhs = [f2.scale(&-Q::one()), f3.scale(&-Q::one())];
    let mut x = form_solve(&cols, &rhs)?;
    if x[6].is_zero() {
        let k = form_kernel(&cols).into_iter().find(|k| !k[6].is_zero())?;
        x.iter_mut().zip(&k).for_each(|(xi, ki)| *xi += ki);
    }
    let [u2, c2, t3, u3, c1v, t2, rho]: [Q; 7] = x.try_into().ok()?;
    w.apply(
        &unit(4, &[(1, 0, u2), (2, 0, u3)]),
        &unit(3, &[(0, 2, c1v), (1, 2, c2)]),
    );
    w.rows(&unit(4, &[(3, 1, t2), (3, 2, t3), (3, 3, rho)]));
    let rest = ModH::new(&h).quotient(w.cur.get(3, 2))?;
    w.rows(&unit(4, &[(3, 0, -rest)]));
    Some(Found {
        family: CanonicalFamily::C,
        work: w,
        extras: FamilyExtras {
            alpha: Some(alpha),
            beta: Some(beta),
            ..Default::default()
        },
        specialized: false,
    })
}

fn try_d(n: &LinFormMatrix, modh: &ModH) -> Option<Found> {
    let free: Vec<usize> = (0..NVARS).filter(|&v| v != modh.pivot()).collect();
    let monos = monomials_of_degree(&free, 2);
    let red = reduced_rows(n, modh);
    // unknown (j, w): coefficient of x_w in the j-th kernel entry
    let unknowns: Vec<(usize, usize)> = (0..3)
        .flat_map(|j| free.iter().map(move |&v| (j, v)))
        .collect();
    let a = QMat::from_fn(4 * monos.len(), unknowns.len(), |r, k| {
        let (i, m) = (r / monos.len(), &monos[r % monos.len()]);
        let (j, v) = unknowns[k];
        (&red[i][j].to_poly() * &Polynomial::var(v)).coeff(m)
    });
    let kernel = a.kernel_basis();
    let k = kernel.first()?;
    let vecs = QMat::from_fn(free.len(), 3, |wi, j| k[j * free.len() + wi].clone());
    let (rref, piv) = vecs.rref();
    if piv.len() != 2 {
        return None;
    }
    let c = complete_columns(&[rref.row(0).to_vec(), rref.row(1).to_vec()], 3)?;
    let mut w = Work::new(n);
    w.cols(&c);

    let red = reduced_rows(&w.cur, modh);
    let cols01: Vec<Vec<LinearForm>> = red.iter().map(|r| r[..2].to_vec()).collect();
    let u = form_kernel(&cols01);
    if u.len() != 3 {
        return None;
    }
    w.rows(&QMat::complete_rows(&u, 4)?);

    let kmat = QMat::from_rows(
        (0..3)
            .map(|i| quotients(&w.cur.row(i)[..2], modh))
            .collect::<Option<Vec<_>>>()?,
    );
    if kmat.rank() != 2 {
        return None;
    }
    let kt = kmat.transpose();
    let g1 = kt.kernel_basis().first()?.clone();
    let g2 = kt.solve(&[Q::zero(), Q::one()])?;
    let g3 = kt.solve(&[Q::one(), Q::zero()])?;
    w.rows(&embed(&QMat::from_rows(vec![g1, g2, g3]), 0, 4));
    Some(Found {
        family: CanonicalFamily::D,
        work: w,
        extras: FamilyExtras::default(),
        specialized: kernel.len() > 1,
    })
}

fn permutation(order: &[usize]) -> QMat {
    let n = order.len();
    QMat::from_fn(
        n,
        n,
        |i, j| if order[i] == j { Q::one() } else { Q::zero() },
    )
}

fn ells(n: &LinFormMatrix, q: &Polynomial) -> Option<Vec<LinearForm>> {
    n.maximal_minors_signed()
        .ok()?
        .iter()
        .map(|d| d.divide_exact(q).ok()?.to_linear_form())
        .collect()
}

fn degree_two(n: &LinFormMatrix, q: &Polynomial, minors: &[Polynomial]) -> Option<Found> {
    let ell: Vec<LinearForm> = minors
        .iter()
        .map(|d| d.divide_exact(q).ok()?.to_linear_form())
        .collect::<Option<_>>()?;
    match span_dimension(&ell) {
        4 => {
            let w = Work::new(n);
            let s = s1_matrix(&ell);
            let x = solve_factor(&w.cur, &s, &[false; 6])?;
            let xq = QMat::from_fn(6, 3, |i, j| x[i][j].coeff(&Default::default()));
            Some(Found {
                family: CanonicalFamily::S1X1,
                work: w,
                specialized: xq.rank() < 3,
                extras: FamilyExtras {
                    ell,
                    x,
                    ..Default::default()
                },
            })
        }
        3 => {
            let rel = form_kernel(&ell.iter().map(|l| vec![l.clone()]).collect::<Vec<_>>());
            let rel = rel.first()?;
            let k = rel.iter().position(|c| !c.is_zero())?;
            let mut order: Vec<usize> = (0..4).collect();
            order.swap(0, k);
            let mut w = Work::new(n);
            w.rows(&permutation(&order));
            let ell = ells(&w.cur, q)?;
            let rel = form_kernel(&ell.iter().map(|l| vec![l.clone()]).collect::<Vec<_>>());
            let rel = rel.first()?;
            if rel[0].is_zero() {
                return None;
            }
            let z: Vec<Q> = rel[1..].iter().map(|c| c / &rel[0]).collect();
            let s = s2_matrix(&ell, &z);
            let x = solve_factor(&w.cur, &s, &[true, false, false, false])?;
            Some(Found {
                family: CanonicalFamily::S2X2,
                work: w,
                specialized: false,
                extras: FamilyExtras {
                    ell,
                    z,
                    x,
                    ..Default::default()
                },
            })
        }
        2 => {
            let (i, j) = (0..4)
                .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
                .find(|&(i, j)| span_dimension(&[ell[i].clone(), ell[j].clone()]) == 2)?;
            let mut order: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
            order.extend([i, j]);
            let mut w = Work::new(n);
            w.rows(&permutation(&order));
            let ell = ells(&w.cur, q)?;
            let basis = [vec![ell[2].clone()], vec![ell[3].clone()]];
            let z1 = form_solve(&basis, &[ell[0].scale(&-Q::one())])?;
            let z2 = form_solve(&basis, &[ell[1].scale(&-Q::one())])?;
            let z = vec![z1[0].clone(), z2[0].clone(), z1[1].clone(), z2[1].clone()];
            let s = s3_matrix(&ell, &z);
            let x = solve_factor(&w.cur, &s, &[true, true, false])?;
            let singular = determinant(&x).is_zero();
            Some(Found {
                family: CanonicalFamily::S3X3,
                work: w,
                specialized: singular,
                extras: FamilyExtras {
                    ell,
                    z,
                    x,
                    ..Default::default()
                },
            })
        }
        _ => None,
    }
}

/// Solve `n = s * x` where row `k` of `x` holds linear forms if
/// `linear_row[k]`, constants otherwise. The columns of `s` hold forms of
/// degree one or zero, matching.
fn solve_factor(
    n: &LinFormMatrix,
    s: &[Vec<Polynomial>],
    linear_row: &[bool],
) -> Option<Vec<Vec<Polynomial>>> {
    let k = linear_row.len();
    // unknowns: for linear rows, 5 coefficients; for constant rows, 1
    let mut unknowns: Vec<(usize, Option<usize>)> = Vec::new();
    for (r, &lin) in linear_row.iter().enumerate() {
        if lin {
            unknowns.extend((0..NVARS).map(|v| (r, Some(v))));
        } else {
            unknowns.push((r, None));
        }
    }
    let mut x = vec![vec![Polynomial::zero(); n.ncols()]; k];
    for j in 0..n.ncols() {
        // each unknown contributes s[:, r] * (x_v or 1): quadratics or
        // linear forms; compare coefficients of the target column
        let contrib: Vec<Vec<Polynomial>> = unknowns
            .iter()
            .map(|&(r, v)| {
                let m = v.map_or_else(Polynomial::one, Polynomial::var);
                (0..n.nrows()).map(|i| &s[i][r] * &m).collect()
            })
            .collect();
        let target: Vec<Polynomial> = n.col(j).iter().map(LinearForm::to_poly).collect();
        let mut monos: Vec<_> = contrib
            .iter()
            .flatten()
            .chain(target.iter())
            .flat_map(|p| p.terms().map(|(m, _)| *m))
            .collect();
        monos.sort();
        monos.dedup();
        let rows = n.nrows() * monos.len();
        let a = QMat::from_fn(rows, unknowns.len(), |r, u| {
            contrib[u][r / monos.len()].coeff(&monos[r % monos.len()])
        });
        let b: Vec<Q> = (0..rows)
            .map(|r| target[r / monos.len()].coeff(&monos[r % monos.len()]))
            .collect();
        let sol = a.solve(&b)?;
        for (u, &(r, v)) in unknowns.iter().enumerate() {
            let m = v.map_or_else(Polynomial::one, Polynomial::var);
            x[r][j] = &x[r][j] + &m.scale(&sol[u]);
        }
    }
    Some(x)
}

fn is_zero(m: &LinFormMatrix, cells: &[(usize, usize)]) -> bool {
    cells.iter().all(|&(i, j)| m.get(i, j).is_zero())
}

/// Exact check that `m` has the zero pattern and repeated entries of the
/// family's template (with the family parameters in `extras`).
pub fn matches_template(family: CanonicalFamily, m: &LinFormMatrix, extras: &FamilyExtras) -> bool {
    use CanonicalFamily::*;
    if m.nrows() != 4 || m.ncols() != 3 {
        return false;
    }
    let product_is = |s: Vec<Vec<Polynomial>>| {
        if extras.x.is_empty() {
            return false;
        }
        let p = poly_matmul(&s, &extras.x);
        p == m.to_poly_rows()
    };
    match family {
        A => is_zero(m, &[(0, 2), (1, 2), (2, 2)]) && !m.get(3, 2).is_zero(),
        B => {
            is_zero(m, &[(0, 0), (0, 1), (1, 0), (1, 2)])
                && m.get(0, 2) == m.get(1, 1)
                && !m.get(0, 2).is_zero()
        }
        C => {
            let (Some(al), Some(be)) = (&extras.alpha, &extras.beta) else {
                return false;
            };
            if al.is_zero() && be.is_zero() {
                return false;
            }
            is_zero(m, &[(0, 0), (0, 1), (1, 0), (2, 1), (3, 2)])
                && *m.get(0, 2) == m.get(2, 0).scale(al).add(&m.get(1, 1).scale(be))
                && *m.get(1, 2) == m.get(3, 0).scale(al)
                && *m.get(2, 2) == m.get(3, 1).scale(be)
                && !m.get(0, 2).is_zero()
        }
        D => {
            is_zero(m, &[(0, 0), (0, 1), (1, 0), (2, 1)])
                && m.get(1, 1) == m.get(2, 0)
                && !m.get(1, 1).is_zero()
        }
        S1X1 => {
            extras.ell.len() == 4
                && extras.x.len() == 6
                && extras.x.iter().flatten().all(Polynomial::is_constant)
                && product_is(s1_matrix(&extras.ell))
        }
        S2X2 => {
            extras.ell.len() == 4
                && extras.z.len() == 3
                && extras.x.len() == 4
                && extras.x[1..].iter().flatten().all(Polynomial::is_constant)
                && product_is(s2_matrix(&extras.ell, &extras.z))
        }
        S3X3 => {
            extras.ell.len() == 4
                && extras.z.len() == 4
                && extras.x.len() == 3
                && extras.x[2].iter().all(Polynomial::is_constant)
                && product_is(s3_matrix(&extras.ell, &extras.z))
        }
        NonDegenerate | Degenerate => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::{parse_polynomial, q};
    use crate::linclass::family::{random_instance, random_params};
    use crate::linclass::{build_family, FamilyParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scramble<R: Rng>(m: &LinFormMatrix, rng: &mut R) -> LinFormMatrix {
        let rand_inv = |n: usize, rng: &mut R| loop {
            let a = QMat::from_fn(n, n, |_, _| q(rng.random_range(-2..=2)));
            if !a.det().is_zero() {
                return a;
            }
        };
        let r = rand_inv(4, rng);
        let c = rand_inv(3, rng);
        m.transform(&r, &c)
    }

    fn round_trip(tag: CanonicalFamily, count: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..count {
            let (m, _, _) = random_instance(tag, &mut rng).unwrap();
            let n = scramble(&m, &mut rng);
            let c = classify_4x3(&n).unwrap();
            assert_eq!(c.family, tag, "input:\n{n}");
            assert!(c.verify(&n), "certificate failed for\n{n}");
        }
    }

    #[test]
    fn round_trip_each_family() {
        for (k, tag) in [
            CanonicalFamily::A,
            CanonicalFamily::B,
            CanonicalFamily::C,
            CanonicalFamily::D,
            CanonicalFamily::S1X1,
            CanonicalFamily::S2X2,
            CanonicalFamily::S3X3,
        ]
        .into_iter()
        .enumerate()
        {
            round_trip(tag, 5, 100 + k as u64);
        }
    }

    #[test]
    fn generic_is_nondegenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_params(CanonicalFamily::NonDegenerate, &mut rng).unwrap();
        let n = build_family(CanonicalFamily::NonDegenerate, &p).unwrap();
        assert_eq!(
            classify_4x3(&n).unwrap().family,
            CanonicalFamily::NonDegenerate
        );
    }

    #[test]
    fn cone_example_recovers_x1() {
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
        let n = build_family(CanonicalFamily::S1X1, &params).unwrap();
        let c = classify_4x3(&n).unwrap();
        assert_eq!(c.family, CanonicalFamily::S1X1);
        let cone = parse_polynomial("x1^2+2*x1*x2+3*x1*x3+x1*x4+6*x2*x3").unwrap();
        assert_eq!(c.common_factor, cone);
        // the recovered X1 is a nonzero multiple of the printed one
        let printed = QMat::from_fn(6, 3, |i, j| q(x1[i][j]));
        let got = QMat::from_fn(6, 3, |i, j| c.extras.x[i][j].coeff(&Default::default()));
        let ratio = &got[(2, 0)] / &printed[(2, 0)];
        assert_eq!(got, printed.map(|v| v * &ratio));
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let c = classify_4x3(&LinFormMatrix::zeros(4, 3)).unwrap();
        assert_eq!(c.family, CanonicalFamily::Degenerate);
        assert!(c.specialized);
    }
}
