//! Linear systems over coefficient vectors of linear forms.

use num_traits::{One, Zero};

use crate::exactpoly::{LinearForm, NVARS, Q};
use crate::linalg::QMat;

/// Matrix whose column `k` stacks the coefficients of every form in
/// `cols[k]`. All columns must have the same length.
fn stacked(cols: &[Vec<LinearForm>]) -> QMat {
    let m = cols.first().map_or(0, Vec::len);
    QMat::from_fn(m * NVARS, cols.len(), |r, k| {
        cols[k][r / NVARS].0[r % NVARS].clone()
    })
}

/// Scalars `y` (a basis of them) with `sum_k y_k cols[k] = 0` as forms.
pub(crate) fn form_kernel(cols: &[Vec<LinearForm>]) -> Vec<Vec<Q>> {
    if cols.is_empty() {
        return Vec::new();
    }
    stacked(cols).kernel_basis()
}

/// Some `y` with `sum_k y_k cols[k] = rhs`, if one exists.
pub(crate) fn form_solve(cols: &[Vec<LinearForm>], rhs: &[LinearForm]) -> Option<Vec<Q>> {
    let a = stacked(cols);
    let b: Vec<Q> = rhs.iter().flat_map(|l| l.0.iter().cloned()).collect();
    if cols.is_empty() {
        return b.iter().all(Zero::is_zero).then(Vec::new);
    }
    a.solve(&b)
}

/// Arithmetic modulo a nonzero linear form `h`.
///
/// Forms are reduced by eliminating the first variable with a nonzero
/// coefficient in `h`, so reduced forms live in the other four variables.
#[derive(Clone, Debug)]
pub(crate) struct ModH {
    pub h: LinearForm,
    pivot: usize,
}

impl ModH {
    pub fn new(h: &LinearForm) -> Self {
        let pivot = h.0.iter().position(|c| !c.is_zero()).expect("nonzero form");
        let h = h.scale(&(Q::one() / &h.0[pivot]));
        ModH { h, pivot }
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    pub fn reduce(&self, l: &LinearForm) -> LinearForm {
        l.sub(&self.h.scale(&l.0[self.pivot]))
    }

    /// `c` with `l = c * h`, if `l` is a multiple of `h`.
    pub fn quotient(&self, l: &LinearForm) -> Option<Q> {
        self.reduce(l).is_zero().then(|| l.0[self.pivot].clone())
    }
}

/// Row vector times a column of forms.
pub(crate) fn dot(r: &[Q], forms: &[LinearForm]) -> LinearForm {
    crate::exactpoly::combine(forms, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::{parse_linear_form, q};

    fn f(s: &str) -> LinearForm {
        parse_linear_form(s).unwrap()
    }

    #[test]
    fn reduction_mod_form() {
        let m = ModH::new(&f("2*x2 - 4*x3"));
        assert_eq!(
            m.quotient(&f("x2 - 2*x3")),
            Some(crate::exactpoly::qr(1, 1))
        );
        assert_eq!(m.quotient(&f("-3*x2 + 6*x3")), Some(q(-3)));
        assert!(m.quotient(&f("x1")).is_none());
        assert_eq!(m.reduce(&f("x2 + x1")), f("x1 + 2*x3"));
    }

    #[test]
    fn kernel_and_solve() {
        let cols = vec![vec![f("x1")], vec![f("x2")], vec![f("x1 + x2")]];
        let k = form_kernel(&cols);
        assert_eq!(k.len(), 1);
        let y = form_solve(&cols[..2], &[f("3*x1 - x2")]).unwrap();
        assert_eq!(y, vec![q(3), q(-1)]);
        assert!(form_solve(&cols[..2], &[f("x3")]).is_none());
    }
}
