//! Matrices of linear forms whose maximal minors share a common factor.

mod classify;
mod family;
pub(crate) mod forms;
mod small;

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactpoly::{
    determinant, format_rational, parse_rational, ExactPolyError, LinearForm, Polynomial, NVARS, Q,
};
use crate::linalg::{Mat, QMat};

pub use classify::{classify_4x3, matches_template};
pub use family::{
    build_family, family_realizable, random_instance, random_params, s1_matrix, s2_matrix,
    s3_matrix, FamilyParams,
};
pub use small::{classify_3x2, reduce_2x2, Classification3x2, Reduction2x2, Template3x2};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinClassError {
    #[error("expected a {expected} matrix, got {rows}x{cols}")]
    ShapeMismatch {
        expected: String,
        rows: usize,
        cols: usize,
    },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("determinant is not a product of two linear forms")]
    NotReducible,
    #[error("determinant factors only over an extension of the rationals")]
    NotReducibleOverQ,
    #[error("invalid family parameters: {0}")]
    InvalidParams(String),
    #[error("malformed matrix: {0}")]
    Malformed(String),
    #[error(transparent)]
    Poly(#[from] ExactPolyError),
}

/// Rectangular matrix of linear forms in `x1..x5`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LinFormMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<LinearForm>,
}

impl LinFormMatrix {
    pub fn new(rows: Vec<Vec<LinearForm>>) -> Result<Self, LinClassError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(LinClassError::Malformed("ragged or empty rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![LinearForm::zero(); rows * cols],
        }
    }

    /// Build from text entries such as `"x1 - 2*x3"` or `"0"`.
    pub fn from_strs(rows: &[&[&str]]) -> Result<Self, LinClassError> {
        let parsed = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| {
                        let p: Polynomial = s.parse()?;
                        p.to_linear_form().ok_or_else(|| {
                            LinClassError::Malformed(format!("`{s}` is not a linear form"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(parsed)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &LinearForm {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, l: LinearForm) {
        self.entries[i * self.cols + j] = l;
    }

    pub fn row(&self, i: usize) -> Vec<LinearForm> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<LinearForm> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<LinearForm>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn to_poly_rows(&self) -> Vec<Vec<Polynomial>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_poly()).collect())
            .collect()
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self {
            rows: rows.len(),
            cols: cols.len(),
            entries: rows
                .iter()
                .flat_map(|&i| cols.iter().map(move |&j| self.get(i, j).clone()))
                .collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            entries: (0..self.cols)
                .flat_map(|j| (0..self.rows).map(move |i| self.get(i, j).clone()))
                .collect(),
        }
    }

    /// `r * self` for a constant matrix `r`.
    pub fn left_mul(&self, r: &QMat) -> Self {
        assert_eq!(r.ncols(), self.rows);
        let mut out = Self::zeros(r.nrows(), self.cols);
        for i in 0..r.nrows() {
            for j in 0..self.cols {
                let col = self.col(j);
                out.set(i, j, forms::dot(r.row(i), &col));
            }
        }
        out
    }

    /// `self * c` for a constant matrix `c`.
    pub fn right_mul(&self, c: &QMat) -> Self {
        self.transpose().left_mul(&c.transpose()).transpose()
    }

    /// `r * self * c`.
    pub fn transform(&self, r: &QMat, c: &QMat) -> Self {
        self.left_mul(r).right_mul(c)
    }

    /// Constant matrix `self(p)`.
    pub fn evaluate(&self, p: &[Q]) -> QMat {
        QMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).evaluate(p))
    }

    pub fn evaluate_f64(&self, p: &[f64]) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).evaluate_f64(p))
    }

    /// Coefficient matrix of variable `v`: `self = sum_v x_v * coeff_matrix(v)`.
    pub fn coeff_matrix(&self, v: usize) -> QMat {
        QMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).0[v].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(LinearForm::is_zero)
    }

    /// Signed maximal minors `D_i = (-1)^i det(M without row i)` (zero-based),
    /// so that `D * M = 0`.
    pub fn maximal_minors_signed(&self) -> Result<Vec<Polynomial>, LinClassError> {
        if self.rows != self.cols + 1 {
            return Err(LinClassError::ShapeMismatch {
                expected: "(n+1)xn".into(),
                rows: self.rows,
                cols: self.cols,
            });
        }
        let all = self.to_poly_rows();
        Ok((0..self.rows)
            .map(|i| {
                let sub: Vec<Vec<Polynomial>> = all
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, r)| r.clone())
                    .collect();
                let d = determinant(&sub);
                if i % 2 == 0 {
                    d
                } else {
                    -d
                }
            })
            .collect())
    }

    /// Skew-symmetric matrix of signed `n x n` minors of an `(n+2) x n`
    /// matrix; its rows annihilate `self`.
    pub fn skew_syzygy_matrix(&self) -> Result<Vec<Vec<Polynomial>>, LinClassError> {
        let n = self.cols;
        if self.rows != n + 2 || n > 2 {
            return Err(LinClassError::ShapeMismatch {
                expected: "(n+2)xn with n <= 2".into(),
                rows: self.rows,
                cols: self.cols,
            });
        }
        let all_cols: Vec<usize> = (0..n).collect();
        for i in 0..self.rows {
            let keep: Vec<usize> = (0..self.rows).filter(|&k| k != i).collect();
            let minors = self.select(&keep, &all_cols).maximal_minors_signed()?;
            let g = crate::exactpoly::gcd_many(&minors)?;
            if !g.is_constant() || g.is_zero() {
                return Err(LinClassError::HypothesisViolated(format!(
                    "submatrix without row {} drops rank in codimension 1",
                    i + 1
                )));
            }
        }
        let all = self.to_poly_rows();
        let m = self.rows;
        let mut d = vec![vec![Polynomial::zero(); m]; m];
        for i in 0..m {
            for j in i + 1..m {
                let sub: Vec<Vec<Polynomial>> = (0..m)
                    .filter(|&k| k != i && k != j)
                    .map(|k| all[k].clone())
                    .collect();
                // (-1)^{i+j} with one-based indices has the same parity
                let v = determinant(&sub);
                let v = if (i + j) % 2 == 0 { v } else { -v };
                d[j][i] = -&v;
                d[i][j] = v;
            }
        }
        Ok(d)
    }
}

/// `r * N` for a constant row vector `r`.
pub(crate) fn forms_row(r: &[Q], n: &LinFormMatrix) -> Vec<LinearForm> {
    (0..n.ncols()).map(|j| forms::dot(r, &n.col(j))).collect()
}

/// `row_vector * M` for a vector of polynomials and a matrix of forms.
pub fn poly_row_times(v: &[Polynomial], m: &LinFormMatrix) -> Vec<Polynomial> {
    (0..m.ncols())
        .map(|j| {
            v.iter()
                .enumerate()
                .fold(Polynomial::zero(), |acc, (i, p)| {
                    &acc + &(p * &m.get(i, j).to_poly())
                })
        })
        .collect()
}

impl fmt::Display for LinFormMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[ {} ]", cells.join(" | "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for LinFormMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct LinFormMatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Vec<String>>>,
}

impl Serialize for LinFormMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LinFormMatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .map(|l| l.0.iter().map(format_rational).collect())
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinFormMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = LinFormMatrixJson::deserialize(d)?;
        let rows = raw
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cs| {
                        if cs.len() != NVARS {
                            return Err(D::Error::custom("each entry needs 5 coefficients"));
                        }
                        let v: Vec<Q> = cs
                            .iter()
                            .map(|c| parse_rational(c).map_err(D::Error::custom))
                            .collect::<Result<_, _>>()?;
                        Ok(LinearForm::from_slice(&v))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let m = LinFormMatrix::new(rows).map_err(D::Error::custom)?;
        if m.rows != raw.rows || m.cols != raw.cols {
            return Err(D::Error::custom(format!(
                "declared {}x{} but entries are {}x{}",
                raw.rows, raw.cols, m.rows, m.cols
            )));
        }
        Ok(m)
    }
}

/// Normal forms of 4x3 matrices of linear forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CanonicalFamily {
    A,
    B,
    C,
    D,
    S1X1,
    S2X2,
    S3X3,
    /// The maximal minors have no common factor.
    NonDegenerate,
    /// Identically vanishing minors, a common factor of degree three, or a
    /// degree-one case none of the normal forms could certify.
    Degenerate,
}

impl CanonicalFamily {
    pub const ALL: [CanonicalFamily; 9] = [
        Self::A,
        Self::B,
        Self::C,
        Self::D,
        Self::S1X1,
        Self::S2X2,
        Self::S3X3,
        Self::NonDegenerate,
        Self::Degenerate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::C => "C",
            Self::D => "D",
            Self::S1X1 => "S1X1",
            Self::S2X2 => "S2X2",
            Self::S3X3 => "S3X3",
            Self::NonDegenerate => "NonDegenerate",
            Self::Degenerate => "Degenerate",
        }
    }

    /// Degree of the common factor of the maximal minors.
    pub fn factor_degree(&self) -> Option<u32> {
        match self {
            Self::A | Self::B | Self::C | Self::D => Some(1),
            Self::S1X1 | Self::S2X2 | Self::S3X3 => Some(2),
            Self::NonDegenerate => Some(0),
            Self::Degenerate => None,
        }
    }
}

impl fmt::Display for CanonicalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CanonicalFamily {
    type Err = LinClassError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| LinClassError::InvalidParams(format!("unknown family `{s}`")))
    }
}

/// Family parameters read off a canonical form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyExtras {
    pub alpha: Option<Q>,
    pub beta: Option<Q>,
    /// `l_1..l_4` with `D_i = q * l_i` (degree-two families).
    pub ell: Vec<LinearForm>,
    /// Relation scalars of the `S` matrix.
    pub z: Vec<Q>,
    /// The factor `X_i` with `canonical = S_i * X_i`.
    pub x: Vec<Vec<Polynomial>>,
}

/// Result of classifying a matrix: `canonical = r * N * c`.
#[derive(Clone, Debug)]
pub struct Canonicalization {
    pub family: CanonicalFamily,
    pub r: QMat,
    pub c: QMat,
    pub canonical: LinFormMatrix,
    pub common_factor: Polynomial,
    pub extras: FamilyExtras,
    /// Set when the input only reaches its family through a specialization
    /// (extra vanishing, rank-deficient factor) or could not be certified.
    pub specialized: bool,
    pub note: Option<String>,
}

impl Canonicalization {
    /// Exact check of every claim carried by the certificate.
    pub fn verify(&self, n: &LinFormMatrix) -> bool {
        let invertible = |m: &QMat| m.nrows() == m.ncols() && !m.det().is_zero();
        if !invertible(&self.r) || !invertible(&self.c) {
            return false;
        }
        if n.transform(&self.r, &self.c) != self.canonical {
            return false;
        }
        if n.nrows() == n.ncols() + 1 && !self.common_factor.is_zero() {
            let Ok(minors) = n.maximal_minors_signed() else {
                return false;
            };
            if minors
                .iter()
                .any(|m| m.divide_exact(&self.common_factor).is_err())
            {
                return false;
            }
        }
        matches_template(self.family, &self.canonical, &self.extras)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mat = |m: &QMat| -> Vec<Vec<String>> {
            m.to_rows()
                .iter()
                .map(|r| r.iter().map(format_rational).collect())
                .collect()
        };
        let polys = |rows: &Vec<Vec<Polynomial>>| -> Vec<Vec<String>> {
            rows.iter()
                .map(|r| r.iter().map(ToString::to_string).collect())
                .collect()
        };
        serde_json::json!({
            "family": self.family.name(),
            "specialized": self.specialized,
            "note": self.note,
            "common_factor": self.common_factor.to_string(),
            "R": mat(&self.r),
            "C": mat(&self.c),
            "canonical": self.canonical.to_rows().iter()
                .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "alpha": self.extras.alpha.as_ref().map(format_rational),
            "beta": self.extras.beta.as_ref().map(format_rational),
            "ell": self.extras.ell.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "z": self.extras.z.iter().map(format_rational).collect::<Vec<_>>(),
            "X": polys(&self.extras.x),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::random_linear_form;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> LinFormMatrix {
        LinFormMatrix::new(
            (0..rows)
                .map(|_| (0..cols).map(|_| random_linear_form(rng)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn koszul_minors_of_a_column() {
        let m = LinFormMatrix::from_strs(&[&["x1"], &["x2"]]).unwrap();
        let d = m.maximal_minors_signed().unwrap();
        assert_eq!(d[0].to_string(), "x2");
        assert_eq!(d[1].to_string(), "-x1");
    }

    #[test]
    fn minors_annihilate_random_4x3() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let m = random_matrix(4, 3, &mut rng);
            let d = m.maximal_minors_signed().unwrap();
            assert!(poly_row_times(&d, &m).iter().all(Polynomial::is_zero));
        }
    }

    #[test]
    fn skew_syzygies() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (r, c) in [(3, 1), (4, 2)] {
            let m = random_matrix(r, c, &mut rng);
            let d = m.skew_syzygy_matrix().unwrap();
            for i in 0..r {
                assert_eq!(d[i][i], Polynomial::zero());
                for j in 0..r {
                    assert_eq!(d[i][j], -&d[j][i]);
                    if i != j {
                        assert_eq!(d[i][j].homogeneous_degree(), Some(c as u32));
                    }
                }
                assert!(poly_row_times(&d[i], &m).iter().all(Polynomial::is_zero));
            }
        }
    }

    #[test]
    fn repeated_column_violates_hypothesis() {
        let m = LinFormMatrix::from_strs(&[
            &["x1", "2*x1"],
            &["x2", "2*x2"],
            &["x3", "2*x3"],
            &["x4", "2*x4"],
        ])
        .unwrap();
        assert!(matches!(
            m.skew_syzygy_matrix(),
            Err(LinClassError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let m = LinFormMatrix::from_strs(&[&["x1 - 1/2*x3", "0"], &["x5", "7*x2"]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"-1/2\""));
        let back: LinFormMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn transform_is_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(4, 3, &mut rng);
        let r = QMat::from_i64_rows(&[&[1, 2, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 3], &[1, 0, 0, 1]]);
        let c = QMat::from_i64_rows(&[&[1, 0, 1], &[0, 2, 0], &[0, 0, 1]]);
        let t = m.transform(&r, &c);
        let p: Vec<Q> = (1..=5).map(crate::exactpoly::q).collect();
        assert_eq!(t.evaluate(&p), r.mul(&m.evaluate(&p)).mul(&c));
    }
}
