//! Projections P^4 -> P^2, their centers and the trifocal Grassmann tensor.
//!
//! Tensor convention: for profile (2,2,1)
//!
//! `T[i][j][k] = (-1)^(i+j) det [P1 without row i; P2 without row j; row k of P3]`
//!
//! (zero-based indices), paired with the dual line `p = z x w` of the third
//! view, so that `det(9x9 system) = sum T[i][j][k] x_i y_j p_k` exactly.
//! The printed convention indexes the third slot by row `4 - k` and uses the
//! Pluecker order (12, 13, 23); [`TrifocalTensor::to_printed_convention`]
//! converts between the two.

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactpoly::Q;
use crate::linalg::{Field, Mat, QMat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultiviewError {
    #[error("camera must be 3x5, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("camera matrix does not have rank 3")]
    RankDeficient,
    #[error("both center points map to the same image point")]
    DegenerateImage,
    #[error("scene point lies on the center of projection")]
    OnCenter,
    #[error("the two image points are dependent")]
    DependentPoints,
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
}

/// Relative size below which floating quantities count as zero.
pub const FLOAT_ZERO: f64 = 1e-12;

fn negligible<T: Field>(v: &[T], scale: f64) -> bool {
    if T::EXACT {
        v.iter().all(Field::is_zero)
    } else {
        v.iter()
            .all(|x| x.to_f64().abs() <= FLOAT_ZERO * scale.max(1e-300))
    }
}

fn norm<T: Field>(v: &[T]) -> f64 {
    v.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt()
}

pub fn cross<T: Field>(a: &[T], b: &[T]) -> [T; 3] {
    [
        a[1].mul(&b[2]).sub(&a[2].mul(&b[1])),
        a[2].mul(&b[0]).sub(&a[0].mul(&b[2])),
        a[0].mul(&b[1]).sub(&a[1].mul(&b[0])),
    ]
}

pub fn dot<T: Field>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
}

/// A 3x5 projection matrix of rank 3.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Camera<T> {
    m: Mat<T>,
}

impl<T: std::fmt::Display> std::fmt::Debug for Camera<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Camera {:?}", self.m)
    }
}

pub type QCamera = Camera<Q>;

impl<T: Field> Camera<T> {
    pub fn new(m: Mat<T>) -> Result<Self, MultiviewError> {
        if m.nrows() != 3 || m.ncols() != 5 {
            return Err(MultiviewError::Shape {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let cam = Camera { m };
        if cam.rank() != 3 {
            return Err(MultiviewError::RankDeficient);
        }
        Ok(cam)
    }

    fn rank(&self) -> usize {
        if T::EXACT {
            self.m.rank()
        } else {
            singular_values(&self.m.to_f64())
                .iter()
                .filter(|&&s| s > 1e-10 * self.m.to_f64().max_abs_f64())
                .count()
        }
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.m
    }

    pub fn row(&self, i: usize) -> &[T] {
        self.m.row(i)
    }

    pub fn apply(&self, x: &[T]) -> [T; 3] {
        let v = self.m.mul_vec(x);
        [v[0].clone(), v[1].clone(), v[2].clone()]
    }

    pub fn project(&self, x: &[T]) -> Result<[T; 3], MultiviewError> {
        let v = self.apply(x);
        if negligible(&v, norm(x) * self.m.to_f64().max_abs_f64()) {
            return Err(MultiviewError::OnCenter);
        }
        Ok(v)
    }

    pub fn to_f64(&self) -> Camera<f64> {
        Camera { m: self.m.to_f64() }
    }

    pub fn scaled(&self, s: &T) -> Self {
        Camera {
            m: self.m.map(|x| x.mul(s)),
        }
    }

    /// Two spanning points of the center line (the right kernel).
    pub fn center(&self) -> [Vec<T>; 2] {
        if T::EXACT {
            let k = self.m.kernel_basis();
            [k[0].clone(), k[1].clone()]
        } else {
            let k = null_space_f64(&self.m.to_f64(), 2);
            let conv = |v: &Vec<f64>| v.iter().map(|x| T::from_f64(*x)).collect();
            [conv(&k[0]), conv(&k[1])]
        }
    }
}

impl QCamera {
    pub fn from_i64(rows: &[[i64; 5]; 3]) -> Self {
        let refs: Vec<&[i64]> = rows.iter().map(|r| &r[..]).collect();
        Camera::new(QMat::from_i64_rows(&refs)).expect("fixture camera has rank 3")
    }
}

trait MaxAbs {
    fn max_abs_f64(&self) -> f64;
}

impl MaxAbs for Mat<f64> {
    fn max_abs_f64(&self) -> f64 {
        (0..self.nrows())
            .flat_map(|i| self.row(i).iter().map(|x| x.abs()))
            .fold(0.0, f64::max)
    }
}

fn to_dmatrix(m: &Mat<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn singular_values(m: &Mat<f64>) -> Vec<f64> {
    to_dmatrix(m).singular_values().iter().copied().collect()
}

/// Right singular vectors of the `k` smallest singular values, with the
/// matrix zero-padded to be at least square.
pub(crate) fn null_space_f64(m: &Mat<f64>, k: usize) -> Vec<Vec<f64>> {
    let n = m.ncols();
    let rows = m.nrows().max(n);
    let a = DMatrix::from_fn(rows, n, |i, j| if i < m.nrows() { m[(i, j)] } else { 0.0 });
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    order[..k]
        .iter()
        .map(|&r| vt.row(r).iter().copied().collect())
        .collect()
}

/// Dual coordinates of the image of a center line under `p_r`: the epipole.
pub fn epipole_line<T: Field>(
    p_r: &Camera<T>,
    c_s: &[Vec<T>; 2],
) -> Result<[T; 3], MultiviewError> {
    let a = p_r.apply(&c_s[0]);
    let b = p_r.apply(&c_s[1]);
    let l = cross(&a, &b);
    if negligible(&l, norm(&a) * norm(&b)) {
        return Err(MultiviewError::DegenerateImage);
    }
    Ok(l)
}

/// Dual vector `z x w` of the line through two image points.
pub fn line_through<T: Field>(z: &[T], w: &[T]) -> Result<[T; 3], MultiviewError> {
    let p = cross(z, w);
    if negligible(&p, norm(z) * norm(w)) {
        return Err(MultiviewError::DependentPoints);
    }
    Ok(p)
}

/// Which view carries the line (codimension 1): `P221` means the third.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Profile {
    P221,
    P212,
    P122,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::P221, Profile::P212, Profile::P122];

    pub fn codims(&self) -> [u8; 3] {
        match self {
            Profile::P221 => [2, 2, 1],
            Profile::P212 => [2, 1, 2],
            Profile::P122 => [1, 2, 2],
        }
    }

    /// Index of the view observed through a line.
    pub fn line_view(&self) -> usize {
        self.codims().iter().position(|&c| c == 1).unwrap()
    }

    /// Views in the order (point, point, line).
    fn roles(&self) -> [usize; 3] {
        match self {
            Profile::P221 => [0, 1, 2],
            Profile::P212 => [0, 2, 1],
            Profile::P122 => [1, 2, 0],
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = self.codims();
        write!(f, "{}{}{}", c[0], c[1], c[2])
    }
}

impl std::str::FromStr for Profile {
    type Err = MultiviewError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(char::is_ascii_digit).collect();
        match t.as_str() {
            "221" => Ok(Profile::P221),
            "212" => Ok(Profile::P212),
            "122" => Ok(Profile::P122),
            _ => Err(MultiviewError::UnknownProfile(s.to_string())),
        }
    }
}

/// 3x3x3 tensor; `get(i, j, k)` indexes views 1, 2, 3 in their natural
/// order whatever the profile, with the line view's index running over
/// the dual coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrifocalTensor<T> {
    entries: Vec<T>,
    pub profile: Profile,
}

fn flat(i: usize, j: usize, k: usize) -> usize {
    9 * i + 3 * j + k
}

fn without_row<T: Field>(p: &Camera<T>, r: usize) -> Vec<Vec<T>> {
    (0..3)
        .filter(|&i| i != r)
        .map(|i| p.row(i).to_vec())
        .collect()
}

fn sign(n: usize) -> i64 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `(2,2,1)` tensor of three cameras, with the third one seen through lines.
fn tensor_221<T: Field>(p1: &Camera<T>, p2: &Camera<T>, p3: &Camera<T>) -> Vec<T> {
    let mut out = vec![T::zero(); 27];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut rows = without_row(p1, i);
                rows.extend(without_row(p2, j));
                rows.push(p3.row(k).to_vec());
                let d = Mat::from_rows(rows).det();
                out[flat(i, j, k)] = d.mul(&T::from_i64(sign(i + j)));
            }
        }
    }
    out
}

pub fn trifocal_from_cameras<T: Field>(
    p1: &Camera<T>,
    p2: &Camera<T>,
    p3: &Camera<T>,
    profile: Profile,
) -> TrifocalTensor<T> {
    let cams = [p1, p2, p3];
    let r = profile.roles();
    let base = tensor_221(cams[r[0]], cams[r[1]], cams[r[2]]);
    // base is indexed by (role 0, role 1, role 2); re-index by view
    let mut entries = vec![T::zero(); 27];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let mut idx = [0; 3];
                idx[r[0]] = a;
                idx[r[1]] = b;
                idx[r[2]] = c;
                entries[flat(idx[0], idx[1], idx[2])] = base[flat(a, b, c)].clone();
            }
        }
    }
    TrifocalTensor { entries, profile }
}

impl<T: Field> TrifocalTensor<T> {
    pub fn from_flat(entries: Vec<T>, profile: Profile) -> Self {
        assert_eq!(entries.len(), 27);
        TrifocalTensor { entries, profile }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &T {
        &self.entries[flat(i, j, k)]
    }

    /// Entries in `(i, j, k)` lexicographic order, index `9i + 3j + k`.
    pub fn flat(&self) -> &[T] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Field::is_zero)
    }

    /// `sum T[i][j][k] a_i b_j c_k` with the vectors given per view.
    pub fn contract(&self, a: &[T], b: &[T], c: &[T]) -> T {
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let ab = a[i].mul(&b[j]);
                for k in 0..3 {
                    s = s.add(&self.entries[flat(i, j, k)].mul(&ab).mul(&c[k]));
                }
            }
        }
        s
    }

    pub fn to_f64(&self) -> TrifocalTensor<f64> {
        TrifocalTensor {
            entries: self.entries.iter().map(Field::to_f64).collect(),
            profile: self.profile,
        }
    }

    /// Entries in the printed convention (profile (2,2,1) only):
    /// `T'[i][j][k] = (-1)^k T[i][j][2 - k]`, zero-based.
    pub fn to_printed_convention(&self) -> Option<Vec<T>> {
        if self.profile != Profile::P221 {
            return None;
        }
        let mut out = vec![T::zero(); 27];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[flat(i, j, k)] = self.entries[flat(i, j, 2 - k)].mul(&T::from_i64(sign(k)));
                }
            }
        }
        Some(out)
    }
}

impl TrifocalTensor<f64> {
    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.frobenius();
        TrifocalTensor {
            entries: self.entries.iter().map(|x| x / n).collect(),
            profile: self.profile,
        }
    }
}

/// Determinant of the 9x9 system for profile (2,2,1): points `x`, `y` in
/// views 1, 2 and the line through `z`, `w` in view 3.
pub fn grassmann_det<T: Field>(
    p1: &Camera<T>,
    p2: &Camera<T>,
    p3: &Camera<T>,
    x: &[T],
    y: &[T],
    z: &[T],
    w: &[T],
) -> T {
    let m = Mat::from_fn(9, 9, |r, c| {
        let (block, i) = (r / 3, r % 3);
        match c {
            0 if block == 0 => x[i].clone(),
            1 if block == 1 => y[i].clone(),
            2 if block == 2 => z[i].clone(),
            3 if block == 2 => w[i].clone(),
            4..=8 => [p1, p2, p3][block].row(i)[c - 4].clone(),
            _ => T::zero(),
        }
    });
    m.det()
}

/// Whether `t` has the pattern of three cameras sharing their first two
/// rows: only `T[0][1][k]` and `T[1][0][k]` survive, with
/// `T[0][1][k] = -T[1][0][k]`.
pub fn degenerate_structure_check(t: &TrifocalTensor<f64>) -> bool {
    if t.frobenius() == 0.0 || !t.frobenius().is_finite() {
        return false;
    }
    let n = t.normalized();
    let tol = 1e-9;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let allowed = (i, j) == (0, 1) || (i, j) == (1, 0);
                if !allowed && n.get(i, j, k).abs() > tol {
                    return false;
                }
            }
        }
    }
    (0..3).all(|k| (n.get(0, 1, k) + n.get(1, 0, k)).abs() <= tol)
}

/// Whether an image point avoids the epipoles of the other two centers,
/// the genericity condition for points to determine a correspondence.
pub fn avoids_epipoles<T: Field>(
    view: usize,
    x: &[T],
    cams: [&Camera<T>; 3],
) -> Result<bool, MultiviewError> {
    for s in (0..3).filter(|&s| s != view) {
        let e = epipole_line(cams[view], &cams[s].center())?;
        let v = dot(&e, x);
        let zero = if T::EXACT {
            v.is_zero()
        } else {
            v.to_f64().abs() <= 1e-12 * norm(&e) * norm(x)
        };
        if zero {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact rational tensor as a flat vector of strings, for JSON export.
pub fn tensor_to_strings(t: &TrifocalTensor<Q>) -> Vec<String> {
    t.flat()
        .iter()
        .map(crate::exactpoly::format_rational)
        .collect()
}

pub fn is_zero_q(t: &TrifocalTensor<Q>) -> bool {
    t.flat().iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::q;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_camera<R: Rng>(rng: &mut R) -> QCamera {
        loop {
            let m = QMat::from_fn(3, 5, |_, _| q(rng.random_range(-5..=5)));
            if let Ok(c) = Camera::new(m) {
                return c;
            }
        }
    }

    fn random_vec<R: Rng>(n: usize, rng: &mut R) -> Vec<Q> {
        (0..n).map(|_| q(rng.random_range(-7..=7))).collect()
    }

    /// Brute-force oracle: entry from the printed formula with 1-based
    /// indices and row 4 - k of P3.
    fn printed_entry(p: [&QCamera; 3], i: usize, j: usize, k: usize) -> Q {
        let mut rows: Vec<Vec<Q>> = Vec::new();
        for r in 1..=3 {
            if r != i {
                rows.push(p[0].row(r - 1).to_vec());
            }
        }
        for r in 1..=3 {
            if r != j {
                rows.push(p[1].row(r - 1).to_vec());
            }
        }
        rows.push(p[2].row(4 - k - 1).to_vec());
        let s = if (i + j + k + 1) % 2 == 0 {
            q(1)
        } else {
            q(-1)
        };
        QMat::from_rows(rows).det() * s
    }

    #[test]
    fn printed_convention_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p: Vec<QCamera> = (0..3).map(|_| random_camera(&mut rng)).collect();
        let t = trifocal_from_cameras(&p[0], &p[1], &p[2], Profile::P221);
        let printed = t.to_printed_convention().unwrap();
        for i in 1..=3 {
            for j in 1..=3 {
                for k in 1..=3 {
                    assert_eq!(
                        printed[flat(i - 1, j - 1, k - 1)],
                        printed_entry([&p[0], &p[1], &p[2]], i, j, k)
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_identity_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let p: Vec<QCamera> = (0..3).map(|_| random_camera(&mut rng)).collect();
            let t = trifocal_from_cameras(&p[0], &p[1], &p[2], Profile::P221);
            let (x, y, z, w) = (
                random_vec(3, &mut rng),
                random_vec(3, &mut rng),
                random_vec(3, &mut rng),
                random_vec(3, &mut rng),
            );
            let g = grassmann_det(&p[0], &p[1], &p[2], &x, &y, &z, &w);
            let pl = cross(&z, &w);
            assert_eq!(g, t.contract(&x, &y, &pl));
        }
    }

    #[test]
    fn centers_and_epipoles() {
        let p1 = QCamera::from_i64(&[[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0]]);
        let c = p1.center();
        assert!(c.iter().all(|b| p1.apply(b).iter().all(Zero::is_zero)));
        let span = QMat::from_rows(c.to_vec());
        assert_eq!(span.rank(), 2);
        assert!(span
            .col(0)
            .iter()
            .chain(span.col(1).iter())
            .chain(span.col(2).iter())
            .all(Zero::is_zero));

        let p2 = QCamera::from_i64(&[[0, 0, 0, 1, 0], [0, 0, 0, 0, 1], [1, 1, 1, 0, 0]]);
        let e = epipole_line(&p2, &p1.center()).unwrap();
        for b in p1.center() {
            assert!(Zero::is_zero(&dot(&e, &p2.apply(&b))));
        }
        let swapped = [p1.center()[1].clone(), p1.center()[0].clone()];
        let e2 = epipole_line(&p2, &swapped).unwrap();
        assert!(cross(&e, &e2).iter().all(Zero::is_zero));

        // P2 maps e4, e5 to the same point when its last two columns agree
        let p3 = QCamera::from_i64(&[[1, 0, 0, 1, 1], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0]]);
        assert_eq!(
            epipole_line(&p3, &p1.center()),
            Err(MultiviewError::DegenerateImage)
        );
    }

    #[test]
    fn rank_and_projection_errors() {
        let m = QMat::from_i64_rows(&[&[1, 0, 0, 0, 0], &[2, 0, 0, 0, 0], &[0, 1, 0, 0, 0]]);
        assert_eq!(Camera::new(m), Err(MultiviewError::RankDeficient));
        let p = QCamera::from_i64(&[[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0]]);
        let v = p.project(&[q(1), q(2), q(3), q(9), q(9)]).unwrap();
        assert_eq!(v.to_vec(), vec![q(1), q(2), q(3)]);
        assert_eq!(
            p.project(&[q(0), q(0), q(0), q(1), q(0)]),
            Err(MultiviewError::OnCenter)
        );
    }

    #[test]
    fn line_through_points() {
        let p = line_through(&[q(1), q(0), q(0)], &[q(0), q(1), q(0)]).unwrap();
        assert_eq!(p.to_vec(), vec![q(0), q(0), q(1)]);
        assert_eq!(
            line_through(&[q(1), q(2), q(3)], &[q(2), q(4), q(6)]),
            Err(MultiviewError::DependentPoints)
        );
    }

    #[test]
    fn shared_rows_give_antisymmetric_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_camera(&mut rng);
        let b = random_camera(&mut rng);
        let p2 = Camera::new(QMat::from_rows(vec![
            a.row(0).to_vec(),
            a.row(1).to_vec(),
            b.row(2).to_vec(),
        ]))
        .unwrap();
        let p3 = random_camera(&mut rng);
        let t = trifocal_from_cameras(&a, &p2, &p3, Profile::P221);
        assert!(degenerate_structure_check(&t.to_f64()));
        let g = trifocal_from_cameras(&a, &b, &p3, Profile::P221);
        assert!(!degenerate_structure_check(&g.to_f64()));
    }

    #[test]
    fn scaling_a_camera_scales_the_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p: Vec<QCamera> = (0..3).map(|_| random_camera(&mut rng)).collect();
        let t = trifocal_from_cameras(&p[0], &p[1], &p[2], Profile::P221);
        let s = trifocal_from_cameras(&p[0], &p[1].scaled(&q(3)), &p[2], Profile::P221);
        assert!(t.flat().iter().zip(s.flat()).all(|(a, b)| a * q(9) == *b));
    }

    #[test]
    fn profiles_permute_roles() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p: Vec<QCamera> = (0..3).map(|_| random_camera(&mut rng)).collect();
        let t = trifocal_from_cameras(&p[0], &p[1], &p[2], Profile::P122);
        let base = trifocal_from_cameras(&p[1], &p[2], &p[0], Profile::P221);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(t.get(i, j, k), base.get(j, k, i));
                }
            }
        }
        // a scene point annihilates every profile
        let x = random_vec(5, &mut rng);
        for prof in Profile::ALL {
            let t = trifocal_from_cameras(&p[0], &p[1], &p[2], prof);
            let mut v: Vec<Vec<Q>> = p.iter().map(|c| c.apply(&x).to_vec()).collect();
            let lv = prof.line_view();
            let r = random_vec(3, &mut rng);
            v[lv] = cross(&v[lv], &r).to_vec();
            assert!(Zero::is_zero(&t.contract(&v[0], &v[1], &v[2])));
        }
    }

    #[test]
    fn float_path_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p: Vec<QCamera> = (0..3).map(|_| random_camera(&mut rng)).collect();
        let t = trifocal_from_cameras(&p[0], &p[1], &p[2], Profile::P221).to_f64();
        let pf: Vec<Camera<f64>> = p.iter().map(Camera::to_f64).collect();
        let tf = trifocal_from_cameras(&pf[0], &pf[1], &pf[2], Profile::P221);
        let scale = t.frobenius();
        assert!(t
            .flat()
            .iter()
            .zip(tf.flat())
            .all(|(a, b)| (a - b).abs() < 1e-9 * scale));
        let c = pf[0].center();
        for b in &c {
            assert!(pf[0].apply(b).iter().all(|v| v.abs() < 1e-12));
        }
    }
}
