//! Linear estimation of the trifocal tensor from correspondences.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Field, Mat};
use crate::multiview::{line_through, Camera, MultiviewError, Profile, TrifocalTensor};

/// Relative singular value threshold for the numerical rank of `M_T`.
pub const RANK_THRESHOLD: f64 = 1e-8;
/// Rank of `M_T` when the tensor is determined up to scale.
pub const FULL_RANK: usize = 26;

#[derive(Debug, Error)]
pub enum ReconError {
    #[error(transparent)]
    Multiview(#[from] MultiviewError),
    #[error("no correspondences")]
    Empty,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad triple on line {line}: {reason}")]
    BadTriple { line: usize, reason: String },
}

/// Image data of one scene point in the three views, in view order. The
/// view seen through lines (see [`Profile::line_view`]) holds the dual
/// coordinates of a line through the image point.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrespondenceTriple<T> {
    pub views: [[T; 3]; 3],
}

impl<T: Field> CorrespondenceTriple<T> {
    /// Row of `M_T`: `a_i b_j c_k` at index `9i + 3j + k`.
    pub fn kronecker(&self) -> Vec<T> {
        let [a, b, c] = &self.views;
        let mut row = Vec::with_capacity(27);
        for ai in a {
            for bj in b {
                let ab = ai.mul(bj);
                for ck in c {
                    row.push(ab.mul(ck));
                }
            }
        }
        row
    }
}

/// Image triples of `pts`: points in two views, a line through the image
/// point with a random auxiliary point in the line view.
pub fn correspondences_from_scene<T: Field, R: Rng + ?Sized>(
    cams: [&Camera<T>; 3],
    profile: Profile,
    pts: &[Vec<T>],
    rng: &mut R,
) -> Result<Vec<CorrespondenceTriple<T>>, ReconError> {
    let images = pts
        .iter()
        .map(|x| {
            Ok([
                cams[0].project(x)?,
                cams[1].project(x)?,
                cams[2].project(x)?,
            ])
        })
        .collect::<Result<Vec<_>, ReconError>>()?;
    Ok(triples_from_images(images, profile, rng))
}

/// Replace the image point of the line view by a line through it and a
/// random auxiliary point.
pub fn triples_from_images<T: Field, R: Rng + ?Sized>(
    images: Vec<[[T; 3]; 3]>,
    profile: Profile,
    rng: &mut R,
) -> Vec<CorrespondenceTriple<T>> {
    let lv = profile.line_view();
    images
        .into_iter()
        .map(|mut views| {
            loop {
                let r: Vec<T> = (0..3).map(|_| auxiliary(rng)).collect();
                if let Ok(l) = line_through(&views[lv], &r) {
                    views[lv] = l;
                    break;
                }
            }
            CorrespondenceTriple { views }
        })
        .collect()
}

fn auxiliary<T: Field, R: Rng + ?Sized>(rng: &mut R) -> T {
    if T::EXACT {
        T::from_i64(rng.random_range(-1000..=1000))
    } else {
        T::from_f64(rng.sample(StandardNormal))
    }
}

/// The linear system `M_T t = 0`, one row per triple.
#[derive(Clone, PartialEq)]
pub struct DesignMatrix<T> {
    pub rows: Mat<T>,
}

pub fn assemble_mt<T: Field>(triples: &[CorrespondenceTriple<T>]) -> DesignMatrix<T> {
    DesignMatrix {
        rows: Mat::from_rows(triples.iter().map(|t| t.kronecker()).collect()),
    }
}

impl<T: Field> DesignMatrix<T> {
    pub fn nrows(&self) -> usize {
        self.rows.nrows()
    }
}

impl DesignMatrix<f64> {
    fn svd(&self) -> (Vec<f64>, DMatrix<f64>) {
        let n = self.rows.nrows().max(27);
        let a = DMatrix::from_fn(n, 27, |i, j| {
            if i < self.rows.nrows() {
                self.rows[(i, j)]
            } else {
                0.0
            }
        });
        let svd = a.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..27).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let sv = order.iter().map(|&i| svd.singular_values[i]).collect();
        let vt_sorted = DMatrix::from_fn(27, 27, |r, c| vt[(order[r], c)]);
        (sv, vt_sorted)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimationResult {
    #[serde(skip)]
    pub tensor: TrifocalTensor<f64>,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
    /// Set iff the numerical rank is 26.
    pub unique: bool,
}

fn numerical_rank(sv: &[f64], threshold: f64) -> usize {
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > threshold * top).count()
}

/// Fix the sign so that the entry of largest magnitude is positive.
fn canonical_sign(v: &mut [f64]) {
    let big = v
        .iter()
        .copied()
        .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Unit-norm minimizer of `|M t|`, with the default rank threshold.
pub fn estimate_tensor(m: &DesignMatrix<f64>, profile: Profile) -> EstimationResult {
    estimate_tensor_with(m, profile, RANK_THRESHOLD)
}

pub fn estimate_tensor_with(
    m: &DesignMatrix<f64>,
    profile: Profile,
    threshold: f64,
) -> EstimationResult {
    let (sv, vt) = m.svd();
    let mut t: Vec<f64> = vt.row(26).iter().copied().collect();
    canonical_sign(&mut t);
    let rank = numerical_rank(&sv, threshold);
    if m.nrows() < FULL_RANK {
        log::debug!("only {} triples: tensor is not determined", m.nrows());
    }
    EstimationResult {
        tensor: TrifocalTensor::from_flat(t, profile),
        singular_values: sv,
        numerical_rank: rank,
        unique: rank == FULL_RANK,
    }
}

/// Orthonormal basis of the numerical null space of `M`.
pub fn null_space(
    m: &DesignMatrix<f64>,
    profile: Profile,
    threshold: f64,
) -> Vec<TrifocalTensor<f64>> {
    let (sv, vt) = m.svd();
    let rank = numerical_rank(&sv, threshold);
    (rank..27)
        .map(|r| TrifocalTensor::from_flat(vt.row(r).iter().copied().collect(), profile))
        .collect()
}

/// `min(|A - B|, |A + B|)` after scaling both to unit Frobenius norm.
pub fn tensor_distance(a: &TrifocalTensor<f64>, b: &TrifocalTensor<f64>) -> f64 {
    let (a, b) = (a.normalized(), b.normalized());
    let (mut minus, mut plus) = (0.0, 0.0);
    for (x, y) in a.flat().iter().zip(b.flat()) {
        minus += (x - y).powi(2);
        plus += (x + y).powi(2);
    }
    minus.min(plus).sqrt()
}

/// Numerical rank of `M_T` for `n_triples` random scene points.
pub fn rank_mt_diagnostic<R: Rng + ?Sized>(
    cams: [&Camera<f64>; 3],
    profile: Profile,
    n_triples: usize,
    rng: &mut R,
) -> Result<usize, ReconError> {
    let pts: Vec<Vec<f64>> = (0..n_triples)
        .map(|_| (0..5).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let triples = correspondences_from_scene(cams, profile, &pts, rng)?;
    let m = assemble_mt(&triples);
    Ok(numerical_rank(&m.svd().0, RANK_THRESHOLD))
}

/// Exact rank of `M_T` for rational cameras and random integer scene points.
pub fn rank_mt_exact<T: Field, R: Rng + ?Sized>(
    cams: [&Camera<T>; 3],
    profile: Profile,
    n_triples: usize,
    rng: &mut R,
) -> Result<usize, ReconError> {
    let pts: Vec<Vec<T>> = (0..n_triples)
        .map(|_| {
            (0..5)
                .map(|_| T::from_i64(rng.random_range(-50..=50)))
                .collect()
        })
        .collect();
    let triples = correspondences_from_scene(cams, profile, &pts, rng)?;
    Ok(assemble_mt(&triples).rows.rank())
}

#[derive(Debug, Serialize, Deserialize)]
struct TripleRecord {
    x0: f64,
    x1: f64,
    x2: f64,
    y0: f64,
    y1: f64,
    y2: f64,
    p0: f64,
    p1: f64,
    p2: f64,
}

/// Triples as CSV with columns `x0..x2, y0..y2, p0..p2` for views 1, 2, 3.
pub fn write_triples_csv<W: Write>(
    triples: &[CorrespondenceTriple<f64>],
    out: W,
) -> Result<(), ReconError> {
    let mut w = csv::Writer::from_writer(out);
    for t in triples {
        let [x, y, p] = &t.views;
        w.serialize(TripleRecord {
            x0: x[0],
            x1: x[1],
            x2: x[2],
            y0: y[0],
            y1: y[1],
            y2: y[2],
            p0: p[0],
            p1: p[1],
            p2: p[2],
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_triples_csv<R: Read>(input: R) -> Result<Vec<CorrespondenceTriple<f64>>, ReconError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in r.deserialize::<TripleRecord>().enumerate() {
        let t = rec?;
        let views = [[t.x0, t.x1, t.x2], [t.y0, t.y1, t.y2], [t.p0, t.p1, t.p2]];
        if views.iter().any(|v| v.iter().all(|c| *c == 0.0)) {
            return Err(ReconError::BadTriple {
                line: i + 2,
                reason: "zero vector".into(),
            });
        }
        out.push(CorrespondenceTriple { views });
    }
    if out.is_empty() {
        return Err(ReconError::Empty);
    }
    Ok(out)
}

/// Design matrix as CSV, 27 unnamed columns.
pub fn write_design_csv<W: Write>(m: &DesignMatrix<f64>, out: W) -> Result<(), ReconError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for i in 0..m.nrows() {
        w.write_record(m.rows.row(i).iter().map(|x| format!("{x:e}")))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Three cameras sharing their first two rows, so that the center lines lie
/// in a common plane and meet pairwise.
pub fn shared_rows_cameras<R: Rng + ?Sized>(rng: &mut R) -> [Camera<f64>; 3] {
    loop {
        let shared: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..5).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let cams: Result<Vec<Camera<f64>>, _> = (0..3)
            .map(|_| {
                let mut rows = shared.clone();
                rows.push((0..5).map(|_| rng.sample(StandardNormal)).collect());
                Camera::new(Mat::from_rows(rows))
            })
            .collect();
        if let Ok(c) = cams {
            if let Ok(arr) = <[Camera<f64>; 3]>::try_from(c) {
                return arr;
            }
        }
    }
}
