//! Critical configurations for two triples of projections P^4 -> P^2.
//!
//! A scene point `X` is critical for `(P_i, Q_i)` when every maximal minor
//! of the 9x8 matrix
//!
//! ```text
//! [ P1 X   0     0    Q1 ]
//! [ 0     P2 X   0    Q2 ]
//! [ 0      0    P3 X  Q3 ]
//! ```
//!
//! vanishes. Eliminating an invertible 5x5 constant block `D` of the `Q`
//! columns leaves the 4x3 matrix of linear forms `N = A - B D^-1 C`, with
//! `rank M(X) = 5 + rank N(X)`.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::exactpoly::{
    format_rational, parse_rational, span_dimension, LinearForm, Polynomial, NVARS, Q,
};
use crate::linalg::QMat;
use crate::linclass::{LinClassError, LinFormMatrix};
use crate::multiview::{MultiviewError, QCamera};

#[derive(Debug, Error)]
pub enum CriticalError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no 5x5 block of the stacked Q matrices is invertible")]
    NoInvertibleBlock,
    #[error("column {column} of N does not vanish on the center of P{}", column + 1)]
    CenterMismatch { column: usize },
    #[error("unknown fixture `{0}` (expected scroll_i, cone_iv or quadric_v)")]
    UnknownCase(String),
    #[error("case {0} is not supported: {1}")]
    UnsupportedCase(String, &'static str),
    #[error("malformed configuration JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Camera(#[from] MultiviewError),
    #[error(transparent)]
    LinClass(#[from] LinClassError),
}

/// The worked examples: a cubic scroll (case i), a quadric cone (case iv)
/// and a smooth quadric (case v).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "scroll_i")]
    ScrollI,
    #[serde(rename = "cone_iv")]
    ConeIv,
    #[serde(rename = "quadric_v")]
    QuadricV,
}

impl CaseTag {
    pub const ALL: [CaseTag; 3] = [CaseTag::ScrollI, CaseTag::ConeIv, CaseTag::QuadricV];

    pub fn name(&self) -> &'static str {
        match self {
            CaseTag::ScrollI => "scroll_i",
            CaseTag::ConeIv => "cone_iv",
            CaseTag::QuadricV => "quadric_v",
        }
    }

    /// Number of scene points used in the experiments.
    pub fn default_points(&self) -> usize {
        match self {
            CaseTag::QuadricV => 99,
            _ => 100,
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseTag {
    type Err = CriticalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(c) = CaseTag::ALL.into_iter().find(|c| c.name() == s) {
            return Ok(c);
        }
        let roman = s.rsplit('_').next().unwrap_or(s).to_ascii_lowercase();
        let why = match roman.as_str() {
            "ii" => Some("its non-linear residual is a plane and a cubic curve; no experiment is defined for it"),
            "iii" | "vi" => Some("no profile determines the trifocal tensor uniquely"),
            _ => None,
        };
        match why {
            Some(w) => Err(CriticalError::UnsupportedCase(s.to_string(), w)),
            None => Err(CriticalError::UnknownCase(s.to_string())),
        }
    }
}

/// Two triples of cameras `P_i`, `Q_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraPairConfig {
    pub p: [QCamera; 3],
    pub q: [QCamera; 3],
}

impl CameraPairConfig {
    pub fn new(p: [QCamera; 3], q: [QCamera; 3]) -> Result<Self, CriticalError> {
        let cfg = CameraPairConfig { p, q };
        let rank = cfg.stacked_q().rank();
        if rank != 5 {
            return Err(CriticalError::InvalidConfig(format!(
                "stacked Q matrices have rank {rank}, need 5 (otherwise every point is critical)"
            )));
        }
        Ok(cfg)
    }

    /// The 9x5 matrix `[Q1; Q2; Q3]`.
    pub fn stacked_q(&self) -> QMat {
        QMat::from_fn(9, 5, |r, c| self.q[r / 3].row(r % 3)[c].clone())
    }

    pub fn to_json(&self) -> Value {
        let cam = |c: &QCamera| -> Value {
            (0..3)
                .map(|i| c.row(i).iter().map(format_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .into()
        };
        serde_json::json!({
            "P": self.p.iter().map(cam).collect::<Vec<_>>(),
            "Q": self.q.iter().map(cam).collect::<Vec<_>>(),
        })
    }

    /// Reads `{"P": [3 cameras], "Q": [3 cameras]}`, each camera a 3x5
    /// array of integers or `"p/q"` strings.
    pub fn from_json(v: &Value) -> Result<Self, CriticalError> {
        let triple = |key: &str| -> Result<[QCamera; 3], CriticalError> {
            let arr = v
                .get(key)
                .and_then(Value::as_array)
                .filter(|a| a.len() == 3)
                .ok_or_else(|| CriticalError::Json(format!("`{key}` must hold 3 cameras")))?;
            let cams = arr
                .iter()
                .map(camera_from_json)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(cams.try_into().expect("three cameras"))
        };
        CameraPairConfig::new(triple("P")?, triple("Q")?)
    }
}

pub fn camera_from_json(v: &Value) -> Result<QCamera, CriticalError> {
    let rows = v
        .as_array()
        .ok_or_else(|| CriticalError::Json("camera must be an array of rows".into()))?;
    let rows = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| CriticalError::Json("camera row must be an array".into()))?
                .iter()
                .map(rational_from_json)
                .collect::<Result<Vec<Q>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    if rows.iter().any(|r| r.len() != 5) {
        return Err(CriticalError::Json(
            "camera rows must have 5 entries".into(),
        ));
    }
    Ok(QCamera::new(QMat::from_rows(rows))?)
}

pub fn rational_from_json(v: &Value) -> Result<Q, CriticalError> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| CriticalError::Json(e.to_string())),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Q::from_integer(i.into()))
            } else {
                n.as_f64()
                    .and_then(Q::from_float)
                    .ok_or_else(|| CriticalError::Json(format!("bad number {n}")))
            }
        }
        other => Err(CriticalError::Json(format!(
            "expected a rational, got {other}"
        ))),
    }
}

fn cam(rows: [[(i64, i64); 5]; 3]) -> QCamera {
    QCamera::new(QMat::from_fn(3, 5, |i, j| {
        let (n, d) = rows[i][j];
        Q::new(n.into(), d.into())
    }))
    .expect("fixture camera has rank 3")
}

fn int_cam(rows: [[i64; 5]; 3]) -> QCamera {
    QCamera::from_i64(&rows)
}

/// The printed camera triples of the three worked examples.
pub fn fixtures(case: CaseTag) -> CameraPairConfig {
    let (p, q) = match case {
        CaseTag::ScrollI => {
            let w = |n| (n, 1);
            (
                [
                    int_cam([[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0]]),
                    int_cam([[1, 0, 0, 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, 1]]),
                    cam([
                        [(10158, 25), w(729), w(4050), (31152, 5), w(-3645)],
                        [w(608), (-13692, 25), w(1900), w(836), (13692, 5)],
                        [w(288), w(162), (258, 25), w(396), w(-810)],
                    ]),
                ],
                [
                    int_cam([[-1, 0, -1, 0, 0], [0, -1, 0, -1, 0], [0, 0, 0, 0, -1]]),
                    cam([
                        [w(0), w(0), (55, 51), (-75, 34), (-625, 51)],
                        [w(1), w(0), w(0), w(0), w(0)],
                        [w(0), w(1), w(0), w(0), w(0)],
                    ]),
                    int_cam([[0, 0, 1, 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, 1]]),
                ],
            )
        }
        CaseTag::ConeIv => (
            [
                int_cam([[0, 1, -6, -2, 4], [-1, 0, -15, -5, 10], [0, 0, -3, -1, 2]]),
                int_cam([
                    [-35, -42, -47, 13, -32],
                    [-8, -12, -11, 4, -8],
                    [-2, -3, -2, 1, -2],
                ]),
                int_cam([[-2, 3, -12, 6, 3], [4, 6, 0, -8, 6], [2, 3, 0, -2, 3]]),
            ],
            [
                int_cam([[2, 1, -4, 1, -2], [5, -2, 8, 0, 0], [1, 0, 0, 0, 0]]),
                int_cam([[0, 5, -4, 3, -6], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0]]),
                int_cam([[0, 1, -4, -2, 5], [0, 0, 0, 1, 0], [0, 0, 0, 0, 1]]),
            ],
        ),
        CaseTag::QuadricV => (
            [
                int_cam([[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0]]),
                int_cam([[0, 0, 0, 1, 0], [0, 0, 0, 0, 1], [1, 1, 1, 0, 0]]),
                int_cam([[0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [1, 1, 1, 1, 0]]),
            ],
            [
                int_cam([[-1, 0, 0, 0, 0], [0, 0, -1, 0, 0], [0, 0, 0, -1, 0]]),
                int_cam([[0, 0, 0, 0, -1], [1, 0, 0, 0, 0], [0, 1, 0, 0, 0]]),
                int_cam([[0, 0, 1, 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, 1]]),
            ],
        ),
    };
    CameraPairConfig::new(p, q).expect("fixture Q matrices have rank 5")
}

/// Rows of `P X` as linear forms.
fn image_forms(p: &QCamera) -> [LinearForm; 3] {
    std::array::from_fn(|i| LinearForm::from_slice(p.row(i)))
}

/// The 9x8 matrix with linear forms in its first three columns.
pub fn assemble_m(cfg: &CameraPairConfig) -> Vec<Vec<Polynomial>> {
    let forms: Vec<[LinearForm; 3]> = cfg.p.iter().map(image_forms).collect();
    let q = cfg.stacked_q();
    (0..9)
        .map(|r| {
            let (block, i) = (r / 3, r % 3);
            (0..8)
                .map(|c| match c {
                    0..=2 if c == block => forms[block][i].to_poly(),
                    0..=2 => Polynomial::zero(),
                    _ => Polynomial::constant(q[(r, c - 3)].clone()),
                })
                .collect()
        })
        .collect()
}

/// `M(X)` as a scalar matrix.
pub fn m_at(cfg: &CameraPairConfig, x: &[Q]) -> QMat {
    let img: Vec<[Q; 3]> = cfg.p.iter().map(|p| p.apply(x)).collect();
    let q = cfg.stacked_q();
    QMat::from_fn(9, 8, |r, c| {
        let (block, i) = (r / 3, r % 3);
        match c {
            0..=2 if c == block => img[block][i].clone(),
            0..=2 => Q::zero(),
            _ => q[(r, c - 3)].clone(),
        }
    })
}

/// `N = A - B D^-1 C` and the row split used.
#[derive(Clone, Debug)]
pub struct ReducedCriticalMatrix {
    pub n: LinFormMatrix,
    /// Rows of `M` kept in `A` (ascending).
    pub a_rows: [usize; 4],
    /// Rows of `M` forming the constant block `D` (ascending).
    pub d_rows: [usize; 5],
    pub d_inverse: QMat,
}

/// Tries the 4-subsets of rows in lexicographic order; the first whose
/// complement gives an invertible `D` wins.
pub fn reduce_to_n(cfg: &CameraPairConfig) -> Result<ReducedCriticalMatrix, CriticalError> {
    let q = cfg.stacked_q();
    let forms: Vec<[LinearForm; 3]> = cfg.p.iter().map(image_forms).collect();
    // left block of M as forms
    let left = |r: usize, c: usize| {
        if r / 3 == c {
            forms[c][r % 3].clone()
        } else {
            LinearForm::zero()
        }
    };
    for a in 0..9 {
        for b in a + 1..9 {
            for c in b + 1..9 {
                for d in c + 1..9 {
                    let a_rows = [a, b, c, d];
                    let d_rows: Vec<usize> = (0..9).filter(|r| !a_rows.contains(r)).collect();
                    let dm = q.select(&d_rows, &[0, 1, 2, 3, 4]);
                    let Some(dinv) = dm.inverse() else {
                        continue;
                    };
                    let bm = q.select(&a_rows, &[0, 1, 2, 3, 4]);
                    let bd = bm.mul(&dinv); // 4x5
                    let n = (0..4)
                        .map(|i| {
                            (0..3)
                                .map(|j| {
                                    let mut e = left(a_rows[i], j);
                                    for (k, &r) in d_rows.iter().enumerate() {
                                        e = e.sub(&left(r, j).scale(&bd[(i, k)]));
                                    }
                                    e
                                })
                                .collect()
                        })
                        .collect();
                    return Ok(ReducedCriticalMatrix {
                        n: LinFormMatrix::new(n)?,
                        a_rows,
                        d_rows: d_rows.try_into().unwrap(),
                        d_inverse: dinv,
                    });
                }
            }
        }
    }
    Err(CriticalError::NoInvertibleBlock)
}

/// Outcome of the rank test at one scene point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriticalPointReport {
    /// `rank M(X) <= 7`.
    pub critical: bool,
    /// Views whose center contains `X` (a zero column of `M`); such points
    /// are trivially rank-dropping and flagged rather than interpreted.
    pub on_centers: Vec<usize>,
}

pub fn critical_point_report(cfg: &CameraPairConfig, x: &[Q]) -> CriticalPointReport {
    let on_centers = cfg
        .p
        .iter()
        .enumerate()
        .filter(|(_, p)| p.apply(x).iter().all(Zero::is_zero))
        .map(|(i, _)| i)
        .collect();
    CriticalPointReport {
        critical: m_at(cfg, x).rank() <= 7,
        on_centers,
    }
}

pub fn critical_point_test(cfg: &CameraPairConfig, x: &[Q]) -> bool {
    critical_point_report(cfg, x).critical
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnCenterReport {
    /// Span dimension of the entries of each column of `N`.
    pub column_spans: [usize; 3],
    /// Whether every center point annihilates its column.
    pub vanishes: [bool; 3],
}

impl ColumnCenterReport {
    pub fn passed(&self) -> bool {
        self.vanishes.iter().all(|&v| v) && self.column_spans.iter().all(|&s| s <= 3)
    }
}

/// Column `i` of `N` vanishes on the center of `P_i` and spans at most
/// three dimensions.
pub fn column_center_check(
    rcm: &ReducedCriticalMatrix,
    cfg: &CameraPairConfig,
) -> Result<ColumnCenterReport, CriticalError> {
    let mut report = ColumnCenterReport {
        column_spans: [0; 3],
        vanishes: [false; 3],
    };
    for i in 0..3 {
        let col = rcm.n.col(i);
        report.column_spans[i] = span_dimension(&col);
        let center = cfg.p[i].center();
        report.vanishes[i] = center
            .iter()
            .all(|b| col.iter().all(|l| l.evaluate(b).is_zero()));
        if !report.vanishes[i] || report.column_spans[i] > 3 {
            return Err(CriticalError::CenterMismatch { column: i });
        }
    }
    Ok(report)
}

/// A point of `P^4` as a 5-vector.
pub fn point(coords: [i64; NVARS]) -> Vec<Q> {
    coords.iter().map(|&c| Q::from_integer(c.into())).collect()
}
