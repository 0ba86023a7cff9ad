//! Degeneration loci of the normal forms in `P^4`.
//!
//! Components are written down from closed-form generators in the entries of
//! the canonical matrix and checked by sampling points on them.

use std::fmt;

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exactpoly::{
    coefficient_matrix, gcd_many, poly_span_dimension, q, span_dimension, ExactPolyError,
    LinearForm, Monomial, Polynomial, NVARS, Q,
};
use crate::linalg::{Mat, QMat};
use crate::linclass::{CanonicalFamily, Canonicalization, LinClassError, LinFormMatrix};

/// Tolerance for floating evaluations after normalization.
pub const FLOAT_VANISH: f64 = 1e-10;
/// Singular value ratio below which a floating matrix is rank deficient.
pub const RANK_RATIO: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum LociError {
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),
    #[error("family {0} has no degeneration locus decomposition")]
    NotDecomposable(CanonicalFamily),
    #[error("sampling `{component}` failed after {attempts} attempts")]
    SamplingFailed { component: String, attempts: usize },
    #[error("incidence mismatch: {0}")]
    IncidenceMismatch(String),
    #[error(transparent)]
    LinClass(#[from] LinClassError),
    #[error(transparent)]
    Poly(#[from] ExactPolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ComponentKind {
    Hyperplane,
    Plane,
    Line,
    Point,
    QuadricHypersurface,
    QuadricSurface,
    Cone,
    TwistedCubic,
    CubicScroll,
}

impl ComponentKind {
    pub fn dim(&self) -> usize {
        match self {
            Self::Hyperplane | Self::QuadricHypersurface | Self::Cone => 3,
            Self::Plane | Self::QuadricSurface | Self::CubicScroll => 2,
            Self::Line | Self::TwistedCubic => 1,
            Self::Point => 0,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Self::Hyperplane | Self::Plane | Self::Line | Self::Point => 1,
            Self::QuadricHypersurface | Self::QuadricSurface | Self::Cone => 2,
            Self::TwistedCubic | Self::CubicScroll => 3,
        }
    }

    fn is_linear(&self) -> bool {
        matches!(
            self,
            Self::Hyperplane | Self::Plane | Self::Line | Self::Point
        )
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// How points are produced on a component.
#[derive(Clone, Debug)]
enum Shape {
    /// Common zeros of the (linear) generators.
    Linear(Vec<LinearForm>),
    /// Rank-one locus of a 3x2 block.
    Scroll([[LinearForm; 2]; 3]),
    /// `{ r3 - lambda r4 = 0, h = 0 }` swept over `lambda`.
    TwistedCubic {
        r3: [LinearForm; 3],
        r4: [LinearForm; 3],
        h: LinearForm,
    },
    /// `q = 0` inside the linear space cut by `ambient`. Each seed is a
    /// linear system (containing `ambient`) whose solutions lie on the quadric.
    Quadric {
        ambient: Vec<LinearForm>,
        q: Polynomial,
        seeds: Vec<Vec<LinearForm>>,
    },
}

#[derive(Clone, Debug)]
pub struct LocusComponent {
    pub name: String,
    pub kind: ComponentKind,
    pub generators: Vec<Polynomial>,
    shape: Shape,
}

impl LocusComponent {
    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn degree(&self) -> usize {
        self.kind.degree()
    }

    fn linear(name: &str, kind: ComponentKind, forms: Vec<LinearForm>) -> Self {
        Self {
            name: name.into(),
            kind,
            generators: forms.iter().map(LinearForm::to_poly).collect(),
            shape: Shape::Linear(forms),
        }
    }

    /// The 3x2 block whose rank-one locus is this scroll.
    pub fn scroll_block(&self) -> Option<&[[LinearForm; 2]; 3]> {
        match &self.shape {
            Shape::Scroll(b) => Some(b),
            _ => None,
        }
    }

    /// The quadratic generator of a quadric component.
    pub fn quadric(&self) -> Option<&Polynomial> {
        match &self.shape {
            Shape::Quadric { q, .. } => Some(q),
            _ => None,
        }
    }

    /// Whether every generator vanishes at `p`.
    pub fn contains(&self, p: &SamplePoint) -> bool {
        self.generators.iter().all(|g| p.vanishes(g))
    }

    /// Largest normalized generator value at `p`.
    pub fn residual(&self, p: &SamplePoint) -> f64 {
        self.generators
            .iter()
            .map(|g| p.normalized_value(g))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "kind": self.kind,
            "dim": self.dim(),
            "degree": self.degree(),
            "generators": self.generators.iter().map(ToString::to_string).collect::<Vec<_>>(),
        })
    }
}

/// A point of `P^4`, exact or floating.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplePoint {
    Rational(Vec<Q>),
    Float(Vec<f64>),
}

impl SamplePoint {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Self::Rational(p) => p.iter().map(crate::linalg::Field::to_f64).collect(),
            Self::Float(p) => p.clone(),
        }
    }

    /// `|f(p)|` with `p` scaled to unit norm and `f` to unit coefficient norm;
    /// zero for exact roots.
    pub fn normalized_value(&self, f: &Polynomial) -> f64 {
        if let Self::Rational(p) = self {
            if f.evaluate(p).is_zero() {
                return 0.0;
            }
        }
        let p = self.to_f64();
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        let unit: Vec<f64> = p.iter().map(|x| x / norm).collect();
        let scale = f.coeff_norm_f64();
        if scale == 0.0 {
            return 0.0;
        }
        f.evaluate_f64(&unit).abs() / scale
    }

    pub fn vanishes(&self, f: &Polynomial) -> bool {
        match self {
            Self::Rational(p) => f.evaluate(p).is_zero(),
            Self::Float(_) => self.normalized_value(f) < FLOAT_VANISH,
        }
    }

    /// Rank of `N(p)`: exact for rational points, singular value ratio for
    /// floating ones.
    pub fn rank_of(&self, n: &LinFormMatrix) -> usize {
        match self {
            Self::Rational(p) => n.evaluate(p).rank(),
            Self::Float(p) => float_rank(&n.evaluate_f64(p)),
        }
    }
}

impl fmt::Display for SamplePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match self {
            Self::Rational(p) => p.iter().map(crate::exactpoly::format_rational).collect(),
            Self::Float(p) => p.iter().map(|x| format!("{x:.6}")).collect(),
        };
        write!(f, "({})", parts.join(", "))
    }
}

fn float_rank(m: &Mat<f64>) -> usize {
    let a = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let sv = a.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_RATIO * top).count()
}

/// What a stated incidence between components amounts to.
#[derive(Clone, Debug)]
pub enum IncidenceFact {
    /// The line cut by `line` meets `{quadric = 0}` in `count` points over C.
    LineMeetsQuadric {
        line: Vec<LinearForm>,
        quadric: Polynomial,
        count: usize,
    },
    /// The forms in `forms` cut a single point, lying on `{on = 0}`.
    PointOn {
        forms: Vec<LinearForm>,
        on: LinearForm,
    },
    /// The line cut by `line` meets the surface cut by `surface` in a single
    /// point.
    LineMeetsSurfaceOnce {
        line: Vec<LinearForm>,
        surface: Vec<Polynomial>,
    },
    /// The line cut by `line` lies on `{quadric = 0}`.
    LineInside {
        line: Vec<LinearForm>,
        quadric: Polynomial,
    },
    /// The plane cut by `plane` meets `{quadric = 0}` in a conic.
    ConicSection {
        plane: Vec<LinearForm>,
        quadric: Polynomial,
    },
    /// The symmetric matrix of `quadric` has rank `rank`; when below five its
    /// kernel is the point cut by `vertex`.
    QuadricRank {
        quadric: Polynomial,
        rank: usize,
        vertex: Vec<LinearForm>,
    },
}

#[derive(Clone, Debug)]
pub struct Incidence {
    /// Indices of the components involved.
    pub between: (usize, usize),
    pub description: String,
    pub fact: IncidenceFact,
}

#[derive(Clone, Debug)]
pub struct LocusDecomposition {
    pub family: CanonicalFamily,
    pub components: Vec<LocusComponent>,
    pub incidences: Vec<Incidence>,
}

impl LocusDecomposition {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family.name(),
            "components": self.components.iter().map(LocusComponent::to_json).collect::<Vec<_>>(),
            "incidences": self.incidences.iter().map(|i| serde_json::json!({
                "between": [i.between.0, i.between.1],
                "description": i.description,
            })).collect::<Vec<_>>(),
        })
    }
}

/// `D` with `q = l^T D l` for `S_1(l) X_1`, built from the 3x3 minors of `X_1`.
pub fn symmetric_matrix_d(x1: &QMat) -> QMat {
    assert_eq!((x1.nrows(), x1.ncols()), (6, 3), "X1 must be 6x3");
    let m = |i: usize, j: usize, k: usize| x1.select(&[i - 1, j - 1, k - 1], &[0, 1, 2]).det();
    let half = Q::new(1.into(), 2.into());
    let two = q(2);
    let mut d = QMat::zeros(4, 4);
    let mut set = |i: usize, j: usize, v: Q| {
        let v = v * &half;
        d[(i, j)] = v.clone();
        d[(j, i)] = v;
    };
    set(0, 0, -(&two * m(2, 3, 6)));
    set(0, 1, -m(2, 3, 5) + m(1, 3, 6));
    set(0, 2, -m(2, 3, 4) - m(1, 2, 6));
    set(0, 3, m(3, 4, 6) + m(2, 5, 6));
    set(1, 1, &two * m(1, 3, 5));
    set(1, 2, m(1, 3, 4) - m(1, 2, 5));
    set(1, 3, m(3, 4, 5) - m(1, 5, 6));
    set(2, 2, -(&two * m(1, 2, 4)));
    set(2, 3, -m(2, 4, 5) - m(1, 4, 6));
    set(3, 3, &two * m(4, 5, 6));
    d
}

/// `l^T D l` as a quadratic form in `x1..x5`.
pub fn quadric_from_d(d: &QMat, ell: &[LinearForm]) -> Polynomial {
    let l: Vec<Polynomial> = ell.iter().map(LinearForm::to_poly).collect();
    let mut out = Polynomial::zero();
    for i in 0..4 {
        for j in 0..4 {
            if !d[(i, j)].is_zero() {
                out = &out + &(&l[i] * &l[j]).scale(&d[(i, j)]);
            }
        }
    }
    out
}

fn constant_matrix(rows: &[Vec<Polynomial>]) -> Option<QMat> {
    let mut m = QMat::zeros(rows.len(), rows.first()?.len());
    for (i, r) in rows.iter().enumerate() {
        for (j, p) in r.iter().enumerate() {
            if !p.is_constant() {
                return None;
            }
            m[(i, j)] = p.coeff(&Monomial::default());
        }
    }
    Some(m)
}

/// Component decomposition of the degeneration locus of a classified matrix.
pub fn decompose(c: &Canonicalization) -> Result<LocusDecomposition, LociError> {
    use CanonicalFamily::*;
    use ComponentKind::*;
    if c.specialized {
        return Err(LociError::DegenerateInstance(
            c.note
                .clone()
                .unwrap_or_else(|| "specialized normal form".into()),
        ));
    }
    let m = &c.canonical;
    // one-based entry access
    let n = |i: usize, j: usize| m.get(i - 1, j - 1).clone();
    let np = |i: usize, j: usize| n(i, j).to_poly();
    let need = |ok: bool, why: &str| {
        if ok {
            Ok(())
        } else {
            Err(LociError::DegenerateInstance(why.into()))
        }
    };
    let (components, incidences) = match c.family {
        A => {
            need(!n(4, 3).is_zero(), "n43 vanishes")?;
            let block = [[n(1, 1), n(1, 2)], [n(2, 1), n(2, 2)], [n(3, 1), n(3, 2)]];
            let minor = |a: usize, b: usize| {
                &(&block[a][0].to_poly() * &block[b][1].to_poly())
                    - &(&block[b][0].to_poly() * &block[a][1].to_poly())
            };
            let minors = vec![minor(0, 1), minor(0, 2), minor(1, 2)];
            need(
                poly_span_dimension(&minors) == 3 && gcd_many(&minors)?.is_constant(),
                "the 2x2 minors of the left 3x2 block share a factor",
            )?;
            let scroll = LocusComponent {
                name: "S_A".into(),
                kind: CubicScroll,
                generators: minors,
                shape: Shape::Scroll(block),
            };
            (
                vec![
                    LocusComponent::linear("H_A", Hyperplane, vec![n(4, 3)]),
                    scroll,
                ],
                vec![],
            )
        }
        B => {
            need(
                span_dimension(&[n(1, 3), n(3, 1), n(4, 1)]) == 3,
                "n13, n31, n41 are dependent, so H_B meets L_B in more than a line",
            )?;
            let q1 = &(&np(3, 2) * &np(4, 3)) - &(&np(4, 2) * &np(3, 3));
            let q2 = &(&np(3, 1) * &np(4, 3)) - &(&np(4, 1) * &np(3, 3));
            let q3 = &(&np(3, 1) * &np(4, 2)) - &(&np(4, 1) * &np(3, 2));
            need(
                poly_span_dimension(&[q1.clone(), q2.clone(), q3.clone()]) == 3,
                "the 2x2 minors of the last two rows are dependent",
            )?;
            let cubic = LocusComponent {
                name: "C_B".into(),
                kind: TwistedCubic,
                generators: vec![np(1, 3), q1.clone(), q2, q3],
                shape: Shape::TwistedCubic {
                    r3: [n(3, 1), n(3, 2), n(3, 3)],
                    r4: [n(4, 1), n(4, 2), n(4, 3)],
                    h: n(1, 3),
                },
            };
            (
                vec![
                    LocusComponent::linear("H_B", Hyperplane, vec![n(1, 3)]),
                    LocusComponent::linear("L_B", Plane, vec![n(3, 1), n(4, 1)]),
                    cubic,
                ],
                vec![Incidence {
                    between: (1, 2),
                    description: "r_B = H_B meet L_B is a secant line of C_B".into(),
                    fact: IncidenceFact::LineMeetsQuadric {
                        line: vec![n(1, 3), n(3, 1), n(4, 1)],
                        quadric: q1,
                        count: 2,
                    },
                }],
            )
        }
        C => {
            let h = n(1, 3);
            need(!h.is_zero(), "the common factor vanishes")?;
            need(
                span_dimension(&[n(2, 2), n(3, 1), n(4, 1), n(4, 2)]) == 4,
                "n22, n31, n41, n42 are dependent",
            )?;
            (
                vec![
                    LocusComponent::linear("H_C", Hyperplane, vec![h.clone()]),
                    LocusComponent::linear("L_C1", Plane, vec![n(3, 1), n(4, 1)]),
                    LocusComponent::linear("L_C2", Plane, vec![n(2, 2), n(4, 2)]),
                ],
                vec![Incidence {
                    between: (1, 2),
                    description: "L_C1 and L_C2 meet in a point of H_C".into(),
                    fact: IncidenceFact::PointOn {
                        forms: vec![n(3, 1), n(4, 1), n(2, 2), n(4, 2)],
                        on: h,
                    },
                }],
            )
        }
        D => {
            need(
                span_dimension(&[n(1, 3), n(3, 1), n(4, 1), n(4, 2)]) == 4,
                "n13, n31, n41, n42 are dependent",
            )?;
            let quad =
                &(&(&np(3, 1) * &np(4, 3)) - &(&np(4, 2) * &np(2, 3))) - &(&np(4, 1) * &np(3, 3));
            let surface = LocusComponent {
                name: "Q_D".into(),
                kind: QuadricSurface,
                generators: vec![np(1, 3), quad.clone()],
                shape: Shape::Quadric {
                    ambient: vec![n(1, 3)],
                    q: quad.clone(),
                    seeds: vec![
                        vec![n(1, 3), n(3, 1), n(4, 1), n(2, 3)],
                        vec![n(1, 3), n(3, 1), n(4, 2), n(3, 3)],
                        vec![n(1, 3), n(4, 3), n(2, 3), n(3, 3)],
                        vec![n(1, 3), n(3, 1), n(4, 1), n(4, 2)],
                    ],
                },
            };
            let line = vec![n(3, 1), n(4, 1), n(4, 2)];
            (
                vec![
                    LocusComponent::linear("H_D", Hyperplane, vec![n(3, 1)]),
                    surface,
                    LocusComponent::linear("r_D", Line, line.clone()),
                ],
                vec![Incidence {
                    between: (1, 2),
                    description: "Q_D meets r_D in a point".into(),
                    fact: IncidenceFact::LineMeetsSurfaceOnce {
                        line,
                        surface: vec![np(1, 3), quad],
                    },
                }],
            )
        }
        S1X1 => {
            let ell = c.extras.ell.clone();
            need(span_dimension(&ell) == 4, "l1..l4 are dependent")?;
            let x1 = constant_matrix(&c.extras.x)
                .filter(|x| x.nrows() == 6 && x.ncols() == 3)
                .ok_or_else(|| {
                    LociError::DegenerateInstance("X1 is not a 6x3 constant matrix".into())
                })?;
            let d = symmetric_matrix_d(&x1);
            need(
                !d.det().is_zero(),
                "det D = 0, the cone degenerates further",
            )?;
            let qd = quadric_from_d(&d, &ell);
            let cone = LocusComponent {
                name: "Q".into(),
                kind: Cone,
                generators: vec![qd.clone()],
                shape: Shape::Quadric {
                    ambient: vec![],
                    q: qd.clone(),
                    seeds: vec![],
                },
            };
            (
                vec![cone, LocusComponent::linear("vertex", Point, ell.clone())],
                vec![Incidence {
                    between: (0, 1),
                    description: "Q is a cone over a smooth quadric surface with the given vertex"
                        .into(),
                    fact: IncidenceFact::QuadricRank {
                        quadric: qd,
                        rank: 4,
                        vertex: ell,
                    },
                }],
            )
        }
        S2X2 => {
            let ell = &c.extras.ell;
            let l234 = ell[1..4].to_vec();
            need(
                ell.len() == 4 && span_dimension(&l234) == 3,
                "l2, l3, l4 are dependent",
            )?;
            let x = &c.extras.x;
            need(
                x.len() == 4 && x.iter().all(|r| r.len() == 3),
                "X2 is not 4x3",
            )?;
            let minor = |i: usize, j: usize, k: usize| {
                crate::exactpoly::determinant(&[
                    x[i - 1].clone(),
                    x[j - 1].clone(),
                    x[k - 1].clone(),
                ])
            };
            let qd = &(&(&l234[0].to_poly() * &minor(1, 3, 4))
                - &(&l234[1].to_poly() * &minor(1, 2, 4)))
                + &(&l234[2].to_poly() * &minor(1, 2, 3));
            need(!qd.is_zero(), "the quadric vanishes identically")?;
            let quadric = LocusComponent {
                name: "Q".into(),
                kind: QuadricHypersurface,
                generators: vec![qd.clone()],
                shape: Shape::Quadric {
                    ambient: vec![],
                    q: qd.clone(),
                    seeds: vec![l234.clone()],
                },
            };
            (
                vec![quadric, LocusComponent::linear("r", Line, l234.clone())],
                vec![
                    Incidence {
                        between: (0, 1),
                        description: "r lies on Q".into(),
                        fact: IncidenceFact::LineInside {
                            line: l234,
                            quadric: qd.clone(),
                        },
                    },
                    Incidence {
                        between: (0, 0),
                        description: "Q is smooth".into(),
                        fact: IncidenceFact::QuadricRank {
                            quadric: qd,
                            rank: 5,
                            vertex: vec![],
                        },
                    },
                ],
            )
        }
        S3X3 => {
            let ell = &c.extras.ell;
            let l34 = ell[2..4].to_vec();
            need(
                ell.len() == 4 && span_dimension(&l34) == 2,
                "l3, l4 are dependent",
            )?;
            let x = &c.extras.x;
            need(
                x.len() == 3 && x.iter().all(|r| r.len() == 3),
                "X3 is not 3x3",
            )?;
            let qd = crate::exactpoly::determinant(x);
            need(!qd.is_zero(), "det X3 vanishes identically")?;
            let rows: Vec<Vec<LinearForm>> = x[..2]
                .iter()
                .map(|r| r.iter().filter_map(Polynomial::to_linear_form).collect())
                .collect();
            need(
                rows.iter().all(|r| r.len() == 3),
                "X3 rows 1, 2 are not linear",
            )?;
            let last = constant_matrix(&x[2..])
                .ok_or_else(|| LociError::DegenerateInstance("X3 row 3 is not constant".into()))?;
            let c3: Vec<Q> = last.row(0).to_vec();
            // with a constant last row, det X3 only sees the components of
            // rows 1, 2 transverse to it: its vertex is where both rows are
            // parallel to row 3
            let vertex: Vec<LinearForm> = rows
                .iter()
                .flat_map(|r| {
                    let c3 = c3.clone();
                    (0..3).map(move |k| {
                        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                        r[i].scale(&c3[j]).sub(&r[j].scale(&c3[i]))
                    })
                })
                .collect();
            let quadric = LocusComponent {
                name: "Q".into(),
                kind: QuadricHypersurface,
                generators: vec![qd.clone()],
                shape: Shape::Quadric {
                    ambient: vec![],
                    q: qd.clone(),
                    seeds: rows,
                },
            };
            (
                vec![quadric, LocusComponent::linear("L", Plane, l34.clone())],
                vec![
                    Incidence {
                        between: (0, 1),
                        description: "L meets Q in a conic".into(),
                        fact: IncidenceFact::ConicSection {
                            plane: l34,
                            quadric: qd.clone(),
                        },
                    },
                    Incidence {
                        between: (0, 0),
                        description: "Q is a rank 4 quadric singular only at the vertex of X3"
                            .into(),
                        fact: IncidenceFact::QuadricRank {
                            quadric: qd,
                            rank: 4,
                            vertex,
                        },
                    },
                ],
            )
        }
        fam @ (NonDegenerate | Degenerate) => return Err(LociError::NotDecomposable(fam)),
    };
    Ok(LocusDecomposition {
        family: c.family,
        components,
        incidences,
    })
}

fn small<R: Rng + ?Sized>(rng: &mut R) -> Q {
    q(rng.random_range(-9..=9))
}

fn combo<R: Rng + ?Sized>(basis: &[Vec<Q>], rng: &mut R) -> Vec<Q> {
    let mut p = vec![Q::zero(); NVARS];
    for b in basis {
        let c = small(rng);
        for (x, y) in p.iter_mut().zip(b) {
            *x += &c * y;
        }
    }
    p
}

fn kernel(forms: &[LinearForm]) -> Vec<Vec<Q>> {
    if forms.is_empty() {
        return (0..NVARS)
            .map(|i| {
                (0..NVARS)
                    .map(|j| if i == j { Q::one() } else { Q::zero() })
                    .collect()
            })
            .collect();
    }
    coefficient_matrix(forms).kernel_basis()
}

fn nonzero(p: &[Q]) -> bool {
    p.iter().any(|x| !x.is_zero())
}

/// Symmetric bilinear form of a quadric: `q(a + b) = q(a) + 2 B(a, b) + q(b)`.
fn polar(s: &QMat, a: &[Q], b: &[Q]) -> Q {
    let sb = s.mul_vec(b);
    a.iter().zip(&sb).map(|(x, y)| x * y).sum()
}

/// Draw `count` points on `comp`.
pub fn sample_component<R: Rng + ?Sized>(
    comp: &LocusComponent,
    count: usize,
    rng: &mut R,
) -> Result<Vec<SamplePoint>, LociError> {
    let budget = 50 * count.max(1) + 50;
    let failed = || LociError::SamplingFailed {
        component: comp.name.clone(),
        attempts: budget,
    };
    let mut out = Vec::with_capacity(count);
    match &comp.shape {
        Shape::Linear(forms) => {
            let basis = kernel(forms);
            if basis.is_empty() {
                return Err(failed());
            }
            for _ in 0..budget {
                if out.len() == count {
                    break;
                }
                let p = combo(&basis, rng);
                if nonzero(&p) {
                    out.push(SamplePoint::Rational(p));
                }
            }
        }
        Shape::Scroll(block) => {
            for _ in 0..budget {
                if out.len() == count {
                    break;
                }
                let (s, t) = (small(rng), small(rng));
                let eqs: Vec<LinearForm> = block
                    .iter()
                    .map(|r| r[0].scale(&s).add(&r[1].scale(&t)))
                    .collect();
                let basis = kernel(&eqs);
                if (s.is_zero() && t.is_zero()) || basis.is_empty() {
                    continue;
                }
                let p = combo(&basis, rng);
                if nonzero(&p) {
                    out.push(SamplePoint::Rational(p));
                }
            }
        }
        Shape::TwistedCubic { r3, r4, h } => {
            for _ in 0..budget {
                if out.len() == count {
                    break;
                }
                let (mu, lambda) = (small(rng), small(rng));
                if mu.is_zero() && lambda.is_zero() {
                    continue;
                }
                let mut eqs: Vec<LinearForm> = (0..3)
                    .map(|j| r3[j].scale(&mu).sub(&r4[j].scale(&lambda)))
                    .collect();
                eqs.push(h.clone());
                let basis = kernel(&eqs);
                if basis.len() == 1 {
                    out.push(SamplePoint::Rational(basis[0].clone()));
                }
            }
        }
        Shape::Quadric { ambient, q, seeds } => {
            let s = q.quadric_matrix().ok_or_else(failed)?;
            let amb = kernel(ambient);
            let base = seeds.iter().find_map(|seed| {
                let k = kernel(seed);
                (0..10).find_map(|_| {
                    let p = combo(&k, rng);
                    let smooth = amb.iter().any(|b| !polar(&s, &p, b).is_zero());
                    (nonzero(&p) && smooth && q.evaluate(&p).is_zero()).then_some(p)
                })
            });
            if let Some(p) = base {
                // second intersection of a line through the base point
                for _ in 0..budget {
                    if out.len() == count {
                        break;
                    }
                    let b = combo(&amb, rng);
                    let (qb, bpb) = (q.evaluate(&b), polar(&s, &p, &b));
                    let two = crate::exactpoly::q(2);
                    let x: Vec<Q> = p
                        .iter()
                        .zip(&b)
                        .map(|(pi, bi)| &qb * pi - &two * &bpb * bi)
                        .collect();
                    if nonzero(&x) && !bpb.is_zero() {
                        out.push(SamplePoint::Rational(x));
                    }
                }
            } else {
                let amb_f: Vec<Vec<f64>> = amb
                    .iter()
                    .map(|v| v.iter().map(crate::linalg::Field::to_f64).collect())
                    .collect();
                let sf = s.to_f64();
                let qf = |a: &[f64], b: &[f64]| -> f64 {
                    (0..NVARS)
                        .map(|i| (0..NVARS).map(|j| a[i] * sf[(i, j)] * b[j]).sum::<f64>())
                        .sum()
                };
                let normal = rand_distr::StandardNormal;
                for _ in 0..budget {
                    if out.len() == count {
                        break;
                    }
                    let mut draw = || -> Vec<f64> {
                        let mut v = vec![0.0; NVARS];
                        for basis in &amb_f {
                            let c: f64 = rng.sample(normal);
                            for (x, y) in v.iter_mut().zip(basis) {
                                *x += c * y;
                            }
                        }
                        v
                    };
                    let (a, b) = (draw(), draw());
                    let (qa, qab, qb) = (qf(&a, &a), qf(&a, &b), qf(&b, &b));
                    let disc = qab * qab - qa * qb;
                    if disc < 0.0 || qb.abs() < 1e-12 {
                        continue;
                    }
                    let root = disc.sqrt();
                    // stable choice of the larger-magnitude root
                    let t = if qab >= 0.0 {
                        (-qab - root) / qb
                    } else {
                        (-qab + root) / qb
                    };
                    let mut x: Vec<f64> = a.iter().zip(&b).map(|(ai, bi)| ai + t * bi).collect();
                    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if !norm.is_finite() || norm < 1e-9 {
                        continue;
                    }
                    x.iter_mut().for_each(|v| *v /= norm);
                    let p = SamplePoint::Float(x);
                    if comp.contains(&p) {
                        out.push(p);
                    }
                }
            }
        }
    }
    if out.len() < count {
        return Err(failed());
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct RankDropReport {
    /// Rank of `N` at each sampled locus point.
    pub on_locus: Vec<usize>,
    /// Rank of `N` at random points.
    pub off_locus: Vec<usize>,
}

impl RankDropReport {
    pub fn on_locus_dropped(&self) -> bool {
        self.on_locus.iter().all(|&r| r <= 2)
    }

    pub fn off_locus_full(&self) -> bool {
        self.off_locus.iter().all(|&r| r == 3)
    }

    pub fn passed(&self) -> bool {
        self.on_locus_dropped() && self.off_locus_full()
    }
}

/// Rank of `N` at the given points and at `off_count` random rational points.
pub fn verify_rank_drop<R: Rng + ?Sized>(
    n: &LinFormMatrix,
    pts: &[SamplePoint],
    off_count: usize,
    rng: &mut R,
) -> RankDropReport {
    RankDropReport {
        on_locus: pts.iter().map(|p| p.rank_of(n)).collect(),
        off_locus: (0..off_count)
            .map(|_| {
                // wide range so that integer points of rational hyperplanes
                // are not hit by accident
                let p: Vec<Q> = (0..NVARS)
                    .map(|_| q(rng.random_range(-1_000_000..=1_000_000)))
                    .collect();
                n.evaluate(&p).rank()
            })
            .collect(),
    }
}

/// Substitute `x = sum_k u_k v_k` with `u_k` the `k`-th variable.
fn restrict(f: &Polynomial, basis: &[Vec<Q>]) -> Polynomial {
    let images: Vec<Polynomial> = (0..NVARS)
        .map(|i| {
            let mut img = Polynomial::zero();
            for (k, v) in basis.iter().enumerate() {
                img = &img + &Polynomial::var(k).scale(&v[i]);
            }
            img
        })
        .collect();
    f.substitute(&images)
}

fn restrict_form(l: &LinearForm, basis: &[Vec<Q>]) -> LinearForm {
    let mut c: [Q; NVARS] = std::array::from_fn(|_| Q::zero());
    for (k, v) in basis.iter().enumerate() {
        c[k] = l.evaluate(v);
    }
    LinearForm(c)
}

/// Coefficients `(a, b, c)` of `a s^2 + b s t + c t^2` in the first two
/// variables.
fn binary_quadratic(f: &Polynomial) -> [Q; 3] {
    let mono = |i: u8, j: u8| Monomial([i, j, 0, 0, 0]);
    [
        f.coeff(&mono(2, 0)),
        f.coeff(&mono(1, 1)),
        f.coeff(&mono(0, 2)),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct IncidenceCheck {
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct IncidenceReport {
    pub checks: Vec<IncidenceCheck>,
}

impl IncidenceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// First failing fact as an error.
    pub fn ensure(&self) -> Result<(), LociError> {
        match self.checks.iter().find(|c| !c.passed) {
            Some(c) => Err(LociError::IncidenceMismatch(format!(
                "{}: {}",
                c.description, c.detail
            ))),
            None => Ok(()),
        }
    }
}

fn check_fact(fact: &IncidenceFact) -> (bool, String) {
    match fact {
        IncidenceFact::LineMeetsQuadric {
            line,
            quadric,
            count,
        } => {
            let k = kernel(line);
            if k.len() != 2 {
                return (
                    false,
                    format!("the forms cut a space of dimension {}", k.len() as i64 - 1),
                );
            }
            let r = restrict(quadric, &k);
            if r.is_zero() {
                return (false, "the line lies on the quadric".into());
            }
            let [a, b, c] = binary_quadratic(&r);
            let disc = &b * &b - q(4) * &a * &c;
            let kind = if disc.is_zero() {
                "a double point"
            } else if disc.is_positive() {
                "two real points"
            } else {
                "two complex-conjugate points"
            };
            let found = r.total_degree().unwrap_or(0) as usize;
            (
                found == *count,
                format!("{found} points over C ({kind}), discriminant {disc}"),
            )
        }
        IncidenceFact::PointOn { forms, on } => {
            let k = kernel(forms);
            if k.len() != 1 {
                return (false, format!("solution space has dimension {}", k.len()));
            }
            let v = on.evaluate(&k[0]);
            (
                v.is_zero(),
                format!(
                    "point {}; value on hyperplane {v}",
                    SamplePoint::Rational(k[0].clone())
                ),
            )
        }
        IncidenceFact::LineMeetsSurfaceOnce { line, surface } => {
            let k = kernel(line);
            if k.len() != 2 {
                return (false, "not a line".into());
            }
            let restricted: Vec<Polynomial> = surface.iter().map(|f| restrict(f, &k)).collect();
            let nonzero: Vec<&Polynomial> = restricted.iter().filter(|f| !f.is_zero()).collect();
            let g = match nonzero.as_slice() {
                [] => return (false, "the line lies on the surface".into()),
                _ => gcd_many(&nonzero.iter().map(|f| (*f).clone()).collect::<Vec<_>>()),
            };
            match g {
                Ok(g) => {
                    let d = g.total_degree().unwrap_or(0);
                    (d == 1, format!("common zeros on the line of degree {d}"))
                }
                Err(e) => (false, e.to_string()),
            }
        }
        IncidenceFact::LineInside { line, quadric } => {
            let k = kernel(line);
            let r = restrict(quadric, &k);
            (
                k.len() == 2 && r.is_zero(),
                format!("restriction to the line: {r}"),
            )
        }
        IncidenceFact::ConicSection { plane, quadric } => {
            let k = kernel(plane);
            let r = restrict(quadric, &k);
            (
                k.len() == 3 && r.total_degree() == Some(2),
                format!("restriction to the plane: {r}"),
            )
        }
        IncidenceFact::QuadricRank {
            quadric,
            rank,
            vertex,
        } => {
            let Some(s) = quadric.quadric_matrix() else {
                return (false, "not a quadratic form".into());
            };
            let found = s.rank();
            let mut ok = found == *rank;
            if ok && *rank < NVARS {
                let k = s.kernel_basis();
                ok = k
                    .iter()
                    .all(|v| vertex.iter().all(|l| l.evaluate(v).is_zero()));
            }
            (ok, format!("rank {found} (expected {rank})"))
        }
    }
}

/// Verify each incidence claimed by the decomposition.
pub fn incidence_checks(d: &LocusDecomposition) -> IncidenceReport {
    IncidenceReport {
        checks: d
            .incidences
            .iter()
            .map(|i| {
                let (passed, detail) = check_fact(&i.fact);
                IncidenceCheck {
                    description: i.description.clone(),
                    passed,
                    detail,
                }
            })
            .collect(),
    }
}

fn random_space<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Vec<Q>> {
    loop {
        let pts: Vec<Vec<Q>> = (0..=dim)
            .map(|_| crate::exactpoly::random_point(rng))
            .collect();
        if QMat::from_rows(pts.clone()).rank() == dim + 1 {
            return pts;
        }
    }
}

/// Number of intersection points over C of `comp` with a random linear space
/// of complementary dimension, with multiplicity. `None` when the random
/// space is not in general position for this component.
pub fn intersection_count<R: Rng + ?Sized>(comp: &LocusComponent, rng: &mut R) -> Option<usize> {
    let kind = comp.kind;
    if kind.is_linear() {
        let Shape::Linear(forms) = &comp.shape else {
            return None;
        };
        let space = random_space(4 - kind.dim(), rng);
        let restricted: Vec<LinearForm> = forms.iter().map(|l| restrict_form(l, &space)).collect();
        let m = coefficient_matrix(&restricted).select(
            &(0..restricted.len()).collect::<Vec<_>>(),
            &(0..space.len()).collect::<Vec<_>>(),
        );
        return (space.len() - m.rank() == 1).then_some(1);
    }
    let binary_degree = |f: &Polynomial| -> Option<usize> {
        (!f.is_zero()).then(|| f.total_degree().unwrap_or(0) as usize)
    };
    match &comp.shape {
        Shape::Quadric { ambient, q, .. } => {
            // cut down to a line inside the ambient space
            let space = random_space(1 + ambient.len(), rng);
            let restricted: Vec<LinearForm> =
                ambient.iter().map(|l| restrict_form(l, &space)).collect();
            let line: Vec<Vec<Q>> = if restricted.is_empty() {
                space
            } else {
                let m = coefficient_matrix(&restricted).select(
                    &(0..restricted.len()).collect::<Vec<_>>(),
                    &(0..space.len()).collect::<Vec<_>>(),
                );
                m.kernel_basis()
                    .iter()
                    .map(|c| {
                        (0..NVARS)
                            .map(|i| c.iter().zip(&space).map(|(ck, v)| ck * &v[i]).sum())
                            .collect()
                    })
                    .collect()
            };
            if line.len() != 2 {
                return None;
            }
            binary_degree(&restrict(q, &line))
        }
        Shape::Scroll(block) => {
            // points of a random plane where the block has rank one: the
            // kernel direction (s:t) is a root of a binary cubic
            let space = random_space(2, rng);
            let rows: Vec<Vec<Polynomial>> = block
                .iter()
                .map(|r| {
                    let a = restrict_form(&r[0], &space);
                    let b = restrict_form(&r[1], &space);
                    (0..3)
                        .map(|k| {
                            &Polynomial::var(0).scale(&a.0[k]) + &Polynomial::var(1).scale(&b.0[k])
                        })
                        .collect()
                })
                .collect();
            binary_degree(&crate::exactpoly::determinant(&rows))
        }
        Shape::TwistedCubic { r3, r4, h } => {
            let cut = crate::exactpoly::random_linear_form(rng);
            let constant_row = |l: &LinearForm| -> Vec<Polynomial> {
                l.0.iter()
                    .map(|c| Polynomial::constant(c.clone()))
                    .collect()
            };
            let mut rows: Vec<Vec<Polynomial>> = (0..3)
                .map(|j| {
                    (0..NVARS)
                        .map(|k| {
                            &Polynomial::var(0).scale(&r3[j].0[k])
                                - &Polynomial::var(1).scale(&r4[j].0[k])
                        })
                        .collect()
                })
                .collect();
            rows.push(constant_row(h));
            rows.push(constant_row(&cut));
            binary_degree(&crate::exactpoly::determinant(&rows))
        }
        Shape::Linear(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::{parse_polynomial, random_linear_form};
    use crate::linclass::{build_family, classify_4x3, random_instance, FamilyParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn printed_x1() -> QMat {
        QMat::from_i64_rows(&[
            &[0, 6, 0],
            &[0, -3, 0],
            &[1, 0, 0],
            &[0, -3, 12],
            &[0, 0, 0],
            &[0, 0, 4],
        ])
    }

    fn s1_gcd(x1: &QMat, ell: &[LinearForm]) -> Polynomial {
        let params = FamilyParams {
            forms: ell.to_vec(),
            scalars: x1.to_rows().into_iter().flatten().collect(),
        };
        let m = build_family(CanonicalFamily::S1X1, &params).unwrap();
        gcd_many(&m.maximal_minors_signed().unwrap()).unwrap()
    }

    fn proportional(a: &Polynomial, b: &Polynomial) -> bool {
        !a.is_zero() && !b.is_zero() && a.monic() == b.monic()
    }

    #[test]
    fn d_reproduces_minors_gcd_on_printed_x1() {
        let ell: Vec<LinearForm> = (0..4).map(LinearForm::var).collect();
        let x1 = printed_x1();
        let qd = quadric_from_d(&symmetric_matrix_d(&x1), &ell);
        assert!(proportional(&qd, &s1_gcd(&x1, &ell)), "{qd}");
    }

    #[test]
    fn d_reproduces_minors_gcd_on_random_x1() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let x1 = QMat::from_fn(6, 3, |_, _| q(rng.random_range(-3..=3)));
            if x1.rank() < 3 {
                continue;
            }
            let ell: Vec<LinearForm> = (0..4).map(|_| random_linear_form(&mut rng)).collect();
            if span_dimension(&ell) < 4 {
                continue;
            }
            let qd = quadric_from_d(&symmetric_matrix_d(&x1), &ell);
            let g = s1_gcd(&x1, &ell);
            if g.total_degree() == Some(2) {
                assert!(proportional(&qd, &g), "{qd} vs {g}");
            }
        }
    }

    #[test]
    fn cone_vertex_is_on_the_cone() {
        let ell: Vec<LinearForm> = (0..4).map(LinearForm::var).collect();
        let qd = quadric_from_d(&symmetric_matrix_d(&printed_x1()), &ell);
        let vertex = kernel(&ell);
        assert_eq!(vertex.len(), 1);
        assert!(qd.evaluate(&vertex[0]).is_zero());
        let printed = parse_polynomial("x1^2-2*x1*x2+3*x3*x1+x1*x4-6*x3*x2").unwrap();
        assert!(printed.evaluate(&vertex[0]).is_zero());
    }

    #[test]
    fn every_family_samples_onto_its_locus() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for tag in [
            CanonicalFamily::A,
            CanonicalFamily::B,
            CanonicalFamily::C,
            CanonicalFamily::D,
            CanonicalFamily::S1X1,
            CanonicalFamily::S2X2,
            CanonicalFamily::S3X3,
        ] {
            let (n, _, _) = random_instance(tag, &mut rng).unwrap();
            let c = classify_4x3(&n).unwrap();
            let d = decompose(&c).unwrap();
            for comp in &d.components {
                assert_eq!(comp.kind.dim(), comp.dim());
                let pts = match sample_component(comp, 5, &mut rng) {
                    Ok(p) => p,
                    // a cone over a real-definite quadric has no real points
                    // besides its vertex
                    Err(LociError::SamplingFailed { .. }) if comp.kind == ComponentKind::Cone => {
                        continue
                    }
                    Err(e) => panic!("{tag} {}: {e}", comp.name),
                };
                for p in &pts {
                    assert!(comp.contains(p), "{tag} {}: {p}", comp.name);
                }
                let report = verify_rank_drop(&n, &pts, 10, &mut rng);
                assert!(report.passed(), "{tag} {}: {report:?}", comp.name);
                assert_eq!(
                    intersection_count(comp, &mut rng),
                    Some(comp.degree()),
                    "{tag} {}",
                    comp.name
                );
            }
            assert!(
                incidence_checks(&d).passed(),
                "{tag}: {:?}",
                incidence_checks(&d)
            );
        }
    }

    #[test]
    fn b_components_match_last_rows() {
        let n = LinFormMatrix::from_strs(&[
            &["0", "0", "x1"],
            &["0", "x1", "0"],
            &["x2", "x3", "x4"],
            &["x5", "x1+x2", "x3-x4"],
        ])
        .unwrap();
        let c = classify_4x3(&n).unwrap();
        assert_eq!(c.family, CanonicalFamily::B);
        let d = decompose(&c).unwrap();
        let kinds: Vec<ComponentKind> = d.components.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            [
                ComponentKind::Hyperplane,
                ComponentKind::Plane,
                ComponentKind::TwistedCubic
            ]
        );
        // the cubic's quadrics are the 2x2 minors of the last two rows
        let rows = n.select(&[2, 3], &[0, 1, 2]).transpose();
        let minors = rows.maximal_minors_signed().unwrap();
        let cubic = &d.components[2].generators;
        let span = poly_span_dimension(&[cubic[1..].to_vec(), minors].concat());
        assert_eq!(span, 3);
    }

    #[test]
    fn c_with_unit_scalars() {
        let params = FamilyParams {
            forms: (0..4).map(LinearForm::var).collect(),
            scalars: vec![q(1), q(1)],
        };
        let n = build_family(CanonicalFamily::C, &params).unwrap();
        let d = decompose(&classify_4x3(&n).unwrap()).unwrap();
        let kinds: Vec<ComponentKind> = d.components.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            [
                ComponentKind::Hyperplane,
                ComponentKind::Plane,
                ComponentKind::Plane
            ]
        );
        let report = incidence_checks(&d);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn nondegenerate_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = LinFormMatrix::new(
            (0..4)
                .map(|_| (0..3).map(|_| random_linear_form(&mut rng)).collect())
                .collect(),
        )
        .unwrap();
        let c = classify_4x3(&n).unwrap();
        assert!(matches!(decompose(&c), Err(LociError::NotDecomposable(_))));
    }

    #[test]
    fn singular_d_gives_a_double_plane() {
        let x1 = QMat::from_i64_rows(&[
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 0],
            &[0, 0, 1],
            &[0, 0, 0],
            &[0, 0, 0],
        ]);
        let d = symmetric_matrix_d(&x1);
        assert!(d.det().is_zero());
        let ell: Vec<LinearForm> = (0..4).map(LinearForm::var).collect();
        let qd = quadric_from_d(&d, &ell);
        assert_eq!(qd, -(&Polynomial::var(2) * &Polynomial::var(2)));
        assert!(proportional(&qd, &s1_gcd(&x1, &ell)));
    }
}
