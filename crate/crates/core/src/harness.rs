//! Instability experiments near the non-linear critical components.
//!
//! A trial draws scene points on the critical surface of a fixture, perturbs
//! them in the affine chart `x5 = 1`, projects with the `P` cameras, perturbs
//! the images, estimates the trifocal tensor and measures its distance to
//! the true one.

use std::io::Write;

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::critical::{fixtures, reduce_to_n, CaseTag, CriticalError};
use crate::exactpoly::{LinearForm, Polynomial, NVARS};
use crate::linalg::Field;
use crate::linclass::{classify_4x3, LinClassError};
use crate::loci::{decompose, ComponentKind, LociError};
use crate::multiview::{trifocal_from_cameras, Camera, Profile, TrifocalTensor};
use crate::recon::{
    assemble_mt, estimate_tensor, tensor_distance, triples_from_images, ReconError,
};

/// Normalized generator values below this count as on the surface.
pub const SURFACE_TOL: f64 = 1e-10;
/// Re-draws allowed for a failed trial.
pub const MAX_ATTEMPTS: u32 = 10;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("fixture: {0}")]
    Fixture(#[from] CriticalError),
    #[error("fixture classification: {0}")]
    Classify(#[from] LinClassError),
    #[error("fixture locus: {0}")]
    Loci(#[from] LociError),
    #[error("could not sample the critical surface after {0} attempts")]
    SamplingFailed(usize),
    #[error("image point at infinity")]
    ImageAtInfinity,
    #[error(transparent)]
    Recon(#[from] ReconError),
    #[error("trial sigma={sigma} repeat={repeat} failed {attempts} times: {last}")]
    TrialFailed {
        sigma: f64,
        repeat: usize,
        attempts: u32,
        last: String,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Whether a fresh draw may succeed.
    fn retryable(&self) -> bool {
        matches!(
            self,
            HarnessError::SamplingFailed(_)
                | HarnessError::ImageAtInfinity
                | HarnessError::Recon(_)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DeltaPolicy {
    Fixed(f64),
    /// `delta = c * m`.
    Multiple(f64),
}

impl DeltaPolicy {
    pub fn delta(&self, m: f64) -> f64 {
        match *self {
            DeltaPolicy::Fixed(d) => d,
            DeltaPolicy::Multiple(c) => c * m,
        }
    }
}

/// Published `(m, delta)` per case.
pub fn published_calibration(case: CaseTag) -> (f64, f64) {
    match case {
        CaseTag::ScrollI => (0.014, 0.03),
        CaseTag::ConeIv => (0.0012, 0.015),
        CaseTag::QuadricV => (0.015, 0.03),
    }
}

/// `start, start + step, ...` up to `end` inclusive (with a small slack).
pub fn sigma_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub case: CaseTag,
    pub n_points: usize,
    pub sigma_grid: Vec<f64>,
    pub repeats: usize,
    pub image_sigma: f64,
    pub delta_policy: DeltaPolicy,
    pub calibration_trials: usize,
    pub seed: u64,
    pub profile: Profile,
    /// Draw the critical points once and reuse them in every trial.
    pub fixed_scene: bool,
}

impl ExperimentConfig {
    pub fn new(case: CaseTag, seed: u64) -> Self {
        ExperimentConfig {
            case,
            n_points: case.default_points(),
            sigma_grid: sigma_grid(1e-4, 1.0, 1e-2),
            repeats: 10,
            image_sigma: 0.01,
            delta_policy: DeltaPolicy::Multiple(2.0),
            calibration_trials: 1000,
            seed,
            profile: Profile::P221,
            fixed_scene: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.n_points < 26 {
            return bad("at least 26 points are needed to determine the tensor");
        }
        if self.repeats == 0 || self.calibration_trials == 0 {
            return bad("repeats and calibration trials must be positive");
        }
        if self.sigma_grid.is_empty()
            || self
                .sigma_grid
                .iter()
                .any(|s| !(*s > 0.0) || !s.is_finite())
        {
            return bad("sigma grid must be non-empty and positive");
        }
        if self.sigma_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("sigma grid must be strictly increasing");
        }
        if !(self.image_sigma >= 0.0) || !self.image_sigma.is_finite() {
            return bad("image sigma must be non-negative");
        }
        match self.delta_policy {
            DeltaPolicy::Fixed(d) | DeltaPolicy::Multiple(d) if !(d > 0.0) || !d.is_finite() => {
                bad("delta must be positive")
            }
            _ => Ok(()),
        }
    }
}

fn form_f64(l: &LinearForm) -> [f64; NVARS] {
    std::array::from_fn(|i| l.0[i].to_f64())
}

fn dot5(a: &[f64; NVARS], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(u, v)| u * v).sum()
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> [f64; NVARS] {
    std::array::from_fn(|_| rng.sample(StandardNormal))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The non-linear critical component a case samples from.
#[derive(Clone, Debug)]
pub enum CriticalSurface {
    /// Rank-one locus of a 3x2 block of linear forms; the center lines lie
    /// on it.
    Scroll {
        block: [[[f64; NVARS]; 2]; 3],
        centers: Vec<[[f64; NVARS]; 2]>,
    },
    /// A quadric that is linear in `var`.
    LinearIn { q: Polynomial, var: usize },
    /// A quadric containing the given center lines.
    Quadric {
        q: Polynomial,
        sym: [[f64; NVARS]; NVARS],
        centers: Vec<[[f64; NVARS]; 2]>,
    },
}

/// Everything fixed across the trials of a case.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub case: CaseTag,
    pub profile: Profile,
    pub cameras: [Camera<f64>; 3],
    pub true_tensor: TrifocalTensor<f64>,
    pub surface: CriticalSurface,
    /// Generators of the surface, for membership checks.
    pub generators: Vec<Polynomial>,
}

impl Experiment {
    pub fn new(case: CaseTag, profile: Profile) -> Result<Self, HarnessError> {
        let cfg = fixtures(case);
        let reduced = reduce_to_n(&cfg)?;
        let class = classify_4x3(&reduced.n)?;
        let dec = decompose(&class)?;
        let want = match case {
            CaseTag::ScrollI => ComponentKind::CubicScroll,
            CaseTag::ConeIv => ComponentKind::Cone,
            CaseTag::QuadricV => ComponentKind::QuadricHypersurface,
        };
        let comp = dec
            .components
            .iter()
            .find(|c| c.kind == want)
            .ok_or_else(|| {
                HarnessError::Config(format!(
                    "{case}: fixture has no {want} component (family {})",
                    class.family
                ))
            })?;
        let centers_on = |gens: &[Polynomial]| -> Vec<[[f64; NVARS]; 2]> {
            cfg.p
                .iter()
                .map(|p| p.center())
                .filter(|[a, b]| {
                    let mid: Vec<_> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    [a, b, &mid].iter().all(|pt| {
                        gens.iter()
                            .all(|g| num_traits::Zero::is_zero(&g.evaluate(pt)))
                    })
                })
                .map(|[a, b]| {
                    [
                        std::array::from_fn(|i| a[i].to_f64()),
                        std::array::from_fn(|i| b[i].to_f64()),
                    ]
                })
                .collect()
        };
        let surface = match case {
            CaseTag::ScrollI => {
                let block = comp.scroll_block().expect("scroll component");
                let centers = centers_on(&comp.generators);
                if centers.len() < 2 {
                    return Err(HarnessError::Config(
                        "fewer than two centers lie on the scroll".into(),
                    ));
                }
                CriticalSurface::Scroll {
                    block: std::array::from_fn(|i| std::array::from_fn(|j| form_f64(&block[i][j]))),
                    centers,
                }
            }
            CaseTag::ConeIv => {
                let q = comp.quadric().expect("quadric component").clone();
                // prefer x4, then lower variables
                let var = [3, 2, 1, 0]
                    .into_iter()
                    .find(|&v| q.degree_in(v) == 1)
                    .ok_or_else(|| {
                        HarnessError::Config("cone is not linear in any of x1..x4".into())
                    })?;
                CriticalSurface::LinearIn { q, var }
            }
            CaseTag::QuadricV => {
                let q = comp.quadric().expect("quadric component").clone();
                let s = q.quadric_matrix().expect("quadratic form");
                let centers = centers_on(std::slice::from_ref(&q));
                if centers.is_empty() {
                    return Err(HarnessError::Config("no center lies on the quadric".into()));
                }
                CriticalSurface::Quadric {
                    sym: std::array::from_fn(|i| std::array::from_fn(|j| s[(i, j)].to_f64())),
                    q,
                    centers,
                }
            }
        };
        let cameras = [cfg.p[0].to_f64(), cfg.p[1].to_f64(), cfg.p[2].to_f64()];
        let true_tensor = trifocal_from_cameras(&cameras[0], &cameras[1], &cameras[2], profile);
        Ok(Experiment {
            case,
            profile,
            cameras,
            true_tensor,
            surface,
            generators: comp.generators.clone(),
        })
    }

    /// Largest normalized generator value at `x`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let n = norm(x);
        let unit: Vec<f64> = x.iter().map(|v| v / n).collect();
        self.generators
            .iter()
            .map(|g| g.evaluate_f64(&unit).abs() / g.coeff_norm_f64())
            .fold(0.0, f64::max)
    }

    fn draw_critical<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<[f64; NVARS]> {
        let on_center = |centers: &[[[f64; NVARS]; 2]], k: usize, rng: &mut R| -> [f64; NVARS] {
            let (s, t): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            std::array::from_fn(|i| s * centers[k][0][i] + t * centers[k][1][i])
        };
        let x = match &self.surface {
            CriticalSurface::Scroll { block, centers } => {
                let i = rng.random_range(0..centers.len());
                let mut j = rng.random_range(0..centers.len() - 1);
                if j >= i {
                    j += 1;
                }
                let a = on_center(centers, i, rng);
                let b = on_center(centers, j, rng);
                let c = gaussian(rng);
                third_scroll_point(block, &a, &b, &c)?
            }
            CriticalSurface::LinearIn { q, var } => {
                let mut x = [0.0; NVARS];
                x[NVARS - 1] = 1.0;
                for (i, xi) in x.iter_mut().enumerate().take(NVARS - 1) {
                    if i != *var {
                        *xi = rng.sample(StandardNormal);
                    }
                }
                // q = a * x_var + b
                let b = q.evaluate_f64(&x);
                x[*var] = 1.0;
                let a = q.evaluate_f64(&x) - b;
                if a.abs() < 1e-9 {
                    return None;
                }
                x[*var] = -b / a;
                x
            }
            CriticalSurface::Quadric { sym, centers, .. } => {
                let k = rng.random_range(0..centers.len());
                let p = on_center(centers, k, rng);
                let r = gaussian(rng);
                let form = |u: &[f64; NVARS], v: &[f64; NVARS]| -> f64 {
                    (0..NVARS)
                        .map(|i| (0..NVARS).map(|j| u[i] * sym[i][j] * v[j]).sum::<f64>())
                        .sum()
                };
                let (bpr, qr) = (form(&p, &r), form(&r, &r));
                if qr.abs() < 1e-12 || bpr.abs() < 1e-12 {
                    return None;
                }
                let t = -2.0 * bpr / qr;
                std::array::from_fn(|i| p[i] + t * r[i])
            }
        };
        // affine chart x5 = 1
        if x[NVARS - 1].abs() <= 1e-9 * norm(&x) {
            return None;
        }
        let x: [f64; NVARS] = std::array::from_fn(|i| x[i] / x[NVARS - 1]);
        (self.residual(&x) < SURFACE_TOL).then_some(x)
    }

    /// `n` points on the critical surface in the chart `x5 = 1`.
    pub fn generate_critical_points<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<[f64; NVARS]>, HarnessError> {
        let budget = 20 * n + 100;
        let mut out = Vec::with_capacity(n);
        for _ in 0..budget {
            if out.len() == n {
                break;
            }
            if let Some(x) = self.draw_critical(rng) {
                out.push(x);
            }
        }
        if out.len() < n {
            return Err(HarnessError::SamplingFailed(budget));
        }
        Ok(out)
    }

    /// Distance between the true tensor and the one estimated from noisy
    /// images of `scene`.
    pub fn reconstruction_distance<R: Rng + ?Sized>(
        &self,
        scene: &[[f64; NVARS]],
        image_sigma: f64,
        rng: &mut R,
    ) -> Result<f64, HarnessError> {
        let mut images = Vec::with_capacity(scene.len());
        for x in scene {
            let mut views = [[0.0; 3]; 3];
            for (v, cam) in self.cameras.iter().enumerate() {
                views[v] = cam.project(x).map_err(ReconError::from)?;
            }
            images.push(views);
        }
        let mut noisy = Vec::with_capacity(images.len());
        for views in images {
            let p = perturb_images(&views, image_sigma, rng)?;
            noisy.push([p[0], p[1], p[2]]);
        }
        let triples = triples_from_images(noisy, self.profile, rng);
        let est = estimate_tensor(&assemble_mt(&triples), self.profile);
        Ok(tensor_distance(&est.tensor, &self.true_tensor))
    }
}

/// Third point of the scroll in the plane through `a`, `b` (on the scroll)
/// and `c`. Writing the plane as `s a + t b + u c`, rank-one points of the
/// block are where `sigma col1 + tau col2` has a kernel; `det` of that 3x3
/// system is a cubic in `sigma / tau` whose roots at `a` and `b` are known.
fn third_scroll_point(
    block: &[[[f64; NVARS]; 2]; 3],
    a: &[f64; NVARS],
    b: &[f64; NVARS],
    c: &[f64; NVARS],
) -> Option<[f64; NVARS]> {
    let restricted = |i: usize, j: usize| -> [f64; 3] {
        [
            dot5(&block[i][j], a),
            dot5(&block[i][j], b),
            dot5(&block[i][j], c),
        ]
    };
    let r: [[[f64; 3]; 2]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| restricted(i, j)));
    let system = |sigma: f64| -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        for i in 0..3 {
            for k in 0..3 {
                m[(i, k)] = sigma * r[i][0][k] + r[i][1][k];
            }
        }
        m
    };
    let det3 = |sigma: f64| -> f64 { system(sigma).fixed_view::<3, 3>(0, 0).determinant() };
    // coefficients of the cubic from four samples
    let nodes: [f64; 4] = [-1.0, 0.0, 1.0, 2.0];
    let v = Matrix4::from_fn(|i, j| nodes[i].powi(3 - j as i32));
    let g = Vector4::from_fn(|i, _| det3(nodes[i]));
    let k = v.lu().solve(&g)?;
    if k[0].abs() < 1e-12 * k.norm() {
        return None;
    }
    // kernel direction of the block at a known point: sigma L0 + L1 = 0
    let root_at = |w: usize| -> Option<f64> {
        let i = (0..3).max_by(|&x, &y| r[x][0][w].abs().total_cmp(&r[y][0][w].abs()))?;
        let l0 = r[i][0][w];
        (l0.abs() > 1e-12).then(|| -r[i][1][w] / l0)
    };
    let sigma = -k[1] / k[0] - root_at(0)? - root_at(1)?;
    let m = system(sigma);
    let rows: Vec<[f64; 3]> = (0..3).map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)]]).collect();
    let w = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(p, q)| crate::multiview::cross(&rows[p], &rows[q]))
        .max_by(|x, y| norm(x).total_cmp(&norm(y)))?;
    Some(std::array::from_fn(|i| {
        w[0] * a[i] + w[1] * b[i] + w[2] * c[i]
    }))
}

/// Gaussian offsets on the four affine coordinates; `x5` stays 1.
pub fn perturb_scene<R: Rng + ?Sized>(
    points: &[[f64; NVARS]],
    sigma: f64,
    rng: &mut R,
) -> Vec<[f64; NVARS]> {
    if sigma == 0.0 {
        return points.to_vec();
    }
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    points
        .iter()
        .map(|x| {
            let mut y = *x;
            for v in y.iter_mut().take(NVARS - 1) {
                *v += noise.sample(rng);
            }
            y
        })
        .collect()
}

/// Dehomogenize each image point and add Gaussian offsets to its two affine
/// coordinates.
pub fn perturb_images<R: Rng + ?Sized>(
    images: &[[f64; 3]],
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<[f64; 3]>, HarnessError> {
    let noise = Normal::new(0.0, sigma.max(0.0)).expect("finite sigma");
    images
        .iter()
        .map(|x| {
            if x[2].abs() <= 1e-12 * norm(x) {
                return Err(HarnessError::ImageAtInfinity);
            }
            let mut y = [x[0] / x[2], x[1] / x[2], 1.0];
            if sigma > 0.0 {
                y[0] += noise.sample(rng);
                y[1] += noise.sample(rng);
            }
            Ok(y)
        })
        .collect()
}

/// Generic scene point in the chart `x5 = 1`.
fn random_scene_point<R: Rng + ?Sized>(rng: &mut R) -> [f64; NVARS] {
    let mut x = gaussian(rng);
    x[NVARS - 1] = 1.0;
    x
}

/// Stream id of one trial attempt; calibration uses the top bit.
fn stream(kind: u64, major: u64, minor: u64, attempt: u32) -> u64 {
    (kind << 63) | (major << 40) | (minor << 8) | attempt as u64
}

fn trial_rng(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub m: f64,
    pub delta: f64,
    pub trials: usize,
}

fn map_trials<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Mean distance `m` over random (non-critical) scenes with image noise
/// only, and the resulting `delta`.
pub fn calibrate_delta(
    exp: &Experiment,
    cfg: &ExperimentConfig,
) -> Result<Calibration, HarnessError> {
    let results = map_trials(cfg.calibration_trials, |t| {
        let mut last = None;
        for attempt in 0..MAX_ATTEMPTS {
            let mut rng = trial_rng(cfg.seed, stream(1, 0, t as u64, attempt));
            let scene: Vec<_> = (0..cfg.n_points)
                .map(|_| random_scene_point(&mut rng))
                .collect();
            match exp.reconstruction_distance(&scene, cfg.image_sigma, &mut rng) {
                Ok(d) => return Ok(d),
                Err(e) if e.retryable() => {
                    log::warn!("calibration trial {t} attempt {attempt}: {e}");
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(HarnessError::TrialFailed {
            sigma: 0.0,
            repeat: t,
            attempts: MAX_ATTEMPTS,
            last: last.map(|e| e.to_string()).unwrap_or_default(),
        })
    });
    let ds = results.into_iter().collect::<Result<Vec<f64>, _>>()?;
    let m = ds.iter().sum::<f64>() / ds.len() as f64;
    Ok(Calibration {
        m,
        delta: cfg.delta_policy.delta(m),
        trials: ds.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub case: String,
    pub sigma: f64,
    pub repeat: usize,
    pub distance: f64,
    pub m: f64,
    pub delta: f64,
    pub is_near: bool,
    pub attempts: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaSummary {
    pub sigma: f64,
    pub near: usize,
    pub far: usize,
    pub mean_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub case: String,
    pub m: f64,
    pub delta: f64,
    pub per_sigma: Vec<SigmaSummary>,
}

impl SweepSummary {
    fn from_records(
        case: CaseTag,
        cal: &Calibration,
        grid: &[f64],
        records: &[TrialRecord],
    ) -> Self {
        let per_sigma = grid
            .iter()
            .map(|&s| {
                let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.sigma == s).collect();
                let near = rs.iter().filter(|r| r.is_near).count();
                SigmaSummary {
                    sigma: s,
                    near,
                    far: rs.len() - near,
                    mean_distance: rs.iter().map(|r| r.distance).sum::<f64>()
                        / rs.len().max(1) as f64,
                }
            })
            .collect();
        SweepSummary {
            case: case.name().into(),
            m: cal.m,
            delta: cal.delta,
            per_sigma,
        }
    }

    /// Near frequency per sigma.
    pub fn near_frequency(&self) -> Vec<f64> {
        self.per_sigma
            .iter()
            .map(|s| s.near as f64 / (s.near + s.far).max(1) as f64)
            .collect()
    }
}

/// Calibrate, then run every `(sigma, repeat)` trial. Output order is by
/// sigma, then repeat, whatever the execution order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<(Vec<TrialRecord>, SweepSummary), HarnessError> {
    cfg.validate()?;
    let exp = Experiment::new(cfg.case, cfg.profile)?;
    let cal = calibrate_delta(&exp, cfg)?;
    run_sweep_with(&exp, cfg, cal)
}

/// Sweep with a given calibration.
pub fn run_sweep_with(
    exp: &Experiment,
    cfg: &ExperimentConfig,
    cal: Calibration,
) -> Result<(Vec<TrialRecord>, SweepSummary), HarnessError> {
    cfg.validate()?;
    let fixed = if cfg.fixed_scene {
        let mut rng = trial_rng(cfg.seed, stream(1, 1 << 22, 0, 0));
        Some(exp.generate_critical_points(cfg.n_points, &mut rng)?)
    } else {
        None
    };
    let total = cfg.sigma_grid.len() * cfg.repeats;
    let results = map_trials(total, |idx| {
        let (si, rep) = (idx / cfg.repeats, idx % cfg.repeats);
        let sigma = cfg.sigma_grid[si];
        let mut last = None;
        for attempt in 0..MAX_ATTEMPTS {
            let mut rng = trial_rng(cfg.seed, stream(0, si as u64, rep as u64, attempt));
            let outcome = (|| {
                let scene = match &fixed {
                    Some(s) => s.clone(),
                    None => exp.generate_critical_points(cfg.n_points, &mut rng)?,
                };
                let pert = perturb_scene(&scene, sigma, &mut rng);
                exp.reconstruction_distance(&pert, cfg.image_sigma, &mut rng)
            })();
            match outcome {
                Ok(distance) => {
                    return Ok(TrialRecord {
                        case: cfg.case.name().into(),
                        sigma,
                        repeat: rep,
                        distance,
                        m: cal.m,
                        delta: cal.delta,
                        is_near: distance < cal.delta,
                        attempts: attempt + 1,
                    })
                }
                Err(e) if e.retryable() => {
                    log::warn!("trial sigma={sigma} repeat={rep} attempt {attempt}: {e}");
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(HarnessError::TrialFailed {
            sigma,
            repeat: rep,
            attempts: MAX_ATTEMPTS,
            last: last.map(|e| e.to_string()).unwrap_or_default(),
        })
    });
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary = SweepSummary::from_records(cfg.case, &cal, &cfg.sigma_grid, &records);
    Ok((records, summary))
}

/// CSV with header `case,sigma,repeat,distance,m,delta,is_near,attempts`.
pub fn write_records_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(case: CaseTag) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(case, 7);
        cfg.sigma_grid = vec![0.01, 0.5];
        cfg.repeats = 2;
        cfg.calibration_trials = 5;
        cfg
    }

    #[test]
    fn generated_points_are_critical() {
        for case in CaseTag::ALL {
            let exp = Experiment::new(case, Profile::P221).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let pts = exp.generate_critical_points(50, &mut rng).unwrap();
            for p in &pts {
                assert_eq!(p[4], 1.0);
                assert!(exp.residual(p) < SURFACE_TOL, "{case}: {p:?}");
            }
        }
    }

    #[test]
    fn scroll_points_drop_rank_of_the_critical_matrix() {
        let exp = Experiment::new(CaseTag::ScrollI, Profile::P221).unwrap();
        let n = reduce_to_n(&fixtures(CaseTag::ScrollI)).unwrap().n;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in exp.generate_critical_points(20, &mut rng).unwrap() {
            let sp = crate::loci::SamplePoint::Float(p.to_vec());
            assert!(sp.rank_of(&n) <= 2);
        }
    }

    #[test]
    fn perturbation_moves_points_off_the_surface() {
        let exp = Experiment::new(CaseTag::ScrollI, Profile::P221).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = exp.generate_critical_points(20, &mut rng).unwrap();
        assert_eq!(perturb_scene(&pts, 0.0, &mut rng), pts);
        let moved = perturb_scene(&pts, 0.5, &mut rng);
        assert!(moved.iter().all(|p| p[4] == 1.0));
        assert!(moved.iter().all(|p| exp.residual(p) > 1e-6));
    }

    #[test]
    fn perturbation_means_are_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = vec![[0.0, 0.0, 0.0, 0.0, 1.0]; 10_000];
        let sigma = 0.3;
        let moved = perturb_scene(&pts, sigma, &mut rng);
        for i in 0..4 {
            let mean = moved.iter().map(|p| p[i]).sum::<f64>() / 1e4;
            assert!(mean.abs() < 4.0 * sigma / 100.0);
        }
        let imgs = vec![[2.0, 4.0, 2.0]; 10_000];
        let moved = perturb_images(&imgs, sigma, &mut rng).unwrap();
        let mean = moved.iter().map(|p| p[0] - 1.0).sum::<f64>() / 1e4;
        assert!(mean.abs() < 4.0 * sigma / 100.0);
        assert_eq!(
            perturb_images(&imgs[..1], 0.0, &mut rng).unwrap(),
            vec![[1.0, 2.0, 1.0]]
        );
        assert!(matches!(
            perturb_images(&[[1.0, 0.0, 0.0]], 0.1, &mut rng),
            Err(HarnessError::ImageAtInfinity)
        ));
    }

    #[test]
    fn sweep_is_deterministic_and_consistent() {
        let cfg = small_cfg(CaseTag::QuadricV);
        let (a, sa) = run_sweep(&cfg).unwrap();
        let (b, _) = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        for s in &sa.per_sigma {
            assert_eq!(s.near + s.far, cfg.repeats);
        }
        for r in &a {
            assert_eq!(r.is_near, r.distance < r.delta);
        }
        let mut buf1 = Vec::new();
        let mut buf2 = Vec::new();
        write_records_csv(&a, &mut buf1).unwrap();
        write_records_csv(&b, &mut buf2).unwrap();
        assert_eq!(buf1, buf2);
        let text = String::from_utf8(buf1).unwrap();
        assert!(text.starts_with("case,sigma,repeat,distance,m,delta,is_near,attempts\n"));
    }

    #[test]
    fn grid_defaults() {
        let g = sigma_grid(1e-4, 1.0, 1e-2);
        assert_eq!(g.len(), 100);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let mut cfg = ExperimentConfig::new(CaseTag::ScrollI, 0);
        assert!(cfg.validate().is_ok());
        cfg.sigma_grid = vec![0.5, 0.1];
        assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
    }

    #[test]
    fn unsupported_cases_are_explained() {
        for s in ["ii", "case_iii", "vi"] {
            let e = s.parse::<CaseTag>().unwrap_err();
            assert!(matches!(e, CriticalError::UnsupportedCase(..)), "{s}");
        }
    }

    proptest::proptest! {
        #[test]
        fn perturbation_keeps_the_chart(sigma in 0.0f64..2.0, seed in 0u64..1000, n in 1usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<[f64; NVARS]> = (0..n).map(|_| random_scene_point(&mut rng)).collect();
            let moved = perturb_scene(&pts, sigma, &mut rng);
            proptest::prop_assert_eq!(moved.len(), n);
            proptest::prop_assert!(moved.iter().all(|p| p[4] == 1.0 && p.iter().all(|v| v.is_finite())));
        }

        #[test]
        fn grids_are_increasing(start in 1e-4f64..0.5, step in 1e-3f64..0.2, span in 0.0f64..2.0) {
            let g = sigma_grid(start, start + span, step);
            proptest::prop_assert!(!g.is_empty());
            proptest::prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
            proptest::prop_assert!(*g.last().unwrap() <= start + span + 1e-9);
        }
    }
}
