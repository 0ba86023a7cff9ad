use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use critloc::critical::{
    camera_from_json, column_center_check, fixtures, reduce_to_n, CameraPairConfig, CaseTag,
    CriticalError,
};
use critloc::exactpoly::format_rational;
use critloc::harness::{
    calibrate_delta, published_calibration, run_sweep_with, sigma_grid, write_records_csv,
    Calibration, DeltaPolicy, Experiment, ExperimentConfig, HarnessError,
};
use critloc::linalg::QMat;
use critloc::linclass::{classify_3x2, classify_4x3, LinFormMatrix};
use critloc::loci::{decompose, incidence_checks, sample_component, verify_rank_drop, LociError};
use critloc::multiview::{tensor_to_strings, trifocal_from_cameras, Profile};
use critloc::recon::{assemble_mt, estimate_tensor_with, read_triples_csv, RANK_THRESHOLD};

#[derive(Parser)]
#[command(
    name = "critloc",
    version,
    about = "Critical loci of three projections P4 -> P2"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a 3x2 or 4x3 matrix of linear forms.
    Classify {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Degeneracy-locus decomposition and its verification.
    Loci {
        #[command(subcommand)]
        cmd: LociCmd,
    },
    /// Trifocal Grassmann tensors.
    Tensor {
        #[command(subcommand)]
        cmd: TensorCmd,
    },
    /// Critical matrices of camera pairs.
    Critical {
        #[command(subcommand)]
        cmd: CriticalCmd,
    },
    /// Instability experiments.
    Experiment {
        #[command(subcommand)]
        cmd: ExperimentCmd,
    },
}

#[derive(Subcommand)]
enum LociCmd {
    /// Sample every component and check rank drops and incidences.
    Verify {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        off_locus: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum TensorCmd {
    /// Exact tensor of three rational cameras.
    Build {
        /// JSON array of three 3x5 cameras.
        #[arg(long)]
        cameras: PathBuf,
        #[arg(long, default_value = "221")]
        profile: Profile,
    },
    /// Least-squares tensor from correspondence triples.
    Estimate {
        /// CSV with columns x0..x2, y0..y2, p0..p2.
        #[arg(long)]
        triples: PathBuf,
        #[arg(long, default_value = "221")]
        profile: Profile,
        #[arg(long, default_value_t = RANK_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Subcommand)]
enum CriticalCmd {
    /// Reduce the critical matrix of a camera pair to a 4x3 matrix N.
    Reduce {
        /// JSON file or `builtin:scroll_i|cone_iv|quadric_v`.
        #[arg(long)]
        fixture: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Clone)]
struct CaseArgs {
    /// scroll_i, cone_iv or quadric_v.
    #[arg(long)]
    case: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    image_sigma: f64,
    #[arg(long, default_value = "221")]
    profile: Profile,
    #[arg(long, conflicts_with_all = ["delta_fixed", "delta_published"])]
    delta_multiple: Option<f64>,
    #[arg(long, conflicts_with = "delta_published")]
    delta_fixed: Option<f64>,
    /// Use the published delta of the case.
    #[arg(long)]
    delta_published: bool,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Calibrate delta, then sweep sigma.
    Run {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value_t = 1e-4)]
        sigma_min: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma_max: f64,
        #[arg(long, default_value_t = 1e-2)]
        sigma_step: f64,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 1000)]
        calibration_trials: usize,
        /// Reuse one draw of critical points in every trial.
        #[arg(long)]
        fixed_scene: bool,
        #[arg(long)]
        out: PathBuf,
        /// Per-sigma summary JSON; defaults to the CSV path with a
        /// `.summary.json` suffix.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Mean distance on random scenes and the resulting delta.
    Calibrate {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Fixture(String),
    /// A verification that ran but did not pass.
    Failed(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) | CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Fixture(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Fixture(m) => write!(f, "fixture error: {m}"),
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) => CliError::Config(e.to_string()),
            HarnessError::Fixture(_) | HarnessError::Classify(_) | HarnessError::Loci(_) => {
                CliError::Fixture(e.to_string())
            }
            HarnessError::Io(_) | HarnessError::Csv(_) => CliError::Io(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Fixture(format!("{}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<LinFormMatrix> {
    serde_json::from_value(read_json(path)?)
        .map_err(|e| CliError::Fixture(format!("{}: {e}", path.display())))
}

fn fmt_qmat(m: &QMat) -> Vec<Vec<String>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(format_rational).collect())
        .collect()
}

fn print_qmat(out: &mut impl Write, name: &str, m: &QMat) -> io::Result<()> {
    writeln!(out, "{name}:")?;
    for row in fmt_qmat(m) {
        writeln!(out, "  [ {} ]", row.join(" "))?;
    }
    Ok(())
}

fn classify(fixture: &Path, as_json: bool) -> Result<()> {
    let n = read_matrix(fixture)?;
    let mut out = io::stdout().lock();
    match (n.nrows(), n.ncols()) {
        (4, 3) => {
            let c = classify_4x3(&n).map_err(|e| CliError::Fixture(e.to_string()))?;
            if as_json {
                writeln!(out, "{:#}", c.to_json())?;
                return Ok(());
            }
            writeln!(out, "family: {}", c.family)?;
            if c.specialized {
                writeln!(out, "specialized: {}", c.note.as_deref().unwrap_or(""))?;
            }
            writeln!(out, "common factor: {}", c.common_factor)?;
            print_qmat(&mut out, "R", &c.r)?;
            print_qmat(&mut out, "C", &c.c)?;
            write!(out, "R N C =\n{}", c.canonical)?;
            writeln!(out, "certificate valid: {}", c.verify(&n))?;
        }
        (3, 2) => {
            let c = classify_3x2(&n).map_err(|e| CliError::Fixture(e.to_string()))?;
            if as_json {
                let v = json!({
                    "template": format!("{:?}", c.template),
                    "common_factor": c.common_factor.to_string(),
                    "R": fmt_qmat(&c.r),
                    "C": fmt_qmat(&c.c),
                    "canonical": c.canonical,
                    "certificate_valid": c.verify(&n),
                });
                writeln!(out, "{v:#}")?;
                return Ok(());
            }
            writeln!(out, "template: {:?}", c.template)?;
            writeln!(out, "common factor: {}", c.common_factor)?;
            print_qmat(&mut out, "R", &c.r)?;
            print_qmat(&mut out, "C", &c.c)?;
            write!(out, "R N C =\n{}", c.canonical)?;
            writeln!(out, "certificate valid: {}", c.verify(&n))?;
        }
        (r, c) => {
            return Err(CliError::Fixture(format!(
                "expected a 4x3 or 3x2 matrix, got {r}x{c}"
            )))
        }
    }
    Ok(())
}

fn loci_verify(fixture: &Path, samples: usize, off: usize, seed: u64, as_json: bool) -> Result<()> {
    let n = read_matrix(fixture)?;
    if (n.nrows(), n.ncols()) != (4, 3) {
        return Err(CliError::Fixture("loci verify expects a 4x3 matrix".into()));
    }
    let class = classify_4x3(&n).map_err(|e| CliError::Fixture(e.to_string()))?;
    let dec = decompose(&class).map_err(|e| CliError::Fixture(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut ok = true;
    for comp in &dec.components {
        let (rank_ok, detail) = match sample_component(comp, samples, &mut rng) {
            Ok(pts) => {
                let on_component = pts.iter().all(|p| comp.contains(p));
                let report = verify_rank_drop(&n, &pts, off, &mut rng);
                let passed = on_component && report.passed();
                (
                    passed,
                    json!({
                        "samples": pts.len(),
                        "on_component": on_component,
                        "rank_dropped": report.on_locus_dropped(),
                        "off_locus_full_rank": report.off_locus_full(),
                    }),
                )
            }
            Err(e @ LociError::SamplingFailed { .. }) => (false, json!({ "error": e.to_string() })),
            Err(e) => return Err(CliError::Fixture(e.to_string())),
        };
        ok &= rank_ok;
        rows.push((comp, rank_ok, detail));
    }
    let inc = incidence_checks(&dec);
    ok &= inc.passed();
    let mut out = io::stdout().lock();
    if as_json {
        let v = json!({
            "family": class.family.name(),
            "components": rows.iter().map(|(c, passed, d)| {
                let mut v = c.to_json();
                v["passed"] = json!(passed);
                v["check"] = d.clone();
                v
            }).collect::<Vec<_>>(),
            "incidences": inc,
            "passed": ok,
        });
        writeln!(out, "{v:#}")?;
    } else {
        writeln!(out, "family: {}", class.family)?;
        writeln!(
            out,
            "{:<10} {:<22} {:>3} {:>6}  {:<6} generators",
            "name", "kind", "dim", "degree", "check"
        )?;
        for (c, passed, _) in &rows {
            let gens: Vec<String> = c.generators.iter().map(ToString::to_string).collect();
            writeln!(
                out,
                "{:<10} {:<22} {:>3} {:>6}  {:<6} {}",
                c.name,
                c.kind.to_string(),
                c.dim(),
                c.degree(),
                if *passed { "PASS" } else { "FAIL" },
                gens.join(", ")
            )?;
        }
        for chk in &inc.checks {
            writeln!(
                out,
                "{} {}: {}",
                if chk.passed { "PASS" } else { "FAIL" },
                chk.description,
                chk.detail
            )?;
        }
        writeln!(out, "overall: {}", if ok { "PASS" } else { "FAIL" })?;
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::Failed("locus verification".into()))
    }
}

fn tensor_build(cameras: &Path, profile: Profile) -> Result<()> {
    let v = read_json(cameras)?;
    let arr = v
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| CliError::Fixture("expected a JSON array of three cameras".into()))?;
    let cams = arr
        .iter()
        .map(camera_from_json)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::Fixture(e.to_string()))?;
    let t = trifocal_from_cameras(&cams[0], &cams[1], &cams[2], profile);
    let v = json!({
        "profile": profile.to_string(),
        "index": "flat[9i + 3j + k] = T[i][j][k], i, j, k in 0..3 for views 1, 2, 3",
        "tensor": tensor_to_strings(&t),
    });
    writeln!(io::stdout().lock(), "{v:#}")?;
    Ok(())
}

fn tensor_estimate(triples: &Path, profile: Profile, threshold: f64) -> Result<()> {
    if !(threshold > 0.0) {
        return Err(CliError::Config("threshold must be positive".into()));
    }
    let f =
        File::open(triples).map_err(|e| CliError::Config(format!("{}: {e}", triples.display())))?;
    let t = read_triples_csv(f).map_err(|e| CliError::Fixture(e.to_string()))?;
    let est = estimate_tensor_with(&assemble_mt(&t), profile, threshold);
    let v = json!({
        "profile": profile.to_string(),
        "triples": t.len(),
        "numerical_rank": est.numerical_rank,
        "unique": est.unique,
        "singular_values": est.singular_values,
        "tensor": est.tensor.flat(),
    });
    writeln!(io::stdout().lock(), "{v:#}")?;
    Ok(())
}

fn load_pair(spec: &str) -> Result<CameraPairConfig> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        let case: CaseTag = name
            .parse()
            .map_err(|e: CriticalError| CliError::Config(e.to_string()))?;
        return Ok(fixtures(case));
    }
    CameraPairConfig::from_json(&read_json(Path::new(spec))?)
        .map_err(|e| CliError::Fixture(e.to_string()))
}

fn critical_reduce(spec: &str, as_json: bool) -> Result<()> {
    let cfg = load_pair(spec)?;
    let fx = |e: &dyn std::fmt::Display| CliError::Fixture(e.to_string());
    let red = reduce_to_n(&cfg).map_err(|e| fx(&e))?;
    let centers = column_center_check(&red, &cfg);
    let class = classify_4x3(&red.n).map_err(|e| fx(&e))?;
    let dec = decompose(&class);
    let mut out = io::stdout().lock();
    if as_json {
        let v = json!({
            "N": red.n,
            "a_rows": red.a_rows,
            "d_rows": red.d_rows,
            "column_center_check": match &centers {
                Ok(r) => json!(r),
                Err(e) => json!({ "error": e.to_string() }),
            },
            "classification": class.to_json(),
            "locus": match &dec {
                Ok(d) => d.to_json(),
                Err(e) => json!({ "error": e.to_string() }),
            },
        });
        writeln!(out, "{v:#}")?;
    } else {
        write!(out, "N =\n{}", red.n)?;
        writeln!(out, "rows kept: {:?}", red.a_rows)?;
        match &centers {
            Ok(r) => writeln!(
                out,
                "column/center check: PASS (spans {:?})",
                r.column_spans
            )?,
            Err(e) => writeln!(out, "column/center check: FAIL ({e})")?,
        }
        writeln!(out, "family: {}", class.family)?;
        writeln!(out, "common factor: {}", class.common_factor)?;
        match &dec {
            Ok(d) => {
                for c in &d.components {
                    let gens: Vec<String> = c.generators.iter().map(ToString::to_string).collect();
                    writeln!(out, "  {} ({}): {}", c.name, c.kind, gens.join(", "))?;
                }
            }
            Err(e) => writeln!(out, "  no decomposition: {e}")?,
        }
    }
    Ok(())
}

fn experiment_config(a: &CaseArgs) -> Result<ExperimentConfig> {
    let case: CaseTag = a
        .case
        .parse()
        .map_err(|e: CriticalError| CliError::Config(e.to_string()))?;
    let mut cfg = ExperimentConfig::new(case, a.seed);
    if let Some(n) = a.points {
        cfg.n_points = n;
    }
    cfg.image_sigma = a.image_sigma;
    cfg.profile = a.profile;
    cfg.delta_policy = match (a.delta_multiple, a.delta_fixed, a.delta_published) {
        (Some(c), _, _) => DeltaPolicy::Multiple(c),
        (_, Some(d), _) => DeltaPolicy::Fixed(d),
        (_, _, true) => DeltaPolicy::Fixed(published_calibration(case).1),
        _ => DeltaPolicy::Multiple(2.0),
    };
    Ok(cfg)
}

fn calibrate(exp: &Experiment, cfg: &ExperimentConfig) -> Result<Calibration> {
    Ok(calibrate_delta(exp, cfg)?)
}

#[allow(clippy::too_many_arguments)]
fn experiment_run(
    a: &CaseArgs,
    sigma: (f64, f64, f64),
    repeats: usize,
    calibration_trials: usize,
    fixed_scene: bool,
    out: &Path,
    summary: Option<&Path>,
) -> Result<()> {
    let mut cfg = experiment_config(a)?;
    let (lo, hi, step) = sigma;
    if !(step > 0.0) || !(hi >= lo) {
        return Err(CliError::Config(
            "need sigma-step > 0 and sigma-max >= sigma-min".into(),
        ));
    }
    cfg.sigma_grid = sigma_grid(lo, hi, step);
    cfg.repeats = repeats;
    cfg.calibration_trials = calibration_trials;
    cfg.fixed_scene = fixed_scene;
    cfg.validate()?;
    let exp = Experiment::new(cfg.case, cfg.profile)?;
    let cal = calibrate(&exp, &cfg)?;
    let (records, summ) = run_sweep_with(&exp, &cfg, cal)?;
    write_records_csv(&records, BufWriter::new(File::create(out)?))?;
    let summary_path = summary.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut p = out.as_os_str().to_owned();
        p.push(".summary.json");
        PathBuf::from(p)
    });
    let v = json!({ "config": cfg, "summary": summ });
    std::fs::write(&summary_path, format!("{v:#}\n"))?;
    let freq = summ.near_frequency();
    let overall = freq.iter().sum::<f64>() / freq.len() as f64;
    println!(
        "{}: m = {:.5}, delta = {:.5}, {} trials, overall near frequency {:.3}",
        cfg.case,
        cal.m,
        cal.delta,
        records.len(),
        overall
    );
    println!("records: {}", out.display());
    println!("summary: {}", summary_path.display());
    Ok(())
}

fn experiment_calibrate(a: &CaseArgs, trials: usize) -> Result<()> {
    let mut cfg = experiment_config(a)?;
    cfg.calibration_trials = trials;
    cfg.validate()?;
    let exp = Experiment::new(cfg.case, cfg.profile)?;
    let cal = calibrate(&exp, &cfg)?;
    let (pm, pd) = published_calibration(cfg.case);
    let v = json!({
        "case": cfg.case.name(),
        "m": cal.m,
        "delta": cal.delta,
        "trials": cal.trials,
        "published": { "m": pm, "delta": pd },
    });
    println!("{v:#}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Classify { fixture, json } => classify(&fixture, json),
        Command::Loci {
            cmd:
                LociCmd::Verify {
                    fixture,
                    samples,
                    off_locus,
                    seed,
                    json,
                },
        } => loci_verify(&fixture, samples, off_locus, seed, json),
        Command::Tensor { cmd } => match cmd {
            TensorCmd::Build { cameras, profile } => tensor_build(&cameras, profile),
            TensorCmd::Estimate {
                triples,
                profile,
                threshold,
            } => tensor_estimate(&triples, profile, threshold),
        },
        Command::Critical {
            cmd: CriticalCmd::Reduce { fixture, json },
        } => critical_reduce(&fixture, json),
        Command::Experiment { cmd } => match cmd {
            ExperimentCmd::Run {
                case,
                sigma_min,
                sigma_max,
                sigma_step,
                repeats,
                calibration_trials,
                fixed_scene,
                out,
                summary,
            } => experiment_run(
                &case,
                (sigma_min, sigma_max, sigma_step),
                repeats,
                calibration_trials,
                fixed_scene,
                &out,
                summary.as_deref(),
            ),
            ExperimentCmd::Calibrate { case, trials } => experiment_calibrate(&case, trials),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
