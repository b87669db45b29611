//! Command-line pipeline for `sconvex`: instance loading, singular point
//! sampling, covering construction and coverage verification.
//!
//! Exit codes: 0 success, 1 input error, 2 verification failure, 3 internal
//! assertion. Coordinate indices given with `--j` are one-based; point
//! indices in outputs are zero-based positions in `G`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod instance;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sconvex::{
    candidate_singular_points, cover_sigma0, cover_sigma0_lines, cover_sigma1, random_monotone,
    random_monotone_with_chain, reverify, verify_coverage, ClusterOptions, Cover, CoverReport,
    Order, PairClass, PointFilter, ScalarProduct, SingularPoint,
};

pub use instance::{Instance, Tolerances};

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "SCONVEX_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "sconvex-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<sconvex::Error> for CliError {
    fn from(e: sconvex::Error) -> Self {
        match e {
            sconvex::Error::Internal(_) => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sconvex", version, about = "Singular sets of projections onto S-monotone sets and their c-c coverings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load an instance and confirm it is S-monotone.
    Check(Common),
    /// Project a point onto G in the sense of the scalar square.
    Project {
        #[command(flatten)]
        common: Common,
        /// Point to project, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
    },
    /// Print the inertia decomposition S = V^T diag(signs) V.
    Inertia(Common),
    /// Sample singular points of the projection and write points.csv.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        selection: Selection,
    },
    /// Build covering surfaces and write surfaces.csv.
    Cover {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        selection: Selection,
        #[command(flatten)]
        covering: Covering,
    },
    /// Sample, cover and check coverage; writes points.csv, surfaces.csv and report.json.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        selection: Selection,
        #[command(flatten)]
        covering: Covering,
    },
    /// Generate a random monotone instance in canonical form.
    Gen(Gen),
}

#[derive(Debug, Args)]
struct Common {
    /// Instance file (JSON).
    instance: PathBuf,
    /// Activity / projection tie tolerance [default: from instance, else 1e-9].
    #[arg(long)]
    tol_activity: Option<f64>,
    /// Isotropy tolerance [default: from instance, else 1e-9].
    #[arg(long)]
    tol_isotropy: Option<f64>,
    /// Coverage residual tolerance [default: from instance, else 1e-8].
    #[arg(long)]
    tol_coverage: Option<f64>,
    /// Output directory [default: $SCONVEX_OUT_DIR, else ./sconvex-out].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Sampling {
    /// Samples per pair of points on each tie hyperplane.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Sampling radius around each pair midpoint.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct Selection {
    /// Coordinate index, one-based [default: all coordinates].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    j: Option<u64>,
    #[arg(long, value_enum, default_value_t = OrderArg::All)]
    order: OrderArg,
}

#[derive(Debug, Args)]
struct Covering {
    /// Bound on the diameter of rescaled normal sets when clustering.
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Bound on the scalar square of zero-order normals.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Group points of G within this distance into one compact [default: no clustering].
    #[arg(long)]
    cluster_radius: Option<f64>,
}

#[derive(Debug, Args)]
struct Gen {
    #[arg(long)]
    dim: usize,
    /// Number of positive eigenvalues of the canonical form.
    #[arg(long)]
    index: usize,
    /// Number of points.
    #[arg(long)]
    n: usize,
    /// Number of points placed on one isotropic line.
    #[arg(long, default_value_t = 0)]
    chain: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination file [default: stdout].
    #[arg(long)]
    out_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
    All,
}

impl OrderArg {
    fn zero(self) -> bool {
        self != OrderArg::One
    }

    fn one(self) -> bool {
        self != OrderArg::Zero
    }
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Check(common) => {
            let inst = load(&common)?;
            println!("{}", check_summary(&inst));
            Ok(())
        }
        Command::Project { common, x } => {
            let inst = load(&common)?;
            let p = inst.set.project(&x, inst.tolerances.activity)?;
            let doc = serde_json::json!({ "minimizers": p.minimizers, "value": p.value });
            println!("{doc}");
            Ok(())
        }
        Command::Inertia(common) => {
            let inst = load(&common)?;
            let dec = inst.space.inertia()?;
            let v: Vec<Vec<f64>> = dec.v.row_iter().map(|r| r.iter().copied().collect()).collect();
            let doc = serde_json::json!({ "index": inst.space.index(), "signs": dec.signs, "V": v });
            println!("{doc}");
            Ok(())
        }
        Command::Classify { common, sampling, selection } => {
            let inst = load(&common)?;
            let js = coordinates(&inst, &selection)?;
            let points = sample_points(&inst, &sampling)?;
            let kept: Vec<SingularPoint> = points
                .into_iter()
                .filter(|p| {
                    let order_ok = match p.order {
                        Order::Zero => selection.order.zero(),
                        Order::One => selection.order.one(),
                    };
                    order_ok && js.iter().any(|j| p.j_indices.contains(j))
                })
                .collect();
            let dir = out_dir(&common)?;
            write(&dir.join("points.csv"), &output::points_csv(inst.space.dim(), &kept))?;
            println!("{} singular points written to {}", kept.len(), dir.join("points.csv").display());
            Ok(())
        }
        Command::Cover { common, selection, covering } => {
            let inst = load(&common)?;
            let js = coordinates(&inst, &selection)?;
            let families = build_families(&inst, &js, selection.order, &covering)?;
            let dir = out_dir(&common)?;
            write(&dir.join("surfaces.csv"), &output::surfaces_csv(&families))?;
            let count: usize = families.iter().map(|f| f.covers.len()).sum();
            println!("{count} covers written to {}", dir.join("surfaces.csv").display());
            Ok(())
        }
        Command::Verify { common, sampling, selection, covering } => {
            let inst = load(&common)?;
            let js = coordinates(&inst, &selection)?;
            let points = sample_points(&inst, &sampling)?;
            for p in &points {
                if !reverify(&inst.set, p, inst.tolerances.activity)? {
                    return Err(CliError::Internal(format!(
                        "sampled point {:?} failed re-verification",
                        p.location
                    )));
                }
            }
            let families = build_families(&inst, &js, selection.order, &covering)?;
            let reports: Vec<CoverReport> = families
                .iter()
                .map(|f| verify_coverage(&f.covers, &points, f.filter, inst.tolerances.coverage))
                .collect();
            let dir = out_dir(&common)?;
            write(&dir.join("points.csv"), &output::points_csv(inst.space.dim(), &points))?;
            write(&dir.join("surfaces.csv"), &output::surfaces_csv(&families))?;
            let passed = reports.iter().all(CoverReport::all_covered);
            let report = output::report_json(&families, &reports, points.len(), &sampling_meta(&sampling), passed);
            write(&dir.join("report.json"), &report)?;
            for (f, r) in families.iter().zip(&reports) {
                println!(
                    "{} j={}: {}/{} covered, max residual {:e}, {} normal failures",
                    f.name,
                    f.j + 1,
                    r.covered,
                    r.total_points,
                    r.max_residual,
                    r.normal_failures
                );
            }
            if passed {
                Ok(())
            } else {
                Err(CliError::Verification("some singular points are not covered".into()))
            }
        }
        Command::Gen(gen) => {
            let space = canonical_space(gen.dim, gen.index)?;
            let set = if gen.chain > 0 {
                random_monotone_with_chain(&space, gen.n, gen.chain, gen.seed)?
            } else {
                random_monotone(&space, gen.n, gen.seed)?
            };
            let inst = Instance::new(space, set.points().to_vec(), Tolerances::default())?;
            match gen.out_file {
                Some(path) => inst.save(&path)?,
                None => print!("{}", inst.to_canonical_string()),
            }
            Ok(())
        }
    }
}

fn canonical_space(dim: usize, index: usize) -> Result<ScalarProduct, CliError> {
    if dim == 0 || index > dim {
        return Err(CliError::Input(format!("need 1 <= dim and index <= dim, got dim {dim}, index {index}")));
    }
    Ok(ScalarProduct::canonical(dim, index))
}

fn load(common: &Common) -> Result<Instance, CliError> {
    let inst = Instance::load(&common.instance)?;
    let mut tol = inst.tolerances;
    if let Some(v) = common.tol_activity {
        tol.activity = v;
    }
    if let Some(v) = common.tol_isotropy {
        tol.isotropy = v;
    }
    if let Some(v) = common.tol_coverage {
        tol.coverage = v;
    }
    if tol == inst.tolerances {
        return Ok(inst);
    }
    Instance::new(inst.space, inst.set.points().to_vec(), tol)
}

fn check_summary(inst: &Instance) -> String {
    let g = &inst.set;
    let (mut pos, mut iso) = (0, 0);
    for i in 0..g.len() {
        for k in i + 1..g.len() {
            match inst.space.pair_class(g.point(i), g.point(k), inst.tolerances.isotropy) {
                Ok(PairClass::Positive) => pos += 1,
                Ok(PairClass::Isotropic) => iso += 1,
                _ => {}
            }
        }
    }
    format!(
        "monotone: {} points in dimension {}, index {}; {pos} positive pairs, {iso} isotropic pairs",
        g.len(),
        g.dim(),
        inst.space.index()
    )
}

fn coordinates(inst: &Instance, sel: &Selection) -> Result<Vec<usize>, CliError> {
    let d = inst.space.dim();
    match sel.j {
        Some(j) if j as usize > d => Err(CliError::Input(format!("--j {j} exceeds dimension {d}"))),
        Some(j) => Ok(vec![j as usize - 1]),
        None => Ok((0..d).collect()),
    }
}

fn sample_points(inst: &Instance, s: &Sampling) -> Result<Vec<SingularPoint>, CliError> {
    if !(s.radius >= 0.0 && s.radius.is_finite()) {
        return Err(CliError::Input("--radius must be a finite non-negative number".into()));
    }
    Ok(candidate_singular_points(
        &inst.set,
        s.samples as usize,
        s.radius,
        s.seed,
        inst.tolerances.activity,
    )?)
}

fn sampling_meta(s: &Sampling) -> serde_json::Value {
    serde_json::json!({ "samples": s.samples, "radius": s.radius, "seed": s.seed })
}

/// One covering family checked against one class of singular points.
pub(crate) struct Family {
    pub name: &'static str,
    pub j: usize,
    pub covers: Vec<Cover>,
    pub filter: PointFilter,
}

fn build_families(
    inst: &Instance,
    js: &[usize],
    order: OrderArg,
    c: &Covering,
) -> Result<Vec<Family>, CliError> {
    if !(c.epsilon > 0.0) || !(c.delta > 0.0) {
        return Err(CliError::Input("--epsilon and --delta must be positive".into()));
    }
    if let Some(r) = c.cluster_radius {
        if !(r >= 0.0) {
            return Err(CliError::Input("--cluster-radius must be non-negative".into()));
        }
    }
    let opts = ClusterOptions { epsilon: c.epsilon, radius: c.cluster_radius };
    let iso = inst.tolerances.isotropy;
    let g = &inst.set;
    let surfaces = |v: Vec<sconvex::CcSurface>| v.into_iter().map(Cover::Surface).collect();
    let mut out = Vec::new();
    for &j in js {
        if order.one() {
            out.push(Family {
                name: "sigma1",
                j,
                covers: surfaces(cover_sigma1(g, j, &opts, iso)?),
                filter: PointFilter::Sigma1(j),
            });
        }
        if order.zero() {
            out.push(Family {
                name: "sigma0",
                j,
                covers: surfaces(cover_sigma0(g, j, c.delta, &opts, iso)?),
                filter: PointFilter::Sigma0Bar(j),
            });
            if inst.space.index() == 1 {
                out.push(Family {
                    name: "sigma0-lines",
                    j,
                    covers: cover_sigma0_lines(g, j, iso)?.into_iter().map(Cover::Hyperplane).collect(),
                    filter: PointFilter::Sigma0Bar(j),
                });
            }
        }
    }
    Ok(out)
}

fn out_dir(common: &Common) -> Result<PathBuf, CliError> {
    let dir = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}
