//! Command-line front end. Every step reads and writes plain files so a
//! pipeline can be rerun piecewise.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 infeasible,
//! 4 time limit reached with the gap above tolerance.

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::approx::{
    assign_nearest, coverage_radius, farthest_point_clustering, optimum_lower_bound,
    PlaneDeployment,
};
use crate::driver::{solve_problem1, solve_problem2, solve_problem3, DriverError, Problem};
use crate::export::{color_by_assignment, write_ply};
use crate::geom::Point3;
use crate::ilp::{SolveLimits, SolveResult, SolveStatus};
use crate::mesh::{
    generate_candidates, load_obj, sample_surface, CandidateRegion, CandidateSet, SampleSet,
};
use crate::model::{build_instance, CoverageInstance, Placement, QualityKind};
use crate::refine::{improve_quality_max, refine_grid, RefineContext, RefineObjective};
use crate::scene::{gen_room, gen_terrain, reference_room};
use crate::visibility::{visibility_matrix, Bvh, EndpointShrink, VisibilityMatrix};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "sensorcover", version, about = "Sensor placement for surface coverage")]
pub struct Cli {
    /// Omit timestamps and timings so repeated runs give identical files.
    #[arg(long, global = true)]
    pub deterministic: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene mesh.
    GenScene(GenSceneArgs),
    /// Sample the surface of a mesh.
    Sample(SampleArgs),
    /// Lay out candidate sensor positions on a horizontal plane.
    Candidates(CandidatesArgs),
    /// Compute (or reuse) the sample × candidate visibility matrix.
    Visibility(VisibilityArgs),
    /// Solve one of the three placement problems exactly.
    Solve(SolveArgs),
    /// Farthest-point clustering for the radius problem without occlusion.
    Approx(ApproxArgs),
    /// Locally improve a placement.
    Refine(RefineArgs),
    /// Solve a problem for a range of sensor budgets.
    Sweep(SweepArgs),
    /// Write the samples as a colored point cloud.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SceneKind {
    Terrain,
    Room,
}

#[derive(Debug, Args)]
pub struct GenSceneArgs {
    #[arg(long, value_enum)]
    pub kind: SceneKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Terrain size in meters.
    #[arg(long, num_args = 2, value_names = ["W", "D"])]
    pub extent: Option<Vec<f64>>,
    /// Terrain grid cells per side.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Terrain wave amplitude in meters.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub pitch: f64,
    /// Faces with normal z below −tau are skipped.
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CandidatesArgs {
    #[arg(long)]
    pub plane_z: f64,
    #[arg(long, num_args = 4, value_names = ["X0", "Y0", "X1", "Y1"], allow_negative_numbers = true)]
    pub rect: Vec<f64>,
    #[arg(long)]
    pub pitch: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VisibilityArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub candidates: PathBuf,
    /// Relative endpoint shrink.
    #[arg(long, default_value_t = 1e-6)]
    pub shrink: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub problem: u8,
    /// Exposure threshold (problem 3).
    #[arg(long)]
    pub phi: Option<f64>,
    /// Coverage ratio (problem 2).
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub vis: PathBuf,
    /// Seconds per solve.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Relative gap at which a solve may stop.
    #[arg(long, default_value_t = 0.0)]
    pub gap: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub plane_z: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RefineMethod {
    Grid,
    Onecenter,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    #[arg(long, value_enum)]
    pub method: RefineMethod,
    #[arg(long, default_value_t = 10)]
    pub rounds: usize,
    /// Lattice pitch for the grid method.
    #[arg(long)]
    pub fine_pitch: Option<f64>,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Inclusive budget range, e.g. `1..6`.
    #[arg(long, value_parser = parse_k_range)]
    pub k_range: (usize, usize),
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Coloring {
    PerSensor,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, value_enum, default_value_t = Coloring::PerSensor)]
    pub coloring: Coloring,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_k_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("bad end: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

/// `samples.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplesDoc {
    pub format_version: u32,
    pub mesh: PathBuf,
    pub mesh_hash: u64,
    pub pitch: f64,
    pub tau: f64,
    pub samples: SampleSet,
}

/// `cands.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidatesDoc {
    pub format_version: u32,
    pub region: CandidateRegion,
    pub pitch: f64,
    pub candidates: CandidateSet,
}

/// Sidecar next to a visibility file recording what it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct VisKey {
    mesh_hash: u64,
    sample_hash: u64,
    candidate_hash: u64,
    shrink: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Inputs {
    pub samples: PathBuf,
    pub candidates: Option<PathBuf>,
    pub visibility: Option<PathBuf>,
}

/// `result.json`, written by `solve`, `approx` and `refine`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDoc {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub command: String,
    #[serde(flatten)]
    pub problem: Problem,
    pub k: usize,
    pub inputs: Inputs,
    /// Candidate indices, when the sensors sit on candidates.
    pub placement: Option<Placement>,
    pub positions: Vec<Point3>,
    /// Covered count, or radius for problem 2.
    pub objective: f64,
    pub ratio: f64,
    /// Per sample, the index of the sensor covering it.
    pub assignment: Vec<Option<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<PlaneDeployment>,
    /// Proven lower bound on the optimal radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_lower_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_factor: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Infeasible(String),
    TimeLimit(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::TimeLimit(_) => 4,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::TimeLimit(m) => write!(f, "time limit: {m}"),
            CliError::Failure(m) => write!(f, "{m}"),
        }
    }
}

fn fail(e: impl Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<DriverError> for CliError {
    fn from(e: DriverError) -> Self {
        match e {
            DriverError::Unachievable { .. } => CliError::Infeasible(e.to_string()),
            DriverError::Inconclusive { .. } => CliError::TimeLimit(e.to_string()),
            DriverError::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => fail(e),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sensorcover: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let det = cli.deterministic;
    match &cli.command {
        Command::GenScene(a) => gen_scene(a),
        Command::Sample(a) => sample(a),
        Command::Candidates(a) => candidates(a),
        Command::Visibility(a) => visibility(a),
        Command::Solve(a) => solve_cmd(a, det),
        Command::Approx(a) => approx_cmd(a, det),
        Command::Refine(a) => refine_cmd(a, det),
        Command::Sweep(a) => sweep(a, det),
        Command::Export(a) => export(a),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| fail(format!("cannot parse {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(fail)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| fail(format!("cannot write {}: {e}", path.display())))
}

fn timestamp(det: bool) -> Option<u64> {
    (!det).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    })
}

fn gen_scene(a: &GenSceneArgs) -> CliResult<()> {
    let mesh = match a.kind {
        SceneKind::Terrain => {
            let extent = a.extent.clone().unwrap_or_else(|| vec![20.0, 20.0]);
            gen_terrain(
                a.seed,
                [extent[0], extent[1]],
                a.cells.unwrap_or(20),
                a.amplitude.unwrap_or(0.3),
            )
            .map_err(|e| usage(e.to_string()))?
        }
        SceneKind::Room => {
            for (set, flag) in [
                (a.extent.is_some(), "--extent"),
                (a.cells.is_some(), "--cells"),
                (a.amplitude.is_some(), "--amplitude"),
            ] {
                if set {
                    return Err(usage(format!("{flag} conflicts with --kind room")));
                }
            }
            let room = reference_room();
            gen_room(room.extent, &room.obstacles).map_err(fail)?
        }
    };
    mesh.write_obj(&a.out).map_err(fail)
}

fn sample(a: &SampleArgs) -> CliResult<()> {
    let mesh = load_obj(&a.mesh).map_err(fail)?;
    let samples = sample_surface(&mesh, a.pitch, a.tau).map_err(|e| usage(e.to_string()))?;
    write_json(
        &a.out,
        &SamplesDoc {
            format_version: FORMAT_VERSION,
            mesh: a.mesh.clone(),
            mesh_hash: mesh.content_hash(),
            pitch: a.pitch,
            tau: a.tau,
            samples,
        },
    )
}

fn candidates(a: &CandidatesArgs) -> CliResult<()> {
    let region = CandidateRegion::Plane {
        z: a.plane_z,
        x0: a.rect[0],
        y0: a.rect[1],
        x1: a.rect[2],
        y1: a.rect[3],
    };
    let candidates = generate_candidates(&region, a.pitch).map_err(|e| usage(e.to_string()))?;
    write_json(
        &a.out,
        &CandidatesDoc {
            format_version: FORMAT_VERSION,
            region,
            pitch: a.pitch,
            candidates,
        },
    )
}

fn key_path(vis: &Path) -> PathBuf {
    let mut s = vis.as_os_str().to_owned();
    s.push(".key.json");
    PathBuf::from(s)
}

fn visibility(a: &VisibilityArgs) -> CliResult<()> {
    let mesh = load_obj(&a.mesh).map_err(fail)?;
    let sdoc: SamplesDoc = read_json(&a.samples)?;
    let cdoc: CandidatesDoc = read_json(&a.candidates)?;
    let key = VisKey {
        mesh_hash: mesh.content_hash(),
        sample_hash: sdoc.samples.content_hash(),
        candidate_hash: cdoc.candidates.content_hash(),
        shrink: a.shrink,
    };
    if a.out.exists() {
        let cached: Option<VisKey> = read_json(&key_path(&a.out)).ok();
        let header_ok = VisibilityMatrix::read(&a.out)
            .map(|v| v.check_matches(&sdoc.samples, &cdoc.candidates).is_ok())
            .unwrap_or(false);
        if header_ok && cached.as_ref() == Some(&key) {
            eprintln!("visibility: inputs unchanged, keeping {}", a.out.display());
            return Ok(());
        }
    }
    let bvh = Bvh::build(&mesh);
    let vis = visibility_matrix(
        &bvh,
        &sdoc.samples,
        &cdoc.candidates,
        EndpointShrink::Relative(a.shrink),
    );
    vis.write(&a.out).map_err(fail)?;
    write_json(&key_path(&a.out), &key)
}

struct Loaded {
    samples: SampleSet,
    cdoc: CandidatesDoc,
    vis: VisibilityMatrix,
}

fn load_inputs(p: &ProblemArgs) -> CliResult<Loaded> {
    let sdoc: SamplesDoc = read_json(&p.samples)?;
    let cdoc: CandidatesDoc = read_json(&p.candidates)?;
    let vis = VisibilityMatrix::read(&p.vis).map_err(fail)?;
    vis.check_matches(&sdoc.samples, &cdoc.candidates)
        .map_err(fail)?;
    Ok(Loaded {
        samples: sdoc.samples,
        cdoc,
        vis,
    })
}

/// Check flag combinations and translate them into a [`Problem`].
fn problem_of(p: &ProblemArgs) -> CliResult<Problem> {
    let n = p.problem;
    if p.phi.is_some() && n != 3 {
        return Err(usage(format!("--phi conflicts with --problem {n}")));
    }
    if p.rho.is_some() && n != 2 {
        return Err(usage(format!("--rho conflicts with --problem {n}")));
    }
    Ok(match n {
        1 => Problem::Visibility,
        2 => Problem::Radius {
            rho: p.rho.unwrap_or(1.0),
            relaxed: false,
        },
        _ => Problem::Threshold {
            phi: p
                .phi
                .ok_or_else(|| usage("--problem 3 requires --phi"))?,
        },
    })
}

fn limits_of(p: &ProblemArgs) -> SolveLimits {
    SolveLimits {
        time_limit: p.time_limit.map(std::time::Duration::from_secs_f64),
        gap_tol: p.gap,
        node_limit: None,
    }
}

/// Outcome of one budget for `solve` and `sweep`.
struct Solved {
    placement: Placement,
    objective: f64,
    ratio: f64,
    assignment: Vec<Option<usize>>,
    result: SolveResult,
}

fn solve_one(
    problem: Problem,
    loaded: &Loaded,
    k: usize,
    limits: SolveLimits,
) -> CliResult<Solved> {
    let kind = match problem {
        Problem::Threshold { .. } => QualityKind::LambertInverseSquare,
        _ => QualityKind::Visibility,
    };
    let instance = build_instance(
        loaded.samples.clone(),
        loaded.cdoc.candidates.clone(),
        loaded.vis.clone(),
        kind,
    )
    .map_err(fail)?;
    let n = instance.n_samples() as f64;
    match problem {
        Problem::Visibility | Problem::Threshold { .. } => {
            let out = match problem {
                Problem::Threshold { phi } => solve_problem3(&instance, k, phi, limits)?,
                _ => solve_problem1(&instance, k, limits)?,
            };
            let mut assignment = vec![None; instance.n_samples()];
            for &i in &out.report.covered_ids {
                assignment[i] = out.report.assignment[i];
            }
            Ok(Solved {
                objective: out.report.covered_ids.len() as f64,
                ratio: out.report.ratio(),
                placement: out.placement,
                assignment,
                result: out.result,
            })
        }
        Problem::Radius { rho, .. } => {
            let out = solve_problem2(&instance, k, rho, limits)?;
            let assignment = radius_assignment(&instance, &out.placement, out.radius);
            let covered = assignment.iter().filter(|a| a.is_some()).count() as f64;
            Ok(Solved {
                objective: out.radius,
                ratio: covered / n,
                placement: out.placement,
                assignment,
                result: out.result,
            })
        }
    }
}

/// Nearest visible selected sensor within `radius`, lowest slot on ties.
fn radius_assignment(
    instance: &CoverageInstance,
    placement: &Placement,
    radius: f64,
) -> Vec<Option<usize>> {
    (0..instance.n_samples())
        .map(|i| {
            let mut best: Option<(f64, usize)> = None;
            for (slot, &j) in placement.selected.iter().enumerate() {
                if !instance.vis().get(i, j) {
                    continue;
                }
                let d = instance.distance(i, j);
                if d <= radius && best.is_none_or(|(b, _)| d < b) {
                    best = Some((d, slot));
                }
            }
            best.map(|(_, slot)| slot)
        })
        .collect()
}

fn hit_limit(result: &SolveResult, gap_tol: f64) -> bool {
    matches!(result.status, SolveStatus::TimeLimit { gap } if gap > gap_tol)
}

fn solve_cmd(a: &SolveArgs, det: bool) -> CliResult<()> {
    let problem = problem_of(&a.problem)?;
    let loaded = load_inputs(&a.problem)?;
    let limits = limits_of(&a.problem);
    let mut s = solve_one(problem, &loaded, a.k, limits)?;
    if det {
        s.result.elapsed = 0.0;
    }
    let positions = s
        .placement
        .selected
        .iter()
        .map(|&j| *loaded.cdoc.candidates.get(j))
        .collect();
    let limited = hit_limit(&s.result, limits.gap_tol);
    let gap = s.result.gap;
    write_json(
        &a.out,
        &ResultDoc {
            format_version: FORMAT_VERSION,
            timestamp: timestamp(det),
            command: "solve".into(),
            problem,
            k: a.k,
            inputs: Inputs {
                samples: a.problem.samples.clone(),
                candidates: Some(a.problem.candidates.clone()),
                visibility: Some(a.problem.vis.clone()),
            },
            placement: Some(s.placement),
            positions,
            objective: s.objective,
            ratio: s.ratio,
            assignment: s.assignment,
            solve: Some(s.result),
            plane: None,
            radius_lower_bound: None,
            certified_factor: None,
        },
    )?;
    if limited {
        return Err(CliError::TimeLimit(format!(
            "stopped with gap {gap:.4}; best placement written to {}",
            a.out.display()
        )));
    }
    Ok(())
}

fn approx_cmd(a: &ApproxArgs, det: bool) -> CliResult<()> {
    let sdoc: SamplesDoc = read_json(&a.samples)?;
    let samples = sdoc.samples;
    let plane = PlaneDeployment::for_samples(a.plane_z, &samples);
    let centers =
        farthest_point_clustering(&samples, a.k, &plane).map_err(|e| usage(e.to_string()))?;
    let r = coverage_radius(&centers, &samples).map_err(fail)?;
    let lower = optimum_lower_bound(r, plane.clearance);
    write_json(
        &a.out,
        &ResultDoc {
            format_version: FORMAT_VERSION,
            timestamp: timestamp(det),
            command: "approx".into(),
            problem: Problem::Radius {
                rho: 1.0,
                relaxed: true,
            },
            k: a.k,
            inputs: Inputs {
                samples: a.samples.clone(),
                ..Inputs::default()
            },
            placement: None,
            assignment: assign_nearest(&centers, &samples)
                .into_iter()
                .map(Some)
                .collect(),
            positions: centers,
            objective: r,
            ratio: 1.0,
            solve: None,
            plane: Some(plane),
            radius_lower_bound: Some(lower),
            certified_factor: Some(r / lower),
        },
    )
}

fn refine_cmd(a: &RefineArgs, det: bool) -> CliResult<()> {
    let mut doc: ResultDoc = read_json(&a.input)?;
    let sdoc: SamplesDoc = read_json(&doc.inputs.samples)?;
    let samples = sdoc.samples;
    match a.method {
        RefineMethod::Onecenter => {
            if a.fine_pitch.is_some() {
                return Err(usage("--fine-pitch conflicts with --method onecenter"));
            }
            let plane = match doc.plane {
                Some(p) => p,
                None => {
                    let z = candidates_doc(&doc)?
                        .region
                        .plane_height()
                        .ok_or_else(|| usage("onecenter needs a plane sensor region"))?;
                    PlaneDeployment::for_samples(z, &samples)
                }
            };
            let out = improve_quality_max(&samples, &doc.positions, &plane).map_err(fail)?;
            let covered: Vec<Option<usize>> = assign_nearest(&out.positions, &samples)
                .into_iter()
                .map(Some)
                .collect();
            doc.certified_factor = doc.radius_lower_bound.map(|lb| out.r_new / lb);
            doc.objective = out.r_new;
            doc.ratio = 1.0;
            doc.assignment = covered;
            doc.positions = out.positions;
            doc.plane = Some(plane);
        }
        RefineMethod::Grid => {
            let pitch = a
                .fine_pitch
                .ok_or_else(|| usage("--method grid requires --fine-pitch"))?;
            let cdoc = candidates_doc(&doc)?;
            let mesh = load_obj(&sdoc.mesh).map_err(fail)?;
            let bvh = Bvh::build(&mesh);
            let objective = match doc.problem {
                Problem::Visibility => RefineObjective::Visibility,
                Problem::Threshold { phi } => RefineObjective::Threshold { phi },
                Problem::Radius { rho, .. } => RefineObjective::Radius { rho },
            };
            let ctx = RefineContext {
                bvh: &bvh,
                samples: &samples,
                region: cdoc.region,
                objective,
                shrink: EndpointShrink::default(),
            };
            let out = refine_grid(&ctx, &doc.positions, pitch, cdoc.pitch, a.rounds)
                .map_err(|e| usage(e.to_string()))?;
            doc.assignment = ctx.assignment(&out.positions);
            let covered = doc.assignment.iter().filter(|x| x.is_some()).count();
            doc.ratio = covered as f64 / samples.len() as f64;
            doc.objective = out.objective_after;
            doc.positions = out.positions;
            doc.placement = None;
            doc.certified_factor = None;
        }
    }
    doc.command = "refine".into();
    doc.timestamp = timestamp(det);
    if det {
        if let Some(s) = doc.solve.as_mut() {
            s.elapsed = 0.0;
        }
    }
    write_json(&a.out, &doc)
}

fn candidates_doc(doc: &ResultDoc) -> CliResult<CandidatesDoc> {
    let path = doc
        .inputs
        .candidates
        .as_ref()
        .ok_or_else(|| usage("the input result does not name a candidates file"))?;
    read_json(path)
}

fn sweep(a: &SweepArgs, det: bool) -> CliResult<()> {
    let problem = problem_of(&a.problem)?;
    let loaded = load_inputs(&a.problem)?;
    let limits = limits_of(&a.problem);
    let mut csv = String::from("k,objective,ratio,gap,elapsed,status\n");
    for k in a.k_range.0..=a.k_range.1 {
        let line = match solve_one(problem, &loaded, k, limits) {
            Ok(s) => {
                let status = match s.result.status {
                    SolveStatus::Optimal => "optimal",
                    SolveStatus::Feasible { .. } => "feasible",
                    SolveStatus::Infeasible => "infeasible",
                    SolveStatus::TimeLimit { .. } => "time-limit",
                };
                let elapsed = if det { 0.0 } else { s.result.elapsed };
                format!(
                    "{k},{:?},{:?},{:?},{:?},{status}\n",
                    s.objective, s.ratio, s.result.gap, elapsed
                )
            }
            Err(CliError::Infeasible(_)) => format!("{k},,,,,infeasible\n"),
            Err(CliError::TimeLimit(_)) => format!("{k},,,,,time-limit\n"),
            Err(e) => return Err(e),
        };
        csv.push_str(&line);
    }
    std::fs::write(&a.out, csv).map_err(|e| fail(format!("cannot write {}: {e}", a.out.display())))
}

fn export(a: &ExportArgs) -> CliResult<()> {
    let doc: ResultDoc = read_json(&a.input)?;
    let sdoc: SamplesDoc = read_json(&doc.inputs.samples)?;
    let points: Vec<Point3> = sdoc.samples.positions().copied().collect();
    if doc.assignment.len() != points.len() {
        return Err(fail(format!(
            "result assigns {} samples but {} has {}",
            doc.assignment.len(),
            doc.inputs.samples.display(),
            points.len()
        )));
    }
    let colors = match a.coloring {
        Coloring::PerSensor => color_by_assignment(&doc.assignment),
    };
    write_ply(&a.out, &points, &colors).map_err(fail)
}
