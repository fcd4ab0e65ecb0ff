//! The `winding-helicity` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::{
    dome_field, double_helix_pair, twisted_tube, uniform_vertical, DomeField, DomeTwist, EdgeProfile,
    Patch, PatchProfile, RotatingPatches, TubeSpec,
};
use crate::error::{Error, Result};
use crate::fieldline::{read_curves, write_curves, Polyline3, TraceOptions, Tracer, DEFAULT_EPS_NULL};
use crate::flux::{flux_decompose, flux_total, load_series, save_series, PlaneGrid};
use crate::geom::{Vec2, Vec3};
use crate::grid::{divergence_max, load_field, save_field, Grid3, DEFAULT_EPS_BZ, DIVERGENCE_WARN};
use crate::helicity::{decompose, helicity_gauge_form, helicity_pairwise_form, relative_helicity, Quadrature};
use crate::labeling::{label_open_closed, load_mask, save_mask, LabelOptions, RegionMask};
use crate::report::{self, num};
use crate::thin_tube::{arch_angles, arch_mutual_helicity, mutual_helicity_thin, ThinTube};
use crate::winding::{winding_general, winding_monotone, WindingOptions};

const FORMATS: &str = "\
File formats (all little-endian):
  WH3D v1   one JSON header line terminated by '\\n' with keys
            format=\"WH3D\", version=1, nx, ny, nz, dx, dy, dz, origin=[x,y,z],
            components=[\"Bx\",\"By\",\"Bz\"]; then 3*nx*ny*nz f64 values,
            component-major, index (k*ny + j)*nx + i within each component.
  WHMSK v1  same header with format=\"WHMSK\" and components=[\"label\"];
            then nx*ny*nz i32 labels (-1 = excluded).
  WHPS v1   header {format=\"WHPS\", version=1, nx, ny, dx, dy, origin=[x,y],
            times=[...], layout=[\"Bz\",\"wx\",\"wy\"]}; then per time three
            nx*ny f64 maps; NaN in wx/wy marks an undefined velocity.
  WHCRV v1  text; '# curve <id>' starts a curve, each following line holds
            'x y z' of one vertex in orientation order.";

#[derive(Parser, Debug)]
#[command(name = "winding-helicity", version, about = "Winding helicity of gridded magnetic fields", after_help = FORMATS)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct GlobalArgs {
    /// TOML file with eps_bz, eps_null, refine, threads, deterministic.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Relative |B_z| threshold below which slopes/velocities are undefined.
    #[arg(long, global = true)]
    eps_bz: Option<f64>,
    /// Relative |B| threshold treated as a null when tracing.
    #[arg(long, global = true)]
    eps_null: Option<f64>,
    /// Sub-stations per refinement of under-sampled winding intervals.
    #[arg(long, global = true)]
    refine: Option<usize>,
    /// Worker threads, 0 for automatic.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Order-independent reductions.
    #[arg(long, global = true)]
    deterministic: Option<bool>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an analytic test field (WH3D).
    MakeField(MakeFieldArgs),
    /// Generate a rotating-patch planar series (WHPS).
    MakeSeries(MakeSeriesArgs),
    /// Trace field lines from seed points (WHCRV output).
    Trace(TraceArgs),
    /// Winding number of the first two curves in a WHCRV file.
    Winding(WindingArgs),
    /// Winding helicity of a field, optionally split by a mask.
    Helicity(HelicityArgs),
    /// Thin-tube mutual helicity of two axis curves.
    TubeMutual(TubeMutualArgs),
    /// Mutual helicity of two arches from their footpoints.
    ArchMutual(ArchMutualArgs),
    /// Time-integrated helicity flux of a planar series.
    Flux(FluxArgs),
    /// Open/closed subdomain labeling of a field (WHMSK output).
    Label(LabelArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FieldKind {
    Uniform,
    Tube,
    Helix,
    Dome,
    ThreeDomes,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Edge {
    Hard,
    Cosine,
    CellAverage,
}

impl From<Edge> for EdgeProfile {
    fn from(e: Edge) -> Self {
        match e {
            Edge::Hard => EdgeProfile::Hard,
            Edge::Cosine => EdgeProfile::Cosine,
            Edge::CellAverage => EdgeProfile::CellAverage,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct MakeFieldArgs {
    #[arg(long, value_enum)]
    kind: FieldKind,
    /// Samples per axis.
    #[arg(long, default_value_t = 33)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
    /// Axial field of the uniform field or tubes.
    #[arg(long, default_value_t = 1.0)]
    b0: f64,
    /// Axial field of the second helix tube.
    #[arg(long, default_value_t = 1.0)]
    b0_second: f64,
    /// Tube radius (default: unit flux at b0 = 1).
    #[arg(long)]
    radius: Option<f64>,
    /// Tube twist rate in radians per unit height (default: one turn).
    #[arg(long)]
    twist: Option<f64>,
    /// Axis turns of the helix pair.
    #[arg(long, default_value_t = 1.0)]
    turns: f64,
    #[arg(long, value_enum, default_value_t = Edge::Hard)]
    edge: Edge,
    /// Sink strength of each dome (negative).
    #[arg(long, default_value_t = -0.3, allow_negative_numbers = true)]
    strength: f64,
    #[arg(long, default_value_t = 0.3)]
    depth: f64,
    /// Footpoint rotation amplitude applied to every dome, radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    dome_twist: f64,
    #[arg(long, default_value_t = 0.3)]
    dome_twist_width: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SeriesKind {
    Patches,
    GaussianPatches,
}

#[derive(Args, Debug, Serialize)]
struct MakeSeriesArgs {
    #[arg(long, value_enum, default_value_t = SeriesKind::Patches)]
    kind: SeriesKind,
    /// Plane samples per axis over [-1, 1].
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 64)]
    steps: usize,
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Angular rate (default: one turn over the duration).
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    flux_i: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    flux_j: f64,
    #[arg(long, default_value_t = 1.0)]
    separation: f64,
    #[arg(long, value_enum, default_value_t = Edge::Hard)]
    edge: Edge,
    #[arg(long)]
    out: PathBuf,
    /// Also write per-frame patch labels as a WHMSK stack.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TraceArgs {
    #[arg(long)]
    field: PathBuf,
    /// Seed point "x,y,z"; repeatable.
    #[arg(long = "seed", value_parser = parse_vec3, required = true, allow_hyphen_values = true)]
    seeds: Vec<Vec3>,
    /// Arclength step (default: half the smallest grid spacing).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
    /// Follow -B instead of B.
    #[arg(long)]
    backward: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct WindingArgs {
    /// WHCRV file; the first two curves are used.
    #[arg(long)]
    curves: PathBuf,
    /// Require z-monotone curves and use the simple winding.
    #[arg(long)]
    monotone: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Form {
    Gauge,
    Pairwise,
    Both,
}

#[derive(Args, Debug, Serialize)]
struct HelicityArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Reference field for relative helicity.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Form::Pairwise)]
    form: Form,
    /// JSON report destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TubeMutualArgs {
    /// WHCRV file whose first two curves are the tube axes.
    #[arg(long)]
    curves: PathBuf,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    flux_i: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    flux_j: f64,
}

#[derive(Args, Debug, Serialize)]
struct ArchMutualArgs {
    #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
    a_plus: Vec2,
    #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
    a_minus: Vec2,
    #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
    b_plus: Vec2,
    #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
    b_minus: Vec2,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    flux_i: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    flux_j: f64,
}

#[derive(Args, Debug, Serialize)]
struct FluxArgs {
    #[arg(long)]
    series: PathBuf,
    /// WHMSK stack with one z-plane of labels per frame.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct LabelArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seeds_per_cell: usize,
    /// Trace step as a fraction of the smallest grid spacing.
    #[arg(long, default_value_t = 1.0)]
    step_fraction: f64,
}

fn parse_list<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected {N} comma-separated numbers"))
}

fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    parse_list::<3>(s)
}

fn parse_vec2(s: &str) -> std::result::Result<Vec2, String> {
    parse_list::<2>(s)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    eps_bz: Option<f64>,
    eps_null: Option<f64>,
    refine: Option<usize>,
    threads: Option<usize>,
    deterministic: Option<bool>,
}

/// Effective settings of one invocation, echoed in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub eps_bz: f64,
    pub eps_null: f64,
    pub refine: usize,
    pub threads: usize,
    pub deterministic: bool,
    pub output: Option<String>,
    pub format: String,
}

/// Usage problems found after parsing.
struct Usage(String);

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

fn resolve(global: &GlobalArgs) -> std::result::Result<(f64, f64, usize, usize, bool), Failure> {
    let file = match &global.config {
        None => FileConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            toml::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?
        }
    };
    let eps_bz = global.eps_bz.or(file.eps_bz).unwrap_or(DEFAULT_EPS_BZ);
    let eps_null = global.eps_null.or(file.eps_null).unwrap_or(DEFAULT_EPS_NULL);
    let refine = global.refine.or(file.refine).unwrap_or(WindingOptions::default().refine);
    let threads = global.threads.or(file.threads).unwrap_or(0);
    let deterministic = global.deterministic.or(file.deterministic).unwrap_or(true);
    if !(eps_bz > 0.0 && eps_null > 0.0) {
        return Err(Failure::Usage("tolerances must be positive".into()));
    }
    if refine < 2 {
        return Err(Failure::Usage("refine must be at least 2".into()));
    }
    Ok((eps_bz, eps_null, refine, threads, deterministic))
}

fn require(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file")))
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            1
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(cli: Cli) -> std::result::Result<String, Failure> {
    let (eps_bz, eps_null, refine, threads, deterministic) = resolve(&cli.global)?;
    if threads > 0 {
        // fails harmlessly if a pool already exists in this process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let (name, inputs, output) = describe(&cli.command);
    let cfg = RunConfig {
        subcommand: name.into(),
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        eps_bz,
        eps_null,
        refine,
        threads,
        deterministic,
        format: if output.is_some() { "json".into() } else { "text".into() },
        output: output.map(|p| p.display().to_string()),
    };
    for p in &inputs {
        require(p)?;
    }
    let wopts = WindingOptions { refine, ..WindingOptions::default() };
    match cli.command {
        Command::MakeField(a) => make_field(&a, &cfg),
        Command::MakeSeries(a) => make_series(&a, &cfg),
        Command::Trace(a) => trace_cmd(&a, &cfg),
        Command::Winding(a) => winding_cmd(&a, &cfg, &wopts),
        Command::Helicity(a) => helicity_cmd(&a, &cfg),
        Command::TubeMutual(a) => tube_mutual_cmd(&a, &cfg),
        Command::ArchMutual(a) => arch_mutual_cmd(&a, &cfg),
        Command::Flux(a) => flux_cmd(&a, &cfg),
        Command::Label(a) => label_cmd(&a, &cfg),
    }
}

fn describe(c: &Command) -> (&'static str, Vec<PathBuf>, Option<PathBuf>) {
    match c {
        Command::MakeField(a) => ("make-field", vec![], Some(a.out.clone())),
        Command::MakeSeries(a) => ("make-series", vec![], Some(a.out.clone())),
        Command::Trace(a) => ("trace", vec![a.field.clone()], a.out.clone()),
        Command::Winding(a) => ("winding", vec![a.curves.clone()], None),
        Command::Helicity(a) => {
            let mut v = vec![a.field.clone()];
            v.extend(a.mask.clone());
            v.extend(a.reference.clone());
            ("helicity", v, a.out.clone())
        }
        Command::TubeMutual(a) => ("tube-mutual", vec![a.curves.clone()], None),
        Command::ArchMutual(_) => ("arch-mutual", vec![], None),
        Command::Flux(a) => {
            let mut v = vec![a.series.clone()];
            v.extend(a.labels.clone());
            ("flux", v, a.out.clone())
        }
        Command::Label(a) => ("label", vec![a.field.clone()], Some(a.out.clone())),
    }
}

fn cube(n: usize, lo: Vec3, hi: Vec3) -> Result<Grid3> {
    Grid3::spanning([n, n, n], lo, hi)
}

/// Half-width of a square footprint holding a disk of radius `reach` with
/// a fixed margin plus about two cells for edge smoothing.
fn footprint_half(reach: f64, n: usize) -> f64 {
    let base = reach + 0.09;
    base + 4.0 * base / (n.max(2) - 1) as f64
}

fn make_field(a: &MakeFieldArgs, cfg: &RunConfig) -> std::result::Result<String, Failure> {
    let edge: EdgeProfile = a.edge.into();
    let radius = a.radius.unwrap_or(1.0 / PI.sqrt());
    let field = match a.kind {
        FieldKind::Uniform => uniform_vertical(cube(a.n, [-1.0, -1.0, 0.0], [1.0, 1.0, 1.0])?, a.b0),
        FieldKind::Tube => {
            let half = footprint_half(radius, a.n);
            let g = cube(a.n, [-half, -half, 0.0], [half, half, 1.0])?;
            let spec = TubeSpec::new([0.0, 0.0], radius, a.b0, a.twist.unwrap_or(2.0 * PI)).with_profile(edge);
            twisted_tube(g, &spec)?
        }
        FieldKind::Helix => {
            let half = footprint_half(0.75 + radius, a.n);
            let g = cube(a.n, [-half, -half, 0.0], [half, half, 1.0])?;
            let t = a.twist.unwrap_or(0.0);
            let ta = TubeSpec::new([-0.75, 0.0], radius, a.b0, t).with_profile(edge);
            let tb = TubeSpec::new([0.75, 0.0], radius, a.b0_second, t).with_profile(edge);
            double_helix_pair(g, &ta, &tb, a.turns)?
        }
        FieldKind::Dome | FieldKind::ThreeDomes => {
            let (spec, g) = if matches!(a.kind, FieldKind::Dome) {
                (DomeField::single(a.b0, a.strength, a.depth), cube(a.n, [-1.2, -1.2, 0.0], [1.2, 1.2, 0.8])?)
            } else {
                (DomeField::three(a.b0, a.strength, a.depth, 1.0), cube(a.n, [-2.0, -2.0, 0.0], [2.0, 2.0, 1.2])?)
            };
            let twist = (a.dome_twist != 0.0)
                .then_some(DomeTwist { amplitude: a.dome_twist, width: a.dome_twist_width });
            dome_field(g, &spec.with_twist(twist))?
        }
    };
    save_field(&field, &a.out)?;
    let div = divergence_max(&field);
    let mut s = report::preamble(cfg);
    writeln!(s, "wrote {}", a.out.display()).unwrap();
    writeln!(s, "grid: {}x{}x{}", field.grid.nx, field.grid.ny, field.grid.nz).unwrap();
    writeln!(s, "divergence_max: {}", num(div)).unwrap();
    if div > DIVERGENCE_WARN {
        eprintln!("warning: normalized divergence {div:e} exceeds {DIVERGENCE_WARN:e}");
    }
    Ok(s)
}

fn make_series(a: &MakeSeriesArgs, cfg: &RunConfig) -> std::result::Result<String, Failure> {
    let plane = PlaneGrid::spanning([a.n, a.n], [-1.0, -1.0], [1.0, 1.0])?;
    let omega = a.omega.unwrap_or(2.0 * PI / a.duration);
    let pivot = plane.center();
    let (radius, profile) = match a.kind {
        SeriesKind::Patches => (0.3 * a.separation, PatchProfile::TopHat(a.edge.into())),
        SeriesKind::GaussianPatches => (0.15 * a.separation, PatchProfile::Gaussian),
    };
    let patches = vec![
        Patch { center: [pivot[0] - 0.5 * a.separation, pivot[1]], flux: a.flux_i, radius },
        Patch { center: [pivot[0] + 0.5 * a.separation, pivot[1]], flux: a.flux_j, radius },
    ];
    let series = RotatingPatches::new(plane, patches, pivot, omega, profile)?.series(a.duration, a.steps)?;
    save_series(&series, &a.out)?;
    let mut s = report::preamble(cfg);
    writeln!(s, "wrote {} ({} frames)", a.out.display(), series.frames.len()).unwrap();
    if let (Some(p), Some(labels)) = (&a.labels_out, &series.labels) {
        let g = Grid3::new(plane.nx, plane.ny, series.frames.len(), [plane.dx, plane.dy, 1.0], [
            plane.origin[0],
            plane.origin[1],
            0.0,
        ])?;
        let mask = RegionMask::new(g, labels.concat())?;
        save_mask(&mask, p)?;
        writeln!(s, "wrote {}", p.display()).unwrap();
    }
    Ok(s)
}

fn trace_cmd(a: &TraceArgs, cfg: &RunConfig) -> std::result::Result<String, Failure> {
    let field = load_field(&a.field)?;
    let step = a.step.unwrap_or(0.5 * field.grid.min_spacing());
    let mut opts = TraceOptions::new(step, a.max_steps);
    opts.eps_null = cfg.eps_null;
    if a.backward {
        opts = opts.backward();
    }
    let tracer = Tracer::new(&field, cfg.eps_null);
    let mut s = report::preamble(cfg);
    let mut curves = Vec::new();
    for (i, seed) in a.seeds.iter().enumerate() {
        let t = tracer.trace(*seed, &opts)?;
        let end = *t.vertices.last().unwrap();
        writeln!(
            s,
            "curve {i}: {} vertices, {}, end {} {} {}",
            t.vertices.len(),
            t.reason,
            num(end[0]),
            num(end[1]),
            num(end[2])
        )
        .unwrap();
        if t.vertices.len() > 1 {
            curves.push((i.to_string(), t.polyline()?));
        }
    }
    if let Some(p) = &a.out {
        write_curves(p, &curves)?;
        writeln!(s, "wrote {}", p.display()).unwrap();
    }
    Ok(s)
}

fn two_curves(path: &Path) -> Result<(Polyline3, Polyline3)> {
    let mut c = read_curves(path)?.into_iter();
    match (c.next(), c.next()) {
        (Some(a), Some(b)) => Ok((a.1, b.1)),
        _ => Err(Error::InvalidInput(format!("{} holds fewer than two curves", path.display()))),
    }
}

fn winding_cmd(a: &WindingArgs, cfg: &RunConfig, o: &WindingOptions) -> std::result::Result<String, Failure> {
    let (c1, c2) = two_curves(&a.curves)?;
    let w = if a.monotone { winding_monotone(&c1, &c2, o)? } else { winding_general(&c1, &c2, o)? };
    let mut s = report::preamble(cfg);
    writeln!(s, "winding: {}", num(w.value)).unwrap();
    writeln!(s, "full turns: {}", w.full_turns()).unwrap();
    writeln!(s, "contributions: {}", w.contributions.len()).unwrap();
    for c in &w.contributions {
        writeln!(s, "  {} sigma {} angle {}", serde_json::to_string(&c.kind).unwrap(), c.sigma_product, num(c.angle))
            .unwrap();
    }
    Ok(s)
}

fn quadrature_line(s: &mut String, name: &str, q: f64) {
    writeln!(s, "{name}: {}", num(q)).unwrap();
}

fn helicity_cmd(a: &HelicityArgs, cfg: &RunConfig) -> std::result::Result<String, Failure> {
    let field = load_field(&a.field)?;
    let div = divergence_max(&field);
    if div > DIVERGENCE_WARN {
        eprintln!("warning: normalized divergence {div:e} exceeds {DIVERGENCE_WARN:e}");
    }
    let mut s;
    let mut json = serde_json::json!({ "version": report::VERSION, "config": cfg, "divergence_max": div });
    if let Some(m) = &a.mask {
        let mask = load_mask(m)?;
        mask.check_shape(&field.grid)?;
        let r = decompose(&field, &mask)?;
        s = report::helicity_text(&r, cfg);
        json = report::helicity_json(&r, cfg);
        json["divergence_max"] = serde_json::json!(div);
    } else {
        s = report::preamble(cfg);
    }
    writeln!(s, "divergence_max: {}", num(div)).unwrap();
    let pairwise: Option<Quadrature> =
        matches!(a.form, Form::Pairwise | Form::Both).then(|| helicity_pairwise_form(&field));
    let gauge = matches!(a.form, Form::Gauge | Form::Both).then(|| helicity_gauge_form(&field));
    if let Some(p) = pairwise {
        quadrature_line(&mut s, "pairwise form", p.value);
        quadrature_line(&mut s, "pairwise kernel magnitude", p.magnitude);
        json["pairwise"] = serde_json::json!(p);
    }
    if let Some(g) = gauge {
        quadrature_line(&mut s, "gauge form", g);
        json["gauge"] = serde_json::json!(g);
    }
    if let (Some(p), Some(g)) = (pairwise, gauge) {
        let d = p.relative_difference(g);
        quadrature_line(&mut s, "form difference (relative)", d);
        json["form_difference"] = serde_json::json!(d);
    }
    if let Some(r) = &a.reference {
        let reference = load_field(r)?;
        let h = relative_helicity(&field, &reference)?;
        quadrature_line(&mut s, "relative helicity", h);
        json["relative_helicity"] = serde_json::json!(h);
    }
    if let Some(p) = &a.out {
        write_text(p, &report::to_json_string(&json))?;
        writeln!(s, "wrote {}", p.display()).unwrap();
    }
    Ok(s)
}

fn tube_mutual_cmd(a: &TubeMutualArgs, cfg: &RunConfig) -> std::result::Result<String, Failure> {
    let (c1, c2) = two_curves(&a.curves)?;
    let (h, w) = mutual_helicity_thin(&ThinTube::new(c1, a.flux_i)?, &ThinTube::new(c2, a.flux_j)?)?;
    let mut s = report::preamble(cfg);
    writeln!(s, "L: {}", num(w.value)).unwrap();
    writeln!(s, "H_ij: {}", num(h)).unwrap();
    writeln!(s, "2H_ij: {}", num(2.0 * h)).unwrap();
    Ok(s)
}

fn arch_mutual_cmd(a: &ArchMutualArgs, cfg: &RunConfig) -> std::result::Result<String, Failure> {
    let ang = arch_angles(a.a_plus, a.a_minus, a.b_plus, a.b_minus)?;
    let h = arch_mutual_helicity(&ang, a.flux_i, a.flux_j);
    let mut s = report::preamble(cfg);
    writeln!(s, "nu: {}", num(ang.nu)).unwrap();
    writeln!(s, "rho: {}", num(ang.rho)).unwrap();
    writeln!(s, "L: {}", num((ang.rho - ang.nu) / (2.0 * PI))).unwrap();
    writeln!(s, "H_ij: {}", num(h)).unwrap();
    writeln!(s, "2H_ij: {}", num(2.0 * h)).unwrap();
    Ok(s)
}

fn flux_cmd(a: &FluxArgs, cfg: &RunConfig) -> std::result::Result<String, Failure> {
    let mut series = load_series(&a.series)?;
    if cfg.eps_bz != DEFAULT_EPS_BZ {
        log::info!("eps_bz applies when velocities are derived; stored series are used as given");
    }
    let (s, json) = match &a.labels {
        Some(l) => {
            series = series.with_label_stack(&load_mask(l)?)?;
            let r = flux_decompose(&series)?;
            (report::helicity_text(&r, cfg), report::helicity_json(&r, cfg))
        }
        None => {
            let q = flux_total(&series);
            let mut s = report::preamble(cfg);
            writeln!(s, "flux total: {}", num(q.value)).unwrap();
            writeln!(s, "flux total (winding-accumulation convention): {}", num(-q.value)).unwrap();
            writeln!(s, "kernel magnitude: {}", num(q.magnitude)).unwrap();
            let json = serde_json::json!({
                "version": report::VERSION,
                "config": cfg,
                "total": q.value,
                "winding_accumulation_total": -q.value,
                "magnitude": q.magnitude,
            });
            (s, json)
        }
    };
    let mut s = s;
    if let Some(p) = &a.out {
        write_text(p, &report::to_json_string(&json))?;
        writeln!(s, "wrote {}", p.display()).unwrap();
    }
    Ok(s)
}

fn label_cmd(a: &LabelArgs, cfg: &RunConfig) -> std::result::Result<String, Failure> {
    let field = load_field(&a.field)?;
    if a.seeds_per_cell == 0 {
        return Err(Failure::Usage("seeds-per-cell must be at least 1".into()));
    }
    let opts = LabelOptions {
        seeds_per_cell: a.seeds_per_cell,
        step_fraction: a.step_fraction,
        eps_null: cfg.eps_null,
        ..LabelOptions::default()
    };
    let out = label_open_closed(&field, &opts)?;
    save_mask(&out.mask, &a.out)?;
    let mut s = report::preamble(cfg);
    writeln!(s, "labels: {}", out.mask.label_count()).unwrap();
    writeln!(s, "closed regions: {}", out.closed_regions).unwrap();
    writeln!(s, "undetermined fraction: {}", num(out.undetermined_fraction)).unwrap();
    for l in 0..out.mask.label_count() as i32 {
        writeln!(s, "  {l} samples {} volume {}", out.mask.cells_with(l), num(out.mask.volume(l))).unwrap();
    }
    writeln!(s, "wrote {}", a.out.display()).unwrap();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<String> {
        std::iter::once("winding-helicity").chain(v.iter().copied()).map(String::from).collect()
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(&args(&["bogus"])), 1);
        assert_eq!(run(&args(&[])), 1);
        assert_eq!(run(&args(&["arch-mutual", "--a-plus", "1"])), 1);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(&args(&["--help"])), 0);
        assert_eq!(run(&args(&["helicity", "--help"])), 0);
    }

    #[test]
    fn missing_file_is_a_data_error() {
        assert_eq!(run(&args(&["helicity", "--field", "/nonexistent/x.wh3d"])), 2);
    }

    #[test]
    fn vector_parsing() {
        assert_eq!(parse_vec2("1, -2.5").unwrap(), [1.0, -2.5]);
        assert!(parse_vec3("1,2").is_err());
    }
}
