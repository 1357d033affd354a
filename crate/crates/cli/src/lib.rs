//! Subcommands of the `mm-spectral` tool. `run` parses arguments, writes
//! the result to `out` and diagnostics to `err`, and returns the exit code:
//! 0 on success, 1 on bad input or a failed validation, 2 when a structural
//! invariant is violated.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use mm_spectral::curve::{proj_json, CurveBundle, CurvePoint};
use mm_spectral::divisor::{
    analyze, divisor_at, divisor_trajectory, AbelValue, DivisorReport, TimeAxis, Trajectory, TrajectoryConfig,
    DEFAULT_DN_TOL, DEFAULT_EPS, DEFAULT_ROOT_TOL,
};
use mm_spectral::lecore::{is_schubert_positive, parse_tableau, validate_le_rule, LeTableau};
use mm_spectral::network::{
    all_minors, boundary_measurement_with, enumerate_faces, trivalent_network, PathMethod, PlabicNetwork,
};
use mm_spectral::num::{format_exact, sig17, to_f64};
use mm_spectral::sampling::{random_sample, run_sample, SampleRanges};
use mm_spectral::singular::{abel_probe, blowup_chart, default_samples, detect, NodeApproach, ProbePath, TimeApproach};
use mm_spectral::soliton::{
    gamma0_divisor, kp_residual, log_tau_derivatives, tropical_regions, u, Grid, Phases, SolitonData, TimePoint,
};
use mm_spectral::theoremlab::{verify_theorem, VerifyOptions, DEFAULT_MAX_WHITES};
use mm_spectral::Error;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Parser, Debug)]
#[command(name = "mm-spectral", version, about = "Spectral data of KP-II line solitons on Le-networks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Distance to a double point below which a divisor point sits on it.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Tolerance on |Im A_l - pi| mod 2 pi.
    #[arg(long = "dn-tol", global = true, default_value_t = DEFAULT_DN_TOL)]
    pub dn_tol: f64,
    /// Largest relative imaginary part snapped to a real root.
    #[arg(long = "root-tol", global = true, default_value_t = DEFAULT_ROOT_TOL)]
    pub root_tol: f64,
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Le-tableau files.
    #[command(subcommand)]
    Tableau(TableauCmd),
    /// Trivalent plabic network and boundary measurement.
    #[command(subcommand)]
    Network(NetworkCmd),
    /// Tau function, u and tropical regions.
    #[command(subcommand)]
    Soliton(SolitonCmd),
    /// Dual curve, ovals, cycles and differentials.
    #[command(subcommand)]
    Curve(CurveCmd),
    /// Divisor, Abel transform and trajectories.
    #[command(subcommand)]
    Divisor(DivisorCmd),
    /// Divisor points at double points.
    #[command(subcommand)]
    Singular(SingularCmd),
    /// Exhaustive marking enumeration.
    #[command(subcommand)]
    Theorem(TheoremCmd),
}

#[derive(Subcommand, Debug)]
pub enum TableauCmd {
    Validate { tableau: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum NetworkCmd {
    Build {
        tableau: PathBuf,
    },
    Matrix {
        tableau: PathBuf,
        /// Only exact entries, no floating values.
        #[arg(long)]
        exact: bool,
        /// Enumerate paths explicitly instead of dynamic programming.
        #[arg(long)]
        paths: bool,
    },
    Minors {
        tableau: PathBuf,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        paths: bool,
    },
}

#[derive(Args, Debug, Clone)]
pub struct PhaseArgs {
    /// Comma-separated increasing phases kappa_1..kappa_n; defaults to
    /// integers centred at 0.
    #[arg(long, allow_hyphen_values = true)]
    pub phases: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum SolitonCmd {
    Eval {
        tableau: PathBuf,
        #[command(flatten)]
        phases: PhaseArgs,
        /// x0,x1,nx,y0,y1,ny; without it a single point is evaluated.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Time of the grid, or x,y,t of the single point.
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        t: String,
        /// Report the dominant subset per grid point instead of u.
        #[arg(long)]
        tropical: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum CurveCmd {
    Build {
        tableau: PathBuf,
        #[command(flatten)]
        phases: PhaseArgs,
    },
    Report {
        tableau: PathBuf,
        #[command(flatten)]
        phases: PhaseArgs,
    },
    Differentials {
        tableau: PathBuf,
        #[command(flatten)]
        phases: PhaseArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Axis::X)]
    pub axis: Axis,
    #[arg(long, allow_hyphen_values = true, default_value_t = -10.0)]
    pub from: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 10.0)]
    pub to: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    X,
    Y,
    T,
}

impl From<Axis> for TimeAxis {
    fn from(a: Axis) -> TimeAxis {
        match a {
            Axis::X => TimeAxis::X,
            Axis::Y => TimeAxis::Y,
            Axis::T => TimeAxis::T,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum DivisorCmd {
    At {
        tableau: PathBuf,
        #[command(flatten)]
        phases: PhaseArgs,
        /// Normalization time x,y,t.
        #[arg(long, allow_hyphen_values = true, default_value = "0,0,0")]
        t0: String,
    },
    Trajectory {
        tableau: PathBuf,
        #[command(flatten)]
        phases: PhaseArgs,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0,0")]
        t0: String,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Random weights, phases and times on the diagram of the tableau.
    Sample {
        tableau: PathBuf,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum SingularCmd {
    /// Sweep one time axis and classify every crossing of a double point.
    Scan {
        tableau: PathBuf,
        #[command(flatten)]
        phases: PhaseArgs,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0,0")]
        t0: String,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Fit Re A_l against log s along an approach path.
    Probe {
        tableau: PathBuf,
        #[command(flatten)]
        phases: PhaseArgs,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0,0")]
        t0: String,
        /// `node:i=c[;j=c..]` moves divisor point i to its nearest node
        /// along c s; `time:axis:critical:side` follows KP time.
        #[arg(long, allow_hyphen_values = true)]
        path: String,
        #[arg(long, default_value_t = 25)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum TheoremCmd {
    Verify {
        tableau: PathBuf,
        #[arg(long = "max-whites", default_value_t = DEFAULT_MAX_WHITES)]
        max_whites: usize,
        #[arg(long)]
        force: bool,
        /// Skip the top-row and leftmost exclusion when judging markings.
        #[arg(long = "no-exclusion")]
        no_exclusion: bool,
    },
}

/// Failure of a subcommand: bad input (exit 1), a failed check whose
/// report is still printed (exit 1), or a broken invariant (exit 2).
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Rejected(Value),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_invariant() {
            Failure::Invariant(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

pub type CmdResult = std::result::Result<Output, Failure>;

pub enum Output {
    Json(Value),
    Text(String),
}

pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    if cli.global.jobs > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build_global();
    }
    if let Err(msg) = check_global(&cli.global) {
        let _ = writeln!(err, "{}", diagnostic("input", &msg));
        return 1;
    }
    emit(dispatch(&cli), out, err)
}

/// Writes a subcommand result and returns its exit code.
pub fn emit(result: CmdResult, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match result {
        Ok(Output::Json(v)) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap());
            0
        }
        Ok(Output::Text(s)) => {
            let _ = write!(out, "{s}");
            0
        }
        Err(Failure::Rejected(v)) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap());
            1
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "{}", diagnostic("input", &msg));
            1
        }
        Err(Failure::Invariant(msg)) => {
            let _ = writeln!(err, "{}", diagnostic("invariant", &msg));
            2
        }
    }
}

fn diagnostic(kind: &str, msg: &str) -> String {
    serde_json::to_string(&json!({"error": kind, "message": msg})).unwrap()
}

fn check_global(g: &Global) -> std::result::Result<(), String> {
    for (name, v) in [("eps", g.eps), ("dn-tol", g.dn_tol), ("root-tol", g.root_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("--{name} must be positive"));
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    match &cli.command {
        Command::Tableau(TableauCmd::Validate { tableau }) => tableau_validate(tableau),
        Command::Network(cmd) => network(cmd),
        Command::Soliton(SolitonCmd::Eval {
            tableau,
            phases,
            grid,
            t,
            tropical,
        }) => soliton_eval(g, tableau, phases, grid.as_deref(), t, *tropical),
        Command::Curve(cmd) => curve(cmd),
        Command::Divisor(cmd) => divisor(g, cmd),
        Command::Singular(cmd) => singular(g, cmd),
        Command::Theorem(TheoremCmd::Verify {
            tableau,
            max_whites,
            force,
            no_exclusion,
        }) => theorem(tableau, *max_whites, *force, !no_exclusion),
    }
}

fn read_tableau(path: &Path) -> std::result::Result<LeTableau, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let t = parse_tableau(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let v = validate_le_rule(&t);
    if !v.is_empty() {
        return Err(Failure::Input(format!(
            "{}: Le-rule violated at boxes {:?}",
            path.display(),
            v.iter().map(|x| x.zero).collect::<Vec<_>>()
        )));
    }
    Ok(t)
}

pub fn parse_floats(s: &str) -> std::result::Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::Input(format!("malformed number '{x}' in '{s}'")))
        })
        .collect()
}

fn parse_time(s: &str) -> std::result::Result<TimePoint, Failure> {
    match parse_floats(s)?.as_slice() {
        &[x, y, t] => Ok(TimePoint::new(x, y, t)),
        _ => Err(Failure::Input(format!("time '{s}' must be x,y,t"))),
    }
}

fn phases_for(arg: &PhaseArgs, n: usize) -> std::result::Result<Phases, Failure> {
    match &arg.phases {
        None => Ok(mm_spectral::catalog::integer_phases(n)),
        Some(s) => {
            let k = parse_floats(s)?;
            if k.len() != n {
                return Err(Failure::Input(format!("{} phases given for n = {n}", k.len())));
            }
            Ok(Phases::new(k)?)
        }
    }
}

struct Setup {
    network: PlabicNetwork,
    data: SolitonData,
    phases: Phases,
}

fn setup(path: &Path, phases: &PhaseArgs) -> std::result::Result<Setup, Failure> {
    let t = read_tableau(path)?;
    let network = trivalent_network(&t)?;
    let phases = phases_for(phases, network.n())?;
    let a = boundary_measurement_with(&network, PathMethod::Dynamic)?;
    let data = SolitonData::new(phases.clone(), &a)?;
    Ok(Setup { network, data, phases })
}

fn tableau_validate(path: &Path) -> CmdResult {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let t = parse_tableau(&text)?;
    let violations: Vec<Value> = validate_le_rule(&t)
        .iter()
        .map(|v| json!({"zero": [v.zero.0 + 1, v.zero.1 + 1], "left": [v.left.0 + 1, v.left.1 + 1], "above": [v.above.0 + 1, v.above.1 + 1]}))
        .collect();
    let report = json!({
        "schema": SCHEMA_VERSION,
        "tableau": t.to_json(),
        "schubert": is_schubert_positive(&t),
        "valid": violations.is_empty(),
        "violations": violations,
    });
    if violations.is_empty() {
        Ok(Output::Json(report))
    } else {
        Err(Failure::Rejected(report))
    }
}

fn network(cmd: &NetworkCmd) -> CmdResult {
    match cmd {
        NetworkCmd::Build { tableau } => {
            let g = trivalent_network(&read_tableau(tableau)?)?;
            let faces = enumerate_faces(&g)?;
            let mut v = g.to_json(Some(&faces));
            v["schema"] = json!(SCHEMA_VERSION);
            Ok(Output::Json(v))
        }
        NetworkCmd::Matrix { tableau, exact, paths } | NetworkCmd::Minors { tableau, exact, paths } => {
            let g = trivalent_network(&read_tableau(tableau)?)?;
            let method = if *paths { PathMethod::Explicit } else { PathMethod::Dynamic };
            let a = boundary_measurement_with(&g, method)?;
            if matches!(cmd, NetworkCmd::Matrix { .. }) {
                let exact_rows: Vec<Vec<String>> = a.iter().map(|r| r.iter().map(format_exact).collect()).collect();
                let mut v = json!({"schema": SCHEMA_VERSION, "k": g.k(), "n": g.n(), "pivots": g.pivots(), "exact": exact_rows});
                if !exact {
                    v["values"] = json!(a.iter().map(|r| r.iter().map(|x| sig17(to_f64(x))).collect::<Vec<_>>()).collect::<Vec<_>>());
                }
                Ok(Output::Json(v))
            } else {
                let minors: Vec<Value> = all_minors(&a)
                    .iter()
                    .map(|(cols, m)| {
                        let mut e = json!({"columns": cols, "exact": format_exact(m)});
                        if !exact {
                            e["value"] = json!(sig17(to_f64(m)));
                        }
                        e
                    })
                    .collect();
                Ok(Output::Json(json!({"schema": SCHEMA_VERSION, "k": g.k(), "n": g.n(), "minors": minors})))
            }
        }
    }
}

fn parse_grid(s: &str) -> std::result::Result<Grid, Failure> {
    match parse_floats(s)?.as_slice() {
        &[x0, x1, nx, y0, y1, ny] if nx >= 1.0 && ny >= 1.0 && nx.fract() == 0.0 && ny.fract() == 0.0 => Ok(Grid {
            x0,
            x1,
            nx: nx as usize,
            y0,
            y1,
            ny: ny as usize,
        }),
        _ => Err(Failure::Input(format!("grid '{s}' must be x0,x1,nx,y0,y1,ny with integer counts"))),
    }
}

fn soliton_eval(g: &Global, path: &Path, phases: &PhaseArgs, grid: Option<&str>, t: &str, tropical: bool) -> CmdResult {
    let s = setup(path, phases)?;
    let d = &s.data;
    let Some(grid) = grid else {
        let p = match *parse_floats(t)?.as_slice() {
            [t] => TimePoint::new(0.0, 0.0, t),
            [x, y, t] => TimePoint::new(x, y, t),
            _ => return Err(Failure::Input("--t takes t or x,y,t".into())),
        };
        let r = kp_residual(d, &p);
        let der = log_tau_derivatives(d, &p);
        let roots = gamma0_divisor(d, &p, g.root_tol)?;
        return Ok(Output::Json(json!({
            "schema": SCHEMA_VERSION,
            "time": time_json(&p),
            "log_tau": sig17(mm_spectral::soliton::tau(d, &p).log),
            "u": sig17(u(d, &p)),
            "u_x": sig17(2.0 * der[3][0][0]),
            "kp_relative_residual": sig17(r.relative()),
            "gamma0_roots": roots.iter().map(|x| sig17(*x)).collect::<Vec<_>>(),
        })));
    };
    let grid = parse_grid(grid)?;
    let time = match parse_floats(t)?.as_slice() {
        &[t] => t,
        _ => return Err(Failure::Input("--t takes a single time with --grid".into())),
    };
    let mut csv = String::new();
    if tropical {
        csv.push_str("x,y,dominant,gap\n");
        for cell in tropical_regions(d, &grid, time, 0.0) {
            let subset: Vec<String> = cell.dominant.iter().map(|c| c.to_string()).collect();
            csv.push_str(&format!("{},{},{},{}\n", sig17(cell.x), sig17(cell.y), subset.join(" "), sig17(cell.gap)));
        }
    } else {
        csv.push_str("x,y,u\n");
        for (x, y) in grid.points() {
            let val = u(d, &TimePoint::new(x, y, time));
            csv.push_str(&format!("{},{},{}\n", sig17(x), sig17(y), sig17(val)));
        }
    }
    if g.format == Format::Json {
        let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
        let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
        return Ok(Output::Json(json!({"schema": SCHEMA_VERSION, "columns": header, "rows": rows})));
    }
    Ok(Output::Text(csv))
}

fn time_json(p: &TimePoint) -> Value {
    json!({"x": sig17(p.x), "y": sig17(p.y), "t": sig17(p.t)})
}

fn point_json(p: &CurvePoint) -> Value {
    json!({"component": p.component, "coord": proj_json(&p.coord)})
}

fn curve(cmd: &CurveCmd) -> CmdResult {
    let (CurveCmd::Build { tableau, phases } | CurveCmd::Report { tableau, phases } | CurveCmd::Differentials { tableau, phases }) =
        cmd;
    let g = trivalent_network(&read_tableau(tableau)?)?;
    let ph = phases_for(phases, g.n())?;
    let b = CurveBundle::new(&g, &ph)?;
    let c = &b.curve;
    let ovals: Vec<Value> = b
        .ovals
        .iter()
        .map(|o| {
            json!({
                "id": o.id,
                "arcs": o.arcs.iter().map(|a| json!({
                    "component": a.component,
                    "start": proj_json(&a.start),
                    "end": proj_json(&a.end),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(Output::Json(match cmd {
        CurveCmd::Build { .. } => {
            let mut v = c.report();
            v["schema"] = json!(SCHEMA_VERSION);
            v["ovals"] = json!(ovals);
            v
        }
        CurveCmd::Report { .. } => {
            json!({
                "schema": SCHEMA_VERSION,
                "genus": c.genus(),
                "components": c.num_components(),
                "whites": c.whites().len(),
                "blacks": c.blacks().len(),
                "k": c.network().k(),
                "ovals": ovals,
                "tree_edges": b.cycles.tree_edges,
                "relations": b.cycles.relations,
            })
        }
        CurveCmd::Differentials { .. } => {
            let ws: Vec<Value> = b
                .differentials
                .iter()
                .map(|w| {
                    let poles: Vec<Value> = w
                        .poles
                        .iter()
                        .flat_map(|(comp, list)| {
                            list.iter().map(move |(q, r)| json!({"component": comp, "at": proj_json(q), "residue": r}))
                        })
                        .collect();
                    json!({"l": w.index, "poles": poles})
                })
                .collect();
            let periods = mm_spectral::curve::a_periods(&b.differentials, &b.cycles, c);
            json!({"schema": SCHEMA_VERSION, "differentials": ws, "a_periods_over_2pi_i": periods})
        }
    }))
}

pub fn divisor_report_json(r: &DivisorReport) -> Value {
    let points: Vec<Value> = r
        .divisor
        .points
        .iter()
        .zip(&r.ovals.oval)
        .map(|(p, o)| {
            let mut v = point_json(&p.point());
            v["oval"] = json!(o);
            v["source"] = json!(p.source);
            v
        })
        .collect();
    let abel: Vec<Value> = r
        .abel
        .values
        .iter()
        .enumerate()
        .map(|(i, a)| match a {
            AbelValue::Finite { re, im } => json!({"l": i + 1, "re": sig17(*re), "im_mod_2pi": sig17(*im)}),
            AbelValue::Divergent => json!({"l": i + 1, "divergent": true}),
        })
        .collect();
    json!({
        "schema": SCHEMA_VERSION,
        "time": time_json(&r.divisor.time),
        "points": points,
        "abel": abel,
        "oval_counts": r.ovals.counts,
        "dn": r.dn.all() && r.ovals.verdict,
        "max_deviation": sig17(r.dn.max_deviation),
    })
}

fn trajectory_json(t: &Trajectory) -> Value {
    let events: Vec<Value> = t
        .events
        .iter()
        .map(|e| {
            json!({
                "s": sig17(e.s),
                "ovals": e.ovals,
                "events": e.events.iter().map(event_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "schema": SCHEMA_VERSION,
        "axis": t.axis,
        "samples": t.samples.len(),
        "events": events,
    })
}

fn event_json(e: &mm_spectral::singular::SingularEvent) -> Value {
    let chart = blowup_chart(e).ok().map(|c| match c.ratio {
        mm_spectral::singular::ChartPoint::Resolved(r) => json!(r.iter().map(|x| sig17(*x)).collect::<Vec<_>>()),
        mm_spectral::singular::ChartPoint::Unresolved { signs } => json!({"unresolved": signs}),
    });
    json!({
        "kind": e.kind,
        "edges": e.edges,
        "black": e.black,
        "composite": e.composite,
        "points": e.points.iter().map(|p| json!({
            "index": p.index,
            "component": p.component,
            "coord": proj_json(&p.coord),
            "node": proj_json(&p.node),
            "delta": sig17(p.delta),
        })).collect::<Vec<_>>(),
        "chart": chart,
    })
}

fn sweep_config(g: &Global, t0: &str, sweep: &SweepArgs) -> std::result::Result<TrajectoryConfig, Failure> {
    Ok(TrajectoryConfig {
        axis: sweep.axis.into(),
        base: parse_time(t0)?,
        start: sweep.from,
        end: sweep.to,
        steps: sweep.steps,
        eps: g.eps,
    })
}

fn divisor(g: &Global, cmd: &DivisorCmd) -> CmdResult {
    match cmd {
        DivisorCmd::At { tableau, phases, t0 } => {
            let s = setup(tableau, phases)?;
            let b = CurveBundle::new(&s.network, &s.phases)?;
            let r = analyze(&s.data, &b, &parse_time(t0)?, g.eps, g.dn_tol)?;
            Ok(Output::Json(divisor_report_json(&r)))
        }
        DivisorCmd::Trajectory {
            tableau,
            phases,
            t0,
            sweep,
        } => {
            let s = setup(tableau, phases)?;
            let b = CurveBundle::new(&s.network, &s.phases)?;
            let t = divisor_trajectory(&s.data, &b, &sweep_config(g, t0, sweep)?)?;
            Ok(Output::Json(trajectory_json(&t)))
        }
        DivisorCmd::Sample { tableau, count, seed } => {
            let shape = read_tableau(tableau)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let ranges = SampleRanges::default();
            let mut failures = Vec::new();
            let mut worst = 0.0f64;
            for i in 0..*count {
                let sample = random_sample(&mut rng, &shape, &ranges)?;
                let (o, _) = run_sample(&sample, g.eps, g.dn_tol)?;
                worst = worst.max(o.max_deviation);
                if !(o.oval_verdict && o.dn_verdict) {
                    failures.push(json!({
                        "sample": i,
                        "phases": sample.phases.values().iter().map(|x| sig17(*x)).collect::<Vec<_>>(),
                        "time": time_json(&sample.time),
                        "oval_verdict": o.oval_verdict,
                        "dn_verdict": o.dn_verdict,
                    }));
                }
            }
            let report = json!({
                "schema": SCHEMA_VERSION,
                "samples": count,
                "seed": seed,
                "max_deviation": sig17(worst),
                "failures": failures,
            });
            if failures.is_empty() {
                Ok(Output::Json(report))
            } else {
                Err(Failure::Invariant(report.to_string()))
            }
        }
    }
}

/// Point i to the node nearest to it on its component.
fn nearest_node(c: &mm_spectral::curve::MMCurve, p: &CurvePoint) -> Option<mm_spectral::proj::Proj> {
    c.nodes_on(p.component)
        .into_iter()
        .map(|(_, q)| q.coord)
        .min_by(|a, b| p.coord.chart_offset(a).abs().total_cmp(&p.coord.chart_offset(b).abs()))
}

fn singular(g: &Global, cmd: &SingularCmd) -> CmdResult {
    match cmd {
        SingularCmd::Scan {
            tableau,
            phases,
            t0,
            sweep,
        } => {
            let s = setup(tableau, phases)?;
            let b = CurveBundle::new(&s.network, &s.phases)?;
            let t = divisor_trajectory(&s.data, &b, &sweep_config(g, t0, sweep)?)?;
            let here = divisor_at(&s.data, &b.curve, &parse_time(t0)?)?;
            let mut v = trajectory_json(&t);
            v["at_t0"] = json!(detect(&here, &b.curve, g.eps).iter().map(event_json).collect::<Vec<_>>());
            Ok(Output::Json(v))
        }
        SingularCmd::Probe {
            tableau,
            phases,
            t0,
            path,
            samples,
        } => {
            let s = setup(tableau, phases)?;
            let b = CurveBundle::new(&s.network, &s.phases)?;
            let base_time = parse_time(t0)?;
            let owned: Box<dyn ProbePath + '_> = if let Some(rest) = path.strip_prefix("node:") {
                let base = divisor_at(&s.data, &b.curve, &base_time)?;
                let mut moves = Vec::new();
                for part in rest.split(';') {
                    let (i, c) = part
                        .split_once('=')
                        .ok_or_else(|| Failure::Input(format!("path term '{part}' must be i=c")))?;
                    let i: usize = i.trim().parse().map_err(|_| Failure::Input(format!("bad index '{i}'")))?;
                    let c = parse_floats(c)?[0];
                    let p = base
                        .points
                        .get(i)
                        .ok_or_else(|| Failure::Input(format!("divisor has no point {i}")))?;
                    let node = nearest_node(&b.curve, &p.point())
                        .ok_or_else(|| Failure::Input(format!("component {} has no nodes", p.component)))?;
                    moves.push((i, node, c));
                }
                Box::new(NodeApproach { base, moves })
            } else if let Some(rest) = path.strip_prefix("time:") {
                let parts: Vec<&str> = rest.split(':').collect();
                let [axis, critical, side] = parts.as_slice() else {
                    return Err(Failure::Input("time path must be time:axis:critical:side".into()));
                };
                let axis = match *axis {
                    "x" => TimeAxis::X,
                    "y" => TimeAxis::Y,
                    "t" => TimeAxis::T,
                    a => return Err(Failure::Input(format!("unknown axis '{a}'"))),
                };
                Box::new(TimeApproach {
                    data: &s.data,
                    curve: &b.curve,
                    axis,
                    base: base_time,
                    critical: parse_floats(critical)?[0],
                    side: parse_floats(side)?[0].signum(),
                })
            } else {
                return Err(Failure::Input(format!("unknown path '{path}'")));
            };
            let fits = abel_probe(owned.as_ref(), &b.differentials, &default_samples(*samples))?;
            Ok(Output::Json(json!({
                "schema": SCHEMA_VERSION,
                "path": path,
                "fits": fits.iter().map(|f| json!({
                    "l": f.l,
                    "slope": sig17(f.slope),
                    "residual": sig17(f.residual),
                    "growth": f.growth,
                })).collect::<Vec<_>>(),
            })))
        }
    }
}

fn theorem(path: &Path, max_whites: usize, force: bool, use_exclusion: bool) -> CmdResult {
    let t = read_tableau(path)?;
    let cert = verify_theorem(
        &t,
        VerifyOptions {
            max_whites,
            force,
            use_exclusion,
        },
    )?;
    let v = json!({
        "schema": SCHEMA_VERSION,
        "diagram": cert.diagram,
        "whites": cert.whites,
        "markings_checked": cert.markings_checked,
        "exclusion_rejections": cert.exclusion_rejections,
        "compatible_markings": cert.compatible_markings,
        "violations": cert.violations,
        "verified": cert.verified,
    });
    if cert.verified {
        Ok(Output::Json(v))
    } else {
        Err(Failure::Invariant(v.to_string()))
    }
}
