//! `seaforge` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use seaforge::loops::{close_loop, ClosedLoopMaps, Controller, GeneralizedPlant};
use seaforge::lti::{log_grid, RationalTF, GRID_HI, GRID_LO, POINTS_PER_DECADE};
use seaforge::repro;
use seaforge::sea::{default_plant, load_plant, SeaPlant};
use seaforge::sim::{simulate, SimScenario};
use seaforge::specs::{default_spec_set, evaluate, load_spec_set, SpecItem};
use seaforge::synth::{default_gamma1, encode, synthesize, unweighted_plant, Published, StructureKind, SynthOptions};
use seaforge::Error;

const SEED_ENV: &str = "SEAFORGE_SEED";

#[derive(Parser)]
#[command(name = "seaforge", version, about = "Stiffness control design for series elastic actuators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct LoopArgs {
    /// hinf3, pid, hpid, or file:PATH with {"K1": {...}, "K2": {...}}
    #[arg(long, default_value = "hinf3")]
    controller: String,
    /// Target stiffness as a fraction of Ks.
    #[arg(long, default_value_t = 0.6)]
    alpha: f64,
    /// Plant description (JSON); the identified prototype by default.
    #[arg(long)]
    plant: Option<PathBuf>,
}

#[derive(clap::Args, Clone)]
struct SpecArgs {
    /// Rendering bound, N·m/rad; scaled from the tuned list by default.
    #[arg(long)]
    gamma1: Option<f64>,
    /// Bound set (JSON list) replacing the default one.
    #[arg(long)]
    specs: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Structure {
    FreePair,
    Pid,
    FilteredPid,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a controller against the bound set; exit 0 iff all pass.
    Verify {
        #[command(flatten)]
        lp: LoopArgs,
        #[command(flatten)]
        sp: SpecArgs,
    },
    /// Frequency responses of closed-loop channels as CSV.
    Bode {
        #[command(flatten)]
        lp: LoopArgs,
        /// Comma-separated: Zbar, W_pass, Z, phe, phe_w, phu, pht, dt, du, nt, nu
        #[arg(long, default_value = "Zbar,W_pass")]
        channels: String,
        /// lo:hi:points_per_decade, rad/s
        #[arg(long)]
        grid: Option<String>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multi-start structured synthesis; exit 0 iff the result passes.
    Synth {
        #[arg(long, value_enum, default_value = "free-pair")]
        structure: Structure,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 0.6)]
        alpha: f64,
        #[arg(long)]
        plant: Option<PathBuf>,
        #[command(flatten)]
        sp: SpecArgs,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        /// Objective evaluations per start.
        #[arg(long, default_value_t = 4000)]
        budget: usize,
        /// Overridden by SEAFORGE_SEED.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Start the first run from this controller (same sources as --controller).
        #[arg(long)]
        warm_start: Option<String>,
        /// Controller JSON; report and manifest are written beside it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Time-domain simulation; writes PREFIX.csv and PREFIX.metrics.json.
    Sim {
        #[command(flatten)]
        lp: LoopArgs,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        allow_unstable: bool,
    },
    /// Run the acceptance battery and print a pass/fail table.
    Repro {
        /// Overridden by SEAFORGE_SEED.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the outcomes as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unstable => 4,
            Error::NoStabilizer { .. } | Error::Synthesis(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type CmdResult = std::result::Result<u8, Failure>;

#[derive(Serialize)]
struct RunManifest {
    command: String,
    args: Vec<String>,
    config_paths: Vec<String>,
    seed: Option<u64>,
    toolkit_version: &'static str,
    timestamp: String,
    outputs: Vec<String>,
}

impl RunManifest {
    fn new(command: &str, config_paths: Vec<&Path>, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config_paths: config_paths.iter().map(|p| p.display().to_string()).collect(),
            seed,
            toolkit_version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339(),
            outputs: Vec::new(),
        }
    }

    /// Records `files` and the manifest itself, then writes it.
    fn write_outputs(mut self, files: &[PathBuf], manifest: &Path) -> std::result::Result<(), Failure> {
        self.outputs.extend(files.iter().map(|p| p.display().to_string()));
        self.outputs.push(manifest.display().to_string());
        write_json(manifest, &self)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::result::Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| usage(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| usage(format!("{}: {e}", path.display())))
}

// a closed pipe downstream is not an error worth reporting
fn print_json<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn effective_seed(flag: u64) -> std::result::Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

fn plant_from(path: &Option<PathBuf>) -> std::result::Result<SeaPlant, Failure> {
    Ok(match path {
        Some(p) => load_plant(p)?,
        None => default_plant(),
    })
}

fn controller_from(source: &str) -> std::result::Result<Controller, Failure> {
    if let Some(path) = source.strip_prefix("file:") {
        return Ok(Controller::load(path)?);
    }
    let p: Published = source
        .parse()
        .map_err(|_| usage(format!("unknown controller {source:?}; expected hinf3, pid, hpid or file:PATH")))?;
    Ok(p.controller())
}

fn spec_set(plant: &SeaPlant, alpha: f64, sp: &SpecArgs) -> std::result::Result<Vec<SpecItem>, Failure> {
    if let Some(path) = &sp.specs {
        if sp.gamma1.is_some() {
            return Err(usage("--gamma1 and --specs are mutually exclusive"));
        }
        return Ok(load_spec_set(path)?);
    }
    let gamma1 = match sp.gamma1 {
        Some(g) => g,
        None => default_gamma1(plant, alpha)?,
    };
    Ok(default_spec_set(plant, gamma1)?)
}

fn closure(lp: &LoopArgs) -> std::result::Result<(SeaPlant, GeneralizedPlant, ClosedLoopMaps), Failure> {
    let plant = plant_from(&lp.plant)?;
    let g = unweighted_plant(&plant, lp.alpha)?;
    let maps = close_loop(&g, &controller_from(&lp.controller)?)?;
    Ok((plant, g, maps))
}

fn cmd_verify(lp: &LoopArgs, sp: &SpecArgs) -> CmdResult {
    let (plant, _, maps) = closure(lp)?;
    let report = evaluate(&maps, &spec_set(&plant, lp.alpha, sp)?)?;
    print_json(&report);
    Ok(if report.all_pass { 0 } else { 1 })
}

fn bode_channel<'a>(maps: &'a ClosedLoopMaps, name: &str) -> Option<&'a RationalTF> {
    Some(match name {
        "Zbar" => &maps.zbar,
        "W_pass" => &maps.w_pass,
        "Z" => &maps.z,
        "phe" => &maps.t_phe,
        "phe_w" => &maps.t_phe_w,
        "phu" => &maps.t_phu,
        "pht" => &maps.t_pht,
        "dt" => &maps.t_dt,
        "du" => &maps.t_du,
        "nt" => &maps.t_nt,
        "nu" => &maps.t_nu,
        _ => return None,
    })
}

fn parse_grid(spec: &Option<String>) -> std::result::Result<Vec<f64>, Failure> {
    let Some(spec) = spec else {
        return Ok(log_grid(GRID_LO, GRID_HI, POINTS_PER_DECADE));
    };
    let bad = || usage(format!("grid {spec:?} is not lo:hi:points_per_decade"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let per: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && hi.is_finite() && per >= 1) {
        return Err(usage(format!("grid {spec:?} needs 0 < lo < hi and at least one point per decade")));
    }
    Ok(log_grid(lo, hi, per))
}

fn cmd_bode(lp: &LoopArgs, channels: &str, grid: &Option<String>, out: &Option<PathBuf>) -> CmdResult {
    let names: Vec<&str> = channels.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(usage("no channels given"));
    }
    let grid = parse_grid(grid)?;
    let (_, _, maps) = closure(lp)?;
    let mut tfs = Vec::new();
    for n in &names {
        tfs.push(bode_channel(&maps, n).ok_or_else(|| usage(format!("unknown channel {n:?}")))?);
    }
    let mut text = String::from("omega_rad_s");
    for n in &names {
        text.push_str(&format!(",{n}_mag_abs,{n}_mag_db,{n}_phase_deg"));
    }
    text.push('\n');
    for w in grid {
        text.push_str(&format!("{w:.16e}"));
        for h in &tfs {
            let v = h.eval_unchecked(w);
            text.push_str(&format!(",{:.16e},{:.16e},{:.16e}", v.norm(), 20.0 * v.norm().log10(), v.arg().to_degrees()));
        }
        text.push('\n');
    }
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let mut paths: Vec<&Path> = Vec::new();
            if let Some(p) = &lp.plant {
                paths.push(p);
            }
            RunManifest::new("bode", paths, None).write_outputs(&[path.clone()], &path.with_extension("manifest.json"))?;
        }
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct SynthReport<'a> {
    structure: &'a seaforge::synth::ControllerStructure,
    objective: f64,
    evaluations: usize,
    seed: u64,
    starts: &'a [seaforge::synth::StartSummary],
    report: &'a seaforge::specs::SpecReport,
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    structure: Structure,
    order: usize,
    alpha: f64,
    plant_path: &Option<PathBuf>,
    sp: &SpecArgs,
    starts: usize,
    budget: usize,
    seed: u64,
    warm_start: &Option<String>,
    out: &Path,
) -> CmdResult {
    let seed = effective_seed(seed)?;
    let kind = match structure {
        Structure::FreePair if order == 0 => return Err(usage("--order must be at least 1")),
        Structure::FreePair => StructureKind::FreePair { order },
        Structure::Pid => StructureKind::Pid,
        Structure::FilteredPid => StructureKind::FilteredPid,
    };
    let plant = plant_from(plant_path)?;
    let g = unweighted_plant(&plant, alpha)?;
    let specs = spec_set(&plant, alpha, sp)?;
    let warm = match warm_start {
        Some(src) => Some(encode(kind, &controller_from(src)?)?),
        None => None,
    };
    let opts = SynthOptions { starts, budget, seed, warm_start: warm };
    let result = synthesize(&g, kind, &specs, &opts)?;

    let report_path = out.with_extension("report.json");
    write_json(out, &result.controller)?;
    let summary = SynthReport {
        structure: &result.structure,
        objective: result.objective,
        evaluations: result.evaluations,
        seed: result.seed,
        starts: &result.starts,
        report: &result.report,
    };
    write_json(&report_path, &summary)?;
    let mut paths: Vec<&Path> = Vec::new();
    if let Some(p) = plant_path {
        paths.push(p);
    }
    if let Some(p) = &sp.specs {
        paths.push(p);
    }
    RunManifest::new("synth", paths, Some(seed))
        .write_outputs(&[out.to_path_buf(), report_path], &out.with_extension("manifest.json"))?;
    print_json(&summary);
    if result.report.all_pass {
        Ok(0)
    } else {
        eprintln!("synthesis did not meet every bound (L = {})", result.objective);
        Ok(3)
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_sim(lp: &LoopArgs, scenario: &Path, out: &Path, allow_unstable: bool) -> CmdResult {
    let text = std::fs::read_to_string(scenario).map_err(|e| usage(format!("{}: {e}", scenario.display())))?;
    let sc: SimScenario = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", scenario.display())))?;
    let (_, _, maps) = closure(lp)?;
    let r = simulate(&maps, &sc, allow_unstable)?;
    let csv = with_suffix(out, ".csv");
    let metrics = with_suffix(out, ".metrics.json");
    let file = std::fs::File::create(&csv).map_err(|e| usage(format!("{}: {e}", csv.display())))?;
    r.write_csv(std::io::BufWriter::new(file))?;
    #[derive(Serialize)]
    struct MetricsFile<'a> {
        metrics: &'a seaforge::sim::Metrics,
        provenance: &'a seaforge::sim::SimProvenance,
    }
    let m = MetricsFile { metrics: &r.metrics, provenance: &r.provenance };
    write_json(&metrics, &m)?;
    let mut paths: Vec<&Path> = vec![scenario];
    if let Some(p) = &lp.plant {
        paths.push(p);
    }
    RunManifest::new("sim", paths, Some(sc.noise_seed)).write_outputs(&[csv, metrics], &with_suffix(out, ".manifest.json"))?;
    print_json(&m);
    Ok(0)
}

fn cmd_repro(seed: u64, out: &Option<PathBuf>) -> CmdResult {
    let seed = effective_seed(seed)?;
    let runs: Vec<Box<dyn Fn() -> repro::Outcome>> = vec![
        Box::new(repro::plant_fidelity),
        Box::new(repro::published_controller),
        Box::new(repro::passivity_equivalence),
        Box::new(repro::band_norm_oracle),
        Box::new(move || repro::synthesis_feasibility(seed)),
        Box::new(repro::pid_comparison),
        Box::new(repro::simulation_consistency),
        Box::new(move || repro::trend_reproduction(seed)),
    ];
    let mut outcomes = Vec::new();
    for run in runs {
        let o = run();
        let _ = writeln!(std::io::stdout().lock(), "{}", o.line());
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let _ = writeln!(std::io::stdout().lock(), "{passed}/{} criteria pass ({:.1} s)", outcomes.len(), repro::total_time(&outcomes).as_secs_f64());
    if let Some(path) = out {
        write_json(path, &outcomes)?;
    }
    Ok(if passed == outcomes.len() { 0 } else { 1 })
}

fn run(cli: Cli) -> CmdResult {
    match &cli.command {
        Command::Verify { lp, sp } => cmd_verify(lp, sp),
        Command::Bode { lp, channels, grid, out } => cmd_bode(lp, channels, grid, out),
        Command::Synth {
            structure,
            order,
            alpha,
            plant,
            sp,
            starts,
            budget,
            seed,
            warm_start,
            out,
        } => cmd_synth(*structure, *order, *alpha, plant, sp, *starts, *budget, *seed, warm_start, out),
        Command::Sim { lp, scenario, out, allow_unstable } => cmd_sim(lp, scenario, out, *allow_unstable),
        Command::Repro { seed, out } => cmd_repro(*seed, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
