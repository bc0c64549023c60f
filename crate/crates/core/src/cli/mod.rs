//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input (nothing is written), 2 numerical
//! or runtime failure.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::heuristics::{
    dropped_term, lambda_critical, sigma_n, zbar_closed_form, zbar_closed_form_corrected, zbar_mc_average,
    zbar_meanfield_closed, FluctuationModel,
};
use crate::meanfield::{integrate_gpe, IntegratorConfig};
use crate::series::Window;
use crate::state::MeanFieldState;
use crate::sweep::output::{self, Metadata, BASIS_NOTE};
use crate::sweep as sw;
use config::{parse_config_text, validate_config, Command, RawConfig, ResolvedConfig};

pub const THREADS_ENV: &str = "DIMER_TRAP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "dimer-trap",
    version,
    about = "Self-trapping in a two-site Bose-Hubbard dimer: mean-field, exact and fluctuation-averaged imbalance",
    after_help = "Settings can also come from a flat key=value file (--config); flags take precedence.\n\
                  Thread count: set DIMER_TRAP_THREADS.\n\
                  Exit codes: 0 success, 1 invalid input, 2 numerical failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Time-averaged imbalance from the Gross-Pitaevskii equations.
    Meanfield(Overrides),
    /// Time-averaged imbalance from exact N-particle dynamics.
    Exact(Overrides),
    /// Closed-form and Monte-Carlo fluctuation estimates.
    Heuristic(Overrides),
    /// Sweep the interaction (and particle number) over several methods.
    Sweep(Overrides),
    /// Write z(t) for one parameter set.
    Trajectory(Overrides),
    /// Critical interaction for an imbalance threshold alpha.
    Crit(Overrides),
    /// Regenerate a figure dataset from its bundled preset.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl Figure {
    pub fn preset(&self) -> &'static str {
        match self {
            Figure::Fig1 => include_str!("../../presets/fig1.conf"),
            Figure::Fig2 => include_str!("../../presets/fig2.conf"),
            Figure::Fig3 => include_str!("../../presets/fig3.conf"),
            Figure::Fig4 => include_str!("../../presets/fig4.conf"),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Tunnelling amplitude J (> 0).
    #[arg(long, allow_hyphen_values = true)]
    pub j: Option<String>,
    /// On-site interaction U.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Total particle number N.
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    /// Dimensionless interaction U(N-1)/J.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// On-site energy of the left well.
    #[arg(long, allow_hyphen_values = true)]
    pub eps_l: Option<String>,
    /// On-site energy of the right well.
    #[arg(long, allow_hyphen_values = true)]
    pub eps_r: Option<String>,
    /// Imbalance threshold for the critical interaction, in (0, 1/2).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Averaging window 'start,end' in units of t0.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Mean-field integration step in units of t0.
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<String>,
    /// Sampling step of z(t) in units of t0 (<= 0.02).
    #[arg(long, allow_hyphen_values = true)]
    pub dt_sample: Option<String>,
    /// Monte-Carlo seed.
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
    /// Monte-Carlo samples per estimate.
    #[arg(long, allow_hyphen_values = true)]
    pub samples: Option<String>,
    /// Interaction grid: values and start:stop:step ranges, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_grid: Option<String>,
    /// Particle numbers, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub n_list: Option<String>,
    /// Sweep methods, comma separated.
    #[arg(long)]
    pub methods: Option<String>,
    /// Trajectory method: meanfield-numeric or exact-quantum.
    #[arg(long)]
    pub method: Option<String>,
    /// Trajectory end times in units of t0, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<String>,
    /// Far-tail fluctuations: neglect or include.
    #[arg(long)]
    pub tail: Option<String>,
    /// Base name of the output files.
    #[arg(long)]
    pub name: Option<String>,
}

impl Overrides {
    /// Supplied flags as config keys.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let fields: [(&'static str, &Option<String>); 19] = [
            ("j", &self.j),
            ("u", &self.u),
            ("n", &self.n),
            ("lambda", &self.lambda),
            ("eps_l", &self.eps_l),
            ("eps_r", &self.eps_r),
            ("alpha", &self.alpha),
            ("window", &self.window),
            ("dt", &self.dt),
            ("dt_sample", &self.dt_sample),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("lambda_grid", &self.lambda_grid),
            ("n_list", &self.n_list),
            ("methods", &self.methods),
            ("method", &self.method),
            ("t_end", &self.t_end),
            ("tail", &self.tail),
            ("name", &self.name),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect()
    }
}

#[derive(Debug)]
enum Failure {
    Invalid(Vec<String>),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() || matches!(e, Error::Io(_)) {
            Failure::Runtime(e.to_string())
        } else {
            Failure::Invalid(vec![e.to_string()])
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return 1;
        }
    };
    // output is buffered because the pool needs a Send closure
    let (mut out_buf, mut err_buf) = (Vec::new(), Vec::new());
    let outcome = pool.install(|| dispatch(&cli, &mut out_buf, &mut err_buf));
    let _ = stdout.write_all(&out_buf);
    let _ = stderr.write_all(&err_buf);
    match outcome {
        Ok(()) => 0,
        Err(Failure::Invalid(errors)) => {
            for e in errors {
                let _ = writeln!(stderr, "error: {e}");
            }
            1
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer (got '{v}')"))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| e.to_string())
}

fn load_file(path: &Path) -> Result<RawConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(vec![format!("cannot read config {}: {e}", path.display())]))?;
    parse_config_text(&text).map_err(|errs| {
        Failure::Invalid(errs.into_iter().map(|e| format!("{}: {e}", path.display())).collect())
    })
}

/// Merges preset, file and flags (later sources win) and validates.
fn resolve(command: Command, base: RawConfig, o: &Overrides) -> Result<ResolvedConfig, Failure> {
    let mut raw = base;
    if let Some(path) = &o.config {
        raw.extend(load_file(path)?);
    }
    raw.extend(o.pairs().into_iter().map(|(k, v)| (k.to_string(), v)));
    validate_config(command, &raw).map_err(Failure::Invalid)
}

fn metadata(cfg: &ResolvedConfig) -> Metadata {
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut meta = vec![
        ("created".to_string(), format!("unix:{created}")),
        ("code_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("basis".to_string(), BASIS_NOTE.to_string()),
        ("time_unit".to_string(), "t0 = 2 pi hbar / J, hbar = 1".to_string()),
    ];
    meta.extend(cfg.echo());
    meta
}

fn echo(out: &mut dyn Write, cfg: &ResolvedConfig) -> std::io::Result<()> {
    for (k, v) in cfg.echo() {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

fn warn_ignored(err: &mut dyn Write, cfg: &ResolvedConfig) {
    for k in &cfg.ignored {
        let _ = writeln!(err, "note: '{k}' is not used by {}", cfg.command.as_str());
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let (command, base, o) = match &cli.command {
        Cmd::Meanfield(o) => (Command::Meanfield, RawConfig::new(), o),
        Cmd::Exact(o) => (Command::Exact, RawConfig::new(), o),
        Cmd::Heuristic(o) => (Command::Heuristic, RawConfig::new(), o),
        Cmd::Sweep(o) => (Command::Sweep, RawConfig::new(), o),
        Cmd::Trajectory(o) => (Command::Trajectory, RawConfig::new(), o),
        Cmd::Crit(o) => (Command::Crit, RawConfig::new(), o),
        Cmd::Reproduce { figure, overrides } => {
            let preset = parse_config_text(figure.preset()).expect("bundled presets parse");
            let command = preset
                .get("command")
                .and_then(|c| Command::parse(c))
                .expect("bundled presets name their command");
            (command, preset, overrides)
        }
    };
    let cfg = resolve(command, base, o)?;
    warn_ignored(err, &cfg);
    let dir = config::output_dir(o.out.as_deref());
    match command {
        Command::Meanfield => cmd_meanfield(&cfg, out),
        Command::Exact => cmd_exact(&cfg, out),
        Command::Heuristic => cmd_heuristic(&cfg, out),
        Command::Sweep => cmd_sweep(&cfg, &dir, out, err),
        Command::Trajectory => cmd_trajectory(&cfg, &dir, out),
        Command::Crit => cmd_crit(&cfg, &dir, out),
    }
}

fn cmd_meanfield(cfg: &ResolvedConfig, out: &mut dyn Write) -> Result<(), Failure> {
    let p = cfg.params()?;
    let t0 = p.t0();
    let window = Window::in_units(cfg.window.0, cfg.window.1, t0)?;
    let sample_every = (cfg.dt_sample / cfg.dt).round().max(1.0) as usize;
    let icfg = IntegratorConfig::new(cfg.dt * t0, window.end, sample_every)?;
    let traj = integrate_gpe(&MeanFieldState::all_left(), &p, &icfg)?;
    let zbar = traj.z.time_average(window)?;
    echo(out, cfg)?;
    writeln!(out, "zbar={zbar}")?;
    writeln!(out, "zbar_closed={}", zbar_meanfield_closed(p.lambda()))?;
    writeln!(out, "z_min={}", traj.z.min())?;
    writeln!(out, "halvings={}", traj.halvings)?;
    writeln!(out, "dt={}", traj.dt)?;
    writeln!(out, "norm_drift={}", traj.norm_drift)?;
    writeln!(out, "energy_drift={}", traj.energy_drift)?;
    Ok(())
}

fn cmd_exact(cfg: &ResolvedConfig, out: &mut dyn Write) -> Result<(), Failure> {
    let p = cfg.params()?;
    let window = Window::in_units(cfg.window.0, cfg.window.1, p.t0())?;
    let zbar = crate::exact::exact_zbar(&p, window, cfg.dt_sample * p.t0())?;
    echo(out, cfg)?;
    writeln!(out, "zbar={zbar}")?;
    Ok(())
}

fn cmd_heuristic(cfg: &ResolvedConfig, out: &mut dyn Write) -> Result<(), Failure> {
    let lambda = cfg.lambda.expect("validated");
    echo(out, cfg)?;
    writeln!(out, "zbar_meanfield={}", zbar_meanfield_closed(lambda))?;
    if let Some(n) = cfg.n {
        let model = FluctuationModel::new(n)?;
        let mc = zbar_mc_average(lambda, n, cfg.samples, cfg.seed, cfg.tail)?;
        writeln!(out, "sigma_n={}", sigma_n(n))?;
        writeln!(out, "x0={}", FluctuationModel::x0(lambda))?;
        writeln!(out, "x_star={}", model.x_star(lambda))?;
        writeln!(out, "zbar_closed={}", zbar_closed_form(lambda, n))?;
        writeln!(out, "zbar_closed_corrected={}", zbar_closed_form_corrected(lambda, n))?;
        writeln!(out, "zbar_mc={}", mc.mean)?;
        writeln!(out, "zbar_mc_err={}", mc.std_err)?;
        writeln!(out, "dropped_term={}", dropped_term(lambda, n))?;
    }
    Ok(())
}

fn write_file(path: &Path, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), Failure> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    fs::write(path, buf).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_sweep(cfg: &ResolvedConfig, dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let scfg = cfg.sweep_config();
    scfg.validate()?;
    let log = std::sync::Mutex::new(Vec::<String>::new());
    let result = sw::run_sweep_with(&scfg, |c| {
        let n = c.n.map(|n| format!(" N={n}")).unwrap_or_default();
        let line = match &c.outcome {
            Ok(v) => format!("lambda={}{n} {} zbar={}", c.lambda, c.method, v.zbar),
            Err(e) => format!("lambda={}{n} {} FAILED: {e}", c.lambda, c.method),
        };
        log.lock().expect("log lock").push(line);
    })?;
    for line in log.into_inner().expect("log lock") {
        let _ = writeln!(err, "{line}");
    }
    ensure_dir(dir)?;
    let meta = metadata(cfg);
    let csv = dir.join(format!("{}.csv", cfg.name));
    write_file(&csv, |w| output::write_sweep_csv(w, &meta, &result))?;
    let plt = dir.join(format!("{}.plt", cfg.name));
    write_file(&plt, |w| w.write_all(output::sweep_plt(&cfg.name, &result).as_bytes()))?;
    echo(out, cfg)?;
    writeln!(out, "cells={}", result.cells.len())?;
    writeln!(out, "failed={}", result.failures())?;
    writeln!(out, "wrote={}", csv.display())?;
    writeln!(out, "wrote={}", plt.display())?;
    if result.failures() > 0 {
        return Err(Failure::Runtime(format!(
            "{} of {} cells failed; see the status column",
            result.failures(),
            result.cells.len()
        )));
    }
    Ok(())
}

fn cmd_trajectory(cfg: &ResolvedConfig, dir: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let p = cfg.params()?;
    let t0 = p.t0();
    let mut series = Vec::new();
    for &t_end in &cfg.t_end {
        series.push((t_end, sw::run_trajectory(&p, t_end * t0, cfg.method, cfg.dt_sample * t0)?));
    }
    ensure_dir(dir)?;
    let meta = metadata(cfg);
    let single = series.len() == 1;
    let mut files = Vec::new();
    echo(out, cfg)?;
    for (t_end, z) in &series {
        let file = if single {
            format!("{}.csv", cfg.name)
        } else {
            format!("{}_{t_end}t0.csv", cfg.name)
        };
        let path = dir.join(&file);
        write_file(&path, |w| output::write_trajectory_csv(w, &meta, z, t0))?;
        writeln!(out, "t_end={t_end} z_min={} z_max={}", z.min(), z.max())?;
        writeln!(out, "wrote={}", path.display())?;
        files.push(file);
    }
    let plt = dir.join(format!("{}.plt", cfg.name));
    write_file(&plt, |w| w.write_all(output::trajectory_plt(&cfg.name, &files).as_bytes()))?;
    writeln!(out, "wrote={}", plt.display())?;
    Ok(())
}

fn cmd_crit(cfg: &ResolvedConfig, dir: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    if cfg.n_list.is_empty() {
        let n = cfg.n.expect("validated");
        let c = lambda_critical(n as f64, cfg.alpha)?;
        echo(out, cfg)?;
        writeln!(out, "lambda_alpha={}", c.full)?;
        writeln!(out, "asymptote={}", c.asymptote)?;
        match sw::closed_form_crossing(n, cfg.alpha) {
            Ok(x) => writeln!(out, "lambda_bisection={x}")?,
            Err(e) => writeln!(out, "lambda_bisection=error: {e}")?,
        }
        return Ok(());
    }
    let rows = sw::run_lambda_critical_curve(&cfg.n_list, cfg.alpha)?;
    ensure_dir(dir)?;
    let meta = metadata(cfg);
    let csv = dir.join(format!("{}.csv", cfg.name));
    write_file(&csv, |w| output::write_critical_csv(w, &meta, &rows))?;
    let plt = dir.join(format!("{}.plt", cfg.name));
    write_file(&plt, |w| w.write_all(output::critical_plt(&cfg.name).as_bytes()))?;
    echo(out, cfg)?;
    for r in &rows {
        writeln!(out, "N={} lambda_alpha={}", r.n, r.lambda_alpha)?;
    }
    writeln!(out, "wrote={}", csv.display())?;
    writeln!(out, "wrote={}", plt.display())?;
    Ok(())
}
