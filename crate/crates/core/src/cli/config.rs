//! Flat `key=value` configuration: the key table shared by flags and files,
//! file parsing, merging and validation into a resolved run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::heuristics::{FarTail, MIN_MC_SAMPLES};
use crate::params::{DimerParams, MEAN_FIELD_N};
use crate::sweep::output::SIGNATURE;
use crate::sweep::{Method, SweepConfig};

/// Every configuration key with its help text. Flags are the keys with `_`
/// replaced by `-`.
pub const KEYS: &[(&str, &str)] = &[
    ("j", "tunnelling amplitude J (> 0)"),
    ("u", "on-site interaction U"),
    ("n", "total particle number N"),
    ("lambda", "dimensionless interaction U(N-1)/J"),
    ("eps_l", "on-site energy of the left well"),
    ("eps_r", "on-site energy of the right well"),
    ("alpha", "imbalance threshold for the critical interaction, in (0, 1/2)"),
    ("window", "averaging window 'start,end' in units of t0"),
    ("dt", "mean-field integration step in units of t0"),
    ("dt_sample", "sampling step of z(t) in units of t0 (<= 0.02)"),
    ("seed", "Monte-Carlo seed"),
    ("samples", "Monte-Carlo samples per estimate"),
    ("lambda_grid", "interaction grid: values and start:stop:step ranges, comma separated"),
    ("n_list", "particle numbers, comma separated"),
    ("methods", "sweep methods, comma separated"),
    ("method", "trajectory method: meanfield-numeric or exact-quantum"),
    ("t_end", "trajectory end times in units of t0, comma separated"),
    ("tail", "far-tail fluctuations: neglect or include"),
    ("name", "base name of the output files"),
];

/// Keys only meaningful inside a file.
pub const FILE_ONLY_KEYS: &[&str] = &["command"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Meanfield,
    Exact,
    Heuristic,
    Sweep,
    Trajectory,
    Crit,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Meanfield => "meanfield",
            Command::Exact => "exact",
            Command::Heuristic => "heuristic",
            Command::Sweep => "sweep",
            Command::Trajectory => "trajectory",
            Command::Crit => "crit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Command::Meanfield,
            Command::Exact,
            Command::Heuristic,
            Command::Sweep,
            Command::Trajectory,
            Command::Crit,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
    }

    /// Keys the command reads, in echo order.
    pub fn keys(&self) -> &'static [&'static str] {
        match self {
            Command::Meanfield => &["j", "u", "n", "lambda", "eps_l", "eps_r", "window", "dt", "dt_sample"],
            Command::Exact => &["j", "u", "n", "lambda", "eps_l", "eps_r", "window", "dt_sample"],
            Command::Heuristic => &["lambda", "n", "samples", "seed", "tail"],
            Command::Sweep => &[
                "name", "lambda_grid", "n_list", "methods", "window", "dt", "dt_sample", "seed", "samples", "tail",
            ],
            Command::Trajectory => &["name", "j", "u", "n", "lambda", "eps_l", "eps_r", "method", "t_end", "dt_sample"],
            Command::Crit => &["name", "alpha", "n", "n_list"],
        }
    }
}

pub type RawConfig = BTreeMap<String, String>;

fn is_known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key) || FILE_ONLY_KEYS.contains(&key)
}

/// Parses a flat `key=value` file. Blank lines and `#` comments are skipped;
/// a `# key=value` comment with a known key counts as a setting, so dataset
/// headers can be reused as configs. In a dataset (a file starting with the
/// output signature) parsing stops at the first data line.
pub fn parse_config_text(text: &str) -> Result<RawConfig, Vec<String>> {
    let dataset = text.starts_with(SIGNATURE);
    let mut out = RawConfig::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (body, comment) = match line.strip_prefix('#') {
            Some(rest) => (rest.trim(), true),
            None => (line, false),
        };
        let Some((k, v)) = body.split_once('=') else {
            if comment {
                continue;
            }
            if dataset {
                break;
            }
            errors.push(format!("line {}: expected key=value, got '{line}'", i + 1));
            continue;
        };
        let key = k.trim().replace('-', "_");
        if !is_known(&key) {
            if !comment {
                errors.push(format!("line {}: unknown key '{}'", i + 1, k.trim()));
            }
            continue;
        }
        out.insert(key, v.trim().to_string());
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

/// Expands a grid description: comma separated values and `start:stop:step` ranges
/// (inclusive of `stop` up to rounding). The union is sorted and values
/// closer than 1e-9 merged.
pub fn parse_lambda_grid(text: &str) -> Result<Vec<f64>, String> {
    let mut vals = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => vals.push(parse_f64(v).map_err(|e| format!("lambda_grid: {e}"))?),
            [a, b, s] => {
                let (a, b, s) = (
                    parse_f64(a).map_err(|e| format!("lambda_grid: {e}"))?,
                    parse_f64(b).map_err(|e| format!("lambda_grid: {e}"))?,
                    parse_f64(s).map_err(|e| format!("lambda_grid: {e}"))?,
                );
                if !(s > 0.0) || b < a {
                    return Err(format!("lambda_grid: range '{item}' needs start <= stop and step > 0"));
                }
                let count = ((b - a) / s + 1e-9).floor() as usize;
                if count > 1_000_000 {
                    return Err(format!("lambda_grid: range '{item}' has too many points"));
                }
                // round away the accumulated binary error of a + k s
                vals.extend((0..=count).map(|k| ((a + k as f64 * s) * 1e12).round() / 1e12));
            }
            _ => return Err(format!("lambda_grid: cannot parse '{item}'")),
        }
    }
    vals.sort_by(f64::total_cmp);
    vals.dedup_by(|b, a| (*b - *a).abs() < 1e-9);
    Ok(vals)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{}' is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{}' is not finite", s.trim()))
    }
}

fn fmt_list<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Fully resolved configuration of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub command: Command,
    pub j: f64,
    pub u: Option<f64>,
    pub n: Option<u64>,
    pub lambda: Option<f64>,
    pub eps_l: f64,
    pub eps_r: f64,
    pub alpha: f64,
    pub window: (f64, f64),
    pub dt: f64,
    pub dt_sample: f64,
    pub seed: u64,
    pub samples: usize,
    pub lambda_grid: Vec<f64>,
    pub n_list: Vec<u64>,
    pub methods: Vec<Method>,
    pub method: Method,
    pub t_end: Vec<f64>,
    pub tail: FarTail,
    pub name: String,
    /// Keys supplied but not read by the command.
    pub ignored: Vec<String>,
}

impl ResolvedConfig {
    /// Resolved values of the keys the command reads, as echoed into output
    /// headers. Feeding them back as a config reproduces the run.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![("command".to_string(), self.command.as_str().to_string())];
        for &key in self.command.keys() {
            let v = match key {
                "j" => Some(self.j.to_string()),
                "u" => self.u.map(|u| u.to_string()),
                "n" => self.n.map(|n| n.to_string()),
                "lambda" => self.lambda.map(|l| l.to_string()),
                "eps_l" => Some(self.eps_l.to_string()),
                "eps_r" => Some(self.eps_r.to_string()),
                "alpha" => Some(self.alpha.to_string()),
                "window" => Some(format!("{},{}", self.window.0, self.window.1)),
                "dt" => Some(self.dt.to_string()),
                "dt_sample" => Some(self.dt_sample.to_string()),
                "seed" => Some(self.seed.to_string()),
                "samples" => Some(self.samples.to_string()),
                "lambda_grid" => Some(fmt_list(&self.lambda_grid)),
                "n_list" => (!self.n_list.is_empty()).then(|| fmt_list(&self.n_list)),
                "methods" => Some(fmt_list(&self.methods)),
                "method" => Some(self.method.to_string()),
                "t_end" => Some(fmt_list(&self.t_end)),
                "tail" => Some(self.tail.as_str().to_string()),
                "name" => Some(self.name.clone()),
                _ => None,
            };
            if let Some(v) = v {
                out.push((key.to_string(), v));
            }
        }
        out
    }

    /// Physical parameters of a single-run command. Mean-field runs without
    /// an explicit `N` use the two-particle reference system.
    pub fn params(&self) -> crate::Result<DimerParams> {
        let p = match (self.u, self.n) {
            (Some(u), Some(n)) => DimerParams::new(self.j, u, n)?,
            _ => {
                let lambda = self.lambda.unwrap_or(0.0);
                DimerParams::from_lambda(lambda, self.n.unwrap_or(MEAN_FIELD_N), self.j)?
            }
        };
        p.with_onsite(self.eps_l, self.eps_r)
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            name: self.name.clone(),
            lambda_grid: self.lambda_grid.clone(),
            n_list: self.n_list.clone(),
            window: self.window,
            methods: self.methods.clone(),
            seed: self.seed,
            samples: self.samples,
            dt: self.dt,
            dt_sample: self.dt_sample,
            tail: self.tail,
        }
    }
}

struct Reader<'a> {
    raw: &'a RawConfig,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(String::as_str)
    }

    fn f64(&mut self, key: &str) -> Option<f64> {
        let s = self.get(key)?;
        match parse_f64(s) {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{key}: {e}"));
                None
            }
        }
    }

    fn uint(&mut self, key: &str) -> Option<u64> {
        let s = self.get(key)?;
        match s.trim().parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(format!("{key}: '{s}' is not a non-negative integer"));
                None
            }
        }
    }

    fn list<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Option<Vec<T>> {
        let s = self.get(key)?.to_string();
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match parse(item) {
                Ok(v) => out.push(v),
                Err(e) => {
                    self.errors.push(format!("{key}: {e}"));
                    return None;
                }
            }
        }
        Some(out)
    }
}

/// Validates a merged raw configuration for `command`, reporting every
/// violated constraint at once.
pub fn validate_config(command: Command, raw: &RawConfig) -> Result<ResolvedConfig, Vec<String>> {
    let mut r = Reader { raw, errors: Vec::new() };
    let reads = command.keys();
    let ignored: Vec<String> = raw
        .keys()
        .filter(|k| k.as_str() != "command" && !reads.contains(&k.as_str()))
        .cloned()
        .collect();
    let uses = |k: &str| reads.contains(&k);

    let j = if uses("j") { r.f64("j").unwrap_or(1.0) } else { 1.0 };
    if !(j > 0.0) {
        r.errors.push(format!("J must be positive (got {j})"));
    }
    let u = if uses("u") { r.f64("u") } else { None };
    let n = if uses("n") { r.uint("n") } else { None };
    let lambda_in = if uses("lambda") { r.f64("lambda") } else { None };
    if n == Some(0) {
        r.errors.push("N must be at least 1 (got 0)".into());
    }

    // interaction: lambda, or U together with N
    let mut lambda = lambda_in;
    match (lambda_in, u, n) {
        (Some(l), Some(u), Some(n)) if j > 0.0 && n >= 1 => {
            let derived = u * (n as f64 - 1.0) / j;
            if (derived - l).abs() > 1e-9 * l.abs().max(1.0) {
                r.errors.push(format!(
                    "inconsistent interaction: lambda = {l} but U(N-1)/J = {derived} (U = {u}, N = {n}, J = {j})"
                ));
            }
        }
        (Some(_), Some(_), None) => r.errors.push("lambda and U both given but N is missing".into()),
        (None, Some(_), None) => r.errors.push("U given without N; give N or use lambda".into()),
        (None, Some(u), Some(n)) if j > 0.0 => lambda = Some(u * (n as f64 - 1.0) / j),
        _ => {}
    }
    if let (Some(l), None, Some(1)) = (lambda_in, u, n) {
        if l != 0.0 {
            r.errors.push(format!("lambda = {l} needs N >= 2"));
        }
    }
    if let Some(l) = lambda {
        if l < 0.0 {
            r.errors.push(format!("lambda must be non-negative (got {l})"));
        }
    }

    let eps_l = if uses("eps_l") { r.f64("eps_l").unwrap_or(0.0) } else { 0.0 };
    let eps_r = if uses("eps_r") { r.f64("eps_r").unwrap_or(0.0) } else { 0.0 };

    let alpha = if uses("alpha") { r.f64("alpha").unwrap_or(1e-3) } else { 1e-3 };
    if !(alpha > 0.0 && alpha < 0.5) {
        r.errors.push(format!("alpha must lie in (0, 1/2) (got {alpha})"));
    }

    let window = if uses("window") {
        match r.list("window", parse_f64) {
            Some(w) if w.len() == 2 => (w[0], w[1]),
            Some(w) => {
                r.errors.push(format!("window needs two values start,end (got {})", w.len()));
                (0.0, 100.0)
            }
            None => (0.0, 100.0),
        }
    } else {
        (0.0, 100.0)
    };
    if !(window.0 >= 0.0 && window.1 > window.0) {
        r.errors.push(format!("window must satisfy 0 <= start < end (got {},{})", window.0, window.1));
    }

    let dt = if uses("dt") { r.f64("dt").unwrap_or(1e-3) } else { 1e-3 };
    if !(dt > 0.0) {
        r.errors.push(format!("dt must be positive (got {dt})"));
    }
    let dt_sample = if uses("dt_sample") { r.f64("dt_sample").unwrap_or(1e-2) } else { 1e-2 };
    if !(dt_sample > 0.0 && dt_sample <= 0.02) {
        r.errors.push(format!("dt_sample must lie in (0, 0.02] t0 (got {dt_sample})"));
    }

    let seed = if uses("seed") { r.uint("seed").unwrap_or(1) } else { 1 };
    let samples = if uses("samples") {
        r.uint("samples").unwrap_or(1_000_000) as usize
    } else {
        1_000_000
    };
    if samples < MIN_MC_SAMPLES {
        r.errors.push(format!("samples must be at least {MIN_MC_SAMPLES} (got {samples})"));
    }

    let lambda_grid = if uses("lambda_grid") {
        match r.get("lambda_grid").map(parse_lambda_grid) {
            Some(Ok(g)) => g,
            Some(Err(e)) => {
                r.errors.push(e);
                Vec::new()
            }
            None => Vec::new(),
        }
    } else {
        Vec::new()
    };
    if lambda_grid.iter().any(|&l| l < 0.0) {
        r.errors.push("lambda_grid values must be non-negative".into());
    }
    let n_list = if uses("n_list") {
        r.list("n_list", |s| s.parse::<u64>().map_err(|_| format!("'{s}' is not a non-negative integer")))
            .unwrap_or_default()
    } else {
        Vec::new()
    };
    if n_list.contains(&0) {
        r.errors.push("n_list entries must be at least 1".into());
    }
    let methods = if uses("methods") {
        r.list("methods", |s| s.parse::<Method>().map_err(|e| e.to_string()))
            .unwrap_or_else(|| SweepConfig::default().methods)
    } else {
        SweepConfig::default().methods
    };
    let method = if uses("method") {
        match r.get("method").map(str::parse::<Method>) {
            Some(Ok(m)) => m,
            Some(Err(e)) => {
                r.errors.push(format!("method: {e}"));
                Method::ExactQuantum
            }
            None => Method::ExactQuantum,
        }
    } else {
        Method::ExactQuantum
    };
    let t_end = if uses("t_end") {
        r.list("t_end", parse_f64).unwrap_or_else(|| vec![100.0])
    } else {
        vec![100.0]
    };
    let tail = match r.get("tail").filter(|_| uses("tail")).map(str::parse::<FarTail>) {
        Some(Ok(t)) => t,
        Some(Err(e)) => {
            r.errors.push(format!("tail: {e}"));
            FarTail::Neglect
        }
        None => FarTail::Neglect,
    };
    let name = r.get("name").filter(|_| uses("name")).unwrap_or(command.as_str()).to_string();
    if name.is_empty() || name.contains(['/', '\\']) {
        r.errors.push(format!("name must be a plain file stem (got '{name}')"));
    }

    // per-command requirements
    match command {
        Command::Meanfield | Command::Heuristic => {
            if lambda.is_none() {
                r.errors.push("lambda (or U with N) is required".into());
            }
        }
        Command::Exact => {
            if lambda.is_none() {
                r.errors.push("lambda (or U with N) is required".into());
            }
            if n.is_none() {
                r.errors.push("N is required for exact dynamics".into());
            }
        }
        Command::Trajectory => {
            if lambda.is_none() {
                r.errors.push("lambda (or U with N) is required".into());
            }
            match method {
                Method::ExactQuantum if n.is_none() => r.errors.push("N is required for exact dynamics".into()),
                Method::ExactQuantum | Method::MeanfieldNumeric => {}
                m => r.errors.push(format!("trajectory method must be meanfield-numeric or exact-quantum (got {m})")),
            }
            if t_end.is_empty() || t_end.iter().any(|&t| !(t > 0.0)) {
                r.errors.push("t_end values must be positive".into());
            }
        }
        Command::Sweep => {
            if lambda_grid.is_empty() {
                r.errors.push("lambda_grid is required and must not be empty".into());
            }
            if methods.is_empty() {
                r.errors.push("methods must not be empty".into());
            }
            if methods.iter().any(|m| m.needs_n()) && n_list.is_empty() {
                r.errors.push("n_list is required by the N-dependent methods".into());
            }
        }
        Command::Crit => {
            if n.is_none() && n_list.is_empty() {
                r.errors.push("N or n_list is required".into());
            }
        }
    }

    if !r.errors.is_empty() {
        return Err(r.errors);
    }
    Ok(ResolvedConfig {
        command,
        j,
        u,
        n,
        lambda,
        eps_l,
        eps_r,
        alpha,
        window,
        dt,
        dt_sample,
        seed,
        samples,
        lambda_grid,
        n_list,
        methods,
        method,
        t_end,
        tail,
        name,
        ignored,
    })
}

/// Output directory; not part of the echoed configuration.
pub fn output_dir(out: Option<&str>) -> PathBuf {
    PathBuf::from(out.unwrap_or("."))
}
