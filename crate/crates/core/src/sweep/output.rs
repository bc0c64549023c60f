//! CSV datasets with a `# key=value` metadata header, and gnuplot scripts
//! that plot them.

use std::fmt::Write as _;
use std::io::{self, Write};

use super::{CriticalRow, Method, SweepResult};
use crate::series::TimeSeries;

/// First line of every file written here. Config loading uses it to tell a
/// dataset (whose header may be fed back as a config) from a config file.
pub const SIGNATURE: &str = "# dimer-trap";

pub const BASIS_NOTE: &str = "|N-n,n> with n = particles in the right well; index 0 is |N,0>";

/// Ordered metadata written as the file header.
pub type Metadata = Vec<(String, String)>;

pub fn write_header<W: Write>(w: &mut W, meta: &[(String, String)]) -> io::Result<()> {
    writeln!(w, "{SIGNATURE} {}", env!("CARGO_PKG_VERSION"))?;
    for (k, v) in meta {
        writeln!(w, "# {k}={}", v.replace(['\n', '\r'], " "))?;
    }
    Ok(())
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

pub fn write_sweep_csv<W: Write>(w: &mut W, meta: &[(String, String)], result: &SweepResult) -> io::Result<()> {
    write_header(w, meta)?;
    writeln!(w, "lambda,N,method,zbar,err,status")?;
    for c in &result.cells {
        let n = c.n.map(|n| n.to_string()).unwrap_or_default();
        match &c.outcome {
            Ok(v) => {
                let err = v.err.map(|e| e.to_string()).unwrap_or_default();
                writeln!(w, "{},{n},{},{},{err},ok", c.lambda, c.method, v.zbar)?;
            }
            Err(msg) => writeln!(w, "{},{n},{},,,{}", c.lambda, c.method, quote(&format!("error: {msg}")))?,
        }
    }
    Ok(())
}

fn gnuplot_preamble(out: &mut String, name: &str) {
    let _ = writeln!(out, "set terminal pngcairo size 1200,900");
    let _ = writeln!(out, "set output '{name}.png'");
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set key top left");
}

fn series_clause(file: &str, method: Method, n: Option<u64>) -> String {
    let filter = match n {
        Some(n) => format!("strcol(3) eq '{method}' && $2 == {n}"),
        None => format!("strcol(3) eq '{method}'"),
    };
    let title = match n {
        Some(n) => format!("{method} N={n}"),
        None => method.to_string(),
    };
    let style = if method.is_closed_form() { "lines" } else { "points" };
    format!("'{file}' using 1:({filter} ? $4 : NaN) with {style} title '{title}'")
}

/// Gnuplot script for a sweep dataset `<name>.csv`: one panel per particle
/// number, numeric and exact results as points, closed forms as lines.
pub fn sweep_plt(name: &str, result: &SweepResult) -> String {
    let cfg = &result.config;
    let file = format!("{name}.csv");
    let mut out = String::new();
    gnuplot_preamble(&mut out, name);
    let _ = writeln!(out, "set xlabel 'Lambda'");
    let _ = writeln!(out, "set ylabel 'time-averaged z'");
    let _ = writeln!(out, "set yrange [-0.05:1.05]");
    let n_dependent = cfg.methods.iter().any(|m| m.needs_n());
    let panels: Vec<Option<u64>> = if n_dependent {
        cfg.n_list.iter().map(|&n| Some(n)).collect()
    } else {
        vec![None]
    };
    if panels.len() > 1 {
        let cols = 2;
        let rows = panels.len().div_ceil(cols);
        let _ = writeln!(out, "set multiplot layout {rows},{cols}");
    }
    for panel in &panels {
        if let Some(n) = panel {
            let _ = writeln!(out, "set title 'N = {n}'");
        }
        let clauses: Vec<String> = cfg
            .methods
            .iter()
            .map(|&m| series_clause(&file, m, if m.needs_n() { *panel } else { None }))
            .collect();
        let _ = writeln!(out, "plot {}", clauses.join(", \\\n     "));
    }
    if panels.len() > 1 {
        let _ = writeln!(out, "unset multiplot");
    }
    out
}

/// Writes `t, t/t0, z` rows.
pub fn write_trajectory_csv<W: Write>(
    w: &mut W,
    meta: &[(String, String)],
    z: &TimeSeries,
    t0: f64,
) -> io::Result<()> {
    write_header(w, meta)?;
    writeln!(w, "t,t_over_t0,z")?;
    for (t, v) in z.iter() {
        writeln!(w, "{t},{},{v}", t / t0)?;
    }
    Ok(())
}

/// Gnuplot script stacking the trajectory files vertically.
pub fn trajectory_plt(name: &str, files: &[String]) -> String {
    let mut out = String::new();
    gnuplot_preamble(&mut out, name);
    let _ = writeln!(out, "set xlabel 't / t0'");
    let _ = writeln!(out, "set ylabel 'z(t)'");
    let _ = writeln!(out, "set yrange [-1.05:1.05]");
    if files.len() > 1 {
        let _ = writeln!(out, "set multiplot layout {},1", files.len());
    }
    for f in files {
        let _ = writeln!(out, "plot '{f}' using 2:3 with lines notitle");
    }
    if files.len() > 1 {
        let _ = writeln!(out, "unset multiplot");
    }
    out
}

pub fn write_critical_csv<W: Write>(w: &mut W, meta: &[(String, String)], rows: &[CriticalRow]) -> io::Result<()> {
    write_header(w, meta)?;
    writeln!(w, "N,lambda_alpha,asymptote,lambda_bisection,status")?;
    for r in rows {
        match &r.crossing {
            Ok(x) => writeln!(w, "{},{},{},{x},ok", r.n, r.lambda_alpha, r.asymptote)?,
            Err(msg) => writeln!(
                w,
                "{},{},{},,{}",
                r.n,
                r.lambda_alpha,
                r.asymptote,
                quote(&format!("error: {msg}"))
            )?,
        }
    }
    Ok(())
}

pub fn critical_plt(name: &str) -> String {
    let mut out = String::new();
    gnuplot_preamble(&mut out, name);
    let _ = writeln!(out, "set logscale x");
    let _ = writeln!(out, "set xlabel 'N'");
    let _ = writeln!(out, "set ylabel 'Lambda_alpha'");
    let _ = writeln!(
        out,
        "plot '{name}.csv' using 1:2 with linespoints title 'full', \\\n     '{name}.csv' using 1:3 with lines title 'large-N asymptote'"
    );
    out
}
