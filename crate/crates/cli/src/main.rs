mod args;
mod output;

use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;
use widths_core::extremal::{best_approx_value, WidthReport};
use widths_core::kushpel::{verify_C, SignPatternReport};
use widths_core::selfcheck;
use widths_core::sk_spline::{build_fundamental_spline, maximizer_grid, NodeGrid};
use widths_core::thresholds::{check_classical_range, threshold_report, Branch};
use widths_core::{KernelParams, SeriesConfig};

use args::{Cli, Command, CommonArgs, GridArgs, SplineArgs, ThresholdArgs};
use output::{Report, Row};

/// Sign patterns longer than this are summarized instead of listed.
const MAX_LISTED_SIGNS: u64 = 4096;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Io(std::io::Error),
}

impl From<widths_core::Error> for Failure {
    fn from(e: widths_core::Error) -> Self {
        match e {
            widths_core::Error::InvalidParameter(m) => Failure::Usage(m),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<(Report, bool), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let (common, outcome) = match cli.command {
        None => (cli.widths.common.clone(), cmd_widths(&cli.widths)),
        Some(Command::Widths(a)) => (a.common.clone(), cmd_widths(&a)),
        Some(Command::Thresholds(a)) => (a.common.clone(), cmd_thresholds(&a)),
        Some(Command::Verify(a)) => (a.common.clone(), cmd_verify(&a)),
        Some(Command::Spline(a)) => (a.grid.common.clone(), cmd_spline(&a)),
        Some(Command::Sweep(a)) => (a.common.clone(), cmd_sweep(&a)),
        Some(Command::Selfcheck(a)) => (a.clone(), cmd_selfcheck(&a)),
    };
    let result = outcome.and_then(|(report, ok)| {
        report.write(common.format, common.out.as_deref())?;
        Ok(ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(3)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("WIDTHS_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("WIDTHS_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("WIDTHS_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn series_config(c: &CommonArgs) -> Result<SeriesConfig, Failure> {
    Ok(SeriesConfig::with_tol(c.tol)?)
}

fn grid_points(a: &GridArgs) -> Result<Vec<(KernelParams, u64)>, Failure> {
    let mut out = Vec::new();
    for &h in &a.h.0 {
        for &beta in &a.beta.0 {
            let p = KernelParams::new(h, beta)?;
            for &n in &a.n.0 {
                out.push((p, n));
            }
        }
    }
    Ok(out)
}

fn grid_params(a: &GridArgs) -> Row {
    Row::new()
        .with("h", a.h.0.as_slice())
        .with("beta", a.beta.0.as_slice())
        .with("n", a.n.0.iter().map(|&n| n as i64).collect::<Vec<_>>().as_slice())
        .with("tol", a.common.tol)
}

fn width_row(w: &WidthReport) -> Row {
    Row::new()
        .with("h", w.h)
        .with("beta", w.beta)
        .with("n", w.n)
        .with("value", w.value)
        .with("ln_value", w.ln_value)
        .with("theta", w.theta.theta)
        .with("gamma_n", w.gamma_n)
        .with("n_star", w.n_star)
        .with("n_h", w.n_h)
        .with("valid_E", w.valid_E)
        .with("valid_width", w.valid_width)
        .with("root_unique", w.theta.unique)
}

fn cmd_widths(a: &GridArgs) -> Outcome {
    series_config(&a.common)?;
    let rows = grid_points(a)?
        .into_par_iter()
        .map(|(p, n)| best_approx_value(n, &p).map(|w| width_row(&w)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((Report { command: "widths", params: grid_params(a), rows, checks: vec![] }, true))
}

fn cmd_thresholds(a: &ThresholdArgs) -> Outcome {
    series_config(&a.common)?;
    let mut rows = Vec::new();
    for &h in &a.h.0 {
        let r = threshold_report(h)?;
        for &beta in &a.beta.0 {
            rows.push(
                Row::new()
                    .with("h", h)
                    .with("beta", beta)
                    .with("n_star", r.n_star)
                    .with("n_h", r.n_h)
                    .with("branch", if r.branch == Branch::Direct { "direct" } else { "scanned" })
                    .with("classical_range", check_classical_range(h, beta))
                    .with("rho_integer_ok", r.rho_condition_met)
                    .with("rho_noninteger_ok", r.rho_condition_met_noninteger)
                    .with("persistence_ok", r.persistence_ok),
            );
        }
    }
    let params = Row::new().with("h", a.h.0.as_slice()).with("beta", a.beta.0.as_slice()).with("tol", a.common.tol);
    Ok((Report { command: "thresholds", params, rows, checks: vec![] }, true))
}

fn sign_string(r: &SignPatternReport) -> Option<String> {
    (r.signs.len() <= 2 * MAX_LISTED_SIGNS).then(|| {
        r.signs
            .iter()
            .map(|s| match s {
                1 => '+',
                -1 => '-',
                _ => '0',
            })
            .collect()
    })
}

fn verify_row(r: &SignPatternReport, w: Option<&WidthReport>) -> Row {
    let g = &r.gamma;
    Row::new()
        .with("h", r.params.h())
        .with("beta", r.params.beta())
        .with("n", r.n)
        .with("y0", r.y0)
        .with("satisfied", r.satisfied)
        .with("epsilon", r.epsilon.map(|e| e as i64))
        .with("margin", r.margin)
        .with("sufficient_margin", r.sufficient_margin)
        .with("zero_count", r.zero_count)
        .with("gamma1", g.gamma[0])
        .with("gamma2", g.gamma[1])
        .with("gamma3", g.gamma[2])
        .with("gamma4", g.gamma[3])
        .with("gamma5", g.gamma[4])
        .with("worst_k", g.worst_k)
        .with("gamma_sum_abs", g.sum_abs)
        .with("gamma_bound", g.lemma3_bound)
        .with("gamma_bound_holds", g.bound_holds())
        .with("decay_condition", g.umova_z_ok)
        .with("n_at_least_9", g.n_ok)
        .with("internal_bounds_hold", g.internal.all())
        .with("tail_bound", r.tail_bound)
        .with("valid_width", w.map(|w| w.valid_width))
        .with("lower_bound", r.lower_bound)
        .with("ln_lower_bound", r.ln_lower_bound)
        .with("signs", sign_string(r))
}

fn cmd_verify(a: &GridArgs) -> Outcome {
    let cfg = series_config(&a.common)?;
    let results = grid_points(a)?
        .into_par_iter()
        .map(|(p, n)| -> widths_core::Result<(SignPatternReport, WidthReport)> {
            Ok((verify_C(n, &p, &cfg)?, best_approx_value(n, &p)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows = results.iter().map(|(r, w)| verify_row(r, Some(w))).collect();
    let checks = results
        .iter()
        .map(|(r, _)| {
            Row::new()
                .with("name", "sign condition")
                .with("h", r.params.h())
                .with("beta", r.params.beta())
                .with("n", r.n)
                .with("passed", r.satisfied)
        })
        .collect();
    let ok = results.iter().all(|(r, _)| r.satisfied);
    Ok((Report { command: "verify", params: grid_params(a), rows, checks }, ok))
}

fn cmd_spline(a: &SplineArgs) -> Outcome {
    let cfg = series_config(&a.grid.common)?;
    let mut rows = Vec::new();
    for (p, n) in grid_points(&a.grid)? {
        let grid = match a.y {
            Some(y) => NodeGrid::new(n, y, &p)?,
            None => maximizer_grid(n, &p)?,
        };
        let sys = build_fundamental_spline(&grid, &p, &cfg)?;
        let pieces = sys.derivative_pieces();
        for k in 0..=2 * n {
            let (lam, d) = if k == 0 {
                (None, None)
            } else {
                (Some(sys.lambda[(k - 1) as usize]), Some(pieces[(k - 1) as usize]))
            };
            rows.push(
                Row::new()
                    .with("h", p.h())
                    .with("beta", p.beta())
                    .with("n", n)
                    .with("y", grid.y())
                    .with("k", k)
                    .with("node", grid.node(k))
                    .with("alpha", sys.alpha[k as usize])
                    .with("derivative", d)
                    .with("lambda_re", lam.map(|l| l.re))
                    .with("lambda_im", lam.map(|l| l.im)),
            );
        }
    }
    let mut params = grid_params(&a.grid);
    params.0.push(("y", a.y.into()));
    Ok((Report { command: "spline", params, rows, checks: vec![] }, true))
}

fn cmd_sweep(a: &GridArgs) -> Outcome {
    let cfg = series_config(&a.common)?;
    let rows = grid_points(a)?
        .into_par_iter()
        .map(|(p, n)| -> widths_core::Result<Row> {
            let w = best_approx_value(n, &p)?;
            let r = verify_C(n, &p, &cfg)?;
            Ok(width_row(&w).with("certified", r.satisfied).with("margin", r.margin))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((Report { command: "sweep", params: grid_params(a), rows, checks: vec![] }, true))
}

fn cmd_selfcheck(a: &CommonArgs) -> Outcome {
    let cfg = series_config(a)?;
    let results = selfcheck::run_all(&cfg);
    let ok = results.iter().all(|c| c.passed);
    let checks = results
        .into_iter()
        .map(|c| {
            eprintln!("{}", c.line());
            Row::new()
                .with("name", c.name)
                .with("passed", c.passed)
                .with("seconds", c.seconds)
                .with("budget", c.budget)
                .with("detail", c.detail)
        })
        .collect();
    Ok((Report { command: "selfcheck", params: Row::new().with("tol", a.tol), rows: vec![], checks }, ok))
}
