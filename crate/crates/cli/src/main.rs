mod args;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command, Flags, Output};
use extremal::analytics::{barrier_crossing_probability, remark_audit};
use extremal::experiments::{
    run_bm_extreme, run_gbm_convergence, run_hitting_concentration, run_pricing_error_law,
    ExperimentConfig,
};
use extremal::paths::{
    with_thread_count, BarrierSpec, Conditioning, ModelParams, SamplerChoice, TimeGrid,
};
use extremal::pricing::{quote, McConfig, Payoff};
use extremal::report::fmt_f64;
use extremal::Error;

const CONVERGE_T: &[f64] = &[0.4, 0.2, 0.1, 0.05, 0.025];
const HITTING_T: &[f64] = &[0.1, 0.05, 0.01, 0.005];
const EPSILONS: &[f64] = &[1.0, 0.5, 1.0 / 3.0, 0.25];

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Compute(other.to_string()),
        }
    }
}

/// Rendered output plus an optional failure diagnostic raised after the
/// output was produced (degenerate weights).
struct Emitted {
    body: String,
    warning: Option<String>,
}

impl Emitted {
    fn ok(body: String) -> Self {
        Self {
            body,
            warning: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            let first = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("error: invalid usage");
            eprintln!("{first}");
            return ExitCode::from(2);
        }
    };
    let flags = cli.command.flags().clone();
    let threads = flags.threads.map(|n| n as usize);
    let result = with_thread_count(threads, || execute(&cli.command));
    let emitted = match result {
        Ok(e) => e,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = write_output(&flags, &emitted.body) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    match emitted.warning {
        Some(w) => {
            eprintln!("error: {w}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}

fn write_output(flags: &Flags, body: &str) -> std::io::Result<()> {
    match &flags.out {
        Some(path) => std::fs::write(path, body),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()
        }
    }
}

fn execute(command: &Command) -> Result<Emitted, Failure> {
    let f = command.flags();
    let params = ModelParams::new(f.mu, f.sigma, f.spot)?;
    match command {
        Command::Prob(_) => prob(f, &params),
        Command::Hitting(_) => {
            require_otm(f)?;
            hitting(f, &params)
        }
        Command::Price(_) => {
            require_otm(f)?;
            price(f, &params)
        }
        Command::Converge(_) => {
            require_otm(f)?;
            converge(f, &params)
        }
        Command::BmExtreme(_) => bm_extreme(f),
        Command::Simulate(_) => {
            require_otm(f)?;
            simulate(f, &params)
        }
    }
}

fn require_otm(f: &Flags) -> Result<(), Failure> {
    if f.barrier > f.spot {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--barrier ({}) must exceed --spot ({}) for an up-and-in barrier",
            f.barrier, f.spot
        )))
    }
}

fn t_list(f: &Flags, default: &[f64]) -> Result<Vec<f64>, Failure> {
    let list = f.t_list.clone().unwrap_or_else(|| default.to_vec());
    if let Some(t) = list.iter().find(|&&t| t >= 1.0) {
        return Err(Failure::Usage(format!(
            "--t-list values must lie in (0, 1), got {t}"
        )));
    }
    Ok(list)
}

fn steps(f: &Flags, default: u64) -> usize {
    f.steps.unwrap_or(default) as usize
}

fn output(f: &Flags, default: Output) -> Output {
    f.output.unwrap_or(default)
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> extremal::Result<()>) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("reports are UTF-8"))
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn prob(f: &Flags, params: &ModelParams) -> Result<Emitted, Failure> {
    let ts = f.t_list.clone().unwrap_or_else(|| vec![f.maturity]);
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let p = barrier_crossing_probability(params, f.barrier, t)?;
        let audit = remark_audit(params, f.barrier, t)?;
        rows.push((t, p, audit));
    }
    let body = match output(f, Output::Json) {
        Output::Csv => {
            let mut s = String::from("T,crossing_prob,remark,deviation\n");
            for (t, p, a) in &rows {
                s += &format!(
                    "{},{},{},{}\n",
                    fmt_f64(*t),
                    fmt_f64(*p),
                    fmt_f64(a.remark),
                    fmt_f64(a.deviation)
                );
            }
            s
        }
        Output::Json => pretty(&json!({
            "rows": rows.iter().map(|(t, p, a)| json!({
                "T": t,
                "crossing_prob": p,
                "remark_audit": a,
            })).collect::<Vec<_>>(),
            "inputs": {"spot": f.spot, "mu": f.mu, "sigma": f.sigma, "barrier": f.barrier},
        })),
    };
    Ok(Emitted::ok(body))
}

fn hitting(f: &Flags, params: &ModelParams) -> Result<Emitted, Failure> {
    let ts = t_list(f, HITTING_T)?;
    let paths = f.paths.unwrap_or(20_000);
    let cfg = ExperimentConfig::new(paths, steps(f, 512), f.seed).with_sampler(f.sampler.into());
    let rep = run_hitting_concentration(params, f.barrier, &ts, (paths > 0).then_some(&cfg))?;
    let body = match output(f, Output::Json) {
        Output::Csv => csv_bytes(|b| rep.write_csv(b))?,
        Output::Json => rep.to_json() + "\n",
    };
    Ok(Emitted::ok(body))
}

fn price(f: &Flags, params: &ModelParams) -> Result<Emitted, Failure> {
    let spec = BarrierSpec::new(f.barrier, f.strike, f.maturity)?;
    let payoff = Payoff::new(f.payoff.into(), f.strike)?;
    let cfg = McConfig {
        paths: f.paths.unwrap_or(100_000),
        steps: steps(f, 512),
        seed: f.seed,
        sampler: f.sampler.into(),
    };
    let q = quote(params, &spec, &payoff, &cfg)?;
    let warning = q.mc_diagnostics.filter(|d| d.degenerate_weights).map(|_| {
        "degenerate tilting weights: one path carries more than half the total weight".to_string()
    });
    let body = match output(f, Output::Json) {
        Output::Json => pretty(&q),
        Output::Csv => {
            let mut s = String::from(
                "asymptotic,crossing_prob,limit_payoff,mc_mean,mc_stderr,mc_n_effective,mc_acceptance_rate,sampler\n",
            );
            let (mean, se, n, rate) = match q.mc {
                Some(m) => (
                    fmt_f64(m.mean),
                    fmt_f64(m.stderr),
                    m.n_effective.to_string(),
                    fmt_f64(m.acceptance_rate),
                ),
                None => Default::default(),
            };
            let sampler = q.mc_diagnostics.map(|d| d.sampler.label()).unwrap_or("");
            s += &format!(
                "{},{},{},{mean},{se},{n},{rate},{sampler}\n",
                fmt_f64(q.asymptotic),
                fmt_f64(q.crossing_prob),
                fmt_f64(q.limit_payoff)
            );
            s
        }
    };
    Ok(Emitted { body, warning })
}

fn converge(f: &Flags, params: &ModelParams) -> Result<Emitted, Failure> {
    let ts = t_list(f, CONVERGE_T)?;
    let cfg = ExperimentConfig::new(f.paths.unwrap_or(20_000), steps(f, 512), f.seed)
        .with_sampler(f.sampler.into());
    let rep = if f.pricing_error {
        let first = ts.first().copied().unwrap_or(f.maturity);
        let spec = BarrierSpec::new(f.barrier, f.strike, first)?;
        let payoff = Payoff::new(f.payoff.into(), f.strike)?;
        run_pricing_error_law(params, &spec, &payoff, &ts, &cfg)?
    } else {
        run_gbm_convergence(params, f.barrier, &ts, &cfg)?
    };
    let body = match output(f, Output::Csv) {
        Output::Csv => csv_bytes(|b| rep.write_csv(b))?,
        Output::Json => rep.to_json() + "\n",
    };
    Ok(Emitted::ok(body))
}

fn bm_extreme(f: &Flags) -> Result<Emitted, Failure> {
    let eps = f.epsilon_list.clone().unwrap_or_else(|| EPSILONS.to_vec());
    if let Some(e) = eps.iter().find(|&&e| e > 1.0) {
        return Err(Failure::Usage(format!(
            "--epsilon-list values must lie in (0, 1], got {e}"
        )));
    }
    let cfg = ExperimentConfig::new(f.paths.unwrap_or(100_000), steps(f, 16), f.seed)
        .with_sampler(f.sampler.into());
    let rep = run_bm_extreme(&eps, &cfg)?;
    let warning = rep
        .rows
        .iter()
        .find(|r| r.note.as_deref() == Some("degenerate tilting weights"))
        .map(|r| format!("degenerate tilting weights at epsilon = {}", r.epsilon));
    let body = match output(f, Output::Csv) {
        Output::Csv => csv_bytes(|b| rep.write_csv(b))?,
        Output::Json => rep.to_json() + "\n",
    };
    Ok(Emitted { body, warning })
}

/// Scan limit for the first crossing path under the tilted law.
const SIMULATE_SCAN: u64 = 1_000_000;

fn simulate(f: &Flags, params: &ModelParams) -> Result<Emitted, Failure> {
    let spec = BarrierSpec::new(f.barrier, f.strike, f.maturity)?;
    let grid = TimeGrid::new(f.maturity, steps(f, 512))?;
    let cond = Conditioning::gbm(params, &spec, grid, f.seed)?;
    let kind = cond.resolve(SamplerChoice::from(f.sampler));
    let path = match kind {
        extremal::paths::SamplerKind::Tilted => {
            let engine = cond.tilted_engine();
            (0..SIMULATE_SCAN)
                .map(|i| engine.path(i))
                .find(|p| p.crossed_barrier)
                .ok_or(Error::NoCrossings {
                    attempted: SIMULATE_SCAN,
                })?
        }
        _ => cond.rejection_paths(1)?.paths.swap_remove(0),
    };
    let body = match output(f, Output::Csv) {
        Output::Csv => csv_bytes(|b| path.write_csv(b))?,
        Output::Json => pretty(&json!({
            "sampler": kind,
            "weight": path.weight,
            "crossed_barrier": path.crossed_barrier,
            "crossing_time": path.crossing_time(),
            "t": (0..=grid.steps()).map(|k| grid.time(k)).collect::<Vec<_>>(),
            "log_value": path.log_values,
            "value": path.prices().collect::<Vec<_>>(),
        })),
    };
    Ok(Emitted::ok(body))
}
