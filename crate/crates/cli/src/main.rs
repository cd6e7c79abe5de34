mod output;

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use output::{write_atomic, Format, Output};
use seqrsp::cascade::{run_cascade, ProtocolConfig, SharpnessChain, Target};
use seqrsp::classical::classical_bound;
use seqrsp::resources::resource_profile;
use seqrsp::solver::{boundary_table, min_chain, Axis, Interval};
use seqrsp::states::{BellDiagonalCoeffs, BellKind, InitialFamily};
use seqrsp::trajectory::{regression_panel, simulate, TrajectoryRun};

const TABLE_SAMPLES: usize = 2000;
/// Polar angles this close to 0, π/2 or π are taken as exactly that value,
/// since the protocol switches regime there and typed decimals never hit it.
const SNAP_TOL: f64 = 1e-4;
/// A sweep may overshoot its stop by this fraction of a step.
const SWEEP_SLACK: f64 = 1e-4;

#[derive(Parser)]
#[command(name = "seqrsp", version, about = "Sequential remote state preparation with unsharp measurements")]
struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Read every angle argument in degrees.
    #[arg(long, global = true)]
    deg: bool,
    /// Quadrature nodes for azimuth averages.
    #[arg(long, global = true, env = "RSP_QUAD_NODES", default_value_t = 64)]
    nodes: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-bit classical fidelity bound for a target circle.
    ClassicalBound {
        #[arg(long, conflicts_with = "sweep")]
        theta: Option<f64>,
        /// start:stop:step, inclusive of stop
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Per-sender fidelities and resources for a given chain.
    Cascade(Protocol),
    /// Reproduce a sharpness or boundary table.
    Table {
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Discord and concurrence along the infimum chain.
    Resources {
        #[arg(long, default_value_t = 7)]
        max_bob: usize,
    },
    /// Trajectory sampling against the closed forms.
    Montecarlo {
        #[command(flatten)]
        protocol: Protocol,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Run the built-in 20-configuration panel instead.
        #[arg(long)]
        panel: bool,
    },
}

#[derive(Args)]
struct Protocol {
    /// singlet | werner:C | nonmax:XI | bd:C1,C2,C3 | bell:psi-|psi+|phi+|phi-
    #[arg(long, default_value = "singlet")]
    family: String,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    lambdas: Vec<f64>,
    #[arg(long, value_enum, default_value = "psi")]
    target: TargetArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Psi,
    PsiPerp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    #[value(name = "I")]
    One,
    #[value(name = "II")]
    Two,
    #[value(name = "III")]
    Three,
    #[value(name = "IV")]
    Four,
    #[value(name = "B")]
    B,
}

fn angle(x: f64, deg: bool) -> f64 {
    if deg {
        x.to_radians()
    } else {
        x
    }
}

fn snap(theta: f64) -> f64 {
    [0.0, FRAC_PI_2, PI]
        .into_iter()
        .find(|m| (theta - m).abs() < SNAP_TOL)
        .unwrap_or(theta)
}

fn parse_family(s: &str, deg: bool) -> Result<InitialFamily, String> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    let num = |a: &str| a.trim().parse::<f64>().map_err(|_| format!("bad number `{a}` in family `{s}`"));
    let fam = match kind {
        "singlet" if arg.is_empty() => InitialFamily::Singlet,
        "werner" => InitialFamily::Werner { c: num(arg)? },
        "nonmax" => InitialFamily::NonMaximal { xi: angle(num(arg)?, deg) },
        "bd" => {
            let c: Vec<f64> = arg.split(',').map(num).collect::<Result<_, _>>()?;
            if c.len() != 3 {
                return Err(format!("bd needs three coefficients, got {}", c.len()));
            }
            InitialFamily::BellDiagonal {
                coeffs: BellDiagonalCoeffs::new(c[0], c[1], c[2]).map_err(|e| e.to_string())?,
            }
        }
        "bell" => {
            let bell = match arg {
                "psi-" => BellKind::PsiMinus,
                "psi+" => BellKind::PsiPlus,
                "phi+" => BellKind::PhiPlus,
                "phi-" => BellKind::PhiMinus,
                _ => return Err(format!("unknown Bell state `{arg}`")),
            };
            InitialFamily::BellState { bell }
        }
        _ => return Err(format!("unknown family `{s}`")),
    };
    fam.validate().map_err(|e| e.to_string())?;
    Ok(fam)
}

fn protocol(p: &Protocol, deg: bool) -> Result<(ProtocolConfig, SharpnessChain), String> {
    let family = parse_family(&p.family, deg)?;
    let theta = p.theta.map_or(FRAC_PI_2, |t| snap(angle(t, deg)));
    let target = match p.target {
        TargetArg::Psi => Target::Psi,
        TargetArg::PsiPerp => Target::PsiPerp,
    };
    let cfg = ProtocolConfig::new(family, theta, target).map_err(|e| e.to_string())?;
    if p.lambdas.is_empty() {
        return Err("--lambdas needs at least one value".into());
    }
    let chain = SharpnessChain::new(p.lambdas.clone()).map_err(|e| e.to_string())?;
    Ok((cfg, chain))
}

fn parse_sweep(s: &str, deg: bool) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("malformed sweep `{s}`, expected start:stop:step"))?;
    let [a, b, h] = nums[..] else {
        return Err(format!("malformed sweep `{s}`, expected start:stop:step"));
    };
    if h.is_nan() || h <= 0.0 || b < a {
        return Err(format!("sweep `{s}` needs step > 0 and stop ≥ start"));
    }
    let n = ((b - a) / h + SWEEP_SLACK).floor() as usize;
    Ok((0..=n).map(|k| angle((a + h * k as f64).min(b), deg)).collect())
}

fn cmd_classical_bound(theta: Option<f64>, sweep: Option<&str>, deg: bool) -> Result<Output, String> {
    let thetas = match (theta, sweep) {
        (Some(t), _) => vec![angle(t, deg)],
        (None, Some(s)) => parse_sweep(s, deg)?,
        (None, None) => parse_sweep("0:3.141592653589793:0.01", false)?,
    };
    if let Some(t) = thetas.iter().find(|t| !(0.0..=PI + 1e-12).contains(*t)) {
        return Err(format!("theta {t} outside [0, π]"));
    }
    let rows: Vec<(f64, f64)> = thetas.iter().map(|&t| (t, classical_bound(t))).collect();
    Ok(Output {
        command: "classical-bound",
        parameters: json!({ "theta": theta, "sweep": sweep, "deg": deg }),
        seed: None,
        result: json!(rows.iter().map(|(t, f)| json!({ "theta": t, "bound": f })).collect::<Vec<_>>()),
        header: vec!["theta", "classical_bound"],
        rows: rows.iter().map(|&(t, f)| vec![t.into(), f.into()]).collect(),
    })
}

fn cmd_cascade(p: &Protocol, deg: bool, nodes: usize) -> Result<Output, String> {
    let (cfg, chain) = protocol(p, deg)?;
    let rep = run_cascade(&cfg, &chain, nodes).map_err(|e| e.to_string())?;
    let rows = rep
        .bobs
        .iter()
        .map(|b| {
            vec![
                b.index.into(),
                b.lambda.into(),
                b.average_fidelity.into(),
                b.numeric_fidelity.into(),
                b.kept_branch_fidelity.into(),
                b.classical_bound.into(),
                b.beats_classical.into(),
                b.lambda_min.into(),
                b.p_plus.into(),
                b.shared_correlations[0].into(),
                b.shared_correlations[1].into(),
                b.shared_correlations[2].into(),
                b.geometric_discord.into(),
                b.concurrence.into(),
            ]
        })
        .collect();
    Ok(Output {
        command: "cascade",
        parameters: json!({ "config": cfg, "chain": chain, "nodes": nodes }),
        seed: None,
        result: serde_json::to_value(&rep).map_err(|e| e.to_string())?,
        header: vec![
            "bob", "lambda", "fidelity", "numeric_fidelity", "kept_branch_fidelity", "classical_bound", "pass",
            "lambda_min", "p_plus", "c1", "c2", "c3", "discord", "concurrence",
        ],
        rows,
    })
}

fn sharpness_table(name: &'static str, theta: f64) -> Result<Output, String> {
    let cfg = ProtocolConfig::new(InitialFamily::Singlet, theta, Target::Psi).map_err(|e| e.to_string())?;
    let res = min_chain(&cfg, seqrsp::MAX_CHAIN).map_err(|e| e.to_string())?;
    let feasible = &res.lambda_mins[..res.n_max];
    let rows = feasible
        .iter()
        .enumerate()
        .map(|(k, &l)| vec![(k + 1).into(), l.into(), format!("({l:.3} - 1]").into()])
        .collect();
    Ok(Output {
        command: "table",
        parameters: json!({ "which": name, "theta": theta }),
        seed: None,
        result: serde_json::to_value(&res).map_err(|e| e.to_string())?,
        header: vec!["bob", "lambda_min", "range"],
        rows,
    })
}

fn joined(ivs: &[Interval]) -> String {
    ivs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" U ")
}

fn axis_table(name: &'static str, axis: Axis) -> Result<Output, String> {
    let rows = boundary_table(axis, TABLE_SAMPLES).map_err(|e| e.to_string())?;
    Ok(Output {
        command: "table",
        parameters: json!({ "which": name, "axis": axis, "samples": TABLE_SAMPLES }),
        seed: None,
        result: serde_json::to_value(&rows).map_err(|e| e.to_string())?,
        header: vec!["n", "range"],
        rows: rows.iter().map(|r| vec![r.n.into(), joined(&r.intervals).into()]).collect(),
    })
}

fn cmd_table(which: Which) -> Result<Output, String> {
    match which {
        Which::One => sharpness_table("I", FRAC_PI_2),
        Which::B => sharpness_table("B", 2f64.sqrt().atan()),
        Which::Two => axis_table("II", Axis::Theta),
        Which::Three => axis_table("III", Axis::Xi),
        Which::Four => axis_table("IV", Axis::WernerC),
    }
}

fn cmd_resources(max_bob: usize) -> Result<Output, String> {
    if !(1..=8).contains(&max_bob) {
        return Err(format!("--max-bob {max_bob} outside 1..=8"));
    }
    let rows = resource_profile(max_bob).map_err(|e| e.to_string())?;
    Ok(Output {
        command: "resources",
        parameters: json!({ "max_bob": max_bob }),
        seed: None,
        result: serde_json::to_value(&rows).map_err(|e| e.to_string())?,
        header: vec![
            "bob", "discord", "concurrence", "lambda", "discord_after", "concurrence_after",
        ],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.bob_index.into(),
                    r.discord_available.into(),
                    r.concurrence_available.into(),
                    r.lambda.into(),
                    r.discord_after.into(),
                    r.concurrence_after.into(),
                ]
            })
            .collect(),
    })
}

fn cmd_montecarlo(p: &Protocol, trials: usize, seed: Option<u64>, panel: bool, deg: bool) -> Result<Output, String> {
    let seed = seed.unwrap_or_else(rand::random);
    let configs = if panel { regression_panel() } else { vec![protocol(p, deg)?] };
    let mut runs: Vec<(ProtocolConfig, SharpnessChain, TrajectoryRun)> = Vec::new();
    for (k, (cfg, chain)) in configs.into_iter().enumerate() {
        let run = simulate(&cfg, &chain, trials, seed.wrapping_add(k as u64)).map_err(|e| e.to_string())?;
        runs.push((cfg, chain, run));
    }
    let mut rows = Vec::new();
    for (k, (_, _, run)) in runs.iter().enumerate() {
        for b in &run.bobs {
            rows.push(vec![
                k.into(),
                b.index.into(),
                b.mean.into(),
                b.std_error.into(),
                b.analytic.into(),
                b.z_score.into(),
                b.plus_frequency.into(),
            ]);
        }
    }
    let result: Vec<Value> = runs
        .iter()
        .map(|(cfg, chain, run)| json!({ "config": cfg, "chain": chain, "run": run }))
        .collect();
    Ok(Output {
        command: "montecarlo",
        parameters: json!({ "trials": trials, "panel": panel }),
        seed: Some(seed),
        result: Value::Array(result),
        header: vec!["config", "bob", "mean", "std_error", "analytic", "z_score", "plus_frequency"],
        rows,
    })
}

fn run(cli: &Cli) -> Result<(), String> {
    let (out, default) = match &cli.command {
        Command::ClassicalBound { theta, sweep } => (cmd_classical_bound(*theta, sweep.as_deref(), cli.deg)?, Format::Csv),
        Command::Cascade(p) => (cmd_cascade(p, cli.deg, cli.nodes)?, Format::Json),
        Command::Table { which } => (cmd_table(*which)?, Format::Csv),
        Command::Resources { max_bob } => (cmd_resources(*max_bob)?, Format::Csv),
        Command::Montecarlo { protocol: p, trials, seed, panel } => {
            (cmd_montecarlo(p, *trials, *seed, *panel, cli.deg)?, Format::Json)
        }
    };
    let bytes = out.render(cli.format.unwrap_or(default))?;
    match &cli.out {
        Some(path) => write_atomic(path, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
