use std::path::PathBuf;
use std::time::Instant;

use altgame_core::dist::{value_k2, value_k3, DistGame};
use altgame_core::linops::Player;
use altgame_core::protocol::{bound_sweep, ProtocolInstance};
use altgame_core::quantum::{value2, value3, GameValueReport, QuantumGame};
use clap::Args;
use serde_json::{json, Value};

use crate::{emit, io_error, Failure};

#[derive(Args)]
pub struct SolveArgs {
    /// Instance file (quantum game, distribution game or protocol instance JSON).
    file: PathBuf,
    /// Target certificate gap for the quantum solvers.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Grid resolution for three-round distribution games and protocol sweeps.
    #[arg(long)]
    grid_res: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_error(e: serde_json::Error) -> Failure {
    Failure::Parse(e.to_string())
}

fn certified(kind: &str, rep: &GameValueReport) -> Value {
    json!({
        "kind": kind,
        "value": rep.value,
        "lower_cert": rep.lower_cert,
        "upper_cert": rep.upper_cert,
        "gap": rep.gap,
        "iterations": rep.iterations,
    })
}

fn solve_quantum(game: &QuantumGame, tol: f64) -> altgame_core::Result<Value> {
    Ok(match game.turns() {
        2 => certified("qgame2", &value2(game, tol)?),
        _ => certified("qgame3", &value3(game, tol)?),
    })
}

fn solve_dist(game: &DistGame, grid_res: f64) -> Result<Value, Failure> {
    Ok(match game.k() {
        2 => {
            let v = value_k2(game)?;
            json!({"kind": "distgame2", "value": v, "lower_cert": v, "upper_cert": v, "gap": 0.0})
        }
        3 => {
            let out = value_k3(game, grid_res)?;
            let (lo, hi) = match game.first_mover() {
                Player::Maximizer => (out.value, out.value + out.bound),
                Player::Minimizer => (out.value - out.bound, out.value),
            };
            json!({
                "kind": "distgame3",
                "value": out.value,
                "lower_cert": lo,
                "upper_cert": hi,
                "gap": out.bound,
                "grid_res": grid_res,
                "first_round": out.first,
            })
        }
        k => return Err(Failure::Other(format!("exact values cover 2 or 3 rounds, got {k}"))),
    })
}

fn solve_protocol(inst: &ProtocolInstance, grid_res: f64) -> Result<Value, Failure> {
    let rep = bound_sweep(inst, grid_res)?;
    Ok(json!({
        "kind": "protocol",
        "value": rep.worst_honest_win,
        "bound": rep.bound,
        "holds": rep.holds(1e-9),
        "base_guarantee": rep.base_guarantee,
        "promise_met": rep.promise_met,
        "adversaries": rep.adversaries,
        "grid_res": grid_res,
        "worst_adversary": rep.worst,
    }))
}

fn finish(mut body: Value, args: &SolveArgs, start: Instant, converged: bool) -> Result<(), Failure> {
    let obj = body.as_object_mut().expect("reports are objects");
    obj.insert("schema_version".into(), json!(1));
    obj.insert("instance".into(), json!(args.file.display().to_string()));
    obj.insert("converged".into(), json!(converged));
    obj.insert("wall_time_s".into(), json!(start.elapsed().as_secs_f64()));
    let text = serde_json::to_string_pretty(&body).map_err(|e| Failure::Other(e.to_string()))? + "\n";
    emit(args.out.as_ref(), &text)
}

pub fn run(args: &SolveArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let text = std::fs::read_to_string(&args.file).map_err(|e| io_error(&args.file, e))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", args.file.display())))?;
    let body = if v.get("observable").is_some() {
        let game: QuantumGame = serde_json::from_value(v).map_err(parse_error)?;
        match solve_quantum(&game, args.tol) {
            Ok(body) => body,
            Err(e) => {
                if let Some(rep) = e.report() {
                    finish(certified("partial", rep), args, start, false)?;
                }
                return Err(e.into());
            }
        }
    } else if v.get("base_game").is_some() {
        let inst: ProtocolInstance = serde_json::from_value(v).map_err(parse_error)?;
        solve_protocol(&inst, args.grid_res.unwrap_or(1.0 / 16.0))?
    } else if v.get("accept").is_some() {
        let game: DistGame = serde_json::from_value(v).map_err(parse_error)?;
        solve_dist(&game, args.grid_res.unwrap_or(0.02))?
    } else {
        return Err(Failure::Parse(format!(
            "{}: not a recognised instance",
            args.file.display()
        )));
    };
    finish(body, args, start, true)
}
