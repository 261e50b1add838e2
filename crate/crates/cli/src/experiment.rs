use std::path::PathBuf;

use altgame_core::exec::with_jobs;
use altgame_core::experiment::{self, ExperimentTable};
use altgame_core::quantum::{PromiseGap, Value3Config};
use clap::{Args, ValueEnum};

use crate::{emit, Failure};

const CSV_HELP: &str = "\
CSV output (UTF-8, comma-separated, header row):
  id         instance or trial index; the last row has id \"summary\"
  label      case description (honest side and copies, game and trial, m and k)
  seed       seed the row was generated from
  measured   collapse, sion, complement: absolute value gap
             protocol-bounds: worst honest winning probability over the grid
             sparsify-k2, sparsify-k3: restricted value minus full value
             counting-bounds: log of tail probability times strategy count
  threshold  value the measurement is compared against
  pass       true or false

Summary rows: max gap (collapse, sion, complement), number of violations
(protocol-bounds), pass fraction (sparsify-k2 ≥ 0.99, sparsify-k3 ≥ 0.95),
largest log value (counting-bounds).

Exit status is 0 when the summary passes and 1 otherwise.";

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Three-turn value against the merged two-turn value.
    Collapse,
    /// Order of optimization in the inner game at a fixed first state.
    Sion,
    /// Complement game with roles swapped against one minus the value.
    Complement,
    /// Honest winning probability of the k-copy protocol against its bound.
    ProtocolBounds,
    /// Two-round sparsification trials.
    SparsifyK2,
    /// Three-round sparsification trials.
    SparsifyK3,
    /// Log-space counting inequality.
    CountingBounds,
}

#[derive(Args)]
#[command(after_long_help = CSV_HELP)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Instances (quantum suites, protocol tables) or random games (sparsification).
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Bits per move; a single value or an inclusive range such as 5..8.
    #[arg(long)]
    m: Option<String>,
    /// Copies (protocol-bounds) or rounds (counting-bounds); list or range such as 1..4 or 2,3.
    #[arg(long)]
    k: Option<String>,
    /// Rounds of the protocol's base game.
    #[arg(long, default_value_t = 2)]
    i: u32,
    /// Register sizes for the quantum suites.
    #[arg(long, value_delimiter = ',')]
    qubits: Option<Vec<u32>>,
    /// Total sparsification trials.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    grid_res: Option<f64>,
    #[arg(long, default_value_t = 2.0 / 3.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    s: f64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// "5..8" → [5, 6, 7, 8]; "2,3" → [2, 3]; "4" → [4].
pub fn parse_list(text: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::Parse(format!("cannot read '{text}' as a list or range"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

fn single(text: Option<&String>, default: u32) -> Result<u32, Failure> {
    match text {
        None => Ok(default),
        Some(t) => match parse_list(t)?.as_slice() {
            [v] => u32::try_from(*v).map_err(|_| Failure::Parse(format!("{v} is too large"))),
            _ => Err(Failure::Parse(format!("expected a single value, got '{t}'"))),
        },
    }
}

fn list(text: Option<&String>, default: &[u64]) -> Result<Vec<u64>, Failure> {
    text.map_or(Ok(default.to_vec()), |t| parse_list(t))
}

fn qubits<const N: usize>(q: &Option<Vec<u32>>) -> Result<[u32; N], Failure> {
    match q {
        None => Ok([1; N]),
        Some(v) => v
            .as_slice()
            .try_into()
            .map_err(|_| Failure::Parse(format!("this suite takes {N} register sizes"))),
    }
}

fn run_suite(a: &ExperimentArgs) -> Result<ExperimentTable, Failure> {
    if !(a.tol > 0.0 && a.tol <= 0.1) {
        return Err(Failure::Parse(format!("--tol must lie in (0, 0.1], got {}", a.tol)));
    }
    if a.count == Some(0) || a.trials == Some(0) {
        return Err(Failure::Parse("--count and --trials must be at least 1".into()));
    }
    let table = match a.suite {
        Suite::Collapse => experiment::collapse(
            a.count.unwrap_or(100),
            a.seed,
            a.tol,
            qubits(&a.qubits)?,
            &Value3Config::default(),
        )?,
        Suite::Sion => experiment::sion(a.count.unwrap_or(50), a.seed, a.tol, qubits(&a.qubits)?)?,
        Suite::Complement => experiment::complement(a.count.unwrap_or(50), a.seed, a.tol, qubits(&a.qubits)?)?,
        Suite::ProtocolBounds => {
            let copies = list(a.k.as_ref(), &[1, 2, 3, 4])?
                .into_iter()
                .map(|k| u32::try_from(k).map_err(|_| Failure::Parse(format!("{k} copies is too many"))))
                .collect::<Result<Vec<_>, _>>()?;
            experiment::protocol_bounds(
                single(a.m.as_ref(), 1)?,
                a.i,
                &copies,
                a.count.unwrap_or(20),
                a.seed,
                a.grid_res.unwrap_or(1.0 / 64.0),
                PromiseGap::new(a.c, a.s)?,
            )?
        }
        Suite::SparsifyK2 => experiment::sparsify_k2(
            single(a.m.as_ref(), 2)?,
            a.eps,
            a.count.unwrap_or(20),
            a.trials.unwrap_or(200),
            a.seed,
        )?,
        Suite::SparsifyK3 => experiment::sparsify_k3(
            single(a.m.as_ref(), 1)?,
            a.eps,
            a.count.unwrap_or(10),
            a.trials.unwrap_or(100),
            a.seed,
            a.grid_res.unwrap_or(0.02),
        )?,
        Suite::CountingBounds => {
            let ks = list(a.k.as_ref(), &[2, 3])?
                .into_iter()
                .map(|k| u32::try_from(k).map_err(|_| Failure::Parse(format!("k = {k} is too large"))))
                .collect::<Result<Vec<_>, _>>()?;
            experiment::counting_bounds(&list(a.m.as_ref(), &[5, 6, 7, 8])?, &ks, a.eps)?
        }
    };
    Ok(table)
}

pub fn run(args: &ExperimentArgs) -> Result<(), Failure> {
    let table = with_jobs(args.jobs, || run_suite(args))?;
    emit(args.out.as_ref(), &table.to_csv())?;
    if table.passed() {
        Ok(())
    } else {
        Err(Failure::Threshold)
    }
}
