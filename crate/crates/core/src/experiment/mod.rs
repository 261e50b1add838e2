//! Seeded batch experiments producing one CSV row per instance or trial plus a summary row.
//!
//! Instance `id` of a run with seed `s` uses the derived seed `derive_seed(s, id)`,
//! so rows do not depend on scheduling and reruns are byte-identical.

use serde::Serialize;

use crate::dist::{
    counting_bound_check, counting_bound_multiset, sparsification_check_k2, sparsification_check_k3, DistGame,
};
use crate::error::Result;
use crate::exec::{derive_seed, par_map};
use crate::linops::{random_density, random_observable, Player};
use crate::protocol::{bound_sweep, ProtocolInstance};
use crate::quantum::{collapse_gap_with, sion_gap, value2, PromiseGap, QuantumGame, Value3Config};

pub const CSV_HEADER: &str = "id,label,seed,measured,threshold,pass";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub id: String,
    pub label: String,
    pub seed: u64,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    pub rows: Vec<Row>,
    pub summary: Row,
}

impl ExperimentTable {
    pub fn passed(&self) -> bool {
        self.summary.pass
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in self.rows.iter().chain(std::iter::once(&self.summary)) {
            w.serialize(row).expect("writing to memory cannot fail");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
    }
}

fn row(id: usize, label: String, seed: u64, measured: f64, threshold: f64, pass: bool) -> Row {
    Row {
        id: id.to_string(),
        label,
        seed,
        measured,
        threshold,
        pass,
    }
}

fn summary(label: &str, seed: u64, measured: f64, threshold: f64, pass: bool) -> Row {
    Row {
        id: "summary".into(),
        label: label.into(),
        seed,
        measured,
        threshold,
        pass,
    }
}

/// Rows pass when `measured ≤ threshold`; the summary reports the maximum.
fn max_table(rows: Vec<Row>, seed: u64, threshold: f64) -> ExperimentTable {
    let worst = rows.iter().map(|r| r.measured).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.pass);
    ExperimentTable {
        summary: summary("max", seed, worst, threshold, pass),
        rows,
    }
}

/// |value3 − value2(merged)| on random three-register games.
pub fn collapse(count: usize, seed: u64, tol: f64, qubits: [u32; 3], cfg: &Value3Config) -> Result<ExperimentTable> {
    let threshold = 1e-3;
    let dim = 1usize << (qubits[0] + qubits[1] + qubits[2]);
    let rows = par_map(count, |id| -> Result<Row> {
        let s = derive_seed(seed, id as u64);
        let game = QuantumGame::three_turn(random_observable(dim, s), qubits[0], qubits[1], qubits[2])?;
        let gap = collapse_gap_with(&game, tol, cfg)?;
        Ok(row(id, "collapse".into(), s, gap, threshold, gap <= threshold))
    });
    Ok(max_table(rows.into_iter().collect::<Result<_>>()?, seed, threshold))
}

/// |min-then-max − max-then-min| of the fiber game at a random first state.
pub fn sion(count: usize, seed: u64, tol: f64, qubits: [u32; 3]) -> Result<ExperimentTable> {
    let threshold = 1e-3;
    let dim = 1usize << (qubits[0] + qubits[1] + qubits[2]);
    let rows = par_map(count, |id| -> Result<Row> {
        let s = derive_seed(seed, id as u64);
        let game = QuantumGame::three_turn(random_observable(dim, s), qubits[0], qubits[1], qubits[2])?;
        let rho1 = random_density(1 << qubits[0], derive_seed(s, 1));
        let gap = sion_gap(&game, &rho1, tol)?;
        Ok(row(id, "sion".into(), s, gap, threshold, gap <= threshold))
    });
    Ok(max_table(rows.into_iter().collect::<Result<_>>()?, seed, threshold))
}

/// |value2(I − R with roles swapped) − (1 − value2(R))| on random two-register games.
pub fn complement(count: usize, seed: u64, tol: f64, qubits: [u32; 2]) -> Result<ExperimentTable> {
    let threshold = 2e-4;
    let dim = 1usize << (qubits[0] + qubits[1]);
    let rows = par_map(count, |id| -> Result<Row> {
        let s = derive_seed(seed, id as u64);
        let game = QuantumGame::two_turn(random_observable(dim, s), qubits[0], qubits[1])?;
        let v = value2(&game, tol)?.value;
        let w = value2(&game.complement()?, tol)?.value;
        let gap = (w - (1.0 - v)).abs();
        Ok(row(id, "complement".into(), s, gap, threshold, gap <= threshold))
    });
    Ok(max_table(rows.into_iter().collect::<Result<_>>()?, seed, threshold))
}

/// Worst honest winning probability over the adversary grid against the
/// simulation bound, for both honest sides and every copy count in `copies`.
pub fn protocol_bounds(
    m: u32,
    rounds: u32,
    copies: &[u32],
    count: usize,
    seed: u64,
    grid_res: f64,
    promise: PromiseGap,
) -> Result<ExperimentTable> {
    let tol = 1e-9;
    let cases: Vec<(usize, Player, u32)> = (0..count)
        .flat_map(|id| {
            [Player::Maximizer, Player::Minimizer]
                .into_iter()
                .flat_map(move |side| copies.iter().map(move |&k| (id, side, k)))
        })
        .collect();
    let rows = par_map(cases.len(), |n| -> Result<Row> {
        let (id, side, k) = cases[n];
        let s = derive_seed(seed, id as u64);
        let inst = ProtocolInstance::random(m, rounds, k, promise, side, s)?;
        let rep = bound_sweep(&inst, grid_res)?;
        let side_name = match side {
            Player::Maximizer => "maximizer",
            Player::Minimizer => "minimizer",
        };
        Ok(row(
            id,
            format!("honest={side_name};k={k}"),
            s,
            rep.worst_honest_win,
            rep.bound,
            rep.promise_met && rep.holds(tol),
        ))
    });
    let rows: Vec<Row> = rows.into_iter().collect::<Result<_>>()?;
    let violations = rows.iter().filter(|r| !r.pass).count();
    Ok(ExperimentTable {
        summary: summary("violations", seed, violations as f64, 0.0, violations == 0),
        rows,
    })
}

/// Sparsification trials spread evenly over `games` random games. A trial
/// passes when the first mover loses at most `eps` (two rounds) or `3·eps`
/// (three rounds), the shift is at most `rounds·eps` in size and the
/// restriction side holds. The summary
/// passes when the pass fraction reaches `min_fraction` and the restriction
/// side held in every trial.
#[allow(clippy::too_many_arguments)]
fn sparsify_table(
    rounds: u32,
    m: u32,
    eps: f64,
    games: usize,
    trials: usize,
    seed: u64,
    grid_res: f64,
    min_fraction: f64,
) -> Result<ExperimentTable> {
    let games = games.max(1);
    let per_game = trials.div_ceil(games);
    let one_sided = if rounds == 2 { eps } else { 3.0 * eps };
    let two_sided = rounds as f64 * eps;
    let stats = par_map(games, |g| -> Result<_> {
        let s = derive_seed(seed, g as u64);
        let game = DistGame::random(m, rounds, Player::Maximizer, s)?;
        let st = if rounds == 2 {
            sparsification_check_k2(&game, eps, per_game, derive_seed(s, 1))?
        } else {
            sparsification_check_k3(&game, eps, per_game, derive_seed(s, 1), grid_res)?
        };
        Ok((s, st))
    });
    let mut rows = Vec::with_capacity(trials);
    let mut monotone = true;
    for (g, st) in stats.into_iter().enumerate() {
        let (s, st) = st?;
        monotone &= st.monotone == st.trials();
        for (t, &shift) in st.shifts.iter().enumerate() {
            if rows.len() == trials {
                break;
            }
            let ok = shift >= -one_sided && shift.abs() <= two_sided;
            let restricted_ok = if rounds == 2 { shift <= 1e-9 } else { true };
            rows.push(row(
                rows.len(),
                format!("game={g};trial={t}"),
                s,
                shift,
                -one_sided,
                ok && restricted_ok,
            ));
        }
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    let fraction = passed as f64 / rows.len() as f64;
    Ok(ExperimentTable {
        summary: summary(
            "pass_fraction",
            seed,
            fraction,
            min_fraction,
            fraction >= min_fraction && monotone,
        ),
        rows,
    })
}

pub fn sparsify_k2(m: u32, eps: f64, games: usize, trials: usize, seed: u64) -> Result<ExperimentTable> {
    sparsify_table(2, m, eps, games, trials, seed, 1.0, 0.99)
}

pub fn sparsify_k3(m: u32, eps: f64, games: usize, trials: usize, seed: u64, grid_res: f64) -> Result<ExperimentTable> {
    sparsify_table(3, m, eps, games, trials, seed, grid_res, 0.95)
}

/// Log of the tail-times-count product for each (m, k); rows pass when it is negative.
/// The label also carries the same quantity with the exact multiset count.
pub fn counting_bounds(ms: &[u64], ks: &[u32], eps: f64) -> Result<ExperimentTable> {
    let mut rows = Vec::new();
    for &m in ms {
        for &k in ks {
            let (lhs, holds) = counting_bound_check(m, k, eps)?;
            let (exact, exact_holds) = counting_bound_multiset(m, k, eps)?;
            rows.push(row(
                rows.len(),
                format!("m={m};k={k};multiset_log={exact:.6};multiset_holds={exact_holds}"),
                0,
                lhs,
                0.0,
                holds,
            ));
        }
    }
    let worst = rows.iter().map(|r| r.measured).fold(f64::NEG_INFINITY, f64::max);
    let pass = rows.iter().all(|r| r.pass);
    Ok(ExperimentTable {
        summary: summary("max_log", 0, worst, 0.0, pass),
        rows,
    })
}
