use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::dist::value::{compositions, grid_steps};
use crate::dist::{DistGame, Distribution};
use crate::error::{Error, Result};
use crate::exec::par_map;
use crate::linops::Player;
use crate::quantum::PromiseGap;

pub const MAX_BITS: u32 = 2;
pub const MAX_ROUNDS: u32 = 3;
pub const MAX_COPIES: u32 = 6;
const MAX_SWEEP: usize = 50_000_000;
const MAX_SWEEP_STEPS: usize = 64;

/// Base game with classical moves, the number of copies per proof and the promise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct ProtocolInstance {
    pub base_game: DistGame,
    #[serde(rename = "k")]
    pub copies: u32,
    pub c: f64,
    pub s: f64,
    pub honest_side: Player,
}

#[derive(Deserialize)]
struct RawInstance {
    base_game: DistGame,
    k: u32,
    c: f64,
    s: f64,
    honest_side: Player,
}

impl TryFrom<RawInstance> for ProtocolInstance {
    type Error = Error;

    fn try_from(r: RawInstance) -> Result<Self> {
        ProtocolInstance::new(r.base_game, r.k, PromiseGap::new(r.c, r.s)?, r.honest_side)
    }
}

impl ProtocolInstance {
    pub fn new(base_game: DistGame, copies: u32, promise: PromiseGap, honest_side: Player) -> Result<Self> {
        if copies == 0 {
            return Err(Error::input("at least one copy per proof is required"));
        }
        Ok(ProtocolInstance {
            base_game,
            copies,
            c: promise.c,
            s: promise.s,
            honest_side,
        })
    }

    /// Seeded maximizer-first table, rescaled by an increasing affine map so
    /// that the honest side's pure guarantee meets the promise exactly when
    /// it would otherwise fall short.
    pub fn random(
        m: u32,
        rounds: u32,
        copies: u32,
        promise: PromiseGap,
        honest_side: Player,
        seed: u64,
    ) -> Result<Self> {
        let raw = DistGame::random(m, rounds, Player::Maximizer, seed)?;
        let g = pure_subgame_value(&raw, &[]);
        let table: Vec<f64> = match honest_side {
            Player::Maximizer if g < promise.c => {
                let a = (1.0 - promise.c) / (1.0 - g);
                raw.accept().iter().map(|p| 1.0 - a * (1.0 - p)).collect()
            }
            Player::Minimizer if g > promise.s => {
                let a = promise.s / g;
                raw.accept().iter().map(|p| a * p).collect()
            }
            _ => raw.accept().to_vec(),
        };
        let base = DistGame::new(m, rounds, Player::Maximizer, table)?;
        ProtocolInstance::new(base, copies, promise, honest_side)
    }

    pub fn promise(&self) -> PromiseGap {
        PromiseGap { c: self.c, s: self.s }
    }

    /// Rounds of the base game played by the dishonest side, 1-based.
    pub fn dishonest_rounds(&self) -> Vec<u32> {
        (1..=self.base_game.k())
            .filter(|&r| self.base_game.mover(r) != self.honest_side)
            .collect()
    }

    /// Pure minimax value of the base game: what the honest side can guarantee
    /// with classical moves.
    pub fn base_guarantee(&self) -> f64 {
        let v = pure_subgame_value(&self.base_game, &[]);
        match self.honest_side {
            Player::Maximizer => v,
            Player::Minimizer => 1.0 - v,
        }
    }

    /// Whether the base game satisfies the promise for the honest side (1e−12 slack).
    pub fn promise_met(&self) -> bool {
        let v = pure_subgame_value(&self.base_game, &[]);
        match self.honest_side {
            Player::Maximizer => v >= self.c - 1e-12,
            Player::Minimizer => v <= self.s + 1e-12,
        }
    }

    /// Guaranteed honest winning probability from the completeness or soundness bound.
    pub fn honest_bound(&self) -> f64 {
        let (lo, hi) = simulation_bounds(self.c, self.s, self.copies);
        match self.honest_side {
            Player::Maximizer => lo,
            Player::Minimizer => 1.0 - hi,
        }
    }

    fn check_limits(&self) -> Result<()> {
        let g = &self.base_game;
        if g.m() > MAX_BITS || g.k() > MAX_ROUNDS || self.copies > MAX_COPIES {
            return Err(Error::range(format!(
                "exact enumeration supports m ≤ {MAX_BITS}, i ≤ {MAX_ROUNDS}, k ≤ {MAX_COPIES}; got m={}, i={}, k={}",
                g.m(),
                g.k(),
                self.copies
            )));
        }
        Ok(())
    }
}

/// Per dishonest turn, one distribution per copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryStrategy {
    pub turns: Vec<Vec<Distribution>>,
}

impl AdversaryStrategy {
    /// Every copy of every turn is the point mass on the given string.
    pub fn honest(strings: &[usize], m: u32, copies: u32) -> Result<Self> {
        let turns = strings
            .iter()
            .map(|&y| Ok(vec![Distribution::point(m, y)?; copies as usize]))
            .collect::<Result<Vec<_>>>()?;
        Ok(AdversaryStrategy { turns })
    }
}

/// Probability that all copies agree, and the distribution of the agreed string.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkStats {
    pub pass_prob: f64,
    pub conditional: Option<Distribution>,
}

fn agreement_weights(dists: &[Distribution]) -> Result<Vec<f64>> {
    let first = dists
        .first()
        .ok_or_else(|| Error::input("a chunk needs at least one copy"))?;
    if dists.iter().any(|d| d.m() != first.m()) {
        return Err(Error::input("all copies in a chunk must have the same string length"));
    }
    Ok((0..first.len())
        .map(|y| dists.iter().map(|d| d.probs()[y]).product())
        .collect())
}

/// pass_prob = Σ_y Π_j d_j(y); the conditional is proportional to Π_j d_j(y).
pub fn chunk_check_stats(dists: &[Distribution]) -> Result<ChunkStats> {
    let w = agreement_weights(dists)?;
    let pass_prob = w.iter().sum::<f64>().min(1.0);
    let conditional = if pass_prob > 0.0 {
        Some(Distribution::from_weights(dists[0].m(), &w)?)
    } else {
        None
    };
    Ok(ChunkStats { pass_prob, conditional })
}

/// Most likely string; the lexicographically smallest among ties.
pub fn honest_expected_string(d: &Distribution) -> usize {
    argbest(d.probs().iter().cloned(), |a, b| a > b)
}

fn argbest(values: impl Iterator<Item = f64>, better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| better(v, b)) {
            best = Some((i, v));
        }
    }
    best.map_or(0, |(i, _)| i)
}

/// Pure minimax value of the subgame after the moves in `prefix`.
pub fn pure_subgame_value(game: &DistGame, prefix: &[usize]) -> f64 {
    if prefix.len() == game.k() as usize {
        return game.entry(prefix);
    }
    let mover = game.mover(prefix.len() as u32 + 1);
    let mut path = prefix.to_vec();
    let values = (0..game.strings()).map(|y| {
        path.push(y);
        let v = pure_subgame_value(game, &path);
        path.pop();
        v
    });
    match mover {
        Player::Maximizer => values.fold(f64::NEG_INFINITY, f64::max),
        Player::Minimizer => values.fold(f64::INFINITY, f64::min),
    }
}

/// Backward-induction move of the player to move after `prefix`, smallest string among ties.
pub fn honest_move(game: &DistGame, prefix: &[usize]) -> usize {
    let mover = game.mover(prefix.len() as u32 + 1);
    let mut path = prefix.to_vec();
    let values: Vec<f64> = (0..game.strings())
        .map(|y| {
            path.push(y);
            let v = pure_subgame_value(game, &path);
            path.pop();
            v
        })
        .collect();
    match mover {
        Player::Maximizer => argbest(values.into_iter(), |a, b| a > b),
        Player::Minimizer => argbest(values.into_iter(), |a, b| a < b),
    }
}

/// Acceptance probability of the composed protocol. The honest side sends
/// classical strings chosen by backward induction against the strings it
/// expects from the dishonest side; a dishonest chunk that fails its check
/// loses the game for the dishonest side.
pub fn protocol_value(inst: &ProtocolInstance, adversary: &AdversaryStrategy) -> Result<f64> {
    inst.check_limits()?;
    let game = &inst.base_game;
    let dishonest = inst.dishonest_rounds();
    if adversary.turns.len() != dishonest.len() {
        return Err(Error::precondition(format!(
            "adversary has {} turns, the dishonest side plays {}",
            adversary.turns.len(),
            dishonest.len()
        )));
    }
    let fail_accept = match inst.honest_side {
        Player::Maximizer => 1.0,
        Player::Minimizer => 0.0,
    };
    let mut expected = Vec::with_capacity(game.k() as usize);
    let mut conditionals = Vec::with_capacity(dishonest.len());
    let mut pass = 1.0;
    let mut turn = 0;
    for r in 1..=game.k() {
        if game.mover(r) == inst.honest_side {
            expected.push(honest_move(game, &expected));
            continue;
        }
        let chunk = &adversary.turns[turn];
        turn += 1;
        if chunk.len() != inst.copies as usize || chunk.iter().any(|d| d.m() != game.m()) {
            return Err(Error::precondition(format!(
                "turn {turn} needs {} distributions over {}-bit strings",
                inst.copies,
                game.m()
            )));
        }
        let stats = chunk_check_stats(chunk)?;
        let Some(cond) = stats.conditional else {
            return Ok(fail_accept);
        };
        pass *= stats.pass_prob;
        expected.push(honest_expected_string(&cond));
        conditionals.push(cond);
    }
    // Honest moves are fixed by the expected strings; average over the realized dishonest ones.
    let n = game.strings();
    let combos = n.pow(conditionals.len() as u32);
    let mut actual = expected.clone();
    let mut accept = 0.0;
    for code in 0..combos {
        let mut weight = 1.0;
        let mut rest = code;
        for (j, &r) in dishonest.iter().enumerate().rev() {
            let y = rest % n;
            rest /= n;
            weight *= conditionals[j].probs()[y];
            actual[r as usize - 1] = y;
        }
        if weight > 0.0 {
            accept += weight * game.entry(&actual);
        }
    }
    Ok(pass * accept + (1.0 - pass) * fail_accept)
}

/// Winning probability of the honest side.
pub fn honest_win(inst: &ProtocolInstance, adversary: &AdversaryStrategy) -> Result<f64> {
    let a = protocol_value(inst, adversary)?;
    Ok(match inst.honest_side {
        Player::Maximizer => a,
        Player::Minimizer => 1.0 - a,
    })
}

/// (c·(1 − 2^{−k}), s + 2^{−k}·(1 − s)).
pub fn simulation_bounds(c: f64, s: f64, k: u32) -> (f64, f64) {
    let tail = 0.5f64.powi(k as i32);
    (c * (1.0 - tail), s + tail * (1.0 - s))
}

/// [`simulation_bounds`] in exact rational arithmetic.
pub fn simulation_bounds_exact(c: Ratio<i64>, s: Ratio<i64>, k: u32) -> Result<(Ratio<i64>, Ratio<i64>)> {
    if k > 62 {
        return Err(Error::range("2^k does not fit in 64 bits"));
    }
    let one = Ratio::from_integer(1);
    let tail = Ratio::new(1, 1i64 << k);
    Ok((c * (one - tail), s + tail * (one - s)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub worst_honest_win: f64,
    pub bound: f64,
    pub base_guarantee: f64,
    pub promise_met: bool,
    pub adversaries: usize,
    /// Probabilities of the worst adversary, per turn and copy.
    pub worst: Vec<Vec<Vec<f64>>>,
}

impl SweepReport {
    /// Whether the worst case respects the bound within `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.worst_honest_win >= self.bound - tol
    }
}

/// Nondecreasing `len`-tuples over `0..n`; copies are interchangeable.
fn multisets(n: usize, len: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, len, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, len, 0, &mut Vec::with_capacity(len), &mut out);
    out
}

/// Minimum honest winning probability over adversaries whose copies are
/// independent distributions on a simplex grid of resolution `grid_res`.
pub fn bound_sweep(inst: &ProtocolInstance, grid_res: f64) -> Result<SweepReport> {
    inst.check_limits()?;
    let steps = grid_steps(grid_res, MAX_SWEEP_STEPS)?;
    let m = inst.base_game.m();
    let points: Vec<Distribution> = compositions(1 << m, steps)
        .into_iter()
        .map(|c| Distribution::from_weights(m, &c.iter().map(|&v| v as f64).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let chunks = multisets(points.len(), inst.copies as usize);
    let turns = inst.dishonest_rounds().len();
    let total = chunks
        .len()
        .checked_pow(turns as u32)
        .filter(|&t| t <= MAX_SWEEP)
        .ok_or_else(|| Error::range(format!("adversary grid exceeds {MAX_SWEEP} strategies")))?;
    let per_first = total / chunks.len().max(1);
    let build = |code: usize| -> AdversaryStrategy {
        let mut rest = code;
        let mut out = vec![Vec::new(); turns];
        for slot in out.iter_mut().rev() {
            let idx = rest % chunks.len();
            rest /= chunks.len();
            *slot = chunks[idx].iter().map(|&p| points[p].clone()).collect();
        }
        AdversaryStrategy { turns: out }
    };
    let partial = if turns == 0 {
        vec![Ok((honest_win(inst, &AdversaryStrategy { turns: vec![] })?, 0))]
    } else {
        par_map(chunks.len(), |first| -> Result<(f64, usize)> {
            let mut best = (f64::INFINITY, 0);
            for j in 0..per_first {
                let code = first * per_first + j;
                let w = honest_win(inst, &build(code))?;
                if w < best.0 {
                    best = (w, code);
                }
            }
            Ok(best)
        })
    };
    let mut worst = (f64::INFINITY, 0);
    for p in partial {
        let p = p?;
        if p.0 < worst.0 {
            worst = p;
        }
    }
    let adv = if turns == 0 {
        AdversaryStrategy { turns: vec![] }
    } else {
        build(worst.1)
    };
    Ok(SweepReport {
        worst_honest_win: worst.0,
        bound: inst.honest_bound(),
        base_guarantee: inst.base_guarantee(),
        promise_met: inst.promise_met(),
        adversaries: total.max(1),
        worst: adv
            .turns
            .iter()
            .map(|t| t.iter().map(|d| d.probs().to_vec()).collect())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn gap() -> PromiseGap {
        PromiseGap::new(2.0 / 3.0, 1.0 / 3.0).unwrap()
    }

    fn dist(m: u32, p: &[f64]) -> Distribution {
        Distribution::new(m, p.to_vec()).unwrap()
    }

    #[test]
    fn chunk_examples() {
        let pm = Distribution::point(2, 3).unwrap();
        let s = chunk_check_stats(&[pm.clone(), pm.clone(), pm]).unwrap();
        assert_eq!(s.pass_prob, 1.0);
        assert_eq!(s.conditional.unwrap().probs(), &[0.0, 0.0, 0.0, 1.0]);
        let u = Distribution::uniform(1);
        let s = chunk_check_stats(&[u.clone(), u]).unwrap();
        assert_eq!(s.pass_prob, 0.5);
        assert_eq!(s.conditional.unwrap().probs(), &[0.5, 0.5]);
        let d = dist(1, &[0.75, 0.25]);
        let s = chunk_check_stats(&[d.clone(), d.clone(), d]).unwrap();
        assert_eq!(s.pass_prob, 0.4375);
        let disjoint =
            chunk_check_stats(&[Distribution::point(1, 0).unwrap(), Distribution::point(1, 1).unwrap()]).unwrap();
        assert_eq!(disjoint.pass_prob, 0.0);
        assert!(disjoint.conditional.is_none());
        assert!(chunk_check_stats(&[Distribution::uniform(1), Distribution::uniform(2)]).is_err());
    }

    #[test]
    fn expected_string_examples() {
        assert_eq!(honest_expected_string(&Distribution::point(2, 0b10).unwrap()), 0b10);
        assert_eq!(honest_expected_string(&dist(2, &[0.5, 0.0, 0.0, 0.5])), 0b00);
        assert_eq!(honest_expected_string(&dist(2, &[0.2, 0.5, 0.3, 0.0])), 0b01);
    }

    #[test]
    fn exact_bound_pair() {
        let (lo, hi) = simulation_bounds_exact(Ratio::new(2, 3), Ratio::new(1, 3), 3).unwrap();
        assert_eq!(lo, Ratio::new(7, 12));
        assert_eq!(hi, Ratio::new(5, 12));
        let (flo, fhi) = simulation_bounds(2.0 / 3.0, 1.0 / 3.0, 3);
        assert_abs_diff_eq!(flo, 7.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fhi, 5.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn honest_adversary_reproduces_table() {
        for side in [Player::Maximizer, Player::Minimizer] {
            let inst = ProtocolInstance::random(2, 3, 3, gap(), side, 17).unwrap();
            let g = &inst.base_game;
            let rounds = inst.dishonest_rounds();
            for code in 0..g.strings().pow(rounds.len() as u32) {
                let strings: Vec<usize> = (0..rounds.len())
                    .map(|j| (code / g.strings().pow((rounds.len() - 1 - j) as u32)) % g.strings())
                    .collect();
                let adv = AdversaryStrategy::honest(&strings, 2, 3).unwrap();
                let mut moves = Vec::new();
                let mut d = 0;
                for r in 1..=g.k() {
                    if g.mover(r) == side {
                        moves.push(honest_move(g, &moves));
                    } else {
                        moves.push(strings[d]);
                        d += 1;
                    }
                }
                assert_eq!(protocol_value(&inst, &adv).unwrap(), g.entry(&moves));
            }
        }
    }

    #[test]
    fn single_copy_uniform_cheat() {
        // i = 2 with an honest maximizer: uniform over two strings, one copy.
        let inst = ProtocolInstance::random(1, 2, 1, gap(), Player::Maximizer, 3).unwrap();
        assert!(inst.promise_met());
        let adv = AdversaryStrategy {
            turns: vec![vec![Distribution::uniform(1)]],
        };
        let w = honest_win(&inst, &adv).unwrap();
        assert!(w >= inst.c * 0.5 - 1e-12);
        assert!(w >= inst.base_guarantee() - 1e-12);
    }

    #[test]
    fn tie_at_one_half_meets_the_soundness_bound() {
        // Honest minimizer answers the expected string 0; the adversary's 1 wins outright.
        let s = 1.0 / 3.0;
        let base = DistGame::new(1, 2, Player::Maximizer, vec![s, 1.0, 1.0, 0.0]).unwrap();
        let inst = ProtocolInstance::new(base, 1, gap(), Player::Minimizer).unwrap();
        assert_eq!(honest_move(&inst.base_game, &[0]), 0);
        let adv = AdversaryStrategy {
            turns: vec![vec![Distribution::uniform(1)]],
        };
        let accept = protocol_value(&inst, &adv).unwrap();
        assert_abs_diff_eq!(accept, simulation_bounds(2.0 / 3.0, s, 1).1, epsilon = 1e-15);
    }

    #[test]
    fn single_copy_bound_needs_binary_strings() {
        // m = 2, k = 1: uniform over four strings agrees off the expected one with probability 3/4.
        let s = 1.0 / 3.0;
        let mut table = vec![0.0; 16];
        table[..4].copy_from_slice(&[s, 1.0, 1.0, 1.0]);
        for y1 in 1..4 {
            table[y1 * 4] = 1.0;
        }
        let base = DistGame::new(2, 2, Player::Maximizer, table).unwrap();
        let inst = ProtocolInstance::new(base, 1, gap(), Player::Minimizer).unwrap();
        assert!(inst.promise_met());
        let adv = AdversaryStrategy {
            turns: vec![vec![Distribution::uniform(2)]],
        };
        let accept = protocol_value(&inst, &adv).unwrap();
        assert_abs_diff_eq!(accept, 0.25 * s + 0.75, epsilon = 1e-15);
        assert!(accept > simulation_bounds(2.0 / 3.0, s, 1).1);
        // Two copies already restore it.
        let two = ProtocolInstance::new(inst.base_game.clone(), 2, gap(), Player::Minimizer).unwrap();
        assert!(bound_sweep(&two, 1.0 / 8.0).unwrap().holds(1e-9));
    }

    #[test]
    fn point_mass_grid_gives_the_base_guarantee() {
        for side in [Player::Maximizer, Player::Minimizer] {
            let inst = ProtocolInstance::random(1, 3, 2, gap(), side, 8).unwrap();
            let rep = bound_sweep(&inst, 1.0).unwrap();
            assert_abs_diff_eq!(rep.worst_honest_win, rep.base_guarantee, epsilon = 1e-12);
        }
    }

    #[test]
    fn sweep_respects_bounds() {
        for seed in 0..4 {
            for side in [Player::Maximizer, Player::Minimizer] {
                for k in 1..=4 {
                    let inst = ProtocolInstance::random(1, 2, k, gap(), side, seed).unwrap();
                    assert!(inst.promise_met());
                    let rep = bound_sweep(&inst, 1.0 / 16.0).unwrap();
                    assert!(rep.holds(1e-9), "seed {seed} {side:?} k={k}: {rep:?}");
                }
            }
        }
    }

    #[test]
    fn three_rounds_exact_c_guarantee() {
        let seed = (0..)
            .find(|&s| pure_subgame_value(&DistGame::random(1, 3, Player::Maximizer, s).unwrap(), &[]) < 2.0 / 3.0)
            .unwrap();
        let inst = ProtocolInstance::random(1, 3, 2, gap(), Player::Maximizer, seed).unwrap();
        assert_abs_diff_eq!(inst.base_guarantee(), 2.0 / 3.0, epsilon = 1e-12);
        let rep = bound_sweep(&inst, 1.0 / 8.0).unwrap();
        assert!(rep.worst_honest_win >= 2.0 / 3.0 * 0.75 - 1e-9);
    }

    #[test]
    fn limits_and_shapes() {
        let big = ProtocolInstance::random(1, 2, 7, gap(), Player::Maximizer, 1).unwrap();
        assert!(bound_sweep(&big, 0.5).is_err());
        let inst = ProtocolInstance::random(1, 2, 2, gap(), Player::Maximizer, 1).unwrap();
        assert!(bound_sweep(&inst, 1.0 / 128.0).is_err());
        let wrong = AdversaryStrategy { turns: vec![] };
        assert!(protocol_value(&inst, &wrong).is_err());
        let short = AdversaryStrategy {
            turns: vec![vec![Distribution::uniform(1)]],
        };
        assert!(protocol_value(&inst, &short).is_err());
    }

    #[test]
    fn instance_json() {
        let inst = ProtocolInstance::random(1, 2, 3, gap(), Player::Minimizer, 2).unwrap();
        let v = serde_json::to_value(&inst).unwrap();
        assert_eq!(v["k"], 3);
        assert_eq!(v["honest_side"], "minimizer");
        assert_eq!(v["base_game"]["k"], 2);
        let back: ProtocolInstance = serde_json::from_value(v).unwrap();
        assert_eq!(back, inst);
        let bad = r#"{"base_game":{"m":1,"k":2,"first_mover":"maximizer","accept":[0,0,0,0]},"k":1,"c":0.2,"s":0.5,"honest_side":"maximizer"}"#;
        assert!(serde_json::from_str::<ProtocolInstance>(bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn chunk_stats_are_probabilities(ws in proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, 4), 1..5)) {
            let dists: Vec<Distribution> = ws.iter().map(|w| Distribution::from_weights(2, w).unwrap()).collect();
            let s = chunk_check_stats(&dists).unwrap();
            prop_assert!((0.0..=1.0).contains(&s.pass_prob));
            let total: f64 = s.conditional.unwrap().probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        // Identical copies agree on an unexpected string with probability at most 2^{-k}.
        #[test]
        fn cheating_suppression(w in proptest::collection::vec(0.0f64..1.0, 4), k in 1u32..=6, m in 1u32..=2) {
            let n = 1usize << m;
            prop_assume!(w[..n].iter().sum::<f64>() > 1e-6);
            prop_assume!(m == 1 || k >= 2);
            let d = Distribution::from_weights(m, &w[..n]).unwrap();
            let stats = chunk_check_stats(&vec![d.clone(); k as usize]).unwrap();
            let cond = stats.conditional.unwrap();
            let j = honest_expected_string(&d);
            prop_assert_eq!(j, honest_expected_string(&cond));
            let other = stats.pass_prob * (1.0 - cond.probs()[j]);
            prop_assert!(other <= 0.5f64.powi(k as i32) + 1e-12);
            for y in (0..n).filter(|&y| y != j) {
                prop_assert!(d.probs()[y] <= 0.5 + 1e-12);
            }
        }
    }
}
