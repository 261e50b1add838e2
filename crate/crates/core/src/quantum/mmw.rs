//! Optimistic matrix multiplicative weights for the bilinear game
//! max_ρ min_σ tr(R(ρ⊗σ)), with exact best-response certificates.

use serde::{Deserialize, Serialize};

use super::effective::{contract_max, contract_min};
use super::fiber::FiberSpace;
use super::game::{GameValueReport, QuantumGame};
use crate::error::{Error, Result};
use crate::linops::{eigh, ComplexMatrix, DensityMatrix, Player};

/// Which optimization is outer when the inner fiber game is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    /// max over the fiber of min over σ; reports the certified lower value.
    MaxThenMin,
    /// min over σ of max over the fiber; reports the certified upper value.
    MinThenMax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmwConfig {
    /// Constant step size of both players.
    pub eta: f64,
    pub max_iter: usize,
    /// Certificates are recomputed when the iteration count grows by this factor.
    pub check_growth: f64,
}

impl Default for MmwConfig {
    fn default() -> Self {
        MmwConfig {
            eta: 4.0,
            max_iter: 200_000,
            check_growth: 1.1,
        }
    }
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 0.1) {
        return Err(Error::input(format!("tolerance must lie in (0, 0.1], got {tol}")));
    }
    Ok(())
}

/// Normalized exp(H).
pub(crate) fn gibbs(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eigh(h)?;
    let top = eig.max();
    let w = eig.map_spectrum(|l| (l - top).exp());
    let tr = w.trace().re;
    Ok(w.scale(1.0 / tr).hermitian_part())
}

/// Feasible set of the maximizer.
pub(crate) trait MaxSpace {
    /// argmax tr(Kρ) + S(ρ).
    fn play(&mut self, k: &ComplexMatrix) -> Result<ComplexMatrix>;
    /// Upper bound on max tr(Eρ): at most `goal`, or within `target` of the
    /// true maximum.
    fn response_bound(&mut self, e: &ComplexMatrix, target: f64, goal: f64) -> Result<f64>;
}

pub(crate) struct FullSpace;

impl MaxSpace for FullSpace {
    fn play(&mut self, k: &ComplexMatrix) -> Result<ComplexMatrix> {
        gibbs(k)
    }

    fn response_bound(&mut self, e: &ComplexMatrix, _target: f64, _goal: f64) -> Result<f64> {
        Ok(eigh(e)?.max())
    }
}

impl MaxSpace for FiberSpace {
    fn play(&mut self, k: &ComplexMatrix) -> Result<ComplexMatrix> {
        FiberSpace::play(self, k)
    }

    fn response_bound(&mut self, e: &ComplexMatrix, target: f64, goal: f64) -> Result<f64> {
        self.upper_bound(e, target, goal)
    }
}

/// Alternating optimistic updates of both players.
struct Dynamics<'a, S> {
    r: &'a ComplexMatrix,
    da: usize,
    db: usize,
    space: &'a mut S,
    order: Order,
    eta: f64,
    cum_e: ComplexMatrix,
    last_e: ComplexMatrix,
    cum_f: ComplexMatrix,
    last_f: ComplexMatrix,
    t: usize,
}

impl<'a, S: MaxSpace> Dynamics<'a, S> {
    fn new(r: &'a ComplexMatrix, da: usize, db: usize, space: &'a mut S, order: Order, eta: f64) -> Self {
        Dynamics {
            r,
            da,
            db,
            space,
            order,
            eta,
            cum_e: ComplexMatrix::zeros(da),
            last_e: ComplexMatrix::zeros(da),
            cum_f: ComplexMatrix::zeros(db),
            last_f: ComplexMatrix::zeros(db),
            t: 0,
        }
    }

    fn step(&mut self) -> Result<()> {
        let (r, da, db, eta) = (self.r, self.da, self.db, self.eta);
        let (e, f) = match self.order {
            Order::MaxThenMin => {
                let mut k = self.cum_e.clone();
                k.add_scaled(1.0, &self.last_e);
                let rho = self.space.play(&k.scale(eta))?;
                let f = contract_max(r, da, db, &rho).hermitian_part();
                let mut k = self.cum_f.clone();
                k.add_scaled(1.0, &f);
                let sigma = gibbs(&k.scale(-eta))?;
                (contract_min(r, da, db, &sigma).hermitian_part(), f)
            }
            Order::MinThenMax => {
                let mut k = self.cum_f.clone();
                k.add_scaled(1.0, &self.last_f);
                let sigma = gibbs(&k.scale(-eta))?;
                let e = contract_min(r, da, db, &sigma).hermitian_part();
                let mut k = self.cum_e.clone();
                k.add_scaled(1.0, &e);
                let rho = self.space.play(&k.scale(eta))?;
                (e, contract_max(r, da, db, &rho).hermitian_part())
            }
        };
        self.cum_e.add_scaled(1.0, &e);
        self.cum_f.add_scaled(1.0, &f);
        self.last_e = e;
        self.last_f = f;
        self.t += 1;
        Ok(())
    }

    /// Best guaranteed payoff of the average and last maximizer states.
    /// Payoffs are linear, so the average state's effective operator is
    /// the running mean.
    fn lower(&self) -> Result<f64> {
        let avg = eigh(&self.cum_f.scale(1.0 / self.t as f64))?.min();
        Ok(avg.max(eigh(&self.last_f)?.min()))
    }

    /// Best concession bound of the average and last minimizer states.
    fn upper(&mut self, target: f64, goal: f64) -> Result<f64> {
        let avg = self.cum_e.scale(1.0 / self.t as f64);
        let up = self.space.response_bound(&avg, target, goal)?;
        if up <= goal {
            return Ok(up);
        }
        Ok(up.min(self.space.response_bound(&self.last_e, target, goal)?))
    }
}

/// Runs the dynamics until the certified gap is at most `tol`, or until the
/// upper certificate falls below `cutoff`. The report's value is the
/// midpoint of the certificates.
#[allow(clippy::too_many_arguments)]
pub(crate) fn solve<S: MaxSpace>(
    r: &ComplexMatrix,
    da: usize,
    db: usize,
    space: &mut S,
    order: Order,
    tol: f64,
    cfg: &MmwConfig,
    cutoff: f64,
) -> Result<GameValueReport> {
    let mut dyn_ = Dynamics::new(r, da, db, space, order, cfg.eta);
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut next_check = 1usize;
    let report = |lower: f64, upper: f64, t: usize| GameValueReport {
        value: 0.5 * (lower + upper),
        lower_cert: lower,
        upper_cert: upper,
        gap: (upper - lower).max(0.0),
        iterations: t,
    };
    while dyn_.t < cfg.max_iter {
        dyn_.step()?;
        let t = dyn_.t;
        if t >= next_check {
            next_check = ((t as f64 * cfg.check_growth).ceil() as usize).max(t + 1);
            lower = lower.max(dyn_.lower()?);
            // Upper bounds need only be as sharp as the current gap.
            let target = 0.25 * tol.max(upper.min(1.0) - lower);
            upper = upper.min(dyn_.upper(target, lower + tol)?);
            if upper - lower <= tol || upper < cutoff {
                return Ok(report(lower, upper, t));
            }
        }
    }
    let rep = report(lower, upper, dyn_.t);
    Err(Error::Convergence {
        iterations: dyn_.t,
        residual: rep.gap,
        report: Some(Box::new(rep)),
    })
}

/// Certified lower bound on the fiber game value after a fixed number of
/// iterations; used to rank candidate marginals cheaply.
pub(crate) fn fiber_lower_bound(
    game: &QuantumGame,
    rho1: &DensityMatrix,
    iterations: usize,
    cfg: &MmwConfig,
) -> Result<f64> {
    let (_, d2) = fiber_dims(game)?;
    let (da, db) = game.sides();
    let mut space = FiberSpace::new(rho1, d2)?;
    let mut dyn_ = Dynamics::new(
        game.observable().matrix(),
        da,
        db,
        &mut space,
        Order::MaxThenMin,
        cfg.eta,
    );
    let mut lower = f64::NEG_INFINITY;
    for _ in 0..iterations.max(1) {
        dyn_.step()?;
        lower = lower.max(dyn_.lower()?);
    }
    Ok(lower)
}

/// max_ρ min_σ tr(R(ρ⊗σ)) of a two-turn game; value is the certificate midpoint.
pub fn value2(game: &QuantumGame, tol: f64) -> Result<GameValueReport> {
    value2_with(game, tol, &MmwConfig::default())
}

pub fn value2_with(game: &QuantumGame, tol: f64, cfg: &MmwConfig) -> Result<GameValueReport> {
    check_tol(tol)?;
    if game.turns() != 2 {
        return Err(Error::input(format!(
            "value2 needs a two-turn game, got {} turns",
            game.turns()
        )));
    }
    let (da, db) = game.sides();
    solve(
        game.observable().matrix(),
        da,
        db,
        &mut FullSpace,
        Order::MaxThenMin,
        tol,
        cfg,
        f64::NEG_INFINITY,
    )
}

/// Inner game of a three-turn game once the maximizer has committed to
/// `rho1` on its first register: the maximizer's final state ranges over
/// states with that marginal, the minimizer over all states.
pub fn value2_fiber(game: &QuantumGame, rho1: &DensityMatrix, order: Order, tol: f64) -> Result<GameValueReport> {
    value2_fiber_with(game, rho1, order, tol, &MmwConfig::default())
}

pub fn value2_fiber_with(
    game: &QuantumGame,
    rho1: &DensityMatrix,
    order: Order,
    tol: f64,
    cfg: &MmwConfig,
) -> Result<GameValueReport> {
    fiber_game(game, rho1, order, tol, cfg, f64::NEG_INFINITY).map(|(rep, _)| rep)
}

/// Affine majorant tr(ρ₁′Y) + c of the fiber game value as a function of the
/// committed marginal ρ₁′.
pub(crate) type Plane = (f64, ComplexMatrix);

/// Fiber game that may stop early once its value is certified below `cutoff`,
/// with a majorant of the value around `rho1` when one is available.
pub(crate) fn fiber_game(
    game: &QuantumGame,
    rho1: &DensityMatrix,
    order: Order,
    tol: f64,
    cfg: &MmwConfig,
    cutoff: f64,
) -> Result<(GameValueReport, Option<Plane>)> {
    check_tol(tol)?;
    let (d1, d2) = fiber_dims(game)?;
    if rho1.dim() != d1 {
        return Err(Error::input(format!(
            "first-register state has dimension {}, expected {d1}",
            rho1.dim()
        )));
    }
    let (da, db) = game.sides();
    let mut space = FiberSpace::new(rho1, d2)?;
    let mut rep = solve(game.observable().matrix(), da, db, &mut space, order, tol, cfg, cutoff)?;
    rep.value = match order {
        Order::MaxThenMin => rep.lower_cert,
        Order::MinThenMax => rep.upper_cert,
    };
    Ok((rep, space.plane()))
}

/// Dimensions of the maximizer's first register and of the rest of its registers.
pub(crate) fn fiber_dims(game: &QuantumGame) -> Result<(usize, usize)> {
    if game.turns() != 3 {
        return Err(Error::input(format!(
            "the fiber game needs a three-turn game, got {} turns",
            game.turns()
        )));
    }
    let first = game
        .layout()
        .registers()
        .iter()
        .find(|r| r.owner == Player::Maximizer)
        .expect("three-turn layouts start with the maximizer")
        .dim();
    let (da, _) = game.sides();
    Ok((first, da / first))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{random_density, random_observable, tensor, Observable};
    use crate::quantum::effective::payoff_of;
    use proptest::prelude::*;

    fn two(r: ComplexMatrix, a: u32, b: u32) -> QuantumGame {
        QuantumGame::two_turn(Observable::new(r).unwrap(), a, b).unwrap()
    }

    fn check_report(rep: &GameValueReport, tol: f64) {
        assert!(rep.lower_cert <= rep.value + 1e-15 && rep.value <= rep.upper_cert + 1e-15);
        assert!(rep.gap <= tol && rep.gap >= 0.0);
    }

    #[test]
    fn constant_game() {
        let rep = value2(&two(ComplexMatrix::identity(4), 1, 1), 1e-4).unwrap();
        check_report(&rep, 1e-4);
        assert!((rep.value - 1.0).abs() < 1e-4);
    }

    #[test]
    fn orthogonal_escape() {
        let rep = value2(&two(ComplexMatrix::basis_projector(4, 0), 1, 1), 1e-4).unwrap();
        check_report(&rep, 1e-4);
        assert!(rep.value.abs() < 1e-4);
    }

    #[test]
    fn half_diagonal_game_closed_form() {
        let mut r = ComplexMatrix::basis_projector(4, 0);
        r.add_scaled(1.0, &ComplexMatrix::basis_projector(4, 3));
        let rep = value2(&two(r.scale(0.5), 1, 1), 1e-4).unwrap();
        // Diagonal reduction: payoff ½(p·q + (1−p)(1−q)); grid over p at 1/200.
        let grid = (0..=200)
            .map(|k| {
                let p = k as f64 / 200.0;
                (0.5 * p).min(0.5 * (1.0 - p))
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((grid - 0.25).abs() < 1e-12);
        assert!((rep.value - grid).abs() < 1e-3);
        assert!(rep.lower_cert <= 0.25 + 1e-12 && rep.upper_cert >= 0.25 - 1e-12);
    }

    #[test]
    fn certificates_bracket_probe_values() {
        let game = two(random_observable(8, 5).matrix().clone(), 2, 1);
        let rep = value2(&game, 1e-4).unwrap();
        check_report(&rep, 1e-4);
        let r = game.observable().matrix();
        // Any fixed ρ guarantees at most the value; any fixed σ concedes at least it.
        for s in 0..50 {
            let rho = random_density(4, 300 + s);
            let guaranteed = eigh(&contract_max(r, 4, 2, rho.matrix()).hermitian_part())
                .unwrap()
                .min();
            assert!(guaranteed <= rep.upper_cert + 1e-10);
            let sigma = random_density(2, 600 + s);
            let conceded = eigh(&contract_min(r, 4, 2, sigma.matrix()).hermitian_part())
                .unwrap()
                .max();
            assert!(conceded >= rep.lower_cert - 1e-10);
            assert!(payoff_of(r, 4, 2, rho.matrix(), sigma.matrix()).is_finite());
        }
    }

    #[test]
    fn complement_symmetry() {
        let tol = 1e-4;
        for seed in 0..50 {
            let g = QuantumGame::two_turn(random_observable(4, 300 + seed), 1, 1).unwrap();
            let v = value2(&g, tol).unwrap();
            let w = value2(&g.complement().unwrap(), tol).unwrap();
            assert!(
                (w.value - (1.0 - v.value)).abs() <= 2.0 * tol,
                "seed {seed}: {} vs {}",
                w.value,
                v.value
            );
            // The certificates must overlap after reflection.
            assert!(1.0 - w.upper_cert <= v.upper_cert + 1e-12);
            assert!(1.0 - w.lower_cert >= v.lower_cert - 1e-12);
        }
    }

    #[test]
    fn monotone_in_observable() {
        let tol = 1e-4;
        for seed in 0..10 {
            let r = random_observable(8, 400 + seed);
            let base = value2(&QuantumGame::two_turn(r.clone(), 2, 1).unwrap(), tol).unwrap();
            for eps in [0.01, 0.1, 0.5] {
                let mut bigger = r.matrix().scale(1.0 - eps);
                bigger.add_scaled(eps, &ComplexMatrix::identity(8));
                let up = value2(&two(bigger, 2, 1), tol).unwrap();
                assert!(up.value >= base.value - 2.0 * tol);
                assert!(up.upper_cert >= base.lower_cert - 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_tolerance_and_turns() {
        let g = two(ComplexMatrix::identity(4), 1, 1);
        assert!(value2(&g, 0.0).is_err());
        assert!(value2(&g, 0.5).is_err());
        let g3 = QuantumGame::three_turn(Observable::identity(8), 1, 1, 1).unwrap();
        assert!(value2(&g3, 1e-3).is_err());
        assert!(value2_fiber(&g, &DensityMatrix::maximally_mixed(2), Order::MaxThenMin, 1e-3).is_err());
    }

    #[test]
    fn convergence_failure_carries_report() {
        let game = two(random_observable(8, 5).matrix().clone(), 2, 1);
        let cfg = MmwConfig {
            max_iter: 3,
            ..Default::default()
        };
        let err = value2_with(&game, 1e-6, &cfg).unwrap_err();
        let rep = err.report().expect("partial report");
        assert_eq!(rep.iterations, 3);
        assert!(rep.lower_cert <= rep.upper_cert);
    }

    #[test]
    fn fiber_constant_game() {
        let game = QuantumGame::three_turn(Observable::identity(8), 1, 1, 1).unwrap();
        let rho1 = DensityMatrix::maximally_mixed(2);
        for order in [Order::MaxThenMin, Order::MinThenMax] {
            let rep = value2_fiber(&game, &rho1, order, 1e-4).unwrap();
            assert!((rep.value - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn fiber_without_extension_is_frozen() {
        let game = QuantumGame::three_turn(random_observable(4, 8), 1, 1, 0).unwrap();
        let rho1 = random_density(2, 9);
        let f = contract_max(game.observable().matrix(), 2, 2, rho1.matrix()).hermitian_part();
        let want = eigh(&f).unwrap().min();
        for order in [Order::MaxThenMin, Order::MinThenMax] {
            let rep = value2_fiber(&game, &rho1, order, 1e-4).unwrap();
            assert!((rep.value - want).abs() < 1e-4, "{order:?}: {} vs {want}", rep.value);
        }
    }

    #[test]
    fn fiber_orders_agree() {
        for seed in 0..3 {
            let game = QuantumGame::three_turn(random_observable(8, 20 + seed), 1, 1, 1).unwrap();
            let rho1 = random_density(2, 30 + seed);
            let a = value2_fiber(&game, &rho1, Order::MaxThenMin, 1e-4).unwrap();
            let b = value2_fiber(&game, &rho1, Order::MinThenMax, 1e-4).unwrap();
            check_report(&a, 1e-4);
            check_report(&b, 1e-4);
            assert!((a.value - b.value).abs() <= 2e-4);
        }
    }

    #[test]
    fn fiber_product_marginal_lower_bound() {
        // ρ₁ ⊗ τ is in the fiber, so it guarantees at most the value.
        let game = QuantumGame::three_turn(random_observable(8, 41), 1, 1, 1).unwrap();
        let rho1 = random_density(2, 42);
        let rep = value2_fiber(&game, &rho1, Order::MaxThenMin, 1e-4).unwrap();
        for s in 0..20 {
            let tau = random_density(2, 500 + s);
            let rho = tensor(rho1.matrix(), tau.matrix());
            let f = contract_max(game.observable().matrix(), 4, 2, &rho).hermitian_part();
            assert!(eigh(&f).unwrap().min() <= rep.upper_cert + 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn certificates_are_ordered_within_the_spectrum(s in any::<u64>()) {
            let obs = random_observable(4, s);
            let eig = crate::linops::eigh(obs.matrix()).unwrap();
            let rep = value2(&QuantumGame::two_turn(obs, 1, 1).unwrap(), 1e-3).unwrap();
            prop_assert!((0.0..=1.0).contains(&rep.value));
            prop_assert!(rep.lower_cert <= rep.value && rep.value <= rep.upper_cert);
            prop_assert!(rep.value >= eig.min() - 1e-3 && rep.value <= eig.max() + 1e-3);
        }
    }
}
