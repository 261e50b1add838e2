use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{ComplexMatrix, Observable, Player, Register, RegisterLayout};

/// Referee observable together with the register structure of the game.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumGame {
    observable: Observable,
    layout: RegisterLayout,
}

impl QuantumGame {
    pub fn new(observable: Observable, layout: RegisterLayout) -> Result<Self> {
        if layout.view().is_some() {
            return Err(Error::input("a game needs a full layout, not a player view"));
        }
        if observable.dim() != layout.total_dim() {
            return Err(Error::input(format!(
                "observable dimension {} does not match layout dimension {}",
                observable.dim(),
                layout.total_dim()
            )));
        }
        let turns = layout.turns();
        if !(2..=3).contains(&turns) {
            return Err(Error::input(format!("games have 2 or 3 turns, got {turns}")));
        }
        Ok(QuantumGame { observable, layout })
    }

    /// Two-turn game: maximizer register of `a` qubits then minimizer register of `b`.
    pub fn two_turn(observable: Observable, a: u32, b: u32) -> Result<Self> {
        let layout = RegisterLayout::new(vec![
            Register::new("X1", a, Player::Maximizer, 1),
            Register::new("Y1", b, Player::Minimizer, 2),
        ])?;
        QuantumGame::new(observable, layout)
    }

    /// Three-turn game over registers X1 (max), Y1 (min), X2 (max).
    pub fn three_turn(observable: Observable, x1: u32, y1: u32, x2: u32) -> Result<Self> {
        let layout = RegisterLayout::new(vec![
            Register::new("X1", x1, Player::Maximizer, 1),
            Register::new("Y1", y1, Player::Minimizer, 2),
            Register::new("X2", x2, Player::Maximizer, 3),
        ])?;
        QuantumGame::new(observable, layout)
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn turns(&self) -> usize {
        self.layout.turns()
    }

    /// Dimensions (maximizer side, minimizer side) of the grouped space.
    pub fn sides(&self) -> (usize, usize) {
        (
            self.layout.player_dim(Player::Maximizer),
            self.layout.player_dim(Player::Minimizer),
        )
    }

    /// Two-turn game in which each player's registers are fused into one.
    /// The observable is unchanged because matrices already group players.
    pub fn merged(&self) -> Result<QuantumGame> {
        let qubits = |p: Player| -> u32 {
            self.layout
                .registers()
                .iter()
                .filter(|r| r.owner == p)
                .map(|r| r.qubits)
                .sum()
        };
        QuantumGame::two_turn(
            self.observable.clone(),
            qubits(Player::Maximizer),
            qubits(Player::Minimizer),
        )
    }

    /// Two-turn game with observable I − R and the players' roles swapped.
    pub fn complement(&self) -> Result<QuantumGame> {
        if self.turns() != 2 {
            return Err(Error::input("the complement game is defined for two-turn games"));
        }
        let (da, db) = self.sides();
        let r = self.observable.matrix();
        // Old index a·db + b becomes b·da + a.
        let swapped = ComplexMatrix::from_fn(da * db, |i, j| {
            let (b, a, bp, ap) = (i / da, i % da, j / da, j % da);
            -r[(a * db + b, ap * db + bp)]
        });
        let mut m = swapped;
        for k in 0..da * db {
            m[(k, k)] += 1.0;
        }
        QuantumGame::two_turn(
            Observable::new(m.hermitian_part())?,
            db.trailing_zeros(),
            da.trailing_zeros(),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct QuantumGameRepr {
    observable: Observable,
    registers: Vec<Register>,
}

impl Serialize for QuantumGame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuantumGameRepr {
            observable: self.observable.clone(),
            registers: self.layout.registers().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantumGame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = QuantumGameRepr::deserialize(d)?;
        let layout = RegisterLayout::new(repr.registers).map_err(serde::de::Error::custom)?;
        QuantumGame::new(repr.observable, layout).map_err(serde::de::Error::custom)
    }
}

/// Completeness/soundness thresholds, 0 ≤ s < c ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PromiseGap {
    pub c: f64,
    pub s: f64,
}

impl PromiseGap {
    pub fn new(c: f64, s: f64) -> Result<Self> {
        if !(0.0 <= s && s < c && c <= 1.0) {
            return Err(Error::input(format!(
                "promise gap needs 0 ≤ s < c ≤ 1, got c={c}, s={s}"
            )));
        }
        Ok(PromiseGap { c, s })
    }
}

/// Value estimate with two-sided certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameValueReport {
    pub value: f64,
    pub lower_cert: f64,
    pub upper_cert: f64,
    pub gap: f64,
    pub iterations: usize,
}

impl GameValueReport {
    pub fn exact(value: f64) -> Self {
        GameValueReport {
            value,
            lower_cert: value,
            upper_cert: value,
            gap: 0.0,
            iterations: 0,
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower_cert + self.upper_cert)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::random_observable;

    #[test]
    fn json_round_trip_keeps_layout() {
        let g = QuantumGame::three_turn(random_observable(8, 1), 1, 1, 1).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["registers"].as_array().unwrap().len(), 3);
        assert_eq!(v["registers"][1]["owner"], "minimizer");
        assert_eq!(v["observable"]["dim"], 8);
        let back: QuantumGame = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(QuantumGame::two_turn(random_observable(8, 1), 1, 1).is_err());
    }

    #[test]
    fn complement_is_an_involution() {
        let g = QuantumGame::two_turn(random_observable(8, 4), 2, 1).unwrap();
        let c = g.complement().unwrap();
        assert_eq!(c.sides(), (2, 4));
        let back = c.complement().unwrap();
        assert!(back.observable().matrix().max_abs_diff(g.observable().matrix()) < 1e-12);
    }

    #[test]
    fn promise_gap_bounds() {
        assert!(PromiseGap::new(2.0 / 3.0, 1.0 / 3.0).is_ok());
        assert!(PromiseGap::new(0.3, 0.3).is_err());
        assert!(PromiseGap::new(1.1, 0.3).is_err());
    }
}
