//! Register layouts and the tensor-factor bookkeeping behind partial traces.

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, C_ZERO};
use crate::error::{Error, Result};

/// Hard cap on total qubits handled by dense routines.
pub const MAX_QUBITS: u32 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Maximizer,
    Minimizer,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Maximizer => Player::Minimizer,
            Player::Minimizer => Player::Maximizer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub id: String,
    pub qubits: u32,
    pub owner: Player,
    pub turn: u32,
}

impl Register {
    pub fn new(id: impl Into<String>, qubits: u32, owner: Player, turn: u32) -> Self {
        Register {
            id: id.into(),
            qubits,
            owner,
            turn,
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.qubits
    }
}

/// Registers in turn order plus the tensor-factor order used by matrices.
///
/// A game layout lists every register; its matrices put all maximizer
/// registers first (in turn order) followed by all minimizer registers, so
/// a joint state is `ρ ⊗ σ`. A player view holds one player's registers and
/// uses turn order directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    /// `factor_order[f]` is the index into `registers` of tensor factor `f`.
    factor_order: Vec<usize>,
    view: Option<Player>,
}

impl RegisterLayout {
    /// Full game layout. Turns must strictly increase and owners alternate
    /// starting with the maximizer.
    pub fn new(mut registers: Vec<Register>) -> Result<Self> {
        if registers.is_empty() {
            return Err(Error::input("layout needs at least one register"));
        }
        registers.sort_by_key(|r| r.turn);
        check_common(&registers)?;
        for (k, r) in registers.iter().enumerate() {
            let expected = if k % 2 == 0 {
                Player::Maximizer
            } else {
                Player::Minimizer
            };
            if r.owner != expected {
                return Err(Error::input(format!(
                    "register {} at position {k} should belong to the {:?}",
                    r.id, expected
                )));
            }
        }
        let mut factor_order: Vec<usize> = (0..registers.len())
            .filter(|&k| registers[k].owner == Player::Maximizer)
            .collect();
        factor_order.extend((0..registers.len()).filter(|&k| registers[k].owner == Player::Minimizer));
        Ok(RegisterLayout {
            registers,
            factor_order,
            view: None,
        })
    }

    /// Layout over one player's registers (turn order, no alternation rule).
    pub fn player_view(registers: Vec<Register>, owner: Player) -> Result<Self> {
        let mut registers = registers;
        registers.sort_by_key(|r| r.turn);
        check_common(&registers)?;
        if let Some(r) = registers.iter().find(|r| r.owner != owner) {
            return Err(Error::input(format!(
                "register {} does not belong to the {owner:?}",
                r.id
            )));
        }
        let factor_order = (0..registers.len()).collect();
        Ok(RegisterLayout {
            registers,
            factor_order,
            view: Some(owner),
        })
    }

    /// The registers owned by `owner`, as a player view.
    pub fn view_of(&self, owner: Player) -> Result<RegisterLayout> {
        let regs: Vec<Register> = self.registers.iter().filter(|r| r.owner == owner).cloned().collect();
        if regs.is_empty() {
            return Err(Error::input(format!("the {owner:?} owns no registers")));
        }
        RegisterLayout::player_view(regs, owner)
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn view(&self) -> Option<Player> {
        self.view
    }

    /// Registers in tensor-factor order.
    pub fn factors(&self) -> impl Iterator<Item = &Register> {
        self.factor_order.iter().map(move |&k| &self.registers[k])
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.factors().map(Register::dim).collect()
    }

    pub fn total_qubits(&self) -> u32 {
        self.registers.iter().map(|r| r.qubits).sum()
    }

    pub fn total_dim(&self) -> usize {
        1usize << self.total_qubits()
    }

    pub fn player_dim(&self, owner: Player) -> usize {
        1usize
            << self
                .registers
                .iter()
                .filter(|r| r.owner == owner)
                .map(|r| r.qubits)
                .sum::<u32>()
    }

    pub fn register(&self, id: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.id == id)
    }

    /// Number of distinct turns.
    pub fn turns(&self) -> usize {
        self.registers.len()
    }

    fn factor_position(&self, id: &str) -> Result<usize> {
        self.factors()
            .position(|r| r.id == id)
            .ok_or_else(|| Error::input(format!("unknown register id {id:?}")))
    }

    /// Factor positions for a set of ids, rejecting unknown ids.
    pub(crate) fn positions(&self, ids: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let p = self.factor_position(id)?;
            if !out.contains(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }
}

fn check_common(registers: &[Register]) -> Result<()> {
    for w in registers.windows(2) {
        if w[0].turn >= w[1].turn {
            return Err(Error::input(format!(
                "turn indices must strictly increase ({} then {})",
                w[0].turn, w[1].turn
            )));
        }
    }
    for (k, r) in registers.iter().enumerate() {
        if registers[..k].iter().any(|o| o.id == r.id) {
            return Err(Error::input(format!("duplicate register id {:?}", r.id)));
        }
    }
    let total: u32 = registers.iter().map(|r| r.qubits).sum();
    if total > MAX_QUBITS {
        return Err(Error::range(format!(
            "{total} qubits exceeds the {MAX_QUBITS}-qubit limit"
        )));
    }
    Ok(())
}

/// Index maps splitting a tensor space into kept and traced factors.
pub(crate) struct FactorSplit {
    pub kept_dim: usize,
    pub traced_dim: usize,
    /// `full[k * traced_dim + t]` is the full index of (kept k, traced t).
    pub full: Vec<usize>,
}

impl FactorSplit {
    pub fn new(dims: &[usize], traced: &[usize]) -> FactorSplit {
        let kept_dim: usize = dims
            .iter()
            .enumerate()
            .filter(|(f, _)| !traced.contains(f))
            .map(|(_, d)| d)
            .product();
        let traced_dim: usize = traced.iter().map(|&f| dims[f]).product();
        let total: usize = dims.iter().product();
        let mut full = vec![0; total];
        for idx in 0..total {
            // Decompose idx into digits, most significant factor first.
            let mut rem = idx;
            let mut digits = vec![0; dims.len()];
            for f in (0..dims.len()).rev() {
                digits[f] = rem % dims[f];
                rem /= dims[f];
            }
            let (mut k, mut t) = (0, 0);
            for f in 0..dims.len() {
                if traced.contains(&f) {
                    t = t * dims[f] + digits[f];
                } else {
                    k = k * dims[f] + digits[f];
                }
            }
            full[k * traced_dim + t] = idx;
        }
        FactorSplit {
            kept_dim,
            traced_dim,
            full,
        }
    }

    #[inline]
    pub fn index(&self, kept: usize, traced: usize) -> usize {
        self.full[kept * self.traced_dim + traced]
    }

    pub fn trace_out(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.kept_dim);
        for i in 0..self.kept_dim {
            for j in 0..self.kept_dim {
                let mut acc = C_ZERO;
                for t in 0..self.traced_dim {
                    acc += m[(self.index(i, t), self.index(j, t))];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Adjoint of `trace_out`: Y ↦ Y ⊗ I on the traced factors, scaled.
    pub fn extend_identity(&self, y: &ComplexMatrix, scale: f64) -> ComplexMatrix {
        let n = self.kept_dim * self.traced_dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..self.kept_dim {
            for j in 0..self.kept_dim {
                let v = y[(i, j)] * scale;
                for t in 0..self.traced_dim {
                    out[(self.index(i, t), self.index(j, t))] = v;
                }
            }
        }
        out
    }
}

/// Traces out the registers named in `traced`.
pub fn partial_trace(m: &ComplexMatrix, layout: &RegisterLayout, traced: &[&str]) -> Result<ComplexMatrix> {
    if m.dim() != layout.total_dim() {
        return Err(Error::input(format!(
            "matrix dimension {} does not match layout dimension {}",
            m.dim(),
            layout.total_dim()
        )));
    }
    let positions = layout.positions(traced)?;
    let split = FactorSplit::new(&layout.factor_dims(), &positions);
    Ok(split.trace_out(m))
}
