//! Contractions of the referee observable against one player's state.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linops::eigen::extreme_pair;
use crate::linops::matrix::C_ZERO;
use crate::linops::{eigh, ComplexMatrix, DensityMatrix, Observable, Player, RegisterLayout};

/// E[a,a'] = Σ_{b,b'} R[(a,b),(a',b')]·σ[b',b], so tr(Eρ) = tr(R(ρ⊗σ)).
pub(crate) fn contract_min(r: &ComplexMatrix, da: usize, db: usize, sigma: &ComplexMatrix) -> ComplexMatrix {
    let n = da * db;
    let rs = r.as_slice();
    let ss = sigma.as_slice();
    let mut out = ComplexMatrix::zeros(da);
    for a in 0..da {
        for ap in 0..da {
            let mut acc = C_ZERO;
            for b in 0..db {
                let row = &rs[(a * db + b) * n + ap * db..(a * db + b) * n + ap * db + db];
                for (bp, &v) in row.iter().enumerate() {
                    acc += v * ss[bp * db + b];
                }
            }
            out[(a, ap)] = acc;
        }
    }
    out
}

/// F[b,b'] = Σ_{a,a'} R[(a,b),(a',b')]·ρ[a',a], so tr(Fσ) = tr(R(ρ⊗σ)).
pub(crate) fn contract_max(r: &ComplexMatrix, da: usize, db: usize, rho: &ComplexMatrix) -> ComplexMatrix {
    let n = da * db;
    let rs = r.as_slice();
    let ps = rho.as_slice();
    let mut out = ComplexMatrix::zeros(db);
    let os = out.as_mut_slice();
    for a in 0..da {
        for ap in 0..da {
            let w: Complex64 = ps[ap * da + a];
            if w == C_ZERO {
                continue;
            }
            for b in 0..db {
                let row = &rs[(a * db + b) * n + ap * db..(a * db + b) * n + ap * db + db];
                for (bp, &v) in row.iter().enumerate() {
                    os[b * db + bp] += v * w;
                }
            }
        }
    }
    out
}

/// tr(R(ρ⊗σ)) evaluated through the contraction.
#[cfg(test)]
pub(crate) fn payoff_of(r: &ComplexMatrix, da: usize, db: usize, rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    contract_max(r, da, db, rho).trace_product(sigma).re
}

fn sides(r: &Observable, layout: &RegisterLayout) -> Result<(usize, usize)> {
    if layout.view().is_some() {
        return Err(Error::input("expected a game layout, got a player view"));
    }
    if r.dim() != layout.total_dim() {
        return Err(Error::input(format!(
            "observable dimension {} does not match layout dimension {}",
            r.dim(),
            layout.total_dim()
        )));
    }
    Ok((
        layout.player_dim(Player::Maximizer),
        layout.player_dim(Player::Minimizer),
    ))
}

/// Operator on the other player's registers whose trace against their state
/// gives the payoff when `fixed_side` plays `state`.
pub fn effective_operator(
    r: &Observable,
    layout: &RegisterLayout,
    fixed_side: Player,
    state: &DensityMatrix,
) -> Result<ComplexMatrix> {
    let (da, db) = sides(r, layout)?;
    let expected = match fixed_side {
        Player::Maximizer => da,
        Player::Minimizer => db,
    };
    if state.dim() != expected {
        return Err(Error::input(format!(
            "state dimension {} does not match the {fixed_side:?} dimension {expected}",
            state.dim()
        )));
    }
    let e = match fixed_side {
        Player::Maximizer => contract_max(r.matrix(), da, db, state.matrix()),
        Player::Minimizer => contract_min(r.matrix(), da, db, state.matrix()),
    };
    Ok(e.hermitian_part())
}

/// Acceptance probability tr(R(ρ⊗σ)) with ρ the maximizer's state.
pub fn payoff(r: &Observable, layout: &RegisterLayout, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let e = effective_operator(r, layout, Player::Minimizer, sigma)?;
    if rho.dim() != e.dim() {
        return Err(Error::input("maximizer state has the wrong dimension"));
    }
    Ok(e.trace_product(rho.matrix()).re)
}

/// Pure best response: top eigenvector for the maximizer, bottom for the minimizer.
pub fn best_response(
    r: &Observable,
    layout: &RegisterLayout,
    responder: Player,
    opponent_state: &DensityMatrix,
) -> Result<(DensityMatrix, f64)> {
    let e = effective_operator(r, layout, responder.opponent(), opponent_state)?;
    let eig = eigh(&e)?;
    let (value, v) = extreme_pair(&eig, responder == Player::Maximizer);
    Ok((DensityMatrix::pure(&v), value))
}
