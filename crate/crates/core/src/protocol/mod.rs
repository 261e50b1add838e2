//! Exact simulation of the k-copy protocol that lets a game with classical
//! proofs run inside a game with unentangled quantum proofs. Quantum proofs
//! are measured in the standard basis at once, so each copy is modeled by
//! its diagonal, a distribution over strings.

mod sim;

pub use sim::{
    bound_sweep, chunk_check_stats, honest_expected_string, honest_move, honest_win, protocol_value,
    pure_subgame_value, simulation_bounds, simulation_bounds_exact, AdversaryStrategy, ChunkStats, ProtocolInstance,
    SweepReport, MAX_COPIES, MAX_ROUNDS,
};
