//! Values of two- and three-turn quantum refereed games.

pub mod effective;
mod fiber;
pub mod game;
pub mod mmw;
pub mod value3;

pub use effective::{best_response, effective_operator, payoff};
pub use game::{GameValueReport, PromiseGap, QuantumGame};
pub use mmw::{value2, value2_fiber, value2_fiber_with, value2_with, MmwConfig, Order};
pub use value3::{
    collapse_gap, collapse_gap_with, sion_gap, sion_gap_with, value3, value3_with, Value3Config, Value3Outcome,
};
