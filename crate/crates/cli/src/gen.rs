use std::path::PathBuf;

use altgame_core::dist::DistGame;
use altgame_core::exec::derive_seed;
use altgame_core::linops::{random_observable, Player};
use altgame_core::protocol::ProtocolInstance;
use altgame_core::quantum::{PromiseGap, QuantumGame};
use clap::{Args, ValueEnum};

use crate::{emit, Failure};

#[derive(Clone, Copy, ValueEnum)]
pub enum InstanceType {
    /// Quantum game with a random observable; two or three registers from --qubits.
    Qgame,
    /// Distribution game with a uniform random table; --m bits, --k rounds.
    Distgame,
    /// Protocol instance; base game with --m bits and --i rounds, --k copies.
    Protocol,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Side {
    Maximizer,
    Minimizer,
}

impl From<Side> for Player {
    fn from(s: Side) -> Player {
        match s {
            Side::Maximizer => Player::Maximizer,
            Side::Minimizer => Player::Minimizer,
        }
    }
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long = "type", value_enum)]
    kind: InstanceType,
    /// Register sizes in qubits: maximizer,minimizer[,maximizer].
    #[arg(long, value_delimiter = ',', default_value = "1,1")]
    qubits: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Rounds (distgame) or copies per proof (protocol).
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Rounds of the protocol's base game.
    #[arg(long, default_value_t = 2)]
    i: u32,
    #[arg(long, default_value_t = 2.0 / 3.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    s: f64,
    /// Honest side of protocol instances.
    #[arg(long, value_enum, default_value = "maximizer")]
    honest: Side,
    /// First mover of distribution games.
    #[arg(long, value_enum, default_value = "maximizer")]
    first_mover: Side,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn instance_json(args: &GenArgs, seed: u64) -> Result<String, Failure> {
    let text = match args.kind {
        InstanceType::Qgame => {
            let q = &args.qubits;
            let dim = 1usize
                .checked_shl(q.iter().sum())
                .filter(|_| q.iter().sum::<u32>() <= altgame_core::linops::layout::MAX_QUBITS)
                .ok_or_else(|| Failure::Other("too many qubits".into()))?;
            let obs = random_observable(dim, seed);
            let game = match q.as_slice() {
                [a, b] => QuantumGame::two_turn(obs, *a, *b)?,
                [a, b, c] => QuantumGame::three_turn(obs, *a, *b, *c)?,
                _ => return Err(Failure::Parse("--qubits takes two or three sizes".into())),
            };
            serde_json::to_string_pretty(&game)
        }
        InstanceType::Distgame => {
            serde_json::to_string_pretty(&DistGame::random(args.m, args.k, args.first_mover.into(), seed)?)
        }
        InstanceType::Protocol => {
            let promise = PromiseGap::new(args.c, args.s)?;
            let inst = ProtocolInstance::random(args.m, args.i, args.k, promise, args.honest.into(), seed)?;
            serde_json::to_string_pretty(&inst)
        }
    };
    text.map(|t| t + "\n").map_err(|e| Failure::Other(e.to_string()))
}

pub fn run(args: &GenArgs) -> Result<(), Failure> {
    let prefix = match args.kind {
        InstanceType::Qgame => "qgame",
        InstanceType::Distgame => "distgame",
        InstanceType::Protocol => "protocol",
    };
    for id in 0..args.count {
        let text = instance_json(args, derive_seed(args.seed, id as u64))?;
        let path = args.out.join(format!("{prefix}-{id:04}.json"));
        emit(Some(&path), &text)?;
    }
    Ok(())
}
