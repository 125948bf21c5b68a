//! Brute-force oracles over finite residue rings.
//!
//! Everything here enumerates `Z/p^m` exhaustively, so every function takes an
//! enumeration budget (a cap on table entries). Non-1-Lipschitz maps are
//! evaluated at the zero-padded lift of each residue.

mod cycles;
mod level;
mod plot;

use thiserror::Error;

use crate::dsl::DslError;

pub use cycles::{cycle_report, orbit, CycleReport, Orbit};
pub use level::{
    injectivity_witness, level_map, padded_endomap, preimage_census, CensusVerdict, LevelForm,
    PreimageCensus, ReducedLevelMap,
};
pub use plot::{box_count, plot_points, BoxCount, PlotPoint, PlotSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("the preimage census needs level k >= 2, got {0}")]
    CensusLevel(u32),
    #[error("the census applies to level maps Z/p^(nk) -> Z/p^(n(k-1)) only")]
    NotCensusForm,
    #[error("level n must be at least 1")]
    ZeroLevel,
    #[error("grid size must be at least 1")]
    ZeroGrid,
    #[error("start point {0} is not a residue modulo p^{1}")]
    StartOutOfRange(String, u32),
}
