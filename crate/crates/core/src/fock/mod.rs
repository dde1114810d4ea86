//! Closed-system dynamics of the trilinear Hamiltonian
//! `H = g (b a† c† + b† a c) + δ n_b` in the interaction picture.
//!
//! `M = 2 n_b + n_α + n_c` and `N_diff = n_α − n_c` commute with `H`, so every
//! state splits into independent `(M, N_diff)` sectors. Each sector is a
//! one-parameter ladder `(n_b, n_α, n_c) → (n_b − 1, n_α + 1, n_c + 1)` and is
//! evolved exactly through the eigendecomposition of its tridiagonal
//! Hamiltonian. [`oracle`] provides an unreduced product-basis reference.

mod density;
mod evolve;
pub mod oracle;
mod sector;
mod state;

pub use density::{entropy, purity, reduced_em_density, reduced_graviton_density, EmDensity};
pub use evolve::{
    evolve, member_occupations, ConservationDrift, DynamicsParams, Evolution, ObservablePoint, ObservableSeries,
    Propagator, DEFAULT_MAX_SECTOR_DIM,
};
pub use sector::{build_sector, sector_hamiltonian, FockSector};
pub use state::{
    coherent_graviton_state, default_coherent_cutoff, CoherentWeights, ModeInit, Occupations, SectorAmplitudes,
    SectorState,
};
