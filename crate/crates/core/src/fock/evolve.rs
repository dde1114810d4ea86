use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::density::{entropy, purity, reduced_graviton_density};
use super::sector::sector_hamiltonian;
use super::state::{Occupations, SectorAmplitudes, SectorState};
use crate::analytics::semiclassical_photons_per_mode;
use crate::error::{Error, Result};
use crate::resonance::BrightDecomposition;

pub const DEFAULT_MAX_SECTOR_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    /// `|g|`, rad/s.
    pub coupling: f64,
    /// `δ = Ω − ω_α − ω_β`, rad/s.
    pub detuning: f64,
    pub max_sector_dim: usize,
}

impl DynamicsParams {
    pub fn resonant(coupling: f64) -> Self {
        Self { coupling, detuning: 0.0, max_sector_dim: DEFAULT_MAX_SECTOR_DIM }
    }
}

struct SectorPropagator {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    /// Initial amplitudes in the eigenbasis.
    coefficients: Vec<Complex64>,
}

/// Exact evolution operator for a fixed initial state, one eigendecomposition
/// per occupied sector.
pub struct Propagator {
    initial: SectorState,
    sectors: Vec<SectorPropagator>,
}

impl Propagator {
    pub fn new(initial: &SectorState, params: &DynamicsParams) -> Result<Self> {
        if let Some(b) = initial.blocks().iter().find(|b| b.sector.dim() > params.max_sector_dim) {
            return Err(Error::ResourceCap {
                what: "sector dimension",
                requested: b.sector.dim(),
                cap: params.max_sector_dim,
            });
        }
        let sectors = initial
            .blocks()
            .par_iter()
            .map(|block| {
                let h = sector_hamiltonian(&block.sector, params.coupling, params.detuning)?;
                let eig = SymmetricEigen::new(h);
                let v = &eig.eigenvectors;
                let coefficients = (0..v.ncols())
                    .map(|k| block.amplitudes.iter().enumerate().map(|(i, a)| a * v[(i, k)]).sum())
                    .collect();
                Ok(SectorPropagator { eigenvalues: eig.eigenvalues, eigenvectors: eig.eigenvectors, coefficients })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { initial: initial.clone(), sectors })
    }

    pub fn initial(&self) -> &SectorState {
        &self.initial
    }

    /// `exp(−iHt)|ψ(0)⟩`.
    pub fn state_at(&self, t: f64) -> SectorState {
        let blocks = self
            .initial
            .blocks()
            .iter()
            .zip(&self.sectors)
            .map(|(block, sp)| {
                let n = block.sector.dim();
                let rotated: Vec<Complex64> = sp
                    .coefficients
                    .iter()
                    .zip(sp.eigenvalues.iter())
                    .map(|(c, &l)| c * Complex64::from_polar(1.0, -l * t))
                    .collect();
                let amplitudes = (0..n)
                    .map(|i| rotated.iter().enumerate().map(|(k, c)| c * sp.eigenvectors[(i, k)]).sum())
                    .collect();
                SectorAmplitudes { sector: block.sector.clone(), amplitudes }
            })
            .collect();
        SectorState::from_blocks(blocks)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservablePoint {
    pub t: f64,
    /// `τ = g t`.
    pub tau: f64,
    pub n_b: f64,
    pub n_alpha: f64,
    pub n_c: f64,
    /// `(A_i/|A|)² ⟨n_c⟩` per degenerate partner mode.
    pub members: Vec<f64>,
    pub purity: f64,
    pub entropy: f64,
    /// `sinh²(g sqrt(n_g) t)` with `n_g = ⟨n_b⟩(0)`.
    pub n_c_semiclassical: f64,
    pub norm: f64,
    pub manley_rowe: f64,
    pub n_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub points: Vec<ObservablePoint>,
}

impl ObservableSeries {
    pub fn column(&self, f: impl Fn(&ObservablePoint) -> f64) -> Vec<f64> {
        self.points.iter().map(f).collect()
    }

    /// First interior grid maximum of `⟨n_c⟩` as `(τ, value)`.
    pub fn first_peak(&self) -> Option<(f64, f64)> {
        self.points.windows(3).find(|w| w[1].n_c >= w[0].n_c && w[1].n_c > w[2].n_c).map(|w| (w[1].tau, w[1].n_c))
    }

    pub fn min_purity(&self) -> f64 {
        self.points.iter().map(|p| p.purity).fold(f64::INFINITY, f64::min)
    }

    pub fn peak_n_c(&self) -> f64 {
        self.points.iter().map(|p| p.n_c).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn drift(&self) -> ConservationDrift {
        ConservationDrift::from_series(self)
    }
}

/// Largest departures from the conserved quantities over a series. `M` and
/// `N_diff` drifts are relative to `max(|initial|, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationDrift {
    pub norm: f64,
    pub manley_rowe: f64,
    pub n_diff: f64,
    /// `⟨n_b⟩ + ⟨n_c⟩` is fixed by `M` and `N_diff` together.
    pub pump_plus_idler: f64,
}

impl ConservationDrift {
    fn from_series(series: &ObservableSeries) -> Self {
        let Some(first) = series.points.first() else {
            return Self { norm: 0.0, manley_rowe: 0.0, n_diff: 0.0, pump_plus_idler: 0.0 };
        };
        let max_dev = |f: &dyn Fn(&ObservablePoint) -> f64, scale: f64| {
            series.points.iter().map(|p| (f(p) - f(first)).abs() / scale).fold(0.0, f64::max)
        };
        Self {
            norm: max_dev(&|p| p.norm, 1.0),
            manley_rowe: max_dev(&|p| p.manley_rowe, first.manley_rowe.abs().max(1.0)),
            n_diff: max_dev(&|p| p.n_diff, first.n_diff.abs().max(1.0)),
            pump_plus_idler: max_dev(&|p| p.n_b + p.n_c, (first.n_b + first.n_c).abs().max(1.0)),
        }
    }
}

pub struct Evolution {
    pub series: ObservableSeries,
    pub final_state: SectorState,
}

/// `⟨n_{β_i}⟩ = (A_i/|A|)² ⟨n_c⟩` with the dark modes in vacuum.
pub fn member_occupations(n_c: f64, decomposition: &BrightDecomposition) -> Vec<f64> {
    decomposition.weights().iter().map(|w| w * n_c).collect()
}

fn observe(
    state: &SectorState,
    t: f64,
    params: &DynamicsParams,
    n_g: f64,
    decomposition: Option<&BrightDecomposition>,
) -> ObservablePoint {
    let Occupations { n_b, n_alpha, n_c } = state.occupations();
    // same purity and entropy as the photon-pair state, on a smaller matrix
    let rho = reduced_graviton_density(state);
    let norm = state.norm_squared();
    ObservablePoint {
        t,
        tau: params.coupling * t,
        n_b,
        n_alpha,
        n_c,
        members: decomposition.map(|d| member_occupations(n_c, d)).unwrap_or_else(|| vec![n_c]),
        purity: purity(&rho) / (norm * norm),
        entropy: entropy(&rho),
        n_c_semiclassical: semiclassical_photons_per_mode(params.coupling, n_g, t),
        norm,
        manley_rowe: 2.0 * n_b + n_alpha + n_c,
        n_diff: n_alpha - n_c,
    }
}

/// Evolve `initial` under the sector Hamiltonians and record observables at
/// each time (seconds). Without a decomposition the collective mode is
/// reported as the single member.
pub fn evolve(
    initial: &SectorState,
    params: &DynamicsParams,
    times: &[f64],
    decomposition: Option<&BrightDecomposition>,
) -> Result<Evolution> {
    let propagator = Propagator::new(initial, params)?;
    let n_g = initial.occupations().n_b;
    let points: Vec<ObservablePoint> =
        times.par_iter().map(|&t| observe(&propagator.state_at(t), t, params, n_g, decomposition)).collect();
    let final_state = propagator.state_at(times.last().copied().unwrap_or(0.0));
    Ok(Evolution { series: ObservableSeries { points }, final_state })
}
