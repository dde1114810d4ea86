//! Semiclassical (undepleted-pump) predictions and timescales.
//!
//! With the pump treated as a classical amplitude `sqrt(n_g)`, the mixing term
//! is a two-mode squeezer with squeezing amplitude `r = g sqrt(n_g) t`; each
//! EM mode then carries `sinh² r` photons and the pair `2 sinh² r`.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemiclassicalPrediction {
    pub t: f64,
    pub r: f64,
    /// Total EM photons, `2 sinh² r`.
    pub n_total: f64,
    /// Photons per mode, `sinh² r`.
    pub n_per_mode: f64,
    /// Undepleted-pump regime, `r < 0.1 sqrt(n_g)`. Attached, not enforced.
    pub valid: bool,
}

pub fn squeezing_amplitude(g: f64, n_g: f64, t: f64) -> f64 {
    g * n_g.sqrt() * t
}

/// `r ~ h₊ Ω |A| t`: order-of-magnitude estimator only.
pub fn squeezing_estimate(strain: f64, omega: f64, overlap: f64, t: f64) -> f64 {
    strain * omega * overlap * t
}

pub fn semiclassical_photons_per_mode(g: f64, n_g: f64, t: f64) -> f64 {
    squeezing_amplitude(g, n_g, t).sinh().powi(2)
}

pub fn spontaneous_timescale(g: f64, n_g: f64) -> f64 {
    1.0 / (g * n_g.sqrt())
}

/// The stimulated coupling is enhanced by `sqrt(n_α + 1)`.
pub fn stimulated_timescale(g: f64, n_g: f64, n_alpha: f64) -> f64 {
    spontaneous_timescale(g, n_g) / (n_alpha + 1.0).sqrt()
}

pub fn semiclassical_prediction(g: f64, n_g: f64, t: f64) -> SemiclassicalPrediction {
    let r = squeezing_amplitude(g, n_g, t);
    let n_per_mode = r.sinh().powi(2);
    SemiclassicalPrediction { t, r, n_total: 2.0 * n_per_mode, n_per_mode, valid: r < 0.1 * n_g.sqrt() }
}

pub fn semiclassical_series(g: f64, n_g: f64, times: &[f64]) -> Vec<SemiclassicalPrediction> {
    times.iter().map(|&t| semiclassical_prediction(g, n_g, t)).collect()
}
