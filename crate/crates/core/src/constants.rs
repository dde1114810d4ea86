//! Physical constants (SI, CODATA 2018) used throughout the crate.
//!
//! Every quantity that depends on a physical constant reads it from here, and
//! [`table_hash`] fingerprints the table so output files can record which
//! constant set produced them.

use sha2::{Digest, Sha256};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant, J·s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Newtonian constant of gravitation, m³/(kg·s²).
pub const GRAVITATIONAL: f64 = 6.674_30e-11;

/// Planck energy `sqrt(ħ c⁵ / G)` in joules.
pub fn planck_energy() -> f64 {
    (HBAR * SPEED_OF_LIGHT.powi(5) / GRAVITATIONAL).sqrt()
}

pub const TABLE: [(&str, f64); 4] = [
    ("speed_of_light_m_per_s", SPEED_OF_LIGHT),
    ("planck_j_s", PLANCK),
    ("hbar_j_s", HBAR),
    ("gravitational_m3_per_kg_s2", GRAVITATIONAL),
];

/// SHA-256 of the constant table rendered as `name=value` lines with
/// round-trip float formatting.
pub fn table_hash() -> String {
    let mut hasher = Sha256::new();
    for (name, value) in TABLE {
        hasher.update(format!("{name}={value:e}\n").as_bytes());
    }
    hex::encode(hasher.finalize())
}
