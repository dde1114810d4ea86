//! TE eigenmodes of a perfectly conducting rectangular box.
//!
//! The box occupies `[0, Lx] × [0, Ly] × [0, Lz]`. Modes are transverse
//! electric with respect to the z axis, so `E_z = 0`. With
//! `k = (mπ/Lx, nπ/Ly, pπ/Lz)` and `k⊥ = sqrt(kx² + ky²)` the normalized
//! mode function is
//!
//! ```text
//! u_x =  N (ky/k⊥) cos(kx x) sin(ky y) sin(kz z)
//! u_y = -N (kx/k⊥) sin(kx x) cos(ky y) sin(kz z)
//! u_z =  0
//! ```
//!
//! and its curl is
//!
//! ```text
//! (∇×u)_x =  N (kx kz/k⊥) sin(kx x) cos(ky y) cos(kz z)
//! (∇×u)_y =  N (ky kz/k⊥) cos(kx x) sin(ky y) cos(kz z)
//! (∇×u)_z = -N  k⊥        cos(kx x) cos(ky y) sin(kz z)
//! ```
//!
//! `N` is fixed by `∫_V u·u dV = 1`; it equals `sqrt(8/V)` when all three
//! indices are nonzero and `sqrt(4/V)` when `m` or `n` vanishes. The field
//! is nontrivial only for `p ≥ 1` and `(m, n) ≠ (0, 0)`, which is the
//! validity rule enforced by [`ModeIndex::new`].

use std::f64::consts::PI;
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct CavityGeometry {
    lx: f64,
    ly: f64,
    lz: f64,
}

impl CavityGeometry {
    pub fn new(lx: f64, ly: f64, lz: f64) -> Result<Self> {
        for (name, l) in [("Lx", lx), ("Ly", ly), ("Lz", lz)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::domain(format!("{name} must be positive and finite, got {l}")));
            }
        }
        Ok(Self { lx, ly, lz })
    }

    pub fn cubic(side: f64) -> Result<Self> {
        Self::new(side, side, side)
    }

    /// Cube whose `(1,1,1)` and `(2,1,1)` frequencies sum to `frequency_hz`
    /// (cyclic), i.e. `L = c (√3 + √6) / (2 f)`.
    pub fn cubic_resonant(frequency_hz: f64) -> Result<Self> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(Error::domain(format!("frequency must be positive, got {frequency_hz}")));
        }
        Self::cubic(SPEED_OF_LIGHT * (3f64.sqrt() + 6f64.sqrt()) / (2.0 * frequency_hz))
    }

    pub fn sides(&self) -> [f64; 3] {
        [self.lx, self.ly, self.lz]
    }

    pub fn volume(&self) -> f64 {
        self.lx * self.ly * self.lz
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        self.sides().iter().zip(x.iter()).all(|(&l, &xi)| xi >= -1e-12 * l && xi <= l * (1.0 + 1e-12))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.lx * factor, self.ly * factor, self.lz * factor)
    }
}

impl TryFrom<[f64; 3]> for CavityGeometry {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<CavityGeometry> for [f64; 3] {
    fn from(g: CavityGeometry) -> Self {
        g.sides()
    }
}

/// TE mode label `(m, n, p)`. Ordering is lexicographic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[u32; 3]", into = "[u32; 3]")]
pub struct ModeIndex {
    m: u32,
    n: u32,
    p: u32,
}

impl ModeIndex {
    pub fn new(m: u32, n: u32, p: u32) -> Result<Self> {
        let zeros = [m, n, p].iter().filter(|&&i| i == 0).count();
        if zeros > 1 {
            return Err(Error::domain(format!("no TE mode ({m},{n},{p}): more than one zero index")));
        }
        if p == 0 {
            return Err(Error::domain(format!("TE mode ({m},{n},{p}) has identically zero field")));
        }
        Ok(Self { m, n, p })
    }

    pub fn components(&self) -> [u32; 3] {
        [self.m, self.n, self.p]
    }

    /// Every valid index with components in `0..=cap`, in lexicographic order.
    pub fn enumerate(cap: u32) -> Vec<ModeIndex> {
        let mut out = Vec::new();
        for m in 0..=cap {
            for n in 0..=cap {
                for p in 0..=cap {
                    if let Ok(idx) = ModeIndex::new(m, n, p) {
                        out.push(idx);
                    }
                }
            }
        }
        out
    }
}

impl TryFrom<[u32; 3]> for ModeIndex {
    type Error = Error;
    fn try_from(v: [u32; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<ModeIndex> for [u32; 3] {
    fn from(i: ModeIndex) -> Self {
        i.components()
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.m, self.n, self.p)
    }
}

/// `k_α = (mπ/Lx, nπ/Ly, pπ/Lz)` in 1/m.
pub fn wavevector(geom: &CavityGeometry, idx: ModeIndex) -> Vec3 {
    let [lx, ly, lz] = geom.sides();
    let [m, n, p] = idx.components();
    Vec3::new(m as f64 * PI / lx, n as f64 * PI / ly, p as f64 * PI / lz)
}

/// `|k_α|`. The squared components are summed in ascending order so that
/// permuted indices of a cube give bit-identical results.
pub fn wavenumber(geom: &CavityGeometry, idx: ModeIndex) -> f64 {
    let k = wavevector(geom, idx);
    let mut sq = [k.x * k.x, k.y * k.y, k.z * k.z];
    sq.sort_by(f64::total_cmp);
    (sq[0] + sq[1] + sq[2]).sqrt()
}

/// Angular frequency `ω = c |k_α|` in rad/s.
pub fn mode_frequency(geom: &CavityGeometry, idx: ModeIndex) -> f64 {
    SPEED_OF_LIGHT * wavenumber(geom, idx)
}

/// Precomputed evaluator for one TE mode. Evaluation does not check that the
/// point lies inside the cavity.
#[derive(Debug, Clone, Copy)]
pub struct TeMode {
    pub index: ModeIndex,
    k: Vec3,
    k_perp: f64,
    norm: f64,
}

impl TeMode {
    pub fn new(geom: &CavityGeometry, index: ModeIndex) -> Self {
        let k = wavevector(geom, index);
        let k_perp = k.x.hypot(k.y);
        let [m, n, _] = index.components();
        // ∫cos² over an axis is L for a zero index, L/2 otherwise; ∫sin² is L/2.
        let cos_frac = |i: u32| if i == 0 { 1.0 } else { 0.5 };
        let ix = (k.y / k_perp).powi(2) * cos_frac(m) * 0.25;
        let iy = (k.x / k_perp).powi(2) * cos_frac(n) * 0.25;
        let norm = 1.0 / ((ix + iy) * geom.volume()).sqrt();
        Self { index, k, k_perp, norm }
    }

    pub fn wavevector(&self) -> Vec3 {
        self.k
    }

    pub fn wavenumber(&self) -> f64 {
        self.k.norm()
    }

    fn trig(&self, x: &Vec3) -> ([f64; 3], [f64; 3]) {
        let (sx, cx) = (self.k.x * x.x).sin_cos();
        let (sy, cy) = (self.k.y * x.y).sin_cos();
        let (sz, cz) = (self.k.z * x.z).sin_cos();
        ([sx, sy, sz], [cx, cy, cz])
    }

    pub fn field_at(&self, x: &Vec3) -> Vec3 {
        let ([sx, sy, sz], [cx, cy, _]) = self.trig(x);
        let a = self.norm / self.k_perp;
        Vec3::new(a * self.k.y * cx * sy * sz, -a * self.k.x * sx * cy * sz, 0.0)
    }

    pub fn curl_at(&self, x: &Vec3) -> Vec3 {
        let ([sx, sy, sz], [cx, cy, cz]) = self.trig(x);
        let a = self.norm / self.k_perp;
        let k = &self.k;
        Vec3::new(a * k.x * k.z * sx * cy * cz, a * k.y * k.z * cx * sy * cz, -self.norm * self.k_perp * cx * cy * sz)
    }
}

fn check_inside(geom: &CavityGeometry, x: &Vec3) -> Result<()> {
    if geom.contains(x) {
        Ok(())
    } else {
        Err(Error::domain(format!("point ({}, {}, {}) is outside the cavity", x.x, x.y, x.z)))
    }
}

/// Normalized mode function `u_α(x)` (units 1/sqrt(m³)).
pub fn te_mode_field(geom: &CavityGeometry, idx: ModeIndex, x: &Vec3) -> Result<Vec3> {
    check_inside(geom, x)?;
    Ok(TeMode::new(geom, idx).field_at(x))
}

/// Analytic curl `(∇×u_α)(x)`.
pub fn te_mode_curl(geom: &CavityGeometry, idx: ModeIndex, x: &Vec3) -> Result<Vec3> {
    check_inside(geom, x)?;
    Ok(TeMode::new(geom, idx).curl_at(x))
}
