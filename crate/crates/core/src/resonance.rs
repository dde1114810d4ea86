//! Resonant mode pairs, phase matching, and the bright/dark collective-mode
//! basis for degenerate partners.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{mode_frequency, wavevector, CavityGeometry, ModeIndex};
use crate::error::{Error, Result};
use crate::gw::GwMode;

/// Relative detuning used for exactly matched scenarios.
pub const EXACT_RESONANCE_TOL: f64 = 1e-9;
/// Relative detuning for exploratory scans.
pub const SCAN_RESONANCE_TOL: f64 = 1e-3;
pub const DEFAULT_INDEX_CAP: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonantPair {
    pub alpha: ModeIndex,
    pub beta: ModeIndex,
    pub omega_alpha: f64,
    pub omega_beta: f64,
    /// `δ = Ω − ω_α − ω_β`, rad/s.
    pub detuning: f64,
}

/// All pairs `α ≤ β` with indices up to `index_cap` per axis and
/// `|Ω − ω_α − ω_β| ≤ tol·Ω`, sorted by `|δ|` then `(α, β)`.
pub fn find_resonant_pairs(geom: &CavityGeometry, omega: f64, index_cap: u32, tol: f64) -> Result<Vec<ResonantPair>> {
    if index_cap < 1 {
        return Err(Error::domain("index cap must be at least 1"));
    }
    let mut spectrum: Vec<(f64, ModeIndex)> =
        ModeIndex::enumerate(index_cap).into_iter().map(|i| (mode_frequency(geom, i), i)).collect();
    spectrum.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let window = tol * omega;

    let mut pairs: Vec<ResonantPair> = spectrum
        .par_iter()
        .flat_map_iter(|&(wa, a)| {
            let target = omega - wa;
            let lo = spectrum.partition_point(|(w, _)| *w < target - window);
            spectrum[lo..]
                .iter()
                .take_while(move |(w, _)| *w <= target + window)
                .filter(move |(_, b)| a <= *b)
                .filter_map(move |&(wb, b)| {
                    let detuning = omega - wa - wb;
                    (detuning.abs() <= window).then_some(ResonantPair {
                        alpha: a,
                        beta: b,
                        omega_alpha: wa,
                        omega_beta: wb,
                        detuning,
                    })
                })
        })
        .collect();
    pairs.sort_by(|p, q| {
        p.detuning.abs().total_cmp(&q.detuning.abs()).then(p.alpha.cmp(&q.alpha)).then(p.beta.cmp(&q.beta))
    });
    Ok(pairs)
}

/// Pairs sharing `α` and a common `ω_β` (relative tolerance `freq_tol`).
/// Groups are ordered by `(α, ω_β)`, members by `β`.
pub fn degenerate_groups(pairs: &[ResonantPair], freq_tol: f64) -> Vec<Vec<ResonantPair>> {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|p, q| p.alpha.cmp(&q.alpha).then(p.omega_beta.total_cmp(&q.omega_beta)).then(p.beta.cmp(&q.beta)));
    let mut groups: Vec<Vec<ResonantPair>> = Vec::new();
    for p in sorted {
        match groups.last_mut() {
            Some(g)
                if g[0].alpha == p.alpha
                    && (p.omega_beta - g[0].omega_beta).abs() <= freq_tol * g[0].omega_beta.abs() =>
            {
                g.push(p)
            }
            _ => groups.push(vec![p]),
        }
    }
    for g in &mut groups {
        g.sort_by_key(|p| p.beta);
    }
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMismatch {
    /// `K + s_α k_α + s_β k_β` for the sign pair of smallest norm, 1/m.
    pub delta_k: [f64; 3],
    pub signs: [i8; 2],
    /// `|Δk_i| L_i` per axis.
    pub scaled: [f64; 3],
    /// Envelope of `|sinc(Δk_i L_i / 2)|`, i.e. `min(1, 2 / (|Δk_i| L_i))`.
    pub axis_scores: [f64; 3],
    /// Product of the per-axis scores.
    pub score: f64,
}

pub fn phase_mismatch(geom: &CavityGeometry, alpha: ModeIndex, beta: ModeIndex, gw: &GwMode) -> PhaseMismatch {
    let k = gw.wavevector();
    let ka = wavevector(geom, alpha);
    let kb = wavevector(geom, beta);
    let mut best: Option<(f64, [i8; 2], crate::cavity::Vec3)> = None;
    for sa in [1i8, -1] {
        for sb in [1i8, -1] {
            let d = k + ka * sa as f64 + kb * sb as f64;
            let n = d.norm();
            if best.as_ref().is_none_or(|b| n < b.0) {
                best = Some((n, [sa, sb], d));
            }
        }
    }
    let (_, signs, d) = best.expect("four candidates");
    let sides = geom.sides();
    let scaled = [d.x.abs() * sides[0], d.y.abs() * sides[1], d.z.abs() * sides[2]];
    let axis_scores = scaled.map(|s| if s <= 2.0 { 1.0 } else { 2.0 / s });
    PhaseMismatch { delta_k: [d.x, d.y, d.z], signs, scaled, axis_scores, score: axis_scores.iter().product() }
}

/// Orthogonal change of basis from degenerate partner modes to collective
/// modes. Row 0 is the bright mode `A/|A|`; the remaining rows span the dark
/// subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct BrightDecomposition {
    pub overlaps: Vec<f64>,
    pub norm: f64,
    pub basis: DMatrix<f64>,
}

impl BrightDecomposition {
    pub fn bright(&self) -> Vec<f64> {
        self.basis.row(0).iter().copied().collect()
    }

    /// `(A_i/|A|)²`
    pub fn weights(&self) -> Vec<f64> {
        self.bright().iter().map(|c| c * c).collect()
    }

    pub fn len(&self) -> usize {
        self.overlaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.overlaps.is_empty()
    }
}

/// Bright mode `c = A/|A|`, completed to an orthonormal basis by Gram-Schmidt
/// over the canonical vectors in index order (candidates whose residual norm
/// falls below 1e-8 are skipped).
pub fn bright_dark_decomposition(overlaps: &[f64]) -> Result<BrightDecomposition> {
    let n = overlaps.len();
    let norm = overlaps.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n == 0 || norm == 0.0 || !norm.is_finite() {
        return Err(Error::domain("bright mode needs at least one nonzero finite overlap"));
    }
    let mut rows: Vec<Vec<f64>> = vec![overlaps.iter().map(|a| a / norm).collect()];
    for seed in 0..n {
        if rows.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[seed] = 1.0;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for r in &rows {
                let proj: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(r).for_each(|(x, a)| *x -= proj * a);
            }
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len < 1e-8 {
            continue;
        }
        rows.push(v.into_iter().map(|x| x / len).collect());
    }
    let basis = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(BrightDecomposition { overlaps: overlaps.to_vec(), norm, basis })
}
