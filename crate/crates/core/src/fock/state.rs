use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sector::FockSector;
use crate::error::{Error, Result};

/// Amplitudes over one invariant sector, indexed like `sector.basis()`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorAmplitudes {
    pub sector: FockSector,
    pub amplitudes: Vec<Complex64>,
}

/// State of the graviton / α / collective-mode system as a direct sum over
/// `(M, N_diff)` sectors, ordered by `(M, N_diff)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    blocks: Vec<SectorAmplitudes>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Occupations {
    pub n_b: f64,
    pub n_alpha: f64,
    pub n_c: f64,
}

impl Occupations {
    pub fn manley_rowe(&self) -> f64 {
        2.0 * self.n_b + self.n_alpha + self.n_c
    }

    pub fn n_diff(&self) -> f64 {
        self.n_alpha - self.n_c
    }
}

impl SectorState {
    /// Collect `([n_b, n_α, n_c], amplitude)` entries into sectors and
    /// normalize. Repeated triples are summed.
    pub fn from_amplitudes(entries: impl IntoIterator<Item = ([u32; 3], Complex64)>) -> Result<Self> {
        let mut by_sector: BTreeMap<(u32, i32), SectorAmplitudes> = BTreeMap::new();
        for (triple, amp) in entries {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let sector = FockSector::containing(triple);
            let key = (sector.manley_rowe(), sector.n_diff());
            let block = by_sector.entry(key).or_insert_with(|| SectorAmplitudes {
                amplitudes: vec![Complex64::new(0.0, 0.0); sector.dim()],
                sector,
            });
            let pos = block.sector.position(triple).expect("triple lies in its own sector");
            block.amplitudes[pos] += amp;
        }
        let mut state = Self { blocks: by_sector.into_values().collect() };
        let norm = state.norm_squared().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::domain("state has zero or non-finite norm"));
        }
        for b in &mut state.blocks {
            b.amplitudes.iter_mut().for_each(|a| *a /= norm);
        }
        Ok(state)
    }

    pub fn fock(n_b: u32, n_alpha: u32, n_c: u32) -> Self {
        Self::from_amplitudes([([n_b, n_alpha, n_c], Complex64::new(1.0, 0.0))]).expect("unit amplitude")
    }

    /// Product state from per-mode Fock amplitudes (index = occupation).
    pub fn product(b: &[Complex64], alpha: &[Complex64], c: &[Complex64]) -> Result<Self> {
        let mut entries = Vec::with_capacity(b.len() * alpha.len() * c.len());
        for (nb, &ab) in b.iter().enumerate() {
            for (na, &aa) in alpha.iter().enumerate() {
                for (nc, &ac) in c.iter().enumerate() {
                    entries.push(([nb as u32, na as u32, nc as u32], ab * aa * ac));
                }
            }
        }
        Self::from_amplitudes(entries)
    }

    pub(crate) fn from_blocks(blocks: Vec<SectorAmplitudes>) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &[SectorAmplitudes] {
        &self.blocks
    }

    pub fn norm_squared(&self) -> f64 {
        self.blocks.iter().flat_map(|b| &b.amplitudes).map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude(&self, triple: [u32; 3]) -> Complex64 {
        let s = FockSector::containing(triple);
        self.blocks
            .iter()
            .find(|b| b.sector.manley_rowe() == s.manley_rowe() && b.sector.n_diff() == s.n_diff())
            .and_then(|b| b.sector.position(triple).map(|i| b.amplitudes[i]))
            .unwrap_or_default()
    }

    /// Iterate over `(triple, amplitude)` for every basis state carried.
    pub fn entries(&self) -> impl Iterator<Item = ([u32; 3], Complex64)> + '_ {
        self.blocks.iter().flat_map(|b| b.sector.basis().iter().copied().zip(b.amplitudes.iter().copied()))
    }

    pub fn occupations(&self) -> Occupations {
        let mut o = Occupations { n_b: 0.0, n_alpha: 0.0, n_c: 0.0 };
        for ([nb, na, nc], a) in self.entries() {
            let p = a.norm_sqr();
            o.n_b += p * nb as f64;
            o.n_alpha += p * na as f64;
            o.n_c += p * nc as f64;
        }
        o
    }
}

/// Initial state of a single bosonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeInit {
    Vacuum,
    Fock {
        n: u32,
    },
    /// Coherent state with amplitude `re + i·im`. Without an explicit cutoff
    /// [`default_coherent_cutoff`] is used.
    Coherent {
        #[serde(default)]
        re: f64,
        #[serde(default)]
        im: f64,
        #[serde(default)]
        cutoff: Option<usize>,
    },
}

impl ModeInit {
    pub fn coherent_mean(mean: f64) -> Self {
        ModeInit::Coherent { re: mean.sqrt(), im: 0.0, cutoff: None }
    }

    pub fn mean_occupation(&self) -> f64 {
        match *self {
            ModeInit::Vacuum => 0.0,
            ModeInit::Fock { n } => n as f64,
            ModeInit::Coherent { re, im, .. } => re * re + im * im,
        }
    }

    /// Fock-basis amplitudes (index = occupation number).
    pub fn amplitudes(&self) -> Result<Vec<Complex64>> {
        match *self {
            ModeInit::Vacuum => Ok(vec![Complex64::new(1.0, 0.0)]),
            ModeInit::Fock { n } => {
                let mut v = vec![Complex64::new(0.0, 0.0); n as usize + 1];
                v[n as usize] = Complex64::new(1.0, 0.0);
                Ok(v)
            }
            ModeInit::Coherent { re, im, cutoff } => {
                let eta = Complex64::new(re, im);
                let cutoff = cutoff.unwrap_or_else(|| default_coherent_cutoff(eta.norm()));
                Ok(coherent_graviton_state(eta, cutoff)?.amplitudes)
            }
        }
    }
}

/// Truncated coherent state. `amplitudes` are renormalized after truncation;
/// `tail_mass` is the Poisson probability beyond the cutoff that was dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentWeights {
    pub amplitudes: Vec<Complex64>,
    pub tail_mass: f64,
}

impl CoherentWeights {
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

fn required_cutoff(abs_eta: f64) -> usize {
    (abs_eta * abs_eta + 6.0 * abs_eta).ceil() as usize
}

/// Smallest cutoff that satisfies `ceil(|η|² + 6|η|)` and drops less than
/// `1e-12` of Poisson probability.
pub fn default_coherent_cutoff(abs_eta: f64) -> usize {
    let required = required_cutoff(abs_eta);
    if abs_eta == 0.0 {
        return required;
    }
    let mean = abs_eta * abs_eta;
    // ln p_n = −λ + n ln λ − ln n!; walk up past the mode until p_n is negligible
    let mut ln_p = vec![-mean];
    let mut n = 0usize;
    while n < required || n as f64 <= mean || *ln_p.last().expect("non-empty") > -80.0 {
        n += 1;
        let prev = *ln_p.last().expect("non-empty");
        ln_p.push(prev + (mean / n as f64).ln());
    }
    let mut tail = 0.0;
    let mut cutoff = n;
    for k in (required + 1..=n).rev() {
        tail += ln_p[k].exp();
        if tail >= 1e-12 {
            break;
        }
        cutoff = k - 1;
    }
    cutoff
}

/// `exp(−|η|²/2) ηⁿ / sqrt(n!)` for `n = 0..=cutoff`, built in log space.
/// Requires `cutoff ≥ |η|² + 6|η|`.
pub fn coherent_graviton_state(eta: Complex64, cutoff: usize) -> Result<CoherentWeights> {
    let abs = eta.norm();
    if !abs.is_finite() {
        return Err(Error::domain("coherent amplitude must be finite"));
    }
    let required = required_cutoff(abs);
    if cutoff < required {
        return Err(Error::CutoffTooSmall { given: cutoff, required });
    }
    if abs == 0.0 {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); cutoff + 1];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        return Ok(CoherentWeights { amplitudes, tail_mass: 0.0 });
    }
    let mean = abs * abs;
    let ln_abs = abs.ln();
    let phase = eta.arg();
    // ln |a_n| = −|η|²/2 + n ln|η| − ½ ln n!
    let ln_amp = |n: usize, ln_fact: f64| -0.5 * mean + n as f64 * ln_abs - 0.5 * ln_fact;

    let mut amplitudes = Vec::with_capacity(cutoff + 1);
    let mut ln_fact = 0.0;
    for n in 0..=cutoff {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        amplitudes.push(Complex64::from_polar(ln_amp(n, ln_fact).exp(), phase * n as f64));
    }
    // tail: terms decrease monotonically once n > |η|²
    let mut tail_mass = 0.0;
    let mut n = cutoff;
    loop {
        n += 1;
        ln_fact += (n as f64).ln();
        let p = (2.0 * ln_amp(n, ln_fact)).exp();
        tail_mass += p;
        if p < 1e-18 * tail_mass.max(1e-300) || p == 0.0 {
            break;
        }
    }
    let kept: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let scale = kept.sqrt();
    amplitudes.iter_mut().for_each(|a| *a /= scale);
    Ok(CoherentWeights { amplitudes, tail_mass })
}
