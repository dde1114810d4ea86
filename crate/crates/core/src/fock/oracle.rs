//! Brute-force reference dynamics on a truncated multimode product basis,
//! without any sector or bright-mode reduction. Used only to cross-check the
//! sector evolution.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_ORACLE_DIM_CAP: usize = 20_000;

/// `g (b a_s† a_i† + b† a_s a_i)` between three distinct modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrilinearCoupling {
    pub pump: usize,
    pub signal: usize,
    pub idler: usize,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePoint {
    pub t: f64,
    pub occupations: Vec<f64>,
    /// `⟨a_i† a_k⟩` for every pair of modes; `correlations[i][i]` is the
    /// occupation of mode `i`.
    pub correlations: Vec<Vec<Complex64>>,
    /// Purity of the reduced state of mode 0. For a pure global state this
    /// equals the purity of the complementary modes.
    pub purity: f64,
    pub norm: f64,
}

struct Grid {
    dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    fn new(cutoffs: &[usize], cap: usize) -> Result<Self> {
        let dims: Vec<usize> = cutoffs.iter().map(|c| c + 1).collect();
        let len = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
        if len > cap {
            return Err(Error::ResourceCap { what: "oracle product dimension", requested: len, cap });
        }
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Ok(Self { dims, strides, len })
    }

    fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.dims[mode]
    }
}

fn apply_h(grid: &Grid, couplings: &[TrilinearCoupling], psi: &[Complex64], out: &mut [Complex64]) {
    out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
    for c in couplings {
        let (cs, ci) = (grid.dims[c.signal] - 1, grid.dims[c.idler] - 1);
        for k in 0..grid.len {
            let np = grid.occupation(k, c.pump);
            let ns = grid.occupation(k, c.signal);
            let ni = grid.occupation(k, c.idler);
            if np == 0 || ns == cs || ni == ci {
                continue;
            }
            let j = k - grid.strides[c.pump] + grid.strides[c.signal] + grid.strides[c.idler];
            let amp = c.g * (np as f64 * (ns + 1) as f64 * (ni + 1) as f64).sqrt();
            out[j] += amp * psi[k];
            out[k] += amp * psi[j];
        }
    }
}

/// `exp(−iH dt)` by Taylor series, summed until the terms are negligible.
fn taylor_step(grid: &Grid, couplings: &[TrilinearCoupling], psi: &mut [Complex64], dt: f64) {
    let mut term = psi.to_vec();
    let mut next = vec![Complex64::new(0.0, 0.0); grid.len];
    let scale = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for n in 1..200 {
        apply_h(grid, couplings, &term, &mut next);
        let factor = Complex64::new(0.0, -dt / n as f64);
        let mut size = 0.0;
        for (t, h) in term.iter_mut().zip(&next) {
            *t = factor * h;
            size += t.norm_sqr();
        }
        psi.iter_mut().zip(&term).for_each(|(p, t)| *p += t);
        if size.sqrt() <= 1e-17 * scale {
            break;
        }
    }
}

fn observe(grid: &Grid, psi: &[Complex64], t: f64) -> OraclePoint {
    let modes = grid.dims.len();
    let mut occupations = vec![0.0; modes];
    let mut norm = 0.0;
    for (k, a) in psi.iter().enumerate() {
        let p = a.norm_sqr();
        norm += p;
        for (m, occ) in occupations.iter_mut().enumerate() {
            *occ += p * grid.occupation(k, m) as f64;
        }
    }
    let mut correlations = vec![vec![Complex64::new(0.0, 0.0); modes]; modes];
    for (i, row) in correlations.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            if i == k {
                *cell = Complex64::new(occupations[i], 0.0);
                continue;
            }
            // a_i† a_k maps index j to j − stride_k + stride_i
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, a) in psi.iter().enumerate() {
                let (nk, ni) = (grid.occupation(j, k), grid.occupation(j, i));
                if nk == 0 || ni + 1 == grid.dims[i] {
                    continue;
                }
                let target = j - grid.strides[k] + grid.strides[i];
                acc += psi[target].conj() * a * (nk as f64 * (ni + 1) as f64).sqrt();
            }
            *cell = acc;
        }
    }
    // mode 0 has the largest stride, so each of its levels is a contiguous block
    let d0 = grid.dims[0];
    let block = grid.strides[0];
    let mut purity = 0.0;
    for n in 0..d0 {
        for m in 0..d0 {
            let rho: Complex64 = (0..block).map(|r| psi[n * block + r] * psi[m * block + r].conj()).sum();
            purity += rho.norm_sqr();
        }
    }
    OraclePoint { t, occupations, correlations, purity, norm }
}

/// Evolve a product initial state (one Fock-amplitude vector per mode, index =
/// occupation, length at most `cutoff + 1`) at the given non-decreasing times.
pub fn oracle_multimode_evolve(
    cutoffs: &[usize],
    couplings: &[TrilinearCoupling],
    initial: &[Vec<Complex64>],
    times: &[f64],
    dim_cap: usize,
) -> Result<Vec<OraclePoint>> {
    if cutoffs.is_empty() || initial.len() != cutoffs.len() {
        return Err(Error::domain("oracle needs one initial amplitude vector per mode"));
    }
    for c in couplings {
        let idx = [c.pump, c.signal, c.idler];
        if idx.iter().any(|&i| i >= cutoffs.len()) || c.pump == c.signal || c.pump == c.idler || c.signal == c.idler {
            return Err(Error::domain("coupling must name three distinct existing modes"));
        }
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::domain("oracle times must be non-negative and non-decreasing"));
    }
    let grid = Grid::new(cutoffs, dim_cap)?;
    for (amps, &c) in initial.iter().zip(cutoffs) {
        if amps.len() > c + 1 {
            return Err(Error::CutoffTooSmall { given: c, required: amps.len() - 1 });
        }
    }

    let mut psi = vec![Complex64::new(0.0, 0.0); grid.len];
    for (k, slot) in psi.iter_mut().enumerate() {
        *slot = initial
            .iter()
            .enumerate()
            .map(|(m, amps)| amps.get(grid.occupation(k, m)).copied().unwrap_or_default())
            .product();
    }
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::domain("oracle initial state has zero norm"));
    }
    psi.iter_mut().for_each(|a| *a /= norm);

    // step small enough that the Taylor terms decay from the first order
    let h_bound: f64 = couplings
        .iter()
        .map(|c| {
            let d = |m: usize| grid.dims[m] as f64;
            2.0 * c.g.abs() * ((d(c.pump) - 1.0) * d(c.signal) * d(c.idler)).sqrt()
        })
        .sum();
    let max_dt = if h_bound > 0.0 { 0.5 / h_bound } else { f64::INFINITY };

    let mut now = 0.0;
    let mut points = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span / max_dt).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            for _ in 0..steps {
                taylor_step(&grid, couplings, &mut psi, dt);
            }
            now = t;
        }
        points.push(observe(&grid, &psi, t));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{evolve, DynamicsParams, ModeInit, SectorState};

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn coupling(g: f64) -> Vec<TrilinearCoupling> {
        vec![TrilinearCoupling { pump: 0, signal: 1, idler: 2, g }]
    }

    #[test]
    fn single_graviton_rabi() {
        let init = vec![vec![Complex64::new(0.0, 0.0), one()], vec![one()], vec![one()]];
        let times: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let pts = oracle_multimode_evolve(&[1, 1, 1], &coupling(1.0), &init, &times, 100).unwrap();
        for p in &pts {
            assert!((p.occupations[2] - p.t.sin().powi(2)).abs() < 1e-12);
            assert!((p.purity - (p.t.cos().powi(4) + p.t.sin().powi(4))).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_sector_evolution() {
        let b = ModeInit::Coherent { re: 1.5, im: 0.4, cutoff: Some(14) }.amplitudes().unwrap();
        let a = ModeInit::Fock { n: 1 }.amplitudes().unwrap();
        let c = ModeInit::Vacuum.amplitudes().unwrap();
        let times: Vec<f64> = (0..21).map(|i| 0.15 * i as f64).collect();
        let pts =
            oracle_multimode_evolve(&[14, 15, 14], &coupling(0.7), &[b.clone(), a.clone(), c.clone()], &times, 20_000)
                .unwrap();
        let s = SectorState::product(&b, &a, &c).unwrap();
        let ev = evolve(&s, &DynamicsParams::resonant(0.7), &times, None).unwrap();
        for (o, e) in pts.iter().zip(&ev.series.points) {
            assert!((o.occupations[0] - e.n_b).abs() < 1e-10);
            assert!((o.occupations[1] - e.n_alpha).abs() < 1e-10);
            assert!((o.occupations[2] - e.n_c).abs() < 1e-10);
            assert!((o.purity - e.purity).abs() < 1e-10, "{} {}", o.purity, e.purity);
            assert!((o.norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shared_pump_correlations() {
        // one pump photon feeding two idlers: ⟨a_2† a_3⟩ = sin²(Gt) g1 g2 / G²
        let (g1, g2) = (0.6, 0.8);
        let couplings = [
            TrilinearCoupling { pump: 0, signal: 1, idler: 2, g: g1 },
            TrilinearCoupling { pump: 0, signal: 1, idler: 3, g: g2 },
        ];
        let zero = Complex64::new(0.0, 0.0);
        let init = vec![vec![zero, one()], vec![one()], vec![one()], vec![one()]];
        let times = [0.0, 0.4, 1.3];
        let pts = oracle_multimode_evolve(&[1, 1, 1, 1], &couplings, &init, &times, 100).unwrap();
        for p in &pts {
            let s2 = p.t.sin().powi(2);
            assert!((p.correlations[2][3] - Complex64::new(s2 * g1 * g2, 0.0)).norm() < 1e-12);
            assert!((p.correlations[3][2] - p.correlations[2][3].conj()).norm() < 1e-15);
            let c = &p.correlations;
            let dark = g2 * g2 * c[2][2].re + g1 * g1 * c[3][3].re - g1 * g2 * (c[2][3].re + c[3][2].re);
            assert!(dark.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_coupling_is_static() {
        let init = vec![ModeInit::coherent_mean(2.0).amplitudes().unwrap(), vec![one()], vec![one()]];
        let cut = init[0].len() - 1;
        let pts = oracle_multimode_evolve(&[cut, 2, 2], &coupling(0.0), &init, &[0.0, 5.0], 1000).unwrap();
        assert_eq!(pts[1], OraclePoint { t: 5.0, ..pts[0].clone() });
    }

    #[test]
    fn dimension_cap() {
        let init = vec![vec![one()]; 5];
        match oracle_multimode_evolve(&[10; 5], &[], &init, &[0.0], 20_000) {
            Err(Error::ResourceCap { requested, .. }) => assert_eq!(requested, 161_051),
            _ => panic!("expected resource cap error"),
        }
    }

    #[test]
    fn rejects_bad_couplings() {
        let init = vec![vec![one()]; 3];
        let bad = [TrilinearCoupling { pump: 0, signal: 1, idler: 1, g: 1.0 }];
        assert!(oracle_multimode_evolve(&[1, 1, 1], &bad, &init, &[0.0], 100).is_err());
        let missing = [TrilinearCoupling { pump: 0, signal: 1, idler: 3, g: 1.0 }];
        assert!(oracle_multimode_evolve(&[1, 1, 1], &missing, &init, &[0.0], 100).is_err());
    }
}
