use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::state::SectorState;

/// Reduced density matrix of the two photon modes, `Tr_b |ψ⟩⟨ψ|`, over the
/// `(n_α, n_c)` pairs that appear in the state, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmDensity {
    pub pairs: Vec<[u32; 2]>,
    pub matrix: DMatrix<Complex64>,
}

impl EmDensity {
    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }
}

pub fn reduced_em_density(state: &SectorState) -> EmDensity {
    let mut index: BTreeMap<[u32; 2], usize> = BTreeMap::new();
    for ([_, na, nc], _) in state.entries() {
        index.entry([na, nc]).or_insert(0);
    }
    for (i, v) in index.values_mut().enumerate() {
        *v = i;
    }
    // group amplitudes by graviton number
    let mut by_nb: HashMap<u32, Vec<(usize, Complex64)>> = HashMap::new();
    for ([nb, na, nc], a) in state.entries() {
        if a != Complex64::new(0.0, 0.0) {
            by_nb.entry(nb).or_default().push((index[&[na, nc]], a));
        }
    }
    let dim = index.len();
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    let mut keys: Vec<u32> = by_nb.keys().copied().collect();
    keys.sort_unstable();
    for nb in keys {
        let v = &by_nb[&nb];
        for &(i, ai) in v {
            for &(j, aj) in v {
                rho[(i, j)] += ai * aj.conj();
            }
        }
    }
    EmDensity { pairs: index.into_keys().collect(), matrix: rho }
}

/// Reduced density matrix of the graviton mode, `Tr_{α,c} |ψ⟩⟨ψ|`, indexed by
/// `n_b` from zero. For a pure global state its nonzero spectrum equals that
/// of [`reduced_em_density`], and it stays small when the photon modes are
/// spread over many `(n_α, n_c)` pairs.
pub fn reduced_graviton_density(state: &SectorState) -> DMatrix<Complex64> {
    let mut by_em: HashMap<[u32; 2], Vec<(usize, Complex64)>> = HashMap::new();
    let mut dim = 0;
    for ([nb, na, nc], a) in state.entries() {
        if a != Complex64::new(0.0, 0.0) {
            by_em.entry([na, nc]).or_default().push((nb as usize, a));
            dim = dim.max(nb as usize + 1);
        }
    }
    let mut keys: Vec<[u32; 2]> = by_em.keys().copied().collect();
    keys.sort_unstable();
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for key in keys {
        let v = &by_em[&key];
        for &(i, ai) in v {
            for &(j, aj) in v {
                rho[(i, j)] += ai * aj.conj();
            }
        }
    }
    rho
}

/// `Tr ρ² = Σ |ρ_ij|²` for Hermitian `ρ`.
pub fn purity(rho: &DMatrix<Complex64>) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// Von Neumann entropy `−Σ λ ln λ` (natural log), with `0 ln 0 = 0`.
pub fn entropy(rho: &DMatrix<Complex64>) -> f64 {
    if rho.nrows() == 0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(rho.clone());
    // eigenvalues within rounding of 1 would otherwise give a tiny negative S
    let s: f64 = eig.eigenvalues.iter().filter(|&&l| l > 1e-300).map(|&l| -l * l.ln()).sum();
    s.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_is_pure() {
        let s = SectorState::product(
            &super::super::ModeInit::coherent_mean(3.0).amplitudes().unwrap(),
            &[Complex64::new(1.0, 0.0)],
            &[Complex64::new(1.0, 0.0)],
        )
        .unwrap();
        let rho = reduced_em_density(&s);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!((purity(&rho.matrix) - 1.0).abs() < 1e-12);
        assert!(entropy(&rho.matrix).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_pair() {
        let mut rho = DMatrix::<Complex64>::zeros(2, 2);
        rho[(0, 0)] = Complex64::new(0.5, 0.0);
        rho[(1, 1)] = Complex64::new(0.5, 0.0);
        assert!((purity(&rho) - 0.5).abs() < 1e-15);
        assert!((entropy(&rho) - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn entangled_with_graviton() {
        // (|1,0,0⟩ + |0,1,1⟩)/√2 leaves the photons in diag(1/2, 1/2)
        let s = SectorState::from_amplitudes([
            ([1, 0, 0], Complex64::new(1.0, 0.0)),
            ([0, 1, 1], Complex64::new(0.0, -1.0)),
        ])
        .unwrap();
        let rho = reduced_em_density(&s);
        assert_eq!(rho.pairs, vec![[0, 0], [1, 1]]);
        assert!((rho.matrix[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(rho.matrix[(0, 1)].norm() < 1e-15);
        assert!((purity(&rho.matrix) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn graviton_and_photon_spectra_agree() {
        let b = super::super::ModeInit::Coherent { re: 1.1, im: -0.3, cutoff: Some(12) }.amplitudes().unwrap();
        let a = super::super::ModeInit::Coherent { re: 0.4, im: 0.6, cutoff: Some(8) }.amplitudes().unwrap();
        let c = super::super::ModeInit::Fock { n: 2 }.amplitudes().unwrap();
        let s = SectorState::product(&b, &a, &c).unwrap();
        let params = super::super::DynamicsParams::resonant(0.9);
        let s = super::super::Propagator::new(&s, &params).unwrap().state_at(0.8);
        let em = reduced_em_density(&s);
        let gr = reduced_graviton_density(&s);
        assert!((purity(&em.matrix) - purity(&gr)).abs() < 1e-12);
        assert!(purity(&gr) < 0.99);
        assert!((entropy(&em.matrix) - entropy(&gr)).abs() < 1e-10);
    }

    #[test]
    fn coherences_between_sectors_survive() {
        // same graviton number in two sectors: photons stay in a superposition
        let s = SectorState::from_amplitudes([
            ([2, 0, 0], Complex64::new(1.0, 0.0)),
            ([2, 1, 1], Complex64::new(0.0, 1.0)),
        ])
        .unwrap();
        let rho = reduced_em_density(&s);
        assert!((rho.matrix[(0, 1)] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((purity(&rho.matrix) - 1.0).abs() < 1e-14);
    }
}
