use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Basis of the `(M, N_diff)` invariant subspace. Entries are
/// `[n_b, n_α, n_c]`, ordered by descending `n_b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FockSector {
    m: u32,
    n_diff: i32,
    basis: Vec<[u32; 3]>,
}

impl FockSector {
    pub fn manley_rowe(&self) -> u32 {
        self.m
    }

    pub fn n_diff(&self) -> i32 {
        self.n_diff
    }

    pub fn basis(&self) -> &[[u32; 3]] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Position of a triple in the basis, if it belongs to this sector.
    pub fn position(&self, triple: [u32; 3]) -> Option<usize> {
        let [nb, na, nc] = triple;
        if 2 * nb + na + nc != self.m || na as i64 - nc as i64 != self.n_diff as i64 {
            return None;
        }
        Some((self.basis[0][0] - nb) as usize)
    }

    /// Sector containing the given occupation triple.
    pub fn containing(triple: [u32; 3]) -> Self {
        let [nb, na, nc] = triple;
        build_sector(2 * nb + na + nc, na as i32 - nc as i32)
    }
}

pub fn build_sector(m: u32, n_diff: i32) -> FockSector {
    let spread = m as i64 - n_diff.unsigned_abs() as i64;
    let mut basis = Vec::new();
    if spread >= 0 && spread % 2 == 0 {
        let nb_max = (spread / 2) as u32;
        for nb in (0..=nb_max).rev() {
            let photons = m - 2 * nb;
            let na = ((photons as i64 + n_diff as i64) / 2) as u32;
            let nc = ((photons as i64 - n_diff as i64) / 2) as u32;
            basis.push([nb, na, nc]);
        }
    }
    FockSector { m, n_diff, basis }
}

/// Tridiagonal sector Hamiltonian (rad/s): off-diagonal
/// `g sqrt(n_b (n_α + 1)(n_c + 1))` between neighbouring ladder states,
/// diagonal `δ n_b`.
pub fn sector_hamiltonian(sector: &FockSector, g: f64, detuning: f64) -> Result<DMatrix<f64>> {
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::domain(format!("coupling must be finite and non-negative, got {g}")));
    }
    if !detuning.is_finite() {
        return Err(Error::domain("detuning must be finite"));
    }
    let n = sector.dim();
    let mut h = DMatrix::zeros(n, n);
    for (i, &[nb, na, nc]) in sector.basis.iter().enumerate() {
        h[(i, i)] = detuning * nb as f64;
        if i + 1 < n {
            let v = g * (nb as f64 * (na as f64 + 1.0) * (nc as f64 + 1.0)).sqrt();
            h[(i, i + 1)] = v;
            h[(i + 1, i)] = v;
        }
    }
    Ok(h)
}
