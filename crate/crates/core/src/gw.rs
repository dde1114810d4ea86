//! Gravitational-wave mode, polarization tensors, and the cavity overlap
//! integral that sets the three-wave-mixing coupling.
//!
//! The overlap of TE modes `α`, `β` with a GW of wavevector `K` and
//! polarization tensor `e` is
//!
//! ```text
//! A = ∫_V dV { ¼ Ξ_ijkl(x) [ (∇×u_α)_i (∇×u_β)_j / (k_α k_β) − u_αi u_βj ]
//!              − i/(2 k_β) ε_ijn u_αi (∇×u_β)_j Γ_nkl(x) } x^k x^l
//!
//! Ξ_ijkl = −(K_j K_k e_il + K_l K_i e_kj − K_l K_k e_ij − K_i K_j e_kl) F2(K·x)
//!          + ½ K² δ_ij e_kl (F0(K·x) − F2(K·x))
//! Γ_nkl  = |K| (K_n e_kl − K_l e_nk) F1(K·x)
//! ```
//!
//! The integral is evaluated with lengths measured in units of `Lx`; `A` is
//! dimensionless, so the result does not depend on that choice. The `Ξ` part
//! is real and the `Γ` part is purely imaginary; both are kept.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{mode_frequency, CavityGeometry, ModeIndex, TeMode, Vec3};
use crate::constants::{planck_energy, HBAR, PLANCK, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::quadrature::{GaussLegendre, Origin, QuadratureSpec};
use crate::resonance::{phase_mismatch, PhaseMismatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    Plus,
    Cross,
}

/// How strongly the GW mode is driven.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    /// Classical strain amplitude `h₊`.
    Strain(f64),
    /// Coherent-state amplitude `η`, `n_g = |η|²`.
    Coherent { re: f64, im: f64 },
}

/// A single plane GW mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwMode {
    pub theta: f64,
    pub phi: f64,
    /// Angular frequency, rad/s.
    pub omega: f64,
    pub polarization: Polarization,
    pub drive: Drive,
}

impl GwMode {
    pub fn new(theta: f64, phi: f64, omega: f64, polarization: Polarization, drive: Drive) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::domain(format!("propagation angles must be finite, got ({theta}, {phi})")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::domain(format!("GW angular frequency must be positive, got {omega}")));
        }
        Ok(Self { theta, phi, omega, polarization, drive })
    }

    pub fn from_frequency_hz(theta: f64, phi: f64, f: f64, polarization: Polarization, drive: Drive) -> Result<Self> {
        Self::new(theta, phi, 2.0 * PI * f, polarization, drive)
    }

    pub fn direction(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vec3::new(st * cp, st * sp, ct)
    }

    /// `K = (Ω/c) K̂` in 1/m.
    pub fn wavevector(&self) -> Vec3 {
        self.direction() * (self.omega / SPEED_OF_LIGHT)
    }

    pub fn polarization_tensor(&self) -> PolarizationTensor {
        polarization_tensor(&self.direction(), self.polarization).expect("unit direction")
    }

    /// Mean graviton number carried by the drive.
    pub fn graviton_number(&self) -> f64 {
        match self.drive {
            Drive::Strain(h) => graviton_number(h, self.omega / (2.0 * PI)),
            Drive::Coherent { re, im } => re * re + im * im,
        }
    }
}

/// Real symmetric transverse-traceless tensor with `Σ e_ij e_ij = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationTensor(pub Matrix3<f64>);

impl PolarizationTensor {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0 * s)
    }
}

/// Transverse dyad built from the coordinate axis along which `K̂` has its
/// smallest component (first such axis on ties): `û` is that axis with its
/// projection on `K̂` removed, `v̂ = K̂ × û`, and
/// `e⁺ = ûû − v̂v̂`, `eˣ = ûv̂ + v̂û`.
pub fn polarization_tensor(direction: &Vec3, pol: Polarization) -> Result<PolarizationTensor> {
    let n = direction.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::domain("GW direction must be a nonzero vector"));
    }
    let k = direction / n;
    let mut axis = 0;
    for i in 1..3 {
        if k[i].abs() < k[axis].abs() {
            axis = i;
        }
    }
    let mut a = Vec3::zeros();
    a[axis] = 1.0;
    let u = (a - k * a.dot(&k)).normalize();
    let v = k.cross(&u);
    let e = match pol {
        Polarization::Plus => u * u.transpose() - v * v.transpose(),
        Polarization::Cross => u * v.transpose() + v * u.transpose(),
    };
    Ok(PolarizationTensor(e))
}

const SERIES_SWITCH: f64 = 0.5;
const SERIES_TERMS: usize = 10;

/// Taylor coefficients in `u²` for F0, F1, F2.
const fn series_coefficients() -> [[f64; SERIES_TERMS]; 3] {
    let mut out = [[0.0; SERIES_TERMS]; 3];
    let mut k = 0;
    while k < SERIES_TERMS {
        // (2k+2)! and (2k+3)!
        let mut f2k2 = 1.0;
        let mut i = 2;
        while i <= 2 * k + 2 {
            f2k2 *= i as f64;
            i += 1;
        }
        let f2k3 = f2k2 * (2 * k + 3) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out[0][k] = sign / f2k2;
        out[1][k] = -sign * (2 * k + 2) as f64 / f2k3;
        out[2][k] = -sign * (2 * k + 1) as f64 / f2k3;
        k += 1;
    }
    out
}

const SERIES: [[f64; SERIES_TERMS]; 3] = series_coefficients();

fn series(which: usize, u: f64) -> f64 {
    let v = u * u;
    SERIES[which].iter().rev().fold(0.0, |acc, &c| acc * v + c)
}

/// `(1 − cos u)/u²`.
pub fn f0(u: f64) -> f64 {
    if u.abs() < SERIES_SWITCH {
        series(0, u)
    } else {
        // half-angle form keeps full relative accuracy near u = 2πk
        let s = (0.5 * u).sin();
        2.0 * s * s / (u * u)
    }
}

/// `−sin u/u³ + cos u/u²`.
pub fn f1(u: f64) -> f64 {
    if u.abs() < SERIES_SWITCH {
        series(1, u)
    } else {
        let (s, c) = u.sin_cos();
        (u * c - s) / (u * u * u)
    }
}

/// `(1 + cos u)/u² − 2 sin u/u³`.
pub fn f2(u: f64) -> f64 {
    if u.abs() < SERIES_SWITCH {
        series(2, u)
    } else {
        // 1 + cos u = 2 cos²(u/2), sin u = 2 sin(u/2) cos(u/2)
        let (s, c) = (0.5 * u).sin_cos();
        2.0 * c * (u * c - 2.0 * s) / (u * u * u)
    }
}

pub type Rank4 = [[[[f64; 3]; 3]; 3]; 3];
pub type Rank3 = [[[f64; 3]; 3]; 3];

/// `Ξ_ijkl(x)` for the GW wavevector. Units 1/m².
pub fn xi_tensor(gw: &GwMode, e: &PolarizationTensor, x: &Vec3) -> Rank4 {
    xi_tensor_for(&gw.wavevector(), e, x)
}

pub(crate) fn xi_tensor_for(k: &Vec3, e: &PolarizationTensor, x: &Vec3) -> Rank4 {
    let e = &e.0;
    let u = k.dot(x);
    let (w2, w0) = (f2(u), f0(u) - f2(u));
    let k2 = k.norm_squared();
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let dij = if i == j { 1.0 } else { 0.0 };
            for kk in 0..3 {
                for l in 0..3 {
                    let block = k[j] * k[kk] * e[(i, l)] + k[l] * k[i] * e[(kk, j)]
                        - k[l] * k[kk] * e[(i, j)]
                        - k[i] * k[j] * e[(kk, l)];
                    out[i][j][kk][l] = -block * w2 + 0.5 * k2 * dij * e[(kk, l)] * w0;
                }
            }
        }
    }
    out
}

/// `Γ_nkl(x)`. Units 1/m².
pub fn gamma_tensor(gw: &GwMode, e: &PolarizationTensor, x: &Vec3) -> Rank3 {
    gamma_tensor_for(&gw.wavevector(), e, x)
}

pub(crate) fn gamma_tensor_for(k: &Vec3, e: &PolarizationTensor, x: &Vec3) -> Rank3 {
    let e = &e.0;
    let w = k.norm() * f1(k.dot(x));
    let mut out = [[[0.0; 3]; 3]; 3];
    for n in 0..3 {
        for kk in 0..3 {
            for l in 0..3 {
                out[n][kk][l] = w * (k[n] * e[(kk, l)] - k[l] * e[(n, kk)]);
            }
        }
    }
    out
}

/// Integrand of the overlap at coordinate `x` (measured from the chosen
/// origin) with the mode functions evaluated at `position`. Uses the rank-one
/// structure of the mode bilinear so that no rank-4 tensor is formed.
pub(crate) fn overlap_integrand(
    alpha: &TeMode,
    beta: &TeMode,
    k: &Vec3,
    e: &Matrix3<f64>,
    position: &Vec3,
    x: &Vec3,
) -> Complex64 {
    let ua = alpha.field_at(position);
    let ub = beta.field_at(position);
    let ca = alpha.curl_at(position);
    let cb = beta.curl_at(position);
    let kab = alpha.wavenumber() * beta.wavenumber();
    // M = ca cbᵀ/(kα kβ) − ua ubᵀ;  aᵀ M b
    let bil = |a: &Vec3, b: &Vec3| a.dot(&ca) * cb.dot(b) / kab - a.dot(&ua) * ub.dot(b);

    let kx = k.dot(x);
    let ex = e * x;
    let xex = x.dot(&ex);
    let e_m = ca.dot(&(e * cb)) / kab - ua.dot(&(e * ub));
    let tr_m = ca.dot(&cb) / kab - ua.dot(&ub);

    let block = kx * bil(&ex, k) + kx * bil(k, &ex) - kx * kx * e_m - bil(k, k) * xex;
    let re = 0.25 * (-block * f2(kx) + 0.5 * k.norm_squared() * tr_m * xex * (f0(kx) - f2(kx)));

    let w = ua.cross(&cb);
    let gxx = k.norm() * f1(kx) * (w.dot(k) * xex - kx * w.dot(&ex));
    let im = -gxx / (2.0 * beta.wavenumber());
    Complex64::new(re, im)
}

/// Overlap value with the quadrature order at which it was accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub re: f64,
    pub im: f64,
    pub order: usize,
    pub origin: Origin,
}

impl Overlap {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// `|A|`, used as the physical coupling magnitude.
    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Fixed-order tensor-product estimate of the overlap.
pub fn overlap_at_order(
    geom: &CavityGeometry,
    alpha: ModeIndex,
    beta: ModeIndex,
    gw: &GwMode,
    e: &PolarizationTensor,
    order: usize,
    origin: Origin,
) -> Complex64 {
    // lengths in units of Lx
    let lx = geom.sides()[0];
    let scaled = geom.scaled(1.0 / lx).expect("positive scale");
    let ma = TeMode::new(&scaled, alpha);
    let mb = TeMode::new(&scaled, beta);
    let k = gw.wavevector() * lx;
    let sides = scaled.sides();
    let offset = match origin {
        Origin::Corner => Vec3::zeros(),
        Origin::Center => Vec3::new(sides[0], sides[1], sides[2]) * 0.5,
    };
    let rule = GaussLegendre::new(order);
    let axes: Vec<(Vec<f64>, Vec<f64>)> = sides.iter().map(|&l| rule.on_interval(0.0, l)).collect();
    let (xs, wx) = &axes[0];
    let (ys, wy) = &axes[1];
    let (zs, wz) = &axes[2];
    let e = e.0;

    let slabs: Vec<Complex64> = (0..order)
        .into_par_iter()
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..order {
                let mut row = Complex64::new(0.0, 0.0);
                for (z, w) in zs.iter().zip(wz) {
                    let p = Vec3::new(xs[i], ys[j], *z);
                    row += overlap_integrand(&ma, &mb, &k, &e, &p, &(p - offset)) * *w;
                }
                acc += row * wy[j];
            }
            acc * wx[i]
        })
        .collect();
    slabs.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

/// Overlap integral with adaptive order doubling per [`QuadratureSpec`].
pub fn overlap_integral(
    geom: &CavityGeometry,
    alpha: ModeIndex,
    beta: ModeIndex,
    gw: &GwMode,
    quad: &QuadratureSpec,
) -> Result<Overlap> {
    overlap_integral_with(geom, alpha, beta, gw, &gw.polarization_tensor(), quad)
}

/// As [`overlap_integral`] with an explicit polarization tensor.
pub fn overlap_integral_with(
    geom: &CavityGeometry,
    alpha: ModeIndex,
    beta: ModeIndex,
    gw: &GwMode,
    e: &PolarizationTensor,
    quad: &QuadratureSpec,
) -> Result<Overlap> {
    if quad.order < 2 {
        return Err(Error::config(format!("quadrature order must be at least 2, got {}", quad.order)));
    }
    let mut order = quad.order;
    let mut prev = overlap_at_order(geom, alpha, beta, gw, e, order, quad.origin);
    for _ in 0..quad.max_refinements {
        let next_order = order * 2;
        let next = overlap_at_order(geom, alpha, beta, gw, e, next_order, quad.origin);
        if (next - prev).norm() <= quad.rtol * next.norm() + quad.atol {
            return Ok(Overlap { re: next.re, im: next.im, order: next_order, origin: quad.origin });
        }
        order = next_order;
        prev = next;
    }
    let coarse = overlap_at_order(geom, alpha, beta, gw, e, order / 2, quad.origin);
    Err(Error::NonConvergence { coarse_order: order / 2, fine_order: order, coarse: coarse.norm(), fine: prev.norm() })
}

/// `C_g = (ħ/E_pl) sqrt(16π c³ / (2 Ω V))`, dimensionless strain per graviton.
pub fn graviton_prefactor(omega: f64, volume: f64) -> f64 {
    HBAR / planck_energy() * (16.0 * PI * SPEED_OF_LIGHT.powi(3) / (2.0 * omega * volume)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    pub alpha: ModeIndex,
    pub beta: ModeIndex,
    pub overlap: Overlap,
    pub omega_alpha: f64,
    pub omega_beta: f64,
    pub gw_omega: f64,
    pub volume: f64,
    pub prefactor: f64,
    /// `g = sqrt(ω_α ω_β) C_g |A|`, rad/s.
    pub g: f64,
    pub mismatch: PhaseMismatch,
}

impl CouplingResult {
    /// Recompute `g` from the stored inputs.
    pub fn recomputed_g(&self) -> f64 {
        (self.omega_alpha * self.omega_beta).sqrt()
            * graviton_prefactor(self.gw_omega, self.volume)
            * self.overlap.magnitude()
    }
}

/// Coupling for an already computed overlap.
pub fn coupling_from_overlap(
    geom: &CavityGeometry,
    alpha: ModeIndex,
    beta: ModeIndex,
    gw: &GwMode,
    overlap: Overlap,
) -> CouplingResult {
    let omega_alpha = mode_frequency(geom, alpha);
    let omega_beta = mode_frequency(geom, beta);
    let prefactor = graviton_prefactor(gw.omega, geom.volume());
    CouplingResult {
        alpha,
        beta,
        overlap,
        omega_alpha,
        omega_beta,
        gw_omega: gw.omega,
        volume: geom.volume(),
        prefactor,
        g: (omega_alpha * omega_beta).sqrt() * prefactor * overlap.magnitude(),
        mismatch: phase_mismatch(geom, alpha, beta, gw),
    }
}

pub fn coupling_strength(
    geom: &CavityGeometry,
    alpha: ModeIndex,
    beta: ModeIndex,
    gw: &GwMode,
    quad: &QuadratureSpec,
) -> Result<CouplingResult> {
    let overlap = overlap_integral(geom, alpha, beta, gw, quad)?;
    Ok(coupling_from_overlap(geom, alpha, beta, gw, overlap))
}

/// Graviton occupancy `n_g = (E_pl h₊ / (h f))²` of a GW with strain `h₊` at
/// frequency `f` (Hz): the natural-unit `M_pl² h₊² / f²` with `f` converted to
/// the energy `h f`.
pub fn graviton_number(strain: f64, frequency_hz: f64) -> f64 {
    let ratio = planck_energy() * strain / (PLANCK * frequency_hz);
    ratio * ratio
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)] // explicit tensor indices
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
        ((j as f64 - i as f64) * (k as f64 - i as f64) * (k as f64 - j as f64)) / 2.0
    }

    fn check_tt(e: &PolarizationTensor, k: &Vec3) {
        let m = e.matrix();
        assert!((m - m.transpose()).abs().max() < 1e-15);
        assert!(m.trace().abs() < 1e-12);
        assert!((m * k).norm() < 1e-12);
        assert!((m.component_mul(m).sum() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_z_polarizations() {
        let z = Vec3::z();
        let p = polarization_tensor(&z, Polarization::Plus).unwrap();
        assert_eq!(p.0, Matrix3::from_diagonal(&Vec3::new(1.0, -1.0, 0.0)));
        let c = polarization_tensor(&z, Polarization::Cross).unwrap();
        let mut expect = Matrix3::zeros();
        expect[(0, 1)] = 1.0;
        expect[(1, 0)] = 1.0;
        assert_eq!(c.0, expect);
    }

    #[test]
    fn oblique_polarization_is_transverse_traceless() {
        let k = Vec3::new((PI / 2.0).sin() * (PI / 6.0).cos(), (PI / 2.0).sin() * (PI / 6.0).sin(), 0.0);
        for pol in [Polarization::Plus, Polarization::Cross] {
            check_tt(&polarization_tensor(&k, pol).unwrap(), &k);
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let gw = GwMode::new(
                rng.random_range(0.0..PI),
                rng.random_range(0.0..2.0 * PI),
                1.0,
                Polarization::Plus,
                Drive::Strain(0.0),
            )
            .unwrap();
            assert!((gw.direction().norm() - 1.0).abs() < 1e-12);
            for pol in [Polarization::Plus, Polarization::Cross] {
                check_tt(&polarization_tensor(&gw.direction(), pol).unwrap(), &gw.direction());
            }
        }
    }

    #[test]
    fn zero_direction_rejected() {
        assert!(polarization_tensor(&Vec3::zeros(), Polarization::Plus).is_err());
    }

    #[test]
    fn f_function_values() {
        assert!(close(f0(PI), 2.0 / (PI * PI), 1e-15));
        assert!(close(f2(2.0 * PI), 2.0 / (4.0 * PI * PI), 1e-13));
        assert_eq!(f0(0.0), 0.5);
        assert_eq!(f1(0.0), -1.0 / 3.0);
        assert_eq!(f2(0.0), -1.0 / 6.0);
        for u in [1e-4, 1e-3, 1e-2] {
            assert!(close(f0(u), 0.5 - u * u / 24.0, 1e-9));
            assert!(close(f1(u), -1.0 / 3.0 + u * u / 30.0, 1e-9));
            assert!(close(f2(u), -1.0 / 6.0 + u * u / 40.0, 1e-9));
        }
    }

    #[test]
    fn f_functions_continuous_across_switch() {
        let closed0 = |u: f64| (1.0 - u.cos()) / (u * u);
        let closed1 = |u: f64| (u * u.cos() - u.sin()) / u.powi(3);
        let closed2 = |u: f64| (u * (1.0 + u.cos()) - 2.0 * u.sin()) / u.powi(3);
        for i in 0..200 {
            let u = SERIES_SWITCH * (0.9 + 0.2 * i as f64 / 199.0);
            for s in [u, -u] {
                assert!((series(0, s) - closed0(s)).abs() < 1e-12);
                assert!((series(1, s) - closed1(s)).abs() < 1e-12);
                assert!((series(2, s) - closed2(s)).abs() < 1e-12);
            }
        }
    }

    fn sample_gw() -> GwMode {
        GwMode::from_frequency_hz(PI / 2.0, PI / 6.0, 3.9e9, Polarization::Plus, Drive::Strain(1e-21)).unwrap()
    }

    #[test]
    fn xi_vanishes_for_zero_tensor() {
        let gw = sample_gw();
        let zero = PolarizationTensor(Matrix3::zeros());
        let xi = xi_tensor(&gw, &zero, &Vec3::new(0.01, 0.02, 0.03));
        assert!(xi.iter().flatten().flatten().flatten().all(|&v| v == 0.0));
        let ga = gamma_tensor(&gw, &zero, &Vec3::new(0.01, 0.02, 0.03));
        assert!(ga.iter().flatten().flatten().all(|&v| v == 0.0));
    }

    /// The four-K block of Ξ is pair-exchange symmetric; the δ_ij e_kl term is
    /// not, so the full tensor only has the symmetry when F0 = F2 weighting
    /// vanishes.
    #[test]
    fn xi_pair_exchange_symmetry() {
        let gw = sample_gw();
        let e = gw.polarization_tensor();
        let k = gw.wavevector();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let x = Vec3::new(rng.random_range(0.0..0.16), rng.random_range(0.0..0.16), rng.random_range(0.0..0.16));
            let xi = xi_tensor(&gw, &e, &x);
            let u = k.dot(&x);
            let delta_w = 0.5 * k.norm_squared() * (f0(u) - f2(u));
            let mut block_asym: f64 = 0.0;
            let mut full_asym: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    for kk in 0..3 {
                        for l in 0..3 {
                            let dij = if i == j { 1.0 } else { 0.0 };
                            let dkl = if kk == l { 1.0 } else { 0.0 };
                            let b1 = xi[i][j][kk][l] - delta_w * dij * e.0[(kk, l)];
                            let b2 = xi[kk][l][i][j] - delta_w * dkl * e.0[(i, j)];
                            block_asym = block_asym.max((b1 - b2).abs());
                            full_asym = full_asym.max((xi[i][j][kk][l] - xi[kk][l][i][j]).abs());
                        }
                    }
                }
            }
            assert!(block_asym < 1e-9 * k.norm_squared());
            assert!(full_asym > 1e-6 * k.norm_squared());
        }
    }

    #[test]
    fn xi_k_squared_scaling() {
        let gw = sample_gw();
        let e = gw.polarization_tensor();
        let x = Vec3::new(0.03, 0.07, 0.05);
        let gw2 = GwMode { omega: 2.0 * gw.omega, ..gw };
        let a = xi_tensor(&gw, &e, &x);
        // K·x held fixed by halving x
        let b = xi_tensor(&gw2, &e, &(x * 0.5));
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        assert!((b[i][j][k][l] - 4.0 * a[i][j][k][l]).abs() < 1e-9 * a[i][j][k][l].abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_antisymmetric_under_first_last_swap() {
        let gw = sample_gw();
        let e = gw.polarization_tensor();
        let g = gamma_tensor(&gw, &e, &Vec3::new(0.02, 0.11, 0.04));
        for n in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    assert!((g[n][k][l] + g[l][k][n]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn gamma_at_zero_phase() {
        let gw = sample_gw();
        let e = gw.polarization_tensor();
        let k = gw.wavevector();
        // K has no z component, so K·x = 0 along z
        let g = gamma_tensor(&gw, &e, &Vec3::new(0.0, 0.0, 0.1));
        for n in 0..3 {
            for kk in 0..3 {
                for l in 0..3 {
                    let pref = k.norm() * (k[n] * e.0[(kk, l)] - k[l] * e.0[(n, kk)]);
                    assert!((g[n][kk][l] - pref * (-1.0 / 3.0)).abs() < 1e-12 * k.norm_squared());
                }
            }
        }
    }

    /// The contracted integrand against an explicit rank-4/rank-3 contraction.
    #[test]
    fn integrand_matches_explicit_tensor_contraction() {
        let geom = CavityGeometry::new(0.16, 0.14, 0.18).unwrap();
        let gw = sample_gw();
        let e = gw.polarization_tensor();
        let k = gw.wavevector();
        let ma = TeMode::new(&geom, ModeIndex::new(1, 1, 1).unwrap());
        let mb = TeMode::new(&geom, ModeIndex::new(1, 2, 1).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p = Vec3::new(rng.random_range(0.0..0.16), rng.random_range(0.0..0.14), rng.random_range(0.0..0.18));
            let offset = Vec3::new(0.08, 0.07, 0.09);
            for x in [p, p - offset] {
                let fast = overlap_integrand(&ma, &mb, &k, &e.0, &p, &x);
                let xi = xi_tensor(&gw, &e, &x);
                let ga = gamma_tensor(&gw, &e, &x);
                let (ua, ub, ca, cb) = (ma.field_at(&p), mb.field_at(&p), ma.curl_at(&p), mb.curl_at(&p));
                let (ka, kb) = (ma.wavenumber(), mb.wavenumber());
                let mut re = 0.0;
                let mut im = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let m = ca[i] * cb[j] / (ka * kb) - ua[i] * ub[j];
                        for kk in 0..3 {
                            for l in 0..3 {
                                re += 0.25 * xi[i][j][kk][l] * m * x[kk] * x[l];
                            }
                        }
                        for n in 0..3 {
                            let eps = levi_civita(i, j, n);
                            if eps == 0.0 {
                                continue;
                            }
                            for kk in 0..3 {
                                for l in 0..3 {
                                    im -= eps * ua[i] * cb[j] * ga[n][kk][l] * x[kk] * x[l] / (2.0 * kb);
                                }
                            }
                        }
                    }
                }
                let scale = fast.norm().max(1.0);
                assert!((fast.re - re).abs() < 1e-10 * scale, "{} {}", fast.re, re);
                assert!((fast.im - im).abs() < 1e-10 * scale, "{} {}", fast.im, im);
            }
        }
    }

    fn sec4() -> (CavityGeometry, GwMode) {
        (CavityGeometry::cubic_resonant(3.9e9).unwrap(), sample_gw())
    }

    #[test]
    fn overlap_is_linear_in_polarization() {
        let (geom, gw) = sec4();
        let a = ModeIndex::new(1, 1, 1).unwrap();
        let b = ModeIndex::new(2, 1, 1).unwrap();
        let e = gw.polarization_tensor();
        let one = overlap_at_order(&geom, a, b, &gw, &e, 12, Origin::Corner);
        let three = overlap_at_order(&geom, a, b, &gw, &e.scaled(3.0), 12, Origin::Corner);
        assert!((three - one * 3.0).norm() < 1e-12 * one.norm());
    }

    #[test]
    fn overlap_independent_of_length_unit() {
        // scaling the cavity by s and Ω by 1/s leaves A unchanged
        let (geom, gw) = sec4();
        let a = ModeIndex::new(1, 1, 1).unwrap();
        let b = ModeIndex::new(1, 2, 1).unwrap();
        let e = gw.polarization_tensor();
        let base = overlap_at_order(&geom, a, b, &gw, &e, 16, Origin::Corner);
        for s in [1e-3, 7.0, 1e4] {
            let g2 = geom.scaled(s).unwrap();
            let w2 = GwMode { omega: gw.omega / s, ..gw };
            let v = overlap_at_order(&g2, a, b, &w2, &e, 16, Origin::Corner);
            assert!((v - base).norm() < 1e-10 * base.norm(), "{s}");
        }
    }

    #[test]
    fn adaptive_quadrature_converges_and_reports() {
        let (geom, gw) = sec4();
        let a = ModeIndex::new(1, 1, 1).unwrap();
        let b = ModeIndex::new(1, 1, 2).unwrap();
        let quad = QuadratureSpec::default();
        let ov = overlap_integral(&geom, a, b, &gw, &quad).unwrap();
        let e = gw.polarization_tensor();
        let coarse = overlap_at_order(&geom, a, b, &gw, &e, ov.order / 2, Origin::Corner);
        assert!((ov.value() - coarse).norm() <= 1e-6 * ov.magnitude() + 1e-12);

        let strict = QuadratureSpec { order: 2, rtol: 1e-15, atol: 0.0, max_refinements: 1, origin: Origin::Corner };
        match overlap_integral(&geom, a, b, &gw, &strict) {
            Err(Error::NonConvergence { coarse_order, fine_order, .. }) => {
                assert_eq!((coarse_order, fine_order), (2, 4));
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
        let bad = QuadratureSpec { order: 1, ..quad };
        assert!(matches!(overlap_integral(&geom, a, b, &gw, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn coupling_scalings() {
        let (geom, gw) = sec4();
        let a = ModeIndex::new(1, 1, 1).unwrap();
        let b = ModeIndex::new(2, 1, 1).unwrap();
        let zero = Overlap { re: 0.0, im: 0.0, order: 16, origin: Origin::Corner };
        assert_eq!(coupling_from_overlap(&geom, a, b, &gw, zero).g, 0.0);

        let ov = Overlap { re: 1.2, im: -0.4, order: 16, origin: Origin::Corner };
        let c1 = coupling_from_overlap(&geom, a, b, &gw, ov);
        assert!(close(c1.recomputed_g(), c1.g, 1e-12));
        assert!(close(c1.g, c1.omega_alpha.sqrt() * c1.omega_beta.sqrt() * c1.prefactor * 1.2f64.hypot(0.4), 1e-12));
        let p2 = graviton_prefactor(gw.omega, 2.0 * geom.volume());
        assert!(close(p2 / c1.prefactor, 2f64.sqrt().recip(), 1e-14));
    }

    #[test]
    fn graviton_number_values() {
        let n = graviton_number(1e-21, 3.9e9);
        assert!(n > 1e23 && n < 1e25, "{n}");
        assert_eq!(graviton_number(0.0, 3.9e9), 0.0);
        assert!(close(graviton_number(2e-21, 3.9e9), 4.0 * n, 1e-14));
        let gw = GwMode::new(1.0, 0.0, 1.0, Polarization::Plus, Drive::Coherent { re: 3.0, im: 4.0 }).unwrap();
        assert!(close(gw.graviton_number(), 25.0, 1e-15));
    }

    #[test]
    fn gw_mode_validation() {
        assert!(GwMode::new(f64::NAN, 0.0, 1.0, Polarization::Plus, Drive::Strain(0.0)).is_err());
        assert!(GwMode::new(0.0, 0.0, 0.0, Polarization::Plus, Drive::Strain(0.0)).is_err());
    }
}
