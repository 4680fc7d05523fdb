//! Nonlinear coherent states, `|z, e_n⟩` states and Gazeau-Klauder coherent
//! states (GKCSs) on a truncated Fock basis.
//!
//! Amplitudes are assembled in the log domain,
//! `ln|ψ_n| = n ln|z| − ½ ln [e_n]!`, and exponentiated relative to the
//! largest term before normalizing, so growing spectra never overflow.

use num_complex::Complex64;

use crate::deformation::{deformed_lower, DeformationSpec};
use crate::error::{Error, Result};
use crate::fockspace::{choose_truncation, FieldState, DEFAULT_TAIL_TOL};

/// Label `(z, α)` of a Gazeau-Klauder coherent state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkLabel {
    pub z: Complex64,
    pub alpha: f64,
}

impl GkLabel {
    pub fn new(z: Complex64, alpha: f64) -> Self {
        Self { z, alpha }
    }
}

/// Truncation for `z` at the default tail tolerance.
pub fn default_truncation(z: Complex64, spec: &DeformationSpec) -> Result<usize> {
    choose_truncation(z, spec, DEFAULT_TAIL_TOL)
}

/// Shared builder: `ψ_n ∝ z^n e^{−i α e_n} / sqrt([e_n]!)`.
fn build(z: Complex64, alpha: f64, spec: &DeformationSpec, n_trunc: usize) -> Result<FieldState> {
    if n_trunc == 0 {
        return Err(Error::InvalidParams("n_trunc must be positive".into()));
    }
    // rejects labels outside the radius of convergence
    choose_truncation(z, spec, DEFAULT_TAIL_TOL)?;
    if n_trunc > spec.capacity() {
        return Err(Error::OutOfCache {
            n: n_trunc - 1,
            capacity: spec.capacity(),
        });
    }
    if z.norm_sqr() == 0.0 {
        return FieldState::fock(0, n_trunc);
    }
    let ln_r = z.norm().ln();
    let arg = z.arg();
    let ln_mag: Vec<f64> = (0..n_trunc)
        .map(|n| Ok(n as f64 * ln_r - 0.5 * spec.ln_e_factorial(n)?))
        .collect::<Result<_>>()?;
    let ln_max = ln_mag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let v = ln_mag
        .iter()
        .enumerate()
        .map(|(n, lm)| {
            let phase = n as f64 * arg - alpha * spec.energies()[n];
            Complex64::from_polar((lm - ln_max).exp(), phase)
        })
        .collect();
    FieldState::normalize(v)
}

/// Nonlinear coherent state `|z, f⟩`: `ψ_n ∝ z^n / (sqrt(n!) [f(n)]!)`.
///
/// With `f(n) = sqrt(e_n/n)` this is also the `|z, e_n⟩` state.
pub fn nonlinear_cs(z: Complex64, spec: &DeformationSpec, n_trunc: usize) -> Result<FieldState> {
    build(z, 0.0, spec, n_trunc)
}

/// Gazeau-Klauder coherent state `|z, α⟩`: `ψ_n ∝ z^n e^{−iα e_n} / sqrt([e_n]!)`.
pub fn gkcs(label: GkLabel, spec: &DeformationSpec, n_trunc: usize) -> Result<FieldState> {
    build(label.z, label.alpha, spec, n_trunc)
}

/// GKCS rebuilt as a nonlinear CS with nonlinearity [`gk_nonlinearity`]:
/// `ψ_n ∝ z^n / (sqrt(n!) Π_{k≤n} f_GK(α, k))`. Computed by direct products,
/// so it is only usable while those stay finite.
pub fn gkcs_from_nonlinearity(
    label: GkLabel,
    spec: &DeformationSpec,
    n_trunc: usize,
) -> Result<FieldState> {
    let mut v = Vec::with_capacity(n_trunc);
    let mut zn = Complex64::new(1.0, 0.0);
    let mut denom = Complex64::new(1.0, 0.0);
    for n in 0..n_trunc {
        if n > 0 {
            zn *= label.z;
            denom *= gk_nonlinearity(label.alpha, n, spec)? * (n as f64).sqrt();
        }
        v.push(zn / denom);
    }
    FieldState::normalize(v)
}

/// `f_GK(α, n) = sqrt(e_n / n) e^{iα (e_n − e_{n−1})}`.
pub fn gk_nonlinearity(alpha: f64, n: usize, spec: &DeformationSpec) -> Result<Complex64> {
    let f = spec.f_of_n(n)?;
    let gap = spec.energy(n)? - spec.energy(n - 1)?;
    Ok(Complex64::from_polar(f, alpha * gap))
}

/// `⟨ψ|H|ψ⟩` for `H = diag(e_n)` in `|z, α⟩` at the default truncation.
/// Equals `|z|²` (action identity).
pub fn action_identity_check(label: GkLabel, spec: &DeformationSpec) -> Result<f64> {
    let n_trunc = default_truncation(label.z, spec)?;
    let s = gkcs(label, spec, n_trunc)?;
    Ok(energy_expectation(&s, spec))
}

pub fn energy_expectation(s: &FieldState, spec: &DeformationSpec) -> f64 {
    s.amplitudes()
        .iter()
        .zip(spec.energies())
        .map(|(c, e)| e * c.norm_sqr())
        .sum()
}

/// Free evolution under `H = A†A`: `ψ_n → e^{−i e_n t} ψ_n`.
pub fn evolve_free(s: &FieldState, spec: &DeformationSpec, t: f64) -> Result<FieldState> {
    let amps = s.amplitudes();
    if amps.len() > spec.capacity() {
        return Err(Error::OutOfCache {
            n: amps.len() - 1,
            capacity: spec.capacity(),
        });
    }
    let v = amps
        .iter()
        .zip(spec.energies())
        .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t))
        .collect();
    FieldState::normalize(v)
}

/// `‖P (A ψ − z ψ)‖` where `P` projects onto levels `0..N−1` on which the
/// truncated `A` is exact. The top level is excluded: `(Aψ)_{N−1}` would need
/// `ψ_N`, which lies outside the truncation. See [`eigen_boundary_term`].
pub fn eigen_residual(s: &FieldState, z: Complex64, spec: &DeformationSpec) -> Result<f64> {
    let lowered = deformed_lower(spec, s)?;
    let n = s.n_trunc();
    Ok(lowered[..n - 1]
        .iter()
        .zip(&s.amplitudes()[..n - 1])
        .map(|(a, b)| (a - z * b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `|z ψ_{N−1}|`: the part of the full residual produced purely by
/// truncating the basis.
pub fn eigen_boundary_term(s: &FieldState, z: Complex64) -> f64 {
    (z * s.amplitudes()[s.n_trunc() - 1]).norm()
}
