//! Truncated Fock space: field and joint atom-field amplitude vectors.

use num_complex::Complex64;

use crate::deformation::DeformationSpec;
use crate::error::{Error, Result};

/// Default normalized tail mass allowed beyond the truncation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Hard cap on the truncation searched by [`choose_truncation`].
pub const MAX_TRUNCATION: usize = 2048;

/// Below this norm a vector is treated as zero.
const ZERO_NORM: f64 = 1e-300;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Normalized single-mode field amplitudes `ψ_n`, `n = 0..n_trunc`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    amplitudes: Vec<Complex64>,
    tail_mass: f64,
}

impl FieldState {
    /// Rescales `v` to unit norm.
    pub fn normalize(v: Vec<Complex64>) -> Result<Self> {
        let norm = norm(&v);
        if norm.is_nan() || norm < ZERO_NORM || v.is_empty() {
            return Err(Error::ZeroVector { norm });
        }
        let amplitudes: Vec<Complex64> = v.into_iter().map(|c| c / norm).collect();
        let tail_mass = amplitudes.last().map_or(0.0, |c| c.norm_sqr());
        Ok(Self {
            amplitudes,
            tail_mass,
        })
    }

    /// Fock state `|n⟩` inside a space of dimension `n_trunc`.
    pub fn fock(n: usize, n_trunc: usize) -> Result<Self> {
        if n >= n_trunc {
            return Err(Error::InvalidParams(format!(
                "Fock level {n} outside truncation {n_trunc}"
            )));
        }
        let mut v = vec![ZERO; n_trunc];
        v[n] = Complex64::new(1.0, 0.0);
        Self::normalize(v)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_trunc(&self) -> usize {
        self.amplitudes.len()
    }

    /// `|ψ_{N-1}|²` recorded at construction; small values witness an
    /// adequate truncation.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FieldState) -> Result<Complex64> {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// Photon-number distribution `|ψ_n|²`.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Zero-pads to a larger truncation.
    pub fn padded(&self, n_trunc: usize) -> Result<FieldState> {
        if n_trunc < self.n_trunc() {
            return Err(Error::DimensionMismatch {
                left: self.n_trunc(),
                right: n_trunc,
            });
        }
        let mut v = self.amplitudes.clone();
        v.resize(n_trunc, ZERO);
        FieldState::normalize(v)
    }
}

/// `|⟨a|b⟩|²`, clamped to `[0, 1]`.
pub fn fidelity(a: &FieldState, b: &FieldState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// `Σ n |ψ_n|²`.
pub fn mean_excitation(a: &FieldState) -> f64 {
    a.amplitudes
        .iter()
        .enumerate()
        .map(|(n, c)| n as f64 * c.norm_sqr())
        .sum()
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Result<Complex64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x.conj() * y).sum())
}

/// Smallest `N` such that the normalized weight of
/// `Σ_n |z|^{2n} / [e_n]!` carried by levels `n ≥ N` is below `tail_tol`.
///
/// Because the spectrum is strictly increasing, the term ratios
/// `|z|² / e_{n+1}` decrease monotonically, so once a ratio `r < 1` is reached
/// the remaining tail is bounded by a geometric series. If the ratios never
/// fall below one inside the available levels the series is reported as
/// divergent.
pub fn choose_truncation(z: Complex64, spec: &DeformationSpec, tail_tol: f64) -> Result<usize> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::InvalidParams(format!(
            "tail_tol must lie in (0, 1), got {tail_tol}"
        )));
    }
    let r2 = z.norm_sqr();
    if !r2.is_finite() {
        return Err(Error::InvalidParams(format!("non-finite z = {z}")));
    }
    if r2 == 0.0 {
        return Ok(1);
    }
    let ln_r2 = r2.ln();
    let available = spec.capacity().min(MAX_TRUNCATION);

    // log-weights ln w_n = n ln|z|² - ln [e_n]!
    let mut ln_w: Vec<f64> = Vec::new();
    let mut ln_max = f64::NEG_INFINITY;
    let mut remainder = None;
    for n in 0..available {
        let lw = n as f64 * ln_r2 - spec.ln_e_factorial(n)?;
        ln_w.push(lw);
        ln_max = ln_max.max(lw);
        if n + 1 >= available {
            break;
        }
        let ratio = r2 / spec.energy(n + 1)?;
        if ratio < 1.0 {
            // Σ_{k>n} w_k ≤ w_n r / (1 - r)
            let ln_bound = lw + ratio.ln() - (-ratio).ln_1p();
            if ln_bound - ln_max < tail_tol.ln() + (1e-6f64).ln() {
                remainder = Some((ln_bound - ln_max).exp());
                break;
            }
        }
    }

    let Some(remainder) = remainder else {
        let n = ln_w.len() - 1;
        let ratio = if n + 1 < spec.capacity() {
            r2 / spec.energy(n + 1)?
        } else {
            r2 / spec.energy(n)?
        };
        return if ratio >= 1.0 || available == MAX_TRUNCATION {
            Err(Error::DivergentSeries {
                z_abs: z.norm(),
                n,
                ratio,
            })
        } else {
            Err(Error::SpectrumExhausted {
                available: spec.capacity(),
            })
        };
    };

    let weights: Vec<f64> = ln_w.iter().map(|lw| (lw - ln_max).exp()).collect();
    // suffix sums from the top keep full relative precision in the tail
    let mut suffix = vec![0.0; weights.len() + 1];
    suffix[weights.len()] = remainder;
    for n in (0..weights.len()).rev() {
        suffix[n] = suffix[n + 1] + weights[n];
    }
    let total = suffix[0];
    let n_trunc = (1..=weights.len())
        .find(|&n| suffix[n] / total < tail_tol)
        .unwrap_or(weights.len());
    Ok(n_trunc)
}

/// Internal atomic levels, in the fixed basis order `(g, e, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// Lower level `|g⟩`.
    G,
    /// Lower level `|e⟩`.
    E,
    /// Upper level `|i⟩`.
    I,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::E, Level::I];

    pub fn index(self) -> usize {
        match self {
            Level::G => 0,
            Level::E => 1,
            Level::I => 2,
        }
    }
}

/// Joint amplitudes `C_{level,n}` over `{g, e, i} ⊗ {|0⟩..|N-1⟩}`.
///
/// Stored n-major: index `3 n + level`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFieldState {
    n_trunc: usize,
    amplitudes: Vec<Complex64>,
}

impl AtomFieldState {
    /// Wraps raw amplitudes without rescaling.
    pub fn from_amplitudes(n_trunc: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 3 * n_trunc {
            return Err(Error::DimensionMismatch {
                left: amplitudes.len(),
                right: 3 * n_trunc,
            });
        }
        Ok(Self {
            n_trunc,
            amplitudes,
        })
    }

    pub fn normalize(n_trunc: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::from_amplitudes(n_trunc, amplitudes)?;
        let norm = state.norm();
        if norm.is_nan() || norm < ZERO_NORM {
            return Err(Error::ZeroVector { norm });
        }
        Ok(Self {
            n_trunc,
            amplitudes: state.amplitudes.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// `(c_g |g⟩ + c_e |e⟩) ⊗ |field⟩`, normalized.
    pub fn product(c_g: Complex64, c_e: Complex64, field: &FieldState) -> Result<Self> {
        let n_trunc = field.n_trunc();
        let mut v = vec![ZERO; 3 * n_trunc];
        for (n, q) in field.amplitudes().iter().enumerate() {
            v[3 * n] = c_g * q;
            v[3 * n + 1] = c_e * q;
        }
        Self::normalize(n_trunc, v)
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn index(level: Level, n: usize) -> usize {
        3 * n + level.index()
    }

    pub fn amplitude(&self, level: Level, n: usize) -> Complex64 {
        self.amplitudes[Self::index(level, n)]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn level_population(&self, level: Level) -> f64 {
        (0..self.n_trunc)
            .map(|n| self.amplitude(level, n).norm_sqr())
            .sum()
    }

    /// Unnormalized field amplitudes conditioned on `level`.
    pub fn conditional_field(&self, level: Level) -> Vec<Complex64> {
        (0..self.n_trunc)
            .map(|n| self.amplitude(level, n))
            .collect()
    }

    /// Projective measurement of the atom in `level`: returns the outcome
    /// probability and the collapsed, renormalized field.
    pub fn project(&self, level: Level) -> Result<(f64, FieldState)> {
        let v = self.conditional_field(level);
        let p = v.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.norm().powi(2);
        Ok((p, FieldState::normalize(v)?))
    }

    pub fn inner(&self, other: &AtomFieldState) -> Result<Complex64> {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)`; exactly 1 for identical states.
    pub fn fidelity(&self, other: &AtomFieldState) -> Result<f64> {
        let overlap = self.inner(other)?.norm_sqr();
        let na = self.inner(self)?.re;
        let nb = other.inner(other)?.re;
        Ok((overlap / (na * nb)).min(1.0))
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &AtomFieldState) -> Result<f64> {
        if self.n_trunc != other.n_trunc {
            return Err(Error::DimensionMismatch {
                left: self.n_trunc,
                right: other.n_trunc,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Population of the excitation sector `{|g,n⟩, |i,n−1⟩, |e,n⟩}`.
    pub fn sector_population(&self, n: usize) -> f64 {
        let mut p = self.amplitude(Level::G, n).norm_sqr() + self.amplitude(Level::E, n).norm_sqr();
        if n >= 1 {
            p += self.amplitude(Level::I, n - 1).norm_sqr();
        }
        p
    }
}
