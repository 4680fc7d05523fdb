//! Solvable-system spectra and the deformed factorials built from them.
//!
//! A spectrum `0 = e_0 < e_1 < e_2 < ...` fixes the nonlinearity function
//! `f(n) = sqrt(e_n / n)` through `H = A†A = n f²(n)`. Every state expansion
//! in this crate is weighted by `[f(n)]! = f(1)...f(n)` or, equivalently, by
//! `[e_n]! = e_1...e_n = n! ([f(n)]!)²`.
//!
//! Direct products overflow quickly for growing spectra, so each spec keeps
//! both the plain products (which may saturate to `inf`) and their logarithms.
//! State constructors only ever read the log-domain cache.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::FieldState;

/// Number of levels cached for the closed-form spectra.
pub const DEFAULT_CAPACITY: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    /// `e_n = n`, i.e. `f ≡ 1`.
    Harmonic,
    /// `e_n = n²`.
    Squared,
    /// `e_n = n (n + 2κ)`.
    PoschlTeller { kappa: f64 },
    /// Explicit `e_0, e_1, ...`.
    Table(Vec<f64>),
}

impl Spectrum {
    /// Energy of level `n`, or `None` past the end of a table.
    pub fn energy(&self, n: usize) -> Option<f64> {
        let x = n as f64;
        match self {
            Spectrum::Harmonic => Some(x),
            Spectrum::Squared => Some(x * x),
            Spectrum::PoschlTeller { kappa } => Some(x * (x + 2.0 * kappa)),
            Spectrum::Table(values) => values.get(n).copied(),
        }
    }

    /// Continuation of the spectrum to a real level index.
    ///
    /// Closed-form spectra are evaluated directly; tables are linearly
    /// interpolated and clamped to their last entry.
    pub fn energy_at(&self, x: f64) -> f64 {
        match self {
            Spectrum::Harmonic => x,
            Spectrum::Squared => x * x,
            Spectrum::PoschlTeller { kappa } => x * (x + 2.0 * kappa),
            Spectrum::Table(values) => {
                let last = values.len() - 1;
                if x <= 0.0 {
                    return values[0];
                }
                let lo = x.floor() as usize;
                if lo >= last {
                    return values[last];
                }
                let frac = x - lo as f64;
                values[lo] + frac * (values[lo + 1] - values[lo])
            }
        }
    }

    fn default_name(&self) -> String {
        match self {
            Spectrum::Harmonic => "harmonic".into(),
            Spectrum::Squared => "squared".into(),
            Spectrum::PoschlTeller { kappa } => format!("poschl_teller(kappa={kappa})"),
            Spectrum::Table(values) => format!("table({} levels)", values.len()),
        }
    }
}

/// A validated spectrum together with its eagerly built factorial caches.
#[derive(Debug, Clone)]
pub struct DeformationSpec {
    name: String,
    spectrum: Spectrum,
    energies: Vec<f64>,
    f: Vec<f64>,
    e_factorial: Vec<f64>,
    f_factorial: Vec<f64>,
    ln_e_factorial: Vec<f64>,
    ln_f_factorial: Vec<f64>,
    ln_factorial: Vec<f64>,
}

impl DeformationSpec {
    pub fn harmonic() -> Self {
        Self::new(Spectrum::Harmonic).expect("harmonic spectrum is physical")
    }

    pub fn squared() -> Self {
        Self::new(Spectrum::Squared).expect("squared spectrum is physical")
    }

    pub fn poschl_teller(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::InvalidParams(format!(
                "kappa must be finite, got {kappa}"
            )));
        }
        Self::new(Spectrum::PoschlTeller { kappa })
    }

    pub fn from_table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TableFormat("table is empty".into()));
        }
        Self::new(Spectrum::Table(values))
    }

    /// Parses the plain-text table format: one real `e_n` per line starting
    /// at `n = 0`. Blank lines are ignored.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| {
                Error::TableFormat(format!(
                    "line {}: cannot parse {line:?} as a real",
                    lineno + 1
                ))
            })?;
            values.push(v);
        }
        Self::from_table(values)
    }

    pub fn from_table_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::TableFormat(format!("{}: {e}", path.display())))?;
        Self::parse_table(&text)
    }

    /// Looks a spectrum up in the built-in registry.
    pub fn by_name(name: &str, kappa: Option<f64>) -> Result<Self> {
        match name {
            "harmonic" => Ok(Self::harmonic()),
            "squared" => Ok(Self::squared()),
            "poschl_teller" => Self::poschl_teller(kappa.unwrap_or(1.0)),
            other => Err(Error::InvalidParams(format!(
                "unknown spectrum {other:?} (expected harmonic, squared or poschl_teller)"
            ))),
        }
    }

    /// Every registry spectrum, as exercised by the verification suites.
    pub fn registry() -> Vec<Self> {
        vec![
            Self::harmonic(),
            Self::squared(),
            Self::poschl_teller(1.0).expect("kappa = 1 is physical"),
        ]
    }

    pub fn new(spectrum: Spectrum) -> Result<Self> {
        let capacity = match &spectrum {
            Spectrum::Table(values) => values.len(),
            _ => DEFAULT_CAPACITY,
        };
        Self::with_capacity(spectrum, capacity)
    }

    /// Builds the caches for levels `0..capacity`, validating the spectrum on
    /// the way.
    pub fn with_capacity(spectrum: Spectrum, capacity: usize) -> Result<Self> {
        let name = spectrum.default_name();
        let mut energies = Vec::with_capacity(capacity);
        for n in 0..capacity {
            match spectrum.energy(n) {
                Some(e) => energies.push(e),
                None => break,
            }
        }
        if energies.is_empty() {
            return Err(Error::TableFormat("spectrum has no levels".into()));
        }
        validate(&energies)?;

        let len = energies.len();
        let mut f = vec![1.0; len];
        let mut e_factorial = vec![1.0; len];
        let mut f_factorial = vec![1.0; len];
        let mut ln_e_factorial = vec![0.0; len];
        let mut ln_f_factorial = vec![0.0; len];
        let mut ln_factorial = vec![0.0; len];
        for n in 1..len {
            let e = energies[n];
            let x = n as f64;
            f[n] = (e / x).sqrt();
            e_factorial[n] = e_factorial[n - 1] * e;
            f_factorial[n] = f_factorial[n - 1] * f[n];
            ln_e_factorial[n] = ln_e_factorial[n - 1] + e.ln();
            ln_factorial[n] = ln_factorial[n - 1] + x.ln();
            ln_f_factorial[n] = ln_f_factorial[n - 1] + 0.5 * (e.ln() - x.ln());
        }

        Ok(Self {
            name,
            spectrum,
            energies,
            f,
            e_factorial,
            f_factorial,
            ln_e_factorial,
            ln_f_factorial,
            ln_factorial,
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Number of cached levels.
    pub fn capacity(&self) -> usize {
        self.energies.len()
    }

    fn check(&self, n: usize) -> Result<()> {
        if n >= self.capacity() {
            Err(Error::OutOfCache {
                n,
                capacity: self.capacity(),
            })
        } else {
            Ok(())
        }
    }

    pub fn energy(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.energies[n])
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `e(x)` for a real level index, used for `n̄ f²(n̄)` with non-integer `n̄`.
    pub fn energy_at(&self, x: f64) -> f64 {
        self.spectrum.energy_at(x)
    }

    /// `f(n) = sqrt(e_n / n)` for `n ≥ 1`.
    pub fn f_of_n(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParams("f(n) is defined for n >= 1".into()));
        }
        self.check(n)?;
        Ok(self.f[n])
    }

    /// `[f(n)]! = f(1) f(2) ... f(n)`, with `[f(0)]! = 1`. May be `inf` for
    /// large `n`; see [`Self::ln_f_factorial`].
    pub fn f_factorial(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.f_factorial[n])
    }

    /// `[e_n]! = e_1 e_2 ... e_n`, with `[e_0]! = 1`.
    pub fn e_factorial(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.e_factorial[n])
    }

    pub fn ln_f_factorial(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.ln_f_factorial[n])
    }

    pub fn ln_e_factorial(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.ln_e_factorial[n])
    }

    /// `ln n!`.
    pub fn ln_factorial(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.ln_factorial[n])
    }

    /// `true` when `f ≡ 1` on the cached range.
    pub fn is_linear(&self) -> bool {
        self.energies
            .iter()
            .enumerate()
            .all(|(n, &e)| e == n as f64)
    }
}

impl fmt::Display for DeformationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn validate(energies: &[f64]) -> Result<()> {
    if energies[0] != 0.0 {
        return Err(Error::NonPhysicalSpectrum {
            n: 0,
            energy: energies[0],
            reason: "ground energy e_0 must be exactly 0",
        });
    }
    for n in 1..energies.len() {
        let e = energies[n];
        if !e.is_finite() || e <= 0.0 {
            return Err(Error::NonPhysicalSpectrum {
                n,
                energy: e,
                reason: "e_n must be finite and positive for n >= 1",
            });
        }
        if e <= energies[n - 1] {
            return Err(Error::NonPhysicalSpectrum {
                n,
                energy: e,
                reason: "spectrum must be strictly increasing",
            });
        }
    }
    Ok(())
}

/// Applies `A = a f(n)`: `(A ψ)_n = sqrt(n+1) f(n+1) ψ_{n+1} = sqrt(e_{n+1}) ψ_{n+1}`.
///
/// The top component has no partner inside the truncation and is set to 0.
pub fn deformed_lower(spec: &DeformationSpec, s: &FieldState) -> Result<Vec<Complex64>> {
    let amps = s.amplitudes();
    let n_trunc = amps.len();
    spec.check(n_trunc.saturating_sub(1))?;
    let mut out = vec![Complex64::new(0.0, 0.0); n_trunc];
    for n in 0..n_trunc.saturating_sub(1) {
        out[n] = amps[n + 1] * spec.energies[n + 1].sqrt();
    }
    Ok(out)
}
