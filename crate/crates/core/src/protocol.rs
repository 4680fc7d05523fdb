//! Sequential atom injection with postselection on `|e⟩`.
//!
//! The cavity starts in a nonlinear coherent state `|z, f⟩`. Atom `m` enters
//! in `(|e⟩ + ε_m |g⟩)/sqrt(1 + |ε_m|²)`, interacts for a fixed time `τ`
//! under the symmetric (`g₁ = g₂`) modified effective Hamiltonian and is
//! detected in `|e⟩`. Each detection multiplies the field amplitude `ψ_n` by
//! `(1 + ε_m) x_n + (1 − ε_m)` with `x_n = e^{2iλ e_n τ}`, and `x_n^k ψ_n` is
//! exactly the GKCS `|z, −2kλτ⟩`. After `N` atoms the field is therefore a
//! superposition of `|z, −2kλτ⟩`, `k = 1..N`, and `|z, f⟩`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::deformation::DeformationSpec;
use crate::error::{Error, Result};
use crate::evolution::closed_form_effective;
use crate::fockspace::{fidelity, AtomFieldState, FieldState, Level};
use crate::hamiltonian::RamanParams;
use crate::states::{gkcs, nonlinear_cs, GkLabel};

pub const DEFAULT_DETECTION_FLOOR: f64 = 1e-6;

/// Largest Gram-matrix condition number accepted by
/// [`decompose_superposition`].
pub const MAX_GRAM_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub z: Complex64,
    pub spec: DeformationSpec,
    pub params: RamanParams,
    pub tau: f64,
    pub epsilons: Vec<Complex64>,
    pub n_trunc: usize,
    pub detection_floor: f64,
}

impl ProtocolConfig {
    pub fn new(
        z: Complex64,
        spec: DeformationSpec,
        params: RamanParams,
        tau: f64,
        epsilons: Vec<Complex64>,
        n_trunc: usize,
    ) -> Result<Self> {
        let config = Self {
            z,
            spec,
            params,
            tau,
            epsilons,
            n_trunc,
            detection_floor: DEFAULT_DETECTION_FLOOR,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_detection_floor(mut self, floor: f64) -> Result<Self> {
        self.detection_floor = floor;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !self.params.is_symmetric() {
            return Err(Error::InvalidParams(format!(
                "the injection scheme requires g1 = g2, got {} and {}",
                self.params.g1(),
                self.params.g2()
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(0.0..1.0).contains(&self.detection_floor) {
            return Err(Error::InvalidParams(format!(
                "detection floor must lie in [0, 1), got {}",
                self.detection_floor
            )));
        }
        if self.epsilons.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParams("epsilons must be finite".into()));
        }
        if self.n_trunc == 0 {
            return Err(Error::InvalidParams("n_trunc must be positive".into()));
        }
        Ok(())
    }

    /// `λτ`.
    pub fn lambda_tau(&self) -> f64 {
        self.params.lambda() * self.tau
    }
}

/// Atomic amplitudes `(c_g, c_e)` of `(|e⟩ + ε|g⟩)/sqrt(1 + |ε|²)`.
pub fn atom_amplitudes(epsilon: Complex64) -> (Complex64, Complex64) {
    let norm = (1.0 + epsilon.norm_sqr()).sqrt();
    (epsilon / norm, Complex64::new(1.0 / norm, 0.0))
}

/// GK label reached after `k` detections with `ε = 1`: `α_k = −2kλτ`.
pub fn gk_alpha(k: usize, lambda_tau: f64) -> f64 {
    -2.0 * k as f64 * lambda_tau
}

#[derive(Debug, Clone)]
pub struct Injection {
    /// Probability of detecting the atom in `|e⟩`.
    pub p_e: f64,
    /// Field after the detection, renormalized.
    pub collapsed: FieldState,
}

/// One atom: evolve `atom ⊗ field` for `τ` under the effective Hamiltonian,
/// then project the atom on `|e⟩`.
pub fn inject_atom(
    field: &FieldState,
    epsilon: Complex64,
    params: &RamanParams,
    spec: &DeformationSpec,
    tau: f64,
    detection_floor: f64,
) -> Result<Injection> {
    let (c_g, c_e) = atom_amplitudes(epsilon);
    let joint = AtomFieldState::product(c_g, c_e, field)?;
    let evolved = closed_form_effective(&joint, params, spec, tau)?;
    let p_e: f64 = evolved.level_population(Level::E);
    if p_e.is_nan() || p_e < detection_floor || p_e == 0.0 {
        return Err(Error::DetectionImprobable {
            atom: None,
            probability: p_e,
            floor: detection_floor,
        });
    }
    let collapsed = FieldState::normalize(evolved.conditional_field(Level::E))?;
    Ok(Injection { p_e, collapsed })
}

/// Least-squares coefficients `c` minimizing `‖field − Σ c_k components_k‖`
/// and the minimal residual.
pub fn decompose_superposition(
    field: &FieldState,
    components: &[FieldState],
) -> Result<(Vec<Complex64>, f64)> {
    let rows = field.n_trunc();
    if components.is_empty() {
        return Ok((Vec::new(), field.norm()));
    }
    for comp in components {
        if comp.n_trunc() != rows {
            return Err(Error::DimensionMismatch {
                left: rows,
                right: comp.n_trunc(),
            });
        }
    }
    let basis = DMatrix::from_fn(rows, components.len(), |r, k| components[k].amplitudes()[r]);
    let target = DVector::from_column_slice(field.amplitudes());
    let svd = basis.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 {
        (s_max / s_min).powi(2)
    } else {
        f64::INFINITY
    };
    if condition.is_nan() || condition >= MAX_GRAM_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let coeffs = svd
        .solve(&target, 0.0)
        .map_err(|e| Error::InvalidParams(format!("least squares failed: {e}")))?;
    let residual = (&target - &basis * &coeffs).norm();
    Ok((coeffs.iter().copied().collect(), residual))
}

/// Polynomial weights of `Π_m [(1 + ε_m) x + (1 − ε_m)]`, highest power
/// first: entry `j` multiplies `x^{N−j}`, i.e. the GKCS `|z, α_{N−j}⟩`, with
/// the last entry weighting `|z, f⟩`.
pub fn superposition_weights(epsilons: &[Complex64]) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    // ascending powers during the product
    let mut poly = vec![one];
    for &eps in epsilons {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, &c) in poly.iter().enumerate() {
            next[k] += c * (one - eps);
            next[k + 1] += c * (one + eps);
        }
        poly = next;
    }
    poly.reverse();
    poly
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    /// `|z, α_k⟩` with `α_k = −2kλτ`.
    Gkcs { k: usize, alpha: f64 },
    /// The initial `|z, f⟩`.
    NonlinearCs,
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Component::Gkcs { k, .. } => write!(f, "gkcs_alpha_{k}"),
            Component::NonlinearCs => f.write_str("nonlinear_cs"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub components: Vec<Component>,
    pub coefficients: Vec<Complex64>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct AtomRecord {
    /// 1-based atom index.
    pub m: usize,
    pub epsilon: Complex64,
    pub p_e: f64,
    /// `α_m = −2mλτ`.
    pub alpha: f64,
    pub field: FieldState,
    /// Fidelity of the collapsed field with `|z, α_m⟩`.
    pub fidelity_to_gkcs: f64,
}

#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub initial: FieldState,
    pub atoms: Vec<AtomRecord>,
    pub final_field: FieldState,
    pub decomposition: std::result::Result<Decomposition, Error>,
}

impl ProtocolResult {
    pub fn alphas(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.alpha).collect()
    }
}

/// Components `{|z, α_N⟩, ..., |z, α_1⟩, |z, f⟩}` for `N` atoms.
pub fn superposition_components(
    config: &ProtocolConfig,
    atoms: usize,
) -> Result<(Vec<Component>, Vec<FieldState>)> {
    let mut labels = Vec::with_capacity(atoms + 1);
    let mut states = Vec::with_capacity(atoms + 1);
    for k in (1..=atoms).rev() {
        let alpha = gk_alpha(k, config.lambda_tau());
        labels.push(Component::Gkcs { k, alpha });
        states.push(gkcs(
            GkLabel::new(config.z, alpha),
            &config.spec,
            config.n_trunc,
        )?);
    }
    labels.push(Component::NonlinearCs);
    states.push(nonlinear_cs(config.z, &config.spec, config.n_trunc)?);
    Ok((labels, states))
}

pub fn run_protocol(config: &ProtocolConfig) -> Result<ProtocolResult> {
    config.validate()?;
    let initial = nonlinear_cs(config.z, &config.spec, config.n_trunc)?;
    let mut field = initial.clone();
    let mut atoms = Vec::with_capacity(config.epsilons.len());
    for (i, &epsilon) in config.epsilons.iter().enumerate() {
        let m = i + 1;
        let injection = inject_atom(
            &field,
            epsilon,
            &config.params,
            &config.spec,
            config.tau,
            config.detection_floor,
        )
        .map_err(|e| match e {
            Error::DetectionImprobable {
                probability, floor, ..
            } => Error::DetectionImprobable {
                atom: Some(m),
                probability,
                floor,
            },
            other => other,
        })?;
        let alpha = gk_alpha(m, config.lambda_tau());
        let target = gkcs(GkLabel::new(config.z, alpha), &config.spec, config.n_trunc)?;
        atoms.push(AtomRecord {
            m,
            epsilon,
            p_e: injection.p_e,
            alpha,
            fidelity_to_gkcs: fidelity(&injection.collapsed, &target)?,
            field: injection.collapsed.clone(),
        });
        field = injection.collapsed;
    }

    let (labels, states) = superposition_components(config, atoms.len())?;
    let decomposition =
        decompose_superposition(&field, &states).map(|(coefficients, residual)| Decomposition {
            components: labels,
            coefficients,
            residual,
        });

    Ok(ProtocolResult {
        initial,
        atoms,
        final_field: field,
        decomposition,
    })
}
