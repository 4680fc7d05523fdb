//! Closed-form dynamics of the three-level and effective two-level Raman
//! systems, a stepwise numerical propagator to check them against, and the
//! large-detuning equivalence experiment.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::deformation::DeformationSpec;
use crate::error::{Error, Result};
use crate::fockspace::{mean_excitation, AtomFieldState, FieldState, Level};
use crate::hamiltonian::{JointOperator, RamanParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Closed-form sector coefficients at time `t`.
///
/// `a*`/`b*` map `(C_g(0), C_e(0))` of sector `n` under the interaction-picture
/// Hamiltonian; `d*` do the same under the modified effective Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCoeffs {
    pub lambda_n: f64,
    pub a1: Complex64,
    pub a2: Complex64,
    pub a3: Complex64,
    pub b1: Complex64,
    pub b2: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: Complex64,
}

impl ClosedFormCoeffs {
    /// Coefficients for the sector whose field energy is `e_n = n f²(n)`.
    pub fn new(params: &RamanParams, e_n: f64, t: f64) -> Self {
        let (g1, g2, delta) = (params.g1(), params.g2(), params.delta());
        let g = params.big_g();
        let lambda_n = params.rabi(e_n);
        let (sin, cos) = (lambda_n * t).sin_cos();
        let outer = Complex64::from_polar(1.0, -0.5 * delta * t);
        let inner = Complex64::from_polar(1.0, 0.5 * delta * t);
        let bright = Complex64::new(cos, 0.5 * delta * sin / lambda_n);
        let a = |dark: f64, lit: f64| outer * (inner * (dark / g) + bright * (lit / g));

        let k = e_n.sqrt();
        let b = |gk: f64| inner * (-I * (gk * k / lambda_n * sin));

        let phase = Complex64::from_polar(1.0, e_n * g * t / delta);
        let d = |dark: f64, lit: f64| Complex64::new(dark / g, 0.0) + phase * (lit / g);

        Self {
            lambda_n,
            a1: a(g2 * g2, g1 * g1),
            a2: a(-g1 * g2, g1 * g2),
            a3: a(g1 * g1, g2 * g2),
            b1: b(g1),
            b2: b(g2),
            d1: d(g2 * g2, g1 * g1),
            d2: d(-g1 * g2, g1 * g2),
            d3: d(g1 * g1, g2 * g2),
        }
    }

    /// Images of `|g,n⟩` and `|e,n⟩` in the `(g,n), (i,n−1), (e,n)` basis.
    /// They are orthonormal columns of the unitary sector map.
    pub fn interaction_columns(&self) -> [[Complex64; 3]; 2] {
        [[self.a1, self.b1, self.a2], [self.a2, self.b2, self.a3]]
    }

    pub fn effective_matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.d1, self.d2], [self.d2, self.d3]]
    }
}

fn check_no_upper_level(state: &AtomFieldState) -> Result<()> {
    let norm = state.level_population(Level::I).sqrt();
    if norm != 0.0 {
        return Err(Error::InitialExcitedLevel { norm });
    }
    Ok(())
}

fn sector_energies(spec: &DeformationSpec, n_trunc: usize) -> Result<&[f64]> {
    if n_trunc > spec.capacity() {
        return Err(Error::OutOfCache {
            n: n_trunc - 1,
            capacity: spec.capacity(),
        });
    }
    Ok(&spec.energies()[..n_trunc])
}

/// Exact evolution `|Φ(0)⟩ → |Φ_I(t)⟩` under the intensity-dependent
/// interaction-picture Hamiltonian, sector by sector.
///
/// The initial state must not populate `|i⟩`. The `n = 0` sector is left
/// untouched (it is annihilated by `A`).
pub fn closed_form_interaction(
    initial: &AtomFieldState,
    params: &RamanParams,
    spec: &DeformationSpec,
    t: f64,
) -> Result<AtomFieldState> {
    check_no_upper_level(initial)?;
    if t == 0.0 {
        return Ok(initial.clone());
    }
    let n_trunc = initial.n_trunc();
    let energies = sector_energies(spec, n_trunc)?;
    let mut out = initial.amplitudes().to_vec();
    for (n, &e_n) in energies.iter().enumerate() {
        if e_n == 0.0 {
            continue;
        }
        let cg = initial.amplitude(Level::G, n);
        let ce = initial.amplitude(Level::E, n);
        let k = ClosedFormCoeffs::new(params, e_n, t);
        out[AtomFieldState::index(Level::G, n)] = k.a1 * cg + k.a2 * ce;
        out[AtomFieldState::index(Level::I, n - 1)] = k.b1 * cg + k.b2 * ce;
        out[AtomFieldState::index(Level::E, n)] = k.a2 * cg + k.a3 * ce;
    }
    AtomFieldState::from_amplitudes(n_trunc, out)
}

/// Exact evolution under the modified effective Hamiltonian `H_e + H_s`.
pub fn closed_form_effective(
    initial: &AtomFieldState,
    params: &RamanParams,
    spec: &DeformationSpec,
    t: f64,
) -> Result<AtomFieldState> {
    check_no_upper_level(initial)?;
    if t == 0.0 {
        return Ok(initial.clone());
    }
    let n_trunc = initial.n_trunc();
    let energies = sector_energies(spec, n_trunc)?;
    let mut out = initial.amplitudes().to_vec();
    for (n, &e_n) in energies.iter().enumerate() {
        if e_n == 0.0 {
            continue;
        }
        let cg = initial.amplitude(Level::G, n);
        let ce = initial.amplitude(Level::E, n);
        let k = ClosedFormCoeffs::new(params, e_n, t);
        out[AtomFieldState::index(Level::G, n)] = k.d1 * cg + k.d2 * ce;
        out[AtomFieldState::index(Level::E, n)] = k.d2 * cg + k.d3 * ce;
    }
    AtomFieldState::from_amplitudes(n_trunc, out)
}

/// Connected components of the nonzero pattern of a square matrix.
fn blocks(h: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let dim = h.nrows();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for r in 0..dim {
        for c in (r + 1)..dim {
            if h[(r, c)] != ZERO || h[(c, r)] != ZERO {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; dim];
    for x in 0..dim {
        let root = find(&mut parent, x);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(x);
    }
    groups
}

/// `ψ ← exp(−i H dt) ψ` for Hermitian `H`, exponentiating each decoupled
/// block through its eigendecomposition.
fn apply_exponential(h: &DMatrix<Complex64>, dt: f64, psi: &mut [Complex64]) {
    for block in blocks(h) {
        if block.len() == 1 {
            let x = block[0];
            let e = h[(x, x)].re;
            if e != 0.0 {
                psi[x] *= Complex64::from_polar(1.0, -e * dt);
            }
            continue;
        }
        let m = block.len();
        let sub = DMatrix::from_fn(m, m, |r, c| h[(block[r], block[c])]);
        let eig = SymmetricEigen::new(sub);
        let v = &eig.eigenvectors;
        // coefficients in the eigenbasis, rotated by the eigenphases
        let coeffs: Vec<Complex64> = (0..m)
            .map(|k| {
                let overlap: Complex64 = (0..m).map(|r| v[(r, k)].conj() * psi[block[r]]).sum();
                overlap * Complex64::from_polar(1.0, -eig.eigenvalues[k] * dt)
            })
            .collect();
        for (r, &x) in block.iter().enumerate() {
            psi[x] = (0..m).map(|k| v[(r, k)] * coeffs[k]).sum();
        }
    }
}

fn embedded(op: &JointOperator, n_trunc: usize) -> Result<JointOperator> {
    let op = op.to_three_level()?;
    if op.n_trunc() != n_trunc {
        return Err(Error::DimensionMismatch {
            left: op.n_trunc(),
            right: n_trunc,
        });
    }
    Ok(op)
}

/// Exact `exp(−i H t)|Φ⟩` for a time-independent operator. Two-level
/// operators act as zero on `|i⟩`.
pub fn propagate_exact(
    op: &JointOperator,
    initial: &AtomFieldState,
    t: f64,
) -> Result<AtomFieldState> {
    let op = embedded(op, initial.n_trunc())?;
    let mut psi = initial.amplitudes().to_vec();
    apply_exponential(op.matrix(), t, &mut psi);
    AtomFieldState::from_amplitudes(initial.n_trunc(), psi)
}

/// Piecewise-constant midpoint propagator for `i ∂_t |Φ⟩ = H(t) |Φ⟩`:
/// each step of length `h = t/steps` applies `exp(−i H(t_mid) h)` exactly.
pub fn oracle_evolve<F>(
    hamiltonian: F,
    initial: &AtomFieldState,
    t: f64,
    steps: usize,
) -> Result<AtomFieldState>
where
    F: Fn(f64) -> Result<JointOperator>,
{
    if steps == 0 {
        return Err(Error::InvalidParams("steps must be at least 1".into()));
    }
    let n_trunc = initial.n_trunc();
    let h = t / steps as f64;
    let mut psi = initial.amplitudes().to_vec();
    for k in 0..steps {
        let mid = (k as f64 + 0.5) * h;
        let op = embedded(&hamiltonian(mid)?, n_trunc)?;
        apply_exponential(op.matrix(), h, &mut psi);
    }
    AtomFieldState::from_amplitudes(n_trunc, psi)
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub state: AtomFieldState,
    pub steps: usize,
    /// Estimated distance of `state` from the exact solution, from the
    /// change under the last step doubling (second-order scheme: `diff/3`).
    pub error_estimate: f64,
}

/// Runs [`oracle_evolve`] with `steps`, `2·steps`, ... until the error
/// estimate of the finest run is below `tol` or `max_steps` is reached.
pub fn oracle_evolve_converged<F>(
    hamiltonian: F,
    initial: &AtomFieldState,
    t: f64,
    steps: usize,
    tol: f64,
    max_steps: usize,
) -> Result<OracleRun>
where
    F: Fn(f64) -> Result<JointOperator>,
{
    let mut steps = steps.max(1);
    let mut coarse = oracle_evolve(&hamiltonian, initial, t, steps)?;
    loop {
        let fine_steps = steps * 2;
        let fine = oracle_evolve(&hamiltonian, initial, t, fine_steps)?;
        let error_estimate = fine.distance(&coarse)? / 3.0;
        if error_estimate < tol || fine_steps * 2 > max_steps {
            return Ok(OracleRun {
                state: fine,
                steps: fine_steps,
                error_estimate,
            });
        }
        steps = fine_steps;
        coarse = fine;
    }
}

/// Default step count `ceil(40 |Δ| t / 2π)`, resolving the `e^{±iΔt}`
/// phases with ~40 samples per period.
pub fn default_oracle_steps(delta: f64, t: f64) -> usize {
    ((40.0 * delta.abs() * t.abs() / std::f64::consts::TAU).ceil() as usize).max(1)
}

/// Unit in which equivalence-experiment times are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    Absolute,
    /// Multiples of `1/λ` at each grid detuning.
    InverseLambda,
}

/// Fraction of `Δ²/G` that `4 n̄ f²(n̄)` may reach before a grid point is
/// flagged as outside the large-detuning regime.
pub const DETUNING_VALIDITY_FRACTION: f64 = 0.1;

/// Fraction of `π` that `(n̄ f²(n̄))² G² t / Δ³` may reach.
pub const TIME_VALIDITY_FRACTION: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct EquivalenceSetup {
    pub g1: f64,
    pub g2: f64,
    pub deltas: Vec<f64>,
    pub times: Vec<f64>,
    pub time_unit: TimeUnit,
    /// Initial atomic amplitudes `(C_g(0), C_e(0))`.
    pub atom: (Complex64, Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceRow {
    pub delta: f64,
    pub t: f64,
    /// `1 − |⟨Φ_I(t)|Φ_eff(t)⟩|²`.
    pub infidelity: f64,
    /// Largest `|i⟩` population over this detuning's grid times `≤ t`.
    pub max_i_population: f64,
    pub validity_violated: bool,
}

/// `(4 e(n̄) ≥ fraction·Δ²/G) || (e(n̄)² G² t / |Δ|³ ≥ fraction·π)`.
pub fn validity_violated(
    params: &RamanParams,
    spec: &DeformationSpec,
    mean_n: f64,
    t: f64,
) -> bool {
    let en = spec.energy_at(mean_n);
    let g = params.big_g();
    let d = params.delta().abs();
    let detuning = 4.0 * en >= DETUNING_VALIDITY_FRACTION * d * d / g;
    let duration =
        en * en * g * g * t.abs() / (d * d * d) >= TIME_VALIDITY_FRACTION * std::f64::consts::PI;
    detuning || duration
}

/// Compares the two closed-form evolutions of `atom ⊗ field` over a grid of
/// detunings and times. Rows are ordered by detuning, then time, as given.
pub fn equivalence_experiment(
    setup: &EquivalenceSetup,
    spec: &DeformationSpec,
    field: &FieldState,
) -> Result<Vec<EquivalenceRow>> {
    let initial = AtomFieldState::product(setup.atom.0, setup.atom.1, field)?;
    let mean_n = mean_excitation(field);
    let mut rows = Vec::with_capacity(setup.deltas.len() * setup.times.len());
    for &delta in &setup.deltas {
        let params = RamanParams::new(setup.g1, setup.g2, delta)?;
        let mut points = Vec::with_capacity(setup.times.len());
        for &time in &setup.times {
            let t = match setup.time_unit {
                TimeUnit::Absolute => time,
                TimeUnit::InverseLambda => time / params.lambda(),
            };
            let phi_i = closed_form_interaction(&initial, &params, spec, t)?;
            let phi_eff = closed_form_effective(&initial, &params, spec, t)?;
            let infidelity = 1.0 - phi_i.fidelity(&phi_eff)?;
            points.push((t, infidelity, phi_i.level_population(Level::I)));
        }
        for &(t, infidelity, _) in &points {
            let max_i_population = points
                .iter()
                .filter(|p| p.0 <= t)
                .fold(0.0f64, |acc, p| acc.max(p.2));
            rows.push(EquivalenceRow {
                delta,
                t,
                infidelity,
                max_i_population,
                validity_violated: validity_violated(&params, spec, mean_n, t),
            });
        }
    }
    Ok(rows)
}

/// `true` when `values` never rises by more than `jitter` (relative) from one
/// entry to the next.
pub fn is_monotone_decreasing(values: &[f64], jitter: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + jitter))
}
