//! Hamiltonians of the intensity-dependent degenerate Raman interaction on the
//! truncated joint atom-field space (`ħ = 1`).
//!
//! Basis ordering is n-major with the atomic level fastest: `(g, e, i)` for
//! the three-level space and `(g, e)` for the effective two-level space.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::deformation::DeformationSpec;
use crate::error::{Error, Result};
use crate::fockspace::Level;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Couplings `g₁`, `g₂` of the `|g⟩↔|i⟩` and `|e⟩↔|i⟩` transitions and the
/// detuning `Δ = (ω_i − ω_0) − ω_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanParams {
    g1: f64,
    g2: f64,
    delta: f64,
}

impl RamanParams {
    pub fn new(g1: f64, g2: f64, delta: f64) -> Result<Self> {
        if !(g1.is_finite() && g1 > 0.0 && g2.is_finite() && g2 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "couplings must be positive, got g1 = {g1}, g2 = {g2}"
            )));
        }
        if !delta.is_finite() || delta == 0.0 {
            return Err(Error::InvalidParams(format!(
                "detuning must be finite and nonzero, got {delta}"
            )));
        }
        Ok(Self { g1, g2, delta })
    }

    /// Equal couplings `g₁ = g₂ = g`.
    pub fn symmetric(g: f64, delta: f64) -> Result<Self> {
        Self::new(g, g, delta)
    }

    pub fn g1(&self) -> f64 {
        self.g1
    }

    pub fn g2(&self) -> f64 {
        self.g2
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Effective coupling `λ = g₁g₂/Δ`.
    pub fn lambda(&self) -> f64 {
        self.g1 * self.g2 / self.delta
    }

    /// Stark coefficient of `|g⟩`, `λ₁ = g₁²/Δ`.
    pub fn lambda1(&self) -> f64 {
        self.g1 * self.g1 / self.delta
    }

    /// Stark coefficient of `|e⟩`, `λ₂ = g₂²/Δ`.
    pub fn lambda2(&self) -> f64 {
        self.g2 * self.g2 / self.delta
    }

    /// `G = g₁² + g₂²`.
    pub fn big_g(&self) -> f64 {
        self.g1 * self.g1 + self.g2 * self.g2
    }

    /// Generalized Rabi frequency `Λ_n = sqrt(n f²(n) G + Δ²/4)` for the
    /// level energy `e_n = n f²(n)`.
    pub fn rabi(&self, e_n: f64) -> f64 {
        (e_n * self.big_g() + 0.25 * self.delta * self.delta).sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        self.g1 == self.g2
    }
}

/// Which tensor-product basis a [`JointOperator`] lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `{g, e, i} ⊗ Fock`.
    ThreeLevel,
    /// `{g, e} ⊗ Fock`, the upper level eliminated.
    TwoLevel,
    /// Field only.
    Field,
}

impl Basis {
    pub fn levels(self) -> &'static [Level] {
        match self {
            Basis::ThreeLevel => &[Level::G, Level::E, Level::I],
            Basis::TwoLevel => &[Level::G, Level::E],
            Basis::Field => &[Level::G],
        }
    }

    pub fn index(self, level: Level, n: usize) -> Option<usize> {
        let levels = self.levels();
        let pos = match self {
            Basis::Field => 0,
            _ => levels.iter().position(|&l| l == level)?,
        };
        Some(levels.len() * n + pos)
    }
}

/// Dense Hermitian operator on a truncated joint basis.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOperator {
    basis: Basis,
    n_trunc: usize,
    time_dependent: bool,
    matrix: DMatrix<Complex64>,
}

impl JointOperator {
    pub fn zeros(basis: Basis, n_trunc: usize) -> Self {
        let dim = basis.levels().len() * n_trunc;
        Self {
            basis,
            n_trunc,
            time_dependent: false,
            matrix: DMatrix::from_element(dim, dim, ZERO),
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_time_dependent(&self) -> bool {
        self.time_dependent
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Matrix element `⟨row_level, row_n| H |col_level, col_n⟩`; zero for
    /// states outside the basis.
    pub fn element(&self, row: (Level, usize), col: (Level, usize)) -> Complex64 {
        match (
            self.basis.index(row.0, row.1),
            self.basis.index(col.0, col.1),
        ) {
            (Some(r), Some(c)) if r < self.dim() && c < self.dim() => self.matrix[(r, c)],
            _ => ZERO,
        }
    }

    fn set(&mut self, row: (Level, usize), col: (Level, usize), value: Complex64) {
        let r = self.basis.index(row.0, row.1).expect("level in basis");
        let c = self.basis.index(col.0, col.1).expect("level in basis");
        self.matrix[(r, c)] = value;
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.matrix.adjoint();
        (&self.matrix - adj)
            .iter()
            .fold(0.0, |acc: f64, c| acc.max(c.norm()))
    }

    /// Embeds the operator into the three-level basis, acting as zero on the
    /// `|i⟩` level when it is absent.
    pub fn to_three_level(&self) -> Result<JointOperator> {
        match self.basis {
            Basis::ThreeLevel => Ok(self.clone()),
            Basis::Field => Err(Error::InvalidParams(
                "field-only operator has no atomic embedding".into(),
            )),
            Basis::TwoLevel => {
                let mut out = JointOperator::zeros(Basis::ThreeLevel, self.n_trunc);
                out.time_dependent = self.time_dependent;
                for n in 0..self.n_trunc {
                    for m in 0..self.n_trunc {
                        for &a in &[Level::G, Level::E] {
                            for &b in &[Level::G, Level::E] {
                                out.set((a, n), (b, m), self.element((a, n), (b, m)));
                            }
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// `self + other`.
    pub fn sum(&self, other: &JointOperator) -> Result<JointOperator> {
        if self.basis != other.basis || self.n_trunc != other.n_trunc {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(JointOperator {
            basis: self.basis,
            n_trunc: self.n_trunc,
            time_dependent: self.time_dependent || other.time_dependent,
            matrix: &self.matrix + &other.matrix,
        })
    }
}

fn energies(spec: &DeformationSpec, n_trunc: usize) -> Result<&[f64]> {
    if n_trunc == 0 {
        return Err(Error::InvalidParams("n_trunc must be positive".into()));
    }
    if n_trunc > spec.capacity() {
        return Err(Error::OutOfCache {
            n: n_trunc - 1,
            capacity: spec.capacity(),
        });
    }
    Ok(&spec.energies()[..n_trunc])
}

/// Interaction-picture Hamiltonian at time `t`:
/// `g₁(A†|g⟩⟨i| e^{−iΔt} + A|i⟩⟨g| e^{iΔt}) + g₂(A†|e⟩⟨i| e^{−iΔt} + A|i⟩⟨e| e^{iΔt})`
/// with `A = a f(n)`. Couples `|g,n⟩, |e,n⟩` to `|i,n−1⟩` with amplitude
/// `g_k sqrt(n) f(n) = g_k sqrt(e_n)`.
pub fn build_h_interaction(
    params: &RamanParams,
    spec: &DeformationSpec,
    t: f64,
    n_trunc: usize,
) -> Result<JointOperator> {
    let e = energies(spec, n_trunc)?;
    let mut h = JointOperator::zeros(Basis::ThreeLevel, n_trunc);
    h.time_dependent = true;
    let up = Complex64::from_polar(1.0, params.delta * t);
    for (n, &e_n) in e.iter().enumerate().skip(1) {
        let k = e_n.sqrt();
        for (level, g) in [(Level::G, params.g1), (Level::E, params.g2)] {
            let absorb = up * (g * k);
            h.set((Level::I, n - 1), (level, n), absorb);
            h.set((level, n), (Level::I, n - 1), absorb.conj());
        }
    }
    Ok(h)
}

/// Effective Hamiltonian `−λ A†A (|g⟩⟨e| + |e⟩⟨g|)`.
pub fn build_h_e(
    params: &RamanParams,
    spec: &DeformationSpec,
    n_trunc: usize,
) -> Result<JointOperator> {
    let e = energies(spec, n_trunc)?;
    let mut h = JointOperator::zeros(Basis::TwoLevel, n_trunc);
    for (n, &en) in e.iter().enumerate() {
        let v = Complex64::new(-params.lambda() * en, 0.0);
        h.set((Level::G, n), (Level::E, n), v);
        h.set((Level::E, n), (Level::G, n), v);
    }
    Ok(h)
}

/// Stark-shift Hamiltonian `−A†A (λ₁|g⟩⟨g| + λ₂|e⟩⟨e|)`.
pub fn build_h_s(
    params: &RamanParams,
    spec: &DeformationSpec,
    n_trunc: usize,
) -> Result<JointOperator> {
    let e = energies(spec, n_trunc)?;
    let mut h = JointOperator::zeros(Basis::TwoLevel, n_trunc);
    for (n, &en) in e.iter().enumerate() {
        h.set(
            (Level::G, n),
            (Level::G, n),
            Complex64::new(-params.lambda1() * en, 0.0),
        );
        h.set(
            (Level::E, n),
            (Level::E, n),
            Complex64::new(-params.lambda2() * en, 0.0),
        );
    }
    Ok(h)
}

/// Modified effective Hamiltonian `H_eff = H_e + H_s`.
pub fn build_h_eff(
    params: &RamanParams,
    spec: &DeformationSpec,
    n_trunc: usize,
) -> Result<JointOperator> {
    build_h_e(params, spec, n_trunc)?.sum(&build_h_s(params, spec, n_trunc)?)
}

/// Field Hamiltonian `H = A†A = diag(e_n)`.
pub fn build_field_h(spec: &DeformationSpec, n_trunc: usize) -> Result<JointOperator> {
    let e = energies(spec, n_trunc)?;
    let mut h = JointOperator::zeros(Basis::Field, n_trunc);
    for (n, &en) in e.iter().enumerate() {
        h.matrix[(n, n)] = Complex64::new(en, 0.0);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn registry_and_tables() -> Vec<DeformationSpec> {
        let mut specs = DeformationSpec::registry();
        specs.push(DeformationSpec::poschl_teller(0.5).unwrap());
        specs
    }

    #[test]
    fn params_validation_and_derived_values() {
        assert!(RamanParams::new(0.0, 1.0, 1.0).is_err());
        assert!(RamanParams::new(1.0, -1.0, 1.0).is_err());
        assert!(RamanParams::new(1.0, 1.0, 0.0).is_err());
        let p = RamanParams::new(0.7, 1.3, -12.5).unwrap();
        assert_eq!(p.big_g(), 0.7 * 0.7 + 1.3 * 1.3);
        assert!((p.lambda() * p.delta() - 0.7 * 1.3).abs() <= 1e-14 * 0.91);
        assert_eq!(p.rabi(0.0), 6.25);
    }

    #[test]
    fn vacuum_interaction_is_zero() {
        let p = RamanParams::new(1.0, 2.0, 5.0).unwrap();
        let h = build_h_interaction(&p, &DeformationSpec::squared(), 0.4, 1).unwrap();
        assert!(h.matrix().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn interaction_sector_one_at_t0() {
        let p = RamanParams::new(0.8, 1.7, 5.0).unwrap();
        let h = build_h_interaction(&p, &DeformationSpec::harmonic(), 0.0, 3).unwrap();
        assert_eq!(h.element((Level::G, 1), (Level::I, 0)), c(0.8, 0.0));
        assert_eq!(h.element((Level::I, 0), (Level::G, 1)), c(0.8, 0.0));
        assert_eq!(h.element((Level::E, 1), (Level::I, 0)), c(1.7, 0.0));
        assert_eq!(h.element((Level::G, 1), (Level::E, 1)), c(0.0, 0.0));
    }

    #[test]
    fn interaction_elements_against_oracle() {
        let p = RamanParams::new(0.9, 1.4, 7.0).unwrap();
        let spec = DeformationSpec::squared();
        let t = 0.3;
        let h = build_h_interaction(&p, &spec, t, 4).unwrap();
        // n = 2 sector, e_n = n²: sqrt(2) f(2) = sqrt(2) sqrt(2) = 2
        let phase = Complex64::from_polar(1.0, 7.0 * t);
        let k = 2f64.sqrt() * spec.f_of_n(2).unwrap();
        assert!((h.element((Level::I, 1), (Level::G, 2)) - phase * 0.9 * k).norm() < 1e-15);
        assert!((h.element((Level::G, 2), (Level::I, 1)) - phase.conj() * 0.9 * k).norm() < 1e-15);
        assert!((h.element((Level::I, 1), (Level::E, 2)) - phase * 1.4 * k).norm() < 1e-15);
        assert!((h.element((Level::E, 2), (Level::I, 1)) - phase.conj() * 1.4 * k).norm() < 1e-15);
    }

    #[test]
    fn interaction_is_block_diagonal_over_sectors() {
        let p = RamanParams::new(1.1, 0.6, 9.0).unwrap();
        let n_trunc = 8;
        let h = build_h_interaction(&p, &DeformationSpec::squared(), 1.7, n_trunc).unwrap();
        let sector = |level: Level, n: usize| -> usize {
            match level {
                Level::I => n + 1,
                _ => n,
            }
        };
        for (la, na) in Level::ALL
            .iter()
            .flat_map(|&l| (0..n_trunc).map(move |n| (l, n)))
        {
            for (lb, nb) in Level::ALL
                .iter()
                .flat_map(|&l| (0..n_trunc).map(move |n| (l, n)))
            {
                if sector(la, na) != sector(lb, nb) {
                    assert_eq!(h.element((la, na), (lb, nb)), ZERO);
                }
            }
        }
    }

    #[test]
    fn effective_examples() {
        let p = RamanParams::new(1.0, 1.5, 10.0).unwrap();
        let lam = p.lambda();
        let h = build_h_e(&p, &DeformationSpec::harmonic(), 6).unwrap();
        for n in 0..6 {
            assert_eq!(
                h.element((Level::G, n), (Level::E, n)),
                c(-lam * n as f64, 0.0)
            );
            assert_eq!(h.element((Level::G, n), (Level::G, n)), ZERO);
        }
        let h = build_h_e(&p, &DeformationSpec::squared(), 6).unwrap();
        assert_eq!(h.element((Level::E, 3), (Level::G, 3)), c(-9.0 * lam, 0.0));
        for col in 0..h.dim() {
            assert_eq!(h.matrix()[(0, col)], ZERO);
            assert_eq!(h.matrix()[(1, col)], ZERO);
        }
    }

    #[test]
    fn stark_examples() {
        let p = RamanParams::new(0.5, 2.0, 4.0).unwrap();
        let pt = DeformationSpec::poschl_teller(1.0).unwrap();
        let h = build_h_s(&p, &pt, 4).unwrap();
        assert_eq!(h.element((Level::G, 0), (Level::G, 0)), c(-0.0, 0.0));
        assert_eq!(
            h.element((Level::G, 2), (Level::G, 2)),
            c(-8.0 * p.lambda1(), 0.0)
        );
        assert_eq!(
            h.element((Level::E, 2), (Level::E, 2)),
            c(-8.0 * p.lambda2(), 0.0)
        );

        let q = RamanParams::symmetric(1.3, 4.0).unwrap();
        let h = build_h_s(&q, &DeformationSpec::harmonic(), 4).unwrap();
        assert_eq!(q.lambda1(), q.lambda());
        assert_eq!(
            h.element((Level::G, 3), (Level::G, 3)),
            c(-3.0 * q.lambda(), 0.0)
        );
    }

    #[test]
    fn modified_effective_is_sum() {
        let p = RamanParams::new(0.5, 2.0, -4.0).unwrap();
        let spec = DeformationSpec::squared();
        let sum =
            build_h_e(&p, &spec, 5).unwrap().matrix() + build_h_s(&p, &spec, 5).unwrap().matrix();
        assert_eq!(build_h_eff(&p, &spec, 5).unwrap().matrix(), &sum);
    }

    #[test]
    fn symmetric_effective_block_eigenvalues() {
        let p = RamanParams::symmetric(1.0, 8.0).unwrap();
        let spec = DeformationSpec::squared();
        let h = build_h_eff(&p, &spec, 5).unwrap();
        for n in 0..5 {
            let e = spec.energy(n).unwrap();
            // block is −λ e_n (σ_x + I), eigenvalues {0, −2λ e_n}
            let a = h.element((Level::G, n), (Level::G, n)).re;
            let b = h.element((Level::G, n), (Level::E, n)).re;
            let d = h.element((Level::E, n), (Level::E, n)).re;
            let tr = a + d;
            let det = a * d - b * b;
            let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
            let (lo, hi) = ((tr - disc) / 2.0, (tr + disc) / 2.0);
            assert!((lo + 2.0 * p.lambda() * e).abs() < 1e-13);
            assert!(hi.abs() < 1e-13);
        }
    }

    #[test]
    fn harmonic_reductions() {
        // f ≡ 1 reproduces the bosonic forms entrywise
        let p = RamanParams::new(0.9, 1.2, 6.0).unwrap();
        let h = DeformationSpec::harmonic();
        let hi = build_h_interaction(&p, &h, 0.25, 5).unwrap();
        let heff = build_h_eff(&p, &h, 5).unwrap();
        for n in 1..5 {
            let sq = (n as f64).sqrt();
            let ph = Complex64::from_polar(1.0, -6.0 * 0.25);
            assert!((hi.element((Level::G, n), (Level::I, n - 1)) - ph * 0.9 * sq).norm() < 1e-15);
            assert!((hi.element((Level::E, n), (Level::I, n - 1)) - ph * 1.2 * sq).norm() < 1e-15);
            let x = n as f64;
            assert_eq!(
                heff.element((Level::G, n), (Level::E, n)).re,
                -p.lambda() * x
            );
            assert_eq!(
                heff.element((Level::G, n), (Level::G, n)).re,
                -p.lambda1() * x
            );
            assert_eq!(
                heff.element((Level::E, n), (Level::E, n)).re,
                -p.lambda2() * x
            );
        }
    }

    #[test]
    fn field_hamiltonian() {
        let h = build_field_h(&DeformationSpec::harmonic(), 6).unwrap();
        for n in 0..6 {
            assert_eq!(h.matrix()[(n, n)], c(n as f64, 0.0));
        }
        let h = build_field_h(&DeformationSpec::squared(), 6).unwrap();
        assert_eq!(h.matrix()[(5, 5)], c(25.0, 0.0));
    }

    #[test]
    fn builders_are_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let specs = registry_and_tables();
        for draw in 0..10 {
            let p = RamanParams::new(
                rng.gen_range(0.2..3.0),
                rng.gen_range(0.2..3.0),
                rng.gen_range(2.0..60.0) * if draw % 2 == 0 { 1.0 } else { -1.0 },
            )
            .unwrap();
            let spec = &specs[draw % specs.len()];
            let t = rng.gen_range(0.0..10.0);
            let ops = [
                build_h_interaction(&p, spec, t, 9).unwrap(),
                build_h_e(&p, spec, 9).unwrap(),
                build_h_s(&p, spec, 9).unwrap(),
                build_h_eff(&p, spec, 9).unwrap(),
                build_field_h(spec, 9).unwrap(),
            ];
            for op in &ops {
                assert!(op.hermiticity_error() <= 1e-12);
            }
        }
    }

    #[test]
    fn two_level_embedding() {
        let p = RamanParams::new(1.0, 2.0, 3.0).unwrap();
        let h = build_h_eff(&p, &DeformationSpec::squared(), 4).unwrap();
        let full = h.to_three_level().unwrap();
        assert_eq!(full.dim(), 12);
        for n in 0..4 {
            assert_eq!(
                full.element((Level::G, n), (Level::E, n)),
                h.element((Level::G, n), (Level::E, n))
            );
            for l in Level::ALL {
                assert_eq!(full.element((Level::I, n), (l, n)), ZERO);
            }
        }
    }
}
