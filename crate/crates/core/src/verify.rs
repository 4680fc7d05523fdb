//! Self-check suites run by `gkcs verify`.
//!
//! Each suite evaluates a handful of invariants over the built-in spectra
//! (plus an optional user spectrum) and records every residual next to the
//! bound it is held to.

use std::fmt::Write;

use num_complex::Complex64;

use crate::deformation::DeformationSpec;
use crate::error::{Error, Result};
use crate::evolution::{
    closed_form_effective, closed_form_interaction, oracle_evolve_converged, propagate_exact,
};
use crate::fockspace::{fidelity, AtomFieldState, Level};
use crate::hamiltonian::{build_h_eff, build_h_interaction, RamanParams};
use crate::protocol::{gk_alpha, inject_atom, run_protocol, superposition_weights, ProtocolConfig};
use crate::report::num;
use crate::states::{
    action_identity_check, default_truncation, eigen_residual, evolve_free, gkcs, nonlinear_cs,
    GkLabel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Passes when `value <= limit`.
    AtMost,
    /// Passes when `value >= limit`.
    AtLeast,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub bound: Bound,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            bound: Bound::AtMost,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            bound: Bound::AtLeast,
        }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.limit,
            Bound::AtLeast => self.value >= self.limit,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: Vec<Check>,
    /// Set when the suite could not run to completion.
    pub error: Option<Error>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(Check::passed)
    }
}

type Suite = fn(&[DeformationSpec], &mut Vec<Check>) -> Result<()>;

const SUITES: [(&str, Suite); 6] = [
    ("eigenstate", eigenstate),
    ("temporal_stability", temporal_stability),
    ("action_identity", action_identity),
    ("unitarity", unitarity),
    ("oracle_equivalence", oracle_equivalence),
    ("protocol", protocol),
];

const ZS: [f64; 3] = [0.3, 0.8, 1.2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Runs every suite over the registry spectra, and over `extra` when given.
/// A failed attempt to build `extra` is reported as a failing `spectrum`
/// suite.
pub fn run_all(extra: Option<Result<DeformationSpec>>) -> Vec<SuiteReport> {
    let mut specs = DeformationSpec::registry();
    let mut reports = Vec::new();
    match extra {
        Some(Ok(spec)) => specs.push(spec),
        Some(Err(e)) => reports.push(SuiteReport {
            name: "spectrum",
            checks: Vec::new(),
            error: Some(e),
        }),
        None => {}
    }
    for (name, suite) in SUITES {
        let mut checks = Vec::new();
        let error = suite(&specs, &mut checks).err();
        reports.push(SuiteReport {
            name,
            checks,
            error,
        });
    }
    reports
}

pub fn all_passed(reports: &[SuiteReport]) -> bool {
    reports.iter().all(SuiteReport::passed)
}

/// Per-suite summary table; `verbose` adds one line per check.
pub fn render(reports: &[SuiteReport], verbose: bool) -> String {
    let mut out = format!("{:<20} {:>6} {:>6}  status\n", "suite", "checks", "failed");
    for r in reports {
        let failed = r.checks.iter().filter(|c| !c.passed()).count();
        let status = if r.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{:<20} {:>6} {:>6}  {status}",
            r.name,
            r.checks.len(),
            failed
        );
        if let Some(e) = &r.error {
            let _ = writeln!(out, "  error: {e}");
        }
        if verbose {
            for ch in &r.checks {
                let op = match ch.bound {
                    Bound::AtMost => "<=",
                    Bound::AtLeast => ">=",
                };
                let mark = if ch.passed() { "ok" } else { "FAIL" };
                let _ = writeln!(
                    out,
                    "  {:<48} {} {op} {}  {mark}",
                    ch.name,
                    num(ch.value),
                    num(ch.limit)
                );
            }
        }
    }
    out
}

fn eigenstate(specs: &[DeformationSpec], checks: &mut Vec<Check>) -> Result<()> {
    for spec in specs {
        for z in ZS {
            let z = c(z, 0.0);
            let s = nonlinear_cs(z, spec, default_truncation(z, spec)?)?;
            let r = eigen_residual(&s, z, spec)?;
            checks.push(Check::at_most(
                format!("{} z={}", spec.name(), z.re),
                r,
                1e-8,
            ));
        }
    }
    Ok(())
}

fn temporal_stability(specs: &[DeformationSpec], checks: &mut Vec<Check>) -> Result<()> {
    for spec in specs {
        let mut worst: f64 = 0.0;
        for z in [c(0.3, 0.0), c(0.5, 0.6), c(1.2, -0.4)] {
            let n = default_truncation(z, spec)?;
            for alpha in [-1.0, 0.0, 0.9] {
                let s = gkcs(GkLabel::new(z, alpha), spec, n)?;
                for t in [0.1, 0.7, 2.5] {
                    let target = gkcs(GkLabel::new(z, alpha + t), spec, n)?;
                    worst = worst.max(1.0 - fidelity(&evolve_free(&s, spec, t)?, &target)?);
                }
            }
        }
        checks.push(Check::at_most(
            format!("{} gkcs infidelity", spec.name()),
            worst,
            1e-12,
        ));
        if !spec.is_linear() {
            // A nonlinear CS of a nonlinear spectrum is not stable.
            let z = c(1.0, 0.0);
            let s = nonlinear_cs(z, spec, default_truncation(z, spec)?)?;
            let moved = evolve_free(&s, spec, 0.7)?;
            let f = fidelity(&moved, &s)?;
            checks.push(Check::at_least(
                format!("{} nonlinear cs infidelity", spec.name()),
                1.0 - f,
                1e-3,
            ));
        }
    }
    Ok(())
}

fn action_identity(specs: &[DeformationSpec], checks: &mut Vec<Check>) -> Result<()> {
    for spec in specs {
        for z in ZS {
            let z = c(z, 0.0);
            let h = action_identity_check(GkLabel::new(z, 0.4), spec)?;
            checks.push(Check::at_most(
                format!("{} z={}", spec.name(), z.re),
                (h - z.norm_sqr()).abs(),
                1e-8,
            ));
        }
    }
    Ok(())
}

fn sample_initial(
    spec: &DeformationSpec,
    z: Complex64,
    atom: (Complex64, Complex64),
) -> Result<AtomFieldState> {
    let field = nonlinear_cs(z, spec, default_truncation(z, spec)?)?;
    AtomFieldState::product(atom.0, atom.1, &field)
}

const ATOMS: [(Complex64, Complex64); 3] = [
    (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
    (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
    (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)),
];

fn unitarity(specs: &[DeformationSpec], checks: &mut Vec<Check>) -> Result<()> {
    let params = RamanParams::new(0.8, 1.5, 12.0)?;
    for spec in specs {
        let mut drift: f64 = 0.0;
        let mut vacuum_changed = 0.0;
        for atom in ATOMS {
            let initial = sample_initial(spec, c(0.7, 0.3), atom)?;
            for t in [0.3, 1.7] {
                for out in [
                    closed_form_interaction(&initial, &params, spec, t)?,
                    closed_form_effective(&initial, &params, spec, t)?,
                ] {
                    drift = drift.max((out.norm() - initial.norm()).abs());
                    // |i, 0⟩ belongs to the one-excitation sector
                    for level in [Level::G, Level::E] {
                        if out.amplitude(level, 0) != initial.amplitude(level, 0) {
                            vacuum_changed = 1.0;
                        }
                    }
                }
            }
        }
        checks.push(Check::at_most(
            format!("{} norm drift", spec.name()),
            drift,
            1e-10,
        ));
        checks.push(Check::at_most(
            format!("{} vacuum changed", spec.name()),
            vacuum_changed,
            0.0,
        ));
    }
    Ok(())
}

fn oracle_equivalence(specs: &[DeformationSpec], checks: &mut Vec<Check>) -> Result<()> {
    let cases = [(0.7, 1.3, 9.0, 0.8), (1.6, 0.5, -20.0, 0.5)];
    for spec in specs {
        for (k, &(g1, g2, delta, t)) in cases.iter().enumerate() {
            let params = RamanParams::new(g1, g2, delta)?;
            let initial = sample_initial(spec, c(0.5, -0.4), ATOMS[k % ATOMS.len()])?;
            let n = initial.n_trunc();
            let closed = closed_form_interaction(&initial, &params, spec, t)?;
            let run = oracle_evolve_converged(
                |s| build_h_interaction(&params, spec, s, n),
                &initial,
                t,
                64,
                1e-8,
                1 << 18,
            )?;
            checks.push(Check::at_most(
                format!("{} interaction case {k}", spec.name()),
                closed.distance(&run.state)?,
                1e-6,
            ));
            let eff = closed_form_effective(&initial, &params, spec, t)?;
            let exact = propagate_exact(&build_h_eff(&params, spec, n)?, &initial, t)?;
            checks.push(Check::at_most(
                format!("{} effective case {k}", spec.name()),
                eff.distance(&exact)?,
                1e-10,
            ));
        }
    }
    Ok(())
}

fn protocol(specs: &[DeformationSpec], checks: &mut Vec<Check>) -> Result<()> {
    let params = RamanParams::symmetric(1.0, 10.0)?;
    let lambda_tau = 0.3;
    let tau = lambda_tau / params.lambda();
    let z = c(0.8, 0.0);
    for spec in specs {
        let name = spec.name();
        let n = default_truncation(z, spec)?;
        let field = nonlinear_cs(z, spec, n)?;

        let up = inject_atom(&field, c(1.0, 0.0), &params, spec, tau, 0.0)?;
        checks.push(Check::at_most(
            format!("{name} eps=1 p_e"),
            (up.p_e - 0.5).abs(),
            1e-12,
        ));
        let target = gkcs(GkLabel::new(z, gk_alpha(1, lambda_tau)), spec, n)?;
        checks.push(Check::at_least(
            format!("{name} eps=1 fidelity"),
            fidelity(&up.collapsed, &target)?,
            1.0 - 1e-12,
        ));
        let down = inject_atom(&field, c(-1.0, 0.0), &params, spec, tau, 0.0)?;
        checks.push(Check::at_least(
            format!("{name} eps=-1 fidelity"),
            fidelity(&down.collapsed, &field)?,
            1.0 - 1e-12,
        ));

        let ones = ProtocolConfig::new(z, spec.clone(), params, tau, vec![c(1.0, 0.0); 3], n)?;
        let result = run_protocol(&ones)?;
        let target = gkcs(GkLabel::new(z, gk_alpha(3, lambda_tau)), spec, n)?;
        checks.push(Check::at_least(
            format!("{name} three atoms fidelity"),
            fidelity(&result.final_field, &target)?,
            1.0 - 1e-10,
        ));

        let eps = vec![c(0.5, 0.0), c(0.25, 0.0)];
        let generic = ProtocolConfig::new(z, spec.clone(), params, tau, eps.clone(), n)?;
        let d = run_protocol(&generic)?.decomposition?;
        let w = superposition_weights(&eps);
        let mut ratio_err: f64 = 0.0;
        for k in 1..w.len() {
            let expected = w[k] / w[0];
            let got = d.coefficients[k] / d.coefficients[0];
            ratio_err = ratio_err.max((got - expected).norm() / expected.norm().max(1e-300));
        }
        checks.push(Check::at_most(
            format!("{name} two atoms ratios"),
            ratio_err,
            1e-8,
        ));
        checks.push(Check::at_most(
            format!("{name} two atoms residual"),
            d.residual,
            1e-10,
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_on_registry() {
        let reports = run_all(None);
        assert!(all_passed(&reports), "{}", render(&reports, true));
    }

    #[test]
    fn nonphysical_extra_spectrum_fails() {
        let bad = DeformationSpec::parse_table("0.1\n1\n2\n");
        assert!(bad.is_err());
        let reports = run_all(Some(bad));
        assert!(!all_passed(&reports));
        assert!(render(&reports, false).contains("spectrum"));
    }
}
