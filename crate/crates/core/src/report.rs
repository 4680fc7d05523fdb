//! Plain-text reports. Every number is written with 15 significant digits
//! so that regression diffs are meaningful; nothing time-dependent is ever
//! emitted, so equal inputs give byte-identical output.

use std::fmt::Write;

use num_complex::Complex64;

use crate::evolution::EquivalenceRow;
use crate::fockspace::FieldState;
use crate::protocol::ProtocolResult;

/// `x` in scientific notation with 15 significant digits.
pub fn num(x: f64) -> String {
    // -0.0 and 0.0 render identically.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.14e}")
}

pub fn state_csv(field: &FieldState) -> String {
    let mut out = String::from("n,re,im\n");
    for (n, a) in field.amplitudes().iter().enumerate() {
        let _ = writeln!(out, "{n},{},{}", num(a.re), num(a.im));
    }
    out
}

pub fn equivalence_csv(rows: &[EquivalenceRow]) -> String {
    let mut out = String::from("delta,t,infidelity,max_i_population,validity_flag\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(r.delta),
            num(r.t),
            num(r.infidelity),
            num(r.max_i_population),
            u8::from(r.validity_violated)
        );
    }
    out
}

fn complex_cells(c: Complex64) -> String {
    format!("{},{}", num(c.re), num(c.im))
}

/// Sectioned protocol report: per-atom records, the final decomposition and
/// its residual, optionally followed by the final field amplitudes.
pub fn protocol_report(result: &ProtocolResult, include_field: bool) -> String {
    let mut out = String::from("# atoms\nm,epsilon_re,epsilon_im,p_e,alpha_m,fidelity_to_gkcs\n");
    for a in &result.atoms {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            a.m,
            complex_cells(a.epsilon),
            num(a.p_e),
            num(a.alpha),
            num(a.fidelity_to_gkcs)
        );
    }
    out.push_str("# decomposition\n");
    match &result.decomposition {
        Ok(d) => {
            out.push_str("component,re,im\n");
            for (label, c) in d.components.iter().zip(&d.coefficients) {
                let _ = writeln!(out, "{label},{}", complex_cells(*c));
            }
            let _ = writeln!(out, "# residual\n{}", num(d.residual));
        }
        Err(e) => {
            let _ = writeln!(out, "unavailable,{e}\n# residual\nnan");
        }
    }
    if include_field {
        out.push_str("# final_field\n");
        out.push_str(&state_csv(&result.final_field));
    }
    out
}
