use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot normalize a zero vector (norm {norm:e})")]
    ZeroVector { norm: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-physical spectrum at n = {n} (e_n = {energy}): {reason}")]
    NonPhysicalSpectrum {
        n: usize,
        energy: f64,
        reason: &'static str,
    },

    #[error("coherent-state series diverges at |z| = {z_abs} (term ratio {ratio:.6} at n = {n})")]
    DivergentSeries { z_abs: f64, n: usize, ratio: f64 },

    #[error("spectrum table exhausted: {available} levels available, series not converged")]
    SpectrumExhausted { available: usize },

    #[error("index n = {n} outside cached range 0..{capacity}")]
    OutOfCache { n: usize, capacity: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("initial state populates the upper level |i> (amplitude norm {norm:e})")]
    InitialExcitedLevel { norm: f64 },

    #[error("{}", detection_message(*atom, *probability, *floor))]
    DetectionImprobable {
        atom: Option<usize>,
        probability: f64,
        floor: f64,
    },

    #[error("component set is ill-conditioned (Gram condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("spectrum table: {0}")]
    TableFormat(String),
}

fn detection_message(atom: Option<usize>, probability: f64, floor: f64) -> String {
    match atom {
        Some(m) => format!(
            "detection of atom {m} in |e> is improbable: P_e = {probability:e} < floor {floor:e}"
        ),
        None => format!("detection in |e> is improbable: P_e = {probability:e} < floor {floor:e}"),
    }
}
