use thiserror::Error;

use crate::eigensearch::Eigenvalue;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{function}: argument {value} outside the domain ({requirement})")]
    Domain {
        function: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("source point {index} at ({x}, {y}) is not strictly exterior to the domain")]
    SourcePlacement { index: usize, x: f64, y: f64 },

    #[error("fourier fit failed: {0}")]
    FitFailure(String),

    #[error("spectral parameter lambda = {lambda} must exceed the mass {mass}")]
    InvalidSpectralParameter { lambda: f64, mass: f64 },

    #[error("degenerate MFS configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("lambda = {lambda} is not an eigenvalue (subspace angle {residual:e} above threshold)")]
    NotAnEigenvalue { lambda: f64, residual: f64 },

    #[error("window exhausted after {extensions} extensions: found {} of {wanted} eigenvalues", found.iter().map(|e| e.multiplicity).sum::<usize>())]
    InsufficientWindow {
        found: Vec<Eigenvalue>,
        wanted: usize,
        extensions: usize,
    },

    #[error("unresolved minimum of s at lambda = {lambda} (subspace angle {residual:e})")]
    Unresolved { lambda: f64, residual: f64 },

    #[error("invalid search input: {0}")]
    InvalidSearch(String),

    #[error("eigenvalue index {index} not available ({available} detected)")]
    MissingIndex { index: usize, available: usize },

    #[error("perimeter {perimeter} and area {area} violate P^2 >= 16 A")]
    InvalidIsoperimetricData { area: f64, perimeter: f64 },

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}
