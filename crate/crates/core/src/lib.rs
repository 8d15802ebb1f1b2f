//! Finite-lattice fermion models: exact Fock-space traces, Grassmann Gaussian
//! integrals, the free covariance and the analytic bounds controlling the
//! decay of thermal correlation functions.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

pub mod bounds;
pub mod covariance;
pub mod fock;
pub mod grassmann;
pub mod lattice;
pub mod model;

use core::fmt;
use num_complex::Complex64;

pub use lattice::{LatticeSpec, Spin, TimeGrid};
pub use model::{InteractionCoefficients, ModelParams};

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    InvalidLattice {
        d: usize,
        l: usize,
    },
    InvalidTimeGrid(&'static str),
    InvalidParams(&'static str),
    /// `|t| + |t'| 1_{d >= 2} = 0`.
    TrivialHopping,
    AxisOutOfRange {
        axis: usize,
        d: usize,
    },
    InvalidInteraction(&'static str),
    NotHermitian {
        order: usize,
        key: model::InteractionKey,
        value: Complex64,
        partner: Complex64,
    },
    ModeOutOfRange {
        mode: usize,
        modes: usize,
    },
    /// A size guard was exceeded.
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    /// `|Im E_k| >= pi / beta` for a shifted momentum.
    ImaginaryPartGuard {
        momentum: usize,
        im: f64,
        limit: f64,
    },
    Singular(&'static str),
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// A decay theorem's smallness hypothesis fails.
    SmallnessViolated {
        lhs: f64,
        rhs: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidLattice { d, l } => write!(f, "invalid lattice d={d}, L={l}"),
            Error::InvalidTimeGrid(m) => write!(f, "invalid time grid: {m}"),
            Error::InvalidParams(m) => write!(f, "invalid parameters: {m}"),
            Error::TrivialHopping => f.write_str("hopping vanishes: |t| + |t'| 1_{d>=2} = 0"),
            Error::AxisOutOfRange { axis, d } => write!(f, "axis {axis} out of range for d={d}"),
            Error::InvalidInteraction(m) => write!(f, "invalid interaction: {m}"),
            Error::NotHermitian {
                order,
                key,
                value,
                partner,
            } => write!(
                f,
                "hermiticity violated at order {order}, X={:?}, Xi={:?}, Phi={:?}: U={value}, U(X,Phi,Xi)={partner}",
                key.x, key.xi, key.phi
            ),
            Error::ModeOutOfRange { mode, modes } => write!(f, "mode {mode} out of range ({modes} modes)"),
            Error::TooLarge { what, size, limit } => write!(f, "{what} too large: {size} > {limit}"),
            Error::ImaginaryPartGuard { momentum, im, limit } => write!(
                f,
                "shifted dispersion at momentum #{momentum} has |Im E| = {im} >= {limit}"
            ),
            Error::Singular(m) => write!(f, "singular: {m}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::SmallnessViolated { lhs, rhs } => write!(
                f,
                "smallness condition violated: {lhs} exceeds {rhs} by {}",
                lhs - rhs
            ),
        }
    }
}

impl core::error::Error for Error {}
