// SPDX-License-Identifier: Apache-2.0

//! Correlated non-Markovian two-qubit channels.
//!
//! The crate builds dephasing (random telegraph and Ornstein–Uhlenbeck noise)
//! and amplitude-damping channels whose two-qubit action interpolates between
//! independent and fully correlated errors through a correlation factor μ.
//! On top of the channels it provides transfer-matrix and Choi machinery,
//! non-Markovianity measures, closed-form freezing dynamics and a six-qubit
//! concatenated-code success-probability engine.

// Negated comparisons such as `!(x > 0.0)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod linalg;
pub mod maps;
pub mod noise;
pub mod states;
pub mod dynamics;
pub mod measures;
pub mod qec;
pub mod cli;

use thiserror::Error;

/// Any failure raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Noise(#[from] noise::NoiseError),
    #[error(transparent)]
    Channel(#[from] channel::ChannelError),
    #[error(transparent)]
    Map(#[from] maps::MapError),
    #[error(transparent)]
    Measure(#[from] measures::MeasureError),
    #[error(transparent)]
    Dynamics(#[from] dynamics::DynamicsError),
    #[error(transparent)]
    Qec(#[from] qec::QecError),
    #[error(transparent)]
    State(#[from] linalg::StateError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

impl Error {
    /// True when the failure stems from invalid parameters rather than numerics.
    pub fn is_invalid_input(&self) -> bool {
        match self {
            Error::Noise(e) => e.is_invalid_input(),
            Error::Channel(e) => e.is_invalid_input(),
            Error::Map(e) => e.is_invalid_input(),
            Error::Measure(e) => e.is_invalid_input(),
            Error::Dynamics(e) => e.is_invalid_input(),
            Error::Qec(e) => e.is_invalid_input(),
            Error::State(_) | Error::Linalg(_) => false,
        }
    }
}

impl noise::NoiseError {
    pub fn is_invalid_input(&self) -> bool {
        matches!(self, Self::NonPositive { .. } | Self::BadTime(_))
    }
}

impl channel::ChannelError {
    pub fn is_invalid_input(&self) -> bool {
        match self {
            Self::Domain { .. } | Self::DimensionMismatch { .. } => true,
            Self::Noise(e) => e.is_invalid_input(),
            Self::InvalidKraus(_) | Self::State(_) => false,
        }
    }
}

impl maps::MapError {
    pub fn is_invalid_input(&self) -> bool {
        match self {
            Self::UnsupportedDimension(_) | Self::UnsupportedQubits(_) | Self::DimensionMismatch { .. } | Self::BadStep(_) => true,
            Self::Channel(e) => e.is_invalid_input(),
            Self::Noise(e) => e.is_invalid_input(),
            Self::Singular { .. } | Self::NotCp { .. } | Self::Linalg(_) => false,
        }
    }
}

impl measures::MeasureError {
    pub fn is_invalid_input(&self) -> bool {
        match self {
            Self::EmptyGrid
            | Self::GridTooCoarse { .. }
            | Self::BadSeries(_)
            | Self::DimensionMismatch(..)
            | Self::NotTwoQubit(_) => true,
            Self::Map(e) => e.is_invalid_input(),
            Self::Channel(e) => e.is_invalid_input(),
            Self::Optimizer(_) | Self::State(_) | Self::Linalg(_) => false,
        }
    }
}

impl dynamics::DynamicsError {
    pub fn is_invalid_input(&self) -> bool {
        match self {
            Self::NotPhysical(..) | Self::FormNotPreserved { .. } | Self::NotBellDiagonal(_) | Self::NotTwoQubit(_) => true,
            Self::Channel(e) => e.is_invalid_input(),
            Self::State(_) => false,
        }
    }
}

impl qec::QecError {
    pub fn is_invalid_input(&self) -> bool {
        match self {
            Self::BadString(_) | Self::Unsupported(_) => true,
            Self::Channel(e) => e.is_invalid_input(),
            Self::Measure(e) => e.is_invalid_input(),
            Self::Inconsistent { .. } => false,
        }
    }
}
