// SPDX-License-Identifier: Apache-2.0

//! Closed-form evolution under correlated channels and the freezing predicate.
//!
//! Correlated dephasing leaves populations alone and multiplies a coherence
//! |r⟩⟨c| by 1, p or τ(μ) = μ + (1 − μ)p² according to whether r and c differ
//! on zero, one or two qubits. Fully correlated amplitude damping only touches
//! the |11⟩ row and column.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::channel::{check_domain, check_mu, ChannelError};
use crate::linalg::{pauli, validate_density, ComplexMatrix, DensityMatrix, StateError};

/// Equality tolerance on Bloch coefficients.
pub const BLOCH_TOL: f64 = 1e-9;

/// Bell-diagonal eigenvalues must be at least this.
pub const BLOCH_MIN_EIGENVALUE: f64 = -1e-10;

/// Coherences below this count as absent.
const COHERENCE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("Bloch triple ({0}, {1}, {2}) is not a valid state (min eigenvalue {3:e})")]
    NotPhysical(f64, f64, f64, f64),
    #[error("amplitude-damping update keeps the Bell-diagonal form only for c3 = -1 and mu = 1 (got c3 = {c3}, mu = {mu})")]
    FormNotPreserved { c3: f64, mu: f64 },
    #[error("state is not Bell diagonal (residual {0:e})")]
    NotBellDiagonal(f64),
    #[error("closed forms need a two-qubit state, got dimension {0}")]
    NotTwoQubit(usize),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Family of the correlated channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Rtn,
    Oun,
    Nmad,
}

impl ChannelKind {
    pub fn is_unital(self) -> bool {
        !matches!(self, ChannelKind::Nmad)
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Rtn => "rtn",
            ChannelKind::Oun => "oun",
            ChannelKind::Nmad => "nmad",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rtn" => Ok(ChannelKind::Rtn),
            "oun" => Ok(ChannelKind::Oun),
            "nmad" => Ok(ChannelKind::Nmad),
            _ => Err(format!("unknown channel '{s}' (expected rtn, oun or nmad)")),
        }
    }
}

fn two_qubit(rho: &DensityMatrix) -> Result<(), DynamicsError> {
    if rho.dim() == 4 {
        Ok(())
    } else {
        Err(DynamicsError::NotTwoQubit(rho.dim()))
    }
}

/// Number of qubits on which basis indices r and c differ.
fn flips(r: usize, c: usize) -> u32 {
    ((r ^ c) & 0b11).count_ones()
}

/// τ(μ) = μ + (1 − μ)p².
pub fn tau(p: f64, mu: f64) -> f64 {
    mu + (1.0 - mu) * p * p
}

/// Correlated dephasing applied entrywise.
pub fn evolve_unital_closed_form(rho0: &DensityMatrix, p: f64, mu: f64) -> Result<DensityMatrix, DynamicsError> {
    two_qubit(rho0)?;
    let p = check_domain("p", p, -1.0, 1.0, "[-1, 1]")?;
    let mu = check_mu(mu)?;
    let factors = [1.0, p, tau(p, mu)];
    let m = ComplexMatrix::from_fn(4, 4, |r, c| rho0.get(r, c) * factors[flips(r, c) as usize]);
    Ok(validate_density(m)?)
}

/// Fully correlated amplitude damping applied entrywise.
pub fn evolve_fcorr_nmad_closed_form(rho0: &DensityMatrix, p: f64) -> Result<DensityMatrix, DynamicsError> {
    two_qubit(rho0)?;
    let p = check_domain("p", p, 0.0, 1.0, "[0, 1]")?;
    let s = (1.0 - p).sqrt();
    let mut m = rho0.matrix().clone();
    for k in 0..3 {
        m[(k, 3)] *= s;
        m[(3, k)] *= s;
    }
    m[(0, 0)] += rho0.get(3, 3) * p;
    m[(3, 3)] *= 1.0 - p;
    Ok(validate_density(m)?)
}

/// Bell-diagonal state ¼(I⊗I + Σ c_i σ_i⊗σ_i).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochDiagonal {
    c: [f64; 3],
}

impl BlochDiagonal {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self, DynamicsError> {
        let eig = Self::eigenvalues_of([c1, c2, c3]);
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min >= BLOCH_MIN_EIGENVALUE) {
            return Err(DynamicsError::NotPhysical(c1, c2, c3, min));
        }
        Ok(Self { c: [c1, c2, c3] })
    }

    /// Eigenvalues in the Bell basis (ψ⁻, φ⁻, φ⁺, ψ⁺).
    fn eigenvalues_of(c: [f64; 3]) -> [f64; 4] {
        let [c1, c2, c3] = c;
        [
            0.25 * (1.0 - c1 - c2 - c3),
            0.25 * (1.0 - c1 + c2 + c3),
            0.25 * (1.0 + c1 - c2 + c3),
            0.25 * (1.0 + c1 + c2 - c3),
        ]
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        Self::eigenvalues_of(self.c)
    }

    pub fn c(&self) -> [f64; 3] {
        self.c
    }

    pub fn density(&self) -> DensityMatrix {
        let mut m = ComplexMatrix::identity(4);
        for (i, ci) in self.c.iter().enumerate() {
            m = &m + &pauli(i + 1).kron(&pauli(i + 1)).scale_real(*ci);
        }
        validate_density(m.scale_real(0.25)).expect("checked by construction")
    }

    /// Reads c_i = tr[ρ σ_i⊗σ_i] and checks ρ has no other components.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self, DynamicsError> {
        two_qubit(rho)?;
        let c: Vec<f64> = (1..4).map(|i| pauli(i).kron(&pauli(i)).trace_product(rho.matrix()).re).collect();
        let candidate = Self::new(c[0], c[1], c[2])?;
        let residual = candidate.density().matrix().max_abs_diff(rho.matrix());
        if residual > 1e-10 {
            return Err(DynamicsError::NotBellDiagonal(residual));
        }
        Ok(candidate)
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.c.iter().zip(&other.c).all(|(a, b)| (a - b).abs() <= BLOCH_TOL)
    }
}

/// Updated (c₁, c₂) under fully correlated damping for c₃ = −1 inputs:
/// ½(c₁ + c₂ ± (c₁ − c₂)(1 − p)).
///
/// Pure arithmetic; the input pair need not describe a valid state.
pub fn nmad_coefficients(c1: f64, c2: f64, p: f64) -> (f64, f64) {
    let s = c1 + c2;
    let d = (c1 - c2) * (1.0 - p);
    (0.5 * (s + d), 0.5 * (s - d))
}

/// Bloch-triple update under a correlated channel at noise value p.
pub fn bloch_update(c: &BlochDiagonal, kind: ChannelKind, p: f64, mu: f64) -> Result<BlochDiagonal, DynamicsError> {
    let mu = check_mu(mu)?;
    let [c1, c2, c3] = c.c;
    if kind.is_unital() {
        let p = check_domain("p", p, -1.0, 1.0, "[-1, 1]")?;
        let t = tau(p, mu);
        return BlochDiagonal::new(c1 * t, c2 * t, c3);
    }
    let p = check_domain("p", p, 0.0, 1.0, "[0, 1]")?;
    if (c3 + 1.0).abs() > BLOCH_TOL || (mu - 1.0).abs() > BLOCH_TOL {
        return Err(DynamicsError::FormNotPreserved { c3, mu });
    }
    let (n1, n2) = nmad_coefficients(c1, c2, p);
    BlochDiagonal::new(n1, n2, -1.0)
}

/// Outcome of the freezing test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FreezeVerdict {
    Frozen,
    NotFrozen,
    /// The fully correlated branch freezes the state but the uncorrelated branch does not.
    Conditionally(String),
}

impl fmt::Display for FreezeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreezeVerdict::Frozen => f.write_str("frozen"),
            FreezeVerdict::NotFrozen => f.write_str("not_frozen"),
            FreezeVerdict::Conditionally(reason) => write!(f, "conditionally: {reason}"),
        }
    }
}

fn is_one(mu: f64) -> bool {
    (mu - 1.0).abs() <= BLOCH_TOL
}

fn partial_freeze(mu: f64) -> FreezeVerdict {
    FreezeVerdict::Conditionally(format!(
        "invariant under the fully correlated branch only; the independent branch (weight {:.6}) moves it",
        1.0 - mu
    ))
}

/// Freezing of a Bell-diagonal state.
pub fn freezing_predicate(c: &BlochDiagonal, kind: ChannelKind, mu: f64) -> Result<FreezeVerdict, DynamicsError> {
    let mu = check_mu(mu)?;
    let [c1, c2, c3] = c.c;
    let verdict = if kind.is_unital() {
        if is_one(mu) || (c1.abs() <= BLOCH_TOL && c2.abs() <= BLOCH_TOL) {
            FreezeVerdict::Frozen
        } else {
            FreezeVerdict::NotFrozen
        }
    } else if (c1 - c2).abs() <= BLOCH_TOL && (c3 + 1.0).abs() <= BLOCH_TOL {
        if is_one(mu) {
            FreezeVerdict::Frozen
        } else {
            partial_freeze(mu)
        }
    } else {
        FreezeVerdict::NotFrozen
    };
    Ok(verdict)
}

/// Freezing of a general two-qubit state.
///
/// Unital: every coherence between states differing on one qubit must vanish,
/// and those differing on both must vanish unless μ = 1. Amplitude damping:
/// the |11⟩ population must vanish (positivity then removes its coherences).
pub fn freezing_predicate_state(rho: &DensityMatrix, kind: ChannelKind, mu: f64) -> Result<FreezeVerdict, DynamicsError> {
    two_qubit(rho)?;
    let mu = check_mu(mu)?;
    let max_coherence = |n: u32| -> f64 {
        let mut m = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                if flips(r, c) == n {
                    m = m.max(rho.get(r, c).norm());
                }
            }
        }
        m
    };
    let verdict = if kind.is_unital() {
        let single = max_coherence(1) <= COHERENCE_TOL;
        let double = max_coherence(2) <= COHERENCE_TOL;
        if single && (double || is_one(mu)) {
            FreezeVerdict::Frozen
        } else {
            FreezeVerdict::NotFrozen
        }
    } else if rho.get(3, 3).re.abs() <= COHERENCE_TOL {
        if is_one(mu) {
            FreezeVerdict::Frozen
        } else {
            partial_freeze(mu)
        }
    } else {
        FreezeVerdict::NotFrozen
    };
    Ok(verdict)
}

/// Kraus-path evolution of ρ₀ under the correlated channel of `noise` at time t.
pub fn evolve(
    noise: &crate::noise::NoiseParams,
    mu: f64,
    t: f64,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix, ChannelError> {
    crate::channel::correlated_channel(noise, mu, t)?.apply(rho0)
}
