// SPDX-License-Identifier: Apache-2.0

//! Single- and two-qubit channels in Kraus form.
//!
//! A two-qubit correlated channel is kept as a weighted mixture
//! `(1 − μ) E_uncorr + μ E_fcorr` rather than a flattened Kraus list, so the
//! μ = 0 and μ = 1 limits are exact and the mixture structure stays visible.
//! Channels are snapshots at a fixed noise value `p`; time enters only through
//! [`NoiseParams::p`].

use thiserror::Error;

use crate::linalg::{pauli, validate_density, ComplexMatrix, DensityMatrix, LinalgError, StateError, C64};
use crate::maps::{choi, pauli_basis, transfer_matrix, MapError};
use crate::noise::{NoiseError, NoiseParams};

/// Kraus completeness tolerance for accepting a channel as trace preserving.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Choi eigenvalues down to this are accepted as positive.
pub const CHOI_MIN_EIGENVALUE: f64 = -1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("{name} = {value} outside its domain {domain}")]
    Domain { name: &'static str, value: f64, domain: &'static str },
    #[error("dimension mismatch: channel acts on {expected}, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid Kraus set: {0}")]
    InvalidKraus(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

pub(crate) fn check_domain(name: &'static str, value: f64, lo: f64, hi: f64, domain: &'static str) -> Result<f64, ChannelError> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(ChannelError::Domain { name, value, domain })
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<f64, ChannelError> {
    check_domain("mu", mu, 0.0, 1.0, "[0, 1]")
}

/// Ordered Kraus operators, optionally weighted: ρ ↦ Σ_k w_k K_k ρ K_k†.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<ComplexMatrix>,
    weights: Option<Vec<f64>>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        Self::build(operators, None)
    }

    pub fn weighted(operators: Vec<ComplexMatrix>, weights: Vec<f64>) -> Result<Self, ChannelError> {
        if weights.len() != operators.len() {
            return Err(ChannelError::InvalidKraus(format!(
                "{} weights for {} operators",
                weights.len(),
                operators.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(ChannelError::InvalidKraus(format!("negative or non-finite weight {w}")));
        }
        Self::build(operators, Some(weights))
    }

    fn build(operators: Vec<ComplexMatrix>, weights: Option<Vec<f64>>) -> Result<Self, ChannelError> {
        let first = operators.first().ok_or_else(|| ChannelError::InvalidKraus("empty operator list".into()))?;
        let dim = first.rows();
        if operators.iter().any(|k| k.rows() != dim || k.cols() != dim) {
            return Err(ChannelError::InvalidKraus("operators must share one square dimension".into()));
        }
        Ok(Self { dim, operators, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    fn weight(&self, k: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[k])
    }

    /// Σ_k w_k K_k X K_k† for an arbitrary operator X.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (k, op) in self.operators.iter().enumerate() {
            let w = self.weight(k);
            if w == 0.0 {
                continue;
            }
            out = &out + &op.sandwich(x).scale_real(w);
        }
        out
    }

    /// Σ_k w_k K_k† K_k.
    pub fn completeness(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for (k, op) in self.operators.iter().enumerate() {
            acc = &acc + &(&op.adjoint() * op).scale_real(self.weight(k));
        }
        acc
    }

    /// Equivalent unweighted set with √w_k folded into each operator.
    pub fn normalized(&self) -> KrausSet {
        let operators = self
            .operators
            .iter()
            .enumerate()
            .map(|(k, op)| op.scale_real(self.weight(k).sqrt()))
            .collect();
        KrausSet { dim: self.dim, operators, weights: None }
    }

    /// K_i ⊗ K_j over all pairs, row-major in (i, j).
    pub fn tensor(&self, other: &KrausSet) -> KrausSet {
        let a = self.normalized();
        let b = other.normalized();
        let operators = a.operators.iter().flat_map(|x| b.operators.iter().map(move |y| x.kron(y))).collect();
        KrausSet { dim: self.dim * other.dim, operators, weights: None }
    }
}

/// One branch of a channel mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub kraus: KrausSet,
}

/// Convex mixture of Kraus channels: ρ ↦ Σ_c w_c E_c(ρ).
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    dim: usize,
    components: Vec<MixtureComponent>,
}

impl Channel {
    pub fn from_kraus(kraus: KrausSet) -> Self {
        Self { dim: kraus.dim(), components: vec![MixtureComponent { weight: 1.0, kraus }] }
    }

    pub fn mixture(components: Vec<MixtureComponent>) -> Result<Self, ChannelError> {
        let dim = components
            .first()
            .map(|c| c.kraus.dim())
            .ok_or_else(|| ChannelError::InvalidKraus("empty mixture".into()))?;
        if components.iter().any(|c| c.kraus.dim() != dim) {
            return Err(ChannelError::InvalidKraus("mixture components differ in dimension".into()));
        }
        if components.iter().any(|c| !(c.weight >= 0.0)) {
            return Err(ChannelError::InvalidKraus("negative mixture weight".into()));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(ChannelError::InvalidKraus(format!("mixture weights sum to {total}")));
        }
        Ok(Self { dim, components })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_kraus(KrausSet { dim, operators: vec![ComplexMatrix::identity(dim)], weights: None })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// Linear action on any d×d operator.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(ChannelError::DimensionMismatch { expected: self.dim, found: x.rows() });
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for c in &self.components {
            if c.weight == 0.0 {
                continue;
            }
            out = &out + &c.kraus.apply_operator(x).scale_real(c.weight);
        }
        Ok(out)
    }

    /// ρ ↦ E(ρ), with the output re-validated as a density matrix.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
        let out = self.apply_operator(rho.matrix())?;
        Ok(validate_density(out)?)
    }

    /// One flat Kraus list realizing the whole mixture.
    pub fn flatten(&self) -> KrausSet {
        let operators = self
            .components
            .iter()
            .filter(|c| c.weight > 0.0)
            .flat_map(|c| {
                let s = c.weight.sqrt();
                c.kraus.normalized().operators.into_iter().map(move |k| k.scale_real(s))
            })
            .collect();
        KrausSet { dim: self.dim, operators, weights: None }
    }

    /// max |Σ K†K − I|.
    pub fn completeness_residual(&self) -> f64 {
        self.flatten().completeness().max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// max |E(I) − I|.
    pub fn unital_residual(&self) -> f64 {
        let id = ComplexMatrix::identity(self.dim);
        self.apply_operator(&id).expect("dimension matches").max_abs_diff(&id)
    }
}

/// Joint error probabilities p_ij = (1 − μ) q_i q_j + μ q_i δ_ij over two outcomes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointProbTable {
    pub marginals: [f64; 2],
    pub mu: f64,
    pub entries: [[f64; 2]; 2],
}

impl JointProbTable {
    pub fn new(marginals: [f64; 2], mu: f64) -> Result<Self, ChannelError> {
        let mu = check_mu(mu)?;
        for q in marginals {
            check_domain("marginal probability", q, 0.0, 1.0, "[0, 1]")?;
        }
        let mut entries = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let diag = if i == j { marginals[i] } else { 0.0 };
                entries[i][j] = (1.0 - mu) * marginals[i] * marginals[j] + mu * diag;
            }
        }
        Ok(Self { marginals, mu, entries })
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().flatten().sum()
    }
}

/// (q₀, q₃) = ((1 + p)/2, (1 − p)/2).
pub fn dephasing_weights(p: f64) -> Result<(f64, f64), ChannelError> {
    let p = check_domain("p", p, -1.0, 1.0, "[-1, 1]")?;
    Ok((0.5 * (1.0 + p), 0.5 * (1.0 - p)))
}

/// Single-qubit dephasing {√q₀ I, √q₃ Z}.
pub fn single_qubit_dephasing(p: f64) -> Result<KrausSet, ChannelError> {
    let (q0, q3) = dephasing_weights(p)?;
    KrausSet::new(vec![pauli(0).scale_real(q0.sqrt()), pauli(3).scale_real(q3.sqrt())])
}

/// Joint table for correlated dephasing at noise value p.
pub fn dephasing_joint_table(p: f64, mu: f64) -> Result<JointProbTable, ChannelError> {
    let (q0, q3) = dephasing_weights(p)?;
    JointProbTable::new([q0, q3], mu)
}

/// Correlated two-qubit dephasing: Kraus operators √p_ij σ_i ⊗ σ_j, (i, j) ∈ {0, 3}².
pub fn correlated_dephasing_channel(p: f64, mu: f64) -> Result<Channel, ChannelError> {
    let table = dephasing_joint_table(p, mu)?;
    let labels = [0usize, 3];
    let mut operators = Vec::with_capacity(4);
    for (i, &a) in labels.iter().enumerate() {
        for (j, &b) in labels.iter().enumerate() {
            operators.push(pauli(a).kron(&pauli(b)).scale_real(table.entries[i][j].sqrt()));
        }
    }
    Ok(Channel::from_kraus(KrausSet::new(operators)?))
}

/// Single-qubit amplitude damping {A₀, A₁} at damping probability p.
pub fn nmad_single_qubit(p: f64) -> Result<KrausSet, ChannelError> {
    let p = check_domain("p", p, 0.0, 1.0, "[0, 1]")?;
    let z = C64::new(0.0, 0.0);
    let a0 = ComplexMatrix::from_vec(2, 2, vec![C64::new(1.0, 0.0), z, z, C64::new((1.0 - p).sqrt(), 0.0)])
        .expect("2x2");
    let a1 = ComplexMatrix::from_vec(2, 2, vec![z, C64::new(p.sqrt(), 0.0), z, z]).expect("2x2");
    KrausSet::new(vec![a0, a1])
}

/// Uncorrelated two-qubit amplitude damping {A_i ⊗ A_j}.
pub fn uncorrelated_nmad_kraus(p: f64) -> Result<KrausSet, ChannelError> {
    let single = nmad_single_qubit(p)?;
    Ok(single.tensor(&single))
}

/// Fully correlated amplitude damping: E₀₀ = diag(1, 1, 1, √(1−p)), E₁₁ = √p |00⟩⟨11|.
pub fn fully_correlated_nmad_kraus(p: f64) -> Result<KrausSet, ChannelError> {
    let p = check_domain("p", p, 0.0, 1.0, "[0, 1]")?;
    let e00 = ComplexMatrix::from_real_diag(&[1.0, 1.0, 1.0, (1.0 - p).sqrt()]);
    let mut e11 = ComplexMatrix::zeros(4, 4);
    e11[(0, 3)] = C64::new(p.sqrt(), 0.0);
    KrausSet::new(vec![e00, e11])
}

/// (1 − μ) E_uncorr + μ E_fcorr for amplitude damping.
pub fn correlated_nmad_channel(p: f64, mu: f64) -> Result<Channel, ChannelError> {
    let mu = check_mu(mu)?;
    Channel::mixture(vec![
        MixtureComponent { weight: 1.0 - mu, kraus: uncorrelated_nmad_kraus(p)? },
        MixtureComponent { weight: mu, kraus: fully_correlated_nmad_kraus(p)? },
    ])
}

/// The two-qubit correlated channel of a noise model at time t.
pub fn correlated_channel(noise: &NoiseParams, mu: f64, t: f64) -> Result<Channel, ChannelError> {
    let p = noise.p(t)?;
    match noise {
        NoiseParams::Rtn(_) | NoiseParams::Oun(_) => correlated_dephasing_channel(p.clamp(-1.0, 1.0), mu),
        NoiseParams::Nmad(_) => correlated_nmad_channel(p.clamp(0.0, 1.0), mu),
    }
}

/// CPTP diagnostics of a channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptpReport {
    pub completeness_residual: f64,
    pub choi_min_eigenvalue: f64,
    pub unital_residual: f64,
}

impl CptpReport {
    pub fn is_cptp(&self) -> bool {
        self.completeness_residual < COMPLETENESS_TOL && self.choi_min_eigenvalue > CHOI_MIN_EIGENVALUE
    }
}

pub fn cptp_report(channel: &Channel) -> Result<CptpReport, MapError> {
    let n_qubits = match channel.dim() {
        2 => 1,
        4 => 2,
        d => return Err(MapError::UnsupportedDimension(d)),
    };
    let basis = pauli_basis(n_qubits)?;
    let f = transfer_matrix(channel, &basis)?;
    let s = choi(&f, &basis);
    let eig = crate::linalg::eig_hermitian(s.matrix()).map_err(|e: LinalgError| MapError::Linalg(e))?;
    Ok(CptpReport {
        completeness_residual: channel.completeness_residual(),
        choi_min_eigenvalue: eig.min_value(),
        unital_residual: channel.unital_residual(),
    })
}
