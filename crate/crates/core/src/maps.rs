// SPDX-License-Identifier: Apache-2.0

//! Matrix representations of channels in a Hermitian operator basis.
//!
//! With an orthonormal Hermitian basis {G_k} a linear map E becomes the real
//! transfer matrix F_kl = tr[G_k E(G_l)]. The generator of a time-local
//! evolution is L = Ḟ F⁻¹, and the Choi matrix in the computational basis
//! τ_a = |i⟩⟨j| (a = i·d + j) is
//!
//! ```text
//! S_ab = Σ_{r,s} F_sr tr[G_r τ_a† G_s τ_b]
//! ```
//!
//! For a Kraus operator K this reduces to S_ab = K_a conj(K_b), so S is the
//! sum of vec(K) vec(K)† over the Kraus set.

use std::sync::OnceLock;

use thiserror::Error;

use crate::channel::{correlated_channel, Channel, ChannelError, KrausSet};
use crate::linalg::{eig_hermitian, pauli, ComplexMatrix, LinalgError, RealMatrix, C64};
use crate::noise::{NoiseError, NoiseParams, Oun};

/// Default finite-difference step for Ḟ.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Choi eigenvalues above this count towards the Kraus rank.
pub const KRAUS_RANK_CUTOFF: f64 = 1e-10;

/// Choi eigenvalues below this mean the map is not completely positive.
pub const NOT_CP_THRESHOLD: f64 = -1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("unsupported Hilbert-space dimension {0}; expected 2 or 4")]
    UnsupportedDimension(usize),
    #[error("unsupported qubit count {0}; expected 1 or 2")]
    UnsupportedQubits(usize),
    #[error("dimension mismatch: basis acts on {basis}, map on {map}")]
    DimensionMismatch { basis: usize, map: usize },
    #[error("transfer matrix singular at t = {t}: {source}")]
    Singular { t: f64, source: LinalgError },
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
    #[error("Choi matrix is not positive (min eigenvalue {min_eigenvalue:e}); map is not completely positive")]
    NotCp { min_eigenvalue: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Orthonormal Hermitian operator basis with G₀ = I/√d.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of elements, d².
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Gram matrix tr[G_m G_n].
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.len();
        ComplexMatrix::from_fn(n, n, |m, k| self.elements[m].trace_product(&self.elements[k]))
    }

    /// X = Σ_k x_k G_k.
    pub fn combine(&self, coeffs: impl Iterator<Item = f64>) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (g, x) in self.elements.iter().zip(coeffs) {
            if x != 0.0 {
                out = &out + &g.scale_real(x);
            }
        }
        out
    }
}

/// Normalized Pauli products, row-major over (i, j): index 4i + j for two qubits.
pub fn pauli_basis(n_qubits: usize) -> Result<OperatorBasis, MapError> {
    match n_qubits {
        1 => Ok(OperatorBasis {
            dim: 2,
            elements: (0..4).map(|i| pauli(i).scale_real(std::f64::consts::FRAC_1_SQRT_2)).collect(),
        }),
        2 => {
            let elements = (0..16).map(|k| pauli(k / 4).kron(&pauli(k % 4)).scale_real(0.5)).collect();
            Ok(OperatorBasis { dim: 4, elements })
        }
        n => Err(MapError::UnsupportedQubits(n)),
    }
}

/// Pauli-pair index → how dephasing along z acts on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotClass {
    /// Both factors in {I, Z}: untouched by dephasing.
    Unit,
    /// Exactly one factor in {X, Y}: decays with p.
    SingleFlip,
    /// Both factors in {X, Y}: decays with τ(μ).
    DoubleFlip,
}

/// Classifies two-qubit basis index k = 4i + j.
pub fn slot_class(k: usize) -> SlotClass {
    let flip = |i: usize| i == 1 || i == 2;
    match (flip(k / 4), flip(k % 4)) {
        (false, false) => SlotClass::Unit,
        (true, true) => SlotClass::DoubleFlip,
        _ => SlotClass::SingleFlip,
    }
}

/// Real N×N matrix F_kl = tr[G_k E(G_l)].
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    matrix: RealMatrix,
    dim: usize,
    time: Option<f64>,
}

impl TransferMatrix {
    pub fn from_matrix(matrix: RealMatrix, dim: usize) -> Self {
        Self { matrix, dim, time: None }
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    /// Hilbert-space dimension d (the matrix is d² × d²).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn time(&self) -> Option<f64> {
        self.time
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.matrix[(k, l)]
    }

    /// Accessible-state volume det F.
    pub fn volume(&self) -> f64 {
        self.matrix.det()
    }

    /// max |F₀ₗ − δ₀ₗ|; zero exactly when the map preserves the trace.
    pub fn trace_preservation_residual(&self) -> f64 {
        self.matrix
            .row(0)
            .iter()
            .enumerate()
            .map(|(l, &x)| (x - if l == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }
}

/// Transfer matrix of an arbitrary linear map given by its action.
pub fn transfer_matrix_of(basis: &OperatorBasis, map: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> TransferMatrix {
    let n = basis.len();
    let images: Vec<ComplexMatrix> = basis.elements.iter().map(&map).collect();
    let matrix = RealMatrix::from_fn(n, n, |k, l| basis.elements[k].trace_product(&images[l]).re);
    TransferMatrix::from_matrix(matrix, basis.dim)
}

pub fn transfer_matrix(channel: &Channel, basis: &OperatorBasis) -> Result<TransferMatrix, MapError> {
    if channel.dim() != basis.dim {
        return Err(MapError::DimensionMismatch { basis: basis.dim, map: channel.dim() });
    }
    Ok(transfer_matrix_of(basis, |g| channel.apply_operator(g).expect("dimension checked")))
}

fn two_qubit_basis() -> &'static OperatorBasis {
    static BASIS: OnceLock<OperatorBasis> = OnceLock::new();
    BASIS.get_or_init(|| pauli_basis(2).expect("two-qubit basis"))
}

/// F(t) of the two-qubit correlated channel of `noise` in the Pauli basis.
pub fn correlated_transfer_matrix(noise: &NoiseParams, mu: f64, t: f64) -> Result<TransferMatrix, MapError> {
    let channel = correlated_channel(noise, mu, t)?;
    Ok(transfer_matrix(&channel, two_qubit_basis())?.with_time(t))
}

/// L(t) of the two-qubit correlated channel of `noise` by finite differences.
pub fn correlated_generator(noise: &NoiseParams, mu: f64, t: f64, h: f64) -> Result<RealMatrix, MapError> {
    generator(|s| correlated_transfer_matrix(noise, mu, s), t, h)
}

/// L(t) = Ḟ(t) F(t)⁻¹.
///
/// Ḟ uses a central difference, or a forward difference when t < h so the
/// sampler is never called at negative time. F(t) is declared singular when
/// its LU factorization meets a pivot of magnitude ≤ 1e-12.
pub fn generator<S>(sampler: S, t: f64, h: f64) -> Result<RealMatrix, MapError>
where
    S: Fn(f64) -> Result<TransferMatrix, MapError>,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(MapError::BadStep(h));
    }
    let f = sampler(t)?;
    let f_dot = if t < h {
        (sampler(t + h)?.matrix() - f.matrix()).scale(1.0 / h)
    } else {
        (sampler(t + h)?.matrix() - sampler(t - h)?.matrix()).scale(0.5 / h)
    };
    let inv = f.matrix().inverse().map_err(|source| MapError::Singular { t, source })?;
    Ok(&f_dot * &inv)
}

/// Closed-form generator of correlated OUN dephasing in the two-qubit Pauli basis.
///
/// Diagonal: 0 on unit slots, γ_p = −(G/2)(1 − e^{−gt}) on single-flip slots,
/// γ_τ = −G(1 − e^{−gt})(1 − μ)p²/τ on double-flip slots.
pub fn analytic_l_correlated_oun(t: f64, relaxation: f64, g: f64, mu: f64) -> Result<RealMatrix, MapError> {
    crate::channel::check_mu(mu)?;
    let oun = Oun::new(relaxation, g)?;
    let p = oun.p(t)?;
    let tau = mu + (1.0 - mu) * p * p;
    let damp = -(-g * t).exp_m1();
    let gamma_p = -0.5 * relaxation * damp;
    let gamma_tau = -relaxation * damp * (1.0 - mu) * p * p / tau;
    let diag: Vec<f64> = (0..16)
        .map(|k| match slot_class(k) {
            SlotClass::Unit => 0.0,
            SlotClass::SingleFlip => gamma_p,
            SlotClass::DoubleFlip => gamma_tau,
        })
        .collect();
    Ok(RealMatrix::from_diag(&diag))
}

/// Choi matrix in the computational basis τ_a = |i⟩⟨j|, a = i·d + j.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    matrix: ComplexMatrix,
    dim: usize,
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Hilbert-space dimension d of the underlying map.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.matrix[(a, b)]
    }

    /// Choi matrix in the basis H_a = Σ_b W_ab τ_b, i.e. W̄ S Wᵀ.
    pub fn in_basis(&self, w: &ComplexMatrix) -> Result<ChoiMatrix, MapError> {
        let n = self.matrix.rows();
        if w.rows() != n || w.cols() != n {
            return Err(MapError::Linalg(LinalgError::Shape(format!(
                "basis change must be {n}x{n}, got {}x{}",
                w.rows(),
                w.cols()
            ))));
        }
        let matrix = &(&w.conj() * &self.matrix) * &w.transpose();
        Ok(ChoiMatrix { matrix, dim: self.dim })
    }
}

/// Choi matrix from F using the index form S_{(ij),(kl)} = Σ_r (G_r)_{lj} (M_r)_{ik}, M_r = Σ_s F_sr G_s.
pub fn choi(f: &TransferMatrix, basis: &OperatorBasis) -> ChoiMatrix {
    let d = basis.dim;
    let n = basis.len();
    let fm = f.matrix();
    let images: Vec<ComplexMatrix> = (0..n).map(|r| basis.combine((0..n).map(|s| fm[(s, r)]))).collect();
    let mut s = ComplexMatrix::zeros(n, n);
    for (g, m) in basis.elements.iter().zip(&images) {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mik = m[(i, k)];
                    if mik == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for l in 0..d {
                        s[(i * d + j, k * d + l)] += g[(l, j)] * mik;
                    }
                }
            }
        }
    }
    ChoiMatrix { matrix: s, dim: d }
}

/// Choi matrix by literal evaluation of Σ_{r,s} F_sr tr[G_r H_a† G_s H_b] over an arbitrary operator basis {H_a}.
pub fn choi_literal(f: &TransferMatrix, basis: &OperatorBasis, h: &[ComplexMatrix]) -> ChoiMatrix {
    let n = basis.len();
    let fm = f.matrix();
    let h_adj: Vec<ComplexMatrix> = h.iter().map(|x| x.adjoint()).collect();
    let mut s = ComplexMatrix::zeros(h.len(), h.len());
    for r in 0..n {
        for sidx in 0..n {
            let w = fm[(sidx, r)];
            if w == 0.0 {
                continue;
            }
            for a in 0..h.len() {
                let left = &basis.elements[r] * &h_adj[a];
                let left = &left * &basis.elements[sidx];
                for b in 0..h.len() {
                    s[(a, b)] += left.trace_product(&h[b]) * w;
                }
            }
        }
    }
    ChoiMatrix { matrix: s, dim: basis.dim }
}

/// Computational basis τ_a = |i⟩⟨j| for a = i·d + j.
pub fn computational_basis(d: usize) -> Vec<ComplexMatrix> {
    (0..d * d)
        .map(|a| {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(a / d, a % d)] = C64::new(1.0, 0.0);
            m
        })
        .collect()
}

/// Σ_K vec(K) vec(K)†.
pub fn choi_from_kraus(kraus: &KrausSet) -> ChoiMatrix {
    let d = kraus.dim();
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for k in kraus.normalized().operators() {
        s = &s + &ComplexMatrix::outer(k.as_slice());
    }
    ChoiMatrix { matrix: s, dim: d }
}

/// Kraus operators √λ · unvec(v) from each Choi eigenpair with λ > 1e-10.
pub fn kraus_from_choi(s: &ChoiMatrix) -> Result<KrausSet, MapError> {
    let eig = eig_hermitian(s.matrix())?;
    let min = eig.min_value();
    if min < NOT_CP_THRESHOLD {
        return Err(MapError::NotCp { min_eigenvalue: min });
    }
    let d = s.dim;
    let n = d * d;
    let operators: Vec<ComplexMatrix> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > KRAUS_RANK_CUTOFF)
        .map(|(k, &l)| {
            let root = l.sqrt();
            ComplexMatrix::from_vec(d, d, (0..n).map(|a| eig.vectors[(a, k)] * root).collect()).expect("d*d entries")
        })
        .collect();
    if operators.is_empty() {
        return Err(MapError::NotCp { min_eigenvalue: eig.values.first().copied().unwrap_or(0.0) });
    }
    Ok(KrausSet::new(operators)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        correlated_dephasing_channel, correlated_nmad_channel, fully_correlated_nmad_kraus, single_qubit_dephasing,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn multiset_eq(a: &[f64], b: &[f64], tol: f64) -> bool {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn basis_is_orthonormal() {
        for n in [1, 2] {
            let basis = pauli_basis(n).unwrap();
            let d = basis.dim();
            assert_eq!(basis.len(), d * d);
            assert!(basis.gram().max_abs_diff(&ComplexMatrix::identity(d * d)) < 1e-12);
            assert!(basis.elements().iter().all(|g| g.hermiticity_residual() == 0.0));
            let g0 = ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt());
            assert!(basis.elements()[0].max_abs_diff(&g0) < 1e-15);
        }
        assert!(pauli_basis(3).is_err());
    }

    #[test]
    fn two_qubit_basis_traces() {
        let basis = pauli_basis(2).unwrap();
        assert!((basis.elements()[0].trace() - C64::new(2.0, 0.0)).norm() < 1e-15);
        for g in &basis.elements()[1..] {
            assert!(g.trace().norm() < 1e-15);
        }
    }

    #[test]
    fn single_qubit_dephasing_transfer_matrix() {
        let basis = pauli_basis(1).unwrap();
        let p = 0.37;
        let ch = Channel::from_kraus(single_qubit_dephasing(p).unwrap());
        let f = transfer_matrix(&ch, &basis).unwrap();
        assert!(f.matrix().max_abs_diff(&RealMatrix::from_diag(&[1.0, p, p, 1.0])) < 1e-15);
    }

    #[test]
    fn identity_channel_transfer_matrix_is_identity() {
        let basis = pauli_basis(2).unwrap();
        let f = transfer_matrix(&Channel::identity(4), &basis).unwrap();
        assert!(f.matrix().max_abs_diff(&RealMatrix::identity(16)) < 1e-15);
    }

    #[test]
    fn correlated_dephasing_transfer_matrix_is_diagonal() {
        let basis = pauli_basis(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let p = rng.gen_range(-1.0..=1.0);
            let mu = rng.gen_range(0.0..=1.0);
            let tau = mu + (1.0 - mu) * p * p;
            let f = transfer_matrix(&correlated_dephasing_channel(p, mu).unwrap(), &basis).unwrap();
            let diag = f.matrix().diag();
            let off = f.matrix().max_abs_diff(&RealMatrix::from_diag(&diag));
            assert!(off < 1e-15);
            let mut expected = vec![1.0; 4];
            expected.extend([p; 8]);
            expected.extend([tau; 4]);
            assert!(multiset_eq(&diag, &expected, 1e-14));
            for (k, &x) in diag.iter().enumerate() {
                let want = match slot_class(k) {
                    SlotClass::Unit => 1.0,
                    SlotClass::SingleFlip => p,
                    SlotClass::DoubleFlip => tau,
                };
                assert!((x - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn trace_preservation_reads_first_row() {
        let basis = pauli_basis(2).unwrap();
        let ch = correlated_nmad_channel(0.4, 0.3).unwrap();
        let f = transfer_matrix(&ch, &basis).unwrap();
        assert!(f.trace_preservation_residual() < 1e-14);
        let leaky = transfer_matrix_of(&basis, |x| ch.apply_operator(x).unwrap().scale_real(0.9));
        assert!(leaky.trace_preservation_residual() > 0.05);
    }

    #[test]
    fn identity_generator_is_zero() {
        let basis = pauli_basis(2).unwrap();
        let sampler = |t: f64| Ok(transfer_matrix(&Channel::identity(4), &basis)?.with_time(t));
        for t in [0.0, 0.5, 3.0] {
            let l = generator(sampler, t, DEFAULT_STEP).unwrap();
            assert!(l.frobenius_norm() < 1e-12);
        }
        assert!(matches!(generator(sampler, 1.0, 0.0), Err(MapError::BadStep(_))));
    }

    #[test]
    fn singular_transfer_matrix_is_reported() {
        let basis = pauli_basis(2).unwrap();
        let sampler = |_t: f64| transfer_matrix(&correlated_dephasing_channel(0.0, 0.0)?, &basis);
        assert!(matches!(generator(sampler, 1.0, DEFAULT_STEP), Err(MapError::Singular { .. })));
    }

    #[test]
    fn analytic_generator_limits() {
        let zero = analytic_l_correlated_oun(0.0, 1.0, 0.05, 0.4).unwrap();
        assert_eq!(zero.frobenius_norm(), 0.0);

        let full = analytic_l_correlated_oun(3.0, 1.0, 0.05, 1.0).unwrap();
        for (k, x) in full.diag().into_iter().enumerate() {
            if slot_class(k) == SlotClass::DoubleFlip {
                assert_eq!(x, 0.0);
            }
        }

        let markov = analytic_l_correlated_oun(2.0, 0.8, 1e4, 0.5).unwrap();
        assert!((markov[(1, 1)] + 0.4).abs() < 1e-12);

        let uncorr = analytic_l_correlated_oun(2.5, 0.7, 0.3, 0.0).unwrap();
        assert!((uncorr[(5, 5)] - 2.0 * uncorr[(1, 1)]).abs() < 1e-14);
    }

    #[test]
    fn choi_matches_literal_formula() {
        let basis = pauli_basis(2).unwrap();
        let tau = computational_basis(4);
        let f = transfer_matrix(&correlated_nmad_channel(0.3, 0.6).unwrap(), &basis).unwrap();
        let fast = choi(&f, &basis);
        let slow = choi_literal(&f, &basis, &tau);
        assert!(fast.matrix().max_abs_diff(slow.matrix()) < 1e-13);
    }

    #[test]
    fn choi_of_kraus_set_matches_transfer_route() {
        let basis = pauli_basis(2).unwrap();
        let k = fully_correlated_nmad_kraus(0.55).unwrap();
        let f = transfer_matrix(&Channel::from_kraus(k.clone()), &basis).unwrap();
        assert!(choi(&f, &basis).matrix().max_abs_diff(choi_from_kraus(&k).matrix()) < 1e-13);
    }

    #[test]
    fn identity_choi_gives_single_kraus() {
        let basis = pauli_basis(2).unwrap();
        let f = transfer_matrix(&Channel::identity(4), &basis).unwrap();
        let k = kraus_from_choi(&choi(&f, &basis)).unwrap();
        assert_eq!(k.operators().len(), 1);
        let op = &k.operators()[0];
        let phase = op[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(op.max_abs_diff(&ComplexMatrix::identity(4).scale(phase)) < 1e-12);
    }

    #[test]
    fn complex_unitary_round_trip() {
        let basis = pauli_basis(1).unwrap();
        let theta: f64 = 0.7;
        let u = ComplexMatrix::from_diag(&[C64::new(1.0, 0.0), C64::from_polar(1.0, theta)]);
        let ch = Channel::from_kraus(KrausSet::new(vec![u]).unwrap());
        let f = transfer_matrix(&ch, &basis).unwrap();
        let k = kraus_from_choi(&choi(&f, &basis)).unwrap();
        let f2 = transfer_matrix(&Channel::from_kraus(k), &basis).unwrap();
        assert!(f.matrix().max_abs_diff(f2.matrix()) < 1e-12);
    }

    #[test]
    fn non_cp_choi_is_rejected() {
        let basis = pauli_basis(1).unwrap();
        // Transpose map: positive but not completely positive.
        let f = transfer_matrix_of(&basis, |x| x.transpose());
        assert!(matches!(kraus_from_choi(&choi(&f, &basis)), Err(MapError::NotCp { .. })));
    }

    #[test]
    fn basis_change_with_identity_is_conjugation_free() {
        let basis = pauli_basis(2).unwrap();
        let f = transfer_matrix(&correlated_nmad_channel(0.2, 0.8).unwrap(), &basis).unwrap();
        let s = choi(&f, &basis);
        let w = s.in_basis(&ComplexMatrix::identity(16)).unwrap();
        assert!(w.matrix().max_abs_diff(s.matrix()) < 1e-15);
    }

    #[test]
    fn basis_change_agrees_with_literal_formula() {
        let basis = pauli_basis(1).unwrap();
        let tau = computational_basis(2);
        let h: Vec<ComplexMatrix> = basis.elements().to_vec();
        let w = ComplexMatrix::from_fn(4, 4, |a, b| h[a].trace_product(&tau[b].adjoint()));
        let ch = Channel::from_kraus(crate::channel::nmad_single_qubit(0.35).unwrap());
        let f = transfer_matrix(&ch, &basis).unwrap();
        let direct = choi_literal(&f, &basis, &h);
        let changed = choi(&f, &basis).in_basis(&w).unwrap();
        assert!(direct.matrix().max_abs_diff(changed.matrix()) < 1e-13);
    }
}
