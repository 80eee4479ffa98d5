// SPDX-License-Identifier: Apache-2.0

//! Six-qubit concatenated code under correlated Z noise.
//!
//! The outer three-qubit phase-flip code (|+++⟩, |−−−⟩) is built on the inner
//! two-qubit repetition code (|00⟩, |11⟩), giving codewords
//! (|00⟩ ± |11⟩)^{⊗3} / 2√2. Qubit 1 is the most significant bit of a basis
//! index and the leftmost letter of an error string.
//!
//! A Z string acts diagonally, so every codeword matrix element is an exact
//! integer sum divided by 8. Detectability and the Knill–Laflamme check are
//! therefore decided in integer arithmetic.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::channel::{check_domain, check_mu, dephasing_weights, ChannelError};
use crate::measures::{MeasureError, TimeSeries};
use crate::noise::NoiseParams;

pub const N_QUBITS: usize = 6;
pub const N_STRINGS: usize = 1 << N_QUBITS;

/// Brute-force spot checks along a success-probability series must agree this well.
pub const SPOT_CHECK_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QecError {
    #[error("invalid error string '{0}': expected six letters from {{I, Z}}")]
    BadString(String),
    #[error("the concatenated-code model covers dephasing noise only; {0} is not supported")]
    Unsupported(&'static str),
    #[error("closed form and brute force disagree at t = {t}: {closed} vs {brute}")]
    Inconsistent { t: f64, closed: f64, brute: f64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Word over {I, Z}; bit 5 is qubit 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ErrorString(u8);

impl ErrorString {
    pub const IDENTITY: ErrorString = ErrorString(0);

    pub fn from_bits(bits: u8) -> Self {
        assert!((bits as usize) < N_STRINGS, "error string has six letters");
        ErrorString(bits)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = ErrorString> {
        (0..N_STRINGS as u8).map(ErrorString)
    }

    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    /// True when qubit `k` (1-based, left to right) carries Z.
    pub fn has_z(self, k: usize) -> bool {
        (self.0 >> (N_QUBITS - k)) & 1 == 1
    }

    /// Letter index on qubit k: 0 for I, 1 for Z.
    fn letter(self, k: usize) -> usize {
        self.has_z(k) as usize
    }

    /// Product of two Z strings (Z strings are Hermitian, so E_a† E_b = E_a E_b).
    pub fn compose(self, other: ErrorString) -> ErrorString {
        ErrorString(self.0 ^ other.0)
    }

    /// Parity of Z letters on each inner pair (qubits 1-2, 3-4, 5-6).
    pub fn pair_parities(self) -> [bool; 3] {
        [0, 1, 2].map(|k| self.has_z(2 * k + 1) ^ self.has_z(2 * k + 2))
    }

    /// Sign of this string on basis state `index` (qubit 1 = MSB).
    pub fn sign_on(self, index: usize) -> i32 {
        if ((self.0 as usize) & index).count_ones().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for ErrorString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 1..=N_QUBITS {
            f.write_str(if self.has_z(k) { "Z" } else { "I" })?;
        }
        Ok(())
    }
}

impl FromStr for ErrorString {
    type Err = QecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != N_QUBITS {
            return Err(QecError::BadString(s.to_string()));
        }
        let mut bits = 0u8;
        for ch in s.chars() {
            bits <<= 1;
            match ch {
                'I' | 'i' => {}
                'Z' | 'z' => bits |= 1,
                _ => return Err(QecError::BadString(s.to_string())),
            }
        }
        Ok(ErrorString(bits))
    }
}

/// Codeword with amplitudes stored as integers over the common 1/(2√2) scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    amplitudes: [i32; N_STRINGS],
}

/// Codeword amplitudes are `integer / AMPLITUDE_DENOMINATOR`.
pub const AMPLITUDE_DENOMINATOR: f64 = 2.0 * std::f64::consts::SQRT_2;

impl Codeword {
    pub fn integer_amplitudes(&self) -> &[i32; N_STRINGS] {
        &self.amplitudes
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|&a| a as f64 / AMPLITUDE_DENOMINATOR).collect()
    }

    pub fn support(&self) -> usize {
        self.amplitudes.iter().filter(|&&a| a != 0).count()
    }

    /// 8·⟨self|E|other⟩, exact.
    pub fn scaled_element(&self, e: ErrorString, other: &Codeword) -> i32 {
        (0..N_STRINGS).map(|x| self.amplitudes[x] * e.sign_on(x) * other.amplitudes[x]).sum()
    }

    /// Amplitudes after applying X on each qubit set in `mask` (qubit 1 = MSB).
    pub fn bit_flipped(&self, mask: usize) -> Codeword {
        let mut amplitudes = [0; N_STRINGS];
        for (x, &a) in self.amplitudes.iter().enumerate() {
            amplitudes[x ^ mask] = a;
        }
        Codeword { amplitudes }
    }
}

/// Logical codewords from the tensor construction (|00⟩ ± |11⟩)^{⊗3}.
pub fn build_codewords() -> (Codeword, Codeword) {
    // Inner logical states as 2-qubit amplitude vectors over |00⟩, |01⟩, |10⟩, |11⟩.
    let plus = [1, 0, 0, 1];
    let minus = [1, 0, 0, -1];
    let tensor3 = |v: [i32; 4]| {
        let mut out = [0; N_STRINGS];
        for (x, slot) in out.iter_mut().enumerate() {
            *slot = v[(x >> 4) & 3] * v[(x >> 2) & 3] * v[x & 3];
        }
        Codeword { amplitudes: out }
    };
    (tensor3(plus), tensor3(minus))
}

/// Codewords from an explicit ket listing: the eight repeated-pair kets with signs.
pub fn codewords_from_listing() -> (Codeword, Codeword) {
    const KETS: [(&str, i32); 8] = [
        ("000000", 1),
        ("000011", -1),
        ("001100", -1),
        ("001111", 1),
        ("110000", -1),
        ("110011", 1),
        ("111100", 1),
        ("111111", -1),
    ];
    let mut zero = [0; N_STRINGS];
    let mut one = [0; N_STRINGS];
    for (ket, sign) in KETS {
        let idx = usize::from_str_radix(ket, 2).expect("binary literal");
        zero[idx] = 1;
        one[idx] = sign;
    }
    (Codeword { amplitudes: zero }, Codeword { amplitudes: one })
}

/// ⟨0|E|0⟩ = ⟨1|E|1⟩ and ⟨0|E|1⟩ = ⟨1|E|0⟩ = 0.
pub fn is_detectable(e: ErrorString, codewords: &(Codeword, Codeword)) -> bool {
    let (zero, one) = codewords;
    zero.scaled_element(e, zero) == one.scaled_element(e, one)
        && zero.scaled_element(e, one) == 0
        && one.scaled_element(e, zero) == 0
}

/// Undetectable, detectable and correctable error strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorClassification {
    pub undetectable: Vec<ErrorString>,
    pub detectable: Vec<ErrorString>,
    pub correctable: Vec<ErrorString>,
}

/// All strings in (weight, left-to-right I < Z) order.
pub fn canonical_order() -> Vec<ErrorString> {
    let mut all: Vec<ErrorString> = ErrorString::all().collect();
    all.sort_by_key(|e| (e.weight(), e.0));
    all
}

/// Pairwise condition: E_a† E_b detectable for every a, b in the set.
pub fn satisfies_kl(set: &[ErrorString], codewords: &(Codeword, Codeword)) -> bool {
    set.iter().all(|&a| set.iter().all(|&b| is_detectable(a.compose(b), codewords)))
}

/// Strings outside `set` that could be added without breaking the pairwise condition.
pub fn extensions(set: &[ErrorString], codewords: &(Codeword, Codeword)) -> Vec<ErrorString> {
    canonical_order()
        .into_iter()
        .filter(|e| !set.contains(e))
        .filter(|&e| is_detectable(e.compose(e), codewords) && set.iter().all(|&a| is_detectable(a.compose(e), codewords)))
        .collect()
}

/// Detectability for all 64 strings and a greedy correctable set in canonical order.
pub fn classify_errors(codewords: &(Codeword, Codeword)) -> ErrorClassification {
    let (detectable, undetectable): (Vec<_>, Vec<_>) =
        canonical_order().into_iter().partition(|&e| is_detectable(e, codewords));
    let mut correctable: Vec<ErrorString> = Vec::new();
    for e in canonical_order() {
        if correctable.iter().all(|&a| is_detectable(a.compose(e), codewords)) {
            correctable.push(e);
        }
    }
    ErrorClassification { undetectable, detectable, correctable }
}

/// The 32 reference correctable strings.
pub const REFERENCE_CORRECTABLE: [&str; 32] = [
    "IIIIII", "ZIIIII", "IZIIII", "IIZIII", "IIIZII", "IIIIZI", "IIIIIZ", "ZZIIII", "IIZZII", "IIIIZZ", "ZZZIII",
    "ZZIZII", "ZZIIZI", "ZZIIIZ", "ZIZZII", "ZIIIZZ", "IZZZII", "IZIIZZ", "IIZZZI", "IIZZIZ", "IIZIZZ", "IIIZZZ",
    "ZZZZII", "ZZIIZZ", "IIZZZZ", "ZZZZZI", "ZZZZIZ", "ZZZIZZ", "ZZIZZZ", "ZIZZZZ", "IZZZZZ", "ZZZZZZ",
];

/// The eight reference undetectable strings.
pub const REFERENCE_UNDETECTABLE: [&str; 8] =
    ["ZIZIZI", "ZIZIIZ", "ZIIZZI", "ZIIZIZ", "IZZIZI", "IZZIIZ", "IZIZZI", "IZIZIZ"];

pub fn parse_list(list: &[&str]) -> Vec<ErrorString> {
    list.iter().map(|s| s.parse().expect("reference strings are well formed")).collect()
}

fn cached_correctable() -> &'static [ErrorString] {
    static SET: OnceLock<Vec<ErrorString>> = OnceLock::new();
    SET.get_or_init(|| classify_errors(&build_codewords()).correctable)
}

/// Single-qubit probabilities (p₀, p₃) indexed by letter.
fn singles(p: f64) -> Result<[f64; 2], QecError> {
    let (q0, q3) = dephasing_weights(p)?;
    Ok([q0, q3])
}

fn joint(q: &[f64; 2], mu: f64, i: usize, j: usize) -> f64 {
    (1.0 - mu) * q[i] * q[j] + if i == j { mu * q[i] } else { 0.0 }
}

/// Chained probability p_{e₁e₂} p_{e₂e₃} p_{e₃e₄} p_{e₄e₅} p_{e₅e₆} · p_{e₆}.
pub fn error_probability(e: ErrorString, p: f64, mu: f64) -> Result<f64, QecError> {
    let mu = check_mu(mu)?;
    let q = singles(p)?;
    let chain: f64 = (1..N_QUBITS).map(|k| joint(&q, mu, e.letter(k), e.letter(k + 1))).product();
    Ok(chain * q[e.letter(N_QUBITS)])
}

/// Normalized Markov-chain variant p_{e₁} Π p_{e_{k+1} | e_k}, with p_{j|i} = (1 − μ) p_j + μ δ_ij.
pub fn conditional_chain_probability(e: ErrorString, p: f64, mu: f64) -> Result<f64, QecError> {
    let mu = check_mu(mu)?;
    let q = singles(p)?;
    let cond = |i: usize, j: usize| (1.0 - mu) * q[j] + if i == j { mu } else { 0.0 };
    let chain: f64 = (1..N_QUBITS).map(|k| cond(e.letter(k), e.letter(k + 1))).product();
    Ok(q[e.letter(1)] * chain)
}

/// Σ of the chained probability over all 64 strings; below 1 whenever |p| < 1.
pub fn total_mass(p: f64, mu: f64) -> Result<f64, QecError> {
    ErrorString::all().map(|e| error_probability(e, p, mu)).sum()
}

/// Σ over the correctable set of the chained probability.
pub fn success_probability_bruteforce(p: f64, mu: f64) -> Result<f64, QecError> {
    cached_correctable().iter().map(|&e| error_probability(e, p, mu)).sum()
}

/// Degree-10 polynomial closed form of the success probability.
pub fn success_probability_closed(p: f64, mu: f64) -> Result<f64, QecError> {
    let p = check_domain("p", p, -1.0, 1.0, "[-1, 1]")?;
    let mu = check_mu(mu)?;
    let p2 = p * p;
    let p4 = p2 * p2;
    let p6 = p4 * p2;
    let p8 = p4 * p4;
    let p10 = p8 * p2;
    let m2 = mu * mu;
    let m3 = m2 * mu;
    let m4 = m2 * m2;
    let total = 2.0 + 4.0 * p10 * (mu - 1.0).powi(4) + 3.0 * mu - m3
        + p8 * (26.0 - 47.0 * mu + 37.0 * m3 - 16.0 * m4)
        + 2.0 * p2 * (10.0 + 11.0 * mu + 7.0 * m3 + 2.0 * m4)
        + 2.0 * p6 * (12.0 + mu * (-7.0 + 12.0 * mu) * (-3.0 + m2))
        - 4.0 * p4 * (-13.0 + mu + m2 * (-12.0 + mu * (5.0 + 4.0 * mu)));
    Ok(total / 128.0)
}

/// Success probability divided by the total chained mass.
pub fn success_probability_normalized(p: f64, mu: f64) -> Result<f64, QecError> {
    Ok(success_probability_closed(p, mu)? / total_mass(p, mu)?)
}

/// P_success(p(t), μ) along a grid, with five brute-force spot checks.
pub fn success_vs_time(noise: &NoiseParams, mu: f64, grid: &[f64], normalized: bool) -> Result<TimeSeries, QecError> {
    if !noise.is_unital() {
        return Err(QecError::Unsupported(noise.name()));
    }
    if grid.is_empty() {
        return Err(MeasureError::EmptyGrid.into());
    }
    let eval = |p: f64| {
        if normalized {
            success_probability_normalized(p, mu)
        } else {
            success_probability_closed(p, mu)
        }
    };
    let ps: Vec<f64> = grid
        .iter()
        .map(|&t| noise.p(t).map(|p| p.clamp(-1.0, 1.0)).map_err(|e| QecError::Channel(e.into())))
        .collect::<Result<_, _>>()?;
    let values: Vec<f64> = ps.iter().map(|&p| eval(p)).collect::<Result<_, _>>()?;
    let n = grid.len();
    for k in 0..5 {
        let idx = k * (n - 1) / 4;
        let brute = success_probability_bruteforce(ps[idx], mu)?;
        let brute = if normalized { brute / total_mass(ps[idx], mu)? } else { brute };
        if (brute - values[idx]).abs() > SPOT_CHECK_TOL {
            return Err(QecError::Inconsistent { t: grid[idx], closed: values[idx], brute });
        }
    }
    Ok(TimeSeries::new(grid.to_vec(), values, "p_success")?)
}
