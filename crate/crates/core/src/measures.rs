// SPDX-License-Identifier: Apache-2.0

//! Non-Markovianity indicators on sampled trajectories.
//!
//! Revival-type measures (trace distance, concurrence, accessible volume)
//! integrate the positive part of a discrete derivative: on a grid this is the
//! sum of forward increments above [`INCREMENT_THRESHOLD`], grouped into
//! maximal intervals of growth. The self-similarity measure compares the
//! generator L(t) with the best constant dephasing generator.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{correlated_channel, ChannelError};
use crate::linalg::{eig_hermitian, pauli, ComplexMatrix, DensityMatrix, LinalgError, RealMatrix, StateError};
use crate::maps::{correlated_generator, slot_class, MapError, SlotClass, DEFAULT_STEP};
use crate::noise::NoiseParams;

/// Forward increments at or below this are treated as flat.
pub const INCREMENT_THRESHOLD: f64 = 1e-12;

/// Minimum grid size for the revival measures.
pub const MIN_MEASURE_POINTS: usize = 100;

/// Minimum number of grid intervals for the self-similarity integral.
pub const MIN_SSS_INTERVALS: usize = 200;

/// Eigenvalues below this fraction of the largest are zeroed inside concurrence.
const CONCURRENCE_REL_CUTOFF: f64 = 64.0 * f64::EPSILON;

const NM_MAX_ITERS: u64 = 4000;
const NM_SD_TOL: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("time grid is empty")]
    EmptyGrid,
    #[error("time grid needs at least {needed} points, got {got}")]
    GridTooCoarse { needed: usize, got: usize },
    #[error("invalid time series: {0}")]
    BadSeries(String),
    #[error("states differ in dimension ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("concurrence needs a two-qubit state, got dimension {0}")]
    NotTwoQubit(usize),
    #[error("optimizer failed: {0}")]
    Optimizer(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Uniform grid of `points` samples on [0, t_max].
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>, MeasureError> {
    if points < 2 {
        return Err(MeasureError::GridTooCoarse { needed: 2, got: points });
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(MeasureError::BadSeries(format!("t_max must be positive, got {t_max}")));
    }
    let step = t_max / (points - 1) as f64;
    Ok((0..points).map(|k| if k + 1 == points { t_max } else { k as f64 * step }).collect())
}

/// Sampled scalar trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    label: String,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Result<Self, MeasureError> {
        if times.len() != values.len() {
            return Err(MeasureError::BadSeries(format!("{} times but {} values", times.len(), values.len())));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MeasureError::BadSeries("times must be strictly increasing".into()));
        }
        Ok(Self { times, values, label: label.into() })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Evaluates `f` at every grid time, in parallel, preserving order.
    pub fn sample<F>(grid: &[f64], label: impl Into<String>, f: F) -> Result<Self, MeasureError>
    where
        F: Fn(f64) -> Result<f64, MeasureError> + Sync,
    {
        let values = grid.par_iter().map(|&t| f(t)).collect::<Result<Vec<_>, _>>()?;
        Self::new(grid.to_vec(), values, label)
    }

    /// Maximal intervals [t_i, t_j] over which every forward increment exceeds the threshold.
    pub fn growth_intervals(&self) -> Vec<GrowthInterval> {
        let mut out: Vec<GrowthInterval> = Vec::new();
        let mut open = false;
        for k in 0..self.len().saturating_sub(1) {
            let inc = self.values[k + 1] - self.values[k];
            if inc > INCREMENT_THRESHOLD {
                if open {
                    let last = out.last_mut().expect("open interval");
                    last.end = self.times[k + 1];
                    last.increase += inc;
                } else {
                    out.push(GrowthInterval { start: self.times[k], end: self.times[k + 1], increase: inc });
                    open = true;
                }
            } else {
                open = false;
            }
        }
        out
    }

    /// Per-sample flag: the forward increment from this sample is positive.
    pub fn growth_flags(&self) -> Vec<bool> {
        (0..self.len())
            .map(|k| k + 1 < self.len() && self.values[k + 1] - self.values[k] > INCREMENT_THRESHOLD)
            .collect()
    }
}

/// One interval of growth and the total increase over it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthInterval {
    pub start: f64,
    pub end: f64,
    pub increase: f64,
}

/// Integrated positive variation with its per-interval breakdown.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureResult {
    pub value: f64,
    pub detail: Vec<GrowthInterval>,
}

/// Σ of positive forward increments, i.e. ∫_{dX/dt>0} dX for the piecewise-linear interpolant.
pub fn positive_variation(series: &TimeSeries) -> MeasureResult {
    let detail = series.growth_intervals();
    MeasureResult { value: detail.iter().map(|d| d.increase).sum(), detail }
}

fn check_measure_grid(grid: &[f64]) -> Result<(), MeasureError> {
    if grid.is_empty() {
        return Err(MeasureError::EmptyGrid);
    }
    if grid.len() < MIN_MEASURE_POINTS {
        return Err(MeasureError::GridTooCoarse { needed: MIN_MEASURE_POINTS, got: grid.len() });
    }
    Ok(())
}

/// D(ρ₁, ρ₂) = ½ tr|ρ₁ − ρ₂|.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64, MeasureError> {
    if rho1.dim() != rho2.dim() {
        return Err(MeasureError::DimensionMismatch(rho1.dim(), rho2.dim()));
    }
    let diff = rho1.matrix() - rho2.matrix();
    let norm: f64 = eig_hermitian(&diff.hermitian_part())?.values.iter().map(|l| l.abs()).sum();
    Ok((0.5 * norm).min(1.0))
}

/// Trace-distance revival measure for one pair trajectory.
pub fn blp_measure<F>(pair: F, grid: &[f64]) -> Result<MeasureResult, MeasureError>
where
    F: Fn(f64) -> Result<(DensityMatrix, DensityMatrix), MeasureError> + Sync,
{
    check_measure_grid(grid)?;
    let series = TimeSeries::sample(grid, "trace_distance", |t| {
        let (a, b) = pair(t)?;
        trace_distance(&a, &b)
    })?;
    Ok(positive_variation(&series))
}

/// Largest BLP value over a family of initial pairs, with the index of the maximizer.
pub fn blp_measure_max(
    noise: &NoiseParams,
    mu: f64,
    pairs: &[(DensityMatrix, DensityMatrix)],
    grid: &[f64],
) -> Result<(usize, MeasureResult), MeasureError> {
    let mut best: Option<(usize, MeasureResult)> = None;
    for (k, (a, b)) in pairs.iter().enumerate() {
        let res = blp_measure(
            |t| {
                let ch = correlated_channel(noise, mu, t)?;
                Ok((ch.apply(a)?, ch.apply(b)?))
            },
            grid,
        )?;
        if best.as_ref().is_none_or(|(_, b)| res.value > b.value) {
            best = Some((k, res));
        }
    }
    best.ok_or(MeasureError::BadSeries("empty pair family".into()))
}

fn clamp_relative(values: &[f64]) -> impl Fn(f64) -> f64 {
    let top = values.iter().copied().fold(0.0, f64::max);
    let floor = CONCURRENCE_REL_CUTOFF * top;
    move |l| if l > floor { l } else { 0.0 }
}

/// Two-qubit concurrence max{0, λ₁ − λ₂ − λ₃ − λ₄}, λ the eigenvalues of √(√ρ ρ̃ √ρ).
pub fn concurrence(rho: &DensityMatrix) -> Result<f64, MeasureError> {
    if rho.dim() != 4 {
        return Err(MeasureError::NotTwoQubit(rho.dim()));
    }
    let yy = pauli(2).kron(&pauli(2));
    let tilde = yy.sandwich(&rho.matrix().conj());
    let eig = eig_hermitian(rho.matrix())?;
    let keep = clamp_relative(&eig.values);
    let sqrt_rho = eig.reconstruct_with(|l| keep(l).sqrt());
    let inner: ComplexMatrix = (&(&sqrt_rho * &tilde) * &sqrt_rho).hermitian_part();
    let inner_eig = eig_hermitian(&inner)?;
    let keep = clamp_relative(&inner_eig.values);
    let mut lambdas: Vec<f64> = inner_eig.values.iter().map(|&l| keep(l).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// Concurrence revival measure for one state trajectory.
pub fn nm_concurrence_measure<F>(trajectory: F, grid: &[f64]) -> Result<MeasureResult, MeasureError>
where
    F: Fn(f64) -> Result<DensityMatrix, MeasureError> + Sync,
{
    check_measure_grid(grid)?;
    let series = TimeSeries::sample(grid, "concurrence", |t| concurrence(&trajectory(t)?))?;
    Ok(positive_variation(&series))
}

/// C(t) of `rho0` under the correlated channel of `noise` at correlation μ.
pub fn concurrence_series(
    noise: &NoiseParams,
    mu: f64,
    rho0: &DensityMatrix,
    grid: &[f64],
) -> Result<TimeSeries, MeasureError> {
    TimeSeries::sample(grid, "concurrence", |t| concurrence(&correlated_channel(noise, mu, t)?.apply(rho0)?))
}

/// Constant dephasing generator: r_p on single-flip slots, r_τ on double-flip slots, zero elsewhere.
pub fn dephasing_l_star(r_p: f64, r_tau: f64) -> RealMatrix {
    let diag: Vec<f64> = (0..16)
        .map(|k| match slot_class(k) {
            SlotClass::Unit => 0.0,
            SlotClass::SingleFlip => r_p,
            SlotClass::DoubleFlip => r_tau,
        })
        .collect();
    RealMatrix::from_diag(&diag)
}

/// Outcome of the self-similarity minimization.
#[derive(Clone, Debug, PartialEq)]
pub struct SssResult {
    pub zeta: f64,
    /// Minimizing (r_p, r_τ).
    pub rates: [f64; 2],
}

struct SssCost<'a> {
    samples: &'a [RealMatrix],
    weights: &'a [f64],
}

impl SssCost<'_> {
    fn eval(&self, r: &[f64]) -> f64 {
        let star = dephasing_l_star(r[0], r[1]);
        self.samples.iter().zip(self.weights).map(|(l, w)| w * (l - &star).frobenius_norm()).sum()
    }
}

impl CostFunction for SssCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, argmin::core::Error> {
        Ok(self.eval(p))
    }
}

/// ζ = min over the dephasing family of (1/T) ∫₀ᵀ ‖L(t) − L*‖_F dt.
///
/// The integral is trapezoidal on `intervals` equal steps. Nelder–Mead runs from
/// (0, 0), the time-averaged rates, the final-time rates and any `extra_starts`;
/// the best result wins.
pub fn sss_measure<S>(l_sampler: S, t_max: f64, intervals: usize, extra_starts: &[[f64; 2]]) -> Result<SssResult, MeasureError>
where
    S: Fn(f64) -> Result<RealMatrix, MapError> + Sync,
{
    if intervals < MIN_SSS_INTERVALS {
        return Err(MeasureError::GridTooCoarse { needed: MIN_SSS_INTERVALS, got: intervals });
    }
    let grid = uniform_grid(t_max, intervals + 1)?;
    let samples = grid.par_iter().map(|&t| l_sampler(t)).collect::<Result<Vec<_>, _>>()?;
    let h = t_max / intervals as f64;
    let weights: Vec<f64> = (0..=intervals)
        .map(|k| if k == 0 || k == intervals { 0.5 * h / t_max } else { h / t_max })
        .collect();
    let cost = SssCost { samples: &samples, weights: &weights };

    let slot_mean = |class: SlotClass, mats: &[RealMatrix]| -> f64 {
        let idx: Vec<usize> = (0..16).filter(|&k| slot_class(k) == class).collect();
        let total: f64 = mats.iter().flat_map(|m| idx.iter().map(move |&k| m[(k, k)])).sum();
        total / (idx.len() * mats.len()) as f64
    };
    let mut starts = vec![
        [0.0, 0.0],
        [slot_mean(SlotClass::SingleFlip, &samples), slot_mean(SlotClass::DoubleFlip, &samples)],
        [
            slot_mean(SlotClass::SingleFlip, &samples[intervals..]),
            slot_mean(SlotClass::DoubleFlip, &samples[intervals..]),
        ],
    ];
    starts.extend_from_slice(extra_starts);

    let mut best: Option<SssResult> = None;
    for s in starts {
        let scale = 0.1 * (s[0].abs() + s[1].abs()).max(0.1);
        let simplex = vec![vec![s[0], s[1]], vec![s[0] + scale, s[1]], vec![s[0], s[1] + scale]];
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(NM_SD_TOL)
            .map_err(|e| MeasureError::Optimizer(e.to_string()))?;
        let run = Executor::new(SssCost { samples: &samples, weights: &weights }, solver)
            .configure(|st| st.max_iters(NM_MAX_ITERS))
            .run()
            .map_err(|e| MeasureError::Optimizer(e.to_string()))?;
        let state = run.state();
        let rates = state.get_best_param().cloned().unwrap_or_else(|| vec![s[0], s[1]]);
        let zeta = cost.eval(&rates);
        if best.as_ref().is_none_or(|b| zeta < b.zeta) {
            best = Some(SssResult { zeta, rates: [rates[0], rates[1]] });
        }
    }
    best.ok_or(MeasureError::Optimizer("no starting point".into()))
}

/// ζ for correlated OUN dephasing, with an extra start at the short-time Markov rates.
pub fn sss_correlated_oun(relaxation: f64, g: f64, mu: f64, t_max: f64, intervals: usize) -> Result<SssResult, MeasureError> {
    let noise = NoiseParams::oun(relaxation, g).map_err(MapError::from)?;
    let start = [-0.5 * relaxation, -relaxation * (1.0 - mu)];
    sss_measure(|t| correlated_generator(&noise, mu, t, DEFAULT_STEP), t_max, intervals, &[start])
}

/// V(t) = det F(t) with its growth intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeTrace {
    pub series: TimeSeries,
    pub witness: Vec<GrowthInterval>,
    pub flags: Vec<bool>,
}

impl VolumeTrace {
    pub fn positive_variation(&self) -> f64 {
        self.witness.iter().map(|w| w.increase).sum()
    }
}

/// Samples det F on the grid; growth intervals of V witness non-Markovianity.
pub fn volume_trace<S>(f_sampler: S, grid: &[f64]) -> Result<VolumeTrace, MeasureError>
where
    S: Fn(f64) -> Result<crate::maps::TransferMatrix, MapError> + Sync,
{
    if grid.is_empty() {
        return Err(MeasureError::EmptyGrid);
    }
    let series = TimeSeries::sample(grid, "volume", |t| Ok(f_sampler(t)?.volume()))?;
    let witness = series.growth_intervals();
    let flags = series.growth_flags();
    Ok(VolumeTrace { series, witness, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::correlated_dephasing_channel;
    use crate::linalg::validate_density;
    use crate::states::{apply_local_unitaries, basis_ket, random_density, random_unitary, ProbeState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(10.0, 11).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(g[10], 10.0);
        assert!((g[3] - 3.0).abs() < 1e-15);
        assert!(uniform_grid(1.0, 1).is_err());
        assert!(uniform_grid(-1.0, 5).is_err());
    }

    #[test]
    fn series_rejects_bad_times() {
        assert!(TimeSeries::new(vec![0.0, 1.0, 1.0], vec![0.0; 3], "x").is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![0.0], "x").is_err());
    }

    #[test]
    fn growth_intervals_group_contiguous_increases() {
        let s = TimeSeries::new((0..7).map(f64::from).collect(), vec![0.0, 1.0, 3.0, 2.0, 2.0, 2.5, 1.0], "x").unwrap();
        let r = positive_variation(&s);
        assert_eq!(r.detail.len(), 2);
        assert_eq!((r.detail[0].start, r.detail[0].end, r.detail[0].increase), (0.0, 2.0, 3.0));
        assert_eq!((r.detail[1].start, r.detail[1].end, r.detail[1].increase), (4.0, 5.0, 0.5));
        assert!((r.value - 3.5).abs() < 1e-15);
        assert_eq!(s.growth_flags(), vec![true, true, false, false, true, false, false]);
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityMatrix::from_ket(&basis_ket(2, 0)).unwrap();
        let one = DensityMatrix::from_ket(&basis_ket(2, 1)).unwrap();
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-15);
        let four = ProbeState::PhiPlus.density();
        assert!(matches!(trace_distance(&zero, &four), Err(MeasureError::DimensionMismatch(2, 4))));
    }

    #[test]
    fn trace_distance_metric_and_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let a = random_density(4, &mut rng);
            let b = random_density(4, &mut rng);
            let c = random_density(4, &mut rng);
            let ab = trace_distance(&a, &b).unwrap();
            assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-14);
            assert!(ab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-12);
            let ch = correlated_dephasing_channel(rng.gen_range(-1.0..=1.0), rng.gen_range(0.0..=1.0)).unwrap();
            let after = trace_distance(&ch.apply(&a).unwrap(), &ch.apply(&b).unwrap()).unwrap();
            assert!(after <= ab + 1e-12);
        }
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence(&ProbeState::PhiPlus.density()).unwrap() - 1.0).abs() < 1e-10);
        assert!((concurrence(&ProbeState::Alpha.density()).unwrap() - 1.0).abs() < 1e-10);
        assert!(concurrence(&DensityMatrix::from_ket(&basis_ket(4, 0)).unwrap()).unwrap() < 1e-10);
    }

    fn werner(w: f64) -> DensityMatrix {
        let phi = ProbeState::PhiPlus.density();
        let m = &phi.matrix().scale_real(w) + &ComplexMatrix::identity(4).scale_real((1.0 - w) / 4.0);
        validate_density(m).unwrap()
    }

    #[test]
    fn werner_concurrence_closed_form() {
        assert!((concurrence(&werner(0.8)).unwrap() - 0.7).abs() < 1e-10);
        for k in 0..=20 {
            let w = k as f64 / 20.0;
            let expected = (0.5 * (3.0 * w - 1.0)).max(0.0);
            assert!((concurrence(&werner(w)).unwrap() - expected).abs() < 1e-10, "w = {w}");
        }
    }

    #[test]
    fn concurrence_local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let rho = if rng.gen_bool(0.5) { random_density(4, &mut rng) } else { werner(rng.gen_range(0.4..1.0)) };
            let u = random_unitary(2, &mut rng);
            let v = random_unitary(2, &mut rng);
            let rotated = apply_local_unitaries(&rho, &u, &v);
            let diff = concurrence(&rho).unwrap() - concurrence(&rotated).unwrap();
            assert!(diff.abs() < 1e-10);
        }
    }

    #[test]
    fn measures_need_enough_points() {
        let rho = ProbeState::PhiPlus.density();
        let short = uniform_grid(1.0, 50).unwrap();
        let err = nm_concurrence_measure(|_| Ok(rho.clone()), &short).unwrap_err();
        assert_eq!(err, MeasureError::GridTooCoarse { needed: 100, got: 50 });
        assert_eq!(blp_measure(|_| Ok((rho.clone(), rho.clone())), &[]).unwrap_err(), MeasureError::EmptyGrid);
    }

    #[test]
    fn identical_pair_has_no_backflow() {
        let rho = ProbeState::Alpha.density();
        let noise = NoiseParams::rtn(0.8, 0.05).unwrap();
        let grid = uniform_grid(50.0, 200).unwrap();
        let res = blp_measure(
            |t| {
                let ch = correlated_channel(&noise, 0.5, t)?;
                let out = ch.apply(&rho)?;
                Ok((out.clone(), out))
            },
            &grid,
        )
        .unwrap();
        assert_eq!(res.value, 0.0);
    }

    #[test]
    fn constant_generator_has_zero_zeta() {
        let l = dephasing_l_star(-0.3, -0.45);
        let res = sss_measure(|_| Ok(l.clone()), 10.0, 200, &[]).unwrap();
        assert!(res.zeta < 1e-9, "zeta = {}", res.zeta);
        assert!((res.rates[0] + 0.3).abs() < 1e-6 && (res.rates[1] + 0.45).abs() < 1e-6);
        assert!(sss_measure(|_| Ok(l.clone()), 10.0, 100, &[]).is_err());
    }
}
