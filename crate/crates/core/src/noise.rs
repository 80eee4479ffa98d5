// SPDX-License-Identifier: Apache-2.0

//! Scalar noise functions for the three dephasing/damping environments.
//!
//! * random telegraph noise (RTN): `p(t) = e^{-γt} (cos ωγt + sin(ωγt)/ω)`,
//!   `ω = √((2a/γ)² − 1)`; imaginary ω (2a/γ < 1) continues to cosh/sinh.
//! * Ornstein–Uhlenbeck noise (OUN): `p(t) = exp[-G/2 (t + (e^{-gt} − 1)/g)]`.
//! * non-Markovian amplitude damping (NMAD): decoherence function
//!   `G(t) = e^{-gt/2} (cosh(lt/2) + (g/l) sinh(lt/2))`, `l = √(g² − 2γ₀g)`,
//!   with `p(t) = 1 − |G(t)|²` and decay rate `γ(t) = −(2/|G|) d|G|/dt`.
//!
//! `G` in the OUN form is treated as a rate (inverse time).

use num_complex::Complex64;
use thiserror::Error;

/// |G(t)| at or below which the NMAD decay rate is reported as singular.
pub const NMAD_RATE_SINGULAR: f64 = 1e-9;

/// Imaginary residue of G(t) tolerated before the real part is taken.
pub const NMAD_IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("noise parameter {name} must be strictly positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("time must be non-negative and finite, got {0}")]
    BadTime(f64),
    #[error("decay rate diverges at t = {t}: |G(t)| = {magnitude:e}")]
    Singularity { t: f64, magnitude: f64 },
    #[error("decoherence function has imaginary residue {residue:e} at t = {t}")]
    ImaginaryResidue { t: f64, residue: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<f64, NoiseError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(NoiseError::NonPositive { name, value })
    }
}

fn check_time(t: f64) -> Result<(), NoiseError> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(NoiseError::BadTime(t))
    }
}

/// Random telegraph noise with coupling `a` and switching rate `gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rtn {
    pub a: f64,
    pub gamma: f64,
}

/// Oscillation regime of RTN, fixed by the sign of (2a/γ)² − 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RtnRegime {
    /// ω real: damped oscillation, memory effects.
    Oscillatory { omega: f64 },
    /// ω = 0.
    Critical,
    /// ω imaginary; holds |ω|.
    Overdamped { omega_abs: f64 },
}

impl Rtn {
    pub fn new(a: f64, gamma: f64) -> Result<Self, NoiseError> {
        Ok(Self { a: positive("a", a)?, gamma: positive("gamma", gamma)? })
    }

    pub fn regime(&self) -> RtnRegime {
        let ratio = 2.0 * self.a / self.gamma;
        let s = ratio * ratio - 1.0;
        if s.abs() <= 1e-14 {
            RtnRegime::Critical
        } else if s > 0.0 {
            RtnRegime::Oscillatory { omega: s.sqrt() }
        } else {
            RtnRegime::Overdamped { omega_abs: (-s).sqrt() }
        }
    }

    /// 2a/γ > 1.
    pub fn is_non_markovian(&self) -> bool {
        matches!(self.regime(), RtnRegime::Oscillatory { .. })
    }

    pub fn p(&self, t: f64) -> Result<f64, NoiseError> {
        check_time(t)?;
        let gt = self.gamma * t;
        let envelope = (-gt).exp();
        let value = match self.regime() {
            RtnRegime::Oscillatory { omega } => envelope * ((omega * gt).cos() + (omega * gt).sin() / omega),
            RtnRegime::Critical => envelope * (1.0 + gt),
            RtnRegime::Overdamped { omega_abs } => {
                envelope * ((omega_abs * gt).cosh() + (omega_abs * gt).sinh() / omega_abs)
            }
        };
        Ok(value)
    }
}

/// Ornstein–Uhlenbeck noise with relaxation rate `relaxation` (G) and inverse correlation time `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Oun {
    pub relaxation: f64,
    pub g: f64,
}

/// (x + e^{-x} − 1), accurate for small x.
fn exp_excess(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // x²/2 − x³/6 + x⁴/24 − ...
        let mut term = x * x / 2.0;
        let mut sum = term;
        for k in 3..12 {
            term *= -x / k as f64;
            sum += term;
        }
        sum
    } else {
        x + (-x).exp_m1()
    }
}

impl Oun {
    pub fn new(relaxation: f64, g: f64) -> Result<Self, NoiseError> {
        Ok(Self { relaxation: positive("G", relaxation)?, g: positive("g", g)? })
    }

    /// Exponent t + (e^{-gt} − 1)/g.
    pub fn memory_time(&self, t: f64) -> f64 {
        exp_excess(self.g * t) / self.g
    }

    pub fn p(&self, t: f64) -> Result<f64, NoiseError> {
        check_time(t)?;
        Ok((-0.5 * self.relaxation * self.memory_time(t)).exp())
    }

    /// d/dt ln p(t) = −(G/2)(1 − e^{-gt}).
    pub fn log_rate(&self, t: f64) -> f64 {
        0.5 * self.relaxation * (-self.g * t).exp_m1()
    }
}

/// Non-Markovian amplitude damping with coupling `gamma0` and spectral width `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nmad {
    pub gamma0: f64,
    pub g: f64,
}

impl Nmad {
    pub fn new(gamma0: f64, g: f64) -> Result<Self, NoiseError> {
        Ok(Self { gamma0: positive("gamma0", gamma0)?, g: positive("g", g)? })
    }

    /// l = √(g² − 2γ₀g) in complex arithmetic.
    pub fn l(&self) -> Complex64 {
        Complex64::new(self.g * self.g - 2.0 * self.gamma0 * self.g, 0.0).sqrt()
    }

    /// Overdamped (no revivals) when g ≥ 2γ₀.
    pub fn is_overdamped(&self) -> bool {
        self.g >= 2.0 * self.gamma0
    }

    // (cosh(lt/2), sinh(lt/2)/l)
    fn hyperbolic_pair(&self, t: f64) -> (Complex64, Complex64) {
        let l = self.l();
        let half = l * (t / 2.0);
        let cosh = half.cosh();
        let sinh_over_l = if l.norm() * t < 1e-6 {
            // sinh(x)/l with x = lt/2 → t/2 (1 + x²/6)
            Complex64::new(t / 2.0, 0.0) * (Complex64::new(1.0, 0.0) + half * half / 6.0)
        } else {
            half.sinh() / l
        };
        (cosh, sinh_over_l)
    }

    fn real_part(&self, t: f64, z: Complex64) -> Result<f64, NoiseError> {
        if z.im.abs() >= NMAD_IMAG_TOL {
            return Err(NoiseError::ImaginaryResidue { t, residue: z.im.abs() });
        }
        Ok(z.re)
    }

    /// Decoherence function G(t).
    pub fn decoherence(&self, t: f64) -> Result<f64, NoiseError> {
        check_time(t)?;
        let (cosh, sinh_over_l) = self.hyperbolic_pair(t);
        let z = (cosh + sinh_over_l * self.g) * (-self.g * t / 2.0).exp();
        self.real_part(t, z)
    }

    /// p(t) = 1 − |G(t)|².
    pub fn p(&self, t: f64) -> Result<f64, NoiseError> {
        let g = self.decoherence(t)?;
        Ok(1.0 - g * g)
    }

    /// Time-local decay rate γ(t) = −2 G'(t)/G(t), from the closed-form derivative
    /// G'(t) = −γ₀ g e^{-gt/2} sinh(lt/2)/l.
    pub fn decay_rate(&self, t: f64) -> Result<f64, NoiseError> {
        let big_g = self.decoherence(t)?;
        if big_g.abs() <= NMAD_RATE_SINGULAR {
            return Err(NoiseError::Singularity { t, magnitude: big_g.abs() });
        }
        let (cosh, sinh_over_l) = self.hyperbolic_pair(t);
        let numerator = sinh_over_l * (2.0 * self.gamma0 * self.g);
        let denominator = cosh + sinh_over_l * self.g;
        self.real_part(t, numerator / denominator)
    }
}

/// Noise model selector with validated parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseParams {
    Rtn(Rtn),
    Oun(Oun),
    Nmad(Nmad),
}

impl NoiseParams {
    pub fn rtn(a: f64, gamma: f64) -> Result<Self, NoiseError> {
        Ok(Self::Rtn(Rtn::new(a, gamma)?))
    }

    pub fn oun(relaxation: f64, g: f64) -> Result<Self, NoiseError> {
        Ok(Self::Oun(Oun::new(relaxation, g)?))
    }

    pub fn nmad(gamma0: f64, g: f64) -> Result<Self, NoiseError> {
        Ok(Self::Nmad(Nmad::new(gamma0, g)?))
    }

    /// The scalar p(t) entering the channel at time t.
    pub fn p(&self, t: f64) -> Result<f64, NoiseError> {
        match self {
            Self::Rtn(n) => n.p(t),
            Self::Oun(n) => n.p(t),
            Self::Nmad(n) => n.p(t),
        }
    }

    /// RTN and OUN are Pauli dephasing (unital); NMAD is not.
    pub fn is_unital(&self) -> bool {
        !matches!(self, Self::Nmad(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Rtn(_) => "rtn",
            Self::Oun(_) => "oun",
            Self::Nmad(_) => "nmad",
        }
    }
}
