//! Complex simultaneous perturbation stochastic approximation.
//!
//! Each iteration evaluates the objective at `z ± c_k Δ` with `Δ_i` drawn from
//! `{±1, ±i}`, forms a Wirtinger-gradient estimate from the two values, and
//! takes a step `z ← z − a_k g`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qudit::{check_same_dim, AmplitudeVector};

/// Gain sequences `a_k = a/(k+1+A)^s` and `c_k = b/(k+1)^r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainSchedule {
    pub a: f64,
    pub big_a: f64,
    pub s: f64,
    pub b: f64,
    pub r: f64,
}

impl Default for GainSchedule {
    fn default() -> Self {
        Self {
            a: 3.0,
            big_a: 0.0,
            s: 1.0,
            b: 0.35,
            r: 1.0 / 6.0,
        }
    }
}

impl GainSchedule {
    pub fn validate(&self) -> Result<()> {
        let positive = [("a", self.a), ("s", self.s), ("b", self.b), ("r", self.r)];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Config(format!(
                    "gain `{name}` must be positive, got {value}"
                )));
            }
        }
        if !(self.big_a >= 0.0) || !self.big_a.is_finite() {
            return Err(Error::Config(format!(
                "gain `A` must be nonnegative, got {}",
                self.big_a
            )));
        }
        Ok(())
    }

    /// Returns `(a_k, c_k)`.
    pub fn gains_at(&self, k: usize) -> (f64, f64) {
        let k = k as f64;
        (
            self.a / (k + 1.0 + self.big_a).powf(self.s),
            self.b / (k + 1.0).powf(self.r),
        )
    }
}

pub const PERTURBATION_VALUES: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(0.0, -1.0),
];

/// Perturbation direction with entries in `{±1, ±i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationVector(Vec<Complex64>);

impl PerturbationVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if !entries.iter().all(|z| PERTURBATION_VALUES.contains(z)) {
            return Err(Error::InvalidData(
                "perturbation entries must be in {±1, ±i}".into(),
            ));
        }
        Ok(Self(entries))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }
}

pub fn sample_perturbation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PerturbationVector> {
    if dim == 0 {
        return Err(Error::InvalidDimension(0));
    }
    Ok(PerturbationVector(
        (0..dim)
            .map(|_| PERTURBATION_VALUES[rng.random_range(0..4)])
            .collect(),
    ))
}

/// The current CSPSA iterate, which may be unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct CspsaState {
    pub iterate: AmplitudeVector,
    pub iteration: usize,
}

impl CspsaState {
    pub fn new(iterate: AmplitudeVector) -> Result<Self> {
        if !(iterate.norm() > 0.0) {
            return Err(Error::DegenerateVector);
        }
        Ok(Self {
            iterate,
            iteration: 0,
        })
    }
}

/// The two evaluation points `z ± c_k Δ`, left unnormalized.
pub fn probes(
    state: &CspsaState,
    delta: &PerturbationVector,
    c_k: f64,
) -> Result<(AmplitudeVector, AmplitudeVector)> {
    check_same_dim(state.iterate.dim(), delta.dim())?;
    let (plus, minus) = state
        .iterate
        .entries()
        .iter()
        .zip(delta.entries())
        .map(|(z, d)| (z + d * c_k, z - d * c_k))
        .unzip();
    Ok((
        AmplitudeVector::from_entries_unchecked(plus),
        AmplitudeVector::from_entries_unchecked(minus),
    ))
}

/// `g_i = (f₊ − f₋) / (2 c_k Δ_i*)`.
pub fn gradient_estimate(
    f_plus: f64,
    f_minus: f64,
    c_k: f64,
    delta: &PerturbationVector,
) -> Result<Vec<Complex64>> {
    if !(c_k > 0.0) {
        return Err(Error::InvalidGain(c_k));
    }
    let diff = f_plus - f_minus;
    Ok(delta
        .entries()
        .iter()
        .map(|d| diff / (2.0 * c_k * d.conj()))
        .collect())
}

/// `z ← z − a_k g`.
pub fn step(state: &CspsaState, gradient: &[Complex64], a_k: f64) -> Result<CspsaState> {
    check_same_dim(state.iterate.dim(), gradient.len())?;
    let next: Vec<Complex64> = state
        .iterate
        .entries()
        .iter()
        .zip(gradient)
        .map(|(z, g)| z - g * a_k)
        .collect();
    let iteration = state.iteration + 1;
    let iterate = AmplitudeVector::new(next).map_err(|_| Error::DegenerateIterate(iteration))?;
    if !(iterate.norm() > 0.0) {
        return Err(Error::DegenerateIterate(iteration));
    }
    Ok(CspsaState { iterate, iteration })
}
