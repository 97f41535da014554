//! Adaptive state estimation and column-wise unitary estimation.
//!
//! A state run repeats, for `k = 1..=k_max`: draw `Δ`, measure the squared
//! error at the two normalized probes `z ± c_k Δ`, step the CSPSA iterate,
//! then (optionally) replace it with the maximum-likelihood state over all
//! records collected so far, starting the simplex at the normalized iterate.

use log::warn;
use rand::Rng;

use crate::cspsa::{
    gradient_estimate, probes, sample_perturbation, step, CspsaState, GainSchedule,
};
use crate::error::{Error, Result};
use crate::interferometer::{estimate_se, exact_se_oracle, sample_record};
use crate::mle::{refine, DataLog};
use crate::qudit::{
    check_same_dim, closest_unitary, gram_schmidt, haar_random_state, haar_random_unitary,
    hs_distance, normalize, squared_error, AmplitudeVector, ComplexMatrix,
};
use crate::simplex::SimplexOptions;

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationConfig {
    pub dim: usize,
    /// Copies measured per probe per iteration (`N`).
    pub shots: u64,
    pub iterations: usize,
    pub gains: GainSchedule,
    pub simplex: SimplexOptions,
    pub mle: bool,
    /// Use the exact squared error instead of sampled counts.
    pub noiseless: bool,
    /// Rescale the CSPSA iterate to unit norm after every step. The objective
    /// only sees normalized probes, so the iterate's norm is a free direction
    /// that otherwise drifts upward and damps the effective gain.
    pub renormalize_iterate: bool,
}

impl EstimationConfig {
    pub fn new(dim: usize, shots: u64, iterations: usize) -> Self {
        Self {
            dim,
            shots,
            iterations,
            gains: GainSchedule::default(),
            simplex: SimplexOptions::default(),
            mle: true,
            noiseless: false,
            renormalize_iterate: true,
        }
    }

    pub fn noiseless(dim: usize, iterations: usize) -> Self {
        Self {
            mle: false,
            noiseless: true,
            ..Self::new(dim, 1, iterations)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if self.shots == 0 {
            return Err(Error::Config("shots per probe must be at least 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        self.gains.validate()?;
        self.simplex.validate()
    }

    /// `N_T = 2Nk`, the copies consumed by one state run after `k` iterations.
    pub fn shots_after(&self, k: usize) -> u64 {
        2 * self.shots * k as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatePoint {
    pub iteration: usize,
    /// Normalized estimate after this iteration.
    pub estimate: AmplitudeVector,
    pub squared_error: f64,
    /// Copies actually measured so far (zero in noiseless mode).
    pub shots_used: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationTrajectory {
    pub shots_per_probe: u64,
    pub noiseless: bool,
    pub points: Vec<StatePoint>,
    /// Number of times a degenerate iterate forced a fresh random guess.
    pub restarts: usize,
}

impl EstimationTrajectory {
    pub fn final_estimate(&self) -> Option<&AmplitudeVector> {
        self.points.last().map(|p| &p.estimate)
    }

    pub fn squared_errors(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.squared_error).collect()
    }

    /// `N_T = 2Nk` for every recorded iteration.
    pub fn shot_accounting(&self) -> Vec<u64> {
        self.points
            .iter()
            .map(|p| 2 * self.shots_per_probe * p.iteration as u64)
            .collect()
    }
}

/// CSPSA (plus optional MLE) estimator for one unknown state.
///
/// Both state and unitary estimation drive one of these per target vector.
struct ColumnEstimator<'a> {
    target: &'a AmplitudeVector,
    config: &'a EstimationConfig,
    state: CspsaState,
    log: DataLog,
    restarts: usize,
}

impl<'a> ColumnEstimator<'a> {
    fn new(
        target: &'a AmplitudeVector,
        guess: AmplitudeVector,
        config: &'a EstimationConfig,
    ) -> Result<Self> {
        Ok(Self {
            target,
            config,
            state: CspsaState::new(guess)?,
            log: DataLog::new(),
            restarts: 0,
        })
    }

    fn measure<R: Rng + ?Sized>(&mut self, probe: &AmplitudeVector, rng: &mut R) -> Result<f64> {
        if self.config.noiseless {
            return exact_se_oracle(self.target, probe);
        }
        let record = sample_record(self.target, probe, self.config.shots, rng)?;
        let se = estimate_se(&record);
        self.log.push(record)?;
        Ok(se)
    }

    fn restart<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let iteration = self.state.iteration + 1;
        warn!("degenerate CSPSA iterate at iteration {iteration}; restarting from a random guess");
        self.state = CspsaState {
            iterate: haar_random_state(self.config.dim, rng)?,
            iteration,
        };
        self.restarts += 1;
        Ok(())
    }

    /// One full iteration; returns the normalized estimate.
    fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<AmplitudeVector> {
        let k = self.state.iteration + 1;
        let (a_k, c_k) = self.config.gains.gains_at(k);
        let delta = sample_perturbation(self.config.dim, rng)?;
        let (plus, minus) = probes(&self.state, &delta, c_k)?;
        let (plus, minus) = match (normalize(&plus), normalize(&minus)) {
            (Ok(p), Ok(m)) => (p, m),
            _ => {
                self.restart(rng)?;
                return normalize(&self.state.iterate);
            }
        };
        let f_plus = self.measure(&plus, rng)?;
        let f_minus = self.measure(&minus, rng)?;
        let gradient = gradient_estimate(f_plus, f_minus, c_k, &delta)?;
        match step(&self.state, &gradient, a_k) {
            Ok(next) => self.state = next,
            Err(Error::DegenerateIterate(_)) => {
                self.restart(rng)?;
            }
            Err(e) => return Err(e),
        }
        let estimate = normalize(&self.state.iterate)?;
        if self.config.renormalize_iterate {
            self.state.iterate = estimate.clone();
        }
        if self.config.mle && !self.log.is_empty() {
            let refined = refine(&estimate, &self.log, &self.config.simplex)?;
            self.state.iterate = refined.clone();
            return Ok(refined);
        }
        Ok(estimate)
    }

    /// Overwrites the iterate, keeping the iteration count and data.
    fn replace_iterate(&mut self, iterate: AmplitudeVector) -> Result<()> {
        self.state.iterate = normalize(&iterate)?;
        Ok(())
    }
}

fn check_target(target: &AmplitudeVector, config: &EstimationConfig) -> Result<()> {
    check_same_dim(config.dim, target.dim())?;
    if !target.is_normalized(1e-9) {
        return Err(Error::ContractViolation(
            "target state is not normalized".into(),
        ));
    }
    Ok(())
}

/// Runs the adaptive state estimation protocol from `initial_guess`.
pub fn estimate_state<R: Rng + ?Sized>(
    target: &AmplitudeVector,
    config: &EstimationConfig,
    initial_guess: AmplitudeVector,
    rng: &mut R,
) -> Result<EstimationTrajectory> {
    config.validate()?;
    check_target(target, config)?;
    check_same_dim(config.dim, initial_guess.dim())?;
    let mut column = ColumnEstimator::new(target, initial_guess, config)?;
    let mut points = Vec::with_capacity(config.iterations);
    for iteration in 1..=config.iterations {
        let estimate = column.advance(rng)?;
        points.push(StatePoint {
            iteration,
            squared_error: squared_error(target, &estimate)?,
            estimate,
            shots_used: column.log.total_shots(),
        });
    }
    Ok(EstimationTrajectory {
        shots_per_probe: config.shots,
        noiseless: config.noiseless,
        points,
        restarts: column.restarts,
    })
}

/// Same as [`estimate_state`] with a Haar-random initial guess.
pub fn estimate_state_random_guess<R: Rng + ?Sized>(
    target: &AmplitudeVector,
    config: &EstimationConfig,
    rng: &mut R,
) -> Result<EstimationTrajectory> {
    let guess = haar_random_state(config.dim, rng)?;
    estimate_state(target, config, guess, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PostProcessing {
    None,
    ClosestUnitary,
    GramSchmidt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitaryEstimationOptions {
    pub post_processing: PostProcessing,
    /// Feed the post-processed columns back as the next iterates.
    pub re_update: bool,
}

impl Default for UnitaryEstimationOptions {
    fn default() -> Self {
        Self {
            post_processing: PostProcessing::ClosestUnitary,
            re_update: false,
        }
    }
}

impl UnitaryEstimationOptions {
    pub fn validate(&self) -> Result<()> {
        if self.re_update && self.post_processing == PostProcessing::None {
            return Err(Error::Config(
                "re-update requires a post-processing method".into(),
            ));
        }
        Ok(())
    }
}

/// Post-processed estimate at one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessedEstimate {
    pub method: PostProcessing,
    pub estimate: ComplexMatrix,
    pub distance: f64,
    /// The method failed on this iterate and the raw estimate was used.
    pub fell_back: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryPoint {
    pub iteration: usize,
    /// Matrix whose column `j` is the normalized estimate of `U|j⟩`.
    pub raw: ComplexMatrix,
    pub raw_distance: f64,
    pub processed: Option<ProcessedEstimate>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryTrajectory {
    pub dim: usize,
    pub shots_per_probe: u64,
    pub points: Vec<UnitaryPoint>,
    /// Copies actually measured per column after the final iteration.
    pub shots_used_per_column: Vec<u64>,
    pub restarts: usize,
}

impl UnitaryTrajectory {
    /// `(N_T, N_T*) = (2Nk, d·2Nk)` for every recorded iteration.
    pub fn shot_accounting(&self) -> Vec<(u64, u64)> {
        self.points
            .iter()
            .map(|p| {
                let per_column = 2 * self.shots_per_probe * p.iteration as u64;
                (per_column, self.dim as u64 * per_column)
            })
            .collect()
    }
}

fn post_process(raw: &ComplexMatrix, method: PostProcessing) -> Result<ComplexMatrix> {
    match method {
        PostProcessing::None => Ok(raw.clone()),
        PostProcessing::ClosestUnitary => closest_unitary(raw),
        PostProcessing::GramSchmidt => gram_schmidt(raw),
    }
}

/// Estimates `target` column by column, each column with its own
/// perturbations and data log, all synchronized on the iteration index.
pub fn estimate_unitary_from<R: Rng + ?Sized>(
    target: &ComplexMatrix,
    initial: &ComplexMatrix,
    config: &EstimationConfig,
    options: &UnitaryEstimationOptions,
    rng: &mut R,
) -> Result<UnitaryTrajectory> {
    config.validate()?;
    options.validate()?;
    check_same_dim(config.dim, target.dim())?;
    check_same_dim(config.dim, initial.dim())?;
    if !target.is_unitary() {
        return Err(Error::ContractViolation(
            "target matrix is not unitary".into(),
        ));
    }
    let targets = target.columns();
    let mut columns = targets
        .iter()
        .zip(initial.columns())
        .map(|(t, guess)| ColumnEstimator::new(t, guess, config))
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(config.iterations);
    for iteration in 1..=config.iterations {
        let estimates = columns
            .iter_mut()
            .map(|c| c.advance(rng))
            .collect::<Result<Vec<_>>>()?;
        let raw = ComplexMatrix::from_columns(&estimates)?;
        let raw_distance = hs_distance(target, &raw)?;
        let processed = match options.post_processing {
            PostProcessing::None => None,
            method => {
                let (estimate, fell_back) = match post_process(&raw, method) {
                    Ok(m) => (m, false),
                    Err(e @ (Error::RankDeficient { .. } | Error::SingularMatrix(_))) => {
                        warn!(
                            "{method:?} failed at iteration {iteration} ({e}); using raw columns"
                        );
                        (raw.clone(), true)
                    }
                    Err(e) => return Err(e),
                };
                if options.re_update && !fell_back {
                    for (col, v) in columns.iter_mut().zip(estimate.columns()) {
                        col.replace_iterate(v)?;
                    }
                }
                Some(ProcessedEstimate {
                    method,
                    distance: hs_distance(target, &estimate)?,
                    estimate,
                    fell_back,
                })
            }
        };
        points.push(UnitaryPoint {
            iteration,
            raw,
            raw_distance,
            processed,
        });
    }
    Ok(UnitaryTrajectory {
        dim: config.dim,
        shots_per_probe: config.shots,
        points,
        shots_used_per_column: columns.iter().map(|c| c.log.total_shots()).collect(),
        restarts: columns.iter().map(|c| c.restarts).sum(),
    })
}

/// Same as [`estimate_unitary_from`] with a Haar-random initial estimate.
pub fn estimate_unitary<R: Rng + ?Sized>(
    target: &ComplexMatrix,
    config: &EstimationConfig,
    options: &UnitaryEstimationOptions,
    rng: &mut R,
) -> Result<UnitaryTrajectory> {
    let initial = haar_random_unitary(config.dim, rng)?;
    estimate_unitary_from(target, &initial, config, options, rng)
}
