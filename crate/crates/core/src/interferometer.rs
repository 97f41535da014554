//! Simulated multi-arm interferometer.
//!
//! The unknown state `z` and a probe `w` enter the two arms of a balanced
//! interferometer for every path `k`. Detector `k` on the plus port clicks
//! with probability `|z_k + w_k|²/4`, detector `k` on the minus port with
//! `|z_k − w_k|²/4`. The total minus-port probability is a quarter of the
//! squared error between `z` and `w`, so counting minus-port clicks
//! measures `SE(z, w)`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::qudit::{check_same_dim, AmplitudeVector};

/// Maximum norm deviation accepted for states fed into the interferometer.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-9;

/// Click probabilities of the `2d` detectors.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub plus_port: Vec<f64>,
    pub minus_port: Vec<f64>,
}

impl OutcomeDistribution {
    /// Probability of a click anywhere on the minus port.
    pub fn minus_total(&self) -> f64 {
        self.minus_port.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.plus_port.iter().sum::<f64>() + self.minus_total()
    }
}

/// Detector counts for one probe setting.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub probe: AmplitudeVector,
    pub counts_plus: Vec<u64>,
    pub counts_minus: Vec<u64>,
    pub shots: u64,
}

impl MeasurementRecord {
    pub fn new(
        probe: AmplitudeVector,
        counts_plus: Vec<u64>,
        counts_minus: Vec<u64>,
    ) -> Result<Self> {
        check_same_dim(probe.dim(), counts_plus.len())?;
        check_same_dim(probe.dim(), counts_minus.len())?;
        let shots = counts_plus.iter().chain(&counts_minus).sum();
        if shots == 0 {
            return Err(Error::EmptyEnsemble);
        }
        Ok(Self {
            probe,
            counts_plus,
            counts_minus,
            shots,
        })
    }

    pub fn minus_total(&self) -> u64 {
        self.counts_minus.iter().sum()
    }
}

fn check_input(v: &AmplitudeVector, what: &str) -> Result<()> {
    let dev = (v.norm() - 1.0).abs();
    if dev > INPUT_NORM_TOLERANCE {
        return Err(Error::ContractViolation(format!(
            "{what} is not normalized (norm deviation {dev:e})"
        )));
    }
    Ok(())
}

pub fn outcome_probabilities(
    z: &AmplitudeVector,
    probe: &AmplitudeVector,
) -> Result<OutcomeDistribution> {
    check_same_dim(z.dim(), probe.dim())?;
    check_input(z, "state")?;
    check_input(probe, "probe")?;
    let (plus_port, minus_port) = z
        .entries()
        .iter()
        .zip(probe.entries())
        .map(|(a, b)| ((a + b).norm_sqr() / 4.0, (a - b).norm_sqr() / 4.0))
        .unzip();
    Ok(OutcomeDistribution {
        plus_port,
        minus_port,
    })
}

/// Draws `shots` detections from the `2d`-outcome multinomial.
pub fn sample_record<R: Rng + ?Sized>(
    z: &AmplitudeVector,
    probe: &AmplitudeVector,
    shots: u64,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    if shots == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let dist = outcome_probabilities(z, probe)?;
    let probs: Vec<f64> = dist
        .plus_port
        .iter()
        .chain(&dist.minus_port)
        .copied()
        .collect();
    let counts = sample_multinomial(shots, &probs, rng);
    let d = z.dim();
    Ok(MeasurementRecord {
        probe: probe.clone(),
        counts_plus: counts[..d].to_vec(),
        counts_minus: counts[d..].to_vec(),
        shots,
    })
}

/// Multinomial draw by sequential conditional binomials.
fn sample_multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0; probs.len()];
    let Some(last) = probs.iter().rposition(|&p| p > 0.0) else {
        return counts;
    };
    let mut remaining = n;
    for i in 0..last {
        if remaining == 0 {
            return counts;
        }
        let tail: f64 = probs[i..].iter().sum();
        let q = (probs[i] / tail).clamp(0.0, 1.0);
        let k = if q == 0.0 {
            0
        } else if q == 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q)
                .expect("probability in (0, 1)")
                .sample(rng)
        };
        counts[i] = k;
        remaining -= k;
    }
    counts[last] = remaining;
    counts
}

/// `4 · (minus-port clicks) / shots`.
pub fn estimate_se(record: &MeasurementRecord) -> f64 {
    4.0 * record.minus_total() as f64 / record.shots as f64
}

/// Noiseless `N → ∞` limit of [`estimate_se`].
pub fn exact_se_oracle(z: &AmplitudeVector, probe: &AmplitudeVector) -> Result<f64> {
    Ok(4.0 * outcome_probabilities(z, probe)?.minus_total())
}
