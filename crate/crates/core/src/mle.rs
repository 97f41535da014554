//! Maximum-likelihood refinement over the cumulative measurement record.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interferometer::MeasurementRecord;
use crate::qudit::{check_same_dim, normalize, AmplitudeVector};
use crate::simplex::{nelder_mead, SimplexOptions};

/// Floor applied to the probability of an outcome that was actually observed.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// One detector with a nonzero count, flattened for fast evaluation.
#[derive(Clone, Copy, Debug)]
struct Term {
    path: usize,
    probe: Complex64,
    // +1 for the plus port, -1 for the minus port
    sign: f64,
    count: f64,
}

/// Append-only log of every record collected during one estimation run.
#[derive(Clone, Debug, Default)]
pub struct DataLog {
    records: Vec<MeasurementRecord>,
    terms: Vec<Term>,
    total_shots: u64,
}

impl DataLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: MeasurementRecord) -> Result<()> {
        if let Some(first) = self.records.first() {
            check_same_dim(first.probe.dim(), record.probe.dim())?;
        }
        let probe = record.probe.entries();
        for (sign, counts) in [(1.0, &record.counts_plus), (-1.0, &record.counts_minus)] {
            for (path, &count) in counts.iter().enumerate() {
                if count > 0 {
                    self.terms.push(Term {
                        path,
                        probe: probe[path],
                        sign,
                        count: count as f64,
                    });
                }
            }
        }
        self.total_shots += record.shots;
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_shots(&self) -> u64 {
        self.total_shots
    }

    pub fn dim(&self) -> Option<usize> {
        self.records.first().map(|r| r.probe.dim())
    }

    /// Log-likelihood of an already normalized candidate.
    fn evaluate(&self, candidate: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let amp = candidate[t.path] + t.probe * t.sign;
                let p = (amp.norm_sqr() * 0.25).max(PROBABILITY_FLOOR);
                t.count * p.ln()
            })
            .sum()
    }
}

/// Multinomial log-likelihood `Σ_records Σ_outcomes n_j ln p_j` of the
/// normalized `candidate`. Outcomes with zero counts contribute nothing.
pub fn log_likelihood(candidate: &AmplitudeVector, log: &DataLog) -> Result<f64> {
    let dim = log.dim().ok_or(Error::EmptyData)?;
    check_same_dim(dim, candidate.dim())?;
    let unit = as_unit(candidate)?;
    Ok(log.evaluate(unit.entries()))
}

/// Leaves vectors that are already unit norm untouched, so evaluating a
/// returned estimate reproduces the exact value seen during refinement.
fn as_unit(v: &AmplitudeVector) -> Result<AmplitudeVector> {
    if (v.norm_sqr() - 1.0).abs() <= 1e-14 {
        Ok(v.clone())
    } else {
        normalize(v)
    }
}

fn unpack(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect()
}

/// Maximizes [`log_likelihood`] over all `2d` real components, starting from
/// whichever of `start` and `-start` fits the data better, and returns the
/// normalized maximizer. The result never fits worse than `start`.
pub fn refine(
    start: &AmplitudeVector,
    log: &DataLog,
    opts: &SimplexOptions,
) -> Result<AmplitudeVector> {
    let dim = log.dim().ok_or(Error::EmptyData)?;
    check_same_dim(dim, start.dim())?;
    let start = as_unit(start)?;
    // The likelihood has a local maximum near -z when the start sits near -z
    // (the two ports swap roles), so the simplex begins from the better sign.
    let flipped = start.scaled(Complex64::new(-1.0, 0.0));
    let origin = if log.evaluate(flipped.entries()) > log.evaluate(start.entries()) {
        &flipped
    } else {
        &start
    };
    let x0: Vec<f64> = origin.entries().iter().flat_map(|z| [z.re, z.im]).collect();
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let objective = |x: &[f64]| {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return f64::NEG_INFINITY;
        }
        for (b, p) in buf.iter_mut().zip(x.chunks_exact(2)) {
            *b = Complex64::new(p[0] / norm, p[1] / norm);
        }
        log.evaluate(&buf)
    };
    let result = nelder_mead(objective, &x0, opts)?;
    let best = normalize(&AmplitudeVector::new(unpack(&result.point))?)?;
    // Renormalizing the simplex point can cost a few ulps of likelihood.
    if log.evaluate(best.entries()) >= log.evaluate(start.entries()) {
        Ok(best)
    } else {
        Ok(start)
    }
}
