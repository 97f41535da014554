//! Derivative-free Nelder-Mead simplex maximization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluation budget per free parameter when no explicit budget is set.
pub const EVALUATIONS_PER_PARAMETER: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexOptions {
    /// Evaluation budget; `None` means `200 · n` for `n` parameters.
    pub max_evaluations: Option<usize>,
    pub x_tolerance: f64,
    pub f_tolerance: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Per-coordinate displacement used to build the initial simplex.
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_evaluations: None,
            x_tolerance: 1e-8,
            f_tolerance: 1e-10,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.05,
        }
    }
}

impl SimplexOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("simplex option {what}")));
        if self.max_evaluations == Some(0) {
            return bad("`max_evaluations` must be positive");
        }
        if !(self.x_tolerance > 0.0) || !(self.f_tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.reflection > 0.0) {
            return bad("`reflection` must be > 0");
        }
        if !(self.expansion > 1.0) {
            return bad("`expansion` must be > 1");
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad("`contraction` must be in (0, 1)");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("`shrink` must be in (0, 1)");
        }
        if !(self.initial_step > 0.0) || !self.initial_step.is_finite() {
            return bad("`initial_step` must be positive");
        }
        Ok(())
    }

    pub fn budget(&self, parameters: usize) -> usize {
        self.max_evaluations
            .unwrap_or(EVALUATIONS_PER_PARAMETER * parameters.max(1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Maximizes `objective` starting from `start`.
///
/// Internally minimizes the negated objective. Non-finite objective values
/// are treated as infinitely bad, so the simplex never moves onto them. The
/// returned value is never below `objective(start)` because the start point
/// stays in the simplex until it is beaten.
pub fn nelder_mead<F>(
    mut objective: F,
    start: &[f64],
    opts: &SimplexOptions,
) -> Result<SimplexResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let budget = opts.budget(n);
    let mut evaluations = 0;
    let mut cost = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = objective(x);
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };

    let f0 = cost(start, &mut evaluations);
    if !f0.is_finite() {
        return Err(Error::InvalidStart);
    }
    if n == 0 {
        return Ok(SimplexResult {
            point: vec![],
            value: -f0,
            evaluations,
            converged: true,
        });
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f0));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += opts.initial_step;
        let f = cost(&x, &mut evaluations);
        simplex.push((x, f));
    }

    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let point_at = |centroid: &[f64], worst: &[f64], t: f64| -> Vec<f64> {
        centroid
            .iter()
            .zip(worst)
            .map(|(c, w)| c + t * (c - w))
            .collect()
    };

    loop {
        // Stable sort keeps the earliest vertex first among ties.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_spread = simplex[1..]
            .iter()
            .map(|(_, f)| (f - best.1).abs())
            .fold(0.0, f64::max);
        if x_spread <= opts.x_tolerance && f_spread <= opts.f_tolerance {
            converged = true;
            break;
        }
        if evaluations >= budget {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let second_worst = simplex[n - 1].1;
        let best_f = simplex[0].1;

        let xr = point_at(&centroid, &worst.0, opts.reflection);
        let fr = cost(&xr, &mut evaluations);
        if fr < best_f {
            let xe = point_at(&centroid, &worst.0, opts.reflection * opts.expansion);
            let fe = cost(&xe, &mut evaluations);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second_worst {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc, accept_below) = if fr < worst.1 {
            let xc = point_at(&centroid, &worst.0, opts.reflection * opts.contraction);
            let fc = cost(&xc, &mut evaluations);
            (xc, fc, fr)
        } else {
            let xc = point_at(&centroid, &worst.0, -opts.contraction);
            let fc = cost(&xc, &mut evaluations);
            (xc, fc, worst.1)
        };
        if fc <= accept_below {
            simplex[n] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for (x, f) in simplex[1..].iter_mut() {
            for (xi, bi) in x.iter_mut().zip(&x_best) {
                *xi = bi + opts.shrink * (*xi - bi);
            }
            *f = cost(x, &mut evaluations);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, f) = simplex.swap_remove(0);
    Ok(SimplexResult {
        point,
        value: -f,
        evaluations,
        converged,
    })
}
