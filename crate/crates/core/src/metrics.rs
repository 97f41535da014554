//! Benchmarks, sample statistics and power-law fits for MSE curves.

use crate::error::{Error, Result};
use crate::qudit::{squared_error, AmplitudeVector};

/// Gill-Massar bound for the MSE of a pure state, `(d − 1) / N_T`.
///
/// Estimation curves are compared with `gill_massar_mse(2 * d, n_t)`, the
/// bound for `2d − 1` real parameters, since the squared error also
/// resolves the global phase.
pub fn gill_massar_mse(dim: usize, n_t: u64) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if n_t == 0 {
        return Err(Error::InvalidData("N_T must be positive".into()));
    }
    Ok((dim - 1) as f64 / n_t as f64)
}

/// Predicted MSE of a column-wise unitary estimate, `d²(2d + α) / N_T*`,
/// where `N_T*` counts copies spent on all `d` columns together.
pub fn predicted_unitary_mse(dim: usize, alpha: f64, n_t_star: u64) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let d = dim as f64;
    Ok(d * d * (2.0 * d + alpha) / n_t_star as f64)
}

/// Mean squared error of a sample of estimates of one target.
pub fn mse_over_estimates(target: &AmplitudeVector, estimates: &[AmplitudeVector]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut total = 0.0;
    for e in estimates {
        total += squared_error(target, e)?;
    }
    Ok(total / estimates.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleStatistics {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Standard error of the mean; zero for a single value.
    pub std_error: f64,
    pub count: usize,
}

impl SampleStatistics {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Quantile with linear interpolation between closest ranks on the sorted
/// sample (`h = (n − 1) q`).
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summary_statistics(values: &[f64]) -> Result<SampleStatistics> {
    if values.is_empty() {
        return Err(Error::EmptyData);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite sample value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_error = if n > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(SampleStatistics {
        mean,
        median: quantile_sorted(&sorted, 0.5),
        q1: quantile_sorted(&sorted, 0.25),
        q3: quantile_sorted(&sorted, 0.75),
        std_error,
        count: n,
    })
}

/// One `(k, N_T, MSE)` sample of an estimation curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitPoint {
    pub iteration: usize,
    pub n_t: f64,
    pub mse: f64,
}

/// `MSE ≈ p / N_T^a` over an inclusive iteration window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub p: f64,
    pub a: f64,
    pub window: (usize, usize),
    /// Root-mean-square residual of the fit in `ln MSE`.
    pub residual: f64,
}

/// Default fitting windows: the early and late asymptotic regimes.
pub const DEFAULT_WINDOWS: [(usize, usize); 2] = [(10, 45), (46, 100)];

/// Ordinary least squares of `ln MSE = ln p − a ln N_T` over the points
/// whose iteration falls in `window`.
pub fn power_law_fit(points: &[FitPoint], window: (usize, usize)) -> Result<PowerLawFit> {
    let (lo, hi) = window;
    if lo >= hi {
        return Err(Error::Range(format!("empty window {lo}:{hi}")));
    }
    let selected: Vec<&FitPoint> = points
        .iter()
        .filter(|pt| (lo..=hi).contains(&pt.iteration))
        .collect();
    if selected.len() < 3 {
        return Err(Error::InvalidData(format!(
            "power-law fit needs at least 3 points in {lo}:{hi}, found {}",
            selected.len()
        )));
    }
    if selected.iter().any(|pt| !(pt.n_t > 0.0) || !(pt.mse > 0.0)) {
        return Err(Error::InvalidData(
            "power-law fit needs positive N_T and MSE".into(),
        ));
    }
    let xs: Vec<f64> = selected.iter().map(|pt| pt.n_t.ln()).collect();
    let ys: Vec<f64> = selected.iter().map(|pt| pt.mse.ln()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidData("all points share the same N_T".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(PowerLawFit {
        p: intercept.exp(),
        a: -slope,
        window,
        residual: (rss / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::qudit::haar_random_state;
    use crate::rng::RngStream;

    #[test]
    fn gill_massar_examples() {
        assert_abs_diff_eq!(gill_massar_mse(2, 100).unwrap(), 0.01);
        assert_eq!(gill_massar_mse(2, 1).unwrap(), 1.0);
        // benchmark line at d = 2, N = 10^3, k = 10 is GM(2d, 2Nk)
        assert_abs_diff_eq!(
            gill_massar_mse(4, 2 * 1000 * 10).unwrap(),
            1.5e-4,
            epsilon = 1e-18
        );
        assert!(matches!(
            gill_massar_mse(1, 10),
            Err(Error::InvalidDimension(1))
        ));
    }

    #[test]
    fn gill_massar_monotone() {
        for d in 2..10 {
            for n in 1..200 {
                assert!(gill_massar_mse(d, n + 1).unwrap() < gill_massar_mse(d, n).unwrap());
                assert!(gill_massar_mse(d + 1, n).unwrap() > gill_massar_mse(d, n).unwrap());
            }
        }
    }

    #[test]
    fn predicted_unitary_examples() {
        assert_abs_diff_eq!(
            predicted_unitary_mse(2, 0.0, 16_000).unwrap(),
            1e-3,
            epsilon = 1e-18
        );
        for d in 2..6 {
            let n_t = 12_345u64;
            let alpha = 0.3;
            let lhs = predicted_unitary_mse(d, alpha, d as u64 * n_t).unwrap();
            let rhs = d as f64 * (2.0 * d as f64 + alpha) / n_t as f64;
            assert!((lhs - rhs).abs() <= 1e-15 * rhs);
            assert_abs_diff_eq!(
                predicted_unitary_mse(d, 0.0, n_t).unwrap(),
                (d * d * 2 * d) as f64 / n_t as f64,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn mse_examples() {
        let z = AmplitudeVector::basis(2, 0).unwrap();
        let w = AmplitudeVector::basis(2, 1).unwrap();
        assert_eq!(
            mse_over_estimates(&z, &[z.clone(), z.clone()]).unwrap(),
            0.0
        );
        assert_eq!(mse_over_estimates(&z, &[z.clone(), w]).unwrap(), 1.0);
        assert!(matches!(mse_over_estimates(&z, &[]), Err(Error::EmptyData)));
    }

    #[test]
    fn mse_matches_direct_summation() {
        let mut rng = RngStream::new(1, 0);
        let z = haar_random_state(3, &mut rng).unwrap();
        let est: Vec<_> = (0..100)
            .map(|_| haar_random_state(3, &mut rng).unwrap())
            .collect();
        let mut direct = 0.0;
        for e in &est {
            for i in 0..3 {
                direct += (z[i] - e[i]).norm_sqr();
            }
        }
        direct /= 100.0;
        assert!((mse_over_estimates(&z, &est).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn statistics_examples() {
        let s = summary_statistics(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((s.mean, s.median), (2.5, 2.5));
        let s = summary_statistics(&[0.7]).unwrap();
        assert_eq!(
            (s.mean, s.median, s.q1, s.q3, s.count),
            (0.7, 0.7, 0.7, 0.7, 1)
        );
        let s = summary_statistics(&[8.0, 2.0, 3.0, 1.0, 5.0, 6.0, 7.0, 4.0]).unwrap();
        assert_abs_diff_eq!(s.q1, 2.75);
        assert_abs_diff_eq!(s.q3, 6.25);
        assert!(s.q1 <= s.median && s.median <= s.q3);
        assert!(matches!(summary_statistics(&[]), Err(Error::EmptyData)));
    }

    #[test]
    fn symmetric_sample_mean_equals_median() {
        let s = summary_statistics(&[-3.0, 0.5, 1.0, 1.5, 5.0]).unwrap();
        assert_abs_diff_eq!(s.mean, s.median);
    }

    fn curve(shots: f64, f: impl Fn(f64) -> f64) -> Vec<FitPoint> {
        (1..=100)
            .map(|k| {
                let n_t = 2.0 * k as f64 * shots;
                FitPoint {
                    iteration: k,
                    n_t,
                    mse: f(n_t),
                }
            })
            .collect()
    }

    #[test]
    fn fit_exact_power_laws() {
        for d in [2usize, 4, 8] {
            let p = (2 * d - 1) as f64;
            let pts = curve(1000.0, |n| p / n);
            let fit = power_law_fit(&pts, (10, 45)).unwrap();
            assert!((fit.p - p).abs() < 1e-10 * p && (fit.a - 1.0).abs() < 1e-10);
            assert!(fit.residual < 1e-10);
        }
        let pts = curve(1000.0, |n| 6.34 / n.powf(1.03));
        let fit = power_law_fit(&pts, (10, 45)).unwrap();
        assert!(
            (fit.p - 6.34).abs() < 1e-8 && (fit.a - 1.03).abs() < 1e-8,
            "{fit:?}"
        );
        let pts = curve(1000.0, |_| 0.2);
        assert_abs_diff_eq!(
            power_law_fit(&pts, (46, 100)).unwrap().a,
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fit_preconditions() {
        let pts = curve(1000.0, |n| 3.0 / n);
        assert!(matches!(
            power_law_fit(&pts, (10, 11)),
            Err(Error::InvalidData(_))
        ));
        assert!(matches!(
            power_law_fit(&pts, (20, 10)),
            Err(Error::Range(_))
        ));
        let mut bad = pts.clone();
        bad[20].mse = 0.0;
        assert!(matches!(
            power_law_fit(&bad, (10, 45)),
            Err(Error::InvalidData(_))
        ));
    }
}
