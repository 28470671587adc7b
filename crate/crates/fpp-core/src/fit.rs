//! Scaling fits: weighted least squares of sweep series against logarithmic,
//! power-law and linear growth models.
//!
//! Fits are linear regressions in transformed coordinates (semilog-x for the
//! logarithmic model, log-log for the power law, identity for linear), with
//! inverse-variance weights from the per-point standard errors and a
//! residual-scaled covariance for the confidence intervals.

use crate::error::{Error, Result};
use crate::stats::t_quantile_975;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// mean = intercept + slope * ln t
    Logarithmic,
    /// mean = exp(intercept) * t^slope
    PowerLaw,
    /// mean = intercept + slope * t
    Linear,
}

/// One sweep point: abscissa, sample mean, standard error of the mean.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingFit {
    pub series: String,
    pub model: FitModel,
    pub intercept: f64,
    pub slope: f64,
    /// Half-widths of the 95% confidence intervals.
    pub intercept_ci95: f64,
    pub slope_ci95: f64,
    pub r_squared: f64,
    pub n: usize,
}

impl ScalingFit {
    pub fn slope_interval(&self) -> (f64, f64) {
        (self.slope - self.slope_ci95, self.slope + self.slope_ci95)
    }
}

/// Fit a series against a growth model.
pub fn fit_scaling(series: &str, points: &[SeriesPoint], model: FitModel) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    let mut ws = Vec::with_capacity(points.len());
    for p in points {
        if p.t <= 0.0 {
            return Err(Error::DegenerateFit("abscissa must be positive".into()));
        }
        let (x, y, sd) = match model {
            FitModel::Logarithmic => (p.t.ln(), p.mean, p.stderr),
            FitModel::Linear => (p.t, p.mean, p.stderr),
            FitModel::PowerLaw => {
                if p.mean <= 0.0 {
                    return Err(Error::DegenerateFit(
                        "power-law fit needs positive means".into(),
                    ));
                }
                // delta method: sd(ln y) = sd(y) / y
                (p.t.ln(), p.mean.ln(), p.stderr / p.mean)
            }
        };
        xs.push(x);
        ys.push(y);
        ws.push(sd);
    }
    let weights: Vec<f64> = if ws.iter().all(|&s| s.is_finite() && s > 0.0) {
        ws.iter().map(|&s| 1.0 / (s * s)).collect()
    } else {
        vec![1.0; xs.len()] // exact or degenerate errors: unweighted
    };
    let sw: f64 = weights.iter().sum();
    let mx = xs.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(&weights).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(&weights).map(|(x, w)| w * (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .zip(&weights)
        .map(|((x, y), w)| w * (x - mx) * (y - my))
        .sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("zero variance in the abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;

    let ssr: f64 = xs
        .iter()
        .zip(ys.iter())
        .zip(&weights)
        .map(|((x, y), w)| {
            let r = y - intercept - slope * x;
            w * r * r
        })
        .sum();
    let sst: f64 = ys.iter().zip(&weights).map(|(y, w)| w * (y - my) * (y - my)).sum();
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };

    let dof = (points.len() - 2) as u64;
    let sigma2 = if dof > 0 { ssr / dof as f64 } else { 0.0 };
    let tq = t_quantile_975(dof);
    let slope_se = (sigma2 / sxx).sqrt();
    let intercept_se = (sigma2 * (1.0 / sw + mx * mx / sxx)).sqrt();

    Ok(ScalingFit {
        series: series.to_string(),
        model,
        intercept,
        slope,
        intercept_ci95: tq * intercept_se,
        slope_ci95: tq * slope_se,
        r_squared,
        n: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(f: impl Fn(f64) -> f64, stderr: f64) -> Vec<SeriesPoint> {
        [50.0, 100.0, 200.0, 400.0, 800.0]
            .iter()
            .map(|&t| SeriesPoint { t, mean: f(t), stderr })
            .collect()
    }

    #[test]
    fn exact_logarithmic_series_recovers_coefficients() {
        let fit =
            fit_scaling("f", &series(|t| 2.0 * t.ln(), 0.0), FitModel::Logarithmic).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!(fit.slope_ci95 < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_cube_root_power_law_lands_in_the_expected_band() {
        // deterministic 1% multiplicative "noise"
        let pts: Vec<SeriesPoint> = [50.0f64, 100.0, 200.0, 400.0, 800.0]
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let bump = 1.0 + 0.01 * ((i as f64 * 2.399).sin());
                SeriesPoint { t, mean: t.powf(1.0 / 3.0) * bump, stderr: 0.01 * t.powf(1.0 / 3.0) }
            })
            .collect();
        let fit = fit_scaling("f", &pts, FitModel::PowerLaw).unwrap();
        let (lo, hi) = fit.slope_interval();
        assert!(lo > 0.30 && hi < 0.37, "slope CI [{lo}, {hi}]");
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let two = &series(|t| t, 1.0)[..2];
        assert!(matches!(
            fit_scaling("f", two, FitModel::Linear),
            Err(Error::DegenerateFit(_))
        ));
        let flat: Vec<SeriesPoint> =
            (0..4).map(|_| SeriesPoint { t: 10.0, mean: 3.0, stderr: 1.0 }).collect();
        assert!(fit_scaling("f", &flat, FitModel::Linear).is_err());
        let negative = vec![
            SeriesPoint { t: 10.0, mean: -1.0, stderr: 1.0 },
            SeriesPoint { t: 20.0, mean: 1.0, stderr: 1.0 },
            SeriesPoint { t: 40.0, mean: 2.0, stderr: 1.0 },
        ];
        assert!(fit_scaling("f", &negative, FitModel::PowerLaw).is_err());
    }

    proptest! {
        /// Exact synthetic series from each model family are recovered.
        #[test]
        fn generators_are_recovered(a in -5.0f64..5.0, b in 0.1f64..3.0) {
            let log_pts = series(|t| a + b * t.ln(), 0.0);
            let fit = fit_scaling("s", &log_pts, FitModel::Logarithmic).unwrap();
            prop_assert!((fit.slope - b).abs() < 1e-9);
            prop_assert!((fit.intercept - a).abs() < 1e-9);

            let lin_pts = series(|t| a + b * t, 0.0);
            let fit = fit_scaling("s", &lin_pts, FitModel::Linear).unwrap();
            prop_assert!((fit.slope - b).abs() < 1e-9);

            let pow_pts = series(|t| a.exp() * t.powf(b), 0.0);
            let fit = fit_scaling("s", &pow_pts, FitModel::PowerLaw).unwrap();
            prop_assert!((fit.slope - b).abs() < 1e-9, "slope {} vs {}", fit.slope, b);
            prop_assert!((fit.intercept - a).abs() < 1e-7);
        }
    }
}
