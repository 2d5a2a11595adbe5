use serde::{Deserialize, Serialize};

use super::{SimEnsemble, SimError};
use crate::model::{AcfCurve, CurveSource};

const MAX_BATCHES: usize = 20;

/// Variance below this share of the squared mean counts as zero.
const ZERO_VARIANCE: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Grand mean of the ensemble. The standard error treats the per-
/// realization time averages as independent samples.
pub fn mean_interference(ensemble: &SimEnsemble) -> MeanEstimate {
    let n = ensemble.n_realizations();
    let averages: Vec<f64> = (0..n)
        .map(|r| {
            let row = ensemble.row(r);
            row.iter().sum::<f64>() / row.len() as f64
        })
        .collect();
    let (mean, var) = mean_var(&averages);
    MeanEstimate {
        mean,
        std_error: (var / n as f64).sqrt(),
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: f64,
    x: f64,
    y: f64,
    xx: f64,
    yy: f64,
    xy: f64,
}

impl Moments {
    fn add(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        self.x += x;
        self.y += y;
        self.xx += x * x;
        self.yy += y * y;
        self.xy += x * y;
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.x += o.x;
        self.y += o.y;
        self.xx += o.xx;
        self.yy += o.yy;
        self.xy += o.xy;
    }

    /// Pearson coefficient, `None` when either variance vanishes relative
    /// to `scale²`.
    fn pearson(&self, scale_x: f64, scale_y: f64) -> Option<f64> {
        let mx = self.x / self.n;
        let my = self.y / self.n;
        let vx = self.xx / self.n - mx * mx;
        let vy = self.yy / self.n - my * my;
        if vx <= ZERO_VARIANCE * scale_x * scale_x || vy <= ZERO_VARIANCE * scale_y * scale_y {
            return None;
        }
        Some((self.xy / self.n - mx * my) / (vx * vy).sqrt())
    }
}

/// Ensemble estimate of `corr(I_t, I_{t+lag})` and its standard error.
///
/// At each slot `t` the Pearson coefficient is taken across realizations;
/// the estimate averages it over all `t` with `t + lag` inside the series.
/// The standard error comes from the spread of the same estimator over
/// disjoint batches of realizations.
pub fn ensemble_correlation(ensemble: &SimEnsemble, lag: u32) -> Result<(f64, f64), SimError> {
    let n_slots = ensemble.n_slots();
    let n_real = ensemble.n_realizations();
    let lag_us = lag as usize;
    if lag_us >= n_slots {
        return Err(SimError::LagTooLarge { lag, n_slots });
    }
    let pairs = n_slots - lag_us;

    // per-slot means, to centre the data before accumulating
    let mut means = vec![0.0; n_slots];
    for r in 0..n_real {
        for (m, x) in means.iter_mut().zip(ensemble.row(r)) {
            *m += x;
        }
    }
    means.iter_mut().for_each(|m| *m /= n_real as f64);

    let n_batches = MAX_BATCHES.min(n_real / 2).max(1);
    let mut batches = vec![vec![Moments::default(); pairs]; n_batches];
    for r in 0..n_real {
        let row = ensemble.row(r);
        let batch = &mut batches[r * n_batches / n_real];
        for (t, m) in batch.iter_mut().enumerate() {
            m.add(row[t] - means[t], row[t + lag_us] - means[t + lag_us]);
        }
    }

    let average = |moments: &[Moments]| -> Option<f64> {
        let values: Vec<f64> = moments
            .iter()
            .enumerate()
            .filter_map(|(t, m)| m.pearson(means[t], means[t + lag_us]))
            .collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    };

    let mut total = vec![Moments::default(); pairs];
    for batch in &batches {
        for (acc, m) in total.iter_mut().zip(batch) {
            acc.merge(m);
        }
    }
    let estimate = average(&total).ok_or(SimError::UndefinedCorrelation { lag })?;

    let batch_values: Vec<f64> = batches.iter().filter_map(|b| average(b)).collect();
    let std_error = if batch_values.len() >= 2 {
        (mean_var(&batch_values).1 / batch_values.len() as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok((estimate.clamp(-1.0, 1.0), std_error))
}

pub fn empirical_acf(ensemble: &SimEnsemble, lags: &[u32]) -> Result<AcfCurve, SimError> {
    let mut values = Vec::with_capacity(lags.len());
    let mut errors = Vec::with_capacity(lags.len());
    for &lag in lags {
        let (v, se) = ensemble_correlation(ensemble, lag)?;
        values.push(v);
        errors.push(se);
    }
    Ok(AcfCurve::new(
        lags.to_vec(),
        values,
        CurveSource::Simulated,
        ensemble.params,
        ensemble.case,
    )?
    .with_std_errors(errors))
}
