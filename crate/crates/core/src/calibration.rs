//! Window-cutoff calibration: parameter sweeps over `(f_sup, f_cut)`, the
//! linear cutoff model and its repeated cross-validation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{FcutSetting, PipelineConfig};
use crate::error::{Error, Result};
use crate::metrics::find_l_lme;
use crate::pipeline::estimate;
use crate::signal::ImpedanceSpectrum;

pub const FCUT_SLOPE: f64 = 1.05;
pub const FCUT_INTERCEPT_HZ: f64 = 6_880.0;

/// Recommended window cutoff for a highest valid frequency `f_lim`.
pub fn fcut_model(f_lim: f64) -> f64 {
    FCUT_SLOPE * f_lim + FCUT_INTERCEPT_HZ
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl Regression {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Ordinary least squares of `f_cut` on `f_lim`.
pub fn fit_fcut_regression(points: &[(f64, f64)]) -> Result<Regression> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 1e-12 * mx.abs().max(1.0).powi(2)) {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(Regression {
        slope,
        intercept,
        r_squared,
    })
}

/// Optimal cutoff of one subject at one highest valid frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSample {
    pub subject: u32,
    pub f_lim: f64,
    pub f_cut: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitOutcome {
    pub fit: Regression,
    /// Mean of predicted minus observed cutoff over the test group means, Hz.
    pub mean_error: f64,
}

fn group_means(samples: &[CutoffSample], subjects: &[u32]) -> Vec<(f64, f64)> {
    let mut groups: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for s in samples.iter().filter(|s| subjects.contains(&s.subject)) {
        let e = groups.entry(s.f_lim.to_bits()).or_insert((s.f_lim, 0.0, 0));
        e.1 += s.f_cut;
        e.2 += 1;
    }
    let mut out: Vec<(f64, f64)> = groups.into_values().map(|(x, sum, n)| (x, sum / n as f64)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Fit on the per-`f_lim` means of `train` subjects and score on those of
/// `test` subjects.
pub fn evaluate_split(samples: &[CutoffSample], train: &[u32], test: &[u32]) -> Result<SplitOutcome> {
    let fit = fit_fcut_regression(&group_means(samples, train))?;
    let test_means = group_means(samples, test);
    if test_means.is_empty() {
        return Err(Error::InsufficientGroups { needed: 1, got: 0 });
    }
    let mean_error = test_means.iter().map(|(x, y)| fit.predict(*x) - y).sum::<f64>() / test_means.len() as f64;
    Ok(SplitOutcome { fit, mean_error })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub seed: u64,
    pub train_subjects: usize,
    pub slopes: Vec<f64>,
    pub intercepts: Vec<f64>,
    pub mean_errors: Vec<f64>,
}

impl CrossValidation {
    pub fn summary(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        (mean, var.sqrt())
    }
}

fn subjects_of(samples: &[CutoffSample]) -> Vec<u32> {
    let mut s: Vec<u32> = samples.iter().map(|s| s.subject).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Repeated random subject splits. Iteration `i` draws its split from a
/// generator seeded by `(seed, i)`, so results do not depend on scheduling.
pub fn cross_validate(samples: &[CutoffSample], iterations: usize, train_subjects: usize, seed: u64) -> Result<CrossValidation> {
    let subjects = subjects_of(samples);
    if subjects.len() < train_subjects + 1 || train_subjects == 0 {
        return Err(Error::InsufficientGroups {
            needed: train_subjects + 1,
            got: subjects.len(),
        });
    }
    let run = |i: usize| -> Result<SplitOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut order = subjects.clone();
        order.shuffle(&mut rng);
        let (train, test) = order.split_at(train_subjects);
        evaluate_split(samples, train, test)
    };
    let outcomes: Vec<SplitOutcome> = map_indices(iterations, run)?;
    Ok(CrossValidation {
        seed,
        train_subjects,
        slopes: outcomes.iter().map(|o| o.fit.slope).collect(),
        intercepts: outcomes.iter().map(|o| o.fit.intercept).collect(),
        mean_errors: outcomes.iter().map(|o| o.mean_error).collect(),
    })
}

#[cfg(feature = "parallel")]
fn map_indices<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indices<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).map(f).collect()
}

/// One dataset entry: measured input impedance with its reference transfer
/// impedance and the interval in which to look for the termination.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepItem {
    pub id: String,
    pub z_ec: ImpedanceSpectrum,
    pub z_trans_ref: ImpedanceSpectrum,
    pub interval: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub f_sup: f64,
    pub f_cut: f64,
    pub item_id: String,
    /// `None` marks a failed pipeline run.
    pub l_lme_db: Option<f64>,
    pub theta_lme_deg: Option<f64>,
    pub l_lme_m: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub f_lim: f64,
    pub f_cut_grid: Vec<f64>,
    pub f_sup_grid: Vec<f64>,
    /// Per-item results ordered by `(f_sup, f_cut, item_id)`.
    pub cells: Vec<SweepCell>,
    /// Mean least level error, indexed `[f_sup][f_cut]`.
    pub l_mlme: Vec<Vec<Option<f64>>>,
    pub theta_mlme: Vec<Vec<Option<f64>>>,
}

impl CalibrationRecord {
    /// Cutoff with the smallest mean level error in row `f_sup_index`.
    pub fn best_f_cut(&self, f_sup_index: usize) -> Option<(f64, f64)> {
        self.l_mlme
            .get(f_sup_index)?
            .iter()
            .zip(&self.f_cut_grid)
            .filter_map(|(l, fc)| l.map(|l| (*fc, l)))
            .reduce(|b, p| if p.1 < b.1 { p } else { b })
    }
}

/// Order-independent mean: the values are sorted before summation.
fn stable_mean(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

fn sweep_cell(item: &SweepItem, f_sup: f64, f_cut: f64, f_lim: f64, base: &PipelineConfig) -> SweepCell {
    let cfg = PipelineConfig {
        f_lim: Some(f_lim),
        f_cut: FcutSetting::Hz(f_cut),
        f_sup,
        interval: item.interval,
        ..base.clone()
    };
    let result = estimate(&item.z_ec, &cfg).and_then(|est| {
        let measured = item.z_ec.truncated(est.config.f_lim)?;
        find_l_lme(est.area(), &measured, &item.z_trans_ref, item.interval, &cfg.constants)
    });
    let (l, th, len, error) = match result {
        Ok(s) => (Some(s.l_rmse), Some(s.theta_rmse), Some(s.l_lme), None),
        Err(e) => (None, None, None, Some(e.code().to_string())),
    };
    SweepCell {
        f_sup,
        f_cut,
        item_id: item.id.clone(),
        l_lme_db: l,
        theta_lme_deg: th,
        l_lme_m: len,
        error,
    }
}

/// Run the pipeline for every `(f_sup, f_cut, item)` and average the least
/// level errors over items. Failed items leave holes and never abort.
pub fn sweep(
    dataset: &[SweepItem],
    f_cut_grid: &[f64],
    f_sup_grid: &[f64],
    f_lim: f64,
    base: &PipelineConfig,
) -> Result<CalibrationRecord> {
    if dataset.is_empty() {
        return Err(Error::InvalidConfig("sweep dataset is empty".into()));
    }
    if f_cut_grid.is_empty() || f_sup_grid.is_empty() {
        return Err(Error::InvalidConfig("sweep grids must be non-empty".into()));
    }
    let mut items: Vec<&SweepItem> = dataset.iter().collect();
    items.sort_by(|a, b| a.id.cmp(&b.id));
    let per_row = f_cut_grid.len() * items.len();
    let total = f_sup_grid.len() * per_row;
    let cells = map_indices(total, |k| {
        let (s, rest) = (k / per_row, k % per_row);
        let (c, i) = (rest / items.len(), rest % items.len());
        Ok(sweep_cell(items[i], f_sup_grid[s], f_cut_grid[c], f_lim, base))
    })?;

    let mut l_mlme = vec![vec![None; f_cut_grid.len()]; f_sup_grid.len()];
    let mut theta_mlme = l_mlme.clone();
    for s in 0..f_sup_grid.len() {
        for c in 0..f_cut_grid.len() {
            let row = &cells[s * per_row + c * items.len()..][..items.len()];
            let mut l: Vec<f64> = row.iter().filter_map(|x| x.l_lme_db).collect();
            let mut t: Vec<f64> = row.iter().filter_map(|x| x.theta_lme_deg).collect();
            l_mlme[s][c] = stable_mean(&mut l);
            theta_mlme[s][c] = stable_mean(&mut t);
        }
    }
    Ok(CalibrationRecord {
        f_lim,
        f_cut_grid: f_cut_grid.to_vec(),
        f_sup_grid: f_sup_grid.to_vec(),
        cells,
        l_mlme,
        theta_mlme,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn model_anchors() {
        assert!((fcut_model(10_000.0) - 17_380.0).abs() < 1e-9);
        assert!((fcut_model(12_000.0) - 19_480.0).abs() < 1e-9);
        assert!((fcut_model(20_000.0) - 27_880.0).abs() < 1e-9);
    }

    #[test]
    fn exact_line_is_recovered() {
        let pts: Vec<(f64, f64)> = [8e3, 10e3, 12e3, 20e3].iter().map(|x| (*x, fcut_model(*x))).collect();
        let r = fit_fcut_regression(&pts).unwrap();
        assert!((r.slope - 1.05).abs() < 1e-12);
        assert!((r.intercept - 6880.0).abs() < 1e-7);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_points_fit_perfectly() {
        let r = fit_fcut_regression(&[(1.0, 5.0), (3.0, -2.0)]).unwrap();
        assert!((r.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fit() {
        assert_eq!(fit_fcut_regression(&[(5.0, 1.0), (5.0, 2.0)]), Err(Error::DegenerateFit));
        assert_eq!(fit_fcut_regression(&[(5.0, 1.0)]), Err(Error::DegenerateFit));
    }

    fn linear_samples(subjects: u32, jitter: impl Fn(u32, usize) -> f64) -> Vec<CutoffSample> {
        let lims = [8e3, 10e3, 12e3, 16e3, 20e3];
        (0..subjects)
            .flat_map(|s| {
                let jitter = &jitter;
                lims.iter().enumerate().map(move |(k, f)| CutoffSample {
                    subject: s,
                    f_lim: *f,
                    f_cut: fcut_model(*f) + jitter(s, k),
                })
            })
            .collect()
    }

    #[test]
    fn train_equals_test_has_zero_error() {
        let samples = linear_samples(4, |s, k| ((s * 7 + k as u32 * 3) % 5) as f64 * 100.0);
        let all = [0, 1, 2, 3];
        let out = evaluate_split(&samples, &all, &all).unwrap();
        assert!(out.mean_error.abs() < 1e-8);
    }

    #[test]
    fn noiseless_data_collapse() {
        let samples = linear_samples(21, |_, _| 0.0);
        let cv = cross_validate(&samples, 50, 10, 7).unwrap();
        assert!(cv.slopes.iter().all(|s| (s - 1.05).abs() < 1e-9));
        assert!(cv.mean_errors.iter().all(|e| e.abs() < 1e-6));
    }

    #[test]
    fn insufficient_groups() {
        let samples = linear_samples(3, |_, _| 0.0);
        assert!(matches!(cross_validate(&samples, 1, 3, 0), Err(Error::InsufficientGroups { .. })));
    }

    #[test]
    fn cross_validation_is_reproducible() {
        let samples = linear_samples(21, |s, k| ((s as f64 * 1.3 + k as f64).sin()) * 500.0);
        let a = cross_validate(&samples, 100, 10, 42).unwrap();
        let b = cross_validate(&samples, 100, 10, 42).unwrap();
        assert_eq!(a, b);
        let c = cross_validate(&samples, 100, 10, 43).unwrap();
        assert_ne!(a.slopes, c.slopes);
    }

    #[test]
    fn stable_mean_ignores_order() {
        let mut a = vec![0.1, 0.2, 0.3, 1e10, -1e10];
        let mut b = vec![-1e10, 0.3, 1e10, 0.1, 0.2];
        assert_eq!(stable_mean(&mut a), stable_mean(&mut b));
    }

    proptest! {
        #[test]
        fn model_is_affine(a in 0.0f64..5e4, b in 0.0f64..5e4) {
            let lhs = fcut_model(a) + fcut_model(b);
            let rhs = fcut_model(a + b) + FCUT_INTERCEPT_HZ;
            prop_assert!((lhs - rhs).abs() < 1e-6);
        }
    }
}
