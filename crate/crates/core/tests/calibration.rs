mod common;

use webster_core::calibration::{cross_validate, fcut_model, sweep, CutoffSample, SweepItem};
use webster_core::horns::{self, ear_canal_suite, measurement_grid, UMBO_OFFSET};
use webster_core::io::write_sweep_matrix_csv;
use webster_core::metrics::find_l_lme;
use webster_core::pipeline::estimate;
use webster_core::transmission::LoadModel;
use webster_core::{FcutSetting, ImpedanceSpectrum, IntervalPreset, PhysicalConstants, PipelineConfig};

use rand::Rng;

fn dataset(n: usize) -> Vec<SweepItem> {
    let c = PhysicalConstants::default();
    ear_canal_suite()
        .iter()
        .take(n)
        .enumerate()
        .map(|(i, s)| {
            let case = horns::synthesize(s, measurement_grid(100.0, 20e3), &c, &LoadModel::RigidTermination, UMBO_OFFSET).unwrap();
            SweepItem {
                id: format!("h{i}"),
                z_ec: case.z_ec,
                z_trans_ref: case.z_trans_ref,
                interval: IntervalPreset::Entrance.bounds(),
            }
        })
        .collect()
}

#[test]
fn single_item_mean_is_the_item() {
    let data = dataset(1);
    let rec = sweep(&data, &[28e3], &[3.5e6], 20e3, &PipelineConfig::default()).unwrap();
    let cfg = PipelineConfig {
        f_cut: FcutSetting::Hz(28e3),
        ..PipelineConfig::default()
    };
    let est = estimate(&data[0].z_ec, &cfg).unwrap();
    let s = find_l_lme(est.area(), &data[0].z_ec, &data[0].z_trans_ref, data[0].interval, &cfg.constants).unwrap();
    assert_eq!(rec.l_mlme[0][0], Some(s.l_rmse));
    let mut csv = Vec::new();
    write_sweep_matrix_csv(&mut csv, &rec, false).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 2);
}

#[test]
fn failed_items_leave_holes() {
    let mut data = dataset(2);
    let f: Vec<f64> = (1..=50).map(|i| i as f64 * 100.0).collect();
    let flat = vec![num_complex::Complex64::new(1e7, 0.0); f.len()];
    data[1].z_ec = ImpedanceSpectrum::new(f.clone(), flat.clone()).unwrap();
    data[1].z_trans_ref = ImpedanceSpectrum::new(f, flat).unwrap();
    let rec = sweep(&data, &[28e3], &[3.5e6], 20e3, &PipelineConfig::default()).unwrap();
    let bad = rec.cells.iter().find(|c| c.item_id == "h1").unwrap();
    assert!(bad.l_lme_db.is_none() && bad.error.is_some());
    let good = rec.cells.iter().find(|c| c.item_id == "h0").unwrap();
    assert_eq!(rec.l_mlme[0][0], good.l_lme_db);
}

#[test]
fn wide_grids_are_accepted() {
    let f_cut: Vec<f64> = (8..=44).map(|k| k as f64 * 1e3).collect();
    let f_sup = [96e3, 192e3, 384e3, 768e3, 1.536e6, 3.5e6];
    let rec = sweep(&dataset(1), &f_cut, &f_sup, 20e3, &PipelineConfig::default()).unwrap();
    assert_eq!(rec.l_mlme.len(), f_sup.len());
    assert!(rec.l_mlme.iter().all(|r| r.len() == f_cut.len()));
    assert_eq!(rec.cells.len(), f_cut.len() * f_sup.len());
}

#[test]
fn higher_rate_is_not_worse_at_the_best_cutoff() {
    let f_cut: Vec<f64> = (20..=36).step_by(2).map(|k| k as f64 * 1e3).collect();
    let rec = sweep(&dataset(5), &f_cut, &[192e3, 3.5e6], 20e3, &PipelineConfig::default()).unwrap();
    let (_, low) = rec.best_f_cut(0).unwrap();
    let (_, high) = rec.best_f_cut(1).unwrap();
    assert!(high <= low, "3.5 MHz {high} dB vs 192 kHz {low} dB");
}

#[test]
fn jittered_cross_validation_is_unbiased() {
    let mut r = common::rng(11);
    let samples: Vec<CutoffSample> = (0..21u32)
        .flat_map(|s| {
            [8e3, 10e3, 12e3, 16e3, 20e3]
                .into_iter()
                .map(|f| (s, f))
                .collect::<Vec<_>>()
        })
        .map(|(s, f)| CutoffSample {
            subject: s,
            f_lim: f,
            f_cut: fcut_model(f) + r.random_range(-500.0..500.0),
        })
        .collect();
    let cv = cross_validate(&samples, 1000, 10, 5).unwrap();
    let (mean, std) = webster_core::calibration::CrossValidation::summary(&cv.mean_errors);
    assert!(mean.abs() < 100.0, "mean {mean}");
    assert!(std < 500.0, "std {std}");
    let (slope, _) = webster_core::calibration::CrossValidation::summary(&cv.slopes);
    assert!((slope - 1.05).abs() < 0.05);
}
