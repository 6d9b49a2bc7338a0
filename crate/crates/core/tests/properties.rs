use proptest::prelude::*;

use lakin::dataset::io::{load_labels, load_trial, write_labels, write_trial};
use lakin::dataset::{ImuSample, Leg, RepEvents, SegmentationLabels, TrialMeta, TrialRecording, Updrs};
use lakin::features::time::repetitions;
use lakin::features::{amplitude_spectrum, lr_differences, spectrum_power, trial_time_features};
use lakin::ml::{
    auc, error_cdf, loocv, standardize_fit_apply, ClassifierConfig, FeatureMatrix, Method, PcaModel,
};
use lakin::orientation::{
    angular_velocity_series, best_fit_rotation, compute_kinematics, estimate_shift_samples, fuse_orientation,
    initial_orientation, MountingConfig,
};
use lakin::segmentation::{auto_segment, SegmentParams};
use lakin::synth::{generate_trial, SynthParams};

fn updrs(h: u8) -> Updrs {
    Updrs::from_half_steps(h).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0]
}

fn recording(samples: Vec<ImuSample>) -> TrialRecording {
    TrialRecording::new(TrialMeta::new("p", "p", Leg::Right, updrs(0)), samples).unwrap()
}

/// Label sets laid out on `[1, ~40]` s, with strictly ordered events.
fn label_set() -> impl Strategy<Value = SegmentationLabels> {
    prop::collection::vec((0.0f64..0.6, 0.1f64..1.0, 0.1f64..1.0), 3..=10).prop_map(|gaps| {
        let mut cursor = 1.0;
        let reps = gaps
            .into_iter()
            .map(|(pause, rise, fall)| {
                let s = cursor + pause;
                let p = s + rise;
                let e = p + fall;
                cursor = e;
                RepEvents::new(s, p, e)
            })
            .collect();
        SegmentationLabels::new(reps).unwrap()
    })
}

fn series(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-20.0f64..70.0, n)
}

fn grid_time(n: usize, offset: f64) -> Vec<f64> {
    (0..n).map(|i| offset + i as f64 / 102.4).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trial_csv_round_trip(values in prop::collection::vec(prop::array::uniform9(-1e3f64..1e3), 2..40)) {
        let samples: Vec<ImuSample> = values
            .iter()
            .enumerate()
            .map(|(i, v)| ImuSample {
                t: i as f64 * 0.009765625,
                acc: [v[0], v[1], v[2]],
                gyr: [v[3], v[4], v[5]],
                mag: [v[6], v[7], v[8]],
            })
            .collect();
        let rec = recording(samples);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trial(&path, &rec).unwrap();
        let back = load_trial(&path, rec.meta.clone()).unwrap();
        prop_assert_eq!(back.len(), rec.len());
        for (a, b) in back.samples().iter().zip(rec.samples()) {
            let pairs = a.acc.iter().chain(&a.gyr).chain(&a.mag).zip(b.acc.iter().chain(&b.gyr).chain(&b.mag));
            for (x, y) in pairs {
                prop_assert!(close(*x, *y, 1e-9));
            }
        }
    }

    #[test]
    fn loaded_labels_are_ordered(labels in label_set()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.csv");
        write_labels(&path, &labels).unwrap();
        let back = load_labels(&path).unwrap();
        prop_assert!(back.is_ordered());
        let r = back.reps();
        for i in 0..r.len() {
            prop_assert!(r[i].start < r[i].peak && r[i].peak < r[i].end);
            if i + 1 < r.len() {
                prop_assert!(r[i].end <= r[i + 1].start);
            }
        }
    }

    #[test]
    fn fusion_keeps_unit_norm(
        steps in prop::collection::vec((vec3(), vec3(), vec3()), 2..200),
        beta in 0.01f64..1.0,
    ) {
        let samples: Vec<ImuSample> = steps
            .iter()
            .enumerate()
            .map(|(i, (g, a, m))| ImuSample {
                t: i as f64 / 102.4,
                gyr: g.map(|v| v * 500.0),
                acc: [a[0], a[1], a[2] + 9.81],
                mag: *m,
            })
            .collect();
        let rec = recording(samples);
        let cfg = MountingConfig { beta, ..Default::default() };
        let q0 = initial_orientation(rec.samples()[0].acc, rec.samples()[0].mag).unwrap();
        for q in fuse_orientation(&rec, &cfg, q0).unwrap() {
            prop_assert!((q.norm_squared() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn angular_velocity_is_linear(gyr in prop::collection::vec(vec3(), 2..50), c in -10.0f64..10.0) {
        let mk = |scale: f64| {
            recording(
                gyr.iter()
                    .enumerate()
                    .map(|(i, g)| ImuSample {
                        t: i as f64,
                        acc: [0.0, 0.0, 9.81],
                        gyr: g.map(|v| v * 100.0 * scale),
                        mag: [1.0, 0.0, -1.0],
                    })
                    .collect(),
            )
        };
        let cfg = MountingConfig::default();
        let base = angular_velocity_series(&mk(1.0), &cfg);
        let scaled = angular_velocity_series(&mk(c), &cfg);
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!(close(c * a, *b, 1e-12));
        }
    }

    #[test]
    fn kabsch_recovers_rotation(
        axis in vec3().prop_filter("non-zero axis", |a| a.iter().map(|v| v * v).sum::<f64>() > 1e-3),
        angle in -3.1f64..3.1,
        points in prop::collection::vec(prop::array::uniform3(-50.0f64..50.0), 4..12),
    ) {
        let r = nalgebra::Rotation3::from_axis_angle(
            &nalgebra::Unit::new_normalize(nalgebra::Vector3::from(axis)),
            angle,
        );
        let measured: Vec<[f64; 3]> = points.iter().map(|p| (r * nalgebra::Vector3::from(*p)).into()).collect();
        if let Ok(est) = best_fit_rotation(&points, &measured) {
            prop_assert!((est.matrix() - r.matrix()).norm() < 1e-9);
        }
    }

    #[test]
    fn time_shift_is_exact(
        base in prop::collection::vec(-1.0f64..1.0, 96..400),
        frac in -0.99f64..0.99,
    ) {
        let n = base.len() * 2 / 3;
        let quarter = (n / 4) as i64;
        let k = (frac * (quarter - 1) as f64).round() as i64;
        let m = (base.len() - n) as i64 / 2;
        let a = &base[m as usize..m as usize + n];
        let b = &base[(m - k) as usize..(m - k) as usize + n];
        prop_assume!(a.iter().any(|&v| v != a[0]));
        prop_assert_eq!(estimate_shift_samples(a, b).unwrap(), k);
    }

    #[test]
    fn parseval_and_scaling(x in prop::collection::vec(-1e3f64..1e3, 2..512), c in 0.01f64..100.0) {
        let s = amplitude_spectrum(&x, 100.0).unwrap();
        let p = spectrum_power(&s);
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let energy: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        prop_assert!((n * n * p - energy).abs() <= 1e-9 * energy.max(1e-300));
        prop_assert!(s.values.iter().all(|&v| v >= 0.0));
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        let ps = spectrum_power(&amplitude_spectrum(&scaled, 100.0).unwrap());
        prop_assert!(close(ps, c * c * p, 1e-9));
    }

    #[test]
    fn spectrum_ignores_circular_shift(x in prop::collection::vec(-10.0f64..10.0, 2..256), shift in 0usize..256) {
        let n = x.len();
        let rotated: Vec<f64> = (0..n).map(|i| x[(i + shift) % n]).collect();
        let a = amplitude_spectrum(&x, 1.0).unwrap();
        let b = amplitude_spectrum(&rotated, 1.0).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            prop_assert!((u - v).abs() < 1e-9);
        }
        for h in 1..n {
            prop_assert!((a.values[h] - a.values[n - h]).abs() < 1e-9);
        }
    }

    #[test]
    fn features_ignore_time_offset(labels in label_set(), theta in series(4200), offset in -100.0f64..100.0) {
        let t = grid_time(theta.len(), 0.0);
        let shifted_t = grid_time(theta.len(), offset);
        let a = trial_time_features(&t, &theta, &labels).unwrap();
        let b = trial_time_features(&shifted_t, &theta, &labels.shifted(offset)).unwrap();
        for (x, y) in [
            (a.theta, b.theta), (a.omega, b.omega), (a.pause, b.pause), (a.regularity, b.regularity),
            (a.theta_sd, b.theta_sd), (a.omega_sd, b.omega_sd), (a.pause_sd, b.pause_sd),
            (a.regularity_sd, b.regularity_sd), (a.frequency, b.frequency),
        ] {
            prop_assert!(close(x, y, 1e-6), "{} vs {}", x, y);
        }
    }

    #[test]
    fn amplitude_scaling(labels in label_set(), theta in series(4200), c in 0.1f64..10.0) {
        let t = grid_time(theta.len(), 0.0);
        let scaled: Vec<f64> = theta.iter().map(|v| v * c).collect();
        let a = trial_time_features(&t, &theta, &labels).unwrap();
        let b = trial_time_features(&t, &scaled, &labels).unwrap();
        prop_assert!(close(b.theta, c * a.theta, 1e-9));
        prop_assert!(close(b.omega, c * a.omega, 1e-9));
        prop_assert!(close(b.theta_sd, c * a.theta_sd, 1e-9));
        prop_assert!(close(b.omega_sd, c * a.omega_sd, 1e-9));
        prop_assert_eq!((a.pause, a.regularity, a.frequency), (b.pause, b.regularity, b.frequency));

        let ra = repetitions(&t, &theta, &labels).unwrap();
        let rb = repetitions(&t, &scaled, &labels).unwrap();
        for (x, y) in ra.iter().zip(&rb) {
            prop_assert!(close(y.theta_a, c * x.theta_a, 1e-9));
            prop_assert!(close(y.theta_d, c * x.theta_d, 1e-9));
            prop_assert!(x.pause.is_none_or(|p| p >= 0.0));
            prop_assert!(x.regularity.is_none_or(|r| r > 0.0));
        }
        // both legs scaled alike leaves the relative difference unchanged
        let left = repetitions(&t, &theta.iter().map(|v| v + 80.0).collect::<Vec<_>>(), &labels).unwrap();
        let right = repetitions(&t, &theta.iter().map(|v| v + 90.0).collect::<Vec<_>>(), &labels).unwrap();
        let left_c = repetitions(&t, &theta.iter().map(|v| c * (v + 80.0)).collect::<Vec<_>>(), &labels).unwrap();
        let right_c = repetitions(&t, &theta.iter().map(|v| c * (v + 90.0)).collect::<Vec<_>>(), &labels).unwrap();
        if let (Ok(d), Ok(dc)) = (lr_differences(&left, &right), lr_differences(&left_c, &right_c)) {
            for (x, y) in d.d_theta.iter().zip(&dc.d_theta) {
                prop_assert!(close(*x, *y, 1e-9));
            }
        }
    }

    #[test]
    fn auto_segment_output_is_ordered(
        pulses in prop::collection::vec((5.0f64..50.0, 0.4f64..1.5, 0.0f64..1.0), 1..12),
        noise in prop::collection::vec(-0.5f64..0.5, 3000),
    ) {
        let t = grid_time(noise.len(), 0.0);
        let mut theta = noise.clone();
        let mut at = 1.0;
        for (amp, width, gap) in &pulses {
            for (i, &ti) in t.iter().enumerate() {
                let u = (ti - at) / width;
                if (0.0..=1.0).contains(&u) {
                    theta[i] += amp * 0.5 * (1.0 - (2.0 * std::f64::consts::PI * u).cos());
                }
            }
            at += width + gap;
        }
        if let Ok(seg) = auto_segment(&t, &theta, &SegmentParams::default()) {
            prop_assert!(seg.labels.is_ordered());
            prop_assert!(seg.labels.len() <= 10);
        }
    }

    #[test]
    fn standardized_columns(rows in prop::collection::vec(prop::array::uniform3(-1e3f64..1e3), 3..40)) {
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.to_vec()).collect();
        let labels = vec![updrs(0); rows.len()];
        let m = FeatureMatrix::new(vec!["a".into(), "b".into(), "c".into()], rows, labels).unwrap();
        if let Ok((_, z)) = standardize_fit_apply(&m) {
            let n = z.len() as f64;
            for j in 0..3 {
                let mean = z.iter().map(|r| r[j]).sum::<f64>() / n;
                let sd = (z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
                prop_assert!(mean.abs() < 1e-12);
                prop_assert!((sd - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_pca_preserves_distances(rows in prop::collection::vec(prop::array::uniform4(-10.0f64..10.0), 3..30)) {
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.to_vec()).collect();
        let pca = PcaModel::fit(&rows).unwrap();
        for (i, a) in pca.components.iter().enumerate() {
            for (j, b) in pca.components.iter().enumerate() {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let want = f64::from(u8::from(i == j));
                prop_assert!((d - want).abs() < 1e-9);
            }
        }
        prop_assert!(pca.eigenvalues.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let proj = pca.project(&rows, 4).unwrap();
        let dist = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        for i in 0..rows.len() {
            for j in 0..i {
                prop_assert!((dist(&rows[i], &rows[j]) - dist(&proj[i], &proj[j])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cdf_is_monotone(errors in prop::collection::vec(0u8..=8, 1..60)) {
        let errors: Vec<Updrs> = errors.into_iter().map(updrs).collect();
        let cdf = error_cdf(&errors).unwrap();
        prop_assert!(cdf.fraction.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*cdf.fraction.last().unwrap(), 1.0);
        let a = auc(&cdf);
        prop_assert!((1.0 / 9.0 - 1e-15..=1.0).contains(&a));
        prop_assert_eq!(a == 1.0, errors.iter().all(|e| e.half_steps() == 0));
    }

    #[test]
    fn loocv_ignores_held_out_label(
        rows in prop::collection::vec(prop::array::uniform2(-5.0f64..5.0), 4..20),
        labels in prop::collection::vec(0u8..=8, 20),
        row in 0usize..20,
        new_label in 0u8..=8,
        method in 0usize..3,
    ) {
        let n = rows.len();
        let row = row % n;
        let m = FeatureMatrix::new(
            vec!["a".into(), "b".into()],
            rows.into_iter().map(|r| r.to_vec()).collect(),
            labels[..n].iter().map(|&h| updrs(h)).collect(),
        ).unwrap();
        let method = [Method::Ncc, Method::Knn { k: 3 }, Method::Svm { c: 1.0 }][method];
        let cfg = ClassifierConfig::new(method, vec!["a".into(), "b".into()]);
        let before = loocv(&m, &cfg);
        let after = loocv(&m.with_label(row, updrs(new_label)), &cfg);
        if let (Ok(b), Ok(a)) = (before, after) {
            prop_assert_eq!(b.predictions[row].predicted, a.predictions[row].predicted);
        }
    }

    #[test]
    fn predictions_ignore_common_scale(
        rows in prop::collection::vec(prop::array::uniform3(-5.0f64..5.0), 4..20),
        labels in prop::collection::vec(0u8..=8, 20),
        c in 0.01f64..100.0,
        knn in any::<bool>(),
    ) {
        let n = rows.len();
        let names: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let m = FeatureMatrix::new(
            names.clone(),
            rows.into_iter().map(|r| r.to_vec()).collect(),
            labels[..n].iter().map(|&h| updrs(h)).collect(),
        ).unwrap();
        let cfg = ClassifierConfig::new(if knn { Method::Knn { k: 3 } } else { Method::Ncc }, names);
        let a = loocv(&m, &cfg).unwrap();
        let b = loocv(&m.scaled(c), &cfg).unwrap();
        let pa: Vec<_> = a.predictions.iter().map(|p| p.predicted).collect();
        let pb: Vec<_> = b.predictions.iter().map(|p| p.predicted).collect();
        prop_assert_eq!(pa, pb);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn inclination_ignores_heading(severity in 0.0f64..4.0, heading in -180.0f64..180.0, seed in any::<u64>()) {
        let mut p = SynthParams::from_severity(severity, seed);
        p.reps = 3;
        let a = generate_trial(&p).unwrap();
        p.heading = heading;
        let b = generate_trial(&p).unwrap();
        let cfg = MountingConfig::default();
        let ka = compute_kinematics(&a.recording, &cfg).unwrap();
        let kb = compute_kinematics(&b.recording, &cfg).unwrap();
        for (x, y) in ka.theta.iter().zip(&kb.theta) {
            prop_assert!((x - y).abs() < 1e-6, "{} vs {}", x, y);
        }
    }

    #[test]
    fn synth_is_deterministic(severity in 0.0f64..4.0, seed in any::<u64>(), noise in 0.0f64..1.0) {
        let mut p = SynthParams::from_severity(severity, seed);
        p.noise_sd = noise;
        p.reps = 4;
        let a = generate_trial(&p).unwrap();
        let b = generate_trial(&p).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn severity_is_monotone(lo in 0.0f64..4.0, hi in 0.0f64..4.0) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let a = SynthParams::from_severity(lo, 0);
        let b = SynthParams::from_severity(hi, 0);
        prop_assert!(b.base_amplitude <= a.base_amplitude);
        prop_assert!(b.cycle_period >= a.cycle_period);
        prop_assert!(b.hesitation_count >= a.hesitation_count);
    }
}
