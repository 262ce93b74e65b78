mod common;

use antijam::array::sinr;
use antijam::baselines::fpv_layout;
use antijam::neural::init_params;
use antijam::positioning::validate_layout;
use antijam::training::{
    evaluate, generate_scenes, infer, loss_and_grads, read_scenes_csv, train, write_scenes_csv,
    Featurization, TrainConfig,
};
use antijam::{Scene, SystemConfig};
use common::{gradient_error, relative_error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_cfg(featurization: Featurization) -> TrainConfig {
    TrainConfig {
        system: SystemConfig::default().with_elements(4).with_jammers(2),
        dataset_size: 200,
        batch_size: 20,
        epochs: 3,
        hidden: vec![5],
        featurization,
        require_progress: false,
        ..TrainConfig::default()
    }
}

#[test]
fn end_to_end_gradient_matches_finite_differences() {
    let h = 1e-6;
    for (seed, mode) in [
        (1, Featurization::NormalizedAngle),
        (2, Featurization::Cosine),
    ] {
        let cfg = small_cfg(mode);
        let params = init_params(&cfg.architecture(), seed).unwrap();
        let batch = generate_scenes(3, 2, None, seed + 10);
        let (_, grads) = loss_and_grads(&params, &batch, &cfg).unwrap();
        let analytic: Vec<f64> = grads.iter().copied().collect();

        let loss_at = |p: &antijam::neural::MlpParams| loss_and_grads(p, &batch, &cfg).unwrap().0;
        let mut numeric = Vec::new();
        for li in 0..params.layers().len() {
            for which in 0..2 {
                let len = if which == 0 {
                    params.layers()[li].weights.len()
                } else {
                    params.layers()[li].bias.len()
                };
                for j in 0..len {
                    let at = |d: f64| {
                        let mut p = params.clone();
                        let layer = &mut p.layers_mut()[li];
                        let slot = if which == 0 {
                            &mut layer.weights[j]
                        } else {
                            &mut layer.bias[j]
                        };
                        *slot += d;
                        loss_at(&p)
                    };
                    numeric.push((at(h) - at(-h)) / (2.0 * h));
                }
            }
        }
        let err = gradient_error(&analytic, &numeric);
        assert!(err < 1e-4, "{mode:?}: relative error {err:e}");
    }
}

#[test]
fn single_sample_loss_is_reciprocal_sinr() {
    let cfg = small_cfg(Featurization::NormalizedAngle);
    let params = init_params(&cfg.architecture(), 3).unwrap();
    let scene = generate_scenes(1, 2, None, 4);
    let (loss, _) = loss_and_grads(&params, &scene, &cfg).unwrap();
    let eta = evaluate(&params, &scene, &cfg.system, cfg.featurization).unwrap()[0];
    assert!(relative_error(loss, 1.0 / eta) < 1e-15);
}

#[test]
fn inference_is_feasible_and_consistent() {
    let cfg = SystemConfig::default();
    let tc = TrainConfig {
        system: cfg.clone(),
        ..TrainConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for seed in 0..10 {
        let params = init_params(&tc.architecture(), seed).unwrap();
        for _ in 0..1000 {
            let scene = antijam::training::sample_scene(3, &mut rng);
            let mode = if rng.random_bool(0.5) {
                Featurization::Cosine
            } else {
                Featurization::NormalizedAngle
            };
            let s = infer(&params, &scene, &cfg, mode).unwrap();
            assert!(validate_layout(&s.layout, &cfg).is_empty());
            let recomputed = sinr(&s.layout, &s.beamformer, &scene, &cfg).unwrap();
            assert!(relative_error(recomputed, s.sinr) < 1e-9);
        }
    }
}

#[test]
fn zero_network_reproduces_fixed_array() {
    let cfg = SystemConfig::default();
    let tc = TrainConfig::default();
    let mut params = init_params(&tc.architecture(), 0).unwrap();
    for l in params.layers_mut() {
        l.weights.iter_mut().for_each(|w| *w = 0.0);
    }
    let scene = Scene::new(1.0, vec![0.2, 2.2, 3.0]).unwrap();
    let s = infer(&params, &scene, &cfg, Featurization::NormalizedAngle).unwrap();
    assert_eq!(s.layout, fpv_layout(&cfg).unwrap());
}

#[test]
fn training_is_deterministic() {
    let cfg = small_cfg(Featurization::Cosine);
    let (p1, h1) = train(&cfg).unwrap();
    let (p2, h2) = train(&cfg).unwrap();
    assert_eq!(p1, p2);
    assert_eq!(h1.len(), cfg.epochs);
    for (a, b) in h1.epochs.iter().zip(&h2.epochs) {
        assert_eq!(
            (a.epoch, a.mean_loss, a.mean_sinr_db),
            (b.epoch, b.mean_loss, b.mean_sinr_db)
        );
    }
}

#[test]
fn sampled_angles_are_uniform() {
    let scenes = generate_scenes(100_000, 1, None, 77);
    let mean = scenes.iter().map(Scene::source).sum::<f64>() / scenes.len() as f64;
    assert!((mean - std::f64::consts::FRAC_PI_2).abs() < 0.01);
    assert!(scenes
        .iter()
        .flat_map(|s| s.angles())
        .all(|a| (0.0..=std::f64::consts::PI).contains(&a)));
}

#[test]
fn scene_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenes.csv");
    let scenes = generate_scenes(50, 3, None, 5);
    write_scenes_csv(&scenes, 3, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("theta0,theta1,theta2,theta3\n"));
    assert_eq!(read_scenes_csv(&path).unwrap(), scenes);

    write_scenes_csv(&[], 2, &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "theta0,theta1,theta2\n"
    );
    assert!(read_scenes_csv(&path).unwrap().is_empty());
}
