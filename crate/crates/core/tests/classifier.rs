mod common;

use std::collections::BTreeSet;
use std::path::Path;

use proptest::prelude::*;
use rgp::classifier::*;
use rgp::dataset::Task;

#[test]
fn analytic_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let err = common::gradient_check(seed);
        assert!(err < 1e-4, "seed {seed}: relative error {err}");
    }
}

fn clusters() -> (Vec<Vec<f64>>, Vec<usize>) {
    // two 1-D clusters around 0.2 and 0.8
    let xs: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            vec![if i % 2 == 0 {
                0.15 + 0.01 * i as f64 / 2.0
            } else {
                0.75 + 0.01 * i as f64 / 2.0
            }]
        })
        .collect();
    let ys = (0..20).map(|i| i % 2).collect();
    (xs, ys)
}

#[test]
fn separable_clusters_are_learned() {
    let (xs, ys) = clusters();
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let cfg = TrainConfig {
        learning_rate: 5.0,
        epochs: 200,
        l2: 0.0,
        ..Default::default()
    };
    let out = train_softmax(&refs, &ys, Task::BinaryReferable, &cfg).unwrap();
    for (x, &y) in refs.iter().zip(&ys) {
        let p = out.model.predict_probs(x).unwrap();
        assert_eq!(rgp::ensemble::argmax(&p), y);
    }
}

#[test]
fn small_step_loss_never_increases() {
    let (xs, ys) = clusters();
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let cfg = TrainConfig {
        learning_rate: 1e-3,
        epochs: 300,
        l2: 1e-2,
        ..Default::default()
    };
    let out = train_softmax(&refs, &ys, Task::BinaryReferable, &cfg).unwrap();
    assert_eq!(out.losses.len(), 301);
    assert!(out.losses.windows(2).all(|w| w[1] <= w[0]));
    assert!(out.final_loss() < out.losses[0]);
}

#[test]
fn heavy_regularization_gives_uniform_predictions() {
    let xs: Vec<Vec<f64>> = (0..12)
        .map(|i| vec![(i % 4) as f64 / 3.0, 1.0 - (i % 3) as f64 / 2.0])
        .collect();
    let ys: Vec<usize> = (0..12).map(|i| i % 4).collect();
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let cfg = TrainConfig {
        learning_rate: 1e-6,
        epochs: 500,
        l2: 1e6,
        ..Default::default()
    };
    let out = train_softmax(&refs, &ys, Task::Quaternary, &cfg).unwrap();
    for x in &refs {
        for p in out.model.predict_probs(x).unwrap() {
            assert!((p - 0.25).abs() < 1e-3, "{p}");
        }
    }
    let norm: f64 = out.model.weights.iter().flatten().map(|w| w * w).sum();
    assert!(norm < 1e-6);
}

#[test]
fn empty_class_is_rejected() {
    let xs = [vec![0.0], vec![1.0]];
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    assert!(train_softmax(
        &refs,
        &[0, 0],
        Task::BinaryReferable,
        &TrainConfig::default()
    )
    .is_err());
}

#[test]
fn divergence_is_reported() {
    let xs = [vec![1e300], vec![-1e300]];
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let cfg = TrainConfig {
        learning_rate: 1e10,
        epochs: 5,
        l2: 0.0,
        ..Default::default()
    };
    assert!(matches!(
        train_softmax(&refs, &[0, 1], Task::BinaryReferable, &cfg),
        Err(rgp::Error::Diverged { .. })
    ));
}

#[test]
fn bias_closed_form() {
    let mut m = SoftmaxModel::zeros(Task::Ternary, 3);
    m.bias[0] = 10.0;
    let p = m.predict_probs(&[0.3, 0.2, 0.9]).unwrap();
    let e = 10f64.exp();
    assert!((p[0] - e / (e + 2.0)).abs() < 1e-12);
    assert!(m.predict_probs(&[0.3, 0.2]).is_err());
}

#[test]
fn missing_ids_are_reported() {
    let records: Vec<PredictionRecord> = (0..397)
        .map(|i| PredictionRecord {
            image_id: format!("i{i:03}"),
            model_id: "resnet".into(),
            probs: vec![0.5, 0.5],
        })
        .collect();
    let mut buf = Vec::new();
    write_predictions_to(&records, 2, &mut buf).unwrap();
    let expected: BTreeSet<String> = (0..400).map(|i| format!("i{i:03}")).collect();
    let loaded = read_predictions(buf.as_slice(), Path::new("p.csv"), 2, Some(&expected)).unwrap();
    assert_eq!(loaded.coverage.missing, ["i397", "i398", "i399"]);
    assert!(loaded.coverage.extra.is_empty());
}

#[test]
fn malformed_rows_are_rejected_with_line() {
    let ok = "image_id,model_id,p0,p1\nimg1,ntsnet,0.7,0.3\n";
    assert_eq!(
        read_predictions(ok.as_bytes(), Path::new("p"), 2, None)
            .unwrap()
            .records
            .len(),
        1
    );
    let bad = "image_id,model_id,p0,p1\nimg1,ntsnet,0.7,0.3\nimg2,ntsnet,0.5,0.3\n";
    match read_predictions(bad.as_bytes(), Path::new("p"), 2, None) {
        Err(rgp::Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    assert!(read_predictions(ok.as_bytes(), Path::new("p"), 3, None).is_err());
}

proptest! {
    #[test]
    fn softmax_stays_on_simplex(logits in prop::collection::vec(-1e4f64..1e4, 1..8), shift in -100.0f64..100.0) {
        let p = softmax(&logits);
        prop_assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let shifted: Vec<f64> = logits.iter().map(|z| z + shift).collect();
        for (a, b) in p.iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn predictions_round_trip(
        rows in prop::collection::vec((prop::collection::vec(0.0f64..1.0, 3), "[a-z0-9_]{1,12}"), 1..30)
    ) {
        let mut seen = BTreeSet::new();
        let records: Vec<PredictionRecord> = rows
            .into_iter()
            .filter(|(_, id)| seen.insert(id.clone()))
            .map(|(raw, id)| {
                let total: f64 = raw.iter().sum::<f64>() + 1e-3;
                let probs = softmax(&raw.iter().map(|v| (v + 1e-3 / 3.0) / total).collect::<Vec<_>>());
                PredictionRecord { image_id: id, model_id: "m,1".into(), probs }
            })
            .collect();
        let mut buf = Vec::new();
        write_predictions_to(&records, 3, &mut buf).unwrap();
        let back = read_predictions(buf.as_slice(), Path::new("mem"), 3, None).unwrap();
        prop_assert_eq!(back.records, records);
    }
}
