use tumornet::nested::{train_nested, NestedConfig, NestedModel, PhaseId};
use tumornet::synthesis::{generate_cohort, split, to_feature_vector, CohortConfig};

#[test]
fn trained_default_model_properties() {
    let cohort =
        generate_cohort(&CohortConfig { n_benign: 150, n_malignant: 150, master_seed: 8, ..CohortConfig::default() })
            .unwrap();
    let (train, val, test) = split(&cohort, 0.7, 0.15, 8).unwrap();
    let (model, _) = train_nested(&train, &val, &NestedConfig::default()).unwrap();
    let space = *model.space();

    let reloaded = NestedModel::deserialize(&model.serialize()).unwrap();
    let mut worst = 0.0f64;
    for r in &test.records {
        let p1 = to_feature_vector(r, PhaseId::I, &space).unwrap();
        let p2 = to_feature_vector(r, PhaseId::II, &space).unwrap();
        let base = model.predict_scaled(&p1, &p2).unwrap();
        assert!(base.prob_m > 0.0 && base.prob_m < 1.0);
        assert_eq!(reloaded.predict(r).unwrap(), base);
        for i in 0..p1.len() + p2.len() {
            let (mut q1, mut q2) = (p1.clone(), p2.clone());
            let slot = if i < q1.len() { &mut q1[i] } else { &mut q2[i - p1.len()] };
            *slot = if *slot > 0.5 { *slot - 1e-10 } else { *slot + 1e-10 };
            let moved = model.predict_scaled(&q1, &q2).unwrap();
            worst = worst.max((moved.prob_m - base.prob_m).abs());
        }
    }
    assert!(worst < 1e-6, "prob_m moved by {worst:e} under a 1e-10 feature perturbation");
}
