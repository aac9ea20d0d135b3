use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use variability::models::{
    evaluate, fit_forest, fit_logistic, load_model, predict_decision_suite, save_model,
    Classifier, ForestParams, LogisticParams, Matrix, SavedModel, SuiteOptions, Target,
    LEAKAGE_WARNING,
};
use variability::scoring::{build_index, score_corpus};
use variability::synth::{generate, ScenarioConfig};

#[test]
fn logistic_recovers_generating_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 20_000;
    let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let y: Vec<bool> = xs
        .iter()
        .map(|&x| rng.gen_bool(1.0 / (1.0 + (-(3.0 * x - 0.5)).exp())))
        .collect();
    let x = Matrix::from_columns(&[&xs]).unwrap();
    let m = fit_logistic(&x, &y, LogisticParams::default()).unwrap();
    assert!(m.converged);
    // MLE standard error here is about 0.05
    assert!((m.weights[0] - 3.0).abs() < 0.2, "{:?}", m.weights);
    assert!((m.intercept + 0.5).abs() < 0.15, "{}", m.intercept);
}

#[test]
fn climate_driven_corpus_favors_partisanship() {
    let records = generate(&ScenarioConfig {
        cases: 6000,
        seed: 8,
        base_rate: 0.1,
        climate_effect: 0.3,
        nationalities: 2,
        courts: 2,
        ..ScenarioConfig::default()
    })
    .unwrap();
    let scores = score_corpus(&records, &build_index(&records)).unwrap();
    let report = predict_decision_suite(&scores, &records, &SuiteOptions::default()).unwrap();
    assert_eq!(report.leakage_warning, LEAKAGE_WARNING);
    assert_eq!(report.feature_sets.len(), 5);
    let r2 = |set: &str| {
        report
            .feature_set(set)
            .unwrap()
            .model("logistic")
            .unwrap()
            .test
            .r2
            .unwrap()
    };
    assert!(r2("partisanship") > r2("cohort_consistency"));
    for fs in &report.feature_sets {
        let baseline = fs.model("always_deny").unwrap();
        assert_eq!(baseline.test.confusion.total() as usize, fs.test_rows);
        assert_eq!(fs.train_rows + fs.test_rows, fs.rows);
    }
}

#[test]
fn unanimous_denials_leave_only_the_baseline() {
    let records = generate(&ScenarioConfig {
        cases: 1000,
        base_rate: 0.0,
        ..ScenarioConfig::default()
    })
    .unwrap();
    let scores = score_corpus(&records, &build_index(&records)).unwrap();
    let report = predict_decision_suite(&scores, &records, &SuiteOptions::default()).unwrap();
    assert!(!report.warnings.is_empty());
    for fs in &report.feature_sets {
        assert_eq!(fs.models.len(), 1);
        let m = &fs.models[0];
        assert_eq!(m.model, "always_deny");
        assert_eq!(m.test.accuracy, 1.0);
        assert_eq!((m.test.r2, m.test.precision, m.test.recall), (None, None, None));
    }
}

#[test]
fn tiny_corpus_skips_feature_sets_with_warning() {
    let records = generate(&ScenarioConfig {
        cases: 50,
        ..ScenarioConfig::default()
    })
    .unwrap();
    let scores = score_corpus(&records, &build_index(&records)).unwrap();
    let report = predict_decision_suite(&scores, &records, &SuiteOptions::default()).unwrap();
    assert!(report.feature_sets.is_empty());
    assert_eq!(report.warnings.len(), 5);
}

#[test]
fn saved_models_predict_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..400)
        .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
        .collect();
    let y: Vec<bool> = rows.iter().map(|r| r[0] + 0.3 * r[1] > 0.6).collect();
    let x = Matrix::from_rows(&rows).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let linear = SavedModel::Linear(fit_logistic(&x, &y, LogisticParams::default()).unwrap());
    let forest = SavedModel::Forest {
        feature_names: vec!["a".into(), "b".into()],
        forest: fit_forest(
            &x,
            Target::Labels(&y),
            &ForestParams {
                n_trees: 20,
                seed: 4,
                ..ForestParams::default()
            },
        )
        .unwrap(),
    };
    for (name, model) in [("linear.json", linear), ("forest.json", forest)] {
        let path = dir.path().join(name);
        save_model(&path, &model).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, model);
        assert_eq!(loaded.predict(&x), model.predict(&x));
        assert_eq!(evaluate(&loaded, &x, &y).unwrap(), evaluate(&model, &x, &y).unwrap());
    }
}
