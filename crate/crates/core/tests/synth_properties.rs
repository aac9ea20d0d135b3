use variability::scoring::{build_index, score_corpus};
use variability::stats::welch_t_test;
use variability::synth::{generate, judge_name, shuffle_decisions, ScenarioConfig};
use variability::ProceedingRecord;

const SEEDS: u64 = 10;

fn mean_gamma(records: &[ProceedingRecord]) -> f64 {
    let table = score_corpus(records, &build_index(records)).unwrap();
    table.summary().mean_gamma.unwrap()
}

fn climate_scenario(d: f64, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        cases: 6000,
        seed,
        climate_effect: d,
        nationalities: 3,
        courts: 3,
        ..ScenarioConfig::default()
    }
}

#[test]
fn gamma_rises_with_climate_effect() {
    let means: Vec<f64> = [0.0, 0.1, 0.2, 0.3]
        .iter()
        .map(|&d| {
            (0..SEEDS)
                .map(|s| mean_gamma(&generate(&climate_scenario(d, s)).unwrap()))
                .sum::<f64>()
                / SEEDS as f64
        })
        .collect();
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
}

#[test]
fn no_effect_matches_shuffled_control() {
    let mut real = Vec::new();
    let mut control = Vec::new();
    for s in 0..SEEDS {
        let records = generate(&climate_scenario(0.0, s)).unwrap();
        real.push(mean_gamma(&records));
        control.push(mean_gamma(&shuffle_decisions(&records, 1000 + s)));
    }
    let t = welch_t_test(&real, &control).unwrap();
    assert!(t.p_value > 0.01, "{t:?}");
}

#[test]
fn shuffled_control_erases_a_real_effect() {
    // sanity check that the control can tell a difference at all
    let mut real = Vec::new();
    let mut control = Vec::new();
    for s in 0..SEEDS {
        let records = generate(&climate_scenario(0.3, s)).unwrap();
        real.push(mean_gamma(&records));
        control.push(mean_gamma(&shuffle_decisions(&records, 1000 + s)));
    }
    assert!(welch_t_test(&real, &control).unwrap().p_value < 0.01);
}

#[test]
fn harsh_outlier_judge_scores_low_phi() {
    // Majority grants; judge 0 is pulled toward denial. With a base rate
    // below one half the same offset would push the judge toward the
    // majority instead.
    let courts = 4;
    let mut hits = 0;
    for seed in 0..SEEDS {
        let config = ScenarioConfig {
            cases: 8000,
            seed,
            base_rate: 0.7,
            judges: 24,
            judge_offsets: vec![-0.3],
            courts,
            ..ScenarioConfig::default()
        };
        let records = generate(&config).unwrap();
        let table = score_corpus(&records, &build_index(&records)).unwrap();
        let mut peers: Vec<f64> = (0..config.judges)
            .filter(|&j| config.court_of_judge(j) == 0)
            .map(|j| table.phi_of(&judge_name(j)).unwrap())
            .collect();
        let target = table.phi_of(&judge_name(0)).unwrap();
        peers.sort_by(f64::total_cmp);
        let n = peers.len();
        let median = if n % 2 == 1 {
            peers[n / 2]
        } else {
            (peers[n / 2 - 1] + peers[n / 2]) / 2.0
        };
        hits += usize::from(target < median);
    }
    assert!(hits >= 9, "{hits}/10");
}
