use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xfcm::identification::{
    evaluate, identify, identify_population, loss, make_batches, population_loss, synthesize_participant,
    synthesize_population, Batch, FittedEntry, FittedWeights, GridSpec, ModelSetup, SearchMode, Survey,
};
use xfcm::scenarios::{bundled_scenarios, params, ModelVariant, WeightVector};

fn levels() -> Vec<f64> {
    GridSpec::levels(0.25).unwrap()
}

fn two_param_grid() -> GridSpec {
    GridSpec::for_params(&[params::TRIGGER2_W, params::GOAL_BIAS_W], 0.25, SearchMode::Exhaustive, 1).unwrap()
}

#[test]
fn exhaustive_result_beats_random_grid_points() {
    let setup = ModelSetup::default();
    let scenarios = bundled_scenarios();
    let pop = synthesize_population(&setup, 1, 4, &levels(), &scenarios, true, 0.0).unwrap();
    let g = two_param_grid();
    let best = identify(&setup, ModelVariant::M1, &pop.survey, "p01", &scenarios, &g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let lv = levels();
    for _ in 0..30 {
        let w = WeightVector::new()
            .with(params::TRIGGER2_W, lv[rng.gen_range(0..lv.len())])
            .unwrap()
            .with(params::GOAL_BIAS_W, lv[rng.gen_range(0..lv.len())])
            .unwrap();
        assert!(best.loss <= loss(&setup, ModelVariant::M1, &w, &pop.survey, "p01", &scenarios).unwrap());
    }
}

#[test]
fn loss_is_additive_over_scenarios() {
    let setup = ModelSetup::default();
    let scenarios = bundled_scenarios();
    let pop = synthesize_population(&setup, 1, 5, &levels(), &scenarios, true, 0.0).unwrap();
    let w = WeightVector::new().with(params::GOAL_W_PLUS, -0.5).unwrap();
    let total = loss(&setup, ModelVariant::M1, &w, &pop.survey, "p01", &scenarios).unwrap();
    let parts: f64 = scenarios
        .chunks(5)
        .map(|c| loss(&setup, ModelVariant::M1, &w, &pop.survey, "p01", c).unwrap())
        .sum();
    assert!(total >= 0.0);
    assert!((total - parts).abs() < 1e-12);
}

#[test]
fn population_optimum_is_no_better_than_individual_optima() {
    let setup = ModelSetup::default();
    let scenarios = bundled_scenarios();
    let pop = synthesize_population(&setup, 4, 6, &levels(), &scenarios, true, 0.0).unwrap();
    let parts = pop.participants();
    let g = two_param_grid();
    let joint = identify_population(&setup, ModelVariant::M4, &pop.survey, &parts, &scenarios, &g).unwrap();
    let individual: f64 = parts
        .iter()
        .map(|p| identify(&setup, ModelVariant::M4, &pop.survey, p, &scenarios, &g).unwrap().loss)
        .sum();
    assert!(joint.loss >= individual - 1e-12);
    let check = population_loss(&setup, ModelVariant::M4, &joint.weights, &pop.survey, &parts, &scenarios).unwrap();
    assert!((check - joint.loss).abs() < 1e-12);
}

#[test]
fn duplicating_every_participant_keeps_the_argmin() {
    let setup = ModelSetup::default();
    let scenarios = bundled_scenarios();
    let pop = synthesize_population(&setup, 3, 7, &levels(), &scenarios, true, 0.0).unwrap();
    let mut doubled = pop.survey.clone();
    for r in pop.survey.records() {
        let mut copy = r.clone();
        copy.participant_id = format!("{}-copy", r.participant_id);
        doubled.push(copy).unwrap();
    }
    let g = two_param_grid();
    let once = identify_population(&setup, ModelVariant::M4, &pop.survey, &pop.participants(), &scenarios, &g).unwrap();
    let twice =
        identify_population(&setup, ModelVariant::M4, &doubled, &doubled.participants(), &scenarios, &g).unwrap();
    assert_eq!(once.weights, twice.weights);
    assert!((twice.loss - 2.0 * once.loss).abs() < 1e-9);
}

#[test]
fn functional_truth_fits_no_worse_with_the_functional_model() {
    // M1 at the generating weights reproduces unquantized data exactly; the
    // constant-weight model can at best tie
    let setup = ModelSetup::default();
    let scenarios = bundled_scenarios();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let truth = xfcm::identification::draw_ground_truth(&mut rng, &levels()).unwrap();
    let survey = Survey::new(synthesize_participant(&setup, "p", &truth, &scenarios, false, 0, 0.0).unwrap()).unwrap();
    let m1 = loss(&setup, ModelVariant::M1, &truth, &survey, "p", &scenarios).unwrap();
    let m3 = identify(&setup, ModelVariant::M3, &survey, "p", &scenarios, &GridSpec::default_for(ModelVariant::M3))
        .unwrap();
    assert_eq!(m1, 0.0);
    assert!(m1 <= m3.loss);
}

#[test]
fn mse_values_stay_within_bounds() {
    let setup = ModelSetup::default();
    let scenarios = bundled_scenarios();
    let batches = make_batches(&scenarios).unwrap();
    let pop = synthesize_population(&setup, 2, 8, &levels(), &scenarios, true, 0.0).unwrap();
    // deliberately poor weights: everything at -1
    let mut worst = WeightVector::new();
    for name in ModelVariant::M1.identified_params() {
        worst.set(name, -1.0).unwrap();
    }
    let fw = FittedWeights {
        entries: (1..=3)
            .map(|batch| FittedEntry {
                model: ModelVariant::M1,
                batch,
                participant: None,
                loss: 0.0,
                weights: worst.clone(),
            })
            .collect(),
    };
    let refs: Vec<&Batch> = batches.iter().collect();
    let rep = evaluate(&setup, &[ModelVariant::M1], &refs, &pop.survey, &pop.participants(), &fw).unwrap();
    assert!(!rep.rows.is_empty());
    assert!(rep.rows.iter().all(|r| (0.0..=4.0).contains(&r.mse)));
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("model,concept,batch,scenario_or_set,mse\n"));
}

#[test]
fn fitted_weights_document_round_trips() {
    let fw = FittedWeights {
        entries: vec![FittedEntry {
            model: ModelVariant::M1,
            batch: 2,
            participant: Some("p07".into()),
            loss: 0.123456789012345,
            weights: WeightVector::new().with(params::GOAL_W_MINUS, 0.75).unwrap(),
        }],
    };
    assert_eq!(FittedWeights::from_json(&fw.to_json().unwrap()).unwrap(), fw);
}

#[test]
fn grid_rejects_parameters_outside_the_variant() {
    let params = IndexMap::from([(params::RPK_BELIEF_W.to_string(), vec![0.0, 0.5])]);
    let g = GridSpec::new(params, SearchMode::Exhaustive, 1).unwrap();
    let setup = ModelSetup::default();
    let scenarios = bundled_scenarios();
    let pop = synthesize_population(&setup, 1, 1, &levels(), &scenarios, true, 0.0).unwrap();
    assert!(identify(&setup, ModelVariant::M1, &pop.survey, "p01", &scenarios, &g).is_err());
}
