//! Acceptance gate: one PASS/FAIL line per criterion, each with its runtime
//! budget. Run with `cargo test -p xfcm --test acceptance -- --nocapture`.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xfcm::fcm::{simulate, step, Network, Realisation, DEFAULT_EPSILON, DEFAULT_MAX_STEPS};
use xfcm::identification::{
    evaluate, identify, make_batches, synthesize_population, Batch, FittedEntry, FittedWeights, GridSpec,
    ModelSetup, SearchMode, SyntheticPopulation,
};
use xfcm::inverse::{
    infer_emotion, predict_action, rational_action_selection, simplify, BeliefGoal, InferenceSettings,
    ObservedAction,
};
use xfcm::scenarios::{
    build_scenario1, build_scenario2, bundled_scenarios, dequantize_input, dequantize_response, ids,
    initial_state, params, quantize_input, quantize_response, InitialConditions, InputConcept, ModelVariant,
    ResponseConcept, ScenarioInputs, WeightVector,
};

/// Seed of the synthetic population used by criteria 5 and 6.
const POPULATION_SEED: u64 = 2024;
const POPULATION_SIZE: usize = 15;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(id: u8, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = elapsed < limit;
    let pass = o.pass && in_time;
    println!(
        "{} criterion {id} ({name}): {} [{:.2?} of {:?}{}]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed,
        limit,
        if in_time { "" } else { ", over budget" },
    );
    pass
}

fn converged(net: &Network, init: &[f64]) -> Vec<f64> {
    simulate(net, init, DEFAULT_MAX_STEPS, DEFAULT_EPSILON)
        .unwrap()
        .final_state()
        .to_vec()
}

fn c1_boundedness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let (net, init) = common::random_network(&mut rng, 12, 20);
        let runs: Vec<Vec<Vec<f64>>> = (0..2)
            .map(|_| {
                let mut path = vec![init.clone()];
                for _ in 0..100 {
                    let next = step(&net, path.last().unwrap()).unwrap();
                    path.push(next);
                }
                path
            })
            .collect();
        for (x, c) in runs[0].iter().flatten().zip(net.concepts().iter().cycle()) {
            worst = worst.max(x.abs());
            if !(-1.0..=1.0).contains(x) || !c.interval.contains(*x) {
                return outcome(false, format!("network {i}: value {x} leaves its interval"));
            }
        }
        let bits = |r: &Vec<Vec<f64>>| r.iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>();
        if bits(&runs[0]) != bits(&runs[1]) {
            return outcome(false, format!("network {i}: repeated runs differ"));
        }
    }
    outcome(true, format!("1000 networks x 100 steps, max |A| = {worst:.3}, runs bit-identical"))
}

fn scenario1_goal(functional: bool, rpk: f64) -> f64 {
    let w = WeightVector::defaults();
    let net = build_scenario1(&w, functional).unwrap();
    let init = initial_state(&net, &ScenarioInputs::rpk_only(rpk).unwrap(), &InitialConditions::default()).unwrap();
    converged(&net, &init)[net.position(ids::GOAL).unwrap()]
}

fn c2_asymmetry() -> Outcome {
    let w = WeightVector::defaults();
    let weights_ok = w.get(params::GOAL_W_MINUS) == Some(0.5) && w.get(params::GOAL_W_PLUS) == Some(0.1);
    let diff = |f| scenario1_goal(f, -1.0).abs() - scenario1_goal(f, 1.0).abs();
    let (func, cons) = (diff(true), diff(false));
    outcome(
        weights_ok && func >= 0.1 && cons < func,
        format!("functional |g(-1)|-|g(+1)| = {func:.4} (>= 0.1), constant = {cons:.4} (< functional)"),
    )
}

fn scenario2(functional: bool, rpk: f64, gwk: f64, gp: f64, goal0: f64) -> [f64; 3] {
    let net = build_scenario2(&WeightVector::defaults(), functional).unwrap();
    let init = initial_state(
        &net,
        &ScenarioInputs::new(rpk, gwk, gp).unwrap(),
        &InitialConditions::with_goal(goal0),
    )
    .unwrap();
    let fin = converged(&net, &init);
    [ids::BELIEF, ids::GOAL, ids::EMOTION].map(|id| fin[net.position(id).unwrap()])
}

fn c3_preference() -> Outcome {
    let effect = |f| scenario2(f, 1.0, 1.0, 1.0, 1.0)[2] - scenario2(f, 1.0, 1.0, 0.0, 1.0)[2];
    let (func, cons) = (effect(true), effect(false));
    outcome(
        func >= 0.05 && cons.abs() < 0.05,
        format!("functional e(GP=1)-e(GP=0) = {func:.4} (>= 0.05), constant = {cons:.4} (|.| < 0.05)"),
    )
}

fn c4_anchors() -> Outcome {
    let a = scenario2(true, -1.0, -1.0, 1.0, 0.0)[0];
    let b = scenario2(true, -1.0, 1.0, 1.0, 0.0)[0];
    let [_, goal, emotion] = scenario2(true, -1.0, 1.0, -1.0, 1.0);
    let pa = 1.0 - a.abs() >= 0.1;
    let pb = (b + 1.0).abs() <= 0.05;
    let pc = emotion > 0.0 && emotion <= 0.4 && (goal + 0.5).abs() <= 0.2;
    outcome(
        pa && pb && pc,
        format!("(a) belief {a:.4}, (b) belief {b:.4}, (c) emotion {emotion:.4} goal {goal:.4}"),
    )
}

fn population() -> SyntheticPopulation {
    let setup = ModelSetup::default();
    let levels = GridSpec::levels(0.25).unwrap();
    synthesize_population(&setup, POPULATION_SIZE, POPULATION_SEED, &levels, &bundled_scenarios(), true, 0.0)
        .unwrap()
}

fn fit(setup: &ModelSetup, model: ModelVariant, pop: &SyntheticPopulation, batches: &[Batch]) -> FittedWeights {
    let grid = GridSpec::default_for(model);
    let mut fw = FittedWeights::default();
    for b in batches {
        for p in pop.participants() {
            let r = identify(setup, model, &pop.survey, &p, &b.training, &grid).unwrap();
            fw.entries.push(FittedEntry {
                model,
                batch: b.id,
                participant: Some(p),
                loss: r.loss,
                weights: r.weights,
            });
        }
    }
    fw
}

fn c5_recovery() -> Outcome {
    let setup = ModelSetup::default();
    let pop = population();
    let batches = make_batches(&bundled_scenarios()).unwrap();
    let fw = fit(&setup, ModelVariant::M1, &pop, &batches);
    let refs: Vec<&Batch> = batches.iter().collect();
    let report = evaluate(&setup, &[ModelVariant::M1], &refs, &pop.survey, &pop.participants(), &fw).unwrap();
    let mut worst: f64 = 0.0;
    for row in report.summary() {
        for b in row.batches {
            worst = worst.max(b.unwrap());
        }
    }
    let mse_ok = worst <= 0.0625;

    // 3-parameter subproblems: the first three M1 parameters, the rest at
    // their defaults, for every participant and batch
    let names = &ModelVariant::M1.identified_params()[..3];
    let exhaustive = GridSpec::for_params(names, 0.25, SearchMode::Exhaustive, 1).unwrap();
    let cyclic = exhaustive.clone().with_mode(SearchMode::CyclicCoordinate).with_sweeps(3);
    let (mut agree, mut total, mut largest_gap) = (0, 0, 0.0f64);
    for b in &batches {
        for p in pop.participants() {
            let ex = identify(&setup, ModelVariant::M1, &pop.survey, &p, &b.training, &exhaustive).unwrap();
            let cy = identify(&setup, ModelVariant::M1, &pop.survey, &p, &b.training, &cyclic).unwrap();
            total += 1;
            let gap = (cy.loss - ex.loss).abs();
            largest_gap = largest_gap.max(gap);
            if gap < 1e-9 {
                agree += 1;
            }
        }
    }
    outcome(
        mse_ok && agree == total,
        format!(
            "M1 worst per-batch validation MSE {worst:.4} (<= 0.0625); cyclic matches exhaustive on \
             {agree}/{total} subproblems (largest loss gap {largest_gap:.3e})"
        ),
    )
}

fn c6_ordering() -> Outcome {
    let setup = ModelSetup::default();
    let pop = population();
    let batches = make_batches(&bundled_scenarios()).unwrap();
    let refs: Vec<&Batch> = batches.iter().collect();
    let models = [ModelVariant::M1, ModelVariant::M2, ModelVariant::M3];
    let mut fw = FittedWeights::default();
    for m in models {
        fw.entries.extend(fit(&setup, m, &pop, &batches).entries);
    }
    let report = evaluate(&setup, &models, &refs, &pop.survey, &pop.participants(), &fw).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for c in ResponseConcept::ALL {
        let [m1, m2, m3] = models.map(|m| report.overall(m, c).unwrap());
        pass &= m1 < m2 && m1 < m3;
        parts.push(format!("{c} M1 {m1:.4} M2 {m2:.4} M3 {m3:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn c7_quantization() -> Outcome {
    let inputs: [(InputConcept, &[(&str, f64)]); 3] = [
        (
            InputConcept::GeneralPreference,
            &[
                ("Dislike a great deal", -1.0),
                ("Dislike a moderate amount", -0.66),
                ("Dislike a little", -0.33),
                ("No preference", 0.0),
                ("Like a little", 0.33),
                ("Like a moderate amount", 0.66),
                ("Like a great deal", 1.0),
            ],
        ),
        (
            InputConcept::RationallyPerceivedKnowledge,
            &[("Heavy rain", -1.0), ("Light rain", -0.5), ("Unknown", 0.0), ("Cloudy", 0.5), ("Sunny", 1.0)],
        ),
        (
            InputConcept::GeneralWorldKnowledge,
            &[("Inaccurate", -0.4), ("Accurate", 0.2), ("Very accurate", 0.8)],
        ),
    ];
    let responses: [(ResponseConcept, [&str; 5]); 3] = [
        (
            ResponseConcept::Belief,
            ["Heavy rain", "Light rain", "I do not know", "Partially sunny", "Sunny"],
        ),
        (
            ResponseConcept::Goal,
            [
                "I do not want it at all",
                "I do not want to do it",
                "I have no preference",
                "I want to do it",
                "I want it a lot",
            ],
        ),
        (
            ResponseConcept::Emotion,
            ["Very unhappy", "Unhappy", "Nothing", "Happy", "Very happy"],
        ),
    ];
    let levels: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut n = 0;
    for (concept, table) in inputs {
        for &(term, value) in table {
            let q = quantize_input(concept, term).unwrap();
            if q.value().to_bits() != value.to_bits() || dequantize_input(concept, q) != Some(term) {
                return outcome(false, format!("{term} does not round-trip"));
            }
            n += 1;
        }
    }
    for (concept, terms) in responses {
        for (term, value) in terms.iter().zip(levels) {
            let q = quantize_response(concept, term).unwrap();
            if q.value().to_bits() != value.to_bits() || dequantize_response(concept, q) != *term {
                return outcome(false, format!("{term} does not round-trip"));
            }
            n += 1;
        }
    }
    outcome(true, format!("{n} table entries round-trip bit-exactly"))
}

fn c8_inverse() -> Outcome {
    let full = build_scenario2(&WeightVector::defaults(), true).unwrap();
    let simple = simplify(&full).unwrap();
    let st = InferenceSettings::default();
    let (b, g) = (full.position(ids::BELIEF).unwrap(), full.position(ids::GOAL).unwrap());
    let observe_at = 2;

    let (mut flips, mut recovered, mut worst) = (0, 0, 0.0f64);
    for s in bundled_scenarios() {
        for k in 0..=10 {
            let e_star = (-1.0 + 0.2 * k as f64) * 10.0;
            let e_star = e_star.round() / 10.0;
            let init = InitialConditions {
                belief: 0.0,
                goal: 0.0,
                emotion: e_star,
            };
            let mut path = vec![initial_state(&full, &s.inputs, &init).unwrap()];
            for _ in 0..observe_at {
                path.push(step(&full, path.last().unwrap()).unwrap());
            }
            let history: Vec<BeliefGoal> = path[..observe_at]
                .iter()
                .map(|x| BeliefGoal {
                    belief: x[b],
                    goal: x[g],
                })
                .collect();
            let seen = rational_action_selection(Realisation::new(path[observe_at][g]).unwrap(), st.theta).unwrap();
            let predicted = predict_action(&simple, &initial_state(&simple, &s.inputs, &init).unwrap(), &st).unwrap();
            if seen == predicted {
                continue;
            }
            flips += 1;
            let obs = ObservedAction::new(seen, observe_at).unwrap();
            let res = infer_emotion(&full, &s.inputs, predicted, obs, &history, &st).unwrap();
            let err = (res.inferred_emotion.unwrap().value() - e_star).abs();
            worst = worst.max(err);
            if err <= 0.1 + 1e-12 {
                recovered += 1;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut false_positives = 0;
    for _ in 0..100 {
        let mut u = || rng.gen_range(-1.0..=1.0);
        let inputs = ScenarioInputs::new(u(), u(), u()).unwrap();
        let init = InitialConditions {
            belief: u(),
            goal: u(),
            emotion: 0.0,
        };
        let x0 = initial_state(&simple, &inputs, &init).unwrap();
        let traj = simulate(&simple, &x0, st.max_steps, st.epsilon).unwrap();
        let (sb, sg) = (simple.position(ids::BELIEF).unwrap(), simple.position(ids::GOAL).unwrap());
        let history: Vec<BeliefGoal> = traj.steps[..2]
            .iter()
            .map(|x| BeliefGoal {
                belief: x[sb],
                goal: x[sg],
            })
            .collect();
        let last = traj.steps.len() - 1;
        let seen = rational_action_selection(Realisation::new(traj.steps[last][sg]).unwrap(), st.theta).unwrap();
        let predicted = predict_action(&simple, &x0, &st).unwrap();
        let res = infer_emotion(&full, &inputs, predicted, ObservedAction::new(seen, last).unwrap(), &history, &st)
            .unwrap();
        if res.discrepancy {
            false_positives += 1;
        }
    }
    outcome(
        flips > 0 && recovered == flips && false_positives == 0,
        format!(
            "{recovered}/{flips} action flips recovered (worst error {worst:.3}); \
             {false_positives} false positives in 100 emotion-free agents"
        ),
    )
}

fn c9_batches() -> Outcome {
    let scenarios = bundled_scenarios();
    let batches = make_batches(&scenarios).unwrap();
    let expected: [(&[u8], &[u8]); 3] = [(&[3, 4, 5, 6], &[1, 2]), (&[1, 2, 5, 6], &[3, 4]), (&[1, 2, 3, 4, 5], &[6])];
    for (b, (train, val)) in batches.iter().zip(expected) {
        let sets = |v: &[xfcm::scenarios::Scenario]| {
            let mut s: Vec<u8> = v.iter().map(|x| x.set_id).collect();
            s.dedup();
            s
        };
        if sets(&b.training) != train || sets(&b.validation) != val {
            return outcome(false, format!("batch {} differs", b.id));
        }
        if b.training.len() + b.validation.len() != scenarios.len() {
            return outcome(false, format!("batch {} does not cover every scenario", b.id));
        }
    }
    outcome(true, "train {3,4,5,6}/val {1,2}; train {1,2,5,6}/val {3,4}; train {1..5}/val {6}")
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        run(1, "boundedness and determinism", s(10), c1_boundedness),
        run(2, "negative-belief asymmetry", s(1), c2_asymmetry),
        run(3, "preference effect on emotion", s(1), c3_preference),
        run(4, "belief/emotion/goal anchors", s(1), c4_anchors),
        run(5, "identification recovery", s(300), c5_recovery),
        run(6, "model ordering", s(600), c6_ordering),
        run(7, "quantization exactness", s(1), c7_quantization),
        run(8, "inverse inference closed loop", s(30), c8_inverse),
        run(9, "batch partitions", s(1), c9_batches),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
