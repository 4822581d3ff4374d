use std::fs::File;
use std::path::Path;

use anyhow::{bail, Context, Result};
use xfcm::fcm::{converged_value, simulate, step, write_trajectory_csv, Network, Trajectory};
use xfcm::format::sig9;
use xfcm::identification::{
    evaluate, identify, identify_population, make_batches, parse_survey_csv, synthesize_population,
    write_survey_csv, write_summary_csv, Batch, FittedEntry, FittedWeights, GridSpec, ModelSetup, SearchMode,
    Survey,
};
use xfcm::inverse::{
    infer_emotion, parse_history_csv, parse_observation_csv, predict_action, simplify, BeliefGoal,
    InferenceSettings,
};
use xfcm::scenarios::{bundled_scenarios, ids, initial_state, parse_scenarios_csv, ModelVariant, Scenario};

use crate::config::{InputValue, NetworkSource, RunConfig};
use crate::output::{emit, read_file, sibling, Staged};
use crate::{Cli, Command, EvaluateArgs, IdentifyArgs, InferArgs, ModeArg, NetworkArgs, SynthArgs, UsageError};

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    let out = cli.out.clone().or_else(|| cfg.out.clone());
    let out = out.as_deref();
    match cli.command {
        Command::Simulate(a) => {
            apply_network_args(&mut cfg, &a.net)?;
            cmd_simulate(&cfg, out)
        }
        Command::Identify(a) => cmd_identify(&cfg, &a, out),
        Command::Evaluate(a) => cmd_evaluate(&cfg, &a, out),
        Command::InferEmotion(a) => {
            apply_network_args(&mut cfg, &a.net)?;
            if a.theta.is_some() {
                cfg.theta = a.theta;
            }
            cfg.validate()?;
            cmd_infer(&cfg, &a, out)
        }
        Command::Synth(a) => cmd_synth(&cfg, &a, cli.seed, out),
    }
}

fn apply_network_args(cfg: &mut RunConfig, a: &NetworkArgs) -> Result<()> {
    match (a.scenario, &a.network) {
        (Some(1), _) => cfg.network = NetworkSource::Scenario1,
        (Some(_), _) => cfg.network = NetworkSource::Scenario2,
        (None, Some(p)) => cfg.network = NetworkSource::File(p.clone()),
        (None, None) => {}
    }
    cfg.functional |= a.functional;
    for (slot, flag) in [
        (&mut cfg.inputs.rpk, &a.rpk),
        (&mut cfg.inputs.gwk, &a.gwk),
        (&mut cfg.inputs.gp, &a.gp),
    ] {
        if let Some(s) = flag {
            *slot = Some(InputValue::parse_flag(s));
        }
    }
    for (slot, flag) in [
        (&mut cfg.initial.belief, a.belief0),
        (&mut cfg.initial.goal, a.goal0),
        (&mut cfg.initial.emotion, a.emotion0),
    ] {
        if flag.is_some() {
            *slot = flag;
        }
    }
    if a.max_steps.is_some() {
        cfg.max_steps = a.max_steps;
    }
    if a.epsilon.is_some() {
        cfg.epsilon = a.epsilon;
    }
    cfg.validate()
}

fn summary(traj: &Trajectory) -> Result<String> {
    let mut s = match traj.converged_at {
        Some(k) => format!("converged at step {k}\n"),
        None => format!("not converged after {} steps\n", traj.steps.len() - 1),
    };
    for (id, name) in traj.concept_ids.iter().zip(&traj.concept_names) {
        let v = converged_value(traj, *id)?;
        s.push_str(&format!("{name} = {}\n", sig9(v.value.value())));
    }
    Ok(s)
}

fn cmd_simulate(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let net = cfg.network()?;
    let init = cfg.initial_state(&net)?;
    let traj = simulate(&net, &init, cfg.max_steps(), cfg.epsilon())?;
    let mut csv = Vec::new();
    write_trajectory_csv(&traj, &mut csv)?;
    let text = summary(&traj)?;
    emit(out, &csv)?;
    if out.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
    Ok(())
}

fn load_scenarios(path: Option<&Path>) -> Result<Vec<Scenario>> {
    match path {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            parse_scenarios_csv(f).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(bundled_scenarios()),
    }
}

fn load_survey(path: &Path) -> Result<Survey> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let survey = parse_survey_csv(f).with_context(|| format!("parsing {}", path.display()))?;
    if survey.is_empty() {
        bail!("survey {} has no responses", path.display());
    }
    Ok(survey)
}

fn model_setup(cfg: &RunConfig) -> Result<ModelSetup> {
    let mut setup = ModelSetup {
        base: cfg.base_weights()?,
        alphas: cfg.alphas(),
        ..ModelSetup::default()
    };
    if let Some(n) = cfg.max_steps {
        setup.max_steps = n;
    }
    Ok(setup)
}

fn select_batches(all: &[Batch; 3], only: Option<u8>) -> Vec<&Batch> {
    all.iter().filter(|b| only.map_or(true, |id| b.id == id)).collect()
}

fn grid_for(a: &IdentifyArgs) -> Result<GridSpec> {
    let allowed = a.model.identified_params();
    let names: Vec<&str> = match &a.params {
        None => allowed.to_vec(),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| {
                allowed.iter().copied().find(|p| *p == name).ok_or_else(|| {
                    UsageError(format!(
                        "--params: `{name}` is not identified by {} (choose from {})",
                        a.model,
                        allowed.join(", ")
                    ))
                })
            })
            .collect::<Result<_, _>>()?,
    };
    if names.is_empty() {
        bail!(UsageError("--params names no parameters".into()));
    }
    let mode = match a.mode {
        ModeArg::Exhaustive => SearchMode::Exhaustive,
        ModeArg::Cyclic => SearchMode::CyclicCoordinate,
    };
    GridSpec::for_params(&names, a.step, mode, a.max_sweeps).map_err(|e| UsageError(format!("grid: {e}")).into())
}

fn cmd_identify(cfg: &RunConfig, a: &IdentifyArgs, out: Option<&Path>) -> Result<()> {
    let grid = grid_for(a)?;
    let setup = model_setup(cfg)?;
    let scenarios = load_scenarios(a.scenarios.as_deref())?;
    let survey = load_survey(&a.survey)?;
    let batches = make_batches(&scenarios)?;
    let participants = survey.participants();
    let mut fitted = FittedWeights::default();
    for batch in select_batches(&batches, a.batch) {
        if a.model.personalized() {
            for p in &participants {
                let fit = identify(&setup, a.model, &survey, p, &batch.training, &grid)
                    .with_context(|| format!("batch {}, participant {p}", batch.id))?;
                fitted.entries.push(FittedEntry {
                    model: a.model,
                    batch: batch.id,
                    participant: Some(p.clone()),
                    loss: fit.loss,
                    weights: fit.weights,
                });
            }
        } else {
            let fit = identify_population(&setup, a.model, &survey, &participants, &batch.training, &grid)
                .with_context(|| format!("batch {}", batch.id))?;
            fitted.entries.push(FittedEntry {
                model: a.model,
                batch: batch.id,
                participant: None,
                loss: fit.loss,
                weights: fit.weights,
            });
        }
    }
    let mut body = fitted.to_json()?;
    body.push('\n');
    emit(out, body.as_bytes())
}

fn cmd_evaluate(cfg: &RunConfig, a: &EvaluateArgs, out: Option<&Path>) -> Result<()> {
    let text = String::from_utf8(read_file(&a.weights)?).context("weights file is not UTF-8")?;
    let fitted = FittedWeights::from_json(&text).with_context(|| format!("parsing {}", a.weights.display()))?;
    let models: Vec<ModelVariant> = fitted.models();
    if models.is_empty() {
        bail!("{} holds no fitted weights", a.weights.display());
    }
    let setup = model_setup(cfg)?;
    let scenarios = load_scenarios(a.scenarios.as_deref())?;
    let survey = load_survey(&a.survey)?;
    let batches = make_batches(&scenarios)?;
    let wanted: Vec<u8> = match a.batch {
        Some(b) => vec![b],
        None => {
            let mut ids: Vec<u8> = models.iter().flat_map(|&m| fitted.batches(m)).collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        }
    };
    let selected: Vec<&Batch> = batches.iter().filter(|b| wanted.contains(&b.id)).collect();
    let report = evaluate(&setup, &models, &selected, &survey, &survey.participants(), &fitted)?;

    let mut table = Vec::new();
    write_summary_csv(&report.summary(), &mut table)?;
    let mut staged = Staged::default();
    if let Some(path) = &a.report {
        let mut detail = Vec::new();
        report.write_csv(&mut detail)?;
        staged.add(path, &detail)?;
    }
    match out {
        Some(p) => {
            staged.add(p, &table)?;
            staged.commit()
        }
        None => {
            staged.commit()?;
            emit(None, &table)
        }
    }
}

fn belief_goal(net: &Network, state: &[f64]) -> Result<BeliefGoal> {
    Ok(BeliefGoal {
        belief: state[net.position(ids::BELIEF)?],
        goal: state[net.position(ids::GOAL)?],
    })
}

fn cmd_infer(cfg: &RunConfig, a: &InferArgs, out: Option<&Path>) -> Result<()> {
    let observed = {
        let f = File::open(&a.observation).with_context(|| format!("opening {}", a.observation.display()))?;
        parse_observation_csv(f).with_context(|| format!("parsing {}", a.observation.display()))?
    };
    let settings = InferenceSettings {
        theta: cfg.theta.unwrap_or(0.0),
        max_steps: cfg.max_steps(),
        epsilon: cfg.epsilon(),
        ..InferenceSettings::default()
    };
    let full = cfg.network()?;
    let inputs = cfg.scenario_inputs(&full)?;
    let simple = simplify(&full)?;
    let start = initial_state(&simple, &inputs, &cfg.initial_conditions())?;
    let predicted = predict_action(&simple, &start, &settings)?;
    let history = match &a.history {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            parse_history_csv(f).with_context(|| format!("parsing {}", p.display()))?
        }
        None => {
            let next = step(&simple, &start)?;
            vec![belief_goal(&simple, &start)?, belief_goal(&simple, &next)?]
        }
    };
    let result = infer_emotion(&full, &inputs, predicted, observed, &history, &settings)?;
    let mut body = Vec::new();
    result.write_csv(&mut body)?;
    emit(out, &body)
}

fn cmd_synth(cfg: &RunConfig, a: &SynthArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let Some(out) = out else {
        bail!(UsageError("synth writes two files and needs --out <survey.csv>".into()));
    };
    if !(a.noise >= 0.0 && a.noise.is_finite()) {
        bail!(UsageError(format!("--noise {} must be non-negative", a.noise)));
    }
    let levels = GridSpec::levels(a.step).map_err(|e| UsageError(format!("--step: {e}")))?;
    let setup = model_setup(cfg)?;
    let count = usize::try_from(a.count).context("--count is too large")?;
    let pop = synthesize_population(&setup, count, seed, &levels, &bundled_scenarios(), !a.numeric, a.noise)?;
    let mut survey = Vec::new();
    write_survey_csv(&pop.survey, &mut survey, a.numeric)?;
    let mut truth = pop.truth_json()?;
    truth.push('\n');
    let truth_path = sibling(out, ".truth.json");
    let mut staged = Staged::default();
    staged.add(out, &survey)?;
    staged.add(&truth_path, truth.as_bytes())?;
    staged.commit()?;
    eprintln!(
        "{} responses from {} participants; ground truth in {}",
        pop.survey.len(),
        count,
        truth_path.display()
    );
    Ok(())
}
