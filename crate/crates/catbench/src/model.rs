//! The log-linear model over derivations: scoring, ranking with softmax
//! probabilities, latent-derivation gradients, and stochastic gradient
//! training with a decaying learning rate, optional beam, and optional
//! fixed-point extrapolation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::config::{apply_processor_function, Config};
use crate::element::SourcedGrammar;
use crate::engine::{analyze_tokens, Derivation, EngineError};
use crate::eval::alpha_equiv;
use crate::lambda::LambdaTerm;
use crate::parse::parse_grammar_text;
use crate::source::{ensure_workspace, regenerate_text, source_grammar};
use crate::training_data::{
    parse_supervision, write_sup, ExperimentSpec, Iterations, SupervisionPair,
};

/// Per-element occurrence counts of one derivation.
pub type FeatureVector = BTreeMap<u64, u64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("no derivations for the input")]
    NoDerivations,
    #[error("derivation uses key {0}, which is not a model parameter")]
    UnknownKey(u64),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A sourced grammar with one parameter per element key, initialized from
/// the stored weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub grammar: SourcedGrammar,
    pub theta: BTreeMap<u64, f64>,
}

impl Model {
    pub fn from_grammar(grammar: SourcedGrammar) -> Model {
        let theta = grammar.elements.iter().map(|e| (e.key(), e.weight())).collect();
        Model { grammar, theta }
    }

    /// The grammar with weights replaced by the current parameters.
    pub fn to_grammar(&self) -> SourcedGrammar {
        let mut g = self.grammar.clone();
        for el in &mut g.elements {
            if let Some(w) = self.theta.get(&el.key()) {
                el.set_weight(*w);
            }
        }
        g
    }
}

/// Inner product of the parameters with a derivation's feature counts.
pub fn derivation_logscore(d: &Derivation, theta: &BTreeMap<u64, f64>) -> Result<f64, ModelError> {
    let mut score = 0.0;
    for (key, count) in d.feature_counts() {
        let w = theta.get(&key).ok_or(ModelError::UnknownKey(key))?;
        score += w * count as f64;
    }
    Ok(score)
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s));
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// One ranked predicate-argument structure: its total probability across
/// derivations, the likeliest derivation, and how many derivations share it.
#[derive(Debug, Clone)]
pub struct RankedSolution {
    pub lf: LambdaTerm,
    pub probability: f64,
    pub best: Derivation,
    pub derivation_count: usize,
}

#[derive(Debug, Clone)]
pub struct Ranked {
    pub input: String,
    pub solutions: Vec<RankedSolution>,
}

/// Parses the input and turns derivation weights into probabilities:
/// `P(d) = exp(score d) / sum exp(score d')`. A structure's probability is
/// the sum over its derivations; the list is sorted by falling probability,
/// ties broken by canonical print order.
pub fn rank(input: &str, model: &Model, config: &Config) -> Result<Ranked, ModelError> {
    let tokens = crate::engine::tokenize(input)?;
    let derivs = analyze_tokens(&tokens, &model.grammar, config)?;
    if derivs.is_empty() {
        return Err(ModelError::NoDerivations);
    }
    let scores: Vec<f64> = derivs
        .iter()
        .map(|d| derivation_logscore(d, &model.theta))
        .collect::<Result<_, _>>()?;
    let probs = softmax(&scores);

    let mut groups: Vec<RankedSolution> = Vec::new();
    for (d, p) in derivs.iter().zip(&probs) {
        match groups.iter_mut().find(|g| alpha_equiv(&g.lf, d.lf())) {
            Some(g) => {
                g.probability += p;
                g.derivation_count += 1;
                let best_p = probs[derivs
                    .iter()
                    .position(|x| x.root.structure_key() == g.best.root.structure_key())
                    .expect("best derivation still present")];
                if *p > best_p {
                    g.best = d.clone();
                }
            }
            None => groups.push(RankedSolution {
                lf: d.lf().clone(),
                probability: *p,
                best: d.clone(),
                derivation_count: 1,
            }),
        }
    }
    groups.sort_by(|a, b| {
        b.probability
            .partial_cmp(&a.probability)
            .unwrap()
            .then_with(|| a.lf.to_string().cmp(&b.lf.to_string()))
    });
    Ok(Ranked { input: tokens.render(), solutions: groups })
}

/// The latent-derivation gradient of one supervision pair:
/// `E[features | correct] - E[features]` under the softmax. Returns the
/// zero vector with a skip flag when no derivation matches the gold
/// structure.
pub fn gradient(
    pair: &SupervisionPair,
    model: &Model,
    config: &Config,
) -> Result<(BTreeMap<u64, f64>, bool), ModelError> {
    let derivs = analyze_tokens(&pair.surface, &model.grammar, config)?;
    if derivs.is_empty() {
        return Err(ModelError::NoDerivations);
    }
    let scores: Vec<f64> = derivs
        .iter()
        .map(|d| derivation_logscore(d, &model.theta))
        .collect::<Result<_, _>>()?;
    let probs = softmax(&scores);
    let correct: Vec<usize> = derivs
        .iter()
        .enumerate()
        .filter(|(_, d)| alpha_equiv(d.lf(), &pair.gold_lf))
        .map(|(i, _)| i)
        .collect();
    if correct.is_empty() {
        return Ok((BTreeMap::new(), true));
    }

    let correct_mass: f64 = correct.iter().map(|&i| probs[i]).sum();
    let mut grad: BTreeMap<u64, f64> = BTreeMap::new();
    for &i in &correct {
        let w = probs[i] / correct_mass;
        for (k, c) in derivs[i].feature_counts() {
            *grad.entry(k).or_insert(0.0) += w * c as f64;
        }
    }
    for (i, d) in derivs.iter().enumerate() {
        for (k, c) in d.feature_counts() {
            *grad.entry(k).or_insert(0.0) -= probs[i] * c as f64;
        }
    }
    Ok((grad, false))
}

/// Beam over parameter updates: keeps the keys whose previous-epoch change
/// reaches `(max change)^exponent`; when every change is below 1 the
/// threshold collapses to `max * epsilon` so the beam only drops unmoved
/// keys. Zero-change keys are always excluded.
pub fn beam_filter(prev_deltas: &BTreeMap<u64, f64>, exponent: f64) -> BTreeSet<u64> {
    let max = prev_deltas.values().fold(0.0f64, |m, v| m.max(v.abs()));
    if max <= 0.0 {
        return BTreeSet::new();
    }
    let threshold = if max >= 1.0 { max.powf(exponent) } else { max * f64::EPSILON };
    prev_deltas
        .iter()
        .filter(|(_, v)| v.abs() > 0.0 && v.abs() >= threshold)
        .map(|(k, _)| *k)
        .collect()
}

/// One training run: the experiment line plus the file triple, candidate
/// count, and output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainRun {
    pub spec: ExperimentSpec,
    pub grammar_path: PathBuf,
    pub supervision_path: PathBuf,
    pub candidates: usize,
    pub out_dir: PathBuf,
}

impl TrainRun {
    /// Base name for this run's outputs: `<prefix>-<lr>-<lrr>-<iters>`.
    pub fn base_name(&self) -> String {
        format!("{}-{}", self.spec.log_prefix, self.spec.name_suffix())
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("grammar did not parse clean: {0:?}")]
    BadGrammar(Vec<crate::parse::LineError>),
    #[error("supervision did not parse clean: {0:?}")]
    BadSupervision(Vec<crate::parse::LineError>),
    #[error("supervision file has no pairs")]
    EmptySupervision,
    #[error("candidate count must be at least 1")]
    BadCandidateCount,
    #[error("{0}")]
    PreFunction(String),
    #[error(transparent)]
    Source(#[from] crate::source::SourceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub candidate_paths: Vec<PathBuf>,
    pub log_path: PathBuf,
    /// Training-set top-1 accuracy of the best candidate.
    pub best_accuracy: f64,
}

struct EpochSnapshot {
    epoch: usize,
    theta: BTreeMap<u64, f64>,
    accuracy: f64,
}

/// Top-1 accuracy of the model over the supervision pairs: the likeliest
/// structure equals gold.
pub fn top1_accuracy(model: &Model, pairs: &[SupervisionPair], config: &Config) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let mut hits = 0usize;
    for pair in pairs {
        let input = pair.surface.render();
        if let Ok(ranked) = rank(&input, model, config) {
            if let Some(top) = ranked.solutions.first() {
                if alpha_equiv(&top.lf, &pair.gold_lf) {
                    hits += 1;
                }
            }
        }
    }
    hits as f64 / pairs.len() as f64
}

/// Runs stochastic gradient ascent over the supervision pairs in file
/// order, with the step size decaying as `lr / (1 + lrr * (t - 1))` across
/// epochs. Writes the N best epoch snapshots (by training accuracy, ties to
/// the later epoch) as re-text candidate grammars, plus a plain-text log.
/// Under `xp` a fixed number of epochs is run and the extrapolated fixed
/// point competes as an extra candidate.
pub fn train(run: &TrainRun, base_config: &Config) -> Result<TrainOutcome, TrainError> {
    if run.candidates == 0 {
        return Err(TrainError::BadCandidateCount);
    }
    let started = Instant::now();

    let grammar_text = std::fs::read_to_string(&run.grammar_path)?;
    let (raw, errs) = parse_grammar_text(&grammar_text);
    if !errs.is_empty() {
        return Err(TrainError::BadGrammar(errs));
    }
    let grammar = source_grammar(&raw)?;

    let sup_text = std::fs::read_to_string(&run.supervision_path)?;
    let (pairs, errs) = parse_supervision(&sup_text);
    if !errs.is_empty() {
        return Err(TrainError::BadSupervision(errs));
    }
    if pairs.is_empty() {
        return Err(TrainError::EmptySupervision);
    }

    // Compiled supervision goes to the workspace as an auxiliary file.
    if let Ok(ws) = ensure_workspace() {
        let stem = run
            .supervision_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "supervision".into());
        let _ = write_sup(&pairs, &ws.join(format!("{stem}.sup")));
    }

    let mut config = base_config.clone().with_heap_hint(run.spec.heap_mb);
    if let Some(name) = &run.spec.pre_function {
        apply_processor_function(&mut config, name).map_err(TrainError::PreFunction)?;
    }

    let mut model = Model::from_grammar(grammar);
    let epochs = match run.spec.iterations {
        Iterations::Count(n) => n as usize,
        Iterations::Extrapolate => config.xp_epochs,
    };
    let lr = run.spec.learning_rate;
    let lrr = run.spec.learning_rate_rate;

    let mut log = String::new();
    log.push_str(&format!(
        "train {} epochs={} lr={:?} lrr={:?} pairs={} beam={} nfparse={}\n",
        run.base_name(),
        epochs,
        lr,
        lrr,
        pairs.len(),
        config.beam,
        config.nfparse,
    ));

    let mut snapshots: Vec<EpochSnapshot> = Vec::new();
    let mut prev_deltas: BTreeMap<u64, f64> = BTreeMap::new();

    for t in 1..=epochs {
        let epoch_start = Instant::now();
        let alpha = lr / (1.0 + lrr * (t as f64 - 1.0));
        let allowed: Option<BTreeSet<u64>> = if config.beam && t > 1 {
            Some(beam_filter(&prev_deltas, config.beam_exponent))
        } else {
            None
        };
        let theta_start = model.theta.clone();
        let mut skips = 0usize;
        for pair in &pairs {
            match gradient(pair, &model, &config) {
                Ok((grad, skipped)) => {
                    if skipped {
                        skips += 1;
                        continue;
                    }
                    for (k, g) in grad {
                        if let Some(keys) = &allowed {
                            if !keys.contains(&k) {
                                continue;
                            }
                        }
                        *model.theta.entry(k).or_insert(0.0) += alpha * g;
                    }
                }
                Err(ModelError::NoDerivations) => skips += 1,
                Err(ModelError::UnknownKey(_)) | Err(ModelError::Engine(_)) => skips += 1,
            }
        }
        prev_deltas = model
            .theta
            .iter()
            .map(|(k, v)| (*k, v - theta_start.get(k).copied().unwrap_or(0.0)))
            .collect();
        let accuracy = top1_accuracy(&model, &pairs, &config);
        log.push_str(&format!(
            "epoch {t} alpha={alpha:?} accuracy={accuracy:.4} skips={skips} elapsed={:?}\n",
            epoch_start.elapsed()
        ));
        snapshots.push(EpochSnapshot { epoch: t, theta: model.theta.clone(), accuracy });
    }

    if run.spec.iterations == Iterations::Extrapolate {
        let keys: Vec<u64> = model.theta.keys().copied().collect();
        let seq: Vec<Vec<f64>> = snapshots
            .iter()
            .map(|s| keys.iter().map(|k| s.theta[k]).collect())
            .collect();
        let xp = crate::extrapolate::minimal_polynomial_extrapolate(&seq, config.xp_window);
        let theta: BTreeMap<u64, f64> = keys.into_iter().zip(xp).collect();
        let xp_model = Model { grammar: model.grammar.clone(), theta: theta.clone() };
        let accuracy = top1_accuracy(&xp_model, &pairs, &config);
        log.push_str(&format!("extrapolated accuracy={accuracy:.4}\n"));
        snapshots.push(EpochSnapshot { epoch: epochs + 1, theta, accuracy });
    }

    // Model selection: best training accuracy first, later epochs win ties.
    snapshots.sort_by(|a, b| {
        b.accuracy
            .partial_cmp(&a.accuracy)
            .unwrap()
            .then_with(|| b.epoch.cmp(&a.epoch))
    });

    std::fs::create_dir_all(&run.out_dir)?;
    let base = run.base_name();
    let mut candidate_paths = Vec::new();
    for (i, snap) in snapshots.iter().take(run.candidates).enumerate() {
        let candidate = Model { grammar: model.grammar.clone(), theta: snap.theta.clone() };
        let path = run.out_dir.join(format!("{base}-cand{}.txt", i + 1));
        crate::source::atomic_write(&path, &regenerate_text(&candidate.to_grammar()))?;
        log.push_str(&format!(
            "cand{} epoch={} accuracy={:.4} -> {}\n",
            i + 1,
            snap.epoch,
            snap.accuracy,
            path.display()
        ));
        candidate_paths.push(path);
    }
    let best_accuracy = snapshots.first().map(|s| s.accuracy).unwrap_or(0.0);
    log.push_str(&format!("done in {:?}\n", started.elapsed()));

    let log_path = run.out_dir.join(format!("{base}.log"));
    crate::source::atomic_write(&log_path, &log)?;

    Ok(TrainOutcome { candidate_paths, log_path, best_accuracy })
}
