//! Experiment orchestration: JSON configs, deterministic per-trial seeding,
//! CSV reports with fixed columns, and closed-form theory bounds attached to
//! every summary.

pub mod verify;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crypto::toy_scheme;
use crate::domain::{
    BitVector, Domain, Point, Predicate, PredicateClass, ZpVector, DEFAULT_DOMAIN_CAP,
};
use crate::learners::{DictatorLearner, SqLearner, TrivialSparseLearner};
use crate::oracles::{
    adversary_commit, AdversaryState, ClassTables, HonestSqs, OracleMode, QueryBudget, SqsOracle,
};
use crate::samplers::{bit_fixing_sampler, learn_then_sample, random_guess, ReductionParams};
use crate::{Error, Result, TrialRng};

/// Predicate descriptor: `{kind, n, p?, params}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PredicateSpec {
    NegParity {
        n: usize,
        secret_hex: String,
        #[serde(default)]
        full_cube: bool,
    },
    BoolLinear {
        n: usize,
        p: u32,
        coeffs: Vec<u32>,
    },
    SetMembership {
        n: usize,
        members_hex: Vec<String>,
        #[serde(default)]
        punctured: bool,
    },
    Dictator {
        n: usize,
        index: usize,
    },
    SigVerify {
        scheme: SchemeSpec,
    },
}

/// Signature-scheme descriptor: `{kind:"toy_prf", n, key_hex}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeSpec {
    ToyPrf { n: usize, key_hex: String },
}

impl SchemeSpec {
    pub fn build(&self) -> Result<crate::crypto::ToyScheme> {
        match self {
            SchemeSpec::ToyPrf { n, key_hex } => {
                let key = u64::from_str_radix(key_hex, 16)
                    .map_err(|e| Error::Config(format!("bad key_hex {key_hex:?}: {e}")))?;
                toy_scheme(*n, key)
            }
        }
    }
}

impl PredicateSpec {
    pub fn build(&self) -> Result<Predicate> {
        match self {
            PredicateSpec::NegParity { n, secret_hex, full_cube } => {
                let secret = BitVector::from_hex(*n, secret_hex)?;
                let domain = if *full_cube {
                    Domain::full_cube(*n)?
                } else {
                    Domain::punctured_cube(*n)?
                };
                Predicate::neg_parity_on(secret, domain)
            }
            PredicateSpec::BoolLinear { n, p, coeffs } => {
                if coeffs.len() != *n {
                    return Err(Error::Config(format!(
                        "coeffs length {} does not match n={n}",
                        coeffs.len()
                    )));
                }
                Predicate::bool_linear(ZpVector::new(*p, coeffs.clone())?)
            }
            PredicateSpec::SetMembership { n, members_hex, punctured } => {
                let domain = if *punctured {
                    Domain::punctured_cube(*n)?
                } else {
                    Domain::full_cube(*n)?
                };
                let members = members_hex
                    .iter()
                    .map(|h| Ok(Point::Bits(BitVector::from_hex(*n, h)?)))
                    .collect::<Result<Vec<_>>>()?;
                Predicate::set_membership(domain, &members)
            }
            PredicateSpec::Dictator { n, index } => Predicate::dictator(*n, *index),
            PredicateSpec::SigVerify { scheme } => Ok(Predicate::sig_verify(scheme.build()?)),
        }
    }
}

/// Predicate-class descriptor.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassSpec {
    AllNegParity {
        n: usize,
        #[serde(default)]
        include_zero: bool,
    },
    NormalizedBoolLinear {
        n: usize,
        p: u32,
    },
    Dictators {
        n: usize,
    },
}

impl ClassSpec {
    pub fn build(&self) -> PredicateClass {
        match self {
            ClassSpec::AllNegParity { n, include_zero } => {
                PredicateClass::AllNegParity { n: *n, include_zero: *include_zero }
            }
            ClassSpec::NormalizedBoolLinear { n, p } => {
                PredicateClass::NormalizedBoolLinear { n: *n, p: *p }
            }
            ClassSpec::Dictators { n } => PredicateClass::Dictators { n: *n },
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    Exact,
    Sampled { m: u64 },
    WorstNoise,
    Adversarial,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    Dictator,
    TrivialSparse { density_bound: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplerSpec {
    Random,
    BitFixing {
        size_bound: u64,
    },
    LearnThenSample {
        eps_prime: f64,
        #[serde(default)]
        rho: Option<f64>,
        learner: LearnerSpec,
        #[serde(default)]
        learner_queries: Option<u64>,
        #[serde(default)]
        query_tolerance: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub max_queries: u64,
    pub min_tolerance: f64,
}

impl From<BudgetSpec> for QueryBudget {
    fn from(b: BudgetSpec) -> QueryBudget {
        QueryBudget { max_queries: b.max_queries, min_tolerance: b.min_tolerance }
    }
}

/// Full experiment description. Every field is explicit; reports echo the
/// values actually used.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<PredicateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassSpec>,
    pub oracle: OracleSpec,
    pub sampler: SamplerSpec,
    pub budget: BudgetSpec,
    pub trials: u64,
    pub seed: u64,
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_slack: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(json)
            .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.oracle {
            OracleSpec::Adversarial => {
                if self.class.is_none() {
                    return Err(Error::Config(
                        "adversarial oracle needs a `class` descriptor".into(),
                    ));
                }
            }
            _ => {
                if self.predicate.is_none() && self.class.is_none() {
                    return Err(Error::Config(
                        "honest oracle needs a `predicate` (or a `class` to draw from)".into(),
                    ));
                }
            }
        }
        if let SamplerSpec::LearnThenSample { eps_prime, .. } = self.sampler {
            if !(eps_prime > 0.0 && eps_prime < 1.0) {
                return Err(Error::Config(format!(
                    "eps_prime {eps_prime} out of (0,1)"
                )));
            }
            if matches!(self.oracle, OracleSpec::Adversarial) {
                let has_rho = matches!(
                    self.sampler,
                    SamplerSpec::LearnThenSample { rho: Some(_), .. }
                );
                if !has_rho {
                    return Err(Error::Config(
                        "learn_then_sample against the adversary needs an explicit rho".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// One CSV row. Column order is fixed:
/// `trial,seed,queries,output_hex,is_positive,notes`.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub queries: u64,
    pub output_hex: String,
    pub is_positive: u8,
    pub notes: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Success may not exceed the bound.
    Upper,
    /// Success must reach the bound, up to the Monte Carlo slack.
    Lower,
    /// Success should match the bound within the slack.
    Near,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub theory_bound: f64,
    pub bound_kind: BoundKind,
    pub mc_slack: f64,
    pub bound_satisfied: bool,
    pub mean_queries: f64,
    pub error_trials: u64,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub summary: ExperimentSummary,
}

impl ExperimentOutput {
    /// Renders the fixed-column CSV.
    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "seed", "queries", "output_hex", "is_positive", "notes"])?;
        for r in &self.records {
            w.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                r.queries.to_string(),
                r.output_hex.clone(),
                r.is_positive.to_string(),
                r.notes.clone(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)?)
    }
}

/// Per-trial seed: the configured master seed XOR the trial index, fed to the
/// counter-based generator. Trials are independent and order-free, so
/// parallel execution cannot change any row.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    master ^ trial
}

struct SharedSetup {
    class: Option<PredicateClass>,
    tables: Option<Arc<ClassTables>>,
    predicate: Option<Predicate>,
}

fn prepare(config: &ExperimentConfig) -> Result<SharedSetup> {
    config.validate()?;
    let class = config.class.as_ref().map(|c| c.build());
    let predicate = config.predicate.as_ref().map(|p| p.build()).transpose()?;
    let tables = match (&config.oracle, &class) {
        (OracleSpec::Adversarial, Some(class)) => match class {
            PredicateClass::AllNegParity { .. } => None,
            other => Some(ClassTables::build(
                other,
                other.member_domain()?,
                DEFAULT_DOMAIN_CAP,
            )?),
        },
        _ => None,
    };
    Ok(SharedSetup { class, tables, predicate })
}

fn build_learner(spec: &LearnerSpec, n: usize) -> Box<dyn SqLearner + Sync> {
    match spec {
        LearnerSpec::Dictator => Box::new(DictatorLearner { n }),
        LearnerSpec::TrivialSparse { density_bound } => {
            Box::new(TrivialSparseLearner { density_bound: *density_bound })
        }
    }
}

fn reduction_params_for(
    spec: &SamplerSpec,
    rho: f64,
    n: usize,
) -> Result<ReductionParams> {
    let SamplerSpec::LearnThenSample {
        eps_prime,
        learner,
        learner_queries,
        query_tolerance,
        ..
    } = spec
    else {
        return Err(Error::Config("not a learn_then_sample spec".into()));
    };
    let q = learner_queries.unwrap_or(match learner {
        LearnerSpec::Dictator => n as u64,
        LearnerSpec::TrivialSparse { .. } => 1,
    });
    let xi = query_tolerance.unwrap_or(crate::learners::DICTATOR_QUERY_TOLERANCE);
    ReductionParams::derive(*eps_prime, rho, q, xi)
}

fn run_sampler_against(
    oracle: &mut dyn SqsOracle,
    output_domain: Domain,
    config: &ExperimentConfig,
    rho_hint: Option<f64>,
    rng: &mut TrialRng,
) -> Result<crate::samplers::SamplerOutcome> {
    match &config.sampler {
        SamplerSpec::Random => {
            let mut out = crate::samplers::SamplerOutcome {
                output: random_guess(output_domain, rng),
                is_positive: None,
                queries_used: 0,
                tolerances_used: Vec::new(),
                notes: Vec::new(),
            };
            out.notes.push("random_guess".into());
            Ok(out)
        }
        SamplerSpec::BitFixing { size_bound } => {
            bit_fixing_sampler(oracle, output_domain, *size_bound, rng)
        }
        spec @ SamplerSpec::LearnThenSample { rho, learner, .. } => {
            let rho = rho
                .or(rho_hint)
                .ok_or_else(|| Error::Config("no density available for the reduction".into()))?;
            let params = reduction_params_for(spec, rho, output_domain.n())?;
            let learner = build_learner(learner, output_domain.n());
            learn_then_sample(learner.as_ref(), oracle, output_domain, &params, rng)
        }
    }
}

fn run_trial(
    config: &ExperimentConfig,
    setup: &SharedSetup,
    trial: u64,
) -> TrialRecord {
    let seed = trial_seed(config.seed, trial);
    let mut rng = TrialRng::seed_from_u64(seed);
    let result = run_trial_inner(config, setup, &mut rng);
    match result {
        Ok((outcome, is_positive, extra)) => TrialRecord {
            trial,
            seed,
            queries: outcome.queries_used,
            output_hex: outcome.output.to_hex(),
            is_positive: u8::from(is_positive),
            notes: {
                let mut notes = outcome.notes;
                notes.extend(extra);
                notes.join("|")
            },
        },
        Err(e) => TrialRecord {
            trial,
            seed,
            queries: 0,
            output_hex: String::new(),
            is_positive: 0,
            notes: format!("error: {e}"),
        },
    }
}

fn run_trial_inner(
    config: &ExperimentConfig,
    setup: &SharedSetup,
    rng: &mut TrialRng,
) -> Result<(crate::samplers::SamplerOutcome, bool, Vec<String>)> {
    match config.oracle {
        OracleSpec::Adversarial => {
            let class = setup.class.as_ref().expect("validated");
            let mut state = AdversaryState::with_tables(
                class.clone(),
                config.budget.into(),
                setup.tables.clone(),
            )?;
            let output_domain = class.member_domain()?;
            let rho_hint = None;
            let mut outcome =
                run_sampler_against(&mut state, output_domain, config, rho_hint, rng)?;
            let committed = adversary_commit(&mut state, rng)?;
            let is_positive = committed.eval(&outcome.output).unwrap_or(false);
            let removed_total = config
                .class
                .as_ref()
                .map(|_| state.initial_len() - state.survivors_len())
                .unwrap_or(0);
            outcome.is_positive = Some(is_positive);
            Ok((
                outcome,
                is_positive,
                vec![
                    format!("pruned={removed_total}"),
                    format!("remaining={}", state.survivors_len()),
                ],
            ))
        }
        OracleSpec::Exact | OracleSpec::Sampled { .. } | OracleSpec::WorstNoise => {
            let predicate = match (&setup.predicate, &setup.class) {
                (Some(p), _) => p.clone(),
                (None, Some(class)) => class.member(rng.gen_range(0..class.len())),
                (None, None) => unreachable!("validated"),
            };
            let mode = match config.oracle {
                OracleSpec::Exact => OracleMode::Exact,
                OracleSpec::Sampled { m } => OracleMode::Sampled { m },
                OracleSpec::WorstNoise => OracleMode::WorstNoise,
                OracleSpec::Adversarial => unreachable!(),
            };
            let rho_hint = predicate.density(DEFAULT_DOMAIN_CAP).ok();
            let oracle_rng = TrialRng::seed_from_u64(rng.gen());
            let mut oracle = HonestSqs::new(predicate.clone(), mode, oracle_rng)
                .with_budget(config.budget.into());
            let output_domain = predicate.domain();
            let mut outcome =
                run_sampler_against(&mut oracle, output_domain, config, rho_hint, rng)?;
            let is_positive = predicate.eval(&outcome.output).unwrap_or(false);
            outcome.is_positive = Some(is_positive);
            Ok((outcome, is_positive, Vec::new()))
        }
    }
}

/// The closed-form bound attached to the configured regime, and how the
/// measured rate is expected to relate to it.
pub fn theory_bound(config: &ExperimentConfig) -> (f64, BoundKind, Vec<String>) {
    let mut notes = Vec::new();
    match (&config.oracle, &config.sampler, &config.class, &config.predicate) {
        (OracleSpec::Adversarial, _, Some(ClassSpec::AllNegParity { n, .. }), _) => {
            (0.5 + 2f64.powf(2.0 - *n as f64 / 4.0), BoundKind::Upper, notes)
        }
        (OracleSpec::Adversarial, _, Some(ClassSpec::NormalizedBoolLinear { n, p }), _) => {
            let pf = *p as f64;
            (
                1.0 / pf + pf.powf(-(*n as f64) / 13.0),
                BoundKind::Upper,
                notes,
            )
        }
        (OracleSpec::Adversarial, _, _, _) => {
            notes.push("no closed-form ceiling for this class; 1.0 is vacuous".into());
            (1.0, BoundKind::Upper, notes)
        }
        (_, SamplerSpec::LearnThenSample { eps_prime, .. }, _, _) => {
            (1.0 - eps_prime, BoundKind::Lower, notes)
        }
        (OracleSpec::Exact, SamplerSpec::BitFixing { .. }, _, _) => {
            (1.0, BoundKind::Lower, notes)
        }
        (_, SamplerSpec::BitFixing { .. }, _, _) => {
            notes.push("bit fixing is only guaranteed against the exact oracle".into());
            (0.0, BoundKind::Lower, notes)
        }
        (_, SamplerSpec::Random, _, Some(spec)) => match spec.build() {
            Ok(p) => match p.density(DEFAULT_DOMAIN_CAP) {
                Ok(density) => (density, BoundKind::Near, notes),
                Err(e) => {
                    notes.push(format!("density unavailable: {e}"));
                    (0.0, BoundKind::Lower, notes)
                }
            },
            Err(e) => {
                notes.push(format!("predicate unavailable: {e}"));
                (0.0, BoundKind::Lower, notes)
            }
        },
        _ => {
            notes.push("no closed form for this regime".into());
            (0.0, BoundKind::Lower, notes)
        }
    }
}

/// Runs every trial (in parallel, deterministically) and builds the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let setup = prepare(config)?;
    let mut records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(config, &setup, trial))
        .collect();
    records.sort_by_key(|r| r.trial);

    let (theory_bound, bound_kind, mut notes) = theory_bound(config);
    let successes = records.iter().filter(|r| r.is_positive == 1).count() as u64;
    let error_trials =
        records.iter().filter(|r| r.notes.starts_with("error:")).count() as u64;
    let success_rate = if config.trials == 0 {
        notes.push("no data".into());
        0.0
    } else {
        successes as f64 / config.trials as f64
    };
    let mc_slack = config.mc_slack.unwrap_or_else(|| match bound_kind {
        BoundKind::Upper => 0.0,
        BoundKind::Lower => 0.03,
        BoundKind::Near => {
            let sigma = (theory_bound * (1.0 - theory_bound)
                / (config.trials.max(1) as f64))
                .sqrt();
            (3.0 * sigma).max(0.01)
        }
    });
    let bound_satisfied = config.trials == 0
        || match bound_kind {
            BoundKind::Upper => success_rate <= theory_bound,
            BoundKind::Lower => success_rate >= theory_bound - mc_slack,
            BoundKind::Near => (success_rate - theory_bound).abs() <= mc_slack,
        };
    if matches!(
        (&config.sampler, &config.predicate),
        (SamplerSpec::LearnThenSample { .. }, Some(PredicateSpec::NegParity { full_cube: false, .. }))
    ) {
        notes.push("second phase draws from the predicate's punctured domain".into());
    }
    let mean_queries = if config.trials == 0 {
        0.0
    } else {
        records.iter().map(|r| r.queries).sum::<u64>() as f64 / config.trials as f64
    };

    Ok(ExperimentOutput {
        summary: ExperimentSummary {
            name: config.name.clone(),
            trials: config.trials,
            successes,
            success_rate,
            theory_bound,
            bound_kind,
            mc_slack,
            bound_satisfied,
            mean_queries,
            error_trials,
            notes,
        },
        records,
    })
}

/// Runs a single trial (index 0 unless overridden) and reports the outcome;
/// the `sample` CLI subcommand's engine.
pub fn run_single_sample(config: &ExperimentConfig, trial: u64) -> Result<serde_json::Value> {
    let setup = prepare(config)?;
    let record = run_trial(config, &setup, trial);
    Ok(serde_json::json!({
        "trial": record.trial,
        "seed": record.seed,
        "queries": record.queries,
        "output_hex": record.output_hex,
        "is_positive": record.is_positive,
        "notes": record.notes,
    }))
}
