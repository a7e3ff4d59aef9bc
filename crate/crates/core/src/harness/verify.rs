//! Named verification suites. Each selector measures a quantity the library
//! claims an exact value or a closed-form bound for, and reports one line
//! per check: what was measured, the bound it must respect, and the verdict.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::crypto::{toy_scheme, Breaker, BreakOutcome, CheatingKeyedSampler, PairQuery};
use crate::domain::{
    class_stats_boollinear, neg_parity_point_counts, BitVector, Domain, Predicate,
    PredicateClass, DEFAULT_DOMAIN_CAP,
};
use crate::fourier::{
    boollinear_canonical_xi, count_dependent_boollinear, count_dependent_negparity,
    inner_product, naive_spectrum, orthonormalize_correlated, parity_coefficient_from_counts,
    wht, CorrelatedClassStats, ParityCoefficientCounts, TruthTable, ORTHO_TOL,
};
use crate::learners::DictatorLearner;
use crate::oracles::{
    adversary_answer, honest_sql_answer, AdversaryState, ClassTables, HonestSqs, LabeledQuery,
    OracleMode, QueryBudget,
};
use crate::quantum::{
    continued_fraction_order, recover_order_by_lcm, simon_end_to_end, ShorInstance,
    SimonInstance, SimonSampleSource,
};
use crate::samplers::{learn_then_sample, simulate_sql_from_sqs, ReductionParams};
use crate::stats::{
    hoeffding_tail, statistical_distance, uniform_interval_sd,
    uniform_interval_sd_by_integration, Pmf, UniformInterval,
};
use crate::{Error, Result, TrialRng};

/// Optional scale overrides; selectors fall back to their pinned defaults.
#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyScale {
    pub n: Option<usize>,
    pub p: Option<u32>,
    pub xi: Option<f64>,
    pub trials: Option<u64>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyCheck {
    pub check: String,
    pub statement: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl VerifyCheck {
    fn at_most(check: impl Into<String>, statement: impl Into<String>, measured: f64, bound: f64) -> Self {
        VerifyCheck {
            check: check.into(),
            statement: statement.into(),
            measured,
            bound,
            pass: measured <= bound,
        }
    }

    fn at_least(check: impl Into<String>, statement: impl Into<String>, measured: f64, bound: f64) -> Self {
        VerifyCheck {
            check: check.into(),
            statement: statement.into(),
            measured,
            bound,
            pass: measured >= bound,
        }
    }

    fn exactly(check: impl Into<String>, statement: impl Into<String>, measured: f64, bound: f64) -> Self {
        VerifyCheck {
            check: check.into(),
            statement: statement.into(),
            measured,
            bound,
            pass: measured == bound,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub selector: String,
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json_lines(&self) -> String {
        self.checks
            .iter()
            .map(|c| serde_json::to_string(c).expect("check serializes"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

pub const SELECTORS: &[&str] = &[
    "cardinality",
    "class-stats",
    "parity-counts",
    "orthonormal",
    "coefficient-formula",
    "independent-count",
    "bias-fourier",
    "adversary-ceiling",
    "reduction",
    "breaker-claims",
    "post-processing",
    "hoeffding",
    "statistical-distance",
    "determinism",
];

/// Runs the named suite. `"all"` runs every suite in order.
pub fn verify_lemmas(selector: &str, scale: &VerifyScale) -> Result<VerifyReport> {
    let checks = match selector {
        "cardinality" => cardinality_checks(scale),
        "class-stats" => class_stats_checks(scale)?,
        "parity-counts" => parity_count_checks(scale)?,
        "orthonormal" => orthonormal_checks()?,
        "coefficient-formula" => coefficient_formula_checks(scale)?,
        "independent-count" => independent_count_checks(scale)?,
        "bias-fourier" => bias_fourier_checks(scale)?,
        "adversary-ceiling" => adversary_ceiling_checks(scale)?,
        "reduction" => reduction_checks(scale)?,
        "breaker-claims" => breaker_claims_checks(scale)?,
        "post-processing" => post_processing_checks(scale)?,
        "hoeffding" => hoeffding_checks(scale)?,
        "statistical-distance" => statistical_distance_checks(scale)?,
        "determinism" => determinism_checks()?,
        "all" => {
            let mut all = Vec::new();
            for s in SELECTORS {
                all.extend(verify_lemmas(s, scale)?.checks);
            }
            all
        }
        other => {
            return Err(Error::Config(format!(
                "unknown selector {other:?}; expected one of {SELECTORS:?} or \"all\""
            )))
        }
    };
    Ok(VerifyReport { selector: selector.to_string(), checks })
}

fn cardinality_checks(scale: &VerifyScale) -> Vec<VerifyCheck> {
    let max_n = scale.n.unwrap_or(12);
    let ps: Vec<u32> = scale.p.map(|p| vec![p]).unwrap_or_else(|| vec![3, 5]);
    let mut checks = Vec::new();
    for &p in &ps {
        for n in 2..=max_n {
            let Ok(domain) = Domain::punctured_zp(n, p) else { continue };
            let counted = domain.count_by_enumeration();
            checks.push(VerifyCheck::exactly(
                format!("cardinality-p{p}-n{n}"),
                format!("enumerated size of the punctured Z_{p}^{n} space equals {p}^{n} - {p}"),
                counted as f64,
                domain.cardinality() as f64,
            ));
        }
    }
    checks
}

fn class_stats_checks(scale: &VerifyScale) -> Result<Vec<VerifyCheck>> {
    let grid: Vec<(u32, usize)> = match (scale.p, scale.n) {
        (Some(p), Some(n)) => vec![(p, n)],
        _ => vec![(3, 2), (3, 3), (3, 4), (5, 2), (5, 3)],
    };
    let mut checks = Vec::new();
    for (p, n) in grid {
        let s = class_stats_boollinear(n, p, DEFAULT_DOMAIN_CAP)?;
        let quantities = [
            ("domain-size", s.domain_size_counted, s.domain_size_counted, s.domain_size_formula, format!("{p}^{n} - {p}")),
            ("class-size", s.class_size_counted, s.class_size_counted, s.class_size_formula, format!("{p}^{}", n - 1)),
            (
                "positive-size",
                s.positive_size_counted_min,
                s.positive_size_counted_max,
                s.positive_size_formula,
                format!("{p}^{} - 1", n - 1),
            ),
            (
                "pairwise-agreement",
                s.pairwise_agreement_counted_min,
                s.pairwise_agreement_counted_max,
                s.pairwise_agreement_formula,
                format!("({p}^2-2*{p}+2)*{p}^{} - {p}", n as i64 - 2),
            ),
            (
                "per-point-positive",
                s.per_point_positive_counted_min,
                s.per_point_positive_counted_max,
                s.per_point_positive_formula,
                format!("{p}^{}", n as i64 - 2),
            ),
        ];
        for (what, lo, hi, formula, formula_text) in quantities {
            checks.push(VerifyCheck {
                check: format!("class-stats-p{p}-n{n}-{what}"),
                statement: format!(
                    "brute-force {what} of the normalized booleanized linear class equals {formula_text}"
                ),
                measured: hi as f64,
                bound: formula as f64,
                pass: lo == formula && hi == formula,
            });
        }
    }
    Ok(checks)
}

fn parity_count_checks(scale: &VerifyScale) -> Result<Vec<VerifyCheck>> {
    let max_n = scale.n.unwrap_or(12);
    let mut checks = Vec::new();
    for n in 2..=max_n {
        let c = neg_parity_point_counts(n)?;
        checks.push(VerifyCheck {
            check: format!("parity-point-count-n{n}"),
            statement: format!(
                "every nonzero x satisfies s.x=0 for exactly 2^{} secrets (2^{} - 1 nonzero ones)",
                n - 1,
                n - 1
            ),
            measured: c.with_zero_counted_max as f64,
            bound: c.with_zero_formula as f64,
            pass: c.with_zero_counted_min == c.with_zero_formula
                && c.with_zero_counted_max == c.with_zero_formula,
        });
    }
    Ok(checks)
}

fn boollinear_pm_tables(n: usize, p: u32) -> Result<Vec<TruthTable>> {
    PredicateClass::NormalizedBoolLinear { n, p }
        .iter()
        .map(|f| TruthTable::pm_one_of(&f, DEFAULT_DOMAIN_CAP))
        .collect()
}

fn orthonormal_checks() -> Result<Vec<VerifyCheck>> {
    let mut checks = Vec::new();
    for (p, n) in [(3u32, 2usize), (3, 3), (5, 2)] {
        let tables = boollinear_pm_tables(n, p)?;
        let stats = CorrelatedClassStats::bool_linear(n, p)?;
        let basis = orthonormalize_correlated(&tables, &stats)?;
        let mut max_dev = 0.0f64;
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let ip = inner_product(&basis[i], &basis[j])?;
                let target = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((ip - target).abs());
            }
        }
        checks.push(VerifyCheck::at_most(
            format!("orthonormal-p{p}-n{n}"),
            "rescaled uniformly-correlated family is orthonormal: max |<f~i,f~j> - delta_ij|",
            max_dev,
            ORTHO_TOL,
        ));
    }
    Ok(checks)
}

fn random_pm_table(domain: Domain, rng: &mut TrialRng) -> TruthTable {
    TruthTable::from_values(
        domain,
        (0..domain.cardinality())
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect(),
    )
    .expect("length matches")
}

fn parity_pm_table(n: usize, s: u64) -> TruthTable {
    TruthTable::from_values(
        Domain::FullCube { n },
        (0..1u64 << n)
            .map(|x| if (x & s).count_ones() & 1 == 0 { 1.0 } else { -1.0 })
            .collect(),
    )
    .expect("length matches")
}

fn mixture_pm_table(n: usize, parities: &[(u64, f64)]) -> TruthTable {
    TruthTable::from_values(
        Domain::FullCube { n },
        (0..1u64 << n)
            .map(|x| {
                let acc: f64 = parities
                    .iter()
                    .map(|&(s, c)| if (x & s).count_ones() & 1 == 0 { c } else { -c })
                    .sum();
                if acc >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect(),
    )
    .expect("length matches")
}

fn coefficient_formula_checks(scale: &VerifyScale) -> Result<Vec<VerifyCheck>> {
    let mut checks = Vec::new();

    // Count formula against the fast transform, every nonzero secret.
    let n = scale.n.unwrap_or(10);
    let tables = scale.trials.unwrap_or(100);
    let cube = Domain::full_cube(n)?;
    let mut rng = TrialRng::seed_from_u64(scale.seed ^ 0xc0ef);
    let mut max_gap = 0.0f64;
    for _ in 0..tables {
        let g = random_pm_table(cube, &mut rng);
        let spectrum = wht(&g)?;
        for s in 1..cube.cardinality() {
            let counts = ParityCoefficientCounts::from_table(&g, &BitVector::from_index(n, s))?;
            let gap = (parity_coefficient_from_counts(&counts) - spectrum.at(s)).abs();
            max_gap = max_gap.max(gap);
        }
    }
    checks.push(VerifyCheck::at_most(
        format!("coefficient-counts-vs-transform-n{n}"),
        format!("closed-form coefficient from positive counts matches the transform over {tables} random tables"),
        max_gap,
        1e-12,
    ));

    // Fast transform against the quadratic one.
    for m in [4usize, 8, 12] {
        let domain = Domain::full_cube(m)?;
        let g = random_pm_table(domain, &mut rng);
        let fast = wht(&g)?;
        let slow = naive_spectrum(&g)?;
        let max_gap = fast
            .coefficients()
            .iter()
            .zip(slow.coefficients())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        checks.push(VerifyCheck::at_most(
            format!("fast-vs-naive-transform-n{m}"),
            "butterfly transform agrees with direct inner products",
            max_gap,
            1e-12,
        ));
        checks.push(VerifyCheck::at_most(
            format!("parseval-n{m}"),
            "sum of squared coefficients equals the mean square of the table",
            fast.parseval_gap(&g),
            1e-9,
        ));
    }
    Ok(checks)
}

fn adversarial_query_battery(n: usize, count: usize, rng: &mut TrialRng) -> Vec<TruthTable> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        match k % 2 {
            0 => {
                let s = rng.gen_range(1..1u64 << n);
                out.push(parity_pm_table(n, s));
            }
            _ => {
                let terms = 2 + k % 4;
                let parities: Vec<(u64, f64)> = (0..terms)
                    .map(|_| {
                        (rng.gen_range(1..1u64 << n), if rng.gen::<bool>() { 1.0 } else { -1.0 })
                    })
                    .collect();
                out.push(mixture_pm_table(n, &parities));
            }
        }
    }
    out
}

fn independent_count_checks(scale: &VerifyScale) -> Result<Vec<VerifyCheck>> {
    let n = scale.n.unwrap_or(16);
    let xi = scale.xi.unwrap_or_else(|| 2f64.powi(-4));
    let random_queries = scale.trials.unwrap_or(1000);
    let adversarial_queries = 100usize;
    let cube = Domain::full_cube(n)?;

    let mut seeds_rng = TrialRng::seed_from_u64(scale.seed ^ 0x1dc0);
    let query_seeds: Vec<u64> = (0..random_queries).map(|_| seeds_rng.gen()).collect();
    let adversarial =
        adversarial_query_battery(n, adversarial_queries, &mut seeds_rng);

    let random_max = query_seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = TrialRng::seed_from_u64(seed);
            let g = random_pm_table(cube, &mut rng);
            count_dependent_negparity(&g, xi).map(|out| out.count)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a.max(b)))?;
    let adversarial_max = adversarial
        .par_iter()
        .map(|g| count_dependent_negparity(g, xi).map(|out| out.count))
        .try_reduce(|| 0u64, |a, b| Ok(a.max(b)))?;

    let max_count = random_max.max(adversarial_max) as f64;
    let slack_bound = 1.0 / (xi - 6.0 / (1u64 << n) as f64).powi(2);
    Ok(vec![
        VerifyCheck::at_most(
            format!("dependent-count-stated-n{n}"),
            format!(
                "max dependent-secret count over {random_queries} random and {adversarial_queries} adversarial queries stays within 2^(n/2+2)"
            ),
            max_count,
            (1u64 << (n / 2 + 2)) as f64,
        ),
        VerifyCheck::at_most(
            format!("dependent-count-parseval-n{n}"),
            "the same max count stays within the norm-counting ceiling 1/(xi - 6/2^n)^2",
            max_count,
            slack_bound,
        ),
    ])
}

fn bias_fourier_checks(scale: &VerifyScale) -> Result<Vec<VerifyCheck>> {
    let n = scale.n.unwrap_or(4);
    let p = scale.p.unwrap_or(3);
    let domain = Domain::punctured_zp(n, p)?;
    let xi = scale.xi.unwrap_or_else(|| boollinear_canonical_xi(n, p));
    let class = PredicateClass::NormalizedBoolLinear { n, p };
    let random_queries = scale.trials.unwrap_or(20).min(200);

    let mut rng = TrialRng::seed_from_u64(scale.seed ^ 0xb1a5);
    let mut queries: Vec<TruthTable> = (0..random_queries)
        .map(|_| random_pm_table(domain, &mut rng))
        .collect();
    // Indicators of member positive sets are the most biased queries.
    for idx in 0..class.len().min(8) {
        queries.push(TruthTable::pm_one_of(&class.member(idx), DEFAULT_DOMAIN_CAP)?);
    }

    let mut max_count = 0u64;
    let mut bound = 0.0f64;
    for g in &queries {
        let out = count_dependent_boollinear(g, xi)?;
        max_count = max_count.max(out.count);
        bound = out.bound;
    }
    Ok(vec![VerifyCheck::at_most(
        format!("dependent-boollinear-p{p}-n{n}"),
        format!(
            "max dependent-predicate count over {} queries at xi={xi:.6} stays within p^(2n/3+2)",
            queries.len()
        ),
        max_count as f64,
        bound,
    )])
}

fn negparity_ceiling(n: usize) -> f64 {
    0.5 + 2f64.powf(2.0 - n as f64 / 4.0)
}

fn boollinear_ceiling(n: usize, p: u32) -> f64 {
    1.0 / p as f64 + (p as f64).powf(-(n as f64) / 13.0)
}

fn adversary_ceiling_checks(scale: &VerifyScale) -> Result<Vec<VerifyCheck>> {
    let mut checks = Vec::new();

    // Query batteries against the negative-parity pruner.
    let n = scale.n.unwrap_or(16);
    let q = (n as u64).saturating_sub(1).max(1);
    let xi = scale.xi.unwrap_or_else(|| 2f64.powi(-4));
    let budget = QueryBudget { max_queries: q, min_tolerance: xi };
    let sessions = scale.trials.unwrap_or(6);
    let mut max_prob = 0.0f64;
    let mut min_entries = u64::MAX;
    for session in 0..sessions {
        let mut rng = TrialRng::seed_from_u64(scale.seed ^ (0xce11 + session));
        let class = PredicateClass::AllNegParity { n, include_zero: false };
        let mut state = AdversaryState::new(class, budget)?;
        let battery = adversarial_query_battery(n, q as usize, &mut rng);
        for g in &battery {
            adversary_answer(&mut state, g, xi)?;
        }
        min_entries = min_entries.min(state.transcript().len() as u64);
        max_prob = max_prob.max(crate::oracles::optimal_success(&state)?.probability);
    }
    checks.push(VerifyCheck::at_most(
        format!("negparity-ceiling-n{n}"),
        format!(
            "best per-point success after {q} budget-respecting queries stays within 1/2 + 2^-(n/4-2)"
        ),
        max_prob,
        negparity_ceiling(n),
    ));
    checks.push(VerifyCheck::at_least(
        format!("negparity-removals-logged-n{n}"),
        "each session logged a transcript entry per answered query",
        min_entries as f64,
        q as f64,
    ));

    // The booleanized-linear pruner.
    let (bn, bp) = (scale.n.unwrap_or(8).min(8), scale.p.unwrap_or(3));
    let bq = 8u64;
    let bxi = boollinear_canonical_xi(bn, bp);
    let class = PredicateClass::NormalizedBoolLinear { n: bn, p: bp };
    let domain = class.member_domain()?;
    let tables = ClassTables::build(&class, domain, DEFAULT_DOMAIN_CAP)?;
    let mut max_prob = 0.0f64;
    let mut min_entries = u64::MAX;
    for session in 0..3u64 {
        let mut rng = TrialRng::seed_from_u64(scale.seed ^ (0xb0071 + session));
        let mut state = AdversaryState::with_tables(
            class.clone(),
            QueryBudget { max_queries: bq, min_tolerance: bxi },
            Some(tables.clone()),
        )?;
        for k in 0..bq {
            let g = if k % 2 == 0 {
                random_pm_table(domain, &mut rng)
            } else {
                let member = class.member(rng.gen_range(0..class.len()));
                TruthTable::pm_one_of(&member, DEFAULT_DOMAIN_CAP)?
            };
            adversary_answer(&mut state, &g, bxi)?;
        }
        min_entries = min_entries.min(state.transcript().len() as u64);
        max_prob = max_prob.max(crate::oracles::optimal_success(&state)?.probability);
    }
    checks.push(VerifyCheck::at_most(
        format!("boollinear-ceiling-p{bp}-n{bn}"),
        format!(
            "best per-point success after {bq} queries at xi={bxi:.6} stays within 1/p + p^-(n/13)"
        ),
        max_prob,
        boollinear_ceiling(bn, bp),
    ));
    checks.push(VerifyCheck::at_least(
        format!("boollinear-removals-logged-p{bp}-n{bn}"),
        "each session logged a transcript entry per answered query",
        min_entries as f64,
        bq as f64,
    ));
    Ok(checks)
}

fn reduction_checks(scale: &VerifyScale) -> Result<Vec<VerifyCheck>> {
    let mut checks = Vec::new();

    // Simulated SQL answers stay within tolerance of the exact SQL value.
    let n = 8usize;
    let (q, delta, xi) = (10u64, 0.05f64, 0.1f64);
    let m = crate::stats::required_samples(
        crate::stats::SamplePlan::ReductionCubeMean,
        xi,
        delta / (2.0 * q as f64),
    )?;
    let trials = scale.trials.unwrap_or(10_000);
    let f = Predicate::dictator(n, 1)?;
    let domain = f.domain();
    let g = LabeledQuery::from_fn(domain, DEFAULT_DOMAIN_CAP, |x, y| {
        let sign = if x.as_bits().expect("cube").bit(3) == 1 { -1.0 } else { 1.0 };
        (2.0 * y as f64 - 1.0) * sign
    })?;
    let mut exact_rng = TrialRng::seed_from_u64(0);
    let exact = honest_sql_answer(&f, &g, xi, OracleMode::Exact, &mut exact_rng)?.true_mean;
    let rho = f.density(DEFAULT_DOMAIN_CAP)?;
    let valid = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = TrialRng::seed_from_u64(scale.seed ^ (0x51d0 + trial));
            let oracle_rng = TrialRng::seed_from_u64(rng.gen());
            let mut sqs = HonestSqs::new(f.clone(), OracleMode::WorstNoise, oracle_rng);
            let y = simulate_sql_from_sqs(&g, xi, &mut sqs, rho, m, &mut rng)?;
            Ok::<u64, Error>(u64::from((y - exact).abs() <= xi))
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    checks.push(VerifyCheck::at_least(
        format!("sql-simulation-validity-n{n}"),
        format!(
            "simulated SQL answers (batch {m}, worst-noise SQS at xi/3) are valid at rate >= 1 - delta/q - 0.01"
        ),
        valid as f64 / trials as f64,
        1.0 - delta / q as f64 - 0.01,
    ));

    // End-to-end reduction on the dictator class.
    let n = scale.n.unwrap_or(16);
    let trials = scale.trials.unwrap_or(1000);
    for eps_prime in [0.1f64, 0.2] {
        let params = ReductionParams::derive(eps_prime, 0.5, n as u64, 0.25)?;
        let hits = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng =
                    TrialRng::seed_from_u64(scale.seed ^ (0xe2e0 + trial * 7 + (eps_prime * 100.0) as u64));
                let index = rng.gen_range(0..n);
                let f = Predicate::dictator(n, index)?;
                let oracle_rng = TrialRng::seed_from_u64(rng.gen());
                let mut sqs = HonestSqs::new(f.clone(), OracleMode::Exact, oracle_rng);
                let learner = DictatorLearner { n };
                let out = learn_then_sample(&learner, &mut sqs, f.domain(), &params, &mut rng)?;
                Ok::<u64, Error>(u64::from(f.eval(&out.output).unwrap_or(false)))
            })
            .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
        checks.push(VerifyCheck::at_least(
            format!("learn-then-sample-n{n}-eps{eps_prime}"),
            format!(
                "positive-output rate of the reduction over {trials} trials reaches 1 - eps' - 0.03"
            ),
            hits as f64 / trials as f64,
            1.0 - eps_prime - 0.03,
        ));
    }
    Ok(checks)
}

fn breaker_claims_checks(scale: &VerifyScale) -> Result<Vec<VerifyCheck>> {
    let mut checks = Vec::new();
    let n = scale.n.unwrap_or(16);
    let trials = scale.trials.unwrap_or(10_000);
    let (eps, q, xi) = (0.5f64, 5u64, scale.xi.unwrap_or(0.1));
    let scheme = toy_scheme(n, 0x705c_4e4e ^ scale.seed)?;

    // Shared query: the exact mean is enumerated once and reused.
    let query = PairQuery::new(|m: u64, s: u64| {
        if ((m ^ s.rotate_left(3)).count_ones() & 1) == 0 {
            1.0
        } else {
            -1.0
        }
    });
    let sigma = query.sigma(&scheme);
    let xi0 = xi * eps / (10.0 * q as f64);

    let outcomes: Vec<(f64, f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = TrialRng::seed_from_u64(scale.seed ^ (0x7b1c + trial));
            let mut breaker = Breaker::new(&scheme, eps, q)?;
            let answer = breaker.answer_query(&query, xi, &mut rng)?;
            let rec = breaker.records()[0];
            Ok((rec.sample_mean, answer, rec.typical.expect("sigma enumerable")))
        })
        .collect::<Result<Vec<_>>>()?;

    let typical: Vec<&(f64, f64, bool)> = outcomes.iter().filter(|o| o.2).collect();
    checks.push(VerifyCheck::at_least(
        "breaker-typicality-rate",
        format!(
            "fraction of sample batches whose mean lands within xi0={xi0:.1e} of the exact mean, over {trials} sessions"
        ),
        typical.len() as f64 / outcomes.len() as f64,
        1.0 - eps / (5.0 * q as f64) - 0.01,
    ));

    let safe = typical
        .iter()
        .filter(|(_, answer, _)| (answer - sigma).abs() <= xi)
        .count();
    checks.push(VerifyCheck::exactly(
        "breaker-typical-safe",
        "every randomized answer from a typical batch stays within xi of the exact mean",
        safe as f64,
        typical.len() as f64,
    ));

    let mean_lo = typical.iter().map(|o| o.0).fold(f64::INFINITY, f64::min);
    let mean_hi = typical.iter().map(|o| o.0).fold(f64::NEG_INFINITY, f64::max);
    let max_pair_sd = crate::crypto::answer_sd_bound(mean_lo, mean_hi, xi)?;
    checks.push(VerifyCheck::at_most(
        "breaker-answer-sd-pairwise",
        "statistical distance between any two typical answer distributions is at most eps/(5q)",
        max_pair_sd,
        eps / (5.0 * q as f64),
    ));
    checks.push(VerifyCheck::at_most(
        "breaker-answer-sd-chain",
        "summed over q queries the distance bound stays within eps/5",
        q as f64 * max_pair_sd,
        eps / 5.0,
    ));

    // History collisions need M q / 2^n below 1 to say anything.
    let (ceps, cq, cxi) = (0.8f64, 2u64, 0.8f64);
    let collision_trials = scale.trials.unwrap_or(10_000);
    let m = Breaker::new(&scheme, ceps, cq)?.samples_per_query(cxi);
    let seen = (0..collision_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = TrialRng::seed_from_u64(scale.seed ^ (0xc011 + trial));
            let mut sampler = CheatingKeyedSampler { scheme, queries: cq, xi: cxi };
            let report = crate::crypto::breaker_run(&mut sampler, &scheme, ceps, cq, &mut rng)?;
            Ok::<u64, Error>(u64::from(report.outcome == BreakOutcome::Seen))
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    let rate = seen as f64 / collision_trials as f64;
    let bound = m as f64 * cq as f64 / (1u64 << n) as f64;
    let slack = 3.0 * (bound * (1.0 - bound).max(0.0) / collision_trials as f64).sqrt();
    checks.push(VerifyCheck::at_most(
        "breaker-history-collision",
        format!(
            "an oracle-independent valid pair lands in the {m}-per-query history at rate <= Mq/2^n + 3 sigma"
        ),
        rate,
        bound + slack,
    ));
    Ok(checks)
}

fn post_processing_checks(scale: &VerifyScale) -> Result<Vec<VerifyCheck>> {
    let mut checks = Vec::new();

    // Every coprime ideal sample of (N=15, a=7) recovers r=4 at register 256.
    let inst = ShorInstance::new(15, 7, 8)?;
    let ideal = inst.hidden_set();
    let coprime_ok = [1u64, 3]
        .iter()
        .all(|&t| continued_fraction_order(ideal[t as usize], 256, 15, 7) == Some(4));
    checks.push(VerifyCheck::exactly(
        "continued-fraction-coprime",
        "continued fractions recover the order 4 from every coprime ideal sample of (15, 7)",
        coprime_ok as u64 as f64,
        1.0,
    ));

    // Random moduli: lcm-combining the per-sample divisors recovers r.
    let mut rng = TrialRng::seed_from_u64(scale.seed ^ 0x0f0f);
    let mut recovered = 0u64;
    let wanted = 50u64;
    let mut tested = 0u64;
    while tested < wanted {
        let modulus = rng.gen_range(10u64..=1000);
        let a = rng.gen_range(2u64..modulus);
        if num_integer::Integer::gcd(&a, &modulus) != 1 {
            continue;
        }
        tested += 1;
        let width = ShorInstance::recovery_width(modulus);
        let inst = ShorInstance::new(modulus, a, width)?;
        if recover_order_by_lcm(&inst.hidden_set(), inst.register_size(), modulus, a)
            == Some(inst.order)
        {
            recovered += 1;
        }
    }
    checks.push(VerifyCheck::exactly(
        "continued-fraction-lcm",
        "lcm-combining per-sample divisors recovers the order for 50 random (N, a) pairs",
        recovered as f64,
        wanted as f64,
    ));

    // Hidden-XOR elimination end to end.
    let n = scale.n.unwrap_or(12);
    let trials = scale.trials.unwrap_or(1000);
    let mut rng = TrialRng::seed_from_u64(scale.seed ^ 0x5130);
    let mut standard_hits = 0u64;
    let mut guess_hits = 0u64;
    for _ in 0..trials {
        let secret = BitVector::from_index(n, rng.gen_range(1..1u64 << n));
        let inst = SimonInstance::new(n, secret)?;
        let run = simon_end_to_end(
            &inst,
            SimonSampleSource::HiddenSetUniform,
            2 * n as u64,
            &mut rng,
        )?;
        standard_hits += u64::from(run.success);
        let run = simon_end_to_end(
            &inst,
            SimonSampleSource::DomainUniform,
            2 * n as u64,
            &mut rng,
        )?;
        guess_hits += u64::from(run.success);
    }
    checks.push(VerifyCheck::at_least(
        format!("simon-standard-model-n{n}"),
        format!("elimination on 2n uniform hidden-set samples recovers the secret, {trials} trials"),
        standard_hits as f64 / trials as f64,
        0.99,
    ));
    checks.push(VerifyCheck::at_most(
        format!("simon-random-guess-n{n}"),
        "elimination on uniform domain samples almost never recovers the secret",
        guess_hits as f64 / trials as f64,
        0.01,
    ));
    Ok(checks)
}

fn hoeffding_checks(scale: &VerifyScale) -> Result<Vec<VerifyCheck>> {
    let trials = scale.trials.unwrap_or(10_000);
    let mut rng = TrialRng::seed_from_u64(scale.seed ^ 0x0eff);
    let mut checks = Vec::new();
    for n in [25u64, 100, 400] {
        for eps in [0.05f64, 0.1, 0.2] {
            let bound = hoeffding_tail(n, eps)?;
            let threshold = ((0.5 - eps) * n as f64).floor() as u64;
            let mut tail_hits = 0u64;
            for _ in 0..trials {
                let successes: u64 = (0..n).map(|_| u64::from(rng.gen::<bool>())).sum();
                if successes <= threshold {
                    tail_hits += 1;
                }
            }
            checks.push(VerifyCheck::at_most(
                format!("hoeffding-n{n}-eps{eps}"),
                format!("empirical lower tail of {trials} fair-coin means is dominated by exp(-2 n eps^2)"),
                tail_hits as f64 / trials as f64,
                bound,
            ));
        }
    }
    Ok(checks)
}

fn statistical_distance_checks(scale: &VerifyScale) -> Result<Vec<VerifyCheck>> {
    let mut rng = TrialRng::seed_from_u64(scale.seed ^ 0x5d5d);
    let mut checks = Vec::new();

    // Closed-form uniform-interval distance vs numeric integration.
    let mut max_gap = 0.0f64;
    let mut max_over_displacement = f64::NEG_INFINITY;
    for _ in 0..20 {
        let hw = 0.05 + rng.gen::<f64>() * 0.5;
        let c1 = rng.gen::<f64>() * 2.0 - 1.0;
        let c2 = c1 + (rng.gen::<f64>() * 3.0 - 1.5) * hw;
        let d1 = UniformInterval::new(c1, hw)?;
        let d2 = UniformInterval::new(c2, hw)?;
        let exact = uniform_interval_sd(&d1, &d2)?;
        let numeric = uniform_interval_sd_by_integration(&d1, &d2, 20_000_000);
        max_gap = max_gap.max((exact - numeric).abs());
        max_over_displacement =
            max_over_displacement.max(exact - (c1 - c2).abs() / (2.0 * hw));
    }
    checks.push(VerifyCheck::at_most(
        "uniform-interval-sd-integration",
        "closed-form distance between equal-length uniform intervals matches midpoint integration",
        max_gap,
        1e-6,
    ));
    checks.push(VerifyCheck::at_most(
        "uniform-interval-sd-displacement",
        "the distance never exceeds displacement over length",
        max_over_displacement,
        1e-15,
    ));

    let random_pmf = |rng: &mut TrialRng, k: usize| -> Result<Pmf> {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        Pmf::new((0..k as u64).zip(raw.iter().map(|p| p / total)))
    };

    // Events can never distinguish distributions beyond their distance.
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let k = rng.gen_range(2usize..16);
        let a = random_pmf(&mut rng, k)?;
        let b = random_pmf(&mut rng, k)?;
        let sd = statistical_distance(&a, &b);
        let mask: u64 = rng.gen();
        let event = |x: u64| mask >> (x % 64) & 1 == 1;
        worst = worst.max((a.event_prob(event) - b.event_prob(event)).abs() - sd);
    }
    checks.push(VerifyCheck::at_most(
        "sd-bounds-event-gaps",
        "per-event probability gaps stay within the statistical distance, 100 random instances",
        worst,
        1e-12,
    ));

    // Sub-additivity over products.
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let a1 = random_pmf(&mut rng, 5)?;
        let a2 = random_pmf(&mut rng, 5)?;
        let b1 = random_pmf(&mut rng, 4)?;
        let b2 = random_pmf(&mut rng, 4)?;
        let lhs = statistical_distance(&a1.product(&b1)?, &a2.product(&b2)?);
        let rhs = statistical_distance(&a1, &a2) + statistical_distance(&b1, &b2);
        worst = worst.max(lhs - rhs);
    }
    checks.push(VerifyCheck::at_most(
        "sd-subadditive-products",
        "distance of product distributions is at most the sum of the factors' distances, 100 instances",
        worst,
        1e-12,
    ));
    Ok(checks)
}

fn determinism_checks() -> Result<Vec<VerifyCheck>> {
    use crate::harness::{
        BudgetSpec, ClassSpec, ExperimentConfig, OracleSpec, SamplerSpec,
    };
    let config = ExperimentConfig {
        name: "determinism-probe".into(),
        predicate: None,
        class: Some(ClassSpec::AllNegParity { n: 10, include_zero: false }),
        oracle: OracleSpec::Adversarial,
        sampler: SamplerSpec::BitFixing { size_bound: 8 },
        budget: BudgetSpec { max_queries: 9, min_tolerance: 1.0 / 16.0 },
        trials: 64,
        seed: 1234,
        output: "determinism".into(),
        mc_slack: None,
    };
    let first = crate::harness::run_experiment(&config)?.csv()?;
    let second = crate::harness::run_experiment(&config)?.csv()?;
    Ok(vec![VerifyCheck::exactly(
        "experiment-determinism",
        "two runs of the same config and seed produce byte-identical CSV",
        (first == second) as u64 as f64,
        1.0,
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_selector_is_a_usage_error() {
        let err = verify_lemmas("no-such-suite", &VerifyScale::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn small_selectors_pass() {
        for selector in ["class-stats", "orthonormal", "statistical-distance", "hoeffding"] {
            let report = verify_lemmas(selector, &VerifyScale::default()).unwrap();
            assert!(report.all_pass(), "{selector}: {:#?}", report.checks);
        }
    }

    #[test]
    fn scaled_down_counting_passes() {
        let scale = VerifyScale { n: Some(10), trials: Some(50), ..Default::default() };
        let report = verify_lemmas("independent-count", &scale).unwrap();
        assert!(report.all_pass(), "{:#?}", report.checks);
    }

    #[test]
    fn bias_fourier_default_passes() {
        let report = verify_lemmas("bias-fourier", &VerifyScale::default()).unwrap();
        assert!(report.all_pass(), "{:#?}", report.checks);
    }

    #[test]
    fn json_lines_shape() {
        let report = verify_lemmas("class-stats", &VerifyScale::default()).unwrap();
        let lines = report.to_json_lines();
        assert_eq!(lines.lines().count(), report.checks.len());
        for line in lines.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("check").is_some());
            assert!(v.get("measured").is_some());
        }
    }
}
