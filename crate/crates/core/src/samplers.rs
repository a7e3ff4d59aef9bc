//! Sampling algorithms measured against the oracles: the uniform baseline,
//! the bit-fixing prefix walk, and the two-phase learn-then-sample reduction.

use rand::Rng;

use crate::domain::{BitVector, Domain, Point, DEFAULT_DOMAIN_CAP};
use crate::fourier::TruthTable;
use crate::learners::SqLearner;
use crate::oracles::{LabeledQuery, SqlOracle, SqsOracle};
use crate::stats::{required_samples, SamplePlan};
use crate::{Error, Result, TrialRng};

/// One sampling run: the produced point, its adjudication (once a predicate
/// is fixed), and the query/tolerance audit trail.
#[derive(Clone, Debug)]
pub struct SamplerOutcome {
    pub output: Point,
    pub is_positive: Option<bool>,
    pub queries_used: u64,
    pub tolerances_used: Vec<f64>,
    pub notes: Vec<String>,
}

impl SamplerOutcome {
    fn new(output: Point) -> Self {
        SamplerOutcome {
            output,
            is_positive: None,
            queries_used: 0,
            tolerances_used: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// Uniform draw from the domain.
pub fn random_guess(domain: Domain, rng: &mut TrialRng) -> Point {
    domain.element_at(rng.gen_range(0..domain.cardinality()))
}

/// Walks the bits of `x` left to right. The query at depth `k` is the ±1
/// indicator of "x extends the committed prefix with a 1", asked at
/// tolerance `1/(2 size_bound)`; a reply at or above `1/size_bound - 1`
/// (the midpoint between "empty" and "at least one point of a set of at most
/// `size_bound`") commits the bit to 1.
///
/// If the oracle refuses a query because its budget ran out, the remaining
/// bits are filled uniformly at random and the outcome is flagged.
pub fn bit_fixing_sampler(
    oracle: &mut dyn SqsOracle,
    domain: Domain,
    size_bound: u64,
    rng: &mut TrialRng,
) -> Result<SamplerOutcome> {
    let n = match domain {
        Domain::FullCube { n } | Domain::PuncturedCube { n } => n,
        other => {
            return Err(Error::InvalidArgument(format!(
                "bit fixing walks binary domains, not {other}"
            )))
        }
    };
    if size_bound == 0 {
        return Err(Error::InvalidArgument("size bound must be positive".into()));
    }
    let xi = 1.0 / (2.0 * size_bound as f64);
    let threshold = 1.0 / size_bound as f64 - 1.0;
    let query_domain = oracle.query_domain();

    let mut prefix = BitVector::zero(n);
    let mut outcome = SamplerOutcome::new(Point::Bits(prefix));
    let mut any_one = false;
    for k in 0..n {
        let candidate = prefix.with_bit(k, 1);
        let g = TruthTable::from_fn(query_domain, DEFAULT_DOMAIN_CAP, |x| {
            let v = x.as_bits().expect("binary domain");
            let matches = (0..=k).all(|i| v.bit(i) == candidate.bit(i));
            if matches {
                1.0
            } else {
                -1.0
            }
        })?;
        match oracle.answer(&g, xi) {
            Ok(ans) => {
                outcome.queries_used += 1;
                outcome.tolerances_used.push(xi);
                if ans.value >= threshold {
                    prefix = candidate;
                    any_one = true;
                }
            }
            Err(Error::BudgetExhausted { .. }) => {
                for i in k..n {
                    let bit = u8::from(rng.gen::<bool>());
                    prefix = prefix.with_bit(i, bit);
                    any_one |= bit == 1;
                }
                outcome.notes.push("budget_exhausted".into());
                break;
            }
            Err(other) => return Err(other),
        }
    }
    if !any_one && matches!(domain, Domain::PuncturedCube { .. }) {
        return Err(Error::Protocol(
            "every prefix query reported an empty branch on a punctured domain".into(),
        ));
    }
    outcome.output = Point::Bits(prefix);
    Ok(outcome)
}

/// Parameters of the learn-then-sample reduction, all derived from the
/// target failure `eps_prime`, the density auxiliary input `rho`, the
/// learner's query count and its per-query tolerance:
/// accuracy `eps = rho eps'/(4 ln(4/eps'))`, confidence `delta = eps'/4`,
/// per-query batch `M = ceil(9 ln(2q/delta) / (2 xi^2))` and
/// `ceil(ln(1/delta)/rho)` second-phase rounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionParams {
    pub eps_prime: f64,
    pub rho: f64,
    pub accuracy: f64,
    pub confidence: f64,
    pub learner_queries: u64,
    pub query_tolerance: f64,
    pub samples_per_query: u64,
    pub second_phase_rounds: u64,
}

impl ReductionParams {
    pub fn derive(
        eps_prime: f64,
        rho: f64,
        learner_queries: u64,
        query_tolerance: f64,
    ) -> Result<Self> {
        if !(eps_prime > 0.0 && eps_prime < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "target failure {eps_prime} out of (0,1)"
            )));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidArgument(format!("density {rho} out of (0,1]")));
        }
        if learner_queries == 0 || !(query_tolerance > 0.0 && query_tolerance <= 1.0) {
            return Err(Error::InvalidArgument(
                "learner query count and tolerance must be positive".into(),
            ));
        }
        let confidence = eps_prime / 4.0;
        let accuracy = rho * eps_prime / (4.0 * (4.0 / eps_prime).ln());
        if !(accuracy < rho) {
            return Err(Error::InvalidArgument(format!(
                "derived accuracy {accuracy} is not below the density {rho}"
            )));
        }
        let samples_per_query = required_samples(
            SamplePlan::ReductionCubeMean,
            query_tolerance,
            confidence / (2.0 * learner_queries as f64),
        )?;
        let second_phase_rounds = ((1.0 / confidence).ln() / rho).ceil() as u64;
        Ok(ReductionParams {
            eps_prime,
            rho,
            accuracy,
            confidence,
            learner_queries,
            query_tolerance,
            samples_per_query,
            second_phase_rounds,
        })
    }
}

/// Simulates one SQL answer through an SQS session: estimate the label-0 mean
/// from `m_samples` uniform domain draws, ask the SQS oracle for both label
/// restrictions at a third of the tolerance, and recombine through the
/// pointwise identity `g(x, f(x)) = g(x,0) + [g(x,1) - g(x,0)] f(x)`.
pub fn simulate_sql_from_sqs(
    g: &LabeledQuery,
    xi: f64,
    sqs: &mut dyn SqsOracle,
    rho: f64,
    m_samples: u64,
    rng: &mut TrialRng,
) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!("density {rho} out of (0,1]")));
    }
    if m_samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let domain = g.domain();
    let mut sum = 0.0;
    for _ in 0..m_samples {
        let rank = rng.gen_range(0..domain.cardinality());
        sum += g.per_label(0).value_at_rank(rank);
    }
    let s = sum / m_samples as f64;
    let y0 = sqs.answer(g.per_label(0), xi / 3.0)?.value;
    let y1 = sqs.answer(g.per_label(1), xi / 3.0)?.value;
    Ok(s + (y1 - y0) * rho)
}

/// SQL oracle realized through an SQS session plus the density auxiliary
/// input. Every labeled query costs one batch of uniform draws and two SQS
/// queries.
pub struct SqlFromSqs<'a> {
    pub sqs: &'a mut dyn SqsOracle,
    pub rho: f64,
    pub m_samples: u64,
    pub rng: &'a mut TrialRng,
}

impl SqlOracle for SqlFromSqs<'_> {
    fn answer(&mut self, g: &LabeledQuery, xi: f64) -> Result<f64> {
        simulate_sql_from_sqs(g, xi, self.sqs, self.rho, self.m_samples, self.rng)
    }
}

/// Two-phase reduction: run the learner against the simulated SQL oracle,
/// then rejection-sample the hypothesis over the domain; on exhaustion fall
/// back to one uniform draw.
pub fn learn_then_sample(
    learner: &dyn SqLearner,
    sqs: &mut dyn SqsOracle,
    domain: Domain,
    params: &ReductionParams,
    rng: &mut TrialRng,
) -> Result<SamplerOutcome> {
    let queries_before = sqs.queries_used();
    let mut notes = Vec::new();

    let hypothesis = {
        let mut sql = SqlFromSqs {
            sqs,
            rho: params.rho,
            m_samples: params.samples_per_query,
            rng,
        };
        match learner.learn(&mut sql, params.accuracy, params.confidence) {
            Ok(h) => Some(h),
            Err(e) => {
                notes.push(format!("learner_failed: {e}"));
                None
            }
        }
    };

    let mut output = None;
    if let Some(h) = &hypothesis {
        notes.push(format!("hypothesis: {}", h.describe()));
        for _ in 0..params.second_phase_rounds {
            let x = random_guess(domain, rng);
            if h.eval(&x) {
                output = Some(x);
                break;
            }
        }
    }
    let output = match output {
        Some(x) => x,
        None => {
            notes.push("fallback_uniform".into());
            random_guess(domain, rng)
        }
    };

    let mut outcome = SamplerOutcome::new(output);
    outcome.queries_used = sqs.queries_used() - queries_before;
    outcome
        .tolerances_used
        .extend(std::iter::repeat_n(params.query_tolerance / 3.0, outcome.queries_used as usize));
    outcome.notes = notes;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Predicate;
    use crate::learners::{DictatorLearner, Hypothesis};
    use crate::oracles::{HonestSqs, OracleMode};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> TrialRng {
        TrialRng::seed_from_u64(seed)
    }

    fn cube(n: usize) -> Domain {
        Domain::full_cube(n).unwrap()
    }

    #[test]
    fn random_guess_frequencies() {
        let domain = Domain::punctured_cube(3).unwrap();
        let mut counts = [0u64; 7];
        let mut r = rng(3);
        let trials = 100_000;
        for _ in 0..trials {
            let p = random_guess(domain, &mut r);
            counts[domain.rank(&p).unwrap() as usize] += 1;
        }
        let expect = trials as f64 / 7.0;
        let sigma = (expect * (1.0 - 1.0 / 7.0)).sqrt();
        for c in counts {
            assert!((c as f64 - expect).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn random_guess_singleton() {
        let domain = Domain::punctured_cube(1).unwrap();
        assert_eq!(domain.cardinality(), 1);
        assert_eq!(random_guess(domain, &mut rng(0)), domain.element_at(0));
    }

    #[test]
    fn random_guess_success_rate_matches_density() {
        let f = Predicate::neg_parity(BitVector::parse_bits("101001011100").unwrap());
        let domain = f.domain();
        let density = f.density(DEFAULT_DOMAIN_CAP).unwrap();
        let mut r = rng(8);
        let trials = 100_000;
        let mut hits = 0u64;
        for _ in 0..trials {
            if f.eval(&random_guess(domain, &mut r)).unwrap() {
                hits += 1;
            }
        }
        let rate = hits as f64 / trials as f64;
        assert!((rate - density).abs() < 0.01, "rate {rate} density {density}");
    }

    #[test]
    fn bit_fixing_singleton_is_exact() {
        let target = Point::Bits(BitVector::parse_bits("1011").unwrap());
        let f = Predicate::set_membership(cube(4), std::slice::from_ref(&target)).unwrap();
        let mut oracle = HonestSqs::new(f, OracleMode::Exact, rng(0));
        let out = bit_fixing_sampler(&mut oracle, cube(4), 1, &mut rng(1)).unwrap();
        assert_eq!(out.output, target);
        assert_eq!(out.queries_used, 4);
        assert_eq!(out.tolerances_used, vec![0.5; 4]);
    }

    #[test]
    fn bit_fixing_random_sets_always_hit() {
        for n in [12usize, 16] {
            for seed in 0..25 {
                let mut r = rng(1000 + seed);
                let domain = cube(n);
                let members: Vec<Point> = (0..8)
                    .map(|_| domain.element_at(r.gen_range(0..domain.cardinality())))
                    .collect();
                let f = Predicate::set_membership(domain, &members).unwrap();
                let mut oracle = HonestSqs::new(f.clone(), OracleMode::Exact, rng(seed));
                let out = bit_fixing_sampler(&mut oracle, domain, 8, &mut r).unwrap();
                assert_eq!(out.queries_used, n as u64);
                assert!(f.eval(&out.output).unwrap(), "missed at n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn reduction_params_examples() {
        let p = ReductionParams::derive(0.1, 0.5, 16, 0.25).unwrap();
        assert_eq!(p.confidence, 0.025);
        assert!((p.accuracy - 0.5 * 0.1 / (4.0 * 40f64.ln())).abs() < 1e-15);
        assert_eq!(p.second_phase_rounds, 8);
        assert!(p.accuracy < p.rho);
    }

    #[test]
    fn sql_simulation_label_independent_query() {
        let f = Predicate::dictator(8, 1).unwrap();
        let domain = f.domain();
        let g = LabeledQuery::from_fn(domain, DEFAULT_DOMAIN_CAP, |x, _| {
            if x.as_bits().unwrap().bit(4) == 1 {
                1.0
            } else {
                -1.0
            }
        })
        .unwrap();
        let mut oracle = HonestSqs::new(f, OracleMode::Exact, rng(0));
        let mut r = rng(5);
        let y = simulate_sql_from_sqs(&g, 0.3, &mut oracle, 0.5, 64, &mut r).unwrap();
        // The two SQS answers cancel exactly; y is the plain sample mean.
        assert!(y.abs() <= 1.0);
        let mut r2 = rng(5);
        let mut sum = 0.0;
        for _ in 0..64 {
            sum += g.per_label(0).value_at_rank(r2.gen_range(0..domain.cardinality()));
        }
        assert_eq!(y, sum / 64.0);
    }

    #[test]
    fn sql_simulation_dictator_label_query() {
        // g(x,y) = 2y-1 with f a dictator of density 1/2: the label-0 table
        // is constantly -1, so the batch mean is exact and y = 0.
        let f = Predicate::dictator(8, 1).unwrap();
        let domain = f.domain();
        let g = LabeledQuery::from_fn(domain, DEFAULT_DOMAIN_CAP, |_, y| 2.0 * y as f64 - 1.0)
            .unwrap();
        let mut oracle = HonestSqs::new(f, OracleMode::Exact, rng(0));
        let y = simulate_sql_from_sqs(&g, 0.3, &mut oracle, 0.5, 32, &mut rng(6)).unwrap();
        assert_eq!(y, 0.0);
    }

    #[test]
    fn learn_then_sample_with_broken_learner_falls_back_to_density() {
        struct BrokenLearner;
        impl SqLearner for BrokenLearner {
            fn learn(
                &self,
                _oracle: &mut dyn SqlOracle,
                _accuracy: f64,
                _confidence: f64,
            ) -> crate::Result<Hypothesis> {
                Ok(Hypothesis::Constant { value: false })
            }
        }
        let f = Predicate::dictator(10, 4).unwrap();
        let domain = f.domain();
        let params = ReductionParams::derive(0.1, 0.5, 10, 0.25).unwrap();
        let mut hits = 0u64;
        let trials = 2_000;
        for seed in 0..trials {
            let mut oracle = HonestSqs::new(f.clone(), OracleMode::Exact, rng(seed));
            let mut r = rng(900_000 + seed);
            let out =
                learn_then_sample(&BrokenLearner, &mut oracle, domain, &params, &mut r).unwrap();
            assert!(out.notes.iter().any(|n| n == "fallback_uniform"));
            if f.eval(&out.output).unwrap() {
                hits += 1;
            }
        }
        let rate = hits as f64 / trials as f64;
        assert!((rate - 0.5).abs() < 0.04, "fallback success rate {rate}");
    }

    #[test]
    fn learn_then_sample_constant_true_target() {
        struct ConstantTrueLearner;
        impl SqLearner for ConstantTrueLearner {
            fn learn(
                &self,
                _oracle: &mut dyn SqlOracle,
                _accuracy: f64,
                _confidence: f64,
            ) -> crate::Result<Hypothesis> {
                Ok(Hypothesis::Constant { value: true })
            }
        }
        let f = Predicate::constant(cube(8), true);
        let params = ReductionParams::derive(0.2, 1.0, 4, 0.25).unwrap();
        for seed in 0..100 {
            let mut oracle = HonestSqs::new(f.clone(), OracleMode::Exact, rng(seed));
            let out = learn_then_sample(
                &ConstantTrueLearner,
                &mut oracle,
                cube(8),
                &params,
                &mut rng(seed + 10_000),
            )
            .unwrap();
            assert!(f.eval(&out.output).unwrap());
        }
    }

    #[test]
    fn learn_then_sample_dictator_end_to_end_smoke() {
        let params = ReductionParams::derive(0.1, 0.5, 12, 0.25).unwrap();
        let learner = DictatorLearner { n: 12 };
        let mut hits = 0;
        for seed in 0..50 {
            let f = Predicate::dictator(12, (seed % 12) as usize).unwrap();
            let mut oracle = HonestSqs::new(f.clone(), OracleMode::Exact, rng(seed));
            let out = learn_then_sample(
                &learner,
                &mut oracle,
                cube(12),
                &params,
                &mut rng(77_000 + seed),
            )
            .unwrap();
            if f.eval(&out.output).unwrap() {
                hits += 1;
            }
        }
        assert!(hits >= 47, "only {hits}/50 positive");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        // g(x, f(x)) = g(x,0) + [g(x,1)-g(x,0)] f(x), pointwise and exactly.
        #[test]
        fn label_decomposition_identity(seed in 0u64..1000, idx in 0usize..6) {
            let n = 6;
            let f = Predicate::dictator(n, idx).unwrap();
            let domain = cube(n);
            let mut r = rng(seed);
            let g = LabeledQuery::from_fn(domain, DEFAULT_DOMAIN_CAP, |_, _| {
                if r.gen::<bool>() { 1.0 } else { -1.0 }
            }).unwrap();
            for (rank, x) in domain.iter().enumerate() {
                let label = f.eval(&x).unwrap() as u8;
                let direct = g.per_label(label).value_at_rank(rank as u64);
                let g0 = g.per_label(0).value_at_rank(rank as u64);
                let g1 = g.per_label(1).value_at_rank(rank as u64);
                let recomposed = g0 + (g1 - g0) * (label as f64);
                prop_assert_eq!(direct, recomposed);
            }
        }
    }
}
