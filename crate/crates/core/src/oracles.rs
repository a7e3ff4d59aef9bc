//! Statistical-query oracle contracts: honest sessions over a fixed
//! predicate, and the adversarial session that never commits until the
//! queries stop.
//!
//! The adversarial oracle answers every query with the reference-domain mean
//! and discards candidate predicates whose positive-set mean strays further
//! than the tolerance. Whatever survives is, by construction, consistent
//! with every answer given, so committing to a random survivor at the end is
//! always legal.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::bitset;
use crate::domain::{Domain, Point, Predicate, PredicateClass, DEFAULT_DOMAIN_CAP};
use crate::fourier::{NegParityMeans, TruthTable};
use crate::{Error, Result, TrialRng};

/// One oracle reply, with the exact mean kept for audit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleAnswer {
    pub value: f64,
    pub true_mean: f64,
    pub tolerance_used: f64,
}

/// Per-session limits. Violations are rejected, never clamped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QueryBudget {
    pub max_queries: u64,
    pub min_tolerance: f64,
}

impl QueryBudget {
    pub fn unlimited() -> Self {
        QueryBudget { max_queries: u64::MAX, min_tolerance: 0.0 }
    }
}

/// How an honest oracle produces its reply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleMode {
    /// The exact expectation.
    Exact,
    /// Average of `m` uniform draws from the positive set (SQS) or the
    /// domain (SQL). Tolerance compliance is probabilistic, governed by the
    /// Hoeffding tail.
    Sampled { m: u64 },
    /// Exact expectation plus uniform noise filling the whole tolerance.
    WorstNoise,
}

/// An oracle answering ±1 queries about a hidden positive set.
pub trait SqsOracle {
    fn answer(&mut self, g: &TruthTable, xi: f64) -> Result<OracleAnswer>;
    fn queries_used(&self) -> u64;
    /// Domain the session expects query tables over.
    fn query_domain(&self) -> Domain;
}

fn check_budget(budget: &QueryBudget, used: u64, xi: f64) -> Result<()> {
    if used >= budget.max_queries {
        return Err(Error::BudgetExhausted { used, max: budget.max_queries });
    }
    if xi < budget.min_tolerance {
        return Err(Error::ToleranceTooSmall { xi, min: budget.min_tolerance });
    }
    Ok(())
}

fn positive_ranks_in(f: &Predicate, target: Domain, cap: u64) -> Result<Vec<u64>> {
    if f.domain() == target {
        return f.positive_ranks(cap);
    }
    f.positive_set(cap)?
        .iter()
        .map(|x| target.rank(x).ok_or_else(|| Error::OutOfDomain(x.to_string())))
        .collect()
}

/// One honest SQS reply for predicate `f`: the mean of `g` over the positive
/// set, possibly sampled or noised per `mode`.
pub fn honest_sqs_answer(
    f: &Predicate,
    g: &TruthTable,
    xi: f64,
    mode: OracleMode,
    rng: &mut TrialRng,
) -> Result<OracleAnswer> {
    let ranks = positive_ranks_in(f, g.domain(), DEFAULT_DOMAIN_CAP)?;
    answer_over_ranks(&ranks, g, xi, mode, rng)
}

fn answer_over_ranks(
    ranks: &[u64],
    g: &TruthTable,
    xi: f64,
    mode: OracleMode,
    rng: &mut TrialRng,
) -> Result<OracleAnswer> {
    if ranks.is_empty() {
        return Err(Error::EmptyPositiveSet);
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance {xi} out of (0,1]")));
    }
    let true_mean = g.mean_over_ranks(ranks)?;
    let value = match mode {
        OracleMode::Exact => true_mean,
        OracleMode::Sampled { m } => {
            if m == 0 {
                return Err(Error::InvalidArgument("sample count must be positive".into()));
            }
            let mut sum = 0.0;
            for _ in 0..m {
                sum += g.value_at_rank(ranks[rng.gen_range(0..ranks.len())]);
            }
            sum / m as f64
        }
        OracleMode::WorstNoise => true_mean + xi * (2.0 * rng.gen::<f64>() - 1.0),
    };
    Ok(OracleAnswer { value, true_mean, tolerance_used: xi })
}

/// Honest SQS session: caches the positive set, enforces a budget.
pub struct HonestSqs {
    predicate: Predicate,
    mode: OracleMode,
    budget: QueryBudget,
    rng: TrialRng,
    queries_used: u64,
    ranks: Option<(Domain, Vec<u64>)>,
}

impl HonestSqs {
    pub fn new(predicate: Predicate, mode: OracleMode, rng: TrialRng) -> Self {
        HonestSqs {
            predicate,
            mode,
            budget: QueryBudget::unlimited(),
            rng,
            queries_used: 0,
            ranks: None,
        }
    }

    pub fn with_budget(mut self, budget: QueryBudget) -> Self {
        self.budget = budget;
        self
    }

    pub fn predicate(&self) -> &Predicate {
        &self.predicate
    }
}

impl SqsOracle for HonestSqs {
    fn answer(&mut self, g: &TruthTable, xi: f64) -> Result<OracleAnswer> {
        check_budget(&self.budget, self.queries_used, xi)?;
        if self.ranks.as_ref().map(|(d, _)| *d) != Some(g.domain()) {
            let ranks = positive_ranks_in(&self.predicate, g.domain(), DEFAULT_DOMAIN_CAP)?;
            self.ranks = Some((g.domain(), ranks));
        }
        let ranks = &self.ranks.as_ref().expect("just cached").1;
        let out = answer_over_ranks(ranks, g, xi, self.mode, &mut self.rng)?;
        self.queries_used += 1;
        Ok(out)
    }

    fn queries_used(&self) -> u64 {
        self.queries_used
    }

    fn query_domain(&self) -> Domain {
        self.predicate.domain()
    }
}

/// A labeled query `g(x, y)`, materialized as one table per label.
#[derive(Clone, Debug)]
pub struct LabeledQuery {
    g0: TruthTable,
    g1: TruthTable,
}

impl LabeledQuery {
    pub fn from_fn(
        domain: Domain,
        cap: u64,
        mut f: impl FnMut(&Point, u8) -> f64,
    ) -> Result<Self> {
        Ok(LabeledQuery {
            g0: TruthTable::from_fn(domain, cap, |x| f(x, 0))?,
            g1: TruthTable::from_fn(domain, cap, |x| f(x, 1))?,
        })
    }

    pub fn domain(&self) -> Domain {
        self.g0.domain()
    }

    pub fn per_label(&self, label: u8) -> &TruthTable {
        if label == 0 {
            &self.g0
        } else {
            &self.g1
        }
    }
}

/// An oracle answering labeled queries `E_x[g(x, f(x))]` over the whole
/// domain of the hidden predicate.
pub trait SqlOracle {
    fn answer(&mut self, g: &LabeledQuery, xi: f64) -> Result<f64>;
}

/// One honest SQL reply.
pub fn honest_sql_answer(
    f: &Predicate,
    g: &LabeledQuery,
    xi: f64,
    mode: OracleMode,
    rng: &mut TrialRng,
) -> Result<OracleAnswer> {
    let domain = f.domain();
    if g.domain() != domain {
        return Err(Error::DomainMismatch(format!(
            "query over {} but predicate lives on {domain}",
            g.domain()
        )));
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance {xi} out of (0,1]")));
    }
    domain.check_cap(DEFAULT_DOMAIN_CAP)?;
    let mut sum = 0.0;
    for (rank, x) in domain.iter().enumerate() {
        let label = f.eval(&x)? as u8;
        sum += g.per_label(label).value_at_rank(rank as u64);
    }
    let true_mean = sum / domain.cardinality() as f64;
    let value = match mode {
        OracleMode::Exact => true_mean,
        OracleMode::Sampled { m } => {
            if m == 0 {
                return Err(Error::InvalidArgument("sample count must be positive".into()));
            }
            let mut acc = 0.0;
            for _ in 0..m {
                let rank = rng.gen_range(0..domain.cardinality());
                let x = domain.element_at(rank);
                let label = f.eval(&x)? as u8;
                acc += g.per_label(label).value_at_rank(rank);
            }
            acc / m as f64
        }
        OracleMode::WorstNoise => true_mean + xi * (2.0 * rng.gen::<f64>() - 1.0),
    };
    Ok(OracleAnswer { value, true_mean, tolerance_used: xi })
}

/// Honest SQL session.
pub struct HonestSql {
    predicate: Predicate,
    mode: OracleMode,
    budget: QueryBudget,
    rng: TrialRng,
    queries_used: u64,
}

impl HonestSql {
    pub fn new(predicate: Predicate, mode: OracleMode, rng: TrialRng) -> Self {
        HonestSql { predicate, mode, budget: QueryBudget::unlimited(), rng, queries_used: 0 }
    }

    pub fn with_budget(mut self, budget: QueryBudget) -> Self {
        self.budget = budget;
        self
    }
}

impl SqlOracle for HonestSql {
    fn answer(&mut self, g: &LabeledQuery, xi: f64) -> Result<f64> {
        check_budget(&self.budget, self.queries_used, xi)?;
        let out = honest_sql_answer(&self.predicate, g, xi, self.mode, &mut self.rng)?;
        self.queries_used += 1;
        Ok(out.value)
    }
}

/// Whether `f`'s positive set is a `xi`-independent subset for `g`: its mean
/// of `g` is within `xi` of the mean over the reference domain.
pub fn xi_independent(f: &Predicate, g: &TruthTable, xi: f64, reference: Domain) -> Result<bool> {
    if g.domain() != reference {
        return Err(Error::DomainMismatch(format!(
            "query materialized over {} but reference is {reference}",
            g.domain()
        )));
    }
    let ranks = positive_ranks_in(f, reference, DEFAULT_DOMAIN_CAP)?;
    if ranks.is_empty() {
        return Err(Error::EmptyPositiveSet);
    }
    let positive_mean = g.mean_over_ranks(&ranks)?;
    Ok((positive_mean - g.mean()).abs() <= xi)
}

/// Precomputed positive-set masks for the candidate class, shared across
/// trials. Only mask-backed classes need them; negative parities go through
/// the spectral path.
pub struct ClassTables {
    masks: Vec<Vec<u64>>,
    positive_sizes: Vec<u64>,
}

impl ClassTables {
    pub fn build(class: &PredicateClass, reference: Domain, cap: u64) -> Result<Arc<Self>> {
        reference.check_cap(cap)?;
        let mut masks = Vec::with_capacity(class.len() as usize);
        let mut positive_sizes = Vec::with_capacity(class.len() as usize);
        for f in class.iter() {
            let ranks = positive_ranks_in(&f, reference, cap)?;
            let mut mask = bitset::with_capacity(reference.cardinality());
            for &r in &ranks {
                bitset::set(&mut mask, r);
            }
            positive_sizes.push(ranks.len() as u64);
            masks.push(mask);
        }
        Ok(Arc::new(ClassTables { masks, positive_sizes }))
    }
}

/// One answered adversarial query. `punctured_mean` is recorded when the
/// sampling domain is a punctured version of the reference domain, so both
/// means stay on the record.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TranscriptEntry {
    pub query_index: u64,
    pub xi: f64,
    pub answer: f64,
    pub removed: u64,
    pub remaining: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub punctured_mean: Option<f64>,
}

/// The pruning oracle's whole state: surviving candidates, transcript, and
/// the stored queries that make post-hoc consistency replay possible.
pub struct AdversaryState {
    class: PredicateClass,
    reference: Domain,
    budget: QueryBudget,
    survivors: Vec<u64>,
    transcript: Vec<TranscriptEntry>,
    queries: Vec<TruthTable>,
    committed: Option<u64>,
    tables: Option<Arc<ClassTables>>,
    queries_used: u64,
}

fn adversary_reference(class: &PredicateClass) -> Result<Domain> {
    match class {
        // Negative parities are adjudicated against the full cube even
        // though samples live in the punctured cube.
        PredicateClass::AllNegParity { n, .. } => Domain::full_cube(*n),
        _ => class.member_domain(),
    }
}

impl AdversaryState {
    pub fn new(class: PredicateClass, budget: QueryBudget) -> Result<Self> {
        let reference = adversary_reference(&class)?;
        let tables = match &class {
            PredicateClass::AllNegParity { .. } => None,
            other => Some(ClassTables::build(other, reference, DEFAULT_DOMAIN_CAP)?),
        };
        Self::with_tables(class, budget, tables)
    }

    /// Builds a session around shared class tables (or none for spectral
    /// classes). Lets parallel trials reuse one precomputation.
    pub fn with_tables(
        class: PredicateClass,
        budget: QueryBudget,
        tables: Option<Arc<ClassTables>>,
    ) -> Result<Self> {
        let reference = adversary_reference(&class)?;
        if class.is_empty() {
            return Err(Error::InvalidArgument("empty candidate class".into()));
        }
        if let Some(t) = &tables {
            if t.masks.len() as u64 != class.len() {
                return Err(Error::InvalidArgument(
                    "class tables do not match the class size".into(),
                ));
            }
        }
        Ok(AdversaryState {
            survivors: (0..class.len()).collect(),
            transcript: Vec::new(),
            queries: Vec::new(),
            committed: None,
            queries_used: 0,
            tables,
            class,
            reference,
            budget,
        })
    }

    pub fn class(&self) -> &PredicateClass {
        &self.class
    }

    pub fn reference_domain(&self) -> Domain {
        self.reference
    }

    pub fn survivors_len(&self) -> u64 {
        self.survivors.len() as u64
    }

    pub fn initial_len(&self) -> u64 {
        self.class.len()
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// JSON-lines rendering of the transcript.
    pub fn transcript_json_lines(&self) -> String {
        self.transcript
            .iter()
            .map(|e| serde_json::to_string(e).expect("entry serializes"))
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn committed_predicate(&self) -> Option<Predicate> {
        self.committed.map(|i| self.class.member(i))
    }

    /// Positive-set mean of `g` for every surviving candidate, in survivor
    /// order.
    fn survivor_means(&self, g: &TruthTable) -> Result<Vec<f64>> {
        match (&self.class, &self.tables) {
            (PredicateClass::AllNegParity { include_zero, .. }, _) => {
                let means = NegParityMeans::new(g)?;
                let offset = u64::from(!include_zero);
                Ok(self
                    .survivors
                    .iter()
                    .map(|&i| means.positive_mean(i + offset))
                    .collect())
            }
            (_, Some(tables)) => {
                let mut gmask = bitset::with_capacity(g.values().len() as u64);
                for (rank, &v) in g.values().iter().enumerate() {
                    if v > 0.0 {
                        bitset::set(&mut gmask, rank as u64);
                    }
                }
                Ok(self
                    .survivors
                    .iter()
                    .map(|&i| {
                        let size = tables.positive_sizes[i as usize] as f64;
                        let b = bitset::and_count(&tables.masks[i as usize], &gmask) as f64;
                        (2.0 * b - size) / size
                    })
                    .collect())
            }
            _ => unreachable!("mask-backed class without tables"),
        }
    }

    /// Verifies that the committed predicate is within tolerance of every
    /// logged answer, by re-enumerating its positive set per stored query.
    pub fn replay_check(&self) -> Result<()> {
        let f = self
            .committed_predicate()
            .ok_or_else(|| Error::Protocol("no committed predicate to replay".into()))?;
        let ranks = positive_ranks_in(&f, self.reference, DEFAULT_DOMAIN_CAP)?;
        for (entry, g) in self.transcript.iter().zip(&self.queries) {
            let mean = g.mean_over_ranks(&ranks)?;
            if (mean - entry.answer).abs() > entry.xi {
                return Err(Error::Protocol(format!(
                    "query {} answer {} is {} away from committed mean {mean}",
                    entry.query_index,
                    entry.answer,
                    (mean - entry.answer).abs()
                )));
            }
        }
        Ok(())
    }
}

/// Answers with the reference-domain mean and prunes every candidate that is
/// not `xi`-independent from the query.
pub fn adversary_answer(
    state: &mut AdversaryState,
    g: &TruthTable,
    xi: f64,
) -> Result<OracleAnswer> {
    if state.committed.is_some() {
        return Err(Error::Protocol("session already committed".into()));
    }
    check_budget(&state.budget, state.queries_used, xi)?;
    if g.domain() != state.reference {
        return Err(Error::DomainMismatch(format!(
            "query over {} but the session reference is {}",
            g.domain(),
            state.reference
        )));
    }
    if !g.is_pm_one() {
        return Err(Error::InvalidArgument("query table must be ±1-valued".into()));
    }

    let answer = g.mean();
    let means = state.survivor_means(g)?;
    let keep: Vec<u64> = state
        .survivors
        .iter()
        .zip(&means)
        .filter(|(_, &m)| (m - answer).abs() <= xi)
        .map(|(&i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(Error::AdversaryExhausted);
    }
    let removed = state.survivors.len() as u64 - keep.len() as u64;
    state.survivors = keep;
    state.queries_used += 1;

    let punctured_mean = match &state.class {
        PredicateClass::AllNegParity { n, .. } => {
            let full = (1u64 << n) as f64;
            Some((full * answer - g.value_at_rank(0)) / (full - 1.0))
        }
        _ => None,
    };
    state.transcript.push(TranscriptEntry {
        query_index: state.queries_used - 1,
        xi,
        answer,
        removed,
        remaining: state.survivors.len() as u64,
        punctured_mean,
    });
    state.queries.push(g.clone());
    Ok(OracleAnswer { value: answer, true_mean: answer, tolerance_used: xi })
}

/// Commits to a uniformly random surviving candidate.
pub fn adversary_commit(state: &mut AdversaryState, rng: &mut TrialRng) -> Result<Predicate> {
    if state.survivors.is_empty() {
        return Err(Error::AdversaryExhausted);
    }
    let pick = state.survivors[rng.gen_range(0..state.survivors.len())];
    state.committed = Some(pick);
    Ok(state.class.member(pick))
}

/// The exact success ceiling of any output strategy against the current
/// candidate set: the best single point's positive fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalSuccess {
    pub best: Point,
    pub probability: f64,
    pub positive_survivors: u64,
}

pub fn optimal_success(state: &AdversaryState) -> Result<OptimalSuccess> {
    let survivors = state.survivors.len() as u64;
    match (&state.class, &state.tables) {
        (PredicateClass::AllNegParity { n, include_zero }, _) => {
            let full = 1u64 << n;
            // One transform of the survivor indicator gives, for every x,
            // the number of surviving secrets with s·x = 0.
            let mut indicator = vec![0.0f64; full as usize];
            let offset = u64::from(!include_zero);
            for &i in &state.survivors {
                indicator[(i + offset) as usize] = 1.0;
            }
            let table =
                TruthTable::from_values(Domain::full_cube(*n)?, indicator)?;
            let spectrum = crate::fourier::wht(&table)?;
            let mut best_x = 1u64;
            let mut best_count = 0u64;
            for x in 1..full {
                let signed_sum = spectrum.at(x) * full as f64;
                let count = ((survivors as f64 + signed_sum) / 2.0).round() as u64;
                if count > best_count {
                    best_count = count;
                    best_x = x;
                }
            }
            Ok(OptimalSuccess {
                best: Point::Bits(crate::domain::BitVector::from_index(*n, best_x)),
                probability: best_count as f64 / survivors as f64,
                positive_survivors: best_count,
            })
        }
        (_, Some(tables)) => {
            let domain = state.class.member_domain()?;
            let mut counts = vec![0u64; domain.cardinality() as usize];
            for &i in &state.survivors {
                bitset::for_each_set(&tables.masks[i as usize], |r| counts[r as usize] += 1);
            }
            let (best_rank, &best_count) = counts
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                .expect("nonempty domain");
            Ok(OptimalSuccess {
                best: domain.element_at(best_rank as u64),
                probability: best_count as f64 / survivors as f64,
                positive_survivors: best_count,
            })
        }
        _ => unreachable!("mask-backed class without tables"),
    }
}

impl SqsOracle for AdversaryState {
    fn answer(&mut self, g: &TruthTable, xi: f64) -> Result<OracleAnswer> {
        adversary_answer(self, g, xi)
    }

    fn queries_used(&self) -> u64 {
        self.queries_used
    }

    fn query_domain(&self) -> Domain {
        self.reference
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{dot_gf2, BitVector};
    use rand::SeedableRng;

    fn bits(s: &str) -> BitVector {
        BitVector::parse_bits(s).unwrap()
    }

    fn cube(n: usize) -> Domain {
        Domain::full_cube(n).unwrap()
    }

    fn rng(seed: u64) -> TrialRng {
        TrialRng::seed_from_u64(seed)
    }

    fn parity_table(n: usize, s: u64) -> TruthTable {
        TruthTable::from_values(
            cube(n),
            (0..1u64 << n)
                .map(|x| if (x & s).count_ones() & 1 == 0 { 1.0 } else { -1.0 })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn honest_sqs_examples() {
        let f = Predicate::neg_parity(bits("101"));
        let domain = f.domain();
        let one = TruthTable::constant(domain, 1.0);
        let mut r = rng(0);
        let ans = honest_sqs_answer(&f, &one, 0.1, OracleMode::Exact, &mut r).unwrap();
        assert_eq!(ans.value, 1.0);

        // Leftmost bit of the positive set {010, 101, 111}.
        let g = TruthTable::from_fn(domain, DEFAULT_DOMAIN_CAP, |x| {
            if x.as_bits().unwrap().bit(0) == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .unwrap();
        let ans = honest_sqs_answer(&f, &g, 0.1, OracleMode::Exact, &mut r).unwrap();
        assert!((ans.value - (-1.0 / 3.0)).abs() < 1e-15);

        // Singleton positive set answers exactly.
        let target = Point::Bits(bits("1011"));
        let singleton =
            Predicate::set_membership(cube(4), std::slice::from_ref(&target)).unwrap();
        let g = TruthTable::from_fn(cube(4), DEFAULT_DOMAIN_CAP, |x| {
            if x.as_bits().unwrap().bit(3) == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .unwrap();
        let ans = honest_sqs_answer(&singleton, &g, 0.1, OracleMode::Exact, &mut r).unwrap();
        assert_eq!(ans.value, -1.0);
    }

    #[test]
    fn honest_sqs_rejects_empty_positive_set() {
        let f = Predicate::constant(cube(4), false);
        let g = TruthTable::constant(cube(4), 1.0);
        assert!(matches!(
            honest_sqs_answer(&f, &g, 0.1, OracleMode::Exact, &mut rng(0)),
            Err(Error::EmptyPositiveSet)
        ));
    }

    #[test]
    fn honest_sql_examples() {
        let mut r = rng(1);
        let t = Predicate::constant(cube(5), true);
        let g = LabeledQuery::from_fn(cube(5), DEFAULT_DOMAIN_CAP, |_, y| {
            2.0 * y as f64 - 1.0
        })
        .unwrap();
        let ans = honest_sql_answer(&t, &g, 0.1, OracleMode::Exact, &mut r).unwrap();
        assert_eq!(ans.value, 1.0);

        // Label-independent balanced query.
        let f = Predicate::dictator(5, 2).unwrap();
        let g = LabeledQuery::from_fn(cube(5), DEFAULT_DOMAIN_CAP, |x, _| {
            if x.as_bits().unwrap().bit(1) == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .unwrap();
        let ans = honest_sql_answer(&f, &g, 0.1, OracleMode::Exact, &mut r).unwrap();
        assert_eq!(ans.value, 0.0);

        // Label equals the measured bit, so the product is -1 pointwise.
        let f = Predicate::dictator(5, 1).unwrap();
        let g = LabeledQuery::from_fn(cube(5), DEFAULT_DOMAIN_CAP, |x, y| {
            let sign = if x.as_bits().unwrap().bit(1) == 1 { -1.0 } else { 1.0 };
            (2.0 * y as f64 - 1.0) * sign
        })
        .unwrap();
        let ans = honest_sql_answer(&f, &g, 0.1, OracleMode::Exact, &mut r).unwrap();
        assert_eq!(ans.value, -1.0);
    }

    #[test]
    fn xi_independent_examples() {
        let n = 4;
        let f = Predicate::neg_parity(bits("1010"));
        let one = TruthTable::constant(cube(n), 1.0);
        assert!(xi_independent(&f, &one, 0.0, cube(n)).unwrap());

        let own = parity_table(n, f_secret(&f));
        assert!(!xi_independent(&f, &own, 0.5, cube(n)).unwrap());

        let n = 8;
        let f = Predicate::neg_parity(bits("10100101"));
        let other = parity_table(n, 0b01000010);
        assert!(xi_independent(&f, &other, 0.1, cube(n)).unwrap());
    }

    fn f_secret(f: &Predicate) -> u64 {
        match f {
            Predicate::NegParity { secret, .. } => secret.index(),
            _ => panic!("not a parity"),
        }
    }

    #[test]
    fn adversary_single_parity_removal() {
        let n = 16;
        let class = PredicateClass::AllNegParity { n, include_zero: false };
        let mut state = AdversaryState::new(class, QueryBudget::unlimited()).unwrap();
        let g = parity_table(n, 0b1100_0011_0101_1010);
        let ans = adversary_answer(&mut state, &g, 2f64.powi(-4)).unwrap();
        assert_eq!(ans.value, 0.0);
        let entry = state.transcript()[0];
        assert!(entry.removed >= 1 && entry.removed <= 1024, "{}", entry.removed);
        assert!(entry.punctured_mean.is_some());
    }

    #[test]
    fn adversary_constant_query_removes_nothing() {
        let class = PredicateClass::AllNegParity { n: 10, include_zero: false };
        let mut state = AdversaryState::new(class, QueryBudget::unlimited()).unwrap();
        let one = TruthTable::constant(cube(10), 1.0);
        let ans = adversary_answer(&mut state, &one, 0.25).unwrap();
        assert_eq!(ans.value, 1.0);
        assert_eq!(state.transcript()[0].removed, 0);
    }

    #[test]
    fn adversary_boollinear_removal_within_bound() {
        let n = 8;
        let p = 3;
        let class = PredicateClass::NormalizedBoolLinear { n, p };
        let mut state = AdversaryState::new(class, QueryBudget::unlimited()).unwrap();
        let domain = Domain::punctured_zp(n, p).unwrap();
        let mut r = rng(5);
        let g = TruthTable::from_fn(domain, DEFAULT_DOMAIN_CAP, |_| {
            if r.gen::<bool>() {
                1.0
            } else {
                -1.0
            }
        })
        .unwrap();
        let xi = crate::fourier::boollinear_canonical_xi(n, p);
        adversary_answer(&mut state, &g, xi).unwrap();
        let bound = (p as f64).powf(2.0 * n as f64 / 3.0 + 2.0);
        assert!((state.transcript()[0].removed as f64) <= bound);
    }

    #[test]
    fn budget_violations_are_hard_errors() {
        let class = PredicateClass::AllNegParity { n: 6, include_zero: false };
        let budget = QueryBudget { max_queries: 1, min_tolerance: 0.1 };
        let mut state = AdversaryState::new(class, budget).unwrap();
        let one = TruthTable::constant(cube(6), 1.0);
        assert!(matches!(
            adversary_answer(&mut state, &one, 0.05),
            Err(Error::ToleranceTooSmall { .. })
        ));
        adversary_answer(&mut state, &one, 0.25).unwrap();
        assert!(matches!(
            adversary_answer(&mut state, &one, 0.25),
            Err(Error::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn commit_is_uniform_over_untouched_class() {
        let n = 4;
        let class = PredicateClass::AllNegParity { n, include_zero: false };
        let mut counts = vec![0u64; 15];
        let mut r = rng(42);
        for _ in 0..100_000 {
            let mut state = AdversaryState::new(class.clone(), QueryBudget::unlimited()).unwrap();
            let f = adversary_commit(&mut state, &mut r).unwrap();
            counts[(f_secret(&f) - 1) as usize] += 1;
        }
        // Chi-square with 14 degrees of freedom; 36.12 is the 0.1% point.
        let expected = 100_000.0 / 15.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 36.12, "chi-square {chi2}, counts {counts:?}");
    }

    #[test]
    fn commit_after_pruning_to_one() {
        let class = PredicateClass::Custom {
            predicates: vec![
                Predicate::neg_parity(bits("01")),
                Predicate::constant(Domain::punctured_cube(2).unwrap(), true),
            ],
        };
        let mut state = AdversaryState::new(class, QueryBudget::unlimited()).unwrap();
        // Positive sets over {01,10,11}: parity 01 -> {10}; constant -> all.
        // Query +1 on {10} only: means 1 vs -1/3; reference mean -1/3.
        let g = TruthTable::from_values(
            Domain::punctured_cube(2).unwrap(),
            vec![-1.0, 1.0, -1.0],
        )
        .unwrap();
        adversary_answer(&mut state, &g, 0.2).unwrap();
        assert_eq!(state.survivors_len(), 1);
        let f = adversary_commit(&mut state, &mut rng(0)).unwrap();
        assert!(matches!(f, Predicate::SetMembership { .. }));
        state.replay_check().unwrap();
    }

    #[test]
    fn optimal_success_untouched_negparity() {
        let n = 16;
        let class = PredicateClass::AllNegParity { n, include_zero: false };
        let state = AdversaryState::new(class, QueryBudget::unlimited()).unwrap();
        let best = optimal_success(&state).unwrap();
        let expect = ((1u64 << (n - 1)) - 1) as f64 / ((1u64 << n) - 1) as f64;
        assert!((best.probability - expect).abs() < 1e-12, "{}", best.probability);
    }

    #[test]
    fn optimal_success_untouched_boollinear() {
        let class = PredicateClass::NormalizedBoolLinear { n: 3, p: 3 };
        let state = AdversaryState::new(class, QueryBudget::unlimited()).unwrap();
        let best = optimal_success(&state).unwrap();
        assert!((best.probability - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_success_single_survivor() {
        let f = Predicate::neg_parity(bits("0110"));
        let class = PredicateClass::Custom { predicates: vec![f.clone()] };
        let state = AdversaryState::new(class, QueryBudget::unlimited()).unwrap();
        let best = optimal_success(&state).unwrap();
        assert_eq!(best.probability, 1.0);
        assert!(f.eval(&best.best).unwrap());
    }

    #[test]
    fn worst_noise_is_uniform_over_the_tolerance_interval() {
        let f = Predicate::neg_parity(bits("10100101"));
        let domain = f.domain();
        let g = TruthTable::from_fn(domain, DEFAULT_DOMAIN_CAP, |x| {
            if x.as_bits().unwrap().bit(2) == 1 {
                1.0
            } else {
                -1.0
            }
        })
        .unwrap();
        let xi = 0.25;
        let mut r = rng(7);
        let sigma = honest_sqs_answer(&f, &g, xi, OracleMode::Exact, &mut r).unwrap().value;
        let n_samples = 10_000usize;
        let mut values: Vec<f64> = (0..n_samples)
            .map(|_| {
                honest_sqs_answer(&f, &g, xi, OracleMode::WorstNoise, &mut r)
                    .unwrap()
                    .value
            })
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Kolmogorov-Smirnov against the uniform CDF on [sigma-xi, sigma+xi];
        // 1.628/sqrt(n) is the 1% critical value.
        let mut ks: f64 = 0.0;
        for (i, v) in values.iter().enumerate() {
            let cdf = ((v - (sigma - xi)) / (2.0 * xi)).clamp(0.0, 1.0);
            let lo = i as f64 / n_samples as f64;
            let hi = (i + 1) as f64 / n_samples as f64;
            ks = ks.max((cdf - lo).abs()).max((cdf - hi).abs());
        }
        assert!(ks < 1.628 / (n_samples as f64).sqrt(), "KS statistic {ks}");
        assert!(values.iter().all(|v| (v - sigma).abs() <= xi));
    }

    #[test]
    fn sampled_mode_tracks_hoeffding() {
        let f = Predicate::dictator(10, 3).unwrap();
        let domain = f.domain();
        let g = TruthTable::from_fn(domain, DEFAULT_DOMAIN_CAP, |x| {
            if x.as_bits().unwrap().bit(0) == 1 {
                1.0
            } else {
                -1.0
            }
        })
        .unwrap();
        let mut r = rng(9);
        let xi = 0.2;
        let m = 500u64;
        let mut violations = 0u32;
        let trials = 2_000;
        for _ in 0..trials {
            let ans = honest_sqs_answer(&f, &g, xi, OracleMode::Sampled { m }, &mut r).unwrap();
            if (ans.value - ans.true_mean).abs() > xi {
                violations += 1;
            }
        }
        // Hoeffding for ±1 samples: 2 exp(-m xi^2 / 2) per trial.
        let bound = 2.0 * (-(m as f64) * xi * xi / 2.0).exp() * trials as f64;
        assert!((violations as f64) <= bound.mul_add(3.0, 3.0), "{violations} vs {bound}");
    }
}
