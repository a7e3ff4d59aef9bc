//! A pluggable toy signature scheme and the oracle-simulating breaker.
//!
//! The breaker answers statistical queries about the valid-pair set of a
//! signature scheme by signing batches of random messages and randomizing the
//! sample mean over an interval. The scheme here is a keyed mixer: signing is
//! deterministic, so the exact query mean over the valid-pair set is
//! computable by enumerating messages, which is what makes every claim about
//! the breaker's answers testable. No unforgeability is claimed or implied.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::stats::{required_samples, SamplePlan};
use crate::{Error, Result, TrialRng};

/// Message/signature width supported for exact-mean enumeration.
pub const MAX_SCHEME_WIDTH: usize = 24;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic signature scheme over n-bit messages and n-bit signatures.
/// The signer is a fixed-key mixer; verification recomputes and compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyScheme {
    n: usize,
    key: u64,
}

/// Builds the scheme for n-bit messages under `key`.
pub fn toy_scheme(n: usize, key: u64) -> Result<ToyScheme> {
    if !(1..=MAX_SCHEME_WIDTH).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "scheme width {n} out of range 1..={MAX_SCHEME_WIDTH}"
        )));
    }
    Ok(ToyScheme { n, key })
}

impl ToyScheme {
    pub fn generate(n: usize, rng: &mut TrialRng) -> Result<ToyScheme> {
        toy_scheme(n, rng.gen())
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn message_mask(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    pub fn sign(&self, m: u64) -> u64 {
        debug_assert!(m <= self.message_mask());
        splitmix(splitmix(self.key ^ 0x2545f4914f6cdd1d) ^ m.wrapping_mul(0x9e3779b97f4a7c15))
            & self.message_mask()
    }

    pub fn verify(&self, m: u64, s: u64) -> bool {
        m <= self.message_mask() && s <= self.message_mask() && self.sign(m) == s
    }

    /// Exact mean of `g` over the valid-pair set, by message enumeration.
    pub fn exact_query_mean(&self, g: impl Fn(u64, u64) -> f64) -> f64 {
        let mut sum = 0.0;
        for m in 0..=self.message_mask() {
            sum += g(m, self.sign(m));
        }
        sum / (self.message_mask() + 1) as f64
    }
}

/// A query over message/signature pairs with a lazily computed exact mean.
/// The mean depends only on the query and the scheme, so sessions sharing a
/// query also share the enumeration cost.
pub struct PairQuery<G> {
    eval: G,
    sigma: OnceLock<f64>,
}

impl<G: Fn(u64, u64) -> f64> PairQuery<G> {
    pub fn new(eval: G) -> Self {
        PairQuery { eval, sigma: OnceLock::new() }
    }

    #[inline]
    pub fn eval(&self, m: u64, s: u64) -> f64 {
        (self.eval)(m, s)
    }

    pub fn sigma(&self, scheme: &ToyScheme) -> f64 {
        *self.sigma.get_or_init(|| scheme.exact_query_mean(&self.eval))
    }
}

/// Upper bound on the statistical distance between two uniform answer
/// distributions of width `xi` centered at `x0` and `x1`.
pub fn answer_sd_bound(x0: f64, x1: f64, xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::InvalidArgument(format!("interval width {xi} must be positive")));
    }
    Ok(((x0 - x1).abs() / xi).min(1.0))
}

/// One answered query: the batch size, the sample mean, the randomized
/// answer, and (when the scheme width permits enumeration) the exact mean
/// with the typicality verdict `|mean - sigma| <= xi0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BreakerRecord {
    pub query_index: u64,
    pub xi: f64,
    pub xi0: f64,
    pub m_samples: u64,
    pub sample_mean: f64,
    pub answer: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub typical: Option<bool>,
}

/// Breaker session: answers queries by signing batches of random messages,
/// tracks the history set of messages it exposed to the signer.
pub struct Breaker<'a> {
    scheme: &'a ToyScheme,
    epsilon: f64,
    q: u64,
    history: Vec<u64>,
    history_distinct: u64,
    records: Vec<BreakerRecord>,
    adjudicate_sigma: bool,
}

impl<'a> Breaker<'a> {
    pub fn new(scheme: &'a ToyScheme, epsilon: f64, q: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} out of (0,1]")));
        }
        if q == 0 {
            return Err(Error::InvalidArgument("query count must be positive".into()));
        }
        Ok(Breaker {
            scheme,
            epsilon,
            q,
            history: crate::bitset::with_capacity(scheme.message_mask() + 1),
            history_distinct: 0,
            records: Vec::new(),
            adjudicate_sigma: true,
        })
    }

    /// Disables the per-query exact-mean computation (for very hot loops).
    pub fn without_sigma_adjudication(mut self) -> Self {
        self.adjudicate_sigma = false;
        self
    }

    pub fn per_query_tolerance(&self, xi: f64) -> f64 {
        xi * self.epsilon / (10.0 * self.q as f64)
    }

    pub fn samples_per_query(&self, xi: f64) -> u64 {
        let xi0 = self.per_query_tolerance(xi);
        required_samples(SamplePlan::BreakerEstimate, xi0, self.epsilon / (10.0 * self.q as f64))
            .expect("valid breaker parameters")
    }

    pub fn history_size(&self) -> u64 {
        self.history_distinct
    }

    pub fn history_contains(&self, m: u64) -> bool {
        crate::bitset::get(&self.history, m)
    }

    pub fn records(&self) -> &[BreakerRecord] {
        &self.records
    }

    pub fn transcript_json_lines(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes"))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Answers one query: draw the batch, sign it, average the query over the
    /// pairs, and return a uniform draw from the interval of width `xi`
    /// centered at the sample mean.
    pub fn answer_query<G: Fn(u64, u64) -> f64>(
        &mut self,
        g: &PairQuery<G>,
        xi: f64,
        rng: &mut TrialRng,
    ) -> Result<f64> {
        let xi0 = self.per_query_tolerance(xi);
        if !(xi > 2.0 * xi0) {
            return Err(Error::Precondition(format!(
                "tolerance {xi} must exceed twice the estimate tolerance {xi0}"
            )));
        }
        let m_samples = self.samples_per_query(xi);
        let mask = self.scheme.message_mask();
        let mut sum = 0.0f64;
        for _ in 0..m_samples {
            let m = rng.gen::<u64>() & mask;
            let s = self.scheme.sign(m);
            sum += g.eval(m, s);
            if !crate::bitset::get(&self.history, m) {
                crate::bitset::set(&mut self.history, m);
                self.history_distinct += 1;
            }
        }
        let sample_mean = sum / m_samples as f64;
        let answer = sample_mean - xi / 2.0 + xi * rng.gen::<f64>();

        let sigma = self.adjudicate_sigma.then(|| g.sigma(self.scheme));
        self.records.push(BreakerRecord {
            query_index: self.records.len() as u64,
            xi,
            xi0,
            m_samples,
            sample_mean,
            answer,
            sigma,
            typical: sigma.map(|s| (sample_mean - s).abs() <= xi0),
        });
        Ok(answer)
    }
}

/// How the final pair produced by a sampler was classified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakOutcome {
    /// Valid pair whose message never went through the signing oracle.
    Forged,
    /// Valid pair, but the message is in the history set.
    Seen,
    Invalid,
}

#[derive(Debug)]
pub struct BreakerRunReport {
    pub outcome: BreakOutcome,
    pub pair: (u64, u64),
    pub history_size: u64,
    pub records: Vec<BreakerRecord>,
}

/// A sampler interacting with the breaker as its statistical-query oracle and
/// finally emitting a message/signature pair.
pub trait PairSampler {
    fn run(&mut self, oracle: &mut Breaker<'_>, rng: &mut TrialRng) -> Result<(u64, u64)>;
}

/// Full protocol: drive the sampler against a fresh breaker session and
/// adjudicate its final pair.
pub fn breaker_run(
    sampler: &mut dyn PairSampler,
    scheme: &ToyScheme,
    epsilon: f64,
    q: u64,
    rng: &mut TrialRng,
) -> Result<BreakerRunReport> {
    let mut breaker = Breaker::new(scheme, epsilon, q)?;
    let (m, s) = sampler.run(&mut breaker, rng)?;
    let outcome = if !scheme.verify(m, s) {
        BreakOutcome::Invalid
    } else if breaker.history_contains(m) {
        BreakOutcome::Seen
    } else {
        BreakOutcome::Forged
    };
    Ok(BreakerRunReport {
        outcome,
        pair: (m, s),
        history_size: breaker.history_size(),
        records: breaker.records,
    })
}

/// Oracle-ignoring sampler that holds the signing key: it burns `queries`
/// oracle calls, then outputs a fresh uniformly random valid pair. Its output
/// is independent of the answers, which is exactly the regime of the
/// history-collision claim.
pub struct CheatingKeyedSampler {
    pub scheme: ToyScheme,
    pub queries: u64,
    pub xi: f64,
}

impl PairSampler for CheatingKeyedSampler {
    fn run(&mut self, oracle: &mut Breaker<'_>, rng: &mut TrialRng) -> Result<(u64, u64)> {
        let g = PairQuery::new(|m: u64, s: u64| {
            if ((m ^ s).count_ones() & 1) == 0 {
                1.0
            } else {
                -1.0
            }
        });
        for _ in 0..self.queries {
            oracle.answer_query(&g, self.xi, rng)?;
        }
        let m = rng.gen::<u64>() & self.scheme.message_mask();
        Ok((m, self.scheme.sign(m)))
    }
}

/// Sampler that always emits a garbage pair.
pub struct InvalidPairSampler;

impl PairSampler for InvalidPairSampler {
    fn run(&mut self, oracle: &mut Breaker<'_>, rng: &mut TrialRng) -> Result<(u64, u64)> {
        let mask = oracle.scheme.message_mask();
        let m = rng.gen::<u64>() & mask;
        // Flip one signature bit so verification must fail.
        Ok((m, oracle.scheme.sign(m) ^ 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn sign_verify_round_trip() {
        let scheme = toy_scheme(16, 0xfeed).unwrap();
        let mut rng = TrialRng::seed_from_u64(1);
        for _ in 0..10_000 {
            let m = rng.gen::<u64>() & scheme.message_mask();
            let s = scheme.sign(m);
            assert!(scheme.verify(m, s));
        }
    }

    #[test]
    fn flipped_signature_bit_rejects() {
        let scheme = toy_scheme(16, 0xbeef).unwrap();
        let mut rng = TrialRng::seed_from_u64(2);
        for _ in 0..10_000 {
            let m = rng.gen::<u64>() & scheme.message_mask();
            let s = scheme.sign(m);
            let bit = 1u64 << (rng.gen::<u32>() % 16);
            assert!(!scheme.verify(m, s ^ bit));
        }
    }

    #[test]
    fn verify_predicate_density() {
        let scheme = toy_scheme(6, 0x5eed).unwrap();
        let pred = crate::domain::Predicate::sig_verify(scheme);
        // One valid signature per message.
        assert_eq!(pred.density(1 << 24).unwrap(), 2f64.powi(-6));
    }

    #[test]
    fn constant_query_answer_interval() {
        let scheme = toy_scheme(12, 7).unwrap();
        let mut rng = TrialRng::seed_from_u64(3);
        let mut breaker = Breaker::new(&scheme, 0.5, 2).unwrap();
        let g = PairQuery::new(|_, _| 1.0);
        let xi = 0.5;
        let y = breaker.answer_query(&g, xi, &mut rng).unwrap();
        assert!((y - 1.0).abs() <= xi / 2.0);
        let rec = breaker.records()[0];
        assert_eq!(rec.sigma, Some(1.0));
        assert_eq!(rec.typical, Some(true));
        assert_eq!(rec.sample_mean, 1.0);
    }

    #[test]
    fn sd_bound_examples() {
        assert_eq!(answer_sd_bound(0.3, 0.3, 0.1).unwrap(), 0.0);
        assert_eq!(answer_sd_bound(0.0, 0.1, 0.1).unwrap(), 1.0);
        let b = answer_sd_bound(0.10, 0.12, 0.1).unwrap();
        assert!((b - 0.2).abs() < 1e-12);
    }

    #[test]
    fn invalid_sampler_is_classified_invalid() {
        let scheme = toy_scheme(12, 9).unwrap();
        let mut rng = TrialRng::seed_from_u64(4);
        let mut sampler = InvalidPairSampler;
        let report = breaker_run(&mut sampler, &scheme, 0.5, 1, &mut rng).unwrap();
        assert_eq!(report.outcome, BreakOutcome::Invalid);
    }

    #[test]
    fn cheating_sampler_mostly_forges() {
        let scheme = toy_scheme(16, 11).unwrap();
        let mut forged = 0;
        for seed in 0..50 {
            let mut rng = TrialRng::seed_from_u64(seed);
            let mut sampler = CheatingKeyedSampler { scheme, queries: 1, xi: 1.0 };
            let report = breaker_run(&mut sampler, &scheme, 1.0, 1, &mut rng).unwrap();
            if report.outcome == BreakOutcome::Forged {
                forged += 1;
            }
        }
        // History covers under 1% of the message space in this regime.
        assert!(forged >= 45, "forged only {forged}/50");
    }
}
