//! Classical models of the quantum subroutines' hidden sets and their
//! post-processing: order finding, the idealized period-measurement set and
//! continued-fraction recovery on one side; the hidden-XOR set and GF(2)
//! elimination on the other.

use num_integer::Integer;
use rand::Rng;

use crate::domain::{BitVector, Domain, Point, Predicate, DEFAULT_DOMAIN_CAP};
use crate::{Error, Result, TrialRng};

/// Largest modulus for brute-force order computation.
pub const MAX_ORDER_MODULUS: u64 = 1 << 20;

/// Least `r > 0` with `a^r = 1 (mod n)`, by iterating powers.
pub fn order_of(a: u64, modulus: u64) -> Result<u64> {
    if modulus < 2 || modulus > MAX_ORDER_MODULUS {
        return Err(Error::Precondition(format!(
            "modulus {modulus} out of range 2..={MAX_ORDER_MODULUS}"
        )));
    }
    let a = a % modulus;
    if a.gcd(&modulus) != 1 {
        return Err(Error::Precondition(format!(
            "{a} and {modulus} are not coprime"
        )));
    }
    let mut power = a;
    let mut r = 1u64;
    while power != 1 {
        power = power * a % modulus;
        r += 1;
    }
    Ok(r)
}

/// Order-finding instance: modulus, base, first-register width and the order
/// itself (computed at construction).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShorInstance {
    pub modulus: u64,
    pub base: u64,
    pub width: usize,
    pub order: u64,
}

impl ShorInstance {
    pub fn new(modulus: u64, base: u64, width: usize) -> Result<Self> {
        let order = order_of(base, modulus)?;
        if width == 0 || width > crate::domain::MAX_BIT_WIDTH {
            return Err(Error::InvalidArgument(format!(
                "register width {width} out of range"
            )));
        }
        if 1u64 << width < modulus {
            return Err(Error::InvalidArgument(format!(
                "register width {width} cannot index residues mod {modulus}"
            )));
        }
        Ok(ShorInstance { modulus, base: base % modulus, width, order })
    }

    /// Smallest width whose register covers the modulus: `2^{w-1} < N <= 2^w`.
    pub fn minimal_width(modulus: u64) -> usize {
        (64 - (modulus - 1).leading_zeros()) as usize
    }

    /// Width guaranteeing unique continued-fraction recovery: `2^w >= N^2`.
    pub fn recovery_width(modulus: u64) -> usize {
        let mut w = 0usize;
        while (1u128 << w) < (modulus as u128) * (modulus as u128) {
            w += 1;
        }
        w
    }

    pub fn register_size(&self) -> u64 {
        1u64 << self.width
    }

    /// The idealized measurement support `{round(t 2^w / r) : 0 <= t < r}`,
    /// nearest integer with ties to even.
    pub fn hidden_set(&self) -> Vec<u64> {
        let q = self.register_size();
        let mut out: Vec<u64> = (0..self.order)
            .map(|t| {
                let num = (t as u128) << self.width;
                let quot = (num / self.order as u128) as u64;
                let rem = (num % self.order as u128) as u64;
                match (2 * rem).cmp(&self.order) {
                    std::cmp::Ordering::Less => quot,
                    std::cmp::Ordering::Greater => quot + 1,
                    std::cmp::Ordering::Equal => quot + (quot & 1),
                }
            })
            .map(|y| y.min(q - 1))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The hidden set as an explicit predicate over the register's bit
    /// strings.
    pub fn hidden_set_predicate(&self) -> Result<Predicate> {
        let domain = Domain::full_cube(self.width)?;
        Predicate::set_membership_ranks(domain, &self.hidden_set())
    }
}

/// The idealized measurement support of an instance.
pub fn shor_hidden_set(instance: &ShorInstance) -> Vec<u64> {
    instance.hidden_set()
}

/// Continued-fraction convergents `t/d` of `y/q`, in order of increasing
/// denominator.
pub fn convergents(y: u64, q: u64) -> Vec<(u64, u64)> {
    assert!(q > 0 && y <= q);
    let mut out = Vec::new();
    // Euclid on (y, q) yields the partial quotients; the usual three-term
    // recurrence builds numerators and denominators.
    let (mut num, mut den) = (y, q);
    let (mut h_prev, mut h) = (0u64, 1u64);
    let (mut k_prev, mut k) = (1u64, 0u64);
    while den != 0 {
        let a = num / den;
        let next_h = a.checked_mul(h).and_then(|v| v.checked_add(h_prev));
        let next_k = a.checked_mul(k).and_then(|v| v.checked_add(k_prev));
        let (Some(next_h), Some(next_k)) = (next_h, next_k) else { break };
        h_prev = h;
        h = next_h;
        k_prev = k;
        k = next_k;
        out.push((h, k));
        (num, den) = (den, num % den);
    }
    out
}

fn approximates(y: u64, q: u64, t: u64, d: u64) -> bool {
    // |y/q - t/d| <= 1/(2q)  <=>  2 |y d - t q| <= d
    let lhs = (y as i128 * d as i128 - t as i128 * q as i128).unsigned_abs() * 2;
    lhs <= d as u128
}

/// Least convergent denominator `0 < d < modulus` of `y/q` that approximates
/// to within `1/(2q)`. This is the period-divisor candidate a single sample
/// supports; combining candidates across samples by lcm recovers the order.
pub fn continued_fraction_divisor(y: u64, q: u64, modulus: u64) -> Option<u64> {
    if y == 0 {
        return None;
    }
    convergents(y, q)
        .into_iter()
        .find(|&(t, d)| d > 0 && d < modulus && approximates(y, q, t, d))
        .map(|(_, d)| d)
}

/// Least convergent denominator that both approximates `y/q` and is an
/// exponent annihilating `a` mod `modulus`. `None` for `y = 0` (the sample
/// carries no period information) and for samples whose numerator shares a
/// factor with the period.
pub fn continued_fraction_order(y: u64, q: u64, modulus: u64, a: u64) -> Option<u64> {
    if y == 0 {
        return None;
    }
    convergents(y, q)
        .into_iter()
        .filter(|&(t, d)| d > 0 && d < modulus && approximates(y, q, t, d))
        .find(|&(_, d)| pow_mod(a, d, modulus) == 1)
        .map(|(_, d)| d)
}

fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// Combines per-sample divisor candidates by lcm and keeps the result only
/// if it annihilates `a`.
pub fn recover_order_by_lcm(samples: &[u64], q: u64, modulus: u64, a: u64) -> Option<u64> {
    let mut acc = 1u64;
    for &y in samples {
        if let Some(d) = continued_fraction_divisor(y, q, modulus) {
            acc = acc.lcm(&d);
        }
    }
    (acc > 0 && pow_mod(a, acc, modulus) == 1).then_some(acc)
}

/// Result of GF(2) elimination on homogeneous samples `y · s = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gf2Solution {
    /// Rank `n-1`: the unique nonzero annihilated vector. Rank `n`: the zero
    /// vector (only the trivial solution remains).
    Secret(BitVector),
    Underdetermined { rank: usize },
}

/// Gaussian elimination over GF(2). Width is taken from the first sample.
pub fn gf2_solve(samples: &[BitVector]) -> Result<Gf2Solution> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("no samples".into()))?;
    let n = first.width();
    if samples.iter().any(|s| s.width() != n) {
        return Err(Error::WidthMismatch { left: n, right: samples.iter().map(|s| s.width()).find(|&w| w != n).unwrap() });
    }

    // Row-reduce; pivot columns left to right (bit 0 is the leftmost).
    let mut rows: Vec<u32> = samples.iter().map(|s| s.index() as u32).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut reduced: Vec<u32> = Vec::new();
    for col in 0..n {
        let mask = 1u32 << (n - 1 - col);
        let Some(pos) = rows.iter().position(|&r| r & mask != 0) else { continue };
        let pivot = rows.swap_remove(pos);
        for r in rows.iter_mut() {
            if *r & mask != 0 {
                *r ^= pivot;
            }
        }
        for r in reduced.iter_mut() {
            if *r & mask != 0 {
                *r ^= pivot;
            }
        }
        reduced.push(pivot);
        pivots.push(col);
    }
    let rank = pivots.len();
    if rank == n {
        return Ok(Gf2Solution::Secret(BitVector::zero(n)));
    }
    if rank < n - 1 {
        return Ok(Gf2Solution::Underdetermined { rank });
    }

    // Exactly one free column: set it to 1 and back-substitute.
    let free_col = (0..n).find(|c| !pivots.contains(c)).expect("rank n-1 leaves one free column");
    let mut secret = 1u32 << (n - 1 - free_col);
    for (row, &col) in reduced.iter().zip(&pivots) {
        // After full reduction each row is pivot + combination of free
        // columns; the pivot variable equals the row's free-column value.
        if row & secret != 0 {
            secret |= 1u32 << (n - 1 - col);
        }
    }
    Ok(Gf2Solution::Secret(BitVector::from_index(n, secret as u64)))
}

/// Hidden-XOR instance: the set `{y != 0 : y · s = 0}` as a predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimonInstance {
    pub n: usize,
    pub secret: BitVector,
}

impl SimonInstance {
    pub fn new(n: usize, secret: BitVector) -> Result<Self> {
        if secret.width() != n {
            return Err(Error::WidthMismatch { left: n, right: secret.width() });
        }
        Ok(SimonInstance { n, secret })
    }

    /// With a one-bit nonzero secret there is no nonzero y with `y · s = 0`.
    pub fn is_degenerate(&self) -> bool {
        self.n == 1 && !self.secret.is_zero()
    }

    pub fn hidden_set_predicate(&self) -> Predicate {
        Predicate::neg_parity(self.secret)
    }

    pub fn hidden_set_size(&self) -> u64 {
        if self.secret.is_zero() {
            (1u64 << self.n) - 1
        } else {
            (1u64 << (self.n - 1)) - 1
        }
    }
}

/// Where each post-processing sample comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimonSampleSource {
    /// Uniform over the hidden set — the standard-model measurement.
    HiddenSetUniform,
    /// Uniform over the punctured cube — what a guessing sampler yields.
    DomainUniform,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimonRunResult {
    pub recovered: Option<BitVector>,
    pub success: bool,
    pub rank: usize,
}

/// Collects `num_samples` vectors from the source, eliminates, and compares
/// the solution with the instance's secret.
pub fn simon_end_to_end(
    instance: &SimonInstance,
    source: SimonSampleSource,
    num_samples: u64,
    rng: &mut TrialRng,
) -> Result<SimonRunResult> {
    if instance.is_degenerate() {
        return Err(Error::Degenerate(
            "one-bit nonzero secret has an empty hidden set".into(),
        ));
    }
    if num_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let samples: Vec<BitVector> = match source {
        SimonSampleSource::HiddenSetUniform => {
            let ranks = instance
                .hidden_set_predicate()
                .positive_ranks(DEFAULT_DOMAIN_CAP)?;
            if ranks.is_empty() {
                return Err(Error::EmptyPositiveSet);
            }
            let domain = Domain::punctured_cube(instance.n)?;
            (0..num_samples)
                .map(|_| {
                    let rank = ranks[rng.gen_range(0..ranks.len())];
                    match domain.element_at(rank) {
                        Point::Bits(v) => v,
                        Point::Zp(_) => unreachable!(),
                    }
                })
                .collect()
        }
        SimonSampleSource::DomainUniform => {
            let domain = Domain::punctured_cube(instance.n)?;
            (0..num_samples)
                .map(|_| match crate::samplers::random_guess(domain, rng) {
                    Point::Bits(v) => v,
                    Point::Zp(_) => unreachable!(),
                })
                .collect()
        }
    };
    let (recovered, rank) = match gf2_solve(&samples)? {
        Gf2Solution::Secret(s) => {
            let rank = if s.is_zero() { instance.n } else { instance.n - 1 };
            (Some(s), rank)
        }
        Gf2Solution::Underdetermined { rank } => (None, rank),
    };
    let success = recovered == Some(instance.secret);
    Ok(SimonRunResult { recovered, success, rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn bits(s: &str) -> BitVector {
        BitVector::parse_bits(s).unwrap()
    }

    #[test]
    fn order_examples() {
        assert_eq!(order_of(7, 15).unwrap(), 4);
        assert_eq!(order_of(1, 97).unwrap(), 1);
        assert_eq!(order_of(2, 9).unwrap(), 6);
        assert!(matches!(order_of(6, 15), Err(Error::Precondition(_))));
    }

    #[test]
    fn order_is_minimal() {
        for (a, n) in [(7u64, 15u64), (2, 21), (5, 462), (10, 9973)] {
            let r = order_of(a, n).unwrap();
            assert_eq!(pow_mod(a, r, n), 1);
            for q in 2..=r {
                if r % q == 0 && is_prime(q) {
                    assert_ne!(pow_mod(a, r / q, n), 1, "a={a} n={n} r={r} q={q}");
                }
            }
        }
    }

    fn is_prime(x: u64) -> bool {
        x >= 2 && (2..x).take_while(|d| d * d <= x).all(|d| x % d != 0)
    }

    #[test]
    fn shor_hidden_set_examples() {
        let inst = ShorInstance::new(15, 7, 8).unwrap();
        assert_eq!(inst.order, 4);
        assert_eq!(inst.hidden_set(), vec![0, 64, 128, 192]);

        let trivial = ShorInstance::new(97, 1, 7).unwrap();
        assert_eq!(trivial.hidden_set(), vec![0]);

        let inst = ShorInstance::new(21, 2, 9).unwrap();
        assert_eq!(inst.order, 6);
        assert_eq!(inst.hidden_set(), vec![0, 85, 171, 256, 341, 427]);
    }

    #[test]
    fn continued_fraction_examples() {
        assert_eq!(continued_fraction_order(192, 256, 15, 7), Some(4));
        assert_eq!(continued_fraction_divisor(64, 256, 15), Some(4));
        assert_eq!(continued_fraction_order(0, 256, 15, 7), None);
    }

    #[test]
    fn coprime_samples_recover_the_order() {
        for &(n, a) in &[(15u64, 7u64), (21, 2), (33, 5), (451, 14)] {
            let width = ShorInstance::recovery_width(n);
            let inst = ShorInstance::new(n, a, width).unwrap();
            let q = inst.register_size();
            for t in 1..inst.order {
                if t.gcd(&inst.order) != 1 {
                    continue;
                }
                let y = inst.hidden_set()[t as usize];
                assert_eq!(
                    continued_fraction_order(y, q, n, a),
                    Some(inst.order),
                    "n={n} a={a} t={t}"
                );
            }
        }
    }

    #[test]
    fn shared_factor_samples_give_divisors() {
        let inst = ShorInstance::new(15, 7, ShorInstance::recovery_width(15)).unwrap();
        let q = inst.register_size();
        // t = 2 shares a factor with r = 4; the divisor is r/2.
        let y = inst.hidden_set()[2];
        assert_eq!(continued_fraction_divisor(y, q, 15), Some(2));
        assert_eq!(continued_fraction_order(y, q, 15, 7), None);
    }

    #[test]
    fn lcm_combining_recovers_orders() {
        let mut rng = TrialRng::seed_from_u64(13);
        let mut tested = 0;
        while tested < 25 {
            let modulus = rng.gen_range(10u64..=1000);
            let a = rng.gen_range(2u64..modulus);
            if a.gcd(&modulus) != 1 {
                continue;
            }
            tested += 1;
            let width = ShorInstance::recovery_width(modulus);
            let inst = ShorInstance::new(modulus, a, width).unwrap();
            let samples = inst.hidden_set();
            let got = recover_order_by_lcm(&samples, inst.register_size(), modulus, a);
            assert_eq!(got, Some(inst.order), "N={modulus} a={a}");
        }
    }

    #[test]
    fn gf2_examples() {
        let rows = vec![bits("010"), bits("101"), bits("111")];
        assert_eq!(gf2_solve(&rows).unwrap(), Gf2Solution::Secret(bits("101")));

        let rows = vec![bits("100"), bits("010"), bits("001")];
        assert_eq!(gf2_solve(&rows).unwrap(), Gf2Solution::Secret(bits("000")));

        let rows = vec![bits("011")];
        assert_eq!(gf2_solve(&rows).unwrap(), Gf2Solution::Underdetermined { rank: 1 });
    }

    #[test]
    fn simon_standard_model_succeeds() {
        let inst = SimonInstance::new(8, bits("10110100")).unwrap();
        let mut rng = TrialRng::seed_from_u64(5);
        let mut hits = 0;
        for _ in 0..200 {
            let run =
                simon_end_to_end(&inst, SimonSampleSource::HiddenSetUniform, 16, &mut rng)
                    .unwrap();
            if run.success {
                hits += 1;
            }
        }
        assert!(hits >= 195, "{hits}/200");
    }

    #[test]
    fn simon_zero_secret_runs_full_rank() {
        let inst = SimonInstance::new(6, bits("000000")).unwrap();
        let mut rng = TrialRng::seed_from_u64(6);
        let run =
            simon_end_to_end(&inst, SimonSampleSource::HiddenSetUniform, 24, &mut rng).unwrap();
        assert!(run.success);
        assert_eq!(run.recovered, Some(bits("000000")));
    }

    #[test]
    fn simon_degenerate_instance_is_flagged() {
        let inst = SimonInstance::new(1, bits("1")).unwrap();
        assert!(inst.is_degenerate());
        let mut rng = TrialRng::seed_from_u64(7);
        assert!(matches!(
            simon_end_to_end(&inst, SimonSampleSource::HiddenSetUniform, 4, &mut rng),
            Err(Error::Degenerate(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn elimination_recovers_planted_secrets(seed in 0u64..10_000) {
            let mut rng = TrialRng::seed_from_u64(seed);
            let n = rng.gen_range(3usize..10);
            let secret = BitVector::from_index(n, rng.gen_range(1..1u64 << n));
            let inst = SimonInstance::new(n, secret).unwrap();
            let run = simon_end_to_end(
                &inst,
                SimonSampleSource::HiddenSetUniform,
                3 * n as u64 + 8,
                &mut rng,
            );
            // Hidden sets of width >= 2 secrets are nonempty; rank deficits
            // only come from unlucky draws, which the sample count makes rare
            // but not impossible.
            if let Ok(run) = run {
                if run.rank == n - 1 {
                    prop_assert_eq!(run.recovered, Some(secret));
                }
            }
        }

        #[test]
        fn convergents_are_in_lowest_terms(y in 1u64..4096, q_shift in 12u32..16) {
            let q = 1u64 << q_shift;
            prop_assume!(y < q);
            for (t, d) in convergents(y, q) {
                prop_assert_eq!(t.gcd(&d), 1);
            }
        }
    }
}
