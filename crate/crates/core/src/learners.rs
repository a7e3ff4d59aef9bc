//! Concrete statistical-query learners: the dictator class (dense,
//! strongly learnable, the demonstration vehicle for the reduction) and the
//! trivial all-zero learner for sparse classes.

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Point, DEFAULT_DOMAIN_CAP};
use crate::oracles::{LabeledQuery, SqlOracle};
use crate::{Error, Result};

/// An evaluable hypothesis over the target's domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hypothesis {
    Dictator { n: usize, index: usize },
    Constant { value: bool },
}

impl Hypothesis {
    pub fn eval(&self, x: &Point) -> bool {
        match self {
            Hypothesis::Dictator { index, .. } => match x {
                Point::Bits(v) => v.bit(*index) == 1,
                Point::Zp(_) => false,
            },
            Hypothesis::Constant { value } => *value,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Hypothesis::Dictator { index, .. } => format!("dictator x_{index}"),
            Hypothesis::Constant { value } => format!("constant {}", *value as u8),
        }
    }
}

/// A learner driven by an SQL oracle.
pub trait SqLearner {
    fn learn(
        &self,
        oracle: &mut dyn SqlOracle,
        accuracy: f64,
        confidence: f64,
    ) -> Result<Hypothesis>;
}

/// Per-query tolerance of the dictator learner. The true coordinate answers
/// -1 and every other coordinate answers 0, so a quarter keeps the two
/// intervals separated across any honest oracle.
pub const DICTATOR_QUERY_TOLERANCE: f64 = 0.25;

/// Learns a dictator target `f(x) = x_i` with `n` queries
/// `g_i(x,y) = (2y-1)(-1)^{x_i}`: the correlation is -1 at the true index and
/// 0 elsewhere, so the most negative response below -1/2 names the index.
pub fn dictator_sq_learner(
    oracle: &mut dyn SqlOracle,
    n: usize,
    _accuracy: f64,
    _confidence: f64,
) -> Result<Hypothesis> {
    let domain = Domain::full_cube(n)?;
    let mut best_index = 0usize;
    let mut best_value = f64::INFINITY;
    for i in 0..n {
        let g = LabeledQuery::from_fn(domain, DEFAULT_DOMAIN_CAP, |x, y| {
            let sign = if x.as_bits().expect("cube point").bit(i) == 1 { -1.0 } else { 1.0 };
            (2.0 * y as f64 - 1.0) * sign
        })?;
        let y = oracle.answer(&g, DICTATOR_QUERY_TOLERANCE)?;
        if y < best_value {
            best_value = y;
            best_index = i;
        }
    }
    if best_value >= -0.5 {
        return Err(Error::NoDictatorFound { best: best_value });
    }
    Ok(Hypothesis::Dictator { n, index: best_index })
}

#[derive(Clone, Copy, Debug)]
pub struct DictatorLearner {
    pub n: usize,
}

impl SqLearner for DictatorLearner {
    fn learn(
        &self,
        oracle: &mut dyn SqlOracle,
        accuracy: f64,
        confidence: f64,
    ) -> Result<Hypothesis> {
        dictator_sq_learner(oracle, self.n, accuracy, confidence)
    }
}

/// The all-zero hypothesis, valid whenever the class density is at most the
/// accuracy target: its error equals the target's density by construction.
pub fn trivial_sparse_learner(density_bound: f64, accuracy: f64) -> Result<Hypothesis> {
    if !(density_bound >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "density bound {density_bound} must be nonnegative"
        )));
    }
    if density_bound > accuracy {
        return Err(Error::Precondition(format!(
            "density bound {density_bound} exceeds the accuracy target {accuracy}"
        )));
    }
    Ok(Hypothesis::Constant { value: false })
}

#[derive(Clone, Copy, Debug)]
pub struct TrivialSparseLearner {
    pub density_bound: f64,
}

impl SqLearner for TrivialSparseLearner {
    fn learn(
        &self,
        _oracle: &mut dyn SqlOracle,
        accuracy: f64,
        _confidence: f64,
    ) -> Result<Hypothesis> {
        trivial_sparse_learner(self.density_bound, accuracy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BitVector, Predicate};
    use crate::oracles::{HonestSql, OracleMode};
    use crate::TrialRng;
    use rand::SeedableRng;

    fn rng(seed: u64) -> TrialRng {
        TrialRng::seed_from_u64(seed)
    }

    #[test]
    fn recovers_the_dictator_exactly() {
        let f = Predicate::dictator(8, 3).unwrap();
        let mut oracle = HonestSql::new(f, OracleMode::Exact, rng(0));
        let h = dictator_sq_learner(&mut oracle, 8, 0.1, 0.1).unwrap();
        assert_eq!(h, Hypothesis::Dictator { n: 8, index: 3 });
    }

    #[test]
    fn smallest_case() {
        let f = Predicate::dictator(2, 0).unwrap();
        let mut oracle = HonestSql::new(f, OracleMode::Exact, rng(1));
        let h = dictator_sq_learner(&mut oracle, 2, 0.1, 0.1).unwrap();
        assert_eq!(h, Hypothesis::Dictator { n: 2, index: 0 });
    }

    #[test]
    fn exact_under_worst_noise_at_quarter_tolerance() {
        for n in [4usize, 11, 20] {
            for seed in 0..20 {
                let index = (seed as usize * 7 + n) % n;
                let f = Predicate::dictator(n, index).unwrap();
                let mut oracle = HonestSql::new(f, OracleMode::WorstNoise, rng(seed));
                let h = dictator_sq_learner(&mut oracle, n, 0.1, 0.1).unwrap();
                assert_eq!(h, Hypothesis::Dictator { n, index }, "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn no_dictator_is_reported() {
        // Constant-true target correlates 0 with every coordinate query.
        let f = Predicate::constant(Domain::full_cube(4).unwrap(), true);
        let mut oracle = HonestSql::new(f, OracleMode::Exact, rng(2));
        assert!(matches!(
            dictator_sq_learner(&mut oracle, 4, 0.1, 0.1),
            Err(Error::NoDictatorFound { .. })
        ));
    }

    #[test]
    fn trivial_sparse_cases() {
        let h = trivial_sparse_learner(2f64.powi(-16), 0.01).unwrap();
        assert_eq!(h, Hypothesis::Constant { value: false });
        assert!(matches!(
            trivial_sparse_learner(0.1, 0.01),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn trivial_sparse_error_equals_density() {
        let target = Point::Bits(BitVector::parse_bits("101100").unwrap());
        let f = Predicate::set_membership(
            Domain::full_cube(6).unwrap(),
            std::slice::from_ref(&target),
        )
        .unwrap();
        let h = trivial_sparse_learner(1.0 / 64.0, 0.05).unwrap();
        let domain = f.domain();
        let mut disagreements = 0u64;
        for x in domain.iter() {
            if h.eval(&x) != f.eval(&x).unwrap() {
                disagreements += 1;
            }
        }
        let err = disagreements as f64 / domain.cardinality() as f64;
        assert_eq!(err, f.density(crate::domain::DEFAULT_DOMAIN_CAP).unwrap());
    }

    #[test]
    fn hypothesis_serialization() {
        let h = Hypothesis::Dictator { n: 16, index: 3 };
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(json, r#"{"kind":"dictator","n":16,"index":3}"#);
        let back: Hypothesis = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h);
        let c = Hypothesis::Constant { value: false };
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"kind":"constant","value":false}"#);
    }
}
