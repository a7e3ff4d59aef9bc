//! Spectral machinery: explicit truth tables, the Walsh–Hadamard transform,
//! orthonormalization of uniformly correlated function families, and the
//! dependent-predicate counting that powers the adversarial oracles.

use std::io::Write;

use crate::domain::{BitVector, Domain, Point, Predicate};
use crate::{Error, Result};

/// Numerical tolerance for orthonormality checks.
pub const ORTHO_TOL: f64 = 1e-9;

/// A real-valued (in practice ±1-valued) function over a domain, stored in
/// enumeration order.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthTable {
    domain: Domain,
    values: Vec<f64>,
}

impl TruthTable {
    pub fn from_values(domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() as u64 != domain.cardinality() {
            return Err(Error::DomainMismatch(format!(
                "{} values for a domain of {} elements",
                values.len(),
                domain.cardinality()
            )));
        }
        Ok(TruthTable { domain, values })
    }

    /// Materializes a query callback once over the whole domain.
    pub fn from_fn(domain: Domain, cap: u64, mut f: impl FnMut(&Point) -> f64) -> Result<Self> {
        domain.check_cap(cap)?;
        let values = domain.iter().map(|x| f(&x)).collect();
        Ok(TruthTable { domain, values })
    }

    pub fn constant(domain: Domain, value: f64) -> Self {
        TruthTable { domain, values: vec![value; domain.cardinality() as usize] }
    }

    /// The ±1 indicator of a predicate's positive set.
    pub fn pm_one_of(predicate: &Predicate, cap: u64) -> Result<Self> {
        let domain = predicate.domain();
        domain.check_cap(cap)?;
        let mut values = vec![-1.0; domain.cardinality() as usize];
        for rank in predicate.positive_ranks(cap)? {
            values[rank as usize] = 1.0;
        }
        Ok(TruthTable { domain, values })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value_at_rank(&self, rank: u64) -> f64 {
        self.values[rank as usize]
    }

    pub fn value_at(&self, x: &Point) -> Result<f64> {
        let rank = self
            .domain
            .rank(x)
            .ok_or_else(|| Error::OutOfDomain(x.to_string()))?;
        Ok(self.values[rank as usize])
    }

    /// Mean over the whole domain.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn mean_over_ranks(&self, ranks: &[u64]) -> Result<f64> {
        if ranks.is_empty() {
            return Err(Error::EmptyPositiveSet);
        }
        let mut sum = 0.0;
        for &r in ranks {
            sum += self.values[r as usize];
        }
        Ok(sum / ranks.len() as f64)
    }

    pub fn is_pm_one(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0 || v == -1.0)
    }
}

/// Normalized inner product `|X|^{-1} sum_x f(x) g(x)` over a common domain.
pub fn inner_product(f: &TruthTable, g: &TruthTable) -> Result<f64> {
    if f.domain != g.domain {
        return Err(Error::DomainMismatch(format!("{} vs {}", f.domain, g.domain)));
    }
    let dot: f64 = f.values.iter().zip(&g.values).map(|(a, b)| a * b).sum();
    Ok(dot / f.values.len() as f64)
}

/// Walsh–Hadamard coefficients `ĝ(s) = 2^{-n} sum_x g(x) (-1)^{s·x}`,
/// indexed by the packed value of `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumGf2 {
    n: usize,
    coefficients: Vec<f64>,
}

impl SpectrumGf2 {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    #[inline]
    pub fn at(&self, s_index: u64) -> f64 {
        self.coefficients[s_index as usize]
    }

    pub fn coefficient(&self, s: &BitVector) -> Result<f64> {
        if s.width() != self.n {
            return Err(Error::WidthMismatch { left: s.width(), right: self.n });
        }
        Ok(self.coefficients[s.index() as usize])
    }

    /// Parseval defect `|sum_s ĝ(s)^2 - 2^{-n} sum_x g(x)^2|` against the
    /// table the spectrum came from.
    pub fn parseval_gap(&self, g: &TruthTable) -> f64 {
        let lhs: f64 = self.coefficients.iter().map(|c| c * c).sum();
        let rhs = g.values.iter().map(|v| v * v).sum::<f64>() / g.values.len() as f64;
        (lhs - rhs).abs()
    }

    /// CSV rows `s_hex,coefficient`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "s_hex,coefficient")?;
        let width = self.n.div_ceil(4);
        for (s, c) in self.coefficients.iter().enumerate() {
            writeln!(out, "{:0width$x},{}", s, c)?;
        }
        Ok(())
    }
}

/// Fast transform over the full cube, `O(n 2^n)` butterflies.
pub fn wht(g: &TruthTable) -> Result<SpectrumGf2> {
    let n = match g.domain {
        Domain::FullCube { n } => n,
        other => {
            return Err(Error::DomainMismatch(format!(
                "transform needs the full cube, got {other}"
            )))
        }
    };
    let mut coefficients = g.values.clone();
    let len = coefficients.len();
    let mut half = 1usize;
    while half < len {
        let mut base = 0usize;
        while base < len {
            for i in base..base + half {
                let u = coefficients[i];
                let v = coefficients[i + half];
                coefficients[i] = u + v;
                coefficients[i + half] = u - v;
            }
            base += half * 2;
        }
        half *= 2;
    }
    let scale = 1.0 / len as f64;
    for c in &mut coefficients {
        *c *= scale;
    }
    Ok(SpectrumGf2 { n, coefficients })
}

/// Quadratic-time transform by direct inner products; the independent
/// cross-check for [`wht`].
pub fn naive_spectrum(g: &TruthTable) -> Result<SpectrumGf2> {
    let n = match g.domain {
        Domain::FullCube { n } => n,
        other => {
            return Err(Error::DomainMismatch(format!(
                "transform needs the full cube, got {other}"
            )))
        }
    };
    let len = g.values.len();
    let mut coefficients = vec![0.0; len];
    for (s, c) in coefficients.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (x, v) in g.values.iter().enumerate() {
            if (s & x).count_ones() & 1 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        *c = acc / len as f64;
    }
    Ok(SpectrumGf2 { n, coefficients })
}

/// The two positive counts and the value at the origin that determine a
/// parity coefficient of a ±1 query: `a` positives overall, `b` positives on
/// the positive set of the negative parity with secret `s`, `t = g(0^n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParityCoefficientCounts {
    pub a: u64,
    pub b: u64,
    pub t: i8,
    pub n: usize,
}

impl ParityCoefficientCounts {
    pub fn from_table(g: &TruthTable, s: &BitVector) -> Result<Self> {
        let n = match g.domain {
            Domain::FullCube { n } => n,
            other => {
                return Err(Error::DomainMismatch(format!(
                    "counts are defined over the full cube, got {other}"
                )))
            }
        };
        if s.width() != n || s.is_zero() {
            return Err(Error::InvalidArgument(
                "secret must be nonzero and of matching width".into(),
            ));
        }
        let mut a = 0u64;
        let mut b = 0u64;
        for (x, &v) in g.values.iter().enumerate() {
            if v > 0.0 {
                a += 1;
                if x != 0 && (x as u64 & s.index()).count_ones() & 1 == 0 {
                    b += 1;
                }
            }
        }
        let t = if g.values[0] > 0.0 { 1 } else { -1 };
        Ok(ParityCoefficientCounts { a, b, t, n })
    }
}

/// Closed-form parity coefficient from the counts:
/// `(4b - 2a + 2t + 2) / 2^n`, exactly `ĝ(s)` for any ±1 table `g` and any
/// nonzero `s`.
pub fn parity_coefficient_from_counts(c: &ParityCoefficientCounts) -> f64 {
    let num = 4.0 * c.b as f64 - 2.0 * c.a as f64 + 2.0 * c.t as f64 + 2.0;
    num / (1u64 << c.n) as f64
}

/// Size and common pairwise inner product of a uniformly correlated family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelatedClassStats {
    pub d: usize,
    pub lambda: f64,
}

impl CorrelatedClassStats {
    /// Stats of the ±1 normalized booleanized linear family:
    /// `d = p^{n-1}`, `lambda = ((p^2-4p+4) p^{n-2} - p) / (p^n - p)`.
    pub fn bool_linear(n: usize, p: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("class stats need n >= 2".into()));
        }
        let pf = p as f64;
        let d = (p as u64).pow(n as u32 - 1) as usize;
        let lambda = ((pf * pf - 4.0 * pf + 4.0) * pf.powi(n as i32 - 2) - pf)
            / (pf.powi(n as i32) - pf);
        Ok(CorrelatedClassStats { d, lambda })
    }
}

/// Rescales a family with constant pairwise inner product `lambda` into an
/// orthonormal basis of its span:
/// `f~_i = alpha f_i - (alpha - beta)/d * sum_j f_j` with
/// `alpha = (1-lambda)^{-1/2}` and `beta = (1+(d-1)lambda)^{-1/2}`.
pub fn orthonormalize_correlated(
    functions: &[TruthTable],
    stats: &CorrelatedClassStats,
) -> Result<Vec<TruthTable>> {
    if functions.is_empty() {
        return Err(Error::InvalidArgument("empty function family".into()));
    }
    if functions.len() != stats.d {
        return Err(Error::InvalidArgument(format!(
            "family has {} functions but stats say d={}",
            functions.len(),
            stats.d
        )));
    }
    let domain = functions[0].domain;
    for f in functions {
        if f.domain != domain {
            return Err(Error::DomainMismatch("family spans several domains".into()));
        }
    }
    if stats.d == 1 {
        return Ok(vec![functions[0].clone()]);
    }

    // The transform is only valid when the family really is uniformly
    // correlated with unit norms; check before touching anything.
    for (i, f) in functions.iter().enumerate() {
        let norm = inner_product(f, f)?;
        if (norm - 1.0).abs() > ORTHO_TOL {
            return Err(Error::Precondition(format!(
                "function {i} has norm^2 {norm}, expected 1"
            )));
        }
        for (j, g) in functions.iter().enumerate().skip(i + 1) {
            let ip = inner_product(f, g)?;
            if (ip - stats.lambda).abs() > ORTHO_TOL {
                return Err(Error::Precondition(format!(
                    "inner product of functions {i},{j} is {ip}, expected lambda={}",
                    stats.lambda
                )));
            }
        }
    }

    let d = stats.d as f64;
    if stats.lambda >= 1.0 {
        return Err(Error::Precondition(format!(
            "lambda={} makes 1-lambda non-positive",
            stats.lambda
        )));
    }
    let spread = 1.0 + (d - 1.0) * stats.lambda;
    if spread <= 0.0 {
        return Err(Error::Precondition(format!(
            "1+(d-1)lambda = {spread} is not positive"
        )));
    }
    let alpha = 1.0 / (1.0 - stats.lambda).sqrt();
    let beta = 1.0 / spread.sqrt();
    let shift = (alpha - beta) / d;

    let len = domain.cardinality() as usize;
    let mut sum = vec![0.0f64; len];
    for f in functions {
        for (acc, v) in sum.iter_mut().zip(&f.values) {
            *acc += v;
        }
    }
    Ok(functions
        .iter()
        .map(|f| TruthTable {
            domain,
            values: f
                .values
                .iter()
                .zip(&sum)
                .map(|(v, s)| alpha * v - shift * s)
                .collect(),
        })
        .collect())
}

/// Positive-set means of every negative parity against one query, derived
/// from a single transform: the sum of `g` over `{x : s·x = 0}` is
/// `2^{n-1} (ĝ(0) + ĝ(s))`, so puncturing the origin costs one value of `g`.
pub struct NegParityMeans {
    n: usize,
    g_at_zero: f64,
    spectrum: SpectrumGf2,
}

impl NegParityMeans {
    pub fn new(g: &TruthTable) -> Result<Self> {
        let n = match g.domain {
            Domain::FullCube { n } => n,
            other => {
                return Err(Error::DomainMismatch(format!(
                    "spectral means need the full cube, got {other}"
                )))
            }
        };
        Ok(NegParityMeans { n, g_at_zero: g.values[0], spectrum: wht(g)? })
    }

    /// Mean of `g` over the whole cube.
    pub fn cube_mean(&self) -> f64 {
        self.spectrum.at(0)
    }

    /// Mean of `g` over the punctured cube.
    pub fn punctured_mean(&self) -> f64 {
        let full = (1u64 << self.n) as f64;
        (full * self.cube_mean() - self.g_at_zero) / (full - 1.0)
    }

    /// Mean of `g` over the positive set `{x != 0 : s·x = 0}` of the negative
    /// parity with secret index `s_index`; for `s_index = 0` the positive set
    /// is the whole punctured cube.
    pub fn positive_mean(&self, s_index: u64) -> f64 {
        if s_index == 0 {
            return self.punctured_mean();
        }
        let half = (1u64 << (self.n - 1)) as f64;
        (half * (self.spectrum.at(0) + self.spectrum.at(s_index)) - self.g_at_zero) / (half - 1.0)
    }

    pub fn spectrum(&self) -> &SpectrumGf2 {
        &self.spectrum
    }
}

/// Raw exceedance count next to the closed-form ceiling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DependentCount {
    pub count: u64,
    pub bound: f64,
}

/// Exact number of nonzero secrets whose negative parity is not
/// `xi`-independent from `g` (positive-set mean versus full-cube mean),
/// with the Parseval ceiling `1/(xi - 6/2^n)^2`. The ceiling holds for every
/// `xi` above the slack term, and the count is checked against it.
pub fn count_dependent_negparity(g: &TruthTable, xi: f64) -> Result<DependentCount> {
    if !g.is_pm_one() {
        return Err(Error::InvalidArgument("query table must be ±1-valued".into()));
    }
    let means = NegParityMeans::new(g)?;
    let n = means.n;
    let slack = 6.0 / (1u64 << n) as f64;
    if !(xi > slack) {
        return Err(Error::Precondition(format!(
            "xi={xi} must exceed the slack term 6/2^n = {slack}"
        )));
    }
    let reference = means.cube_mean();
    let mut count = 0u64;
    for s in 1..(1u64 << n) {
        if (means.positive_mean(s) - reference).abs() > xi {
            count += 1;
        }
    }
    let bound = 1.0 / ((xi - slack) * (xi - slack));
    assert!(
        (count as f64) <= bound,
        "dependent-count ceiling violated: count {count} > bound {bound}"
    );
    Ok(DependentCount { count, bound })
}

/// Exact number of normalized booleanized linear predicates not
/// `xi`-independent from `g` over the punctured Z_p space, with the ceiling
/// `p^{2n/3+2}`. The ceiling is stated for the canonical tolerance
/// `xi = p^{-n/3}`; for other tolerances the raw count is still exact but the
/// bound field keeps the canonical formula.
pub fn count_dependent_boollinear(g: &TruthTable, xi: f64) -> Result<DependentCount> {
    let (n, p) = match g.domain {
        Domain::PuncturedZp { n, p } => (n, p),
        other => {
            return Err(Error::DomainMismatch(format!(
                "booleanized counting needs a punctured Z_p domain, got {other}"
            )))
        }
    };
    if !(xi > 0.0) {
        return Err(Error::Precondition(format!("xi={xi} must be positive")));
    }
    let reference = g.mean();
    let class = crate::domain::PredicateClass::NormalizedBoolLinear { n, p };
    let positive_size = (p as u64).pow(n as u32 - 1) - 1;
    let mut count = 0u64;
    for f in class.iter() {
        let mut sum = 0.0;
        let mut seen = 0u64;
        for (rank, x) in g.domain.iter().enumerate() {
            if f.eval(&x)? {
                sum += g.values[rank];
                seen += 1;
            }
        }
        debug_assert_eq!(seen, positive_size);
        let mean = sum / seen as f64;
        if (mean - reference).abs() > xi {
            count += 1;
        }
    }
    let bound = (p as f64).powf(2.0 * n as f64 / 3.0 + 2.0);
    Ok(DependentCount { count, bound })
}

/// The canonical tolerance of the booleanized-linear counting bound.
pub fn boollinear_canonical_xi(n: usize, p: u32) -> f64 {
    (p as f64).powf(-(n as f64) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{PredicateClass, DEFAULT_DOMAIN_CAP};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn cube(n: usize) -> Domain {
        Domain::full_cube(n).unwrap()
    }

    fn random_pm_table(n: usize, seed: u64) -> TruthTable {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        TruthTable::from_values(
            cube(n),
            (0..1u64 << n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect(),
        )
        .unwrap()
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
    fn inner_product_examples() {
        let one = TruthTable::constant(cube(4), 1.0);
        assert_eq!(inner_product(&one, &one).unwrap(), 1.0);
        let bit = TruthTable::from_fn(cube(4), DEFAULT_DOMAIN_CAP, |x| {
            if x.as_bits().unwrap().bit(0) == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .unwrap();
        assert_eq!(inner_product(&one, &bit).unwrap(), 0.0);
    }

    #[test]
    fn distinct_boollinear_inner_product_matches_lambda() {
        // p=3, n=3: lambda = ((9-12+4)*3 - 3)/24 = 0.
        let class = PredicateClass::NormalizedBoolLinear { n: 3, p: 3 };
        let stats = CorrelatedClassStats::bool_linear(3, 3).unwrap();
        assert_eq!(stats.lambda, 0.0);
        let tables: Vec<TruthTable> = class
            .iter()
            .map(|f| TruthTable::pm_one_of(&f, DEFAULT_DOMAIN_CAP).unwrap())
            .collect();
        for i in 0..tables.len() {
            for j in (i + 1)..tables.len() {
                let ip = inner_product(&tables[i], &tables[j]).unwrap();
                assert!((ip - stats.lambda).abs() < 1e-15, "{i},{j}: {ip}");
            }
        }
    }

    #[test]
    fn wht_basis_cases() {
        let n = 6;
        let g = parity_table(n, 1 << (n - 1)); // (-1)^{x_0}
        let spec = wht(&g).unwrap();
        for s in 0..1u64 << n {
            let expect = if s == 1 << (n - 1) { 1.0 } else { 0.0 };
            assert_eq!(spec.at(s), expect, "s={s}");
        }
        let one = TruthTable::constant(cube(n), 1.0);
        let spec = wht(&one).unwrap();
        assert_eq!(spec.at(0), 1.0);
        assert!(spec.coefficients()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn wht_matches_naive_on_random_tables() {
        for seed in 0..5 {
            let g = random_pm_table(10, seed);
            let fast = wht(&g).unwrap();
            let slow = naive_spectrum(&g).unwrap();
            for s in 0..1u64 << 10 {
                assert!((fast.at(s) - slow.at(s)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coefficient_formula_examples() {
        let n = 8;
        // Constant +1 query: coefficient 0 at any nonzero s.
        let c = ParityCoefficientCounts { a: 1 << n, b: (1 << (n - 1)) - 1, t: 1, n };
        assert_eq!(parity_coefficient_from_counts(&c), 0.0);

        // The parity table itself has coefficient exactly 1.
        let s = BitVector::from_index(n, 0b0110);
        let g = parity_table(n, s.index());
        let counts = ParityCoefficientCounts::from_table(&g, &s).unwrap();
        assert_eq!(parity_coefficient_from_counts(&counts), 1.0);

        // Random table matches the transform.
        let g = random_pm_table(4, 9);
        let s = BitVector::from_index(4, 0b0011);
        let counts = ParityCoefficientCounts::from_table(&g, &s).unwrap();
        let spec = wht(&g).unwrap();
        assert!((parity_coefficient_from_counts(&counts) - spec.at(3)).abs() < 1e-12);
    }

    #[test]
    fn orthonormalize_boollinear_families() {
        for (n, p) in [(2usize, 3u32), (3, 3)] {
            let class = PredicateClass::NormalizedBoolLinear { n, p };
            let tables: Vec<TruthTable> = class
                .iter()
                .map(|f| TruthTable::pm_one_of(&f, DEFAULT_DOMAIN_CAP).unwrap())
                .collect();
            let stats = CorrelatedClassStats::bool_linear(n, p).unwrap();
            let basis = orthonormalize_correlated(&tables, &stats).unwrap();
            for i in 0..basis.len() {
                for j in i..basis.len() {
                    let ip = inner_product(&basis[i], &basis[j]).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() <= ORTHO_TOL, "({n},{p}) {i},{j}: {ip}");
                }
            }
        }
    }

    #[test]
    fn orthonormalize_single_function_is_identity() {
        let g = parity_table(3, 0b101);
        let out =
            orthonormalize_correlated(&[g.clone()], &CorrelatedClassStats { d: 1, lambda: 0.0 })
                .unwrap();
        assert_eq!(out[0], g);
    }

    #[test]
    fn orthonormalize_rejects_uneven_correlation() {
        let a = parity_table(3, 0b001);
        let b = parity_table(3, 0b011);
        let c = TruthTable::constant(cube(3), 1.0);
        let err = orthonormalize_correlated(
            &[a, b, c],
            &CorrelatedClassStats { d: 3, lambda: 0.5 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn dependent_negparity_constant_query() {
        let g = TruthTable::constant(cube(10), 1.0);
        let out = count_dependent_negparity(&g, 0.25).unwrap();
        assert_eq!(out.count, 0);
    }

    #[test]
    fn dependent_negparity_single_parity() {
        let n = 16;
        let g = parity_table(n, 0b1010_0101_1100_0011);
        let out = count_dependent_negparity(&g, 2f64.powi(-4)).unwrap();
        assert!(out.count >= 1);
        assert!(out.count <= 1 << (n / 2 + 2));
    }

    #[test]
    fn dependent_negparity_random_queries_respect_cap() {
        let n = 12;
        for seed in 0..20 {
            let g = random_pm_table(n, seed);
            let out = count_dependent_negparity(&g, 2f64.powi(-3)).unwrap();
            assert!(out.count <= 1 << (n / 2 + 2), "seed {seed}: {}", out.count);
        }
    }

    #[test]
    fn dependent_negparity_rejects_tiny_xi() {
        let g = TruthTable::constant(cube(8), 1.0);
        assert!(matches!(
            count_dependent_negparity(&g, 6.0 / 256.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn spectral_positive_mean_matches_enumeration() {
        let n = 10;
        for seed in [3u64, 17] {
            let g = random_pm_table(n, seed);
            let means = NegParityMeans::new(&g).unwrap();
            for s in [1u64, 5, 1023, 512] {
                let mut sum = 0.0;
                let mut size = 0u64;
                for x in 1..1u64 << n {
                    if (x & s).count_ones() & 1 == 0 {
                        sum += g.value_at_rank(x);
                        size += 1;
                    }
                }
                assert!((means.positive_mean(s) - sum / size as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dependent_boollinear_cases() {
        let domain = Domain::punctured_zp(4, 3).unwrap();
        let one = TruthTable::constant(domain, 1.0);
        let out = count_dependent_boollinear(&one, boollinear_canonical_xi(4, 3)).unwrap();
        assert_eq!(out.count, 0);

        // The ±1 indicator of one predicate's positive set flags that
        // predicate as dependent.
        let class = PredicateClass::NormalizedBoolLinear { n: 4, p: 3 };
        let f = class.member(7);
        let g = TruthTable::pm_one_of(&f, DEFAULT_DOMAIN_CAP).unwrap();
        let out = count_dependent_boollinear(&g, boollinear_canonical_xi(4, 3)).unwrap();
        assert!(out.count >= 1);
        assert!((out.count as f64) <= out.bound);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn parseval_holds(seed in 0u64..1000) {
            let g = random_pm_table(8, seed);
            let spec = wht(&g).unwrap();
            prop_assert!(spec.parseval_gap(&g) < 1e-9);
        }

        #[test]
        fn counts_formula_matches_wht(seed in 0u64..1000, s_raw in 1u64..(1 << 9)) {
            let g = random_pm_table(9, seed);
            let s = BitVector::from_index(9, s_raw);
            let counts = ParityCoefficientCounts::from_table(&g, &s).unwrap();
            let spec = wht(&g).unwrap();
            prop_assert!((parity_coefficient_from_counts(&counts) - spec.at(s_raw)).abs() < 1e-12);
        }

        #[test]
        fn large_coefficients_obey_parseval_counting(seed in 0u64..1000) {
            let g = random_pm_table(8, seed);
            let spec = wht(&g).unwrap();
            let tau = 0.2;
            let over = spec.coefficients().iter().filter(|c| c.abs() > tau).count() as f64;
            prop_assert!(over <= 1.0 / (tau * tau));
        }
    }
}
