//! Concentration bounds, sample-size planning and statistical distance.

use std::collections::BTreeMap;

use crate::{Error, Result};

/// Hoeffding tail `e^{-2 n eps^2}` for the mean of `num_samples` bounded
/// draws deviating by `deviation`.
pub fn hoeffding_tail(num_samples: u64, deviation: f64) -> Result<f64> {
    if num_samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    if !(deviation > 0.0 && deviation < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "deviation {deviation} out of range (0, 1/2)"
        )));
    }
    Ok((-2.0 * num_samples as f64 * deviation * deviation).exp())
}

/// Named per-query sample-size plans. Both drive the error below
/// `failure_prob` for a mean estimated to within `xi0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplePlan {
    /// `ceil(2 ln(1/fp) / xi0^2)` — the breaker's batch size.
    BreakerEstimate,
    /// `ceil(9 ln(1/fp) / (2 xi^2))` — the reduction's cube-mean batch size.
    ReductionCubeMean,
}

pub fn required_samples(plan: SamplePlan, xi0: f64, failure_prob: f64) -> Result<u64> {
    if !(xi0 > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {xi0} must be positive")));
    }
    if !(failure_prob > 0.0 && failure_prob < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "failure probability {failure_prob} out of (0,1)"
        )));
    }
    let ln = (1.0 / failure_prob).ln();
    let m = match plan {
        SamplePlan::BreakerEstimate => 2.0 * ln / (xi0 * xi0),
        SamplePlan::ReductionCubeMean => 9.0 * ln / (2.0 * xi0 * xi0),
    };
    Ok(m.ceil() as u64)
}

/// A finite probability mass function over `u64` support points.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    entries: BTreeMap<u64, f64>,
}

impl Pmf {
    pub fn new(entries: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (x, p) in entries {
            if !(p >= 0.0) {
                return Err(Error::InvalidArgument(format!("negative probability {p}")));
            }
            *map.entry(x).or_insert(0.0) += p;
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Pmf { entries: map })
    }

    pub fn uniform(support: &[u64]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidArgument("empty support".into()));
        }
        let p = 1.0 / support.len() as f64;
        Self::new(support.iter().map(|&x| (x, p)))
    }

    pub fn prob(&self, x: u64) -> f64 {
        self.entries.get(&x).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.entries.iter().map(|(&x, &p)| (x, p))
    }

    pub fn event_prob(&self, event: impl Fn(u64) -> bool) -> f64 {
        self.entries
            .iter()
            .filter(|(&x, _)| event(x))
            .map(|(_, &p)| p)
            .sum()
    }

    /// Product distribution, with pair `(a, b)` packed as `a << 32 | b`.
    pub fn product(&self, other: &Pmf) -> Result<Pmf> {
        let mut entries = Vec::with_capacity(self.entries.len() * other.entries.len());
        for (&a, &pa) in &self.entries {
            if a >= 1 << 32 {
                return Err(Error::InvalidArgument(
                    "product support points must fit 32 bits".into(),
                ));
            }
            for (&b, &pb) in &other.entries {
                if b >= 1 << 32 {
                    return Err(Error::InvalidArgument(
                        "product support points must fit 32 bits".into(),
                    ));
                }
                entries.push((a << 32 | b, pa * pb));
            }
        }
        // The products need not sum to exactly 1 in floating point; rebuild
        // without the normalization check.
        let mut map = BTreeMap::new();
        for (x, p) in entries {
            *map.entry(x).or_insert(0.0) += p;
        }
        Ok(Pmf { entries: map })
    }
}

/// Half the L1 distance between two finite distributions.
pub fn statistical_distance(a: &Pmf, b: &Pmf) -> f64 {
    let mut keys: Vec<u64> = a.entries.keys().chain(b.entries.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    0.5 * keys.iter().map(|&x| (a.prob(x) - b.prob(x)).abs()).sum::<f64>()
}

/// A continuous uniform distribution over `[center - half_width, center + half_width]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformInterval {
    pub center: f64,
    pub half_width: f64,
}

impl UniformInterval {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "half width {half_width} must be positive"
            )));
        }
        Ok(UniformInterval { center, half_width })
    }

    pub fn density(&self, x: f64) -> f64 {
        if (x - self.center).abs() <= self.half_width {
            1.0 / (2.0 * self.half_width)
        } else {
            0.0
        }
    }
}

/// Exact statistical distance between two equal-length uniform intervals:
/// `min(1, |c1 - c2| / length)`, never above the displacement bound.
pub fn uniform_interval_sd(d1: &UniformInterval, d2: &UniformInterval) -> Result<f64> {
    let rel = (d1.half_width - d2.half_width).abs() / d1.half_width.max(d2.half_width);
    if rel > 1e-12 {
        return Err(Error::Precondition(format!(
            "interval lengths differ: {} vs {}",
            2.0 * d1.half_width,
            2.0 * d2.half_width
        )));
    }
    Ok(((d1.center - d2.center).abs() / (2.0 * d1.half_width)).min(1.0))
}

/// Midpoint-rule integral of `|d1 - d2| / 2` — the independent cross-check
/// for [`uniform_interval_sd`].
pub fn uniform_interval_sd_by_integration(
    d1: &UniformInterval,
    d2: &UniformInterval,
    steps: u64,
) -> f64 {
    let lo = (d1.center - d1.half_width).min(d2.center - d2.half_width) - 1e-9;
    let hi = (d1.center + d1.half_width).max(d2.center + d2.half_width) + 1e-9;
    let h = (hi - lo) / steps as f64;
    let mut acc = 0.0;
    for k in 0..steps {
        let x = lo + (k as f64 + 0.5) * h;
        acc += (d1.density(x) - d2.density(x)).abs();
    }
    0.5 * acc * h
}
