//! Degree distributions, their neighbor/excess transforms, and contiguous
//! equal-mass group partitions.
//!
//! Degree classes are dense-indexed from `k_min` to `k_max`; classes with
//! zero probability are retained so that every degree in the range has a
//! compartment.

use crate::{Error, Result};

/// Probability mass function over the degree classes `[k_min, k_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    k_min: usize,
    k_max: usize,
    pmf: Vec<f64>,
}

impl DegreeDistribution {
    /// Builds a distribution from an explicit pmf over `[k_min, k_min + pmf.len() - 1]`.
    pub fn from_pmf(k_min: usize, pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidDistribution("empty degree range".into()));
        }
        if pmf.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidDistribution(
                "pmf entries must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "pmf sums to {total}, expected 1"
            )));
        }
        let k_max = k_min + pmf.len() - 1;
        let mut dist = Self { k_min, k_max, pmf };
        dist.renormalize();
        Ok(dist)
    }

    /// Poisson(λ) restricted to `[k_min, k_max]` and renormalized.
    pub fn truncated_poisson(lambda: f64, k_min: usize, k_max: usize) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "poisson rate must be positive, got {lambda}"
            )));
        }
        if k_min > k_max {
            return Err(Error::InvalidDistribution(format!(
                "empty degree range [{k_min}, {k_max}]"
            )));
        }
        // Work in log space; the range never exceeds a few hundred classes,
        // so a running log-factorial is exact enough and dependency-free.
        let ln_lambda = lambda.ln();
        let mut ln_factorial = 0.0;
        for j in 1..=k_min {
            ln_factorial += (j as f64).ln();
        }
        let mut log_w = Vec::with_capacity(k_max - k_min + 1);
        for k in k_min..=k_max {
            if k > k_min {
                ln_factorial += (k as f64).ln();
            }
            log_w.push(k as f64 * ln_lambda - ln_factorial);
        }
        let peak = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pmf: Vec<f64> = log_w.iter().map(|&lw| (lw - peak).exp()).collect();
        let mut dist = Self { k_min, k_max, pmf };
        dist.renormalize();
        Ok(dist)
    }

    /// Power law `p_k ∝ k^{-γ}` on `[k_min, k_max]`.
    pub fn power_law(gamma: f64, k_min: usize, k_max: usize) -> Result<Self> {
        if k_min < 1 {
            return Err(Error::InvalidDistribution(
                "power law requires k_min >= 1".into(),
            ));
        }
        if k_min > k_max {
            return Err(Error::InvalidDistribution(format!(
                "empty degree range [{k_min}, {k_max}]"
            )));
        }
        let pmf: Vec<f64> = (k_min..=k_max).map(|k| (k as f64).powf(-gamma)).collect();
        let mut dist = Self { k_min, k_max, pmf };
        dist.renormalize();
        Ok(dist)
    }

    fn renormalize(&mut self) {
        let total: f64 = self.pmf.iter().sum();
        for p in &mut self.pmf {
            *p /= total;
        }
    }

    pub fn k_min(&self) -> usize {
        self.k_min
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Number of degree classes.
    pub fn num_classes(&self) -> usize {
        self.pmf.len()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Probability of degree `k`; zero outside the support range.
    pub fn prob(&self, k: usize) -> f64 {
        if k < self.k_min || k > self.k_max {
            0.0
        } else {
            self.pmf[k - self.k_min]
        }
    }

    /// Degrees in ascending class order.
    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.k_min..=self.k_max
    }

    pub fn mean_degree(&self) -> f64 {
        self.degrees()
            .zip(&self.pmf)
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    /// Cumulative pmf, one entry per degree class.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut cum = Vec::with_capacity(self.pmf.len());
        let mut acc = 0.0;
        for &p in &self.pmf {
            acc += p;
            cum.push(acc);
        }
        cum
    }
}

/// Neighbor degree distribution `r_k = k p_k / k̄` and excess degree
/// distribution `q_k = r_{k+1}`, indexed like the parent distribution.
#[derive(Debug, Clone)]
pub struct NeighborDistributions {
    k_min: usize,
    r: Vec<f64>,
    q: Vec<f64>,
    mean_degree: f64,
}

impl NeighborDistributions {
    pub fn from_distribution(dist: &DegreeDistribution) -> Result<Self> {
        let mean_degree = dist.mean_degree();
        if mean_degree <= 0.0 {
            return Err(Error::InvalidDistribution(
                "mean degree is zero; neighbor distribution undefined".into(),
            ));
        }
        let r: Vec<f64> = dist
            .degrees()
            .zip(dist.pmf())
            .map(|(k, p)| k as f64 * p / mean_degree)
            .collect();
        let mut q = vec![0.0; r.len()];
        // q_k = r_{k+1}; the top class has no excess edge, so q there is 0.
        let len = r.len();
        q[..len - 1].copy_from_slice(&r[1..]);
        Ok(Self {
            k_min: dist.k_min(),
            r,
            q,
            mean_degree,
        })
    }

    pub fn neighbor_pmf(&self) -> &[f64] {
        &self.r
    }

    pub fn excess_pmf(&self) -> &[f64] {
        &self.q
    }

    pub fn mean_degree(&self) -> f64 {
        self.mean_degree
    }

    pub fn k_min(&self) -> usize {
        self.k_min
    }
}

/// Contiguous assignment of degree classes to `M` control groups.
///
/// `boundaries` holds `M + 1` ascending values `k̃_0 .. k̃_M` with
/// `k̃_0 = k_min - 1` and `k̃_M = k_max`; group `m` covers degrees
/// `k̃_m + 1 ..= k̃_{m+1}` (zero-indexed groups).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPartition {
    boundaries: Vec<i64>,
    masses: Vec<f64>,
    group_mean_degrees: Vec<f64>,
    k_min: usize,
}

impl GroupPartition {
    /// Splits the degree classes into `num_groups` contiguous groups of
    /// roughly equal probability mass.
    ///
    /// Walking degrees in ascending order, group `m` closes at the class
    /// where the cumulative mass crosses `m / M`; the crossing class goes to
    /// the earlier group exactly when that leaves the cumulative mass at
    /// least as close to `m / M` as stopping one class sooner would.
    pub fn equal_mass(dist: &DegreeDistribution, num_groups: usize) -> Result<Self> {
        if num_groups == 0 {
            return Err(Error::InvalidPartition("need at least one group".into()));
        }
        let nonempty = dist.pmf().iter().filter(|&&p| p > 0.0).count();
        if num_groups > nonempty {
            return Err(Error::InvalidPartition(format!(
                "{num_groups} groups requested but only {nonempty} degree classes carry mass"
            )));
        }

        let k_min = dist.k_min() as i64;
        let k_max = dist.k_max() as i64;
        let m_total = num_groups as f64;
        let mut boundaries = Vec::with_capacity(num_groups + 1);
        boundaries.push(k_min - 1);

        let mut cum = 0.0;
        let mut group = 1usize;
        for (k, &p) in dist.degrees().zip(dist.pmf()) {
            let k = k as i64;
            let cum_after = cum + p;
            if group < num_groups {
                let target = group as f64 / m_total;
                if cum_after >= target {
                    let include = (cum_after - target).abs() <= (cum - target).abs();
                    let mut boundary = if include { k } else { k - 1 };
                    // Keep groups nonempty on both sides of the cut.
                    let prev = *boundaries.last().unwrap();
                    boundary = boundary.max(prev + 1);
                    boundary = boundary.min(k_max - (num_groups - group) as i64);
                    boundaries.push(boundary);
                    group += 1;
                }
            }
            cum = cum_after;
        }
        while boundaries.len() < num_groups {
            let prev = *boundaries.last().unwrap();
            boundaries.push(prev + 1);
        }
        boundaries.push(k_max);

        Self::from_boundaries(dist, boundaries)
    }

    /// Builds a partition from explicit boundaries `k̃_0 .. k̃_M`.
    pub fn from_boundaries(dist: &DegreeDistribution, boundaries: Vec<i64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidPartition(
                "boundaries must delimit at least one group".into(),
            ));
        }
        if boundaries[0] != dist.k_min() as i64 - 1 {
            return Err(Error::InvalidPartition(format!(
                "first boundary must be k_min - 1 = {}",
                dist.k_min() as i64 - 1
            )));
        }
        if *boundaries.last().unwrap() != dist.k_max() as i64 {
            return Err(Error::InvalidPartition(format!(
                "last boundary must be k_max = {}",
                dist.k_max()
            )));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(
                "boundaries must be strictly increasing".into(),
            ));
        }

        let num_groups = boundaries.len() - 1;
        let mut masses = vec![0.0; num_groups];
        let mut weighted = vec![0.0; num_groups];
        for (m, w) in boundaries.windows(2).enumerate() {
            for k in (w[0] + 1)..=w[1] {
                let p = dist.prob(k as usize);
                masses[m] += p;
                weighted[m] += k as f64 * p;
            }
        }
        let group_mean_degrees = masses
            .iter()
            .zip(&weighted)
            .map(|(&g, &w)| if g > 0.0 { w / g } else { f64::NAN })
            .collect();

        Ok(Self {
            boundaries,
            masses,
            group_mean_degrees,
            k_min: dist.k_min(),
        })
    }

    pub fn num_groups(&self) -> usize {
        self.masses.len()
    }

    /// Boundary degrees `k̃_0 .. k̃_M`.
    pub fn boundaries(&self) -> &[i64] {
        &self.boundaries
    }

    /// Per-group probability masses `g_m`.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Cached per-group mean degrees `k̄_m` (NaN for a zero-mass group).
    pub fn group_mean_degrees(&self) -> &[f64] {
        &self.group_mean_degrees
    }

    /// Inclusive degree range of group `m`.
    pub fn group_range(&self, m: usize) -> (usize, usize) {
        (
            (self.boundaries[m] + 1) as usize,
            self.boundaries[m + 1] as usize,
        )
    }

    /// Group index of degree `k`.
    pub fn group_of_degree(&self, k: usize) -> usize {
        let k = k as i64;
        debug_assert!(k > self.boundaries[0] && k <= *self.boundaries.last().unwrap());
        match self.boundaries[1..].binary_search(&k) {
            Ok(idx) => idx,
            Err(idx) => idx,
        }
    }

    /// Group index per dense class index `k - k_min`.
    pub fn class_groups(&self, num_classes: usize) -> Vec<usize> {
        (0..num_classes)
            .map(|idx| self.group_of_degree(self.k_min + idx))
            .collect()
    }
}

/// Mean degree of each group, `k̄_m = Σ_{k∈K_m} k p_k / Σ_{k∈K_m} p_k`.
pub fn group_mean_degrees(dist: &DegreeDistribution, part: &GroupPartition) -> Result<Vec<f64>> {
    let mut means = Vec::with_capacity(part.num_groups());
    for m in 0..part.num_groups() {
        let (lo, hi) = part.group_range(m);
        let mass: f64 = (lo..=hi).map(|k| dist.prob(k)).sum();
        if mass <= 0.0 {
            return Err(Error::InvalidPartition(format!(
                "group {m} ({lo}..={hi}) has zero mass"
            )));
        }
        let weighted: f64 = (lo..=hi).map(|k| k as f64 * dist.prob(k)).sum();
        means.push(weighted / mass);
    }
    Ok(means)
}
