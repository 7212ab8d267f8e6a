//! Random partitions by sequential prediction.
//!
//! All samplers draw from a [`RandomSource`], a seeded ChaCha8 stream. Equal
//! seeds give bit-identical partitions; independent workers should take
//! distinct [`RandomSource::substream`]s.
//!
//! ```
//! use gibbs_partitions::samplers::{crp_sample, RandomSource};
//!
//! let mut src = RandomSource::new(7);
//! let p = crp_sample(0.5, 1.0, 10, &mut src).unwrap();
//! assert_eq!(p.n(), 10);
//! ```

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::combinatorics::{PartitionShape, SetPartition};
use crate::eppf::{pd_v_weights, GibbsModel};
use crate::error::{invalid, Error, Result};

/// Seeded, reproducible random stream.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fresh independent stream `index` for the same seed.
    pub fn substream(&self, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        Self { seed: self.seed, rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Block sizes and block labels of a partially seated sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictiveState {
    sizes: Vec<usize>,
    labels: Vec<usize>,
}

impl PredictiveState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Seats the next element in block `j`; `j == k` opens a new block.
    pub fn seat(&mut self, j: usize) {
        assert!(j <= self.sizes.len(), "block {j} does not exist");
        if j == self.sizes.len() {
            self.sizes.push(0);
        }
        self.sizes[j] += 1;
        self.labels.push(j);
    }

    pub fn into_partition(self) -> SetPartition {
        SetPartition::from_labels(&self.labels)
    }
}

// index of the cell of `weights` that `u * total` falls in
fn pick(weights: &[f64], total: f64, u: f64) -> usize {
    let target = u * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    // rounding: fall back to the last cell with positive weight
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Two-parameter Chinese restaurant: element `i + 1` joins block `j` with
/// probability `(n_j - alpha) / (i + theta)` and opens a new block with
/// probability `(theta + k alpha) / (i + theta)`.
pub fn crp_sample(alpha: f64, theta: f64, n: usize, src: &mut RandomSource) -> Result<SetPartition> {
    // parameter validation shared with the weights
    pd_v_weights(alpha, theta, 1)?;
    if n == 0 {
        return Err(invalid("n", 0.0, "need at least one element"));
    }
    let fisher_atoms = (alpha < 0.0).then(|| (theta / -alpha).round() as usize);
    let mut state = PredictiveState::new();
    state.seat(0);
    let mut weights = Vec::new();
    for i in 1..n {
        let k = state.k();
        weights.clear();
        weights.extend(state.sizes().iter().map(|&nj| nj as f64 - alpha));
        weights.push(match fisher_atoms {
            Some(m) => -alpha * m.saturating_sub(k) as f64,
            None => theta + k as f64 * alpha,
        });
        let j = pick(&weights, i as f64 + theta, src.uniform());
        state.seat(j);
    }
    Ok(state.into_partition())
}

/// Sequential sampler driven by a V-table: join block `j` with probability
/// `(n_j - alpha) V(n+1, k) / V(n, k)`, open a new one with probability
/// `V(n+1, k+1) / V(n, k)`. Needs weights through `n`.
pub fn gibbs_predictive_sample(model: &GibbsModel, n: usize, src: &mut RandomSource) -> Result<SetPartition> {
    if n == 0 {
        return Err(invalid("n", 0.0, "need at least one element"));
    }
    if n > model.max_n() {
        return Err(Error::TableTooSmall {
            requested: n,
            available: model.max_n(),
        });
    }
    let mut state = PredictiveState::new();
    state.seat(0);
    for _ in 1..n {
        let probs = model.predictive_probabilities(state.sizes())?;
        let total: f64 = probs.iter().sum();
        let j = pick(&probs, total, src.uniform());
        state.seat(j);
    }
    Ok(state.into_partition())
}

/// Symmetric Dirichlet partition with `m` atoms: weights `G_i / G` with
/// `G_i` iid Gamma(-alpha, 1), then `n` iid labels. Its law is
/// PD(alpha, m |alpha|).
pub fn fisher_sample(alpha: f64, m: usize, n: usize, src: &mut RandomSource) -> Result<SetPartition> {
    if !(alpha < 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", alpha, "Fisher model needs alpha < 0"));
    }
    if m == 0 {
        return Err(invalid("m", 0.0, "need at least one atom"));
    }
    if n == 0 {
        return Err(invalid("n", 0.0, "need at least one element"));
    }
    let gamma = Gamma::new(-alpha, 1.0).map_err(|_| invalid("alpha", alpha, "invalid Gamma shape"))?;
    let weights: Vec<f64> = (0..m).map(|_| gamma.sample(src)).collect();
    let total: f64 = weights.iter().sum();
    let labels: Vec<usize> = (0..n).map(|_| pick(&weights, total, src.uniform())).collect();
    Ok(SetPartition::from_labels(&labels))
}

/// Counts of each shape over `count` draws of `sampler`.
pub fn shape_histogram<F>(count: usize, src: &mut RandomSource, mut sampler: F) -> Result<BTreeMap<PartitionShape, u64>>
where
    F: FnMut(&mut RandomSource) -> Result<SetPartition>,
{
    let mut hist = BTreeMap::new();
    for _ in 0..count {
        *hist.entry(sampler(src)?.shape()).or_insert(0) += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{enumerate_set_partitions, partition_shapes};
    use crate::eppf::Eppf;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::HashMap;

    #[test]
    fn deterministic() {
        let draw = |seed| {
            let mut s = RandomSource::new(seed);
            (0..50).map(|_| crp_sample(0.3, 1.0, 12, &mut s).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
        let base = RandomSource::new(5);
        let (mut a, mut b) = (base.substream(1), base.substream(2));
        assert_ne!(a.next_u64(), b.next_u64());
        assert_eq!(base.substream(3).next_u64(), base.substream(3).next_u64());
    }

    #[test]
    fn single_element() {
        let mut s = RandomSource::new(0);
        for _ in 0..5 {
            assert_eq!(crp_sample(0.0, 1.0, 1, &mut s).unwrap().to_string(), "{{1}}");
        }
        assert!(crp_sample(0.0, 1.0, 0, &mut s).is_err());
        assert!(crp_sample(1.5, 1.0, 3, &mut s).is_err());
    }

    #[test]
    fn second_customer_opens_half_the_time() {
        let mut s = RandomSource::new(1);
        let count = 100_000;
        let opened = (0..count)
            .filter(|_| crp_sample(0.0, 1.0, 2, &mut s).unwrap().num_blocks() == 2)
            .count() as f64;
        let se = (0.25 / count as f64).sqrt();
        assert!((opened / count as f64 - 0.5).abs() < 4.0 * se);
    }

    fn within_four_sigma(hist: &BTreeMap<PartitionShape, u64>, count: usize, model: &dyn Eppf, n: usize) {
        for s in partition_shapes(n) {
            let p = model.eppf(&s).unwrap() * s.set_partition_count();
            let f = *hist.get(&s).unwrap_or(&0) as f64 / count as f64;
            let se = (p * (1.0 - p) / count as f64).sqrt();
            assert!((f - p).abs() <= 4.0 * se, "{s}: {f} vs {p}");
        }
    }

    #[test]
    fn crp_matches_eppf() {
        let model = pd_v_weights(0.5, 0.5, 5).unwrap();
        let mut s = RandomSource::new(2);
        let count = 100_000;
        let hist = shape_histogram(count, &mut s, |r| crp_sample(0.5, 0.5, 5, r)).unwrap();
        within_four_sigma(&hist, count, &model, 5);
    }

    #[test]
    fn predictive_sampler_tracks_crp() {
        // one uniform per step and the same cell order: the two samplers
        // make the same draws up to rounding at cell boundaries
        let model = pd_v_weights(0.3, 1.7, 8).unwrap();
        let (mut a, mut b) = (RandomSource::new(9), RandomSource::new(9));
        let mismatches = (0..10_000)
            .filter(|_| crp_sample(0.3, 1.7, 8, &mut a).unwrap() != gibbs_predictive_sample(&model, 8, &mut b).unwrap())
            .count();
        assert!(mismatches <= 1);
    }

    #[test]
    fn predictive_sampler_errors() {
        let model = pd_v_weights(0.3, 1.7, 4).unwrap();
        let mut s = RandomSource::new(0);
        assert!(matches!(
            gibbs_predictive_sample(&model, 5, &mut s),
            Err(Error::TableTooSmall { .. })
        ));
    }

    #[test]
    fn fisher_bounds_and_law() {
        let mut s = RandomSource::new(3);
        for _ in 0..1000 {
            assert_eq!(fisher_sample(-0.7, 1, 6, &mut s).unwrap().num_blocks(), 1);
            assert!(fisher_sample(-1.0, 2, 6, &mut s).unwrap().num_blocks() <= 2);
        }
        let count = 100_000;
        let hist = shape_histogram(count, &mut s, |r| fisher_sample(-1.0, 2, 3, r)).unwrap();
        // Dirichlet(1, 1)-multinomial: Pr(one block) = 2 E[W^3] = 2 / 4
        let one = *hist.get(&PartitionShape::new(vec![3]).unwrap()).unwrap() as f64 / count as f64;
        assert!((one - 0.5).abs() < 4.0 * (0.25 / count as f64).sqrt());
        within_four_sigma(&hist, count, &pd_v_weights(-1.0, 2.0, 3).unwrap(), 3);
        assert!(fisher_sample(0.5, 2, 3, &mut s).is_err());
        assert!(fisher_sample(-0.5, 0, 3, &mut s).is_err());
    }

    #[test]
    fn gamma_variates_pass_ks() {
        use statrs::distribution::Gamma as GammaLaw;
        for shape in [0.5, 1.0, 3.0] {
            let mut s = RandomSource::new(4);
            let g = Gamma::new(shape, 1.0).unwrap();
            let mut x: Vec<f64> = (0..100_000).map(|_| g.sample(&mut s)).collect();
            x.sort_by(f64::total_cmp);
            let law = GammaLaw::new(shape, 1.0).unwrap();
            let n = x.len() as f64;
            let d = x
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let c = law.cdf(v);
                    (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
                })
                .fold(0.0, f64::max);
            // 0.1% critical value of the Kolmogorov distribution
            assert!(d * n.sqrt() < 1.95, "shape {shape}: D = {d}");
        }
    }

    #[test]
    fn exchangeable_within_shapes() {
        // set partitions sharing a shape must be equally likely
        let n = 4;
        let all: Vec<SetPartition> = enumerate_set_partitions(n).unwrap().collect();
        for seed in 0..20 {
            let mut s = RandomSource::new(1000 + seed);
            let mut counts: HashMap<SetPartition, f64> = HashMap::new();
            for _ in 0..100_000 {
                *counts.entry(crp_sample(0.4, 0.8, n, &mut s).unwrap()).or_insert(0.0) += 1.0;
            }
            let (mut stat, mut dof) = (0.0, 0.0);
            for sh in partition_shapes(n) {
                let class: Vec<f64> = all
                    .iter()
                    .filter(|p| p.shape() == sh)
                    .map(|p| *counts.get(p).unwrap_or(&0.0))
                    .collect();
                let mean = class.iter().sum::<f64>() / class.len() as f64;
                stat += class.iter().map(|c| (c - mean).powi(2) / mean).sum::<f64>();
                dof += class.len() as f64 - 1.0;
            }
            let p_value = 1.0 - ChiSquared::new(dof).unwrap().cdf(stat);
            assert!(p_value > 1e-4, "seed {seed}: p = {p_value}");
        }
    }
}
