//! Planted instances: graphs built as a known weighted sum of cliques.
//!
//! Randomness comes from PCG-XSL-RR-128/64 (`rand_pcg::Pcg64`) seeded with a 64-bit
//! value; per-instance seeds are derived with SplitMix64 so a corpus is reproducible
//! from its base seed alone.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use thiserror::Error;

use crate::instance::{Rational, VertexId, WeightedGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub k_true: usize,
    /// Inclusive clique size range.
    pub size_range: (usize, usize),
    /// Inclusive integer clique weight range.
    pub weight_range: (i64, i64),
    /// 0 draws members uniformly; larger values favour vertices already used.
    pub overlap_bias: f64,
    pub seed: u64,
}

impl GenSpec {
    fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidSpec(m.to_string()));
        if self.k_true == 0 {
            return bad("k_true must be at least 1");
        }
        let (lo, hi) = self.size_range;
        if lo < 2 || lo > hi {
            return bad("clique sizes need 2 <= min <= max");
        }
        if hi > self.n {
            return bad("n is smaller than the largest clique size");
        }
        let (wl, wh) = self.weight_range;
        if wl < 1 || wl > wh {
            return bad("clique weights need 1 <= min <= max");
        }
        if !(0.0..=1.0).contains(&self.overlap_bias) {
            return bad("overlap_bias must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedInstance {
    pub graph: WeightedGraph,
    /// Planted cliques with their weights; a witness for `k_true`.
    pub planted: Vec<(Vec<VertexId>, Rational)>,
    pub k_true: usize,
    /// Vertices in no planted clique.
    pub isolated: Vec<VertexId>,
}

impl PlantedInstance {
    /// Sums the given weighted cliques onto a graph with `n` vertices.
    ///
    /// Panics if a clique has fewer than two members, a repeated or out-of-range member,
    /// or a non-positive weight.
    pub fn from_cliques(n: usize, planted: Vec<(Vec<VertexId>, Rational)>) -> PlantedInstance {
        let mut weights = vec![Rational::zero(); n * n];
        let mut used = vec![false; n];
        for (members, w) in &planted {
            assert!(members.len() >= 2 && w.is_positive(), "bad planted clique");
            for (x, &u) in members.iter().enumerate() {
                used[u] = true;
                for &v in &members[x + 1..] {
                    assert_ne!(u, v, "repeated clique member");
                    weights[u.min(v) * n + u.max(v)] += *w;
                }
            }
        }
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter_map(|(u, v)| {
                let w = weights[u * n + v];
                w.is_positive().then_some((u, v, w))
            })
            .collect();
        let graph = WeightedGraph::new(n, edges).expect("planted graph is valid");
        PlantedInstance {
            graph,
            k_true: planted.len(),
            planted,
            isolated: (0..n).filter(|&v| !used[v]).collect(),
        }
    }

    /// Drops isolated vertices and renumbers the rest.
    pub fn pruned(&self) -> PlantedInstance {
        let keep: Vec<VertexId> = (0..self.graph.n())
            .filter(|&v| self.graph.degree(v) > 0)
            .collect();
        let mut index = vec![usize::MAX; self.graph.n()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let planted = self
            .planted
            .iter()
            .map(|(m, w)| (m.iter().map(|&v| index[v]).collect(), *w))
            .collect();
        PlantedInstance {
            graph: self.graph.induced(&keep),
            planted,
            k_true: self.k_true,
            isolated: Vec::new(),
        }
    }
}

/// Draws `k_true` cliques and sums their weights onto the edges.
pub fn generate(spec: &GenSpec) -> Result<PlantedInstance, GenError> {
    spec.validate()?;
    let mut rng = Pcg64::seed_from_u64(spec.seed);
    let n = spec.n;
    let mut used = vec![0u32; n];
    let mut planted = Vec::with_capacity(spec.k_true);
    for _ in 0..spec.k_true {
        let size = rng.gen_range(spec.size_range.0..=spec.size_range.1);
        let weight = rng.gen_range(spec.weight_range.0..=spec.weight_range.1);
        let mut members = sample_members(&mut rng, &used, size, spec.overlap_bias);
        members.sort_unstable();
        for &v in &members {
            used[v] += 1;
        }
        planted.push((members, Rational::from_integer(weight as i128)));
    }

    Ok(PlantedInstance::from_cliques(n, planted))
}

/// Weighted sampling without replacement; weight of `v` is `1 + bias * used[v]`.
fn sample_members(rng: &mut Pcg64, used: &[u32], size: usize, bias: f64) -> Vec<VertexId> {
    let mut pool: Vec<(VertexId, f64)> = used
        .iter()
        .enumerate()
        .map(|(v, &u)| (v, 1.0 + bias * u as f64))
        .collect();
    let mut out = Vec::with_capacity(size);
    for _ in 0..size {
        let total: f64 = pool.iter().map(|p| p.1).sum();
        let mut target = rng.gen::<f64>() * total;
        let mut pick = pool.len() - 1;
        for (i, p) in pool.iter().enumerate() {
            if target < p.1 {
                pick = i;
                break;
            }
            target -= p.1;
        }
        out.push(pool.swap_remove(pick).0);
    }
    out
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of instance `i` for planted size `k` under base seed `seed`.
pub fn derive_seed(seed: u64, k: usize, i: usize) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(k as u64)) ^ i as u64)
}

/// `⌈m · k⌉` for a positive rational multiplier.
pub fn k_in_for(multiplier: Rational, k_true: usize) -> usize {
    let x = multiplier * Rational::from_integer(k_true as i128);
    x.ceil().to_integer() as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: String,
    pub instance: PlantedInstance,
    pub k_in: usize,
    pub multiplier: Rational,
}

/// Builds `instances_per_k` planted instances for each `k`, each paired with every
/// multiplier's input budget `⌈m · k⌉`.
pub fn corpus(
    base: &GenSpec,
    k_values: &[usize],
    instances_per_k: usize,
    kin_multipliers: &[Rational],
) -> Result<Vec<CorpusEntry>, GenError> {
    if let Some(m) = kin_multipliers.iter().find(|m| !m.is_positive()) {
        return Err(GenError::InvalidSpec(format!("multiplier {m} is not positive")));
    }
    let mut out = Vec::new();
    for &k in k_values {
        for i in 0..instances_per_k {
            let spec = GenSpec {
                k_true: k,
                seed: derive_seed(base.seed, k, i),
                ..base.clone()
            };
            let instance = generate(&spec)?;
            for &m in kin_multipliers {
                let k_in = k_in_for(m, k);
                out.push(CorpusEntry {
                    id: format!("k{k}_i{i}_m{}", multiplier_tag(m)),
                    instance: instance.clone(),
                    k_in,
                    multiplier: m,
                });
            }
        }
    }
    Ok(out)
}

fn multiplier_tag(m: Rational) -> String {
    if m.denom().is_one() {
        return m.numer().to_string();
    }
    // two decimals are enough to keep tags distinct for typical multipliers
    let hundredths = (m * Rational::from_integer(100)).round().to_integer();
    let (q, r) = hundredths.div_rem(&100);
    format!("{q}p{r:02}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::AnnotatedMatrix;
    use crate::oracle::verify;
    use crate::search::Decomposition;
    use std::collections::BTreeMap;

    fn base(n: usize, k: usize) -> GenSpec {
        GenSpec {
            n,
            k_true: k,
            size_range: (2, n),
            weight_range: (1, 3),
            overlap_bias: 0.5,
            seed: 42,
        }
    }

    #[test]
    fn single_full_clique() {
        let spec = GenSpec {
            size_range: (6, 6),
            weight_range: (2, 2),
            ..base(6, 1)
        };
        let inst = generate(&spec).unwrap();
        assert_eq!(inst.graph.m(), 15);
        assert!(inst.graph.edges().iter().all(|e| e.w == Rational::from_integer(2)));
        assert!(inst.isolated.is_empty());
    }

    #[test]
    fn explicit_cliques_sum_onto_edges() {
        let inst = PlantedInstance::from_cliques(
            3,
            vec![(vec![0, 1, 2], Rational::from_integer(1)), (vec![0, 1], Rational::from_integer(1))],
        );
        let w = |u, v| inst.graph.weight(u, v).unwrap();
        assert_eq!(w(0, 1), Rational::from_integer(2));
        assert_eq!(w(0, 2), Rational::from_integer(1));
        assert_eq!(w(1, 2), Rational::from_integer(1));
        assert_eq!(inst.k_true, 2);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let spec = base(12, 4);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = GenSpec { seed: 43, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn planted_witness_verifies() {
        for seed in 0..40 {
            let spec = GenSpec {
                seed,
                ..base(10, 1 + seed as usize % 5)
            };
            let inst = generate(&spec).unwrap();
            let a = AnnotatedMatrix::from_graph(&inst.graph, &BTreeMap::new()).unwrap();
            let d = Decomposition::from_cliques(inst.graph.n(), &inst.planted);
            assert!(verify(&a, d.rows(), d.gamma()).unwrap().ok);
            for v in &inst.isolated {
                assert_eq!(inst.graph.degree(*v), 0);
            }
            let p = inst.pruned();
            let a = AnnotatedMatrix::from_graph(&p.graph, &BTreeMap::new()).unwrap();
            let d = Decomposition::from_cliques(p.graph.n(), &p.planted);
            assert!(verify(&a, d.rows(), d.gamma()).unwrap().ok);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(generate(&GenSpec { size_range: (1, 3), ..base(5, 2) }).is_err());
        assert!(generate(&GenSpec { size_range: (2, 9), ..base(5, 2) }).is_err());
        assert!(generate(&GenSpec { k_true: 0, ..base(5, 2) }).is_err());
        assert!(generate(&GenSpec { weight_range: (0, 2), ..base(5, 2) }).is_err());
    }

    #[test]
    fn corpus_counts_and_budgets() {
        let ms = [Rational::from_integer(1), Rational::new(4, 5)];
        let c = corpus(&base(8, 1), &[5], 2, &ms).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c[0].k_in, 5);
        assert_eq!(c[1].k_in, 4);
        assert_eq!(c[0].instance, c[1].instance);
        assert_ne!(c[0].instance, c[2].instance);
        assert_eq!(c[1].id, "k5_i0_m0p80");
        assert!(corpus(&base(8, 1), &[5], 1, &[Rational::zero()]).is_err());
    }

    #[test]
    fn ceiling_budgets() {
        assert_eq!(k_in_for(Rational::new(4, 5), 5), 4);
        assert_eq!(k_in_for(Rational::new(8, 5), 5), 8);
        assert_eq!(k_in_for(Rational::new(2, 5), 7), 3);
        assert_eq!(k_in_for(Rational::new(4, 5), 7), 6);
    }
}
