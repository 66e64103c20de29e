//! Compare every pipeline configuration with exhaustive search on random small graphs.

use std::collections::BTreeMap;

use decaf::instance::{AnnotatedMatrix, WeightedGraph};
use decaf::prelude::*;
use decaf::search::VertexOrdering;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

fn configs() -> Vec<PipelineConfig> {
    let mut out = Vec::new();
    for kernel in KernelChoice::ALL {
        for srules in SRuleSet::ALL {
            for order in VertexOrdering::ALL {
                let mut cfg = PipelineConfig::decaf();
                cfg.kernel = kernel;
                srules.apply(&mut cfg.search, Some(order));
                out.push(cfg);
            }
        }
    }
    out
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = Pcg64::seed_from_u64(3);
    let configs = configs();
    let mut disagreements = 0;
    for trial in 0..40 {
        let n = rng.gen_range(3..=6);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.6) {
                    edges.push((i, j, Rational::from_integer(rng.gen_range(1..=2))));
                }
            }
        }
        let graph = WeightedGraph::new(n, edges)?;
        let none = BTreeMap::new();
        let a = AnnotatedMatrix::from_graph(&graph, &none)?;
        let limits = OracleLimits { max_n: 6, max_k: 3 };
        let truth = minimal_k(&a, 3, limits)?;
        for k in 1..=3 {
            let expect = truth.is_some_and(|t| t <= k);
            for cfg in &configs {
                let got = solve(&graph, &none, k, cfg)?.outcome.is_yes();
                if got != expect {
                    disagreements += 1;
                    println!("trial {trial} k {k} {}: got {got}, oracle {expect}", cfg.label());
                }
            }
        }
        println!("trial {trial:>2}: n = {n}, m = {:>2}, minimal k = {truth:?}", graph.m());
    }
    println!("{} configurations, {disagreements} disagreements", configs.len());
    Ok(())
}
