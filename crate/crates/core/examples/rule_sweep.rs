//! LP runs for every vertex ordering and search-rule subset on one planted instance.

use std::collections::BTreeMap;
use std::time::Duration;

use decaf::prelude::*;
use decaf::gen::derive_seed;
use decaf::search::VertexOrdering;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5);
    let inst = generate(&GenSpec {
        n: 150,
        k_true: k,
        size_range: (5, 30),
        weight_range: (1, 3),
        overlap_bias: 0.5,
        seed: derive_seed(5, k, 0),
    })?;
    let none = BTreeMap::new();
    println!("n = {}, m = {}, k = {k}", inst.graph.n(), inst.graph.m());
    println!("{:<8} {:<12} {:>8} {:>10} {:>9}", "kernel", "order", "rules", "lp runs", "outcome");
    for kernel in [KernelChoice::Cricca, KernelChoice::Decaf] {
        for order in VertexOrdering::ALL {
            for rules in SRuleSet::ALL {
                let mut cfg = PipelineConfig::decaf().with_timeout(Some(Duration::from_secs(5)));
                cfg.kernel = kernel;
                rules.apply(&mut cfg.search, Some(order));
                let run = solve(&inst.graph, &none, k, &cfg)?;
                println!(
                    "{:<8} {:<12} {:>8} {:>10} {:>9}",
                    kernel.name(),
                    order.name(),
                    rules.name(),
                    run.search.lp_runs,
                    run.outcome.kind().name()
                );
            }
        }
    }
    Ok(())
}
