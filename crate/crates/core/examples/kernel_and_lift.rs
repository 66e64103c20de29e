//! Run the two kernels by hand, search the kernel, and lift the answer.
//!
//! A K_8 with a pendant path is reduced to a handful of annotated
//! representatives; the kernel solution is lifted back and verified on the input.

use decaf::instance::{AnnotatedMatrix, Rational, WeightedGraph};
use decaf::io::write_instance;
use decaf::kernel::{kernelize, lift_solution, KernelOutcome, KernelVariant};
use decaf::oracle::verify;
use decaf::search::{clique_decomp_ordered, order_vertices, SolveConfig, SolveOutcome, VertexOrdering};


fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one = Rational::from_integer(1);
    let mut edges = Vec::new();
    for i in 0..8 {
        for j in i + 1..8 {
            edges.push((i, j, one));
        }
    }
    edges.push((7, 8, one));
    edges.push((8, 9, one));
    let graph = WeightedGraph::new(10, edges)?;
    let a = AnnotatedMatrix::from_graph(&graph, &Default::default())?;
    let k = 3;

    for variant in [KernelVariant::Cricca, KernelVariant::Decaf] {
        let res = kernelize(&a, k, variant)?;
        println!(
            "{}: {} -> {} vertices, {} blocks, {} reductions",
            variant.name(),
            res.stats.n_before,
            res.stats.n_after,
            res.stats.block_count,
            res.stats.rule_applications
        );
        let (matrix, trace) = match res.outcome {
            KernelOutcome::Reduced { matrix, trace } => (matrix, trace),
            KernelOutcome::No(why) => {
                println!("  rejected: {why}");
                continue;
            }
        };
        if matrix.n() <= 6 {
            let (g, ann) = matrix.to_graph();
            for line in write_instance(&g, &ann).lines() {
                println!("  | {line}");
            }
        }

        let mut cfg = SolveConfig::default();
        cfg.ordering = VertexOrdering::PushFront;
        let order = order_vertices(&trace, cfg.ordering);
        let (outcome, stats) = clique_decomp_ordered(&matrix, k, &cfg, &order)?;
        let SolveOutcome::Yes(kernel_sol) = outcome else {
            println!("  search says {}", outcome.kind().name());
            continue;
        };
        let lifted = lift_solution(&kernel_sol, &trace)?;
        let report = verify(&a, lifted.rows(), lifted.gamma())?;
        println!("  {} LP runs, lifted solution verifies: {}", stats.lp_runs, report.ok);
        for (members, w) in lifted.cliques() {
            println!("  clique {members:?} weight {w}");
        }
    }
    Ok(())
}

