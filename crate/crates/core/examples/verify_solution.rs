//! Check a hand-written solution and a corrupted copy of it.

use decaf::instance::AnnotatedMatrix;
use decaf::prelude::*;

const INSTANCE: &str = "\
ewcd 1 4 5
e 0 1 3
e 0 2 1
e 1 2 1
e 1 3 2
e 2 3 0.5
a 3 2.5
";

const SOLUTION: &str = "\
yes
c 1 0 1 2
c 2 0 1
c 2 1 3
c 0.5 2 3
";

fn check(label: &str, a: &AnnotatedMatrix, sol: &SolutionFile) -> Result<(), Box<dyn std::error::Error>> {
    let d = sol.to_decomposition(a.n());
    let report = verify(a, d.rows(), d.gamma())?;
    match report.first_violation {
        None => println!("{label}: ok"),
        Some(v) => println!("{label}: entry ({}, {}) is {}, cliques give {}", v.i, v.j, v.rhs, v.lhs),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (graph, annotations) = parse_instance(INSTANCE)?;
    let a = AnnotatedMatrix::from_graph(&graph, &annotations)?;
    let sol = parse_solution(SOLUTION)?;
    check("as written", &a, &sol)?;

    let mut bad = sol.clone();
    bad.cliques[1].1 = Rational::new(3, 2);
    check("perturbed", &a, &bad)?;

    let run = solve(&graph, &annotations, 4, &PipelineConfig::decaf())?;
    println!("solver says {} with k = 4", run.outcome.kind().name());
    Ok(())
}
