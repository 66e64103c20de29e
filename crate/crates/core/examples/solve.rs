//! Decide a small instance with each preset and print the cliques.
//!
//! ```text
//! cargo run --example solve
//! cargo run --example solve -- path/to/instance.ewcd 4
//! ```

use decaf::prelude::*;

const DEMO: &str = "\
ewcd 1 5 7
# two triangles sharing vertex 2, the left one counted twice
e 0 1 2
e 0 2 2
e 1 2 2
e 2 3 1
e 2 4 1
e 3 4 1
e 1 3 1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let text = match args.first() {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEMO.to_string(),
    };
    let k: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(3);
    let (graph, annotations) = parse_instance(&text)?;
    println!("n = {}, m = {}, k = {k}", graph.n(), graph.m());

    for name in PipelineConfig::PRESETS {
        let cfg = PipelineConfig::preset(name).unwrap();
        let run = solve(&graph, &annotations, k, &cfg)?;
        println!(
            "{:<24} {:<8} kernel {:>3} -> {:>3}  lp runs {:>6}  {:?}",
            cfg.label(),
            run.outcome.kind().name(),
            run.n_preprocessed,
            run.n_kernel(),
            run.search.lp_runs,
            run.wall_time
        );
    }

    let run = solve(&graph, &annotations, k, &PipelineConfig::decaf())?;
    match run.outcome.decomposition() {
        Some(d) => {
            let annotated = |v| annotations.contains_key(&v);
            print!("{}", write_solution(&SolutionFile::from_decomposition(d, &annotated)));
        }
        None => println!("no decomposition with {k} cliques"),
    }
    Ok(())
}
