//! Race several configurations over a fresh planted corpus and summarise.
//!
//! ```text
//! cargo run --release --example compare_configs -- 4 2
//! ```
//! The arguments are the largest planted k and the number of worker threads.

use std::time::Duration;

use decaf::bench::{run_bench, summarize, BenchConfig, BenchInstance};
use decaf::io::write_bench_csv;
use decaf::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let k_max: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let jobs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let base = GenSpec {
        n: 120,
        k_true: 1,
        size_range: (5, 30),
        weight_range: (1, 3),
        overlap_bias: 0.5,
        seed: 2024,
    };
    let ks: Vec<usize> = (3..=k_max).collect();
    let entries = corpus(&base, &ks, 3, &[Rational::from_integer(1), Rational::new(4, 5)])?;
    let instances: Vec<BenchInstance> = entries.iter().map(BenchInstance::from).collect();
    let configs = BenchConfig::parse_list("decaf,cricca-star,cricca,decaf:push_front:012:sym")?;

    let records = run_bench(&instances, &configs, Some(Duration::from_secs(10)), jobs)?;
    println!("{}", summarize(&records));

    let path = std::env::temp_dir().join("decaf-bench.csv");
    let mut file = std::fs::File::create(&path)?;
    write_bench_csv(&mut file, &records)?;
    println!("{} rows in {}", records.len(), path.display());
    Ok(())
}
