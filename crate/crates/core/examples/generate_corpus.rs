//! Plant cliques, write a corpus with truth sidecars, and read it back.
//!
//! ```text
//! cargo run --example generate_corpus -- /tmp/corpus
//! ```

use std::path::PathBuf;

use decaf::bench::{load_corpus, write_corpus};
use decaf::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("decaf-corpus"));

    let spec = GenSpec {
        n: 40,
        k_true: 4,
        size_range: (3, 12),
        weight_range: (1, 3),
        overlap_bias: 0.5,
        seed: 11,
    };
    let inst = generate(&spec)?;
    println!("one instance: n = {}, m = {}, {} isolated", inst.graph.n(), inst.graph.m(), inst.isolated.len());
    for (members, w) in &inst.planted {
        println!("  planted weight {w}: {members:?}");
    }

    let multipliers = [Rational::from_integer(1), Rational::new(4, 5), Rational::new(3, 5)];
    let entries = corpus(&spec, &[3, 4, 5], 2, &multipliers)?;
    write_corpus(&dir, &entries)?;
    println!("wrote {} instances to {}", entries.len(), dir.display());

    for inst in load_corpus(&dir, None)?.iter().take(6) {
        println!(
            "  {:<14} n = {:>3}  k_true = {:?}  k_in = {}",
            inst.id,
            inst.graph.n(),
            inst.k_true,
            inst.k_in
        );
    }
    Ok(())
}
