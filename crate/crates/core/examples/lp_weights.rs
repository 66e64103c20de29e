//! Recover clique weights for a fixed membership matrix.
//!
//! Each constraint says that the weights of the cliques in `mask` add up to `rhs`.

use decaf::instance::Rational;
use decaf::lpfeas::{solve_feasibility, LpMode, LpProblem};

fn r(p: i128, q: i128) -> Rational {
    Rational::new(p, q)
}

fn show(title: &str, p: &LpProblem) -> Result<(), Box<dyn std::error::Error>> {
    for mode in [LpMode::Rational, LpMode::Float] {
        match solve_feasibility(p, mode)? {
            Some(w) => {
                let shown: Vec<String> = w.as_slice().iter().map(|x| x.to_string()).collect();
                println!("{title:<22} {mode:?}: gamma = [{}]", shown.join(", "));
                assert!(p.is_satisfied_by(&w));
            }
            None => println!("{title:<22} {mode:?}: infeasible"),
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Triangle 0-1-2 with w(0,1) = 2: cliques {0,1,2} and {0,1}.
    let mut tri = LpProblem::new(2);
    tri.push(0b11, r(2, 1));
    tri.push(0b01, r(1, 1));
    tri.push(0b01, r(1, 1));
    show("triangle", &tri)?;

    let mut frac = LpProblem::new(3);
    frac.push(0b011, r(1, 2));
    frac.push(0b110, r(1, 3));
    frac.push(0b101, r(1, 4));
    show("pairwise sums", &frac)?;

    // Would need gamma_2 = -1.
    let mut neg = LpProblem::new(2);
    neg.push(0b01, r(2, 1));
    neg.push(0b11, r(1, 1));
    show("negative weight", &neg)?;

    // Some vertices are dominated: weights are not unique, any vertex of the polytope will do.
    let mut free = LpProblem::new(3);
    free.push(0b111, r(5, 1));
    free.push(0b011, r(3, 1));
    show("underdetermined", &free)?;
    Ok(())
}
