//! Text formats: instances, solutions, ground-truth sidecars and benchmark CSV.
//!
//! Instance files:
//!
//! ```text
//! # comment
//! ewcd 1 <n> <m>
//! e <u> <v> <w>      (m edge lines, 0-based vertices)
//! a <v> <w>          (optional diagonal annotations)
//! ```
//!
//! Weights are integers, finite decimals (`2.5`) or fractions (`5/2`) and are kept exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Rational, VertexId, WeightedGraph};
use crate::search::{Decomposition, OutcomeKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected bench header: {0}")]
    BenchHeader(String),
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> Line<'a> {
    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    fn end_column(&self) -> usize {
        self.tokens
            .last()
            .map(|t| t.column + t.text.len())
            .unwrap_or(1)
    }

    fn expect_len(&self, len: usize, what: &str) -> Result<(), ParseError> {
        match self.tokens.len().cmp(&len) {
            std::cmp::Ordering::Equal => Ok(()),
            std::cmp::Ordering::Less => {
                Err(self.err(self.end_column(), format!("{what} line needs {} fields", len)))
            }
            std::cmp::Ordering::Greater => {
                Err(self.err(self.tokens[len].column, "unexpected trailing field"))
            }
        }
    }

    fn usize_at(&self, i: usize) -> Result<usize, ParseError> {
        let t = &self.tokens[i];
        t.text
            .parse()
            .map_err(|_| self.err(t.column, format!("expected a non-negative integer, got `{}`", t.text)))
    }

    fn rational_at(&self, i: usize) -> Result<Rational, ParseError> {
        let t = &self.tokens[i];
        parse_rational(t.text).ok_or_else(|| self.err(t.column, format!("bad number `{}`", t.text)))
    }
}

/// Splits into non-empty, non-comment lines with 1-based columns.
fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    tokens.push(Token {
                        text: &body[s..pos],
                        column: s + 1,
                    });
                    start = None;
                }
                _ => {}
            }
        }
        (!tokens.is_empty()).then_some(Line {
            number: i + 1,
            tokens,
        })
    })
}

/// Parses `7`, `-3`, `2.25` or `9/4` exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.parse().ok()?;
        let q: i128 = q.parse().ok()?;
        return (q > 0).then(|| Rational::new(p, q));
    }
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let all_digits = |x: &str| x.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int) || !all_digits(frac) || frac.len() > 30 {
        return None;
    }
    let numer: i128 = format!("{int}{frac}").parse().ok()?;
    let denom = 10i128.checked_pow(frac.len() as u32)?;
    let r = Rational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// Integers and finite decimals print as decimals, everything else as `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        return r.numer().to_string();
    }
    let mut d = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let Some(scaled) = 10i128
        .checked_pow(places)
        .and_then(|p| r.numer().checked_mul(p / r.denom()))
    else {
        return format!("{}/{}", r.numer(), r.denom());
    };
    let sign = if scaled < 0 { "-" } else { "" };
    let digits = format!("{:0>width$}", scaled.abs(), width = places as usize + 1);
    let (int, frac) = digits.split_at(digits.len() - places as usize);
    format!("{sign}{int}.{frac}")
}

pub type Annotations = BTreeMap<VertexId, Rational>;

pub fn parse_instance(text: &str) -> Result<(WeightedGraph, Annotations), ParseError> {
    let mut it = lines(text);
    let Some(header) = it.next() else {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: "missing `ewcd` header".into(),
        });
    };
    if header.tokens[0].text != "ewcd" {
        return Err(header.err(1, "expected `ewcd 1 <n> <m>` header"));
    }
    header.expect_len(4, "header")?;
    if header.tokens[1].text != "1" {
        return Err(header.err(header.tokens[1].column, "unsupported format version"));
    }
    let n = header.usize_at(2)?;
    let m = header.usize_at(3)?;

    let mut edges = Vec::with_capacity(m);
    let mut seen = std::collections::HashMap::new();
    let mut annotations = Annotations::new();
    let mut last = header.number;
    for line in it {
        last = line.number;
        match line.tokens[0].text {
            "e" => {
                line.expect_len(4, "edge")?;
                let u = line.usize_at(1)?;
                let v = line.usize_at(2)?;
                let w = line.rational_at(3)?;
                for (idx, x) in [(1, u), (2, v)] {
                    if x >= n {
                        return Err(line.err(line.tokens[idx].column, format!("vertex {x} out of range 0..{n}")));
                    }
                }
                if u == v {
                    return Err(line.err(line.tokens[2].column, "self-loop"));
                }
                if !w.is_positive() {
                    return Err(line.err(line.tokens[3].column, "edge weight must be positive"));
                }
                if let Some(first) = seen.insert((u.min(v), u.max(v)), line.number) {
                    return Err(line.err(1, format!("duplicate edge {{{u}, {v}}}, first given on line {first}")));
                }
                edges.push((u, v, w));
            }
            "a" => {
                line.expect_len(3, "annotation")?;
                let v = line.usize_at(1)?;
                let w = line.rational_at(2)?;
                if v >= n {
                    return Err(line.err(line.tokens[1].column, format!("vertex {v} out of range 0..{n}")));
                }
                if w.is_negative() {
                    return Err(line.err(line.tokens[2].column, "annotation must be non-negative"));
                }
                if annotations.insert(v, w).is_some() {
                    return Err(line.err(line.tokens[1].column, format!("vertex {v} annotated twice")));
                }
            }
            other => {
                return Err(line.err(1, format!("unknown record `{other}`")));
            }
        }
    }
    if edges.len() != m {
        return Err(ParseError {
            line: last,
            column: 1,
            message: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    let graph = WeightedGraph::new(n, edges).map_err(|e| ParseError {
        line: header.number,
        column: 1,
        message: e.to_string(),
    })?;
    Ok((graph, annotations))
}

pub fn write_instance(g: &WeightedGraph, annotations: &Annotations) -> String {
    let mut out = format!("ewcd 1 {} {}\n", g.n(), g.m());
    for e in g.edges() {
        let _ = writeln!(out, "e {} {} {}", e.u, e.v, format_rational(&e.w));
    }
    for (v, w) in annotations {
        let _ = writeln!(out, "a {v} {}", format_rational(w));
    }
    out
}

/// Contents of a solution file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolutionFile {
    pub outcome: OutcomeKind,
    /// Members in increasing order, with the clique weight.
    pub cliques: Vec<(Vec<VertexId>, Rational)>,
    pub stats: Vec<(String, String)>,
}

impl SolutionFile {
    /// Collects the cliques of `d` worth listing.
    ///
    /// Single-vertex cliques are listed only for vertices in `annotated`; others carry no
    /// information about edges.
    pub fn from_decomposition(d: &Decomposition, annotated: &dyn Fn(VertexId) -> bool) -> Self {
        let mut cliques: Vec<_> = d
            .cliques()
            .into_iter()
            .filter(|(m, _)| m.len() >= 2 || annotated(m[0]))
            .collect();
        sort_cliques(&mut cliques);
        SolutionFile {
            outcome: OutcomeKind::Yes,
            cliques,
            stats: Vec::new(),
        }
    }

    pub fn with_outcome(outcome: OutcomeKind) -> Self {
        SolutionFile {
            outcome,
            ..Default::default()
        }
    }

    pub fn stat(&self, key: &str) -> Option<&str> {
        self.stats.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_decomposition(&self, n: usize) -> Decomposition {
        Decomposition::from_cliques(n, &self.cliques)
    }
}

/// Descending size, then ascending members.
pub fn sort_cliques(cliques: &mut [(Vec<VertexId>, Rational)]) {
    cliques.sort_by(|a, b| {
        b.0.len()
            .cmp(&a.0.len())
            .then_with(|| a.0.cmp(&b.0))
            .then_with(|| a.1.cmp(&b.1))
    });
}

pub fn write_solution(sol: &SolutionFile) -> String {
    let mut out = format!("{}\n", sol.outcome.name());
    for (members, w) in &sol.cliques {
        let _ = write!(out, "c {}", format_rational(w));
        for v in members {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    for (k, v) in &sol.stats {
        let _ = writeln!(out, "s {k} {v}");
    }
    out
}

pub fn parse_solution(text: &str) -> Result<SolutionFile, ParseError> {
    let mut it = lines(text);
    let Some(first) = it.next() else {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: "empty solution file".into(),
        });
    };
    first.expect_len(1, "outcome")?;
    let outcome = match first.tokens[0].text {
        "yes" => OutcomeKind::Yes,
        "no" => OutcomeKind::No,
        "timeout" => OutcomeKind::Timeout,
        other => return Err(first.err(1, format!("unknown outcome `{other}`"))),
    };
    let mut sol = SolutionFile::with_outcome(outcome);
    for line in it {
        match line.tokens[0].text {
            "c" => {
                if line.tokens.len() < 3 {
                    return Err(line.err(line.end_column(), "clique line needs a weight and members"));
                }
                let w = line.rational_at(1)?;
                let members = (2..line.tokens.len())
                    .map(|i| line.usize_at(i))
                    .collect::<Result<Vec<_>, _>>()?;
                sol.cliques.push((members, w));
            }
            "s" => {
                line.expect_len(3, "stat")?;
                sol.stats
                    .push((line.tokens[1].text.to_string(), line.tokens[2].text.to_string()));
            }
            other => return Err(line.err(1, format!("unknown record `{other}`"))),
        }
    }
    Ok(sol)
}

/// Ground truth stored next to a generated instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truth {
    pub k_true: usize,
    pub k_in: usize,
    pub planted: Vec<(Vec<VertexId>, Rational)>,
}

pub fn write_truth(t: &Truth) -> String {
    let mut out = format!("truth 1\nk_true {}\nk_in {}\n", t.k_true, t.k_in);
    for (members, w) in &t.planted {
        let _ = write!(out, "c {}", format_rational(w));
        for v in members {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_truth(text: &str) -> Result<Truth, ParseError> {
    let mut it = lines(text);
    match it.next() {
        Some(l) if l.tokens.len() == 2 && l.tokens[0].text == "truth" && l.tokens[1].text == "1" => {}
        Some(l) => return Err(l.err(1, "expected `truth 1` header")),
        None => {
            return Err(ParseError {
                line: 1,
                column: 1,
                message: "empty truth file".into(),
            })
        }
    }
    let (mut k_true, mut k_in, mut planted) = (None, None, Vec::new());
    for line in it {
        match line.tokens[0].text {
            "k_true" => {
                line.expect_len(2, "k_true")?;
                k_true = Some(line.usize_at(1)?);
            }
            "k_in" => {
                line.expect_len(2, "k_in")?;
                k_in = Some(line.usize_at(1)?);
            }
            "c" => {
                if line.tokens.len() < 3 {
                    return Err(line.err(line.end_column(), "clique line needs a weight and members"));
                }
                let w = line.rational_at(1)?;
                let members = (2..line.tokens.len())
                    .map(|i| line.usize_at(i))
                    .collect::<Result<Vec<_>, _>>()?;
                planted.push((members, w));
            }
            other => return Err(line.err(1, format!("unknown record `{other}`"))),
        }
    }
    let missing = |what: &str| ParseError {
        line: 1,
        column: 1,
        message: format!("missing `{what}`"),
    };
    Ok(Truth {
        k_true: k_true.ok_or_else(|| missing("k_true"))?,
        k_in: k_in.ok_or_else(|| missing("k_in"))?,
        planted,
    })
}

/// One row of benchmark output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance_id: String,
    pub n: usize,
    pub m: usize,
    pub k_true: Option<usize>,
    pub k_in: usize,
    pub config: String,
    pub kernel_variant: String,
    pub n_kernel: usize,
    pub ordering: String,
    pub srules: String,
    pub symmetry: bool,
    pub lp_runs: u64,
    pub signatures_tested: u64,
    pub backtracks: u64,
    pub outcome: String,
    /// `yes`, `no`, or `unlabeled` when the answer is not known independently.
    pub expected: String,
    pub wall_ms: f64,
}

/// Version of [`BENCH_HEADER`]; bump when columns change.
pub const BENCH_SCHEMA_VERSION: u32 = 1;

/// Column names of the benchmark CSV, in order.
pub const BENCH_HEADER: [&str; 17] = [
    "instance_id",
    "n",
    "m",
    "k_true",
    "k_in",
    "config",
    "kernel_variant",
    "n_kernel",
    "ordering",
    "srules",
    "symmetry",
    "lp_runs",
    "signatures_tested",
    "backtracks",
    "outcome",
    "expected",
    "wall_ms",
];

pub fn write_bench_csv<W: io::Write>(out: W, records: &[BenchRecord]) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_bench_csv<R: io::Read>(input: R) -> Result<Vec<BenchRecord>, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(BENCH_HEADER.iter().copied()) {
        return Err(IoError::BenchHeader(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::r;
    use proptest::prelude::*;

    #[test]
    fn parses_example_instance() {
        let text = "# triangle\newcd 1 3 3\ne 0 1 2\ne 0 2 1.5\ne 1 2 1/3  # tail\na 2 0\n";
        let (g, ann) = parse_instance(text).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.weight(0, 2), Some(Rational::new(3, 2)));
        assert_eq!(g.weight(2, 1), Some(Rational::new(1, 3)));
        assert_eq!(ann.get(&2), Some(&r(0)));
    }

    #[test]
    fn error_locations() {
        let e = parse_instance("ewcd 1 3 1\ne 0 3 1\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 5));
        let e = parse_instance("ewcd 1 3 1\ne 0 1 -2\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 7));
        let e = parse_instance("ewcd 1 3 1\ne 0 1 x\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 7));
        let e = parse_instance("ewcd 1 3 2\ne 0 1 1\n").unwrap_err();
        assert!(e.message.contains("declares 2"));
        let e = parse_instance("\n\newcd 2 3 0\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 6));
        let e = parse_instance("ewcd 1 3 2\ne 0 1 1\ne 1 0 2\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_instance("ewcd 1 3 0\nq 1\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        let e = parse_instance("ewcd 1 3 0\ne 1 1 1 1\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 9));
        let e = parse_instance("ewcd 1 2 0\na 1 -1\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 5));
        assert!(parse_instance("").is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("2.25"), Some(Rational::new(9, 4)));
        assert_eq!(parse_rational("-0.5"), Some(Rational::new(-1, 2)));
        assert_eq!(parse_rational("007"), Some(r(7)));
        assert_eq!(parse_rational("0.000"), Some(r(0)));
        assert_eq!(parse_rational(".5"), Some(Rational::new(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("."), None);
        assert_eq!(parse_rational("1e3"), None);
        assert_eq!(format_rational(&Rational::new(9, 4)), "2.25");
        assert_eq!(format_rational(&Rational::new(-1, 8)), "-0.125");
        assert_eq!(format_rational(&Rational::new(1, 3)), "1/3");
        assert_eq!(format_rational(&r(12)), "12");
    }

    #[test]
    fn solution_layout() {
        let d = Decomposition::from_cliques(
            4,
            &[
                (vec![2, 3], r(1)),
                (vec![0, 1, 2], Rational::new(1, 2)),
                (vec![3], r(4)),
                (vec![0, 1], r(2)),
            ],
        );
        let mut sol = SolutionFile::from_decomposition(&d, &|v| v == 3);
        sol.stats.push(("lp_runs".into(), "5".into()));
        let text = write_solution(&sol);
        assert_eq!(text, "yes\nc 0.5 0 1 2\nc 2 0 1\nc 1 2 3\nc 4 3\ns lp_runs 5\n");
        assert_eq!(parse_solution(&text).unwrap(), sol);
        let no = SolutionFile::from_decomposition(&d, &|_| false);
        assert_eq!(no.cliques.len(), 3);
        assert_eq!(write_solution(&SolutionFile::with_outcome(OutcomeKind::No)), "no\n");
    }

    #[test]
    fn truth_round_trip() {
        let t = Truth {
            k_true: 3,
            k_in: 2,
            planted: vec![(vec![0, 4], r(2)), (vec![1, 2, 3], Rational::new(1, 3))],
        };
        assert_eq!(parse_truth(&write_truth(&t)).unwrap(), t);
        assert!(parse_truth("truth 1\nk_in 2\n").is_err());
    }

    #[test]
    fn bench_csv_round_trip() {
        let rec = BenchRecord {
            instance_id: "k5_i0_m1".into(),
            n: 200,
            m: 1000,
            k_true: Some(5),
            k_in: 5,
            config: "decaf".into(),
            kernel_variant: "decaf".into(),
            n_kernel: 31,
            ordering: "push_front".into(),
            srules: "012".into(),
            symmetry: false,
            lp_runs: 10,
            signatures_tested: 99,
            backtracks: 3,
            outcome: "yes".into(),
            expected: "yes".into(),
            wall_ms: 1.5,
        };
        let other = BenchRecord {
            k_true: None,
            ..rec.clone()
        };
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &[rec.clone(), other.clone()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&BENCH_HEADER.join(",")));
        assert_eq!(read_bench_csv(&buf[..]).unwrap(), vec![rec, other]);
        assert!(read_bench_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (1i128..1000, prop::sample::select(vec![1i128, 2, 3, 4, 7, 10, 16, 125]))
            .prop_map(|(p, q)| Rational::new(p, q))
    }

    prop_compose! {
        fn arb_instance()(n in 1usize..9)
            (n in Just(n),
             edges in prop::collection::vec((0..n, 0..n, arb_rational()), 0..20),
             ann in prop::collection::btree_map(0..n, arb_rational(), 0..3))
            -> (WeightedGraph, Annotations)
        {
            let mut seen = std::collections::BTreeSet::new();
            let edges: Vec<_> = edges
                .into_iter()
                .filter(|&(u, v, _)| u != v && seen.insert((u.min(v), u.max(v))))
                .collect();
            (WeightedGraph::new(n, edges).unwrap(), ann)
        }
    }

    proptest! {
        #[test]
        fn instance_round_trip((g, ann) in arb_instance()) {
            let text = write_instance(&g, &ann);
            let (g2, ann2) = parse_instance(&text).unwrap();
            prop_assert_eq!(&g2, &g);
            prop_assert_eq!(&ann2, &ann);
            prop_assert_eq!(write_instance(&g2, &ann2), text);
        }

        #[test]
        fn rational_round_trip(p in -100_000i128..100_000, q in 1i128..5000) {
            let x = Rational::new(p, q);
            prop_assert_eq!(parse_rational(&format_rational(&x)), Some(x));
        }

        #[test]
        fn solution_round_trip(
            cliques in prop::collection::vec(
                (prop::collection::btree_set(0usize..12, 1..5), arb_rational()), 0..6),
            outcome in prop::sample::select(vec![OutcomeKind::Yes, OutcomeKind::No, OutcomeKind::Timeout]),
        ) {
            let mut sol = SolutionFile::with_outcome(outcome);
            sol.cliques = cliques.into_iter().map(|(m, w)| (m.into_iter().collect(), w)).collect();
            sort_cliques(&mut sol.cliques);
            sol.stats.push(("wall_ms".into(), "3".into()));
            prop_assert_eq!(parse_solution(&write_solution(&sol)).unwrap(), sol);
        }
    }
}
