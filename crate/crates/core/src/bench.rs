//! Benchmark harness: runs configurations over a corpus and summarises the ratios.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::gen::CorpusEntry;
use crate::instance::{AnnotatedMatrix, Rational, VertexId, WeightedGraph};
use crate::io::{parse_instance, parse_truth, write_instance, write_truth, BenchRecord, IoError, Truth};
use crate::oracle::{brute_force_decide, OracleLimits};
use crate::pipeline::{solve, KernelChoice, PipelineConfig, SRuleSet};
use crate::search::VertexOrdering;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: IoError },
    #[error("bad config `{0}`: expected a preset or kernel:order:srules[:sym]")]
    Config(String),
    #[error("{0}: no k given and no truth file")]
    MissingK(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// A named pipeline configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub name: String,
    pub pipeline: PipelineConfig,
}

impl BenchConfig {
    /// Parses a preset name (`decaf`, `cricca`, `cricca-star`) or
    /// `kernel:order:srules[:sym]`, for example `decaf:push_front:012:sym`.
    pub fn parse(s: &str) -> Result<BenchConfig, BenchError> {
        let s = s.trim();
        if let Some(p) = PipelineConfig::preset(s) {
            return Ok(BenchConfig {
                name: s.to_string(),
                pipeline: p,
            });
        }
        let bad = || BenchError::Config(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let mut pipeline = PipelineConfig::decaf();
        pipeline.kernel = KernelChoice::parse(parts[0]).ok_or_else(bad)?;
        let order = VertexOrdering::parse(parts[1]).ok_or_else(bad)?;
        SRuleSet::parse(parts[2])
            .ok_or_else(bad)?
            .apply(&mut pipeline.search, Some(order));
        match parts.get(3) {
            None => {}
            Some(&"sym") => pipeline.search.column_symmetry_breaking = true,
            Some(_) => return Err(bad()),
        }
        Ok(BenchConfig {
            name: s.to_string(),
            pipeline,
        })
    }

    pub fn parse_list(s: &str) -> Result<Vec<BenchConfig>, BenchError> {
        s.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(BenchConfig::parse)
            .collect()
    }
}

/// One instance with its input budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchInstance {
    pub id: String,
    pub graph: WeightedGraph,
    pub annotations: BTreeMap<VertexId, Rational>,
    pub k_in: usize,
    pub k_true: Option<usize>,
}

impl From<&CorpusEntry> for BenchInstance {
    fn from(e: &CorpusEntry) -> Self {
        BenchInstance {
            id: e.id.clone(),
            graph: e.instance.graph.clone(),
            annotations: BTreeMap::new(),
            k_in: e.k_in,
            k_true: Some(e.instance.k_true),
        }
    }
}

/// Writes `<id>.ewcd` and `<id>.truth` for every entry.
pub fn write_corpus(dir: &Path, entries: &[CorpusEntry]) -> Result<(), BenchError> {
    let io_err = |path: &Path, e: std::io::Error| BenchError::File {
        path: path.to_path_buf(),
        source: e.into(),
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for e in entries {
        let inst = dir.join(format!("{}.ewcd", e.id));
        fs::write(&inst, write_instance(&e.instance.graph, &BTreeMap::new()))
            .map_err(|err| io_err(&inst, err))?;
        let truth = dir.join(format!("{}.truth", e.id));
        let t = Truth {
            k_true: e.instance.k_true,
            k_in: e.k_in,
            planted: e.instance.planted.clone(),
        };
        fs::write(&truth, write_truth(&t)).map_err(|err| io_err(&truth, err))?;
    }
    Ok(())
}

/// Reads every `*.ewcd` in `dir`, sorted by name, with budgets from `*.truth` sidecars
/// or `default_k`.
pub fn load_corpus(dir: &Path, default_k: Option<usize>) -> Result<Vec<BenchInstance>, BenchError> {
    let file_err = |path: &Path, source: IoError| BenchError::File {
        path: path.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| file_err(dir, e.into()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ewcd"))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = fs::read_to_string(&path).map_err(|e| file_err(&path, e.into()))?;
        let (graph, annotations) = parse_instance(&text).map_err(|e| file_err(&path, e.into()))?;
        let truth_path = path.with_extension("truth");
        let truth = if truth_path.exists() {
            let t = fs::read_to_string(&truth_path).map_err(|e| file_err(&truth_path, e.into()))?;
            Some(parse_truth(&t).map_err(|e| file_err(&truth_path, e.into()))?)
        } else {
            None
        };
        let k_in = match (default_k, &truth) {
            (Some(k), _) => k,
            (None, Some(t)) => t.k_in,
            (None, None) => return Err(BenchError::MissingK(id)),
        };
        out.push(BenchInstance {
            id,
            graph,
            annotations,
            k_in,
            k_true: truth.map(|t| t.k_true),
        });
    }
    Ok(out)
}

/// `yes` when the budget covers the planted cliques, the oracle's answer when the
/// instance is small enough, `unlabeled` otherwise.
pub fn expected_label(inst: &BenchInstance) -> &'static str {
    if inst.k_true.is_some_and(|k| inst.k_in >= k) {
        return "yes";
    }
    let Ok(a) = AnnotatedMatrix::from_graph(&inst.graph, &inst.annotations) else {
        return "unlabeled";
    };
    let active = (0..a.n())
        .filter(|&v| a.degree(v) > 0 || a.diag(v).is_some_and(|d| d > Rational::from_integer(0)))
        .collect::<Vec<_>>();
    let a = a.principal(&active);
    match brute_force_decide(&a, inst.k_in, OracleLimits::default()) {
        Ok(o) if o.is_yes() => "yes",
        Ok(_) => "no",
        Err(_) => "unlabeled",
    }
}

/// Runs one configuration on one instance; failures become `outcome = error` records.
pub fn run_one(inst: &BenchInstance, cfg: &BenchConfig, timeout: Option<Duration>, expected: &str) -> BenchRecord {
    let pipeline = cfg.pipeline.clone().with_timeout(timeout);
    let mut rec = BenchRecord {
        instance_id: inst.id.clone(),
        n: inst.graph.n(),
        m: inst.graph.m(),
        k_true: inst.k_true,
        k_in: inst.k_in,
        config: cfg.name.clone(),
        kernel_variant: pipeline.kernel.name().to_string(),
        n_kernel: 0,
        ordering: pipeline.search.ordering.name().to_string(),
        srules: SRuleSet::describe(&pipeline.search),
        symmetry: pipeline.search.column_symmetry_breaking,
        lp_runs: 0,
        signatures_tested: 0,
        backtracks: 0,
        outcome: "error".into(),
        expected: expected.to_string(),
        wall_ms: 0.0,
    };
    match solve(&inst.graph, &inst.annotations, inst.k_in, &pipeline) {
        Ok(run) => {
            rec.n_kernel = run.n_kernel();
            rec.lp_runs = run.search.lp_runs;
            rec.signatures_tested = run.search.signatures_tested;
            rec.backtracks = run.search.backtracks;
            rec.outcome = run.outcome.kind().name().to_string();
            rec.wall_ms = run.wall_time.as_secs_f64() * 1e3;
        }
        Err(e) => log::warn!("{} with {}: {e}", inst.id, cfg.name),
    }
    rec
}

/// One record per (instance, config), instance-major. `jobs` worker threads run
/// independent solves; each solve is single-threaded.
pub fn run_bench(
    instances: &[BenchInstance],
    configs: &[BenchConfig],
    timeout: Option<Duration>,
    jobs: usize,
) -> Result<Vec<BenchRecord>, BenchError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let records = pool.install(|| {
        instances
            .par_iter()
            .flat_map_iter(|inst| {
                let expected = expected_label(inst);
                configs.iter().map(move |cfg| {
                    let rec = run_one(inst, cfg, timeout, expected);
                    log::info!("{} {} -> {} ({:.1} ms)", rec.instance_id, rec.config, rec.outcome, rec.wall_ms);
                    rec
                })
            })
            .collect()
    });
    Ok(records)
}

/// Median and quartiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub count: usize,
}

/// Quartiles by linear interpolation between order statistics; `None` for no data.
pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let at = |p: f64| {
        let x = p * (v.len() - 1) as f64;
        let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
        v[lo] + (v[hi] - v[lo]) * (x - lo as f64)
    };
    Some(Quartiles {
        q1: at(0.25),
        median: at(0.5),
        q3: at(0.75),
        count: v.len(),
    })
}

/// Per-k ratio tables for every config pair plus timeout counts.
///
/// Ratios are `first / second` over instances where both configs finished; zero
/// denominators are skipped. Kernel ratios are `n_kernel(second) / n_kernel(first)`.
pub fn summarize(records: &[BenchRecord]) -> String {
    let mut configs: Vec<&str> = Vec::new();
    for r in records {
        if !configs.contains(&r.config.as_str()) {
            configs.push(&r.config);
        }
    }
    let key = |r: &BenchRecord| r.k_true.unwrap_or(r.k_in);
    let mut ks: Vec<usize> = records.iter().map(key).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut by: BTreeMap<(&str, &str), &BenchRecord> = BTreeMap::new();
    for r in records {
        by.insert((r.config.as_str(), r.instance_id.as_str()), r);
    }

    let mut out = String::new();
    let _ = writeln!(out, "timeouts per k (errors in parentheses)");
    let _ = write!(out, "{:<28}", "config");
    for k in &ks {
        let _ = write!(out, "{:>9}", format!("k={k}"));
    }
    out.push('\n');
    for c in &configs {
        let _ = write!(out, "{c:<28}");
        for &k in &ks {
            let rows = records.iter().filter(|r| r.config == *c && key(r) == k);
            let (t, e) = rows.fold((0, 0), |(t, e), r| {
                (t + (r.outcome == "timeout") as usize, e + (r.outcome == "error") as usize)
            });
            let cell = if e > 0 { format!("{t}({e})") } else { t.to_string() };
            let _ = write!(out, "{cell:>9}");
        }
        out.push('\n');
    }

    let finished = |r: &BenchRecord| r.outcome == "yes" || r.outcome == "no";
    for (i, a) in configs.iter().enumerate() {
        for b in &configs[i + 1..] {
            let _ = writeln!(out, "\n{a} vs {b}: median [q1, q3] per k");
            let _ = writeln!(out, "{:>6} {:>6} {:>26} {:>26} {:>26}", "k", "pairs", "time a/b", "lp_runs a/b", "n_kernel b/a");
            for &k in &ks {
                let (mut time, mut lp, mut nk) = (Vec::new(), Vec::new(), Vec::new());
                for ra in records.iter().filter(|r| r.config == *a && key(r) == k) {
                    let Some(rb) = by.get(&(*b, ra.instance_id.as_str())) else {
                        continue;
                    };
                    if ra.n_kernel > 0 {
                        nk.push(rb.n_kernel as f64 / ra.n_kernel as f64);
                    }
                    if !finished(ra) || !finished(rb) {
                        continue;
                    }
                    if rb.wall_ms > 0.0 {
                        time.push(ra.wall_ms / rb.wall_ms);
                    }
                    if rb.lp_runs > 0 {
                        lp.push(ra.lp_runs as f64 / rb.lp_runs as f64);
                    }
                }
                let cell = |v: &[f64]| match quartiles(v) {
                    Some(q) => format!("{:.3} [{:.3}, {:.3}]", q.median, q.q1, q.q3),
                    None => "-".to_string(),
                };
                let _ = writeln!(
                    out,
                    "{k:>6} {:>6} {:>26} {:>26} {:>26}",
                    time.len(),
                    cell(&time),
                    cell(&lp),
                    cell(&nk)
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{corpus, GenSpec};

    fn small_corpus() -> Vec<BenchInstance> {
        let base = GenSpec {
            n: 12,
            k_true: 1,
            size_range: (2, 6),
            weight_range: (1, 2),
            overlap_bias: 0.5,
            seed: 3,
        };
        let ms = [Rational::from_integer(1), Rational::new(4, 5)];
        corpus(&base, &[2, 3], 2, &ms)
            .unwrap()
            .iter()
            .map(BenchInstance::from)
            .collect()
    }

    #[test]
    fn config_parsing() {
        let c = BenchConfig::parse("cricca:push_back:01:sym").unwrap();
        assert_eq!(c.pipeline.kernel, KernelChoice::Cricca);
        assert_eq!(c.pipeline.search.ordering, VertexOrdering::PushBack);
        assert!(c.pipeline.search.srule1 && !c.pipeline.search.srule2);
        assert!(c.pipeline.search.column_symmetry_breaking);
        assert_eq!(BenchConfig::parse("decaf").unwrap().pipeline, PipelineConfig::decaf());
        assert!(BenchConfig::parse("decaf:sideways:012").is_err());
        assert!(BenchConfig::parse("x").is_err());
        assert_eq!(BenchConfig::parse_list("decaf, cricca-star").unwrap().len(), 2);
    }

    #[test]
    fn record_count_and_kernel_dominance() {
        let inst = small_corpus();
        let configs = BenchConfig::parse_list("decaf,cricca,cricca-star,none:keep_first:none").unwrap();
        let recs = run_bench(&inst, &configs, None, 2).unwrap();
        assert_eq!(recs.len(), inst.len() * configs.len());
        for i in &inst {
            let get = |c: &str| recs.iter().find(|r| r.instance_id == i.id && r.config == c).unwrap();
            assert!(get("decaf").n_kernel <= get("cricca").n_kernel);
            assert_eq!(get("decaf").outcome, get("cricca").outcome);
            assert_ne!(get("decaf").expected, "unlabeled");
        }
        let text = summarize(&recs);
        assert!(text.contains("decaf vs cricca"));
    }

    #[test]
    fn quartile_interpolation() {
        let q = quartiles(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (2.0, 3.0, 4.0));
        let q = quartiles(&[1.0, 2.0]).unwrap();
        assert_eq!(q.median, 1.5);
        assert!(quartiles(&[]).is_none());
    }

    #[test]
    fn corpus_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let base = GenSpec {
            n: 10,
            k_true: 1,
            size_range: (2, 5),
            weight_range: (1, 3),
            overlap_bias: 0.2,
            seed: 9,
        };
        let entries = corpus(&base, &[3], 2, &[Rational::from_integer(1)]).unwrap();
        write_corpus(dir.path(), &entries).unwrap();
        let loaded = load_corpus(dir.path(), None).unwrap();
        assert_eq!(loaded.len(), 2);
        let mut expected: Vec<BenchInstance> = entries.iter().map(BenchInstance::from).collect();
        expected.sort_by(|a, b| a.id.cmp(&b.id));
        assert_eq!(loaded, expected);
        assert_eq!(load_corpus(dir.path(), Some(7)).unwrap()[0].k_in, 7);
    }
}
