use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::CommandFactory;
use rayon::prelude::*;

use irf_core::corpus_io::{parse_qrels, parse_topics, Analyzer, QrelSet, Stoplist, Topic};
use irf_core::eval::{
    cross_validate, evaluate, evaluate_all, fisher_randomization, write_cv_report, write_metrics_tsv,
    write_significance_tsv, GridSpec, Metric, PointScores,
};
use irf_core::index::{index_trec_file, load_index, save_index};
use irf_core::irf_loop::{
    read_session_log_file, run_irf, write_session_log, BudgetConfig, FreezingRunList, InteractiveJudge, ReplayJudge,
    SimulatedJudge,
};
use irf_core::ranking::{read_run_file, retrieve_initial, RunSet, ScoredList};
use irf_core::{CollectionIndex, ModelParams};

use crate::{Cli, CompareArgs, EvalArgs, IndexArgs, RunArgs, SessionArgs, SweepArgs};

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ArgumentConflict, msg).exit()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn index(a: IndexArgs) -> Result<()> {
    let stoplist = match a.stoplist.as_str() {
        "inquery" => Stoplist::inquery(),
        "none" => Stoplist::empty(),
        path => Stoplist::from_file(Path::new(path))?,
    };
    let analyzer = Analyzer::new(stoplist, a.stemmer);
    let index = index_trec_file(&a.corpus, a.format, &analyzer)
        .with_context(|| format!("indexing {}", a.corpus.display()))?;
    save_index(&index, &a.output)?;
    let s = index.stats();
    println!("documents\t{}", s.num_docs);
    println!("avg_doc_len\t{:.1}", s.avg_doc_len);
    println!("vocabulary\t{}", s.vocab_size);
    println!("total_terms\t{}", s.total_terms);
    Ok(())
}

struct Session {
    index: CollectionIndex,
    topics: Vec<Topic>,
    params: ModelParams,
    budget: BudgetConfig,
}

fn load_session(a: &SessionArgs) -> Result<Session> {
    let index = load_index(&a.index).with_context(|| format!("loading index {}", a.index.display()))?;
    let analyzer = match index.analyzer() {
        Some(an) => an.clone(),
        None => {
            log::warn!("index stores no analyzer; normalizing topics with the standard one");
            Analyzer::standard()
        }
    };
    let topics = parse_topics(&a.topics, a.topic_format, a.topic_field, &analyzer)?;
    let mut params = match &a.params {
        Some(p) => ModelParams::from_file(p)?,
        None => ModelParams::default(),
    };
    for kv in &a.overrides {
        let Some((k, v)) = kv.split_once('=') else {
            usage_error(format!("--param expects KEY=VALUE, got {kv:?}"));
        };
        params.set(k.trim(), v.trim()).with_context(|| format!("--param {kv}"))?;
    }
    params.validate()?;
    let budget = BudgetConfig::new(a.docs_per_iter, a.iterations)
        .and_then(|b| b.with_final_depth(a.final_depth))
        .unwrap_or_else(|e| usage_error(e));
    Ok(Session {
        index,
        topics,
        params,
        budget,
    })
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn simulate_all(s: &Session, a: &SessionArgs, params: &ModelParams, qrels: &QrelSet) -> Result<Vec<FreezingRunList>> {
    s.topics
        .par_iter()
        .map(|t| {
            run_irf(&s.index, t, a.model, params, &s.budget, &mut SimulatedJudge::new(qrels))
                .with_context(|| format!("topic {}", t.query_id))
        })
        .collect()
}

fn write_run(path: &Path, lists: &[ScoredList], tag: &str) -> Result<()> {
    let mut out = create(path)?;
    for l in lists {
        l.write_trec(&mut out, tag)?;
    }
    out.flush()?;
    Ok(())
}

pub fn run(a: RunArgs) -> Result<()> {
    let s = load_session(&a.session)?;
    let sa = &a.session;
    let tag = format!("irf-{}-{}x{}", sa.model, s.budget.docs_per_iter, s.budget.iterations);
    let judge_mode;

    if a.initial_only {
        judge_mode = "none";
        let ranking = s.params.ranking.with_depth(s.budget.final_depth);
        let pool = thread_pool(sa.threads)?;
        let lists: Vec<ScoredList> = pool.install(|| {
            s.topics
                .par_iter()
                .map(|t| {
                    let hits = retrieve_initial(&s.index, &t.terms, sa.model.initial_ranker(), &ranking, &Default::default())?;
                    Ok(ScoredList::new(t.query_id.clone(), hits)?)
                })
                .collect::<Result<_>>()
        })?;
        write_run(&a.output, &lists, &format!("irf-{}", sa.model.initial_ranker()))?;
        eprintln!("wrote {} topics to {}", lists.len(), a.output.display());
    } else {
        let runs: Vec<FreezingRunList> = if a.interactive {
            judge_mode = "interactive";
            let stdin = io::stdin();
            let mut judge = InteractiveJudge::new(stdin.lock(), io::stderr());
            let mut runs = Vec::with_capacity(s.topics.len());
            for t in &s.topics {
                let run = run_irf(&s.index, t, sa.model, &s.params, &s.budget, &mut judge)?;
                let aborted = run.aborted;
                runs.push(run);
                if aborted {
                    eprintln!("input closed; session aborted after topic {}", t.query_id);
                    break;
                }
            }
            runs
        } else if let Some(log) = &a.replay {
            judge_mode = "replay";
            let records = read_session_log_file(log)?;
            let judge = ReplayJudge::from_records(&records);
            let pool = thread_pool(sa.threads)?;
            pool.install(|| {
                s.topics
                    .par_iter()
                    .map(|t| Ok(run_irf(&s.index, t, sa.model, &s.params, &s.budget, &mut judge.clone())?))
                    .collect::<Result<_>>()
            })?
        } else {
            judge_mode = "simulated";
            let Some(qrels_path) = &a.qrels else {
                usage_error("one of --qrels, --interactive, --replay or --initial-only is required");
            };
            let qrels = parse_qrels(qrels_path)?;
            let pool = thread_pool(sa.threads)?;
            pool.install(|| simulate_all(&s, sa, &s.params, &qrels))?
        };
        let lists: Vec<ScoredList> = runs.iter().map(|r| r.to_scored_list()).collect::<irf_core::Result<_>>()?;
        write_run(&a.output, &lists, &tag)?;
        let log_path = sibling(&a.output, ".session.jsonl");
        let mut log = create(&log_path)?;
        write_session_log(&mut log, &runs)?;
        log.flush()?;
        let judged: usize = runs.iter().map(|r| r.judgments().count()).sum();
        eprintln!(
            "wrote {} topics ({judged} judgments) to {} and {}",
            runs.len(),
            a.output.display(),
            log_path.display()
        );
    }

    let mut echo = create(&sibling(&a.output, ".config"))?;
    writeln!(echo, "index={}", sa.index.display())?;
    writeln!(echo, "topics={}", sa.topics.display())?;
    writeln!(echo, "topic_format={}", sa.topic_format)?;
    writeln!(echo, "topic_field={}", sa.topic_field)?;
    if let Some(q) = &a.qrels {
        writeln!(echo, "qrels={}", q.display())?;
    }
    if let Some(r) = &a.replay {
        writeln!(echo, "replay={}", r.display())?;
    }
    writeln!(echo, "judge={judge_mode}")?;
    writeln!(echo, "model={}", sa.model)?;
    writeln!(echo, "docs_per_iter={}", s.budget.docs_per_iter)?;
    writeln!(echo, "iterations={}", s.budget.iterations)?;
    writeln!(echo, "final_depth={}", s.budget.final_depth)?;
    writeln!(echo, "seed={}", a.seed)?;
    write!(echo, "{}", s.params.to_kv())?;
    echo.flush()?;
    Ok(())
}

fn report(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut out = create(p)?;
            body(&mut out)?;
            out.flush()?;
        }
        None => body(&mut io::stdout().lock())?,
    }
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let runs = read_run_file(&a.run)?;
    let qrels = parse_qrels(&a.qrels)?;
    let results = evaluate_all(&runs, &qrels);
    if results[0].per_query.is_empty() {
        bail!("no query of {} has a relevant document in {}", a.run.display(), a.qrels.display());
    }
    report(a.output.as_deref(), |out| write_metrics_tsv(out, &results))?;
    if a.output.is_some() {
        for r in &results {
            println!("{}\t{:.4}", r.metric, r.mean);
        }
    }
    Ok(())
}

pub fn compare(a: CompareArgs) -> Result<()> {
    let run_a = read_run_file(&a.run_a)?;
    let run_b = read_run_file(&a.run_b)?;
    let qrels = parse_qrels(&a.qrels)?;
    let metrics: Vec<Metric> = match a.metric {
        Some(m) => vec![m],
        None => Metric::ALL.to_vec(),
    };
    let mut rows = Vec::new();
    for m in metrics {
        let ra = evaluate(&run_a, &qrels, m);
        let rb = evaluate(&run_b, &qrels, m);
        let sig = fisher_randomization(&ra.per_query, &rb.per_query, a.samples, a.seed).with_context(|| {
            format!("{} and {} cover different queries", a.run_a.display(), a.run_b.display())
        })?;
        println!(
            "{}\tmean_a={:.4}\tmean_b={:.4}\tdiff={:+.4}\tp={:.4}\t{}",
            m,
            ra.mean,
            rb.mean,
            sig.observed_mean_diff,
            sig.p_value,
            if sig.significant(a.alpha) {
                format!("significant at {}", a.alpha)
            } else {
                format!("not significant at {}", a.alpha)
            }
        );
        rows.push((ra, rb, sig));
    }
    if let Some(p) = &a.output {
        report(Some(p), |out| write_significance_tsv(out, &rows, a.alpha))?;
    }
    Ok(())
}

fn parse_grid(a: &SweepArgs, base: &ModelParams) -> Result<GridSpec> {
    if a.singleton {
        if !a.grid.is_empty() {
            usage_error("--singleton cannot be combined with --grid");
        }
        return Ok(GridSpec::singleton(base));
    }
    let mut grid = GridSpec::default();
    for g in &a.grid {
        let Some((k, v)) = g.split_once('=') else {
            usage_error(format!("--grid expects KEY=V1,V2,..., got {g:?}"));
        };
        grid.set(k.trim(), v).with_context(|| format!("--grid {g}"))?;
    }
    Ok(grid)
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let s = load_session(&a.session)?;
    let sa = &a.session;
    let qrels = parse_qrels(&a.qrels)?;
    let grid = parse_grid(&a, &s.params)?;
    let points = grid.points(sa.model, &s.params)?;
    let query_ids: Vec<String> = s
        .topics
        .iter()
        .filter(|t| qrels.num_relevant(&t.query_id) > 0)
        .map(|t| t.query_id.clone())
        .collect();
    log::info!("{} grid points, {} judged topics", points.len(), query_ids.len());
    let pool = thread_pool(sa.threads)?;
    let result = pool.install(|| {
        cross_validate(&query_ids, points.len(), a.folds, |i| {
            let runs = simulate_all(&s, sa, &points[i], &qrels).map_err(|e| {
                irf_core::Error::InvalidParameter(format!("grid point {i}: {e:#}"))
            })?;
            let runs: RunSet = runs
                .into_iter()
                .map(|r| (r.query_id.clone(), r.ranking()))
                .filter(|(_, d)| !d.is_empty())
                .collect();
            Ok(PointScores {
                map: evaluate(&runs, &qrels, Metric::Map).per_query,
                ndcg20: evaluate(&runs, &qrels, Metric::Ndcg20).per_query,
            })
        })
    })?;
    report(a.output.as_deref(), |out| write_cv_report(out, &result, &points))?;
    if a.output.is_some() {
        println!("map\t{:.4}", result.mean_map);
        println!("ndcg20\t{:.4}", result.mean_ndcg20);
    }
    Ok(())
}
