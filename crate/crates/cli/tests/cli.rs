use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn irf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irf")).args(args).output().unwrap()
}

fn irf_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_irf"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Setup {
    dir: TempDir,
    index: PathBuf,
}

impl Setup {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let index = dir.path().join("idx");
        let corpus = fixtures().join("corpus.trectext");
        let o = irf(&["index", "--corpus", p(&corpus), "--output", p(&index)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        Setup { dir, index }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, output: &Path, model: &str, k: &str, n: &str, extra: &[&str]) -> Output {
        let topics = fixtures().join("topics.tsv");
        let params = fixtures().join("params.txt");
        let mut args = vec![
            "run",
            "--index",
            p(&self.index),
            "--topics",
            p(&topics),
            "--topic-format",
            "tsv",
            "--model",
            model,
            "--docs-per-iter",
            k,
            "--iterations",
            n,
            "--params",
            p(&params),
            "--output",
            p(output),
        ];
        args.extend_from_slice(extra);
        irf(&args)
    }

    fn simulated(&self, output: &Path, model: &str, k: &str, n: &str) -> Output {
        let qrels = fixtures().join("qrels.txt");
        self.run(output, model, k, n, &["--qrels", p(&qrels)])
    }
}

#[test]
fn index_prints_collection_stats() {
    let dir = TempDir::new().unwrap();
    let corpus = fixtures().join("corpus.trectext");
    let o = irf(&["index", "--corpus", p(&corpus), "--output", p(&dir.path().join("idx"))]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("documents\t6"));
    assert!(dir.path().join("idx/manifest.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    let o = irf(&["index", "--corpus", "x", "--format", "bogus", "--output", "y"]);
    assert_eq!(o.status.code(), Some(2));
    let s = Setup::new();
    let o = s.simulated(&s.path("run.txt"), "nope", "1", "1");
    assert_eq!(o.status.code(), Some(2));
    let o = s.run(&s.path("run.txt"), "rm3", "1", "1", &[]);
    assert_eq!(o.status.code(), Some(2), "missing judge source");
    let o = s.simulated(&s.path("run.txt"), "rm3", "0", "1");
    assert_eq!(o.status.code(), Some(2), "empty budget");
}

#[test]
fn data_errors_exit_one() {
    let o = irf(&["eval", "--run", "/nonexistent/run", "--qrels", "/nonexistent/qrels"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.trectext");
    fs::write(&bad, "<DOC>\n<TEXT>no id</TEXT>\n</DOC>\n").unwrap();
    let o = irf(&["index", "--corpus", p(&bad), "--output", p(&dir.path().join("idx"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn top_k_baseline_run() {
    let s = Setup::new();
    let out = s.path("rm3.run");
    let o = s.simulated(&out, "rm3", "10", "1");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = fs::read_to_string(&out).unwrap();
    let first: Vec<&str> = run.lines().filter(|l| l.starts_with("1 ")).collect();
    assert!(first[0].starts_with("1 Q0 D1 1 "));
    assert!(first.iter().all(|l| l.ends_with("irf-rm3-10x1")));
    let log = fs::read_to_string(s.path("rm3.run.session.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 2);
    let config = fs::read_to_string(s.path("rm3.run.config")).unwrap();
    assert!(config.contains("docs_per_iter=10\n"));
    assert!(config.contains("mu=2\n"));
}

#[test]
fn ten_iteration_run_logs_every_iteration() {
    let s = Setup::new();
    let out = s.path("it.run");
    let o = s.simulated(&out, "distill", "1", "10");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let log = fs::read_to_string(s.path("it.run.session.jsonl")).unwrap();
    let topic1: Vec<serde_json::Value> = log
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .filter(|v: &serde_json::Value| v["query_id"] == "1")
        .collect();
    assert_eq!(topic1.len(), 10);
    let shortfall: u64 = topic1.iter().map(|v| v["shortfall"].as_u64().unwrap()).sum();
    let shown: usize = topic1.iter().map(|v| v["shown"].as_array().unwrap().len()).sum();
    assert_eq!(shown as u64 + shortfall, 10);
}

#[test]
fn param_flag_overrides_file() {
    let s = Setup::new();
    let out = s.path("o.run");
    let qrels = fixtures().join("qrels.txt");
    let o = s.run(&out, "rocchio", "2", "2", &["--qrels", p(&qrels), "--param", "beta=2.5", "--param", "mu = 7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let config = fs::read_to_string(s.path("o.run.config")).unwrap();
    assert!(config.contains("beta=2.5\n") && config.contains("mu=7\n"));
    let o = s.run(&out, "rocchio", "2", "2", &["--qrels", p(&qrels), "--param", "nosuch=1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn interactive_and_replay_match_simulated() {
    let s = Setup::new();
    let sim = s.path("sim.run");
    assert!(s.simulated(&sim, "rm3", "1", "3").status.success());
    let log = fs::read_to_string(s.path("sim.run.session.jsonl")).unwrap();
    let mut answers = String::new();
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for j in v["judgments"].as_array().unwrap() {
            answers.push_str(if j[1].as_bool().unwrap() { "y\n" } else { "n\n" });
        }
    }

    let inter = s.path("inter.run");
    let topics = fixtures().join("topics.tsv");
    let params = fixtures().join("params.txt");
    let o = irf_with_stdin(
        &[
            "run",
            "--index",
            p(&s.index),
            "--topics",
            p(&topics),
            "--topic-format",
            "tsv",
            "--model",
            "rm3",
            "--docs-per-iter",
            "1",
            "--iterations",
            "3",
            "--params",
            p(&params),
            "--interactive",
            "--output",
            p(&inter),
        ],
        &answers,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("relevant? [y/n]"));
    assert_eq!(fs::read(&sim).unwrap(), fs::read(&inter).unwrap());

    let replay = s.path("replay.run");
    let sim_log = s.path("sim.run.session.jsonl");
    let o = s.run(&replay, "rm3", "1", "3", &["--replay", p(&sim_log)]);
    assert!(o.status.success());
    assert_eq!(fs::read(&sim).unwrap(), fs::read(&replay).unwrap());
    assert_eq!(fs::read(&sim_log).unwrap(), fs::read(s.path("replay.run.session.jsonl")).unwrap());
}

#[test]
fn interactive_eof_still_writes_partial_run() {
    let s = Setup::new();
    let out = s.path("eof.run");
    let topics = fixtures().join("topics.tsv");
    let o = irf_with_stdin(
        &[
            "run",
            "--index",
            p(&s.index),
            "--topics",
            p(&topics),
            "--topic-format",
            "tsv",
            "--model",
            "rm3",
            "--docs-per-iter",
            "1",
            "--iterations",
            "2",
            "--interactive",
            "--output",
            p(&out),
        ],
        "",
    );
    assert!(o.status.success());
    let run = fs::read_to_string(&out).unwrap();
    assert!(run.lines().all(|l| l.starts_with("1 ")));
    assert!(!run.is_empty());
    assert_eq!(fs::read_to_string(s.path("eof.run.session.jsonl")).unwrap().lines().count(), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let s = Setup::new();
    let out = s.path("d.run");
    assert!(s.simulated(&out, "prob", "2", "2").status.success());
    let first = (fs::read(&out).unwrap(), fs::read(s.path("d.run.session.jsonl")).unwrap());
    assert!(s.simulated(&out, "prob", "2", "2").status.success());
    let second = (fs::read(&out).unwrap(), fs::read(s.path("d.run.session.jsonl")).unwrap());
    assert_eq!(first, second);
}

#[test]
fn eval_of_perfect_run_is_one() {
    let dir = TempDir::new().unwrap();
    let run = dir.path().join("perfect.run");
    fs::write(
        &run,
        "1 Q0 D3 1 3 p\n1 Q0 D1 2 2 p\n1 Q0 D6 3 1 p\n2 Q0 D5 1 2 p\n2 Q0 D2 2 1 p\n",
    )
    .unwrap();
    let qrels = fixtures().join("qrels.txt");
    let o = irf(&["eval", "--run", p(&run), "--qrels", p(&qrels)]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("all\tmap\t1.000000"), "{out}");
    assert!(out.contains("all\tndcg20\t1.000000"), "{out}");
}

#[test]
fn compare_with_itself_and_mismatch() {
    let s = Setup::new();
    let a = s.path("a.run");
    assert!(s.simulated(&a, "rm3", "1", "2").status.success());
    let qrels = fixtures().join("qrels.txt");
    let o = irf(&["compare", "--run-a", p(&a), "--run-b", p(&a), "--qrels", p(&qrels)]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("p=1.0000\tnot significant"), "{out}");

    let b = s.path("b.run");
    let text: String = fs::read_to_string(&a)
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("1 "))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&b, text).unwrap();
    let o = irf(&["compare", "--run-a", p(&a), "--run-b", p(&b), "--qrels", p(&qrels)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("different queries"));
}

#[test]
fn singleton_sweep_equals_eval() {
    let s = Setup::new();
    let run = s.path("s.run");
    assert!(s.simulated(&run, "rm3", "1", "3").status.success());
    let qrels = fixtures().join("qrels.txt");
    let o = irf(&["eval", "--run", p(&run), "--qrels", p(&qrels)]);
    let eval_map = stdout(&o).lines().find(|l| l.starts_with("all\tmap")).unwrap().split('\t').nth(2).unwrap().to_string();

    let topics = fixtures().join("topics.tsv");
    let params = fixtures().join("params.txt");
    let report = s.path("sweep.txt");
    let o = irf(&[
        "sweep",
        "--index",
        p(&s.index),
        "--topics",
        p(&topics),
        "--topic-format",
        "tsv",
        "--qrels",
        p(&qrels),
        "--model",
        "rm3",
        "--docs-per-iter",
        "1",
        "--iterations",
        "3",
        "--params",
        p(&params),
        "--singleton",
        "--folds",
        "2",
        "--output",
        p(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(text.matches("# fold").count(), 2);
    assert!(text.contains("mu=2\n"));
    assert!(text.contains(&format!("map\t{eval_map}")), "{text} vs {eval_map}");
}
