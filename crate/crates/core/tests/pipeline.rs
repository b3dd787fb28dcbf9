use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rocar::cli::{generate_record, main_with_args, run_record};
use rocar::engine::adapter::{ScriptedAdapter, TableAdapter};
use rocar::engine::record::{RecordError, RunRecord, GRADES_FILE, TIMESTAMPS_FILE};
use rocar::engine::{reasoning_sessions, rulebook, Resources, Role};
use rocar::generator::{distance_bucket_tasks, generate_task_graph, GenerationError};
use rocar::graph::TaskGraph;
use rocar::schema::SchemaRegistry;
use rocar::scoring::Grade;

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn fixture_text(name: &str) -> String {
    fs::read_to_string(fixture_path(name)).unwrap()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with_args(
        std::iter::once("rocar").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn generated_graphs_match_goldens() {
    let reg = SchemaRegistry::shipped();
    for (n, seed) in [(3, 0), (5, 1), (7, 2)] {
        let g = generate_task_graph(&reg, n, seed).unwrap();
        assert!(g.audit(&reg).is_empty());
        assert_eq!(
            g.to_text(),
            fixture_text(&format!("generated_n{n}_seed{seed}.txt"))
        );
    }
}

#[test]
fn small_tree_lacks_long_distances() {
    let g = TaskGraph::from_text(&fixture_text("three_schema_tree.txt")).unwrap();
    assert!(g.audit(&SchemaRegistry::shipped()).is_empty());
    assert_eq!((g.nodes.len(), g.edges.len()), (4, 3));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(
        distance_bucket_tasks(&g, &mut rng),
        Err(GenerationError::DistanceUnavailable(3))
    );
}

#[test]
fn hand_fixtures_are_valid() {
    let reg = SchemaRegistry::shipped();
    for name in ["path6.txt", "star.txt", "family_cycle.txt"] {
        let g = TaskGraph::from_text(&fixture_text(name)).unwrap();
        assert!(g.audit(&reg).is_empty(), "{name}: {:?}", g.audit(&reg));
    }
}

fn oracle_run(dir: &Path, seed: u64) -> RunRecord {
    let res = Resources::shipped();
    let record = generate_record(&res, 10, seed).unwrap();
    record.persist(dir).unwrap();
    let table = rocar::engine::answer_table(&record.graph, &res, &record.tasks, true).unwrap();
    run_record(
        record,
        &res,
        dir,
        &TableAdapter::new("oracle", table),
        false,
    )
    .unwrap()
}

#[test]
fn persist_then_load_is_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let record = oracle_run(tmp.path(), 3);
    assert_eq!(RunRecord::load(tmp.path()).unwrap(), record);
}

#[test]
fn tampered_grades_are_detected() {
    let tmp = tempfile::tempdir().unwrap();
    oracle_run(tmp.path(), 4);
    let path = tmp.path().join(GRADES_FILE);
    let text = fs::read_to_string(&path).unwrap().replacen("|1|", "|0|", 1);
    fs::write(&path, text).unwrap();
    assert!(matches!(
        RunRecord::load(tmp.path()),
        Err(RecordError::CorruptRunDirectory(_))
    ));
}

#[test]
fn repeated_runs_give_identical_artifacts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    oracle_run(a.path(), 5);
    oracle_run(b.path(), 5);
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != TIMESTAMPS_FILE)
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for n in names {
        assert_eq!(
            fs::read(a.path().join(&n)).unwrap(),
            fs::read(b.path().join(&n)).unwrap(),
            "{n}"
        );
    }
}

#[test]
fn silent_adapter_stores_empty_replies_graded_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let res = Resources::shipped();
    let record = generate_record(&res, 10, 6).unwrap();
    let mut silent = String::new();
    for d in 2..=5 {
        silent.push_str(&format!("reasoning-d{d}|3|\n"));
    }
    let adapter = ScriptedAdapter::parse("silent", &silent).unwrap();
    let record = run_record(record, &res, tmp.path(), &adapter, false).unwrap();
    let results = record.results.unwrap();
    let replies: Vec<&str> = results
        .transcript
        .iter()
        .filter(|e| {
            e.role == Role::Assistant
                && e.task
                    .as_deref()
                    .is_some_and(|t| t.starts_with("reasoning"))
        })
        .map(|e| e.text.as_str())
        .collect();
    assert_eq!(replies, ["", "", "", ""]);
    assert!(results.grades.iter().all(|g| g.grade == Grade::Zero));
    assert_eq!(results.grades.len(), record.tasks.len());
}

#[test]
fn reinform_resends_the_graph_before_each_question() {
    let res = Resources::shipped();
    let record = generate_record(&res, 10, 7).unwrap();
    let prompts = res.templates.render_graph(&record.graph).unwrap();
    let book = rulebook(&res);
    for reinform in [false, true] {
        for plan in reasoning_sessions(&record.tasks, &book, &prompts, reinform) {
            let copies = plan
                .messages
                .iter()
                .filter(|m| m.text == prompts.join("\n"))
                .count();
            assert_eq!(copies, 1 + usize::from(reinform));
            assert!(plan.messages.last().unwrap().task.is_some());
        }
    }
}

#[test]
fn scripted_fixture_matches_hand_grades() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(
        cli(&["gen", "--n", "10", "--seed", "42", "--out", out]).0,
        0
    );
    let adapter = format!(
        "scripted:{}",
        fixture_path("scripted_replies.txt").display()
    );
    let (code, stdout, _) = cli(&["run", "--out", out, "--adapter", &adapter]);
    assert_eq!(code, 0);
    assert_eq!(stdout, "reasoning=50.00\nmemory=53.33\n");
    let expected: HashMap<String, Grade> = fixture_text("scripted_expected.txt")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (t, p) = l.split_once('|').unwrap();
            (t.to_string(), Grade::parse(p).unwrap())
        })
        .collect();
    let record = RunRecord::load(tmp.path()).unwrap();
    let got: HashMap<String, Grade> = record
        .results
        .unwrap()
        .grades
        .into_iter()
        .map(|g| (g.task, g.grade))
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn overrides_supersede_automatic_grades() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(cli(&["gen", "--seed", "9", "--out", out]).0, 0);
    assert_eq!(
        cli(&["run", "--out", out, "--adapter", "always_wrong"]).0,
        0
    );
    fs::write(tmp.path().join("override.txt"), "reasoning-d5|1|reviewed\n").unwrap();
    let (code, stdout, _) = cli(&["grade", "--out", out]);
    assert_eq!(code, 0);
    assert_eq!(stdout, "reasoning=35.71\nmemory=0.00\n");
    assert_eq!(cli(&["score", "--out", out]).1, stdout);
}

#[test]
fn report_sorts_rows_by_adapter() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = |n: &str| tmp.path().join(n).to_string_lossy().into_owned();
    let (w, o) = (dir("w"), dir("o"));
    assert_eq!(
        cli(&[
            "gen",
            "--seed",
            "1",
            "--out",
            &o,
            "--one-shot",
            "--adapter",
            "oracle"
        ])
        .0,
        0
    );
    assert_eq!(
        cli(&[
            "gen",
            "--seed",
            "1",
            "--out",
            &w,
            "--one-shot",
            "--adapter",
            "always_wrong"
        ])
        .0,
        0
    );
    let (code, table, _) = cli(&["report", &o, &w]);
    assert_eq!(code, 0);
    let rows: Vec<Vec<&str>> = table
        .lines()
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert_eq!(
        rows,
        [
            vec!["adapter", "score_r", "score_m"],
            vec!["always_wrong", "0.00", "0.00"],
            vec!["oracle", "100.00", "100.00"],
        ]
    );
    assert_eq!(cli(&["report", &dir("missing")]).0, 4);
}

#[test]
fn gen_overwrites_previous_results() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(
        cli(&[
            "gen",
            "--seed",
            "2",
            "--out",
            out,
            "--one-shot",
            "--adapter",
            "oracle"
        ])
        .0,
        0
    );
    assert!(tmp.path().join(GRADES_FILE).exists());
    assert_eq!(cli(&["gen", "--seed", "2", "--out", out]).0, 0);
    assert!(!tmp.path().join(GRADES_FILE).exists());
    assert_eq!(cli(&["score", "--out", out]).0, 4);
}

#[test]
fn render_lists_prompts_and_questions() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(cli(&["gen", "--seed", "42", "--out", out]).0, 0);
    let (code, text, _) = cli(&["render", "--out", out]);
    assert_eq!(code, 0);
    assert!(text.contains("Xiaohai is Xiaocui's father.\n"));
    assert!(text.contains("reasoning-d2: What's the relationship between Xiaoshi and Qianqian?\n"));
}

#[test]
fn remote_without_credentials_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(cli(&["gen", "--seed", "1", "--out", out]).0, 0);
    if std::env::var_os(rocar::engine::adapter::API_BASE_VAR).is_none() {
        assert_eq!(cli(&["run", "--out", out, "--adapter", "remote"]).0, 2);
    }
}

#[test]
fn unreachable_remote_exits_with_adapter_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let res = Resources::shipped();
    let record = generate_record(&res, 10, 1).unwrap();
    let adapter = rocar::engine::adapter::RemoteAdapter::new("http://127.0.0.1:9", "k", "m");
    let err = run_record(record, &res, tmp.path(), &adapter, false).unwrap_err();
    assert_eq!(err.exit_code(), 5);
    let kept = RunRecord::load(tmp.path()).unwrap().results.unwrap();
    assert!(kept.grades.iter().all(|g| g.grade == Grade::Zero));
    assert!(kept.transcript.iter().any(|e| e.role == Role::Error));
}
