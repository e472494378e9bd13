use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use picky::grammar::Grammar;
use picky::model::{load_models, Models};
use picky::treebank::parse_treebank;

fn fixture(name: &str) -> &'static str {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name);
    Box::leak(path.into_os_string().into_string().unwrap().into_boxed_str())
}

fn picky(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_picky"))
        .args(args)
        .env_remove("PICKY_LOG")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn picky");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Trains `trees` against `grammar` into a temp dir and returns the model path.
fn train(dir: &Path, trees: &str, grammar: &str) -> PathBuf {
    let out = dir.join(format!("{trees}.model"));
    let o = picky(&["train", fixture(trees), "--grammar", fixture(grammar), "-o", s(&out)], "");
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn trained_models_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path(), "c0.trees", "g0.grammar");
    let g = Grammar::parse(&fs::read_to_string(fixture("g0.grammar")).unwrap()).unwrap();
    let trees = parse_treebank(&fs::read_to_string(fixture("c0.trees")).unwrap()).unwrap();
    let expected = Models::train_trees(&g, &trees).unwrap();
    let written = load_models(&fs::read_to_string(&model).unwrap(), &g).unwrap();
    assert_eq!(written, expected);
}

#[test]
fn train_without_grammar_writes_an_induced_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c0.model");
    let o = picky(&["train", fixture("c0.trees"), "-o", s(&out)], "");
    assert!(o.status.success(), "{}", stderr(&o));
    let g = Grammar::parse(&fs::read_to_string(out.with_extension("grammar")).unwrap()).unwrap();
    assert_eq!(g.rules().len(), 6);
    let text = fs::read_to_string(&out).unwrap();
    load_models(&text, &g).unwrap();
}

#[test]
fn train_names_the_tree_the_grammar_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.trees");
    fs::write(&bad, "(S (NP (det the) (n cow)) (VP (v mooed)))\n(S (VP (v mooed)))\n").unwrap();
    let o = picky(&["train", s(&bad), "--grammar", fixture("g0.grammar"), "-o", s(&dir.path().join("m"))], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tree 2"), "{}", stderr(&o));
    assert!(stderr(&o).contains("S -> VP"), "{}", stderr(&o));
}

#[test]
fn parses_the_fixture_sentence() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path(), "c0.trees", "g0.grammar");
    let args = ["parse", "--grammar", fixture("g0.grammar"), "--model", s(&model), "--stats"];
    let o = picky(&args, "the cow mooed\n");
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "(S (NP (det the) (n cow)) (VP (v mooed)))\n\
         # status=parsed predictions=6 completions=3 edges=8 phase=I log_prob=-0.405465\n"
    );
}

#[test]
fn pre_tagged_tokens_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path(), "c0.trees", "g0.grammar");
    let o = picky(
        &["parse", "--grammar", fixture("g0.grammar"), "--model", s(&model)],
        "the_det horse_n mooed\n",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "(S (NP (det the) (n horse)) (VP (v mooed)))\n");
}

#[test]
fn tight_budget_gives_noparse() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path(), "c0.trees", "g0.grammar");
    let args = [
        "parse", "--grammar", fixture("g0.grammar"), "--model", s(&model),
        "--phases", "I", "--max-edges", "5", "--stats",
    ];
    let o = picky(&args, "the cow raced past the barn past the barn\n");
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("NOPARSE\n"), "{out}");
    assert!(out.contains("edges=5") && out.ends_with("budget_exhausted\n"), "{out}");
}

#[test]
fn restart_prints_a_partial_parse() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path(), "directions.trees", "directions.grammar");
    let base = ["parse", "--grammar", fixture("directions.grammar"), "--model", s(&model)];
    let input = "how do I how do I get to MIT\n";

    let o = picky(&base, input);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "NOPARSE\n");

    let o = picky(&[&base[..], &["--allow-partial"]].concat(), input);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        stdout(&o),
        "PARTIAL((S (wh how) (aux do) (NP (pro I)) (VP (v get) (PP (p to) (NP (name MIT))))))\n"
    );
}

#[test]
fn output_is_the_same_for_any_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path(), "gen_train.trees", "gen.grammar");
    let run = |jobs: &str| {
        let o = picky(
            &[
                "sweep", "--grammar", fixture("gen.grammar"), "--model", s(&model),
                "--test", fixture("gen_test.trees"), "--sweep-phases", "--jobs", jobs,
            ],
            "",
        );
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn sweeps_reproduce_the_golden_tables() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path(), "gen_train.trees", "gen.grammar");
    let base = [
        "sweep", "--grammar", fixture("gen.grammar"), "--model", s(&model),
        "--test", fixture("gen_test.trees"),
    ];
    let golden = |name: &str| fs::read_to_string(Path::new(fixture("golden")).join(name)).unwrap();
    for (extra, name) in [
        (&["--sweep-phases"][..], "phase_sweep.txt"),
        (&["--sweep-phases", "--format", "csv"][..], "phase_sweep.csv"),
        (&["--sweep-edges"][..], "edge_sweep.txt"),
    ] {
        let o = picky(&[&base[..], extra].concat(), "");
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o), golden(name), "{name}");
    }
}

#[test]
fn csv_has_one_header() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path(), "gen_train.trees", "gen.grammar");
    let o = picky(
        &[
            "sweep", "--grammar", fixture("gen.grammar"), "--model", s(&model),
            "--test", fixture("gen_test.trees"), "--sweep-edges", "100,unlimited", "--format", "csv",
        ],
        "",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let header = out.lines().next().unwrap();
    assert_eq!(out.lines().filter(|l| *l == header).count(), 1);
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn eval_by_phase_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path(), "gen_train.trees", "gen.grammar");
    let o = picky(
        &[
            "eval", "--grammar", fixture("gen.grammar"), "--model", s(&model),
            "--test", fixture("gen_test.trees"), "--by-phase",
        ],
        "",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let golden = fs::read_to_string(fixture("golden/by_phase.txt")).unwrap();
    assert!(out.ends_with(&golden), "{out}");
    assert!(out.contains("I,II,III |        3.05 |        0.78 |   100.0% |   0.0%"), "{out}");
}

#[test]
fn overrides_flip_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path(), "c0.trees", "g0.grammar");
    let ov = dir.path().join("ov.txt");
    fs::write(&ov, "# judged by hand\n1 incorrect\n").unwrap();
    let o = picky(
        &[
            "eval", "--grammar", fixture("g0.grammar"), "--model", s(&model),
            "--test", fixture("c0.trees"), "--overrides", s(&ov), "--format", "csv",
        ],
        "",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(row.contains(",66.67,33.33,0.00,3"), "{row}");
}

#[test]
fn unknown_phase_is_a_usage_error() {
    let o = picky(&["parse", "--grammar", "x", "--model", "y", "--phases", "I,IV"], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown phase"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_reported() {
    let o = picky(&["parse", "--grammar", "/nonexistent/g", "--model", "/nonexistent/m"], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/g"), "{}", stderr(&o));
}

#[test]
fn oracle_lists_every_parse() {
    let g1 = fixture("g1.grammar");
    let words = "the cow raced the barn past the barn";
    let o = picky(&[&["oracle", "--grammar", g1][..], &words.split(' ').collect::<Vec<_>>()].concat(), "");
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("(S")).count(), 2);
    assert!(out.ends_with("# 2 parses\n"));

    let o = picky(
        &[&["oracle", "--grammar", g1, "--cap", "1"][..], &words.split(' ').collect::<Vec<_>>()].concat(),
        "",
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cap of 1"), "{}", stderr(&o));

    let o = picky(&["oracle", "--grammar", g1, "the", "the", "cow"], "");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "# 0 parses\n");
}

#[test]
fn oracle_scores_with_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path(), "c0.trees", "g0.grammar");
    let o = picky(
        &["oracle", "--grammar", fixture("g0.grammar"), "--model", s(&model), "the", "cow", "mooed"],
        "",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let first = stdout(&o).lines().next().unwrap().to_string();
    let (p, tree) = first.split_once('\t').unwrap();
    assert!((p.parse::<f64>().unwrap() - 2.0 / 3.0).abs() < 1e-6, "{first}");
    assert_eq!(tree, "(S (NP (det the) (n cow)) (VP (v mooed)))");
}
