use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pomt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pomt")).args(args).output().unwrap()
}

fn problem(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name).to_string_lossy().into_owned()
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("pomt-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_example_under_every_reduction() {
    for r in ["none", "basic", "guided"] {
        for lemma in ["on", "off"] {
            let o = pomt(&["solve", &problem("two_clauses.smt2"), "--reduction", r, "--block-lemma", lemma]);
            assert_eq!(o.status.code(), Some(0));
            let out = stdout(&o);
            assert!(out.starts_with("sat\noptimum -12\n"), "{out}");
            assert!(out.contains("x = 6"));
        }
    }
}

#[test]
fn exit_codes() {
    let d = scratch("codes");
    let unsat = d.join("unsat.smt2");
    std::fs::write(&unsat, "(declare-const x Real)(assert (< x 0))(assert (> x 0))(minimize x)").unwrap();
    assert_eq!(pomt(&["solve", unsat.to_str().unwrap()]).status.code(), Some(10));
    let unbounded = d.join("unbounded.smt2");
    std::fs::write(&unbounded, "(assert true)(minimize x)").unwrap();
    assert_eq!(pomt(&["solve", unbounded.to_str().unwrap()]).status.code(), Some(30));
    let o = pomt(&["solve", &problem("two_clauses.smt2"), "--max-iterations", "1"]);
    assert_eq!(o.status.code(), Some(20));
    assert!(stdout(&o).starts_with("timeout\nbest "));
    let bad = d.join("bad.smt2");
    std::fs::write(&bad, "(declare-const x Real)(assert (<= (* x x) 1))(minimize x)").unwrap();
    let o = pomt(&["solve", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-linear"));
    assert_eq!(pomt(&["solve", "/no/such/file.smt2"]).status.code(), Some(1));
    std::fs::remove_dir_all(&d).unwrap();
}

#[test]
fn strict_and_integer_problems() {
    let o = pomt(&["solve", &problem("strict.smt2"), "--reduction", "guided"]);
    assert!(stdout(&o).contains("optimum 1+1d"));
    for mode in ["full", "truncated"] {
        let o = pomt(&["solve", &problem("knapsack.smt2"), "--lia", mode]);
        assert!(stdout(&o).contains("optimum 7"), "{mode}");
    }
}

#[test]
fn oracle_agrees() {
    assert_eq!(stdout(&pomt(&["oracle", &problem("two_clauses.smt2")])), "optimum -12\n");
    assert_eq!(stdout(&pomt(&["oracle", &problem("strict.smt2")])), "optimum 1+1d\n");
    assert_eq!(stdout(&pomt(&["oracle", &problem("knapsack.smt2"), "--box", "*=0..4"])), "optimum 7\n");
    assert_eq!(pomt(&["oracle", &problem("knapsack.smt2")]).status.code(), Some(1));
}

#[test]
fn generate_trace_and_dimacs() {
    let d = scratch("gen");
    let f = d.join("sp.smt2");
    let o = pomt(&["generate", "sp", "--n", "4", "--seed", "3", "--encoding", "lira", "-o", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&f).unwrap();
    assert_eq!(text, stdout(&pomt(&["generate", "sp", "--n", "4", "--seed", "3", "--encoding", "lira"])));
    let trace = d.join("trace.csv");
    let cnf = d.join("sp.cnf");
    let o = pomt(&[
        "solve",
        f.to_str().unwrap(),
        "--reduction",
        "guided",
        "--trace",
        trace.to_str().unwrap(),
        "--dimacs",
        cnf.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let t = std::fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("iteration,elapsed_s,ub,dropped,minimize_calls,reduced_size\n"));
    assert!(t.lines().count() >= 2);
    assert!(std::fs::read_to_string(&cnf).unwrap().starts_with("p cnf "));
    std::fs::remove_dir_all(&d).unwrap();
}

#[test]
fn bench_writes_rows_and_scatter_files() {
    let d = scratch("bench");
    let suite = d.join("suite.toml");
    std::fs::write(
        &suite,
        format!(
            "[settings]\ntiming = false\n\
             [[instance]]\npath = \"{}\"\n\
             [[instance]]\ngenerate = \"sp\"\nn = 3\nseed = 1\n\
             [[instance]]\ngenerate = \"sp\"\nn = 3\nseed = 2\nencoding = \"lira\"\n\
             [[config]]\nname = \"none\"\n\
             [[config]]\nname = \"basic\"\nreduction = \"basic\"\n\
             [[config]]\nname = \"guided\"\nreduction = \"guided\"\nblock_lemma = true\n",
            problem("two_clauses.smt2")
        ),
    )
    .unwrap();
    let out = d.join("res/results.csv");
    let o = pomt(&["bench", "--suite", suite.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 10);
    assert!(csv.lines().filter(|l| l.starts_with("two_clauses,")).all(|l| l.contains(",sat,-12,")));
    for m in ["time", "ub", "iterations"] {
        assert!(d.join(format!("res/{m}_none_vs_guided.csv")).exists());
    }
    let again = d.join("again.csv");
    pomt(&["bench", "--suite", suite.to_str().unwrap(), "-o", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&again).unwrap(), csv.as_bytes());
    std::fs::remove_dir_all(&d).unwrap();
}
