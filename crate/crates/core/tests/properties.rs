use std::path::Path;

use proptest::prelude::*;

use pomt::bench::oracle::{brute_force_omt, LpValue, VarBox};
use pomt::bench::random::{random_lira, random_lra, RandomShape};
use pomt::bench::strip::{generate_sp, Encoding};
use pomt::bench::suite::{read_csv, run_suite, write_csv, RunRecord, RunStatus, Suite};
use pomt::omt::{satisfiable_below, solve, OmtConfig, OmtStatus};
use pomt::reduce::ReductionStrategy;
use pomt::{DeltaRational, Rational};

const STRATEGIES: [ReductionStrategy; 3] = [ReductionStrategy::None, ReductionStrategy::Basic, ReductionStrategy::Guided];

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn optimum_is_strategy_independent(seed in 10_000u64..20_000) {
        let p = random_lra(seed, &RandomShape::default());
        let mut seen = Vec::new();
        for s in STRATEGIES {
            for lemma in [false, true] {
                let o = solve(&p, &OmtConfig { learn_block_lemma: lemma, ..OmtConfig::with_strategy(s) }).unwrap();
                seen.push((o.status, o.value.clone()));
                for w in o.trace.iterations.windows(2) {
                    prop_assert!(w[1].ub < w[0].ub);
                }
                if let Some(v) = &o.value {
                    prop_assert!(!satisfiable_below(&p, Some(v)).unwrap());
                }
            }
        }
        prop_assert!(seen.iter().all(|x| *x == seen[0]));
    }

    #[test]
    fn lira_matches_grid_scan(seed in 10_000u64..20_000) {
        let shape = RandomShape { max_vars: 2, max_atoms: 5, ..RandomShape::default() };
        let (p, bounds) = random_lira(seed, &shape, -3, 3);
        let oracle = brute_force_omt(&p, &bounds).unwrap();
        let o = solve(&p, &OmtConfig::with_strategy(ReductionStrategy::Guided)).unwrap();
        match oracle {
            LpValue::Infeasible => prop_assert_eq!(o.status, OmtStatus::Unsat),
            LpValue::Unbounded => prop_assert_eq!(o.status, OmtStatus::Unbounded),
            LpValue::Min { value, attained } => {
                let v = o.value.unwrap();
                prop_assert_eq!(v.real, value);
                prop_assert_eq!(v.delta == Rational::from_integer(0.into()), attained);
            }
        }
    }

    #[test]
    fn csv_rows_survive_a_round_trip(
        rows in prop::collection::vec((any::<i32>(), 1i32..1000, -3i32..4, 0usize..100, 0.0f64..1e4, any::<u64>(), 0usize..5), 0..12)
    ) {
        let statuses = [RunStatus::Sat, RunStatus::Timeout, RunStatus::Unsat, RunStatus::Unbounded, RunStatus::Error];
        let records: Vec<RunRecord> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (n, d, k, it, t, seed, st))| RunRecord {
                instance: format!("inst \"{i}\", quoted"),
                config: "cfg".into(),
                status: statuses[st],
                ub: (st != 4).then(|| DeltaRational::new(Rational::new(n.into(), d.into()), Rational::from_integer(k.into()))),
                iterations: it,
                time_s: t,
                seed,
            })
            .collect();
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        prop_assert_eq!(read_csv(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn generated_instances_parse_back_identically(n in 1usize..7, seed in 0u64..1000, lira in any::<bool>()) {
        let enc = if lira { Encoding::Lira } else { Encoding::Lra };
        let (text, p, inst) = generate_sp(n, seed, enc).unwrap();
        let again = pomt::parse(&text).unwrap();
        prop_assert_eq!(p.cnf.clauses.len(), 4 * n + n * (n - 1) / 2);
        prop_assert_eq!(&again.cnf.clauses, &p.cnf.clauses);
        for i in 0..n {
            let x = p.var(&format!("x{i}")).unwrap();
            prop_assert_eq!(p.is_integer(x), inst.integer[i]);
        }
        prop_assert!(p.satisfied_by(&inst.row_placement(&p)).unwrap());
    }
}

#[test]
fn regression_fixture_sp8() {
    let suite = Suite::from_toml(&std::fs::read_to_string(fixture("sp8_s1.toml")).unwrap()).unwrap();
    let records = run_suite(&suite, Path::new(".")).unwrap();
    let mut buf = Vec::new();
    write_csv(&records, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), std::fs::read_to_string(fixture("sp8_s1.csv")).unwrap());
    let frozen = read_csv(std::fs::File::open(fixture("sp8_s1.csv")).unwrap()).unwrap();
    let it = |c: &str| frozen.iter().find(|r| r.config == c).unwrap().iterations;
    assert!(it("guided") <= it("none"));
}

#[test]
fn example_suite_reports_the_same_optimum_everywhere() {
    let dir = std::env::temp_dir().join(format!("example-suite-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("two_clauses.smt2"),
        "(declare-const x Real)(declare-const y Real)
         (assert (or (<= (- (* 2 x) (* 3 y)) 6) (<= x 4)))
         (assert (or (<= y 2) (<= y (+ (* (- 3) x) 9)) (< x (- 2))))
         (minimize (* (- 2) x))",
    )
    .unwrap();
    let mut toml = String::from("[settings]\ntiming = false\n[[instance]]\npath = \"two_clauses.smt2\"\n");
    for s in ["none", "basic", "guided"] {
        for lemma in [false, true] {
            toml += &format!("[[config]]\nname = \"{s}-{lemma}\"\nreduction = \"{s}\"\nblock_lemma = {lemma}\n");
        }
    }
    let records = run_suite(&Suite::from_toml(&toml).unwrap(), &dir).unwrap();
    assert_eq!(records.len(), 6);
    let minus12 = DeltaRational::from_real(Rational::from_integer((-12).into()));
    assert!(records.iter().all(|r| r.status == RunStatus::Sat && r.ub == Some(minus12.clone()) && r.instance == "two_clauses"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn maximized_objectives_are_reported_as_maxima() {
    let p = pomt::parse(
        "(declare-const a Int)(declare-const b Int)
         (assert (>= a 0))(assert (>= b 0))(assert (<= (+ (* 3 a) (* 4 b)) 10))
         (maximize (+ (* 2 a) (* 3 b)))",
    )
    .unwrap();
    let oracle = brute_force_omt(&p, &VarBox::uniform(0, 4)).unwrap();
    let seven = Rational::from_integer(7.into());
    assert_eq!(oracle, LpValue::Min { value: -seven.clone(), attained: true });
    let o = solve(&p, &OmtConfig::default()).unwrap();
    assert_eq!(p.user_value(o.value.as_ref().unwrap()), DeltaRational::from_real(seven));
}
