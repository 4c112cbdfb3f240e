//! One PASS/FAIL line per acceptance criterion. Each check runs under a
//! pinned time limit; the process exits non-zero when any check fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use emrkit_core::{
    parse_emr, pretty_print, repair, stub_names, validate, ApiCatalog, ApiEntry, EmrAst, Expr, Severity,
    StatementKind, WLC_AMP,
};
use emrkit_grader::{emr_size_stats, load_annotations, load_emr_dir, load_survey, summarize_survey, Label, Rating, SurveyStatement};
use emrkit_runtime::{
    builtin_inputs, create_followup, eval_bool, evaluate_emr, shop_stubs, StubBindings, Transform, Value, VerdictValue,
};
use emrkit_sut::{Action, ActionSequence, Fault, MockShop};
use emrkit_testkit::actions::{sequence, transform};
use emrkit_testkit::dsl::{inject_ampersands, program};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRng, TestRunner};

/// Tolerance on one-decimal percentages.
const PERCENT_TOLERANCE: f64 = 0.05;

const FIG4_STUBS: [&str; 6] = [
    "isSearchAction",
    "getFilterTypes",
    "applyFilter",
    "notSameFilterApplied",
    "fewerResults",
    "moreRelevantResults",
];

const FILTER_TYPES: [&str; 5] = ["category", "brand", "price", "rating", "availability"];

type Outcome = Result<String, String>;

/// A connective and its Java equivalent.
type TruthRow = (&'static str, fn(bool, bool) -> bool);

struct Check {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn fig4() -> Result<EmrAst, String> {
    parse_emr(&read(&fixtures().join("fig4.smrl"))?).map_err(|e| e.to_string())
}

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= PERCENT_TOLERANCE + 1e-9
}

fn canonical_round_trip() -> Outcome {
    let ast = fig4()?;
    let printed = pretty_print(&ast);
    let again = parse_emr(&printed).map_err(|e| format!("reprint does not parse: {e}"))?;
    ensure(again.structurally_eq(&ast), || "reprinted tree differs".into())?;
    let stubs: BTreeSet<String> = stub_names(&validate(&ast, &ApiCatalog::empty())).into_iter().collect();
    let want: BTreeSet<String> = FIG4_STUBS.iter().map(|s| s.to_string()).collect();
    ensure(stubs == want, || format!("stubs {stubs:?}"))?;
    Ok(format!("{} stubs", stubs.len()))
}

fn expression(text: &str) -> Result<Expr, String> {
    let ast = parse_emr(&format!("MR {{{{ {text}; }}}}")).map_err(|e| e.to_string())?;
    match &ast.body.statements[0].kind {
        StatementKind::Expr(e) => Ok(e.clone()),
        other => Err(format!("not an expression: {other:?}")),
    }
}

fn boolean_semantics() -> Outcome {
    let table: [TruthRow; 4] = [
        ("IMPLIES(x, y)", |x, y| !x || y),
        ("NOT(x)", |x, _| !x),
        ("OR(x, y)", |x, y| x || y),
        ("AND(x, y)", |x, y| x && y),
    ];
    let mut rows = 0;
    for (text, java) in table {
        let e = expression(text)?;
        for x in [false, true] {
            for y in [false, true] {
                let env = [("x".to_string(), Value::Bool(x)), ("y".to_string(), Value::Bool(y))].into();
                let got = eval_bool(&e, &env).map_err(|err| format!("{text}: {err}"))?;
                ensure(got == java(x, y), || format!("{text} with x={x}, y={y} gave {got}"))?;
                rows += 1;
            }
        }
    }
    Ok(format!("{rows} rows"))
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

fn repair_corpus() -> Outcome {
    let mut sources = vec![read(&fixtures().join("fig4.smrl"))?];
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixtures().join("emrs"))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    files.sort();
    for f in files {
        sources.push(read(&f)?);
    }
    let mut gen = runner(1);
    let strategy = program();
    let mut mutated = 0;
    let mut defects = 0;
    let mut i = 0;
    while mutated < 30 && i < 2000 {
        if i >= sources.len() {
            let ast = strategy.new_tree(&mut gen).map_err(|e| e.to_string())?.current();
            sources.push(pretty_print(&ast));
        }
        let clean = &sources[i];
        let choose: Vec<bool> = (0..64).map(|k| (k + i) % 3 != 1).collect();
        let (broken, injected) = inject_ampersands(clean, &choose);
        i += 1;
        if injected == 0 {
            continue;
        }
        mutated += 1;
        defects += injected;
        let (fixed, log) = repair(&broken);
        parse_emr(&fixed).map_err(|e| format!("source {i} still broken: {e}"))?;
        ensure(log.count(WLC_AMP) == injected && log.entries.len() == injected, || {
            format!("source {i}: {} entries for {injected} defects", log.entries.len())
        })?;
        ensure(&fixed == clean, || format!("source {i} not restored"))?;
        let (twice, second) = repair(&fixed);
        ensure(twice == fixed && second.is_empty(), || format!("source {i}: repair not idempotent"))?;
    }
    ensure(mutated >= 20, || format!("only {mutated} mutated sources"))?;
    Ok(format!("{mutated} sources, {defects} defects"))
}

fn label_distribution() -> Outcome {
    let emrs = load_emr_dir(&fixtures().join("emrs")).map_err(|e| e.to_string())?;
    let ann = load_annotations(&fixtures().join("grading/exp2-annotations.jsonl"), &emrs).map_err(|e| e.to_string())?;
    let asts: Vec<EmrAst> = emrs.values().cloned().collect();
    let statements = emr_size_stats(&asts).ok_or("no EMRs")?.total;
    let report = emrkit_grader::summarize_annotations(&ann, statements);
    let multiset = [
        (Label::C, 52),
        (Label::CLC, 54),
        (Label::AI, 1),
        (Label::WS, 3),
        (Label::WI, 0),
        (Label::IE, 3),
        (Label::INE, 1),
        (Label::ITE, 9),
        (Label::ES, 1),
        (Label::ENO, 2),
        (Label::WAU, 0),
        (Label::WLC, 10),
        (Label::MISS, 3),
    ];
    let mut problems = Vec::new();
    for (label, n) in multiset {
        if report.counts.get(&label).copied() != Some(n) {
            problems.push(format!("{} count {:?} (want {n})", label.code(), report.counts.get(&label)));
        }
    }
    if report.statements != 136 {
        problems.push(format!("statements {}", report.statements));
    }
    if report.labels != 139 {
        problems.push(format!("labels {} (want 139)", report.labels));
    }
    if report.correct_statements != 107 {
        problems.push(format!("correct statements {} (want 107)", report.correct_statements));
    }
    if !close(report.correct_rate, 78.6) {
        problems.push(format!("correct rate {:.1}% (want 78.6% +/- {PERCENT_TOLERANCE})", report.correct_rate));
    }
    for (label, want) in [(Label::C, 38.2), (Label::CLC, 39.7), (Label::WLC, 7.4), (Label::ITE, 6.6)] {
        let got = report.percentages.get(&label).copied().unwrap_or(f64::NAN);
        if !close(got, want) {
            problems.push(format!("{} {got:.1}% (want {want}%)", label.code()));
        }
    }
    ensure(problems.is_empty(), || problems.join("; "))?;
    Ok(format!("{} labels, {} correct ({:.1}%)", report.labels, report.correct_statements, report.correct_rate))
}

fn survey_summary() -> Outcome {
    let report = summarize_survey(&load_survey(&fixtures().join("grading/exp1-mr-survey.csv")).map_err(|e| e.to_string())?);
    let want = [
        (SurveyStatement::S1, [3, 46, 12, 3, 0], 49, 77.0),
        (SurveyStatement::S2, [0, 41, 10, 12, 1], 41, 64.0),
        (SurveyStatement::S3, [0, 18, 19, 24, 3], 18, 28.0),
    ];
    let mut shown = Vec::new();
    for (statement, counts, positive, percent) in want {
        let row = report.row(statement).ok_or_else(|| format!("{statement} missing"))?;
        let got: Vec<usize> = Rating::ALL.iter().map(|r| row.counts.get(r).copied().unwrap_or(0)).collect();
        ensure(got == counts, || format!("{statement} counts {got:?}"))?;
        ensure(row.responses == 64 && row.positive == positive, || {
            format!("{statement} positive {}/{}", row.positive, row.responses)
        })?;
        ensure(row.positive_percent == Some(percent), || {
            format!("{statement} rate {:?} (want {percent})", row.positive_percent)
        })?;
        shown.push(format!("{statement} {}/{} ({percent}%)", row.positive, row.responses));
    }
    Ok(shown.join(", "))
}

fn size_stats() -> Outcome {
    let emrs = load_emr_dir(&fixtures().join("emrs")).map_err(|e| e.to_string())?;
    let asts: Vec<EmrAst> = emrs.values().cloned().collect();
    let s = emr_size_stats(&asts).ok_or("no EMRs")?;
    ensure(
        s.emrs == 10 && s.min == 10 && s.max == 20 && s.total == 136 && close(s.mean, 13.6),
        || format!("{s:?}"),
    )?;
    Ok(format!("{} EMRs: min {}, mean {:.1}, max {}, total {}", s.emrs, s.min, s.mean, s.max, s.total))
}

fn verdict_soundness() -> Outcome {
    let ast = fig4()?;
    let stubs = shop_stubs();
    let inputs = builtin_inputs();
    let correct = MockShop::new();
    let mut passes = 0;
    for input in &inputs {
        let v = evaluate_emr(&ast, &input.sequence, &correct, &stubs).map_err(|e| format!("{}: {e}", input.name))?;
        ensure(v.value != VerdictValue::Fail, || format!("Fail on the correct shop for {}", input.name))?;
        passes += usize::from(v.value == VerdictValue::Pass);
    }
    let faulty = MockShop::with_faults([Fault::IgnoreFilter]);
    let mut named = 0;
    for input in &inputs {
        let v = evaluate_emr(&ast, &input.sequence, &faulty, &stubs).map_err(|e| format!("{}: {e}", input.name))?;
        if v.value == VerdictValue::Fail {
            named += v
                .failing_bindings
                .iter()
                .filter(|b| {
                    b.bindings
                        .iter()
                        .any(|l| FILTER_TYPES.iter().any(|f| l.value == format!("\"{f}\"")))
                })
                .count();
        }
    }
    ensure(named >= 1, || "no failing binding names a filter type under ignore-filter".into())?;
    Ok(format!("{} inputs, {passes} Pass on the correct shop, {named} filter-type failures with the fault", inputs.len()))
}

fn binary() -> Result<PathBuf, String> {
    let exe = std::env::current_exe().map_err(|e| e.to_string())?;
    let dir = exe.parent().and_then(Path::parent).ok_or("no target directory")?;
    let bin = dir.join(format!("emrkit{}", std::env::consts::EXE_SUFFIX));
    ensure(bin.exists(), || format!("{} not built (run cargo build -p emrkit-cli)", bin.display()))?;
    Ok(bin)
}

fn tree(root: &Path) -> Result<Vec<(PathBuf, Vec<u8>)>, String> {
    let mut all = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let p = e.map_err(|e| e.to_string())?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = std::fs::read(&p).map_err(|e| e.to_string())?;
                all.push((p.strip_prefix(root).unwrap().to_path_buf(), bytes));
            }
        }
    }
    all.sort();
    Ok(all)
}

fn pipeline_determinism() -> Outcome {
    let bin = binary()?;
    let scripts = fixtures().join("llm/scripts.json");
    let doc = fixtures().join("docs/shop-requirements.md");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out = Command::new(&bin)
            .arg("--scripts")
            .arg(&scripts)
            .arg("--out")
            .arg(dir.path())
            .arg("pipeline")
            .arg(&doc)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("pipeline exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
        })?;
        runs.push(tree(dir.path())?);
    }
    let names: Vec<String> = runs[0].iter().map(|(p, _)| p.display().to_string()).collect();
    for required in ["mrs.json", "emrs/MR1.smrl", "emrs/MR1.repair.jsonl"] {
        ensure(names.iter().any(|n| n == required), || format!("{required} missing"))?;
    }
    let transcripts = names.iter().filter(|n| n.starts_with("transcripts/")).count();
    ensure(transcripts == 2, || format!("{transcripts} transcripts"))?;
    if runs[0] != runs[1] {
        let differing: Vec<String> = runs[0]
            .iter()
            .zip(&runs[1])
            .filter(|(a, b)| a != b)
            .map(|(a, _)| a.0.display().to_string())
            .collect();
        return Err(format!("outputs differ: {differing:?}"));
    }
    Ok(format!("{} files identical", names.len()))
}

fn property<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<String, String> {
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))?;
    Ok(format!("{name} x{cases}"))
}

fn round_trip_property() -> Result<String, String> {
    property("round trip", 128, program(), |ast| {
        let printed = pretty_print(&ast);
        let again = parse_emr(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert!(again.structurally_eq(&ast), "{}", printed);
        Ok(())
    })
}

fn copy_isolation_property() -> Result<String, String> {
    let strategy = sequence().prop_flat_map(|s| {
        let n = s.len();
        (Just(s), transform(n))
    });
    property("copy isolation", 64, strategy, |(source, t): (ActionSequence, Transform)| {
        let before = source.clone();
        let mut followup = create_followup(&source, &t).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&source, &before);
        for a in &mut followup.actions {
            a.kind.push('!');
            a.parameters.clear();
        }
        prop_assert_eq!(&source, &before);
        let src = "MR {{ IMPLIES(CREATE(Input(2), Input(1)), Input(2).actions().equals(Input(1).actions())); }}";
        let v = evaluate_emr(&parse_emr(src).unwrap(), &source, &MockShop::new(), &StubBindings::new())
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(v.value, VerdictValue::Pass);
        Ok(())
    })
}

fn vacuity_property() -> Result<String, String> {
    property("vacuity", 64, (0usize..10, any::<bool>()), |(n, consequent)| {
        let src = format!(
            "MR {{{{ for (var a : Input(1).actions()) {{ IMPLIES(a.getKind().equals(\"never\"), {consequent}); }} }}}}"
        );
        let input = ActionSequence::new(1, vec![Action::new("view_cart"); n]);
        let v = evaluate_emr(&parse_emr(&src).unwrap(), &input, &MockShop::new(), &StubBindings::new())
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_ne!(v.value, VerdictValue::Fail);
        prop_assert_eq!(v.value, VerdictValue::Inapplicable);
        Ok(())
    })
}

fn monotonicity_property() -> Result<String, String> {
    let strategy = (program(), prop::collection::vec(any::<bool>(), 16));
    property("monotonicity", 64, strategy, |(ast, picks)| {
        let stubs = |c: &ApiCatalog| validate(&ast, c).iter().filter(|d| d.severity == Severity::Stub).count();
        let mut names: Vec<String> = Vec::new();
        for e in ast.exprs() {
            for n in e.call_names() {
                if !names.iter().any(|m| m == n) {
                    names.push(n.to_string());
                }
            }
        }
        let mut catalog = ApiCatalog::empty();
        let mut previous = stubs(&catalog);
        for (name, pick) in names.iter().zip(picks.iter().cycle()) {
            if *pick {
                catalog = catalog.with(ApiEntry::new(name.clone(), &[], "boolean", "acceptance entry"));
                let now = stubs(&catalog);
                prop_assert!(now <= previous);
                previous = now;
            }
        }
        Ok(())
    })
}

fn property_suites() -> Outcome {
    let parts = [
        round_trip_property()?,
        copy_isolation_property()?,
        vacuity_property()?,
        monotonicity_property()?,
    ];
    Ok(parts.join(", "))
}

fn main() -> ExitCode {
    let checks = [
        Check { name: "canonical EMR round trip", limit: Duration::from_secs(1), run: canonical_round_trip },
        Check { name: "boolean semantics", limit: Duration::from_secs(1), run: boolean_semantics },
        Check { name: "repair corpus", limit: Duration::from_secs(5), run: repair_corpus },
        Check { name: "label distribution", limit: Duration::from_secs(1), run: label_distribution },
        Check { name: "survey summary", limit: Duration::from_secs(1), run: survey_summary },
        Check { name: "EMR size stats", limit: Duration::from_secs(1), run: size_stats },
        Check { name: "MT verdict soundness", limit: Duration::from_secs(10), run: verdict_soundness },
        Check { name: "mock-pipeline determinism", limit: Duration::from_secs(10), run: pipeline_determinism },
        Check { name: "property suites", limit: Duration::from_secs(60), run: property_suites },
    ];
    let mut failed = 0;
    for check in &checks {
        let start = Instant::now();
        let outcome = (check.run)();
        let elapsed = start.elapsed();
        let timing = format!("{} ms, limit {} ms", elapsed.as_millis(), check.limit.as_millis());
        match outcome {
            Ok(detail) if elapsed <= check.limit => println!("PASS  {}: {detail} ({timing})", check.name),
            Ok(detail) => {
                failed += 1;
                println!("FAIL  {}: over the time limit; {detail} ({timing})", check.name);
            }
            Err(why) => {
                failed += 1;
                println!("FAIL  {}: {why} ({timing})", check.name);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
