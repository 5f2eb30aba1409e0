use super::*;
use crate::engine::{Limits, UnknownReason, Verdict};

const EXAMPLE: &str = "p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 2 0\n";

fn entry(name: &str, text: &str) -> DatasetEntry {
    DatasetEntry::from_bytes(name.to_string(), text.as_bytes()).unwrap()
}

fn generated(n: usize) -> Vec<DatasetEntry> {
    let cfg = BooleanFamilyConfig::default();
    let entries = (0..n as u64)
        .map(|s| {
            let bytes = write_qdimacs(&generate_boolean_family(s, &cfg).unwrap());
            DatasetEntry::from_bytes(format!("f{s}.qdimacs"), &bytes).unwrap()
        })
        .collect();
    filter_trivial(entries).kept
}

fn result(decisions: u64, verdict: Verdict) -> EvalResult {
    EvalResult {
        file: String::new(),
        sha256: String::new(),
        heuristic: "random".into(),
        seed: 0,
        verdict,
        decisions,
        conflicts: 0,
        unknown_reason: UnknownReason::None,
        wall_seconds: 0.0,
    }
}

#[test]
fn sha256_known_value() {
    assert_eq!(
        sha256_hex(b"abc"),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
}

#[test]
fn trivial_formulas_are_removed() {
    let split = filter_trivial(vec![
        entry("unit.qdimacs", "p cnf 1 1\ne 1 0\n1 0\n"),
        entry("example.qdimacs", EXAMPLE),
    ]);
    assert_eq!(split.removed.len(), 1);
    assert_eq!(split.removed[0].name, "unit.qdimacs");
    assert_eq!(split.kept.len(), 1);
    assert_eq!(split.kept[0].name, "example.qdimacs");
}

#[test]
fn filter_partitions_its_input() {
    let cfg = BooleanFamilyConfig::default();
    let entries: Vec<DatasetEntry> = (0..60)
        .map(|s| {
            let bytes = write_qdimacs(&generate_boolean_family(s, &cfg).unwrap());
            DatasetEntry::from_bytes(format!("f{s:02}.qdimacs"), &bytes).unwrap()
        })
        .collect();
    let mut names: Vec<String> = entries.iter().map(|e| e.name.clone()).collect();
    let split = filter_trivial(entries);
    let mut out: Vec<String> = split
        .kept
        .iter()
        .chain(&split.removed)
        .map(|e| e.name.clone())
        .collect();
    names.sort();
    out.sort();
    assert_eq!(names, out);
    assert!(split.kept.iter().all(|e| !is_trivial(&e.formula)));
    assert!(split.removed.iter().all(|e| is_trivial(&e.formula)));
}

#[test]
fn manifest_round_trip_and_dataset_loading() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.qdimacs"), EXAMPLE).unwrap();
    fs::write(dir.path().join("b.qdimacs"), "p cnf 1 1\ne 1 0\n1 0\n").unwrap();
    fs::write(dir.path().join("c.qdimacs"), "p cnf 1 1\nbogus\n").unwrap();
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();

    let (entries, failures) = load_dir(dir.path()).unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0].name, "c.qdimacs");

    let rows = manifest_rows(&filter_trivial(entries), &failures);
    let statuses: Vec<(&str, &str)> = rows
        .iter()
        .map(|r| (r.file.as_str(), r.status.as_str()))
        .collect();
    assert_eq!(
        statuses,
        vec![("a.qdimacs", "kept"), ("b.qdimacs", "removed"), ("c.qdimacs", "unreadable")]
    );
    let path = dir.path().join(MANIFEST_NAME);
    write_manifest(&path, &rows).unwrap();
    assert_eq!(read_manifest(&path).unwrap(), rows);

    let data = load_dataset(dir.path()).unwrap();
    assert_eq!(data.len(), 1);
    assert_eq!(data[0].name, "a.qdimacs");

    fs::write(dir.path().join("a.qdimacs"), "p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n").unwrap();
    assert!(matches!(load_dataset(dir.path()), Err(HarnessError::Manifest(_))));
}

#[test]
fn generated_datasets_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = BooleanFamilyConfig::small();
    let pa = generate_dataset(&cfg, 9, 5, a.path()).unwrap();
    let pb = generate_dataset(&cfg, 9, 5, b.path()).unwrap();
    for (x, y) in pa.iter().zip(&pb) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
    let (entries, failures) = load_dir(a.path()).unwrap();
    assert_eq!((entries.len(), failures.len()), (5, 0));
}

#[test]
fn decision_limit_zero_leaves_everything_unknown() {
    let data = generated(80);
    let results = eval_sweep(&data, &HeuristicSpec::Random, Limits::decisions(0), 1).unwrap();
    assert_eq!(results.len(), data.len());
    for r in &results {
        assert_eq!(r.verdict, Verdict::Unknown);
        assert_eq!(r.unknown_reason, UnknownReason::DecisionLimit);
        assert_eq!(r.decisions, 0);
    }
}

#[test]
fn sweeps_are_deterministic_and_order_independent() {
    let data = generated(80);
    let limits = Limits::decisions(400);
    let strip = |mut rs: Vec<EvalResult>| {
        for r in &mut rs {
            r.wall_seconds = 0.0;
        }
        rs.sort_by(|a, b| a.file.cmp(&b.file));
        rs
    };
    for spec in [HeuristicSpec::Vsids, HeuristicSpec::Random] {
        let a = strip(eval_sweep(&data, &spec, limits, 5).unwrap());
        let mut reversed = data.clone();
        reversed.reverse();
        let b = strip(eval_sweep(&reversed, &spec, limits, 5).unwrap());
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.decisions <= 400));
    }
}

#[test]
fn heuristics_agree_where_both_solve() {
    let data = generated(80);
    let limits = Limits::decisions(400);
    let random = eval_sweep(&data, &HeuristicSpec::Random, limits, 2).unwrap();
    let vsids = eval_sweep(&data, &HeuristicSpec::Vsids, limits, 2).unwrap();
    let mut both = 0;
    for (r, v) in random.iter().zip(&vsids) {
        if r.verdict != Verdict::Unknown && v.verdict != Verdict::Unknown {
            assert_eq!(r.verdict, v.verdict, "{}", r.file);
            both += 1;
        }
    }
    assert!(both > 0);
}

#[test]
fn results_csv_round_trip() {
    let data = generated(20);
    let results = eval_sweep(&data, &HeuristicSpec::Vsids, Limits::decisions(5), 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_results(&path, &results).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(
        "schema,file,sha256,heuristic,seed,verdict,decisions,conflicts,unknown_reason\n"
    ));
    let back = read_results(&path).unwrap();
    for (a, b) in results.iter().zip(&back) {
        assert_eq!(
            EvalResult {
                wall_seconds: 0.0,
                ..a.clone()
            },
            *b
        );
    }
    write_timing(&dir.path().join("t.csv"), &results).unwrap();
}

#[test]
fn cactus_examples() {
    let rs = vec![
        result(5, Verdict::True),
        result(2, Verdict::False),
        result(400, Verdict::Unknown),
        result(7, Verdict::True),
    ];
    assert_eq!(cactus_series(&rs), vec![(1, 2), (2, 5), (3, 7)]);
    assert!(cactus_series(&[result(3, Verdict::Unknown)]).is_empty());

    let mut buf = Vec::new();
    write_series(&mut buf, &cactus_series(&rs)).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "1 2\n2 5\n3 7\n");
}
