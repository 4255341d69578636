use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bilinear_cli::report::{Payload, Report, Status};
use bilinear_core::io::read_tensor;
use bilinear_core::schmidt::verify_representation;
use bilinear_core::schur::verify_schur;
use bilinear_core::synth;
use bilinear_core::{verify_triple, Dims};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn bilinear(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bilinear"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_report(args: &[&str]) -> (Report, i32) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = bilinear(&all);
    let text = String::from_utf8(out.stdout).unwrap();
    let report: Report = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    (report, out.status.code().unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn norm_of_example_one() {
    let f = data("example1.json");
    let out = bilinear(&["norm", path(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("bilinear_norm: 3.000000000000"), "{text}");
    assert!(text.contains("hs_norm: 3.605551275464"), "{text}");

    let (report, code) = json_report(&["norm", path(&f)]);
    assert_eq!(code, 0);
    let Some(Payload::Norm(n)) = report.result else {
        panic!()
    };
    assert!((n.bilinear_norm - 3.0).abs() < 1e-12);
    assert!((n.hs_norm - 13f64.sqrt()).abs() < 1e-15);
}

#[test]
fn zero_tensor_norms() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("zero.json");
    std::fs::write(&f, r#"{"dims":[2,2,2],"values":[0,0,0,0,0,0,0,0]}"#).unwrap();
    let (report, code) = json_report(&["norm", path(&f)]);
    assert_eq!(code, 0);
    let Some(Payload::Norm(n)) = report.result else {
        panic!()
    };
    assert_eq!((n.bilinear_norm, n.hs_norm), (0.0, 0.0));
    assert!(n.maximizer.is_none());

    let (report, _) = json_report(&["spectrum", path(&f)]);
    let Some(Payload::Spectrum(s)) = report.result else {
        panic!()
    };
    assert!(s.entries.is_empty());
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dims\": [1, 2").unwrap();
    let out = bilinear(&["norm", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let (report, code) = json_report(&["spectrum", path(&bad)]);
    assert_eq!(code, 2);
    assert_eq!(report.status, Status::Error);

    let missing = dir.path().join("missing.json");
    assert_eq!(bilinear(&["schmidt", path(&missing)]).status.code(), Some(2));
    let f = data("example1.json");
    assert_eq!(bilinear(&["norm", path(&f), "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(bilinear(&["norm", path(&f), "--starts", "0"]).status.code(), Some(2));
}

#[test]
fn spectrum_flags() {
    let (report, code) = json_report(&["spectrum", path(&data("example1.json"))]);
    assert_eq!(code, 0);
    let Some(Payload::Spectrum(s)) = report.result else {
        panic!()
    };
    let top_two: Vec<(f64, bool)> = s.entries[..2]
        .iter()
        .map(|e| (e.triple.tau, e.ordered.ordered))
        .collect();
    assert_eq!(top_two, vec![(3.0, true), (2.0, true)]);
    assert!(s.entries[2..].iter().all(|e| !e.ordered.ordered));

    let (report, _) = json_report(&["spectrum", path(&data("example2.json"))]);
    let Some(Payload::Spectrum(s)) = report.result else {
        panic!()
    };
    assert!(s.entries.iter().all(|e| !e.ordered.ordered));
}

#[test]
fn schmidt_exit_codes_and_round_trip() {
    for (file, code, terms) in [("example1.json", 0, 2), ("ordered3.json", 0, 3)] {
        let f = data(file);
        let (report, c) = json_report(&["schmidt", path(&f)]);
        assert_eq!(c, code);
        assert_eq!(report.status, Status::Ok);
        let Some(Payload::Schmidt(s)) = report.result else {
            panic!()
        };
        assert_eq!(s.representation.terms.len(), terms);
        let t = read_tensor(&f).unwrap();
        assert!(verify_representation(&t, &s.representation, 1e-9).unwrap().passed());
    }
    let (report, c) = json_report(&["schmidt", path(&data("example2.json"))]);
    assert_eq!(c, 3);
    assert_eq!(report.status, Status::Failed);
    assert!(report.message.unwrap().contains("NotOrdered"));
}

#[test]
fn schur_exit_codes() {
    let (report, c) = json_report(&["schur", path(&data("diag_schur.json"))]);
    assert_eq!(c, 0);
    let Some(Payload::Schur(s)) = report.result else {
        panic!()
    };
    let schur = s.representation.unwrap();
    assert_eq!(schur.lambdas(), vec![3.0, -2.0, 1.0]);
    let t = read_tensor(data("diag_schur.json")).unwrap();
    assert!(verify_schur(&t, &schur, 1e-12).unwrap().passed());

    assert_eq!(
        bilinear(&["schur", path(&data("example1.json"))]).status.code(),
        Some(4)
    );
    assert_eq!(
        bilinear(&["schur", path(&data("ordered3.json"))]).status.code(),
        Some(4)
    );

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (t, _) = synth::symmetric_orthogonal(&mut rng, 3, &[2.0, -1.5, 0.5]);
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("sym.json");
    std::fs::write(&f, bilinear_core::io::tensor_to_json(&t)).unwrap();
    let (report, c) = json_report(&["schur", path(&f)]);
    assert_eq!(c, 0);
    let Some(Payload::Schur(s)) = report.result else {
        panic!()
    };
    assert!(s.verification.unwrap().passed());
    assert!(verify_schur(&t, &s.representation.unwrap(), 1e-9).unwrap().passed());
}

#[test]
fn verify_listed_triples() {
    let f = data("example1.json");
    let (report, c) = json_report(&["verify", path(&f), path(&data("example1_triples.json"))]);
    assert_eq!(c, 0);
    let Some(Payload::Verify(v)) = report.result else {
        panic!()
    };
    assert_eq!(v.entries.len(), 16);
    assert!(v.all_verified);
    assert!(v.entries.iter().all(|e| e.stationarity.unwrap() < 1e-6));

    let dir = tempfile::tempdir().unwrap();
    let perturbed = dir.path().join("p.json");
    std::fs::write(
        &perturbed,
        r#"{"triples":[{"tau":2.5,"x":[1,0,0],"y":[1,0],"z":[1,0,0,0]}]}"#,
    )
    .unwrap();
    let (report, c) = json_report(&["verify", path(&f), path(&perturbed)]);
    assert_eq!(c, 1);
    let Some(Payload::Verify(v)) = report.result else {
        panic!()
    };
    assert!(!v.entries[0].verified);
    assert!((v.entries[0].residuals.r1 - 0.5).abs() < 1e-15);

    let wrong = dir.path().join("w.json");
    std::fs::write(&wrong, r#"{"triples":[{"tau":2,"x":[1,0],"y":[1,0],"z":[1,0,0,0]}]}"#).unwrap();
    assert_eq!(bilinear(&["verify", path(&f), path(&wrong)]).status.code(), Some(2));
}

#[test]
fn spectrum_json_round_trips() {
    let f = data("example2.json");
    let (report, _) = json_report(&["spectrum", path(&f), "--seed", "3"]);
    let t = read_tensor(&f).unwrap();
    let Some(Payload::Spectrum(s)) = report.result else {
        panic!()
    };
    for e in &s.entries {
        assert!(verify_triple(&t, &e.triple, 1e-9).unwrap().verified);
    }
    assert_eq!(report.input.unwrap().dims, Dims::new(3, 2, 4).as_array());
    assert_eq!(report.config.seed, 3);
}

#[test]
fn identical_runs_are_byte_identical() {
    let f = data("ordered3.json");
    let args = ["spectrum", path(&f), "--seed", "11", "--json"];
    let a = bilinear(&args).stdout;
    let b = bilinear(&args).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
}
