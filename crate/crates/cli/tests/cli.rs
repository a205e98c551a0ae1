use std::path::Path;
use std::process::{Command, Output};

use igstqa::io::{save_image, BitDepth};
use igstqa::{distort, patterns};

fn igstqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igstqa"))
        .args(args)
        .env("IGSTQA_NO_COLOR", "1")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_texture(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("t.png");
    save_image(&path, &patterns::blobs(64, 64, 1.5, 4).unwrap(), BitDepth::Eight).unwrap();
    path
}

#[test]
fn extract_reports_feature_count() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_texture(dir.path());
    let out_path = dir.path().join("t.igstqa.json");
    let out = igstqa(&["extract", p(&t), p(&out_path)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("96 scalars"));

    let out = igstqa(&["extract", "--domains", "spatial", p(&t), p(&out_path)]);
    assert!(stdout(&out).starts_with("48 scalars"));
}

#[test]
fn missing_image_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = igstqa(&["extract", "/no/such/file.png", p(&dir.path().join("x.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read image"));
}

#[test]
fn self_score_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_texture(dir.path());
    let out = igstqa(&["score", p(&t), p(&t)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0");
}

#[test]
fn payload_and_image_references_agree() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_texture(dir.path());
    let syn = dir.path().join("syn.png");
    let out = igstqa(&["distort", p(&t), "blur:1.5", p(&syn)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let payload = dir.path().join("t.igstqa.json");
    assert!(igstqa(&["extract", p(&t), p(&payload)]).status.success());

    let direct = stdout(&igstqa(&["score", p(&t), p(&syn)]));
    let via_payload = stdout(&igstqa(&["score", p(&payload), p(&syn)]));
    assert_eq!(direct, via_payload);
    assert!(direct.trim().parse::<f64>().unwrap() > 0.0);

    let out = igstqa(&["score", "--levels", "3", p(&payload), p(&syn)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("feature set mismatch"));
    let out = igstqa(&["score", "--domains", "gradient", p(&payload), p(&syn)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn distort_is_exact_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_texture(dir.path());
    let same = dir.path().join("same.png");
    assert!(igstqa(&["distort", p(&t), "blur:0", p(&same)]).status.success());
    let a = image::open(&t).unwrap().to_luma8();
    let b = image::open(&same).unwrap().to_luma8();
    assert_eq!(a, b);

    let (x, y) = (dir.path().join("x.png"), dir.path().join("y.png"));
    assert!(igstqa(&["distort", p(&t), "tile_shuffle:16:7", p(&x)]).status.success());
    assert!(igstqa(&["distort", p(&t), "tile_shuffle:16:7", p(&y)]).status.success());
    assert_eq!(std::fs::read(&x).unwrap(), std::fs::read(&y).unwrap());

    let out = igstqa(&["distort", p(&t), "wobble:3", p(&x)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stronger_blur_scores_higher() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("grating.png");
    save_image(&t, &patterns::noisy_grating(64, 64, 7.0, 0.5, 0.2, 3).unwrap(), BitDepth::Sixteen).unwrap();
    let score = |spec: &str| {
        let syn = dir.path().join(format!("{}.png", spec.replace(':', "_")));
        assert!(igstqa(&["distort", p(&t), spec, p(&syn)]).status.success());
        stdout(&igstqa(&["score", p(&t), p(&syn)])).trim().parse::<f64>().unwrap()
    };
    assert!(score("blur:2.0") > score("blur:0.5"));
}

#[test]
fn evaluate_writes_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let t = patterns::blobs(64, 64, 1.5, 9).unwrap();
    save_image(dir.path().join("ref.png"), &t, BitDepth::Sixteen).unwrap();
    let mut csv = String::from("pair_id,ref,syn,dmos\n");
    for k in 1..=20 {
        let sigma = 0.25 * k as f64;
        let name = format!("syn{k:02}.png");
        save_image(dir.path().join(&name), &distort::gaussian_blur(&t, sigma).unwrap(), BitDepth::Sixteen).unwrap();
        csv += &format!("p{k:02},ref.png,{name},{}\n", 10.0 * (1.0 - (-sigma / 2.0).exp()));
    }
    let manifest = dir.path().join("blur.csv");
    std::fs::write(&manifest, csv).unwrap();
    let report = dir.path().join("out.json");
    let out = igstqa(&["evaluate", p(&manifest), "--report", p(&report), "--database", "parametric"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    assert!(table.contains("PLCC") && table.contains("0.679"));
    assert!(!table.contains('\x1b'));
    assert_eq!(std::fs::read_to_string(report.with_extension("txt")).unwrap(), table);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert!(json["srocc"].as_f64().unwrap() >= 0.9);
    assert_eq!(json["n"], 20);
    assert_eq!(json["comparison"]["srocc_exceeds_strongest_competitor"], true);
}

#[test]
fn evaluate_errors() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("empty.csv");
    std::fs::write(&manifest, "pair_id,ref,syn,dmos\n").unwrap();
    let out = igstqa(&["evaluate", p(&manifest)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("insufficient data"));

    let t = write_texture(dir.path());
    let mut csv = String::from("pair_id,ref,syn,dmos\n");
    for k in 0..6 {
        csv += &format!("r{k},{},{},{k}\n", p(&t), if k == 3 { "missing.png" } else { p(&t) });
    }
    std::fs::write(&manifest, csv).unwrap();
    let out = igstqa(&["evaluate", p(&manifest)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row r3"));
}
