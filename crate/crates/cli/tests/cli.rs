use std::path::Path;
use std::process::Command;

use mulr::eval::significance_matrix;
use mulr::dataset::Slice;
use mulr_cli::config::ExperimentConfig;
use mulr_cli::pipeline::run_pipeline;

const SMALL: &str = "
[experiment]
seed = 4
threads = 1

[synthetic]
n_entities = 240
n_types = 6
n_roots = 3
min_entities_per_type = 10
name_words_per_type = 20
generic_name_words = 20

[embed]
dim = 16
epochs = 2

[train]
epochs = 8
hidden = 16

[levels]
widths = 2,3
filters_per_width = 4

[configs]
single = elr
joint = elr,clr-cnn
";

fn mulr(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mulr"))
        .args(args)
        .env_remove("MULR_THREADS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn exit_codes() {
    assert_eq!(mulr(&[]).status.code(), Some(1));
    assert_eq!(mulr(&["train", "--bogus"]).status.code(), Some(1));
    assert_eq!(mulr(&["--version"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.ini");
    let out = mulr(&["pipeline", "--config", missing.to_str().unwrap(), "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.ini"));

    let bad = write(dir.path(), "bad.ini", "[experiment]\nseed = 1\nbogus = 2\n");
    assert_eq!(mulr(&["pipeline", "--config", &bad, "--out", "x"]).status.code(), Some(2));

    // A store holding a non-finite value is a numeric failure.
    let h = write(dir.path(), "h.tsv", "a\nb\n");
    let d = write(dir.path(), "d.tsv", "#train\nm1\tAlpha\ta\t3\n#dev\nm2\tBeta\tb\t3\n#test\nm3\tGamma\ta\t3\n");
    let v = write(dir.path(), "s.vec", "2 2\nENT:m1 0.1 NaN\nENT:m2 0.2 0.3\n");
    let out = mulr(&[
        "train", "--levels", "elr", "--dataset", &d, "--hierarchy", &h, "--store", &format!("sskip={v}"), "--out",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn pipeline_two_configs_and_warm_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse(SMALL, dir.path()).unwrap();
    let out = dir.path().join("run");

    let first = run_pipeline(&cfg, &out).unwrap();
    assert!(first.ran.contains(&"embed/sskip".to_string()));
    assert_eq!(first.systems.len(), 2);
    let report = std::fs::read_to_string(&first.report_path).unwrap();
    assert!(report.starts_with(&format!("# config_hash={} seed=4", cfg.hash)));
    assert!(report.contains("significance"));

    let all: Vec<_> = first.systems.iter().map(|s| s.2.slice(Slice::All).unwrap()).collect();
    let m = significance_matrix(&[all[0].correct, all[1].correct], all[0].count, 0.05).unwrap();
    assert_eq!(m.len(), 2);
    assert!(m.iter().all(|r| r.len() == 2));
    assert!(!m[0][0] && !m[1][1]);

    for f in ["models/single.json", "models/joint.json", "predictions/joint.tsv", "reports/joint.tsv", "corpus.tok.meta"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        assert!(text.contains(&cfg.hash), "{f} lacks the config hash");
    }

    let t = std::time::Instant::now();
    let second = run_pipeline(&cfg, &out).unwrap();
    let warm = t.elapsed();
    assert!(second.ran.is_empty(), "{:?}", second.ran);
    assert_eq!(std::fs::read_to_string(&second.report_path).unwrap(), report);
    assert!(warm.as_secs_f64() < 2.0);

    // Changing a training setting reruns training onwards but not the embeddings.
    let changed = ExperimentConfig::parse(&SMALL.replace("hidden = 16", "hidden = 12"), dir.path()).unwrap();
    let third = run_pipeline(&changed, &out).unwrap();
    assert!(third.ran.contains(&"train/single".to_string()));
    assert!(!third.ran.iter().any(|s| s.starts_with("embed") || s == "corpus" || s == "data"));
}

#[test]
fn stage_failure_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[data]\ncorpus = c.txt\ndataset = d.tsv\nhierarchy = h.tsv\nnotable = n.tsv\n[configs]\na = elr\n";
    let cfg = ExperimentConfig::parse(text, dir.path()).unwrap();
    let err = run_pipeline(&cfg, &dir.path().join("out")).unwrap_err();
    assert!(err.to_string().contains("stage `data` failed"), "{err}");
}

#[test]
fn subcommands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    let cfg = write(dir.path(), "cfg.ini", SMALL);
    let ok = |args: &[&str]| {
        let out = mulr(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    };
    ok(&["gen-synthetic", "--config", &cfg, "--out", &p("data")]);
    let data = ["--dataset", &p("data/dataset.tsv"), "--hierarchy", &p("data/hierarchy.tsv")];
    ok(&[&["build-corpus", "--corpus", &p("data/corpus.txt"), "--notable", &p("data/notable.tsv"), "--out", &p("c.tok")][..], &data].concat());
    ok(&["embed", "--mode", "sskip", "--dim", "8", "--epochs", "1", "--seed", "2", "--threads", "1", &p("c.tok"), &p("emb/s.vec")]);
    let store = format!("sskip={}", p("emb/s.vec"));
    ok(&[&["train", "--levels", "elr", "--config", &cfg, "--store", &store, "--out", &p("m/t.json")][..], &data].concat());
    ok(&[&["calibrate", "--model", &p("m/t.json"), "--out", &p("m/c.json")][..], &data].concat());
    ok(&["predict", "--model", &p("m/c.json"), "--entities", &p("data/dataset.tsv"), "--hierarchy", &p("data/hierarchy.tsv"), "--out", &p("p.tsv")]);
    let preds = std::fs::read_to_string(p("p.tsv")).unwrap();
    assert!(preds.starts_with("# config_hash="));
    assert!(preds.lines().skip(1).all(|l| l.contains('\t')));
    ok(&[&["evaluate", "--predictions", &p("p.tsv"), "--name", "elr", "--out", &p("r.json")][..], &data].concat());
    let out = ok(&["report", &p("r.json")]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("== elr"));
}
