use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const CORPUS: &str = concat!(
    r#"{"id":"a","content":"they hurt the children","doc_labels":{"care":{"pos":5,"neg":0,"total":5}},"spans":[{"start":0,"end":4,"kind":"character","scores":{"oa":-0.5,"va":0.0,"hh":-0.75}},{"start":14,"end":22,"kind":"character","scores":{"oa":0.6,"va":-0.8,"hh":0.1}}]}"#,
    "\n",
    r#"{"id":"b","content":"we help refugees with taxes","doc_labels":{"care":{"pos":0,"neg":4,"total":5}},"spans":[{"start":0,"end":2,"kind":"character","scores":{"oa":0.5,"va":0.2,"hh":0.7}},{"start":8,"end":16,"kind":"character","scores":{"oa":0.4,"va":0.5,"hh":0.0}},{"start":22,"end":27,"kind":"topic","scores":{"oa":-0.3,"va":0.0,"hh":0.0}}]}"#,
    "\n",
);

struct Workdir {
    dir: TempDir,
}

impl Workdir {
    fn new() -> Self {
        let w = Self {
            dir: tempfile::tempdir().unwrap(),
        };
        w.write("corpus.jsonl", CORPUS);
        w
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, contents: &str) {
        std::fs::write(self.path(name), contents).unwrap();
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }

    fn dsr(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_dsr"))
            .args(args)
            .current_dir(self.dir.path())
            .env_remove("DSR_CONFIG")
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.dsr(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    let w = Workdir::new();
    for args in [&["histogram"][..], &["frobnicate"], &["train", "--labels", "x"], &["histogram", "--corpus"]] {
        let out = w.dsr(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(code(&w.dsr(&["--help"])), 0);
    // both populations at once
    let out = w.dsr(&["analyze-logodds", "--corpus", "corpus.jsonl", "--label", "care", "--others", "x.jsonl"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn validation_errors_exit_1() {
    let w = Workdir::new();
    let out = w.dsr(&["histogram", "--corpus", "missing.jsonl"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.jsonl"));

    w.write("bad.jsonl", "{\"id\":\"a\",\"content\":\"hi\",\"spans\":[{\"start\":0,\"end\":9,\"kind\":\"topic\"}]}\n");
    let out = w.dsr(&["histogram", "--corpus", "bad.jsonl"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":1:"));

    w.write("bad.cfg", "learning_rate = 3\n");
    let out = w.dsr(&["--config", "bad.cfg", "histogram", "--corpus", "corpus.jsonl"]);
    assert_eq!(code(&out), 1);
    assert!(!w.path("histogram.csv").exists());
}

#[test]
fn training_is_reproducible_byte_for_byte() {
    let w = Workdir::new();
    w.ok(&["embed", "--corpus", "corpus.jsonl", "--h", "16"]);
    let train = |out: &str| {
        w.ok(&[
            "train", "--embeddings", "embeddings.jsonl", "--labels", "corpus.jsonl", "--hidden", "8", "--epochs", "50",
            "--lr", "0.01", "--batch-size", "2", "--out", out,
        ])
    };
    train("m1.json");
    train("m2.json");
    assert_eq!(w.read("m1.json"), w.read("m2.json"));
    assert_eq!(w.read("m1.history.csv"), w.read("m2.history.csv"));
    assert_eq!(w.read("m1.history.csv").lines().count(), 51);

    let table = w.ok(&["eval-scores", "--model", "m1.json", "--embeddings", "embeddings.jsonl", "--labels", "corpus.jsonl"]);
    assert!(table.contains("Oppose-Advocate"));
    assert_eq!(w.json("eval-scores.json")["oa"]["n"], 5);
}

#[test]
fn every_run_leaves_a_manifest() {
    let w = Workdir::new();
    w.ok(&["histogram", "--corpus", "corpus.jsonl", "--dim", "oa", "--bins", "4"]);
    let m = w.json("histogram.manifest.json");
    assert_eq!(m["subcommand"], "histogram");
    assert_eq!(m["config"]["bins"], 4);
    assert_eq!(m["outputs"][0], "histogram.csv");
    let digest = dsr_workbench::cli::sha256_file(&w.path("corpus.jsonl")).unwrap();
    assert_eq!(m["inputs"][0]["sha256"], digest.as_str());
    assert_eq!(w.read("histogram.csv").lines().count(), 5);
}

#[test]
fn config_file_sits_below_flags() {
    let w = Workdir::new();
    w.write("run.cfg", "# defaults\nbins = 3\n");
    let cfg = w.path("run.cfg");
    let cfg = cfg.to_str().unwrap();
    w.ok(&["--config", cfg, "histogram", "--corpus", "corpus.jsonl", "--dim", "va"]);
    assert_eq!(w.read("histogram.csv").lines().count(), 4);
    w.ok(&["--config", cfg, "histogram", "--corpus", "corpus.jsonl", "--dim", "va", "--bins", "5"]);
    assert_eq!(w.read("histogram.csv").lines().count(), 6);

    let out = Command::new(env!("CARGO_BIN_EXE_dsr"))
        .args(["histogram", "--corpus", "corpus.jsonl", "--dim", "va"])
        .current_dir(w.dir.path())
        .env("DSR_CONFIG", cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(w.read("histogram.csv").lines().count(), 4);
    // the config file is recorded as an input
    assert!(w.read("histogram.manifest.json").contains("run.cfg"));
}

#[test]
fn aggregate_writes_flagged_units_beside_output() {
    let w = Workdir::new();
    let ann = [
        ("r1", 0.1, 0.2),
        ("r2", 0.1, -0.9),
        ("r3", 0.2, 0.9),
    ];
    let mut lines = String::new();
    for (who, oa, va) in ann {
        for (dim, v) in [("oa", oa), ("va", va), ("hh", 0.0)] {
            lines.push_str(&format!(
                "{{\"annotator\":\"{who}\",\"text_id\":\"a\",\"start\":0,\"end\":4,\"kind\":\"character\",\"dim\":\"{dim}\",\"score\":{v},\"ts\":\"2024-01-01T00:00:00.000Z\"}}\n"
            ));
        }
    }
    w.write("ann.jsonl", &lines);
    let table = w.ok(&["agreement", "--annotations", "ann.jsonl"]);
    assert!(table.contains("Total & Micro-Avg."));
    w.ok(&["aggregate", "--corpus", "corpus.jsonl", "--annotations", "ann.jsonl", "--out", "agg.jsonl"]);
    let flagged = w.json("agg.flagged.json");
    assert_eq!(flagged["flagged"][0]["dim"], "va");
    assert_eq!(flagged["kept_spans"], 0);
}

#[test]
fn pairwise_json_converts_to_the_same_dot() {
    let w = Workdir::new();
    w.ok(&["analyze-pairwise", "--corpus", "corpus.jsonl", "--out", "g.json"]);
    w.ok(&["analyze-pairwise", "--corpus", "corpus.jsonl", "--out", "g.dot"]);
    assert!(w.json("g.json")["edges"].is_array());
    w.ok(&["export-graph", "--graph", "g.json", "--format", "dot", "--out", "h.dot"]);
    assert_eq!(w.read("g.dot"), w.read("h.dot"));
    assert!(w.read("g.dot").starts_with("digraph"));
}

#[test]
fn span_evaluation_reports_a_row() {
    let w = Workdir::new();
    w.write(
        "pred.jsonl",
        "{\"id\":\"a\",\"content\":\"they hurt the children\",\"spans\":[{\"start\":0,\"end\":4,\"kind\":\"character\"}]}\n",
    );
    let table = w.ok(&["eval-spans", "--corpus", "corpus.jsonl", "--predictions", "pred.jsonl", "--name", "run-1"]);
    let row = table.lines().last().unwrap();
    assert!(row.starts_with("run-1"));
    let r = w.json("eval-spans.json");
    assert_eq!(r["span"]["micro"]["tp"], 1);
    assert_eq!(r["span"]["micro"]["fn"], 4);
}

#[test]
fn log_odds_between_bins_and_corpora() {
    let w = Workdir::new();
    w.ok(&["analyze-logodds", "--corpus", "corpus.jsonl", "--label", "care"]);
    let r = w.json("logodds.json");
    assert_eq!(r["n_in"], 2);
    assert_eq!(r["n_out"], 3);
    assert_eq!(r["attributes"].as_array().unwrap().len(), 6);

    w.write("other.jsonl", CORPUS);
    w.ok(&["analyze-composite", "--corpus", "corpus.jsonl", "--others", "other.jsonl", "--no-haldane"]);
    let r = w.json("composite.json");
    assert_eq!(r["haldane"], false);
    assert!(r["bins"].is_null());
    let names: Vec<&str> = r["attributes"].as_array().unwrap().iter().map(|a| a["attribute"].as_str().unwrap()).collect();
    assert!(names.contains(&"Opposed+Harmful"));
    assert!(!names.contains(&"Opposed+Advocated"));
}

#[test]
fn augmentation_multiplies_texts() {
    let w = Workdir::new();
    w.write("chars.txt", "# people\nteachers\nnurses\n");
    w.write("topics.txt", "rent\n");
    w.ok(&[
        "augment", "--corpus", "corpus.jsonl", "--char-lexicon", "chars.txt", "--topic-lexicon", "topics.txt",
        "--include-source",
    ]);
    // 2 + 5 spans, 2 entries per character span, 1 per topic span
    let n = w.read("augmented.jsonl").lines().count();
    assert_eq!(n, 2 + 4 * 2 + 1);
}

#[test]
fn manifest_path_replaces_extension() {
    assert_eq!(dsr_workbench::cli::manifest_path(Path::new("x/y.dot")), PathBuf::from("x/y.manifest.json"));
}

#[test]
fn repeated_runs_write_identical_outputs() {
    let w = Workdir::new();
    w.write("chars.txt", "teachers\n");
    w.write("topics.txt", "rent\n");
    let runs: [(&[&str], &str); 6] = [
        (&["embed", "--corpus", "corpus.jsonl", "--h", "8"], "jsonl"),
        (&["histogram", "--corpus", "corpus.jsonl"], "csv"),
        (&["analyze-logodds", "--corpus", "corpus.jsonl", "--label", "care"], "json"),
        (&["analyze-composite", "--corpus", "corpus.jsonl", "--label", "care"], "json"),
        (&["analyze-pairwise", "--corpus", "corpus.jsonl"], "dot"),
        (
            &["augment", "--corpus", "corpus.jsonl", "--char-lexicon", "chars.txt", "--topic-lexicon", "topics.txt"],
            "jsonl",
        ),
    ];
    for (args, ext) in runs {
        let outputs: Vec<String> = ["first", "second"]
            .iter()
            .map(|name| {
                let out = format!("{name}.{ext}");
                let mut full = args.to_vec();
                full.extend(["--out", &out]);
                w.ok(&full);
                w.read(&out)
            })
            .collect();
        assert_eq!(outputs[0], outputs[1], "{}", args[0]);
    }
}
