use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use centroid_encoder::SeededRng;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_centroid-encoder"))
}

/// Three well-separated 4-D classes, 30 rows each.
fn write_blobs(dir: &Path) -> PathBuf {
    let mut rng = SeededRng::new(99);
    let mut text = String::from("f1,f2,f3,f4,kind\n");
    for i in 0..90 {
        let c = i % 3;
        let row: Vec<String> = (0..4)
            .map(|j| format!("{:.4}", if j == c { 3.0 } else { 0.0 } + 0.4 * rng.normal()))
            .collect();
        text.push_str(&format!("{},{}\n", row.join(","), ["a", "b", "c"][c]));
    }
    let path = dir.join("blobs.csv");
    fs::write(&path, text).unwrap();
    path
}

fn write_config(dir: &Path, data: &Path, extra: &str) -> PathBuf {
    let path = dir.join("exp.toml");
    fs::write(
        &path,
        format!(
            "seed = 5\n{extra}\n[data]\npath = \"{}\"\nhas_header = true\n\n[network]\nhidden = [16]\n\n[train]\nmax_epochs = 30\nbatch_size = 8\nlearning_rate = 0.01\n\n[eval]\nrepeats = 2\n",
            data.display()
        ),
    )
    .unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_eval_embed_are_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_blobs(dir.path());
    let cfg = write_config(dir.path(), &data, "");
    let mut snapshots = Vec::new();
    for attempt in ["one", "two"] {
        let out = dir.path().join(attempt);
        let model = out.join("model.bin");
        for args in [
            vec!["--config", s(&cfg), "--out-dir", s(&out), "train"],
            vec!["--config", s(&cfg), "--out-dir", s(&out), "eval", "--model", s(&model)],
            vec!["--config", s(&cfg), "--out-dir", s(&out), "embed", "--model", s(&model)],
        ] {
            let o = run(&args);
            assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let files = [
            "model.bin",
            "train_log.tsv",
            "eval.csv",
            "eval_per_class.csv",
            "embedding.csv",
            "embedding.svg",
        ];
        // The resolved config records the output directory, which differs by design.
        let resolved = fs::read_to_string(out.join("config.toml")).unwrap().replace(s(&out), "OUT");
        snapshots.push((files.map(|f| fs::read(out.join(f)).unwrap()), resolved));
    }
    assert!(snapshots[0].0 == snapshots[1].0, "outputs differ between identical runs");
    assert_eq!(snapshots[0].1, snapshots[1].1);

    let other = dir.path().join("reseeded");
    let o = run(&["--config", s(&cfg), "--seed", "6", "--out-dir", s(&other), "train"]);
    assert_eq!(code(&o), 0);
    assert_ne!(fs::read(other.join("model.bin")).unwrap(), snapshots[0].0[0]);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_blobs(dir.path());
    let cfg = write_config(dir.path(), &data, "");
    let mut tables = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let model = out.join("model.bin");
        assert_eq!(code(&run(&["--config", s(&cfg), "--out-dir", s(&out), "--threads", threads, "train"])), 0);
        let o = run(&["--config", s(&cfg), "--out-dir", s(&out), "--threads", threads, "eval", "--model", s(&model)]);
        assert_eq!(code(&o), 0);
        tables.push((fs::read(&model).unwrap(), fs::read(out.join("eval.csv")).unwrap()));
    }
    assert!(tables[0] == tables[1]);
}

#[test]
fn variance_writes_curves_and_clamps() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_blobs(dir.path());
    let cfg = write_config(dir.path(), &data, "");
    let out = dir.path().join("v");
    let o = run(&["--config", s(&cfg), "--out-dir", s(&out), "variance", "--up-to", "50", "--classes", "a,b"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("variance_raw.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.trim_end().ends_with("4,1"));
    assert!(out.join("variance.svg").exists());
}

#[test]
fn configuration_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_blobs(dir.path());
    let unknown = write_config(dir.path(), &data, "colour = \"red\"");
    let o = run(&["--config", s(&unknown), "train"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let cfg = write_config(dir.path(), &data, "");
    let out = dir.path().join("o");
    assert_eq!(code(&run(&["--config", s(&cfg), "--out-dir", s(&out), "train"])), 0);
    let model = out.join("model.bin");
    let o = run(&["--config", s(&cfg), "--out-dir", s(&out), "eval", "--model", s(&model), "--k", "1000"]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&run(&["--frobnicate"])), 1);
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let cfg = write_config(dir.path(), &missing, "");
    assert_eq!(code(&run(&["--config", s(&cfg), "train"])), 2);

    let header_only = dir.path().join("empty.csv");
    fs::write(&header_only, "f1,f2,kind\n").unwrap();
    let cfg = write_config(dir.path(), &header_only, "");
    assert_eq!(code(&run(&["--config", s(&cfg), "train"])), 2);

    let data = write_blobs(dir.path());
    let cfg = write_config(dir.path(), &data, "");
    let junk = dir.path().join("junk.bin");
    fs::write(&junk, b"not a model").unwrap();
    let o = run(&["--config", s(&cfg), "--out-dir", s(dir.path()), "embed", "--model", s(&junk)]);
    assert_eq!(code(&o), 2);

    let images = dir.path().join("images");
    let labels = dir.path().join("labels");
    fs::write(&images, [0u8, 0, 8, 1, 0, 0, 0, 0]).unwrap();
    fs::write(&labels, [0u8, 0, 8, 1, 0, 0, 0, 0]).unwrap();
    let idx = dir.path().join("idx.toml");
    fs::write(
        &idx,
        format!("[data]\nformat = \"idx\"\nimages = \"{}\"\nlabels = \"{}\"\n", images.display(), labels.display()),
    )
    .unwrap();
    assert_eq!(code(&run(&["--config", s(&idx), "train"])), 2);
}

#[test]
fn divergent_training_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_blobs(dir.path());
    let cfg = write_config(dir.path(), &data, "");
    let text = fs::read_to_string(&cfg).unwrap().replace("learning_rate = 0.01", "learning_rate = 1e300");
    fs::write(&cfg, text).unwrap();
    let o = run(&["--config", s(&cfg), "--out-dir", s(dir.path()), "train"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}
