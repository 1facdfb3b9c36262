//! Drives the same pipeline as the command-line tool from a TOML document:
//! train a Sonar model, then score it over repeated splits.
//!
//!     cargo run --release --example experiment_config -- [out_dir]

use centroid_encoder::cli::{cmd_eval, cmd_train, ExperimentConfig};

fn main() -> centroid_encoder::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/sonar".into());
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/sonar.csv");
    let cfg = ExperimentConfig::from_toml(&format!(
        r#"
seed = 42
out_dir = "{out}"

[data]
path = "{data}"

[network]
preset = "sonar"

[train]
max_epochs = 300

[eval]
repeats = 5
"#
    ))?;
    cfg.validate()?;
    let (model, report) = cmd_train(&cfg)?;
    println!(
        "trained {:?} for {} epochs, final loss {:.5}",
        model.spec.widths(),
        report.epochs_run,
        report.final_loss().unwrap_or(f64::NAN)
    );
    let summary = cmd_eval(&cfg, &std::path::Path::new(&out).join("model.bin"))?;
    println!("per-repeat errors: {:?}", summary.errors);
    print!("resolved config:\n{}", cfg.to_toml()?);
    Ok(())
}
