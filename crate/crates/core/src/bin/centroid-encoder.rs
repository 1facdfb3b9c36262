use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match centroid_encoder::cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    if let Err(e) = centroid_encoder::cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(centroid_encoder::cli::exit_code(&e));
    }
}
