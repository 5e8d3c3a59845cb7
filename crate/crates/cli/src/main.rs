use clap::Parser;
use lpgraph_cli::{run, Cli};

/// Caps the worker pool when `LPGRAPH_THREADS` is set.
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("LPGRAPH_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.parse().map_err(|_| format!("LPGRAPH_THREADS must be a positive integer, got `{raw}`"))?;
    if threads == 0 {
        return Err("LPGRAPH_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn main() {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        std::process::exit(1);
    }
    match run(&cli) {
        Ok(out) => print!("{out}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
