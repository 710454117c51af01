use clap::Parser;

use gpt_entropy::cli::{run, Cli};

fn main() {
    // GPT_ENTROPY_THREADS caps restart/grid parallelism; results are
    // independent of the thread count either way.
    if let Ok(text) = std::env::var("GPT_ENTROPY_THREADS") {
        if let Ok(n) = text.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    std::process::exit(run(cli));
}
