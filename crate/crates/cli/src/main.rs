use clap::Parser;

use rydion::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(manifest) => {
            let files = manifest["outputs"].as_array().map_or(0, Vec::len);
            eprintln!(
                "wrote {files} files ({:.1} s)",
                manifest["wall_time_s"].as_f64().unwrap_or(0.0)
            );
        }
        Err(e) => {
            eprintln!("rydion: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
