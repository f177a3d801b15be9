use std::process::ExitCode;

fn main() -> ExitCode {
    if let Some(n) = std::env::var("NOZZLEFLOW_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // Only fails if a pool already exists, which cannot happen this early.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let mut out = String::new();
    let code = nozzleflow::cli::main_with(std::env::args(), &mut out);
    if code == nozzleflow::cli::EXIT_CONFIG {
        eprint!("{out}");
    } else {
        print!("{out}");
    }
    ExitCode::from(code as u8)
}
