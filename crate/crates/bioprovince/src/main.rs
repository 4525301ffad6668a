use std::process::ExitCode;

fn main() -> ExitCode {
    // BIOPROVINCE_THREADS caps parallelism; results are identical for any
    // thread count
    if let Ok(raw) = std::env::var("BIOPROVINCE_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("config error: BIOPROVINCE_THREADS must be a positive integer, got {raw:?}");
                return ExitCode::from(2);
            }
        }
    }
    match bioprovince::cli::run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
