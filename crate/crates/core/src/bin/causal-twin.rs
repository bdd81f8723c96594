use std::process::ExitCode;

fn main() -> ExitCode {
    causal_twin::cli::main()
}
