use std::process::ExitCode;

fn main() -> ExitCode {
    expertvote_gateway::cli::main()
}
