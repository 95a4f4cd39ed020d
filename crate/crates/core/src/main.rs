fn main() -> std::process::ExitCode {
    botlc::cli::main()
}
