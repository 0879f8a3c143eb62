fn main() -> std::process::ExitCode {
    pmulab::cli::main()
}
