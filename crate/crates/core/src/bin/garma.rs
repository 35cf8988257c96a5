fn main() -> std::process::ExitCode {
    garma_core::cli::main()
}
