fn main() -> std::process::ExitCode {
    lateration_stress::cli::main()
}
