fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(memchua::cli::run_from(std::env::args_os()))
}
