fn main() -> std::process::ExitCode {
    thzfade::cli::run(std::env::args_os())
}
