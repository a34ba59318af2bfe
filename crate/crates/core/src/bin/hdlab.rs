fn main() {
    env_logger::init();
    hilbert_dynamics::exec::init_threads_from_env();
    let code = hilbert_dynamics::cli_io::run_args(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
