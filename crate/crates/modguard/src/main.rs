use std::process::exit;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().collect();
    let code = modguard::cli::run(&args, &mut std::io::stdout());
    exit(code);
}
