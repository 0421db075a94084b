use std::io::Write;

fn main() {
    let mut stdout = std::io::BufWriter::new(std::io::stdout().lock());
    let mut stderr = std::io::stderr().lock();
    let code = symred::cli::run(std::env::args_os(), &mut stdout, &mut stderr);
    if stdout.flush().is_err() && code == 0 {
        std::process::exit(1);
    }
    std::process::exit(code);
}
