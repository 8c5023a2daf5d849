use std::io::Write;

fn main() {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = verikit_cli::run(std::env::args_os(), &mut std::io::stdin(), &mut out);
    let _ = out.flush();
    std::process::exit(code);
}
