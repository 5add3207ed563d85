use std::io::Write;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let code = expord_cli::run(&args, &mut out, &mut err);
    // exit() skips destructors, so flush by hand
    let _ = out.flush();
    let _ = err.flush();
    std::process::exit(code);
}
