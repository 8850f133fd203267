use std::io::{self, IsTerminal};

fn main() {
    let color = io::stderr().is_terminal() && std::env::var_os("ORTACPLUS_NO_COLOR").is_none();
    let code = ortacplus::cli::run(
        std::env::args_os(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
        color,
    );
    std::process::exit(code);
}
