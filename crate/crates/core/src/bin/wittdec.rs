use std::io::Read;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut stdin = std::io::stdin();
    let (out, code) = wittdec::cli::main_entry(&args, &mut stdin as &mut dyn Read);
    print!("{out}");
    std::process::exit(code);
}
