use clap::Parser;

fn main() {
    let cli = skel_cli::Cli::parse();
    let out = skel_cli::run(&cli);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
