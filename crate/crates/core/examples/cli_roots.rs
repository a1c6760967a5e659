//! Drive the command-line front end in-process.

fn main() {
    let args = ["corechase", "roots", "--inline", "[[-2,0],[0,0],[0,0],[1,0]]", "--json", "--diagnostics"];
    let code = corechase::cli::run(args, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
