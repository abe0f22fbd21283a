use clap::Parser;

/// Restore the default SIGPIPE disposition so writing into a closed pipe
/// (e.g. `troika ... | head`) kills the process quietly, unix-style,
/// instead of panicking on the failed write.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = troika_cli::Cli::parse();
    std::process::exit(troika_cli::run(cli));
}
