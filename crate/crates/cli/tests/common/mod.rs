use std::io::Write;
use std::process::{Command, Output, Stdio};

/// Run the binary with `args`, feeding `stdin` to it, and collect
/// (stdout, stderr, exit code). Configs are small enough to write
/// before reading output without deadlocking on pipe buffers.
pub fn egyptian(args: &[&str], stdin: &str) -> (String, String, i32) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_egyptian"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn egyptian");
    child
        .stdin
        .as_mut()
        .expect("stdin piped")
        .write_all(stdin.as_bytes())
        .expect("write config");
    let Output {
        status,
        stdout,
        stderr,
    } = child.wait_with_output().expect("wait for egyptian");
    (
        String::from_utf8(stdout).expect("stdout is utf-8"),
        String::from_utf8(stderr).expect("stderr is utf-8"),
        status.code().expect("no exit code (signal?)"),
    )
}
