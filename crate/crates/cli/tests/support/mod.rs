#![allow(dead_code)]

pub mod interp;
pub mod oracles;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn seer() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seer"))
}

/// Runs the binary and panics with its stderr on a non-zero exit.
pub fn run_ok(args: &[&str]) -> Output {
    let out = seer().args(args).output().expect("spawn seer");
    assert!(
        out.status.success(),
        "seer {args:?} failed with {:?}:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Every regular file below `root`, relative and sorted.
pub fn files_below(root: &Path) -> Vec<PathBuf> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<PathBuf>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p, root, out);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
