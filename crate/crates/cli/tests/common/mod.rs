#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rld_cli::csvio::Table;

pub fn rld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rld"))
        .args(args)
        .output()
        .expect("spawn rld")
}

/// Runs `rld` and fails with its stderr unless it exits 0.
pub fn rld_ok(args: &[&str]) -> String {
    let out = rld(args);
    assert!(
        out.status.success(),
        "rld {args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

pub fn table(path: &Path) -> Table {
    Table::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn column(t: &Table, name: &str) -> Vec<f64> {
    let idx = t
        .column_index(name)
        .unwrap_or_else(|| panic!("no column {name} in {:?}", t.header));
    t.numeric_column(idx).unwrap()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
