//! Run directories: an exclusive lock while a command writes into them and
//! a `manifest.txt` describing what was produced.

use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};

use crate::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const LOCK_FILE: &str = ".lock";
const CONFIG_MARKER: &str = "--- config ---";

/// A run directory held open by this process; the lock file is removed on
/// drop.
#[derive(Debug)]
pub struct RunDir {
    path: PathBuf,
}

impl RunDir {
    pub fn create(path: &Path) -> CliResult<Self> {
        fs::create_dir_all(path)?;
        let lock = path.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => Ok(RunDir { path: path.to_path_buf() }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(CliError::Usage(format!("run directory {} is locked by another process", path.display())))
            }
            Err(e) => Err(e.into()),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn file(&self, name: &str) -> CliResult<File> {
        Ok(File::create(self.path.join(name))?)
    }

    pub fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        Ok(fs::write(self.path.join(name), contents)?)
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.path.join(LOCK_FILE));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub wall_clock_seconds: f64,
    pub checks: Vec<(String, bool)>,
    pub artifacts: Vec<String>,
    /// The resolved configuration, verbatim.
    pub config: String,
}

impl RunManifest {
    pub fn new(command: &str, config: String) -> Self {
        RunManifest {
            tool_version: format!("mvtorus {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            wall_clock_seconds: 0.0,
            checks: Vec::new(),
            artifacts: Vec::new(),
            config,
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("tool = {}\ncommand = {}\nwall_clock_s = {:.3}\n", self.tool_version, self.command, self.wall_clock_seconds);
        for (name, pass) in &self.checks {
            out += &format!("check {name} = {}\n", if *pass { "PASS" } else { "FAIL" });
        }
        for a in &self.artifacts {
            out += &format!("artifact = {a}\n");
        }
        out += CONFIG_MARKER;
        out.push('\n');
        out += &self.config;
        out
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let bad = |line: &str| CliError::Usage(format!("malformed manifest line `{line}`"));
        let (head, config) = text.split_once(&format!("{CONFIG_MARKER}\n")).ok_or_else(|| bad("missing config section"))?;
        let mut m = RunManifest::new("", config.to_string());
        for line in head.lines().filter(|l| !l.trim().is_empty()) {
            let (key, value) = line.split_once(" = ").ok_or_else(|| bad(line))?;
            match key {
                "tool" => m.tool_version = value.to_string(),
                "command" => m.command = value.to_string(),
                "wall_clock_s" => m.wall_clock_seconds = value.parse().map_err(|_| bad(line))?,
                "artifact" => m.artifacts.push(value.to_string()),
                _ => {
                    let name = key.strip_prefix("check ").ok_or_else(|| bad(line))?;
                    m.checks.push((name.to_string(), value == "PASS"));
                }
            }
        }
        Ok(m)
    }

    pub fn read(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|_| CliError::Usage(format!("no manifest in {}", dir.display())))?;
        RunManifest::parse(&text)
    }

    pub fn write(&self, dir: &RunDir) -> CliResult<()> {
        dir.write(MANIFEST_FILE, &self.render())
    }
}
