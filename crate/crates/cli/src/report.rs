use std::fmt::{self, Display};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use sha2::{Digest, Sha256};

/// How a command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    VerificationFailed,
    Usage,
    FuelExhausted,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::VerificationFailed => 1,
            Status::Usage => 2,
            Status::FuelExhausted => 3,
        }
    }

    /// Keeps the more severe of two statuses; fuel exhaustion outranks failure only when nothing failed.
    pub fn max(self, other: Status) -> Status {
        let rank = |s: Status| match s {
            Status::Ok => 0,
            Status::FuelExhausted => 1,
            Status::VerificationFailed => 2,
            Status::Usage => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

/// An error that ends a command with a given status.
#[derive(Debug)]
pub struct Fail {
    pub status: Status,
    pub message: String,
}

impl Fail {
    pub fn usage(m: impl Display) -> Self {
        Fail { status: Status::Usage, message: m.to_string() }
    }

    pub fn fuel(m: impl Display) -> Self {
        Fail { status: Status::FuelExhausted, message: m.to_string() }
    }
}

pub type CmdResult = Result<(), Fail>;

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Line-oriented `key: value` report plus an optional artifact.
pub struct Report {
    lines: Vec<(String, String)>,
    artifact: Option<String>,
    output: Option<PathBuf>,
    pub status: Status,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { lines: vec![("command".into(), command.to_string())], artifact: None, output: None, status: Status::Ok }
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Display) {
        self.lines.push((key.into(), value.to_string()));
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<String, Fail> {
        let bytes = fs::read(path).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))?;
        self.set("input", format!("{} sha256={}", path.display(), digest(&bytes)));
        String::from_utf8(bytes).map_err(|_| Fail::usage(format!("{}: not UTF-8", path.display())))
    }

    pub fn artifact(&mut self, text: String, output: Option<&Path>) {
        self.artifact = Some(text);
        self.output = output.map(Path::to_path_buf);
    }

    pub fn fail(&mut self, status: Status) {
        self.status = self.status.max(status);
    }

    /// Writes the artifact file if requested and prints everything.
    pub fn finish(mut self, error: Option<Fail>) -> ExitCode {
        if let Some(e) = error {
            self.set("error", &e.message);
            self.fail(e.status);
        }
        let mut body = None;
        if let Some(text) = self.artifact.take() {
            match &self.output {
                Some(path) => match fs::write(path, &text) {
                    Ok(()) => self.set("output", format!("{} sha256={}", path.display(), digest(text.as_bytes()))),
                    Err(e) => {
                        self.set("error", format!("{}: {e}", path.display()));
                        self.fail(Status::Usage);
                    }
                },
                None => body = Some(text),
            }
        }
        let status = match self.status {
            Status::Ok => "ok",
            Status::VerificationFailed => "verification-failed",
            Status::Usage => "usage-error",
            Status::FuelExhausted => "fuel-exhausted",
        };
        self.set("status", status);
        print!("{self}");
        if let Some(text) = body {
            println!("--");
            print!("{text}");
        }
        ExitCode::from(self.status.code())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.lines {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}
