//! Driver for an external SMT-LIB 2 solver process.
//!
//! The solver is any executable that reads SMT-LIB commands on stdin and
//! writes responses on stdout (one `sat`/`unsat`/`unknown` line per
//! `(check-sat)`, an s-expression per `(get-value ...)`). A reader thread
//! forwards stdout lines over a channel so every read can honor the
//! deadline; on timeout the process is killed rather than waited for.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("failed to start solver `{0}`: {1}")]
    Spawn(PathBuf, std::io::Error),
    #[error("failed to write to solver: {0}")]
    Write(std::io::Error),
    #[error("solver closed its output stream")]
    Closed,
    #[error("solver deadline exceeded")]
    Timeout,
    #[error("solver reported: {0}")]
    Response(String),
    #[error("unexpected solver output: {0}")]
    Unexpected(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
    Unknown,
}

pub struct Solver {
    child: Child,
    stdin: Option<ChildStdin>,
    rx: Receiver<String>,
    deadline: Option<Instant>,
}

impl Solver {
    /// Spawn the solver executable. `.js` solvers are run through `node`.
    pub fn spawn(path: &Path) -> Result<Solver, SolverError> {
        let mut cmd = if path.extension().is_some_and(|e| e == "js") {
            let mut c = Command::new("node");
            c.arg(path);
            c
        } else {
            Command::new(path)
        };
        let mut child = cmd
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Spawn(path.to_path_buf(), e))?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = child.stdout.take().expect("stdout was piped");
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                match line {
                    Ok(l) => {
                        if tx.send(l).is_err() {
                            break;
                        }
                    }
                    Err(_) => break,
                }
            }
        });
        Ok(Solver {
            child,
            stdin: Some(stdin),
            rx,
            deadline: None,
        })
    }

    /// Set the wall-clock deadline for all subsequent reads.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    fn remaining(&self) -> Result<Duration, SolverError> {
        match self.deadline {
            None => Ok(Duration::from_secs(24 * 3600)),
            Some(d) => d
                .checked_duration_since(Instant::now())
                .ok_or(SolverError::Timeout),
        }
    }

    /// Send raw SMT-LIB text.
    pub fn send(&mut self, text: &str) -> Result<(), SolverError> {
        let stdin = self.stdin.as_mut().ok_or(SolverError::Closed)?;
        stdin.write_all(text.as_bytes()).map_err(SolverError::Write)?;
        if !text.ends_with('\n') {
            stdin.write_all(b"\n").map_err(SolverError::Write)?;
        }
        stdin.flush().map_err(SolverError::Write)
    }

    fn read_line(&mut self) -> Result<String, SolverError> {
        let timeout = self.remaining()?;
        match self.rx.recv_timeout(timeout) {
            Ok(line) => Ok(line),
            Err(RecvTimeoutError::Timeout) => {
                let _ = self.child.kill();
                Err(SolverError::Timeout)
            }
            Err(RecvTimeoutError::Disconnected) => Err(SolverError::Closed),
        }
    }

    /// Issue `(check-sat)` and read the verdict.
    pub fn check_sat(&mut self) -> Result<SatResult, SolverError> {
        self.send("(check-sat)\n")?;
        loop {
            let line = self.read_line()?;
            let t = line.trim();
            match t {
                "" => continue,
                "sat" => return Ok(SatResult::Sat),
                "unsat" => return Ok(SatResult::Unsat),
                "unknown" => return Ok(SatResult::Unknown),
                _ if t.starts_with("(error") => {
                    return Err(SolverError::Response(t.to_string()))
                }
                _ => return Err(SolverError::Unexpected(t.to_string())),
            }
        }
    }

    /// Issue a `(get-value ...)` command and read the balanced response.
    pub fn get_values(&mut self, cmd: &str) -> Result<String, SolverError> {
        self.send(cmd)?;
        let mut body = String::new();
        let mut balance: i64 = 0;
        loop {
            let line = self.read_line()?;
            if body.is_empty() && line.trim().starts_with("(error") {
                return Err(SolverError::Response(line.trim().to_string()));
            }
            for c in line.chars() {
                match c {
                    '(' => balance += 1,
                    ')' => balance -= 1,
                    _ => {}
                }
            }
            body.push_str(&line);
            body.push('\n');
            if balance <= 0 && !body.trim().is_empty() {
                return Ok(body);
            }
        }
    }

    /// Clear all solver state.
    pub fn reset(&mut self) -> Result<(), SolverError> {
        self.send("(reset)\n")
    }

    pub fn push(&mut self) -> Result<(), SolverError> {
        self.send("(push 1)\n")
    }

    pub fn pop(&mut self) -> Result<(), SolverError> {
        self.send("(pop 1)\n")
    }
}

impl Drop for Solver {
    fn drop(&mut self) {
        if let Some(mut stdin) = self.stdin.take() {
            let _ = stdin.write_all(b"(exit)\n");
            let _ = stdin.flush();
        }
        // Give it a moment to exit cleanly, then make sure.
        let deadline = Instant::now() + Duration::from_millis(500);
        loop {
            match self.child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) if Instant::now() < deadline => {
                    std::thread::sleep(Duration::from_millis(20))
                }
                _ => {
                    let _ = self.child.kill();
                    let _ = self.child.wait();
                    break;
                }
            }
        }
    }
}
