//! Sandboxed execution of Python snippets against assertion tests.
//!
//! Each run gets a fresh temp directory and a `python3 -I` subprocess.
//! A small driver script applies memory and CPU rlimits, installs an
//! import guard over network- and process-spawning modules, loads the
//! snippet, runs each test in a shallow copy of the module namespace,
//! and writes a JSON verdict to a file. Results go through the
//! filesystem rather than pipes so a snippet that prints megabytes
//! cannot deadlock the parent.
//!
//! The first call probes the interpreter with a known-good snippet and
//! a known-blocked import; if either probe misbehaves, every subsequent
//! call fails fast with `SandboxUnavailable` instead of producing
//! garbage verdicts.

use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resource budget for one snippet run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandboxLimits {
    /// Wall-clock budget in seconds; the CPU rlimit is the ceiling of
    /// this value and the process is killed one second after it.
    pub timeout_s: f64,
    /// Address-space rlimit in megabytes.
    pub memory_mb: u64,
}

impl Default for SandboxLimits {
    fn default() -> Self {
        Self {
            timeout_s: 10.0,
            memory_mb: 512,
        }
    }
}

/// Tally of one snippet's test run.
///
/// `all_passed` is derived at construction: it holds exactly when at
/// least one test passed and nothing failed, errored, or timed out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
    pub timed_out: bool,
    pub all_passed: bool,
}

impl TestOutcome {
    pub fn new(passed: usize, failed: usize, errored: usize, timed_out: bool) -> Self {
        Self {
            passed,
            failed,
            errored,
            timed_out,
            all_passed: passed >= 1 && failed == 0 && errored == 0 && !timed_out,
        }
    }
}

/// Runs `code` once, then each test string against the resulting module
/// namespace. A snippet that fails to load (syntax error, crash at
/// import time) marks every test as errored. A run that exhausts the
/// time budget reports `timed_out` with no per-test counts.
pub fn run_tests(code: &str, tests: &[String], limits: &SandboxLimits) -> Result<TestOutcome> {
    ensure_sandbox()?;
    execute(code, tests, limits)
}

static CANARY: OnceLock<std::result::Result<(), String>> = OnceLock::new();

fn ensure_sandbox() -> Result<()> {
    let status = CANARY.get_or_init(|| {
        let limits = SandboxLimits::default();
        let good = execute(
            "def one():\n    return 1\n",
            &["assert one() == 1".to_string()],
            &limits,
        )
        .map_err(|e| format!("canary run failed: {e}"))?;
        if !good.all_passed {
            return Err(format!("canary snippet did not pass: {good:?}"));
        }
        let blocked = execute("import socket\n", &["assert True".to_string()], &limits)
            .map_err(|e| format!("canary run failed: {e}"))?;
        if blocked.errored == 0 {
            return Err("import guard failed to block the socket module".to_string());
        }
        Ok(())
    });
    status.clone().map_err(Error::SandboxUnavailable)
}

fn execute(code: &str, tests: &[String], limits: &SandboxLimits) -> Result<TestOutcome> {
    let dir = tempfile::tempdir()?;
    fs::write(dir.path().join("code.py"), code)?;
    fs::write(dir.path().join("tests.json"), serde_json::to_string(tests)?)?;
    fs::write(dir.path().join("driver.py"), DRIVER)?;
    let stdout_file = fs::File::create(dir.path().join("stdout.txt"))?;
    let stderr_file = fs::File::create(dir.path().join("stderr.txt"))?;

    let cpu_s = limits.timeout_s.ceil().max(1.0) as u64;
    let mut child = Command::new("python3")
        .arg("-I")
        .arg("driver.py")
        .arg(limits.memory_mb.to_string())
        .arg(cpu_s.to_string())
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(Stdio::from(stdout_file))
        .stderr(Stdio::from(stderr_file))
        .spawn()
        .map_err(|e| Error::SandboxUnavailable(format!("cannot launch python3: {e}")))?;

    let deadline = Instant::now() + Duration::from_secs_f64(limits.timeout_s + 1.0);
    let status = loop {
        match child.try_wait()? {
            Some(status) => break status,
            None if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(TestOutcome::new(0, 0, 0, true));
            }
            None => std::thread::sleep(Duration::from_millis(10)),
        }
    };

    let result_path = dir.path().join("result.json");
    if !result_path.exists() {
        // A SIGKILL from the CPU rlimit leaves no exit code and no
        // verdict; that is a timeout, not a broken sandbox.
        if status.code().is_none() {
            return Ok(TestOutcome::new(0, 0, 0, true));
        }
        return Err(Error::SandboxUnavailable(format!(
            "test driver exited with {status} and wrote no verdict; stderr: {}",
            tail_of(&dir.path().join("stderr.txt"))
        )));
    }

    let raw = fs::read_to_string(&result_path)?;
    let verdict: DriverVerdict = serde_json::from_str(&raw)
        .map_err(|e| Error::SandboxUnavailable(format!("unreadable driver verdict: {e}")))?;
    if verdict.load_error.is_some() {
        return Ok(TestOutcome::new(0, 0, tests.len(), false));
    }
    let mut passed = 0;
    let mut failed = 0;
    let mut errored = 0;
    for entry in verdict.results.unwrap_or_default() {
        match entry.as_str() {
            "pass" => passed += 1,
            "fail" => failed += 1,
            _ => errored += 1,
        }
    }
    Ok(TestOutcome::new(passed, failed, errored, false))
}

#[derive(Deserialize)]
struct DriverVerdict {
    load_error: Option<String>,
    results: Option<Vec<String>>,
}

fn tail_of(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap_or_default();
    let tail: String = text.chars().rev().take(500).collect();
    tail.chars().rev().collect()
}

const DRIVER: &str = r#"import json
import sys


def main():
    memory_mb = int(sys.argv[1])
    cpu_s = int(sys.argv[2])
    try:
        import resource
        limit = memory_mb * 1024 * 1024
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
        resource.setrlimit(resource.RLIMIT_CPU, (cpu_s, cpu_s))
    except Exception:
        pass

    import builtins
    blocked = {
        "socket", "ssl", "http", "urllib", "ftplib", "smtplib", "poplib",
        "imaplib", "telnetlib", "socketserver", "xmlrpc", "subprocess",
        "multiprocessing", "ctypes", "webbrowser",
    }
    real_import = builtins.__import__

    def guarded(name, *args, **kwargs):
        if name.split(".")[0] in blocked:
            raise ImportError("import of %r is blocked in the test sandbox" % name)
        return real_import(name, *args, **kwargs)

    builtins.__import__ = guarded

    with open("code.py", "r", encoding="utf-8") as fh:
        code = fh.read()
    with open("tests.json", "r", encoding="utf-8") as fh:
        tests = json.load(fh)

    def write(payload):
        with open("result.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    namespace = {"__name__": "__main__", "__builtins__": builtins}
    try:
        exec(compile(code, "code.py", "exec"), namespace)
    except BaseException as exc:
        write({"load_error": repr(exc)})
        return

    results = []
    for test in tests:
        try:
            exec(compile(test, "<test>", "exec"), dict(namespace))
            results.append("pass")
        except AssertionError:
            results.append("fail")
        except BaseException:
            results.append("error")
    write({"results": results})


main()
"#;
