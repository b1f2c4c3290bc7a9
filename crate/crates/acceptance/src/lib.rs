//! Reporting helpers for the numbered acceptance checks in `tests/acceptance.rs`.

use std::fmt::Write as _;
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

static SERIAL: Mutex<()> = Mutex::new(());

/// One measured quantity against its threshold.
#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { label: label.into(), pass, detail: detail.into() }
    }

    /// |value − target| ≤ tol.
    pub fn abs(label: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let d = (value - target).abs();
        Check::new(label, d <= tol, format!("value {value:.12e}, target {target:.12e}, |diff| {d:.3e} (tol {tol:.1e})"))
    }

    /// |value/target − 1| ≤ tol.
    pub fn rel(label: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let r = ((value - target) / target).abs();
        Check::new(label, r <= tol, format!("value {value:.10e}, target {target:.10e}, rel diff {r:.3e} (tol {tol:.1e})"))
    }

    pub fn below(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(label, value < limit, format!("{value:.6e} < {limit:.1e}"))
    }
}

/// Runs one criterion while holding a global lock, so timings are not inflated by
/// sibling tests on the same cores.
pub struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    start: Instant,
    checks: Vec<Check>,
    _guard: MutexGuard<'static, ()>,
}

impl Criterion {
    pub fn start(id: u32, title: &'static str, limit: Duration) -> Self {
        let guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
        Criterion { id, title, limit, start: Instant::now(), checks: Vec::new(), _guard: guard }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Prints the verdict; the error names the failed checks.
    pub fn finish(mut self) -> Result<(), String> {
        let elapsed = self.start.elapsed();
        let within = elapsed <= self.limit;
        self.checks.push(Check::new(
            "runtime",
            within,
            format!("{:.2} s (limit {} s)", elapsed.as_secs_f64(), self.limit.as_secs()),
        ));
        let pass = self.checks.iter().all(|c| c.pass);
        let mut out = String::new();
        let _ = writeln!(out, "criterion {:>2} {}: {}", self.id, if pass { "PASS" } else { "FAIL" }, self.title);
        for c in &self.checks {
            let _ = writeln!(out, "    [{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.label, c.detail);
        }
        print!("{out}");
        if pass {
            Ok(())
        } else {
            let failed: Vec<&str> = self.checks.iter().filter(|c| !c.pass).map(|c| c.label.as_str()).collect();
            Err(format!("criterion {} failed: {}", self.id, failed.join(", ")))
        }
    }
}
