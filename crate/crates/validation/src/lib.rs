//! Verdict bookkeeping for the acceptance suite in `tests/acceptance.rs`.

/// A named criterion.
pub type Criterion = (&'static str, fn() -> Outcome);

/// Clauses checked for one criterion.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub pass: bool,
    pub lines: Vec<String>,
}

impl Outcome {
    pub fn new() -> Self {
        Self { pass: true, lines: Vec::new() }
    }

    /// Records one clause; the criterion passes only if every clause does.
    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.pass &= ok;
        self.lines.push(format!("{} {}", if ok { "ok  " } else { "MISS" }, what.into()));
    }

    /// Context line that does not affect the verdict.
    pub fn note(&mut self, what: impl Into<String>) {
        self.lines.push(format!("     {}", what.into()));
    }
}

/// Runs every criterion, printing one PASS/FAIL line each followed by its
/// clauses. Returns the names of the failed criteria.
pub fn run_all(criteria: &[Criterion]) -> Vec<&'static str> {
    let mut failed = Vec::new();
    for &(name, f) in criteria {
        let start = std::time::Instant::now();
        let out = f();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name} ({:.1} s)", start.elapsed().as_secs_f64());
        for line in &out.lines {
            println!("     {line}");
        }
        if !out.pass {
            failed.push(name);
        }
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
    }
    failed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_miss_fails_the_criterion() {
        let mut o = Outcome::new();
        o.check(true, "a");
        o.note("context");
        assert!(o.pass);
        o.check(false, "b");
        assert!(!o.pass);
        assert_eq!(o.lines.len(), 3);
        assert!(o.lines[2].starts_with("MISS"));
    }
}
