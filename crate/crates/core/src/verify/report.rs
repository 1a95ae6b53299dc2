//! Structured text report: fitted constants, check outcomes and decay
//! tables.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub constants: Vec<(String, f64)>,
    pub checks: Vec<CheckOutcome>,
    pub tables: Vec<Table>,
}

impl VerificationReport {
    pub fn constant(&mut self, name: impl Into<String>, value: f64) {
        self.constants.push((name.into(), value));
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckOutcome {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn table(&mut self, title: impl Into<String>, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.tables.push(Table {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[constants]")?;
        for (k, v) in &self.constants {
            writeln!(f, "{k} = {v:.6e}")?;
        }
        writeln!(f, "\n[checks]")?;
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        for t in &self.tables {
            writeln!(f, "\n[table {}]", t.title)?;
            writeln!(f, "{}", t.columns.join(" "))?;
            for r in &t.rows {
                let cells: Vec<String> = r.iter().map(|x| format!("{x:.6e}")).collect();
                writeln!(f, "{}", cells.join(" "))?;
            }
        }
        writeln!(f, "\nstatus = {}", if self.all_passed() { "pass" } else { "fail" })
    }
}
