use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use apery_core::apery::CaseReport;
use apery_core::lfunc::{CheckReport, CorollaryReport, StabilizerReport};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Stdout or a file, buffered.
pub struct Emitter(Box<dyn Write>);

impl Emitter {
    pub fn open(path: Option<&Path>) -> io::Result<Self> {
        Ok(Emitter(match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        }))
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, value: &T) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut self.0, value)?;
        writeln!(self.0)?;
        self.0.flush()
    }

    pub fn csv<T: Serialize>(&mut self, rows: impl IntoIterator<Item = T>) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(&mut self.0);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        drop(w);
        self.0.flush()
    }

    pub fn text(&mut self, s: &str) -> io::Result<()> {
        self.0.write_all(s.as_bytes())?;
        self.0.flush()
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn verify_table(reports: &[CaseReport]) -> String {
    let mut s = format!(
        "{:<10} {:<5} {:>4} {:>6} {:<34} {:>10} {:<9} {:>11}\n",
        "case", "", "ode", "N", "limit", "abs_error", "rate", "fitted"
    );
    for r in reports {
        s += &format!(
            "{:<10} {:<5} {:>4} {:>6} {:<34} {:>10.3e} {:<9} {:>11}\n",
            r.case,
            verdict(r.pass),
            r.ode_verified_to.map_or("-".into(), |o| o.to_string()),
            r.n_used,
            r.limit_estimate,
            r.abs_error,
            r.rate_model,
            if r.fitted_rate.is_finite() { format!("{:.5}", r.fitted_rate) } else { "-".into() },
        );
        for e in &r.errors {
            s += &format!("    error: {e}\n");
        }
        if let Some(audit) = r.recurrence_audit.as_ref().filter(|a| !a.agrees) {
            for t in audit.terms.iter().filter(|t| !t.agrees) {
                let factor = t.factor.as_ref().map_or(String::new(), |f| format!(" (factor {f})"));
                s += &format!(
                    "    recurrence term {}: stated {} but operator gives {}{factor}\n",
                    t.index, t.stated, t.derived
                );
            }
        }
        for v in r.initial_values.iter().filter(|v| !v.agrees) {
            s +=
                &format!("    initial value {}_{}: stated {} computed {}\n", v.sequence, v.index, v.stated, v.computed);
        }
        for c in r.analytic_checks.iter().chain(&r.advisory_checks) {
            s += &format!("    {} {} (error {:.2e})\n", verdict(c.pass), c.identity, c.abs_error);
        }
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    s += &format!("{passed}/{} cases pass\n", reports.len());
    s
}

#[derive(Serialize)]
pub struct IdentityRow<'a> {
    group: &'a str,
    identity: &'a str,
    lhs: &'a str,
    rhs: &'a str,
    abs_error: f64,
    pass: bool,
}

fn groups<'a>(stab: &'a [StabilizerReport], cor: &'a [CorollaryReport]) -> Vec<(String, &'a [CheckReport])> {
    let mut g: Vec<(String, &[CheckReport])> = stab.iter().map(|r| (r.case.clone(), &r.checks[..])).collect();
    g.extend(cor.iter().map(|r| (format!("{:?}", r.which).to_lowercase(), &r.checks[..])));
    g
}

pub fn identity_rows<'a>(stab: &'a [StabilizerReport], cor: &'a [CorollaryReport]) -> Vec<IdentityRow<'a>> {
    let mut rows = Vec::new();
    for r in stab {
        rows.extend(r.checks.iter().map(|c| row(&r.case, c)));
    }
    for r in cor {
        let group = match r.which {
            apery_core::lfunc::Corollary::Mod12 => "mod12",
            apery_core::lfunc::Corollary::Mod16 => "mod16",
        };
        rows.extend(r.checks.iter().map(|c| row(group, c)));
    }
    rows
}

fn row<'a>(group: &'a str, c: &'a CheckReport) -> IdentityRow<'a> {
    IdentityRow { group, identity: &c.identity, lhs: &c.lhs, rhs: &c.rhs, abs_error: c.abs_error, pass: c.pass }
}

pub fn identity_table(stab: &[StabilizerReport], cor: &[CorollaryReport]) -> String {
    let mut s = String::new();
    for (name, checks) in groups(stab, cor) {
        s += &format!("{name}\n");
        for c in checks {
            s += &format!("  {} {:<52} error {:.2e}\n", verdict(c.pass), c.identity, c.abs_error);
        }
    }
    s
}

pub fn sequence_text(rows: &[(usize, &str, &str)]) -> String {
    rows.iter().map(|(n, a, b)| format!("{n:>5}  a = {a}  b = {b}\n")).collect()
}
