//! Suite reports: per-case records, run environment, aggregate and a
//! plot-ready `(case, x, y)` series. Serialization is deterministic: maps
//! are ordered and nothing time- or host-dependent is recorded.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Where the right-hand side of a case comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSource {
    /// A closed-form constant of the inequality under test.
    Theoretical,
    /// A quantity measured in the same run (refinement baseline, fitted constant).
    Measured,
    /// An exact value the computation must reproduce.
    Exact,
}

/// How `lhs` is compared with `rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
    /// Recorded for inspection; never fails.
    Descriptive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub relation: Relation,
    /// Relative slack on `rhs`.
    pub tolerance: f64,
    /// Absolute slack from measured discretization or sampling error.
    pub budget: f64,
    pub bound: BoundSource,
    pub pass: bool,
    /// Passed, but by less than `budget`.
    pub marginal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn ratio_of(lhs: f64, rhs: f64) -> f64 {
    if rhs != 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

impl Case {
    fn build(name: &str, lhs: f64, rhs: f64, relation: Relation, tolerance: f64, budget: f64, bound: BoundSource) -> Self {
        let slack = rhs.abs() * tolerance;
        let (pass, margin) = match relation {
            Relation::AtMost => (lhs <= rhs + slack + budget, rhs + slack - lhs),
            Relation::AtLeast => (lhs >= rhs - slack - budget, lhs - rhs + slack),
            Relation::Descriptive => (true, f64::INFINITY),
        };
        let pass = relation == Relation::Descriptive || (pass && !lhs.is_nan() && !rhs.is_nan());
        Case {
            name: name.to_string(),
            parameters: BTreeMap::new(),
            lhs,
            rhs,
            ratio: ratio_of(lhs, rhs),
            relation,
            tolerance,
            budget,
            bound,
            pass,
            marginal: pass && budget > 0.0 && margin < budget,
            note: None,
        }
    }

    /// Passes when `lhs ≤ rhs·(1 + tolerance) + budget`.
    pub fn at_most(name: &str, lhs: f64, rhs: f64, tolerance: f64, budget: f64, bound: BoundSource) -> Self {
        Self::build(name, lhs, rhs, Relation::AtMost, tolerance, budget, bound)
    }

    /// Passes when `lhs ≥ rhs − |rhs|·tolerance − budget`.
    pub fn at_least(name: &str, lhs: f64, rhs: f64, tolerance: f64, budget: f64, bound: BoundSource) -> Self {
        Self::build(name, lhs, rhs, Relation::AtLeast, tolerance, budget, bound)
    }

    pub fn descriptive(name: &str, lhs: f64, rhs: f64) -> Self {
        Self::build(name, lhs, rhs, Relation::Descriptive, 0.0, 0.0, BoundSource::Measured)
    }

    /// A case that only records whether a check held.
    pub fn check(name: &str, ok: bool, bound: BoundSource) -> Self {
        Self::build(name, if ok { 0.0 } else { 1.0 }, 0.0, Relation::AtMost, 0.0, 0.0, bound)
    }

    /// A failed case for a computation that raised an error.
    pub fn errored(name: &str, message: String) -> Self {
        let mut c = Self::build(name, f64::NAN, f64::NAN, Relation::AtMost, 0.0, 0.0, BoundSource::Measured);
        c.note = Some(message);
        c
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub seed: u64,
    pub resolutions: BTreeMap<String, Value>,
    pub versions: BTreeMap<String, String>,
    /// Quadrature nodes, solver unknowns and Monte Carlo paths consumed.
    pub budgets: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub cases: usize,
    pub failures: usize,
    pub marginal: usize,
    /// Largest finite `lhs/rhs` over the non-descriptive cases.
    pub max_ratio: f64,
}

/// One row of the plot-ready series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub case: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: Vec<Case>,
    pub environment: Environment,
    pub aggregate: Aggregate,
    #[serde(skip)]
    pub series: Vec<SeriesPoint>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("wlab".to_string(), env!("CARGO_PKG_VERSION").to_string());
        versions.insert("report".to_string(), "1".to_string());
        SuiteReport {
            suite: suite.to_string(),
            cases: Vec::new(),
            environment: Environment { seed, resolutions: BTreeMap::new(), versions, budgets: BTreeMap::new() },
            aggregate: Aggregate { cases: 0, failures: 0, marginal: 0, max_ratio: 0.0 },
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, case: Case) {
        self.cases.push(case);
        self.refresh();
    }

    pub fn extend(&mut self, cases: impl IntoIterator<Item = Case>) {
        self.cases.extend(cases);
        self.refresh();
    }

    pub fn resolution(&mut self, key: &str, value: impl Into<Value>) {
        self.environment.resolutions.insert(key.to_string(), value.into());
    }

    /// Adds `amount` to the named budget counter.
    pub fn consume(&mut self, key: &str, amount: f64) {
        *self.environment.budgets.entry(key.to_string()).or_insert(0.0) += amount;
    }

    pub fn point(&mut self, case: &str, x: f64, y: f64) {
        self.series.push(SeriesPoint { case: case.to_string(), x, y });
    }

    fn refresh(&mut self) {
        let judged = self.cases.iter().filter(|c| c.relation != Relation::Descriptive);
        self.aggregate = Aggregate {
            cases: self.cases.len(),
            failures: self.cases.iter().filter(|c| !c.pass).count(),
            marginal: self.cases.iter().filter(|c| c.marginal).count(),
            max_ratio: judged.map(|c| c.ratio).filter(|r| r.is_finite()).fold(0.0, f64::max),
        };
    }

    pub fn passed(&self) -> bool {
        self.aggregate.failures == 0
    }

    /// Cases whose name starts with `prefix`.
    pub fn cases_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Case> + 'a {
        self.cases.iter().filter(move |c| c.name.starts_with(prefix))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.series {
            w.serialize(p)?;
        }
        if self.series.is_empty() {
            w.write_record(["case", "x", "y"])?;
        }
        w.flush()?;
        Ok(())
    }

    /// The series CSV next to a JSON report: `out.json` gives `out.csv`.
    pub fn write_files(&self, json: &Path) -> Result<()> {
        self.write_json(json)?;
        let file = std::fs::File::create(json.with_extension("csv"))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations_and_margins() {
        let c = Case::at_most("a", 1.0, 2.0, 0.0, 0.0, BoundSource::Theoretical);
        assert!(c.pass && !c.marginal && c.ratio == 0.5);
        let c = Case::at_most("b", 2.05, 2.0, 0.0, 0.1, BoundSource::Measured);
        assert!(c.pass && c.marginal);
        let c = Case::at_most("c", 1.95, 2.0, 0.0, 0.1, BoundSource::Measured);
        assert!(c.pass && c.marginal);
        let c = Case::at_most("d", 1.0, 2.0, 0.0, 0.1, BoundSource::Measured);
        assert!(c.pass && !c.marginal);
        let c = Case::at_most("e", 2.2, 2.0, 0.0, 0.1, BoundSource::Measured);
        assert!(!c.pass);
        let c = Case::at_least("order", 1.99, 1.8, 0.0, 0.0, BoundSource::Theoretical);
        assert!(c.pass);
        let c = Case::at_most("slope", -1.2, -1.4, 0.0, 0.0, BoundSource::Theoretical);
        assert!(!c.pass);
        assert!(!Case::errored("x", "boom".into()).pass);
        assert!(Case::descriptive("g", 5.0, 1.0).pass);
        assert!(Case::check("ok", true, BoundSource::Exact).pass);
        assert!(!Case::check("no", false, BoundSource::Exact).pass);
    }

    #[test]
    fn aggregate_and_serialization() {
        let mut r = SuiteReport::new("demo", 7);
        r.push(Case::at_most("a", 1.0, 2.0, 0.0, 0.0, BoundSource::Theoretical).param("alpha", 0.5));
        r.push(Case::at_most("b", 3.0, 2.0, 0.0, 0.0, BoundSource::Theoretical));
        r.push(Case::descriptive("c", 100.0, 1.0));
        r.point("a", 1.0, 2.0);
        assert_eq!(r.aggregate.failures, 1);
        assert_eq!(r.aggregate.max_ratio, 1.5);
        assert!(!r.passed());
        let json = r.to_json().unwrap();
        assert_eq!(json, r.clone().to_json().unwrap());
        let v: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["cases"][0]["parameters"]["alpha"], 0.5);
        assert_eq!(v["cases"][0]["bound"], "theoretical");
        assert_eq!(v["environment"]["seed"], 7);
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "case,x,y\na,1.0,2.0\n");
    }
}
