//! Named verification suites. Each suite is a list of checks; checks run
//! concurrently and their cases are reported in declaration order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{Case, SeriesPoint, SuiteReport};

mod analysis;
mod dyadic_checks;
mod kernel_checks;
mod measure_checks;
mod solver_checks;

pub use analysis::{
    bump_checks, expansion_family, hl_fs_growth, norm_checks, poincare_corpus, sharp_comparison,
};
pub use dyadic_checks::{cz_invariants, filtration_checks, martingale_check};
pub use kernel_checks::{kernel_moments, kernel_weak};
pub use measure_checks::{additivity_checks, parent_ratio_sweep, phi_ratio_sweep, ParentSweep};
pub use solver_checks::{
    apriori_stability_elliptic, apriori_stability_parabolic, convergence_elliptic, convergence_parabolic,
    holder_stability, solver_sanity,
};

pub const SUITES: [&str; 9] =
    ["measure", "dyadic", "cz", "maximal-fs", "poincare", "sobolev", "solver-parabolic", "solver-elliptic", "kernel"];

/// Shared knobs of every suite; absent sizes fall back to each check's
/// default corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub fields: Option<usize>,
    pub paths: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 7, fields: None, paths: None }
    }
}

/// Output of one check.
#[derive(Debug, Clone, Default)]
pub struct Part {
    pub cases: Vec<Case>,
    pub points: Vec<SeriesPoint>,
    pub budgets: BTreeMap<String, f64>,
    pub resolutions: BTreeMap<String, serde_json::Value>,
}

impl Part {
    pub fn push(&mut self, case: Case) {
        self.cases.push(case);
    }

    pub fn point(&mut self, case: &str, x: f64, y: f64) {
        self.points.push(SeriesPoint { case: case.to_string(), x, y });
    }

    pub fn consume(&mut self, key: &str, amount: f64) {
        *self.budgets.entry(key.to_string()).or_insert(0.0) += amount;
    }

    pub fn resolution(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.resolutions.insert(key.to_string(), value.into());
    }

    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }
}

type Check<'a> = (&'static str, Box<dyn Fn() -> Result<Part> + Send + Sync + 'a>);

fn run_checks(suite: &str, seed: u64, checks: Vec<Check<'_>>) -> SuiteReport {
    let parts: Vec<(&str, Result<Part>)> = checks.par_iter().map(|(label, f)| (*label, f())).collect();
    let mut report = SuiteReport::new(suite, seed);
    for (label, part) in parts {
        match part {
            Ok(part) => {
                report.extend(part.cases);
                report.series.extend(part.points);
                for (k, v) in part.budgets {
                    report.consume(&k, v);
                }
                for (k, v) in part.resolutions {
                    report.resolution(&k, v);
                }
            }
            Err(e) => report.push(Case::errored(label, e.to_string())),
        }
    }
    report
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let seed = cfg.seed;
    let fields = |default: usize| cfg.fields.unwrap_or(default);
    let checks: Vec<Check<'_>> = match name {
        "measure" => vec![
            ("parent-ratio", Box::new(|| Ok(parent_ratio_sweep(&ParentSweep::default())))),
            ("phi-ratio", Box::new(move || phi_ratio_sweep(fields(10_000), seed))),
            ("additivity", Box::new(move || additivity_checks(fields(2_000), seed))),
        ],
        "dyadic" => vec![
            ("martingale", Box::new(move || martingale_check(fields(40), seed))),
            ("filtration", Box::new(move || filtration_checks(fields(2_000), seed))),
        ],
        "cz" => vec![("cz", Box::new(move || cz_invariants(fields(200), seed)))],
        "maximal-fs" => vec![
            ("hl-fs", Box::new(move || hl_fs_growth(fields(100), seed))),
            ("sharp-comparison", Box::new(move || sharp_comparison(fields(30), seed))),
            ("expansion", Box::new(move || expansion_family(fields(2_000), seed))),
        ],
        "poincare" => vec![
            ("poincare", Box::new(move || poincare_corpus(fields(50), seed))),
            ("bump", Box::new(bump_checks)),
        ],
        "sobolev" => vec![("norms", Box::new(move || norm_checks(seed)))],
        "solver-parabolic" => vec![
            ("convergence", Box::new(convergence_parabolic)),
            ("apriori", Box::new(|| apriori_stability_parabolic(&[2.0, 4.0], &[0.5, 1.0, 1.5]))),
            ("holder", Box::new(holder_stability)),
            ("sanity", Box::new(solver_sanity)),
        ],
        "solver-elliptic" => vec![
            ("convergence", Box::new(convergence_elliptic)),
            ("apriori", Box::new(|| apriori_stability_elliptic(&[2.0, 4.0], &[0.5, 1.0, 1.5]))),
        ],
        "kernel" => {
            let paths = cfg.paths;
            vec![
                ("moments", Box::new(move || kernel_moments(paths.unwrap_or(100_000), seed))),
                ("weak", Box::new(move || kernel_weak(paths.unwrap_or(4_000), seed))),
            ]
        }
        other => return Err(Error::Unknown(format!("suite {other}"))),
    };
    Ok(run_checks(name, seed, checks))
}
