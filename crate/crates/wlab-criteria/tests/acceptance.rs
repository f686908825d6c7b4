//! One PASS/FAIL line per acceptance criterion. A criterion passes when all
//! of its cases pass and it finishes inside its runtime limit. Exits 1 if any
//! criterion fails.

use std::time::{Duration, Instant};

use wlab::experiments::{experiment_oscillation_decay, experiment_sharp_estimate, OscillationConfig, SharpConfig};
use wlab::report::Case;
use wlab::suites::*;
use wlab::Result;

const SEED: u64 = 7;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Result<Vec<Case>>,
}

fn parts(ps: Vec<Result<Part>>) -> Result<Vec<Case>> {
    let mut out = Vec::new();
    for p in ps {
        out.extend(p?.cases);
    }
    Ok(out)
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "parent-ratio bound", limit: secs(10), run: || parts(vec![Ok(parent_ratio_sweep(&ParentSweep::default()))]) },
        Criterion { id: 2, name: "phi-ratio bound", limit: secs(1), run: || parts(vec![phi_ratio_sweep(10_000, SEED)]) },
        Criterion { id: 3, name: "averaging and stopping identities", limit: secs(30), run: || parts(vec![cz_invariants(200, SEED)]) },
        Criterion { id: 4, name: "martingale convergence", limit: secs(10), run: || parts(vec![martingale_check(40, SEED)]) },
        Criterion { id: 5, name: "dyadic Hardy-Littlewood and Fefferman-Stein", limit: secs(120), run: || parts(vec![hl_fs_growth(100, SEED)]) },
        Criterion {
            id: 6,
            name: "sharp comparison and clipped expansion",
            limit: secs(60),
            run: || parts(vec![sharp_comparison(30, SEED), expansion_family(2_000, SEED)]),
        },
        Criterion { id: 7, name: "weighted Poincare", limit: secs(60), run: || parts(vec![poincare_corpus(50, SEED)]) },
        Criterion { id: 8, name: "solver convergence", limit: secs(120), run: || parts(vec![convergence_parabolic(), convergence_elliptic()]) },
        Criterion {
            id: 9,
            name: "a priori estimate stability",
            limit: secs(300),
            run: || {
                parts(vec![
                    apriori_stability_parabolic(&[2.0, 4.0], &[0.5, 1.0, 1.5]),
                    apriori_stability_elliptic(&[2.0, 4.0], &[0.5, 1.0, 1.5]),
                ])
            },
        },
        Criterion {
            id: 10,
            name: "SDE kernel",
            limit: secs(300),
            run: || {
                let mut cases = parts(vec![kernel_moments(100_000, SEED), kernel_weak(4_000, SEED)])?;
                cases.retain(|c| c.relation != wlab::report::Relation::Descriptive);
                Ok(cases)
            },
        },
        Criterion {
            id: 11,
            name: "oscillation decay",
            limit: secs(180),
            run: || Ok(experiment_oscillation_decay(&OscillationConfig::default(), SEED)?.cases),
        },
        Criterion {
            id: 12,
            name: "sharp-function estimate",
            limit: secs(180),
            run: || Ok(experiment_sharp_estimate(&SharpConfig::default(), SEED)?.cases),
        },
        Criterion { id: 13, name: "Holder quotients", limit: secs(120), run: || parts(vec![holder_stability()]) },
    ]
}

fn describe(c: &Case) -> String {
    format!("{} (lhs {:.4e}, rhs {:.4e}, budget {:.3e})", c.name, c.lhs, c.rhs, c.budget)
}

fn main() {
    let mut failed = 0;
    for c in criteria() {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let timing = format!("{:.2} s of {} s", elapsed.as_secs_f64(), c.limit.as_secs());
        let (ok, detail) = match result {
            Err(e) => (false, format!("error: {e}")),
            Ok(cases) => {
                let bad: Vec<&Case> = cases.iter().filter(|k| !k.pass).collect();
                let marginal = cases.iter().filter(|k| k.marginal).count();
                let mut detail = format!("{} cases, {} failed, {} marginal", cases.len(), bad.len(), marginal);
                for k in bad.iter().take(4) {
                    detail.push_str(&format!("; {}", describe(k)));
                }
                if bad.len() > 4 {
                    detail.push_str(&format!("; and {} more", bad.len() - 4));
                }
                (bad.is_empty() && !cases.is_empty() && elapsed <= c.limit, detail)
            }
        };
        if !ok {
            failed += 1;
        }
        println!("{} criterion {:>2} {}: {}; {}", if ok { "PASS" } else { "FAIL" }, c.id, c.name, timing, detail);
    }
    println!("{} of 13 criteria passed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
