//! Problem files for one-off solves: a flat JSON object with the domain,
//! grid, scheme, norm exponents, coefficient matrices and a forcing, and the
//! directory layout the solution is written to.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridSpec, NodeField};
use crate::solver::{
    apriori_ratio_elliptic, apriori_ratio_parabolic, elliptic_residual, parabolic_residual, solve_elliptic,
    solve_parabolic, validate_ellipticity, NestedMatrices, Scheme, SolverConfig, SystemCoefficients,
    ELLIPTICITY_SAMPLES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Parabolic,
    Elliptic,
}

/// Right-hand side of a problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Forcing {
    /// `amplitude[k] · b(t; time) · Π b(xⁱ; space[i])` with
    /// `b(v; [lo, hi]) = (4(v − lo)(hi − v)/(hi − lo)²)³` inside the interval.
    /// `time` is ignored by elliptic problems.
    Bump {
        #[serde(default)]
        time: Option<[f64; 2]>,
        space: Vec<[f64; 2]>,
        amplitude: Vec<f64>,
    },
    /// A serialized field on exactly the problem grid. Relative paths are
    /// resolved against the problem file.
    File { path: PathBuf },
}

fn bump(v: f64, [lo, hi]: [f64; 2]) -> f64 {
    if v <= lo || v >= hi {
        0.0
    } else {
        (4.0 * (v - lo) * (hi - v) / ((hi - lo) * (hi - lo))).powi(3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default)]
    pub widths: Vec<f64>,
    pub n1: usize,
    #[serde(default)]
    pub n_trans: Vec<usize>,
    #[serde(rename = "T", default)]
    pub t_final: f64,
    #[serde(default)]
    pub nt: usize,
    #[serde(default)]
    pub scheme: Scheme,
    pub p: f64,
    pub theta: f64,
    /// `A[i][j]` is the `d₁ × d₁` matrix `A^{ij}`; alternatively `pieces`
    /// with `breakpoints` give piecewise-constant coefficients in time.
    #[serde(rename = "A", default)]
    pub a: Option<NestedMatrices>,
    #[serde(default)]
    pub pieces: Vec<NestedMatrices>,
    #[serde(default)]
    pub breakpoints: Vec<f64>,
    /// Declared bound `K` on every `|A^{ij}|`.
    #[serde(rename = "K", default)]
    pub k: Option<f64>,
    pub forcing: Forcing,
}

impl ProblemFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            l: self.l,
            widths: self.widths.clone(),
            n1: self.n1,
            n_trans: self.n_trans.clone(),
            t_final: self.t_final,
            nt: self.nt,
            scheme: self.scheme,
            p: self.p,
            theta: self.theta,
        }
    }

    pub fn coefficients(&self) -> Result<SystemCoefficients> {
        let c = match (&self.a, self.pieces.is_empty()) {
            (Some(a), true) if self.breakpoints.is_empty() => SystemCoefficients::constant(a)?,
            (None, false) => SystemCoefficients::piecewise(&self.breakpoints, &self.pieces)?,
            _ => return Err(Error::Config("give either A, or pieces with breakpoints".into())),
        };
        if c.d() != self.widths.len() + 1 {
            return Err(Error::Config(format!("A is {0}x{0} but the domain has dimension {1}", c.d(), self.widths.len() + 1)));
        }
        match self.k {
            Some(k) => c.with_bound(k),
            None => Ok(c),
        }
    }

    /// The forcing sampled on `grid`. `base` is the directory of the problem file.
    pub fn forcing_on(&self, grid: &GridSpec, d1: usize, base: &Path) -> Result<NodeField> {
        match &self.forcing {
            Forcing::Bump { time, space, amplitude } => {
                if space.len() != grid.d() || amplitude.len() != d1 {
                    return Err(Error::Config(format!(
                        "bump forcing needs {} space intervals and {d1} amplitudes",
                        grid.d()
                    )));
                }
                NodeField::sample(grid.clone(), d1, |t, x| {
                    let mut s: f64 = x.iter().zip(space).map(|(v, iv)| bump(*v, *iv)).product();
                    if let (Some(iv), true) = (time, grid.nt > 0) {
                        s *= bump(t, *iv);
                    }
                    amplitude.iter().map(|a| a * s).collect()
                })
            }
            Forcing::File { path } => {
                let path = if path.is_absolute() { path.clone() } else { base.join(path) };
                let f = NodeField::read_from(BufReader::new(File::open(&path)?))?;
                if f.grid() != grid || f.d1() != d1 {
                    return Err(Error::Config(format!("{} does not live on the problem grid", path.display())));
                }
                Ok(f)
            }
        }
    }
}

/// What a solve reports besides the field itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub kind: ProblemKind,
    pub d: usize,
    pub d1: usize,
    pub delta: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub residual: f64,
    pub apriori_ratio: f64,
    pub time_slices: usize,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: NodeField,
    pub f: NodeField,
    pub summary: SolveSummary,
}

/// Solves the problem in `path`.
pub fn solve_file(kind: ProblemKind, path: &Path) -> Result<Solution> {
    let problem = ProblemFile::read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    solve_problem(kind, &problem, base)
}

pub fn solve_problem(kind: ProblemKind, problem: &ProblemFile, base: &Path) -> Result<Solution> {
    let coeffs = problem.coefficients()?;
    let cfg = problem.config();
    let delta = validate_ellipticity(&coeffs, ELLIPTICITY_SAMPLES)?;
    log::info!("certified ellipticity delta = {delta}");
    let spec = cfg.norm()?;
    let (u, f, residual, ratio) = match kind {
        ProblemKind::Parabolic => {
            let f = problem.forcing_on(&cfg.grid()?, coeffs.d1(), base)?;
            let u = solve_parabolic(&coeffs, &f, &cfg)?;
            let residual = parabolic_residual(&coeffs, &u, &f, cfg.scheme)?;
            let ratio = apriori_ratio_parabolic(&u, &f, &spec)?;
            (u, f, residual, ratio)
        }
        ProblemKind::Elliptic => {
            let f = problem.forcing_on(&cfg.spatial_grid()?, coeffs.d1(), base)?;
            let u = solve_elliptic(&coeffs, &f, &cfg)?;
            let residual = elliptic_residual(&coeffs, &u, &f)?;
            let ratio = apriori_ratio_elliptic(&u, &f, &spec)?;
            (u, f, residual, ratio)
        }
    };
    let summary = SolveSummary {
        kind,
        d: coeffs.d(),
        d1: coeffs.d1(),
        delta,
        k: coeffs.bound(),
        residual,
        apriori_ratio: ratio,
        time_slices: u.n_times(),
    };
    Ok(Solution { u, f, summary })
}

fn write_field(field: &NodeField, path: &Path) -> Result<()> {
    field.write_to(BufWriter::new(File::create(path)?))
}

/// Writes `summary.json`, `forcing.txt` and the solution: `u.txt` for an
/// elliptic problem, one `u_00000.txt` per time slice for a parabolic one.
/// Returns the files written.
pub fn write_solution(solution: &Solution, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let summary = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&solution.summary)?;
    text.push('\n');
    std::fs::write(&summary, text)?;
    written.push(summary);
    let forcing = dir.join("forcing.txt");
    write_field(&solution.f, &forcing)?;
    written.push(forcing);
    match solution.summary.kind {
        ProblemKind::Elliptic => {
            let path = dir.join("u.txt");
            write_field(&solution.u, &path)?;
            written.push(path);
        }
        ProblemKind::Parabolic => {
            for k in 0..solution.u.n_times() {
                let path = dir.join(format!("u_{k:05}.txt"));
                let slice = solution.u.time_slice(k);
                write_field(&slice, &path)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(json: &str) -> ProblemFile {
        serde_json::from_str(json).unwrap()
    }

    const HEAT: &str = r#"{"L": 3, "n1": 32, "T": 0.5, "nt": 16, "p": 2, "theta": 1,
        "A": [[[[1]]]], "forcing": {"kind": "bump", "time": [0.05, 0.45], "space": [[0.5, 1.5]], "amplitude": [1]}}"#;

    #[test]
    fn parabolic_problem() {
        let s = solve_problem(ProblemKind::Parabolic, &problem(HEAT), Path::new(".")).unwrap();
        assert!(s.summary.residual < 1e-9);
        assert!(s.summary.apriori_ratio > 0.0 && s.summary.apriori_ratio.is_finite());
        assert_eq!(s.summary.time_slices, 17);
        assert!((s.summary.delta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn elliptic_problem_in_two_dimensions() {
        let p = problem(
            r#"{"L": 2, "widths": [1], "n1": 16, "n_trans": [8], "p": 2, "theta": 2, "K": 2,
            "A": [[[[1, 0.2], [0, 1]], [[0, 0], [0, 0]]], [[[0, 0], [0, 0]], [[1, 0], [0, 1]]]],
            "forcing": {"kind": "bump", "space": [[0.5, 1.5], [-0.5, 0.5]], "amplitude": [1, -1]}}"#,
        );
        let s = solve_problem(ProblemKind::Elliptic, &p, Path::new(".")).unwrap();
        assert_eq!((s.summary.d, s.summary.d1), (2, 2));
        assert!(s.summary.residual < 1e-9);
    }

    #[test]
    fn bad_problems() {
        assert!(serde_json::from_str::<ProblemFile>(r#"{"L": 1, "n1": 4, "p": 2, "theta": 1, "bogus": 1, "forcing": {"kind": "file", "path": "x"}}"#).is_err());
        let mut p = problem(HEAT);
        p.a = Some(vec![vec![vec![vec![-1.0]]]]);
        assert!(matches!(solve_problem(ProblemKind::Parabolic, &p, Path::new(".")), Err(Error::NotElliptic(_))));
        let mut p = problem(HEAT);
        p.k = Some(0.5);
        assert!(matches!(p.coefficients(), Err(Error::Config(_))));
        let mut p = problem(HEAT);
        p.widths = vec![1.0];
        p.n_trans = vec![4];
        assert!(p.coefficients().is_err());
    }

    #[test]
    fn trajectory_files() {
        let dir = tempfile::tempdir().unwrap();
        let s = solve_problem(ProblemKind::Parabolic, &problem(HEAT), Path::new(".")).unwrap();
        let files = write_solution(&s, dir.path()).unwrap();
        assert_eq!(files.len(), 2 + 17);
        let last = NodeField::read_from(BufReader::new(File::open(dir.path().join("u_00016.txt")).unwrap())).unwrap();
        assert_eq!(last, s.u.time_slice(16));

        // The written forcing can be fed back as a file forcing.
        let mut p = problem(HEAT);
        p.forcing = Forcing::File { path: "forcing.txt".into() };
        let again = solve_problem(ProblemKind::Parabolic, &p, dir.path()).unwrap();
        assert_eq!(again.u, s.u);
    }
}
