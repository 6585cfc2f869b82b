//! Benchmark harness: generates orthogonally decomposable test tensors with
//! known spectral and nuclear norms, runs the approximation pipelines over
//! seeded instance batches, and emits machine-readable CSV artifacts.
//!
//! CSV outputs are byte-reproducible for a fixed config and seed; wall-clock
//! timings are kept in memory and printed, never written to the CSVs.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::covering::{
    build_classical, build_grid, build_h2, build_h4, build_h5, build_random, ClassicalKind,
    HittingSet,
};
use crate::error::{Error, Result};
use crate::nuclear::{assemble_problem_with_budget, solve_nuclear_sdp};
use crate::rng::{mix_seed, Rng};
use crate::spectral::{als_refine, approx_spectral_norm, GOLDEN_ALPHA, GOLDEN_BETA};
use crate::tensor::DenseTensor;

const ORTHO_TOL: f64 = 1e-10;
const OPTIMALITY_TOL: f64 = 1e-6;

/// Order-3 test tensor `sum_i lambda_i x_i (x) y_i (x) z_i` with orthonormal
/// `y` and `z` families, so the spectral norm is `max lambda_i` and the
/// nuclear norm is `sum lambda_i`.
#[derive(Clone, Debug)]
pub struct OdecoInstance {
    pub tensor: DenseTensor,
    pub weights: Vec<f64>,
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<Vec<f64>>,
    pub zs: Vec<Vec<f64>>,
    pub true_spectral: f64,
    pub true_nuclear: f64,
    pub seed: u64,
}

fn orthonormal_family(rng: &mut Rng, n: usize, r: usize) -> Vec<Vec<f64>> {
    let mut family: Vec<Vec<f64>> = Vec::with_capacity(r);
    while family.len() < r {
        let mut v = rng.normal_vec(n);
        for prev in &family {
            let dot: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
            for (vi, pi) in v.iter_mut().zip(prev) {
                *vi -= dot * pi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            family.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    family
}

impl OdecoInstance {
    /// Draws weights and factors from seeded standard normals: weights are
    /// absolute values, the `y` and `z` families are orthonormalized, the
    /// `x` factors stay free unit vectors.
    pub fn generate(dims: (usize, usize, usize), r: usize, seed: u64) -> Result<Self> {
        let (n1, n2, n3) = dims;
        if r < 1 {
            return Err(Error::Parameter("odeco rank must be >= 1".into()));
        }
        if r > n2.min(n3) {
            return Err(Error::Parameter(format!(
                "odeco rank {r} exceeds orthogonality capacity min(n2, n3) = {}",
                n2.min(n3)
            )));
        }
        let mut rng = Rng::new(seed);
        let weights: Vec<f64> = (0..r).map(|_| rng.next_normal().abs()).collect();
        let xs: Vec<Vec<f64>> = (0..r).map(|_| rng.unit_vector(n1)).collect();
        let ys = orthonormal_family(&mut rng, n2, r);
        let zs = orthonormal_family(&mut rng, n3, r);
        Self::from_parts(weights, xs, ys, zs, seed)
    }

    /// Builds an instance from explicit components, validating orthogonality
    /// and the norm identities.
    pub fn from_parts(
        weights: Vec<f64>,
        xs: Vec<Vec<f64>>,
        ys: Vec<Vec<f64>>,
        zs: Vec<Vec<f64>>,
        seed: u64,
    ) -> Result<Self> {
        let r = weights.len();
        if r == 0 || xs.len() != r || ys.len() != r || zs.len() != r {
            return Err(Error::Parameter("component count mismatch".into()));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::Parameter("weights must be nonnegative".into()));
        }
        for i in 0..r {
            for j in (i + 1)..r {
                let xy: f64 = xs[i].iter().zip(&xs[j]).map(|(a, b)| a * b).sum::<f64>()
                    * ys[i].iter().zip(&ys[j]).map(|(a, b)| a * b).sum::<f64>();
                let zz: f64 = zs[i].iter().zip(&zs[j]).map(|(a, b)| a * b).sum();
                if xy.abs() > ORTHO_TOL || zz.abs() > ORTHO_TOL {
                    return Err(Error::Parameter(format!(
                        "orthogonality residual too large between components {i} and {j}"
                    )));
                }
            }
        }
        let shape = vec![xs[0].len(), ys[0].len(), zs[0].len()];
        let mut tensor = DenseTensor::zeros(shape)?;
        for i in 0..r {
            tensor.add_rank_one(weights[i], &[xs[i].clone(), ys[i].clone(), zs[i].clone()])?;
        }
        let true_spectral = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let true_nuclear = weights.iter().sum();
        Ok(Self {
            tensor,
            weights,
            xs,
            ys,
            zs,
            true_spectral,
            true_nuclear,
            seed,
        })
    }

    /// Frobenius residual between the stored tensor and its reconstruction.
    pub fn reconstruction_residual(&self) -> f64 {
        let mut recon = DenseTensor::zeros(self.tensor.shape().to_vec()).expect("shape");
        for i in 0..self.weights.len() {
            recon
                .add_rank_one(
                    self.weights[i],
                    &[self.xs[i].clone(), self.ys[i].clone(), self.zs[i].clone()],
                )
                .expect("dims");
        }
        let diff: f64 = recon
            .data()
            .iter()
            .zip(self.tensor.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        diff.sqrt()
    }
}

/// Which pipeline an experiment drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentMode {
    Spectral,
    Nuclear,
}

/// Hitting-set choice for the enumerated mode.
#[derive(Clone, Debug, PartialEq)]
pub enum HsetSpec {
    Random { count: usize },
    H2,
    H4,
    H5,
    PmBasis,
    Simplex,
    Grid { m: usize },
}

impl HsetSpec {
    pub fn build(&self, n: usize, seed: u64) -> Result<HittingSet> {
        match self {
            HsetSpec::Random { count } => build_random(n, *count, mix_seed(seed, 0xBEEF)),
            HsetSpec::H2 => build_h2(n),
            HsetSpec::H4 => build_h4(n),
            HsetSpec::H5 => build_h5(n, GOLDEN_ALPHA, GOLDEN_BETA),
            HsetSpec::PmBasis => build_classical(n, ClassicalKind::PmBasis),
            HsetSpec::Simplex => build_classical(n, ClassicalKind::Simplex),
            HsetSpec::Grid { m } => build_grid(n, *m),
        }
    }
}

impl std::str::FromStr for HsetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("random:") {
            let count = rest
                .parse()
                .map_err(|_| Error::Parse(format!("bad random count {rest:?}")))?;
            return Ok(HsetSpec::Random { count });
        }
        if let Some(rest) = s.strip_prefix("grid:") {
            let m = rest
                .parse()
                .map_err(|_| Error::Parse(format!("bad grid m {rest:?}")))?;
            return Ok(HsetSpec::Grid { m });
        }
        match s {
            "h2" => Ok(HsetSpec::H2),
            "h4" => Ok(HsetSpec::H4),
            "h5" => Ok(HsetSpec::H5),
            "pm_basis" | "pm-basis" => Ok(HsetSpec::PmBasis),
            "simplex" => Ok(HsetSpec::Simplex),
            _ => Err(Error::Parse(format!("unknown hitting-set spec {s:?}"))),
        }
    }
}

/// Experiment configuration, read from a simple `key=value` text file.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub mode: ExperimentMode,
    pub dims: (usize, usize, usize),
    pub r: usize,
    pub instances: usize,
    pub seed: u64,
    pub hset: HsetSpec,
    pub tol: f64,
    pub max_iter: usize,
    pub constraint_budget: usize,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = String::from("experiment");
        let mut mode = None;
        let mut dims = None;
        let mut r = None;
        let mut instances = 20usize;
        let mut seed = 0u64;
        let mut hset = HsetSpec::Random { count: 60 };
        let mut tol = 1e-6f64;
        let mut max_iter = 5_000usize;
        let mut constraint_budget = crate::nuclear::CONSTRAINT_BUDGET;
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "name" => name = value.to_string(),
                "mode" => {
                    mode = Some(match value {
                        "spectral" => ExperimentMode::Spectral,
                        "nuclear" => ExperimentMode::Nuclear,
                        _ => return Err(Error::Parse(format!("unknown mode {value:?}"))),
                    })
                }
                "dims" => {
                    let parts: Vec<&str> = value.split('x').collect();
                    if parts.len() != 3 {
                        return Err(Error::Parse(format!("dims must be AxBxC, got {value:?}")));
                    }
                    let p: Vec<usize> = parts
                        .iter()
                        .map(|t| {
                            t.trim()
                                .parse()
                                .map_err(|_| Error::Parse(format!("bad dim {t:?}")))
                        })
                        .collect::<Result<_>>()?;
                    dims = Some((p[0], p[1], p[2]));
                }
                "r" => r = Some(value.parse().map_err(|_| Error::Parse("bad r".into()))?),
                "instances" => {
                    instances = value
                        .parse()
                        .map_err(|_| Error::Parse("bad instances".into()))?
                }
                "seed" => seed = value.parse().map_err(|_| Error::Parse("bad seed".into()))?,
                "hset" => hset = value.parse()?,
                "tol" => tol = value.parse().map_err(|_| Error::Parse("bad tol".into()))?,
                "max_iter" => {
                    max_iter = value
                        .parse()
                        .map_err(|_| Error::Parse("bad max_iter".into()))?
                }
                "budget" => {
                    constraint_budget = value
                        .parse()
                        .map_err(|_| Error::Parse("bad budget".into()))?
                }
                _ => return Err(Error::Parse(format!("unknown config key {key:?}"))),
            }
        }
        let dims = dims.ok_or_else(|| Error::Parse("config must set dims".into()))?;
        let mode = mode.ok_or_else(|| Error::Parse("config must set mode".into()))?;
        let r = r.unwrap_or_else(|| dims.0.min(dims.1).min(dims.2));
        if instances == 0 {
            return Err(Error::Parameter("instances must be >= 1".into()));
        }
        Ok(Self {
            name,
            mode,
            dims,
            r,
            instances,
            seed,
            hset,
            tol,
            max_iter,
            constraint_budget,
        })
    }

    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

/// One instance outcome. Fields that do not apply to a mode stay `None`.
#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub index: usize,
    pub seed: u64,
    pub value: f64,
    pub true_value: f64,
    pub bound: f64,
    pub refined_value: Option<f64>,
    pub refined_bound: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub max_violation: Option<f64>,
    pub wall_ms: f64,
}

/// Aggregates over an experiment batch.
#[derive(Clone, Debug)]
pub struct ExperimentSummary {
    pub name: String,
    pub rows: Vec<ExperimentRow>,
    pub min_bound: f64,
    pub max_bound: f64,
    pub mean_bound: f64,
    pub min_refined_bound: Option<f64>,
    pub max_refined_bound: Option<f64>,
    pub mean_refined_bound: Option<f64>,
    /// Percentage of rows whose refined bound reaches 1 within 1e-6.
    pub pct_optimal: Option<f64>,
    pub mean_wall_ms: f64,
}

impl fmt::Display for ExperimentSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment {}: {} instances", self.name, self.rows.len())?;
        writeln!(
            f,
            "  bound   min {:.6}  mean {:.6}  max {:.6}",
            self.min_bound, self.mean_bound, self.max_bound
        )?;
        if let (Some(mn), Some(mean), Some(mx)) = (
            self.min_refined_bound,
            self.mean_refined_bound,
            self.max_refined_bound,
        ) {
            writeln!(f, "  bound+  min {mn:.6}  mean {mean:.6}  max {mx:.6}")?;
        }
        if let Some(p) = self.pct_optimal {
            writeln!(f, "  % of optimality+  {p:.1}%")?;
        }
        writeln!(f, "  mean wall per instance  {:.1} ms", self.mean_wall_ms)
    }
}

/// Min/max/mean aggregates over rows; errors on an empty batch.
pub fn summarize(name: &str, rows: Vec<ExperimentRow>) -> Result<ExperimentSummary> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no experiment rows".into()));
    }
    let n = rows.len() as f64;
    let min_bound = rows.iter().map(|r| r.bound).fold(f64::INFINITY, f64::min);
    let max_bound = rows.iter().map(|r| r.bound).fold(f64::NEG_INFINITY, f64::max);
    let mean_bound = rows.iter().map(|r| r.bound).sum::<f64>() / n;
    let refined: Vec<f64> = rows.iter().filter_map(|r| r.refined_bound).collect();
    let (min_r, max_r, mean_r, pct) = if refined.len() == rows.len() {
        let mn = refined.iter().copied().fold(f64::INFINITY, f64::min);
        let mx = refined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = refined.iter().sum::<f64>() / n;
        let pct = 100.0 * refined.iter().filter(|&&b| b >= 1.0 - OPTIMALITY_TOL).count() as f64 / n;
        (Some(mn), Some(mx), Some(mean), Some(pct))
    } else {
        (None, None, None, None)
    };
    let mean_wall_ms = rows.iter().map(|r| r.wall_ms).sum::<f64>() / n;
    Ok(ExperimentSummary {
        name: name.to_string(),
        min_bound,
        max_bound,
        mean_bound,
        min_refined_bound: min_r,
        max_refined_bound: max_r,
        mean_refined_bound: mean_r,
        pct_optimal: pct,
        mean_wall_ms,
        rows,
    })
}

/// Runs the spectral-norm protocol: approximate, record the bound ratio,
/// refine with ALS, record the refined ratio.
pub fn run_spectral_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let enum_dim = cfg.dims.0.min(cfg.dims.1).min(cfg.dims.2);
    let hset = cfg.hset.build(enum_dim, cfg.seed)?;
    let rows: Vec<ExperimentRow> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| -> Result<ExperimentRow> {
            let seed = mix_seed(cfg.seed, i as u64);
            let start = Instant::now();
            let inst = OdecoInstance::generate(cfg.dims, cfg.r, seed)?;
            let approx = approx_spectral_norm(&inst.tensor, std::slice::from_ref(&hset))?;
            let refined = als_refine(&inst.tensor, &approx.solution, 500, 1e-10)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(ExperimentRow {
                index: i,
                seed,
                value: approx.value,
                true_value: inst.true_spectral,
                bound: approx.value / inst.true_spectral,
                refined_value: Some(refined.value),
                refined_bound: Some(refined.value / inst.true_spectral),
                iterations: None,
                converged: None,
                max_violation: None,
                wall_ms,
            })
        })
        .collect::<Result<_>>()?;
    summarize(&cfg.name, rows)
}

/// Runs the nuclear-norm protocol: solve the relaxation and record
/// `u / ||T||_*`, which sits at or above one for an exact solve.
pub fn run_nuclear_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let enum_dim = cfg.dims.0.min(cfg.dims.1).min(cfg.dims.2);
    let hset = cfg.hset.build(enum_dim, cfg.seed)?;
    let rows: Vec<ExperimentRow> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| -> Result<ExperimentRow> {
            let seed = mix_seed(cfg.seed, i as u64);
            let start = Instant::now();
            let inst = OdecoInstance::generate(cfg.dims, cfg.r, seed)?;
            let problem = assemble_problem_with_budget(
                &inst.tensor,
                std::slice::from_ref(&hset),
                cfg.constraint_budget,
            )?;
            let sol = solve_nuclear_sdp(&problem, cfg.tol, cfg.max_iter)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(ExperimentRow {
                index: i,
                seed,
                value: sol.u,
                true_value: inst.true_nuclear,
                bound: sol.u / inst.true_nuclear,
                refined_value: None,
                refined_bound: None,
                iterations: Some(sol.iterations),
                converged: Some(sol.converged),
                max_violation: Some(sol.max_violation),
                wall_ms,
            })
        })
        .collect::<Result<_>>()?;
    summarize(&cfg.name, rows)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    match cfg.mode {
        ExperimentMode::Spectral => run_spectral_experiment(cfg),
        ExperimentMode::Nuclear => run_nuclear_experiment(cfg),
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.17e}")).unwrap_or_default()
}

/// Writes `<name>_rows.csv` and `<name>_summary.csv` into `dir`.
/// Timings are intentionally excluded so reruns are byte-identical.
pub fn write_csv(dir: &Path, summary: &ExperimentSummary) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let rows_path = dir.join(format!("{}_rows.csv", summary.name));
    let summary_path = dir.join(format!("{}_summary.csv", summary.name));

    let mut w = std::io::BufWriter::new(std::fs::File::create(&rows_path)?);
    writeln!(
        w,
        "schema,index,seed,value,true_value,bound,refined_value,refined_bound,iterations,converged,max_violation"
    )?;
    for r in &summary.rows {
        writeln!(
            w,
            "1,{},{},{:.17e},{:.17e},{:.17e},{},{},{},{},{}",
            r.index,
            r.seed,
            r.value,
            r.true_value,
            r.bound,
            opt_f64(r.refined_value),
            opt_f64(r.refined_bound),
            r.iterations.map(|v| v.to_string()).unwrap_or_default(),
            r.converged.map(|v| v.to_string()).unwrap_or_default(),
            opt_f64(r.max_violation),
        )?;
    }
    drop(w);

    let mut w = std::io::BufWriter::new(std::fs::File::create(&summary_path)?);
    writeln!(
        w,
        "schema,name,instances,min_bound,max_bound,mean_bound,min_refined_bound,max_refined_bound,mean_refined_bound,pct_optimal"
    )?;
    writeln!(
        w,
        "1,{},{},{:.17e},{:.17e},{:.17e},{},{},{},{}",
        summary.name,
        summary.rows.len(),
        summary.min_bound,
        summary.max_bound,
        summary.mean_bound,
        opt_f64(summary.min_refined_bound),
        opt_f64(summary.max_refined_bound),
        opt_f64(summary.mean_refined_bound),
        opt_f64(summary.pct_optimal),
    )?;
    Ok((rows_path, summary_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nuclear::flattening_baseline;
    use crate::tensor::multilinear_form;

    #[test]
    fn rank_one_instance() {
        let inst = OdecoInstance::generate((2, 2, 2), 1, 5).unwrap();
        assert_eq!(inst.weights.len(), 1);
        assert!((inst.true_spectral - inst.weights[0]).abs() < 1e-15);
        assert!((inst.true_nuclear - inst.weights[0]).abs() < 1e-15);
        assert!(inst.reconstruction_residual() < 1e-10);
    }

    #[test]
    fn forced_weights_give_known_norms() {
        let e = |i: usize| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        let inst = OdecoInstance::from_parts(
            vec![2.0, 1.0],
            vec![e(0), e(1)],
            vec![e(0), e(1)],
            vec![e(0), e(1)],
            0,
        )
        .unwrap();
        assert_eq!(inst.true_spectral, 2.0);
        assert_eq!(inst.true_nuclear, 3.0);
    }

    #[test]
    fn generated_instance_passes_invariants() {
        let inst = OdecoInstance::generate((5, 10, 10), 5, 1).unwrap();
        assert!(inst.reconstruction_residual() <= 1e-10);
        for i in 0..5 {
            for j in (i + 1)..5 {
                let zz: f64 = inst.zs[i].iter().zip(&inst.zs[j]).map(|(a, b)| a * b).sum();
                let yy: f64 = inst.ys[i].iter().zip(&inst.ys[j]).map(|(a, b)| a * b).sum();
                assert!(zz.abs() <= 1e-10 && yy.abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn small_instance_norms_match_brute_force() {
        use rayon::prelude::*;
        let inst = OdecoInstance::generate((3, 3, 3), 2, 7).unwrap();
        // Spectral: sampled maximization with exact closure of two modes.
        let t = &inst.tensor;
        let best = (0..200_000)
            .into_par_iter()
            .map(|j| {
                let x = Rng::derive(70, j as u64).unit_vector(3);
                let mut slice = vec![0.0; 9];
                for (i, &w) in x.iter().enumerate() {
                    for c in 0..9 {
                        slice[c] += w * t.data()[i * 9 + c];
                    }
                }
                let m = crate::linalg::Matrix::new(3, 3, slice).unwrap();
                crate::linalg::spectral_norm_matrix(&m).unwrap().0
            })
            .reduce(|| f64::NEG_INFINITY, f64::max);
        assert!(
            (best - inst.true_spectral).abs() <= 0.01 * inst.true_spectral,
            "sampled {best} vs identity {}",
            inst.true_spectral
        );
        let flat = flattening_baseline(t).unwrap();
        assert!(inst.true_nuclear >= flat - 1e-9);
    }

    #[test]
    fn rank_capacity_enforced() {
        assert!(matches!(
            OdecoInstance::generate((5, 3, 3), 4, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn summarize_two_rows() {
        let mk = |bound: f64| ExperimentRow {
            index: 0,
            seed: 0,
            value: bound,
            true_value: 1.0,
            bound,
            refined_value: None,
            refined_bound: None,
            iterations: None,
            converged: None,
            max_violation: None,
            wall_ms: 0.0,
        };
        let s = summarize("t", vec![mk(0.5), mk(1.0)]).unwrap();
        assert_eq!(s.min_bound, 0.5);
        assert_eq!(s.max_bound, 1.0);
        assert_eq!(s.mean_bound, 0.75);
        let single = summarize("t", vec![mk(0.7)]).unwrap();
        assert_eq!(single.min_bound, single.max_bound);
        assert_eq!(single.min_bound, single.mean_bound);
        assert!(matches!(
            summarize("t", vec![]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn summarize_matches_streaming_oracle() {
        let mut rng = Rng::new(3);
        let rows: Vec<ExperimentRow> = (0..200)
            .map(|i| {
                let b = rng.next_f64();
                ExperimentRow {
                    index: i,
                    seed: i as u64,
                    value: b,
                    true_value: 1.0,
                    bound: b,
                    refined_value: None,
                    refined_bound: None,
                    iterations: None,
                    converged: None,
                    max_violation: None,
                    wall_ms: 0.0,
                }
            })
            .collect();
        // Independent streaming mean.
        let mut mean = 0.0;
        for (k, r) in rows.iter().enumerate() {
            mean += (r.bound - mean) / (k + 1) as f64;
        }
        let s = summarize("t", rows).unwrap();
        assert!((s.mean_bound - mean).abs() <= 1e-12);
    }

    #[test]
    fn config_parsing_defaults_and_errors() {
        let cfg = ExperimentConfig::parse(
            "mode=spectral\ndims=3x4x5\nseed=9\nhset=pm_basis\n# comment\n",
        )
        .unwrap();
        assert_eq!(cfg.dims, (3, 4, 5));
        assert_eq!(cfg.r, 3);
        assert_eq!(cfg.instances, 20);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.hset, HsetSpec::PmBasis);
        assert!(ExperimentConfig::parse("mode=spectral").is_err());
        assert!(ExperimentConfig::parse("dims=2x2x2").is_err());
        assert!(ExperimentConfig::parse("mode=spectral\ndims=2x2x2\nwhat=1").is_err());
    }

    #[test]
    fn spectral_experiment_bounds_in_range() {
        let cfg = ExperimentConfig::parse(
            "mode=spectral\ndims=3x4x4\nr=2\ninstances=6\nseed=4\nhset=pm_basis",
        )
        .unwrap();
        let s = run_spectral_experiment(&cfg).unwrap();
        for row in &s.rows {
            assert!(row.bound > 0.0 && row.bound <= 1.0 + 1e-9, "{}", row.bound);
            let rb = row.refined_bound.unwrap();
            assert!(rb >= row.bound - 1e-12 && rb <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn nuclear_experiment_bounds_in_range() {
        let cfg = ExperimentConfig::parse(
            "mode=nuclear\ndims=3x3x3\nr=2\ninstances=4\nseed=4\nhset=pm_basis",
        )
        .unwrap();
        let s = run_nuclear_experiment(&cfg).unwrap();
        for row in &s.rows {
            assert!(row.bound >= 1.0 - 1e-4, "{}", row.bound);
            assert!(row.max_violation.unwrap() <= 1e-5);
        }
    }

    #[test]
    fn csv_bytes_reproducible() {
        let cfg = ExperimentConfig::parse(
            "name=repro\nmode=spectral\ndims=3x3x3\nr=2\ninstances=4\nseed=11\nhset=random:12",
        )
        .unwrap();
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let s1 = run_spectral_experiment(&cfg).unwrap();
        let s2 = run_spectral_experiment(&cfg).unwrap();
        let (r1, a1) = write_csv(dir1.path(), &s1).unwrap();
        let (r2, a2) = write_csv(dir2.path(), &s2).unwrap();
        assert_eq!(std::fs::read(r1).unwrap(), std::fs::read(r2).unwrap());
        assert_eq!(std::fs::read(a1).unwrap(), std::fs::read(a2).unwrap());
    }

    #[test]
    fn instance_rows_use_derived_seeds() {
        let cfg = ExperimentConfig::parse(
            "mode=spectral\ndims=2x3x3\nr=2\ninstances=3\nseed=5\nhset=pm_basis",
        )
        .unwrap();
        let s = run_spectral_experiment(&cfg).unwrap();
        let seeds: Vec<u64> = s.rows.iter().map(|r| r.seed).collect();
        assert_eq!(seeds.len(), 3);
        assert!(seeds[0] != seeds[1] && seeds[1] != seeds[2]);
        // Rows record the values the solver actually achieved.
        for row in &s.rows {
            let inst = OdecoInstance::generate(cfg.dims, cfg.r, row.seed).unwrap();
            assert_eq!(inst.true_spectral, row.true_value);
            let _ = multilinear_form(&inst.tensor, &[vec![1.0, 0.0], vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]);
        }
    }
}
