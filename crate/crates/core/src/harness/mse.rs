//! MSE of the bootstrap estimators of P(T_h ≤ y) over (b, ℓ) cells and
//! tuning-constant grids.
//!
//! Within a replication and cell, one set of block indices is drawn, with
//! the same sub-streams `bootstrap_cdf` would use, and shared by every
//! method and grid point. Each grid point's count therefore equals what
//! `bootstrap_cdf` returns for that parameter tuple and stream.

use std::io::Write;
use std::time::Instant;

use rand::distr::{Distribution, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::oracle::{replication_seed, true_cdf_oracle};
use crate::error::{Error, Result};
use crate::format::g17;
use crate::kernel::{kde, DensityEvalPoint};
use crate::process::StationaryProcess;
use crate::resample::{
    block_stats, centred_term, conditional_mean, make_ebc_params, make_nbc_params, make_uns_params, BootstrapParams,
    Method, DRAW_CHUNK,
};
use crate::rng::{domain, RngStream};

/// Streams derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSeeds {
    pub master: u64,
    pub simulation: u64,
    pub bootstrap: u64,
    pub oracle: u64,
}

impl ExperimentSeeds {
    pub fn derive(master: u64) -> Self {
        let base = RngStream::new(master);
        ExperimentSeeds {
            master,
            simulation: base.fork(domain::SIMULATION).seed(),
            bootstrap: base.fork(domain::BOOTSTRAP).seed(),
            oracle: base.fork(domain::ORACLE).seed(),
        }
    }

    /// Seed of the series simulated in replication `r`.
    pub fn series_seed(&self, r: usize) -> u64 {
        replication_seed(&RngStream::new(self.simulation), r)
    }

    /// Bootstrap stream for replication `r` and cell `cell`.
    pub fn bootstrap_stream(&self, r: usize, cell: usize) -> RngStream {
        RngStream::new(self.bootstrap).fork(r as u64).fork(cell as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseStats {
    pub mse: f64,
    pub bias: f64,
    pub variance: f64,
    pub mc_std_err: f64,
}

/// Integer moment sums of the per-replication counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Moments {
    s1: u64,
    s2: u128,
    s3: u128,
    s4: u128,
}

impl Moments {
    fn add(&mut self, c: u32) {
        let c = c as u128;
        self.s1 += c as u64;
        self.s2 += c * c;
        self.s3 += c * c * c;
        self.s4 += c * c * c * c;
    }

    fn merge(&mut self, o: &Moments) {
        self.s1 += o.s1;
        self.s2 += o.s2;
        self.s3 += o.s3;
        self.s4 += o.s4;
    }

    fn stats(&self, reps: usize, draws: usize, p0: f64) -> MseStats {
        let r = reps as f64;
        let b = draws as f64;
        let m1 = self.s1 as f64 / (r * b);
        let m2 = self.s2 as f64 / (r * b * b);
        let m3 = self.s3 as f64 / (r * b * b * b);
        let m4 = self.s4 as f64 / (r * b * b * b * b);
        let s1 = self.s1 as u128;
        let var_num = reps as u128 * self.s2 - s1 * s1;
        let variance = var_num as f64 / (r * r * b * b);
        let bias = m1 - p0;
        let mse = bias * bias + variance;
        let fourth = m4 - 4.0 * p0 * m3 + 6.0 * p0 * p0 * m2 - 4.0 * p0.powi(3) * m1 + p0.powi(4);
        let mc_std_err = ((fourth - mse * mse).max(0.0) / (r - 1.0).max(1.0)).sqrt();
        MseStats {
            mse,
            bias,
            variance,
            mc_std_err,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Slot {
    method: Method,
    k1: Option<f64>,
    c2: Option<f64>,
}

#[derive(Debug, Clone)]
struct CellPlan {
    index: usize,
    b: usize,
    ell: usize,
    offset: usize,
    uns: bool,
    ebc: bool,
    nbc: Option<BootstrapParams>,
    ebc_params: Vec<BootstrapParams>,
}

/// Status of one (b, ℓ) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Infeasible(String),
}

/// Best grid point for one method and cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub method: Method,
    pub b: usize,
    pub ell: usize,
    pub best_k1: Option<f64>,
    pub best_c2: Option<f64>,
    pub stats: Option<MseStats>,
    pub status: CellStatus,
}

/// One tuning-grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub method: Method,
    pub b: usize,
    pub ell: usize,
    pub k1: Option<f64>,
    pub c2: Option<f64>,
    pub stats: MseStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseReport {
    pub cells: Vec<CellRecord>,
    pub grid: Vec<GridPoint>,
    pub oracle_p: f64,
    pub oracle_std_err: f64,
    pub seeds: ExperimentSeeds,
    pub config: ExperimentConfig,
    pub wall_time_secs: f64,
}

impl MseReport {
    pub fn cell(&self, method: Method, b: usize, ell: usize) -> Option<&CellRecord> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.b == b && c.ell == ell)
    }

    pub fn grid_for(&self, method: Method, b: usize, ell: usize) -> Vec<&GridPoint> {
        self.grid
            .iter()
            .filter(|g| g.method == method && g.b == b && g.ell == ell)
            .collect()
    }

    /// "method,b,ell,best_k1,best_c2,mse,bias,variance,mc_std_err"; numeric
    /// fields are empty for infeasible cells and for constants a method
    /// does not use.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "method",
            "b",
            "ell",
            "best_k1",
            "best_c2",
            "mse",
            "bias",
            "variance",
            "mc_std_err",
        ])?;
        for c in &self.cells {
            let opt = |v: Option<f64>| v.map(g17).unwrap_or_default();
            let s = c.stats;
            w.write_record([
                c.method.label().to_string(),
                c.b.to_string(),
                c.ell.to_string(),
                opt(c.best_k1),
                opt(c.best_c2),
                opt(s.map(|s| s.mse)),
                opt(s.map(|s| s.bias)),
                opt(s.map(|s| s.variance)),
                opt(s.map(|s| s.mc_std_err)),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Every grid point: "method,b,ell,k1,c2,mse,bias,variance,mc_std_err".
    pub fn write_grid_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "method",
            "b",
            "ell",
            "k1",
            "c2",
            "mse",
            "bias",
            "variance",
            "mc_std_err",
        ])?;
        for g in &self.grid {
            let opt = |v: Option<f64>| v.map(g17).unwrap_or_default();
            w.write_record([
                g.method.label().to_string(),
                g.b.to_string(),
                g.ell.to_string(),
                opt(g.k1),
                opt(g.c2),
                g17(g.stats.mse),
                g17(g.stats.bias),
                g17(g.stats.variance),
                g17(g.stats.mc_std_err),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Sidecar with the configuration echo, oracle value, seeds and timing.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "oracle_p": self.oracle_p,
            "oracle_std_err": self.oracle_std_err,
            "seeds": self.seeds,
            "wall_time_secs": self.wall_time_secs,
            "cells": self.cells,
        })
    }
}

/// Block indices for `draws` draws of b blocks, in `bootstrap_cdf` order.
pub fn draw_block_indices(blocks: usize, b: usize, draws: usize, stream: &RngStream) -> Result<Vec<u32>> {
    let dist = u32::try_from(blocks)
        .ok()
        .and_then(|len| Uniform::new(0, len).ok())
        .ok_or_else(|| Error::InvalidParameter("too many blocks".into()))?;
    let mut out = Vec::with_capacity(draws * b);
    for c in 0..draws.div_ceil(DRAW_CHUNK) {
        let mut rng = stream.fork(c as u64).rng();
        let len = DRAW_CHUNK.min(draws - c * DRAW_CHUNK);
        for _ in 0..len * b {
            out.push(dist.sample(&mut rng));
        }
    }
    Ok(out)
}

/// Centred terms (bℓk)^{1/2}(f̂* − E[f̂*|X]) of every draw at bandwidth k.
fn centred_terms(sums: &[f64], idx: &[u32], b: usize, ell: usize, k: f64, mean: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(idx.chunks_exact(b).map(|tuple| {
        let mut sum = 0.0;
        for &j in tuple {
            sum += sums[j as usize];
        }
        centred_term(sum, b, ell, k, mean)
    }));
}

fn nonrandom_shift(sample: &[f64], p: &BootstrapParams, x0: f64, cfg: &ExperimentConfig) -> Result<f64> {
    let stats2 = block_stats(sample, p.ell, p.k2, x0, &cfg.kernel)?;
    let f_k3 = kde(sample, DensityEvalPoint::new(x0, p.k3)?, &cfg.kernel)?;
    Ok(p.tau * (conditional_mean(&stats2) - f_k3))
}

fn plan_cells(cfg: &ExperimentConfig) -> (Vec<CellPlan>, Vec<Slot>, Vec<Option<String>>) {
    let mut plans = Vec::new();
    let mut slots = Vec::new();
    let mut infeasible = Vec::new();
    let has = |m| cfg.methods.contains(&m);
    for (index, &(b, ell)) in cfg.grid_bl.iter().enumerate() {
        let probe = make_uns_params(b, ell, 1.0).and_then(|p| p.validate(cfg.n));
        if let Err(e) = probe {
            infeasible.push(Some(e.to_string()));
            continue;
        }
        infeasible.push(None);
        let offset = slots.len();
        let mut plan = CellPlan {
            index,
            b,
            ell,
            offset,
            uns: has(Method::Uns),
            ebc: has(Method::Ebc),
            nbc: None,
            ebc_params: Vec::new(),
        };
        if plan.uns {
            slots.extend(cfg.k1_grid.iter().map(|&k| Slot {
                method: Method::Uns,
                k1: Some(k),
                c2: None,
            }));
        }
        if plan.ebc {
            plan.ebc_params = cfg
                .c2_grid
                .iter()
                .map(|&c2| make_ebc_params(cfg.n, cfg.h, b, ell, 1.0, cfg.c0, c2).expect("validated config"))
                .collect();
            for &k in &cfg.k1_grid {
                slots.extend(cfg.c2_grid.iter().map(|&c2| Slot {
                    method: Method::Ebc,
                    k1: Some(k),
                    c2: Some(c2),
                }));
            }
        }
        if has(Method::Nbc) {
            plan.nbc = Some(make_nbc_params(cfg.n, cfg.h, b, ell, cfg.c0).expect("validated config"));
            slots.push(Slot {
                method: Method::Nbc,
                k1: None,
                c2: None,
            });
        }
        plans.push(plan);
    }
    (plans, slots, infeasible)
}

struct Scratch {
    sample: Vec<f64>,
    centred: Vec<f64>,
    counts: Vec<u32>,
    shifts: Vec<f64>,
}

fn replicate(
    r: usize,
    cfg: &ExperimentConfig,
    seeds: &ExperimentSeeds,
    plans: &[CellPlan],
    s: &mut Scratch,
) -> Result<()> {
    cfg.model.fill(seeds.series_seed(r), &mut s.sample);
    let sample = &s.sample[..];
    let (x0, y) = (cfg.x0, cfg.y);
    s.counts.iter_mut().for_each(|c| *c = 0);
    for plan in plans {
        let (b, ell) = (plan.b, plan.ell);
        let stream = seeds.bootstrap_stream(r, plan.index);
        let idx = draw_block_indices(cfg.n + 1 - ell, b, cfg.draws, &stream)?;
        let mut slot = plan.offset;
        if plan.uns || plan.ebc {
            s.shifts.clear();
            for p in &plan.ebc_params {
                s.shifts.push(nonrandom_shift(sample, p, x0, cfg)?);
            }
            let k1_count = cfg.k1_grid.len();
            let ebc_base = slot + if plan.uns { k1_count } else { 0 };
            for (ki, &k1) in cfg.k1_grid.iter().enumerate() {
                let stats = block_stats(sample, ell, k1, x0, &cfg.kernel)?;
                let mean = conditional_mean(&stats);
                centred_terms(stats.window_sums(), &idx, b, ell, k1, mean, &mut s.centred);
                if plan.uns {
                    s.counts[slot + ki] = s.centred.iter().filter(|&&a| a + 0.0 <= y).count() as u32;
                }
                if plan.ebc {
                    s.centred.sort_unstable_by(f64::total_cmp);
                    let base = ebc_base + ki * s.shifts.len();
                    for (ci, &shift) in s.shifts.iter().enumerate() {
                        s.counts[base + ci] = s.centred.partition_point(|&a| a + shift <= y) as u32;
                    }
                }
            }
            slot = ebc_base + if plan.ebc { k1_count * s.shifts.len() } else { 0 };
        }
        if let Some(p) = &plan.nbc {
            let stats = block_stats(sample, ell, p.k1, x0, &cfg.kernel)?;
            let mean = conditional_mean(&stats);
            let f_k3 = kde(sample, DensityEvalPoint::new(x0, p.k3)?, &cfg.kernel)?;
            let shift = p.tau * (mean - f_k3);
            centred_terms(stats.window_sums(), &idx, b, ell, p.k1, mean, &mut s.centred);
            s.counts[slot] = s.centred.iter().filter(|&&a| a + shift <= y).count() as u32;
        }
    }
    Ok(())
}

/// Runs the experiment; deterministic in the master seed at any worker count.
pub fn mse_experiment(cfg: &ExperimentConfig) -> Result<MseReport> {
    cfg.validate()?;
    let start = Instant::now();
    let seeds = ExperimentSeeds::derive(cfg.seed()?);
    if u32::try_from(cfg.draws).is_err() {
        return Err(Error::Config(format!("B = {} is too large", cfg.draws)));
    }
    let (oracle_p, oracle_std_err) = match cfg.oracle_p {
        Some(p) => (p, 0.0),
        None => {
            let o = true_cdf_oracle(
                &cfg.model,
                cfg.n,
                cfg.x0,
                cfg.y,
                cfg.h,
                &cfg.kernel,
                cfg.oracle_r,
                seeds.oracle,
            )?;
            (o.p, o.std_err)
        }
    };
    let (plans, slots, infeasible) = plan_cells(cfg);
    let total = slots.len();
    let moments = (0..cfg.replications)
        .into_par_iter()
        .try_fold(
            || {
                (
                    Scratch {
                        sample: vec![0.0; cfg.n],
                        centred: Vec::with_capacity(cfg.draws),
                        counts: vec![0; total],
                        shifts: Vec::new(),
                    },
                    vec![Moments::default(); total],
                )
            },
            |(mut scratch, mut acc), r| -> Result<_> {
                replicate(r, cfg, &seeds, &plans, &mut scratch)?;
                for (m, &c) in acc.iter_mut().zip(&scratch.counts) {
                    m.add(c);
                }
                Ok((scratch, acc))
            },
        )
        .map(|res| res.map(|(_, acc)| acc))
        .try_reduce(
            || vec![Moments::default(); total],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    x.merge(y);
                }
                Ok(a)
            },
        )?;

    let mut grid = Vec::with_capacity(total);
    let mut cells = Vec::new();
    let mut plan_iter = plans.iter().peekable();
    for (index, &(b, ell)) in cfg.grid_bl.iter().enumerate() {
        if let Some(reason) = &infeasible[index] {
            for &method in &cfg.methods {
                cells.push(CellRecord {
                    method,
                    b,
                    ell,
                    best_k1: None,
                    best_c2: None,
                    stats: None,
                    status: CellStatus::Infeasible(reason.clone()),
                });
            }
            continue;
        }
        let plan = plan_iter.next().expect("one plan per feasible cell");
        let end = plan_iter.peek().map_or(total, |p| p.offset);
        let cell_points: Vec<GridPoint> = (plan.offset..end)
            .map(|i| GridPoint {
                method: slots[i].method,
                b,
                ell,
                k1: slots[i].k1,
                c2: slots[i].c2,
                stats: moments[i].stats(cfg.replications, cfg.draws, oracle_p),
            })
            .collect();
        for &method in &cfg.methods {
            let best = cell_points
                .iter()
                .filter(|g| g.method == method)
                .fold(None::<&GridPoint>, |best, g| match best {
                    Some(bg) if bg.stats.mse <= g.stats.mse => Some(bg),
                    _ => Some(g),
                })
                .expect("every method has a grid point");
            let nbc_k = plan.nbc.filter(|_| method == Method::Nbc).map(|p| p.k1);
            cells.push(CellRecord {
                method,
                b,
                ell,
                best_k1: best.k1.or(nbc_k),
                best_c2: best.c2,
                stats: Some(best.stats),
                status: CellStatus::Ok,
            });
        }
        grid.extend(cell_points);
    }
    Ok(MseReport {
        cells,
        grid,
        oracle_p,
        oracle_std_err,
        seeds,
        config: cfg.clone(),
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Constant scanned by [`sensitivity_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanParam {
    K1,
    C2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub value: f64,
    pub mse: f64,
    pub mc_std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub method: Method,
    pub b: usize,
    pub ell: usize,
    pub param: ScanParam,
    /// MSE along the scanned constant, the other constant at its optimum.
    pub points: Vec<CurvePoint>,
    /// The full grid for the cell.
    pub surface: Vec<GridPoint>,
    pub oracle_p: f64,
}

impl SensitivityCurve {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let name = match self.param {
            ScanParam::K1 => "k1",
            ScanParam::C2 => "c2",
        };
        w.write_record([name, "mse", "mc_std_err"])?;
        for p in &self.points {
            w.write_record([g17(p.value), g17(p.mse), g17(p.mc_std_err)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// MSE of one method in one cell as a function of one tuning constant.
pub fn sensitivity_scan(
    cfg: &ExperimentConfig,
    cell: (usize, usize),
    method: Method,
    param: ScanParam,
) -> Result<SensitivityCurve> {
    match (method, param) {
        (Method::Uns, ScanParam::K1) | (Method::Ebc, _) => {}
        _ => {
            return Err(Error::Config(format!("{method} has no {param:?} constant to scan")));
        }
    }
    let mut single = cfg.clone();
    single.grid_bl = vec![cell];
    single.methods = vec![method];
    let report = mse_experiment(&single)?;
    if let Some(CellRecord {
        status: CellStatus::Infeasible(reason),
        ..
    }) = report.cells.first()
    {
        return Err(Error::RegimeInfeasible(reason.clone()));
    }
    let best = report.cells[0].clone();
    let points = report
        .grid
        .iter()
        .filter(|g| match param {
            ScanParam::K1 => g.c2 == best.best_c2,
            ScanParam::C2 => g.k1 == best.best_k1,
        })
        .map(|g| CurvePoint {
            value: match param {
                ScanParam::K1 => g.k1.expect("scanned constant present"),
                ScanParam::C2 => g.c2.expect("scanned constant present"),
            },
            mse: g.stats.mse,
            mc_std_err: g.stats.mc_std_err,
        })
        .collect();
    Ok(SensitivityCurve {
        method,
        b: cell.0,
        ell: cell.1,
        param,
        points,
        surface: report.grid,
        oracle_p: report.oracle_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::StationaryProcess;
    use crate::resample::bootstrap_cdf;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig::from_json_str(
            r#"{"n": 60, "h": 0.9, "B": 300, "R": 12, "oracle_R": 400, "grid_bl": [[3, 2], [1, 5], [2, 80]],
                "k1_grid": [0.3, 0.8, 1.5], "c2_grid": [0.5, 1.0], "master_seed": 11}"#,
        )
        .unwrap()
    }

    #[test]
    fn counts_match_direct_bootstrap() {
        let cfg = small_cfg();
        let seeds = ExperimentSeeds::derive(11);
        let (plans, slots, _) = plan_cells(&cfg);
        let mut s = Scratch {
            sample: vec![0.0; cfg.n],
            centred: Vec::new(),
            counts: vec![0; slots.len()],
            shifts: Vec::new(),
        };
        let r = 3;
        replicate(r, &cfg, &seeds, &plans, &mut s).unwrap();
        let sample = cfg.model.simulate(cfg.n, seeds.series_seed(r)).unwrap();
        for plan in &plans {
            let stream = seeds.bootstrap_stream(r, plan.index);
            let end = plans
                .iter()
                .find(|p| p.offset > plan.offset)
                .map_or(slots.len(), |p| p.offset);
            for (i, &slot) in slots.iter().enumerate().take(end).skip(plan.offset) {
                let params = match slot.method {
                    Method::Uns => make_uns_params(plan.b, plan.ell, slot.k1.unwrap()).unwrap(),
                    Method::Ebc => make_ebc_params(
                        cfg.n,
                        cfg.h,
                        plan.b,
                        plan.ell,
                        slot.k1.unwrap(),
                        cfg.c0,
                        slot.c2.unwrap(),
                    )
                    .unwrap(),
                    _ => make_nbc_params(cfg.n, cfg.h, plan.b, plan.ell, cfg.c0).unwrap(),
                };
                let direct = bootstrap_cdf(&sample, &params, cfg.x0, cfg.y, cfg.draws, &cfg.kernel, &stream).unwrap();
                assert_eq!(
                    direct.p_hat,
                    s.counts[i] as f64 / cfg.draws as f64,
                    "{:?} cell ({}, {})",
                    slot,
                    plan.b,
                    plan.ell
                );
            }
        }
    }

    #[test]
    fn decomposition_and_infeasible_cells() {
        let report = mse_experiment(&small_cfg()).unwrap();
        for g in &report.grid {
            let s = g.stats;
            assert!(s.mse >= 0.0 && s.variance >= 0.0);
            assert!((s.mse - (s.bias * s.bias + s.variance)).abs() < 1e-12);
        }
        let bad = report.cell(Method::Uns, 2, 80).unwrap();
        assert!(matches!(bad.status, CellStatus::Infeasible(_)));
        assert!(bad.stats.is_none());
        let nbc = report.cell(Method::Nbc, 3, 2).unwrap();
        assert!(nbc.best_k1.is_some() && nbc.best_c2.is_none());
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("method,b,ell,best_k1,best_c2,mse,bias,variance,mc_std_err\n"));
        assert_eq!(text.lines().count(), 1 + 9);
    }

    #[test]
    fn deterministic_under_thread_counts() {
        let cfg = small_cfg();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mse_experiment(&cfg).unwrap())
        };
        let (a, b) = (run(1), run(3));
        assert_eq!(a.cells, b.cells);
        assert_eq!(a.grid, b.grid);
        assert_eq!(a.oracle_p, b.oracle_p);
    }

    #[test]
    fn degenerate_estimator_has_zero_mse() {
        let cfg = ExperimentConfig::from_json_str(
            r#"{"n": 30, "y": 1e6, "B": 50, "R": 5, "grid_bl": [[1, 30]], "methods": ["uns"],
                "k1_grid": [0.7], "oracle_p": 1.0, "master_seed": 1}"#,
        )
        .unwrap();
        let report = mse_experiment(&cfg).unwrap();
        let s = report.cells[0].stats.unwrap();
        assert_eq!(s.mse, 0.0);
        assert_eq!(s.mc_std_err, 0.0);
    }

    #[test]
    fn moments_formulae() {
        let mut m = Moments::default();
        for c in [3u32, 5, 4] {
            m.add(c);
        }
        let s = m.stats(3, 10, 0.5);
        let ps = [0.3, 0.5, 0.4];
        let mse: f64 = ps.iter().map(|p| (p - 0.5) * (p - 0.5)).sum::<f64>() / 3.0;
        assert!((s.mse - mse).abs() < 1e-15);
        assert!((s.bias + 0.1).abs() < 1e-15);
    }

    #[test]
    fn scan_shapes() {
        let cfg = small_cfg();
        let uns = sensitivity_scan(&cfg, (3, 2), Method::Uns, ScanParam::K1).unwrap();
        assert_eq!(uns.points.len(), 3);
        let ebc = sensitivity_scan(&cfg, (3, 2), Method::Ebc, ScanParam::C2).unwrap();
        assert_eq!(ebc.points.len(), 2);
        assert_eq!(ebc.surface.len(), 6);
        assert!(sensitivity_scan(&cfg, (3, 2), Method::Nbc, ScanParam::K1).is_err());
        let mut single = cfg.clone();
        single.k1_grid = vec![0.8];
        let flat = sensitivity_scan(&single, (3, 2), Method::Uns, ScanParam::K1).unwrap();
        assert_eq!(flat.points.len(), 1);
    }
}
