//! Replicated moment estimation, weighted norms and growth-rate fits.
//!
//! Replicates are split into contiguous blocks. Each block accumulates
//! `Σ|u|^p` in replicate order, and blocks are reduced in block order, so
//! the result does not depend on how blocks are scheduled. Standard errors
//! come from the delete-one-block jackknife.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{invalid, Error, Result};
use crate::fields::Scenario;
use crate::levy_measure::LevyMeasure;
use crate::prm::{NoiseGrid, ResolvedTruncation, TruncationPolicy};
use crate::rng::StreamKey;
use crate::solver::{GridGeometry, GridSolution, LatticeSolver, Scheme};

/// Upper limit on the number of jackknife blocks.
pub const JACKKNIFE_BLOCKS: usize = 20;

/// Moment field `E|u(t,x)|^p` on the observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    p: f64,
    times: Vec<f64>,
    xs: Vec<f64>,
    mean: Vec<f64>,
    stderr: Vec<f64>,
    replicates: usize,
    sup_over_x: Vec<f64>,
    inf_over_x: Vec<f64>,
}

impl MomentEstimate {
    /// Builds an estimate from row-major `mean` and `stderr` arrays
    /// (`times.len()` rows of `xs.len()` columns).
    pub fn new(
        p: f64,
        times: Vec<f64>,
        xs: Vec<f64>,
        mean: Vec<f64>,
        stderr: Vec<f64>,
        replicates: usize,
    ) -> Result<Self> {
        let cells = times.len() * xs.len();
        if mean.len() != cells || stderr.len() != cells {
            return Err(invalid!(
                InvalidParameter,
                "moment arrays have {} and {} entries, expected {cells}",
                mean.len(),
                stderr.len()
            ));
        }
        let cols = xs.len();
        let (sup_over_x, inf_over_x) = if cols == 0 {
            (vec![f64::NAN; times.len()], vec![f64::NAN; times.len()])
        } else {
            mean.chunks(cols)
                .map(|row| {
                    let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
                    (hi, lo)
                })
                .unzip()
        };
        Ok(Self { p, times, xs, mean, stderr, replicates, sup_over_x, inf_over_x })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Row-major `E|u|^p` estimates.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }

    pub fn mean_at(&self, j: usize, i: usize) -> f64 {
        self.mean[j * self.xs.len() + i]
    }

    pub fn stderr_at(&self, j: usize, i: usize) -> f64 {
        self.stderr[j * self.xs.len() + i]
    }

    /// `sup_x E|u(t_j,x)|^p` over the observation window, per time.
    pub fn sup_over_x(&self) -> &[f64] {
        &self.sup_over_x
    }

    /// `inf_x E|u(t_j,x)|^p` over the observation window, per time.
    pub fn inf_over_x(&self) -> &[f64] {
        &self.inf_over_x
    }

    /// Column nearest to `x`.
    pub fn column_of(&self, x: f64) -> Option<usize> {
        self.xs.iter().enumerate().min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs())).map(|(i, _)| i)
    }

    /// `(t, x, mean, stderr)` rows, time-major.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        let cols = self.xs.len();
        (0..self.mean.len()).map(move |c| (self.times[c / cols], self.xs[c % cols], self.mean[c], self.stderr[c]))
    }

    /// The time series selected by `mode`.
    pub fn series(&self, mode: FitMode) -> Result<Vec<f64>> {
        match mode {
            FitMode::Sup => Ok(self.sup_over_x.clone()),
            FitMode::Inf => Ok(self.inf_over_x.clone()),
            FitMode::AtX(x) => {
                let i = self.column_of(x).ok_or_else(|| invalid!(Fit, "estimate has no spatial columns"))?;
                Ok((0..self.times.len()).map(|j| self.mean_at(j, i)).collect())
            }
        }
    }
}

/// `Σ|u|^p` over one block of replicates, for every p and grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSums {
    replicates: usize,
    sums: Vec<f64>,
}

impl BlockSums {
    pub fn replicates(&self) -> usize {
        self.replicates
    }

    fn part(&self, k: usize, cells: usize) -> &[f64] {
        &self.sums[k * cells..(k + 1) * cells]
    }
}

#[inline]
fn abs_pow(u: f64, p: f64) -> f64 {
    if p == 2.0 {
        u * u
    } else if p.fract() == 0.0 && p <= 64.0 {
        u.abs().powi(p as i32)
    } else {
        u.abs().powf(p)
    }
}

/// A validated moment experiment. Blocks can be run in any order or in
/// parallel; [`MomentPlan::finish`] reduces them deterministically.
#[derive(Debug, Clone)]
pub struct MomentPlan {
    solver: LatticeSolver,
    truncation: ResolvedTruncation,
    grid: NoiseGrid,
    p_list: Vec<f64>,
    replicates: usize,
    seed: u64,
    scheme: Scheme,
}

impl MomentPlan {
    pub fn new(
        scenario: &Scenario,
        geometry: &GridGeometry,
        measure: &LevyMeasure,
        policy: &TruncationPolicy,
        p_list: &[f64],
        replicates: usize,
        seed: u64,
    ) -> Result<Self> {
        if replicates < 2 {
            return Err(invalid!(InvalidParameter, "need at least 2 replicates, got {replicates}"));
        }
        for &p in p_list {
            if !(p >= 2.0) {
                return Err(invalid!(InvalidParameter, "moment order p = {p} must be >= 2"));
            }
            let mp = measure.max_moment(p)?;
            if !mp.is_finite() {
                return Err(Error::InfiniteMoment { p });
            }
        }
        Ok(Self {
            solver: LatticeSolver::new(scenario, geometry),
            truncation: policy.resolve(measure)?,
            grid: geometry.noise_grid(),
            p_list: p_list.to_vec(),
            replicates,
            seed,
            scheme: Scheme::Diamond,
        })
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn truncation(&self) -> &ResolvedTruncation {
        &self.truncation
    }

    pub fn geometry(&self) -> &GridGeometry {
        self.solver.geometry()
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn block_count(&self) -> usize {
        JACKKNIFE_BLOCKS.min(self.replicates)
    }

    /// Replicate indices of block `b`.
    pub fn block_range(&self, b: usize) -> Range<usize> {
        let (r, n) = (self.replicates, self.block_count());
        b * r / n..(b + 1) * r / n
    }

    /// One replicate's solution.
    pub fn solve_replicate(&self, r: usize) -> Result<GridSolution> {
        let noise = self.truncation.noise_field(self.grid, StreamKey::new(self.seed, r as u64));
        self.solver.simulate(&noise, self.scheme)
    }

    pub fn run_block(&self, b: usize) -> Result<BlockSums> {
        let cells = self.cells();
        let mut sums = vec![0.0; self.p_list.len() * cells];
        let range = self.block_range(b);
        let replicates = range.len();
        for r in range {
            let sol = self.solve_replicate(r)?;
            for (k, &p) in self.p_list.iter().enumerate() {
                let acc = &mut sums[k * cells..(k + 1) * cells];
                for (s, &u) in acc.iter_mut().zip(sol.values()) {
                    *s += abs_pow(u, p);
                }
            }
        }
        Ok(BlockSums { replicates, sums })
    }

    fn cells(&self) -> usize {
        let g = self.solver.geometry();
        (g.time_steps() + 1) * g.window_len()
    }

    /// Reduces block sums, in block order, into one estimate per p.
    pub fn finish(&self, blocks: &[BlockSums]) -> Result<Vec<MomentEstimate>> {
        let n = self.block_count();
        if blocks.len() != n {
            return Err(invalid!(InvalidParameter, "expected {n} blocks, got {}", blocks.len()));
        }
        let g = self.solver.geometry();
        let times: Vec<f64> = (0..=g.time_steps()).map(|j| g.time(j)).collect();
        let xs: Vec<f64> = (0..g.window_len()).map(|i| g.window_x(i)).collect();
        let cells = self.cells();
        let total = self.replicates as f64;
        let nb = n as f64;
        let mut out = Vec::with_capacity(self.p_list.len());
        for (k, &p) in self.p_list.iter().enumerate() {
            let mut mean = vec![0.0; cells];
            for b in blocks {
                for (m, s) in mean.iter_mut().zip(b.part(k, cells)) {
                    *m += s;
                }
            }
            let mut stderr = vec![0.0; cells];
            let mut loo = vec![0.0; n];
            for c in 0..cells {
                let sum = mean[c];
                for (b, block) in blocks.iter().enumerate() {
                    loo[b] = (sum - block.part(k, cells)[c]) / (total - block.replicates as f64);
                }
                let centre = loo.iter().sum::<f64>() / nb;
                let ss: f64 = loo.iter().map(|v| (v - centre) * (v - centre)).sum();
                stderr[c] = ((nb - 1.0) / nb * ss).sqrt();
                mean[c] = sum / total;
            }
            out.push(MomentEstimate::new(p, times.clone(), xs.clone(), mean, stderr, self.replicates)?);
        }
        Ok(out)
    }

    /// Runs every block in order on the calling thread.
    pub fn run(&self) -> Result<Vec<MomentEstimate>> {
        let blocks = (0..self.block_count()).map(|b| self.run_block(b)).collect::<Result<Vec<_>>>()?;
        self.finish(&blocks)
    }
}

/// `E|u(t,x)|^p` for every p in `p_list`, from `replicates` independent
/// solutions with diamond recursion.
pub fn estimate_moments(
    scenario: &Scenario,
    geometry: &GridGeometry,
    measure: &LevyMeasure,
    policy: &TruncationPolicy,
    p_list: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    MomentPlan::new(scenario, geometry, measure, policy, p_list, replicates, seed)?.run()
}

/// `sup_{t,x} e^{−βt} (E|u(t,x)|^p)^{1/p}` over the grid.
pub fn weighted_norm(estimate: &MomentEstimate, beta: f64) -> f64 {
    let cols = estimate.xs.len();
    if cols == 0 {
        return 0.0;
    }
    estimate
        .mean
        .chunks(cols)
        .zip(&estimate.times)
        .map(|(row, t)| {
            let hi = row.iter().copied().fold(0.0, f64::max);
            (-beta * t).exp() * hi.powf(1.0 / estimate.p)
        })
        .fold(0.0, f64::max)
}

/// Which spatial reduction of the moment field to fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitMode {
    Sup,
    Inf,
    AtX(f64),
}

/// Least-squares fit `log m(t) ≈ intercept + slope·t` on a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovFit {
    pub p: f64,
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval for the slope.
    pub ci_half_width: f64,
    pub points: usize,
}

/// Growth-rate fit of `estimate` on `window`, by default the last half of
/// the horizon.
pub fn lyapunov_fit(estimate: &MomentEstimate, window: Option<(f64, f64)>, mode: FitMode) -> Result<LyapunovFit> {
    let horizon = estimate.times.last().copied().unwrap_or(0.0);
    let window = window.unwrap_or((0.5 * horizon, horizon));
    let values = estimate.series(mode)?;
    fit_growth_rate(estimate.p, &estimate.times, &values, window)
}

/// Fits the log-linear growth of `values` against `times` on `window`.
pub fn fit_growth_rate(p: f64, times: &[f64], values: &[f64], window: (f64, f64)) -> Result<LyapunovFit> {
    let (lo, hi) = window;
    if !(lo <= hi) || times.len() != values.len() {
        return Err(invalid!(Fit, "bad window [{lo}, {hi}] or mismatched series"));
    }
    let tol = 1e-9 * hi.abs().max(1.0);
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (&t, &m) in times.iter().zip(values) {
        if t < lo - tol || t > hi + tol {
            continue;
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(invalid!(Fit, "moment {m} at t = {t} is not positive"));
        }
        ts.push(t);
        ys.push(m.ln());
    }
    let n = ts.len();
    if n < 5 {
        return Err(invalid!(Fit, "window [{lo}, {hi}] holds {n} grid times, need at least 5"));
    }
    let nf = n as f64;
    let tm = ts.iter().sum::<f64>() / nf;
    let ym = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
    let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let sse: f64 = ts.iter().zip(&ys).map(|(t, y)| (y - intercept - slope * t).powi(2)).sum();
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    Ok(LyapunovFit { p, window, slope, intercept, ci_half_width: student_t_975(n - 2) * se, points: n })
}

const T975: [f64; 30] = [
    12.706204736174698,
    4.302652729749464,
    3.182446305284263,
    2.7764451051977934,
    2.570581835636314,
    2.446911851144969,
    2.3646242515927853,
    2.306004135204168,
    2.2621571628540993,
    2.2281388519862744,
    2.200985160082949,
    2.1788128296672284,
    2.1603686564627917,
    2.1447866879178035,
    2.131449545559323,
    2.1199052992212555,
    2.1098155778333156,
    2.10092204024096,
    2.093024054408263,
    2.0859634472658364,
    2.0796138447276626,
    2.0738730679040147,
    2.0686576104190406,
    2.0638985616280205,
    2.059538552753294,
    2.055529438642871,
    2.0518305164802833,
    2.048407141795244,
    2.0452296421327034,
    2.0422724563012373,
];

/// 0.975 quantile of Student's t with `df` degrees of freedom.
pub fn student_t_975(df: usize) -> f64 {
    if df == 0 {
        return f64::INFINITY;
    }
    if df <= T975.len() {
        return T975[df - 1];
    }
    // Cornish–Fisher expansion around the normal quantile.
    let z = 1.959963984540054f64;
    let v = df as f64;
    let z2 = z * z;
    let g1 = z * (z2 + 1.0) / 4.0;
    let g2 = z * ((5.0 * z2 + 16.0) * z2 + 3.0) / 96.0;
    let g3 = z * (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) / 384.0;
    let g4 = z * ((((79.0 * z2 + 776.0) * z2 + 1482.0) * z2 - 1920.0) * z2 - 945.0) / 92160.0;
    z + g1 / v + g2 / (v * v) + g3 / (v * v * v) + g4 / (v * v * v * v)
}
