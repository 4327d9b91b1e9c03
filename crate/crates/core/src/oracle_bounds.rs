//! Deterministic references for the moment experiments: the renewal
//! equation `f = a² + f∗g`, the exact second-moment law of the linear
//! equation, the explicit moment envelopes, and an empirical probe of the
//! maximal moment inequality for integrals of step functions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::fields::{Scenario, Table};
use crate::levy_measure::LevyMeasure;
use crate::prm::{ResolvedTruncation, SmallJumpMode, TruncationPolicy};
use crate::rng::{Purpose, StreamKey};
use crate::step::{sort_dedup, Rect, StepFunction};

/// Kernel g of the renewal equation.
#[derive(Debug, Clone, PartialEq)]
pub enum RenewalKernel {
    /// g(t) = c·t
    Linear(f64),
    /// g(t) = c
    Constant(f64),
    /// Piecewise-linear in t, clamped beyond the last node.
    Tabulated(Table),
}

impl RenewalKernel {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            RenewalKernel::Linear(c) => c * t,
            RenewalKernel::Constant(c) => *c,
            RenewalKernel::Tabulated(table) => table.eval_clamped(t),
        }
    }
}

/// f on the grid `t_n = nΔ`, `n = 0..=T/Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    step: f64,
    a2: f64,
    kernel: RenewalKernel,
    values: Vec<f64>,
}

impl VolterraSolution {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn kernel(&self) -> &RenewalKernel {
        &self.kernel
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|n| n as f64 * self.step).collect()
    }

    pub fn horizon(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// Linear interpolation between grid values; `None` outside [0, T].
    pub fn at(&self, t: f64) -> Option<f64> {
        let s = t / self.step;
        let last = self.values.len() - 1;
        if !(s >= -1e-9 && s <= last as f64 + 1e-9) {
            return None;
        }
        let s = s.clamp(0.0, last as f64);
        let n = (s.floor() as usize).min(last.saturating_sub(1));
        if last == 0 {
            return Some(self.values[0]);
        }
        let w = s - n as f64;
        Some(self.values[n] * (1.0 - w) + self.values[n + 1] * w)
    }

    /// `(t, f)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(n, &f)| (n as f64 * self.step, f))
    }
}

/// Solves `f(t) = a² + ∫₀ᵗ f(s) g(t−s) ds` on [0, T] with the trapezoidal
/// convolution rule.
pub fn volterra_solve(a2: f64, kernel: RenewalKernel, horizon: f64, step: f64) -> Result<VolterraSolution> {
    if !(step > 0.0 && horizon >= 0.0 && step.is_finite() && horizon.is_finite()) {
        return Err(invalid!(InvalidParameter, "need step > 0 and T >= 0 (step={step}, T={horizon})"));
    }
    let r = horizon / step;
    let n_steps = r.round();
    if (r - n_steps).abs() > 1e-9 * n_steps.max(1.0) {
        return Err(invalid!(InvalidParameter, "T = {horizon} is not a multiple of the step {step}"));
    }
    let n_steps = n_steps as usize;
    let g: Vec<f64> = (0..=n_steps).map(|n| kernel.eval(n as f64 * step)).collect();
    let denom = 1.0 - 0.5 * step * g[0];
    if !(denom > 0.0) {
        return Err(invalid!(InvalidParameter, "step too large for kernel value g(0) = {}", g[0]));
    }
    let mut f = vec![0.0; n_steps + 1];
    f[0] = a2;
    for n in 1..=n_steps {
        let mut acc = 0.5 * f[0] * g[n];
        for j in 1..n {
            acc += f[j] * g[n - j];
        }
        f[n] = (a2 + step * acc) / denom;
    }
    Ok(VolterraSolution { step, a2, kernel, values: f })
}

/// `a²·cosh(|λ|·√(m₂/2)·t)`: E|u(t,x)|² for σ(u) = λu, b = 0, v₀ ≡ a, v₁ ≡ 0.
pub fn linear_second_moment(a: f64, lambda: f64, m2: f64, t: f64) -> f64 {
    a * a * (lambda.abs() * (0.5 * m2).sqrt() * t).cosh()
}

/// `(a²/2)·exp(L_σ·√(m₂/2)·t)`, the late-time lower envelope of inf_x E|u|².
pub fn lower_bound_moment(a: f64, l_sigma: f64, m2: f64, t: f64) -> f64 {
    0.5 * a * a * (l_sigma * (0.5 * m2).sqrt() * t).exp()
}

/// Renewal kernel of the second moment for a linear coupling of slope
/// `l_sigma`: g(t) = (L_σ² m₂ / 2)·t.
pub fn second_moment_kernel(l_sigma: f64, m2: f64) -> RenewalKernel {
    RenewalKernel::Linear(0.5 * l_sigma * l_sigma * m2)
}

/// Earliest grid time from which the lower envelope stays below the
/// renewal solution; `None` if it is above at the last grid time.
pub fn lower_bound_crossing(solution: &VolterraSolution, a: f64, l_sigma: f64, m2: f64) -> Option<f64> {
    let mut crossing = 0.0;
    for (t, f) in solution.points() {
        if lower_bound_moment(a, l_sigma, m2, t) > f {
            crossing = f64::NAN;
        } else if crossing.is_nan() {
            crossing = t;
        }
    }
    (!crossing.is_nan()).then_some(crossing)
}

/// Explicit constants of the moment envelopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    k: f64,
    l: f64,
    c0: f64,
    l_sigma: f64,
    m2: f64,
    gamma: f64,
    l1: f64,
    l2: f64,
}

impl BoundConstants {
    /// `k` bounds the initial data, `l` is the common Lipschitz constant,
    /// `c0` the slope in `B_p ≤ C₀p`, `l_sigma` the lower Lipschitz
    /// constant of σ and `m2` the second moment of ν.
    pub fn new(k: f64, l: f64, c0: f64, l_sigma: f64, m2: f64) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) || !(l > 0.0 && l.is_finite()) || !(m2 > 0.0 && m2.is_finite()) {
            return Err(invalid!(InvalidParameter, "need K >= 0, L > 0, m2 > 0 (K={k}, L={l}, m2={m2})"));
        }
        if !(c0 >= 1.0 && c0.is_finite()) {
            return Err(invalid!(InvalidParameter, "C0 must be >= 1, got {c0}"));
        }
        if !(l_sigma >= 0.0 && l_sigma.is_finite()) {
            return Err(invalid!(InvalidParameter, "L_sigma must be >= 0, got {l_sigma}"));
        }
        let gamma = k + 0.25 + 0.5 * (-2.0f64).exp();
        Ok(Self { k, l, c0, l_sigma, m2, gamma, l1: 2.0 * gamma + 0.5 * k, l2: 9.0 * c0 * l })
    }

    pub fn from_scenario(scenario: &Scenario, measure: &LevyMeasure, c0: f64) -> Result<Self> {
        Self::new(scenario.initial_bound(), scenario.lipschitz(), c0, scenario.lower_lipschitz_sigma(), measure.m2())
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn l_sigma(&self) -> f64 {
        self.l_sigma
    }

    /// γ = K + 1/4 + 1/(2e²)
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// L₁ = 2γ + K/2
    pub fn l1(&self) -> f64 {
        self.l1
    }

    /// L₂ = 9·C₀·L
    pub fn l2(&self) -> f64 {
        self.l2
    }

    /// λ = L_σ·√(m₂/2)
    pub fn lambda(&self) -> f64 {
        self.l_sigma * (0.5 * self.m2).sqrt()
    }

    /// ln β(p) with β(p)² = p^{p−2}·M_p·L₂^p.
    pub fn log_beta(&self, measure: &LevyMeasure, p: f64) -> Result<f64> {
        let mp = finite_max_moment(measure, p)?;
        Ok(0.5 * ((p - 2.0) * p.ln() + mp.ln() + p * self.l2.ln()))
    }

    pub fn beta(&self, measure: &LevyMeasure, p: f64) -> Result<f64> {
        Ok(self.log_beta(measure, p)?.exp())
    }

    /// Whether L > 1/(4m₂) and 4L ≥ 1, the side conditions under which the
    /// envelope was derived.
    pub fn in_proof_regime(&self) -> bool {
        self.l > 1.0 / (4.0 * self.m2) && 4.0 * self.l >= 1.0
    }
}

fn finite_max_moment(measure: &LevyMeasure, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(invalid!(InvalidParameter, "moment order p = {p} must be >= 2"));
    }
    let mp = measure.max_moment(p)?;
    if !mp.is_finite() {
        return Err(Error::InfiniteMoment { p });
    }
    Ok(mp)
}

/// Upper envelope of sup_x E|u(t,x)|^p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBound {
    pub p: f64,
    pub t: f64,
    pub c0: f64,
    pub log_value: f64,
    /// `exp(log_value)`, possibly +∞.
    pub value: f64,
    pub in_proof_regime: bool,
}

/// `L₁^p·exp(L₂^{p/2}·M_p^{1/2}·p^{p/2}·t)`, evaluated in log space.
pub fn upper_bound_moment(constants: &BoundConstants, measure: &LevyMeasure, p: f64, t: f64) -> Result<UpperBound> {
    let mp = finite_max_moment(measure, p)?;
    let log_rate = 0.5 * (p * constants.l2.ln() + mp.ln() + p * p.ln());
    let log_value = p * constants.l1.ln() + log_rate.exp() * t;
    Ok(UpperBound {
        p,
        t,
        c0: constants.c0,
        log_value,
        value: log_value.exp(),
        in_proof_regime: constants.in_proof_regime(),
    })
}

/// Result of comparing `‖sup_{s≤T}|∫₀^s∫X dL|‖_p` with the right-hand side
/// `m₂^{1/2}‖X‖₂ + m_p^{1/p}‖X‖_p` of the maximal inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RosenthalReport {
    pub p: f64,
    pub lhs_p_norm: f64,
    /// Standard error of `E sup|Y|^p`, before taking the p-th root.
    pub lhs_moment_stderr: f64,
    pub term_quadratic: f64,
    pub term_jump: f64,
    /// lhs / (term_quadratic + term_jump), or 0 when both terms vanish.
    pub empirical_ratio: f64,
    pub replicates: usize,
}

/// Active x-cells of the integrand during one time interval.
#[derive(Debug, Clone)]
struct Interval {
    t0: f64,
    t1: f64,
    cells: Vec<(f64, f64, f64)>,
}

/// Simulates paths `s ↦ Y(s) = ∫₀^s∫ X dL` of a deterministic step
/// integrand and tracks their running maximum.
///
/// Between breakpoints the path is linear (compensator drift) plus jumps,
/// so the maximum over each interval is attained at an endpoint, just
/// before a jump, or just after one; all of these are inspected. The
/// Gaussian small-jump substitute is added once per interval, so with
/// `GaussianSubstitute` the maximum is resolved on the breakpoint grid.
#[derive(Debug, Clone)]
pub struct RosenthalProbe {
    measure: LevyMeasure,
    truncation: ResolvedTruncation,
    intervals: Vec<Interval>,
    l2: f64,
    integrand: StepFunction,
}

/// Default number of uniform time breakpoints of the probe.
pub const PROBE_TIME_STEPS: usize = 100;

impl RosenthalProbe {
    pub fn new(
        integrand: &StepFunction,
        measure: &LevyMeasure,
        policy: &TruncationPolicy,
        horizon: f64,
    ) -> Result<Self> {
        Self::with_time_steps(integrand, measure, policy, horizon, PROBE_TIME_STEPS)
    }

    pub fn with_time_steps(
        integrand: &StepFunction,
        measure: &LevyMeasure,
        policy: &TruncationPolicy,
        horizon: f64,
        time_steps: usize,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || time_steps == 0 {
            return Err(invalid!(InvalidParameter, "need T > 0 and at least one time step"));
        }
        if !integrand.is_bounded() || !integrand.within_horizon(horizon) {
            return Err(Error::UnboundedSupport { horizon });
        }
        let cells = integrand.partition();
        let mut ts: Vec<f64> = (0..=time_steps).map(|k| horizon * k as f64 / time_steps as f64).collect();
        for c in &cells {
            ts.extend([c.rect.t0, c.rect.t1]);
        }
        sort_dedup(&mut ts);
        let intervals = ts
            .windows(2)
            .map(|w| Interval {
                t0: w[0],
                t1: w[1],
                cells: cells
                    .iter()
                    .filter(|c| c.rect.t0 <= w[0] && w[1] <= c.rect.t1)
                    .map(|c| (c.rect.x0, c.rect.x1, c.value))
                    .collect(),
            })
            .filter(|iv| !iv.cells.is_empty())
            .collect();
        Ok(Self {
            measure: measure.clone(),
            truncation: policy.resolve(measure)?,
            intervals,
            l2: integrand.power_integral(2.0),
            integrand: integrand.clone(),
        })
    }

    pub fn truncation(&self) -> &ResolvedTruncation {
        &self.truncation
    }

    /// `sup_{s≤T} |Y(s)|` for replicate `key`.
    pub fn sup_path(&self, key: StreamKey) -> f64 {
        let info = self.truncation.info();
        let gaussian = info.mode == SmallJumpMode::GaussianSubstitute && info.small_jump_variance > 0.0;
        let mut y = 0.0f64;
        let mut sup = 0.0f64;
        let mut jumps: Vec<(f64, f64)> = Vec::new();
        for (k, iv) in self.intervals.iter().enumerate() {
            let mut rng = key.substream(Purpose::PathInterval, k as u64);
            let dt = iv.t1 - iv.t0;
            let mut drift = 0.0;
            let mut var = 0.0;
            jumps.clear();
            for &(x0, x1, c) in &iv.cells {
                let width = x1 - x0;
                drift -= c * width * info.tail_mean;
                var += c * c * width;
                let points = self
                    .truncation
                    .sample_points(Rect::new(iv.t0, iv.t1, x0, x1), &mut rng)
                    .expect("probe regions are finite and ordered");
                jumps.extend(points.points.iter().map(|pt| (pt.t, c * pt.z)));
            }
            jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
            let start = y;
            let mut added = 0.0;
            for &(t, dz) in &jumps {
                let before = start + drift * (t - iv.t0) + added;
                added += dz;
                sup = sup.max(before.abs()).max((before + dz).abs());
            }
            y = start + drift * dt + added;
            sup = sup.max(y.abs());
            if gaussian {
                let g: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                y += (info.small_jump_variance * var * dt).sqrt() * g;
                sup = sup.max(y.abs());
            }
        }
        sup
    }

    /// Running maxima of replicates `0..replicates` under `seed`.
    pub fn sample_sups(&self, seed: u64, replicates: usize) -> Vec<f64> {
        (0..replicates).map(|r| self.sup_path(StreamKey::new(seed, r as u64))).collect()
    }

    /// `m₂^{1/2}‖X‖₂`
    pub fn term_quadratic(&self) -> f64 {
        (self.measure.m2() * self.l2).sqrt()
    }

    /// `m_p^{1/p}‖X‖_p`
    pub fn term_jump(&self, p: f64) -> Result<f64> {
        let mp = self.measure.moment(p)?;
        if !mp.is_finite() {
            return Err(Error::InfiniteMoment { p });
        }
        Ok(mp.powf(1.0 / p) * self.integrand.norm(p))
    }

    /// Report for order `p` from previously sampled running maxima.
    pub fn report(&self, p: f64, sups: &[f64]) -> Result<RosenthalReport> {
        if !(p >= 2.0) {
            return Err(invalid!(InvalidParameter, "moment order p = {p} must be >= 2"));
        }
        if sups.len() < 2 {
            return Err(invalid!(InvalidParameter, "need at least 2 replicates, got {}", sups.len()));
        }
        let term_jump = self.term_jump(p)?;
        let term_quadratic = self.term_quadratic();
        let n = sups.len() as f64;
        let powers: Vec<f64> = sups.iter().map(|s| s.powf(p)).collect();
        let mean = powers.iter().sum::<f64>() / n;
        let var = powers.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let lhs = mean.powf(1.0 / p);
        let rhs = term_quadratic + term_jump;
        Ok(RosenthalReport {
            p,
            lhs_p_norm: lhs,
            lhs_moment_stderr: (var / n).sqrt(),
            term_quadratic,
            term_jump,
            empirical_ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
            replicates: sups.len(),
        })
    }
}

/// Empirical check of the maximal moment inequality for one p.
#[allow(clippy::too_many_arguments)]
pub fn rosenthal_check(
    integrand: &StepFunction,
    measure: &LevyMeasure,
    policy: &TruncationPolicy,
    p: f64,
    horizon: f64,
    replicates: usize,
    seed: u64,
) -> Result<RosenthalReport> {
    let probe = RosenthalProbe::new(integrand, measure, policy, horizon)?;
    probe.term_jump(p)?;
    probe.report(p, &probe.sample_sups(seed, replicates))
}

/// Empirical ratios for every p in `p_list`, all computed from the same
/// sampled paths.
#[allow(clippy::too_many_arguments)]
pub fn rosenthal_slope_probe(
    measure: &LevyMeasure,
    integrand: &StepFunction,
    policy: &TruncationPolicy,
    p_list: &[f64],
    horizon: f64,
    replicates: usize,
    seed: u64,
) -> Result<Vec<RosenthalReport>> {
    if p_list.is_empty() {
        return Ok(Vec::new());
    }
    let probe = RosenthalProbe::new(integrand, measure, policy, horizon)?;
    for &p in p_list {
        probe.term_jump(p)?;
    }
    let sups = probe.sample_sups(seed, replicates);
    p_list.iter().map(|&p| probe.report(p, &sups)).collect()
}
