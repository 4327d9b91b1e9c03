//! Poisson random measure sampling and truncated Lévy white noise.
//!
//! The noise `L(B) = ∫_B ∫ z N̂(ds, dx, dz)` is realized cell by cell. Jumps
//! with |z| > ε are simulated exactly as a compound Poisson sum and
//! compensated by their mean; jumps with |z| ≤ ε are either dropped or
//! replaced by a centered Gaussian with the same variance σ_ε²·|cell|. The
//! substitution keeps the second moment of every increment equal to
//! m₂·|cell|.
//!
//! Each cell draws from its own counter-keyed stream, so increments of
//! disjoint cells are independent and a replicate is reproducible from its
//! [`StreamKey`] alone.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::levy_measure::{JumpSampler, LevyMeasure};
use crate::rng::{Purpose, StreamKey};
use crate::step::{Rect, StepFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallJumpMode {
    /// Discard jumps with |z| ≤ ε. Exact when ν has no mass there.
    Drop,
    /// Replace them by a Gaussian with variance σ_ε² per unit area.
    GaussianSubstitute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    Fixed(f64),
    /// Largest ε with σ_ε² ≤ fraction·m₂, fraction in (0, 1].
    Auto {
        target_variance_fraction: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub cutoff: Cutoff,
    pub mode: SmallJumpMode,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { cutoff: Cutoff::Auto { target_variance_fraction: 1e-3 }, mode: SmallJumpMode::GaussianSubstitute }
    }
}

/// The numbers a truncation policy resolves to for a given measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationInfo {
    pub eps: f64,
    pub mode: SmallJumpMode,
    /// ν({|z| > ε})
    pub tail_mass: f64,
    /// ∫_{|z|>ε} z ν(dz)
    pub tail_mean: f64,
    /// ∫_{|z|>ε} z² ν(dz)
    pub tail_second_moment: f64,
    /// σ_ε²
    pub small_jump_variance: f64,
}

impl TruncationInfo {
    /// Variance of the simulated noise per unit area.
    pub fn simulated_variance_rate(&self) -> f64 {
        match self.mode {
            SmallJumpMode::Drop => self.tail_second_moment,
            SmallJumpMode::GaussianSubstitute => self.tail_second_moment + self.small_jump_variance,
        }
    }
}

/// A truncation policy bound to a measure, ready to generate increments.
#[derive(Debug, Clone)]
pub struct ResolvedTruncation {
    info: TruncationInfo,
    sampler: Option<JumpSampler>,
}

impl TruncationPolicy {
    pub fn resolve(&self, measure: &LevyMeasure) -> Result<ResolvedTruncation> {
        let eps = match self.cutoff {
            Cutoff::Fixed(eps) => {
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(invalid!(InvalidParameter, "cutoff must be positive and finite, got {eps}"));
                }
                eps
            }
            Cutoff::Auto { target_variance_fraction } => auto_cutoff(measure, target_variance_fraction)?,
        };
        let tail_mass = measure.tail_mass(eps)?;
        let sampler = if tail_mass > 0.0 { Some(measure.jump_sampler(eps)?) } else { None };
        Ok(ResolvedTruncation {
            info: TruncationInfo {
                eps,
                mode: self.mode,
                tail_mass,
                tail_mean: measure.tail_mean(eps)?,
                tail_second_moment: measure.tail_second_moment(eps)?,
                small_jump_variance: measure.small_jump_variance(eps)?,
            },
            sampler,
        })
    }
}

/// Bisection in log ε for the largest cutoff meeting the variance budget.
fn auto_cutoff(measure: &LevyMeasure, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid!(InvalidParameter, "target_variance_fraction must lie in (0, 1], got {fraction}"));
    }
    let budget = fraction * measure.m2();
    let ok = |eps: f64| measure.small_jump_variance(eps).map(|v| v <= budget);

    let mut lo = 1.0;
    while !ok(lo)? {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(invalid!(InvalidParameter, "no cutoff meets variance fraction {fraction}"));
        }
    }
    let mut hi = lo * 2.0;
    while ok(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e18 {
            // The whole measure fits in the budget: every jump is small.
            return Ok(lo);
        }
    }
    for _ in 0..200 {
        if hi / lo <= 1.0 + 1e-13 {
            break;
        }
        let mid = (lo * hi).sqrt();
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

impl ResolvedTruncation {
    pub fn info(&self) -> TruncationInfo {
        self.info
    }

    pub fn eps(&self) -> f64 {
        self.info.eps
    }

    fn poisson(&self, area: f64) -> Option<Poisson<f64>> {
        let mean = area * self.info.tail_mass;
        if mean > 0.0 && self.sampler.is_some() {
            Poisson::new(mean).ok()
        } else {
            None
        }
    }

    fn increment_with<R: Rng + ?Sized>(&self, poisson: Option<&Poisson<f64>>, area: f64, rng: &mut R) -> f64 {
        let mut inc = -area * self.info.tail_mean;
        if let (Some(poisson), Some(sampler)) = (poisson, &self.sampler) {
            let count = poisson.sample(rng) as u64;
            for _ in 0..count {
                inc += sampler.sample(rng);
            }
        }
        if self.info.mode == SmallJumpMode::GaussianSubstitute && self.info.small_jump_variance > 0.0 {
            let g: f64 = StandardNormal.sample(rng);
            inc += (self.info.small_jump_variance * area).sqrt() * g;
        }
        inc
    }

    /// One realization of `L(B)` for a set of Lebesgue measure `area`.
    pub fn increment<R: Rng + ?Sized>(&self, area: f64, rng: &mut R) -> f64 {
        let poisson = self.poisson(area);
        self.increment_with(poisson.as_ref(), area, rng)
    }

    /// Jump points `(t, x, z)` with |z| > ε in `region`.
    pub fn sample_points<R: Rng + ?Sized>(&self, region: Rect, rng: &mut R) -> Result<PointSet> {
        if !region.is_finite() || !region.is_ordered() {
            return Err(invalid!(InvalidParameter, "region {region:?} must be finite and ordered"));
        }
        let mut points = Vec::new();
        if let (Some(poisson), Some(sampler)) = (self.poisson(region.area()), &self.sampler) {
            let count = poisson.sample(rng) as usize;
            points.reserve(count);
            for _ in 0..count {
                let t = region.t0 + (region.t1 - region.t0) * rng.random::<f64>();
                let x = region.x0 + (region.x1 - region.x0) * rng.random::<f64>();
                let z = sampler.sample(rng);
                points.push(JumpPoint { t, x, z });
            }
            points.sort_by(|a, b| a.t.total_cmp(&b.t));
        }
        Ok(PointSet { points, region, cutoff: self.info.eps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpPoint {
    pub t: f64,
    pub x: f64,
    pub z: f64,
}

/// Atoms of N restricted to `region × {|z| > cutoff}`, sorted by time.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<JumpPoint>,
    pub region: Rect,
    pub cutoff: f64,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Samples the PRM on `region × {|z| > eps}`: a Poisson number of points
/// with mean `|region|·ν({|z|>eps})`, uniform in space-time, jumps drawn
/// from the normalized restricted measure.
pub fn sample_points<R: Rng + ?Sized>(measure: &LevyMeasure, region: Rect, eps: f64, rng: &mut R) -> Result<PointSet> {
    let policy = TruncationPolicy { cutoff: Cutoff::Fixed(eps), mode: SmallJumpMode::Drop };
    policy.resolve(measure)?.sample_points(region, rng)
}

/// Uniform grid of cells `(t0 + jΔt, t0 + (j+1)Δt] × (x0 + iΔx, x0 + (i+1)Δx]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseGrid {
    pub t0: f64,
    pub x0: f64,
    pub dt: f64,
    pub dx: f64,
    pub nt: usize,
    pub nx: usize,
}

impl NoiseGrid {
    pub fn new(t0: f64, x0: f64, dt: f64, dx: f64, nt: usize, nx: usize) -> Result<Self> {
        if !(dt > 0.0 && dx > 0.0 && dt.is_finite() && dx.is_finite() && t0.is_finite() && x0.is_finite()) {
            return Err(invalid!(InvalidGeometry, "cell sizes must be positive and finite"));
        }
        Ok(Self { t0, x0, dt, dx, nt, nx })
    }

    pub fn cell_area(&self) -> f64 {
        self.dt * self.dx
    }

    pub fn cell_count(&self) -> usize {
        self.nt * self.nx
    }

    pub fn cell(&self, j: usize, i: usize) -> Rect {
        Rect::new(
            self.t0 + j as f64 * self.dt,
            self.t0 + (j + 1) as f64 * self.dt,
            self.x0 + i as f64 * self.dx,
            self.x0 + (i + 1) as f64 * self.dx,
        )
    }

    /// Whether two grids describe the same cells up to rounding.
    pub fn matches(&self, other: &NoiseGrid) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        self.nt == other.nt
            && self.nx == other.nx
            && close(self.t0, other.t0)
            && close(self.x0, other.x0)
            && close(self.dt, other.dt)
            && close(self.dx, other.dx)
    }
}

/// Realized increments `ΔL` on every cell of a grid, row-major in time.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField {
    grid: NoiseGrid,
    increments: Vec<f64>,
    truncation: TruncationInfo,
    key: StreamKey,
}

impl NoiseField {
    /// Builds a field from explicit increments (tests, replays).
    pub fn from_increments(
        grid: NoiseGrid,
        increments: Vec<f64>,
        truncation: TruncationInfo,
        key: StreamKey,
    ) -> Result<Self> {
        if increments.len() != grid.cell_count() {
            return Err(Error::NoiseMismatch(alloc::format!(
                "expected {} increments, got {}",
                grid.cell_count(),
                increments.len()
            )));
        }
        Ok(Self { grid, increments, truncation, key })
    }

    pub fn grid(&self) -> &NoiseGrid {
        &self.grid
    }

    pub fn truncation(&self) -> TruncationInfo {
        self.truncation
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn increments_mut(&mut self) -> &mut [f64] {
        &mut self.increments
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.increments[j * self.grid.nx + i]
    }

    /// Increments of time slab `j`.
    #[inline]
    pub fn row(&self, j: usize) -> &[f64] {
        &self.increments[j * self.grid.nx..(j + 1) * self.grid.nx]
    }

    pub fn total(&self) -> f64 {
        self.increments.iter().sum()
    }
}

impl ResolvedTruncation {
    /// Noise increments on every cell of `grid` for replicate `key`.
    pub fn noise_field(&self, grid: NoiseGrid, key: StreamKey) -> NoiseField {
        let area = grid.cell_area();
        let poisson = self.poisson(area);
        let increments = (0..grid.cell_count())
            .map(|c| {
                let mut rng = key.substream(Purpose::NoiseCell, c as u64);
                self.increment_with(poisson.as_ref(), area, &mut rng)
            })
            .collect();
        NoiseField { grid, increments, truncation: self.info, key }
    }
}

/// Resolves `policy` against `measure` and generates one noise field.
pub fn noise_increments(
    measure: &LevyMeasure,
    grid: NoiseGrid,
    policy: &TruncationPolicy,
    key: StreamKey,
) -> Result<NoiseField> {
    Ok(policy.resolve(measure)?.noise_field(grid, key))
}

/// Samples `∫∫ X dL` for a fixed deterministic step integrand.
#[derive(Debug, Clone)]
pub struct StepIntegrator {
    cells: Vec<crate::step::StepCell>,
    truncation: ResolvedTruncation,
    l2_norm_sq: f64,
}

impl StepIntegrator {
    pub fn new(
        integrand: &StepFunction,
        horizon: f64,
        measure: &LevyMeasure,
        policy: &TruncationPolicy,
    ) -> Result<Self> {
        if !integrand.is_bounded() || !integrand.within_horizon(horizon) {
            return Err(Error::UnboundedSupport { horizon });
        }
        Ok(Self {
            cells: integrand.partition(),
            truncation: policy.resolve(measure)?,
            l2_norm_sq: integrand.power_integral(2.0),
        })
    }

    pub fn truncation(&self) -> TruncationInfo {
        self.truncation.info()
    }

    /// ‖X‖²_{L²}
    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_norm_sq
    }

    pub fn sample(&self, key: StreamKey) -> f64 {
        self.cells
            .iter()
            .enumerate()
            .map(|(idx, cell)| {
                let mut rng = key.substream(Purpose::StepCell, idx as u64);
                cell.value * self.truncation.increment(cell.rect.area(), &mut rng)
            })
            .sum()
    }
}

/// One sample of `∫₀^T ∫ X dL`.
pub fn integrate_step(
    integrand: &StepFunction,
    horizon: f64,
    measure: &LevyMeasure,
    policy: &TruncationPolicy,
    key: StreamKey,
) -> Result<f64> {
    Ok(StepIntegrator::new(integrand, horizon, measure, policy)?.sample(key))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_measure::Atom;
    use alloc::vec;

    fn unit_atom() -> LevyMeasure {
        LevyMeasure::dirac(vec![Atom::new(1.0, 1.0)]).unwrap()
    }

    #[test]
    fn zero_area_region_is_empty() {
        let mut rng = StreamKey::new(3, 0).substream(Purpose::Scratch, 0);
        let pts = sample_points(&unit_atom(), Rect::new(0.0, 1.0, 2.0, 2.0), 0.5, &mut rng).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn points_are_in_region_sorted_and_above_cutoff() {
        let m = LevyMeasure::gamma(1.0, 1.0).unwrap();
        let region = Rect::new(0.0, 3.0, -1.0, 1.0);
        let mut rng = StreamKey::new(3, 0).substream(Purpose::Scratch, 0);
        let pts = sample_points(&m, region, 0.1, &mut rng).unwrap();
        assert!(!pts.is_empty());
        assert!(pts.points.windows(2).all(|w| w[0].t <= w[1].t));
        for p in &pts.points {
            assert!(p.t >= 0.0 && p.t <= 3.0 && p.x >= -1.0 && p.x <= 1.0 && p.z > 0.1);
        }
    }

    #[test]
    fn drop_mode_dirac_increment_is_centered_count() {
        let policy = TruncationPolicy { cutoff: Cutoff::Fixed(0.5), mode: SmallJumpMode::Drop };
        let t = policy.resolve(&unit_atom()).unwrap();
        let grid = NoiseGrid::new(0.0, 0.0, 1.0, 1.0, 4, 4).unwrap();
        let field = t.noise_field(grid, StreamKey::new(11, 2));
        for inc in field.increments() {
            let count = inc + 1.0;
            assert_eq!(count, count.round(), "increment {inc} is not count - 1");
            assert!(count >= 0.0);
        }
    }

    #[test]
    fn fields_are_deterministic() {
        let m = LevyMeasure::gamma(1.0, 1.0).unwrap();
        let grid = NoiseGrid::new(0.0, -1.0, 0.25, 0.25, 4, 8).unwrap();
        let key = StreamKey::new(5, 9);
        let a = noise_increments(&m, grid, &TruncationPolicy::default(), key).unwrap();
        let b = noise_increments(&m, grid, &TruncationPolicy::default(), key).unwrap();
        assert_eq!(a, b);
        let c = noise_increments(&m, grid, &TruncationPolicy::default(), StreamKey::new(5, 10)).unwrap();
        assert_ne!(a.increments(), c.increments());
    }

    #[test]
    fn auto_cutoff_meets_budget() {
        let m = LevyMeasure::gamma(1.0, 1.0).unwrap();
        let t = TruncationPolicy::default().resolve(&m).unwrap();
        let info = t.info();
        assert!(info.small_jump_variance <= 1e-3 * m.m2());
        // and is not needlessly small: doubling ε breaks the budget
        assert!(m.small_jump_variance(2.0 * info.eps).unwrap() > 1e-3 * m.m2());
        assert!((info.simulated_variance_rate() - m.m2()).abs() < 1e-8);
    }

    #[test]
    fn auto_cutoff_for_single_atom_sits_just_below_it() {
        let t = TruncationPolicy::default().resolve(&unit_atom()).unwrap();
        assert!(t.eps() < 1.0 && t.eps() > 0.999);
        assert_eq!(t.info().tail_mass, 1.0);
    }

    #[test]
    fn invalid_fraction_is_rejected() {
        let policy = TruncationPolicy {
            cutoff: Cutoff::Auto { target_variance_fraction: 0.0 },
            mode: SmallJumpMode::GaussianSubstitute,
        };
        assert!(policy.resolve(&unit_atom()).is_err());
    }

    #[test]
    fn zero_integrand_integrates_to_exact_zero() {
        let v = integrate_step(
            &StepFunction::zero(),
            1.0,
            &unit_atom(),
            &TruncationPolicy::default(),
            StreamKey::new(1, 1),
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn unbounded_support_is_rejected() {
        let x = StepFunction::indicator(Rect::new(0.0, 1.0, 0.0, f64::INFINITY), 1.0).unwrap();
        let err = integrate_step(&x, 1.0, &unit_atom(), &TruncationPolicy::default(), StreamKey::new(1, 1));
        assert_eq!(err, Err(Error::UnboundedSupport { horizon: 1.0 }));
        let late = StepFunction::indicator(Rect::new(0.0, 2.0, 0.0, 1.0), 1.0).unwrap();
        assert!(integrate_step(&late, 1.0, &unit_atom(), &TruncationPolicy::default(), StreamKey::new(1, 1)).is_err());
    }
}
