//! Lattice schemes for the mild equation
//!
//! ```text
//! u(t,x) = w(t,x) + ∫∫ G(t−s, x−y) σ(u(s,y)) L(ds,dy) + ∫∫ G(t−s, x−y) b(u(s,y)) dy ds
//! ```
//!
//! on a cone-aligned lattice `t_j = jΔ`, `x_i = −K−T + iΔ`. Noise lives on
//! the cells `(t_j, t_{j+1}] × (x_i, x_{i+1}]`. Each cell carries the forcing
//!
//! ```text
//! F_{j,i} = σ(ū_{j,i})·ΔL_{j,i} + b(ū_{j,i})·Δ²,   ū_{j,i} = ½(u_{j,i} + u_{j,i+1})
//! ```
//!
//! evaluated on the cell's lower edge, so F_{j,i} only uses information up
//! to time t_j (the lattice form of predictability). G is evaluated at the
//! lower-edge midpoint `(t_j, x_i + Δ/2)`; the backward cone of `(t_n, x_k)`
//! then holds exactly the cells `i ∈ [k−m, k+m−1]` of slab `j = n−m`, and
//!
//! ```text
//! ConeSum:  u_{n,k} = w(t_n, x_k) + ½ Σ_{j<n} Σ_{|i+½−k| < n−j} F_{j,i}
//! Diamond:  u_{n+1,k} − w = (u_{n,k+1} − w) + (u_{n,k−1} − w) − (u_{n−1,k} − w) + ½(F_{n,k−1} + F_{n,k})
//! ```
//!
//! The diamond form is the cone sum regrouped by inclusion–exclusion of
//! four cones, so both schemes agree up to rounding. Because G has compact
//! support, the noise window `[−K−T, K+T]` is exact: no boundary condition
//! is involved. Row j is only computed on the lattice points whose cones
//! stay inside the noise window.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::fields::Scenario;
use crate::prm::{NoiseField, NoiseGrid};
use crate::rng::StreamKey;

/// Horizon T, observation half-width K and lattice step Δ = Δt = Δx.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    horizon: f64,
    half_width: f64,
    step: f64,
    nt: usize,
    nx: usize,
}

fn integral_ratio(value: f64, step: f64, what: &str) -> Result<usize> {
    let r = value / step;
    let n = r.round();
    if !(n >= 0.0) || (r - n).abs() > 1e-9 * n.max(1.0) {
        return Err(invalid!(InvalidGeometry, "{what} = {value} is not a multiple of the step {step}"));
    }
    Ok(n as usize)
}

impl GridGeometry {
    pub fn new(horizon: f64, half_width: f64, step: f64) -> Result<Self> {
        if !(step > 0.0
            && step.is_finite()
            && horizon > 0.0
            && horizon.is_finite()
            && half_width >= 0.0
            && half_width.is_finite())
        {
            return Err(invalid!(
                InvalidGeometry,
                "need T > 0, K >= 0 and step > 0 (T={horizon}, K={half_width}, step={step})"
            ));
        }
        let nt = integral_ratio(horizon, step, "T")?;
        let nx = integral_ratio(2.0 * (half_width + horizon), step, "2K+2T")?;
        Ok(Self { horizon, half_width, step, nt, nx })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of time steps T/Δ.
    pub fn time_steps(&self) -> usize {
        self.nt
    }

    /// Number of noise cells across the enlarged window, (2K+2T)/Δ.
    pub fn noise_cells_x(&self) -> usize {
        self.nx
    }

    /// Number of lattice points in the observation window [−K, K].
    pub fn window_len(&self) -> usize {
        self.nx - 2 * self.nt + 1
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.step
    }

    /// Position of lattice column `i` of the enlarged window.
    pub fn lattice_x(&self, i: usize) -> f64 {
        -(self.half_width + self.horizon) + i as f64 * self.step
    }

    /// Position of observation-window column `i`.
    pub fn window_x(&self, i: usize) -> f64 {
        self.lattice_x(i + self.nt)
    }

    /// Observation-window column nearest to `x`, if inside [−K, K].
    pub fn window_index(&self, x: f64) -> Option<usize> {
        if x.abs() > self.half_width + 1e-12 {
            return None;
        }
        let i = ((x + self.half_width) / self.step).round();
        Some((i.max(0.0) as usize).min(self.window_len() - 1))
    }

    /// Time index nearest to `t`, if inside [0, T].
    pub fn time_index(&self, t: f64) -> Option<usize> {
        if !(t >= -1e-12 && t <= self.horizon + 1e-12) {
            return None;
        }
        Some(((t / self.step).round() as usize).min(self.nt))
    }

    /// The noise grid covering [0, T] × [−K−T, K+T].
    pub fn noise_grid(&self) -> NoiseGrid {
        NoiseGrid {
            t0: 0.0,
            x0: -(self.half_width + self.horizon),
            dt: self.step,
            dx: self.step,
            nt: self.nt,
            nx: self.nx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ConeSum,
    Diamond,
}

/// u on the observation window, rows `t_0..=t_{T/Δ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    geometry: GridGeometry,
    scheme: Scheme,
    noise_key: Option<StreamKey>,
    values: Vec<f64>,
}

impl GridSolution {
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn noise_key(&self) -> Option<StreamKey> {
        self.noise_key
    }

    pub fn rows(&self) -> usize {
        self.geometry.nt + 1
    }

    pub fn cols(&self) -> usize {
        self.geometry.window_len()
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.cols() + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let c = self.cols();
        &self.values[j * c..(j + 1) * c]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// u at the lattice point nearest to (t, x).
    pub fn at(&self, t: f64, x: f64) -> Option<f64> {
        Some(self.get(self.geometry.time_index(t)?, self.geometry.window_index(x)?))
    }

    /// max |u − v| over the window.
    pub fn sup_distance(&self, other: &GridSolution) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// `(t, x, u)` triples, time-major.
    pub fn triples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let c = self.cols();
        self.values
            .iter()
            .enumerate()
            .map(move |(idx, &u)| (self.geometry.time(idx / c), self.geometry.window_x(idx % c), u))
    }
}

/// Full-width lattice rows; row j is meaningful on columns `j..=nx−j`.
#[derive(Debug, Clone)]
struct Lattice {
    cols: usize,
    data: Vec<f64>,
}

impl Lattice {
    fn new(rows: usize, cols: usize) -> Self {
        Self { cols, data: vec![0.0; rows * cols] }
    }

    #[inline]
    fn get(&self, j: usize, i: usize) -> f64 {
        self.data[j * self.cols + i]
    }

    #[inline]
    fn set(&mut self, j: usize, i: usize, v: f64) {
        self.data[j * self.cols + i] = v;
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    fn row_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.cols..(j + 1) * self.cols]
    }
}

/// Precomputed homogeneous solution for one (scenario, geometry) pair.
/// Reuse it across replicates.
#[derive(Debug, Clone)]
pub struct LatticeSolver {
    scenario: Scenario,
    geometry: GridGeometry,
    w: Lattice,
}

impl LatticeSolver {
    pub fn new(scenario: &Scenario, geometry: &GridGeometry) -> Self {
        let (nt, nx) = (geometry.nt, geometry.nx);
        let mut w = Lattice::new(nt + 1, nx + 1);
        for j in 0..=nt {
            let t = geometry.time(j);
            for i in j..=nx - j {
                w.set(j, i, scenario.initial_wave(t, geometry.lattice_x(i)));
            }
        }
        Self { scenario: scenario.clone(), geometry: *geometry, w }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    fn bind<'a>(&'a self, noise: &'a NoiseField) -> Result<Problem<'a>> {
        let expected = self.geometry.noise_grid();
        if !noise.grid().matches(&expected) {
            return Err(Error::NoiseMismatch(alloc::format!(
                "noise grid {:?} does not cover geometry grid {:?}",
                noise.grid(),
                expected
            )));
        }
        Ok(Problem { scenario: &self.scenario, geometry: self.geometry, noise, w: &self.w })
    }

    pub fn simulate(&self, noise: &NoiseField, scheme: Scheme) -> Result<GridSolution> {
        let problem = self.bind(noise)?;
        let lattice = match scheme {
            Scheme::ConeSum => problem.cone_sum(),
            Scheme::Diamond => problem.diamond(),
        };
        Ok(problem.window(&lattice, scheme))
    }

    pub fn picard_sequence(&self, noise: &NoiseField, n_max: usize) -> Result<Vec<GridSolution>> {
        if n_max < 1 {
            return Err(invalid!(InvalidParameter, "picard iteration needs n_max >= 1"));
        }
        let problem = self.bind(noise)?;
        let mut current = self.w.clone();
        let mut out = Vec::with_capacity(n_max + 1);
        out.push(problem.window(&current, Scheme::ConeSum));
        for _ in 0..n_max {
            current = problem.picard_step(&current);
            out.push(problem.window(&current, Scheme::ConeSum));
        }
        Ok(out)
    }
}

struct Problem<'a> {
    scenario: &'a Scenario,
    geometry: GridGeometry,
    noise: &'a NoiseField,
    w: &'a Lattice,
}

impl<'a> Problem<'a> {
    /// Cell forcing of slab j from lattice row `u` (valid on `j..=nx−j`).
    fn forcing_row(&self, j: usize, u: &[f64], out: &mut [f64]) {
        let nx = self.geometry.nx;
        let area = self.geometry.step * self.geometry.step;
        let sigma = self.scenario.sigma();
        let b = self.scenario.b();
        let dl = self.noise.row(j);
        for i in j..nx - j {
            let ubar = 0.5 * (u[i] + u[i + 1]);
            out[i] = sigma.eval(ubar) * dl[i] + b.eval(ubar) * area;
        }
    }

    /// ½ Σ over the backward cone of (t_n, x_k) of the stored forcing.
    fn cone_value(&self, forcing: &Lattice, n: usize, k: usize) -> f64 {
        let mut acc = 0.0;
        for j in 0..n {
            let m = n - j;
            let row = forcing.row(j);
            for f in &row[k - m..k + m] {
                acc += f;
            }
        }
        0.5 * acc
    }

    fn cone_sum(&self) -> Lattice {
        let (nt, nx) = (self.geometry.nt, self.geometry.nx);
        let mut u = Lattice::new(nt + 1, nx + 1);
        let mut forcing = Lattice::new(nt.max(1), nx);
        u.row_mut(0).copy_from_slice(self.w.row(0));
        for n in 0..nt {
            let mut row = vec![0.0; nx];
            self.forcing_row(n, u.row(n), &mut row);
            forcing.row_mut(n).copy_from_slice(&row);
            let t = n + 1;
            for k in t..=nx - t {
                let v = self.w.get(t, k) + self.cone_value(&forcing, t, k);
                u.set(t, k, v);
            }
        }
        u
    }

    fn diamond(&self) -> Lattice {
        let (nt, nx) = (self.geometry.nt, self.geometry.nx);
        let mut u = Lattice::new(nt + 1, nx + 1);
        // v = u − w, the stochastic and drift contribution.
        let mut v_prev = vec![0.0; nx + 1];
        let mut v_cur = vec![0.0; nx + 1];
        let mut v_next = vec![0.0; nx + 1];
        let mut forcing = vec![0.0; nx];
        u.row_mut(0).copy_from_slice(self.w.row(0));
        for n in 0..nt {
            self.forcing_row(n, u.row(n), &mut forcing);
            let t = n + 1;
            for k in t..=nx - t {
                let local = 0.5 * (forcing[k - 1] + forcing[k]);
                v_next[k] = if n == 0 { local } else { v_cur[k + 1] + v_cur[k - 1] - v_prev[k] + local };
                u.set(t, k, self.w.get(t, k) + v_next[k]);
            }
            core::mem::swap(&mut v_prev, &mut v_cur);
            core::mem::swap(&mut v_cur, &mut v_next);
        }
        u
    }

    /// One Picard step: forcing from every row of `prev`, then cone sums.
    fn picard_step(&self, prev: &Lattice) -> Lattice {
        let (nt, nx) = (self.geometry.nt, self.geometry.nx);
        let mut forcing = Lattice::new(nt.max(1), nx);
        for j in 0..nt {
            let mut row = vec![0.0; nx];
            self.forcing_row(j, prev.row(j), &mut row);
            forcing.row_mut(j).copy_from_slice(&row);
        }
        let mut u = Lattice::new(nt + 1, nx + 1);
        u.row_mut(0).copy_from_slice(self.w.row(0));
        for t in 1..=nt {
            for k in t..=nx - t {
                u.set(t, k, self.w.get(t, k) + self.cone_value(&forcing, t, k));
            }
        }
        u
    }

    fn window(&self, lattice: &Lattice, scheme: Scheme) -> GridSolution {
        let nt = self.geometry.nt;
        let cols = self.geometry.window_len();
        let mut values = Vec::with_capacity((nt + 1) * cols);
        for j in 0..=nt {
            values.extend_from_slice(&lattice.row(j)[nt..nt + cols]);
        }
        GridSolution { geometry: self.geometry, scheme, noise_key: Some(self.noise.key()), values }
    }
}

/// Solves the lattice equation for one noise realization.
pub fn simulate(
    scenario: &Scenario,
    geometry: &GridGeometry,
    noise: &NoiseField,
    scheme: Scheme,
) -> Result<GridSolution> {
    LatticeSolver::new(scenario, geometry).simulate(noise, scheme)
}

/// Picard iterates `u_0 = w, u_1, …, u_{n_max}` with frozen noise.
///
/// Row j of u_n no longer changes once n ≥ j, so after T/Δ iterations the
/// sequence sits exactly on the cone-sum solution.
pub fn picard_sequence(
    scenario: &Scenario,
    geometry: &GridGeometry,
    noise: &NoiseField,
    n_max: usize,
) -> Result<Vec<GridSolution>> {
    LatticeSolver::new(scenario, geometry).picard_sequence(noise, n_max)
}

/// `d_n = max|u_{n+1} − u_n|` for consecutive iterates.
pub fn successive_differences(iterates: &[GridSolution]) -> Vec<f64> {
    iterates.windows(2).map(|w| w[1].sup_distance(&w[0])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Coefficient, InitialDisplacement, InitialVelocity};
    use crate::levy_measure::LevyMeasure;
    use crate::prm::{noise_increments, TruncationPolicy};

    fn gamma_noise(geometry: &GridGeometry, seed: u64) -> NoiseField {
        let m = LevyMeasure::gamma(1.0, 1.0).unwrap();
        noise_increments(&m, geometry.noise_grid(), &TruncationPolicy::default(), StreamKey::new(seed, 0)).unwrap()
    }

    fn linear(a: f64) -> Scenario {
        Scenario::new(
            InitialDisplacement::Constant(a),
            InitialVelocity::Zero,
            Coefficient::Linear(1.0),
            Coefficient::Zero,
        )
        .unwrap()
    }

    #[test]
    fn geometry_validation() {
        assert!(GridGeometry::new(1.0, 1.0, 1.0 / 32.0).is_ok());
        assert!(GridGeometry::new(1.0, 1.0, 0.3).is_err());
        assert!(GridGeometry::new(1.0, 0.1, 0.25).is_err());
        assert!(GridGeometry::new(0.0, 1.0, 0.25).is_err());
        let g = GridGeometry::new(1.0, 0.5, 0.25).unwrap();
        assert_eq!(g.time_steps(), 4);
        assert_eq!(g.noise_cells_x(), 12);
        assert_eq!(g.window_len(), 5);
        assert_eq!(g.window_x(0), -0.5);
        assert_eq!(g.window_x(4), 0.5);
        assert_eq!(g.window_index(0.0), Some(2));
        assert_eq!(g.window_index(0.6), None);
    }

    #[test]
    fn constant_data_without_forcing_stays_constant() {
        let g = GridGeometry::new(1.0, 1.0, 0.125).unwrap();
        let s = Scenario::new(
            InitialDisplacement::Constant(2.5),
            InitialVelocity::Zero,
            Coefficient::Zero,
            Coefficient::Zero,
        )
        .unwrap();
        let noise = gamma_noise(&g, 1);
        for scheme in [Scheme::ConeSum, Scheme::Diamond] {
            let sol = simulate(&s, &g, &noise, scheme).unwrap();
            assert!(sol.values().iter().all(|&u| u == 2.5));
        }
    }

    #[test]
    fn first_row_is_initial_displacement() {
        let g = GridGeometry::new(0.5, 1.0, 0.125).unwrap();
        let s = Scenario::new(
            InitialDisplacement::Cosine { amplitude: 1.0, frequency: 2.0 },
            InitialVelocity::Indicator { left: -0.2, right: 0.4 },
            Coefficient::Linear(1.0),
            Coefficient::Constant(0.3),
        )
        .unwrap();
        let sol = simulate(&s, &g, &gamma_noise(&g, 2), Scheme::Diamond).unwrap();
        for i in 0..sol.cols() {
            assert_eq!(sol.get(0, i), (2.0 * g.window_x(i)).cos());
        }
    }

    #[test]
    fn constant_drift_counts_cone_cells() {
        // b ≡ 1: u(t_n) = ½ Δ² Σ_{m=1}^{n} 2m = Δ² n(n+1)/2 exactly
        let g = GridGeometry::new(1.0, 0.0, 0.0625).unwrap();
        let s = Scenario::new(
            InitialDisplacement::Constant(0.0),
            InitialVelocity::Zero,
            Coefficient::Zero,
            Coefficient::Constant(1.0),
        )
        .unwrap();
        let sol = simulate(&s, &g, &gamma_noise(&g, 3), Scheme::ConeSum).unwrap();
        let n = 16.0;
        assert!((sol.at(1.0, 0.0).unwrap() - 0.0625f64.powi(2) * n * (n + 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn schemes_agree_on_shared_noise() {
        let g = GridGeometry::new(1.0, 1.0, 1.0 / 16.0).unwrap();
        let noise = gamma_noise(&g, 4);
        let s = linear(1.0);
        let cone = simulate(&s, &g, &noise, Scheme::ConeSum).unwrap();
        let diamond = simulate(&s, &g, &noise, Scheme::Diamond).unwrap();
        assert!(cone.sup_distance(&diamond) <= 1e-12 * cone.sup_norm());
    }

    #[test]
    fn mismatched_noise_is_rejected() {
        let g = GridGeometry::new(1.0, 1.0, 0.125).unwrap();
        let other = GridGeometry::new(1.0, 0.5, 0.125).unwrap();
        let noise = gamma_noise(&other, 1);
        assert!(matches!(simulate(&linear(1.0), &g, &noise, Scheme::Diamond), Err(Error::NoiseMismatch(_))));
    }

    #[test]
    fn picard_without_coupling_is_stationary() {
        let g = GridGeometry::new(1.0, 0.5, 0.125).unwrap();
        let s = Scenario::new(
            InitialDisplacement::Cosine { amplitude: 1.0, frequency: 1.0 },
            InitialVelocity::Zero,
            Coefficient::Zero,
            Coefficient::Zero,
        )
        .unwrap();
        let iterates = picard_sequence(&s, &g, &gamma_noise(&g, 5), 3).unwrap();
        assert_eq!(iterates.len(), 4);
        assert!(iterates.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn picard_reaches_the_cone_sum_solution() {
        let g = GridGeometry::new(1.0, 0.5, 0.125).unwrap();
        let noise = gamma_noise(&g, 6);
        let s = linear(1.0);
        let iterates = picard_sequence(&s, &g, &noise, 8).unwrap();
        let exact = simulate(&s, &g, &noise, Scheme::ConeSum).unwrap();
        assert_eq!(iterates[8].values(), exact.values());
        assert!(iterates[7].sup_distance(&exact) > 0.0);
    }
}
