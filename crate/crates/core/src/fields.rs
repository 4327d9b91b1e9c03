//! Deterministic ingredients of the mild formulation: the cone kernel G,
//! the homogeneous solution w, and the Lipschitz coefficients σ and b.

use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Fundamental solution of the 1-D wave equation: ½·1{|x| ≤ t}.
#[inline]
pub fn kernel_g(t: f64, x: f64) -> f64 {
    if t >= 0.0 && x.abs() <= t {
        0.5
    } else {
        0.0
    }
}

/// Piecewise-linear table on strictly increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Table {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(invalid!(InvalidParameter, "table needs at least two (x, y) pairs of equal length"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(invalid!(InvalidParameter, "table nodes must be finite and strictly increasing"));
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn segment(&self, x: f64) -> usize {
        self.xs.partition_point(|&n| n <= x).clamp(1, self.xs.len() - 1) - 1
    }

    /// Linear interpolation, clamped to the end values outside the nodes.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let k = self.segment(x);
        let (x0, x1, y0, y1) = (self.xs[k], self.xs[k + 1], self.ys[k], self.ys[k + 1]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// ∫_{x_0}^{x} of the interpolant, taken as zero outside the nodes.
    fn antiderivative(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let x = x.clamp(self.xs[0], self.xs[n - 1]);
        let k = self.segment(x);
        let mut acc = 0.0;
        for j in 0..k {
            acc += 0.5 * (self.xs[j + 1] - self.xs[j]) * (self.ys[j] + self.ys[j + 1]);
        }
        let (x0, x1, y0, y1) = (self.xs[k], self.xs[k + 1], self.ys[k], self.ys[k + 1]);
        let h = x - x0;
        acc + h * (y0 + 0.5 * (y1 - y0) / (x1 - x0) * h)
    }

    fn sup_abs(&self) -> f64 {
        self.ys.iter().fold(0.0, |m, y| m.max(y.abs()))
    }

    /// Exact L¹ norm of the interpolant on its nodes.
    fn l1_norm(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| {
                let h = x[1] - x[0];
                if y[0] * y[1] >= 0.0 {
                    0.5 * h * (y[0].abs() + y[1].abs())
                } else {
                    0.5 * h * (y[0] * y[0] + y[1] * y[1]) / (y[1] - y[0]).abs()
                }
            })
            .sum()
    }
}

/// Initial displacement v₀ (bounded).
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDisplacement {
    Constant(f64),
    Cosine {
        amplitude: f64,
        frequency: f64,
    },
    /// Interpolated, held constant beyond the end nodes.
    Tabulated(Table),
}

impl InitialDisplacement {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Constant(a) => *a,
            Self::Cosine { amplitude, frequency } => amplitude * (frequency * x).cos(),
            Self::Tabulated(t) => t.eval_clamped(x),
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match self {
            Self::Constant(a) => a.abs(),
            Self::Cosine { amplitude, .. } => amplitude.abs(),
            Self::Tabulated(t) => t.sup_abs(),
        }
    }
}

/// Initial velocity v₁ (integrable).
#[derive(Debug, Clone, PartialEq)]
pub enum InitialVelocity {
    Zero,
    /// 1 on [left, right].
    Indicator {
        left: f64,
        right: f64,
    },
    /// Interpolated on its nodes, zero outside.
    Tabulated(Table),
}

impl InitialVelocity {
    /// An antiderivative V with V(b) − V(a) = ∫_a^b v₁.
    fn antiderivative(&self, x: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Indicator { left, right } => x.clamp(*left, *right) - left,
            Self::Tabulated(t) => t.antiderivative(x),
        }
    }

    pub fn l1_norm(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Indicator { left, right } => right - left,
            Self::Tabulated(t) => t.l1_norm(),
        }
    }
}

/// Closed family of Lipschitz coefficients for σ and b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Linear(f64),
    Affine { slope: f64, intercept: f64 },
    Constant(f64),
    Zero,
}

impl Coefficient {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Self::Linear(l) => l * u,
            Self::Affine { slope, intercept } => slope * u + intercept,
            Self::Constant(c) => c,
            Self::Zero => 0.0,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            Self::Linear(l) | Self::Affine { slope: l, .. } => l.abs(),
            Self::Constant(_) | Self::Zero => 0.0,
        }
    }

    /// inf_{x≠0} |c(x)/x|.
    pub fn lower_lipschitz(&self) -> f64 {
        match *self {
            Self::Linear(l) => l.abs(),
            Self::Affine { slope, intercept: 0.0 } => slope.abs(),
            _ => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.eval(0.0) == 0.0 && self.lipschitz() == 0.0
    }

    fn is_finite(&self) -> bool {
        self.eval(0.0).is_finite() && self.lipschitz().is_finite()
    }
}

/// Equation data plus the derived constants L, L_σ and K.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    v0: InitialDisplacement,
    v1: InitialVelocity,
    sigma: Coefficient,
    b: Coefficient,
    lipschitz: f64,
    lower_lipschitz_sigma: f64,
    initial_bound: f64,
}

/// Data needed by the second-moment lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundData {
    /// Constant initial displacement a > 0.
    pub a: f64,
    /// L_σ = inf |σ(x)/x| > 0.
    pub lower_lipschitz_sigma: f64,
}

impl Scenario {
    /// Builds a scenario with L set to its smallest admissible value (or 1
    /// when both coefficients vanish).
    pub fn new(v0: InitialDisplacement, v1: InitialVelocity, sigma: Coefficient, b: Coefficient) -> Result<Self> {
        match &v0 {
            InitialDisplacement::Constant(a) if !a.is_finite() => {
                return Err(invalid!(InvalidParameter, "v0 constant must be finite"))
            }
            InitialDisplacement::Cosine { amplitude, frequency }
                if !(amplitude.is_finite() && frequency.is_finite()) =>
            {
                return Err(invalid!(InvalidParameter, "v0 cosine parameters must be finite"))
            }
            _ => {}
        }
        if let InitialVelocity::Indicator { left, right } = v1 {
            if !(left.is_finite() && right.is_finite() && left <= right) {
                return Err(invalid!(InvalidParameter, "v1 indicator needs finite left <= right"));
            }
        }
        if !sigma.is_finite() || !b.is_finite() {
            return Err(invalid!(InvalidParameter, "coefficients must be finite"));
        }
        let mut s = Self {
            initial_bound: 0.5 * v1.l1_norm() + v0.sup_abs(),
            lower_lipschitz_sigma: sigma.lower_lipschitz(),
            v0,
            v1,
            sigma,
            b,
            lipschitz: f64::NAN,
        };
        let floor = s.lipschitz_floor();
        s.lipschitz = if floor > 0.0 { floor } else { 1.0 };
        Ok(s)
    }

    /// Overrides L; it must dominate both Lipschitz constants and |σ(0)|, |b(0)|.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Result<Self> {
        let floor = self.lipschitz_floor();
        if !(lipschitz > 0.0 && lipschitz.is_finite() && lipschitz >= floor) {
            return Err(invalid!(
                InvalidParameter,
                "lipschitz constant {lipschitz} below the admissible floor {floor}"
            ));
        }
        self.lipschitz = lipschitz;
        Ok(self)
    }

    /// max(Lip σ, Lip b, |σ(0)|, |b(0)|).
    pub fn lipschitz_floor(&self) -> f64 {
        self.sigma.lipschitz().max(self.b.lipschitz()).max(self.sigma.eval(0.0).abs()).max(self.b.eval(0.0).abs())
    }

    pub fn v0(&self) -> &InitialDisplacement {
        &self.v0
    }

    pub fn v1(&self) -> &InitialVelocity {
        &self.v1
    }

    pub fn sigma(&self) -> Coefficient {
        self.sigma
    }

    pub fn b(&self) -> Coefficient {
        self.b
    }

    /// L
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// L_σ
    pub fn lower_lipschitz_sigma(&self) -> f64 {
        self.lower_lipschitz_sigma
    }

    /// K = ½‖v₁‖_{L¹} + sup|v₀|, a bound on |w|.
    pub fn initial_bound(&self) -> f64 {
        self.initial_bound
    }

    pub fn is_deterministic(&self) -> bool {
        self.sigma.is_zero()
    }

    /// w(t, x) = ½∫_{x−t}^{x+t} v₁ + ½(v₀(x+t) + v₀(x−t)).
    pub fn initial_wave(&self, t: f64, x: f64) -> f64 {
        let (r, l) = (x + t, x - t);
        0.5 * (self.v1.antiderivative(r) - self.v1.antiderivative(l)) + 0.5 * (self.v0.eval(r) + self.v0.eval(l))
    }

    /// Checks the hypotheses of the second-moment lower bound: v₀ ≡ a > 0,
    /// v₁ ≡ 0, b ≡ 0 and σ linear with nonzero slope.
    pub fn lower_bound_data(&self) -> Result<LowerBoundData> {
        let a = match self.v0 {
            InitialDisplacement::Constant(a) if a > 0.0 => a,
            _ => return Err(invalid!(InvalidParameter, "lower bound needs v0 = constant a > 0")),
        };
        if self.v1 != InitialVelocity::Zero {
            return Err(invalid!(InvalidParameter, "lower bound needs v1 = 0"));
        }
        if self.b != Coefficient::Zero {
            return Err(invalid!(InvalidParameter, "lower bound needs b = 0"));
        }
        match self.sigma {
            Coefficient::Linear(l) if l != 0.0 => Ok(LowerBoundData { a, lower_lipschitz_sigma: l.abs() }),
            _ => Err(invalid!(InvalidParameter, "lower bound needs sigma = linear with nonzero slope")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};
    use alloc::vec;
    use approx::assert_relative_eq;
    use core::f64::consts::FRAC_PI_2;

    fn scenario(v0: InitialDisplacement, v1: InitialVelocity) -> Scenario {
        Scenario::new(v0, v1, Coefficient::Zero, Coefficient::Zero).unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_g(1.0, 0.5), 0.5);
        assert_eq!(kernel_g(1.0, 1.5), 0.0);
        assert_eq!(kernel_g(2.0, -2.0), 0.5);
        assert_eq!(kernel_g(0.0, 0.0), 0.5);
    }

    #[test]
    fn kernel_power_integrals() {
        // ∫ G^p(t, y) dy = 2^{1−p}·2t over |y| ≤ t, i.e. t/2 for p = 2
        for t in [0.3, 1.0, 2.5] {
            for p in [1, 2, 3, 4] {
                let est = integrate(|y| kernel_g(t, y).powi(p), -t, t, Tolerance::default()).unwrap();
                assert_relative_eq!(est.value, 2.0f64.powi(1 - p) * t, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn initial_wave_examples() {
        let s = scenario(InitialDisplacement::Constant(3.0), InitialVelocity::Zero);
        assert_eq!(s.initial_wave(0.7, -4.0), 3.0);
        let s = scenario(InitialDisplacement::Constant(0.0), InitialVelocity::Indicator { left: -1.0, right: 1.0 });
        assert_eq!(s.initial_wave(1.0, 0.0), 1.0);
        let s = scenario(InitialDisplacement::Cosine { amplitude: 1.0, frequency: 1.0 }, InitialVelocity::Zero);
        assert!(s.initial_wave(FRAC_PI_2, 0.0).abs() < 1e-15);
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(Coefficient::Linear(2.0).eval(3.0), 6.0);
        assert_eq!(Coefficient::Zero.eval(123.0), 0.0);
        assert_eq!(Coefficient::Affine { slope: 1.0, intercept: -1.0 }.eval(1.0), 0.0);
        assert_eq!(Coefficient::Constant(4.0).eval(-9.0), 4.0);
    }

    #[test]
    fn derived_constants() {
        let s = Scenario::new(
            InitialDisplacement::Cosine { amplitude: -2.0, frequency: 3.0 },
            InitialVelocity::Indicator { left: 0.0, right: 3.0 },
            Coefficient::Linear(-1.5),
            Coefficient::Affine { slope: 0.5, intercept: 4.0 },
        )
        .unwrap();
        assert_eq!(s.initial_bound(), 1.5 + 2.0);
        assert_eq!(s.lower_lipschitz_sigma(), 1.5);
        assert_eq!(s.lipschitz(), 4.0);
        assert!(s.clone().with_lipschitz(3.0).is_err());
        assert_eq!(s.with_lipschitz(5.0).unwrap().lipschitz(), 5.0);
    }

    #[test]
    fn tabulated_velocity_integrates_exactly() {
        // hat function on [-1, 1] peaking at 1, plus a negative lobe on [1, 2]
        let t = Table::new(vec![-1.0, 0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0, -1.0]).unwrap();
        let v1 = InitialVelocity::Tabulated(t.clone());
        assert_relative_eq!(v1.l1_norm(), 1.5, max_relative = 1e-15);
        let s = scenario(InitialDisplacement::Constant(0.0), v1);
        // ½∫_{-1}^{1} hat = ½
        assert_relative_eq!(s.initial_wave(1.0, 0.0), 0.5, max_relative = 1e-15);
        // whole support: ½(1 − ½)
        assert_relative_eq!(s.initial_wave(10.0, 0.0), 0.25, max_relative = 1e-15);
        // sign change inside a segment
        let cross = Table::new(vec![0.0, 1.0], vec![-1.0, 3.0]).unwrap();
        assert_relative_eq!(cross.l1_norm(), 0.5 * 10.0 / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn tabulated_displacement_is_clamped() {
        let t = Table::new(vec![0.0, 1.0], vec![2.0, 4.0]).unwrap();
        let v0 = InitialDisplacement::Tabulated(t);
        assert_eq!(v0.eval(-5.0), 2.0);
        assert_eq!(v0.eval(0.5), 3.0);
        assert_eq!(v0.eval(5.0), 4.0);
        assert_eq!(v0.sup_abs(), 4.0);
    }

    #[test]
    fn lower_bound_validation() {
        let ok = Scenario::new(
            InitialDisplacement::Constant(2.0),
            InitialVelocity::Zero,
            Coefficient::Linear(-0.5),
            Coefficient::Zero,
        )
        .unwrap();
        assert_eq!(ok.lower_bound_data().unwrap(), LowerBoundData { a: 2.0, lower_lipschitz_sigma: 0.5 });
        let cosine = Scenario::new(
            InitialDisplacement::Cosine { amplitude: 1.0, frequency: 1.0 },
            InitialVelocity::Zero,
            Coefficient::Linear(1.0),
            Coefficient::Zero,
        )
        .unwrap();
        assert!(cosine.lower_bound_data().is_err());
        let drift = Scenario::new(
            InitialDisplacement::Constant(1.0),
            InitialVelocity::Zero,
            Coefficient::Linear(1.0),
            Coefficient::Constant(1.0),
        )
        .unwrap();
        assert!(drift.lower_bound_data().is_err());
    }

    #[test]
    fn zero_coefficients_default_lipschitz_to_one() {
        let s = scenario(InitialDisplacement::Constant(1.0), InitialVelocity::Zero);
        assert_eq!(s.lipschitz(), 1.0);
        assert!(s.is_deterministic());
    }
}
