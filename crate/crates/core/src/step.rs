//! Deterministic space-time step functions `X(t,x) = Σ c_k 1_{R_k}(t,x)`.

use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Half-open space-time rectangle `(t0, t1] × (x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

impl Rect {
    pub const fn new(t0: f64, t1: f64, x0: f64, x1: f64) -> Self {
        Self { t0, t1, x0, x1 }
    }

    pub fn area(&self) -> f64 {
        (self.t1 - self.t0) * (self.x1 - self.x0)
    }

    pub fn is_finite(&self) -> bool {
        self.t0.is_finite() && self.t1.is_finite() && self.x0.is_finite() && self.x1.is_finite()
    }

    pub fn is_ordered(&self) -> bool {
        self.t0 <= self.t1 && self.x0 <= self.x1
    }

    fn contains_cell(&self, cell: &Rect) -> bool {
        self.t0 <= cell.t0 && cell.t1 <= self.t1 && self.x0 <= cell.x0 && cell.x1 <= self.x1
    }
}

/// Sum of weighted indicator functions of rectangles. Overlaps add.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepFunction {
    pieces: Vec<(Rect, f64)>,
}

/// One cell of the common refinement, with the integrand value on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCell {
    pub rect: Rect,
    pub value: f64,
}

impl StepFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(pieces: Vec<(Rect, f64)>) -> Result<Self> {
        for (rect, value) in &pieces {
            if !rect.is_ordered() || rect.t0.is_nan() || rect.x0.is_nan() {
                return Err(invalid!(InvalidParameter, "rectangle {rect:?} has reversed edges"));
            }
            if !value.is_finite() {
                return Err(invalid!(InvalidParameter, "step value must be finite, got {value}"));
            }
        }
        Ok(Self { pieces })
    }

    /// `c·1_{(t0,t1]×(x0,x1]}`.
    pub fn indicator(rect: Rect, value: f64) -> Result<Self> {
        Self::new(alloc::vec![(rect, value)])
    }

    pub fn pieces(&self) -> &[(Rect, f64)] {
        &self.pieces
    }

    pub fn is_bounded(&self) -> bool {
        self.pieces.iter().all(|(r, _)| r.is_finite())
    }

    /// Whether every piece with nonzero value lies in `[0, horizon] × ℝ`.
    pub fn within_horizon(&self, horizon: f64) -> bool {
        self.pieces.iter().filter(|(r, v)| *v != 0.0 && r.area() > 0.0).all(|(r, _)| r.t0 >= 0.0 && r.t1 <= horizon)
    }

    /// Common refinement of all rectangles; cells with zero value or zero
    /// area are omitted. Cells are ordered by `(t0, x0)`.
    pub fn partition(&self) -> Vec<StepCell> {
        let mut ts = Vec::new();
        let mut xs = Vec::new();
        for (r, v) in &self.pieces {
            if *v != 0.0 && r.area() > 0.0 {
                ts.extend([r.t0, r.t1]);
                xs.extend([r.x0, r.x1]);
            }
        }
        sort_dedup(&mut ts);
        sort_dedup(&mut xs);
        let mut cells = Vec::new();
        for tw in ts.windows(2) {
            for xw in xs.windows(2) {
                let rect = Rect::new(tw[0], tw[1], xw[0], xw[1]);
                let value: f64 = self.pieces.iter().filter(|(r, _)| r.contains_cell(&rect)).map(|(_, v)| *v).sum();
                if value != 0.0 {
                    cells.push(StepCell { rect, value });
                }
            }
        }
        cells
    }

    /// ∫∫|X|^q dx dt, exact.
    pub fn power_integral(&self, q: f64) -> f64 {
        self.partition().iter().map(|c| c.value.abs().powf(q) * c.rect.area()).sum()
    }

    /// ‖X‖_{L^q}.
    pub fn norm(&self, q: f64) -> f64 {
        self.power_integral(q).powf(1.0 / q)
    }
}

pub(crate) fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn overlapping_pieces_add() {
        let x = StepFunction::new(vec![(Rect::new(0.0, 1.0, 0.0, 2.0), 1.0), (Rect::new(0.0, 1.0, 1.0, 3.0), 2.0)])
            .unwrap();
        let cells = x.partition();
        let values: Vec<f64> = cells.iter().map(|c| c.value).collect();
        assert_eq!(values, vec![1.0, 3.0, 2.0]);
        // 1·1 + 9·1 + 4·1
        assert_eq!(x.power_integral(2.0), 14.0);
    }

    #[test]
    fn norms_of_indicator() {
        let x = StepFunction::indicator(Rect::new(0.0, 1.0, 0.0, 2.0), 2.0).unwrap();
        assert_eq!(x.power_integral(2.0), 8.0);
        assert!((x.norm(4.0) - (32.0f64).powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn zero_function_has_no_cells() {
        assert!(StepFunction::zero().partition().is_empty());
        let cancelled =
            StepFunction::new(vec![(Rect::new(0.0, 1.0, 0.0, 1.0), 1.0), (Rect::new(0.0, 1.0, 0.0, 1.0), -1.0)])
                .unwrap();
        assert!(cancelled.partition().is_empty());
    }

    #[test]
    fn support_checks() {
        let unbounded = StepFunction::indicator(Rect::new(0.0, 1.0, 0.0, f64::INFINITY), 1.0).unwrap();
        assert!(!unbounded.is_bounded());
        let late = StepFunction::indicator(Rect::new(0.5, 2.0, 0.0, 1.0), 1.0).unwrap();
        assert!(!late.within_horizon(1.0));
        assert!(late.within_horizon(2.0));
        assert!(StepFunction::indicator(Rect::new(1.0, 0.0, 0.0, 1.0), 1.0).is_err());
    }
}
