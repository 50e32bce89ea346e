//! Target decomposition into support-width pieces and interior mollification.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::field::{GridFunction, Interval};
use crate::numerics::smoothstep;

/// Piecewise-constant control-support position `r(t)`, defining
/// `ω(t) = (r(t), r(t) + l)`.
///
/// `positions[i]` holds on `[breakpoints[i], breakpoints[i+1])`, the last
/// position up to the final time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportSchedule {
    length_l: f64,
    breakpoints: Vec<f64>,
    positions: Vec<f64>,
}

impl SupportSchedule {
    pub fn new(length_l: f64, breakpoints: Vec<f64>, positions: Vec<f64>) -> CoreResult<Self> {
        if !(length_l > 0.0 && length_l <= 1.0) {
            return Err(CoreError::invalid("length_l", format!("need 0 < l <= 1, got {length_l}")));
        }
        if breakpoints.is_empty() || breakpoints.len() != positions.len() {
            return Err(CoreError::invalid(
                "breakpoints",
                "need one position per breakpoint, at least one segment",
            ));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::invalid("breakpoints", "must be strictly increasing"));
        }
        for &r in &positions {
            if r < -1e-12 || r > 1.0 - length_l + 1e-12 {
                return Err(CoreError::invalid(
                    "positions",
                    format!("position {r} leaves [0, 1 - l]"),
                ));
            }
        }
        Ok(SupportSchedule { length_l, breakpoints, positions })
    }

    pub fn length_l(&self) -> f64 {
        self.length_l
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position_at(&self, t: f64) -> f64 {
        let mut r = self.positions[0];
        for (b, p) in self.breakpoints.iter().zip(&self.positions) {
            if t >= *b {
                r = *p;
            } else {
                break;
            }
        }
        r
    }

    /// `ω(t) = (r(t), r(t) + l)` clamped into `[0, 1]`.
    pub fn support_at(&self, t: f64) -> Interval {
        let r = self.position_at(t).clamp(0.0, 1.0 - self.length_l);
        Interval::new(r, r + self.length_l).expect("in range by clamping")
    }

    /// Concatenates `other` after `self`; `other`'s breakpoints must start
    /// at or after `self`'s last one.
    pub fn concat(&self, other: &SupportSchedule) -> CoreResult<SupportSchedule> {
        let mut breakpoints = self.breakpoints.clone();
        let mut positions = self.positions.clone();
        for (b, p) in other.breakpoints.iter().zip(&other.positions) {
            if *b <= *breakpoints.last().unwrap() {
                return Err(CoreError::invalid("breakpoints", "schedules overlap in time"));
            }
            breakpoints.push(*b);
            positions.push(*p);
        }
        SupportSchedule::new(self.length_l, breakpoints, positions)
    }
}

/// One piece of a decomposed target: the restriction of `y_d` to `support`,
/// extended by zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Piece {
    pub support: Interval,
    pub data: GridFunction,
}

/// A piece after interior mollification: nonnegative, exactly zero outside
/// the shrunken interval `omega`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MollifiedPiece {
    pub omega: Interval,
    pub data: GridFunction,
    pub margin: f64,
    /// Conservative ramp bound on `‖data - piece‖_{L²}`.
    pub bound: f64,
    /// Measured `‖data - piece‖_{L²}` by grid quadrature.
    pub distance: f64,
}

/// A target split into `M = ⌈1/l⌉` pieces, with optional mollified copies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetDecomposition {
    pub length_l: f64,
    pub piece_count: usize,
    pub pieces: Vec<Piece>,
    pub mollified: Vec<MollifiedPiece>,
}

/// Splits a nonnegative target into `M = ⌈1/l⌉` pieces supported on
/// `(0, l), (l, 2l), …, ((M-1)l, 1)`.
///
/// Grid nodes sitting exactly on a boundary `jl` are assigned to the lower
/// piece, so the pieces sum to `y_d` node-by-node (an assignment, not a
/// quadrature statement).
pub fn decompose_target(y_d: &GridFunction, length_l: f64) -> CoreResult<TargetDecomposition> {
    if !(length_l > 0.0 && length_l <= 1.0) {
        return Err(CoreError::invalid("length_l", format!("need 0 < l <= 1, got {length_l}")));
    }
    if !y_d.is_nonnegative(1e-12) {
        return Err(CoreError::invalid("y_d", "target must be nonnegative on the grid"));
    }
    // Smallest M with M·l >= 1; the slack shields exact divisions like
    // l = 1/3 from ceil() landing one too high.
    let piece_count = ((1.0 - 1e-9) / length_l).ceil().max(1.0) as usize;
    let n = y_d.n_points();
    let mut data: Vec<Vec<f64>> = vec![vec![0.0; n]; piece_count];
    for i in 0..n {
        let x = y_d.x(i);
        let j = ((x / length_l - 1e-12).ceil() as isize).clamp(1, piece_count as isize) as usize;
        data[j - 1][i] = y_d.values()[i];
    }
    let mut pieces = Vec::with_capacity(piece_count);
    for (j, values) in data.into_iter().enumerate() {
        let lo = j as f64 * length_l;
        let hi = if j + 1 == piece_count { 1.0 } else { ((j + 1) as f64 * length_l).min(1.0) };
        pieces.push(Piece { support: Interval::new(lo, hi)?, data: GridFunction::new(values)? });
    }
    Ok(TargetDecomposition { length_l, piece_count, pieces, mollified: Vec::new() })
}

fn ramp_factor(x: f64, lo: f64, hi: f64, m: f64) -> f64 {
    if x <= lo + m || x >= hi - m {
        0.0
    } else if x < lo + 2.0 * m {
        smoothstep((x - (lo + m)) / m)
    } else if x > hi - 2.0 * m {
        smoothstep(((hi - m) - x) / m)
    } else {
        1.0
    }
}

/// Multiplies `piece` by a C¹ smoothstep cutoff so the result vanishes
/// exactly outside `(lo + margin, hi - margin)` and stays nonnegative.
///
/// The conservative bound `(∫_{ramp<1} piece²)^{1/2}` controls the L²
/// distance to the original piece; when it exceeds `tol` the margin is
/// halved and the cutoff rebuilt, stopping once the margin falls under two
/// grid cells (the narrowest ramp the grid can represent).
pub fn mollify_piece(
    piece: &GridFunction,
    support: &Interval,
    margin: f64,
    tol: f64,
) -> CoreResult<MollifiedPiece> {
    let (lo, hi) = (support.lo(), support.hi());
    if !(margin > 0.0 && margin < (hi - lo) / 4.0) {
        return Err(CoreError::invalid(
            "margin",
            format!("need 0 < margin < (hi - lo)/4 = {}", (hi - lo) / 4.0),
        ));
    }
    if !piece.is_nonnegative(1e-12) {
        return Err(CoreError::invalid("piece", "piece must be nonnegative"));
    }
    let outside = piece.sup_outside(support);
    if outside > 1e-12 {
        return Err(CoreError::SupportViolation { mass: outside, lo, hi });
    }
    let h = piece.h();
    let min_margin = 2.0 * h;
    let mut m = margin;
    let mut best_bound = f64::INFINITY;
    loop {
        let n = piece.n_points();
        let mut values = vec![0.0; n];
        let mut bound_sq = 0.0;
        let mut dist_sq = 0.0;
        for i in 0..n {
            let x = piece.x(i);
            let r = ramp_factor(x, lo, hi, m);
            let p = piece.values()[i];
            values[i] = (p * r).max(0.0);
            // trapezoid weights: halve the endpoints
            let w = if i == 0 || i + 1 == n { 0.5 * h } else { h };
            if r < 1.0 {
                bound_sq += w * p * p;
            }
            let d = values[i] - p;
            dist_sq += w * d * d;
        }
        let bound = bound_sq.max(0.0).sqrt();
        best_bound = best_bound.min(bound);
        if bound <= tol {
            let omega = Interval::new(lo + m, hi - m)?;
            return Ok(MollifiedPiece {
                omega,
                data: GridFunction::new(values)?,
                margin: m,
                bound,
                distance: dist_sq.max(0.0).sqrt(),
            });
        }
        if m <= min_margin {
            return Err(CoreError::MollifyFailure { achieved: best_bound, tol, margin: m });
        }
        m = (m / 2.0).max(min_margin);
    }
}
