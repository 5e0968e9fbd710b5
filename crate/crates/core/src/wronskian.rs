//! Wronskian algebra and the quantization conditions built from it.
//!
//! For every energy below threshold the solution behaves as
//! `A conv(x) + B div(x)` far out on each side. Projecting the canonical
//! pair onto the convergent tail with a Wronskian isolates the divergent
//! coefficient, and bound states are the energies where it vanishes on
//! both sides.

use thiserror::Error;

use crate::integrator::{PairNode, SolutionPair};

/// Below this decay rate the tail basis degenerates to `{1, x}`.
pub const THRESHOLD_K: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WronskianError {
    #[error("energy {energy} lies above the asymptotic limit {v_limit}: continuum state")]
    Continuum { energy: f64, v_limit: f64 },
    #[error("evaluation point x = {x} is not a node of the grid [{x_left}, {x_right}]")]
    Range { x: f64, x_left: f64, x_right: f64 },
    #[error("divergent coefficient is undefined at threshold (k = 0)")]
    ThresholdDiagnostic,
    #[error("basis energy {basis} does not match solution energy {pair}")]
    EnergyMismatch { basis: f64, pair: f64 },
}

/// `W(f, g) = f g' - g f'`.
#[inline]
pub fn wronskian(f: f64, f_prime: f64, g: f64, g_prime: f64) -> f64 {
    f * g_prime - g * f_prime
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    Exponential,
    Threshold,
}

/// Convergent and divergent tail functions on one side at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticBasis {
    pub side: Side,
    pub energy: f64,
    pub k: f64,
    pub mode: TailMode,
}

impl AsymptoticBasis {
    // +1 for a tail that grows to the right.
    fn growth_sign(&self) -> f64 {
        match self.side {
            Side::Right => 1.0,
            Side::Left => -1.0,
        }
    }

    /// `(conv(x), conv'(x))`.
    pub fn conv(&self, x: f64) -> (f64, f64) {
        match self.mode {
            TailMode::Threshold => (1.0, 0.0),
            TailMode::Exponential => {
                let rate = -self.growth_sign() * self.k;
                let value = (rate * x).exp();
                (value, rate * value)
            }
        }
    }

    /// `(div(x), div'(x))`.
    pub fn div(&self, x: f64) -> (f64, f64) {
        match self.mode {
            TailMode::Threshold => (x, 1.0),
            TailMode::Exponential => {
                let rate = self.growth_sign() * self.k;
                let value = (rate * x).exp();
                (value, rate * value)
            }
        }
    }

    /// `W(conv, div)`: `2k` (right), `-2k` (left) or 1 at threshold.
    pub fn conv_div_wronskian(&self) -> f64 {
        match self.mode {
            TailMode::Threshold => 1.0,
            TailMode::Exponential => self.growth_sign() * 2.0 * self.k,
        }
    }

    /// `W(conv, y)` at `x` for a solution sample `(y, y')`.
    pub fn project_convergent(&self, x: f64, y: f64, y_prime: f64) -> f64 {
        let (c, cp) = self.conv(x);
        wronskian(c, cp, y, y_prime)
    }
}

/// Tail basis for energy `energy` against asymptotic potential `v_limit`,
/// with `k = sqrt(2 (v_limit - energy))`.
pub fn asymptotic_basis(
    energy: f64,
    v_limit: f64,
    side: Side,
) -> Result<AsymptoticBasis, WronskianError> {
    if energy > v_limit {
        return Err(WronskianError::Continuum { energy, v_limit });
    }
    let k = (2.0 * (v_limit - energy)).sqrt();
    let mode = if k < THRESHOLD_K {
        TailMode::Threshold
    } else {
        TailMode::Exponential
    };
    Ok(AsymptoticBasis {
        side,
        energy,
        k,
        mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizationKind {
    GeneralDet,
    EvenW,
    OddW,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationResult {
    pub energy: f64,
    pub value: f64,
    pub kind: QuantizationKind,
    pub eval_point_left: f64,
    pub eval_point_right: f64,
}

fn node_at(pair: &SolutionPair, x: f64) -> Result<PairNode, WronskianError> {
    pair.grid
        .node_index(x)
        .map(|i| pair.node(i))
        .ok_or(WronskianError::Range {
            x,
            x_left: pair.grid.x_left(),
            x_right: pair.grid.x_right(),
        })
}

fn check_energy(pair: &SolutionPair, basis: &AsymptoticBasis) -> Result<(), WronskianError> {
    if pair.energy != basis.energy {
        return Err(WronskianError::EnergyMismatch {
            basis: basis.energy,
            pair: pair.energy,
        });
    }
    Ok(())
}

/// `(W(conv, C), W(conv, S))` at the node `x_eval`.
///
/// With a right-side exponential basis these are `[C' + kC] e^{-kx}` and
/// `[S' + kS] e^{-kx}`; at threshold they reduce to `C'` and `S'`. For an
/// even potential integrated from `x0 = 0` the zeros are the even and odd
/// bound states respectively.
pub fn parity_conditions(
    pair: &SolutionPair,
    basis: &AsymptoticBasis,
    x_eval: f64,
) -> Result<(f64, f64), WronskianError> {
    check_energy(pair, basis)?;
    let n = node_at(pair, x_eval)?;
    Ok((
        basis.project_convergent(n.x, n.c, n.c_prime),
        basis.project_convergent(n.x, n.s, n.s_prime),
    ))
}

/// `W(Lc, C) W(Rc, S) - W(Rc, C) W(Lc, S)`, with the left Wronskians read
/// at `x_left` and the right ones at `x_right`.
pub fn general_determinant(
    pair: &SolutionPair,
    basis_left: &AsymptoticBasis,
    basis_right: &AsymptoticBasis,
    x_left: f64,
    x_right: f64,
) -> Result<f64, WronskianError> {
    let (lc, ls) = parity_conditions(pair, basis_left, x_left)?;
    let (rc, rs) = parity_conditions(pair, basis_right, x_right)?;
    Ok(lc * rs - rc * ls)
}

/// Coefficient of the divergent right tail in `a2 C + b2 S`:
/// `W(conv, a2 C + b2 S) / W(conv, div)` at `x_eval`.
pub fn divergent_coefficient(
    pair: &SolutionPair,
    basis_right: &AsymptoticBasis,
    x_eval: f64,
    a2: f64,
    b2: f64,
) -> Result<f64, WronskianError> {
    if basis_right.mode == TailMode::Threshold {
        return Err(WronskianError::ThresholdDiagnostic);
    }
    let (wc, ws) = parity_conditions(pair, basis_right, x_eval)?;
    Ok((a2 * wc + b2 * ws) / basis_right.conv_div_wronskian())
}

/// Coordinates `(A, B)` of a solution sample in the canonical pair:
/// `A = W(y, S)`, `B = W(C, y)`, so that `y = A C + B S`.
pub fn project_coefficients(y: f64, y_prime: f64, node: &PairNode) -> (f64, f64) {
    (
        wronskian(y, y_prime, node.s, node.s_prime),
        wronskian(node.c, node.c_prime, y, y_prime),
    )
}

/// Spread of the parity Wronskians over the nodes in `[from, to]`,
/// relative to their values at `to`: `(even, odd)`.
pub fn plateau_variation(
    pair: &SolutionPair,
    basis: &AsymptoticBasis,
    from: f64,
    to: f64,
) -> Result<(f64, f64), WronskianError> {
    check_energy(pair, basis)?;
    let grid = &pair.grid;
    let out_of_range = |x: f64| WronskianError::Range {
        x,
        x_left: grid.x_left(),
        x_right: grid.x_right(),
    };
    if from < grid.x_left() - 1e-9 || from > grid.x_right() + 1e-9 {
        return Err(out_of_range(from));
    }
    if to < grid.x_left() - 1e-9 || to > grid.x_right() + 1e-9 || to < from {
        return Err(out_of_range(to));
    }
    let lo = grid.nearest_index(from);
    let hi = grid.nearest_index(to);
    let values: Vec<(f64, f64)> = (lo..=hi)
        .map(|i| {
            let n = pair.node(i);
            (
                basis.project_convergent(n.x, n.c, n.c_prime),
                basis.project_convergent(n.x, n.s, n.s_prime),
            )
        })
        .collect();
    let spread = |pick: fn(&(f64, f64)) -> f64| {
        let (min, max) = values
            .iter()
            .map(pick)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
        let reference = pick(values.last().unwrap()).abs();
        (max - min) / reference
    };
    Ok((spread(|v| v.0), spread(|v| v.1)))
}
