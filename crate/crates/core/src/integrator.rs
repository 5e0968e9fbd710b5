//! Fixed-step RK4 integration of the canonical solution pair.
//!
//! `C` and `S` solve `phi'' = 2 (v(x) - eps) phi` with `C(x0) = S'(x0) = 1`
//! and `C'(x0) = S(x0) = 0`. Both are advanced together as one
//! four-component state so every step shares the same potential
//! evaluations.

use thiserror::Error;

use crate::potential::Potential;

/// Integration aborts once any state component exceeds this magnitude.
pub const OVERFLOW_LIMIT: f64 = 1e300;
pub const MAX_STEP: f64 = 0.1;
pub const DEFAULT_STEP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("potential is not finite at x = {x}")]
    NonFinitePotential { x: f64 },
    #[error("solution overflowed at node x = {x}; shrink the interval or rescale")]
    Overflow { x: f64 },
}

/// Integration lattice `x0 - n_left h, ..., x0, ..., x0 + n_right h`.
///
/// Nodes are indexed from the left end, so `x0` sits at index `n_left`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x0: f64,
    h: f64,
    n_left: usize,
    n_right: usize,
}

impl Grid {
    pub fn new(x0: f64, h: f64, n_left: usize, n_right: usize) -> Result<Self, IntegrationError> {
        if !x0.is_finite() {
            return Err(IntegrationError::Grid(format!(
                "x0 must be finite, got {x0}"
            )));
        }
        if !(h > 0.0 && h <= MAX_STEP) {
            return Err(IntegrationError::Grid(format!(
                "step must lie in (0, {MAX_STEP}], got {h}"
            )));
        }
        if n_right == 0 {
            return Err(IntegrationError::Grid("n_right must be at least 1".into()));
        }
        Ok(Grid {
            x0,
            h,
            n_left,
            n_right,
        })
    }

    /// Grid with `n_left = n_right`.
    pub fn symmetric(x0: f64, h: f64, n: usize) -> Result<Self, IntegrationError> {
        Grid::new(x0, h, n, n)
    }

    /// Smallest grid around `x0` whose ends reach `x_left` and `x_right`.
    pub fn covering(x0: f64, h: f64, x_left: f64, x_right: f64) -> Result<Self, IntegrationError> {
        let steps = |d: f64| ((d / h) - 1e-9).ceil().max(0.0) as usize;
        Grid::new(x0, h, steps(x0 - x_left), steps(x_right - x0).max(1))
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn len(&self) -> usize {
        self.n_left + self.n_right + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_left(&self) -> f64 {
        self.x(0)
    }

    pub fn x_right(&self) -> f64 {
        self.x(self.len() - 1)
    }

    /// Index of the matching point `x0`.
    pub fn origin(&self) -> usize {
        self.n_left
    }

    pub fn x(&self, index: usize) -> f64 {
        self.x0 + (index as f64 - self.n_left as f64) * self.h
    }

    /// Index of the node at `x`, if `x` lies on the lattice.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let offset = (x - self.x0) / self.h;
        let k = offset.round();
        if (offset - k).abs() > 1e-6 {
            return None;
        }
        let index = k + self.n_left as f64;
        (index >= 0.0 && index < self.len() as f64).then_some(index as usize)
    }

    /// Index of the lattice node closest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let index = ((x - self.x0) / self.h).round() + self.n_left as f64;
        index.clamp(0.0, (self.len() - 1) as f64) as usize
    }
}

/// Values of `C, C', S, S'` at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairNode {
    pub x: f64,
    pub c: f64,
    pub c_prime: f64,
    pub s: f64,
    pub s_prime: f64,
}

impl PairNode {
    /// `W(C, S)`, identically 1 for the exact solutions.
    pub fn wronskian(&self) -> f64 {
        self.c * self.s_prime - self.s * self.c_prime
    }
}

/// The canonical solution pair sampled on a grid at fixed energy.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    pub grid: Grid,
    pub energy: f64,
    pub c: Vec<f64>,
    pub c_prime: Vec<f64>,
    pub s: Vec<f64>,
    pub s_prime: Vec<f64>,
}

impl SolutionPair {
    pub fn node(&self, index: usize) -> PairNode {
        PairNode {
            x: self.grid.x(index),
            c: self.c[index],
            c_prime: self.c_prime[index],
            s: self.s[index],
            s_prime: self.s_prime[index],
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = PairNode> + '_ {
        (0..self.grid.len()).map(|i| self.node(i))
    }

    /// Largest `|W(C, S) - 1|` over the grid.
    pub fn max_wronskian_deviation(&self) -> f64 {
        self.nodes()
            .map(|n| (n.wronskian() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Right-hand side of the first-order system `(y, y')' = (y', 2 (v - eps) y)`.
pub fn rhs(
    x: f64,
    y: f64,
    y_prime: f64,
    p: &Potential,
    energy: f64,
) -> Result<(f64, f64), IntegrationError> {
    let v = p.evaluate(x);
    if !v.is_finite() {
        return Err(IntegrationError::NonFinitePotential { x });
    }
    Ok((y_prime, 2.0 * (v - energy) * y))
}

fn rk4_step<const N: usize>(
    p: &Potential,
    energy: f64,
    x: f64,
    h: f64,
    y: [f64; N],
) -> Result<[f64; N], IntegrationError> {
    // Components come in (value, derivative) pairs sharing one v(x).
    let deriv = |x: f64, y: &[f64; N]| -> Result<[f64; N], IntegrationError> {
        let v = p.evaluate(x);
        if !v.is_finite() {
            return Err(IntegrationError::NonFinitePotential { x });
        }
        let q = 2.0 * (v - energy);
        let mut d = [0.0; N];
        for j in (0..N).step_by(2) {
            d[j] = y[j + 1];
            d[j + 1] = q * y[j];
        }
        Ok(d)
    };
    let axpy = |a: f64, k: &[f64; N]| -> [f64; N] {
        let mut out = y;
        for (o, k) in out.iter_mut().zip(k) {
            *o += a * k;
        }
        out
    };
    let half = 0.5 * h;
    let k1 = deriv(x, &y)?;
    let k2 = deriv(x + half, &axpy(half, &k1))?;
    let k3 = deriv(x + half, &axpy(half, &k2))?;
    let k4 = deriv(x + h, &axpy(h, &k3))?;
    let mut next = y;
    for j in 0..N {
        next[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    Ok(next)
}

/// Integrates `N/2` independent solutions from `x0` to both ends of the grid.
/// Returns one state per node, indexed like the grid.
fn integrate_states<const N: usize>(
    p: &Potential,
    energy: f64,
    grid: &Grid,
    initial: [f64; N],
) -> Result<Vec<[f64; N]>, IntegrationError> {
    let mut states = vec![[0.0; N]; grid.len()];
    let origin = grid.origin();
    states[origin] = initial;
    let check = |index: usize, state: &[f64; N]| {
        if state.iter().all(|v| v.abs() <= OVERFLOW_LIMIT) {
            Ok(())
        } else {
            Err(IntegrationError::Overflow { x: grid.x(index) })
        }
    };
    let mut state = initial;
    for i in origin..grid.len() - 1 {
        state = rk4_step(p, energy, grid.x(i), grid.h(), state)?;
        check(i + 1, &state)?;
        states[i + 1] = state;
    }
    let mut state = initial;
    for i in (1..=origin).rev() {
        state = rk4_step(p, energy, grid.x(i), -grid.h(), state)?;
        check(i - 1, &state)?;
        states[i - 1] = state;
    }
    Ok(states)
}

/// Integrates the canonical pair `C`, `S` at energy `energy` over `grid`.
pub fn integrate_pair(
    p: &Potential,
    energy: f64,
    grid: &Grid,
) -> Result<SolutionPair, IntegrationError> {
    let states = integrate_states(p, energy, grid, [1.0, 0.0, 0.0, 1.0])?;
    let mut pair = SolutionPair {
        grid: *grid,
        energy,
        c: Vec::with_capacity(states.len()),
        c_prime: Vec::with_capacity(states.len()),
        s: Vec::with_capacity(states.len()),
        s_prime: Vec::with_capacity(states.len()),
    };
    for [c, cp, s, sp] in states {
        pair.c.push(c);
        pair.c_prime.push(cp);
        pair.s.push(s);
        pair.s_prime.push(sp);
    }
    Ok(pair)
}

/// Integrates a single solution with `y(x0) = y0`, `y'(x0) = y0_prime`.
/// Returns `(y, y')` per node.
pub fn integrate_solution(
    p: &Potential,
    energy: f64,
    grid: &Grid,
    y0: f64,
    y0_prime: f64,
) -> Result<Vec<(f64, f64)>, IntegrationError> {
    Ok(integrate_states(p, energy, grid, [y0, y0_prime])?
        .into_iter()
        .map(|[y, yp]| (y, yp))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{builtin, parse_potential, Params};
    use std::f64::consts::FRAC_PI_2;

    fn zero() -> Potential {
        parse_potential("0*x").unwrap()
    }

    fn pt(v0: f64) -> Potential {
        builtin("poschl_teller", &Params::from([("v0".to_string(), v0)])).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 0.0, 1, 1).is_err());
        assert!(Grid::new(0.0, 0.2, 1, 1).is_err());
        assert!(Grid::new(0.0, 0.01, 1, 0).is_err());
        assert!(Grid::new(f64::NAN, 0.01, 1, 1).is_err());
        let g = Grid::new(1.0, 0.01, 100, 500).unwrap();
        assert_eq!(g.len(), 601);
        assert!((g.x_left() - 0.0).abs() < 1e-12);
        assert!((g.x_right() - 6.0).abs() < 1e-12);
        assert_eq!(g.node_index(1.0), Some(100));
        assert_eq!(g.node_index(5.0), Some(500));
        assert_eq!(g.node_index(5.005), None);
        assert_eq!(g.node_index(6.5), None);
        let c = Grid::covering(0.0, 0.01, -2.0, 5.0).unwrap();
        assert_eq!((c.n_left(), c.n_right()), (200, 500));
    }

    #[test]
    fn rhs_examples() {
        let p = pt(2.5);
        assert_eq!(rhs(0.0, 1.0, 0.0, &p, -1.0).unwrap(), (0.0, -3.0));
        assert_eq!(rhs(1.3, 0.0, 0.0, &p, -1.0).unwrap(), (0.0, 0.0));
        assert_eq!(rhs(0.7, 1.0, 0.0, &zero(), -0.5).unwrap(), (0.0, 1.0));
        let spike = Potential::from_fn("spike", |x: f64| {
            if (x - 25.0).abs() < 1.0 {
                f64::NAN
            } else {
                0.0
            }
        })
        .unwrap();
        assert_eq!(
            rhs(25.0, 1.0, 0.0, &spike, 0.0),
            Err(IntegrationError::NonFinitePotential { x: 25.0 })
        );
    }

    #[test]
    fn initial_conditions_exact() {
        let g = Grid::new(0.3, 0.01, 50, 70).unwrap();
        let pair = integrate_pair(&pt(6.0), -2.0, &g).unwrap();
        let n = pair.node(g.origin());
        assert_eq!((n.c, n.c_prime, n.s, n.s_prime), (1.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn free_oscillator_and_growth() {
        // h chosen so that pi/2 is a node
        let h = FRAC_PI_2 / 157.0;
        let g = Grid::new(0.0, h, 0, 157).unwrap();
        let pair = integrate_pair(&zero(), 0.5, &g).unwrap();
        let end = pair.node(157);
        assert!(end.c.abs() <= 1e-8, "{}", end.c);
        assert!((end.s - 1.0).abs() <= 1e-8);

        let g = Grid::symmetric(0.0, 0.01, 100).unwrap();
        let pair = integrate_pair(&zero(), -0.5, &g).unwrap();
        for i in [0, 200] {
            let n = pair.node(i);
            assert!((n.c - n.x.cosh()).abs() <= 1e-8);
            assert!((n.s - n.x.sinh()).abs() <= 1e-8);
        }
    }

    #[test]
    fn wronskian_conserved_on_moderate_interval() {
        let g = Grid::symmetric(0.0, 0.01, 300).unwrap();
        for eps in [-2.0, -0.7, 0.3] {
            let pair = integrate_pair(&pt(2.5), eps, &g).unwrap();
            assert!(pair.max_wronskian_deviation() <= 1e-8, "eps {eps}");
        }
    }

    #[test]
    fn mirror_symmetry_for_even_potentials() {
        let g = Grid::symmetric(0.0, 0.01, 500).unwrap();
        let pair = integrate_pair(&pt(6.0), -1.3, &g).unwrap();
        let o = g.origin();
        for j in 1..=500 {
            let (r, l) = (pair.node(o + j), pair.node(o - j));
            let scale = r.c.abs().max(r.s.abs()).max(1.0);
            assert!((r.c - l.c).abs() <= 1e-10 * scale);
            assert!((r.s + l.s).abs() <= 1e-10 * scale);
            assert!((r.c_prime + l.c_prime).abs() <= 1e-10 * scale);
            assert!((r.s_prime - l.s_prime).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn linear_combination_of_pair() {
        let p = parse_potential("-4*exp(-(x-0.5)^2) + 0.3*tanh(x)").unwrap();
        let g = Grid::new(0.2, 0.01, 300, 300).unwrap();
        let pair = integrate_pair(&p, -1.1, &g).unwrap();
        for (a, b) in [(1.0, 2.0), (-0.7, 0.25), (3.0, -1.5)] {
            let single = integrate_solution(&p, -1.1, &g, a, b).unwrap();
            for (i, (y, yp)) in single.iter().enumerate() {
                let n = pair.node(i);
                let scale = y.abs().max(1.0);
                assert!((y - (a * n.c + b * n.s)).abs() <= 1e-9 * scale);
                assert!((yp - (a * n.c_prime + b * n.s_prime)).abs() <= 1e-9 * yp.abs().max(1.0));
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        let deep = parse_potential("100 + 0*x").unwrap();
        let g = Grid::new(0.0, 0.1, 0, 10_000).unwrap();
        match integrate_pair(&deep, -100.0, &g) {
            Err(IntegrationError::Overflow { x }) => assert!(x > 0.0 && x < 1000.0),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_potential_is_reported() {
        let p = Potential::from_fn("spike", |x: f64| {
            if (x - 20.0).abs() < 0.5 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .unwrap();
        let g = Grid::new(0.0, 0.1, 0, 300).unwrap();
        assert!(matches!(
            integrate_pair(&p, -1.0, &g),
            Err(IntegrationError::NonFinitePotential { .. })
        ));
    }
}
