//! Dimensionless one-dimensional potentials `v(x)`.
//!
//! A [`Potential`] bundles an evaluator with the metadata the solver needs:
//! a parity flag (even potentials use the factorized even/odd conditions)
//! and the asymptotic limits `v(-inf)`, `v(+inf)` that fix the tail bases.

pub mod expr;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use expr::{parse_expr, Expr, SyntaxError};

/// Named numeric parameters of a catalog potential, e.g. `{"v0": 6.0}`.
pub type Params = BTreeMap<String, f64>;

pub const BUILTIN_NAMES: [&str; 3] = ["poschl_teller", "gaussian", "square_well"];

const PARITY_PROBES: usize = 64;
const PARITY_TOL: f64 = 1e-10;
const LIMIT_PROBE: f64 = 1e3;
const TAIL_LATTICE_STEP: f64 = 0.5;
const TAIL_REFINE: f64 = 1e-3;
const TAIL_MIN: f64 = 1.0;
const TAIL_MAX: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error(
        "unknown built-in potential `{0}` (expected one of poschl_teller, gaussian, square_well)"
    )]
    UnknownBuiltin(String),
    #[error("parameter `{name}` of `{potential}`: {reason}")]
    Parameter {
        potential: String,
        name: String,
        reason: String,
    },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("ill-posed potential: non-finite value {value} at x = {x}")]
    IllPosed { x: f64, value: f64 },
    #[error("invalid physical scales: {0}")]
    Scales(String),
    #[error("potential does not settle to within {tol:e} of its limit on the {side} side before |x| = 50")]
    Tail { side: &'static str, tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    EvenSymmetric,
    General,
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An immutable dimensionless potential. Cloning is cheap.
#[derive(Clone)]
pub struct Potential {
    func: Evaluator,
    parity: Parity,
    v_left_limit: f64,
    v_right_limit: f64,
    label: String,
    expr: Option<Expr>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("label", &self.label)
            .field("parity", &self.parity)
            .field("v_left_limit", &self.v_left_limit)
            .field("v_right_limit", &self.v_right_limit)
            .finish_non_exhaustive()
    }
}

impl Potential {
    /// Wraps an arbitrary function, detecting parity by sampling and
    /// probing the asymptotic limits at `|x| = 1000`.
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Result<Self, PotentialError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let func: Evaluator = Arc::new(f);
        let (parity, v_left_limit, v_right_limit) = probe(&*func)?;
        Ok(Potential {
            func,
            parity,
            v_left_limit,
            v_right_limit,
            label: label.into(),
            expr: None,
        })
    }

    fn from_expr(label: String, expr: Expr) -> Result<Self, PotentialError> {
        let tree = expr.clone();
        let mut p = Potential::from_fn(label, move |x| tree.eval(x))?;
        p.expr = Some(expr);
        Ok(p)
    }

    /// A potential vanishing at both ends whose symmetry is known by construction.
    fn even_well<F>(label: String, expr: Option<Expr>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Potential {
            func: Arc::new(f),
            parity: Parity::EvenSymmetric,
            v_left_limit: 0.0,
            v_right_limit: 0.0,
            label,
            expr,
        }
    }

    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        (self.func)(x)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn v_left_limit(&self) -> f64 {
        self.v_left_limit
    }

    pub fn v_right_limit(&self) -> f64 {
        self.v_right_limit
    }

    /// Lowest continuum energy, `min(v(-inf), v(+inf))`.
    pub fn threshold(&self) -> f64 {
        self.v_left_limit.min(self.v_right_limit)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Expression-language form of the potential, when one exists.
    pub fn expression(&self) -> Option<&Expr> {
        self.expr.as_ref()
    }

    /// Forces the general (non-factorized) treatment.
    pub fn into_general(mut self) -> Self {
        self.parity = Parity::General;
        self
    }

    /// `v(x - shift)`; parity is re-detected.
    pub fn translated(&self, shift: f64) -> Result<Self, PotentialError> {
        let func = self.func.clone();
        Potential::from_fn(format!("{} shifted by {shift}", self.label), move |x| {
            func(x - shift)
        })
    }

    /// `scale * v(x)`; parity and limits carry over.
    pub fn scaled(&self, scale: f64) -> Self {
        let func = self.func.clone();
        Potential {
            func: Arc::new(move |x| scale * func(x)),
            parity: self.parity,
            v_left_limit: scale * self.v_left_limit,
            v_right_limit: scale * self.v_right_limit,
            label: format!("{scale} * ({})", self.label),
            expr: self
                .expr
                .clone()
                .map(|e| Expr::Binary(expr::BinOp::Mul, Box::new(Expr::Num(scale)), Box::new(e))),
        }
    }
}

fn probe(f: &dyn Fn(f64) -> f64) -> Result<(Parity, f64, f64), PotentialError> {
    let finite = |x: f64| {
        let value = f(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(PotentialError::IllPosed { x, value })
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e_ed0f_b0e7);
    let mut even = true;
    for _ in 0..PARITY_PROBES {
        let x: f64 = rng.random_range(-10.0..=10.0);
        let (a, b) = (finite(x)?, finite(-x)?);
        if (a - b).abs() > PARITY_TOL * a.abs().max(1.0) {
            even = false;
        }
    }
    let left = finite(-LIMIT_PROBE)?;
    let right = finite(LIMIT_PROBE)?;
    let parity = if even {
        Parity::EvenSymmetric
    } else {
        Parity::General
    };
    Ok((parity, left, right))
}

fn positive_param(potential: &str, params: &Params, name: &str) -> Result<f64, PotentialError> {
    let err = |reason: &str| PotentialError::Parameter {
        potential: potential.to_string(),
        name: name.to_string(),
        reason: reason.to_string(),
    };
    match params.get(name) {
        None => Err(err("missing")),
        Some(v) if !v.is_finite() || *v <= 0.0 => Err(err("must be a positive finite number")),
        Some(v) => Ok(*v),
    }
}

/// Catalog potentials.
///
/// * `poschl_teller` — `-v0 / cosh(x)^2`, parameter `v0`
/// * `gaussian` — `-v0 * exp(-x^2)`, parameter `v0`
/// * `square_well` — `-depth` for `|x| < half_width`, else 0
pub fn builtin(name: &str, params: &Params) -> Result<Potential, PotentialError> {
    match name {
        "poschl_teller" => {
            let v0 = positive_param(name, params, "v0")?;
            let expr = parse_expr(&format!("-{v0}/cosh(x)^2"))?;
            Ok(Potential::even_well(
                format!("poschl_teller(v0={v0})"),
                Some(expr),
                move |x| -v0 / x.cosh().powi(2),
            ))
        }
        "gaussian" => {
            let v0 = positive_param(name, params, "v0")?;
            let expr = parse_expr(&format!("-{v0}*exp(-x^2)"))?;
            Ok(Potential::even_well(
                format!("gaussian(v0={v0})"),
                Some(expr),
                move |x| -(v0 * (-(x * x)).exp()),
            ))
        }
        "square_well" => {
            let depth = positive_param(name, params, "depth")?;
            let half_width = positive_param(name, params, "half_width")?;
            Ok(Potential::even_well(
                format!("square_well(depth={depth}, half_width={half_width})"),
                None,
                move |x| if x.abs() < half_width { -depth } else { 0.0 },
            ))
        }
        other => Err(PotentialError::UnknownBuiltin(other.to_string())),
    }
}

/// Parses a potential from the expression language, e.g. `-5*exp(-x^2)`.
pub fn parse_potential(src: &str) -> Result<Potential, PotentialError> {
    let expr = parse_expr(src)?;
    Potential::from_expr(src.trim().to_string(), expr)
}

/// Mass, reduced Planck constant and length unit of a physical problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScales {
    mass: f64,
    hbar: f64,
    length_scale: f64,
}

impl PhysicalScales {
    pub fn new(mass: f64, hbar: f64, length_scale: f64) -> Result<Self, PotentialError> {
        for (name, v) in [
            ("mass", mass),
            ("hbar", hbar),
            ("length_scale", length_scale),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(PotentialError::Scales(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(PhysicalScales {
            mass,
            hbar,
            length_scale,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    /// `hbar^2 / (m L^2)`: physical energy of one dimensionless unit.
    pub fn energy_scale(&self) -> f64 {
        self.hbar * self.hbar / (self.mass * self.length_scale * self.length_scale)
    }

    pub fn to_physical_energy(&self, epsilon: f64) -> f64 {
        epsilon * self.energy_scale()
    }

    pub fn to_dimensionless_energy(&self, energy: f64) -> f64 {
        energy / self.energy_scale()
    }
}

/// Builds `v(x) = V(L x) / (hbar^2 / m L^2)` from a potential `V` of the
/// physical coordinate.
pub fn nondimensionalize<F>(
    scales: PhysicalScales,
    potential: F,
) -> Result<Potential, PotentialError>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let length = scales.length_scale();
    let unit = scales.energy_scale();
    Potential::from_fn(
        format!(
            "dimensionless(m={}, hbar={}, L={})",
            scales.mass, scales.hbar, length
        ),
        move |x| potential(length * x) / unit,
    )
}

/// Distances beyond which the potential sits within a tolerance of its
/// asymptotic limits. `left` is a (non-positive) coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCut {
    pub left: f64,
    pub right: f64,
}

pub fn tail_cut(p: &Potential, tol: f64) -> Result<TailCut, PotentialError> {
    if !(tol > 0.0) {
        return Err(PotentialError::Parameter {
            potential: p.label().to_string(),
            name: "tol".into(),
            reason: "must be positive".into(),
        });
    }
    let right = side_cut(|r| p.evaluate(r), p.v_right_limit, tol)
        .ok_or(PotentialError::Tail { side: "right", tol })?;
    let left = side_cut(|r| p.evaluate(-r), p.v_left_limit, tol)
        .ok_or(PotentialError::Tail { side: "left", tol })?;
    Ok(TailCut { left: -left, right })
}

// Distance r >= 0 beyond which |v(r) - limit| <= tol, scanning inward from
// the clamp so that interior zero crossings are not mistaken for the tail.
fn side_cut(v: impl Fn(f64) -> f64, limit: f64, tol: f64) -> Option<f64> {
    let unsettled = |r: f64| {
        let d = (v(r) - limit).abs();
        !(d <= tol)
    };
    let steps = (TAIL_MAX / TAIL_LATTICE_STEP).round() as usize;
    let last_bad = (0..=steps)
        .rev()
        .find(|&j| unsettled(j as f64 * TAIL_LATTICE_STEP));
    let cut = match last_bad {
        None => 0.0,
        Some(j) if j == steps => return None,
        Some(j) => {
            let mut lo = j as f64 * TAIL_LATTICE_STEP;
            let mut hi = lo + TAIL_LATTICE_STEP;
            while hi - lo > TAIL_REFINE {
                let mid = 0.5 * (lo + hi);
                if unsettled(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        }
    };
    Some(cut.clamp(TAIL_MIN, TAIL_MAX))
}
