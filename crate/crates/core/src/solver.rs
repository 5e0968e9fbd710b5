//! Energy and coupling searches on top of the quantization conditions.
//!
//! Scans tabulate the conditions on a uniform lattice, sign changes give
//! brackets, and each bracket is refined by bisection (or Brent, on request).
//! Even potentials integrated from `x0 = 0` use the separate even/odd
//! conditions; everything else uses the full two-sided determinant.

use std::cmp::Ordering;

use thiserror::Error;

use crate::integrator::{integrate_pair, Grid, IntegrationError, SolutionPair, DEFAULT_STEP};
use crate::potential::{tail_cut, Parity, Potential, PotentialError, TailCut};
use crate::wronskian::{
    asymptotic_basis, divergent_coefficient, general_determinant, parity_conditions,
    AsymptoticBasis, QuantizationKind, Side, TailMode, WronskianError,
};

/// Tolerance used to locate the potential tails for automatic `x_eval`.
pub const AUTO_TAIL_TOL: f64 = 1e-10;
/// Automatic `x_eval` is at least this many decay lengths.
pub const AUTO_DECAY_LENGTHS: f64 = 6.0;
pub const MAX_X_EVAL: f64 = 50.0;
/// States with `k x_eval` below this are flagged as low confidence.
pub const CONFIDENCE_DECAY: f64 = 3.0;
/// Default gap kept between the top of an energy scan and threshold.
pub const THRESHOLD_GAP: f64 = 1e-6;
pub const MIN_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("no convergence after {iterations} iterations; best bracket [{lo}, {hi}]")]
    NotConverged { lo: f64, hi: f64, iterations: usize },
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Wronskian(#[from] WronskianError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate mixture: a2 and b2 are both zero")]
    DegenerateMixture,
}

fn invalid<T>(message: impl Into<String>) -> Result<T, SolverError> {
    Err(SolverError::InvalidInput(message.into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XEval {
    /// `max(tail cut, 6/k)`, clamped to 50 and snapped to the grid.
    Auto,
    /// Fixed distance from the origin on both sides.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refiner {
    Bisection,
    Brent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub h: f64,
    pub x0: f64,
    pub x_eval: XEval,
    /// Bottom of the energy scan; defaults to the minimum sampled `v(x)`.
    pub eps_floor: Option<f64>,
    /// Top of the energy scan; defaults to threshold minus [`THRESHOLD_GAP`].
    pub eps_ceiling: Option<f64>,
    pub n_scan: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub refiner: Refiner,
    /// Worker threads for scans.
    pub jobs: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            h: DEFAULT_STEP,
            x0: 0.0,
            x_eval: XEval::Auto,
            eps_floor: None,
            eps_ceiling: None,
            n_scan: 400,
            tol: 1e-9,
            max_iter: 200,
            refiner: Refiner::Bisection,
            jobs: 1,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<(), SolverError> {
        if !(self.h > 0.0 && self.h <= crate::integrator::MAX_STEP) {
            return invalid(format!("h must lie in (0, 0.1], got {}", self.h));
        }
        if !(self.tol >= MIN_TOL) {
            return invalid(format!(
                "tol must be at least {MIN_TOL:e}, got {}",
                self.tol
            ));
        }
        if let XEval::Fixed(x) = self.x_eval {
            if !(x > self.x0.abs() && x.is_finite()) {
                return invalid(format!("x_eval must exceed |x0|, got {x}"));
            }
        }
        if self.n_scan < 2 {
            return invalid("n_scan must be at least 2");
        }
        Ok(())
    }
}

/// Result of a bracketing refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl Root {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Bisection on a sign-changing bracket until `hi - lo <= tol`; returns
/// the midpoint of the final bracket.
pub fn refine_root<F, E>(
    mut f: F,
    bracket: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Result<Root, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<RootError>,
{
    if !(tol > 0.0) {
        return Err(RootError::Tolerance(tol).into());
    }
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(Root {
            value: lo,
            lo,
            hi: lo,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            value: hi,
            lo: hi,
            hi,
            iterations: 0,
        });
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(RootError::NoSignChange { lo, hi, f_lo, f_hi }.into());
    }
    let lo_negative = f_lo < 0.0;
    let mut iterations = 0;
    while hi - lo > tol {
        if iterations == max_iter {
            return Err(RootError::NotConverged { lo, hi, iterations }.into());
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        iterations += 1;
        if f_mid == 0.0 {
            return Ok(Root {
                value: mid,
                lo: mid,
                hi: mid,
                iterations,
            });
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Root {
        value: 0.5 * (lo + hi),
        lo,
        hi,
        iterations,
    })
}

/// Brent's method (inverse quadratic interpolation with bisection
/// fallback); stops once the bracket is narrower than `tol`.
pub fn refine_root_brent<F, E>(
    mut f: F,
    bracket: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Result<Root, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<RootError>,
{
    if !(tol > 0.0) {
        return Err(RootError::Tolerance(tol).into());
    }
    let (mut a, mut b) = bracket;
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(Root {
            value: a,
            lo: a,
            hi: a,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            value: b,
            lo: b,
            hi: b,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        let (lo, hi) = (a.min(b), a.max(b));
        return Err(RootError::NoSignChange {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        }
        .into());
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iterations in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.25 * tol;
        let xm = 0.5 * (c - b);
        if (c - b).abs() <= tol || fb == 0.0 {
            let (lo, hi) = if fb == 0.0 {
                (b, b)
            } else {
                (b.min(c), b.max(c))
            };
            return Ok(Root {
                value: b,
                lo,
                hi,
                iterations,
            });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    let (lo, hi) = (b.min(c), b.max(c));
    Err(RootError::NotConverged {
        lo,
        hi,
        iterations: max_iter,
    }
    .into())
}

fn refine<F>(
    refiner: Refiner,
    f: F,
    bracket: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Result<Root, SolverError>
where
    F: FnMut(f64) -> Result<f64, SolverError>,
{
    match refiner {
        Refiner::Bisection => refine_root(f, bracket, tol, max_iter),
        Refiner::Brent => refine_root_brent(f, bracket, tol, max_iter),
    }
}

/// Quantization values at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Condition {
    Parity { even: f64, odd: f64 },
    General { det: f64 },
}

impl Condition {
    fn values(&self) -> Vec<f64> {
        match *self {
            Condition::Parity { even, odd } => vec![even, odd],
            Condition::General { det } => vec![det],
        }
    }
}

/// Everything computed at one trial energy.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub pair: SolutionPair,
    pub basis_left: AsymptoticBasis,
    pub basis_right: AsymptoticBasis,
    pub x_left: f64,
    pub x_right: f64,
    pub condition: Condition,
}

impl Evaluation {
    /// Mixture `(a2, b2)` whose divergent part vanishes on the left side;
    /// the pure even/odd solutions on the parity path.
    fn mixture(&self, parity: StateParity) -> Result<(f64, f64), SolverError> {
        Ok(match parity {
            StateParity::Even => (1.0, 0.0),
            StateParity::Odd => (0.0, 1.0),
            StateParity::None => {
                let (wc, ws) = parity_conditions(&self.pair, &self.basis_left, self.x_left)?;
                let norm = wc.hypot(ws);
                if norm == 0.0 {
                    (1.0, 0.0)
                } else {
                    (ws / norm, -wc / norm)
                }
            }
        })
    }
}

/// Per-potential setup shared by all energies of a search.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    potential: &'a Potential,
    opts: &'a SolverOptions,
    tail: Option<TailCut>,
}

impl<'a> Problem<'a> {
    pub fn new(potential: &'a Potential, opts: &'a SolverOptions) -> Result<Self, SolverError> {
        opts.validate()?;
        let tail = match opts.x_eval {
            XEval::Auto => Some(tail_cut(potential, AUTO_TAIL_TOL)?),
            XEval::Fixed(_) => None,
        };
        Ok(Problem {
            potential,
            opts,
            tail,
        })
    }

    pub fn uses_parity(&self) -> bool {
        self.potential.parity() == Parity::EvenSymmetric && self.opts.x0 == 0.0
    }

    pub fn threshold(&self) -> f64 {
        self.potential.threshold()
    }

    fn side_distance(&self, k: f64, tail: impl Fn(&TailCut) -> f64) -> f64 {
        match (self.opts.x_eval, &self.tail) {
            (XEval::Fixed(x), _) => x,
            (XEval::Auto, Some(cut)) => {
                let decay = if k > 0.0 {
                    AUTO_DECAY_LENGTHS / k
                } else {
                    f64::INFINITY
                };
                tail(cut).max(decay).min(MAX_X_EVAL)
            }
            (XEval::Auto, None) => unreachable!("tail cut is computed for automatic x_eval"),
        }
    }

    /// Grid reaching the evaluation points for energy `energy`.
    pub fn grid_for(
        &self,
        energy: f64,
    ) -> Result<(Grid, AsymptoticBasis, AsymptoticBasis), SolverError> {
        let p = self.potential;
        let basis_left = asymptotic_basis(energy, p.v_left_limit(), Side::Left)?;
        let basis_right = asymptotic_basis(energy, p.v_right_limit(), Side::Right)?;
        let h = self.opts.h;
        let x0 = self.opts.x0;
        let right = self.side_distance(basis_right.k, |c| c.right);
        let n_right = (((right - x0) / h).round() as usize).max(1);
        let n_left = if self.uses_parity() {
            0
        } else {
            let left = -self.side_distance(basis_left.k, |c| -c.left);
            (((x0 - left) / h).round() as usize).max(1)
        };
        Ok((Grid::new(x0, h, n_left, n_right)?, basis_left, basis_right))
    }

    pub fn evaluate(&self, energy: f64) -> Result<Evaluation, SolverError> {
        let (grid, basis_left, basis_right) = self.grid_for(energy)?;
        let pair = integrate_pair(self.potential, energy, &grid)?;
        let x_left = grid.x_left();
        let x_right = grid.x_right();
        let condition = if self.uses_parity() {
            let (even, odd) = parity_conditions(&pair, &basis_right, x_right)?;
            Condition::Parity { even, odd }
        } else {
            let det = general_determinant(&pair, &basis_left, &basis_right, x_left, x_right)?;
            Condition::General { det }
        };
        Ok(Evaluation {
            pair,
            basis_left,
            basis_right,
            x_left,
            x_right,
            condition,
        })
    }

    fn column(&self, energy: f64, column: usize) -> Result<f64, SolverError> {
        Ok(self.evaluate(energy)?.condition.values()[column])
    }
}

/// What a scan table's first column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    Energy,
    Coupling,
    Coordinate,
}

impl Abscissa {
    pub fn name(self) -> &'static str {
        match self {
            Abscissa::Energy => "energy",
            Abscissa::Coupling => "v0",
            Abscissa::Coordinate => "x",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub abscissa: f64,
    pub values: Vec<f64>,
}

/// A row that could not be computed (typically integration overflow).
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedRow {
    pub abscissa: f64,
    pub reason: String,
}

/// Quantization conditions tabulated against energy, coupling or coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub abscissa: Abscissa,
    pub kind: QuantizationKind,
    pub rows: Vec<ScanRow>,
    pub skipped: Vec<SkippedRow>,
}

impl ScanTable {
    pub fn columns(&self) -> Vec<&'static str> {
        let mut names = vec![self.abscissa.name()];
        match self.kind {
            QuantizationKind::GeneralDet => names.push("det"),
            _ => names.extend(["even", "odd"]),
        }
        names
    }

    fn condition_columns(&self) -> usize {
        self.columns().len() - 1
    }

    /// Sign changes of value column `column` as abscissa brackets. Exact
    /// zeros are skipped over, so an identically vanishing column yields none.
    pub fn brackets(&self, column: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut last: Option<(f64, f64)> = None;
        for row in &self.rows {
            let v = row.values[column];
            if v == 0.0 || v.is_nan() {
                continue;
            }
            if let Some((x, prev)) = last {
                if prev.signum() != v.signum() {
                    out.push((x, row.abscissa));
                }
            }
            last = Some((row.abscissa, v));
        }
        out
    }
}

fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Order-preserving parallel map over `jobs` scoped threads.
fn par_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                s.spawn(move || part.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("scan worker panicked"))
            .collect()
    })
}

fn assemble(
    abscissa: Abscissa,
    kind: QuantizationKind,
    points: &[f64],
    results: Vec<Result<Condition, SolverError>>,
) -> Result<ScanTable, SolverError> {
    let mut table = ScanTable {
        abscissa,
        kind,
        rows: Vec::with_capacity(points.len()),
        skipped: Vec::new(),
    };
    for (&x, result) in points.iter().zip(results) {
        match result {
            Ok(condition) => table.rows.push(ScanRow {
                abscissa: x,
                values: condition.values(),
            }),
            Err(SolverError::Integration(e)) => table.skipped.push(SkippedRow {
                abscissa: x,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(table)
}

fn kind_for(parity: bool) -> QuantizationKind {
    if parity {
        QuantizationKind::EvenW
    } else {
        QuantizationKind::GeneralDet
    }
}

/// Tabulates the quantization conditions on a uniform energy lattice.
pub fn scan_energy(
    p: &Potential,
    eps_min: f64,
    eps_max: f64,
    n_points: usize,
    opts: &SolverOptions,
) -> Result<ScanTable, SolverError> {
    let problem = Problem::new(p, opts)?;
    scan_energy_with(&problem, eps_min, eps_max, n_points)
}

fn scan_energy_with(
    problem: &Problem<'_>,
    eps_min: f64,
    eps_max: f64,
    n_points: usize,
) -> Result<ScanTable, SolverError> {
    if !(eps_min < eps_max) {
        return invalid(format!("empty energy range [{eps_min}, {eps_max}]"));
    }
    if eps_max > problem.threshold() {
        return invalid(format!(
            "energy range reaches above threshold {}",
            problem.threshold()
        ));
    }
    if n_points < 2 {
        return invalid("a scan needs at least two points");
    }
    let points = lattice(eps_min, eps_max, n_points);
    let results = par_map(&points, problem.opts.jobs, |&e| {
        problem.evaluate(e).map(|ev| ev.condition)
    });
    assemble(
        Abscissa::Energy,
        kind_for(problem.uses_parity()),
        &points,
        results,
    )
}

/// Potential family parameterized by a coupling strength.
pub type Family<'a> = dyn Fn(f64) -> Result<Potential, PotentialError> + Sync + 'a;

fn condition_at_threshold(
    family: &Family<'_>,
    v0: f64,
    opts: &SolverOptions,
) -> Result<(bool, Condition), SolverError> {
    let p = family(v0)?;
    let problem = Problem::new(&p, opts)?;
    let ev = problem.evaluate(problem.threshold())?;
    Ok((problem.uses_parity(), ev.condition))
}

/// Tabulates the conditions at threshold energy against the coupling.
pub fn scan_coupling(
    family: &Family<'_>,
    v_min: f64,
    v_max: f64,
    n_points: usize,
    opts: &SolverOptions,
) -> Result<ScanTable, SolverError> {
    opts.validate()?;
    if !(v_min < v_max) {
        return invalid(format!("empty coupling range [{v_min}, {v_max}]"));
    }
    if n_points < 2 {
        return invalid("a scan needs at least two points");
    }
    let points = lattice(v_min, v_max, n_points);
    let uses_parity = condition_at_threshold(family, v_min, opts)?.0;
    let results = par_map(&points, opts.jobs, |&v0| {
        condition_at_threshold(family, v0, opts).and_then(|(parity, c)| {
            if parity == uses_parity {
                Ok(c)
            } else {
                invalid(format!("family changes symmetry at v0 = {v0}"))
            }
        })
    });
    assemble(Abscissa::Coupling, kind_for(uses_parity), &points, results)
}

/// Convergent-tail Wronskians `W(Rc, C)` and `W(Rc, S)` at every node in
/// `[x_from, x_to]` for one energy.
pub fn scan_coordinate(
    p: &Potential,
    energy: f64,
    x_from: f64,
    x_to: f64,
    opts: &SolverOptions,
) -> Result<ScanTable, SolverError> {
    opts.validate()?;
    if !(x_from < x_to) {
        return invalid(format!("empty coordinate range [{x_from}, {x_to}]"));
    }
    if x_from < opts.x0 {
        return invalid("coordinate scans run to the right of x0");
    }
    let grid = Grid::covering(opts.x0, opts.h, opts.x0, x_to)?;
    let pair = integrate_pair(p, energy, &grid)?;
    let basis = asymptotic_basis(energy, p.v_right_limit(), Side::Right)?;
    let start = grid.nearest_index(x_from);
    let rows = (start..grid.len())
        .map(|i| {
            let n = pair.node(i);
            ScanRow {
                abscissa: n.x,
                values: vec![
                    basis.project_convergent(n.x, n.c, n.c_prime),
                    basis.project_convergent(n.x, n.s, n.s_prime),
                ],
            }
        })
        .collect();
    Ok(ScanTable {
        abscissa: Abscissa::Coordinate,
        kind: QuantizationKind::EvenW,
        rows,
        skipped: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateParity {
    Even,
    Odd,
    None,
}

impl StateParity {
    pub fn name(self) -> &'static str {
        match self {
            StateParity::Even => "even",
            StateParity::Odd => "odd",
            StateParity::None => "none",
        }
    }

    fn from_column(parity_path: bool, column: usize) -> Self {
        match (parity_path, column) {
            (false, _) => StateParity::None,
            (true, 0) => StateParity::Even,
            (true, _) => StateParity::Odd,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub index: usize,
    pub energy: f64,
    pub parity: StateParity,
    /// Coefficient of the divergent right tail at `x_eval`.
    pub residual_divergent: f64,
    /// Quantization condition at the accepted energy.
    pub wronskian_residual: f64,
    pub bracket_width: f64,
    pub k: f64,
    pub x_eval: f64,
    /// `k x_eval < 3`: the tail may not be resolved.
    pub low_confidence: bool,
}

/// Minimum of `v` sampled with step `h` over `[from, to]`.
fn sampled_minimum(p: &Potential, from: f64, to: f64, h: f64) -> f64 {
    let n = ((to - from) / h).ceil() as usize;
    (0..=n)
        .map(|i| p.evaluate((from + i as f64 * h).min(to)))
        .fold(f64::INFINITY, f64::min)
}

/// Energy scan window `(floor, ceiling)`: the options if set, otherwise the
/// minimum sampled `v(x)` and threshold minus [`THRESHOLD_GAP`].
pub fn energy_window(p: &Potential, opts: &SolverOptions) -> Result<(f64, f64), SolverError> {
    let threshold = p.threshold();
    let floor = match opts.eps_floor {
        Some(e) => e,
        None => {
            let cut = tail_cut(p, AUTO_TAIL_TOL).unwrap_or(TailCut {
                left: -MAX_X_EVAL,
                right: MAX_X_EVAL,
            });
            sampled_minimum(p, cut.left, cut.right, opts.h)
        }
    };
    let ceiling = opts.eps_ceiling.unwrap_or(threshold - THRESHOLD_GAP);
    if ceiling > threshold {
        return invalid(format!(
            "eps_ceiling {ceiling} lies above threshold {threshold}"
        ));
    }
    Ok((floor, ceiling))
}

/// All bound states with energies in the scan window, sorted by energy.
pub fn find_bound_states(
    p: &Potential,
    opts: &SolverOptions,
) -> Result<Vec<BoundState>, SolverError> {
    let problem = Problem::new(p, opts)?;
    let (floor, ceiling) = energy_window(p, opts)?;
    if !(floor < ceiling) {
        return Ok(Vec::new());
    }
    let table = scan_energy_with(&problem, floor, ceiling, opts.n_scan)?;
    let parity_path = problem.uses_parity();
    let mut states = Vec::new();
    for column in 0..table.condition_columns() {
        for bracket in table.brackets(column) {
            let root = refine(
                opts.refiner,
                |e| problem.column(e, column),
                bracket,
                opts.tol,
                opts.max_iter,
            )?;
            let parity = StateParity::from_column(parity_path, column);
            states.push(diagnose(&problem, root, parity, column)?);
        }
    }
    states.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap_or(Ordering::Equal));
    for (i, s) in states.iter_mut().enumerate() {
        s.index = i;
    }
    Ok(states)
}

fn diagnose(
    problem: &Problem<'_>,
    root: Root,
    parity: StateParity,
    column: usize,
) -> Result<BoundState, SolverError> {
    let ev = problem.evaluate(root.value)?;
    let (a2, b2) = ev.mixture(parity)?;
    let residual_divergent = match ev.basis_right.mode {
        TailMode::Exponential => {
            divergent_coefficient(&ev.pair, &ev.basis_right, ev.x_right, a2, b2)?
        }
        TailMode::Threshold => f64::NAN,
    };
    let k = ev.basis_right.k;
    let decay = if problem.uses_parity() {
        k * ev.x_right
    } else {
        (k * ev.x_right).min(ev.basis_left.k * -ev.x_left)
    };
    Ok(BoundState {
        index: 0,
        energy: root.value,
        parity,
        residual_divergent,
        wronskian_residual: ev.condition.values()[column],
        bracket_width: root.width(),
        k,
        x_eval: ev.x_right,
        low_confidence: decay < CONFIDENCE_DECAY,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalCoupling {
    pub index: usize,
    pub coupling: f64,
    pub parity: StateParity,
}

/// Couplings in `[v_min, v_max]` at which a new bound state reaches
/// threshold, located with the threshold tail basis `{1, x}`.
pub fn critical_couplings(
    family: &Family<'_>,
    v_min: f64,
    v_max: f64,
    n_scan: usize,
    tol: f64,
    opts: &SolverOptions,
) -> Result<Vec<CriticalCoupling>, SolverError> {
    let table = scan_coupling(family, v_min, v_max, n_scan, opts)?;
    let parity_path = table.kind != QuantizationKind::GeneralDet;
    let mut found = Vec::new();
    for column in 0..table.condition_columns() {
        for bracket in table.brackets(column) {
            let root = refine(
                opts.refiner,
                |v0| Ok(condition_at_threshold(family, v0, opts)?.1.values()[column]),
                bracket,
                tol,
                opts.max_iter,
            )?;
            found.push(CriticalCoupling {
                index: 0,
                coupling: root.value,
                parity: StateParity::from_column(parity_path, column),
            });
        }
    }
    found.sort_by(|a, b| {
        a.coupling
            .partial_cmp(&b.coupling)
            .unwrap_or(Ordering::Equal)
    });
    for (i, c) in found.iter_mut().enumerate() {
        c.index = i;
    }
    Ok(found)
}

/// Closed-form Pöschl–Teller energies for `v(x) = -v0 / cosh^2(x)`:
/// `eps_n = -(lambda - 1 - n)^2 / 2` for `n < lambda - 1`, with
/// `lambda = (1 + sqrt(1 + 8 v0)) / 2`. A level sitting exactly at zero is
/// not counted as bound.
pub fn exact_poschl_teller(v0: f64) -> Result<Vec<f64>, SolverError> {
    if !(v0 > 0.0 && v0.is_finite()) {
        return invalid(format!("v0 must be positive, got {v0}"));
    }
    let lambda = 0.5 * (1.0 + (1.0 + 8.0 * v0).sqrt());
    Ok((0..)
        .map(|n| n as f64)
        .take_while(|&n| n < lambda - 1.0)
        .map(|n| -0.5 * (lambda - 1.0 - n).powi(2))
        .collect())
}

/// Which combination of the canonical pair to assemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mixture {
    Even,
    Odd,
    Custom { a2: f64, b2: f64 },
}

impl Mixture {
    pub fn coefficients(self) -> (f64, f64) {
        match self {
            Mixture::Even => (1.0, 0.0),
            Mixture::Odd => (0.0, 1.0),
            Mixture::Custom { a2, b2 } => (a2, b2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefunctionSample {
    pub x: f64,
    pub phi: f64,
    pub phi_prime: f64,
}

/// Unnormalized `a2 C + b2 S` with its truncation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    pub energy: f64,
    pub a2: f64,
    pub b2: f64,
    pub samples: Vec<WavefunctionSample>,
    /// Where `|phi|` bottoms out on the right before the spurious
    /// divergent tail takes over.
    pub truncation_x: f64,
    pub k: f64,
    pub x_eval: f64,
    /// Divergent right-tail coefficient at `x_eval`; `None` at threshold.
    pub divergent_coefficient: Option<f64>,
}

/// Samples the wavefunction on a grid symmetric about `x0` reaching the
/// right evaluation point.
pub fn wavefunction(
    p: &Potential,
    energy: f64,
    mixture: Mixture,
    opts: &SolverOptions,
) -> Result<Wavefunction, SolverError> {
    let (a2, b2) = mixture.coefficients();
    if a2 == 0.0 && b2 == 0.0 {
        return Err(SolverError::DegenerateMixture);
    }
    let problem = Problem::new(p, opts)?;
    let (right_grid, _, basis_right) = problem.grid_for(energy)?;
    let grid = Grid::symmetric(opts.x0, opts.h, right_grid.n_right())?;
    let pair = integrate_pair(p, energy, &grid)?;
    let samples: Vec<WavefunctionSample> = pair
        .nodes()
        .map(|n| WavefunctionSample {
            x: n.x,
            phi: a2 * n.c + b2 * n.s,
            phi_prime: a2 * n.c_prime + b2 * n.s_prime,
        })
        .collect();
    let origin = grid.origin();
    // last classically allowed node on the right
    let turning = (origin..grid.len())
        .rev()
        .find(|&i| p.evaluate(grid.x(i)) <= energy)
        .unwrap_or(origin);
    let truncation = (turning..grid.len())
        .min_by(|&i, &j| {
            samples[i]
                .phi
                .abs()
                .partial_cmp(&samples[j].phi.abs())
                .unwrap_or(Ordering::Equal)
        })
        .unwrap_or(turning);
    let x_eval = grid.x_right();
    let divergent = match basis_right.mode {
        TailMode::Exponential => Some(divergent_coefficient(&pair, &basis_right, x_eval, a2, b2)?),
        TailMode::Threshold => None,
    };
    Ok(Wavefunction {
        energy,
        a2,
        b2,
        samples,
        truncation_x: grid.x(truncation),
        k: basis_right.k,
        x_eval,
        divergent_coefficient: divergent,
    })
}
