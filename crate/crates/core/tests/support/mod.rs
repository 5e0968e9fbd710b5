//! Test-only oracles, independent of the shooting solver.

#![allow(dead_code)]

/// Three-point finite-difference Hamiltonian `-1/2 d^2/dx^2 + v(x)` on `n`
/// interior points of `[a, b]` with hard walls. The matrix is tridiagonal,
/// so its eigenvalues are located exactly by Sturm-sequence bisection.
pub struct FiniteDifference {
    diagonal: Vec<f64>,
    off: f64,
}

impl FiniteDifference {
    pub fn new(v: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / (n + 1) as f64;
        let diagonal = (1..=n)
            .map(|i| 1.0 / (h * h) + v(a + i as f64 * h))
            .collect();
        FiniteDifference {
            diagonal,
            off: -0.5 / (h * h),
        }
    }

    /// Number of eigenvalues strictly below `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let off2 = self.off * self.off;
        let mut count = 0;
        let mut q = 1.0;
        for (i, d) in self.diagonal.iter().enumerate() {
            q = if i == 0 {
                d - lambda
            } else {
                d - lambda - off2 / q
            };
            if q == 0.0 {
                q = -f64::EPSILON * (d.abs() + self.off.abs());
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `j`-th eigenvalue (ascending) inside `[lo, hi]`, to `tol`.
    pub fn eigenvalue(&self, j: usize, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues below `ceiling`, ascending.
    pub fn eigenvalues_below(&self, floor: f64, ceiling: f64) -> Vec<f64> {
        (0..self.count_below(ceiling))
            .map(|j| self.eigenvalue(j, floor, ceiling, 1e-12))
            .collect()
    }
}

/// Gaussian well spectrum from the finite-difference oracle on `[-10, 10]`.
pub fn gaussian_fd_spectrum(v0: f64, n: usize) -> Vec<f64> {
    let fd = FiniteDifference::new(|x| -v0 * (-x * x).exp(), -10.0, 10.0, n);
    fd.eigenvalues_below(-v0 - 1.0, 0.0)
}

/// Seeded uniform draws in `[lo, hi)`.
pub fn uniform_samples(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}
