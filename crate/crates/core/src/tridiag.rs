//! Constant-coefficient tridiagonal operators on the interior nodes of a
//! uniform grid, with the Thomas algorithm for the implicit solve.

/// A Toeplitz tridiagonal matrix `tridiag(lower, diag, upper)` of size `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tridiagonal {
    pub lower: f64,
    pub diag: f64,
    pub upper: f64,
    pub n: usize,
}

impl Tridiagonal {
    pub fn identity(n: usize) -> Self {
        Self {
            lower: 0.0,
            diag: 1.0,
            upper: 0.0,
            n,
        }
    }

    /// `y ← A·x` with zero values outside `[0, n)`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        debug_assert!(x.len() == n && y.len() == n);
        if n == 1 {
            y[0] = self.diag * x[0];
            return;
        }
        y[0] = self.diag * x[0] + self.upper * x[1];
        for j in 1..n - 1 {
            y[j] = self.lower * x[j - 1] + self.diag * x[j] + self.upper * x[j + 1];
        }
        y[n - 1] = self.lower * x[n - 2] + self.diag * x[n - 1];
    }

    /// Solves `A·x = rhs` in place. `scratch` must hold `n` values.
    ///
    /// The matrices assembled here are strictly diagonally dominant, so no
    /// pivoting is needed.
    pub fn solve_in_place(&self, rhs: &mut [f64], scratch: &mut [f64]) {
        let n = self.n;
        debug_assert!(rhs.len() == n && scratch.len() >= n);
        let mut denom = self.diag;
        scratch[0] = self.upper / denom;
        rhs[0] /= denom;
        for j in 1..n {
            denom = self.diag - self.lower * scratch[j - 1];
            scratch[j] = self.upper / denom;
            rhs[j] = (rhs[j] - self.lower * rhs[j - 1]) / denom;
        }
        for j in (0..n - 1).rev() {
            rhs[j] -= scratch[j] * rhs[j + 1];
        }
    }
}
