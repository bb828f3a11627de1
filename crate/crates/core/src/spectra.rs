//! Low-lying spectra: dense diagonalization and a locking Lanczos solver.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, symmetric_eigen, symmetric_eigenvalues, Matrix};
use crate::operators::{HamiltonianHandle, LinearOperator, DEFAULT_DENSE_CAP};
use crate::sampler::RngStream;

/// Eigenvalues below this are counted as kernel.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum GapValue {
    Value(f64),
    /// Only kernel states were computed.
    Undetermined,
    ZeroOperator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    /// True when every computed value lies in the kernel, so the kernel may
    /// be larger than reported.
    pub kernel_dim_is_lower_bound: bool,
    pub gap: GapValue,
    pub kernel_tol: f64,
    pub ground_energy: f64,
    pub frustrated: bool,
}

impl SpectrumResult {
    /// Classifies an ascending list. `complete` marks a full spectrum.
    pub fn from_eigenvalues(eigenvalues: Vec<f64>, kernel_tol: f64, complete: bool) -> Self {
        let ground_energy = eigenvalues.first().copied().unwrap_or(0.0);
        let kernel_dim = eigenvalues.iter().filter(|&&x| x < kernel_tol).count();
        let frustrated = ground_energy >= kernel_tol;
        let gap = if frustrated {
            eigenvalues
                .iter()
                .find(|&&x| x - ground_energy >= kernel_tol)
                .map_or(GapValue::Undetermined, |&x| GapValue::Value(x - ground_energy))
        } else {
            match eigenvalues.iter().find(|&&x| x >= kernel_tol) {
                Some(&x) => GapValue::Value(x),
                None if complete && eigenvalues.iter().all(|&x| x.abs() < kernel_tol) => GapValue::ZeroOperator,
                None => GapValue::Undetermined,
            }
        };
        let kernel_dim_is_lower_bound = !complete && kernel_dim == eigenvalues.len();
        SpectrumResult { eigenvalues, kernel_dim, kernel_dim_is_lower_bound, gap, kernel_tol, ground_energy, frustrated }
    }
}

/// Smallest eigenvalue above the kernel.
pub fn spectral_gap(sr: &SpectrumResult) -> Result<f64> {
    match sr.gap {
        GapValue::Value(g) => Ok(g),
        GapValue::Undetermined => Err(Error::GapUndetermined),
        GapValue::ZeroOperator => Err(Error::ZeroOperator),
    }
}

/// All eigenvalues, ascending.
pub fn dense_eigensolve(m: &Matrix) -> Result<Vec<f64>> {
    if m.rows() > DEFAULT_DENSE_CAP {
        return Err(Error::DimensionCap { dim: m.rows() as u128, cap: DEFAULT_DENSE_CAP });
    }
    symmetric_eigenvalues(m)
}

/// Full spectrum of `H`. When the factorization `H = BBᵀ` has fewer columns
/// than `H` has rows, diagonalizes `BᵀB` and pads with the zeros it cannot
/// see.
pub fn exact_spectrum(h: &HamiltonianHandle, kernel_tol: f64) -> Result<SpectrumResult> {
    let values = if h.gram_dim() < h.dim() {
        let mut vals = symmetric_eigenvalues(&h.gram_matrix()?)?;
        vals.extend(core::iter::repeat_n(0.0, h.dim() - h.gram_dim()));
        vals.sort_by(f64::total_cmp);
        vals
    } else {
        dense_eigensolve(&h.materialize_dense()?)?
    };
    Ok(SpectrumResult::from_eigenvalues(values, kernel_tol, true))
}

/// Exact kernel dimension from the full spectrum.
pub fn kernel_dimension_exact(h: &HamiltonianHandle) -> Result<usize> {
    Ok(exact_spectrum(h, DEFAULT_KERNEL_TOL)?.kernel_dim)
}

/// Exact spectral gap above the kernel.
pub fn exact_gap(h: &HamiltonianHandle) -> Result<f64> {
    spectral_gap(&exact_spectrum(h, DEFAULT_KERNEL_TOL)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LanczosOptions {
    /// Residual `‖Hx − θx‖` required for a Ritz pair.
    pub tol: f64,
    /// Budget of operator applications.
    pub max_iter: usize,
    /// Krylov dimension per restart.
    pub krylov_dim: usize,
    pub kernel_tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { tol: 1e-9, max_iter: 50_000, krylov_dim: 80, kernel_tol: DEFAULT_KERNEL_TOL, seed: 0 }
    }
}

/// Lowest `k` eigenvalues with full reorthogonalization and locking.
///
/// Each outer run starts from a seeded random vector orthogonal to the
/// locked pairs, restarts from its best Ritz vector until the true residual
/// is below `tol`, and locks that single pair. A final run confirms nothing
/// lower than the locked values remains.
pub fn lanczos_lowest(op: &dyn LinearOperator, k: usize, opts: &LanczosOptions) -> Result<SpectrumResult> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(alloc::format!("need 1 <= k <= dim, got k={k}, dim={n}")));
    }
    let mut solver = Lanczos { op, n, opts, locked: Vec::new(), values: Vec::new(), applications: 0, best_residual: f64::INFINITY };
    let probe = solver.random_start(0);
    let mut hx = vec![0.0; n];
    op.apply(&probe, &mut hx);
    solver.applications += 1;
    if norm(&hx) == 0.0 {
        return Ok(SpectrumResult::from_eigenvalues(vec![0.0; k], opts.kernel_tol, true));
    }
    let mut run = 0u64;
    let mut probe = Some(probe);
    while solver.values.len() < k {
        let start = probe.take().unwrap_or_else(|| solver.random_start(run));
        let (theta, x) = solver.converge(start, k)?;
        solver.lock(theta, x);
        run += 1;
    }
    // confirmation: anything below the largest locked value replaces it
    for _ in 0..k {
        if solver.values.len() >= n {
            break;
        }
        let start = solver.random_start(run);
        run += 1;
        let (theta, x) = solver.converge(start, k)?;
        let top = solver.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if theta < top - opts.tol {
            let idx = solver.values.iter().position(|&v| v == top).expect("top value");
            solver.values.remove(idx);
            solver.locked.remove(idx);
            solver.lock(theta, x);
        } else {
            break;
        }
    }
    let mut values = solver.values.clone();
    values.sort_by(f64::total_cmp);
    Ok(SpectrumResult::from_eigenvalues(values, opts.kernel_tol, k == n))
}

struct Lanczos<'a> {
    op: &'a dyn LinearOperator,
    n: usize,
    opts: &'a LanczosOptions,
    locked: Vec<Vec<f64>>,
    values: Vec<f64>,
    applications: usize,
    best_residual: f64,
}

impl Lanczos<'_> {
    fn random_start(&self, run: u64) -> Vec<f64> {
        let mut rng = RngStream::new(self.opts.seed, run);
        rng.gaussian_vec(self.n)
    }

    fn deflate(&self, v: &mut [f64]) {
        for _ in 0..2 {
            for u in &self.locked {
                let c = dot(u, v);
                axpy(-c, u, v);
            }
        }
    }

    fn lock(&mut self, theta: f64, mut x: Vec<f64>) {
        self.deflate(&mut x);
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        self.locked.push(x);
        self.values.push(theta);
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if self.applications >= self.opts.max_iter {
            return Err(Error::LanczosNoConvergence {
                iterations: self.applications,
                best_residual: self.best_residual,
                converged: self.values.len(),
                requested: self.locked.len() + 1,
            });
        }
        self.applications += 1;
        self.op.apply(x, y);
        Ok(())
    }

    /// Orthonormalizes `v` against the locked vectors and `basis`, applies
    /// `H` and appends both. Returns `false` when nothing new is left.
    fn extend(&mut self, mut v: Vec<f64>, basis: &mut Vec<Vec<f64>>, images: &mut Vec<Vec<f64>>) -> Result<bool> {
        let scale = norm(&v);
        for _ in 0..2 {
            for q in basis.iter() {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
            self.deflate(&mut v);
        }
        let nv = norm(&v);
        if !(nv > 1e-10 * scale) || nv < 1e-300 {
            return Ok(false);
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let mut hv = vec![0.0; self.n];
        self.apply(&v, &mut hv)?;
        basis.push(v);
        images.push(hv);
        Ok(true)
    }

    /// Lowest Ritz pair of `H` on the complement of the locked vectors, by
    /// thick-restarted Lanczos: each restart keeps the lowest Ritz vectors
    /// and continues the Krylov sequence from the residual.
    fn converge(&mut self, start: Vec<f64>, k: usize) -> Result<(f64, Vec<f64>)> {
        let free = self.n - self.locked.len();
        let m_max = self.opts.krylov_dim.max(2 * k + 10).min(free);
        let keep = (2 * k + 4).min(m_max / 2).max(1);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max + 1);
        let mut images: Vec<Vec<f64>> = Vec::with_capacity(m_max + 1);
        let mut next = start;
        let mut attempts = 0u64;
        while !self.extend(next.clone(), &mut basis, &mut images)? {
            attempts += 1;
            next = self.random_start(self.applications as u64 + 1000 + attempts);
        }
        loop {
            let mut exhausted = false;
            while basis.len() < m_max {
                let candidate = images.last().expect("basis is non-empty").clone();
                if !self.extend(candidate, &mut basis, &mut images)? {
                    exhausted = true;
                    break;
                }
            }
            let m = basis.len();
            let mut t = Matrix::zeros(m, m);
            for i in 0..m {
                for j in 0..=i {
                    let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                    t[(i, j)] = v;
                    t[(j, i)] = v;
                }
            }
            let eig = symmetric_eigen(&t).expect("projected matrix is symmetric");
            let y = eig.vectors.expect("eigenvectors requested");
            let combine = |set: &[Vec<f64>], col: usize| {
                let mut out = vec![0.0; self.n];
                for (q, i) in set.iter().zip(0..m) {
                    axpy(y[(i, col)], q, &mut out);
                }
                out
            };
            let x = combine(&basis, 0);
            let hx = combine(&images, 0);
            let theta = eig.values[0];
            let mut r = hx.clone();
            axpy(-theta, &x, &mut r);
            // locked vectors carry residuals of their own; measure on their complement
            self.deflate(&mut r);
            let residual = norm(&r);
            self.best_residual = self.best_residual.min(residual);
            if residual < self.opts.tol || (exhausted && m == free) {
                let nx = norm(&x);
                return Ok((dot(&x, &hx) / (nx * nx), x));
            }
            let l = keep.min(m - 1).max(1);
            let new_basis: Vec<Vec<f64>> = (0..l).map(|c| combine(&basis, c)).collect();
            let new_images: Vec<Vec<f64>> = (0..l).map(|c| combine(&images, c)).collect();
            basis = new_basis;
            images = new_images;
            if !self.extend(r, &mut basis, &mut images)? {
                attempts += 1;
                let fresh = self.random_start(self.applications as u64 + 1000 + attempts);
                self.extend(fresh, &mut basis, &mut images)?;
            }
        }
    }
}


/// A kernel vector of a positive semidefinite `op`: a seeded random `x`
/// minus the least-squares solution of `Hy = Hx`, found by conjugate
/// gradients. Returns `None` when nothing of `x` survives or the result
/// still has energy above `kernel_tol`.
pub fn kernel_vector(op: &dyn LinearOperator, seed: u64, kernel_tol: f64, max_iter: usize) -> Option<Vec<f64>> {
    let n = op.dim();
    let mut rng = RngStream::new(seed, 0x6b65_726e);
    let x = rng.unit_vector(n);
    let mut hx = vec![0.0; n];
    op.apply(&x, &mut hx);
    let b = hx.clone();
    let bn = norm(&b);
    let mut y = vec![0.0; n];
    if bn > 0.0 {
        let mut res = b.clone();
        let mut dir = res.clone();
        let mut rr = dot(&res, &res);
        let mut hd = vec![0.0; n];
        for _ in 0..max_iter {
            if rr.sqrt() <= 1e-14 * bn {
                break;
            }
            op.apply(&dir, &mut hd);
            let curv = dot(&dir, &hd);
            if curv <= 0.0 {
                break;
            }
            let alpha = rr / curv;
            axpy(alpha, &dir, &mut y);
            axpy(-alpha, &hd, &mut res);
            let next = dot(&res, &res);
            let beta = next / rr;
            rr = next;
            dir.iter_mut().zip(&res).for_each(|(p, r)| *p = r + beta * *p);
        }
    }
    let mut psi: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
    let pn = norm(&psi);
    if pn < 1e-6 {
        return None;
    }
    psi.iter_mut().for_each(|v| *v /= pn);
    op.apply(&psi, &mut hx);
    (dot(&psi, &hx) < kernel_tol).then_some(psi)
}
