//! Symmetric eigensolvers.
//!
//! Two engines sit behind [`eigs_smallest`]:
//!
//! * tridiagonal operators are solved exactly by Sturm-sequence bisection followed by
//!   inverse iteration, which also gives exact eigenvalue counts via Sylvester inertia;
//! * everything else goes through Lanczos with full reorthogonalization, restarted
//!   with a fresh random direction whenever the Krylov space becomes invariant (this
//!   is what recovers repeated eigenvalues).
//!
//! Both return eigenvalues in ascending order together with explicitly computed
//! residuals `|A v - lambda v|` for unit `v`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A real symmetric linear operator acting on vectors of length [`dim`](Self::dim).
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    /// `y = A x`; `y` is fully overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// `(diagonal, off_diagonal)` when the operator is tridiagonal in the grid basis.
    fn tridiagonal(&self) -> Option<(&[f64], &[f64])> {
        None
    }
}

impl<T: SymmetricOperator + ?Sized> SymmetricOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn tridiagonal(&self) -> Option<(&[f64], &[f64])> {
        (**self).tridiagonal()
    }
}

#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n))
    }
}

impl SymmetricOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            *yi = (0..n).map(|j| self.matrix[(i, j)] * x[j]).sum();
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length");
        Self { diag, off }
    }
}

impl SymmetricOperator for TridiagonalOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        tri_apply(&self.diag, &self.off, x, y);
    }

    fn tridiagonal(&self) -> Option<(&[f64], &[f64])> {
        Some((&self.diag, &self.off))
    }
}

fn tri_apply(diag: &[f64], off: &[f64], x: &[f64], y: &mut [f64]) {
    let n = diag.len();
    for i in 0..n {
        let mut s = diag[i] * x[i];
        if i > 0 {
            s += off[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            s += off[i] * x[i + 1];
        }
        y[i] = s;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    SmallestAlgebraic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRequest {
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub which: Which,
    /// Seed for the random starting vector of iterative solvers.
    pub seed: u64,
}

impl EigenRequest {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            tol: 1e-8,
            max_iter: 20_000,
            which: Which::SmallestAlgebraic,
            seed: 0,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("requested {k} eigenpairs of a {dim}-dimensional operator")]
    TooMany { k: usize, dim: usize },
    #[error("eigen tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("no convergence after {iterations} iterations; achieved residuals {residuals:?}")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },
}

/// Eigenpairs in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub method: &'static str,
}

impl Spectrum {
    fn empty(method: &'static str) -> Self {
        Self {
            values: Vec::new(),
            vectors: Vec::new(),
            residuals: Vec::new(),
            iterations: 0,
            method,
        }
    }
}

fn check_request(req: &EigenRequest, dim: usize) -> Result<(), EigenError> {
    if !(req.tol.is_finite() && req.tol > 0.0) {
        return Err(EigenError::BadTolerance(req.tol));
    }
    if req.k > dim {
        return Err(EigenError::TooMany { k: req.k, dim });
    }
    Ok(())
}

/// The `req.k` algebraically smallest eigenpairs of a symmetric operator.
pub fn eigs_smallest<A: SymmetricOperator + ?Sized>(
    op: &A,
    req: &EigenRequest,
) -> Result<Spectrum, EigenError> {
    match op.tridiagonal() {
        Some((d, e)) => tridiagonal_smallest(d, e, req),
        None => lanczos_smallest(op, req),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual_of<A: SymmetricOperator + ?Sized>(op: &A, value: f64, v: &[f64]) -> f64 {
    let mut av = vec![0.0; v.len()];
    op.apply(v, &mut av);
    av.iter()
        .zip(v)
        .map(|(a, x)| (a - value * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------------------
// Tridiagonal: Sturm bisection + inverse iteration

/// Number of eigenvalues strictly below `x` of the symmetric tridiagonal matrix
/// (Sylvester inertia of the `LDL^T` factorization of `T - x`).
pub fn tridiagonal_count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let pivmin = pivot_floor(diag, off);
    let mut count = 0;
    let mut d = diag[0] - x;
    if d.abs() < pivmin {
        d = -pivmin;
    }
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n {
        d = diag[i] - x - off[i - 1] * off[i - 1] / d;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn pivot_floor(diag: &[f64], off: &[f64]) -> f64 {
    let max_off = off.iter().fold(0.0_f64, |m, e| m.max(e * e));
    (f64::MIN_POSITIVE * max_off.max(1.0)).max(f64::MIN_POSITIVE) * 4.0
        + f64::EPSILON * f64::EPSILON * diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()))
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let pad = f64::EPSILON * (lo.abs().max(hi.abs())).max(1.0) * 4.0;
    (lo - pad, hi + pad)
}

/// The `j`-th smallest eigenvalue (0-based) by bisection on the Sturm count.
fn tri_bisect(diag: &[f64], off: &[f64], j: usize, bounds: (f64, f64)) -> f64 {
    let (mut lo, mut hi) = bounds;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hi - lo <= 2.0 * f64::EPSILON * (lo.abs() + hi.abs()) {
            break;
        }
        if tridiagonal_count_below(diag, off, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The `j`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix, by
/// Sturm bisection alone. No eigenvector, so no residual test: useful on strongly
/// graded matrices where residuals are dominated by `eps * |T|`.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], j: usize) -> f64 {
    tri_bisect(diag, off, j, gershgorin(diag, off))
}

/// Solves `(T - shift) x = b` by Gaussian elimination with partial pivoting.
fn tri_shifted_solve(diag: &[f64], off: &[f64], shift: f64, b: &mut [f64]) {
    let n = diag.len();
    if n == 1 {
        let d = diag[0] - shift;
        b[0] /= if d.abs() > f64::MIN_POSITIVE { d } else { f64::EPSILON };
        return;
    }
    // rows stored as (a_i: diag, c_i: super, e_i: second super) after pivoting
    let mut dd: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut up: Vec<f64> = off.to_vec();
    up.push(0.0);
    let mut up2 = vec![0.0; n];
    let mut low: Vec<f64> = off.to_vec();
    let tiny = f64::EPSILON * diag.iter().fold(1e-300_f64, |m, d| m.max(d.abs()));
    for i in 0..n - 1 {
        if low[i].abs() > dd[i].abs() {
            // swap rows i and i+1
            let (a0, c0, e0) = (dd[i], up[i], up2[i]);
            dd[i] = low[i];
            up[i] = dd[i + 1];
            up2[i] = up[i + 1];
            let f = a0 / dd[i];
            dd[i + 1] = c0 - f * up[i];
            up[i + 1] = e0 - f * up2[i];
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
            low[i] = f;
        } else {
            let piv = if dd[i].abs() < tiny { tiny } else { dd[i] };
            dd[i] = piv;
            let f = low[i] / piv;
            dd[i + 1] -= f * up[i];
            b[i + 1] -= f * b[i];
            low[i] = f;
        }
    }
    if dd[n - 1].abs() < tiny {
        dd[n - 1] = tiny;
    }
    b[n - 1] /= dd[n - 1];
    b[n - 2] = (b[n - 2] - up[n - 2] * b[n - 1]) / dd[n - 2];
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - up[i] * b[i + 1] - up2[i] * b[i + 2]) / dd[i];
    }
}

/// Splits a tridiagonal matrix into unreduced blocks at negligible couplings.
fn split_blocks(diag: &[f64], off: &[f64]) -> Vec<(usize, usize)> {
    let n = diag.len();
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 0..n.saturating_sub(1) {
        let scale = diag[i].abs() + diag[i + 1].abs();
        if off[i] == 0.0 || off[i].abs() <= f64::EPSILON * scale {
            blocks.push((start, i + 1));
            start = i + 1;
        }
    }
    blocks.push((start, n));
    blocks
}

/// Smallest `k` eigenpairs of an unreduced block; vectors are local to the block.
fn block_smallest(diag: &[f64], off: &[f64], k: usize) -> Vec<(f64, Vec<f64>)> {
    let n = diag.len();
    let k = k.min(n);
    let bounds = gershgorin(diag, off);
    let scale = bounds.0.abs().max(bounds.1.abs()).max(f64::MIN_POSITIVE);
    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
    for j in 0..k {
        let value = tri_bisect(diag, off, j, bounds);
        // cluster members found so far, used to keep inverse iteration orthogonal
        let cluster: Vec<usize> = (0..out.len())
            .filter(|&i| (out[i].0 - value).abs() <= 1e-10 * scale)
            .collect();
        let shift = value + if cluster.is_empty() { 0.0 } else { 1e-14 * scale * cluster.len() as f64 };
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i * 7919 + j * 104_729) % 97) as f64 / 97.0)
            .collect();
        for _ in 0..4 {
            for &c in &cluster {
                let p = dot(&out[c].1, &x);
                for (xi, vi) in x.iter_mut().zip(&out[c].1) {
                    *xi -= p * vi;
                }
            }
            let nx = norm(&x);
            if nx == 0.0 || !nx.is_finite() {
                break;
            }
            x.iter_mut().for_each(|v| *v /= nx);
            tri_shifted_solve(diag, off, shift, &mut x);
            let nx = norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
        }
        for &c in &cluster {
            let p = dot(&out[c].1, &x);
            for (xi, vi) in x.iter_mut().zip(&out[c].1) {
                *xi -= p * vi;
            }
        }
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        out.push((value, x));
    }
    out
}

/// Smallest `k` eigenpairs of the full (possibly reducible) tridiagonal matrix.
fn tri_eigenpairs(diag: &[f64], off: &[f64], k: usize) -> Vec<(f64, Vec<f64>)> {
    let n = diag.len();
    let mut all: Vec<(f64, usize, Vec<f64>)> = Vec::new();
    for (s, e) in split_blocks(diag, off) {
        let d = &diag[s..e];
        let o = if e - s > 1 { &off[s..e - 1] } else { &off[0..0] };
        for (v, x) in block_smallest(d, o, k) {
            all.push((v, s, x));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    all.truncate(k);
    all.into_iter()
        .map(|(v, s, x)| {
            let mut full = vec![0.0; n];
            full[s..s + x.len()].copy_from_slice(&x);
            (v, full)
        })
        .collect()
}

/// Sturm-bisection eigensolver for a symmetric tridiagonal matrix.
pub fn tridiagonal_smallest(
    diag: &[f64],
    off: &[f64],
    req: &EigenRequest,
) -> Result<Spectrum, EigenError> {
    let n = diag.len();
    check_request(req, n)?;
    if req.k == 0 {
        return Ok(Spectrum::empty("sturm"));
    }
    let pairs = tri_eigenpairs(diag, off, req.k);
    let mut spec = Spectrum::empty("sturm");
    let mut y = vec![0.0; n];
    for (value, vec) in pairs {
        tri_apply(diag, off, &vec, &mut y);
        let r = y
            .iter()
            .zip(&vec)
            .map(|(a, x)| (a - value * x).powi(2))
            .sum::<f64>()
            .sqrt();
        spec.values.push(value);
        spec.residuals.push(r);
        spec.vectors.push(vec);
    }
    spec.iterations = 1;
    if spec.residuals.iter().any(|r| !(*r <= req.tol)) {
        return Err(EigenError::NoConvergence {
            iterations: 1,
            residuals: spec.residuals,
        });
    }
    Ok(spec)
}

// ---------------------------------------------------------------------------
// Lanczos

/// Lanczos with full reorthogonalization for the `k` smallest eigenpairs.
pub fn lanczos_smallest<A: SymmetricOperator + ?Sized>(
    op: &A,
    req: &EigenRequest,
) -> Result<Spectrum, EigenError> {
    let n = op.dim();
    check_request(req, n)?;
    if req.k == 0 {
        return Ok(Spectrum::empty("lanczos"));
    }
    let k = req.k;
    let cap = n.min(req.max_iter.max(k));
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cap.min(4096));
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut anorm = 0.0_f64;

    let mut v = random_unit(&mut rng, n, &basis).expect("nonempty space");
    let mut w = vec![0.0; n];
    let mut next_check = k.max(8);
    let mut last: Option<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> = None;

    while basis.len() < cap {
        op.apply(&v, &mut w);
        let a = dot(&v, &w);
        basis.push(v.clone());
        let m = basis.len();
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= a * vi;
        }
        if m >= 2 {
            let b = beta[m - 2];
            for (wi, vi) in w.iter_mut().zip(&basis[m - 2]) {
                *wi -= b * vi;
            }
        }
        for _ in 0..2 {
            for q in &basis {
                let p = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= p * qi;
                }
            }
        }
        alpha.push(a);
        let b = norm(&w);
        anorm = anorm.max(a.abs() + b + beta.last().copied().unwrap_or(0.0));
        let exhausted = m == cap;

        let breakdown = b <= 1e-12 * anorm.max(f64::MIN_POSITIVE);
        if m >= next_check || exhausted || (breakdown && m >= k) {
            next_check = m + (m / 8).max(4);
            let couple = if breakdown { 0.0 } else { b };
            let ritz = tri_eigenpairs(&alpha, &beta, k.min(m));
            let estimates: Vec<f64> = ritz
                .iter()
                .map(|(_, s)| (couple * s[m - 1]).abs())
                .collect();
            if ritz.len() == k && (estimates.iter().all(|e| *e <= 0.5 * req.tol) || exhausted) {
                let (values, vectors, residuals) = ritz_pairs(op, &basis, &ritz);
                if residuals.iter().all(|r| *r <= req.tol) {
                    return Ok(Spectrum {
                        values,
                        vectors,
                        residuals,
                        iterations: m,
                        method: "lanczos",
                    });
                }
                last = Some((values, vectors, residuals));
            }
        }
        if exhausted {
            break;
        }
        if breakdown {
            beta.push(0.0);
            match random_unit(&mut rng, n, &basis) {
                Some(fresh) => v = fresh,
                None => break,
            }
        } else {
            beta.push(b);
            v = w.iter().map(|x| x / b).collect();
        }
    }
    let residuals = match last {
        Some((_, _, r)) => r,
        None => {
            let m = alpha.len();
            beta.truncate(m.saturating_sub(1));
            let ritz = tri_eigenpairs(&alpha, &beta, k.min(m));
            ritz_pairs(op, &basis, &ritz).2
        }
    };
    Err(EigenError::NoConvergence {
        iterations: basis.len(),
        residuals,
    })
}

#[allow(clippy::type_complexity)]
fn ritz_pairs<A: SymmetricOperator + ?Sized>(
    op: &A,
    basis: &[Vec<f64>],
    ritz: &[(f64, Vec<f64>)],
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let n = op.dim();
    let mut values = Vec::with_capacity(ritz.len());
    let mut vectors = Vec::with_capacity(ritz.len());
    let mut residuals = Vec::with_capacity(ritz.len());
    for (theta, s) in ritz {
        let mut y = vec![0.0; n];
        for (q, c) in basis.iter().zip(s) {
            for (yi, qi) in y.iter_mut().zip(q) {
                *yi += c * qi;
            }
        }
        let ny = norm(&y);
        y.iter_mut().for_each(|v| *v /= ny);
        residuals.push(residual_of(op, *theta, &y));
        values.push(*theta);
        vectors.push(y);
    }
    (values, vectors, residuals)
}

/// Random unit vector orthogonal to `basis`, or `None` when the basis spans everything.
fn random_unit(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    if basis.len() >= n {
        return None;
    }
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        for _ in 0..2 {
            for q in basis {
                let p = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Dense oracles

/// Assembles the matrix of an operator column by column.
pub fn operator_to_dense<A: SymmetricOperator + ?Sized>(op: &A) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
        e[j] = 0.0;
    }
    m
}

/// Full dense diagonalization, eigenvalues ascending with matching eigenvector columns.
pub fn dense_eigen(matrix: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = 0.5 * (matrix + matrix.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(matrix.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Largest relative defect `|<u,Av> - <Au,v>| / (|u||Av| + |Au||v|)` over random pairs.
pub fn symmetry_defect<A: SymmetricOperator + ?Sized>(op: &A, trials: usize, seed: u64) -> f64 {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut au = vec![0.0; n];
    let mut av = vec![0.0; n];
    for _ in 0..trials {
        let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        op.apply(&u, &mut au);
        op.apply(&v, &mut av);
        let lhs = dot(&u, &av);
        let rhs = dot(&au, &v);
        let scale = norm(&u) * norm(&av) + norm(&au) * norm(&v);
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dirichlet_laplacian(n: usize, length: f64) -> TridiagonalOperator {
        let h = length / (n + 1) as f64;
        TridiagonalOperator::new(vec![2.0 / (h * h); n], vec![-1.0 / (h * h); n - 1])
    }

    /// Exact eigenvalues of the discrete Dirichlet Laplacian: (2/h sin(m pi h / 2L))^2.
    fn discrete_laplacian_eigenvalue(m: usize, n: usize, length: f64) -> f64 {
        let h = length / (n + 1) as f64;
        (2.0 / h * (m as f64 * PI * h / (2.0 * length)).sin()).powi(2)
    }

    #[test]
    fn dirichlet_laplacian_on_zero_pi() {
        let n = 2000;
        let op = dirichlet_laplacian(n, PI);
        let spec = eigs_smallest(&op, &EigenRequest::new(3).with_tol(1e-6)).unwrap();
        for (m, v) in spec.values.iter().enumerate() {
            let continuum = ((m + 1) * (m + 1)) as f64;
            assert!((v - continuum).abs() / continuum < 1e-4);
            let exact = discrete_laplacian_eigenvalue(m + 1, n, PI);
            assert!((v - exact).abs() < 1e-9 * exact);
        }
    }

    #[test]
    fn lanczos_on_laplacian_matches_discrete_oracle() {
        let n = 300;
        let op = dirichlet_laplacian(n, PI);
        let dense = DenseOperator::new(operator_to_dense(&op));
        let spec = lanczos_smallest(&dense, &EigenRequest::new(3).with_tol(1e-6)).unwrap();
        for (m, v) in spec.values.iter().enumerate() {
            let exact = discrete_laplacian_eigenvalue(m + 1, n, PI);
            assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");
        }
    }

    #[test]
    fn identity_has_repeated_eigenvalues() {
        let id = DenseOperator::identity(6);
        let spec = lanczos_smallest(&id, &EigenRequest::new(2)).unwrap();
        assert_eq!(spec.values.len(), 2);
        for v in &spec.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let tri = TridiagonalOperator::new(vec![1.0; 6], vec![0.0; 5]);
        let spec = eigs_smallest(&tri, &EigenRequest::new(2)).unwrap();
        assert!(spec.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert!(dot(&spec.vectors[0], &spec.vectors[1]).abs() < 1e-14);
    }

    #[test]
    fn zero_request_and_oversized_request() {
        let id = DenseOperator::identity(3);
        assert!(eigs_smallest(&id, &EigenRequest::new(0)).unwrap().values.is_empty());
        assert_eq!(
            eigs_smallest(&id, &EigenRequest::new(4)).unwrap_err(),
            EigenError::TooMany { k: 4, dim: 3 }
        );
        assert_eq!(
            eigs_smallest(&id, &EigenRequest::new(1).with_tol(0.0)).unwrap_err(),
            EigenError::BadTolerance(0.0)
        );
    }

    #[test]
    fn lanczos_reports_non_convergence() {
        let op = dirichlet_laplacian(400, PI);
        let dense = DenseOperator::new(operator_to_dense(&op));
        let err = lanczos_smallest(&dense, &EigenRequest::new(2).with_max_iter(10)).unwrap_err();
        match err {
            EigenError::NoConvergence {
                iterations,
                residuals,
            } => {
                assert_eq!(iterations, 10);
                assert_eq!(residuals.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sturm_count_matches_dense() {
        let d = vec![3.0, -1.0, 0.5, 2.0, -4.0, 1.0];
        let e = vec![1.0, -0.5, 2.0, 0.3, 1.1];
        let t = TridiagonalOperator::new(d.clone(), e.clone());
        let (vals, _) = dense_eigen(&operator_to_dense(&t));
        for x in [-5.0, -1.0, 0.0, 0.7, 2.5, 10.0] {
            let expect = vals.iter().filter(|v| **v < x).count();
            assert_eq!(tridiagonal_count_below(&d, &e, x), expect);
        }
        let spec = tridiagonal_smallest(&d, &e, &EigenRequest::new(6).with_tol(1e-12)).unwrap();
        for (a, b) in spec.values.iter().zip(&vals) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn lanczos_is_deterministic_for_a_seed() {
        let op = dirichlet_laplacian(120, 1.0);
        let dense = DenseOperator::new(operator_to_dense(&op));
        let req = EigenRequest::new(4).with_tol(1e-7).with_seed(42);
        let a = lanczos_smallest(&dense, &req).unwrap();
        let b = lanczos_smallest(&dense, &req).unwrap();
        assert_eq!(a, b);
    }
}
