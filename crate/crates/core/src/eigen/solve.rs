//! Shift-inverted power iteration for the smallest generalized eigenpair.

use super::{EigenError, EigenPair, Operators};
use crate::geometry::Mesh2D;
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

const MAX_ITERS: usize = 2000;

/// Restricts a symmetric sparse matrix to the rows/columns kept by `map`.
fn restrict(m: &CscMatrix<f64>, map: &[Option<usize>], n_free: usize) -> CscMatrix<f64> {
    let mut coo = CooMatrix::new(n_free, n_free);
    for (i, j, v) in m.triplet_iter() {
        if let (Some(ri), Some(rj)) = (map[i], map[j]) {
            coo.push(ri, rj, *v);
        }
    }
    CscMatrix::from(&coo)
}

/// Sparse Cholesky solve for a single right-hand side.
fn solve_vec(chol: &CscCholesky<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let dense = DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice());
    let sol = chol.solve(&dense);
    DVector::from_column_slice(sol.as_slice())
}

fn spmv(m: &CscMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(m.nrows());
    for (i, j, val) in m.triplet_iter() {
        out[i] += val * v[j];
    }
    out
}

/// Maximum absolute column sum (the induced 1-norm).
fn one_norm(m: &CscMatrix<f64>) -> f64 {
    let mut col = vec![0.0; m.ncols()];
    for (_, j, v) in m.triplet_iter() {
        col[j] += v.abs();
    }
    col.iter().fold(0.0, |a, &b| a.max(b))
}

/// Computes the smallest generalized eigenpair `K φ = μ² M φ` of the
/// assembled operators by shift-inverted power iteration at shift zero.
///
/// Symmetry-line rows are eliminated before factorization. When there are
/// none (a pure Neumann problem), the factored operator is `K + M` and the
/// constant mode is deflated against `M` after every solve, so the smallest
/// *nonzero* eigenvalue is returned. Convergence requires both a stable
/// Rayleigh quotient and a backward error `‖Kφ − μ²Mφ‖` below
/// `tol·(‖K‖₁ + μ²‖M‖₁)·‖φ‖`, the tightest scaling that stays above the
/// roundoff floor of the factored solves; the returned φ is mass-normalized,
/// zero on eliminated rows, and has a deterministic sign.
pub fn smallest_eigenpair(
    mesh: &Mesh2D,
    ops: &Operators,
    tol: f64,
) -> Result<EigenPair, EigenError> {
    if !(tol > 0.0) {
        return Err(EigenError::Invalid(format!("tolerance {tol} must be positive")));
    }
    let n = ops.n();
    if n != mesh.nodes().len() {
        return Err(EigenError::Invalid(format!(
            "{n} operator rows for {} mesh nodes",
            mesh.nodes().len()
        )));
    }
    let mut map = vec![None; n];
    let mut fixed = vec![false; n];
    for &i in ops.dirichlet() {
        fixed[i] = true;
    }
    let mut n_free = 0;
    for i in 0..n {
        if !fixed[i] {
            map[i] = Some(n_free);
            n_free += 1;
        }
    }
    if n_free == 0 {
        return Err(EigenError::Invalid("every degree of freedom is constrained".into()));
    }
    let k = restrict(ops.stiffness(), &map, n_free);
    let m = restrict(ops.mass(), &map, n_free);
    let pure_neumann = ops.dirichlet().is_empty();

    // with no essential conditions K is singular (constants); shift by M and
    // deflate the constant mode instead
    let factored = if pure_neumann { &k + &m } else { k.clone() };
    let chol = CscCholesky::factor(&factored)
        .map_err(|e| EigenError::Factorization(format!("{e:?}")))?;

    let norm_k = one_norm(&k);
    let norm_m = one_norm(&m);
    let m_ones = spmv(&m, &DVector::from_element(n_free, 1.0));
    let ones_m_ones: f64 = m_ones.sum();
    let deflate = |v: &mut DVector<f64>| {
        if pure_neumann {
            let c = v.dot(&m_ones) / ones_m_ones;
            for x in v.iter_mut() {
                *x -= c;
            }
        }
    };

    // deterministic, non-symmetric start vector
    let mut v = DVector::from_fn(n_free, |i, _| 1.0 + ((i % 7) as f64) * 0.125);
    deflate(&mut v);
    let mv = spmv(&m, &v);
    let nv = v.dot(&mv).sqrt();
    v /= nv;

    let mut rq_prev = f64::INFINITY;
    let mut rq = 0.0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..MAX_ITERS {
        let rhs = spmv(&m, &v);
        let mut w = solve_vec(&chol, &rhs);
        deflate(&mut w);
        let mw = spmv(&m, &w);
        let norm = w.dot(&mw).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(EigenError::Factorization("iteration collapsed to zero".into()));
        }
        v = w / norm;
        let kv = spmv(&k, &v);
        let mv = spmv(&m, &v);
        rq = v.dot(&kv) / v.dot(&mv);
        residual = (&kv - &mv * rq).norm();
        let scale = (norm_k + rq.abs() * norm_m) * v.norm();
        if (rq - rq_prev).abs() <= tol * (1.0 + rq.abs()) && residual <= tol * scale {
            converged = true;
            break;
        }
        rq_prev = rq;
    }
    if !converged {
        return Err(EigenError::NonConvergence { iterations: MAX_ITERS, residual });
    }

    // exact M-normalization and a deterministic sign
    let mv = spmv(&m, &v);
    v /= v.dot(&mv).sqrt();
    let (mut idx, mut best) = (0, 0.0);
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        v = -v;
    }

    let mut phi = vec![0.0; n];
    for i in 0..n {
        if let Some(r) = map[i] {
            phi[i] = v[r];
        }
    }
    Ok(EigenPair {
        mu2: rq,
        phi,
        mesh: mesh.clone(),
        weighted: mesh.weighted(),
        err_estimate: None,
    })
}
