//! Hermitian eigensolvers.
//!
//! Small matrices go through cyclic Jacobi rotations. Larger ones are reduced
//! to real symmetric tridiagonal form with Hermitian Householder reflectors
//! and finished by implicit QL. Operators that are only available through a
//! matrix-vector product use Lanczos with full reorthogonalization when only
//! the top of the spectrum is wanted.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm, normalize, Matrix, C64, ONE, ZERO};

/// Matrices up to this dimension are diagonalized by Jacobi rotations.
pub const JACOBI_MAX_DIM: usize = 64;
/// Operators up to this dimension are densified before extracting the top
/// of the spectrum.
pub const DENSE_OPERATOR_MAX_DIM: usize = 192;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-13;
const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues in non-increasing order with matching orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenSystem {
    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.column(i)
    }

    /// `Q Λ Q*`.
    pub fn reconstruct(&self) -> Matrix {
        let q = &self.vectors;
        let mut scaled = q.clone();
        for i in 0..scaled.rows() {
            for (j, z) in scaled.row_mut(i).iter_mut().enumerate() {
                *z *= self.values[j];
            }
        }
        scaled.mul_adjoint(q)
    }
}

fn check_hermitian(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "eigensolver (square matrix)",
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(Error::NonHermitian { defect });
    }
    if m.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix, descending eigenvalues.
pub fn hermitian_eigs(m: &Matrix) -> Result<EigenSystem> {
    if m.rows() <= JACOBI_MAX_DIM {
        jacobi_eigs(m)
    } else {
        householder_ql_eigs(m)
    }
}

/// Eigenvalues only, descending. Skips eigenvector accumulation on the
/// tridiagonal path.
pub fn hermitian_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    if m.rows() <= JACOBI_MAX_DIM {
        return jacobi_eigs(m).map(|e| e.values);
    }
    check_hermitian(m)?;
    let reduced = tridiagonalize(m);
    let mut d = reduced.diag;
    let mut e = reduced.offdiag_abs;
    tql(&mut d, &mut e, None)?;
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// Cyclic Jacobi rotations on the full Hermitian matrix.
pub fn jacobi_eigs(m: &Matrix) -> Result<EigenSystem> {
    check_hermitian(m)?;
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();
    let threshold = if scale > 0.0 { JACOBI_OFF_TOL * scale } else { 0.0 };

    let off_norm = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let phase = apq / g;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (zeta * zeta + 1.0).sqrt())
                } else {
                    -1.0 / (-zeta + (zeta * zeta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                for r in 0..n {
                    let x = a[(r, p)];
                    let y = a[(r, q)];
                    a[(r, p)] = x * gpp + y * gqp;
                    a[(r, q)] = x * gpq + y * gqq;
                }
                for col in 0..n {
                    let x = a[(p, col)];
                    let y = a[(q, col)];
                    a[(p, col)] = gpp.conj() * x + gqp.conj() * y;
                    a[(q, col)] = gpq.conj() * x + gqq.conj() * y;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(app - t * g, 0.0);
                a[(q, q)] = C64::new(aqq + t * g, 0.0);
                for r in 0..n {
                    let x = v[(r, p)];
                    let y = v[(r, q)];
                    v[(r, p)] = x * gpp + y * gqp;
                    v[(r, q)] = x * gpq + y * gqq;
                }
            }
        }
    }
    if !converged && off_norm(&a) > threshold {
        return Err(Error::NoConvergence {
            iterations: JACOBI_MAX_SWEEPS,
        });
    }

    let values: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    Ok(sorted_system(values, |j| v.column(j), n))
}

fn sorted_system(values: Vec<f64>, column: impl Fn(usize) -> Vec<C64>, rows: usize) -> EigenSystem {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable: ties keep solver order
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut vectors = Matrix::zeros(rows, values.len());
    let mut sorted = Vec::with_capacity(values.len());
    for (dst, &src) in order.iter().enumerate() {
        sorted.push(values[src]);
        vectors.set_column(dst, &column(src));
    }
    EigenSystem {
        values: sorted,
        vectors,
    }
}

struct Tridiagonal {
    diag: Vec<f64>,
    /// `|T[i+1][i]|`, last entry zero.
    offdiag_abs: Vec<f64>,
    /// Phases `D_i` with `T = D T_real D*`.
    phases: Vec<C64>,
    /// Householder vectors acting on indices `k+1..n`, with their `2/|u|²`.
    reflectors: Vec<(usize, Vec<C64>, f64)>,
}

fn tridiagonalize(m: &Matrix) -> Tridiagonal {
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut reflectors = Vec::new();
    let mut u = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let alpha = a[(k + 1, k)];
        let mut xnorm2 = 0.0;
        for i in (k + 1)..n {
            xnorm2 += a[(i, k)].norm_sqr();
        }
        let rest = xnorm2 - alpha.norm_sqr();
        if xnorm2 == 0.0 || rest <= 1e-300 {
            continue;
        }
        let sigma = xnorm2.sqrt();
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            ONE
        };
        let u = &mut u[..len];
        for (ui, i) in u.iter_mut().zip((k + 1)..n) {
            *ui = a[(i, k)];
        }
        u[0] += phase * sigma;
        let unorm2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / unorm2;

        // p = beta A22 u
        let p = &mut p[..len];
        for (pi, i) in p.iter_mut().zip((k + 1)..n) {
            let row = &a.row(i)[k + 1..];
            let mut acc = ZERO;
            for (aij, uj) in row.iter().zip(u.iter()) {
                acc += aij * uj;
            }
            *pi = acc * beta;
        }
        let kk = 0.5 * beta * dot(u, p).re;
        for (pi, ui) in p.iter_mut().zip(u.iter()) {
            *pi -= ui * kk;
        }
        // A22 -= u q* + q u*
        for (ii, i) in ((k + 1)..n).enumerate() {
            let ui = u[ii];
            let qi = p[ii];
            let row = &mut a.row_mut(i)[k + 1..];
            for (jj, aij) in row.iter_mut().enumerate() {
                *aij -= ui * p[jj].conj() + qi * u[jj].conj();
            }
        }
        let sub = -phase * sigma;
        a[(k + 1, k)] = sub;
        a[(k, k + 1)] = sub.conj();
        for i in (k + 2)..n {
            a[(i, k)] = ZERO;
            a[(k, i)] = ZERO;
        }
        reflectors.push((k, u.to_vec(), beta));
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut offdiag_abs = vec![0.0; n];
    let mut phases = vec![ONE; n];
    for i in 1..n {
        let t = a[(i, i - 1)];
        let mag = t.norm();
        offdiag_abs[i - 1] = mag;
        phases[i] = if mag > 0.0 { phases[i - 1] * (t / mag) } else { phases[i - 1] };
    }
    Tridiagonal {
        diag,
        offdiag_abs,
        phases,
        reflectors,
    }
}

fn householder_ql_eigs(m: &Matrix) -> Result<EigenSystem> {
    check_hermitian(m)?;
    let n = m.rows();
    let reduced = tridiagonalize(m);
    let mut d = reduced.diag.clone();
    let mut e = reduced.offdiag_abs.clone();
    let mut z: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut c = vec![0.0; n];
            c[j] = 1.0;
            c
        })
        .collect();
    tql(&mut d, &mut e, Some(&mut z))?;

    let columns: Vec<Vec<C64>> = z
        .iter()
        .map(|zc| {
            let mut x: Vec<C64> = zc
                .iter()
                .zip(&reduced.phases)
                .map(|(&r, &ph)| ph * r)
                .collect();
            for (k, u, beta) in reduced.reflectors.iter().rev() {
                let tail = &mut x[k + 1..];
                let s = dot(u, tail) * *beta;
                axpy(-s, u, tail);
            }
            x
        })
        .collect();
    Ok(sorted_system(d, |j| columns[j].clone(), n))
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix given its
/// diagonal and sub-diagonal (`offdiag[i] = T[i+1][i]`, the final entry
/// ignored). Returns descending eigenvalues and, when requested, the
/// corresponding eigenvectors (as columns of length `n`).
pub fn symmetric_tridiagonal_eigs(
    diag: &[f64],
    offdiag: &[f64],
    want_vectors: bool,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&offdiag[..n.saturating_sub(1)]);
    let mut z: Vec<Vec<f64>> = if want_vectors {
        (0..n)
            .map(|j| {
                let mut c = vec![0.0; n];
                c[j] = 1.0;
                c
            })
            .collect()
    } else {
        Vec::new()
    };
    tql(&mut d, &mut e, want_vectors.then_some(&mut z))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = if want_vectors {
        order.iter().map(|&i| z[i].clone()).collect()
    } else {
        Vec::new()
    };
    Ok((values, vectors))
}

/// Implicit QL on a symmetric tridiagonal matrix (EISPACK tql2 layout:
/// `e[i] = T[i+1][i]`, `e[n-1] = 0`). `z` holds eigenvector columns.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Vec<Vec<f64>>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence { iterations: iter });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut(i + 1);
                        let zi = &mut lo[i];
                        let zi1 = &mut hi[0];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hh = *b;
                            *b = s * *a + c * hh;
                            *a = c * *a - s * hh;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// A Hermitian linear operator available through matrix-vector products.
pub trait HermitianOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;

    fn to_dense(&self) -> Matrix {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e[j] = ONE;
            m.set_column(j, &self.apply(&e));
            e[j] = ZERO;
        }
        m
    }
}

impl HermitianOperator for Matrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.matvec(x)
    }

    fn to_dense(&self) -> Matrix {
        self.clone()
    }
}

/// The `count` largest eigenvalues (descending) with eigenvectors.
pub fn top_eigenpairs<O: HermitianOperator + ?Sized>(op: &O, count: usize) -> Result<EigenSystem> {
    let n = op.dim();
    let count = count.min(n);
    if n <= DENSE_OPERATOR_MAX_DIM {
        let full = hermitian_eigs(&op.to_dense())?;
        let mut vectors = Matrix::zeros(n, count);
        for j in 0..count {
            vectors.set_column(j, &full.vector(j));
        }
        return Ok(EigenSystem {
            values: full.values[..count].to_vec(),
            vectors,
        });
    }
    lanczos(op, count, None)
}

/// [`top_eigenpairs`] with a Krylov start vector, typically a previous
/// approximation of the top eigenvector. Dense problems ignore `start`.
pub fn top_eigenpairs_from<O: HermitianOperator + ?Sized>(op: &O, count: usize, start: &[C64]) -> Result<EigenSystem> {
    if op.dim() <= DENSE_OPERATOR_MAX_DIM || start.len() != op.dim() {
        return top_eigenpairs(op, count);
    }
    lanczos(op, count.min(op.dim()), Some(start))
}

/// The `count` largest eigenvalues (descending).
pub fn top_eigenvalues<O: HermitianOperator + ?Sized>(op: &O, count: usize) -> Result<Vec<f64>> {
    let n = op.dim();
    let count = count.min(n);
    if n <= DENSE_OPERATOR_MAX_DIM {
        let mut v = hermitian_eigenvalues(&op.to_dense())?;
        v.truncate(count);
        return Ok(v);
    }
    lanczos(op, count, None).map(|e| e.values)
}

const LANCZOS_RESIDUAL_TOL: f64 = 1e-11;

fn lanczos_start(n: usize, salt: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..n)
        .map(|i| {
            let t = (i + 1) as f64 + 0.618_033_988_749_895 * salt as f64;
            C64::new(1.0 + 0.5 * (1.7 * t + 0.3).sin(), 0.4 * (2.9 * t).cos())
        })
        .collect();
    normalize(&mut v);
    v
}

fn orthogonalize_against(w: &mut [C64], basis: &[Vec<C64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

/// Lanczos with full reorthogonalization; restarts on invariant-subspace
/// breakdown so repeated eigenvalues are resolved.
fn lanczos<O: HermitianOperator + ?Sized>(op: &O, count: usize, start: Option<&[C64]>) -> Result<EigenSystem> {
    let n = op.dim();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut q = match start {
        Some(x) => {
            // a little of the generic start keeps every eigendirection reachable
            let mut q: Vec<C64> = x.iter().zip(lanczos_start(n, 0)).map(|(a, b)| a + b * 1e-3).collect();
            if normalize(&mut q) > 0.0 {
                q
            } else {
                lanczos_start(n, 0)
            }
        }
        None => lanczos_start(n, 0),
    };
    let mut salt = 1;
    let mut next_check = (count + 10).max(20);
    let mut scale: f64 = 0.0;

    loop {
        let mut w = op.apply(&q);
        let a = dot(&q, &w).re;
        basis.push(q);
        alpha.push(a);
        orthogonalize_against(&mut w, &basis);
        let b = norm(&w);
        scale = scale.max(a.abs()).max(b);
        let m = basis.len();
        let breakdown = b <= 1e-13 * scale.max(1e-300);

        if m == n || (m >= next_check && !breakdown) {
            let (theta, s) = symmetric_tridiagonal_eigs(&alpha, &beta_padded(&beta, m), true)?;
            let tol = LANCZOS_RESIDUAL_TOL * theta[0].abs().max(theta[m - 1].abs()).max(1e-300);
            let wanted = count.min(m);
            let done = m == n || (m >= count && (0..wanted).all(|i| b * s[i][m - 1].abs() <= tol));
            if done {
                let mut vectors = Matrix::zeros(n, wanted);
                for i in 0..wanted {
                    let mut y = vec![ZERO; n];
                    for (j, qj) in basis.iter().enumerate() {
                        axpy(C64::new(s[i][j], 0.0), qj, &mut y);
                    }
                    normalize(&mut y);
                    vectors.set_column(i, &y);
                }
                return Ok(EigenSystem {
                    values: theta[..wanted].to_vec(),
                    vectors,
                });
            }
            next_check = m + (m / 4).max(10);
        }

        if breakdown {
            // invariant subspace: continue from a fresh direction
            let mut fresh = lanczos_start(n, salt);
            salt += 1;
            orthogonalize_against(&mut fresh, &basis);
            if normalize(&mut fresh) < 1e-8 {
                return Err(Error::NoConvergence { iterations: m });
            }
            beta.push(0.0);
            q = fresh;
            next_check = next_check.max(m + count + 10);
        } else {
            beta.push(b);
            for z in w.iter_mut() {
                *z /= b;
            }
            q = w;
        }
    }
}

fn beta_padded(beta: &[f64], m: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    let k = beta.len().min(m.saturating_sub(1));
    e[..k].copy_from_slice(&beta[..k]);
    e
}
