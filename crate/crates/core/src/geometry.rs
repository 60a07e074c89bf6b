//! Empirical probes of channel output sets.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::channel::Channel;
use crate::eigen::{hermitian_eigs, top_eigenpairs_from, top_eigenvalues};
use crate::error::{Error, Result};
use crate::matrix::{dot, normalize, Matrix, C64, ONE, ZERO};
use crate::random::{sample_pure_state, SeededRng};
use crate::state::{von_neumann_entropy, DensityMatrix};

/// Top of the spectrum of `Φ*(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CmProbe {
    pub a: DensityMatrix,
    pub m: usize,
    /// Descending.
    pub top_eigenvalues: Vec<f64>,
    /// `λ_1 - λ_m`.
    pub spread: f64,
    pub target: Option<f64>,
}

impl CmProbe {
    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self
    }

    pub fn error(&self) -> Option<f64> {
        self.target.map(|t| (self.top_eigenvalues[0] - t).abs())
    }
}

/// The `m` largest eigenvalues of `Φ*(A)`.
pub fn cm_probe(ch: &Channel, a: &DensityMatrix, m: usize) -> Result<CmProbe> {
    if m == 0 || m > ch.input_dim() {
        return Err(Error::OutOfRange { what: "probe depth m" });
    }
    let op = ch.adjoint_operator(a.matrix())?;
    let top = top_eigenvalues(&op, m)?;
    let spread = (top[0] - top[m - 1]).max(0.0);
    Ok(CmProbe {
        a: a.clone(),
        m,
        top_eigenvalues: top,
        spread,
        target: None,
    })
}

/// Outputs of `count` independent uniformly random pure inputs.
pub fn sample_outputs(ch: &Channel, count: usize, rng: &mut SeededRng) -> Result<Vec<DensityMatrix>> {
    if count == 0 {
        return Err(Error::EmptySample);
    }
    (0..count)
        .map(|_| {
            let x = sample_pure_state(ch.input_dim(), rng);
            DensityMatrix::normalize(&ch.apply_pure(&x)?)
        })
        .collect()
}

/// Default slack on `Tr[BA] <= f(A)`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict {
    pub b: DensityMatrix,
    /// Directions `A` with margin `Tr[BA] - f(A)` above the tolerance.
    pub violations: Vec<(DensityMatrix, f64)>,
    /// Largest margin seen over all directions.
    pub max_margin: f64,
    /// No violation found. This can only refute membership, never prove it.
    pub in_k: bool,
}

/// Tests `Tr[BA] <= f(A) + tol` over the given directions.
pub fn membership<F>(b: &DensityMatrix, f: F, directions: &[DensityMatrix], tol: f64) -> Result<MembershipVerdict>
where
    F: Fn(&DensityMatrix) -> Result<f64>,
{
    if directions.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut violations = Vec::new();
    let mut max_margin = f64::NEG_INFINITY;
    for a in directions {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                context: "membership direction",
                expected: b.dim(),
                found: a.dim(),
            });
        }
        let margin = b.overlap(a.matrix()) - f(a)?;
        max_margin = max_margin.max(margin);
        if margin > tol {
            violations.push((a.clone(), margin));
        }
    }
    Ok(MembershipVerdict {
        b: b.clone(),
        in_k: violations.is_empty(),
        violations,
        max_margin,
    })
}

const PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// Deterministic, well-spread unit vectors of `C^dim` (dim <= 12): Halton
/// points pushed through Box–Muller and normalized.
pub fn sphere_grid(dim: usize, count: usize) -> Result<Vec<Vec<C64>>> {
    if dim == 0 || 2 * dim > PRIMES.len() {
        return Err(Error::OutOfRange { what: "sphere grid dimension" });
    }
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let mut v: Vec<C64> = (0..dim)
            .map(|d| {
                let u1 = radical_inverse(i, PRIMES[2 * d]).max(1e-300);
                let u2 = radical_inverse(i, PRIMES[2 * d + 1]);
                C64::from_polar((-u1.ln()).sqrt(), 2.0 * PI * u2)
            })
            .collect();
        i += 1;
        if normalize(&mut v) > 1e-12 {
            out.push(v);
        }
    }
    Ok(out)
}

/// Rank-one directions from [`sphere_grid`] followed by `B` itself.
pub fn probe_directions(b: &DensityMatrix, count: usize) -> Result<Vec<DensityMatrix>> {
    let mut dirs: Vec<DensityMatrix> = sphere_grid(b.dim(), count)?
        .into_iter()
        .map(|v| DensityMatrix::from_trusted(Matrix::outer(&v)))
        .collect();
    dirs.push(b.clone());
    Ok(dirs)
}

/// Local search on rank-one directions `a a*` for a larger margin
/// `Tr[B aa*] - f(aa*)`: random perturbations of `a`, projected back to the
/// sphere, are kept when they improve, and the step shrinks otherwise.
pub fn refine_direction<F>(b: &DensityMatrix, f: &F, start: &[C64], steps: usize, rng: &mut SeededRng) -> Result<(DensityMatrix, f64)>
where
    F: Fn(&DensityMatrix) -> Result<f64>,
{
    let margin = |v: &[C64]| -> Result<f64> {
        let a = DensityMatrix::from_trusted(Matrix::outer(v));
        Ok(b.overlap(a.matrix()) - f(&a)?)
    };
    let mut best = start.to_vec();
    normalize(&mut best);
    let mut best_margin = margin(&best)?;
    let mut step = 0.3;
    for _ in 0..steps {
        let mut trial: Vec<C64> = best.iter().map(|z| z + rng.complex_gaussian() * step).collect();
        normalize(&mut trial);
        let m = margin(&trial)?;
        if m > best_margin {
            best = trial;
            best_margin = m;
            step = (step * 1.5).min(1.0);
        } else {
            step *= 0.95;
            if step < 1e-9 {
                break;
            }
        }
    }
    Ok((DensityMatrix::from_trusted(Matrix::outer(&best)), best_margin))
}

/// Membership over the default direction set: a sphere grid of `grid`
/// rank-one directions, `B` itself, and the three worst grid directions
/// refined by [`refine_direction`].
pub fn membership_search<F>(b: &DensityMatrix, f: F, grid: usize, rng: &mut SeededRng) -> Result<MembershipVerdict>
where
    F: Fn(&DensityMatrix) -> Result<f64>,
{
    let vectors = sphere_grid(b.dim(), grid)?;
    let mut scored = Vec::with_capacity(vectors.len());
    for v in &vectors {
        let a = DensityMatrix::from_trusted(Matrix::outer(v));
        scored.push((b.overlap(a.matrix()) - f(&a)?, v));
    }
    scored.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut dirs: Vec<DensityMatrix> = vectors
        .iter()
        .map(|v| DensityMatrix::from_trusted(Matrix::outer(v)))
        .collect();
    dirs.push(b.clone());
    for (_, v) in scored.iter().take(3) {
        dirs.push(refine_direction(b, &f, v, 400, rng)?.0);
    }
    membership(b, f, &dirs, MEMBERSHIP_TOL)
}

/// One run of alternating maximization of `a* Φ(xx*) a` over unit `a`, `x`.
#[derive(Debug, Clone)]
pub struct AscentResult {
    pub value: f64,
    /// Objective after every half-step; non-decreasing.
    pub history: Vec<f64>,
    pub x: Vec<C64>,
    pub a: Vec<C64>,
}

const ASCENT_TOL: f64 = 1e-12;

/// Alternates `a ← top eigenvector of Φ(xx*)` and
/// `x ← top eigenvector of Φ*(aa*)`, starting from `x`.
pub fn alternating_ascent(ch: &Channel, start: &[C64], iter_cap: usize) -> Result<AscentResult> {
    let mut x = start.to_vec();
    if normalize(&mut x) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut history: Vec<f64> = Vec::new();
    let mut iterations = 0;
    loop {
        let es = hermitian_eigs(&ch.apply_pure(&x)?.hermitian_part())?;
        let a = es.vector(0);
        // never step down because of rounding in an inner eigensolver
        let value = history.last().map_or(es.values[0], |&v| es.values[0].max(v));
        let previous = history.iter().rev().nth(1).copied();
        history.push(value);
        iterations += 1;
        let stalled = previous.is_some_and(|p| value - p <= ASCENT_TOL * value.abs().max(1.0));
        if stalled || iterations >= iter_cap.max(1) {
            return Ok(AscentResult { value, history, x, a });
        }
        let top = top_eigenpairs_from(&ch.adjoint_operator(&Matrix::outer(&a))?, 1, &x)?;
        if top.values[0] >= value {
            x = top.vector(0);
        }
        history.push(top.values[0].max(value));
    }
}

#[derive(Debug, Clone)]
pub struct NormEstimate {
    /// Best value over restarts, a lower bound on `‖Φ‖_{1→∞}`.
    pub value: f64,
    pub per_restart: Vec<f64>,
    /// Maximizing input and its output.
    pub best_input: Vec<C64>,
    pub best_output: DensityMatrix,
}

/// `‖Φ‖_{1→∞}` estimated by [`alternating_ascent`] from `restarts` random
/// pure inputs.
pub fn estimate_norm_one_inf(ch: &Channel, restarts: usize, iter_cap: usize, rng: &mut SeededRng) -> Result<NormEstimate> {
    if restarts == 0 {
        return Err(Error::OutOfRange { what: "restarts" });
    }
    let mut best: Option<AscentResult> = None;
    let mut per_restart = Vec::with_capacity(restarts);
    for _ in 0..restarts {
        let start = sample_pure_state(ch.input_dim(), rng);
        let run = alternating_ascent(ch, &start, iter_cap)?;
        per_restart.push(run.value);
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("restarts >= 1");
    let best_output = DensityMatrix::normalize(&ch.apply_pure(&best.x)?)?;
    Ok(NormEstimate {
        value: best.value,
        per_restart,
        best_input: best.x,
        best_output,
    })
}

/// Discrete Weyl operator `W_{a,b} = X^a Y^b` on `C^k`, with
/// `X e_l = e_{l+1}` and `Y e_l = exp(2πi l/k) e_l` (indices mod k).
pub fn weyl_operator(a: usize, b: usize, k: usize) -> Result<Matrix> {
    if k == 0 || a >= k || b >= k {
        return Err(Error::OutOfRange { what: "Weyl indices" });
    }
    let mut w = Matrix::zeros(k, k);
    for l in 0..k {
        let phase = 2.0 * PI * ((b * l) % k) as f64 / k as f64;
        w[((l + a) % k, l)] = C64::from_polar(1.0, phase);
    }
    Ok(w)
}

/// `(1/k²) Σ_{a,b} W_{a,b} A W_{a,b}*`.
pub fn weyl_twirl(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "twirl input",
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let k = a.rows();
    let mut out = Matrix::zeros(k, k);
    for p in 0..k {
        for q in 0..k {
            let w = weyl_operator(p, q, k)?;
            out.add_scaled(ONE, &w.mul_mat(a).mul_adjoint(&w));
        }
    }
    Ok(out.scale_real(1.0 / (k * k) as f64))
}

/// Smallest von Neumann entropy in a sample, an upper bound on the minimum
/// output entropy of the set the sample came from.
pub fn estimate_smin(outputs: &[DensityMatrix]) -> Result<f64> {
    if outputs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut best = f64::INFINITY;
    for rho in outputs {
        best = best.min(von_neumann_entropy(rho)?);
    }
    Ok(best)
}

/// `log k - S_min`.
pub fn holevo_from_smin(k: usize, smin: f64) -> f64 {
    (k as f64).ln() - smin
}

/// `S(Σ p_i X_i) - Σ p_i S(X_i)` for an ensemble of outputs.
pub fn holevo_lower_bound(ensemble: &[(f64, DensityMatrix)]) -> Result<f64> {
    let first = ensemble.first().ok_or(Error::EmptySample)?;
    let k = first.1.dim();
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if ensemble.iter().any(|(p, x)| *p < 0.0 || x.dim() != k) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::BadEnsemble);
    }
    let mut avg = Matrix::zeros(k, k);
    let mut mean_entropy = 0.0;
    for (p, x) in ensemble {
        avg.add_scaled(C64::new(*p, 0.0), x.matrix());
        mean_entropy += p * von_neumann_entropy(x)?;
    }
    let s_avg = von_neumann_entropy(&DensityMatrix::normalize(&avg)?)?;
    Ok((s_avg - mean_entropy).max(0.0))
}

fn orthonormal_span(vectors: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut u = v.clone();
        let scale = crate::matrix::norm(&u);
        for _ in 0..2 {
            for e in &basis {
                let c = dot(e, &u);
                crate::matrix::axpy(-c, e, &mut u);
            }
        }
        if normalize(&mut u) > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            basis.push(u);
        }
    }
    basis
}

/// A unit vector of `span(w_basis) ⊂ C^k ⊗ C^n` whose right Schmidt vectors
/// are all orthogonal to `span(t_basis) ⊂ C^n`. Exists whenever
/// `dim W > k · dim T`: such a vector is any unit vector of `W` orthogonal
/// to `C^k ⊗ T`.
pub fn orthogonal_schmidt_vector(w_basis: &[Vec<C64>], t_basis: &[Vec<C64>], k: usize, n: usize) -> Result<Vec<C64>> {
    if w_basis.iter().any(|v| v.len() != k * n) || t_basis.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch {
            context: "subspace basis vectors",
            expected: k * n,
            found: w_basis.iter().map(Vec::len).find(|&l| l != k * n).unwrap_or(n),
        });
    }
    let w = orthonormal_span(w_basis);
    let t = orthonormal_span(t_basis);
    if w.len() <= k * t.len() {
        return Err(Error::DimensionObstruction {
            subspace: w.len(),
            required: k * t.len(),
        });
    }
    let d = w.len();
    // constraint rows: <e_i ⊗ t_j, W c> = 0
    let mut c = Matrix::zeros(k * t.len(), d);
    for i in 0..k {
        for (jt, tv) in t.iter().enumerate() {
            for (col, wv) in w.iter().enumerate() {
                c[(i * t.len() + jt, col)] = dot(tv, &wv[i * n..(i + 1) * n]);
            }
        }
    }
    let coeffs = if t.is_empty() {
        let mut e = vec![ZERO; d];
        e[0] = ONE;
        e
    } else {
        let es = hermitian_eigs(&c.adjoint_mul(&c).hermitian_part())?;
        es.vector(d - 1)
    };
    let mut x = vec![ZERO; k * n];
    for (coef, wv) in coeffs.iter().zip(&w) {
        crate::matrix::axpy(*coef, wv, &mut x);
    }
    normalize(&mut x);
    Ok(x)
}
