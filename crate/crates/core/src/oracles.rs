//! Closed-form limit values.
//!
//! `psi(a)` is the operator norm of `Σ a_i u_i` for free Haar unitaries,
//! `psi_star(w)` its maximum over real unit `a` after weighting by `√w`,
//! and the remaining functions are the limits that follow from these.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::channel::WeightVector;
use crate::error::{Error, Result};
use crate::matrix::{norm, Matrix, C64};
use crate::state::DensityMatrix;

/// Largest `k` accepted by [`psi_star`] (the search visits `2^k - 1` subsets).
pub const PSI_STAR_MAX_K: usize = 20;

/// Slack on the subset validity test, so that boundary cases such as
/// `min w = γ|#J - 2|` survive rounding in `γ`.
const VALIDITY_SLACK: f64 = 1e-12;
const TIE_TOL: f64 = 1e-14;

fn bisect_root(b: &[f64]) -> f64 {
    let k = b.len() as f64;
    let f = |x: f64| 2.0 - k + b.iter().map(|&bi| x / (x * x + bi).sqrt()).sum::<f64>();
    let max = b.iter().copied().fold(0.0, f64::max).sqrt();
    let (mut lo, mut hi) = (0.0, k * max);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer `x* >= 0` of `(2-k)x + Σ √(x² + b_i)`, the root of
/// `F(x) = 2 - k + Σ x/√(x² + b_i)` when `F(0) < 0` and `0` otherwise.
pub fn psi_derivative_root(b: &[f64]) -> Result<f64> {
    if b.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::OutOfRange { what: "squared moduli" });
    }
    if b.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateInput);
    }
    let zeros = b.iter().filter(|&&v| v == 0.0).count() as f64;
    if 2.0 - b.len() as f64 + zeros >= 0.0 {
        return Ok(0.0);
    }
    Ok(bisect_root(b))
}

/// `min_{x>=0} (2-k)x + Σ √(x² + |a_i|²)`.
pub fn psi(a: &[C64]) -> Result<f64> {
    let b: Vec<f64> = a.iter().map(|z| z.norm_sqr()).collect();
    psi_from_squares(&b)
}

/// [`psi`] for real coefficients.
pub fn psi_real(a: &[f64]) -> Result<f64> {
    let b: Vec<f64> = a.iter().map(|x| x * x).collect();
    psi_from_squares(&b)
}

fn psi_from_squares(b: &[f64]) -> Result<f64> {
    if b.is_empty() || b.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let x = psi_derivative_root(b)?;
    let k = b.len() as f64;
    Ok((2.0 - k) * x + b.iter().map(|&bi| (x * x + bi).sqrt()).sum::<f64>())
}

/// One subset `J` of `[k]` (0-based indices) and its stationary-point data.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetEvaluation {
    pub subset: Vec<usize>,
    /// `Σ_J w_j`
    pub beta: f64,
    /// `(Σ_J 1/w_j)^{-1}`
    pub gamma: f64,
    /// `min_J w_j >= γ |#J - 2|`
    pub valid: bool,
    /// `√(β - γ(#J-2)²)`
    pub h: f64,
    /// Unit vector supported on `J`, present for valid subsets.
    pub candidate: Option<Vec<f64>>,
}

fn subset_stats(w: &[f64], subset: &[usize]) -> (f64, f64, f64) {
    let beta: f64 = subset.iter().map(|&j| w[j]).sum();
    let inv_gamma: f64 = subset.iter().map(|&j| 1.0 / w[j]).sum();
    let min = subset.iter().map(|&j| w[j]).fold(f64::INFINITY, f64::min);
    (beta, 1.0 / inv_gamma, min)
}

fn h_value(beta: f64, gamma: f64, size: usize) -> f64 {
    let m = size as f64 - 2.0;
    (beta - gamma * m * m).max(0.0).sqrt()
}

fn is_valid(min: f64, gamma: f64, size: usize) -> bool {
    let m = (size as f64 - 2.0).abs();
    min >= gamma * m - VALIDITY_SLACK * min.max(gamma)
}

fn candidate(w: &[f64], subset: &[usize], beta: f64, gamma: f64) -> Vec<f64> {
    let m = subset.len() as f64 - 2.0;
    let denom = beta - gamma * m * m;
    let mut a = vec![0.0; w.len()];
    if subset.len() == 1 || denom <= 0.0 {
        a[subset[0]] = 1.0;
        return a;
    }
    for &j in subset {
        let num = w[j] - gamma * gamma * m * m / w[j];
        a[j] = (num.max(0.0) / denom).sqrt();
    }
    // exact renormalization absorbs the rounding of the clamp above
    let n = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    a.iter_mut().for_each(|x| *x /= n);
    a
}

/// Evaluates a non-empty subset `J` (0-based, any order, no repeats).
pub fn evaluate_subset(w: &WeightVector, subset: &[usize]) -> Result<SubsetEvaluation> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let k = w.len();
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() || sorted.iter().any(|&j| j >= k) {
        return Err(Error::OutOfRange { what: "subset index" });
    }
    let w = w.as_slice();
    let (beta, gamma, min) = subset_stats(w, &sorted);
    let valid = is_valid(min, gamma, sorted.len());
    let h = h_value(beta, gamma, sorted.len());
    let candidate = valid.then(|| candidate(w, &sorted, beta, gamma));
    Ok(SubsetEvaluation {
        subset: sorted,
        beta,
        gamma,
        valid,
        h,
        candidate,
    })
}

/// Iterates over every non-empty subset of `[k]` in mask order.
pub fn all_subset_evaluations(w: &WeightVector) -> Result<impl Iterator<Item = SubsetEvaluation> + '_> {
    let k = w.len();
    if k > PSI_STAR_MAX_K {
        return Err(Error::CapacityExceeded { k, max: PSI_STAR_MAX_K });
    }
    Ok((1u32..(1u32 << k)).map(move |mask| {
        let subset: Vec<usize> = (0..k).filter(|j| mask & (1 << j) != 0).collect();
        evaluate_subset(w, &subset).expect("mask subsets are non-empty and in range")
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiStarResult {
    pub value: f64,
    pub argmax_subset: Vec<usize>,
    pub argmax_a: Vec<f64>,
    /// Number of subsets examined (1 when the full set is valid).
    pub evaluated: usize,
}

/// `max_{‖a‖₂ = 1} psi(a ∘ √w)`, as the largest `h(J)` over valid subsets.
///
/// When `J = [k]` is valid it is the answer, since `h` increases along
/// inclusion. Otherwise all subsets are enumerated; ties go to the
/// lexicographically smallest subset.
pub fn psi_star(w: &WeightVector) -> Result<PsiStarResult> {
    let k = w.len();
    if k < 2 {
        return Err(Error::OutOfRange { what: "number of weights (need k >= 2)" });
    }
    if k > PSI_STAR_MAX_K {
        return Err(Error::CapacityExceeded { k, max: PSI_STAR_MAX_K });
    }
    let full: Vec<usize> = (0..k).collect();
    let whole = evaluate_subset(w, &full)?;
    if whole.valid {
        return Ok(PsiStarResult {
            value: whole.h,
            argmax_subset: whole.subset,
            argmax_a: whole.candidate.expect("valid subsets carry a candidate"),
            evaluated: 1,
        });
    }
    let ws = w.as_slice();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluated = 0;
    for mask in 1u32..(1u32 << k) {
        evaluated += 1;
        let subset: Vec<usize> = (0..k).filter(|j| mask & (1 << j) != 0).collect();
        let (beta, gamma, min) = subset_stats(ws, &subset);
        if !is_valid(min, gamma, subset.len()) {
            continue;
        }
        let h = h_value(beta, gamma, subset.len());
        let better = match &best {
            None => true,
            Some((bh, bj)) => h > bh + TIE_TOL || ((h - bh).abs() <= TIE_TOL && subset < *bj),
        };
        if better {
            best = Some((h, subset));
        }
    }
    // pairs are always valid, so k >= 2 guarantees a winner
    let (_, subset) = best.expect("some subset is valid");
    let eval = evaluate_subset(w, &subset)?;
    Ok(PsiStarResult {
        value: eval.h,
        argmax_subset: eval.subset,
        argmax_a: eval.candidate.expect("valid subsets carry a candidate"),
        evaluated,
    })
}

/// `max_i Tr[A σ_i]`, the limit of the top eigenvalue of `Φ_n*(A)` for
/// entanglement-breaking channels with norm-one POVM elements.
pub fn eb_limit_f(a: &Matrix, states: &[DensityMatrix]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut best = f64::NEG_INFINITY;
    for s in states {
        if s.dim() != a.rows() || !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "probe vs output state",
                expected: s.dim(),
                found: a.rows(),
            });
        }
        best = best.max(s.overlap(a));
    }
    Ok(best)
}

/// `f_w(a a*) = psi(a ∘ √w)²` for a unit vector `a`.
pub fn fw_rank_one(a: &[C64], w: &WeightVector) -> Result<f64> {
    if a.len() != w.len() {
        return Err(Error::DimensionMismatch {
            context: "probe vector vs weights",
            expected: w.len(),
            found: a.len(),
        });
    }
    let nrm = norm(a);
    if (nrm - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnitVector { norm: nrm });
    }
    let scaled: Vec<C64> = a.iter().zip(w.sqrt()).map(|(z, s)| z * s).collect();
    psi(&scaled).map(|p| p * p)
}

/// Limit of the 1 -> ∞ norm of random mixed-unitary channels, `psi_star(w)²`.
pub fn mixed_unitary_norm_limit(w: &WeightVector) -> Result<f64> {
    psi_star(w).map(|r| r.value * r.value)
}

fn check_peak_args(k: usize, t: f64) -> Result<()> {
    if k < 2 {
        return Err(Error::OutOfRange { what: "output dimension k (need k >= 2)" });
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::OutOfRange { what: "t (need 0 < t < 1)" });
    }
    Ok(())
}

/// Largest eigenvalue `a` of the output minimizing every Rényi entropy over
/// the limit set of random Stinespring channels with `N ~ t·k·n`.
pub fn stinespring_peak_eigenvalue(k: usize, t: f64) -> Result<f64> {
    check_peak_args(k, t)?;
    let kf = k as f64;
    if t + 1.0 / kf >= 1.0 {
        return Ok(1.0);
    }
    Ok(t + 1.0 / kf - 2.0 * t / kf + 2.0 * (t * (1.0 - t) * (kf - 1.0)).sqrt() / kf)
}

/// The full minimizer spectrum `(a, b, …, b)` with `b = (1-a)/(k-1)`.
pub fn stinespring_minimizer_profile(k: usize, t: f64) -> Result<Vec<f64>> {
    let a = stinespring_peak_eigenvalue(k, t)?;
    let b = (1.0 - a) / (k as f64 - 1.0);
    let mut p = vec![b; k];
    p[0] = a;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_weights, SeededRng};
    use proptest::prelude::*;

    fn real(a: &[f64]) -> Vec<C64> {
        a.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    fn g(a: &[f64], x: f64) -> f64 {
        (2.0 - a.len() as f64) * x + a.iter().map(|ai| (x * x + ai * ai).sqrt()).sum::<f64>()
    }

    /// Golden-section minimization of the convex objective on `[0, hi]`.
    fn golden_psi(a: &[f64]) -> f64 {
        let hi = a.len() as f64 * a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut up) = (0.0, hi);
        for _ in 0..200 {
            let x1 = up - r * (up - lo);
            let x2 = lo + r * (up - lo);
            if g(a, x1) <= g(a, x2) {
                up = x2;
            } else {
                lo = x1;
            }
        }
        g(a, 0.5 * (lo + up)).min(g(a, 0.0))
    }

    #[test]
    fn psi_examples() {
        assert!((psi(&real(&[1.0, 0.0, 0.0])).unwrap() - 1.0).abs() < 1e-14);
        assert!((psi(&real(&[0.5; 4])).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!((psi(&real(&[0.25; 4])).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(psi(&real(&[0.0, 0.0])), Err(Error::ZeroVector));
    }

    #[test]
    fn psi_pair_matches_grid() {
        let a = [0.6, 0.8];
        let grid = (0..=2_000_000).map(|i| g(&a, i as f64 * 1e-6)).fold(f64::INFINITY, f64::min);
        assert!((grid - 1.4).abs() < 1e-12);
        assert!((psi(&real(&a)).unwrap() - grid).abs() < 1e-12);
    }

    #[test]
    fn psi_matches_golden_section() {
        let mut rng = SeededRng::new(31, 0);
        for k in 1..9 {
            for _ in 0..20 {
                let a: Vec<f64> = (0..k).map(|_| rng.gaussian()).collect();
                let exact = psi_real(&a).unwrap();
                assert!((exact - golden_psi(&a)).abs() < 1e-9, "{a:?}");
            }
        }
    }

    #[test]
    fn derivative_root() {
        let x = psi_derivative_root(&[1.0, 1.0, 1.0]).unwrap();
        assert!((x - 1.0 / 8f64.sqrt()).abs() < 1e-14);
        let f = -1.0 + 3.0 * x / (x * x + 1.0).sqrt();
        assert!(f.abs() <= 1e-12);
        let scaled = psi_derivative_root(&[4.0, 4.0, 4.0]).unwrap();
        assert!((scaled - 2.0 * x).abs() < 1e-13);
        assert_eq!(psi_derivative_root(&[0.0, 0.0, 0.0]), Err(Error::DegenerateInput));
        assert_eq!(psi_derivative_root(&[1.0, 2.0]).unwrap(), 0.0);
        // F(0) = 2 - 4 + 2 = 0: boundary minimizer
        assert_eq!(psi_derivative_root(&[1.0, 2.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn subset_examples() {
        let mut rng = SeededRng::new(32, 0);
        let w = random_weights(6, &mut rng).unwrap();
        let ws = w.as_slice();
        for e in all_subset_evaluations(&w).unwrap() {
            if e.subset.len() <= 3 {
                assert!(e.valid);
            }
            if let Some(a) = &e.candidate {
                assert!((a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            }
            let m = e.subset.len() as f64;
            assert!(e.beta >= m * m * e.gamma * (1.0 - 1e-12));
        }
        let single = evaluate_subset(&w, &[2]).unwrap();
        assert_eq!(single.h, 0.0);
        let pair = evaluate_subset(&w, &[1, 4]).unwrap();
        assert!((pair.h - (ws[1] + ws[4]).sqrt()).abs() < 1e-15);
        assert_eq!(evaluate_subset(&w, &[]), Err(Error::EmptySubset));
        for k in 2..9 {
            let flat = WeightVector::flat(k).unwrap();
            let all: Vec<usize> = (0..k).collect();
            let e = evaluate_subset(&flat, &all).unwrap();
            let expected = 2.0 * ((k - 1) as f64).sqrt() / k as f64;
            assert!((e.h - expected).abs() < 1e-14);
        }
    }

    fn w_r(r: f64) -> WeightVector {
        let q = (1.0 - r) / 3.0;
        WeightVector::new(alloc::vec![r, q, q, q]).unwrap()
    }

    #[test]
    fn psi_star_examples() {
        let flat3 = psi_star(&WeightVector::flat(3).unwrap()).unwrap();
        assert!((flat3.value - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-14);
        let a = psi_star(&w_r(0.2)).unwrap();
        assert!((a.value - 1.4 / 2.6f64.sqrt()).abs() < 1e-12);
        assert_eq!(a.argmax_subset, alloc::vec![0, 1, 2, 3]);
        let b = psi_star(&w_r(0.05)).unwrap();
        assert!((b.value - 2.0 * 2f64.sqrt() / 3.0 * 0.95f64.sqrt()).abs() < 1e-12);
        assert_eq!(b.argmax_subset, alloc::vec![1, 2, 3]);
        let at = psi_star(&w_r(0.1)).unwrap();
        assert_eq!(at.argmax_subset, alloc::vec![0, 1, 2, 3]);
        let mut rng = SeededRng::new(33, 0);
        for _ in 0..10 {
            let w = random_weights(2, &mut rng).unwrap();
            assert!((psi_star(&w).unwrap().value - 1.0).abs() < 1e-14);
        }
        assert!(matches!(
            psi_star(&WeightVector::flat(21).unwrap()),
            Err(Error::CapacityExceeded { k: 21, max: 20 })
        ));
    }

    #[test]
    fn psi_star_argmax_attains_value() {
        let mut rng = SeededRng::new(34, 0);
        for k in 2..9 {
            for _ in 0..20 {
                let w = random_weights(k, &mut rng).unwrap();
                let r = psi_star(&w).unwrap();
                let a: Vec<C64> = r.argmax_a.iter().map(|&x| C64::new(x, 0.0)).collect();
                let fw = fw_rank_one(&a, &w).unwrap();
                assert!((fw - r.value * r.value).abs() < 1e-9, "{w:?}");
                // the maximum over all valid subsets, by brute force
                let best = all_subset_evaluations(&w)
                    .unwrap()
                    .filter(|e| e.valid)
                    .map(|e| e.h)
                    .fold(0.0, f64::max);
                assert!((best - r.value).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_and_limits() {
        let w = WeightVector::flat(3).unwrap();
        let e1 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        assert!((fw_rank_one(&e1, &w).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        let s = 1.0 / 3f64.sqrt();
        let flat = [C64::new(s, 0.0), C64::new(0.0, s), C64::new(-s, 0.0)];
        assert!((fw_rank_one(&flat, &w).unwrap() - 8.0 / 9.0).abs() < 1e-12);
        assert!(matches!(fw_rank_one(&[C64::new(2.0, 0.0); 3], &w), Err(Error::NotUnitVector { .. })));
        for k in 2..11 {
            let lim = mixed_unitary_norm_limit(&WeightVector::flat(k).unwrap()).unwrap();
            assert!((lim - 4.0 * (k - 1) as f64 / (k * k) as f64).abs() < 1e-12);
        }
        assert!((mixed_unitary_norm_limit(&w_r(0.2)).unwrap() - 1.96 / 2.6).abs() < 1e-12);
    }

    #[test]
    fn eb_limit_examples() {
        let a = DensityMatrix::diagonal(&[0.2, 0.5, 0.3]).unwrap();
        let basis: Vec<DensityMatrix> = (0..3)
            .map(|i| {
                let mut p = [0.0; 3];
                p[i] = 1.0;
                DensityMatrix::diagonal(&p).unwrap()
            })
            .collect();
        assert!((eb_limit_f(a.matrix(), &basis).unwrap() - 0.5).abs() < 1e-15);
        let mixed = [DensityMatrix::maximally_mixed(3)];
        assert!((eb_limit_f(a.matrix(), &mixed).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(eb_limit_f(&Matrix::identity(2), &mixed).is_err());
    }

    #[test]
    fn stinespring_peak() {
        assert_eq!(stinespring_peak_eigenvalue(2, 0.5).unwrap(), 1.0);
        assert!((stinespring_peak_eigenvalue(2, 0.3).unwrap() - (0.5 + 0.21f64.sqrt())).abs() < 1e-15);
        assert!((stinespring_peak_eigenvalue(4, 1e-12).unwrap() - 0.25).abs() < 1e-5);
        let p = stinespring_minimizer_profile(3, 0.2).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(stinespring_peak_eigenvalue(1, 0.3).is_err());
        assert!(stinespring_peak_eigenvalue(3, 1.0).is_err());
    }

    fn weights_strategy() -> impl Strategy<Value = Vec<f64>> {
        (2usize..9).prop_flat_map(|k| proptest::collection::vec(0.01f64..1.0, k)).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn h_increases_along_inclusion(w in weights_strategy(), masks in (any::<u32>(), any::<u32>())) {
            let k = w.len();
            let w = WeightVector::new(w).unwrap();
            let full = (1u32 << k) - 1;
            let small = (masks.0 & full).max(1);
            let large = small | (masks.1 & full);
            let to_set = |m: u32| (0..k).filter(|j| m & (1 << j) != 0).collect::<Vec<_>>();
            let hs = evaluate_subset(&w, &to_set(small)).unwrap().h;
            let hl = evaluate_subset(&w, &to_set(large)).unwrap().h;
            prop_assert!(hs <= hl + 1e-12);
        }

        #[test]
        fn psi_is_homogeneous(a in proptest::collection::vec(-2.0f64..2.0, 1..8), c in -5.0f64..5.0) {
            prop_assume!(a.iter().any(|x| x.abs() > 1e-3) && c.abs() > 1e-3);
            let scaled: Vec<f64> = a.iter().map(|x| c * x).collect();
            let lhs = psi_real(&scaled).unwrap();
            let rhs = c.abs() * psi_real(&a).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }
}
