//! Quantum channels and their adjoints.
//!
//! A channel `Φ: M_N -> M_k` is stored in the most structured form its
//! constructor knows. The Stinespring isometry `V: C^N -> C^k ⊗ C^n` gives
//! `Φ(X) = Tr_n[V X V*]`, `Φ*(A) = V*(A ⊗ I_n)V` and the complementary
//! channel `Tr_k[V X V*]`. Structured variants materialize `V` on demand.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::{hermitian_eigenvalues, HermitianOperator};
use crate::error::{Error, Result};
use crate::matrix::{axpy, Matrix, C64, ONE, ZERO};
use crate::state::DensityMatrix;

const WEIGHT_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;
const ISOMETRY_TOL: f64 = 1e-10;
const POVM_TOL: f64 = 1e-10;

/// Strictly positive probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if w.is_empty() || w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) || (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::BadWeights);
        }
        Ok(WeightVector(w))
    }

    pub fn flat(k: usize) -> Result<Self> {
        WeightVector::new(vec![1.0 / k as f64; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entrywise square roots.
    pub fn sqrt(&self) -> Vec<f64> {
        self.0.iter().map(|w| w.sqrt()).collect()
    }
}

/// Channel given by an isometry `V` of shape `(k·n) × N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StinespringChannel {
    v: Matrix,
    k: usize,
    n: usize,
}

impl StinespringChannel {
    pub fn new(v: Matrix, k: usize, n: usize) -> Result<Self> {
        if v.rows() != k * n {
            return Err(Error::DimensionMismatch {
                context: "isometry rows (k·n)",
                expected: k * n,
                found: v.rows(),
            });
        }
        if v.cols() > v.rows() || v.isometry_defect() > ISOMETRY_TOL {
            return Err(Error::NotUnitary {
                index: 0,
                defect: v.isometry_defect(),
            });
        }
        Ok(StinespringChannel { v, k, n })
    }

    pub fn isometry(&self) -> &Matrix {
        &self.v
    }

    pub fn output_dim(&self) -> usize {
        self.k
    }

    pub fn environment_dim(&self) -> usize {
        self.n
    }

    pub fn input_dim(&self) -> usize {
        self.v.cols()
    }

    /// Swaps the output and environment factors of `V`.
    pub fn complementary(&self) -> StinespringChannel {
        let (k, n) = (self.k, self.n);
        let mut w = Matrix::zeros(k * n, self.v.cols());
        for i in 0..k {
            for a in 0..n {
                w.row_mut(a * k + i).copy_from_slice(self.v.row(i * n + a));
            }
        }
        StinespringChannel { v: w, k: n, n: k }
    }

    /// `P = V V*`.
    pub fn projection(&self) -> Matrix {
        self.v.mul_adjoint(&self.v)
    }

    /// `(A ⊗ I_n) y` for `y ∈ C^k ⊗ C^n`.
    fn apply_left_factor(&self, a: &Matrix, y: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut z = vec![ZERO; y.len()];
        for i in 0..self.k {
            let zi = &mut z[i * n..(i + 1) * n];
            for j in 0..self.k {
                let aij = a[(i, j)];
                if aij != ZERO {
                    axpy(aij, &y[j * n..(j + 1) * n], zi);
                }
            }
        }
        z
    }

    fn apply(&self, x: &Matrix) -> Matrix {
        let (k, n) = (self.k, self.n);
        let w = self.v.mul_mat(x);
        Matrix::from_fn(k, k, |i, j| {
            let mut acc = ZERO;
            for a in 0..n {
                acc += crate::matrix::dot_plain(w.row(i * n + a), &conj_row(self.v.row(j * n + a)));
            }
            acc
        })
    }

    fn apply_pure(&self, x: &[C64]) -> Matrix {
        let y = self.v.matvec(x);
        let ym = Matrix::from_vec_unchecked(self.k, self.n, y);
        ym.mul_adjoint(&ym)
    }

    fn adjoint(&self, a: &Matrix) -> Matrix {
        let cols = self.v.cols();
        let mut av = Matrix::zeros(self.v.rows(), cols);
        for c in 0..cols {
            let col = self.v.column(c);
            av.set_column(c, &self.apply_left_factor(a, &col));
        }
        self.v.adjoint_mul(&av)
    }
}

fn conj_row(r: &[C64]) -> Vec<C64> {
    r.iter().map(|z| z.conj()).collect()
}

/// `Φ(X) = Σ K X K*` with `K: C^N -> C^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<Matrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<Matrix>) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptySample)?;
        let (k, n) = (first.rows(), first.cols());
        let mut sum = Matrix::zeros(n, n);
        for op in &ops {
            if op.rows() != k || op.cols() != n {
                return Err(Error::DimensionMismatch {
                    context: "Kraus operator shape",
                    expected: k * n,
                    found: op.rows() * op.cols(),
                });
            }
            sum.add_scaled(ONE, &op.adjoint_mul(op));
        }
        let defect = sum.max_abs_diff(&Matrix::identity(n));
        if defect > ISOMETRY_TOL {
            return Err(Error::NotUnitary { index: 0, defect });
        }
        Ok(KrausChannel { ops })
    }

    pub fn operators(&self) -> &[Matrix] {
        &self.ops
    }
}

/// Checks that `povm` is a list of same-shape PSD matrices summing to the
/// identity (absolute tolerance 1e-10).
pub fn validate_povm(povm: &[Matrix]) -> Result<()> {
    if povm.is_empty() {
        return Err(Error::InvalidPovm { reason: "no elements" });
    }
    let n = povm[0].rows();
    let mut sum = Matrix::zeros(n, n);
    for m in povm {
        if m.rows() != n || m.cols() != n {
            return Err(Error::InvalidPovm { reason: "elements differ in shape" });
        }
        if m.hermitian_defect() > POVM_TOL {
            return Err(Error::InvalidPovm { reason: "element not Hermitian" });
        }
        let min = hermitian_eigenvalues(m)?.last().copied().unwrap_or(0.0);
        if min < -POVM_TOL {
            return Err(Error::InvalidPovm { reason: "element not positive semidefinite" });
        }
        sum.add_scaled(ONE, m);
    }
    if sum.max_abs_diff(&Matrix::identity(n)) > POVM_TOL {
        return Err(Error::InvalidPovm { reason: "elements do not sum to the identity" });
    }
    Ok(())
}

/// Entanglement-breaking channel `Ξ(X) = Σ Tr[X M_i] σ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EbChannel {
    povm: Vec<Matrix>,
    states: Vec<DensityMatrix>,
}

impl EbChannel {
    pub fn new(povm: Vec<Matrix>, states: Vec<DensityMatrix>) -> Result<Self> {
        if povm.is_empty() {
            return Err(Error::InvalidPovm { reason: "no elements" });
        }
        if povm.len() != states.len() {
            return Err(Error::DimensionMismatch {
                context: "POVM elements vs states",
                expected: povm.len(),
                found: states.len(),
            });
        }
        validate_povm(&povm)?;
        let k = states[0].dim();
        if states.iter().any(|s| s.dim() != k) {
            return Err(Error::DimensionMismatch {
                context: "EB output states",
                expected: k,
                found: states.iter().map(DensityMatrix::dim).find(|&d| d != k).unwrap_or(k),
            });
        }
        Ok(EbChannel { povm, states })
    }

    pub fn povm(&self) -> &[Matrix] {
        &self.povm
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn outcomes(&self) -> usize {
        self.povm.len()
    }
}

/// `Φ(X)_{ij} = √(w_i w_j) Tr[U_i X U_j*]`: output dimension is the number
/// of unitaries, the environment is `C^n`, and the complement is
/// `X ↦ Σ w_i U_i X U_i*`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedUnitaryChannel {
    weights: WeightVector,
    unitaries: Vec<Matrix>,
}

impl MixedUnitaryChannel {
    pub fn new(weights: WeightVector, unitaries: Vec<Matrix>) -> Result<Self> {
        if unitaries.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                context: "unitaries vs weights",
                expected: weights.len(),
                found: unitaries.len(),
            });
        }
        let n = unitaries[0].rows();
        for (index, u) in unitaries.iter().enumerate() {
            if u.rows() != n || u.cols() != n {
                return Err(Error::DimensionMismatch {
                    context: "unitary size",
                    expected: n,
                    found: u.rows(),
                });
            }
            let defect = u.isometry_defect();
            if defect > UNITARY_TOL {
                return Err(Error::NotUnitary { index, defect });
            }
        }
        Ok(MixedUnitaryChannel { weights, unitaries })
    }

    pub(crate) fn new_unchecked(weights: WeightVector, unitaries: Vec<Matrix>) -> Self {
        MixedUnitaryChannel { weights, unitaries }
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn unitaries(&self) -> &[Matrix] {
        &self.unitaries
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].rows()
    }

    /// `Φ*(A) x = Σ_ij √(w_i w_j) A_ij U_i* U_j x` in `2k` matrix-vector products.
    fn adjoint_matvec(&self, a: &Matrix, x: &[C64]) -> Vec<C64> {
        let s = self.weights.sqrt();
        let k = self.unitaries.len();
        let z: Vec<Vec<C64>> = self.unitaries.iter().map(|u| u.matvec(x)).collect();
        let mut y = vec![ZERO; x.len()];
        for i in 0..k {
            let mut t = vec![ZERO; x.len()];
            for j in 0..k {
                let c = a[(i, j)] * (s[i] * s[j]);
                if c != ZERO {
                    axpy(c, &z[j], &mut t);
                }
            }
            let ut = self.unitaries[i].adjoint_matvec(&t);
            for (yv, v) in y.iter_mut().zip(ut) {
                *yv += v;
            }
        }
        y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Stinespring(StinespringChannel),
    Kraus(KrausChannel),
    EntanglementBreaking(EbChannel),
    MixedUnitary(MixedUnitaryChannel),
    /// Keeps the diagonal of a `dim × dim` matrix.
    Pinching { dim: usize },
    /// `X ↦ Tr[X] I_k / k` from `M_N`.
    Depolarizing { input_dim: usize, output_dim: usize },
}

impl Channel {
    pub fn identity(dim: usize) -> Self {
        Channel::Stinespring(StinespringChannel {
            v: Matrix::identity(dim),
            k: dim,
            n: 1,
        })
    }

    pub fn depolarizing(output_dim: usize, input_dim: usize) -> Result<Self> {
        if output_dim == 0 || input_dim == 0 {
            return Err(Error::OutOfRange { what: "depolarizing dimensions" });
        }
        Ok(Channel::Depolarizing { input_dim, output_dim })
    }

    pub fn pinching(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::OutOfRange { what: "pinching dimension" });
        }
        Ok(Channel::Pinching { dim })
    }

    pub fn entanglement_breaking(povm: Vec<Matrix>, states: Vec<DensityMatrix>) -> Result<Self> {
        EbChannel::new(povm, states).map(Channel::EntanglementBreaking)
    }

    pub fn mixed_unitary(weights: WeightVector, unitaries: Vec<Matrix>) -> Result<Self> {
        MixedUnitaryChannel::new(weights, unitaries).map(Channel::MixedUnitary)
    }

    pub fn stinespring(v: Matrix, k: usize, n: usize) -> Result<Self> {
        StinespringChannel::new(v, k, n).map(Channel::Stinespring)
    }

    pub fn kraus(ops: Vec<Matrix>) -> Result<Self> {
        KrausChannel::new(ops).map(Channel::Kraus)
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Channel::Stinespring(s) => s.input_dim(),
            Channel::Kraus(kr) => kr.ops[0].cols(),
            Channel::EntanglementBreaking(eb) => eb.povm[0].rows(),
            Channel::MixedUnitary(mu) => mu.dim(),
            Channel::Pinching { dim } => *dim,
            Channel::Depolarizing { input_dim, .. } => *input_dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Channel::Stinespring(s) => s.k,
            Channel::Kraus(kr) => kr.ops[0].rows(),
            Channel::EntanglementBreaking(eb) => eb.states[0].dim(),
            Channel::MixedUnitary(mu) => mu.unitaries.len(),
            Channel::Pinching { dim } => *dim,
            Channel::Depolarizing { output_dim, .. } => *output_dim,
        }
    }

    fn check_square(&self, m: &Matrix, dim: usize, context: &'static str) -> Result<()> {
        if m.rows() != dim || m.cols() != dim {
            return Err(Error::DimensionMismatch {
                context,
                expected: dim,
                found: if m.rows() != dim { m.rows() } else { m.cols() },
            });
        }
        Ok(())
    }

    /// `Φ(X)` for an arbitrary `N × N` matrix.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        self.check_square(x, self.input_dim(), "channel input")?;
        Ok(match self {
            Channel::Stinespring(s) => s.apply(x),
            Channel::Kraus(kr) => {
                let k = self.output_dim();
                let mut out = Matrix::zeros(k, k);
                for op in &kr.ops {
                    out.add_scaled(ONE, &op.mul_mat(x).mul_adjoint(op));
                }
                out
            }
            Channel::EntanglementBreaking(eb) => {
                let k = self.output_dim();
                let mut out = Matrix::zeros(k, k);
                for (m, s) in eb.povm.iter().zip(&eb.states) {
                    out.add_scaled(x.trace_product(m), s.matrix());
                }
                out
            }
            Channel::MixedUnitary(mu) => {
                let s = mu.weights.sqrt();
                let ux: Vec<Matrix> = mu.unitaries.iter().map(|u| u.mul_mat(x)).collect();
                let k = mu.unitaries.len();
                Matrix::from_fn(k, k, |i, j| {
                    // Tr[U_i X U_j*] = Σ_ab (U_i X)_ab conj(U_j)_ab
                    let t: C64 = ux[i]
                        .data()
                        .iter()
                        .zip(mu.unitaries[j].data())
                        .map(|(p, q)| p * q.conj())
                        .sum();
                    t * (s[i] * s[j])
                })
            }
            Channel::Pinching { dim } => Matrix::from_fn(*dim, *dim, |i, j| if i == j { x[(i, i)] } else { ZERO }),
            Channel::Depolarizing { output_dim, .. } => {
                Matrix::identity(*output_dim).scale(x.trace() / *output_dim as f64)
            }
        })
    }

    /// `Φ(x x*)` for a vector `x`, using the cheapest route available.
    pub fn apply_pure(&self, x: &[C64]) -> Result<Matrix> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "channel input vector",
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        Ok(match self {
            Channel::Stinespring(s) => s.apply_pure(x),
            Channel::Kraus(kr) => {
                let k = self.output_dim();
                let mut out = Matrix::zeros(k, k);
                for op in &kr.ops {
                    out.add_scaled(ONE, &Matrix::outer(&op.matvec(x)));
                }
                out
            }
            Channel::EntanglementBreaking(eb) => {
                let k = self.output_dim();
                let mut out = Matrix::zeros(k, k);
                for (m, s) in eb.povm.iter().zip(&eb.states) {
                    let p = crate::matrix::dot(x, &m.matvec(x)).re;
                    out.add_scaled(C64::new(p, 0.0), s.matrix());
                }
                out
            }
            Channel::MixedUnitary(mu) => {
                let s = mu.weights.sqrt();
                let ux: Vec<Vec<C64>> = mu.unitaries.iter().map(|u| u.matvec(x)).collect();
                let k = ux.len();
                Matrix::from_fn(k, k, |i, j| crate::matrix::dot(&ux[j], &ux[i]) * (s[i] * s[j]))
            }
            _ => self.apply(&Matrix::outer(x))?,
        })
    }

    /// `Φ(ρ)` as a density matrix.
    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::normalize(&self.apply(rho.matrix())?)
    }

    /// `Φ*(A)` as a dense `N × N` matrix.
    pub fn adjoint(&self, a: &Matrix) -> Result<Matrix> {
        self.check_square(a, self.output_dim(), "adjoint input")?;
        Ok(match self {
            Channel::Stinespring(s) => s.adjoint(a),
            Channel::Kraus(kr) => {
                let n = self.input_dim();
                let mut out = Matrix::zeros(n, n);
                for op in &kr.ops {
                    out.add_scaled(ONE, &op.adjoint_mul(&a.mul_mat(op)));
                }
                out
            }
            Channel::EntanglementBreaking(eb) => {
                let n = self.input_dim();
                let mut out = Matrix::zeros(n, n);
                for (m, s) in eb.povm.iter().zip(&eb.states) {
                    out.add_scaled(a.trace_product(s.matrix()), m);
                }
                out
            }
            Channel::MixedUnitary(mu) => {
                // Σ_i U_i* B_i with B_i = Σ_j √(w_i w_j) A_ij U_j
                let s = mu.weights.sqrt();
                let n = mu.dim();
                let k = mu.unitaries.len();
                let mut out = Matrix::zeros(n, n);
                for i in 0..k {
                    let mut b = Matrix::zeros(n, n);
                    for j in 0..k {
                        let c = a[(i, j)] * (s[i] * s[j]);
                        if c != ZERO {
                            b.add_scaled(c, &mu.unitaries[j]);
                        }
                    }
                    out.add_scaled(ONE, &mu.unitaries[i].adjoint_mul(&b));
                }
                out
            }
            Channel::Pinching { dim } => Matrix::from_fn(*dim, *dim, |i, j| if i == j { a[(i, i)] } else { ZERO }),
            Channel::Depolarizing { input_dim, output_dim } => {
                Matrix::identity(*input_dim).scale(a.trace() / *output_dim as f64)
            }
        })
    }

    /// `Φ*(A)` as a matrix-free Hermitian operator (for Hermitian `A`).
    pub fn adjoint_operator<'a>(&'a self, a: &Matrix) -> Result<AdjointOperator<'a>> {
        self.check_square(a, self.output_dim(), "adjoint input")?;
        Ok(match self {
            Channel::Stinespring(s) => AdjointOperator::Stinespring { channel: s, a: a.clone() },
            Channel::MixedUnitary(mu) => AdjointOperator::MixedUnitary { channel: mu, a: a.clone() },
            _ => AdjointOperator::Dense(self.adjoint(a)?.hermitian_part()),
        })
    }

    /// The Stinespring form, materialized for structured variants.
    pub fn stinespring_form(&self) -> Result<StinespringChannel> {
        match self {
            Channel::Stinespring(s) => Ok(s.clone()),
            Channel::Kraus(kr) => Ok(kraus_to_stinespring(&kr.ops)),
            Channel::MixedUnitary(mu) => {
                let n = mu.dim();
                let k = mu.unitaries.len();
                let s = mu.weights.sqrt();
                let mut v = Matrix::zeros(k * n, n);
                for (i, u) in mu.unitaries.iter().enumerate() {
                    for a in 0..n {
                        for (dst, src) in v.row_mut(i * n + a).iter_mut().zip(u.row(a)) {
                            *dst = src * s[i];
                        }
                    }
                }
                Ok(StinespringChannel { v, k, n })
            }
            Channel::Pinching { dim } => {
                let ops = (0..*dim)
                    .map(|i| Matrix::from_fn(*dim, *dim, |r, c| if r == i && c == i { ONE } else { ZERO }))
                    .collect::<Vec<_>>();
                Ok(kraus_to_stinespring(&ops))
            }
            Channel::Depolarizing { input_dim, output_dim } => {
                let (k, n) = (*output_dim, *input_dim);
                let amp = C64::new(1.0 / (k as f64).sqrt(), 0.0);
                let mut ops = Vec::with_capacity(k * n);
                for i in 0..k {
                    for j in 0..n {
                        ops.push(Matrix::from_fn(k, n, |r, c| if r == i && c == j { amp } else { ZERO }));
                    }
                }
                Ok(kraus_to_stinespring(&ops))
            }
            Channel::EntanglementBreaking(_) => Err(Error::RepresentationUnavailable),
        }
    }

    /// Complementary channel `Tr_k[V · V*]`; requires a stored isometry.
    pub fn complementary(&self) -> Result<Channel> {
        match self {
            Channel::Stinespring(s) => Ok(Channel::Stinespring(s.complementary())),
            _ => Err(Error::RepresentationUnavailable),
        }
    }

    /// `P = V V*`; requires a stored isometry.
    pub fn stinespring_projection(&self) -> Result<Matrix> {
        match self {
            Channel::Stinespring(s) => Ok(s.projection()),
            _ => Err(Error::RepresentationUnavailable),
        }
    }

    /// `(Φ ⊗ id_d)(X)` for `X` on `C^N ⊗ C^d` (channel factor first).
    pub fn apply_with_identity(&self, x: &Matrix, d: usize) -> Result<Matrix> {
        let (n, k) = (self.input_dim(), self.output_dim());
        self.check_square(x, n * d, "bipartite channel input")?;
        let mut out = Matrix::zeros(k * d, k * d);
        for a in 0..d {
            for b in 0..d {
                let block = Matrix::from_fn(n, n, |i, j| x[(i * d + a, j * d + b)]);
                let y = self.apply(&block)?;
                for p in 0..k {
                    for q in 0..k {
                        out[(p * d + a, q * d + b)] = y[(p, q)];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Kraus operators `K_r: C^N -> C^k` stacked as `V[(i, r), c] = K_r[i, c]`.
fn kraus_to_stinespring(ops: &[Matrix]) -> StinespringChannel {
    let (k, cols) = (ops[0].rows(), ops[0].cols());
    let n = ops.len();
    let mut v = Matrix::zeros(k * n, cols);
    for (r, op) in ops.iter().enumerate() {
        for i in 0..k {
            v.row_mut(i * n + r).copy_from_slice(op.row(i));
        }
    }
    StinespringChannel { v, k, n }
}

/// `Φ*(A)` available through matrix-vector products.
#[derive(Debug, Clone)]
pub enum AdjointOperator<'a> {
    Dense(Matrix),
    Stinespring { channel: &'a StinespringChannel, a: Matrix },
    MixedUnitary { channel: &'a MixedUnitaryChannel, a: Matrix },
}

impl HermitianOperator for AdjointOperator<'_> {
    fn dim(&self) -> usize {
        match self {
            AdjointOperator::Dense(m) => m.rows(),
            AdjointOperator::Stinespring { channel, .. } => channel.input_dim(),
            AdjointOperator::MixedUnitary { channel, .. } => channel.dim(),
        }
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        match self {
            AdjointOperator::Dense(m) => m.matvec(x),
            AdjointOperator::Stinespring { channel, a } => {
                let y = channel.v.matvec(x);
                channel.v.adjoint_matvec(&channel.apply_left_factor(a, &y))
            }
            AdjointOperator::MixedUnitary { channel, a } => channel.adjoint_matvec(a, x),
        }
    }
}
