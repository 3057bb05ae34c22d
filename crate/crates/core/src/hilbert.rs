//! Dense complex state vectors over the agent/environment register and the
//! structured unitaries that act on them.
//!
//! The composite basis `|x y>` is flattened with `idx(x, y) = x * M + y`, where
//! `M` is the number of environment states. Structured operator kinds are
//! applied without building the full `(N*M) x (N*M)` matrix; [`OperatorSpec::densify`]
//! builds that matrix independently and is only meant for cross-checking.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Norm drift allowed for a valid state vector.
pub const NORM_TOL: f64 = 1e-12;
/// Largest entry of `U^dagger U - I` accepted for a unitary payload.
pub const UNITARY_TOL: f64 = 1e-10;
/// Default limit on `N * M` for [`OperatorSpec::densify`].
pub const DENSE_CAP: usize = 4096;

/// Register shape: `arms` agent basis states by `env` environment basis states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub arms: usize,
    pub env: usize,
}

impl Dims {
    pub fn new(arms: usize, env: usize) -> Result<Self> {
        if arms == 0 || env == 0 {
            return Err(Error::Dimension(format!(
                "register dimensions must be positive, got {arms}x{env}"
            )));
        }
        Ok(Self { arms, env })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.arms * self.env
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        x * self.env + y
    }

    fn check(&self, other: Dims) -> Result<()> {
        if *self != other {
            return Err(Error::Dimension(format!(
                "expected {}x{}, got {}x{}",
                self.arms, self.env, other.arms, other.env
            )));
        }
        Ok(())
    }
}

/// Normalized amplitude vector over the composite basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Dims,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The basis state `|x y>`.
    pub fn basis(dims: Dims, x: usize, y: usize) -> Result<Self> {
        if x >= dims.arms || y >= dims.env {
            return Err(Error::Dimension(format!(
                "basis state |{x} {y}> outside a {}x{} register",
                dims.arms, dims.env
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dims.len()];
        amps[dims.index(x, y)] = Complex64::new(1.0, 0.0);
        Ok(Self { dims, amps })
    }

    /// Wraps amplitudes that are already normalized (to within `1e-10`).
    pub fn from_amplitudes(dims: Dims, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != dims.len() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a register of size {}",
                amps.len(),
                dims.len()
            )));
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution(format!(
                "state has squared norm {norm_sqr}, expected 1"
            )));
        }
        Ok(Self { dims, amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(dims: Dims, mut amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != dims.len() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a register of size {}",
                amps.len(),
                dims.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidDistribution("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { dims, amps })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, x: usize, y: usize) -> Complex64 {
        self.amps[self.dims.index(x, y)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.dims.check(other.dims)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability of each agent basis state with the environment traced out.
    pub fn marginal_over_y(&self) -> Vec<f64> {
        self.amps
            .chunks_exact(self.dims.env)
            .map(|row| row.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }

    /// Squared norm of the projection onto the basis states where `mask` is set.
    pub fn masked_weight(&self, mask: &[bool]) -> Result<f64> {
        if mask.len() != self.amps.len() {
            return Err(Error::Dimension(format!(
                "mask of length {} for a register of size {}",
                mask.len(),
                self.amps.len()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(a, _)| a.norm_sqr())
            .sum())
    }
}

/// The structured operator kinds used by the algorithm.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    /// `|xy> -> -|xy>` wherever the mask is set.
    DiagonalSign { mask: Vec<bool> },
    /// `sum_x |x><x| (x) U_x`: one `M x M` unitary per agent basis state.
    BlockEnvUnitary { blocks: Vec<CMatrix> },
    /// `A (x) I` with `A` an `N x N` unitary on the agent register.
    PrepUnitary { matrix: CMatrix },
    /// `2|k><k| - I` for the composite basis index `k`.
    CompositeReflection { anchor: usize },
    /// `(2|ax><ax| - I) (x) (2|ay><ay| - I)`.
    TensorReflection { anchor_x: usize, anchor_y: usize },
    DenseMatrix { matrix: CMatrix },
}

/// A validated unitary on a register of fixed shape.
///
/// Matrix payloads are checked for unitarity once, at construction, so that
/// repeated application stays cheap.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    dims: Dims,
    kind: OperatorKind,
}

impl OperatorSpec {
    pub fn diagonal_sign(dims: Dims, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != dims.len() {
            return Err(Error::Dimension(format!(
                "sign mask of length {} for a register of size {}",
                mask.len(),
                dims.len()
            )));
        }
        Ok(Self { dims, kind: OperatorKind::DiagonalSign { mask } })
    }

    pub fn block_env(blocks: Vec<CMatrix>) -> Result<Self> {
        let env = blocks.first().map(|b| b.nrows()).unwrap_or(0);
        let dims = Dims::new(blocks.len(), env)?;
        for (x, block) in blocks.iter().enumerate() {
            if block.nrows() != env || block.ncols() != env {
                return Err(Error::Dimension(format!(
                    "environment block {x} is {}x{}, expected {env}x{env}",
                    block.nrows(),
                    block.ncols()
                )));
            }
            check_unitary(block).map_err(|e| Error::InvalidOperator(format!("block {x}: {e}")))?;
        }
        Ok(Self { dims, kind: OperatorKind::BlockEnvUnitary { blocks } })
    }

    pub fn prep(matrix: CMatrix, env: usize) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension(format!(
                "preparation matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dims = Dims::new(matrix.nrows(), env)?;
        check_unitary(&matrix).map_err(Error::InvalidOperator)?;
        Ok(Self { dims, kind: OperatorKind::PrepUnitary { matrix } })
    }

    pub fn composite_reflection(dims: Dims, anchor: usize) -> Result<Self> {
        if anchor >= dims.len() {
            return Err(Error::Dimension(format!(
                "reflection anchor {anchor} outside a register of size {}",
                dims.len()
            )));
        }
        Ok(Self { dims, kind: OperatorKind::CompositeReflection { anchor } })
    }

    pub fn tensor_reflection(dims: Dims, anchor_x: usize, anchor_y: usize) -> Result<Self> {
        if anchor_x >= dims.arms || anchor_y >= dims.env {
            return Err(Error::Dimension(format!(
                "reflection anchor |{anchor_x} {anchor_y}> outside a {}x{} register",
                dims.arms, dims.env
            )));
        }
        Ok(Self { dims, kind: OperatorKind::TensorReflection { anchor_x, anchor_y } })
    }

    pub fn dense(dims: Dims, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != dims.len() || matrix.ncols() != dims.len() {
            return Err(Error::Dimension(format!(
                "dense matrix is {}x{}, register size is {}",
                matrix.nrows(),
                matrix.ncols(),
                dims.len()
            )));
        }
        check_unitary(&matrix).map_err(Error::InvalidOperator)?;
        Ok(Self { dims, kind: OperatorKind::DenseMatrix { matrix } })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// Returns `op * s`.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        self.apply_impl(s, false)
    }

    /// Returns `op^dagger * s`.
    pub fn apply_adjoint(&self, s: &StateVector) -> Result<StateVector> {
        self.apply_impl(s, true)
    }

    fn apply_impl(&self, s: &StateVector, adjoint: bool) -> Result<StateVector> {
        self.dims.check(s.dims)?;
        let dims = self.dims;
        let input = &s.amps;
        let amps = match &self.kind {
            OperatorKind::DiagonalSign { mask } => input
                .iter()
                .zip(mask)
                .map(|(&a, &m)| if m { -a } else { a })
                .collect(),
            OperatorKind::BlockEnvUnitary { blocks } => {
                let mut out = Vec::with_capacity(dims.len());
                for (block, chunk) in blocks.iter().zip(input.chunks_exact(dims.env)) {
                    out.extend(mat_vec(block, chunk, adjoint));
                }
                out
            }
            OperatorKind::PrepUnitary { matrix } => {
                let (n, m) = (dims.arms, dims.env);
                let mut out = vec![Complex64::new(0.0, 0.0); dims.len()];
                for x in 0..n {
                    let row = &mut out[x * m..(x + 1) * m];
                    for xp in 0..n {
                        let coeff = if adjoint { matrix[(xp, x)].conj() } else { matrix[(x, xp)] };
                        if coeff == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for (o, &a) in row.iter_mut().zip(&input[xp * m..(xp + 1) * m]) {
                            *o += coeff * a;
                        }
                    }
                }
                out
            }
            OperatorKind::CompositeReflection { anchor } => {
                let mut out: Vec<Complex64> = input.iter().map(|&a| -a).collect();
                out[*anchor] = input[*anchor];
                out
            }
            OperatorKind::TensorReflection { anchor_x, anchor_y } => {
                let mut out = input.clone();
                for x in 0..dims.arms {
                    for y in 0..dims.env {
                        if (x == *anchor_x) != (y == *anchor_y) {
                            let i = dims.index(x, y);
                            out[i] = -out[i];
                        }
                    }
                }
                out
            }
            OperatorKind::DenseMatrix { matrix } => mat_vec(matrix, input, adjoint),
        };
        Ok(StateVector { dims, amps })
    }

    /// Builds the full matrix of this operator from its definition, without
    /// going through [`OperatorSpec::apply`].
    pub fn densify(&self, cap: usize) -> Result<CMatrix> {
        let size = self.dims.len();
        if size > cap {
            return Err(Error::CapExceeded { size, cap });
        }
        let one = Complex64::new(1.0, 0.0);
        let m = self.dims.env;
        let matrix = match &self.kind {
            OperatorKind::DiagonalSign { mask } => CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                size,
                mask.iter().map(|&b| if b { -one } else { one }),
            )),
            OperatorKind::BlockEnvUnitary { blocks } => {
                let mut full = CMatrix::zeros(size, size);
                for (x, block) in blocks.iter().enumerate() {
                    full.view_mut((x * m, x * m), (m, m)).copy_from(block);
                }
                full
            }
            OperatorKind::PrepUnitary { matrix } => matrix.kronecker(&CMatrix::identity(m, m)),
            OperatorKind::CompositeReflection { anchor } => {
                let mut full = -CMatrix::identity(size, size);
                full[(*anchor, *anchor)] = one;
                full
            }
            OperatorKind::TensorReflection { anchor_x, anchor_y } => {
                let sx = reflection_matrix(self.dims.arms, *anchor_x);
                let sy = reflection_matrix(m, *anchor_y);
                sx.kronecker(&sy)
            }
            OperatorKind::DenseMatrix { matrix } => matrix.clone(),
        };
        Ok(matrix)
    }
}

fn reflection_matrix(dim: usize, anchor: usize) -> CMatrix {
    let mut r = -CMatrix::identity(dim, dim);
    r[(anchor, anchor)] = Complex64::new(1.0, 0.0);
    r
}

fn mat_vec(matrix: &CMatrix, v: &[Complex64], adjoint: bool) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if adjoint {
                        matrix[(j, i)].conj() * v[j]
                    } else {
                        matrix[(i, j)] * v[j]
                    }
                })
                .sum()
        })
        .collect()
}

/// Largest entry of `|U^dagger U - I|`.
pub fn unitarity_defect(matrix: &CMatrix) -> f64 {
    let gram = matrix.adjoint() * matrix;
    let n = gram.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

fn check_unitary(matrix: &CMatrix) -> std::result::Result<(), String> {
    if matrix.nrows() != matrix.ncols() {
        return Err(format!("matrix is {}x{}", matrix.nrows(), matrix.ncols()));
    }
    let defect = unitarity_defect(matrix);
    if !(defect <= UNITARY_TOL) {
        return Err(format!("not unitary: max |U^dagger U - I| = {defect:e}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn uniform(dims: Dims) -> StateVector {
        StateVector::normalized(dims, vec![c(1.0); dims.len()]).unwrap()
    }

    #[test]
    fn all_false_sign_is_identity() {
        let dims = Dims::new(2, 3).unwrap();
        let op = OperatorSpec::diagonal_sign(dims, vec![false; 6]).unwrap();
        let s = uniform(dims);
        assert_eq!(op.apply(&s).unwrap(), s);
        assert_eq!(op.densify(DENSE_CAP).unwrap(), CMatrix::identity(6, 6));
    }

    #[test]
    fn composite_reflection_on_basis_states() {
        let dims = Dims::new(2, 2).unwrap();
        let op = OperatorSpec::composite_reflection(dims, 0).unwrap();
        let s00 = StateVector::basis(dims, 0, 0).unwrap();
        assert_eq!(op.apply(&s00).unwrap(), s00);
        for (x, y) in [(0, 1), (1, 0), (1, 1)] {
            let s = StateVector::basis(dims, x, y).unwrap();
            let out = op.apply(&s).unwrap();
            assert_eq!(out.amplitude(x, y), c(-1.0));
        }
        let dense = op.densify(DENSE_CAP).unwrap();
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0),
            c(-1.0),
            c(-1.0),
            c(-1.0),
        ]));
        assert_eq!(dense, expected);
    }

    #[test]
    fn single_sign_flip() {
        let dims = Dims::new(2, 2).unwrap();
        let op = OperatorSpec::diagonal_sign(dims, vec![true, false, false, false]).unwrap();
        let out = op.apply(&uniform(dims)).unwrap();
        let got: Vec<f64> = out.amps().iter().map(|a| a.re).collect();
        for (g, e) in got.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert!((g - e).abs() < 1e-15);
        }
    }

    #[test]
    fn inner_products() {
        let dims = Dims::new(2, 2).unwrap();
        let s00 = StateVector::basis(dims, 0, 0).unwrap();
        let s01 = StateVector::basis(dims, 0, 1).unwrap();
        let u = uniform(dims);
        assert!((u.inner(&u).unwrap() - c(1.0)).norm() < 1e-12);
        assert_eq!(s00.inner(&s01).unwrap(), c(0.0));
        assert!((s00.inner(&u).unwrap() - c(0.5)).norm() < 1e-15);

        let other = Dims::new(4, 1).unwrap();
        let mismatched = StateVector::basis(other, 0, 0).unwrap();
        assert!(matches!(s00.inner(&mismatched), Err(Error::Dimension(_))));
    }

    #[test]
    fn inner_is_conjugate_linear_in_first_argument() {
        let dims = Dims::new(1, 2).unwrap();
        let a = StateVector::from_amplitudes(
            dims,
            vec![Complex64::new(0.0, 1.0) / 2f64.sqrt(), c(1.0 / 2f64.sqrt())],
        )
        .unwrap();
        let b = StateVector::basis(dims, 0, 0).unwrap();
        let ip = a.inner(&b).unwrap();
        assert!((ip - Complex64::new(0.0, -1.0 / 2f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn marginals() {
        let dims = Dims::new(2, 2).unwrap();
        assert_eq!(uniform(dims).marginal_over_y(), vec![0.5, 0.5]);
        assert_eq!(StateVector::basis(dims, 1, 0).unwrap().marginal_over_y(), vec![0.0, 1.0]);
        let s = StateVector::from_amplitudes(
            dims,
            [0.1f64, 0.2, 0.3, 0.4].iter().map(|v| c(v.sqrt())).collect(),
        )
        .unwrap();
        let m = s.marginal_over_y();
        assert!((m[0] - 0.3).abs() < 1e-12 && (m[1] - 0.7).abs() < 1e-12);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_env_densifies_to_block_diagonal() {
        let h = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(-1.0)]) / c(2f64.sqrt());
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let op = OperatorSpec::block_env(vec![h.clone(), x.clone()]).unwrap();
        let dense = op.densify(DENSE_CAP).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected.view_mut((0, 0), (2, 2)).copy_from(&h);
        expected.view_mut((2, 2), (2, 2)).copy_from(&x);
        assert_eq!(dense, expected);
    }

    #[test]
    fn rejects_non_unitary_payloads() {
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(matches!(OperatorSpec::block_env(vec![bad.clone()]), Err(Error::InvalidOperator(_))));
        assert!(matches!(OperatorSpec::prep(bad.clone(), 3), Err(Error::InvalidOperator(_))));
        let dims = Dims::new(1, 2).unwrap();
        assert!(matches!(OperatorSpec::dense(dims, bad), Err(Error::InvalidOperator(_))));
    }

    #[test]
    fn dimension_errors() {
        let dims = Dims::new(2, 2).unwrap();
        assert!(OperatorSpec::diagonal_sign(dims, vec![true; 3]).is_err());
        let op = OperatorSpec::composite_reflection(dims, 0).unwrap();
        let s = StateVector::basis(Dims::new(1, 4).unwrap(), 0, 0).unwrap();
        assert!(matches!(op.apply(&s), Err(Error::Dimension(_))));
        assert!(OperatorSpec::composite_reflection(dims, 4).is_err());
        assert!(OperatorSpec::tensor_reflection(dims, 0, 2).is_err());
    }

    #[test]
    fn densify_respects_cap() {
        let dims = Dims::new(8, 8).unwrap();
        let op = OperatorSpec::composite_reflection(dims, 0).unwrap();
        assert_eq!(op.densify(63), Err(Error::CapExceeded { size: 64, cap: 63 }));
        assert!(op.densify(64).is_ok());
    }

    #[test]
    fn tensor_reflection_signs() {
        let dims = Dims::new(2, 2).unwrap();
        let op = OperatorSpec::tensor_reflection(dims, 0, 0).unwrap();
        let expected = [1.0, -1.0, -1.0, 1.0];
        for (i, e) in expected.iter().enumerate() {
            let s = StateVector::basis(dims, i / 2, i % 2).unwrap();
            assert_eq!(op.apply(&s).unwrap().amps()[i], c(*e));
        }
    }
}
