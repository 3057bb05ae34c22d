//! Completion of a unit vector to a unitary matrix whose first column it is.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::CMatrix;

/// Builds a unitary `U` with `U e_0 = first`.
///
/// The remaining columns come from the canonical basis: the basis vector with
/// the largest overlap with `first` is dropped (lowest index on ties) and the
/// rest are orthonormalized in index order by modified Gram-Schmidt with one
/// reorthogonalization pass. The result depends only on `first`.
pub fn complete_unitary(first: &[Complex64]) -> Result<CMatrix> {
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidParameter("cannot complete an empty vector".into()));
    }
    let norm_sqr: f64 = first.iter().map(|a| a.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!(
            "first column has squared norm {norm_sqr}, expected 1"
        )));
    }

    let mut pivot = 0;
    for (k, a) in first.iter().enumerate() {
        if a.norm() > first[pivot].norm() {
            pivot = k;
        }
    }

    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    columns.push(first.to_vec());
    for k in (0..dim).filter(|&k| k != pivot) {
        let mut q = vec![Complex64::new(0.0, 0.0); dim];
        q[k] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for col in &columns {
                let overlap: Complex64 = col.iter().zip(&q).map(|(c, v)| c.conj() * v).sum();
                for (v, c) in q.iter_mut().zip(col) {
                    *v -= overlap * c;
                }
            }
        }
        let norm = q.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateInstance(format!(
                "unitary completion lost rank at basis vector {k}"
            )));
        }
        q.iter_mut().for_each(|v| *v /= norm);
        columns.push(q);
    }

    Ok(CMatrix::from_fn(dim, dim, |i, j| columns[j][i]))
}
