use super::counters;
use super::sym::{row_start, SymMatrix};
use super::vector::dot;
use super::Vector;
use crate::error::{Error, Result};

/// Pivots at or below this value are treated as a loss of positive
/// definiteness.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Cholesky factor `L` (packed lower triangle) of a symmetric positive
/// definite matrix, kept together with the matrix it came from.
#[derive(Debug, Clone)]
pub struct PdFactor {
    lower: SymLower,
    source: SymMatrix,
}

#[derive(Debug, Clone)]
struct SymLower {
    dim: usize,
    packed: Vec<f64>,
}

impl SymLower {
    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        let s = row_start(i);
        &self.packed[s..=s + i]
    }
}

/// Factorizes `h = L L^T`.
pub fn factorize(h: &SymMatrix) -> Result<PdFactor> {
    counters::record_factorization();
    if !h.is_finite() {
        return Err(Error::NonFinite("factorize"));
    }
    let d = h.dim();
    let mut packed = vec![0.0; h.packed().len()];
    for i in 0..d {
        let si = row_start(i);
        for j in 0..=i {
            let sj = row_start(j);
            let s = h.get(i, j) - dot(&packed[si..si + j], &packed[sj..sj + j]);
            if i == j {
                if s <= PIVOT_THRESHOLD || !s.is_finite() {
                    return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                }
                packed[si + i] = s.sqrt();
            } else {
                packed[si + j] = s / packed[sj + j];
            }
        }
    }
    Ok(PdFactor { lower: SymLower { dim: d, packed }, source: h.clone() })
}

/// Solves `H x = b` given the factor of `H`.
pub fn solve(f: &PdFactor, b: &[f64]) -> Result<Vector> {
    f.solve(b)
}

impl PdFactor {
    pub fn dim(&self) -> usize {
        self.lower.dim
    }

    /// The matrix that was factorized.
    pub fn matrix(&self) -> &SymMatrix {
        &self.source
    }

    /// Entry `(i, j)` of `L`; zero above the diagonal.
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.lower.row(i)[j]
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vector> {
        let d = self.dim();
        if b.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: b.len() });
        }
        // forward: L y = b
        let mut y = b.to_vec();
        for i in 0..d {
            let row = self.lower.row(i);
            y[i] = (y[i] - dot(&row[..i], &y[..i])) / row[i];
        }
        // backward: L^T x = y, sweeping rows of L as columns of L^T
        for i in (0..d).rev() {
            let row = self.lower.row(i);
            y[i] /= row[i];
            let xi = y[i];
            for (yk, lik) in y[..i].iter_mut().zip(&row[..i]) {
                *yk -= lik * xi;
            }
        }
        let x = Vector::from(y);
        if !x.is_finite() {
            return Err(Error::NonFinite("solve"));
        }
        Ok(x)
    }

    /// `L L^T`, recomputed from the factor.
    pub fn reconstruct(&self) -> SymMatrix {
        SymMatrix::from_lower_fn(self.dim(), |i, j| {
            dot(&self.lower.row(i)[..=j], &self.lower.row(j)[..=j])
        })
    }

    /// `log det H`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.lower.row(i)[i].ln()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_frobenius(a: &SymMatrix, b: &SymMatrix) -> f64 {
        let mut diff = a.clone();
        diff.add_scaled(-1.0, b);
        diff.frobenius_norm() / b.frobenius_norm()
    }

    #[test]
    fn identity_factor() {
        let f = factorize(&SymMatrix::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f.lower(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn hand_cholesky_2x2() {
        let h = SymMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let f = factorize(&h).unwrap();
        assert!((f.lower(0, 0) - 2.0).abs() < 1e-15);
        assert!((f.lower(1, 0) - 1.0).abs() < 1e-15);
        assert!((f.lower(1, 1) - 2f64.sqrt()).abs() < 1e-15);
        assert!(rel_frobenius(&f.reconstruct(), &h) < 1e-10);
    }

    #[test]
    fn indefinite_is_rejected() {
        let h = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(factorize(&h), Err(Error::NotPositiveDefinite { row: 1, .. })));
    }

    #[test]
    fn tiny_pivot_is_rejected() {
        let h = SymMatrix::diagonal(&[1.0, 1e-13]);
        assert!(matches!(factorize(&h), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn solve_examples() {
        let f = factorize(&SymMatrix::identity(2)).unwrap();
        assert_eq!(f.solve(&[3.0, -1.0]).unwrap().as_slice(), &[3.0, -1.0]);

        let f = factorize(&SymMatrix::diagonal(&[2.0, 4.0])).unwrap();
        assert!(f.solve(&[2.0, 4.0]).unwrap().max_abs_diff(&[1.0, 1.0]) < 1e-15);

        let h = SymMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let x = factorize(&h).unwrap().solve(&[6.0, 5.0]).unwrap();
        assert!(x.max_abs_diff(&[1.0, 1.0]) < 1e-14);
    }

    #[test]
    fn solve_rejects_wrong_dimension() {
        let f = factorize(&SymMatrix::identity(2)).unwrap();
        assert!(matches!(f.solve(&[1.0; 3]), Err(Error::DimensionMismatch { expected: 2, found: 3 })));
    }
}
