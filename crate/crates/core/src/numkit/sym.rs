use super::vector::{axpy, dot};
use super::Vector;

/// Symmetric `d x d` matrix stored as its packed lower triangle, row by row.
///
/// Entry `(i, j)` with `j <= i` lives at `i * (i + 1) / 2 + j`, so row `i` of
/// the lower triangle is the contiguous slice `[i(i+1)/2, i(i+1)/2 + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    packed: Vec<f64>,
}

#[inline]
pub(crate) fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        SymMatrix { dim, packed: vec![0.0; dim * (dim + 1) / 2] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, v) in diag.iter().enumerate() {
            m.packed[row_start(i) + i] = *v;
        }
        m
    }

    /// Builds from the lower triangle of `f(i, j)`, `j <= i`.
    pub fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                m.packed[row_start(i) + j] = f(i, j);
            }
        }
        m
    }

    /// Builds from full rows; only the lower triangle is read.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        Self::from_lower_fn(rows.len(), |i, j| rows[i][j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        self.packed[row_start(r) + c]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        self.packed[row_start(r) + c] = value;
    }

    pub(crate) fn packed(&self) -> &[f64] {
        &self.packed
    }

    pub(crate) fn lower_row(&self, i: usize) -> &[f64] {
        let s = row_start(i);
        &self.packed[s..=s + i]
    }

    /// `self += w * x x^T`
    pub fn add_rank_one(&mut self, w: f64, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        for i in 0..self.dim {
            let s = row_start(i);
            axpy(&mut self.packed[s..=s + i], w * x[i], &x[..=i]);
        }
    }

    pub fn add_diagonal(&mut self, c: f64) {
        for i in 0..self.dim {
            self.packed[row_start(i) + i] += c;
        }
    }

    pub fn add_scaled(&mut self, alpha: f64, other: &SymMatrix) {
        assert_eq!(self.dim, other.dim);
        axpy(&mut self.packed, alpha, &other.packed);
    }

    pub fn scale(&mut self, alpha: f64) {
        self.packed.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn diag(&self) -> Vector {
        Vector::from_fn(self.dim, |i| self.packed[row_start(i) + i])
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.packed[row_start(i) + i]).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| self.lower_row(i)[..i].iter().all(|v| *v == 0.0))
    }

    pub fn matvec(&self, x: &[f64]) -> Vector {
        debug_assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = self.lower_row(i);
            // lower part of row i and the mirrored upper part of column i
            y[i] += dot(row, &x[..=i]);
            axpy(&mut y[..i], x[i], &row[..i]);
        }
        Vector::from(y)
    }

    /// Quadratic form `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(&self.matvec(x), x)
    }

    /// Frobenius norm of the full (unpacked) matrix.
    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            let row = self.lower_row(i);
            s += row[i] * row[i] + 2.0 * dot(&row[..i], &row[..i]);
        }
        s.sqrt()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.packed.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_uses_both_triangles() {
        let m = SymMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        assert_eq!(m.matvec(&[1.0, 1.0]).as_slice(), &[6.0, 5.0]);
        assert_eq!(m.quad_form(&[1.0, -1.0]), 3.0);
    }

    #[test]
    fn rank_one_update_is_symmetric() {
        let mut m = SymMatrix::zeros(3);
        m.add_rank_one(2.0, &[1.0, 2.0, 3.0]);
        assert_eq!(m.get(2, 0), 6.0);
        assert_eq!(m.get(0, 2), 6.0);
        assert_eq!(m.get(1, 1), 8.0);
        let expected = (0..3)
            .flat_map(|i| (0..3).map(move |j| (2.0 * (i + 1) as f64 * (j + 1) as f64).powi(2)))
            .sum::<f64>()
            .sqrt();
        assert!((m.frobenius_norm() - expected).abs() < 1e-12);
    }
}
