//! In-memory datasets: a dense row-major feature matrix, one target per row
//! and a stable identifier per row.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Stable identifier of a training row. Identifiers survive subsetting, so a
/// deletion request names the same person before and after a split.
pub type SampleId = usize;

/// One observation `z = (x, y)`.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub x: &'a [f64],
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTestSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    ids: Vec<SampleId>,
    split: Option<TrainTestSplit>,
}

impl Dataset {
    /// Binary classification data. Labels may be given as `{0, 1}` or
    /// `{-1, +1}`; they are stored as `{-1, +1}`.
    pub fn classification(rows: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        let labels = remap_labels(&labels, |i| i + 1)?;
        Self::from_rows(rows, labels)
    }

    /// Real-valued targets, for the squared-error loss.
    pub fn regression(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        Self::from_rows(rows, targets)
    }

    fn from_rows(rows: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::RaggedRows { line: bad + 1, expected: d, found: rows[bad].len() });
        }
        let x: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(n, d, x, y)
    }

    /// Builds from a row-major `n x d` buffer.
    pub fn from_flat(n: usize, d: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadShape(format!("need at least 2 rows, got {n}")));
        }
        if d == 0 {
            return Err(Error::BadShape("need at least one feature".into()));
        }
        if x.len() != n * d || y.len() != n {
            return Err(Error::BadShape(format!(
                "buffer sizes {} and {} do not match {n} x {d}",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::BadShape("missing or non-finite values".into()));
        }
        Ok(Dataset { n, d, x, y, ids: (0..n).collect(), split: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn target(&self, i: usize) -> f64 {
        self.y[i]
    }

    #[inline]
    pub fn sample(&self, i: usize) -> Sample<'_> {
        Sample { x: self.row(i), y: self.y[i] }
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn ids(&self) -> &[SampleId] {
        &self.ids
    }

    pub fn id(&self, row: usize) -> SampleId {
        self.ids[row]
    }

    /// Row index holding `id`.
    pub fn row_of(&self, id: SampleId) -> Result<usize> {
        // ids are kept sorted ascending
        self.ids.binary_search(&id).map_err(|_| Error::UnknownId(id))
    }

    pub fn is_binary(&self) -> bool {
        self.y.iter().all(|v| *v == 1.0 || *v == -1.0)
    }

    pub fn split(&self) -> Option<&TrainTestSplit> {
        self.split.as_ref()
    }

    /// Attaches a seeded random split holding out `test_fraction` of rows.
    pub fn with_random_split(mut self, test_fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::BadShape(format!("test fraction {test_fraction} not in [0, 1)")));
        }
        let mut rows: Vec<usize> = (0..self.n).collect();
        rows.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
        let n_test = (test_fraction * self.n as f64).round() as usize;
        let (test, train) = rows.split_at(n_test);
        if train.len() < 2 {
            return Err(Error::BadShape("split leaves fewer than 2 training rows".into()));
        }
        let (mut train, mut test) = (train.to_vec(), test.to_vec());
        train.sort_unstable();
        test.sort_unstable();
        self.split = Some(TrainTestSplit { train, test });
        Ok(self)
    }

    /// Training rows (all rows when no split is attached).
    pub fn train_part(&self) -> Dataset {
        match &self.split {
            Some(s) => self.subset(&s.train),
            None => Dataset { split: None, ..self.clone() },
        }
    }

    /// Held-out rows, if a split is attached and non-empty.
    pub fn test_part(&self) -> Option<Dataset> {
        self.split.as_ref().filter(|s| !s.test.is_empty()).map(|s| self.subset(&s.test))
    }

    /// Rows at the given (ascending) indices, identifiers preserved.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        let mut x = Vec::with_capacity(rows.len() * self.d);
        for &r in rows {
            x.extend_from_slice(self.row(r));
        }
        Dataset {
            n: rows.len(),
            d: self.d,
            x,
            y: rows.iter().map(|&r| self.y[r]).collect(),
            ids: rows.iter().map(|&r| self.ids[r]).collect(),
            split: None,
        }
    }
}

/// Maps `{0, 1}` or `{-1, +1}` labels to `{-1, +1}`. `line_of` turns a row
/// index into a reportable line number.
pub(crate) fn remap_labels(labels: &[f64], line_of: impl Fn(usize) -> usize) -> Result<Vec<f64>> {
    let mut saw_zero = false;
    let mut saw_minus = false;
    for (i, &v) in labels.iter().enumerate() {
        match v {
            0.0 => saw_zero = true,
            -1.0 => saw_minus = true,
            1.0 => {}
            value => return Err(Error::NonBinaryLabels { line: line_of(i), value }),
        }
        if saw_zero && saw_minus {
            return Err(Error::NonBinaryLabels { line: line_of(i), value: v });
        }
    }
    Ok(labels.iter().map(|&v| if v == 1.0 { 1.0 } else { -1.0 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_one_labels_are_remapped() {
        let ds = Dataset::classification(vec![vec![1.0], vec![2.0], vec![3.0]], vec![0.0, 1.0, 0.0])
            .unwrap();
        assert_eq!(ds.targets(), &[-1.0, 1.0, -1.0]);
    }

    #[test]
    fn mixed_label_encodings_are_rejected() {
        let err = Dataset::classification(vec![vec![1.0], vec![2.0], vec![3.0]], vec![0.0, -1.0, 1.0])
            .unwrap_err();
        assert!(matches!(err, Error::NonBinaryLabels { line: 2, .. }));
    }

    #[test]
    fn split_is_disjoint_and_preserves_ids() {
        let rows = (0..50).map(|i| vec![i as f64]).collect();
        let ds = Dataset::regression(rows, vec![0.0; 50]).unwrap().with_random_split(0.2, 3).unwrap();
        let s = ds.split().unwrap();
        assert_eq!(s.test.len(), 10);
        assert!(s.train.iter().all(|r| !s.test.contains(r)));
        let train = ds.train_part();
        for i in 0..train.n() {
            assert_eq!(train.row(i)[0], train.id(i) as f64);
            assert_eq!(train.row_of(train.id(i)).unwrap(), i);
        }
    }
}
