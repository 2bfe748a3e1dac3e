use std::io::Write;

use faer::sparse::{SparseColMat, Triplet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{for_each_chunk_mut, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    Stiffness,
    Mass,
    WeightedStiffness,
}

/// Symmetric sparse matrix in compressed sparse row layout, storing both
/// triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    kind: OperatorKind,
}

impl SparseSymOperator {
    /// Builds the matrix from `(row, col, value)` triplets. Duplicates are
    /// summed in the order they appear, so symmetric input gives an exactly
    /// symmetric matrix.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)], kind: OperatorKind) -> Self {
        let mut count = vec![0usize; dim + 1];
        for &(i, _, _) in triplets {
            count[i + 1] += 1;
        }
        for i in 0..dim {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            entries[next[i]] = (j, v);
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            let row = &mut entries[count[i]..count[i + 1]];
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut s = 0.0;
                while k < row.len() && row[k].0 == j {
                    s += row[k].1;
                    k += 1;
                }
                col_idx.push(j);
                values.push(s);
            }
            row_ptr.push(col_idx.len());
        }
        Self { dim, row_ptr, col_idx, values, kind }
    }

    pub fn diagonal_matrix(diag: &[f64], kind: OperatorKind) -> Self {
        let dim = diag.len();
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: diag.to_vec(),
            kind,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64], exec: Execution) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for_each_chunk_mut(exec, y, 2048, |part, start| {
            for (k, yi) in part.iter_mut().enumerate() {
                let i = start + k;
                let mut s = 0.0;
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    s += self.values[p] * x[self.col_idx[p]];
                }
                *yi = s;
            }
        });
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.apply_into(x, &mut y, Execution::Sequential);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            let mut r = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                r += self.values[p] * y[self.col_idx[p]];
            }
            s += x[i] * r;
        }
        s
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.values[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    /// Sum of all entries.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Exact (bitwise) symmetry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).all(|p| {
                let j = self.col_idx[p];
                self.get(j, i).to_bits() == self.values[p].to_bits()
            })
        })
    }

    /// Principal submatrix on the given (sorted, distinct) indices.
    pub fn restrict(&self, dofs: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.dim];
        for (k, &d) in dofs.iter().enumerate() {
            map[d] = k;
        }
        let mut row_ptr = Vec::with_capacity(dofs.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &i in dofs {
            let mut row: Vec<(usize, f64)> = (self.row_ptr[i]..self.row_ptr[i + 1])
                .filter(|&p| map[self.col_idx[p]] != usize::MAX)
                .map(|p| (map[self.col_idx[p]], self.values[p]))
                .collect();
            row.sort_by_key(|e| e.0);
            for (j, v) in row {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self { dim: dofs.len(), row_ptr, col_idx, values, kind: self.kind }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::Input(format!("dimension mismatch {} vs {}", self.dim, other.dim)));
        }
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for (m, scale) in [(self, 1.0), (other, s)] {
            for i in 0..m.dim {
                for p in m.row_ptr[i]..m.row_ptr[i + 1] {
                    triplets.push((i, m.col_idx[p], scale * m.values[p]));
                }
            }
        }
        Ok(Self::from_triplets(self.dim, &triplets, self.kind))
    }

    /// Lower triangle as a faer column-major sparse matrix.
    pub fn to_faer_lower(&self) -> Result<SparseColMat<usize, f64>> {
        let mut t = Vec::with_capacity(self.nnz() / 2 + self.dim);
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                if j <= i {
                    t.push(Triplet::new(i, j, self.values[p]));
                }
            }
        }
        SparseColMat::try_new_from_triplets(self.dim, self.dim, &t)
            .map_err(|e| Error::Factorization(format!("{e:?}")))
    }

    /// MatrixMarket coordinate format, symmetric, lower triangle, 1-based.
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        let lower: usize = (0..self.dim)
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).filter(|&p| self.col_idx[p] <= i).count())
            .sum();
        writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(out, "% kind: {:?}", self.kind)?;
        writeln!(out, "{} {} {}", self.dim, self.dim, lower)?;
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                if j <= i {
                    writeln!(out, "{} {} {:.17e}", i + 1, j + 1, self.values[p])?;
                }
            }
        }
        Ok(())
    }
}
