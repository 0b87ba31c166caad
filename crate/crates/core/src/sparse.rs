//! Compressed-row sparse matrices and a Jacobi-preconditioned conjugate
//! gradient solver.
//!
//! All operators assembled in this crate are symmetric; [`cg_solve`]
//! requires symmetric positive definiteness.

use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

/// Symmetric sparse matrix in compressed-row storage. Column indices are
/// sorted and unique within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates (row, col, value) triplets and compresses them into CSR.
/// Duplicate entries are summed in insertion order, so a fixed assembly
/// order yields a bit-reproducible matrix.
#[derive(Debug)]
pub struct TripletAccumulator {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletAccumulator {
    pub fn new(n: usize) -> Self {
        TripletAccumulator {
            n,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> SparseMatrix {
        // Stable sort keeps duplicate contributions in insertion order.
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_counts = vec![0usize; self.n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_counts[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.n {
            row_counts[r + 1] += row_counts[r];
        }
        SparseMatrix {
            n: self.n,
            row_ptr: row_counts,
            col_idx,
            values,
        }
    }
}

impl SparseMatrix {
    /// Identity matrix of dimension `n`.
    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from triplets (duplicates summed).
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut acc = TripletAccumulator::new(n);
        for &(r, c, v) in triplets {
            acc.push(r, c, v);
        }
        acc.build()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `r` as (column, value) pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// Value at (r, c), zero when the entry is absent.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.col_idx[lo..hi].binary_search(&c) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
        y
    }

    /// Main diagonal as a dense vector.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    /// C = A + scale * B. Operands must share the dimension.
    pub fn add_scaled(&self, other: &SparseMatrix, scale: f64) -> SparseMatrix {
        assert_eq!(self.n, other.n);
        let mut acc = TripletAccumulator::new(self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                acc.push(r, c, v);
            }
            for (c, v) in other.row(r) {
                acc.push(r, c, scale * v);
            }
        }
        acc.build()
    }

    /// Scales all entries in place.
    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// Entry-wise exact symmetry check.
    pub fn is_symmetric(&self) -> bool {
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                if self.get(c, r) != v {
                    return false;
                }
            }
        }
        true
    }

    /// Restriction to the index set where `keep` is true. Returns the
    /// reduced matrix and the kept global indices in order.
    pub fn restrict(&self, keep: &[bool]) -> (SparseMatrix, Vec<usize>) {
        assert_eq!(keep.len(), self.n);
        let kept: Vec<usize> = (0..self.n).filter(|&i| keep[i]).collect();
        let mut local = vec![usize::MAX; self.n];
        for (l, &g) in kept.iter().enumerate() {
            local[g] = l;
        }
        let mut acc = TripletAccumulator::new(kept.len());
        for &g in &kept {
            for (c, v) in self.row(g) {
                if local[c] != usize::MAX {
                    acc.push(local[g], local[c], v);
                }
            }
        }
        (acc.build(), kept)
    }

    /// Dense copy (test-scale matrices only).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                d[r][c] = v;
            }
        }
        d
    }

    /// Writes the lower triangle in Matrix Market coordinate format.
    pub fn write_matrix_market(&self, path: &Path) -> Result<()> {
        crate::output::write_atomic(path, |w| self.write_matrix_market_to(w))
    }

    pub fn write_matrix_market_to(&self, w: &mut dyn Write) -> Result<()> {
        let lower: Vec<(usize, usize, f64)> = (0..self.n)
            .flat_map(|r| {
                self.row(r)
                    .filter(move |&(c, _)| c <= r)
                    .map(move |(c, v)| (r, c, v))
            })
            .collect();
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(w, "{} {} {}", self.n, self.n, lower.len())?;
        for (r, c, v) in lower {
            writeln!(w, "{} {} {}", r + 1, c + 1, v)?;
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves A x = b for symmetric positive definite A with Jacobi
/// (diagonal) preconditioning, to relative residual `tol`. Errors when a
/// diagonal entry vanishes or the iteration limit is reached.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let diag = a.diagonal();
    for (i, &d) in diag.iter().enumerate() {
        if d == 0.0 {
            return Err(Error::SingularSystem {
                detail: format!("zero diagonal entry at row {i}"),
            });
        }
    }
    let inv_diag: Vec<f64> = diag.iter().map(|&d| 1.0 / d).collect();

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res_norm = b_norm;

    for _iter in 0..max_iter {
        if res_norm / b_norm <= tol {
            return Ok(x);
        }
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::SingularSystem {
                detail: format!("matrix is not positive definite (p'Ap = {pap:.3e})"),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res_norm = norm(&r);
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if res_norm / b_norm <= tol {
        return Ok(x);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        achieved: res_norm / b_norm,
        tolerance: tol,
    })
}

/// Dense symmetric solve by LU with partial pivoting. Reference path for
/// small systems and oracle tests.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pivot == 0.0 {
            return Err(Error::SingularSystem {
                detail: format!("dense solve: zero pivot in column {col}"),
            });
        }
        m.swap(col, pivot_row);
        x.swap(col, pivot_row);
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                m[r][c] -= factor * m[col][c];
            }
            x[r] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= m[col][col];
        for r in 0..col {
            x[r] -= m[r][col] * x[col];
        }
    }
    Ok(x)
}
