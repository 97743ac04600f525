use crate::scalar::Field;
use num_traits::Zero;

/// Square sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<S> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<S>,
}

impl<S: Field> CsrMatrix<S> {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, S)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<S> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) outside {n}x{n}");
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_ptr[i + 1] += 1;
                col_idx.push(j);
                vals.push(v);
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, S::one())).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, S)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or_else(S::zero)
    }

    pub fn diagonal(&self) -> Vec<S> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|i − j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[S], y: &mut [S]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = S::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        let mut y = vec![S::zero(); self.n];
        self.mul_vec(x, &mut y);
        y
    }

    /// `y = Aᵀ x` (plain transpose, no conjugation).
    pub fn apply_transpose(&self, x: &[S]) -> Vec<S> {
        let mut y = vec![S::zero(); self.n];
        for (i, &xi) in x.iter().enumerate().take(self.n) {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.vals[k] * xi;
            }
        }
        y
    }

    /// `|A| |x|` entrywise.
    pub fn abs_mul(&self, x: &[S]) -> Vec<S::Real> {
        (0..self.n)
            .map(|i| {
                let mut acc = S::Real::zero();
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[k].modulus() * x[self.col_idx[k]].modulus();
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                t.push((j, i, v));
            }
        }
        Self::from_triplets(self.n, t)
    }

    pub fn map<R: Field>(&self, f: impl Fn(S) -> R) -> CsrMatrix<R> {
        CsrMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            vals: self.vals.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `alpha·I + beta·A`
    pub fn shifted(&self, alpha: S, beta: S) -> Self {
        let mut t = Vec::with_capacity(self.nnz() + self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                t.push((i, j, beta * v));
            }
            t.push((i, i, alpha));
        }
        Self::from_triplets(self.n, t)
    }

    /// `A + B` for matrices of equal size.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, v)));
        }
        Self::from_triplets(self.n, t)
    }

    /// Dense copy, row-major; intended for small test problems.
    pub fn to_dense(&self) -> Vec<Vec<S>> {
        let mut d = vec![vec![S::zero(); self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}
