//! Semi-tensor product calculus over real, logical and Boolean matrices.
//!
//! Real matrices switch between a dense column-major layout and a column-sparse
//! layout depending on fill ratio. Logical matrices (every column a canonical
//! unit vector) are stored as an array of 0-based row indices, one per column.

use std::fmt;

use crate::error::{Error, Result};

/// Default cap on `rows * cols` of any matrix produced by the kernel.
pub const DEFAULT_MAX_ENTRIES: u64 = 1 << 26;

/// Fill ratio below which real matrices use the column-sparse layout.
pub const SPARSE_DENSITY: f64 = 0.25;

/// Resource limits applied to every matrix construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_entries: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }
}

impl Limits {
    pub fn check(&self, rows: usize, cols: usize, what: &str) -> Result<()> {
        let total = (rows as u128) * (cols as u128);
        if total > self.max_entries as u128 {
            return Err(Error::Resource(format!(
                "{what} would be {rows}x{cols} ({total} entries), above the cap of {}",
                self.max_entries
            )));
        }
        Ok(())
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[derive(Clone, Debug)]
enum Storage {
    /// Column-major.
    Dense(Vec<f64>),
    /// Per column, nonzero entries sorted by row.
    Sparse(Vec<Vec<(usize, f64)>>),
}

/// Real matrix with automatic dense/sparse layout.
#[derive(Clone, Debug)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    storage: Storage,
}

impl RealMatrix {
    /// Builds a matrix from per-column entry lists. Zero entries are dropped and
    /// duplicate rows within a column are summed.
    pub fn from_columns(rows: usize, mut columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows == 0 || columns.is_empty() {
            return Err(Error::Argument("matrix dimensions must be positive".into()));
        }
        let cols = columns.len();
        let mut nnz = 0usize;
        for col in &mut columns {
            col.sort_by_key(|&(r, _)| r);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(col.len());
            for &(r, v) in col.iter() {
                if r >= rows {
                    return Err(Error::Argument(format!(
                        "row index {r} out of bounds for {rows} rows"
                    )));
                }
                match merged.last_mut() {
                    Some(last) if last.0 == r => last.1 += v,
                    _ => merged.push((r, v)),
                }
            }
            merged.retain(|&(_, v)| v != 0.0);
            nnz += merged.len();
            *col = merged;
        }
        let density = nnz as f64 / (rows as f64 * cols as f64);
        let storage = if density < SPARSE_DENSITY {
            Storage::Sparse(columns)
        } else {
            let mut data = vec![0.0; rows * cols];
            for (c, col) in columns.iter().enumerate() {
                for &(r, v) in col {
                    data[c * rows + r] = v;
                }
            }
            Storage::Dense(data)
        };
        Ok(RealMatrix {
            rows,
            cols,
            storage,
        })
    }

    /// Builds a matrix from a row-major literal.
    pub fn from_rows(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Argument(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        let columns = (0..cols)
            .map(|c| (0..rows).map(|r| (r, data[r * cols + c])).collect())
            .collect();
        Self::from_columns(rows, columns)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_columns(n, (0..n).map(|c| vec![(c, 1.0)]).collect())
            .expect("identity of positive size")
    }

    /// Row vector of ones, `1_n^T`.
    pub fn ones_row(n: usize) -> Self {
        Self::from_columns(1, (0..n).map(|_| vec![(0, 1.0)]).collect())
            .expect("ones row of positive size")
    }

    pub fn column_vector(values: &[f64]) -> Result<Self> {
        Self::from_columns(
            values.len(),
            vec![values.iter().copied().enumerate().collect()],
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        match &self.storage {
            Storage::Dense(d) => d[col * self.rows + row],
            Storage::Sparse(cols) => cols[col]
                .binary_search_by_key(&row, |&(r, _)| r)
                .map(|i| cols[col][i].1)
                .unwrap_or(0.0),
        }
    }

    fn for_each_in_column(&self, col: usize, mut f: impl FnMut(usize, f64)) {
        match &self.storage {
            Storage::Dense(d) => {
                for (r, &v) in d[col * self.rows..(col + 1) * self.rows].iter().enumerate() {
                    if v != 0.0 {
                        f(r, v);
                    }
                }
            }
            Storage::Sparse(cols) => {
                for &(r, v) in &cols[col] {
                    f(r, v);
                }
            }
        }
    }

    /// Nonzero entries of one column, sorted by row.
    pub fn column(&self, col: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.for_each_in_column(col, |r, v| out.push((r, v)));
        out
    }

    pub fn nnz(&self) -> usize {
        (0..self.cols).map(|c| self.column(c).len()).sum()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for c in 0..self.cols {
            self.for_each_in_column(c, |r, v| out[r * self.cols + c] = v);
        }
        out
    }

    /// Largest absolute entry-wise difference, or `None` on shape mismatch.
    pub fn max_abs_diff(&self, other: &RealMatrix) -> Option<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        let a = self.to_row_major();
        let b = other.to_row_major();
        Some(
            a.iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Ordinary matrix product; requires `self.cols == other.rows`.
    pub fn matmul(&self, other: &RealMatrix, limits: &Limits) -> Result<RealMatrix> {
        if self.cols != other.rows {
            return Err(Error::Argument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        limits.check(self.rows, other.cols, "matrix product")?;
        let mut acc = vec![0.0; self.rows];
        let mut touched = Vec::new();
        let mut columns = Vec::with_capacity(other.cols);
        for j in 0..other.cols {
            other.for_each_in_column(j, |k, bv| {
                self.for_each_in_column(k, |i, av| {
                    if acc[i] == 0.0 {
                        touched.push(i);
                    }
                    acc[i] += av * bv;
                });
            });
            touched.sort_unstable();
            touched.dedup();
            let col: Vec<(usize, f64)> = touched.iter().map(|&i| (i, acc[i])).collect();
            for &i in &touched {
                acc[i] = 0.0;
            }
            touched.clear();
            columns.push(col);
        }
        RealMatrix::from_columns(self.rows, columns)
    }

    /// Horizontal concatenation `[A_1 A_2 ... A_k]`.
    pub fn hconcat(blocks: &[&RealMatrix]) -> Result<RealMatrix> {
        let rows = blocks
            .first()
            .ok_or_else(|| Error::Argument("nothing to concatenate".into()))?
            .rows;
        let mut columns = Vec::new();
        for b in blocks {
            if b.rows != rows {
                return Err(Error::Argument("row counts differ in concatenation".into()));
            }
            for c in 0..b.cols {
                columns.push(b.column(c));
            }
        }
        RealMatrix::from_columns(rows, columns)
    }

    /// Returns the logical view if every column is a canonical unit vector.
    pub fn as_logical(&self) -> Option<LogicalMatrix> {
        let mut idx = Vec::with_capacity(self.cols);
        for c in 0..self.cols {
            match self.column(c).as_slice() {
                [(r, v)] if *v == 1.0 => idx.push(*r),
                _ => return None,
            }
        }
        Some(LogicalMatrix {
            rows: self.rows,
            col_index: idx,
        })
    }
}

impl PartialEq for RealMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && (0..self.cols).all(|c| self.column(c) == other.column(c))
    }
}

/// Kronecker product with the default limits.
pub fn kron(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    kron_with(a, b, &Limits::default())
}

pub fn kron_with(a: &RealMatrix, b: &RealMatrix, limits: &Limits) -> Result<RealMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    limits.check(rows, cols, "Kronecker product")?;
    let mut columns = Vec::with_capacity(cols);
    for ca in 0..a.cols {
        let col_a = a.column(ca);
        for cb in 0..b.cols {
            let col_b = b.column(cb);
            let mut col = Vec::with_capacity(col_a.len() * col_b.len());
            for &(ra, va) in &col_a {
                for &(rb, vb) in &col_b {
                    col.push((ra * b.rows + rb, va * vb));
                }
            }
            columns.push(col);
        }
    }
    RealMatrix::from_columns(rows, columns)
}

/// Khatri-Rao (column-wise Kronecker) product.
pub fn khatri_rao(m: &RealMatrix, n: &RealMatrix) -> Result<RealMatrix> {
    if m.cols != n.cols {
        return Err(Error::Argument(format!(
            "Khatri-Rao product needs equal column counts, got {} and {}",
            m.cols, n.cols
        )));
    }
    Limits::default().check(m.rows * n.rows, m.cols, "Khatri-Rao product")?;
    let columns = (0..m.cols)
        .map(|c| {
            let cm = m.column(c);
            let cn = n.column(c);
            let mut col = Vec::with_capacity(cm.len() * cn.len());
            for &(rm, vm) in &cm {
                for &(rn, vn) in &cn {
                    col.push((rm * n.rows + rn, vm * vn));
                }
            }
            col
        })
        .collect();
    RealMatrix::from_columns(m.rows * n.rows, columns)
}

/// Left semi-tensor product `a ⋉ b` with the default limits.
pub fn stp_multiply(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    stp_multiply_with(a, b, &Limits::default())
}

/// `(a ⊗ I_{λ/cols(a)}) (b ⊗ I_{λ/rows(b)})` with `λ = lcm(cols(a), rows(b))`.
pub fn stp_multiply_with(a: &RealMatrix, b: &RealMatrix, limits: &Limits) -> Result<RealMatrix> {
    if a.cols == b.rows {
        return a.matmul(b, limits);
    }
    let l = lcm(a.cols, b.rows);
    let left = kron_with(a, &RealMatrix::identity(l / a.cols), limits)?;
    let right = kron_with(b, &RealMatrix::identity(l / b.rows), limits)?;
    left.matmul(&right, limits)
}

/// Matrix whose columns are canonical unit vectors, stored by 0-based row index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LogicalMatrix {
    rows: usize,
    col_index: Vec<usize>,
}

impl LogicalMatrix {
    pub fn new(rows: usize, col_index: Vec<usize>) -> Result<Self> {
        if rows == 0 || col_index.is_empty() {
            return Err(Error::Argument(
                "logical matrix dimensions must be positive".into(),
            ));
        }
        if let Some(&bad) = col_index.iter().find(|&&i| i >= rows) {
            return Err(Error::OutOfRange {
                index: bad + 1,
                max: rows,
            });
        }
        Ok(LogicalMatrix { rows, col_index })
    }

    /// Builds `δ_rows[i_1 ... i_k]` from 1-based indices.
    pub fn from_delta(rows: usize, one_based: &[usize]) -> Result<Self> {
        if let Some(&bad) = one_based.iter().find(|&&i| i == 0 || i > rows) {
            return Err(Error::OutOfRange {
                index: bad,
                max: rows,
            });
        }
        Self::new(rows, one_based.iter().map(|i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        LogicalMatrix {
            rows: n,
            col_index: (0..n).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.col_index.len()
    }

    /// 0-based row of the unit entry in column `col`.
    #[inline]
    pub fn index(&self, col: usize) -> usize {
        self.col_index[col]
    }

    pub fn indices(&self) -> &[usize] {
        &self.col_index
    }

    /// 1-based indices as written in `δ_k[...]` notation.
    pub fn delta_indices(&self) -> Vec<usize> {
        self.col_index.iter().map(|i| i + 1).collect()
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix::from_columns(
            self.rows,
            self.col_index.iter().map(|&r| vec![(r, 1.0)]).collect(),
        )
        .expect("logical matrix has positive dimensions")
    }

    pub fn kron(&self, other: &LogicalMatrix) -> Result<LogicalMatrix> {
        // Only the column-index array is stored.
        Limits::default().check(self.cols() * other.cols(), 1, "Kronecker product")?;
        let mut idx = Vec::with_capacity(self.cols() * other.cols());
        for &a in &self.col_index {
            for &b in &other.col_index {
                idx.push(a * other.rows + b);
            }
        }
        Ok(LogicalMatrix {
            rows: self.rows * other.rows,
            col_index: idx,
        })
    }

    pub fn khatri_rao(&self, other: &LogicalMatrix) -> Result<LogicalMatrix> {
        if self.cols() != other.cols() {
            return Err(Error::Argument(format!(
                "Khatri-Rao product needs equal column counts, got {} and {}",
                self.cols(),
                other.cols()
            )));
        }
        Ok(LogicalMatrix {
            rows: self.rows * other.rows,
            col_index: self
                .col_index
                .iter()
                .zip(&other.col_index)
                .map(|(&a, &b)| a * other.rows + b)
                .collect(),
        })
    }

    /// Product `self · other` by column lookup.
    pub fn compose(&self, other: &LogicalMatrix) -> Result<LogicalMatrix> {
        logical_compose(self, other)
    }
}

impl fmt::Display for LogicalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "delta{}[", self.rows)?;
        for (k, i) in self.col_index.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("]")
    }
}

/// Semi-tensor product of logical matrices, by column lookup.
///
/// When `a.cols() == b.rows()` this is `(a · b).col[c] = a.col[b.col[c]]`;
/// otherwise both factors are padded with identities to the lcm first.
pub fn logical_compose(a: &LogicalMatrix, b: &LogicalMatrix) -> Result<LogicalMatrix> {
    let n = a.cols();
    let q = b.rows;
    if n == 0 || q == 0 {
        return Err(Error::Argument(format!(
            "cannot compose {}x{} with {}x{}",
            a.rows,
            n,
            q,
            b.cols()
        )));
    }
    let l = lcm(n, q);
    let (fa, fb) = (l / n, l / q);
    Limits::default().check(b.cols() * fb, 1, "semi-tensor product")?;
    // (a ⊗ I_fa).col[x * fa + s] = a.col[x] * fa + s, likewise for b
    let mut col_index = Vec::with_capacity(b.cols() * fb);
    for &k in &b.col_index {
        for t in 0..fb {
            let mid = k * fb + t;
            col_index.push(a.col_index[mid / fa] * fa + mid % fa);
        }
    }
    Ok(LogicalMatrix {
        rows: a.rows * fa,
        col_index,
    })
}

/// Dense 0/1 matrix stored row-major as packed words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BooleanMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BooleanMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        BooleanMatrix {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::new(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        let w = self.bits[row * self.words_per_row + col / 64];
        (w >> (col % 64)) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        let w = &mut self.bits[row * self.words_per_row + col / 64];
        if value {
            *w |= 1 << (col % 64);
        } else {
            *w &= !(1 << (col % 64));
        }
    }

    /// Packed words of one row; bits past `cols` are zero.
    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.bits[row * self.words_per_row..(row + 1) * self.words_per_row]
    }

    pub fn column(&self, col: usize) -> Vec<bool> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }
}
