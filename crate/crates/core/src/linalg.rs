//! Exact dense matrices over the rationals and prime fields.
//!
//! Objects of the ground category are dimensions and morphisms are matrices.
//! Every algorithm is written once against a small arithmetic trait and
//! dispatched on the storage variant, so `F_p` and `Q` share code paths.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("matrix is not idempotent")]
    NotIdempotent,
    #[error("matrix is singular")]
    Singular,
    #[error("matrix does not have full column rank")]
    NotFullColumnRank,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Coefficient field. `Prime(p)` stores residues in `0..p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Rational,
    Prime(u32),
}

impl Field {
    pub const F2: Field = Field::Prime(2);

    pub fn prime(p: u64) -> Result<Field, LinalgError> {
        if !(2..(1 << 31)).contains(&p) || !is_prime(p) {
            return Err(LinalgError::NotPrime(p));
        }
        Ok(Field::Prime(p as u32))
    }

    pub fn characteristic(&self) -> u32 {
        match self {
            Field::Rational => 0,
            Field::Prime(p) => *p,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "F{p}"),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 4 {
        return p >= 2;
    }
    if p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// A single field element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Fp(u32),
    Q(BigRational),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Fp(v) => *v == 0,
            Scalar::Q(q) => q.is_zero(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Fp(v) => write!(f, "{v}"),
            Scalar::Q(q) => write!(f, "{q}"),
        }
    }
}

trait Arith {
    type E: Clone + PartialEq;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Self::E;
    fn from_i64(&self, v: i64) -> Self::E;

    /// `a * x + y`, in place on `y`.
    fn axpy(&self, a: &Self::E, x: &[Self::E], y: &mut [Self::E]) {
        for (yi, xi) in y.iter_mut().zip(x) {
            if !self.is_zero(xi) {
                *yi = self.add(yi, &self.mul(a, xi));
            }
        }
    }
}

struct Fp(u64);

impl Arith for Fp {
    type E = u32;
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 + *b as u64) % self.0) as u32
    }
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 + self.0 - *b as u64) % self.0) as u32
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 * *b as u64) % self.0) as u32
    }
    fn neg(&self, a: &u32) -> u32 {
        ((self.0 - *a as u64) % self.0) as u32
    }
    fn inv(&self, a: &u32) -> u32 {
        assert!(*a != 0, "inverse of zero");
        let (mut base, mut exp, mut acc) = (*a as u64, self.0 - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.0;
            }
            base = base * base % self.0;
            exp >>= 1;
        }
        acc as u32
    }
    fn from_i64(&self, v: i64) -> u32 {
        v.rem_euclid(self.0 as i64) as u32
    }
    fn axpy(&self, a: &u32, x: &[u32], y: &mut [u32]) {
        if self.0 == 2 {
            if *a == 1 {
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi ^= *xi;
                }
            }
            return;
        }
        let a = *a as u64;
        for (yi, xi) in y.iter_mut().zip(x) {
            if *xi != 0 {
                *yi = ((*yi as u64 + a * *xi as u64) % self.0) as u32;
            }
        }
    }
}

struct Qa;

impl Arith for Qa {
    type E = BigRational;
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        a.recip()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Data {
    Fp(Vec<u32>),
    Q(Vec<BigRational>),
}

/// Dense row-major matrix over a [`Field`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Data,
}

/// Run `$body` with `$a` bound to the arithmetic and `$v` to the entry slice.
macro_rules! with_data {
    ($m:expr, |$a:ident, $v:ident| $body:expr) => {
        match (&$m.field, &$m.data) {
            (Field::Prime(p), Data::Fp($v)) => {
                let $a = Fp(*p as u64);
                $body
            }
            (Field::Rational, Data::Q($v)) => {
                let $a = Qa;
                $body
            }
            _ => unreachable!("storage does not match field"),
        }
    };
}

impl Matrix {
    fn wrap_fp(field: Field, rows: usize, cols: usize, v: Vec<u32>) -> Matrix {
        Matrix { field, rows, cols, data: Data::Fp(v) }
    }

    fn wrap_q(rows: usize, cols: usize, v: Vec<BigRational>) -> Matrix {
        Matrix { field: Field::Rational, rows, cols, data: Data::Q(v) }
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        match field {
            Field::Prime(_) => Matrix::wrap_fp(field, rows, cols, vec![0; rows * cols]),
            Field::Rational => Matrix::wrap_q(rows, cols, vec![BigRational::zero(); rows * cols]),
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set_i64(i, i, 1);
        }
        m
    }

    /// Build from integer entries in row-major order, reduced into the field.
    pub fn from_i64(field: Field, rows: usize, cols: usize, entries: &[i64]) -> Matrix {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows * cols");
        match field {
            Field::Prime(p) => {
                let a = Fp(p as u64);
                Matrix::wrap_fp(field, rows, cols, entries.iter().map(|&e| a.from_i64(e)).collect())
            }
            Field::Rational => {
                Matrix::wrap_q(rows, cols, entries.iter().map(|&e| Qa.from_i64(e)).collect())
            }
        }
    }

    pub fn from_rows(field: Field, rows: &[Vec<i64>]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let flat: Vec<i64> = rows.iter().flat_map(|row| {
            assert_eq!(row.len(), c, "ragged rows");
            row.iter().copied()
        }).collect();
        Matrix::from_i64(field, r, c, &flat)
    }

    /// Column matrix from a slice of integers.
    pub fn column(field: Field, entries: &[i64]) -> Matrix {
        Matrix::from_i64(field, entries.len(), 1, entries)
    }

    /// Permutation matrix sending basis vector `j` to `perm[j]`.
    pub fn permutation(field: Field, perm: &[usize]) -> Matrix {
        let n = perm.len();
        let mut m = Matrix::zeros(field, n, n);
        for (j, &i) in perm.iter().enumerate() {
            m.set_i64(i, j, 1);
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        assert!(i < self.rows && j < self.cols, "index out of range");
        match &self.data {
            Data::Fp(v) => Scalar::Fp(v[i * self.cols + j]),
            Data::Q(v) => Scalar::Q(v[i * self.cols + j].clone()),
        }
    }

    pub fn set_i64(&mut self, i: usize, j: usize, value: i64) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        let idx = i * self.cols + j;
        match (&self.field, &mut self.data) {
            (Field::Prime(p), Data::Fp(v)) => v[idx] = Fp(*p as u64).from_i64(value),
            (Field::Rational, Data::Q(v)) => v[idx] = Qa.from_i64(value),
            _ => unreachable!(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: &Scalar) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        let idx = i * self.cols + j;
        match (&mut self.data, value) {
            (Data::Fp(v), Scalar::Fp(x)) => v[idx] = *x,
            (Data::Q(v), Scalar::Q(x)) => v[idx] = x.clone(),
            _ => panic!("scalar does not belong to the matrix field"),
        }
    }

    /// Entry as a signed integer when it has one (`F_p` residues are
    /// returned in the symmetric range, rationals only when integral).
    pub fn get_i64(&self, i: usize, j: usize) -> Option<i64> {
        match self.get(i, j) {
            Scalar::Fp(v) => {
                let p = self.field.characteristic() as i64;
                let v = v as i64;
                Some(if v > p / 2 { v - p } else { v })
            }
            Scalar::Q(q) => {
                if q.is_integer() {
                    let n = q.to_integer();
                    i64::try_from(n).ok()
                } else {
                    None
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        with_data!(self, |a, v| v.iter().all(|x| a.is_zero(x)))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Matrix::identity(self.field, self.rows)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn count_nonzero(&self) -> usize {
        with_data!(self, |a, v| v.iter().filter(|x| !a.is_zero(x)).count())
    }

    fn check_same(&self, other: &Matrix, what: &str) {
        assert_eq!(self.field, other.field, "{what}: field mismatch");
        assert_eq!(self.shape(), other.shape(), "{what}: shape mismatch");
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.check_same(other, "add");
        self.zip_with(other, false)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.check_same(other, "sub");
        self.zip_with(other, true)
    }

    fn zip_with(&self, other: &Matrix, subtract: bool) -> Matrix {
        match (&self.data, &other.data) {
            (Data::Fp(x), Data::Fp(y)) => {
                let a = Fp(self.field.characteristic() as u64);
                let v = x.iter().zip(y).map(|(p, q)| if subtract { a.sub(p, q) } else { a.add(p, q) }).collect();
                Matrix::wrap_fp(self.field, self.rows, self.cols, v)
            }
            (Data::Q(x), Data::Q(y)) => {
                let v = x.iter().zip(y).map(|(p, q)| if subtract { p - q } else { p + q }).collect();
                Matrix::wrap_q(self.rows, self.cols, v)
            }
            _ => unreachable!(),
        }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(-1)
    }

    pub fn scale(&self, c: i64) -> Matrix {
        match &self.data {
            Data::Fp(x) => {
                let a = Fp(self.field.characteristic() as u64);
                let c = a.from_i64(c);
                Matrix::wrap_fp(self.field, self.rows, self.cols, x.iter().map(|e| a.mul(&c, e)).collect())
            }
            Data::Q(x) => {
                let c = Qa.from_i64(c);
                Matrix::wrap_q(self.rows, self.cols, x.iter().map(|e| &c * e).collect())
            }
        }
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.field, other.field, "mul: field mismatch");
        assert_eq!(
            self.cols, other.rows,
            "mul: ({}x{}) * ({}x{})",
            self.rows, self.cols, other.rows, other.cols
        );
        let (n, k, m) = (self.rows, self.cols, other.cols);
        match (&self.data, &other.data) {
            (Data::Fp(x), Data::Fp(y)) => {
                let a = Fp(self.field.characteristic() as u64);
                let mut out = vec![0u32; n * m];
                for i in 0..n {
                    let row = &mut out[i * m..(i + 1) * m];
                    for l in 0..k {
                        let c = x[i * k + l];
                        if c != 0 {
                            a.axpy(&c, &y[l * m..(l + 1) * m], row);
                        }
                    }
                }
                Matrix::wrap_fp(self.field, n, m, out)
            }
            (Data::Q(x), Data::Q(y)) => {
                let mut out = vec![BigRational::zero(); n * m];
                for i in 0..n {
                    let row = &mut out[i * m..(i + 1) * m];
                    for l in 0..k {
                        let c = &x[i * k + l];
                        if !c.is_zero() {
                            Qa.axpy(c, &y[l * m..(l + 1) * m], row);
                        }
                    }
                }
                Matrix::wrap_q(n, m, out)
            }
            _ => unreachable!(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let (r, c) = (self.rows, self.cols);
        let idx = |k: usize| (k % r) * c + k / r;
        match &self.data {
            Data::Fp(x) => Matrix::wrap_fp(self.field, c, r, (0..r * c).map(|k| x[idx(k)]).collect()),
            Data::Q(x) => Matrix::wrap_q(c, r, (0..r * c).map(|k| x[idx(k)].clone()).collect()),
        }
    }

    /// Kronecker product; basis `(i, j)` of the result is `i * dim(other) + j`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.field, other.field, "kron: field mismatch");
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let (rows, cols) = (r1 * r2, c1 * c2);
        match (&self.data, &other.data) {
            (Data::Fp(x), Data::Fp(y)) => {
                let a = Fp(self.field.characteristic() as u64);
                let mut out = vec![0u32; rows * cols];
                for i1 in 0..r1 {
                    for j1 in 0..c1 {
                        let s = x[i1 * c1 + j1];
                        if s == 0 {
                            continue;
                        }
                        for i2 in 0..r2 {
                            for j2 in 0..c2 {
                                out[(i1 * r2 + i2) * cols + j1 * c2 + j2] = a.mul(&s, &y[i2 * c2 + j2]);
                            }
                        }
                    }
                }
                Matrix::wrap_fp(self.field, rows, cols, out)
            }
            (Data::Q(x), Data::Q(y)) => {
                let mut out = vec![BigRational::zero(); rows * cols];
                for i1 in 0..r1 {
                    for j1 in 0..c1 {
                        let s = &x[i1 * c1 + j1];
                        if s.is_zero() {
                            continue;
                        }
                        for i2 in 0..r2 {
                            for j2 in 0..c2 {
                                out[(i1 * r2 + i2) * cols + j1 * c2 + j2] = s * &y[i2 * c2 + j2];
                            }
                        }
                    }
                }
                Matrix::wrap_q(rows, cols, out)
            }
            _ => unreachable!(),
        }
    }

    /// Block-diagonal sum of the given matrices.
    pub fn block_diag(field: Field, blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.paste(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Build a matrix from a grid of blocks with the given row and column
    /// partitions; `None` entries are zero.
    pub fn from_blocks(field: Field, row_dims: &[usize], col_dims: &[usize], block: impl Fn(usize, usize) -> Option<Matrix>) -> Matrix {
        let rows = row_dims.iter().sum();
        let cols = col_dims.iter().sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let mut r0 = 0;
        for (bi, &rd) in row_dims.iter().enumerate() {
            let mut c0 = 0;
            for (bj, &cd) in col_dims.iter().enumerate() {
                if let Some(b) = block(bi, bj) {
                    assert_eq!(b.shape(), (rd, cd), "from_blocks: block ({bi},{bj}) has wrong shape");
                    out.paste(r0, c0, &b);
                }
                c0 += cd;
            }
            r0 += rd;
        }
        out
    }

    /// Overwrite the block starting at `(r0, c0)` with `b`.
    pub fn paste(&mut self, r0: usize, c0: usize, b: &Matrix) {
        assert_eq!(self.field, b.field, "paste: field mismatch");
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "paste out of range");
        let cols = self.cols;
        match (&mut self.data, &b.data) {
            (Data::Fp(x), Data::Fp(y)) => {
                for i in 0..b.rows {
                    x[(r0 + i) * cols + c0..(r0 + i) * cols + c0 + b.cols].copy_from_slice(&y[i * b.cols..(i + 1) * b.cols]);
                }
            }
            (Data::Q(x), Data::Q(y)) => {
                for i in 0..b.rows {
                    x[(r0 + i) * cols + c0..(r0 + i) * cols + c0 + b.cols].clone_from_slice(&y[i * b.cols..(i + 1) * b.cols]);
                }
            }
            _ => unreachable!(),
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        let rs: Vec<usize> = (r0..r0 + rows).collect();
        let cs: Vec<usize> = (c0..c0 + cols).collect();
        self.select(&rs, &cs)
    }

    /// Submatrix on the given row and column indices, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let c = self.cols;
        match &self.data {
            Data::Fp(x) => {
                let v = rows.iter().flat_map(|&i| cols.iter().map(move |&j| x[i * c + j])).collect();
                Matrix::wrap_fp(self.field, rows.len(), cols.len(), v)
            }
            Data::Q(x) => {
                let v = rows.iter().flat_map(|&i| cols.iter().map(move |&j| x[i * c + j].clone())).collect();
                Matrix::wrap_q(rows.len(), cols.len(), v)
            }
        }
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, cols)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let cols: Vec<usize> = (0..self.cols).collect();
        self.select(rows, &cols)
    }

    pub fn hstack(field: Field, parts: &[&Matrix]) -> Matrix {
        let rows = parts.first().map_or(0, |p| p.rows);
        let dims: Vec<usize> = parts.iter().map(|p| p.cols).collect();
        Matrix::from_blocks(field, &[rows], &dims, |_, j| Some(parts[j].clone()))
    }

    pub fn vstack(field: Field, parts: &[&Matrix]) -> Matrix {
        let cols = parts.first().map_or(0, |p| p.cols);
        let dims: Vec<usize> = parts.iter().map(|p| p.rows).collect();
        Matrix::from_blocks(field, &dims, &[cols], |i, _| Some(parts[i].clone()))
    }

    /// Reduced row echelon form and pivot columns (leftmost pivot first).
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        match (&self.field, &self.data) {
            (Field::Prime(p), Data::Fp(v)) => {
                let mut v = v.clone();
                let piv = rref_in_place(&Fp(*p as u64), &mut v, self.rows, self.cols);
                (Matrix::wrap_fp(self.field, self.rows, self.cols, v), piv)
            }
            (Field::Rational, Data::Q(v)) => {
                let mut v = v.clone();
                let piv = rref_in_place(&Qa, &mut v, self.rows, self.cols);
                (Matrix::wrap_q(self.rows, self.cols, v), piv)
            }
            _ => unreachable!(),
        }
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        // Eliminate along the shorter side.
        if self.rows > self.cols {
            return self.transpose().rank();
        }
        self.rref().1.len()
    }

    /// Columns form a basis of the kernel, one vector per free column with
    /// a 1 in that column (column-echelon, free columns in increasing order).
    pub fn kernel_basis(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let n = self.cols;
        let free: Vec<usize> = (0..n).filter(|j| !pivots.contains(j)).collect();
        let mut out = Matrix::zeros(self.field, n, free.len());
        for (col, &f) in free.iter().enumerate() {
            out.set_i64(f, col, 1);
            for (row, &p) in pivots.iter().enumerate() {
                let e = r.get(row, f);
                if !e.is_zero() {
                    out.set(p, col, &negate(&e, self.field));
                }
            }
        }
        out
    }

    /// The first linearly independent columns, in order.
    pub fn image_basis(&self) -> Matrix {
        let (_, pivots) = self.rref();
        self.select_cols(&pivots)
    }

    /// Indices of a lexicographically first maximal independent set of rows.
    pub fn independent_rows(&self) -> Vec<usize> {
        self.transpose().rref().1
    }

    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::ShapeMismatch(format!("inverse of {}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }
        let aug = Matrix::hstack(self.field, &[self, &Matrix::identity(self.field, n)]);
        let (r, piv) = aug.rref();
        if piv.len() < n || piv[n - 1] >= n {
            return Err(LinalgError::Singular);
        }
        Ok(r.block(0, n, n, n))
    }

    /// A left inverse `l` with `l * self = 1`, supported on the first
    /// independent rows.
    pub fn left_inverse(&self) -> Result<Matrix, LinalgError> {
        let rows = self.independent_rows();
        if rows.len() != self.cols {
            return Err(LinalgError::NotFullColumnRank);
        }
        let square = self.select_rows(&rows);
        let inv = square.inverse()?;
        let mut out = Matrix::zeros(self.field, self.cols, self.rows);
        let all: Vec<usize> = (0..self.cols).collect();
        for (k, &r) in rows.iter().enumerate() {
            out.paste(0, r, &inv.select(&all, &[k]));
        }
        Ok(out)
    }

    /// Solve `self * x = b` for `x`, or `None` if `b` is not in the image.
    pub fn solve(&self, b: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, b.rows, "solve: row mismatch");
        let n = self.cols;
        let aug = Matrix::hstack(self.field, &[self, b]);
        let (r, piv) = aug.rref();
        if piv.iter().any(|&p| p >= n) {
            return None;
        }
        let mut x = Matrix::zeros(self.field, n, b.cols);
        for (row, &p) in piv.iter().enumerate() {
            for j in 0..b.cols {
                x.set(p, j, &r.get(row, n + j));
            }
        }
        Some(x)
    }

    /// Columns completing the basis `self` (full column rank assumed) to a
    /// basis of the ambient space, chosen among standard vectors in order.
    pub fn complement_basis(&self) -> Matrix {
        let n = self.rows;
        let aug = Matrix::hstack(self.field, &[self, &Matrix::identity(self.field, n)]);
        let (_, piv) = aug.rref();
        let extra: Vec<usize> = piv.into_iter().filter(|&p| p >= self.cols).collect();
        aug.select_cols(&extra)
    }

    pub fn split_idempotent(&self) -> Result<SplitSummand, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::ShapeMismatch("idempotent must be square".into()));
        }
        if self.mul(self) != *self {
            return Err(LinalgError::NotIdempotent);
        }
        let incl = self.image_basis();
        let proj = incl.left_inverse()?.mul(self);
        Ok(SplitSummand { ambient_dim: self.rows, incl, proj })
    }
}

fn negate(s: &Scalar, field: Field) -> Scalar {
    match s {
        Scalar::Fp(v) => Scalar::Fp(Fp(field.characteristic() as u64).neg(v)),
        Scalar::Q(q) => Scalar::Q(-q),
    }
}

fn rref_in_place<A: Arith>(a: &A, v: &mut [A::E], rows: usize, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !a.is_zero(&v[i * cols + c])) else {
            continue;
        };
        if pr != r {
            for j in 0..cols {
                v.swap(pr * cols + j, r * cols + j);
            }
        }
        let inv = a.inv(&v[r * cols + c]);
        for j in c..cols {
            v[r * cols + j] = a.mul(&inv, &v[r * cols + j]);
        }
        let pivot_row: Vec<A::E> = v[r * cols..(r + 1) * cols].to_vec();
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = v[i * cols + c].clone();
            if !a.is_zero(&f) {
                let neg = a.neg(&f);
                a.axpy(&neg, &pivot_row[c..], &mut v[i * cols + c..(i + 1) * cols]);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix<{}> {}x{} [", self.field, self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// A direct summand presented by inclusion and projection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSummand {
    pub ambient_dim: usize,
    /// ambient_dim x dim
    pub incl: Matrix,
    /// dim x ambient_dim
    pub proj: Matrix,
}

impl SplitSummand {
    pub fn dim(&self) -> usize {
        self.incl.cols()
    }

    /// The whole space as a summand of itself.
    pub fn whole(field: Field, n: usize) -> SplitSummand {
        SplitSummand { ambient_dim: n, incl: Matrix::identity(field, n), proj: Matrix::identity(field, n) }
    }

    /// The idempotent `incl * proj`.
    pub fn idempotent(&self) -> Matrix {
        self.incl.mul(&self.proj)
    }

    /// Compose with a summand of this summand.
    pub fn refine(&self, inner: &SplitSummand) -> SplitSummand {
        SplitSummand {
            ambient_dim: self.ambient_dim,
            incl: self.incl.mul(&inner.incl),
            proj: inner.proj.mul(&self.proj),
        }
    }

    /// Conjugate an endomorphism-like map `ambient -> ambient'` into the summands.
    pub fn restrict(&self, target: &SplitSummand, map: &Matrix) -> Matrix {
        target.proj.mul(map).mul(&self.incl)
    }
}

/// Rational entry helper for tests and callers working over `Q`.
pub fn rational(n: i64, d: i64) -> Scalar {
    Scalar::Q(BigRational::new(BigInt::from(n), BigInt::from(d)))
}

/// Whether a rational scalar is negative; `F_p` scalars never are.
pub fn is_negative(s: &Scalar) -> bool {
    matches!(s, Scalar::Q(q) if q.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2(rows: &[Vec<i64>]) -> Matrix {
        Matrix::from_rows(Field::F2, rows)
    }

    #[test]
    fn kernel_of_zero_is_identity() {
        let z = Matrix::zeros(Field::F2, 2, 3);
        assert_eq!(z.kernel_basis(), Matrix::identity(Field::F2, 3));
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        let k = Matrix::identity(Field::Rational, 2).kernel_basis();
        assert_eq!(k.shape(), (2, 0));
    }

    #[test]
    fn f2_kernel_matches_enumeration() {
        let m = f2(&[vec![1, 1, 0], vec![0, 1, 1]]);
        let mut solutions = Vec::new();
        for bits in 0..8i64 {
            let v: Vec<i64> = (0..3).map(|i| (bits >> i) & 1).collect();
            if m.mul(&Matrix::column(Field::F2, &v)).is_zero() && bits != 0 {
                solutions.push(v);
            }
        }
        assert_eq!(solutions, vec![vec![1, 1, 1]]);
        assert_eq!(m.kernel_basis(), Matrix::column(Field::F2, &[1, 1, 1]));
    }

    #[test]
    fn image_basis_cases() {
        assert_eq!(Matrix::zeros(Field::F2, 2, 2).image_basis().cols(), 0);
        assert_eq!(Matrix::identity(Field::F2, 3).image_basis(), Matrix::identity(Field::F2, 3));
        let m = f2(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(m.image_basis(), Matrix::column(Field::F2, &[1, 1]));
    }

    #[test]
    fn split_idempotent_cases() {
        let z = Matrix::zeros(Field::F2, 3, 3).split_idempotent().unwrap();
        assert_eq!(z.dim(), 0);
        let id = Matrix::identity(Field::Rational, 2).split_idempotent().unwrap();
        assert!(id.incl.is_identity() && id.proj.is_identity());
        let e = f2(&[vec![1, 1], vec![0, 0]]);
        assert_eq!(e.mul(&e), e);
        let s = e.split_idempotent().unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.idempotent(), e);
        assert!(s.proj.mul(&s.incl).is_identity());
        let bad = Matrix::from_rows(Field::Rational, &[vec![2]]);
        assert_eq!(bad.split_idempotent(), Err(LinalgError::NotIdempotent));
    }

    #[test]
    fn rational_inverse_and_solve() {
        let m = Matrix::from_rows(Field::Rational, &[vec![2, 1], vec![1, 1]]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        let b = Matrix::column(Field::Rational, &[3, 2]);
        assert_eq!(m.solve(&b).unwrap(), Matrix::column(Field::Rational, &[1, 1]));
        let sing = Matrix::from_rows(Field::Rational, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(sing.inverse(), Err(LinalgError::Singular));
        assert!(sing.solve(&Matrix::column(Field::Rational, &[1, 0])).is_none());
    }

    #[test]
    fn half_is_exact() {
        let mut m = Matrix::zeros(Field::Rational, 1, 1);
        m.set(0, 0, &rational(1, 2));
        let two = Matrix::from_rows(Field::Rational, &[vec![2]]);
        assert!(m.mul(&two).is_identity());
        assert_eq!(m.get_i64(0, 0), None);
    }

    #[test]
    fn kron_and_blocks() {
        let a = Matrix::from_rows(Field::Rational, &[vec![1, 2]]);
        let b = Matrix::from_rows(Field::Rational, &[vec![0], vec![3]]);
        let k = a.kron(&b);
        assert_eq!(k, Matrix::from_rows(Field::Rational, &[vec![0, 0], vec![3, 6]]));
        let d = Matrix::block_diag(Field::Rational, &[&a, &b]);
        assert_eq!(d.shape(), (3, 3));
        assert_eq!(d.get_i64(2, 2), Some(3));
    }

    #[test]
    fn complement_completes_basis() {
        let b = Matrix::column(Field::F2, &[1, 1, 0]);
        let c = b.complement_basis();
        assert_eq!(c.cols(), 2);
        assert_eq!(Matrix::hstack(Field::F2, &[&b, &c]).rank(), 3);
    }

    #[test]
    fn prime_field_validation() {
        assert!(Field::prime(7).is_ok());
        assert_eq!(Field::prime(9), Err(LinalgError::NotPrime(9)));
        let f5 = Field::prime(5).unwrap();
        let m = Matrix::from_rows(f5, &[vec![2]]);
        assert_eq!(m.inverse().unwrap().get_i64(0, 0), Some(-2));
    }
}
