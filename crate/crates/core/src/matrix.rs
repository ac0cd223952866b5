//! Dense complex matrices, exact root-of-unity matrices and permanents.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest dimension accepted by [`permanent_naive`].
pub const NAIVE_PERMANENT_MAX_DIM: usize = 10;
/// Largest dimension accepted by [`permanent_ryser`].
pub const RYSER_MAX_DIM: usize = 30;
/// Below this dimension Ryser's sum runs on a single thread.
const RYSER_PARALLEL_MIN_DIM: usize = 18;
/// Gray-code steps per parallel chunk (log2).
const RYSER_CHUNK_BITS: usize = 14;

/// Dense row-major complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
    }

    /// Permutation matrix with `P e_x = e_{perm[x]}`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        check_bijection(perm)?;
        let n = perm.len();
        let mut m = Self::zeros(n, n);
        for (x, &px) in perm.iter().enumerate() {
            m[(px, x)] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Kronecker product, `self` on the most significant index.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Reorders columns so that column `j` of the result is column `perm[j]` of `self`.
    pub fn select_columns(&self, perm: &[usize]) -> Result<Self> {
        if let Some(&bad) = perm.iter().find(|&&j| j >= self.cols) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.cols,
            });
        }
        Ok(Self::from_fn(self.rows, perm.len(), |i, j| {
            self[(i, perm[j])]
        }))
    }

    /// Reorders rows so that row `i` of the result is row `perm[i]` of `self`.
    pub fn select_rows(&self, perm: &[usize]) -> Result<Self> {
        if let Some(&bad) = perm.iter().find(|&&i| i >= self.rows) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.rows,
            });
        }
        Ok(Self::from_fn(perm.len(), self.cols, |i, j| {
            self[(perm[i], j)]
        }))
    }

    /// Max-norm deviation of `m m†` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: C64 = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(a, b)| a * b.conj())
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

pub(crate) fn check_bijection(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of 0..{}",
                perm.len()
            )));
        }
    }
    Ok(())
}

fn require_square(m: &ComplexMatrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.rows)
    } else {
        Err(Error::Dimension(format!(
            "permanent of a non-square {}x{} matrix",
            m.rows, m.cols
        )))
    }
}

/// Permanent by direct summation over all permutations.
///
/// Kept deliberately naive: it is the reference against which the fast
/// kernel is checked.
pub fn permanent_naive(m: &ComplexMatrix) -> Result<C64> {
    let n = require_square(m)?;
    if n > NAIVE_PERMANENT_MAX_DIM {
        return Err(Error::TooLarge {
            what: "naive permanent",
            size: n,
            limit: NAIVE_PERMANENT_MAX_DIM,
        });
    }

    fn walk(m: &ComplexMatrix, row: usize, used: u32, partial: C64) -> C64 {
        if row == m.rows {
            return partial;
        }
        let mut acc = C64::new(0.0, 0.0);
        for col in 0..m.cols {
            if used & (1 << col) == 0 {
                acc += walk(m, row + 1, used | (1 << col), partial * m[(row, col)]);
            }
        }
        acc
    }

    Ok(walk(m, 0, 0, C64::new(1.0, 0.0)))
}

/// Permanent by Ryser's inclusion-exclusion formula, visiting column
/// subsets in Gray-code order so each step touches one column.
///
/// Large inputs are split into fixed Gray-code ranges evaluated in
/// parallel and summed in range order, so the result does not depend on
/// thread scheduling.
pub fn permanent_ryser(m: &ComplexMatrix) -> Result<C64> {
    let n = require_square(m)?;
    if n > RYSER_MAX_DIM {
        return Err(Error::TooLarge {
            what: "Ryser permanent",
            size: n,
            limit: RYSER_MAX_DIM,
        });
    }
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let end = 1u64 << n;
    let acc = if n < RYSER_PARALLEL_MIN_DIM {
        ryser_range(m, 1, end)
    } else {
        let chunk = 1u64 << RYSER_CHUNK_BITS;
        let starts: Vec<u64> = (0..end / chunk).map(|c| (c * chunk).max(1)).collect();
        let partials: Vec<C64> = starts
            .par_iter()
            .map(|&s| ryser_range(m, s, (s | (chunk - 1)) + 1))
            .collect();
        partials.into_iter().sum()
    };
    Ok(if n % 2 == 1 { -acc } else { acc })
}

/// Signed Ryser terms for Gray-code steps `start..end` (`start >= 1`).
fn ryser_range(m: &ComplexMatrix, start: u64, end: u64) -> C64 {
    let n = m.rows;
    let mut sums = vec![C64::new(0.0, 0.0); n];
    let prev = start - 1;
    let gray_prev = prev ^ (prev >> 1);
    for j in 0..n {
        if gray_prev >> j & 1 == 1 {
            for (i, s) in sums.iter_mut().enumerate() {
                *s += m[(i, j)];
            }
        }
    }

    let mut acc = C64::new(0.0, 0.0);
    for k in start..end {
        let j = k.trailing_zeros() as usize;
        let gray = k ^ (k >> 1);
        if gray >> j & 1 == 1 {
            for (i, s) in sums.iter_mut().enumerate() {
                *s += m[(i, j)];
            }
        } else {
            for (i, s) in sums.iter_mut().enumerate() {
                *s -= m[(i, j)];
            }
        }
        let prod: C64 = sums.iter().product();
        if gray.count_ones() % 2 == 1 {
            acc -= prod;
        } else {
            acc += prod;
        }
    }
    acc
}

/// Permanent through the fast kernel.
pub fn permanent(m: &ComplexMatrix) -> Result<C64> {
    permanent_ryser(m)
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && m.unitarity_deviation() <= tol
}

/// Repeats column `k` of `m` `counts[k]` times, repetitions grouped in
/// ascending source order.
pub fn repeat_columns(m: &ComplexMatrix, counts: &[usize]) -> Result<ComplexMatrix> {
    if counts.len() != m.cols {
        return Err(Error::Dimension(format!(
            "pattern of length {} for a matrix with {} columns",
            counts.len(),
            m.cols
        )));
    }
    let source: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(k, &d)| std::iter::repeat_n(k, d))
        .collect();
    m.select_columns(&source)
}

pub fn remove_row(m: &ComplexMatrix, i: usize) -> Result<ComplexMatrix> {
    if i >= m.rows {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: m.rows,
        });
    }
    let keep: Vec<usize> = (0..m.rows).filter(|&r| r != i).collect();
    m.select_rows(&keep)
}

/// Haar-random unitary: Gram-Schmidt on a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let mut cols: Vec<Vec<C64>> = (0..dim)
            .map(|_| {
                (0..dim)
                    .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect()
            })
            .collect();
        let mut degenerate = false;
        for k in 0..dim {
            let (done, rest) = cols.split_at_mut(k);
            let v = &mut rest[0];
            for q in done.iter() {
                let proj: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            v.iter_mut().for_each(|z| *z /= norm);
        }
        if !degenerate {
            return ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i]);
        }
    }
}

/// `exp(2πi·exponent/order)`, exact on quarter turns.
pub fn root_of_unity(exponent: usize, order: usize) -> C64 {
    let e = exponent % order;
    if (4 * e).is_multiple_of(order) {
        return match 4 * e / order {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    let theta = 2.0 * PI * e as f64 / order as f64;
    C64::new(theta.cos(), theta.sin())
}

/// Matrix whose entries are roots of unity `exp(2πi·e(i,j)/order)`,
/// stored by their integer exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnityMatrix {
    order: usize,
    rows: usize,
    cols: usize,
    exponents: Vec<usize>,
}

impl RootOfUnityMatrix {
    /// Exponents are reduced modulo `order`.
    pub fn new(order: usize, rows: usize, cols: usize, exponents: Vec<usize>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "root-of-unity order must be positive".into(),
            ));
        }
        if exponents.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} exponents supplied for a {rows}x{cols} matrix",
                exponents.len()
            )));
        }
        let exponents = exponents.into_iter().map(|e| e % order).collect();
        Ok(Self {
            order,
            rows,
            cols,
            exponents,
        })
    }

    pub fn from_fn(
        order: usize,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> usize,
    ) -> Self {
        assert!(order > 0, "root-of-unity order must be positive");
        let mut exponents = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                exponents.push(f(i, j) % order);
            }
        }
        Self {
            order,
            rows,
            cols,
            exponents,
        }
    }

    /// Recovers exponents from a complex matrix whose entries lie within
    /// `tol` of `order`-th roots of unity.
    pub fn from_complex(m: &ComplexMatrix, order: usize, tol: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "root-of-unity order must be positive".into(),
            ));
        }
        let mut exponents = Vec::with_capacity(m.rows * m.cols);
        for z in m.as_slice() {
            let turns = z.arg() / (2.0 * PI) * order as f64;
            let e = (turns.round() as i64).rem_euclid(order as i64) as usize;
            let err = (z - root_of_unity(e, order)).norm();
            if err > tol {
                return Err(Error::InvalidArgument(format!(
                    "entry {z} is not an order-{order} root of unity (error {err:.3e})"
                )));
            }
            exponents.push(e);
        }
        Self::new(order, m.rows, m.cols, exponents)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn exponent(&self, i: usize, j: usize) -> usize {
        self.exponents[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.exponents[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        self.to_complex_scaled(1.0)
    }

    pub fn to_complex_scaled(&self, factor: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            root_of_unity(self.exponent(i, j), self.order) * factor
        })
    }

    /// Rewrites the exponents over a multiple of the current order.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        if order == 0 || !order.is_multiple_of(self.order) {
            return Err(Error::InvalidArgument(format!(
                "{order} is not a multiple of {}",
                self.order
            )));
        }
        let factor = order / self.order;
        Ok(Self {
            order,
            rows: self.rows,
            cols: self.cols,
            exponents: self.exponents.iter().map(|e| e * factor).collect(),
        })
    }

    /// Kronecker product in exponent arithmetic over the common order
    /// `lcm(self.order, other.order)`.
    pub fn kron(&self, other: &Self) -> Self {
        let order = lcm(self.order, other.order);
        let (fa, fb) = (order / self.order, order / other.order);
        Self::from_fn(
            order,
            self.rows * other.rows,
            self.cols * other.cols,
            |i, j| {
                fa * self.exponent(i / other.rows, j / other.cols)
                    + fb * other.exponent(i % other.rows, j % other.cols)
            },
        )
    }

    /// Column `j` of the result is column `perm[j]` of `self`.
    pub fn select_columns(&self, perm: &[usize]) -> Result<Self> {
        if let Some(&bad) = perm.iter().find(|&&j| j >= self.cols) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.cols,
            });
        }
        Ok(Self::from_fn(self.order, self.rows, perm.len(), |i, j| {
            self.exponent(i, perm[j])
        }))
    }
}

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
