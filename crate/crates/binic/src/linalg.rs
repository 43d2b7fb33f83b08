//! Exact dense linear algebra over Z and Q at the small sizes used by the
//! correspondence (n <= 9, occasionally n^2 rows).
//!
//! Row convention: a lattice or ideal is the Z-span of the rows of a matrix.
//! Hermite normal form is therefore row-style: upper triangular, positive
//! pivots, entries above each pivot reduced into [0, pivot).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Dense matrix with row-major storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

pub type IMat = Mat<BigInt>;
pub type QMat = Mat<BigRational>;

impl<T: Clone> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }
}

impl<T: Clone + Zero + One> Mat<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }
}

impl<T> Mat<T>
where
    T: Clone + Zero + std::ops::Mul<Output = T> + std::ops::AddAssign,
{
    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Mat::<T>::from_fn(self.rows, other.cols, |_, _| T::zero());
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k).clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other.at(k, j).clone();
                    *out.at_mut(i, j) += prod;
                }
            }
        }
        out
    }
}

macro_rules! entrywise_ops {
    ($mat:ty, $scalar:ty) => {
        impl $mat {
            pub fn add(&self, other: &Self) -> Self {
                assert_eq!((self.rows, self.cols), (other.rows, other.cols));
                Self {
                    rows: self.rows,
                    cols: self.cols,
                    data: self
                        .data
                        .iter()
                        .zip(&other.data)
                        .map(|(a, b)| a + b)
                        .collect(),
                }
            }

            pub fn sub(&self, other: &Self) -> Self {
                assert_eq!((self.rows, self.cols), (other.rows, other.cols));
                Self {
                    rows: self.rows,
                    cols: self.cols,
                    data: self
                        .data
                        .iter()
                        .zip(&other.data)
                        .map(|(a, b)| a - b)
                        .collect(),
                }
            }

            pub fn scale(&self, c: &$scalar) -> Self {
                Self {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().map(|a| a * c).collect(),
                }
            }
        }
    };
}

entrywise_ops!(IMat, BigInt);
entrywise_ops!(QMat, BigRational);

impl IMat {
    pub fn to_rational(&self) -> QMat {
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| BigRational::from(x.clone())).collect(),
        }
    }

    /// Determinant by the Bareiss fraction-free elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    // Bareiss guarantees exact divisibility by the previous pivot.
                    m[i][j] = num / &prev;
                }
                m[i][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        sign * m[n - 1][n - 1].clone()
    }
}

impl QMat {
    /// Clears denominators: returns (integer matrix, common denominator d)
    /// with self = integer/d entrywise.
    pub fn clear_denominators(&self) -> (IMat, BigInt) {
        let mut d = BigInt::one();
        for x in &self.data {
            d = d.lcm(x.denom());
        }
        let data = self
            .data
            .iter()
            .map(|x| x.numer() * (&d / x.denom()))
            .collect();
        (IMat { rows: self.rows, cols: self.cols, data }, d)
    }

    pub fn det(&self) -> BigRational {
        let (int, d) = self.clear_denominators();
        let n = BigRational::from(int.det());
        let dn = BigRational::from(d.pow(self.rows as u32));
        n / dn
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a: Vec<Vec<BigRational>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut inv: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        for col in 0..n {
            let piv = (col..n).find(|&i| !a[i][col].is_zero())?;
            a.swap(col, piv);
            inv.swap(col, piv);
            let p = a[col][col].clone();
            for j in 0..n {
                a[col][j] = &a[col][j] / &p;
                inv[col][j] = &inv[col][j] / &p;
            }
            for i in 0..n {
                if i == col || a[i][col].is_zero() {
                    continue;
                }
                let factor = a[i][col].clone();
                for j in 0..n {
                    let t = &a[col][j] * &factor;
                    a[i][j] = &a[i][j] - &t;
                    let t = &inv[col][j] * &factor;
                    inv[i][j] = &inv[i][j] - &t;
                }
            }
        }
        Some(QMat::from_rows(inv))
    }

    /// Rank over Q by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut w: Vec<Vec<BigRational>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        let mut rank = 0usize;
        for col in 0..self.cols {
            let Some(p) = (rank..w.len()).find(|&i| !w[i][col].is_zero()) else {
                continue;
            };
            w.swap(rank, p);
            let pivot = w[rank][col].clone();
            for i in rank + 1..w.len() {
                if w[i][col].is_zero() {
                    continue;
                }
                let factor = &w[i][col] / &pivot;
                for j in col..self.cols {
                    let t = &factor * &w[rank][j];
                    w[i][j] -= t;
                }
            }
            rank += 1;
            if rank == w.len() {
                break;
            }
        }
        rank
    }

    /// Solves x * self = rhs for a row vector x (row-convention solve).
    pub fn solve_left(&self, rhs: &[BigRational]) -> Option<Vec<BigRational>> {
        let inv = self.inverse()?;
        assert_eq!(rhs.len(), self.rows);
        let mut out = vec![BigRational::zero(); self.cols];
        for j in 0..inv.cols {
            let mut acc = BigRational::zero();
            for i in 0..inv.rows {
                acc += rhs[i].clone() * inv.at(i, j).clone();
            }
            out[j] = acc;
        }
        Some(out)
    }
}

/// Row-style Hermite normal form of a full-column-rank integer matrix.
///
/// The input rows span a lattice of rank `cols`; the output is the unique
/// `cols x cols` basis that is upper triangular with positive pivots and
/// entries above each pivot reduced into [0, pivot). Panics when the rows do
/// not span a rank-`cols` lattice.
pub fn hnf(m: &IMat) -> IMat {
    let cols = m.cols;
    let mut work: Vec<Vec<BigInt>> = (0..m.rows)
        .map(|i| m.row(i).to_vec())
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut basis: Vec<Vec<BigInt>> = Vec::with_capacity(cols);
    for col in 0..cols {
        // Rows whose leading nonzero entry sits in `col`.
        let mut lead: Vec<Vec<BigInt>> = Vec::new();
        let mut rest: Vec<Vec<BigInt>> = Vec::new();
        for r in work {
            if r[..col].iter().all(|x| x.is_zero()) && !r[col].is_zero() {
                lead.push(r);
            } else {
                rest.push(r);
            }
        }
        // Euclidean reduction among the leading rows until one pivot remains.
        while lead.len() > 1 {
            lead.sort_by(|a, b| a[col].abs().cmp(&b[col].abs()));
            let base = lead[0].clone();
            let mut next: Vec<Vec<BigInt>> = vec![base.clone()];
            for r in lead.drain(1..) {
                let q = r[col].div_floor(&base[col]);
                let reduced: Vec<BigInt> = r
                    .iter()
                    .zip(&base)
                    .map(|(ri, bi)| ri - &q * bi)
                    .collect();
                if reduced.iter().all(|x| x.is_zero()) {
                    continue;
                }
                if reduced[..col].iter().all(|x| x.is_zero()) && !reduced[col].is_zero() {
                    next.push(reduced);
                } else {
                    rest.push(reduced);
                }
            }
            lead = next;
        }
        let mut pivot = lead
            .pop()
            .unwrap_or_else(|| panic!("rows do not span full rank at column {col}"));
        if pivot[col].is_negative() {
            for x in pivot.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
        basis.push(pivot);
        work = rest;
    }
    // Reduce entries above each pivot into [0, pivot).
    for i in (0..cols).rev() {
        for j in i + 1..cols {
            let q = basis[i][j].div_floor(&basis[j][j]);
            if q.is_zero() {
                continue;
            }
            let lower = basis[j].clone();
            for (x, l) in basis[i].iter_mut().zip(&lower) {
                *x -= &q * l;
            }
        }
    }
    Mat::from_rows(basis)
}

/// Tests v in rowspan_Z(h) for an HNF basis `h` (square, upper triangular).
pub fn hnf_contains(h: &IMat, v: &[BigInt]) -> bool {
    hnf_solve(h, v).is_some()
}

/// Integer coordinates of v in the row basis of an HNF matrix (square,
/// upper triangular, nonzero diagonal); None when v is outside the lattice.
pub fn hnf_solve(h: &IMat, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let n = h.cols;
    assert_eq!(v.len(), n);
    let mut v = v.to_vec();
    let mut coords = vec![BigInt::zero(); n];
    for i in 0..n {
        if v[i].is_zero() {
            continue;
        }
        let (q, r) = v[i].div_rem(h.at(i, i));
        if !r.is_zero() {
            return None;
        }
        for j in i..n {
            v[j] = &v[j] - &q * h.at(i, j);
        }
        coords[i] = q;
    }
    if v.iter().all(|x| x.is_zero()) {
        Some(coords)
    } else {
        None
    }
}

/// Smith normal form divisors of an integer matrix (nonzero diagonal entries
/// of the SNF, in divisibility order). Destructive elementary row/column
/// operations; suitable for the small relation matrices used here.
pub fn snf_divisors(m: &IMat) -> Vec<BigInt> {
    let (rows, cols) = (m.rows, m.cols);
    let mut a: Vec<Vec<BigInt>> = (0..rows).map(|i| m.row(i).to_vec()).collect();
    let mut divisors = Vec::new();
    let mut top = 0usize;
    let mut left = 0usize;
    while top < rows && left < cols {
        // Find a nonzero entry to pivot on.
        let mut found = None;
        'outer: for i in top..rows {
            for j in left..cols {
                if !a[i][j].is_zero() {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((pi, pj)) = found else { break };
        a.swap(top, pi);
        for row in a.iter_mut() {
            row.swap(left, pj);
        }
        // Clear the pivot row and column; repeat until both are clean, since
        // eliminations can reintroduce entries.
        loop {
            let mut dirty = false;
            for i in top + 1..rows {
                if a[i][left].is_zero() {
                    continue;
                }
                if a[i][left].is_multiple_of(&a[top][left]) {
                    let q = &a[i][left] / &a[top][left];
                    let lower = a[top].clone();
                    for (x, l) in a[i].iter_mut().zip(&lower) {
                        *x -= &q * l;
                    }
                } else {
                    a.swap(top, i);
                    dirty = true;
                }
            }
            for j in left + 1..cols {
                if a[top][j].is_zero() {
                    continue;
                }
                if a[top][j].is_multiple_of(&a[top][left]) {
                    let q = &a[top][j] / &a[top][left];
                    for row in a.iter_mut() {
                        let t = &q * &row[left];
                        row[j] -= t;
                    }
                } else {
                    for row in a.iter_mut() {
                        row.swap(left, j);
                    }
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
        divisors.push(a[top][left].abs());
        top += 1;
        left += 1;
    }
    // Enforce the divisibility chain d1 | d2 | ... by gcd/lcm exchanges.
    let k = divisors.len();
    for i in 0..k {
        for j in i + 1..k {
            let (di, dj) = (divisors[i].clone(), divisors[j].clone());
            let g = di.gcd(&dj);
            if g == di {
                continue;
            }
            let l = di.lcm(&dj);
            divisors[i] = g;
            divisors[j] = l;
        }
    }
    divisors.retain(|d| !d.is_zero());
    divisors
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn im(rows: Vec<Vec<i64>>) -> IMat {
        Mat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(BigInt::from).collect())
                .collect(),
        )
    }

    #[test]
    fn det_small() {
        assert_eq!(im(vec![vec![2, 1], vec![1, 1]]).det(), BigInt::from(1));
        assert_eq!(
            im(vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]).det(),
            BigInt::from(-3)
        );
        assert_eq!(
            im(vec![vec![1, 2], vec![2, 4]]).det(),
            BigInt::from(0)
        );
    }

    #[test]
    fn hnf_canonical() {
        // Lattice 2Z x 2Z plus the vector (1,1): index 2 in Z^2.
        let h = hnf(&im(vec![vec![2, 0], vec![0, 2], vec![1, 1]]));
        assert_eq!(h, im(vec![vec![1, 1], vec![0, 2]]));
        assert!(hnf_contains(&h, &[BigInt::from(3), BigInt::from(1)]));
        assert!(!hnf_contains(&h, &[BigInt::from(1), BigInt::from(0)]));
    }

    #[test]
    fn hnf_negative_pivots_normalized() {
        let h = hnf(&im(vec![vec![-3, 1], vec![0, -5]]));
        assert_eq!(h, im(vec![vec![3, 4], vec![0, 5]]));
    }

    #[test]
    fn inverse_round_trip() {
        let m = im(vec![vec![2, 1, 0], vec![1, 1, 1], vec![0, 3, 1]]).to_rational();
        let inv = m.inverse().expect("invertible");
        let prod = m.mul(&inv);
        assert_eq!(prod, QMat::identity(3));
    }

    #[test]
    fn snf_chain() {
        // diag(2, 6) has divisors 2, 6; a generic relation matrix reduces to them.
        let d = snf_divisors(&im(vec![vec![2, 0], vec![0, 6]]));
        assert_eq!(d, vec![BigInt::from(2), BigInt::from(6)]);
        let d = snf_divisors(&im(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]));
        // Known SNF of this classic example: diag(2, 2, 156) up to sign.
        let prod: BigInt = d.iter().product();
        assert_eq!(prod.clone().abs(), BigInt::from(2 * 2 * 156));
        for w in d.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]));
        }
    }
}
