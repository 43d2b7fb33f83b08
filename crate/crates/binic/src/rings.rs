//! The rank-n ring R_f attached to an integral binary n-ic form, together
//! with arithmetic in K_f = Q[x]/(f(x,1)), based fractional ideals, dual
//! functionals, a p-maximality test, and an exact square test in K_f.
//!
//! For f = f_0 x^n + ... + f_n y^n with f_0 != 0 the ring R_f is the free
//! Z-module on zeta_0 = 1 and zeta_k = f_0 theta^k + f_1 theta^{k-1} + ... +
//! f_{k-1} theta (1 <= k <= n-1), where theta is the image of x in K_f.
//! All multiplication-table entries are integers; this module computes the
//! table exactly and asserts integrality.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::forms::{BinaryForm, Unimodular2};
use crate::fp;
use crate::linalg::{self, IMat, QMat};
use crate::{BinicError, Result};

/// An element of K_f = Q[x]/(f(x,1)), as rational coordinates in the
/// theta-power basis (1, theta, ..., theta^{n-1}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    pub coords: Vec<BigRational>,
}

impl AlgebraElement {
    pub fn from_rationals(coords: Vec<BigRational>) -> Self {
        AlgebraElement { coords }
    }

    pub fn from_integers(coords: &[BigInt]) -> Self {
        AlgebraElement {
            coords: coords.iter().map(|c| BigRational::from(c.clone())).collect(),
        }
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        AlgebraElement {
            coords: coords
                .iter()
                .map(|&c| BigRational::from(BigInt::from(c)))
                .collect(),
        }
    }

    pub fn zero(n: usize) -> Self {
        AlgebraElement {
            coords: vec![BigRational::zero(); n],
        }
    }

    pub fn one(n: usize) -> Self {
        let mut e = Self::zero(n);
        e.coords[0] = BigRational::one();
        e
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> AlgebraElement {
        AlgebraElement {
            coords: self.coords.iter().map(|a| -a.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> AlgebraElement {
        AlgebraElement {
            coords: self.coords.iter().map(|a| a * c).collect(),
        }
    }
}

/// Which dual functional to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualFunctional {
    /// Coefficient of theta^k, 0 <= k <= n-1.
    Theta(usize),
    /// The functional dual to zeta_{n-1}: theta-top coefficient over f_0.
    ZetaTop,
}

/// Outcome of the exact square test in K_f.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SquareVerdict {
    /// A verified witness r with r^2 = e.
    Square(AlgebraElement),
    /// A modular witness: at `prime`, component `component` of the separable
    /// factorization, the image of e is a non-square unit.
    NonSquare { prime: u64, component: usize },
    /// Neither a witness nor a counterexample within the effort bounds.
    Unknown,
}

/// A fractional R_f-ideal with an ordered basis: rows of `num`/`den` are
/// theta-power coordinates of the basis elements. `orientation` is the sign
/// of the change-of-basis determinant from the zeta-basis to this basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasedIdeal {
    pub den: BigInt,
    pub num: IMat,
    pub orientation: i8,
}

impl BasedIdeal {
    /// The i-th basis element.
    pub fn row_elt(&self, i: usize) -> AlgebraElement {
        AlgebraElement {
            coords: self
                .num
                .row(i)
                .iter()
                .map(|c| BigRational::new(c.clone(), self.den.clone()))
                .collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.num.rows
    }
}

/// The ring R_f: multiplication table in the zeta-basis plus the reduction
/// data for K_f arithmetic in the theta-power basis.
#[derive(Debug, Clone)]
pub struct RankNRing {
    form: BinaryForm,
    normalizer: Unimodular2,
    n: usize,
    /// zeta_i zeta_j = sum_k table[(i*n + j)*n + k] zeta_k.
    table: Vec<BigInt>,
    disc: BigInt,
    /// red[i] = theta^{n+i} in the theta-power basis, 0 <= i <= n-2.
    red: Vec<Vec<BigRational>>,
}

impl RankNRing {
    /// Builds R_f. A form with f_0 = 0 is first moved by leading_normalize;
    /// the SL2(Z) element used is recorded as `normalizer`.
    pub fn build(f: &BinaryForm) -> Result<RankNRing> {
        if f.is_zero() {
            return Err(BinicError::ZeroForm);
        }
        let n = f.degree();
        if n < 3 || n % 2 == 0 {
            return Err(BinicError::DegenerateInput(format!(
                "ring construction needs odd degree >= 3, got {n}"
            )));
        }
        let (normalizer, form) = if f.coeff(0).is_zero() {
            f.leading_normalize()
        } else {
            (Unimodular2::identity(), f.clone())
        };
        let f0 = form.coeff(0).clone();
        // theta^{n+i} in the theta-basis: theta^n = -(f_1 theta^{n-1} + ...
        // + f_n)/f_0, then multiply by theta repeatedly.
        let mut red: Vec<Vec<BigRational>> = Vec::with_capacity(n - 1);
        let mut cur: Vec<BigRational> = (0..n)
            .map(|j| {
                // coefficient of theta^j in theta^n: -f_{n-j}/f_0
                BigRational::new(-form.coeff(n - j).clone(), f0.clone())
            })
            .collect();
        red.push(cur.clone());
        for _ in 1..n - 1 {
            cur = theta_shift(&cur, &red[0]);
            red.push(cur.clone());
        }
        let mut ring = RankNRing {
            form,
            normalizer,
            n,
            table: vec![BigInt::zero(); n * n * n],
            disc: BigInt::zero(),
            red,
        };
        // zeta_i zeta_j expanded in theta, then re-expressed in the
        // zeta-basis; entries must be integral.
        for i in 0..n {
            for j in i..n {
                let zi = ring.zeta_in_theta(i);
                let zj = ring.zeta_in_theta(j);
                let prod = ring.theta_poly_mul(&to_rat(&zi), &to_rat(&zj));
                let zcoords = ring.theta_to_zeta(&prod);
                for (k, c) in zcoords.iter().enumerate() {
                    assert!(
                        c.is_integer(),
                        "non-integral multiplication table entry at ({i},{j},{k})"
                    );
                    let v = c.to_integer();
                    ring.table[(i * n + j) * n + k] = v.clone();
                    ring.table[(j * n + i) * n + k] = v;
                }
            }
        }
        debug_assert!(ring.check_table());
        // Discriminant via the trace form; must match the form discriminant.
        let disc_form = ring.form.discriminant()?;
        let disc_trace = ring.trace_form_det();
        assert_eq!(
            disc_trace, disc_form,
            "trace-form determinant disagrees with the form discriminant"
        );
        ring.disc = disc_form;
        Ok(ring)
    }

    fn check_table(&self) -> bool {
        let n = self.n;
        // zeta_0 is the identity.
        for j in 0..n {
            for k in 0..n {
                let want = if j == k { BigInt::one() } else { BigInt::zero() };
                if *self.table_entry(0, j, k) != want {
                    return false;
                }
            }
        }
        // Associativity on basis triples.
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ij = self.zeta_mul_coords(i, j);
                    let l1 = self.zeta_vec_mul(&ij, k);
                    let jk = self.zeta_mul_coords(j, k);
                    let l2 = self.zeta_vec_mul(&jk, i);
                    if l1 != l2 {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn zeta_mul_coords(&self, i: usize, j: usize) -> Vec<BigInt> {
        let n = self.n;
        (0..n).map(|k| self.table[(i * n + j) * n + k].clone()).collect()
    }

    /// v (zeta-coords) times zeta_i, in zeta-coords.
    fn zeta_vec_mul(&self, v: &[BigInt], i: usize) -> Vec<BigInt> {
        let n = self.n;
        let mut out = vec![BigInt::zero(); n];
        for (j, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for k in 0..n {
                out[k] += c * &self.table[(i * n + j) * n + k];
            }
        }
        out
    }

    pub fn form(&self) -> &BinaryForm {
        &self.form
    }

    pub fn normalizer(&self) -> &Unimodular2 {
        &self.normalizer
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn disc(&self) -> &BigInt {
        &self.disc
    }

    pub fn table_entry(&self, i: usize, j: usize, k: usize) -> &BigInt {
        &self.table[(i * self.n + j) * self.n + k]
    }

    /// Determinant of the trace form Tr(zeta_i zeta_j).
    fn trace_form_det(&self) -> BigInt {
        let n = self.n;
        // tr(mult-by-zeta_k) = sum_j table[k][j][j].
        let trz: Vec<BigInt> = (0..n)
            .map(|k| {
                let mut t = BigInt::zero();
                for j in 0..n {
                    t += self.table_entry(k, j, j);
                }
                t
            })
            .collect();
        let m = IMat::from_fn(n, n, |i, j| {
            let mut t = BigInt::zero();
            for k in 0..n {
                t += self.table_entry(i, j, k) * &trz[k];
            }
            t
        });
        m.det()
    }

    // -- basis conversions ---------------------------------------------------

    /// Integer theta-coordinates of zeta_k.
    pub fn zeta_in_theta(&self, k: usize) -> Vec<BigInt> {
        let n = self.n;
        assert!(k < n);
        let mut v = vec![BigInt::zero(); n];
        if k == 0 {
            v[0] = BigInt::one();
        } else {
            for j in 1..=k {
                v[j] = self.form.coeff(k - j).clone();
            }
        }
        v
    }

    /// Solves v = c_0 + sum_{k>=1} c_k zeta_k for the zeta-coordinates c.
    pub fn theta_to_zeta(&self, v: &[BigRational]) -> Vec<BigRational> {
        let n = self.n;
        assert_eq!(v.len(), n);
        let f0 = BigRational::from(self.form.coeff(0).clone());
        let mut c = vec![BigRational::zero(); n];
        for j in (1..n).rev() {
            let mut acc = v[j].clone();
            for m in j + 1..n {
                acc -= &c[m] * BigRational::from(self.form.coeff(m - j).clone());
            }
            c[j] = acc / &f0;
        }
        c[0] = v[0].clone();
        c
    }

    /// zeta-coordinates back to theta-coordinates.
    pub fn zeta_to_theta(&self, c: &[BigRational]) -> Vec<BigRational> {
        let n = self.n;
        assert_eq!(c.len(), n);
        let mut v = vec![BigRational::zero(); n];
        v[0] = c[0].clone();
        for k in 1..n {
            if c[k].is_zero() {
                continue;
            }
            for (j, z) in self.zeta_in_theta(k).iter().enumerate() {
                if !z.is_zero() {
                    v[j] += &c[k] * BigRational::from(z.clone());
                }
            }
        }
        v
    }

    // -- K_f arithmetic ------------------------------------------------------

    pub fn theta(&self) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.n);
        e.coords[1] = BigRational::one();
        e
    }

    pub fn zeta(&self, k: usize) -> AlgebraElement {
        AlgebraElement::from_integers(&self.zeta_in_theta(k))
    }

    /// Product of two coordinate vectors, reduced into the theta-basis.
    fn theta_poly_mul(&self, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let n = self.n;
        let mut conv = vec![BigRational::zero(); 2 * n - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                conv[i + j] += x * y;
            }
        }
        let mut out: Vec<BigRational> = conv[..n].to_vec();
        for i in n..2 * n - 1 {
            if conv[i].is_zero() {
                continue;
            }
            for j in 0..n {
                let t = &conv[i] * &self.red[i - n][j];
                out[j] += t;
            }
        }
        out
    }

    pub fn k_mul(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            coords: self.theta_poly_mul(&a.coords, &b.coords),
        }
    }

    /// Row j = theta-coordinates of e * theta^j, so x |-> x . M is
    /// multiplication by e in row-vector convention.
    pub fn mult_matrix(&self, e: &AlgebraElement) -> QMat {
        let n = self.n;
        let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(n);
        let mut cur = e.coords.clone();
        rows.push(cur.clone());
        for _ in 1..n {
            cur = theta_shift(&cur, &self.red[0]);
            rows.push(cur.clone());
        }
        QMat::from_rows(rows)
    }

    /// Determinant of multiplication by e.
    pub fn k_norm(&self, e: &AlgebraElement) -> BigRational {
        self.mult_matrix(e).det()
    }

    /// Trace of multiplication by e.
    pub fn k_trace(&self, e: &AlgebraElement) -> BigRational {
        let m = self.mult_matrix(e);
        let mut t = BigRational::zero();
        for i in 0..self.n {
            t += m.at(i, i).clone();
        }
        t
    }

    pub fn k_inverse(&self, e: &AlgebraElement) -> Result<AlgebraElement> {
        let m = self.mult_matrix(e);
        let mut rhs = vec![BigRational::zero(); self.n];
        rhs[0] = BigRational::one();
        match m.solve_left(&rhs) {
            Some(coords) => Ok(AlgebraElement { coords }),
            None => Err(BinicError::NonInvertible),
        }
    }

    /// Evaluates a dual functional on r.
    pub fn dual_eval(&self, which: DualFunctional, r: &AlgebraElement) -> Result<BigRational> {
        match which {
            DualFunctional::Theta(k) => {
                if k >= self.n {
                    return Err(BinicError::IndexOutOfRange(format!(
                        "dual index {k} for degree {}",
                        self.n
                    )));
                }
                Ok(r.coords[k].clone())
            }
            DualFunctional::ZetaTop => {
                Ok(&r.coords[self.n - 1] / BigRational::from(self.form.coeff(0).clone()))
            }
        }
    }

    // -- based ideals --------------------------------------------------------

    /// Builds a based ideal from rational basis rows (theta-coordinates),
    /// keeping the row order; fails if the rows are dependent.
    pub fn based_ideal_from_rows(&self, rows: Vec<Vec<BigRational>>) -> Result<BasedIdeal> {
        let n = self.n;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(BinicError::DegenerateInput(
                "ideal basis must be n rows of n coordinates".into(),
            ));
        }
        let q = QMat::from_rows(rows);
        let det = q.det();
        if det.is_zero() {
            return Err(BinicError::DegenerateInput(
                "ideal basis rows are linearly dependent".into(),
            ));
        }
        let (num, den) = q.clear_denominators();
        let (num, den) = reduce_content(num, den);
        let orientation = self.orientation_sign(&det);
        Ok(BasedIdeal {
            den,
            num,
            orientation,
        })
    }

    /// Sign of the change-of-basis determinant from the zeta-basis for a
    /// basis whose theta-coordinate determinant is `det`.
    fn orientation_sign(&self, det: &BigRational) -> i8 {
        // det(zeta-basis in theta) = f_0^{n-1} > 0 because n is odd.
        debug_assert!(self.n % 2 == 1);
        if det.is_positive() {
            1
        } else {
            -1
        }
    }

    /// The distinguished ideal I_f^k with ordered basis
    /// (1, theta, ..., theta^k, zeta_{k+1}, ..., zeta_{n-1}).
    pub fn ideal_power(&self, k: usize) -> Result<BasedIdeal> {
        let n = self.n;
        if k > n - 1 {
            return Err(BinicError::IndexOutOfRange(format!(
                "ideal power {k} needs 0 <= k <= {}",
                n - 1
            )));
        }
        let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(n);
        for j in 0..=k {
            let mut r = vec![BigRational::zero(); n];
            r[j] = BigRational::one();
            rows.push(r);
        }
        for m in k + 1..n {
            rows.push(
                self.zeta_in_theta(m)
                    .iter()
                    .map(|c| BigRational::from(c.clone()))
                    .collect(),
            );
        }
        self.based_ideal_from_rows(rows)
    }

    /// R_f itself as a based ideal (the zeta-basis, positive orientation).
    pub fn ring_ideal(&self) -> BasedIdeal {
        self.ideal_power(0).expect("k = 0 is always in range")
    }

    /// Canonical representative of the underlying lattice: Hermite normal
    /// form basis, positive orientation by construction.
    pub fn canonical(&self, ideal: &BasedIdeal) -> BasedIdeal {
        let h = linalg::hnf(&ideal.num);
        let (num, den) = reduce_content(h, ideal.den.clone());
        BasedIdeal {
            den,
            num,
            orientation: 1,
        }
    }

    /// Lattice equality (ignores basis order and orientation).
    pub fn ideal_eq(&self, a: &BasedIdeal, b: &BasedIdeal) -> bool {
        let ca = self.canonical(a);
        let cb = self.canonical(b);
        ca.den == cb.den && ca.num.rows == cb.num.rows && {
            (0..ca.num.rows).all(|i| ca.num.row(i) == cb.num.row(i))
        }
    }

    /// Exact test that the lattice is closed under multiplication by every
    /// zeta_k (equivalently, is an R_f-module).
    pub fn is_ideal(&self, ideal: &BasedIdeal) -> bool {
        let h = linalg::hnf(&ideal.num);
        let zetas: Vec<AlgebraElement> = (1..self.n).map(|k| self.zeta(k)).collect();
        for i in 0..ideal.num.rows {
            let b = AlgebraElement::from_integers(ideal.num.row(i));
            for z in &zetas {
                let prod = self.k_mul(&b, z);
                // prod/den must lie in rowspan(h)/den: prod integral and in h.
                let mut w = Vec::with_capacity(self.n);
                let mut ok = true;
                for c in &prod.coords {
                    if c.is_integer() {
                        w.push(c.to_integer());
                    } else {
                        ok = false;
                        break;
                    }
                }
                if !ok || !linalg::hnf_contains(&h, &w) {
                    return false;
                }
            }
        }
        true
    }

    /// Norm: |det(change of basis from the zeta-basis)|.
    pub fn ideal_norm(&self, ideal: &BasedIdeal) -> BigRational {
        let det_theta = ideal.num.to_rational().det()
            / BigRational::from(ideal.den.pow(self.n as u32));
        let det_zeta = BigRational::from(self.form.coeff(0).pow(self.n as u32 - 1));
        (det_theta / det_zeta).abs()
    }

    /// Product ideal: the Z-span of all pairwise basis products, as a
    /// canonical (HNF) based ideal.
    pub fn mult_ideals(&self, a: &BasedIdeal, b: &BasedIdeal) -> Result<BasedIdeal> {
        let n = self.n;
        let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(n * n);
        for i in 0..n {
            let ai = AlgebraElement::from_integers(a.num.row(i));
            for j in 0..n {
                let bj = AlgebraElement::from_integers(b.num.row(j));
                rows.push(self.k_mul(&ai, &bj).coords);
            }
        }
        let q = QMat::from_rows(rows);
        if q.rank() < n {
            return Err(BinicError::DegenerateInput(
                "ideal product does not have full rank".into(),
            ));
        }
        let (m, extra_den) = q.clear_denominators();
        let h = linalg::hnf(&m);
        let den = &a.den * &b.den * extra_den;
        let (num, den) = reduce_content(h, den);
        Ok(BasedIdeal {
            den,
            num,
            orientation: 1,
        })
    }

    /// The ideal kappa * I for kappa in K_f^x.
    pub fn scale_ideal(&self, kappa: &AlgebraElement, ideal: &BasedIdeal) -> Result<BasedIdeal> {
        let rows: Vec<Vec<BigRational>> = (0..ideal.num.rows)
            .map(|i| self.k_mul(&ideal.row_elt(i), kappa).coords)
            .collect();
        self.based_ideal_from_rows(rows)
    }

    // -- R/p and maximality --------------------------------------------------

    /// The finite algebra R_f / p with its zeta-basis structure constants.
    pub fn algebra_mod_p(&self, p: u64) -> fp::AlgebraP {
        let n = self.n;
        let table = self
            .table
            .iter()
            .map(|c| bigint_mod_u64(c, p))
            .collect();
        fp::AlgebraP { n, p, table }
    }

    /// True iff R_f is maximal at p (its index in any overorder is prime to
    /// p), by the radical multiplier-ring test.
    pub fn is_maximal_at(&self, p: u64) -> Result<bool> {
        if self.disc.is_zero() {
            return Err(BinicError::DegenerateForm);
        }
        // p^2 does not divide the discriminant: maximal for free.
        let p2 = BigInt::from(p) * BigInt::from(p);
        if !(&self.disc % &p2).is_zero() {
            return Ok(true);
        }
        let n = self.n;
        let alg = self.algebra_mod_p(p);
        let rad = alg.radical();
        // J = pR + lifts of the radical, as a sublattice of R in zeta-coords.
        let mut gens: Vec<Vec<BigInt>> = Vec::with_capacity(n + rad.len());
        for i in 0..n {
            let mut r = vec![BigInt::zero(); n];
            r[i] = BigInt::from(p);
            gens.push(r);
        }
        for v in &rad {
            gens.push(v.iter().map(|&c| BigInt::from(c)).collect());
        }
        let h = linalg::hnf(&IMat::from_rows(gens));
        // x = (1/p) sum z_i zeta_i multiplies J into J iff for every basis
        // vector b_j of J, (sum z_i zeta_i) b_j lies in p J. Expressed in the
        // J-basis this is a linear condition mod p on z.
        let mut cond: Vec<Vec<u64>> = Vec::new();
        let basis: Vec<Vec<BigInt>> = (0..n).map(|j| h.row(j).to_vec()).collect();
        for bj in &basis {
            // coords of zeta_i * b_j in the J-basis, one column per i.
            let mut cols: Vec<Vec<BigInt>> = Vec::with_capacity(n);
            for i in 0..n {
                let prod = self.zeta_vec_mul(bj, i);
                let coords = linalg::hnf_solve(&h, &prod)
                    .expect("J is an ideal, so zeta_i * J stays inside J");
                cols.push(coords);
            }
            for k in 0..n {
                cond.push((0..n).map(|i| bigint_mod_u64(&cols[i][k], p)).collect());
            }
        }
        let kernel = fp::nullspace(&cond, p);
        Ok(kernel.is_empty())
    }

    // -- exact square test ---------------------------------------------------

    /// Decides whether e is a square in K_f.
    ///
    /// A NonSquare answer is certified by a prime p (with f separable mod p
    /// and e a unit mod p) and a factor field where the image of e fails the
    /// Euler criterion. A Square answer carries an exactly verified root,
    /// found by CRT square roots mod p, quadratic Hensel lifting, and
    /// rational reconstruction. `effort` bounds the number of lift doublings
    /// (final modulus p^{2^effort}).
    pub fn is_square(&self, e: &AlgebraElement, effort: u32) -> Result<SquareVerdict> {
        let norm = self.k_norm(e);
        if norm.is_zero() {
            return Err(BinicError::NonInvertible);
        }
        let fx: Vec<BigInt> = self.form.poly_x();
        let disc = self.disc.clone();
        // Collect usable odd primes: f stays degree n and separable, e_den
        // and norm(e) are units.
        let mut primes: Vec<u64> = Vec::new();
        let mut p = 3u64;
        while primes.len() < 8 && p < 10_000 {
            let mut ok = !bigint_divisible(&self.form.coeff(0), p) && !bigint_divisible(&disc, p);
            if ok {
                for c in &e.coords {
                    if bigint_divisible(c.denom(), p) {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && (bigint_divisible(norm.numer(), p) || bigint_divisible(norm.denom(), p)) {
                ok = false;
            }
            if ok {
                primes.push(p);
            }
            p = crate::forms::next_prime_u64(p);
        }
        if primes.is_empty() {
            return Ok(SquareVerdict::Unknown);
        }
        // Euler criterion in every factor field at every collected prime.
        for &p in &primes {
            let fp_poly: fp::PolyP = fx.iter().map(|c| bigint_mod_u64(c, p)).collect();
            let fm = fp::pmonic(&fp_poly, p);
            let factors = fp::factor_modp(&fm, p, fp::DEFAULT_SEED);
            let ep = reduce_elt_mod_p(e, p);
            for (idx, (g, _)) in factors.iter().enumerate() {
                let d = fp::pdeg(g).unwrap();
                let egi = fp::pmod(&ep, g, p);
                let exponent = (num_bigint::BigUint::from(p).pow(d as u32)
                    - num_bigint::BigUint::one())
                    / num_bigint::BigUint::from(2u32);
                let euler = fp::ppowmod(&egi, &exponent, g, p);
                if euler != vec![1u64] {
                    return Ok(SquareVerdict::NonSquare {
                        prime: p,
                        component: idx,
                    });
                }
            }
        }
        // All scanned primes consistent with squareness: try to build a root
        // at the first prime.
        let p = primes[0];
        let fp_poly: fp::PolyP = fx.iter().map(|c| bigint_mod_u64(c, p)).collect();
        let fm = fp::pmonic(&fp_poly, p);
        let factors = fp::factor_modp(&fm, p, fp::DEFAULT_SEED);
        let ep = reduce_elt_mod_p(e, p);
        let mut comp_roots: Vec<fp::PolyP> = Vec::new();
        for (g, _) in &factors {
            let egi = fp::pmod(&ep, g, p);
            match field_sqrt(&egi, g, p) {
                Some(r) => comp_roots.push(r),
                None => return Ok(SquareVerdict::Unknown),
            }
        }
        // CRT the component roots with all 2^{g-1} sign patterns (global
        // sign is irrelevant).
        let g_count = factors.len();
        let mut candidates: Vec<fp::PolyP> = Vec::new();
        for mask in 0..(1u32 << (g_count - 1)) {
            let mut parts: Vec<fp::PolyP> = Vec::with_capacity(g_count);
            for (i, r) in comp_roots.iter().enumerate() {
                let flip = i > 0 && (mask >> (i - 1)) & 1 == 1;
                parts.push(if flip {
                    r.iter().map(|&c| (p - c) % p).collect()
                } else {
                    r.clone()
                });
            }
            candidates.push(crt_polys(&parts, &factors, &fm, p));
        }
        // Hensel-lift each candidate and attempt rational reconstruction.
        for cand in candidates {
            if let Some(root) = self.lift_and_reconstruct(e, &cand, p, effort) {
                return Ok(SquareVerdict::Square(root));
            }
        }
        Ok(SquareVerdict::Unknown)
    }

    /// Quadratic Hensel lift of a square root candidate mod (p, f), with
    /// rational reconstruction attempts at each level.
    fn lift_and_reconstruct(
        &self,
        e: &AlgebraElement,
        root_mod_p: &fp::PolyP,
        p: u64,
        effort: u32,
    ) -> Option<AlgebraElement> {
        let n = self.n;
        let fx = self.form.poly_x();
        let pb = BigInt::from(p);
        let mut modulus = pb.clone();
        let mut r: Vec<BigInt> = (0..n)
            .map(|j| BigInt::from(root_mod_p.get(j).copied().unwrap_or(0)))
            .collect();
        for _ in 0..effort {
            // Double the modulus and refine: r <- r - (r^2 - e) / (2r).
            modulus = &modulus * &modulus;
            let ctx = PadicCtx::new(&fx, &modulus, p);
            let e_int = match elt_to_int_mod(e, &modulus) {
                Some(v) => v,
                None => return None,
            };
            let r2 = ctx.mul(&r, &r);
            let mut diff: Vec<BigInt> = r2
                .iter()
                .zip(&e_int)
                .map(|(a, b)| (a - b).mod_floor(&modulus))
                .collect();
            let two_r: Vec<BigInt> = r.iter().map(|c| (c * BigInt::from(2)).mod_floor(&modulus)).collect();
            let inv = ctx.inverse(&two_r)?;
            let corr = ctx.mul(&diff, &inv);
            for (ri, co) in r.iter_mut().zip(&corr) {
                *ri = (std::mem::take(ri) - co).mod_floor(&modulus);
            }
            diff.clear();
            // Attempt reconstruction at this level.
            if let Some(candidate) = reconstruct_vec(&r, &modulus) {
                let elt = AlgebraElement {
                    coords: candidate,
                };
                if self.k_mul(&elt, &elt) == *e {
                    return Some(elt);
                }
            }
        }
        None
    }
}

/// theta * v for a theta-coordinate vector, using red0 = theta^n.
fn theta_shift(v: &[BigRational], red0: &[BigRational]) -> Vec<BigRational> {
    let n = v.len();
    let mut out = vec![BigRational::zero(); n];
    for j in 1..n {
        out[j] = v[j - 1].clone();
    }
    let top = &v[n - 1];
    if !top.is_zero() {
        for j in 0..n {
            let t = top * &red0[j];
            out[j] += t;
        }
    }
    out
}

fn to_rat(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().map(|c| BigRational::from(c.clone())).collect()
}

/// Divides the matrix and denominator by their common content and makes the
/// denominator positive.
fn reduce_content(mut num: IMat, mut den: BigInt) -> (IMat, BigInt) {
    let mut g = den.clone();
    for i in 0..num.rows {
        for j in 0..num.cols {
            g = g.gcd(num.at(i, j));
        }
    }
    if !g.is_zero() && !g.is_one() {
        for i in 0..num.rows {
            for j in 0..num.cols {
                let v = num.at(i, j) / &g;
                *num.at_mut(i, j) = v;
            }
        }
        den /= &g;
    }
    if den.is_negative() {
        den = -den;
        for i in 0..num.rows {
            for j in 0..num.cols {
                let v = -num.at(i, j).clone();
                *num.at_mut(i, j) = v;
            }
        }
    }
    (num, den)
}

fn bigint_mod_u64(c: &BigInt, p: u64) -> u64 {
    let m = c.mod_floor(&BigInt::from(p));
    m.to_u64_digits().1.first().copied().unwrap_or(0)
}

fn bigint_divisible(c: &BigInt, p: u64) -> bool {
    (c % BigInt::from(p)).is_zero()
}

/// Image of e in F_p[x]/(f): coordinates num * den^{-1} mod p.
fn reduce_elt_mod_p(e: &AlgebraElement, p: u64) -> fp::PolyP {
    let mut out: fp::PolyP = e
        .coords
        .iter()
        .map(|c| {
            let num = bigint_mod_u64(c.numer(), p);
            let den = bigint_mod_u64(c.denom(), p);
            fp::mulm(num, fp::invm(den, p), p)
        })
        .collect();
    fp::ptrim(&mut out);
    out
}

/// Square root in the field F_p[x]/(g) (p odd, g irreducible) by
/// Tonelli-Shanks; None when a is not a square (callers pre-screen with the
/// Euler criterion, so None only flags an inconsistent input).
fn field_sqrt(a: &fp::PolyP, g: &fp::PolyP, p: u64) -> Option<fp::PolyP> {
    use num_bigint::BigUint;
    if a.is_empty() {
        return Some(vec![]);
    }
    let d = fp::pdeg(g).unwrap();
    let q = BigUint::from(p).pow(d as u32);
    let qm1 = &q - BigUint::one();
    // q - 1 = 2^s * t
    let mut s = 0u32;
    let mut t = qm1.clone();
    while (&t % 2u32) == BigUint::zero() {
        t /= 2u32;
        s += 1;
    }
    // Find a non-residue z: scan constants and linear polynomials, then
    // fall back to pseudorandom candidates of full degree.
    let mut z: Option<fp::PolyP> = None;
    let half = &qm1 / 2u32;
    'search: for c0 in 0..p {
        for c1 in 0..=(if d > 1 { p - 1 } else { 0 }) {
            let mut cand = vec![c0, c1];
            fp::ptrim(&mut cand);
            if cand.is_empty() {
                continue;
            }
            let eu = fp::ppowmod(&cand, &half, g, p);
            if eu == vec![p - 1] {
                z = Some(cand);
                break 'search;
            }
        }
    }
    if z.is_none() {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        for _ in 0..500 {
            let mut cand: fp::PolyP = (0..d)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    (state >> 11) % p
                })
                .collect();
            fp::ptrim(&mut cand);
            if cand.is_empty() {
                continue;
            }
            let eu = fp::ppowmod(&cand, &half, g, p);
            if eu == vec![p - 1] {
                z = Some(cand);
                break;
            }
        }
    }
    let z = z?;
    let mut m = s;
    let mut c = fp::ppowmod(&z, &t, g, p);
    let mut tt = fp::ppowmod(a, &t, g, p);
    let mut r = fp::ppowmod(a, &((&t + BigUint::one()) / 2u32), g, p);
    loop {
        if tt == vec![1u64] {
            return Some(r);
        }
        // Least i with tt^{2^i} = 1.
        let mut i = 0u32;
        let mut probe = tt.clone();
        while probe != vec![1u64] {
            probe = fp::pmod(&fp::pmul(&probe, &probe, p), g, p);
            i += 1;
            if i == m {
                return None;
            }
        }
        let mut b = c.clone();
        for _ in 0..(m - i - 1) {
            b = fp::pmod(&fp::pmul(&b, &b, p), g, p);
        }
        m = i;
        c = fp::pmod(&fp::pmul(&b, &b, p), g, p);
        tt = fp::pmod(&fp::pmul(&tt, &c, p), g, p);
        r = fp::pmod(&fp::pmul(&r, &b, p), g, p);
    }
}

/// CRT recombination: the unique residue mod fm agreeing with parts[i]
/// mod factors[i].
fn crt_polys(
    parts: &[fp::PolyP],
    factors: &[(fp::PolyP, usize)],
    fm: &fp::PolyP,
    p: u64,
) -> fp::PolyP {
    let mut acc: fp::PolyP = vec![];
    for (i, part) in parts.iter().enumerate() {
        let gi = &factors[i].0;
        let mi = fp::pdivrem(fm, gi, p).0;
        // u = mi^{-1} mod gi.
        let u = fp::poly_inverse_mod(&fp::pmod(&mi, gi, p), gi, p)
            .expect("factors are pairwise coprime");
        let term = fp::pmod(&fp::pmul(&fp::pmod(&fp::pmul(part, &u, p), gi, p), &mi, p), fm, p);
        acc = fp::padd(&acc, &term, p);
    }
    fp::pmod(&acc, fm, p)
}

/// Arithmetic in (Z/M)[x]/(f) for M = p^{2^k}: multiplication with reduction
/// by the (non-monic, unit leading coefficient) f, and Hensel inversion.
struct PadicCtx {
    n: usize,
    modulus: BigInt,
    p: u64,
    /// theta^{n+i} mod (M, f), integer coordinates, 0 <= i <= n-2.
    red: Vec<Vec<BigInt>>,
    fx: Vec<BigInt>,
}

impl PadicCtx {
    fn new(fx: &[BigInt], modulus: &BigInt, p: u64) -> PadicCtx {
        let n = fx.len() - 1;
        let f0_inv = int_inverse_mod(&fx[n], modulus).expect("leading coefficient is a unit");
        // theta^n = -f0^{-1} (f_1 theta^{n-1} + ... + f_n) mod M.
        let mut red: Vec<Vec<BigInt>> = Vec::with_capacity(n - 1);
        let base: Vec<BigInt> = (0..n)
            .map(|j| (-&fx[j] * &f0_inv).mod_floor(modulus))
            .collect();
        red.push(base.clone());
        let mut cur = base.clone();
        for _ in 1..n - 1 {
            // theta * cur
            let mut next = vec![BigInt::zero(); n];
            for j in 1..n {
                next[j] = cur[j - 1].clone();
            }
            let top = cur[n - 1].clone();
            if !top.is_zero() {
                for j in 0..n {
                    next[j] = (&next[j] + &top * &red[0][j]).mod_floor(modulus);
                }
            }
            red.push(next.clone());
            cur = next;
        }
        PadicCtx {
            n,
            modulus: modulus.clone(),
            p,
            red,
            fx: fx.to_vec(),
        }
    }

    fn mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let n = self.n;
        let mut conv = vec![BigInt::zero(); 2 * n - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                conv[i + j] += x * y;
            }
        }
        let mut out: Vec<BigInt> = conv[..n].to_vec();
        for i in n..2 * n - 1 {
            if conv[i].is_zero() {
                continue;
            }
            for j in 0..n {
                out[j] += &conv[i] * &self.red[i - n][j];
            }
        }
        for c in out.iter_mut() {
            *c = c.mod_floor(&self.modulus);
        }
        out
    }

    /// Inverse by lifting the mod-p inverse quadratically.
    fn inverse(&self, a: &[BigInt]) -> Option<Vec<BigInt>> {
        let p = self.p;
        let ap: fp::PolyP = {
            let mut v: fp::PolyP = a.iter().map(|c| bigint_mod_u64(c, p)).collect();
            fp::ptrim(&mut v);
            v
        };
        let fmp: fp::PolyP = {
            let v: fp::PolyP = self.fx.iter().map(|c| bigint_mod_u64(c, p)).collect();
            fp::pmonic(&v, p)
        };
        let inv_p = fp::poly_inverse_mod(&fp::pmod(&ap, &fmp, p), &fmp, p)?;
        let mut y: Vec<BigInt> = (0..self.n)
            .map(|j| BigInt::from(inv_p.get(j).copied().unwrap_or(0)))
            .collect();
        // y <- y (2 - a y), doubling precision each round until M.
        let mut level = BigInt::from(p);
        while level < self.modulus {
            level = &level * &level;
            let ay = self.mul(a, &y);
            let mut two_minus = vec![BigInt::zero(); self.n];
            two_minus[0] = BigInt::from(2);
            for (t, v) in two_minus.iter_mut().zip(&ay) {
                *t = (std::mem::take(t) - v).mod_floor(&self.modulus);
            }
            y = self.mul(&y, &two_minus);
        }
        // Verify.
        let check = self.mul(a, &y);
        let mut expected = vec![BigInt::zero(); self.n];
        expected[0] = BigInt::one();
        if check == expected {
            Some(y)
        } else {
            None
        }
    }
}

fn int_inverse_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// e's coordinates as integers mod M (requires denominators prime to M).
fn elt_to_int_mod(e: &AlgebraElement, modulus: &BigInt) -> Option<Vec<BigInt>> {
    let mut out = Vec::with_capacity(e.coords.len());
    for c in &e.coords {
        let dinv = int_inverse_mod(c.denom(), modulus)?;
        out.push((c.numer() * dinv).mod_floor(modulus));
    }
    Some(out)
}

/// Rational reconstruction of every coordinate at the given modulus.
fn reconstruct_vec(v: &[BigInt], modulus: &BigInt) -> Option<Vec<BigRational>> {
    v.iter().map(|c| rational_reconstruct(c, modulus)).collect()
}

/// Wang-style rational reconstruction: num/den with |num|, den <=
/// sqrt(M/2), num = c * den mod M.
fn rational_reconstruct(c: &BigInt, modulus: &BigInt) -> Option<BigRational> {
    let bound = (modulus / BigInt::from(2)).sqrt();
    let mut r0 = modulus.clone();
    let mut r1 = c.mod_floor(modulus);
    let mut t0 = BigInt::zero();
    let mut t1 = BigInt::one();
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() {
        return None;
    }
    let (mut num, mut den) = (r1, t1);
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    if den > bound || den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn form(v: &[i64]) -> BinaryForm {
        BinaryForm::from_i64(v).unwrap()
    }

    fn ring(v: &[i64]) -> RankNRing {
        RankNRing::build(&form(v)).unwrap()
    }

    #[test]
    fn cube_ring_table() {
        // f = x^3 + y^3: zeta_1 = theta, zeta_2 = theta^2.
        let r = ring(&[1, 0, 0, 1]);
        assert_eq!(*r.disc(), BigInt::from(-27));
        // zeta_1 * zeta_2 = theta^3 = -1.
        let prod = r.zeta_mul_coords(1, 2);
        assert_eq!(prod, vec![BigInt::from(-1), BigInt::zero(), BigInt::zero()]);
    }

    #[test]
    fn table_integral_on_random_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut built = 0;
        while built < 60 {
            let v: Vec<i64> = (0..4).map(|_| rng.gen_range(-9..=9)).collect();
            let f = form(&v);
            if f.is_zero() || f.coeff(0).is_zero() {
                continue;
            }
            if f.discriminant().unwrap().is_zero() {
                continue;
            }
            // build asserts integrality and the trace-form identity.
            let _ = RankNRing::build(&f).unwrap();
            built += 1;
        }
        // A quintic too.
        let _ = ring(&[2, 1, 0, -1, 3, 2]);
    }

    #[test]
    fn ring_rejects_bad_degrees() {
        assert!(matches!(
            RankNRing::build(&form(&[1, 2, 1])),
            Err(BinicError::DegenerateInput(_))
        ));
        assert!(matches!(
            RankNRing::build(&form(&[0, 0, 0, 0])),
            Err(BinicError::ZeroForm)
        ));
    }

    #[test]
    fn zero_leading_coefficient_is_normalized() {
        let f = form(&[0, 1, -1, 0]); // x y (x - y)
        let r = RankNRing::build(&f).unwrap();
        assert!(!r.form().coeff(0).is_zero());
        assert_eq!(*r.disc(), f.discriminant().unwrap());
    }

    #[test]
    fn ideal_powers_and_norms() {
        let r = ring(&[2, 1, -3, 5]);
        let i0 = r.ideal_power(0).unwrap();
        assert!(r.ideal_eq(&i0, &r.ring_ideal()));
        for k in 0..3 {
            let ik = r.ideal_power(k).unwrap();
            assert!(r.is_ideal(&ik));
            let expect = BigRational::new(BigInt::one(), BigInt::from(2).pow(k as u32));
            assert_eq!(r.ideal_norm(&ik), expect);
        }
        assert!(r.ideal_power(3).is_err());
    }

    #[test]
    fn ideal_multiplication() {
        let r = ring(&[2, 1, -3, 5]);
        let i1 = r.ideal_power(1).unwrap();
        let i2 = r.ideal_power(2).unwrap();
        let ring_ideal = r.ring_ideal();
        // I * R = I.
        let prod = r.mult_ideals(&i1, &ring_ideal).unwrap();
        assert!(r.ideal_eq(&prod, &i1));
        // I_f^1 squared is I_f^2 for this primitive form.
        let sq = r.mult_ideals(&i1, &i1).unwrap();
        assert!(r.ideal_eq(&sq, &i2));
        // Norms multiply there.
        assert_eq!(
            r.ideal_norm(&sq),
            r.ideal_norm(&i1) * r.ideal_norm(&i1)
        );
    }

    #[test]
    fn norm_multiplicative_for_principal_ideals() {
        let r = ring(&[1, 0, -1, -1]); // disc -23, maximal
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let coords: Vec<i64> = (0..3).map(|_| rng.gen_range(-4..=4i64)).collect();
            let e = AlgebraElement::from_i64(&coords);
            if r.k_norm(&e).is_zero() {
                continue;
            }
            // (e R) has norm |N(e)|.
            let rows: Vec<Vec<BigRational>> = (0..3)
                .map(|j| {
                    let mut b = AlgebraElement::zero(3);
                    b.coords[j] = BigRational::one();
                    r.k_mul(&e, &b).coords
                })
                .collect();
            let ideal = r.based_ideal_from_rows(rows).unwrap();
            assert_eq!(r.ideal_norm(&ideal), r.k_norm(&e).abs());
            // Multiply by I_f^1-style test: norm multiplies.
            let i1 = r.ideal_power(1).unwrap();
            let prod = r.mult_ideals(&ideal, &i1).unwrap();
            assert_eq!(
                r.ideal_norm(&prod),
                r.ideal_norm(&ideal) * r.ideal_norm(&i1)
            );
        }
    }

    #[test]
    fn non_ideal_detected() {
        let r = ring(&[1, 0, -1, -1]);
        // Lattice <1, 2 theta, theta^2> is not an R_f-module: theta * 1 = theta
        // falls outside.
        let rows = vec![
            vec![
                BigRational::one(),
                BigRational::zero(),
                BigRational::zero(),
            ],
            vec![
                BigRational::zero(),
                BigRational::from(BigInt::from(2)),
                BigRational::zero(),
            ],
            vec![
                BigRational::zero(),
                BigRational::zero(),
                BigRational::one(),
            ],
        ];
        let lat = r.based_ideal_from_rows(rows).unwrap();
        assert!(!r.is_ideal(&lat));
    }

    #[test]
    fn orientation_signs() {
        let r = ring(&[-2, 1, -3, 5]);
        // For f_0 < 0: det of I_f^k's basis in theta-coords is f_0^{n-1-k}.
        assert_eq!(r.ideal_power(0).unwrap().orientation, 1); // (-2)^2 > 0
        assert_eq!(r.ideal_power(1).unwrap().orientation, -1); // (-2)^1 < 0
        assert_eq!(r.ideal_power(2).unwrap().orientation, 1); // (-2)^0 > 0
    }

    #[test]
    fn dual_functionals() {
        let r = ring(&[2, 1, -3, 5]);
        // zeta-top dual hits zeta_{n-1} only.
        for k in 0..3 {
            let z = r.zeta(k);
            let v = r.dual_eval(DualFunctional::ZetaTop, &z).unwrap();
            let want = if k == 2 {
                BigRational::one()
            } else {
                BigRational::zero()
            };
            assert_eq!(v, want);
        }
        // theta duals are coordinate extraction.
        let e = AlgebraElement::from_i64(&[3, -2, 7]);
        for k in 0..3 {
            assert_eq!(
                r.dual_eval(DualFunctional::Theta(k), &e).unwrap(),
                e.coords[k]
            );
        }
        assert!(r.dual_eval(DualFunctional::Theta(3), &e).is_err());
    }

    #[test]
    fn dual_identity_random() {
        // theta-dual_k(r) = zeta-top(zeta_{n-1-k} r) + f_{n-1-k} zeta-top(r)
        // for 0 <= k <= n-2.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for coeffs in [[2i64, 1, -3, 5], [3, -1, 0, 7], [1, 2, 2, -5]] {
            let r = ring(&coeffs);
            for _ in 0..30 {
                let e = AlgebraElement::from_i64(&[
                    rng.gen_range(-9..=9),
                    rng.gen_range(-9..=9),
                    rng.gen_range(-9..=9),
                ]);
                for k in 0..2usize {
                    let lhs = r.dual_eval(DualFunctional::Theta(k), &e).unwrap();
                    let z = r.zeta(2 - k);
                    let zr = r.k_mul(&z, &e);
                    let rhs = r.dual_eval(DualFunctional::ZetaTop, &zr).unwrap()
                        + BigRational::from(r.form().coeff(2 - k).clone())
                            * r.dual_eval(DualFunctional::ZetaTop, &e).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn norms_and_inverses() {
        let r = ring(&[2, 1, -3, 5]);
        // norm(theta) = (-1)^n f_n / f_0.
        let nt = r.k_norm(&r.theta());
        assert_eq!(nt, BigRational::new(BigInt::from(-5), BigInt::from(2)));
        let e = AlgebraElement::from_i64(&[1, 2, -1]);
        let inv = r.k_inverse(&e).unwrap();
        assert_eq!(r.k_mul(&e, &inv), AlgebraElement::one(3));
        // Zero is not invertible.
        assert!(matches!(
            r.k_inverse(&AlgebraElement::zero(3)),
            Err(BinicError::NonInvertible)
        ));
    }

    #[test]
    fn square_detection() {
        let r = ring(&[1, 0, -1, -1]); // disc -23 field
        // Squares come back with verified witnesses.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let e = AlgebraElement::from_i64(&[
                rng.gen_range(-5..=5),
                rng.gen_range(-5..=5),
                rng.gen_range(-5..=5),
            ]);
            if r.k_norm(&e).is_zero() {
                continue;
            }
            let sq = r.k_mul(&e, &e);
            match r.is_square(&sq, 6).unwrap() {
                SquareVerdict::Square(w) => {
                    assert_eq!(r.k_mul(&w, &w), sq);
                }
                other => panic!("square of an element not recognized: {other:?}"),
            }
        }
        // -1 is not a square in a field with a real embedding.
        let minus_one = AlgebraElement::from_i64(&[-1, 0, 0]);
        assert!(matches!(
            r.is_square(&minus_one, 6).unwrap(),
            SquareVerdict::NonSquare { .. }
        ));
        // In the split algebra Q[x]/(x^3+1), theta maps to -1 in the linear
        // component: not a square.
        let rs = ring(&[1, 0, 0, 1]);
        assert!(matches!(
            rs.is_square(&rs.theta(), 6).unwrap(),
            SquareVerdict::NonSquare { .. }
        ));
        // Rational square with denominators.
        let half_sq = AlgebraElement::from_rationals(vec![
            BigRational::new(BigInt::from(9), BigInt::from(4)),
            BigRational::zero(),
            BigRational::zero(),
        ]);
        match r.is_square(&half_sq, 6).unwrap() {
            SquareVerdict::Square(w) => assert_eq!(r.k_mul(&w, &w), half_sq),
            other => panic!("9/4 should be a square: {other:?}"),
        }
    }

    #[test]
    fn maximality() {
        // Disc -23: squarefree, maximal everywhere.
        let r = ring(&[1, 0, -1, -1]);
        for p in [2u64, 3, 5, 23] {
            assert!(r.is_maximal_at(p).unwrap());
        }
        // Cyclic cubic disc 81: maximal at 3 (field disc is 81).
        let rc = ring(&[1, 0, -3, 1]);
        assert!(rc.is_maximal_at(3).unwrap());
        // x^3 - 4x - 8 = index-2 thickening of x^3 - x - 1: not maximal at 2.
        let rt = ring(&[1, 0, -4, -8]);
        assert_eq!(*rt.disc(), BigInt::from(-1472)); // 2^6 * -23
        assert!(!rt.is_maximal_at(2).unwrap());
        assert!(rt.is_maximal_at(23).unwrap());
    }

    #[test]
    fn quintic_ring_and_ideals() {
        let r = ring(&[1, 2, 0, -1, 3, 2]);
        for k in 0..5 {
            let ik = r.ideal_power(k).unwrap();
            assert!(r.is_ideal(&ik));
        }
        let i1 = r.ideal_power(1).unwrap();
        let i2 = r.ideal_power(2).unwrap();
        let sq = r.mult_ideals(&i1, &i1).unwrap();
        assert!(r.ideal_eq(&sq, &i2));
    }
}
