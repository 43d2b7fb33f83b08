//! Pairs of integral symmetric n x n matrices: the resolvent form, the
//! SL_2 x SL_n action, the section of the resolvent, and the two-way
//! correspondence between pairs and (ideal, delta) data for the ring of the
//! resolvent form, together with reducibility and composition.
//!
//! Conventions: a pair (A, B) has resolvent f(x, y) = det(Ax - By), so
//! det A = f_0 and det(-B) = f_n. The group element (g2, gn) acts by the
//! congruence (gn A gn^t, gn B gn^t) followed by the SL_2 mix
//! (A, B) |-> (aA - bB, -cA + dB) for g2 = [[a, b], [c, d]]; the resolvent
//! then transforms by the same g2 acting on forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::str::FromStr;

use crate::forms::{BinaryForm, Unimodular2, Verdict};
use crate::linalg::{self, IMat, QMat};
use crate::rings::{AlgebraElement, BasedIdeal, RankNRing, SquareVerdict};
use crate::{BinicError, Result};

/// A pair of symmetric integer matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymPair {
    n: usize,
    a: IMat,
    b: IMat,
}

impl SymPair {
    pub fn new(a: IMat, b: IMat) -> Result<SymPair> {
        let n = a.rows;
        if a.cols != n || b.rows != n || b.cols != n {
            return Err(BinicError::DegenerateInput(
                "pair matrices must be square of equal size".into(),
            ));
        }
        for (name, m) in [("first", &a), ("second", &b)] {
            for i in 0..n {
                for j in 0..i {
                    if m.at(i, j) != m.at(j, i) {
                        return Err(BinicError::DegenerateInput(format!(
                            "{name} matrix is not symmetric"
                        )));
                    }
                }
            }
        }
        Ok(SymPair { n, a, b })
    }

    pub fn from_i64(a: &[&[i64]], b: &[&[i64]]) -> Result<SymPair> {
        let build = |rows: &[&[i64]]| {
            IMat::from_rows(
                rows.iter()
                    .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                    .collect(),
            )
        };
        SymPair::new(build(a), build(b))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &IMat {
        &self.a
    }

    pub fn b(&self) -> &IMat {
        &self.b
    }
}

impl fmt::Display for SymPair {
    /// `n` on the first line, then the upper triangles of A and B row-major,
    /// one matrix per line.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(out, "{}", self.n)?;
        for m in [&self.a, &self.b] {
            let mut first = true;
            for i in 0..self.n {
                for j in i..self.n {
                    if !first {
                        write!(out, " ")?;
                    }
                    write!(out, "{}", m.at(i, j))?;
                    first = false;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

impl FromStr for SymPair {
    type Err = BinicError;

    fn from_str(s: &str) -> Result<SymPair> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let bad = |msg: &str| BinicError::DegenerateInput(format!("pair parse: {msg}"));
        let n: usize = lines
            .next()
            .ok_or_else(|| bad("missing size line"))?
            .trim()
            .parse()
            .map_err(|_| bad("size is not an integer"))?;
        if n == 0 {
            return Err(bad("size must be positive"));
        }
        let want = n * (n + 1) / 2;
        let mut mats = Vec::with_capacity(2);
        for which in ["first", "second"] {
            let line = lines
                .next()
                .ok_or_else(|| bad(&format!("missing {which} matrix line")))?;
            let vals: Vec<BigInt> = line
                .split_whitespace()
                .map(|t| {
                    BigInt::from_str(t).map_err(|_| bad(&format!("bad integer `{t}`")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != want {
                return Err(bad(&format!(
                    "{which} matrix: expected {want} upper-triangle entries, got {}",
                    vals.len()
                )));
            }
            let mut m = IMat::zero(n, n);
            let mut it = vals.into_iter();
            for i in 0..n {
                for j in i..n {
                    let v = it.next().unwrap();
                    *m.at_mut(i, j) = v.clone();
                    *m.at_mut(j, i) = v;
                }
            }
            mats.push(m);
        }
        let b = mats.pop().unwrap();
        let a = mats.pop().unwrap();
        SymPair::new(a, b)
    }
}

/// The (I, delta) data attached to a pair: a based fractional ideal and an
/// invertible element with I^2 contained in delta I_f^{n-3} and
/// N(I)^2 = N(delta) N(I_f^{n-3}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealClassPair {
    pub ideal: BasedIdeal,
    pub delta: AlgebraElement,
}

/// The coefficient matrices C^(0), ..., C^(n-3) attached to a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffMatrices {
    pub mats: Vec<IMat>,
}

/// The matrix of theta-polynomials whose (i, j) entry represents, up to
/// the global sign (-1)^{(n-1)/2}, the product alpha_i alpha_j / delta:
/// coeff[k] / den is the theta^k coefficient matrix, 0 <= k <= n-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DMatrix {
    pub n: usize,
    pub den: BigInt,
    pub coeff: Vec<IMat>,
}

impl DMatrix {
    /// Entry (i, j) as an element of K_f in theta-power coordinates.
    pub fn entry(&self, i: usize, j: usize) -> AlgebraElement {
        AlgebraElement::from_rationals(
            (0..self.n)
                .map(|k| BigRational::new(self.coeff[k].at(i, j).clone(), self.den.clone()))
                .collect(),
        )
    }

    /// The (1,1) entry evaluated at the integer theta = m.
    pub fn eval11(&self, m: i64) -> BigRational {
        let mut acc = BigRational::zero();
        let mb = BigRational::from(BigInt::from(m));
        for k in (0..self.n).rev() {
            acc = acc * &mb + BigRational::from(self.coeff[k].at(0, 0).clone());
        }
        acc / BigRational::from(self.den.clone())
    }
}

/// Result of the pair -> (I, delta) direction: the ring of the (normalized)
/// resolvent, the extracted ideal data, the ratio column used, and the pair
/// after any leading-coefficient normalization.
#[derive(Debug, Clone)]
pub struct PairCorrespondence {
    pub ring: RankNRing,
    pub ideal_pair: IdealClassPair,
    pub column: usize,
    pub normalized_pair: SymPair,
}

/// Coefficients of det(Ax - By), by exact interpolation at x = 0..n, y = 1.
pub fn resolvent(p: &SymPair) -> BinaryForm {
    let n = p.n;
    // g(t) = det(At - B) = f(t, 1) has degree <= n.
    let values: Vec<BigInt> = (0..=n as i64)
        .map(|t| p.a.scale(&BigInt::from(t)).sub(&p.b).det())
        .collect();
    // Solve the Vandermonde system for the ascending coefficients of g.
    let vt = QMat::from_fn(n + 1, n + 1, |d, t| {
        BigRational::from(BigInt::from(t as i64).pow(d as u32))
    });
    let rhs: Vec<BigRational> = values.iter().map(|v| BigRational::from(v.clone())).collect();
    let coeffs = vt
        .solve_left(&rhs)
        .expect("Vandermonde at distinct points is invertible");
    let form_coeffs: Vec<BigInt> = (0..=n)
        .map(|i| {
            let c = &coeffs[n - i];
            debug_assert!(c.is_integer());
            c.to_integer()
        })
        .collect();
    let f = BinaryForm::new(form_coeffs).expect("length n+1 >= 2");
    debug_assert_eq!(p.a.det(), f.coeff(0).clone());
    debug_assert_eq!(-p.b.det(), f.coeff(n).clone());
    f
}

/// The SL_n part of the action: (gAg^t, gBg^t). Requires det g = 1.
pub fn act_sln(g: &IMat, p: &SymPair) -> SymPair {
    assert_eq!(g.det(), BigInt::one(), "matrix action needs determinant 1");
    let gt = g.transpose();
    SymPair {
        n: p.n,
        a: g.mul(&p.a).mul(&gt),
        b: g.mul(&p.b).mul(&gt),
    }
}

/// Full action of (g2, gn): congruence by gn, then the SL_2 mix
/// (A, B) |-> (aA - bB, -cA + dB).
pub fn act_g(g2: &Unimodular2, gn: &IMat, p: &SymPair) -> SymPair {
    assert!(g2.det_is_one(), "SL_2 part needs determinant 1");
    let moved = act_sln(gn, p);
    let (a, b, c, d) = (&g2.a, &g2.b, &g2.c, &g2.d);
    let new_a = moved.a.scale(a).sub(&moved.b.scale(b));
    let new_b = moved.b.scale(d).sub(&moved.a.scale(c));
    SymPair {
        n: p.n,
        a: new_a,
        b: new_b,
    }
}

/// The section of the resolvent: an explicit pair with resolvent f, built
/// from antidiagonal ones and a band of form coefficients.
pub fn section_e(f: &BinaryForm) -> Result<SymPair> {
    let n = f.degree();
    if n < 3 || n % 2 == 0 {
        return Err(BinicError::DegenerateInput(format!(
            "section needs odd degree >= 3, got {n}"
        )));
    }
    let h = (n + 1) / 2;
    let mut a = IMat::zero(n, n);
    let mut b = IMat::zero(n, n);
    // 1-based index recipe, verified against the displayed matrices for
    // n = 3 and n = 5 and by resolvent round-trip for all odd n.
    let sign_a = if ((n - 1) / 2) % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    let sign_b = if ((n + 1) / 2) % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    for k in 1..=n {
        if k != h {
            *a.at_mut(k - 1, n + 1 - k - 1) = BigInt::one();
        }
        if k <= n - 1 {
            *b.at_mut(k - 1, n - k - 1) = BigInt::one();
        }
    }
    for k in 0..=(n - 1) / 2 {
        let i = h + k - 1;
        *a.at_mut(i, i) = &sign_a * f.coeff(2 * k);
        *b.at_mut(i, i) = &sign_b * f.coeff(2 * k + 1);
    }
    let pair = SymPair { n, a, b };
    debug_assert_eq!(resolvent(&pair), *f);
    Ok(pair)
}

/// Powers M^0..M^{max} of M = B A^{-1}.
fn ba_inv_powers(p: &SymPair, max: usize) -> Result<Vec<QMat>> {
    let a_inv = p
        .a
        .to_rational()
        .inverse()
        .ok_or(BinicError::NonInvertible)?;
    let m = p.b.to_rational().mul(&a_inv);
    let mut powers = vec![QMat::identity(p.n)];
    for _ in 0..max {
        powers.push(powers.last().unwrap().mul(&m));
    }
    Ok(powers)
}

fn qmat_to_int(m: &QMat, what: &str) -> Result<IMat> {
    let mut out = IMat::zero(m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            let v = m.at(i, j);
            if !v.is_integer() {
                return Err(BinicError::NonIntegralOutput(format!(
                    "{what} entry ({i},{j}) = {v} is not an integer"
                )));
            }
            *out.at_mut(i, j) = v.to_integer();
        }
    }
    Ok(out)
}

/// The matrices C^(k) = (f_0 M^{n-k-1} + ... + f_{n-k-2} M) A - f_{n-k-2} B
/// for 0 <= k <= n-3, with M = B A^{-1}; integral for integral pairs.
pub fn coeff_matrices(p: &SymPair) -> Result<CoeffMatrices> {
    let n = p.n;
    if n < 3 {
        return Err(BinicError::DegenerateInput("pair size below 3".into()));
    }
    let f = resolvent(p);
    let powers = ba_inv_powers(p, n - 1)?;
    let a_rat = p.a.to_rational();
    let b_rat = p.b.to_rational();
    let mut mats = Vec::with_capacity(n - 2);
    for k in 0..=n - 3 {
        let mut acc = QMat::zero(n, n);
        for i in 0..=n - k - 2 {
            let c = BigRational::from(f.coeff(i).clone());
            acc = acc.add(&powers[n - k - 1 - i].scale(&c));
        }
        let ck = acc
            .mul(&a_rat)
            .sub(&b_rat.scale(&BigRational::from(f.coeff(n - k - 2).clone())));
        let m = qmat_to_int(&ck, "coefficient matrix")?;
        for i in 0..n {
            for j in 0..i {
                debug_assert_eq!(m.at(i, j), m.at(j, i), "C^({k}) must be symmetric");
            }
        }
        mats.push(m);
    }
    Ok(CoeffMatrices { mats })
}

/// The theta-polynomial matrix D with theta^k coefficient
/// sum_{j <= n-1-k} f_{n-1-j-k} M^j A, cleared to a common denominator.
pub fn d_matrix(p: &SymPair) -> Result<DMatrix> {
    let n = p.n;
    if n < 3 {
        return Err(BinicError::DegenerateInput("pair size below 3".into()));
    }
    let f = resolvent(p);
    let powers = ba_inv_powers(p, n - 1)?;
    let a_rat = p.a.to_rational();
    let mut rational_coeffs: Vec<QMat> = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = QMat::zero(n, n);
        for j in 0..=n - 1 - k {
            let c = BigRational::from(f.coeff(n - 1 - j - k).clone());
            acc = acc.add(&powers[j].scale(&c));
        }
        rational_coeffs.push(acc.mul(&a_rat));
    }
    // Common denominator across all coefficient matrices.
    let mut den = BigInt::one();
    for m in &rational_coeffs {
        for i in 0..n {
            for j in 0..n {
                den = den.lcm(m.at(i, j).denom());
            }
        }
    }
    let coeff = rational_coeffs
        .iter()
        .map(|m| {
            qmat_to_int(&m.scale(&BigRational::from(den.clone())), "cleared entry")
                .expect("scaling by the common denominator clears all fractions")
        })
        .collect();
    Ok(DMatrix { n, den, coeff })
}

/// Extracts (I, delta) from a pair with primitive, irreducible,
/// nondegenerate resolvent. A pair whose resolvent has f_0 = 0 is first
/// moved by the SL_2 element that normalizes the form.
pub fn pair_to_ideal(p: &SymPair) -> Result<PairCorrespondence> {
    let f = resolvent(p);
    if f.is_zero() {
        return Err(BinicError::ZeroForm);
    }
    if f.discriminant()?.is_zero() {
        return Err(BinicError::DegenerateInput(
            "resolvent form is degenerate".into(),
        ));
    }
    if !f.is_primitive() {
        return Err(BinicError::DegenerateInput(
            "resolvent form is imprimitive".into(),
        ));
    }
    if !f.is_irreducible() {
        return Err(BinicError::DegenerateInput(
            "resolvent form is reducible over Q".into(),
        ));
    }
    let ring = RankNRing::build(&f)?;
    let p_norm = if f.coeff(0).is_zero() {
        let moved = act_g(ring.normalizer(), &IMat::identity(p.n), p);
        if resolvent(&moved).coeff(0).is_zero() {
            return Err(BinicError::DegenerateInput(
                "leading-coefficient normalization failed".into(),
            ));
        }
        moved
    } else {
        p.clone()
    };
    let n = p_norm.n;
    let cmats = coeff_matrices(&p_norm)?;
    // The assembled expansion below equals eps * alpha_i alpha_j / delta
    // with the global sign eps = (-1)^{(n-1)/2}.
    let eps_neg = ((n - 1) / 2) % 2 == 1;
    // phi(alpha_i (x) alpha_j) in theta-coordinates. The two tail vectors
    // are the constant-inclusive zeta_k + f_k, not the bare zeta_k; only
    // with the constants is the ratio below independent of (i, j).
    let mut zeta_nm2 = ring.zeta_in_theta(n - 2);
    zeta_nm2[0] += ring.form().coeff(n - 2);
    let mut zeta_nm1 = ring.zeta_in_theta(n - 1);
    zeta_nm1[0] += ring.form().coeff(n - 1);
    let expr = |i: usize, j: usize| -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); n];
        for (k, ck) in cmats.mats.iter().enumerate() {
            v[k] += ck.at(i, j);
        }
        for (t, z) in zeta_nm2.iter().enumerate() {
            v[t] += p_norm.b.at(i, j) * z;
        }
        for (t, z) in zeta_nm1.iter().enumerate() {
            v[t] += p_norm.a.at(i, j) * z;
        }
        v
    };
    // Scan ratio columns for the first giving an independent system.
    let mut chosen: Option<(usize, Vec<Vec<BigInt>>)> = None;
    for col in 0..n {
        let rows: Vec<Vec<BigInt>> = (0..n).map(|i| expr(i, col)).collect();
        let det = IMat::from_rows(rows.clone()).det();
        if !det.is_zero() {
            chosen = Some((col, rows));
            break;
        }
    }
    let (column, mut rows) = chosen.ok_or_else(|| {
        BinicError::DegenerateInput("no ratio column yields an independent basis".into())
    })?;
    // Scalar normalization: divide by content, enforce positive orientation.
    let mut content = BigInt::zero();
    for r in &rows {
        for x in r {
            content = content.gcd(x);
        }
    }
    if !content.is_zero() && !content.is_one() {
        for r in rows.iter_mut() {
            for x in r.iter_mut() {
                *x /= &content;
            }
        }
    }
    if IMat::from_rows(rows.clone()).det().is_negative() {
        for r in rows.iter_mut() {
            for x in r.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
    }
    let alphas: Vec<AlgebraElement> = rows
        .iter()
        .map(|r| AlgebraElement::from_integers(r))
        .collect();
    let ideal = ring.based_ideal_from_rows(
        alphas.iter().map(|a| a.coords.clone()).collect(),
    )?;
    // delta = alpha_i alpha_j / phi(alpha_i (x) alpha_j), independent of (i, j).
    let mut delta: Option<AlgebraElement> = None;
    'outer: for i in 0..n {
        for j in 0..n {
            let e = AlgebraElement::from_integers(&expr(i, j));
            if let Ok(inv) = ring.k_inverse(&e) {
                let prod = ring.k_mul(&alphas[i], &alphas[j]);
                let d = ring.k_mul(&prod, &inv);
                delta = Some(if eps_neg { d.neg() } else { d });
                break 'outer;
            }
        }
    }
    let delta = delta.ok_or_else(|| {
        BinicError::DegenerateInput("all phi values are zero divisors".into())
    })?;
    // The same delta must relate every (i, j).
    for i in 0..n {
        for j in 0..n {
            let e = AlgebraElement::from_integers(&expr(i, j));
            let lhs = ring.k_mul(&alphas[i], &alphas[j]);
            let mut rhs = ring.k_mul(&delta, &e);
            if eps_neg {
                rhs = rhs.neg();
            }
            assert_eq!(lhs, rhs, "phi ratio is not constant at ({i},{j})");
        }
    }
    // theta acts on the alpha-basis by B A^{-1}.
    let powers = ba_inv_powers(&p_norm, 1)?;
    let m = &powers[1];
    for i in 0..n {
        let lhs = ring.k_mul(&ring.theta(), &alphas[i]);
        let mut rhs = AlgebraElement::zero(n);
        for j in 0..n {
            rhs = rhs.add(&alphas[j].scale(m.at(i, j)));
        }
        assert_eq!(lhs, rhs, "theta action must match B A^{{-1}} at row {i}");
    }
    let ic = IdealClassPair { ideal, delta };
    debug_assert!(ideal_pair_invariants(&ring, &ic)?);
    Ok(PairCorrespondence {
        ring,
        ideal_pair: ic,
        column,
        normalized_pair: p_norm,
    })
}

/// Expands phi = alpha_i alpha_j / delta in the mixed basis
/// (1, theta, ..., theta^{n-3}, zeta_{n-2} + f_{n-2}, zeta_{n-1} + f_{n-1})
/// and reads off (A, B) up to the global sign (-1)^{(n-1)/2}. The basis
/// defaults to the ordered rows of ic.ideal.
pub fn ideal_to_pair(
    ring: &RankNRing,
    ic: &IdealClassPair,
    basis_override: Option<&[AlgebraElement]>,
) -> Result<SymPair> {
    let n = ring.degree();
    let basis: Vec<AlgebraElement> = match basis_override {
        Some(b) => {
            if b.len() != n {
                return Err(BinicError::DegenerateInput(
                    "basis override must have n elements".into(),
                ));
            }
            b.to_vec()
        }
        None => (0..n).map(|i| ic.ideal.row_elt(i)).collect(),
    };
    // Orientation relative to <1, zeta_1, ..., zeta_{n-1}>.
    let det = QMat::from_rows(basis.iter().map(|e| e.coords.clone()).collect()).det();
    if det.is_zero() {
        return Err(BinicError::DegenerateInput("basis is dependent".into()));
    }
    if det.is_negative() {
        return Err(BinicError::OrientationError);
    }
    let delta_inv = ring.k_inverse(&ic.delta)?;
    let f = ring.form();
    let f0 = BigRational::from(f.coeff(0).clone());
    let f1 = BigRational::from(f.coeff(1).clone());
    let eps_neg = ((n - 1) / 2) % 2 == 1;
    let mut a = IMat::zero(n, n);
    let mut b = IMat::zero(n, n);
    let as_int = |v: &BigRational, what: &str| -> Result<BigInt> {
        if v.is_integer() {
            Ok(v.to_integer())
        } else {
            Err(BinicError::NonIntegralOutput(format!(
                "{what} = {v} is not an integer; (I, delta) invariants violated"
            )))
        }
    };
    for i in 0..n {
        for j in i..n {
            let phi = ring.k_mul(&ring.k_mul(&basis[i], &basis[j]), &delta_inv);
            let aij = &phi.coords[n - 1] / &f0;
            let bij = (&phi.coords[n - 2] - &f1 * &aij) / &f0;
            let mut av = as_int(&aij, "a entry")?;
            let mut bv = as_int(&bij, "b entry")?;
            if eps_neg {
                av = -av;
                bv = -bv;
            }
            // The remaining mixed-basis coefficients must be integral too.
            for k in 0..=n - 3 {
                let c = &phi.coords[k]
                    - BigRational::from(f.coeff(n - 2 - k).clone()) * &bij
                    - BigRational::from(f.coeff(n - 1 - k).clone()) * &aij;
                as_int(&c, "c entry")?;
            }
            *a.at_mut(i, j) = av.clone();
            *a.at_mut(j, i) = av;
            *b.at_mut(i, j) = bv.clone();
            *b.at_mut(j, i) = bv;
        }
    }
    let pair = SymPair { n, a, b };
    debug_assert_eq!(&resolvent(&pair), ring.form());
    Ok(pair)
}

/// Checks the defining conditions: I^2 inside delta I_f^{n-3} and
/// N(I)^2 = N(delta) N(I_f^{n-3}).
pub fn ideal_pair_invariants(ring: &RankNRing, ic: &IdealClassPair) -> Result<bool> {
    let shift = ring.ideal_power(ring.degree() - 3)?;
    let target = ring.scale_ideal(&ic.delta, &shift)?;
    let square = ring.mult_ideals(&ic.ideal, &ic.ideal)?;
    if !lattice_contains(ring, &target, &square) {
        return Ok(false);
    }
    let ni = ring.ideal_norm(&ic.ideal);
    let nd = ring.k_norm(&ic.delta);
    let nshift = ring.ideal_norm(&shift);
    Ok(&ni * &ni == nd * nshift)
}

/// True when every basis vector of `inner` lies in the lattice of `outer`.
fn lattice_contains(ring: &RankNRing, outer: &BasedIdeal, inner: &BasedIdeal) -> bool {
    let outer = ring.canonical(outer);
    let n = inner.num.rows;
    for i in 0..n {
        let mut w = Vec::with_capacity(n);
        let mut ok = true;
        for x in inner.num.row(i) {
            let v = BigRational::new(x * &outer.den, inner.den.clone());
            if v.is_integer() {
                w.push(v.to_integer());
            } else {
                ok = false;
                break;
            }
        }
        if !ok || !linalg::hnf_contains(&outer.num, &w) {
            return false;
        }
    }
    true
}

/// Projectivity: I^2 = delta I_f^{n-3} as an exact lattice equality.
pub fn is_projective(ring: &RankNRing, ic: &IdealClassPair) -> Result<bool> {
    let shift = ring.ideal_power(ring.degree() - 3)?;
    let target = ring.scale_ideal(&ic.delta, &shift)?;
    let square = ring.mult_ideals(&ic.ideal, &ic.ideal)?;
    Ok(ring.ideal_eq(&square, &target))
}

/// Composition on (I, delta) data over the same form: (I I', delta delta').
pub fn compose(
    ring_a: &RankNRing,
    a: &IdealClassPair,
    ring_b: &RankNRing,
    b: &IdealClassPair,
) -> Result<IdealClassPair> {
    if ring_a.form() != ring_b.form() {
        return Err(BinicError::IncompatibleForms);
    }
    if !is_projective(ring_a, a)? || !is_projective(ring_b, b)? {
        return Err(BinicError::DegenerateInput(
            "composition needs projective inputs".into(),
        ));
    }
    let ideal = ring_a.mult_ideals(&a.ideal, &b.ideal)?;
    let delta = ring_a.k_mul(&a.delta, &b.delta);
    let out = IdealClassPair { ideal, delta };
    debug_assert!(ideal_pair_invariants(ring_a, &out)?);
    Ok(out)
}

/// Equivalence test: is there kappa with I' = kappa I and
/// delta' = kappa^2 delta? Resolved through the exact square test.
pub fn equivalent(
    ring: &RankNRing,
    a: &IdealClassPair,
    b: &IdealClassPair,
    effort: u32,
) -> Result<Verdict> {
    let ratio = ring.k_mul(&b.delta, &ring.k_inverse(&a.delta)?);
    match ring.is_square(&ratio, effort)? {
        SquareVerdict::NonSquare { .. } => Ok(Verdict::No),
        SquareVerdict::Unknown => Ok(Verdict::Unknown),
        SquareVerdict::Square(kappa) => {
            let moved = ring.scale_ideal(&kappa, &a.ideal)?;
            if ring.ideal_eq(&moved, &b.ideal) {
                Ok(Verdict::Yes)
            } else {
                // kappa is unique up to sign for an irreducible form, and
                // the sign does not change the lattice.
                Ok(Verdict::No)
            }
        }
    }
}

/// Reducibility of a pair: delta is a square in K_f.
pub fn is_reducible(p: &SymPair, effort: u32) -> Result<Verdict> {
    let corr = pair_to_ideal(p)?;
    match corr.ring.is_square(&corr.ideal_pair.delta, effort)? {
        SquareVerdict::Square(_) => Ok(Verdict::Yes),
        SquareVerdict::NonSquare { .. } => Ok(Verdict::No),
        SquareVerdict::Unknown => Ok(Verdict::Unknown),
    }
}

/// The alternating-binomial sum over k of (-1)^{k+i} C(n-j, k-j) C(n-k-1, i)
/// for k = j..n-i-1; identically (-1)^{n+1}.
pub fn binomial_identity(n: usize, i: usize, j: usize) -> Result<BigInt> {
    if i + j > n - 1 {
        return Err(BinicError::IndexOutOfRange(format!(
            "need i + j <= n - 1, got i={i}, j={j}, n={n}"
        )));
    }
    let mut acc = BigInt::zero();
    for k in j..=n - i - 1 {
        let term = binom(n - j, k - j) * binom(n - k - 1, i);
        if (k + i) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

fn binom(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for t in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    acc
}

/// Exact check that M = B A^{-1} satisfies sum_j f_{n-j} M^j = 0 for the
/// resolvent f.
pub fn charpoly_identity(p: &SymPair) -> Result<bool> {
    let n = p.n;
    let f = resolvent(p);
    let powers = ba_inv_powers(p, n)?;
    let mut acc = QMat::zero(n, n);
    for j in 0..=n {
        acc = acc.add(&powers[j].scale(&BigRational::from(f.coeff(n - j).clone())));
    }
    let zero = QMat::zero(n, n);
    Ok(acc == zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn form(v: &[i64]) -> BinaryForm {
        BinaryForm::from_i64(v).unwrap()
    }

    /// A pseudorandom SL_n(Z) element: a short product of elementary
    /// transvections.
    fn random_sln(n: usize, rng: &mut ChaCha8Rng) -> IMat {
        let mut g = IMat::identity(n);
        for _ in 0..4 {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            while j == i {
                j = rng.gen_range(0..n);
            }
            let c = BigInt::from(rng.gen_range(-2..=2i64));
            let mut e = IMat::identity(n);
            *e.at_mut(i, j) = c;
            g = g.mul(&e);
        }
        g
    }

    fn random_sl2(rng: &mut ChaCha8Rng) -> Unimodular2 {
        let mut g = Unimodular2::identity();
        for _ in 0..3 {
            let c = rng.gen_range(-2..=2i64);
            let upper = Unimodular2::from_i64(1, c, 0, 1).unwrap();
            let lower = Unimodular2::from_i64(1, 0, c, 1).unwrap();
            g = if rng.gen_bool(0.5) { g.mul(&upper) } else { g.mul(&lower) };
        }
        g
    }

    #[test]
    fn section_matches_small_displays() {
        // n = 3.
        let f = form(&[2, 3, 5, 7]);
        let p = section_e(&f).unwrap();
        let want = SymPair::from_i64(
            &[&[0, 0, 1], &[0, -2, 0], &[1, 0, -5]],
            &[&[0, 1, 0], &[1, 3, 0], &[0, 0, 7]],
        )
        .unwrap();
        assert_eq!(p, want);
        // n = 5.
        let f5 = form(&[1, 2, 3, 4, 5, 6]);
        let p5 = section_e(&f5).unwrap();
        let want5 = SymPair::from_i64(
            &[
                &[0, 0, 0, 0, 1],
                &[0, 0, 0, 1, 0],
                &[0, 0, 1, 0, 0],
                &[0, 1, 0, 3, 0],
                &[1, 0, 0, 0, 5],
            ],
            &[
                &[0, 0, 0, 1, 0],
                &[0, 0, 1, 0, 0],
                &[0, 1, -2, 0, 0],
                &[1, 0, 0, -4, 0],
                &[0, 0, 0, 0, -6],
            ],
        )
        .unwrap();
        assert_eq!(p5, want5);
    }

    #[test]
    fn resolvent_round_trips_section() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3usize, 5, 7, 9] {
            for _ in 0..40 {
                let coeffs: Vec<i64> = (0..=n).map(|_| rng.gen_range(-9..=9)).collect();
                let f = form(&coeffs);
                let p = section_e(&f).unwrap();
                assert_eq!(resolvent(&p), f);
            }
        }
    }

    #[test]
    fn resolvent_identity_pair() {
        let p = SymPair::new(IMat::identity(3), IMat::zero(3, 3)).unwrap();
        assert_eq!(resolvent(&p), form(&[1, 0, 0, 0]));
    }

    #[test]
    fn resolvent_determinant_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let mut a = IMat::zero(3, 3);
            let mut b = IMat::zero(3, 3);
            for i in 0..3 {
                for j in i..3 {
                    let x = BigInt::from(rng.gen_range(-4..=4i64));
                    let y = BigInt::from(rng.gen_range(-4..=4i64));
                    *a.at_mut(i, j) = x.clone();
                    *a.at_mut(j, i) = x;
                    *b.at_mut(i, j) = y.clone();
                    *b.at_mut(j, i) = y;
                }
            }
            let p = SymPair::new(a, b).unwrap();
            let f = resolvent(&p);
            assert_eq!(p.a().det(), *f.coeff(0));
            assert_eq!(-p.b().det(), *f.coeff(3));
        }
    }

    #[test]
    fn action_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [3usize, 5] {
            for _ in 0..40 {
                let coeffs: Vec<i64> = (0..=n).map(|_| rng.gen_range(-5..=5)).collect();
                let f = form(&coeffs);
                let p = section_e(&f).unwrap();
                let g2 = random_sl2(&mut rng);
                let gn = random_sln(n, &mut rng);
                let moved = act_g(&g2, &gn, &p);
                assert_eq!(resolvent(&moved), f.sl2_act(&g2));
                // SL_n alone leaves the resolvent fixed.
                assert_eq!(resolvent(&act_sln(&gn, &p)), f);
            }
        }
        // (-I_2) sends (A, B) to (-A, -B) and f to -f.
        let f = form(&[1, 2, 3, 4]);
        let p = section_e(&f).unwrap();
        let neg = Unimodular2::from_i64(-1, 0, 0, -1).unwrap();
        let moved = act_g(&neg, &IMat::identity(3), &p);
        let mut want = f.sl2_act(&neg);
        assert_eq!(resolvent(&moved), want);
        want = form(&[-1, -2, -3, -4]);
        assert_eq!(resolvent(&moved), want);
    }

    #[test]
    fn identity_action_fixes_pair() {
        let f = form(&[1, 0, -1, -1]);
        let p = section_e(&f).unwrap();
        let same = act_g(&Unimodular2::identity(), &IMat::identity(3), &p);
        assert_eq!(same, p);
    }

    #[test]
    fn round_trip_section_and_translates() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for coeffs in [vec![1i64, 0, -1, -1], vec![2, 1, -3, 5], vec![1, 2, 0, -1, 3, 2]] {
            let f = form(&coeffs);
            let p = section_e(&f).unwrap();
            for round in 0..4 {
                let q = if round == 0 {
                    p.clone()
                } else {
                    act_sln(&random_sln(f.degree(), &mut rng), &p)
                };
                let corr = pair_to_ideal(&q).unwrap();
                let back =
                    ideal_to_pair(&corr.ring, &corr.ideal_pair, None).unwrap();
                assert_eq!(back, corr.normalized_pair);
            }
        }
    }

    #[test]
    fn sln_translates_give_equivalent_ideal_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let f = form(&[1, 0, -1, -1]);
        let p = section_e(&f).unwrap();
        let base = pair_to_ideal(&p).unwrap();
        for _ in 0..4 {
            let moved = act_sln(&random_sln(3, &mut rng), &p);
            let corr = pair_to_ideal(&moved).unwrap();
            assert_eq!(
                equivalent(&base.ring, &base.ideal_pair, &corr.ideal_pair, 6).unwrap(),
                Verdict::Yes
            );
        }
    }

    #[test]
    fn section_pairs_are_reducible_and_projective() {
        for coeffs in [vec![1i64, 0, -1, -1], vec![2, 1, -3, 5]] {
            let f = form(&coeffs);
            let p = section_e(&f).unwrap();
            let corr = pair_to_ideal(&p).unwrap();
            assert!(is_projective(&corr.ring, &corr.ideal_pair).unwrap());
            assert_eq!(is_reducible(&p, 6).unwrap(), Verdict::Yes);
        }
    }

    #[test]
    fn kappa_rescaled_input_gives_same_pair() {
        let f = form(&[1, 0, -1, -1]);
        let p = section_e(&f).unwrap();
        let corr = pair_to_ideal(&p).unwrap();
        let ring = &corr.ring;
        let ic = &corr.ideal_pair;
        // kappa = theta is a unit here.
        let kappa = ring.theta();
        let new_ideal = ring.scale_ideal(&kappa, &ic.ideal).unwrap();
        let new_delta = ring.k_mul(&ring.k_mul(&kappa, &kappa), &ic.delta);
        let basis: Vec<AlgebraElement> = (0..3)
            .map(|i| ring.k_mul(&kappa, &ic.ideal.row_elt(i)))
            .collect();
        let rescaled = IdealClassPair {
            ideal: new_ideal,
            delta: new_delta,
        };
        let out = ideal_to_pair(ring, &rescaled, Some(&basis)).unwrap();
        let base = ideal_to_pair(ring, ic, None).unwrap();
        assert_eq!(out, base);
    }

    #[test]
    fn wrong_orientation_is_rejected() {
        let f = form(&[1, 0, -1, -1]);
        let p = section_e(&f).unwrap();
        let corr = pair_to_ideal(&p).unwrap();
        let mut basis: Vec<AlgebraElement> = (0..3)
            .map(|i| corr.ideal_pair.ideal.row_elt(i))
            .collect();
        basis.swap(0, 1);
        let res = ideal_to_pair(&corr.ring, &corr.ideal_pair, Some(&basis));
        assert!(matches!(res, Err(BinicError::OrientationError)));
    }

    #[test]
    fn composition_group_of_exponent_two() {
        // theta is a norm-1 fundamental unit for this field, so (R, theta)
        // generates the order-2 kernel of the class map.
        let f = form(&[1, 0, -1, -1]);
        let ring = RankNRing::build(&f).unwrap();
        let identity = IdealClassPair {
            ideal: ring.ring_ideal(),
            delta: AlgebraElement::one(3),
        };
        let x = IdealClassPair {
            ideal: ring.ring_ideal(),
            delta: ring.theta(),
        };
        assert!(is_projective(&ring, &x).unwrap());
        // x o identity ~ x.
        let xi = compose(&ring, &x, &ring, &identity).unwrap();
        assert_eq!(equivalent(&ring, &xi, &x, 6).unwrap(), Verdict::Yes);
        // x o x ~ identity and has square delta.
        let xx = compose(&ring, &x, &ring, &x).unwrap();
        assert_eq!(equivalent(&ring, &xx, &identity, 6).unwrap(), Verdict::Yes);
        // x is NOT equivalent to the identity: theta is not a square.
        assert_eq!(equivalent(&ring, &x, &identity, 6).unwrap(), Verdict::No);
        // Associativity at this tiny scale.
        let left = compose(&ring, &compose(&ring, &x, &ring, &x).unwrap(), &ring, &x).unwrap();
        let right = compose(&ring, &x, &ring, &compose(&ring, &x, &ring, &x).unwrap()).unwrap();
        assert_eq!(
            equivalent(&ring, &left, &right, 6).unwrap(),
            Verdict::Yes
        );
    }

    #[test]
    fn incompatible_forms_rejected() {
        let ra = RankNRing::build(&form(&[1, 0, -1, -1])).unwrap();
        let rb = RankNRing::build(&form(&[1, 0, 0, 1])).unwrap();
        let a = IdealClassPair {
            ideal: ra.ring_ideal(),
            delta: AlgebraElement::one(3),
        };
        let b = IdealClassPair {
            ideal: rb.ring_ideal(),
            delta: AlgebraElement::one(3),
        };
        assert!(matches!(
            compose(&ra, &a, &rb, &b),
            Err(BinicError::IncompatibleForms)
        ));
    }

    #[test]
    fn non_invertible_ideal_is_not_projective() {
        // x^3 - 4x - 8: the index-2 thickening of x^3 - x - 1. The lattice
        // 2 O_K = <2, theta, theta^2/2> is an R_f-module that is not
        // invertible; with delta = 1 it satisfies the containment and norm
        // conditions but fails projectivity.
        let f = form(&[1, 0, -4, -8]);
        let ring = RankNRing::build(&f).unwrap();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let rows = vec![
            vec![
                BigRational::from(BigInt::from(2)),
                BigRational::zero(),
                BigRational::zero(),
            ],
            vec![BigRational::zero(), BigRational::one(), BigRational::zero()],
            vec![BigRational::zero(), BigRational::zero(), half],
        ];
        let ideal = ring.based_ideal_from_rows(rows).unwrap();
        assert!(ring.is_ideal(&ideal));
        let ic = IdealClassPair {
            ideal,
            delta: AlgebraElement::one(3),
        };
        assert!(ideal_pair_invariants(&ring, &ic).unwrap());
        assert!(!is_projective(&ring, &ic).unwrap());
    }

    #[test]
    fn d_matrix_rank_one_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for coeffs in [vec![1i64, 0, -1, -1], vec![1, 2, 0, -1, 3, 2]] {
            let f = form(&coeffs);
            let n = f.degree();
            let p0 = section_e(&f).unwrap();
            let p = act_sln(&random_sln(n, &mut rng), &p0);
            let corr = pair_to_ideal(&p).unwrap();
            let d = d_matrix(&p).unwrap();
            let ring = &corr.ring;
            // D_ij D_11 = D_i1 D_j1 in K_f.
            for i in 0..n {
                for j in 0..n {
                    let lhs = ring.k_mul(&d.entry(i, j), &d.entry(0, 0));
                    let rhs = ring.k_mul(&d.entry(i, 0), &d.entry(j, 0));
                    assert_eq!(lhs, rhs);
                }
            }
            // Constant coefficient matrix is -f_n A B^{-1} A.
            let b_inv = p.b().to_rational().inverse().unwrap();
            let a_rat = p.a().to_rational();
            let want = a_rat
                .mul(&b_inv)
                .mul(&a_rat)
                .scale(&BigRational::from(-f.coeff(n).clone()));
            let den = BigRational::from(d.den.clone());
            for i in 0..n {
                for j in 0..n {
                    let got = BigRational::from(d.coeff[0].at(i, j).clone()) / &den;
                    assert_eq!(got, *want.at(i, j));
                }
            }
        }
    }

    #[test]
    fn reducible_pattern_d11_squares() {
        // The n = 5 section pair has the zero block a_ij = b_ij = 0 for
        // i, j <= 2, hence is reducible; d_11 takes square values.
        let f = form(&[1, 2, 0, -1, 3, 2]);
        let p = section_e(&f).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(p.a().at(i, j).is_zero());
                assert!(p.b().at(i, j).is_zero());
            }
        }
        let d = d_matrix(&p).unwrap();
        let is_square_q = |q: &BigRational| -> bool {
            if q.is_negative() {
                return false;
            }
            let nr = q.numer().sqrt();
            let dr = q.denom().sqrt();
            &nr * &nr == *q.numer() && &dr * &dr == *q.denom()
        };
        for m in -10..=10i64 {
            let v = d.eval11(m);
            assert!(is_square_q(&v), "d11({m}) = {v} should be a square");
        }
        // With a_11 = b_11 = 0 the theta^{n-3} coefficient of d_11 reduces
        // to (f_0 B A^{-1} B)_11 and is a square.
        let a_inv = p.a().to_rational().inverse().unwrap();
        let want = p
            .b()
            .to_rational()
            .mul(&a_inv)
            .mul(&p.b().to_rational())
            .scale(&BigRational::from(f.coeff(0).clone()));
        let got = BigRational::from(d.coeff[2].at(0, 0).clone())
            / BigRational::from(d.den.clone());
        assert_eq!(got, *want.at(0, 0));
        assert!(is_square_q(&got));
        // Reducibility matches the delta-square criterion.
        assert_eq!(is_reducible(&p, 6).unwrap(), Verdict::Yes);
    }

    #[test]
    fn binomial_identity_exhaustive() {
        for n in 3..=15usize {
            let want = if (n + 1) % 2 == 0 {
                BigInt::one()
            } else {
                -BigInt::one()
            };
            for i in 0..n {
                for j in 0..n - i {
                    assert_eq!(binomial_identity(n, i, j).unwrap(), want);
                }
            }
        }
        assert!(binomial_identity(3, 2, 2).is_err());
    }

    #[test]
    fn charpoly_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for n in [3usize, 5] {
            for _ in 0..25 {
                let coeffs: Vec<i64> = (0..=n).map(|_| rng.gen_range(-4..=4)).collect();
                let f = form(&coeffs);
                if f.coeff(0).is_zero() || f.coeff(n).is_zero() {
                    continue;
                }
                let p = section_e(&f).unwrap();
                assert!(charpoly_identity(&p).unwrap());
            }
        }
    }

    #[test]
    fn pair_serialization_round_trip() {
        let f = form(&[1, 2, 0, -1, 3, 2]);
        let p = section_e(&f).unwrap();
        let text = p.to_string();
        let back: SymPair = text.parse().unwrap();
        assert_eq!(back, p);
        // Malformed inputs are rejected.
        assert!("3\n1 2 3".parse::<SymPair>().is_err());
        assert!("2\n1 2 3\n1 2 x".parse::<SymPair>().is_err());
    }

    #[test]
    fn zero_leading_resolvent_is_normalized() {
        // x y (x^2 + y^2) * scaling has f_0 = 0; the correspondence moves it
        // first. Use an irreducible example: y * ... must stay irreducible,
        // so instead take a form with f_0 = 0 that is irreducible: that is
        // impossible (y divides), so check the error path.
        let p = SymPair::from_i64(
            &[&[0, 0, 0], &[0, -1, 0], &[0, 0, 1]],
            &[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]],
        )
        .unwrap();
        let f = resolvent(&p);
        assert!(f.coeff(0).is_zero());
        assert!(matches!(
            pair_to_ideal(&p),
            Err(BinicError::DegenerateInput(_)) | Err(BinicError::ZeroForm)
        ));
    }
}
