//! Finite-field and p-adic-truncation invariants of symmetric matrix pairs:
//! factorization types of forms mod p, exhaustive and seeded orbit censuses
//! of the fibers of the resolvent map over F_p, stratum counts over the full
//! pair space, unit-group local masses over Z/p^k, and brute-force isotropic
//! subspace search.
//!
//! Everything here is exact integer arithmetic. Closed-form orbit and
//! stabilizer counts are derived from the unit groups of etale algebras over
//! F_p and are cross-validated against breadth-first orbit enumeration under
//! elementary transvections; the censuses assert that agreement on every
//! separable fiber they touch.

use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::forms::BinaryForm;
use crate::fp::{self, addm, invm, mulm, powm, subm, PolyP};
use crate::linalg::IMat;
use crate::pairs::{section_e, SymPair};
use crate::rings::RankNRing;
use crate::{BinicError, Result};

/// Largest fiber keyspace p^{n(n+1)} that exhaustive enumeration will scan.
const EXHAUSTIVE_KEY_LIMIT: u128 = 1 << 24;
/// Largest |SL_n(F_p)| for which seeded orbit closure is attempted.
const SEEDED_SL_LIMIT: u128 = 30_000_000;
/// Largest p^n for which ring elements of R_f/p are enumerated one by one.
const ELEMENT_ENUM_LIMIT: u128 = 2_000_000;
/// Largest subspace scan (number of subspaces times points per subspace).
const ISOTROPIC_SCAN_LIMIT: u128 = 10_000_000;

// ---------------------------------------------------------------------------
// Factorization types over F_p
// ---------------------------------------------------------------------------

/// The factorization shape of a binary form over F_p: one (degree,
/// multiplicity) entry per distinct irreducible factor, sorted, with the
/// factor y (vanishing leading coefficients) counted like any other linear
/// factor. `separable` means every multiplicity is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorType {
    pub p: u64,
    pub factors: Vec<(usize, usize)>,
    pub separable: bool,
}

impl FactorType {
    /// Number of irreducible factors counted without multiplicity.
    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// True when the shape is one irreducible factor of degree k >= 2 plus
    /// n - k distinct linear factors; returns that k.
    pub fn almost_split_degree(&self) -> Option<usize> {
        if !self.separable {
            return None;
        }
        let big: Vec<usize> = self
            .factors
            .iter()
            .map(|&(d, _)| d)
            .filter(|&d| d >= 2)
            .collect();
        match big.as_slice() {
            [k] => Some(*k),
            _ => None,
        }
    }
}

pub(crate) fn red_u64(c: &BigInt, p: u64) -> u64 {
    c.mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue fits in u64")
}

/// Coefficients of f reduced into 0..p-1.
pub fn reduce_form(f: &BinaryForm, p: u64) -> Vec<u64> {
    f.coeffs().iter().map(|c| red_u64(c, p)).collect()
}

fn reduce_imat(m: &IMat, n: usize, p: u64) -> Vec<u64> {
    let mut out = vec![0u64; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = red_u64(m.at(i, j), p);
        }
    }
    out
}

/// Factorization type of f over F_p.
pub fn factor_type(f: &BinaryForm, p: u64) -> Result<FactorType> {
    factor_type_reduced(&reduce_form(f, p), p)
}

fn factor_type_reduced(r: &[u64], p: u64) -> Result<FactorType> {
    let n = r.len() - 1;
    let m = r.iter().take_while(|&&c| c % p == 0).count();
    if m == n + 1 {
        return Err(BinicError::FormVanishesModP(p));
    }
    let mut factors: Vec<(usize, usize)> = Vec::new();
    if m >= 1 {
        // y^m divides the form.
        factors.push((1, m));
    }
    // Dehomogenize: f(x,1) has ascending x-coefficients c_j = f_{n-j},
    // degree n - m with leading coefficient f_m != 0.
    let dehom: PolyP = (0..=n - m).map(|j| r[n - j] % p).collect();
    if fp::pdeg(&dehom) > Some(0) {
        for (part, mult) in fp::squarefree_decomp(&dehom, p) {
            for (d, prod) in fp::distinct_degree(&part, p) {
                let count = fp::pdeg(&prod).expect("nonzero product") / d;
                for _ in 0..count {
                    factors.push((d, mult));
                }
            }
        }
    }
    factors.sort_unstable();
    let separable = factors.iter().all(|&(_, e)| e == 1);
    debug_assert_eq!(factors.iter().map(|&(d, e)| d * e).sum::<usize>(), n);
    Ok(FactorType {
        p,
        factors,
        separable,
    })
}

// ---------------------------------------------------------------------------
// Predicted orbit and stabilizer counts from unit-group structure
// ---------------------------------------------------------------------------

/// Number of subsets of component-flip vectors whose total weight is even,
/// where flipping component i contributes bits[i] mod 2 to the norm class.
fn even_weight_count(bits: &[u32]) -> u64 {
    assert!(bits.len() <= 20, "component count out of range");
    let mut count = 0u64;
    for mask in 0u32..(1u32 << bits.len()) {
        let mut w = 0u32;
        for (i, &b) in bits.iter().enumerate() {
            if mask >> i & 1 == 1 {
                w += b;
            }
        }
        if w % 2 == 0 {
            count += 1;
        }
    }
    count
}

/// Number of square classes of units of prod_i F_{p^{d_i}} whose norm down
/// to F_p is a square: component unit groups are cyclic, the nonsquare class
/// of F_{p^d} has nonsquare norm (the norm of a generator is a generator),
/// and a class vector has square norm exactly when it flips an even number
/// of components. For p = 2 the unit groups have odd order and the count
/// is 1.
pub fn predicted_orbit_count(ft: &FactorType) -> Result<u64> {
    if !ft.separable {
        return Err(BinicError::InseparableType);
    }
    if ft.p == 2 {
        return Ok(1);
    }
    let bits: Vec<u32> = ft.factors.iter().map(|_| 1).collect();
    Ok(even_weight_count(&bits))
}

/// Number of 2-torsion units of prod_i F_{p^{d_i}} with norm exactly 1:
/// component torsion is {+-1}, and the norm of -1 in F_{p^d} is (-1)^d, so
/// a sign vector has norm 1 exactly when the flipped components' degrees
/// sum to an even number. For p = 2 the only torsion unit is 1.
pub fn predicted_stab(ft: &FactorType) -> Result<u64> {
    if !ft.separable {
        return Err(BinicError::InseparableType);
    }
    if ft.p == 2 {
        return Ok(1);
    }
    let bits: Vec<u32> = ft.factors.iter().map(|&(d, _)| (d % 2) as u32).collect();
    Ok(even_weight_count(&bits))
}

/// Orbit and stabilizer counts over the real numbers for a form with r1 real
/// and r2 complex-conjugate root pairs: unit square classes of R^{r1} x
/// C^{r2} are sign vectors on the real components, the norm is the product
/// of the signs (complex components contribute positive norms), and
/// 2-torsion picks up an extra free sign per complex component.
pub fn archimedean_counts(r1: usize, r2: usize) -> Result<(u64, u64)> {
    if r1 == 0 || r1 + r2 > 20 {
        return Err(BinicError::DegenerateInput(format!(
            "signature ({r1}, {r2}) out of range"
        )));
    }
    let orbit = even_weight_count(&vec![1; r1]);
    let mut bits = vec![1u32; r1];
    bits.extend(std::iter::repeat(0).take(r2));
    let stab = even_weight_count(&bits);
    Ok((orbit, stab))
}

// ---------------------------------------------------------------------------
// Small dense linear algebra over F_p (row-major flat matrices)
// ---------------------------------------------------------------------------

fn fmat_id(n: usize) -> Vec<u64> {
    let mut m = vec![0u64; n * n];
    for i in 0..n {
        m[i * n + i] = 1;
    }
    m
}

fn fmat_mul(a: &[u64], b: &[u64], n: usize, p: u64) -> Vec<u64> {
    let mut out = vec![0u64; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] = addm(out[i * n + j], mulm(aik, b[k * n + j], p), p);
            }
        }
    }
    out
}

fn fmat_inv(a: &[u64], n: usize, p: u64) -> Option<Vec<u64>> {
    // Gauss-Jordan on [a | I].
    let w = 2 * n;
    let mut m = vec![0u64; n * w];
    for i in 0..n {
        for j in 0..n {
            m[i * w + j] = a[i * n + j] % p;
        }
        m[i * w + n + i] = 1;
    }
    for c in 0..n {
        let piv = (c..n).find(|&r| m[r * w + c] != 0)?;
        if piv != c {
            for j in 0..w {
                m.swap(c * w + j, piv * w + j);
            }
        }
        let inv = invm(m[c * w + c], p);
        for j in 0..w {
            m[c * w + j] = mulm(m[c * w + j], inv, p);
        }
        for r in 0..n {
            if r != c && m[r * w + c] != 0 {
                let f = m[r * w + c];
                for j in 0..w {
                    let s = mulm(f, m[c * w + j], p);
                    m[r * w + j] = subm(m[r * w + j], s, p);
                }
            }
        }
    }
    let mut out = vec![0u64; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = m[i * w + n + j];
        }
    }
    Some(out)
}

fn fmat_det(a: &[u64], n: usize, p: u64) -> u64 {
    let mut m: Vec<u64> = a.iter().map(|&x| x % p).collect();
    let mut det = 1u64;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| m[r * n + c] != 0) else {
            return 0;
        };
        if piv != c {
            for j in 0..n {
                m.swap(c * n + j, piv * n + j);
            }
            det = subm(0, det, p);
        }
        det = mulm(det, m[c * n + c], p);
        let inv = invm(m[c * n + c], p);
        for r in c + 1..n {
            if m[r * n + c] != 0 {
                let f = mulm(m[r * n + c], inv, p);
                for j in c..n {
                    let s = mulm(f, m[c * n + j], p);
                    m[r * n + j] = subm(m[r * n + j], s, p);
                }
            }
        }
    }
    det
}

/// g M g^T for square g, M.
fn congruence(g: &[u64], m: &[u64], n: usize, p: u64) -> Vec<u64> {
    let gm = fmat_mul(g, m, n, p);
    let mut out = vec![0u64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0u64;
            for k in 0..n {
                acc = addm(acc, mulm(gm[i * n + k], g[j * n + k], p), p);
            }
            out[i * n + j] = acc;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Pair encoding and the resolvent over F_p
// ---------------------------------------------------------------------------

fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

fn encode_pair(a: &[u64], b: &[u64], n: usize, p: u64) -> u128 {
    let mut key: u128 = 0;
    for m in [a, b] {
        for i in 0..n {
            for j in i..n {
                key = key * p as u128 + m[i * n + j] as u128;
            }
        }
    }
    key
}

fn decode_pair(mut key: u128, n: usize, p: u64) -> (Vec<u64>, Vec<u64>) {
    let t = tri_len(n);
    let mut digits = vec![0u64; 2 * t];
    for d in digits.iter_mut().rev() {
        *d = (key % p as u128) as u64;
        key /= p as u128;
    }
    let fill = |base: usize| {
        let mut m = vec![0u64; n * n];
        let mut idx = base;
        for i in 0..n {
            for j in i..n {
                m[i * n + j] = digits[idx];
                m[j * n + i] = digits[idx];
                idx += 1;
            }
        }
        m
    };
    (fill(0), fill(t))
}

/// Coefficients f_0..f_n of det(A x - B y) over F_p, by symbolic cofactor
/// expansion of det(A t - B) in F_p[t]; valid for every pair including those
/// with det A = 0.
fn resolvent_modp(a: &[u64], b: &[u64], n: usize, p: u64) -> Vec<u64> {
    let cols: Vec<usize> = (0..n).collect();
    let det = polydet(a, b, n, p, 0, &cols);
    (0..=n)
        .map(|i| det.get(n - i).copied().unwrap_or(0))
        .collect()
}

fn polydet(a: &[u64], b: &[u64], n: usize, p: u64, row: usize, cols: &[usize]) -> PolyP {
    let lin = |i: usize, j: usize| -> PolyP {
        let mut v = vec![(p - b[i * n + j] % p) % p, a[i * n + j] % p];
        fp::ptrim(&mut v);
        v
    };
    if cols.len() == 1 {
        return lin(row, cols[0]);
    }
    let mut acc: PolyP = vec![];
    for (t, &j) in cols.iter().enumerate() {
        let entry = lin(row, j);
        if entry.is_empty() {
            continue;
        }
        let sub: Vec<usize> = cols
            .iter()
            .copied()
            .filter(|&c| c != j)
            .collect();
        let minor = polydet(a, b, n, p, row + 1, &sub);
        let term = fp::pmul(&entry, &minor, p);
        acc = if t % 2 == 0 {
            fp::padd(&acc, &term, p)
        } else {
            fp::psub(&acc, &term, p)
        };
    }
    acc
}

/// |SL_n(F_p)| = p^{n(n-1)/2} prod_{k=2..n} (p^k - 1).
fn sl_order(n: usize, p: u64) -> Option<u128> {
    let mut ord: u128 = 1;
    for _ in 0..n * (n - 1) / 2 {
        ord = ord.checked_mul(p as u128)?;
    }
    for k in 2..=n as u32 {
        let pk = (p as u128).checked_pow(k)?;
        ord = ord.checked_mul(pk - 1)?;
    }
    Some(ord)
}

/// The elementary transvections I + c E_ij (i != j, c != 0), which generate
/// SL_n(F_p).
fn transvections(n: usize, p: u64) -> Vec<Vec<u64>> {
    let mut gens = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for c in 1..p {
                let mut g = fmat_id(n);
                g[i * n + j] = c;
                gens.push(g);
            }
        }
    }
    gens
}

/// Breadth-first orbit of a pair under congruence by the given generators.
/// `visit` sees each member once, in discovery order.
fn bfs_orbit(
    start: u128,
    n: usize,
    p: u64,
    gens: &[Vec<u64>],
    mut visit: impl FnMut(&[u64], &[u64]),
) -> HashSet<u128> {
    let mut seen: HashSet<u128> = HashSet::new();
    let mut queue: VecDeque<u128> = VecDeque::new();
    seen.insert(start);
    queue.push_back(start);
    while let Some(k) = queue.pop_front() {
        let (a, b) = decode_pair(k, n, p);
        visit(&a, &b);
        for g in gens {
            let a2 = congruence(g, &a, n, p);
            let b2 = congruence(g, &b, n, p);
            let k2 = encode_pair(&a2, &b2, n, p);
            if seen.insert(k2) {
                queue.push_back(k2);
            }
        }
    }
    seen
}

// ---------------------------------------------------------------------------
// The correspondence over F_p: delta classes and seed pairs
// ---------------------------------------------------------------------------

/// Mod-p side of the pair dictionary for a fixed form with invertible
/// leading coefficient: attaches to each pair in the fiber a rank-one matrix
/// of polynomials in F_p[t]/(g), extracts a representative of the unit
/// square class delta, and conversely builds a pair realizing a prescribed
/// class. Labels are canonical per (p, g).
struct FiberCtx {
    n: usize,
    p: u64,
    f: Vec<u64>,
    g: PolyP,
    eps_neg: bool,
    zt2: Vec<u64>,
    zt1: Vec<u64>,
    squares: std::cell::OnceCell<HashSet<PolyP>>,
}

impl FiberCtx {
    fn new(fred: &[u64], p: u64) -> Result<FiberCtx> {
        let n = fred.len() - 1;
        if fred[0] % p == 0 {
            return Err(BinicError::DegenerateInput(
                "leading coefficient vanishes mod p".into(),
            ));
        }
        let f: Vec<u64> = fred.iter().map(|&c| c % p).collect();
        let f0i = invm(f[0], p);
        // Monic dehomogenization g(t) = f(t,1)/f_0 of degree n.
        let g: PolyP = (0..=n).map(|j| mulm(f[n - j], f0i, p)).collect();
        // Mixed-basis vectors: slot j holds f_0 t^j + f_1 t^{j-1} + .. + f_j.
        let zt = |j: usize| -> Vec<u64> {
            let mut v = vec![0u64; n];
            for t in 0..=j {
                v[j - t] = f[t];
            }
            v
        };
        Ok(FiberCtx {
            n,
            p,
            zt2: zt(n - 2),
            zt1: zt(n - 1),
            f,
            g,
            eps_neg: ((n - 1) / 2) % 2 == 1,
            squares: std::cell::OnceCell::new(),
        })
    }

    fn ring_mul(&self, x: &PolyP, y: &PolyP) -> PolyP {
        fp::pmod(&fp::pmul(x, y, self.p), &self.g, self.p)
    }

    fn is_unit(&self, x: &PolyP) -> bool {
        fp::poly_inverse_mod(x, &self.g, self.p).is_some()
    }

    /// Norm to F_p: determinant of multiplication by x in the power basis.
    fn norm(&self, x: &PolyP) -> u64 {
        let n = self.n;
        let mut m = vec![0u64; n * n];
        for j in 0..n {
            let mut tj = vec![0u64; j + 1];
            tj[j] = 1;
            let col = self.ring_mul(x, &tj);
            for (i, &c) in col.iter().enumerate() {
                m[i * n + j] = c;
            }
        }
        fmat_det(&m, n, self.p)
    }

    /// Matrices C^(0)..C^(n-3) of the t^k coefficients shared by the whole
    /// fiber direction: C^(k) = (sum_{t=0}^{n-k-2} f_t M^{n-k-1-t}) A
    /// - f_{n-k-2} B with M = B A^{-1}. None when A is singular.
    fn coeff_mats(&self, a: &[u64], b: &[u64]) -> Option<Vec<Vec<u64>>> {
        let n = self.n;
        let p = self.p;
        let ai = fmat_inv(a, n, p)?;
        let m = fmat_mul(b, &ai, n, p);
        let mut pows = vec![fmat_id(n)];
        for _ in 0..n {
            pows.push(fmat_mul(pows.last().unwrap(), &m, n, p));
        }
        let mut out = Vec::with_capacity(n - 2);
        for k in 0..=n - 3 {
            let mut s = vec![0u64; n * n];
            for t in 0..=n - k - 2 {
                let ft = self.f[t];
                if ft == 0 {
                    continue;
                }
                let pw = &pows[n - k - 1 - t];
                for idx in 0..n * n {
                    s[idx] = addm(s[idx], mulm(ft, pw[idx], p), p);
                }
            }
            let mut c = fmat_mul(&s, a, n, p);
            let fb = self.f[n - k - 2];
            for idx in 0..n * n {
                c[idx] = subm(c[idx], mulm(fb, b[idx], p), p);
            }
            out.push(c);
        }
        Some(out)
    }

    /// The rank-one matrix of the pair: entries are polynomials of degree
    /// < n in t representing alpha_i alpha_j / delta.
    fn phi(&self, a: &[u64], b: &[u64]) -> Option<Vec<PolyP>> {
        let n = self.n;
        let p = self.p;
        let cs = self.coeff_mats(a, b)?;
        let mut out = vec![PolyP::new(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = vec![0u64; n];
                for (k, c) in cs.iter().enumerate() {
                    v[k] = c[i * n + j];
                }
                for t in 0..n {
                    v[t] = addm(v[t], mulm(b[i * n + j], self.zt2[t], p), p);
                    v[t] = addm(v[t], mulm(a[i * n + j], self.zt1[t], p), p);
                }
                if self.eps_neg {
                    for c in v.iter_mut() {
                        *c = (p - *c % p) % p;
                    }
                }
                fp::ptrim(&mut v);
                out[i * n + j] = v;
            }
        }
        Some(out)
    }

    /// A unit representative of the delta square class of the pair, from any
    /// column j whose entries form a basis and whose diagonal entry is a
    /// unit (then delta = Phi_jj up to a unit square). None when no column
    /// qualifies; some member of every orbit admits one.
    fn delta_rep(&self, a: &[u64], b: &[u64]) -> Option<PolyP> {
        let n = self.n;
        let phi = self.phi(a, b)?;
        for j in 0..n {
            let mut rows: Vec<Vec<u64>> = (0..n)
                .map(|i| {
                    let mut r = phi[i * n + j].clone();
                    r.resize(n, 0);
                    r
                })
                .collect();
            if fp::rref(&mut rows, self.p) < n {
                continue;
            }
            let d = &phi[j * n + j];
            if self.is_unit(d) {
                return Some(d.clone());
            }
        }
        None
    }

    fn enumerate_elements(&self) -> impl Iterator<Item = PolyP> + '_ {
        let n = self.n;
        let p = self.p;
        let total = (p as u128).pow(n as u32);
        (0..total).map(move |mut idx| {
            let mut v = vec![0u64; n];
            for c in v.iter_mut() {
                *c = (idx % p as u128) as u64;
                idx /= p as u128;
            }
            fp::ptrim(&mut v);
            v
        })
    }

    /// All unit squares of F_p[t]/(g), cached.
    fn squares(&self) -> Result<&HashSet<PolyP>> {
        if (self.p as u128).pow(self.n as u32) > ELEMENT_ENUM_LIMIT {
            return Err(BinicError::TooLarge(format!(
                "square-class table over {}^{} ring elements",
                self.p, self.n
            )));
        }
        Ok(self.squares.get_or_init(|| {
            let mut sq = HashSet::new();
            for v in self.enumerate_elements() {
                if self.is_unit(&v) {
                    sq.insert(self.ring_mul(&v, &v));
                }
            }
            sq
        }))
    }

    fn is_trivial_class(&self, d: &PolyP) -> Result<bool> {
        Ok(self.squares()?.contains(d))
    }

    /// Canonical label of the square class of the unit d: the
    /// lexicographically least coefficient vector in the coset d * squares.
    fn class_label(&self, d: &PolyP) -> Result<String> {
        let n = self.n;
        let mut best: Option<Vec<u64>> = None;
        for s in self.squares()? {
            let mut cand = self.ring_mul(d, s);
            cand.resize(n, 0);
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
        let mut v = best.expect("squares set contains 1");
        fp::ptrim(&mut v);
        Ok(poly_label(&v))
    }

    /// Representatives of every unit square class whose norm is a square in
    /// F_p, one per class, in lexicographic order of the class minimum.
    fn norm_square_class_reps(&self) -> Result<Vec<PolyP>> {
        let sq = self.squares()?.clone();
        let mut reps = Vec::new();
        let mut covered: HashSet<PolyP> = HashSet::new();
        for v in self.enumerate_elements() {
            if !self.is_unit(&v) || covered.contains(&v) {
                continue;
            }
            for s in &sq {
                covered.insert(self.ring_mul(&v, s));
            }
            let nv = self.norm(&v);
            let square_norm = self.p == 2 || powm(nv, (self.p - 1) / 2, self.p) == 1;
            if square_norm {
                reps.push(v);
            }
        }
        Ok(reps)
    }

    /// Rebuild the symmetric pair from a rank-one matrix: the top two
    /// t-coefficients of each entry determine it.
    fn pair_from_phi(&self, phi: &[PolyP]) -> (Vec<u64>, Vec<u64>) {
        let n = self.n;
        let p = self.p;
        let f0i = invm(self.f[0], p);
        let mut a = vec![0u64; n * n];
        let mut b = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                let e = &phi[i * n + j];
                let cn1 = e.get(n - 1).copied().unwrap_or(0);
                let cn2 = e.get(n - 2).copied().unwrap_or(0);
                let at = mulm(cn1, f0i, p);
                let bt = mulm(subm(cn2, mulm(self.f[1], at, p), p), f0i, p);
                let (mut av, mut bv) = (at, bt);
                if self.eps_neg {
                    av = (p - av) % p;
                    bv = (p - bv) % p;
                }
                a[i * n + j] = av;
                b[i * n + j] = bv;
            }
        }
        (a, b)
    }

    /// One pair per norm-square unit class, each in a distinct orbit of the
    /// fiber: the section pair realizes some class, and dividing its
    /// rank-one matrix by a unit u moves the class by u.
    fn seed_pairs(&self) -> Result<Vec<(Vec<u64>, Vec<u64>)>> {
        let n = self.n;
        let p = self.p;
        let lift = BinaryForm::new(self.f.iter().map(|&c| BigInt::from(c)).collect())?;
        let sp = section_e(&lift)?;
        let a0 = reduce_imat(sp.a(), n, p);
        let b0 = reduce_imat(sp.b(), n, p);
        debug_assert_eq!(resolvent_modp(&a0, &b0, n, p), self.f);
        let phi0 = self
            .phi(&a0, &b0)
            .expect("section has invertible A when f_0 is a unit");
        let mut out = Vec::new();
        for u in self.norm_square_class_reps()? {
            let ui = fp::poly_inverse_mod(&u, &self.g, p).expect("class rep is a unit");
            let psi: Vec<PolyP> = phi0.iter().map(|e| self.ring_mul(e, &ui)).collect();
            let (a1, b1) = self.pair_from_phi(&psi);
            assert_eq!(
                resolvent_modp(&a1, &b1, n, p),
                self.f,
                "twisted seed stays in the fiber"
            );
            out.push((a1, b1));
        }
        Ok(out)
    }
}

/// Human-readable polynomial in t with ascending terms.
fn poly_label(v: &[u64]) -> String {
    if v.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (i, &c) in v.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let term = match (i, c) {
            (0, _) => format!("{c}"),
            (1, 1) => "t".into(),
            (1, _) => format!("{c}t"),
            (_, 1) => format!("t^{i}"),
            (_, _) => format!("{c}t^{i}"),
        };
        parts.push(term);
    }
    parts.join("+")
}

// ---------------------------------------------------------------------------
// Orbit reports
// ---------------------------------------------------------------------------

/// One SL_n(F_p)-orbit of a fiber: its size, the order of the stabilizer of
/// any member, the canonical label of the attached unit square class, and
/// whether that class is trivial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitData {
    pub size: u64,
    pub stab: u64,
    pub label: String,
    pub trivial: bool,
}

/// Orbit decomposition of the fiber of the resolvent map over a form mod p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitReport {
    pub p: u64,
    pub n: usize,
    pub f: Vec<u64>,
    pub fiber_size: u64,
    pub orbits: Vec<OrbitData>,
    pub predicted: u64,
}

impl OrbitReport {
    /// One JSON record per report, with orbits as [size, stab, label]
    /// triples.
    pub fn json_line(&self) -> String {
        let orbits: Vec<serde_json::Value> = self
            .orbits
            .iter()
            .map(|o| serde_json::json!([o.size, o.stab, o.label]))
            .collect();
        serde_json::json!({
            "p": self.p,
            "f": self.f,
            "fiber": self.fiber_size,
            "orbits": orbits,
            "predicted": self.predicted,
        })
        .to_string()
    }
}

/// An SL_2(F_p) move [[a,b],[c,d]] whose first row (a, b) satisfies
/// f(a, b) != 0, so that the mixed pair (aA - bB, dB - cA) has a fiber form
/// with invertible leading coefficient. Fails only when f vanishes on all
/// of P^1(F_p), impossible for nonzero f of degree n <= p.
fn normalizing_sl2(fred: &[u64], p: u64) -> Result<[u64; 4]> {
    let n = fred.len() - 1;
    let eval = |x: u64, y: u64| -> u64 {
        let mut acc = 0u64;
        for (i, &c) in fred.iter().enumerate() {
            let xe = powm(x, (n - i) as u64, p);
            let ye = powm(y, i as u64, p);
            acc = addm(acc, mulm(c, mulm(xe, ye, p), p), p);
        }
        acc
    };
    if eval(1, 0) != 0 {
        return Ok([1, 0, 0, 1]);
    }
    for t in 0..p {
        if eval(1, t) != 0 {
            return Ok([1, t, 0, 1]);
        }
    }
    if eval(0, 1) != 0 {
        return Ok([0, 1, p - 1, 0]);
    }
    Err(BinicError::DegenerateInput(
        "form vanishes on all of P^1(F_p)".into(),
    ))
}

/// f((x,y)g) for g = [[a,b],[c,d]] over F_p.
fn form_act_modp(fred: &[u64], g: &[u64; 4], p: u64) -> Vec<u64> {
    let n = fred.len() - 1;
    let mut out = vec![0u64; n + 1];
    for (i, &fi) in fred.iter().enumerate() {
        if fi == 0 {
            continue;
        }
        // f_i (a x + c y)^{n-i} (b x + d y)^i, coefficients by y-degree.
        let mut t = vec![1u64];
        for _ in 0..n - i {
            t = lin_mul(&t, g[0], g[2], p);
        }
        for _ in 0..i {
            t = lin_mul(&t, g[1], g[3], p);
        }
        for (k, &c) in t.iter().enumerate() {
            out[k] = addm(out[k], mulm(fi, c, p), p);
        }
    }
    out
}

fn lin_mul(t: &[u64], u: u64, v: u64, p: u64) -> Vec<u64> {
    let mut out = vec![0u64; t.len() + 1];
    for (j, &c) in t.iter().enumerate() {
        out[j] = addm(out[j], mulm(c, u, p), p);
        out[j + 1] = addm(out[j + 1], mulm(c, v, p), p);
    }
    out
}

fn mix_pair(a: &[u64], b: &[u64], g: &[u64; 4], n: usize, p: u64) -> (Vec<u64>, Vec<u64>) {
    // (A, B) -> (aA - bB, dB - cA), matching the integral action.
    let mut na = vec![0u64; n * n];
    let mut nb = vec![0u64; n * n];
    for i in 0..n * n {
        na[i] = subm(mulm(g[0], a[i], p), mulm(g[1], b[i], p), p);
        nb[i] = subm(mulm(g[3], b[i], p), mulm(g[2], a[i], p), p);
    }
    (na, nb)
}

/// Labeling context for a fiber, mixing by an SL_2 move first when the
/// leading coefficient vanishes mod p.
struct Labeler {
    ctx: FiberCtx,
    gamma: [u64; 4],
    n: usize,
    p: u64,
}

impl Labeler {
    fn new(fred: &[u64], p: u64) -> Result<Labeler> {
        let n = fred.len() - 1;
        let gamma = normalizing_sl2(fred, p)?;
        let fmix = form_act_modp(fred, &gamma, p);
        assert!(fmix[0] % p != 0, "normalized leading coefficient is a unit");
        Ok(Labeler {
            ctx: FiberCtx::new(&fmix, p)?,
            gamma,
            n,
            p,
        })
    }

    fn delta_rep(&self, a: &[u64], b: &[u64]) -> Option<PolyP> {
        let (ma, mb) = mix_pair(a, b, &self.gamma, self.n, self.p);
        debug_assert_eq!(
            resolvent_modp(&ma, &mb, self.n, self.p),
            form_act_modp(
                &resolvent_modp(a, b, self.n, self.p),
                &self.gamma,
                self.p
            ),
            "pair mixing matches the form action"
        );
        self.ctx.delta_rep(&ma, &mb)
    }
}

/// The SL_n(F_p)-orbit decomposition of the fiber of the resolvent map over
/// f mod p, with per-orbit stabilizer orders (by orbit-stabilizer) and
/// canonical delta-class labels. Small fibers are enumerated exhaustively;
/// otherwise the orbits are grown from one seed per predicted class, and the
/// class count certifies completeness. Asserts that the enumeration matches
/// the predicted orbit and stabilizer counts.
pub fn brute_orbits(f: &BinaryForm, p: u64) -> Result<OrbitReport> {
    let n = f.degree();
    if n < 3 || n % 2 == 0 {
        return Err(BinicError::DegenerateInput(format!(
            "orbit census needs odd degree >= 3, got {n}"
        )));
    }
    let fred = reduce_form(f, p);
    let ft = factor_type_reduced(&fred, p)?;
    if !ft.separable {
        return Err(BinicError::InseparableType);
    }
    let predicted = predicted_orbit_count(&ft)?;
    let pred_stab = predicted_stab(&ft)?;
    let slorder = sl_order(n, p).ok_or_else(|| {
        BinicError::TooLarge(format!("|SL_{n}(F_{p})| overflows"))
    })?;
    let keyspace = (p as u128).checked_pow(2 * tri_len(n) as u32);
    let gens = transvections(n, p);
    // Construction fails only when f vanishes on all of P^1(F_p), which
    // needs n > p; the unit group of the split algebra is then trivial and
    // so is its single square class.
    let labeler = Labeler::new(&fred, p).ok();
    if labeler.is_none() {
        assert!(p == 2 && predicted == 1, "labeler exists whenever p >= n");
    }

    let mut orbits: Vec<OrbitData> = Vec::new();
    let fiber_size: u64;

    if keyspace.is_some_and(|k| k <= EXHAUSTIVE_KEY_LIMIT) {
        let keyspace = keyspace.unwrap();
        let mut members: Vec<u128> = Vec::new();
        for key in 0..keyspace {
            let (a, b) = decode_pair(key, n, p);
            if resolvent_modp(&a, &b, n, p) == fred {
                members.push(key);
            }
        }
        fiber_size = members.len() as u64;
        let member_set: HashSet<u128> = members.iter().copied().collect();
        let mut claimed: HashSet<u128> = HashSet::new();
        for &key in &members {
            if claimed.contains(&key) {
                continue;
            }
            let mut rep: Option<PolyP> = None;
            let orbit = bfs_orbit(key, n, p, &gens, |a, b| {
                if rep.is_none() {
                    if let Some(l) = &labeler {
                        rep = l.delta_rep(a, b);
                    }
                }
            });
            assert!(
                orbit.is_subset(&member_set),
                "orbits stay inside the fiber"
            );
            claimed.extend(&orbit);
            orbits.push(finish_orbit(
                orbit.len() as u64,
                slorder,
                rep,
                labeler.as_ref(),
            )?);
        }
        assert_eq!(claimed.len() as u64, fiber_size, "orbits cover the fiber");
    } else if slorder <= SEEDED_SL_LIMIT {
        let seeds: Vec<(Vec<u64>, Vec<u64>)> = match labeler.as_ref() {
            Some(l) => {
                // The labeler context lives over the mixed form; pull seeds
                // back to the requested fiber through the inverse SL_2 move.
                let [ga, gb, gc, gd] = l.gamma;
                let ginv = [gd, (p - gb % p) % p, (p - gc % p) % p, ga];
                l.ctx
                    .seed_pairs()?
                    .into_iter()
                    .map(|(a, b)| mix_pair(&a, &b, &ginv, n, p))
                    .collect()
            }
            None => {
                // Single predicted class: the reduced section pair of an
                // integral lift seeds the one orbit.
                let lift =
                    BinaryForm::new(fred.iter().map(|&c| BigInt::from(c)).collect())?;
                let sp = section_e(&lift)?;
                vec![(reduce_imat(sp.a(), n, p), reduce_imat(sp.b(), n, p))]
            }
        };
        let mut claimed: HashSet<u128> = HashSet::new();
        for (a0, b0) in seeds {
            assert_eq!(
                resolvent_modp(&a0, &b0, n, p),
                fred,
                "seed lies in the requested fiber"
            );
            let key = encode_pair(&a0, &b0, n, p);
            assert!(
                !claimed.contains(&key),
                "seeds in distinct classes lie in distinct orbits"
            );
            let mut rep: Option<PolyP> = None;
            let orbit = bfs_orbit(key, n, p, &gens, |a, b| {
                if rep.is_none() {
                    if let Some(l) = &labeler {
                        rep = l.delta_rep(a, b);
                    }
                }
            });
            claimed.extend(&orbit);
            orbits.push(finish_orbit(
                orbit.len() as u64,
                slorder,
                rep,
                labeler.as_ref(),
            )?);
        }
        fiber_size = claimed.len() as u64;
    } else {
        return Err(BinicError::TooLarge(format!(
            "fiber over p = {p}, n = {n} exceeds both enumeration strategies"
        )));
    }

    assert_eq!(
        orbits.len() as u64,
        predicted,
        "orbit count matches the unit-class prediction"
    );
    for o in &orbits {
        assert_eq!(o.stab, pred_stab, "stabilizer matches the torsion prediction");
    }
    let mut labels: Vec<&str> = orbits.iter().map(|o| o.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    assert_eq!(
        labels.len(),
        orbits.len(),
        "class labels separate the orbits"
    );
    assert_eq!(
        orbits.iter().filter(|o| o.trivial).count(),
        1,
        "exactly one orbit carries the trivial class"
    );
    orbits.sort_by(|x, y| (x.size, &x.label).cmp(&(y.size, &y.label)));
    Ok(OrbitReport {
        p,
        n,
        f: fred,
        fiber_size,
        orbits,
        predicted,
    })
}

fn finish_orbit(
    size: u64,
    slorder: u128,
    rep: Option<PolyP>,
    labeler: Option<&Labeler>,
) -> Result<OrbitData> {
    assert_eq!(
        slorder % size as u128,
        0,
        "orbit size divides the group order"
    );
    let stab = (slorder / size as u128)
        .to_u64()
        .expect("stabilizer order fits in u64");
    let (label, trivial) = match labeler {
        Some(l) => {
            let rep = rep.expect("every orbit has a member with a unit diagonal entry");
            (l.ctx.class_label(&rep)?, l.ctx.is_trivial_class(&rep)?)
        }
        // Trivial unit group mod 2: the only square class is the unit one.
        None => ("1".into(), true),
    };
    Ok(OrbitData {
        size,
        stab,
        trivial,
        label,
    })
}

// ---------------------------------------------------------------------------
// Full-space stratum census
// ---------------------------------------------------------------------------

/// Exhaustive stratum counts over all of V(F_p) = pairs of symmetric n x n
/// matrices: for each k, the pairs whose resolvent is an irreducible degree-k
/// factor times n - k distinct linear factors; the pairs certified to have no
/// reducible integral lift (no common isotropic subspace of linear dimension
/// (n-1)/2 over F_p, a property preserved by reduction); and the pairs with
/// trivial stabilizer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrataCensus {
    pub p: u64,
    pub n: usize,
    pub total: u64,
    /// (k, count) for k = 2..=n.
    pub eq_k: Vec<(usize, u64)>,
    pub irr_certified: u64,
    pub nostab: u64,
    pub fiber_count: u64,
    pub separable_fibers: u64,
    pub orbit_count: u64,
}

impl StrataCensus {
    /// The fractions #V^{=k} / #V.
    pub fn eq_k_ratios(&self) -> Vec<(usize, BigRational)> {
        self.eq_k
            .iter()
            .map(|&(k, c)| {
                (
                    k,
                    BigRational::new(BigInt::from(c), BigInt::from(self.total)),
                )
            })
            .collect()
    }
}

struct FiberOutcome {
    size: u64,
    eq_k: Option<usize>,
    separable: bool,
    orbit_sizes: Vec<u64>,
    nostab: u64,
    isofree: u64,
}

/// Census over all pairs mod p. Parallelizes over fibers with a
/// deterministic merge; asserts the predicted orbit and stabilizer counts on
/// every separable fiber, and that isotropic-freeness agrees with
/// nontriviality of the delta class there.
pub fn strata_census(p: u64, n: usize, jobs: usize) -> Result<StrataCensus> {
    if n < 3 || n % 2 == 0 {
        return Err(BinicError::DegenerateInput(format!(
            "census needs odd degree >= 3, got {n}"
        )));
    }
    let keyspace = (p as u128)
        .checked_pow(2 * tri_len(n) as u32)
        .filter(|&k| k <= EXHAUSTIVE_KEY_LIMIT)
        .ok_or_else(|| {
            BinicError::TooLarge(format!(
                "census keyspace {p}^{} exceeds the enumeration bound",
                2 * tri_len(n)
            ))
        })? as usize;
    let slorder = sl_order(n, p).expect("group order fits under the keyspace guard");

    // Phase 1: bucket every pair by its resolvent, coded in base p.
    let code_of = |key: usize| -> u64 {
        let (a, b) = decode_pair(key as u128, n, p);
        resolvent_modp(&a, &b, n, p)
            .iter()
            .fold(0u64, |acc, &c| acc * p + c)
    };
    let jobs = jobs.max(1).min(keyspace);
    let codes: Vec<u64> = if jobs == 1 {
        (0..keyspace).map(code_of).collect()
    } else {
        let chunk = keyspace.div_ceil(jobs);
        let mut out = vec![0u64; keyspace];
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for (t, piece) in out.chunks_mut(chunk).enumerate() {
                handles.push(scope.spawn(move || {
                    for (i, slot) in piece.iter_mut().enumerate() {
                        *slot = code_of(t * chunk + i);
                    }
                }));
            }
            for h in handles {
                h.join().expect("census worker");
            }
        });
        out
    };
    let mut fibers: HashMap<u64, Vec<u32>> = HashMap::new();
    for (key, &code) in codes.iter().enumerate() {
        fibers.entry(code).or_default().push(key as u32);
    }
    let mut fiber_list: Vec<(u64, Vec<u32>)> = fibers.into_iter().collect();
    fiber_list.sort_unstable_by_key(|&(code, _)| code);

    // Phase 2: orbit decomposition, stratum classification, and per-fiber
    // assertions; fibers are independent.
    let decode_code = |mut code: u64| -> Vec<u64> {
        let mut f = vec![0u64; n + 1];
        for c in f.iter_mut().rev() {
            *c = code % p;
            code /= p;
        }
        f
    };
    let gens = transvections(n, p);
    let process = |code: u64, keys: &[u32]| -> Result<FiberOutcome> {
        let fred = decode_code(code);
        let ft = factor_type_reduced(&fred, p).ok();
        let separable = ft.as_ref().is_some_and(|t| t.separable);
        // Missing labeler on a separable fiber means f vanishes on all of
        // P^1(F_p); the class group is then trivial (p < n forces p = 2).
        let labeler = if separable {
            Labeler::new(&fred, p).ok()
        } else {
            None
        };
        let member_set: HashSet<u128> = keys.iter().map(|&k| k as u128).collect();
        let mut claimed: HashSet<u128> = HashSet::new();
        let mut orbit_sizes = Vec::new();
        let mut nostab = 0u64;
        let mut isofree = 0u64;
        let mut stabs = Vec::new();
        let mut trivials = Vec::new();
        for &key in keys {
            if claimed.contains(&(key as u128)) {
                continue;
            }
            let mut rep: Option<PolyP> = None;
            let orbit = bfs_orbit(key as u128, n, p, &gens, |a, b| {
                if rep.is_none() {
                    if let Some(l) = &labeler {
                        rep = l.delta_rep(a, b);
                    }
                }
            });
            assert!(orbit.is_subset(&member_set), "orbits stay inside fibers");
            let size = orbit.len() as u64;
            if size as u128 == slorder {
                nostab += size;
            }
            let (a0, b0) = decode_pair(key as u128, n, p);
            let iso = has_isotropic_modp(&a0, &b0, n, p)?;
            if !iso {
                isofree += size;
            }
            if separable {
                assert_eq!(slorder % size as u128, 0);
                stabs.push((slorder / size as u128) as u64);
                let trivial = match &labeler {
                    Some(l) => {
                        let rep = rep.expect("separable orbits admit a class extraction");
                        l.ctx.is_trivial_class(&rep)?
                    }
                    None => true,
                };
                assert_eq!(
                    trivial, iso,
                    "trivial delta class exactly when an isotropic subspace exists"
                );
                trivials.push(trivial);
            }
            claimed.extend(&orbit);
            orbit_sizes.push(size);
        }
        if let Some(ft) = ft.as_ref().filter(|t| t.separable) {
            let predicted = predicted_orbit_count(ft)?;
            let pstab = predicted_stab(ft)?;
            assert_eq!(
                orbit_sizes.len() as u64,
                predicted,
                "fiber {fred:?}: orbit count matches the prediction"
            );
            assert!(
                stabs.iter().all(|&s| s == pstab),
                "fiber {fred:?}: stabilizers match the prediction"
            );
            assert_eq!(
                trivials.iter().filter(|&&t| t).count(),
                1,
                "fiber {fred:?}: exactly one trivial-class orbit"
            );
        }
        Ok(FiberOutcome {
            size: keys.len() as u64,
            eq_k: ft.as_ref().and_then(|t| t.almost_split_degree()),
            separable,
            orbit_sizes,
            nostab,
            isofree,
        })
    };
    let outcomes: Vec<FiberOutcome> = if jobs == 1 {
        fiber_list
            .iter()
            .map(|(code, keys)| process(*code, keys))
            .collect::<Result<_>>()?
    } else {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for chunk in fiber_list.chunks(fiber_list.len().div_ceil(jobs)) {
                handles.push(scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|(code, keys)| process(*code, keys))
                        .collect::<Result<Vec<_>>>()
                }));
            }
            let mut all = Vec::new();
            for h in handles {
                all.extend(h.join().expect("census worker")?);
            }
            Ok::<_, BinicError>(all)
        })?
    };

    let mut eq_k: Vec<(usize, u64)> = (2..=n).map(|k| (k, 0u64)).collect();
    let mut irr_certified = 0u64;
    let mut nostab = 0u64;
    let mut separable_fibers = 0u64;
    let mut orbit_count = 0u64;
    for o in &outcomes {
        if let Some(k) = o.eq_k {
            eq_k[k - 2].1 += o.size;
        }
        irr_certified += o.isofree;
        nostab += o.nostab;
        separable_fibers += o.separable as u64;
        orbit_count += o.orbit_sizes.len() as u64;
    }
    Ok(StrataCensus {
        p,
        n,
        total: keyspace as u64,
        eq_k,
        irr_certified,
        nostab,
        fiber_count: fiber_list.len() as u64,
        separable_fibers,
        orbit_count,
    })
}

// ---------------------------------------------------------------------------
// Isotropic subspace search
// ---------------------------------------------------------------------------

/// Brute-force search for a subspace of F_q^n of linear dimension (n-1)/2 on
/// which both quadratic forms x^T A x and x^T B x vanish identically. A pair
/// with a rational block-zero reduction always has one; a pair without one
/// mod q has no reducible integral representative in its class.
pub fn isotropic_search_modp(pair: &SymPair, q: u64) -> Result<bool> {
    let n = pair.n();
    has_isotropic_modp(
        &reduce_imat(pair.a(), n, q),
        &reduce_imat(pair.b(), n, q),
        n,
        q,
    )
}

fn has_isotropic_modp(a: &[u64], b: &[u64], n: usize, q: u64) -> Result<bool> {
    let d = (n - 1) / 2;
    if d == 0 {
        return Ok(true);
    }
    // Subspaces in reduced row echelon form: choose pivot columns, then fill
    // the free entries (to the right of each pivot, off the pivot columns).
    let combos = combinations(n, d);
    let qd = (q as u128).pow(d as u32);
    let mut scan: u128 = 0;
    for combo in &combos {
        let free = free_positions(combo, n);
        scan = scan
            .checked_add(
                (q as u128)
                    .checked_pow(free.len() as u32)
                    .ok_or_else(|| BinicError::TooLarge("subspace scan".into()))?
                    .checked_mul(qd)
                    .ok_or_else(|| BinicError::TooLarge("subspace scan".into()))?,
            )
            .ok_or_else(|| BinicError::TooLarge("subspace scan".into()))?;
    }
    if scan > ISOTROPIC_SCAN_LIMIT {
        return Err(BinicError::TooLarge(format!(
            "isotropic scan of {scan} evaluations"
        )));
    }
    let qform = |m: &[u64], v: &[u64]| -> u64 {
        let mut acc = 0u64;
        for i in 0..n {
            if v[i] == 0 {
                continue;
            }
            for j in 0..n {
                acc = addm(acc, mulm(v[i], mulm(m[i * n + j], v[j], q), q), q);
            }
        }
        acc
    };
    for combo in &combos {
        let free = free_positions(combo, n);
        let total = (q as u64).pow(free.len() as u32);
        for fill in 0..total {
            // Basis rows of the candidate subspace.
            let mut rows = vec![vec![0u64; n]; d];
            for (r, &pc) in combo.iter().enumerate() {
                rows[r][pc] = 1;
            }
            let mut rem = fill;
            for &(r, c) in &free {
                rows[r][c] = rem % q;
                rem /= q;
            }
            // Evaluate both quadratic forms on every nonzero combination of
            // the basis rows; vanishing on all points is characteristic-safe.
            let mut ok = true;
            'pts: for coef in 1..qd as u64 {
                let mut v = vec![0u64; n];
                let mut rem = coef;
                for row in rows.iter() {
                    let c = rem % q;
                    rem /= q;
                    if c != 0 {
                        for (vi, &ri) in v.iter_mut().zip(row.iter()) {
                            *vi = addm(*vi, mulm(c, ri, q), q);
                        }
                    }
                }
                if qform(a, &v) != 0 || qform(b, &v) != 0 {
                    ok = false;
                    break 'pts;
                }
            }
            if ok {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn combinations(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            cur.push(c);
            rec(c + 1, n, d, cur, out);
            cur.pop();
        }
    }
    rec(0, n, d, &mut cur, &mut out);
    out
}

/// Positions (row, col) that are free in an RREF basis with the given pivot
/// columns: to the right of the row's pivot and not above a later pivot.
fn free_positions(pivots: &[usize], n: usize) -> Vec<(usize, usize)> {
    let pivot_set: HashSet<usize> = pivots.iter().copied().collect();
    let mut out = Vec::new();
    for (r, &pc) in pivots.iter().enumerate() {
        for c in pc + 1..n {
            if !pivot_set.contains(&c) {
                out.push((r, c));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Local masses
// ---------------------------------------------------------------------------

/// A place of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Finite(u64),
    Infinite,
}

/// The unit-group mass at a place: the number of norm-square unit square
/// classes divided by the number of norm-one 2-torsion units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalMass {
    pub place: Place,
    pub value: BigRational,
}

/// Truncation R_f / p^k in the zeta basis, with multiplication from the
/// integral structure-constant table.
struct TruncRing {
    n: usize,
    p: u64,
    m: u64,
    table: Vec<u64>,
}

impl TruncRing {
    fn new(ring: &RankNRing, p: u64, k: u32) -> Result<TruncRing> {
        let n = ring.degree();
        let m = (p as u128)
            .checked_pow(k)
            .filter(|&m| m <= 1 << 31)
            .ok_or_else(|| BinicError::TooLarge(format!("modulus {p}^{k}")))?
            as u64;
        let big_m = BigInt::from(m);
        let mut table = vec![0u64; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    table[(i * n + j) * n + l] = ring
                        .table_entry(i, j, l)
                        .mod_floor(&big_m)
                        .to_u64()
                        .expect("reduced entry fits");
                }
            }
        }
        Ok(TruncRing { n, p, m, table })
    }

    fn one(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.n];
        v[0] = 1;
        v
    }

    fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| subm(x, y, self.m))
            .collect()
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let n = self.n;
        let mut out = vec![0u64; n];
        for i in 0..n {
            if a[i] == 0 {
                continue;
            }
            for j in 0..n {
                if b[j] == 0 {
                    continue;
                }
                let c = mulm(a[i], b[j], self.m);
                for l in 0..n {
                    let t = self.table[(i * n + j) * n + l];
                    if t != 0 {
                        out[l] = addm(out[l], mulm(c, t, self.m), self.m);
                    }
                }
            }
        }
        out
    }

    /// Matrix of multiplication by e, columns indexed by basis vectors.
    fn mult_matrix(&self, e: &[u64]) -> Vec<u64> {
        let n = self.n;
        let mut m = vec![0u64; n * n];
        for j in 0..n {
            let mut basis = vec![0u64; n];
            basis[j] = 1;
            let col = self.mul(e, &basis);
            for i in 0..n {
                m[i * n + j] = col[i];
            }
        }
        m
    }

    fn is_unit(&self, e: &[u64]) -> bool {
        let red: Vec<u64> = self.mult_matrix(e).iter().map(|&x| x % self.p).collect();
        fmat_det(&red, self.n, self.p) != 0
    }

    /// Determinant of multiplication by a unit, mod p^k; elimination always
    /// finds unit pivots because the matrix is invertible mod p.
    fn norm(&self, e: &[u64]) -> u64 {
        let n = self.n;
        let m = self.m;
        let p = self.p;
        let mut w = self.mult_matrix(e);
        let mut det = 1u64;
        for c in 0..n {
            let piv = (c..n)
                .find(|&r| w[r * n + c] % p != 0)
                .expect("unit multiplication matrix has unit pivots");
            if piv != c {
                for j in 0..n {
                    w.swap(c * n + j, piv * n + j);
                }
                det = subm(0, det, m);
            }
            det = mulm(det, w[c * n + c], m);
            let inv = inv_mod_pk(w[c * n + c], p, m);
            for r in c + 1..n {
                if w[r * n + c] != 0 {
                    let f = mulm(w[r * n + c], inv, m);
                    for j in c..n {
                        let s = mulm(f, w[c * n + j], m);
                        w[r * n + j] = subm(w[r * n + j], s, m);
                    }
                }
            }
        }
        det
    }
}

/// Inverse of a unit mod p^k by Euler's theorem.
fn inv_mod_pk(a: u64, p: u64, m: u64) -> u64 {
    assert!(a % p != 0, "inverse of a nonunit mod {m}");
    if m == p {
        return invm(a, p);
    }
    let phi = m / p * (p - 1);
    powm(a, phi - 1, m)
}

/// The local mass m_p(f) = |(R^x/(R^x)^2)_{norm a square}| /
/// |R^x[2]_{norm = 1}| over the truncation (R_f tensor Z/p^k)^x. For odd p
/// the answer is determined by the reduction mod p (units congruent to 1 mod
/// p are squares); for p = 2 square classes are decided mod 8 and the result
/// is compared across precisions k and k+1, erroring on disagreement.
pub fn local_mass(f: &BinaryForm, p: u64, precision: u32) -> Result<LocalMass> {
    let ring = RankNRing::build(f)?;
    if ring.disc().is_zero() {
        return Err(BinicError::DegenerateForm);
    }
    let k = precision;
    if k < 3 {
        return Err(BinicError::PrecisionTooLow(format!(
            "local mass needs precision >= 3, got {k}"
        )));
    }
    // The truncation window must see past the discriminant valuation.
    let pk = BigInt::from(p).pow(k);
    if ring.disc().mod_floor(&pk).is_zero() {
        return Err(BinicError::PrecisionTooLow(format!(
            "discriminant valuation at {p} reaches the precision {k}"
        )));
    }
    let value = if p == 2 {
        let v1 = mass2_at(&ring, k)?;
        let v2 = mass2_at(&ring, k + 1)?;
        if v1 != v2 {
            return Err(BinicError::PrecisionTooLow(format!(
                "mass at 2 unstable between precisions {k} and {}",
                k + 1
            )));
        }
        v1
    } else {
        mass_odd(&ring, p)?
    };
    Ok(LocalMass {
        place: Place::Finite(p),
        value,
    })
}

/// Mass at p = 2 on the truncation mod 2^k.
fn mass2_at(ring: &RankNRing, k: u32) -> Result<BigRational> {
    let n = ring.degree();
    if n > 8 {
        return Err(BinicError::TooLarge(format!(
            "rank {n} unit enumeration at 2"
        )));
    }
    let tr = TruncRing::new(ring, 2, k)?;
    let tr8 = TruncRing::new(ring, 2, 3)?;
    // Squares are decided mod 8: a unit congruent to a square mod 8 lifts to
    // a square by successive halving of the correction term.
    let mut sq8: HashSet<Vec<u64>> = HashSet::new();
    for idx in 0..(1u64 << (3 * n)) {
        let v: Vec<u64> = (0..n).map(|i| idx >> (3 * i) & 7).collect();
        if tr8.is_unit(&v) {
            sq8.insert(tr8.mul(&v, &v));
        }
    }
    let is_square = |e: &[u64]| -> bool {
        let r: Vec<u64> = e.iter().map(|&c| c % 8).collect();
        sq8.contains(&r)
    };
    // Generators of the unit group of the truncation: lifts of the units of
    // R/2, then the principal units 1 + 2^a e_i level by level.
    let mut gens: Vec<Vec<u64>> = Vec::new();
    for idx in 0..(1u64 << n) {
        let v: Vec<u64> = (0..n).map(|i| idx >> i & 1).collect();
        if tr.is_unit(&v) {
            gens.push(v);
        }
    }
    for a in 1..k {
        for i in 0..n {
            let mut v = tr.one();
            v[i] = addm(v[i], 1 << a, tr.m);
            gens.push(v);
        }
    }
    // Greedy basis of the square-class group.
    let mut reps: Vec<Vec<u64>> = Vec::new();
    'next: for g in gens {
        for mask in 0..(1u64 << reps.len()) {
            let mut prod = g.clone();
            for (i, r) in reps.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    prod = tr.mul(&prod, r);
                }
            }
            if is_square(&prod) {
                continue 'next;
            }
        }
        reps.push(g);
        assert!(reps.len() <= 2 * n + 2, "square-class rank bound");
    }
    let t = reps.len() as u32;
    // Norm classes live in (Z/8)^x = {1,3,5,7} ~ F_2^2; the norm-square
    // classes are the kernel of the induced map, of index 2^rank.
    let phi8 = |x: u64| -> (u64, u64) {
        match x % 8 {
            1 => (0, 0),
            3 => (1, 0),
            5 => (0, 1),
            7 => (1, 1),
            _ => unreachable!("odd unit mod 8"),
        }
    };
    let mut span: HashSet<(u64, u64)> = HashSet::from([(0, 0)]);
    for r in &reps {
        let v = phi8(tr.norm(r));
        if !span.contains(&v) {
            let cur: Vec<(u64, u64)> = span.iter().copied().collect();
            for s in cur {
                span.insert((s.0 ^ v.0, s.1 ^ v.1));
            }
        }
    }
    let rank = span.len().trailing_zeros();
    let numerator = BigInt::one() << (t - rank);
    // 2-torsion: grow the solutions of z^2 = 1 level by level mod 2^{k+1};
    // their reductions mod 2^k are exactly the images of the true torsion
    // units, which stay distinct there.
    let trk1 = TruncRing::new(ring, 2, k + 1)?;
    let mut sols: Vec<Vec<u64>> = Vec::new();
    let one_mod2: Vec<u64> = trk1.one().iter().map(|&c| c % 2).collect();
    for idx in 0..(1u64 << n) {
        let v: Vec<u64> = (0..n).map(|i| idx >> i & 1).collect();
        let sq: Vec<u64> = trk1.mul(&v, &v).iter().map(|&c| c % 2).collect();
        if sq == one_mod2 && trk1.is_unit(&v) {
            sols.push(v);
        }
    }
    for a in 1..=k {
        let modulus = 1u64 << (a + 1);
        let mut next = Vec::new();
        for z in &sols {
            let diff = trk1.sub(&trk1.mul(z, z), &trk1.one());
            if diff.iter().all(|&c| c % modulus == 0) {
                for w in 0..(1u64 << n) {
                    let mut z2 = z.clone();
                    for (i, c) in z2.iter_mut().enumerate() {
                        *c += (w >> i & 1) << a;
                    }
                    next.push(z2);
                }
            }
        }
        sols = next;
        if sols.len() > 1 << 20 {
            return Err(BinicError::TooLarge(format!(
                "torsion candidate ladder at level {a} holds {} elements",
                sols.len()
            )));
        }
    }
    let mut torsion: HashSet<Vec<u64>> = HashSet::new();
    for z in &sols {
        let red: Vec<u64> = z.iter().map(|&c| c % tr.m).collect();
        if tr.norm(&red) == 1 {
            torsion.insert(red);
        }
    }
    let denominator = BigInt::from(torsion.len());
    Ok(BigRational::new(numerator, denominator))
}

/// Mass at an odd prime from the reduction mod p: units congruent to 1 mod
/// p are squares, so square classes and torsion are decided in R_f/p.
fn mass_odd(ring: &RankNRing, p: u64) -> Result<BigRational> {
    let n = ring.degree();
    let total = (p as u128).pow(n as u32);
    if total > ELEMENT_ENUM_LIMIT {
        return Err(BinicError::TooLarge(format!(
            "unit enumeration over {p}^{n} residues"
        )));
    }
    let tr = TruncRing::new(ring, p, 1)?;
    let mut squares: HashSet<Vec<u64>> = HashSet::new();
    let mut units = 0u64;
    let mut norm_square_units = 0u64;
    let mut torsion = 0u64;
    let one = tr.one();
    for idx in 0..total {
        let mut v = vec![0u64; n];
        let mut rem = idx;
        for c in v.iter_mut() {
            *c = (rem % p as u128) as u64;
            rem /= p as u128;
        }
        if !tr.is_unit(&v) {
            continue;
        }
        units += 1;
        let sq = tr.mul(&v, &v);
        let nv = tr.norm(&v);
        if powm(nv, (p - 1) / 2, p) == 1 {
            norm_square_units += 1;
        }
        if sq == one && nv == 1 {
            torsion += 1;
        }
        squares.insert(sq);
    }
    let class_size = squares.len() as u64;
    assert_eq!(
        units % class_size,
        0,
        "square classes partition the units evenly"
    );
    assert_eq!(
        norm_square_units % class_size,
        0,
        "norm-square condition is constant on square classes"
    );
    Ok(BigRational::new(
        BigInt::from(norm_square_units / class_size),
        BigInt::from(torsion),
    ))
}

/// Number of real orbit classes tau = 2^{r1-1} for signature (r1, r2) with
/// r1 + 2 r2 = n.
pub fn tau(n: usize, r2: usize) -> Result<u64> {
    let (orbit, _) = signature_counts(n, r2)?;
    Ok(orbit)
}

/// Real stabilizer order sigma = 2^{r1+r2-1} for signature (r1, r2).
pub fn sigma(n: usize, r2: usize) -> Result<u64> {
    let (_, stab) = signature_counts(n, r2)?;
    Ok(stab)
}

fn signature_counts(n: usize, r2: usize) -> Result<(u64, u64)> {
    if 2 * r2 >= n {
        return Err(BinicError::DegenerateInput(format!(
            "signature r2 = {r2} impossible for degree {n}"
        )));
    }
    archimedean_counts(n - 2 * r2, r2)
}

/// The archimedean mass tau / sigma = 2^{-r2}.
pub fn mass_infinity(n: usize, r2: usize) -> Result<LocalMass> {
    let (orbit, stab) = signature_counts(n, r2)?;
    Ok(LocalMass {
        place: Place::Infinite,
        value: BigRational::new(BigInt::from(orbit), BigInt::from(stab)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::BinaryForm;
    use num_bigint::BigUint;

    fn form(coeffs: &[i64]) -> BinaryForm {
        BinaryForm::from_i64(coeffs).unwrap()
    }

    #[test]
    fn factor_type_split_cubic_mod_7() {
        // x^3 - y^3 has the three roots 1, 2, 4 of x^3 = 1 mod 7.
        let ft = factor_type(&form(&[1, 0, 0, -1]), 7).unwrap();
        assert_eq!(ft.factors, vec![(1, 1), (1, 1), (1, 1)]);
        assert!(ft.separable);
    }

    #[test]
    fn factor_type_irreducible_mod_2() {
        let ft = factor_type(&form(&[1, 0, -1, -1]), 2).unwrap();
        assert_eq!(ft.factors, vec![(3, 1)]);
        assert!(ft.separable);
    }

    #[test]
    fn factor_type_detects_repeated_factors() {
        // x^3 + x^2 y = x^2 (x + y).
        let ft = factor_type(&form(&[1, 1, 0, 0]), 2).unwrap();
        assert_eq!(ft.factors, vec![(1, 1), (1, 2)]);
        assert!(!ft.separable);
    }

    #[test]
    fn factor_type_counts_the_y_factor() {
        // x y^2 + y^3 = y^2 (x + y).
        let ft = factor_type(&form(&[0, 0, 1, 1]), 5).unwrap();
        assert_eq!(ft.factors, vec![(1, 1), (1, 2)]);
        assert!(!ft.separable);
    }

    #[test]
    fn factor_type_rejects_vanishing_form() {
        let err = factor_type(&form(&[3, 3, 3, 3]), 3).unwrap_err();
        assert!(matches!(err, BinicError::FormVanishesModP(3)));
    }

    #[test]
    fn predictions_match_split_brute_force() {
        // R = F_p x F_p x F_p: enumerate unit triples directly.
        for p in [3u64, 5, 7] {
            let chi = |u: u64| powm(u, (p - 1) / 2, p);
            let mut classes: HashSet<(u64, u64, u64)> = HashSet::new();
            for u1 in 1..p {
                for u2 in 1..p {
                    for u3 in 1..p {
                        if mulm(mulm(u1, u2, p), u3, p) == 1 {
                            classes.insert((chi(u1), chi(u2), chi(u3)));
                        }
                    }
                }
            }
            let mut torsion = 0u64;
            for s1 in [1, p - 1] {
                for s2 in [1, p - 1] {
                    for s3 in [1, p - 1] {
                        if mulm(mulm(s1, s2, p), s3, p) == 1 {
                            torsion += 1;
                        }
                    }
                }
            }
            let ft = FactorType {
                p,
                factors: vec![(1, 1), (1, 1), (1, 1)],
                separable: true,
            };
            assert_eq!(predicted_orbit_count(&ft).unwrap(), classes.len() as u64);
            assert_eq!(predicted_stab(&ft).unwrap(), torsion);
            assert_eq!(classes.len(), 4);
            assert_eq!(torsion, 4);
        }
    }

    #[test]
    fn predictions_match_quadratic_component_brute_force() {
        // R = F_p x F_{p^2}, with F_{p^2} realized as F_p[t]/(g) for an
        // irreducible quadratic g; norms by resultant-free direct formula
        // N(a + bt) = det of multiplication.
        for (p, g) in [(3u64, vec![1u64, 0, 1]), (5, vec![2u64, 0, 1])] {
            assert!(fp::irreducible_modp(&g, p));
            let norm2 = |a: u64, b: u64| -> u64 {
                // multiplication matrix of a + b t on basis {1, t} where
                // t^2 = -g[0] - g[1] t.
                let c0 = (p - g[0] % p) % p;
                let c1 = (p - g[1] % p) % p;
                let m = [a, mulm(b, c0, p), b, addm(a, mulm(b, c1, p), p)];
                subm(mulm(m[0], m[3], p), mulm(m[1], m[2], p), p)
            };
            let euler = |u: u64| powm(u, (p - 1) / 2, p);
            // Square classes of F_{p^2}: u is a square iff u^((p^2-1)/2) = 1.
            let chi2 = |a: u64, b: u64| -> u64 {
                let e = (p * p - 1) / 2;
                let mut base = vec![a, b];
                fp::ptrim(&mut base);
                let pw = fp::ppowmod(&base, &BigUint::from(e), &g, p);
                if pw == vec![1] {
                    1
                } else {
                    p - 1
                }
            };
            let mut classes: HashSet<(u64, u64)> = HashSet::new();
            for u1 in 1..p {
                for a in 0..p {
                    for b in 0..p {
                        if a == 0 && b == 0 {
                            continue;
                        }
                        if mulm(u1, norm2(a, b), p) == 1 {
                            classes.insert((euler(u1), chi2(a, b)));
                        }
                    }
                }
            }
            // 2-torsion with norm exactly one: component signs, with
            // N(-1 in F_{p^2}) = 1.
            let mut torsion = 0u64;
            for s1 in [1, p - 1] {
                for s2 in [1u64, p - 1] {
                    let n2 = if s2 == 1 { 1 } else { norm2(p - 1, 0) };
                    if mulm(s1, n2, p) == 1 {
                        torsion += 1;
                    }
                }
            }
            let ft = FactorType {
                p,
                factors: vec![(1, 1), (2, 1)],
                separable: true,
            };
            assert_eq!(predicted_orbit_count(&ft).unwrap(), classes.len() as u64);
            assert_eq!(predicted_stab(&ft).unwrap(), torsion);
            assert_eq!(classes.len(), 2);
            assert_eq!(torsion, 2);
        }
    }

    #[test]
    fn archimedean_counts_match_closed_forms() {
        for n in [3usize, 5, 7] {
            for r2 in 0..=(n - 1) / 2 {
                let r1 = n - 2 * r2;
                let (orbit, stab) = archimedean_counts(r1, r2).unwrap();
                assert_eq!(orbit, 1 << (r1 - 1));
                assert_eq!(stab, 1 << (r1 + r2 - 1));
            }
        }
    }

    #[test]
    fn brute_orbits_irreducible_fiber_mod_2() {
        let report = brute_orbits(&form(&[1, 0, 1, 1]), 2).unwrap();
        assert_eq!(report.fiber_size, 168);
        assert_eq!(report.orbits.len(), 1);
        assert_eq!(report.orbits[0].size, 168);
        assert_eq!(report.orbits[0].stab, 1);
        assert!(report.orbits[0].trivial);
    }

    #[test]
    fn brute_orbits_irreducible_fiber_mod_3() {
        let report = brute_orbits(&form(&[1, 0, -1, 1]), 3).unwrap();
        assert_eq!(report.fiber_size, 5616);
        assert_eq!(report.orbits.len(), 1);
        assert_eq!(report.orbits[0].stab, 1);
        assert!(report.orbits[0].trivial);
    }

    #[test]
    fn brute_orbits_split_fiber_mod_3() {
        // x(x - y)(x - 2y) = x^3 + 2 x y^2 mod 3: three split components.
        let report = brute_orbits(&form(&[1, 0, 2, 0]), 3).unwrap();
        assert_eq!(report.fiber_size, 5616);
        assert_eq!(report.predicted, 4);
        assert_eq!(report.orbits.len(), 4);
        for o in &report.orbits {
            assert_eq!(o.size, 1404);
            assert_eq!(o.stab, 4);
        }
        assert_eq!(report.orbits.iter().filter(|o| o.trivial).count(), 1);
        let line = report.json_line();
        assert!(line.contains("\"p\":3"));
        assert!(line.contains("\"predicted\":4"));
    }

    #[test]
    fn brute_orbits_zero_leading_fiber_mod_3() {
        // x^2 y + x y^2 = xy(x + y): separable with a y factor.
        let report = brute_orbits(&form(&[0, 1, 1, 0]), 3).unwrap();
        assert_eq!(report.fiber_size, 5616);
        assert_eq!(report.orbits.len(), 4);
        for o in &report.orbits {
            assert_eq!(o.stab, 4);
        }
    }

    #[test]
    fn brute_orbits_seeded_mod_5() {
        // x^3 - x - 1 = (x - 2)(x^2 + 2x + 3) mod 5, so two components.
        let report = brute_orbits(&form(&[1, 0, -1, -1]), 5).unwrap();
        assert_eq!(report.predicted, 2);
        assert_eq!(report.orbits.len(), 2);
        for o in &report.orbits {
            assert_eq!(o.size, 186_000);
            assert_eq!(o.stab, 2);
        }
        assert_eq!(report.fiber_size, 372_000);
        assert_eq!(report.orbits.iter().filter(|o| o.trivial).count(), 1);
    }

    #[test]
    fn brute_orbits_rejects_inseparable() {
        let err = brute_orbits(&form(&[1, 1, 0, 0]), 2).unwrap_err();
        assert!(matches!(err, BinicError::InseparableType));
    }

    #[test]
    fn census_mod_2_strata() {
        let c = strata_census(2, 3, 4).unwrap();
        assert_eq!(c.total, 4096);
        assert_eq!(c.fiber_count, 16);
        assert_eq!(c.separable_fibers, 6);
        assert_eq!(c.orbit_count, 66);
        assert_eq!(c.eq_k, vec![(2, 504), (3, 336)]);
        assert_eq!(c.nostab, 1008);
        assert_eq!(c.irr_certified, 0);
        for (_, r) in c.eq_k_ratios() {
            assert!(r > BigRational::zero());
        }
    }

    #[test]
    fn census_mod_3_strata() {
        let c = strata_census(3, 3, 8).unwrap();
        assert_eq!(c.total, 531_441);
        assert_eq!(c.fiber_count, 81);
        assert_eq!(c.separable_fibers, 48);
        assert_eq!(c.orbit_count, 280);
        assert_eq!(c.eq_k, vec![(2, 134_784), (3, 89_856)]);
        assert_eq!(c.nostab, 140_400);
        assert_eq!(c.irr_certified, 117_936);
        for (_, r) in c.eq_k_ratios() {
            assert!(r > BigRational::zero());
        }
    }

    #[test]
    fn census_deterministic_across_job_counts() {
        let a = strata_census(2, 3, 1).unwrap();
        let b = strata_census(2, 3, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn isotropic_search_finds_section_pattern() {
        let f = form(&[1, 2, -1, 3]);
        let pair = section_e(&f).unwrap();
        assert!(isotropic_search_modp(&pair, 3).unwrap());
        let f5 = form(&[1, 0, 0, -2, 1, 7]);
        let pair5 = section_e(&f5).unwrap();
        assert!(isotropic_search_modp(&pair5, 3).unwrap());
    }

    #[test]
    fn isotropic_search_rejects_anisotropic_pair() {
        // This pair has resolvent x^3 + 2 x y^2 mod 3 but no common
        // projective zero of the two conics over F_3 (checked by exhaustive
        // point enumeration), so no representative of its class reduces to
        // block-zero shape.
        use crate::linalg::Mat;
        let a = Mat::from_rows(
            [[0, 0, 1], [0, 2, 0], [1, 0, 0]]
                .iter()
                .map(|r| r.iter().map(|&c| BigInt::from(c)).collect())
                .collect(),
        );
        let b = Mat::from_rows(
            [[1, 0, 0], [0, 0, 0], [0, 0, 1]]
                .iter()
                .map(|r| r.iter().map(|&c| BigInt::from(c)).collect())
                .collect(),
        );
        let pair = SymPair::new(a, b).unwrap();
        assert!(!isotropic_search_modp(&pair, 3).unwrap());
    }

    #[test]
    fn local_mass_odd_primes_are_one() {
        for (coeffs, p) in [
            (&[1i64, 0, -1, 1][..], 5u64),
            (&[1, 0, -1, 1][..], 3),
            (&[1, 2, 3, 1][..], 7),
            (&[1, 0, 0, -2, 1, 7][..], 5),
        ] {
            let m = local_mass(&form(coeffs), p, 6).unwrap();
            assert_eq!(m.value, BigRational::one(), "p = {p}, f = {coeffs:?}");
        }
    }

    #[test]
    fn local_mass_at_two_is_two_to_n_minus_one() {
        for coeffs in [&[1i64, 0, -1, 1][..], &[1, 1, 2, 3][..]] {
            let m = local_mass(&form(coeffs), 2, 6).unwrap();
            assert_eq!(m.value, BigRational::from(BigInt::from(4)));
        }
        let m5 = local_mass(&form(&[1, 0, 0, -2, 1, 7]), 2, 6).unwrap();
        assert_eq!(m5.value, BigRational::from(BigInt::from(16)));
    }

    #[test]
    fn archimedean_mass_identities() {
        for n in [3usize, 5, 7] {
            for r2 in 0..=(n - 1) / 2 {
                let t = tau(n, r2).unwrap();
                let s = sigma(n, r2).unwrap();
                let m = mass_infinity(n, r2).unwrap();
                // sigma * m_infinity = tau and m_infinity = 2^{-r2}.
                assert_eq!(
                    m.value.clone() * BigRational::from(BigInt::from(s)),
                    BigRational::from(BigInt::from(t))
                );
                assert_eq!(
                    m.value,
                    BigRational::new(BigInt::one(), BigInt::one() << r2)
                );
            }
        }
    }

    #[test]
    fn product_of_masses_matches_signature_power() {
        // (1/sigma) * prod_p m_p over any finite set of primes containing 2
        // equals 2^{r2} times 2^{n-1} / 2^{r1+r2-1} with all odd masses 1.
        let f = form(&[1, 0, -1, 1]);
        let n = 3usize;
        let mut prod = BigRational::one();
        for p in [2u64, 3, 5, 7, 11] {
            prod *= local_mass(&f, p, 6).unwrap().value;
        }
        for r2 in 0..=(n - 1) / 2 {
            let s = sigma(n, r2).unwrap();
            let lhs = prod.clone() / BigRational::from(BigInt::from(s));
            let rhs = BigRational::from(BigInt::one() << r2);
            assert_eq!(lhs, rhs, "r2 = {r2}");
        }
    }
}
