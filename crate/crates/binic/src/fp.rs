//! Arithmetic over the prime fields F_p (p < 2^31): polynomials, matrices,
//! and the splitting of finite commutative F_p-algebras into local pieces.
//!
//! Polynomials are coefficient vectors in ascending order with no trailing
//! zeros. All randomized factorization steps draw from a caller-seeded
//! ChaCha stream so results are reproducible; every factor list is returned
//! sorted by (degree, coefficients).

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed used by library entry points that do not thread an explicit seed.
pub const DEFAULT_SEED: u64 = 0x5eed_0001;

#[inline]
pub fn addm(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn subm(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn powm(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a, p);
        }
        a = mulm(a, a, p);
        e >>= 1;
    }
    r
}

/// Inverse mod p by Fermat (p prime).
pub fn invm(a: u64, p: u64) -> u64 {
    assert!(a % p != 0, "inverse of zero mod {p}");
    powm(a, p - 2, p)
}

// ---------------------------------------------------------------------------
// Polynomials over F_p
// ---------------------------------------------------------------------------

pub type PolyP = Vec<u64>;

pub fn ptrim(f: &mut PolyP) {
    while f.last() == Some(&0) {
        f.pop();
    }
}

pub fn pdeg(f: &PolyP) -> Option<usize> {
    if f.is_empty() {
        None
    } else {
        Some(f.len() - 1)
    }
}

pub fn pmul(f: &PolyP, g: &PolyP, p: u64) -> PolyP {
    if f.is_empty() || g.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = addm(out[i + j], mulm(a, b, p), p);
        }
    }
    ptrim(&mut out);
    out
}

pub fn padd(f: &PolyP, g: &PolyP, p: u64) -> PolyP {
    let mut out = vec![0u64; f.len().max(g.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let a = f.get(i).copied().unwrap_or(0);
        let b = g.get(i).copied().unwrap_or(0);
        *o = addm(a, b, p);
    }
    ptrim(&mut out);
    out
}

pub fn psub(f: &PolyP, g: &PolyP, p: u64) -> PolyP {
    let mut out = vec![0u64; f.len().max(g.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let a = f.get(i).copied().unwrap_or(0);
        let b = g.get(i).copied().unwrap_or(0);
        *o = subm(a, b, p);
    }
    ptrim(&mut out);
    out
}

/// Euclidean division: returns (quotient, remainder) with g != 0.
pub fn pdivrem(f: &PolyP, g: &PolyP, p: u64) -> (PolyP, PolyP) {
    let dg = pdeg(g).expect("division by zero polynomial");
    let lead_inv = invm(g[dg], p);
    let mut r = f.clone();
    let mut q = vec![0u64; f.len().saturating_sub(dg)];
    while let Some(dr) = pdeg(&r) {
        if dr < dg {
            break;
        }
        let c = mulm(r[dr], lead_inv, p);
        q[dr - dg] = c;
        for i in 0..=dg {
            r[dr - dg + i] = subm(r[dr - dg + i], mulm(c, g[i], p), p);
        }
        ptrim(&mut r);
    }
    ptrim(&mut q);
    (q, r)
}

pub fn pmod(f: &PolyP, g: &PolyP, p: u64) -> PolyP {
    pdivrem(f, g, p).1
}

pub fn pmonic(f: &PolyP, p: u64) -> PolyP {
    match pdeg(f) {
        None => vec![],
        Some(d) => {
            let inv = invm(f[d], p);
            f.iter().map(|&c| mulm(c, inv, p)).collect()
        }
    }
}

pub fn pgcd(f: &PolyP, g: &PolyP, p: u64) -> PolyP {
    let (mut a, mut b) = (f.clone(), g.clone());
    while !b.is_empty() {
        let r = pmod(&a, &b, p);
        a = b;
        b = r;
    }
    pmonic(&a, p)
}

pub fn peval(f: &PolyP, x: u64, p: u64) -> u64 {
    let mut acc = 0u64;
    for &c in f.iter().rev() {
        acc = addm(mulm(acc, x, p), c, p);
    }
    acc
}

pub fn pderiv(f: &PolyP, p: u64) -> PolyP {
    let mut out: PolyP = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| mulm(c, (i as u64) % p, p))
        .collect();
    ptrim(&mut out);
    out
}

/// Computes a^e mod f with a big exponent.
pub fn ppowmod(a: &PolyP, e: &BigUint, f: &PolyP, p: u64) -> PolyP {
    let mut result = vec![1u64];
    let mut base = pmod(a, f, p);
    let bits = e.bits();
    for i in 0..bits {
        if e.bit(i) {
            result = pmod(&pmul(&result, &base, p), f, p);
        }
        if i + 1 < bits {
            base = pmod(&pmul(&base, &base, p), f, p);
        }
    }
    result
}

/// Squarefree decomposition over F_p: returns (g, m) pairs with
/// f = lead * prod g^m, the g monic squarefree and pairwise coprime.
pub fn squarefree_decomp(f: &PolyP, p: u64) -> Vec<(PolyP, usize)> {
    let mut out: Vec<(PolyP, usize)> = Vec::new();
    collect_squarefree(&pmonic(f, p), p, 1, &mut out);
    out.sort_by(|a, b| cmp_poly(&a.0, &b.0).then(a.1.cmp(&b.1)));
    out
}

fn collect_squarefree(f: &PolyP, p: u64, mult: usize, out: &mut Vec<(PolyP, usize)>) {
    if pdeg(f) == Some(0) || f.is_empty() {
        return;
    }
    let df = pderiv(f, p);
    if df.is_empty() {
        // f = g(x^p) = h(x)^p over F_p; recurse on the p-th root.
        let pu = p as usize;
        let mut h: PolyP = Vec::with_capacity(f.len() / pu + 1);
        for (i, &c) in f.iter().enumerate() {
            if i % pu == 0 {
                h.push(c);
            } else {
                assert_eq!(c, 0, "nonzero coefficient off the p-th powers");
            }
        }
        collect_squarefree(&h, p, mult * pu, out);
        return;
    }
    let mut c = pgcd(f, &df, p);
    let mut w = pdivrem(f, &c, p).0;
    // w carries each squarefree part of multiplicity prime to p exactly once;
    // peel multiplicities 1, 2, ... in order.
    let mut i = 1usize;
    while w.len() > 1 {
        let y = pgcd(&w, &c, p);
        let fac = pdivrem(&w, &y, p).0;
        if pdeg(&fac) > Some(0) {
            out.push((pmonic(&fac, p), mult * i));
        }
        w = y;
        c = pdivrem(&c, &w, p).0;
        i += 1;
    }
    // What survives in c has every multiplicity divisible by p; its
    // derivative vanishes, so the recursion takes the p-th root.
    if pdeg(&c) > Some(0) {
        collect_squarefree(&c, p, mult, out);
    }
}

fn cmp_poly(a: &PolyP, b: &PolyP) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        for (x, y) in a.iter().rev().zip(b.iter().rev()) {
            let c = x.cmp(y);
            if c != std::cmp::Ordering::Equal {
                return c;
            }
        }
        std::cmp::Ordering::Equal
    })
}

/// Full factorization of f over F_p. Deterministic for a fixed seed.
pub fn factor_modp(f: &PolyP, p: u64, seed: u64) -> Vec<(PolyP, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out: Vec<(PolyP, usize)> = Vec::new();
    for (g, m) in squarefree_decomp(f, p) {
        for (d, h) in distinct_degree(&g, p) {
            for irr in equal_degree(&h, d, p, &mut rng) {
                out.push((irr, m));
            }
        }
    }
    out.sort_by(|a, b| cmp_poly(&a.0, &b.0));
    out
}

/// Distinct-degree splitting of a monic squarefree polynomial: returns
/// (d, product of all irreducible factors of degree d).
pub(crate) fn distinct_degree(f: &PolyP, p: u64) -> Vec<(usize, PolyP)> {
    let mut out = Vec::new();
    let mut rem = f.clone();
    let x = vec![0u64, 1];
    let mut xq = x.clone();
    let mut d = 0usize;
    while let Some(dr) = pdeg(&rem) {
        if dr == 0 {
            break;
        }
        d += 1;
        if 2 * d > dr {
            out.push((dr, rem));
            break;
        }
        xq = ppowmod(&xq, &BigUint::from(p), &rem, p);
        let g = pgcd(&psub(&xq, &x, p), &rem, p);
        if pdeg(&g) > Some(0) {
            rem = pdivrem(&rem, &g, p).0;
            xq = pmod(&xq, &rem, p);
            out.push((d, g));
        }
    }
    out
}

/// Cantor-Zassenhaus equal-degree splitting: f monic squarefree, all
/// irreducible factors of degree d.
fn equal_degree(f: &PolyP, d: usize, p: u64, rng: &mut ChaCha8Rng) -> Vec<PolyP> {
    let df = pdeg(f).unwrap();
    if df == d {
        return vec![pmonic(f, p)];
    }
    loop {
        let a: PolyP = {
            let mut v: PolyP = (0..df).map(|_| rng.gen_range(0..p)).collect();
            ptrim(&mut v);
            if v.is_empty() {
                continue;
            }
            v
        };
        let g = pgcd(&a, f, p);
        let split = if pdeg(&g) > Some(0) && pdeg(&g) < Some(df) {
            Some(g)
        } else if p == 2 {
            // Trace map over F_{2^d}: t = a + a^2 + a^4 + ... (d terms).
            let mut t = vec![0u64];
            let mut pw = pmod(&a, f, p);
            for _ in 0..d {
                t = padd(&t, &pw, p);
                pw = pmod(&pmul(&pw, &pw, p), f, p);
            }
            let g = pgcd(&t, f, p);
            (pdeg(&g) > Some(0) && pdeg(&g) < Some(df)).then_some(g)
        } else {
            let e = (BigUint::from(p).pow(d as u32) - BigUint::one()) / BigUint::from(2u32);
            let b = ppowmod(&a, &e, f, p);
            let g = pgcd(&psub(&b, &[1].to_vec(), p), f, p);
            (pdeg(&g) > Some(0) && pdeg(&g) < Some(df)).then_some(g)
        };
        if let Some(g) = split {
            let h = pdivrem(f, &g, p).0;
            let mut out = equal_degree(&g, d, p, rng);
            out.extend(equal_degree(&h, d, p, rng));
            return out;
        }
    }
}

/// Rabin irreducibility test for a monic-izable polynomial of degree >= 1.
pub fn irreducible_modp(f: &PolyP, p: u64) -> bool {
    let Some(n) = pdeg(f) else { return false };
    if n == 0 {
        return false;
    }
    let f = pmonic(f, p);
    let x = vec![0u64, 1];
    // x^{p^n} == x mod f
    let mut xq = x.clone();
    for _ in 0..n {
        xq = ppowmod(&xq, &BigUint::from(p), &f, p);
    }
    if psub(&xq, &x, p) != Vec::<u64>::new() {
        return false;
    }
    // gcd(x^{p^{n/q}} - x, f) = 1 for every prime q | n
    let mut primes = vec![];
    let mut m = n;
    let mut q = 2;
    while q * q <= m {
        if m % q == 0 {
            primes.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    for q in primes {
        let mut xq = x.clone();
        for _ in 0..n / q {
            xq = ppowmod(&xq, &BigUint::from(p), &f, p);
        }
        let g = pgcd(&psub(&xq, &x, p), &f, p);
        if pdeg(&g) != Some(0) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Matrices over F_p
// ---------------------------------------------------------------------------

/// Reduced row echelon form in place; returns the rank.
pub fn rref(m: &mut Vec<Vec<u64>>, p: u64) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = invm(m[rank][col], p);
        for x in m[rank].iter_mut() {
            *x = mulm(*x, inv, p);
        }
        for i in 0..rows {
            if i != rank && m[i][col] != 0 {
                let c = m[i][col];
                for j in 0..cols {
                    let t = mulm(c, m[rank][j], p);
                    m[i][j] = subm(m[i][j], t, p);
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Basis of the right null space {x : M x = 0} of an r x c matrix.
pub fn nullspace(m: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let mut w: Vec<Vec<u64>> = m.to_vec();
    if w.is_empty() {
        return vec![];
    }
    let cols = w[0].len();
    rref(&mut w, p);
    // Identify pivot columns.
    let mut pivots = vec![usize::MAX; w.len()];
    let mut is_pivot = vec![false; cols];
    for (i, row) in w.iter().enumerate() {
        if let Some(j) = row.iter().position(|&x| x != 0) {
            pivots[i] = j;
            is_pivot[j] = true;
        }
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for (i, row) in w.iter().enumerate() {
            let pj = pivots[i];
            if pj != usize::MAX {
                v[pj] = subm(0, row[free], p);
            }
        }
        basis.push(v);
    }
    basis
}

// ---------------------------------------------------------------------------
// Finite commutative F_p-algebras
// ---------------------------------------------------------------------------

/// A commutative F_p-algebra of dimension n given by structure constants:
/// e_i e_j = sum_k table[(i*n + j)*n + k] e_k, with e_0 = 1.
#[derive(Clone)]
pub struct AlgebraP {
    pub n: usize,
    pub p: u64,
    pub table: Vec<u64>,
}

impl AlgebraP {
    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let n = self.n;
        let p = self.p;
        let mut out = vec![0u64; n];
        for i in 0..n {
            if a[i] == 0 {
                continue;
            }
            for j in 0..n {
                if b[j] == 0 {
                    continue;
                }
                let c = mulm(a[i], b[j], p);
                let base = (i * n + j) * n;
                for k in 0..n {
                    let t = self.table[base + k];
                    if t != 0 {
                        out[k] = addm(out[k], mulm(c, t, p), p);
                    }
                }
            }
        }
        out
    }

    pub fn one(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.n];
        v[0] = 1;
        v
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut base = a.to_vec();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Basis of the nilradical: kernel of a power of Frobenius.
    pub fn radical(&self) -> Vec<Vec<u64>> {
        let n = self.n;
        // Frobenius x -> x^p is F_p-linear; its matrix has columns e_i^p.
        let mut frob = vec![vec![0u64; n]; n];
        for i in 0..n {
            let mut e = vec![0u64; n];
            e[i] = 1;
            let fe = self.pow(&e, self.p);
            for k in 0..n {
                frob[k][i] = fe[k];
            }
        }
        // Iterate until p^m >= n so the kernel is the full nilradical.
        let mut m = 1usize;
        let mut pw = self.p as usize;
        while pw < n {
            pw *= self.p as usize;
            m += 1;
        }
        let mut mat = frob.clone();
        for _ in 1..m {
            mat = mat_mul_p(&mat, &frob, self.p);
        }
        nullspace(&mat, self.p)
    }

    /// Minimal polynomial of an element (monic, over F_p).
    pub fn min_poly(&self, a: &[u64]) -> PolyP {
        let n = self.n;
        let mut rows: Vec<Vec<u64>> = Vec::new();
        let mut pw = self.one();
        for _ in 0..=n {
            rows.push(pw.clone());
            pw = self.mul(&pw, a);
            // Solve for a linear dependence among 1, a, ..., a^k.
            let m: Vec<Vec<u64>> = (0..n)
                .map(|coord| rows.iter().map(|r| r[coord]).collect())
                .collect();
            let null = nullspace(&m, self.p);
            if let Some(v) = null.first() {
                let mut c = v.clone();
                ptrim(&mut c);
                return pmonic(&c, self.p);
            }
        }
        unreachable!("no minimal polynomial of degree <= n");
    }

    /// Evaluates a polynomial at an algebra element.
    pub fn eval_poly(&self, f: &PolyP, a: &[u64]) -> Vec<u64> {
        let mut acc = vec![0u64; self.n];
        for &c in f.iter().rev() {
            acc = self.mul(&acc, a);
            acc[0] = addm(acc[0], c, self.p);
        }
        acc
    }
}

fn mat_mul_p(a: &[Vec<u64>], b: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let n = a.len();
    let mut out = vec![vec![0u64; b[0].len()]; n];
    for i in 0..n {
        for k in 0..b.len() {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..b[0].len() {
                out[i][j] = addm(out[i][j], mulm(a[i][k], b[k][j], p), p);
            }
        }
    }
    out
}

/// One local component of a finite commutative F_p-algebra.
#[derive(Debug, Clone)]
pub struct LocalComponent {
    /// Primitive idempotent of the component, in algebra coordinates.
    pub idempotent: Vec<u64>,
    /// F_p-dimension of the component (rank of multiplication by the
    /// idempotent).
    pub dim: usize,
    /// Residue field degree of the component.
    pub residue_degree: usize,
    /// Basis of the corresponding maximal ideal as a subspace of the algebra
    /// (the radical plus all other components).
    pub maximal_ideal: Vec<Vec<u64>>,
}

/// Decomposes a finite commutative F_p-algebra into its local components.
///
/// Strategy: split idempotents by factoring minimal polynomials of basis
/// elements (and, when those are exhausted, seeded random elements), then
/// classify each indecomposable piece by its residue degree.
pub fn local_components(alg: &AlgebraP, seed: u64) -> Vec<LocalComponent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa1_6e_57);
    let mut comps: Vec<Vec<u64>> = vec![alg.one()];
    // Repeatedly try to split every current idempotent.
    loop {
        let mut progressed = false;
        let mut next: Vec<Vec<u64>> = Vec::new();
        for e in comps.iter() {
            match try_split(alg, e, &mut rng) {
                Some((e1, e2)) => {
                    next.push(e1);
                    next.push(e2);
                    progressed = true;
                }
                None => next.push(e.clone()),
            }
        }
        comps = next;
        if !progressed {
            break;
        }
    }
    // Assemble component data.
    let n = alg.n;
    let p = alg.p;
    let rad = alg.radical();
    let mut out = Vec::new();
    for e in &comps {
        // rank of multiplication by e = dim of the component
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for i in 0..n {
            let mut b = vec![0u64; n];
            b[i] = 1;
            rows.push(alg.mul(e, &b));
        }
        let dim = rref(&mut rows.clone(), p);
        // Residue degree: dim of e*A modulo radical. The residue field of the
        // component is (eA)/(eA cap rad); its degree is dim eA - dim e*rad.
        let mut rad_rows: Vec<Vec<u64>> = rad.iter().map(|r| alg.mul(e, r)).collect();
        let rad_dim = rref(&mut rad_rows, p);
        let residue_degree = dim - rad_dim;
        // Maximal ideal: span of radical and all other components.
        let mut mi: Vec<Vec<u64>> = rad.clone();
        for other in &comps {
            if other == e {
                continue;
            }
            for i in 0..n {
                let mut b = vec![0u64; n];
                b[i] = 1;
                mi.push(alg.mul(other, &b));
            }
        }
        let mut echelon = mi.clone();
        let r = rref(&mut echelon, p);
        echelon.truncate(r);
        out.push(LocalComponent {
            idempotent: e.clone(),
            dim,
            residue_degree,
            maximal_ideal: echelon,
        });
    }
    out.sort_by(|a, b| {
        (a.residue_degree, a.dim, a.idempotent.clone())
            .cmp(&(b.residue_degree, b.dim, b.idempotent.clone()))
    });
    out
}

/// Attempts to split the idempotent e into two orthogonal idempotents using
/// an element of e*A with reducible squarefree minimal polynomial part.
fn try_split(alg: &AlgebraP, e: &[u64], rng: &mut ChaCha8Rng) -> Option<(Vec<u64>, Vec<u64>)> {
    let n = alg.n;
    let p = alg.p;
    let mut candidates: Vec<Vec<u64>> = Vec::new();
    for i in 0..n {
        let mut b = vec![0u64; n];
        b[i] = 1;
        candidates.push(alg.mul(e, &b));
    }
    for _ in 0..24 {
        let v: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
        candidates.push(alg.mul(e, &v));
    }
    for a in candidates {
        // Work with the squarefree part of the minimal polynomial: distinct
        // irreducible factors correspond to distinct local pieces.
        let m = alg.min_poly(&a);
        let dm = pderiv(&m, p);
        let sf = if dm.is_empty() {
            m.clone()
        } else {
            pdivrem(&m, &pgcd(&m, &dm, p), p).0
        };
        let facs = factor_modp(&sf, p, 7);
        if facs.len() < 2 {
            continue;
        }
        // CRT idempotent: u*g1 = 1 mod g2-part gives e1 = (u*g1)(a) * e.
        let g1 = facs[0].0.clone();
        let mut g_rest = vec![1u64];
        for (g, _) in &facs[1..] {
            g_rest = pmul(&g_rest, g, p);
        }
        // Find u with u * g_rest == 1 mod g1 by the extended Euclid trick:
        // since gcd(g1, g_rest) = 1 there are s,t with s g1 + t g_rest = 1.
        let (_, t) = ext_gcd_poly(&g1, &g_rest, p);
        let tg = pmul(&t, &g_rest, p);
        // e1 = (t * g_rest)(a), projected into the component of e.
        let mut e1 = alg.eval_poly(&tg, &a);
        e1 = alg.mul(&e1, e);
        // Idempotent-ness can fail if min poly was not squarefree on the
        // component; square up by Newton: e <- 3e^2 - 2e^3 stabilizes.
        for _ in 0..8 {
            let e1sq = alg.mul(&e1, &e1);
            if e1sq == e1 {
                break;
            }
            let e1cu = alg.mul(&e1sq, &e1);
            let mut next = vec![0u64; n];
            for k in 0..n {
                let three = mulm(3 % p, e1sq[k], p);
                let two = mulm(2 % p, e1cu[k], p);
                next[k] = subm(three, two, p);
            }
            e1 = next;
        }
        if alg.mul(&e1, &e1) != e1 {
            continue;
        }
        let zero = vec![0u64; n];
        if e1 == zero || &e1 == e {
            continue;
        }
        let mut e2 = e.to_vec();
        for k in 0..n {
            e2[k] = subm(e2[k], e1[k], p);
        }
        return Some((e1, e2));
    }
    None
}

/// Inverse of a mod f (when gcd(a, f) = 1), else None.
pub fn poly_inverse_mod(a: &PolyP, f: &PolyP, p: u64) -> Option<PolyP> {
    if a.is_empty() {
        return None;
    }
    if pdeg(&pgcd(a, f, p)) != Some(0) {
        return None;
    }
    let (s, _) = ext_gcd_poly(a, f, p);
    Some(pmod(&s, f, p))
}

/// Extended Euclid for polynomials: returns (s, t) with s*a + t*b = gcd
/// normalized monic; only valid when gcd(a, b) = 1 here.
fn ext_gcd_poly(a: &PolyP, b: &PolyP, p: u64) -> (PolyP, PolyP) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (vec![1u64], vec![]);
    let (mut t0, mut t1) = (vec![], vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = pdivrem(&r0, &r1, p);
        let s = psub(&s0, &pmul(&q, &s1, p), p);
        let t = psub(&t0, &pmul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        t0 = std::mem::replace(&mut t1, t);
    }
    let lead_inv = invm(r0[pdeg(&r0).expect("gcd of zero polynomials")], p);
    let scale = |f: &PolyP| -> PolyP { f.iter().map(|&c| mulm(c, lead_inv, p)).collect() };
    (scale(&s0), scale(&t0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_cubic_mod7() {
        // x^3 - 1 mod 7 = (x-1)(x-2)(x-4): 7 = 1 mod 3 so three roots.
        let f = vec![6, 0, 0, 1];
        let fac = factor_modp(&f, 7, 0);
        assert_eq!(fac.len(), 3);
        assert!(fac.iter().all(|(g, m)| pdeg(g) == Some(1) && *m == 1));
    }

    #[test]
    fn irreducible_detection() {
        // x^3 + x + 1 irreducible mod 2 (no roots, degree 3).
        assert!(irreducible_modp(&vec![1, 1, 0, 1], 2));
        // x^3 - x - 1 irreducible mod 2 as well (same polynomial mod 2).
        assert!(irreducible_modp(&vec![1, 1, 0, 1], 2));
        // x^2 - 1 = (x-1)(x+1) mod 5.
        assert!(!irreducible_modp(&vec![4, 0, 1], 5));
    }

    #[test]
    fn squarefree_with_char_division() {
        // (x+1)^2 (x+2) mod 3
        let f = pmul(&pmul(&vec![1, 1], &vec![1, 1], 3), &vec![2, 1], 3);
        let sf = squarefree_decomp(&f, 3);
        assert_eq!(sf.len(), 2);
        let mults: Vec<usize> = sf.iter().map(|x| x.1).collect();
        assert!(mults.contains(&1) && mults.contains(&2));
    }

    #[test]
    fn nullspace_basic() {
        // x + y + z = 0 mod 5 has a 2-dimensional solution space.
        let m = vec![vec![1u64, 1, 1]];
        let ns = nullspace(&m, 5);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert_eq!(addm(addm(v[0], v[1], 5), v[2], 5), 0);
        }
    }

    #[test]
    fn split_product_algebra() {
        // F_3[x]/(x^2 - 1) = F_3 x F_3: table for basis 1, x.
        let p = 3u64;
        let n = 2usize;
        let mut table = vec![0u64; n * n * n];
        // 1*1 = 1; 1*x = x; x*x = 1
        table[(0 * n + 0) * n + 0] = 1;
        table[(0 * n + 1) * n + 1] = 1;
        table[(1 * n + 0) * n + 1] = 1;
        table[(1 * n + 1) * n + 0] = 1;
        let alg = AlgebraP { n, p, table };
        let comps = local_components(&alg, 0);
        assert_eq!(comps.len(), 2);
        for c in &comps {
            assert_eq!(c.dim, 1);
            assert_eq!(c.residue_degree, 1);
            assert_eq!(c.maximal_ideal.len(), 1);
        }
    }

    #[test]
    fn split_field_algebra_stays_whole() {
        // F_2[x]/(x^3 + x + 1) is a field: one component of residue degree 3.
        let p = 2u64;
        let n = 3usize;
        // theta^3 = theta + 1
        let red = [vec![1u64, 1, 0], vec![0, 1, 1]]; // theta^3, theta^4 = theta + theta^2
        let mut table = vec![0u64; n * n * n];
        for i in 0..n {
            for j in 0..n {
                // theta^{i+j}
                let e = i + j;
                let coords: Vec<u64> = if e < n {
                    let mut v = vec![0u64; n];
                    v[e] = 1;
                    v
                } else {
                    red[e - n].clone()
                };
                for k in 0..n {
                    table[(i * n + j) * n + k] = coords[k];
                }
            }
        }
        let alg = AlgebraP { n, p, table };
        let comps = local_components(&alg, 0);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].residue_degree, 3);
        assert_eq!(comps[0].dim, 3);
        assert!(comps[0].maximal_ideal.is_empty());
    }

    #[test]
    fn split_triple_product_mod2() {
        // F_2^3 as F_2[x]/(x(x+1)) x F_2 needs a non-monogenic split: build the
        // product algebra directly with componentwise multiplication.
        let p = 2u64;
        let n = 3usize;
        // Basis u0=(1,0,0), u1=(0,1,0), u2=(0,0,1) BUT with e_0 = 1 = u0+u1+u2:
        // use basis 1, a=(1,0,0), b=(0,1,0). a^2=a, b^2=b, ab=0.
        let mut table = vec![0u64; n * n * n];
        let set = |table: &mut Vec<u64>, i: usize, j: usize, coords: [u64; 3]| {
            for k in 0..n {
                table[(i * n + j) * n + k] = coords[k];
            }
        };
        set(&mut table, 0, 0, [1, 0, 0]);
        set(&mut table, 0, 1, [0, 1, 0]);
        set(&mut table, 1, 0, [0, 1, 0]);
        set(&mut table, 0, 2, [0, 0, 1]);
        set(&mut table, 2, 0, [0, 0, 1]);
        set(&mut table, 1, 1, [0, 1, 0]);
        set(&mut table, 2, 2, [0, 0, 1]);
        set(&mut table, 1, 2, [0, 0, 0]);
        set(&mut table, 2, 1, [0, 0, 0]);
        let alg = AlgebraP { n, p, table };
        let comps = local_components(&alg, 0);
        assert_eq!(comps.len(), 3);
        assert!(comps.iter().all(|c| c.dim == 1 && c.residue_degree == 1));
    }
}
