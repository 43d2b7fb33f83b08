//! Exact univariate polynomial arithmetic over Z and Q.
//!
//! Coefficient vectors are ascending (index = exponent) with no trailing
//! zeros. Provides resultants through the Sylvester matrix, Sturm chains with
//! real root counting and isolation, squarefree parts, and factorization over
//! Q by rational roots plus Kronecker interpolation with mod-p pruning.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::fp;
use crate::linalg::IMat;

pub type ZPoly = Vec<BigInt>;
pub type QPoly = Vec<BigRational>;

pub fn ztrim(f: &mut ZPoly) {
    while f.last().map(|c| c.is_zero()) == Some(true) {
        f.pop();
    }
}

pub fn qtrim(f: &mut QPoly) {
    while f.last().map(|c| c.is_zero()) == Some(true) {
        f.pop();
    }
}

pub fn zdeg(f: &ZPoly) -> Option<usize> {
    if f.is_empty() {
        None
    } else {
        Some(f.len() - 1)
    }
}

pub fn zmul(f: &ZPoly, g: &ZPoly) -> ZPoly {
    if f.is_empty() || g.is_empty() {
        return vec![];
    }
    let mut out = vec![BigInt::zero(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in g.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    ztrim(&mut out);
    out
}

pub fn zadd(f: &ZPoly, g: &ZPoly) -> ZPoly {
    let mut out = vec![BigInt::zero(); f.len().max(g.len())];
    for (i, o) in out.iter_mut().enumerate() {
        if let Some(a) = f.get(i) {
            *o += a;
        }
        if let Some(b) = g.get(i) {
            *o += b;
        }
    }
    ztrim(&mut out);
    out
}

pub fn zsub(f: &ZPoly, g: &ZPoly) -> ZPoly {
    let mut out = vec![BigInt::zero(); f.len().max(g.len())];
    for (i, o) in out.iter_mut().enumerate() {
        if let Some(a) = f.get(i) {
            *o += a;
        }
        if let Some(b) = g.get(i) {
            *o -= b;
        }
    }
    ztrim(&mut out);
    out
}

pub fn zscale(f: &ZPoly, c: &BigInt) -> ZPoly {
    if c.is_zero() {
        return vec![];
    }
    f.iter().map(|a| a * c).collect()
}

pub fn zderiv(f: &ZPoly) -> ZPoly {
    let mut out: ZPoly = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    ztrim(&mut out);
    out
}

pub fn zeval(f: &ZPoly, x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in f.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub fn zeval_q(f: &ZPoly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in f.iter().rev() {
        acc = acc * x + BigRational::from(c.clone());
    }
    acc
}

/// Content (gcd of coefficients), zero for the zero polynomial.
pub fn zcontent(f: &ZPoly) -> BigInt {
    let mut g = BigInt::zero();
    for c in f {
        g = g.gcd(c);
    }
    g
}

/// Divides out the content and makes the leading coefficient positive.
/// Returns (primitive part, scalar) with f = scalar * primitive.
pub fn zprimitive(f: &ZPoly) -> (ZPoly, BigInt) {
    let mut c = zcontent(f);
    if c.is_zero() {
        return (vec![], BigInt::zero());
    }
    if f.last().unwrap().is_negative() {
        c = -c;
    }
    (f.iter().map(|a| a / &c).collect(), c)
}

/// Exact division; panics if g does not divide f over Q, returns None if the
/// quotient is not integral.
pub fn zdiv_exact(f: &ZPoly, g: &ZPoly) -> Option<ZPoly> {
    let qg = to_q(g);
    let (q, r) = qdivrem(&to_q(f), &qg);
    if !r.is_empty() {
        return None;
    }
    let mut out = ZPoly::with_capacity(q.len());
    for c in q {
        if !c.is_integer() {
            return None;
        }
        out.push(c.to_integer());
    }
    Some(out)
}

pub fn to_q(f: &ZPoly) -> QPoly {
    f.iter().map(|c| BigRational::from(c.clone())).collect()
}

pub fn qmul(f: &QPoly, g: &QPoly) -> QPoly {
    if f.is_empty() || g.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    qtrim(&mut out);
    out
}

pub fn qsub(f: &QPoly, g: &QPoly) -> QPoly {
    let mut out = vec![BigRational::zero(); f.len().max(g.len())];
    for (i, o) in out.iter_mut().enumerate() {
        if let Some(a) = f.get(i) {
            *o += a;
        }
        if let Some(b) = g.get(i) {
            *o -= b;
        }
    }
    qtrim(&mut out);
    out
}

pub fn qdivrem(f: &QPoly, g: &QPoly) -> (QPoly, QPoly) {
    let dg = g.len().checked_sub(1).expect("division by zero polynomial");
    let lead = g[dg].clone();
    let mut r = f.clone();
    let mut q = vec![BigRational::zero(); f.len().saturating_sub(dg)];
    while r.len() > dg {
        let dr = r.len() - 1;
        let c = &r[dr] / &lead;
        for i in 0..=dg {
            let t = &c * &g[i];
            r[dr - dg + i] -= t;
        }
        q[dr - dg] = c;
        qtrim(&mut r);
        if r.len() <= dg {
            break;
        }
    }
    qtrim(&mut q);
    (q, r)
}

/// Primitive gcd over Z via the Euclidean algorithm over Q.
pub fn zgcd_poly(f: &ZPoly, g: &ZPoly) -> ZPoly {
    if f.is_empty() {
        return zprimitive(g).0;
    }
    if g.is_empty() {
        return zprimitive(f).0;
    }
    let (mut a, mut b) = (to_q(f), to_q(g));
    while !b.is_empty() {
        let r = qdivrem(&a, &b).1;
        a = b;
        b = r;
    }
    // Clear denominators and take the primitive part.
    let mut den = BigInt::one();
    for c in &a {
        den = den.lcm(c.denom());
    }
    let z: ZPoly = a.iter().map(|c| (c * BigRational::from(den.clone())).to_integer()).collect();
    zprimitive(&z).0
}

/// f divided by gcd(f, f'): same roots, all simple.
pub fn squarefree_part(f: &ZPoly) -> ZPoly {
    let d = zderiv(f);
    if d.is_empty() {
        return zprimitive(f).0;
    }
    let g = zgcd_poly(f, &d);
    if zdeg(&g) == Some(0) {
        return zprimitive(f).0;
    }
    let q = zdiv_exact(&zprimitive(f).0, &g).expect("gcd divides");
    zprimitive(&q).0
}

/// Resultant of f and g via the Sylvester matrix (Bareiss determinant).
pub fn resultant(f: &ZPoly, g: &ZPoly) -> BigInt {
    let (df, dg) = match (zdeg(f), zdeg(g)) {
        (Some(a), Some(b)) => (a, b),
        _ => return BigInt::zero(),
    };
    if df == 0 {
        return f[0].pow(dg as u32);
    }
    if dg == 0 {
        return g[0].pow(df as u32);
    }
    let size = df + dg;
    let m = IMat::from_fn(size, size, |i, j| {
        if i < dg {
            // Row of f shifted by i: coefficient of x^{size-1-j} is f_{df - (j - i)}
            let k = j as i64 - i as i64;
            if k >= 0 && (k as usize) <= df {
                f[df - k as usize].clone()
            } else {
                BigInt::zero()
            }
        } else {
            let i2 = i - dg;
            let k = j as i64 - i2 as i64;
            if k >= 0 && (k as usize) <= dg {
                g[dg - k as usize].clone()
            } else {
                BigInt::zero()
            }
        }
    });
    m.det()
}

/// Discriminant of f: (-1)^{d(d-1)/2} Res(f, f') / lead(f).
pub fn zdiscriminant(f: &ZPoly) -> BigInt {
    let d = zdeg(f).expect("discriminant of zero polynomial");
    assert!(d >= 1);
    let r = resultant(f, &zderiv(f));
    let lead = f[d].clone();
    let sign = if (d * (d - 1) / 2) % 2 == 0 { 1 } else { -1 };
    let q = r / lead;
    q * BigInt::from(sign)
}

// ---------------------------------------------------------------------------
// Sturm chains and real roots
// ---------------------------------------------------------------------------

/// Sturm chain of a squarefree-ized polynomial, stored with integer
/// coefficients (each remainder scaled to be primitive).
pub struct Sturm {
    pub chain: Vec<ZPoly>,
}

impl Sturm {
    pub fn new(f: &ZPoly) -> Sturm {
        let f0 = squarefree_part(f);
        let mut chain = vec![f0.clone()];
        if zdeg(&f0) >= Some(1) {
            chain.push(zprimitive(&zderiv(&f0)).0);
            loop {
                let k = chain.len();
                let r = qdivrem(&to_q(&chain[k - 2]), &to_q(&chain[k - 1])).1;
                if r.is_empty() {
                    break;
                }
                let mut den = BigInt::one();
                for c in &r {
                    den = den.lcm(c.denom());
                }
                let z: ZPoly = r
                    .iter()
                    .map(|c| (c * BigRational::from(den.clone())).to_integer())
                    .collect();
                let mut prim = zprimitive(&z).0;
                // Sturm chain requires the *negated* remainder; zprimitive
                // forces a positive leading coefficient, so restore the
                // correct sign relative to the remainder.
                let neg = r.last().unwrap().is_negative();
                if !neg {
                    for c in prim.iter_mut() {
                        *c = -c.clone();
                    }
                }
                chain.push(prim);
            }
        }
        Sturm { chain }
    }

    /// Number of sign changes of the chain evaluated at x.
    fn variations_at(&self, x: &BigRational) -> usize {
        let mut signs = Vec::new();
        for f in &self.chain {
            let v = zeval_q(f, x);
            if !v.is_zero() {
                signs.push(v.is_positive());
            }
        }
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Sign changes at -infinity / +infinity.
    fn variations_at_inf(&self, positive: bool) -> usize {
        let mut signs = Vec::new();
        for f in &self.chain {
            if let Some(d) = zdeg(f) {
                let mut s = f[d].is_positive();
                if !positive && d % 2 == 1 {
                    s = !s;
                }
                signs.push(s);
            }
        }
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in the open interval (a, b].
    pub fn count_in(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations_at(a) - self.variations_at(b)
    }

    /// Total number of distinct real roots.
    pub fn count_real(&self) -> usize {
        self.variations_at_inf(false) - self.variations_at_inf(true)
    }
}

/// A bound B with all real roots of f inside (-B, B): Cauchy bound.
pub fn root_bound(f: &ZPoly) -> BigRational {
    let d = zdeg(f).expect("root bound of zero polynomial");
    let lead = f[d].abs();
    let mut m = BigInt::zero();
    for c in &f[..d] {
        let a = c.abs();
        if a > m {
            m = a;
        }
    }
    BigRational::new(m + &lead, lead)
}

/// Isolating intervals (a, b] for every distinct real root of f, in
/// increasing order; endpoints are exact rationals and f(b) may be zero.
pub fn isolate_real_roots(f: &ZPoly) -> Vec<(BigRational, BigRational)> {
    let st = Sturm::new(f);
    let total = st.count_real();
    if total == 0 {
        return vec![];
    }
    let b = root_bound(f);
    let mut stack = vec![(-b.clone(), b.clone())];
    let mut found = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let c = st.count_in(&lo, &hi);
        if c == 0 {
            continue;
        }
        if c == 1 {
            found.push((lo, hi));
            continue;
        }
        let mid = (&lo + &hi) / BigRational::from(BigInt::from(2));
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    found.sort_by(|x, y| x.0.cmp(&y.0));
    assert_eq!(found.len(), total);
    found
}

/// Shrinks an isolating interval of a squarefree f until hi - lo <= eps.
pub fn refine_root(
    f: &ZPoly,
    mut lo: BigRational,
    mut hi: BigRational,
    eps: &BigRational,
) -> (BigRational, BigRational) {
    let st = Sturm::new(f);
    let two = BigRational::from(BigInt::from(2));
    while &hi - &lo > *eps {
        let mid = (&lo + &hi) / &two;
        if st.count_in(&lo, &mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

// ---------------------------------------------------------------------------
// Factorization over Q
// ---------------------------------------------------------------------------

/// Factors a nonzero integer polynomial into irreducibles over Q.
///
/// Returns (unit content as a rational-free integer scalar, list of
/// (primitive irreducible with positive leading coefficient, multiplicity)).
pub fn factor_z(f: &ZPoly) -> (BigInt, Vec<(ZPoly, usize)>) {
    assert!(!f.is_empty(), "factor of zero polynomial");
    let (prim, scalar) = zprimitive(f);
    let mut factors: Vec<(ZPoly, usize)> = Vec::new();
    // Strip powers of x.
    let mut rest = prim;
    let xmult = rest.iter().take_while(|c| c.is_zero()).count();
    if xmult > 0 {
        rest.drain(..xmult);
        factors.push((vec![BigInt::zero(), BigInt::one()], xmult));
    }
    if zdeg(&rest) >= Some(1) {
        factor_primitive(&rest, &mut factors);
    }
    factors.sort_by(|a, b| {
        a.0.len()
            .cmp(&b.0.len())
            .then_with(|| a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });
    (scalar, factors)
}

fn factor_primitive(f: &ZPoly, out: &mut Vec<(ZPoly, usize)>) {
    // Split off repeated factors first: factor the squarefree part, then
    // read multiplicities by exact division.
    let sf = squarefree_part(f);
    let mut irr = Vec::new();
    factor_squarefree(&sf, &mut irr);
    for g in irr {
        let mut m = 0usize;
        let mut rest = f.clone();
        while let Some(q) = zdiv_exact(&rest, &g) {
            m += 1;
            rest = q;
            if zdeg(&rest) < zdeg(&g) {
                break;
            }
        }
        debug_assert!(m >= 1);
        out.push((g, m));
    }
}

/// Factors a primitive squarefree polynomial of degree >= 1.
fn factor_squarefree(f: &ZPoly, out: &mut Vec<ZPoly>) {
    let d = zdeg(f).unwrap();
    if d == 1 {
        out.push(zprimitive(f).0);
        return;
    }
    // Rational roots give linear factors q x - p with p | f(0), q | lead.
    if let Some(root) = find_rational_root(f) {
        let lin = vec![-root.numer().clone(), root.denom().clone()];
        let lin = zprimitive(&lin).0;
        let q = zdiv_exact(f, &lin).expect("root division");
        out.push(lin);
        factor_squarefree(&zprimitive(&q).0, out);
        return;
    }
    if d <= 3 {
        // No rational root and degree <= 3 means irreducible.
        out.push(zprimitive(f).0);
        return;
    }
    // Mod-p pruning: degrees of factors must lie in the subset sums of the
    // factorization pattern mod several good primes.
    let mut allowed: Option<std::collections::BTreeSet<usize>> = None;
    let mut checked = 0usize;
    let mut p = 2u64;
    while checked < 3 && p < 200 {
        if good_prime(f, p) {
            let fp: fp::PolyP = f.iter().map(|c| to_u64_mod(c, p)).collect();
            if fp::irreducible_modp(&fp, p) {
                out.push(zprimitive(f).0);
                return;
            }
            let degs: Vec<usize> = fp::factor_modp(&fp, p, 1)
                .iter()
                .map(|(g, _)| fp::pdeg(g).unwrap())
                .collect();
            let sums = subset_sums(&degs);
            allowed = Some(match allowed {
                None => sums,
                Some(prev) => prev.intersection(&sums).copied().collect(),
            });
            checked += 1;
        }
        p = next_prime(p);
    }
    let allowed = allowed.unwrap_or_else(|| (0..=d).collect());
    // Kronecker: a factor of degree k is determined by its values at k+1
    // points, each dividing f at that point.
    for k in 1..=d / 2 {
        if !allowed.contains(&k) {
            continue;
        }
        if let Some(g) = kronecker_search(f, k) {
            let q = zdiv_exact(f, &g).expect("kronecker factor divides");
            factor_squarefree(&zprimitive(&g).0, out);
            factor_squarefree(&zprimitive(&q).0, out);
            return;
        }
    }
    out.push(zprimitive(f).0);
}

fn good_prime(f: &ZPoly, p: u64) -> bool {
    let d = zdeg(f).unwrap();
    if to_u64_mod(&f[d], p) == 0 {
        return false;
    }
    let fp: fp::PolyP = f.iter().map(|c| to_u64_mod(c, p)).collect();
    let dfp = fp::pderiv(&fp, p);
    if dfp.is_empty() {
        return false;
    }
    fp::pdeg(&fp::pgcd(&fp, &dfp, p)) == Some(0)
}

fn to_u64_mod(c: &BigInt, p: u64) -> u64 {
    let m = c.mod_floor(&BigInt::from(p));
    let digits = m.to_u64_digits().1;
    digits.first().copied().unwrap_or(0)
}

fn next_prime(p: u64) -> u64 {
    let mut q = p + 1;
    loop {
        if (2..q).take_while(|d| d * d <= q).all(|d| q % d != 0) && q > 1 {
            return q;
        }
        q += 1;
    }
}

fn subset_sums(degs: &[usize]) -> std::collections::BTreeSet<usize> {
    let mut sums = std::collections::BTreeSet::new();
    sums.insert(0usize);
    for &d in degs {
        let cur: Vec<usize> = sums.iter().copied().collect();
        for s in cur {
            sums.insert(s + d);
        }
    }
    sums
}

fn find_rational_root(f: &ZPoly) -> Option<BigRational> {
    let d = zdeg(f)?;
    let lead = f[d].clone();
    let cst = f[0].clone();
    if cst.is_zero() {
        return Some(BigRational::zero());
    }
    let ps = divisors(&cst.abs());
    let qs = divisors(&lead.abs());
    for q in &qs {
        for p in &ps {
            for sign in [1i32, -1] {
                let r = BigRational::new(p * BigInt::from(sign), q.clone());
                if zeval_q(f, &r).is_zero() {
                    return Some(r);
                }
            }
        }
    }
    None
}

/// All positive divisors of |n| (n nonzero), unsorted.
pub fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    assert!(!n.is_zero());
    let mut fac: Vec<(BigInt, u32)> = Vec::new();
    let mut m = n.clone();
    let mut d = BigInt::from(2);
    while &d * &d <= m {
        if (&m % &d).is_zero() {
            let mut e = 0u32;
            while (&m % &d).is_zero() {
                m /= &d;
                e += 1;
            }
            fac.push((d.clone(), e));
        }
        d += 1;
    }
    if m > BigInt::one() {
        fac.push((m, 1));
    }
    let mut out = vec![BigInt::one()];
    for (p, e) in fac {
        let cur = out.clone();
        let mut pk = BigInt::one();
        for _ in 0..e {
            pk *= &p;
            for b in &cur {
                out.push(b * &pk);
            }
        }
    }
    out
}

/// Searches for a monic-or-not factor of degree exactly k by interpolation
/// through divisor tuples of f's values at k+1 small points.
fn kronecker_search(f: &ZPoly, k: usize) -> Option<ZPoly> {
    // Evaluation points 0, 1, -1, 2, -2, ...
    let mut points: Vec<BigInt> = Vec::with_capacity(k + 1);
    let mut i = 0i64;
    while points.len() < k + 1 {
        points.push(BigInt::from(i));
        if i > 0 {
            points.push(BigInt::from(-i));
        }
        i += 1;
        points.truncate(k + 1);
    }
    let values: Vec<BigInt> = points.iter().map(|x| zeval(f, x)).collect();
    // Zero values would mean a rational root, handled earlier.
    debug_assert!(values.iter().all(|v| !v.is_zero()));
    let divisor_lists: Vec<Vec<BigInt>> = values
        .iter()
        .map(|v| {
            let mut ds = divisors(v);
            let negs: Vec<BigInt> = ds.iter().map(|d| -d).collect();
            ds.extend(negs);
            ds.sort();
            ds
        })
        .collect();
    // Lagrange basis over the chosen points, as rational polynomials.
    let basis: Vec<QPoly> = (0..=k)
        .map(|j| {
            let mut num: QPoly = vec![BigRational::one()];
            let mut den = BigRational::one();
            for (m, x) in points.iter().enumerate() {
                if m == j {
                    continue;
                }
                num = qmul(
                    &num,
                    &vec![
                        BigRational::from(-x.clone()),
                        BigRational::one(),
                    ],
                );
                den *= BigRational::from(&points[j] - x);
            }
            num.iter().map(|c| c / &den).collect()
        })
        .collect();
    // Depth-first over divisor tuples; prune by fixing the value at point 0
    // only up to sign (g and -g give the same factor).
    let mut choice = vec![0usize; k + 1];
    let mut pos = 0usize;
    loop {
        if pos == k + 1 {
            // Interpolate and test.
            let mut g: QPoly = vec![];
            for j in 0..=k {
                let c = BigRational::from(divisor_lists[j][choice[j]].clone());
                let term: QPoly = basis[j].iter().map(|b| b * &c).collect();
                g = if g.is_empty() { term } else { qadd_q(&g, &term) };
            }
            qtrim(&mut g);
            if g.len() == k + 1 && g.iter().all(|c| c.is_integer()) {
                let gz: ZPoly = g.iter().map(|c| c.to_integer()).collect();
                if zdeg(&gz) == Some(k) && zdiv_exact(f, &gz).is_some() {
                    return Some(zprimitive(&gz).0);
                }
            }
            // Backtrack.
            pos -= 1;
            loop {
                choice[pos] += 1;
                let limit = if pos == 0 {
                    divisor_lists[0].len() / 2
                } else {
                    divisor_lists[pos].len()
                };
                if choice[pos] < limit {
                    pos += 1;
                    break;
                }
                choice[pos] = 0;
                if pos == 0 {
                    return None;
                }
                pos -= 1;
            }
        } else {
            pos += 1;
        }
    }
}

fn qadd_q(f: &QPoly, g: &QPoly) -> QPoly {
    let mut out = vec![BigRational::zero(); f.len().max(g.len())];
    for (i, o) in out.iter_mut().enumerate() {
        if let Some(a) = f.get(i) {
            *o += a;
        }
        if let Some(b) = g.get(i) {
            *o += b;
        }
    }
    qtrim(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(v: &[i64]) -> ZPoly {
        let mut p: ZPoly = v.iter().map(|&x| BigInt::from(x)).collect();
        ztrim(&mut p);
        p
    }

    #[test]
    fn resultant_matches_known() {
        // Res(x^2 - 1, x - 2) = (2)^2 - 1 = 3 evaluated: product of f over
        // roots of g times lead(g)^deg f = 3.
        let f = zp(&[-1, 0, 1]);
        let g = zp(&[-2, 1]);
        assert_eq!(resultant(&f, &g), BigInt::from(3));
    }

    #[test]
    fn discriminant_cubic() {
        // disc(x^3 + px + q) = -4p^3 - 27q^2; for x^3 - x: -4(-1)^3 = 4.
        let f = zp(&[0, -1, 0, 1]);
        assert_eq!(zdiscriminant(&f), BigInt::from(4));
        // x^3 - 2: -27 * 4 = -108.
        let g = zp(&[-2, 0, 0, 1]);
        assert_eq!(zdiscriminant(&g), BigInt::from(-108));
    }

    #[test]
    fn sturm_counts() {
        // x^3 - x has roots -1, 0, 1.
        let f = zp(&[0, -1, 0, 1]);
        let st = Sturm::new(&f);
        assert_eq!(st.count_real(), 3);
        // x^2 + 1 has none.
        assert_eq!(Sturm::new(&zp(&[1, 0, 1])).count_real(), 0);
        // x^3 - 2 has one.
        assert_eq!(Sturm::new(&zp(&[-2, 0, 0, 1])).count_real(), 1);
    }

    #[test]
    fn isolation_orders_roots() {
        let f = zp(&[0, -1, 0, 1]); // roots -1, 0, 1
        let iv = isolate_real_roots(&f);
        assert_eq!(iv.len(), 3);
        for w in iv.windows(2) {
            assert!(w[0].1 <= w[1].0 || w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn factor_products() {
        // (x^2 + 1)(x - 3)
        let f = zmul(&zp(&[1, 0, 1]), &zp(&[-3, 1]));
        let (c, fac) = factor_z(&f);
        assert_eq!(c, BigInt::one());
        assert_eq!(fac.len(), 2);
        // (x^2 - 2)(x^2 - 3): no rational roots, two quadratic factors.
        let g = zmul(&zp(&[-2, 0, 1]), &zp(&[-3, 0, 1]));
        let (_, gf) = factor_z(&g);
        assert_eq!(gf.len(), 2);
        assert!(gf.iter().all(|(h, m)| zdeg(h) == Some(2) && *m == 1));
        // Irreducible quartic x^4 + 1.
        let (_, hf) = factor_z(&zp(&[1, 0, 0, 0, 1]));
        assert_eq!(hf.len(), 1);
        assert_eq!(zdeg(&hf[0].0), Some(4));
    }

    #[test]
    fn factor_with_multiplicity() {
        // (x - 1)^2 (x + 2)
        let f = zmul(&zmul(&zp(&[-1, 1]), &zp(&[-1, 1])), &zp(&[2, 1]));
        let (_, fac) = factor_z(&f);
        assert_eq!(fac.len(), 2);
        let mults: Vec<usize> = fac.iter().map(|x| x.1).collect();
        assert!(mults.contains(&2) && mults.contains(&1));
    }

    #[test]
    fn squarefree_part_strips() {
        let f = zmul(&zmul(&zp(&[-1, 1]), &zp(&[-1, 1])), &zp(&[2, 1]));
        let sf = squarefree_part(&f);
        assert_eq!(zdeg(&sf), Some(2));
        assert!(zdiv_exact(&sf, &zp(&[-1, 1])).is_some());
        assert!(zdiv_exact(&sf, &zp(&[2, 1])).is_some());
    }
}
