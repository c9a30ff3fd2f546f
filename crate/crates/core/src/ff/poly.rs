//! Dense univariate polynomials over a small finite field.
//!
//! Only what the tower construction needs: products, remainders, modular
//! powers, gcd and a deterministic irreducibility test.

use std::fmt::Debug;

/// Arithmetic of a finite field whose elements are plain values.
pub(crate) trait FieldOps {
    type E: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, x: &Self::E) -> bool;
    fn add(&self, x: &Self::E, y: &Self::E) -> Self::E;
    fn sub(&self, x: &Self::E, y: &Self::E) -> Self::E;
    fn mul(&self, x: &Self::E, y: &Self::E) -> Self::E;
    /// Panics on zero; callers test first.
    fn inv(&self, x: &Self::E) -> Self::E;
    /// Number of elements.
    fn order(&self) -> u64;
    /// Element with the given index in the canonical enumeration.
    fn from_index(&self, i: u64) -> Self::E;
}

/// The prime field Z/p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct PrimeField {
    pub p: u32,
}

impl FieldOps for PrimeField {
    type E = u32;

    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1
    }
    fn is_zero(&self, x: &u32) -> bool {
        *x == 0
    }
    fn add(&self, x: &u32, y: &u32) -> u32 {
        (x + y) % self.p
    }
    fn sub(&self, x: &u32, y: &u32) -> u32 {
        (x + self.p - y) % self.p
    }
    fn mul(&self, x: &u32, y: &u32) -> u32 {
        ((*x as u64 * *y as u64) % self.p as u64) as u32
    }
    fn inv(&self, x: &u32) -> u32 {
        assert!(*x % self.p != 0, "inverse of zero in F_p");
        mod_pow(*x as u64, self.p as u64 - 2, self.p as u64) as u32
    }
    fn order(&self) -> u64 {
        self.p as u64
    }
    fn from_index(&self, i: u64) -> u32 {
        (i % self.p as u64) as u32
    }
}

/// F_p[x]/(m) for a monic irreducible m; elements are coefficient vectors of
/// length deg m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ExtField {
    pub p: u32,
    pub modulus: Vec<u32>,
}

impl ExtField {
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn reduce(&self, mut v: Vec<u32>) -> Vec<u32> {
        let n = self.degree();
        let p = self.p;
        for i in (n..v.len()).rev() {
            let c = v[i];
            if c == 0 {
                continue;
            }
            v[i] = 0;
            for j in 0..n {
                let m = self.modulus[j];
                v[i - n + j] = (v[i - n + j] + (p - c) * m % p) % p;
            }
        }
        v.truncate(n);
        v.resize(n, 0);
        v
    }

    pub fn pow(&self, x: &[u32], mut e: u64) -> Vec<u32> {
        let mut base = x.to_vec();
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
}

impl FieldOps for ExtField {
    type E = Vec<u32>;

    fn zero(&self) -> Vec<u32> {
        vec![0; self.degree()]
    }
    fn one(&self) -> Vec<u32> {
        let mut v = self.zero();
        v[0] = 1;
        v
    }
    fn is_zero(&self, x: &Vec<u32>) -> bool {
        x.iter().all(|&c| c == 0)
    }
    fn add(&self, x: &Vec<u32>, y: &Vec<u32>) -> Vec<u32> {
        x.iter().zip(y).map(|(a, b)| (a + b) % self.p).collect()
    }
    fn sub(&self, x: &Vec<u32>, y: &Vec<u32>) -> Vec<u32> {
        x.iter().zip(y).map(|(a, b)| (a + self.p - b) % self.p).collect()
    }
    fn mul(&self, x: &Vec<u32>, y: &Vec<u32>) -> Vec<u32> {
        let n = self.degree();
        let p = self.p as u64;
        let mut v = vec![0u64; 2 * n - 1];
        for (i, &a) in x.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in y.iter().enumerate() {
                v[i + j] = (v[i + j] + a as u64 * b as u64) % p;
            }
        }
        self.reduce(v.into_iter().map(|c| c as u32).collect())
    }
    fn inv(&self, x: &Vec<u32>) -> Vec<u32> {
        assert!(!self.is_zero(x), "inverse of zero in F_q");
        self.pow(x, self.order() - 2)
    }
    fn order(&self) -> u64 {
        (self.p as u64).pow(self.degree() as u32)
    }
    fn from_index(&self, mut i: u64) -> Vec<u32> {
        let p = self.p as u64;
        (0..self.degree())
            .map(|_| {
                let d = (i % p) as u32;
                i /= p;
                d
            })
            .collect()
    }
}

pub(crate) fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

pub(crate) fn trim<F: FieldOps>(f: &F, mut v: Vec<F::E>) -> Vec<F::E> {
    while v.last().is_some_and(|c| f.is_zero(c)) {
        v.pop();
    }
    v
}

pub(crate) fn poly_mul<F: FieldOps>(f: &F, a: &[F::E], b: &[F::E]) -> Vec<F::E> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(f, out)
}

pub(crate) fn poly_sub<F: FieldOps>(f: &F, a: &[F::E], b: &[F::E]) -> Vec<F::E> {
    let n = a.len().max(b.len());
    let z = f.zero();
    let out = (0..n)
        .map(|i| f.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
        .collect();
    trim(f, out)
}

/// Remainder of `a` modulo a nonzero `m`.
pub(crate) fn poly_rem<F: FieldOps>(f: &F, a: &[F::E], m: &[F::E]) -> Vec<F::E> {
    let m = trim(f, m.to_vec());
    assert!(!m.is_empty(), "division by the zero polynomial");
    let mut r = trim(f, a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = f.inv(&m[dm]);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = f.mul(&r[top], &lead_inv);
        for j in 0..=dm {
            let t = f.mul(&c, &m[j]);
            r[top - dm + j] = f.sub(&r[top - dm + j], &t);
        }
        r = trim(f, r);
    }
    r
}

pub(crate) fn poly_mulmod<F: FieldOps>(
    f: &F,
    a: &[F::E],
    b: &[F::E],
    m: &[F::E],
) -> Vec<F::E> {
    poly_rem(f, &poly_mul(f, a, b), m)
}

pub(crate) fn poly_powmod<F: FieldOps>(f: &F, a: &[F::E], mut e: u64, m: &[F::E]) -> Vec<F::E> {
    let mut base = poly_rem(f, a, m);
    let mut acc = poly_rem(f, &[f.one()], m);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(f, &acc, &base, m);
        }
        base = poly_mulmod(f, &base, &base, m);
        e >>= 1;
    }
    acc
}

/// Monic gcd.
pub(crate) fn poly_gcd<F: FieldOps>(f: &F, a: &[F::E], b: &[F::E]) -> Vec<F::E> {
    let mut x = trim(f, a.to_vec());
    let mut y = trim(f, b.to_vec());
    while !y.is_empty() {
        let r = poly_rem(f, &x, &y);
        x = y;
        y = r;
    }
    if let Some(lead) = x.last().cloned() {
        let li = f.inv(&lead);
        x = x.iter().map(|c| f.mul(c, &li)).collect();
    }
    x
}

/// Prime divisors of `n`, ascending.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn is_prime(n: u64) -> bool {
    n >= 2 && prime_factors(n) == vec![n]
}

/// Rabin's test: `m` of degree n is irreducible over F iff
/// x^(|F|^n) = x mod m and gcd(m, x^(|F|^(n/r)) - x) = 1 for all primes r | n.
pub(crate) fn is_irreducible<F: FieldOps>(f: &F, m: &[F::E]) -> bool {
    let m = trim(f, m.to_vec());
    if m.len() < 2 {
        return false;
    }
    let n = m.len() - 1;
    if n == 1 {
        return true;
    }
    let q = f.order();
    let x = vec![f.zero(), f.one()];
    // frob[i] = x^(q^i) mod m
    let mut frob = vec![poly_rem(f, &x, &m)];
    for i in 0..n {
        let next = poly_powmod(f, &frob[i], q, &m);
        frob.push(next);
    }
    if poly_sub(f, &frob[n], &x).iter().any(|c| !f.is_zero(c)) {
        return false;
    }
    prime_factors(n as u64).into_iter().all(|r| {
        let h = poly_sub(f, &frob[n / r as usize], &x);
        poly_gcd(f, &m, &h).len() == 1
    })
}

/// The smallest monic irreducible of degree `n`, ordering candidates by the
/// integer whose base-|F| digits are the low coefficients c_0, c_1, ...
pub(crate) fn smallest_irreducible<F: FieldOps>(f: &F, n: usize) -> Vec<F::E> {
    let q = f.order();
    let total = q.checked_pow(n as u32).expect("modulus search space overflow");
    for idx in 0..total {
        let mut rest = idx;
        let mut cand = Vec::with_capacity(n + 1);
        for _ in 0..n {
            cand.push(f.from_index(rest % q));
            rest /= q;
        }
        cand.push(f.one());
        if is_irreducible(f, &cand) {
            return cand;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_has_root(p: u32, m: &[u32]) -> bool {
        (0..p).any(|x| {
            let mut acc = 0u64;
            for c in m.iter().rev() {
                acc = (acc * x as u64 + *c as u64) % p as u64;
            }
            acc == 0
        })
    }

    #[test]
    fn irreducibility_matches_root_test_for_small_degrees() {
        // Degrees 2 and 3 are irreducible iff root-free.
        for p in [3u32, 5, 7] {
            let f = PrimeField { p };
            for deg in 2..=3usize {
                for idx in 0..(p as u64).pow(deg as u32) {
                    let mut m = Vec::new();
                    let mut r = idx;
                    for _ in 0..deg {
                        m.push((r % p as u64) as u32);
                        r /= p as u64;
                    }
                    m.push(1);
                    assert_eq!(is_irreducible(&f, &m), !brute_has_root(p, &m), "{m:?}");
                }
            }
        }
    }

    #[test]
    fn counts_irreducible_quartics_over_f3() {
        // Gauss: (3^4 - 3^2) / 4 = 18.
        let f = PrimeField { p: 3 };
        let mut count = 0;
        for idx in 0..81u64 {
            let mut m = Vec::new();
            let mut r = idx;
            for _ in 0..4 {
                m.push((r % 3) as u32);
                r /= 3;
            }
            m.push(1);
            if is_irreducible(&f, &m) {
                count += 1;
            }
        }
        assert_eq!(count, 18);
    }

    #[test]
    fn smallest_quadratic_mod_three_is_x2_plus_1() {
        assert_eq!(smallest_irreducible(&PrimeField { p: 3 }, 2), vec![1, 0, 1]);
    }
}
