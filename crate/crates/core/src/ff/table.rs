//! Zech-logarithm tables for fast whole-field sweeps.
//!
//! Every nonzero element is g^i for a fixed primitive g; products add logs
//! and sums use the Zech table Z(n) = log(1 + g^n). Building the tables walks
//! the powers of g once in the F_p-basis {1, g, ..., g^(n-1)}, where
//! multiplication by g is a shift followed by one reduction step.

use std::sync::Arc;

use super::poly::{mod_pow, prime_factors};
use super::{FFElement, FfError, FieldTower};

/// Sentinel log of zero.
pub const ZERO_LOG: u32 = u32::MAX;

/// Largest field this engine accepts; logs must fit comfortably in u32.
const MAX_TABLE: u128 = 1 << 30;

/// Log/Zech/trace tables for the top field of a tower.
pub struct LogTable {
    tower: Arc<FieldTower>,
    p: u32,
    /// Q - 1.
    order: u32,
    zech: Vec<u32>,
    trace: Vec<u8>,
    /// Packed absolute coordinates → log.
    log: Vec<u32>,
    /// Tower coordinates → coordinates in the basis of powers of g.
    to_abs: Vec<Vec<u32>>,
}

impl std::fmt::Debug for LogTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LogTable({:?}, size={})", self.tower, self.order as u64 + 1)
    }
}

impl LogTable {
    pub fn build(tower: &Arc<FieldTower>, budget: u64) -> Result<Self, FfError> {
        let size = tower.size();
        if size > budget as u128 || size > MAX_TABLE {
            return Err(FfError::BudgetExceeded { size, budget });
        }
        let p = tower.p();
        let n = tower.degree();
        let q = size as u64;
        let order = q - 1;
        let primes = prime_factors(order);

        let g = (2..size)
            .map(|i| tower.from_index(i))
            .find(|c| primes.iter().all(|&r| !c.pow((order / r) as u128).is_one()))
            .expect("multiplicative groups of finite fields are cyclic");

        // Columns: tower coordinates of g^0 .. g^n.
        let mut powers: Vec<FFElement> = vec![tower.one()];
        for i in 0..n {
            let next = &powers[i] * &g;
            powers.push(next);
        }
        let basis: Vec<Vec<u32>> = (0..n)
            .map(|r| (0..n).map(|c| powers[c].coeffs()[r]).collect())
            .collect();
        let to_abs = invert_mod_p(&basis, p);
        // g^n = Σ m_j g^j.
        let top = mat_vec(&to_abs, powers[n].coeffs(), p);
        let tr: Vec<u32> = powers[..n].iter().map(|x| x.absolute_trace()).collect();

        let mut log = vec![ZERO_LOG; q as usize];
        let mut exp = vec![0u32; order as usize];
        let mut trace = vec![0u8; order as usize];
        let mut cur = vec![0u32; n];
        cur[0] = 1;
        for i in 0..order as usize {
            let mut packed = 0u64;
            let mut t = 0u64;
            for j in (0..n).rev() {
                packed = packed * p as u64 + cur[j] as u64;
                t += cur[j] as u64 * tr[j] as u64;
            }
            log[packed as usize] = i as u32;
            exp[i] = packed as u32;
            trace[i] = (t % p as u64) as u8;
            let carry = cur[n - 1];
            for j in (1..n).rev() {
                cur[j] = (cur[j - 1] + carry * top[j]) % p;
            }
            cur[0] = (carry * top[0]) % p;
        }
        debug_assert!(cur[0] == 1 && cur[1..].iter().all(|&c| c == 0));

        let zech = exp
            .iter()
            .map(|&e| {
                let d0 = e % p;
                let bumped = if d0 == p - 1 { e - (p - 1) } else { e + 1 };
                log[bumped as usize]
            })
            .collect();

        Ok(LogTable {
            tower: Arc::clone(tower),
            p,
            order: order as u32,
            zech,
            trace,
            log,
            to_abs,
        })
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    /// Q - 1, the number of nonzero elements.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Log of a tower element (which must live in this table's tower, or in
    /// a tower with the same F_q when the element lies in F_q).
    pub fn log_of(&self, x: &FFElement) -> Result<u32, FfError> {
        let x = if x.tower() == &self.tower {
            x.clone()
        } else {
            x.to_tower(&self.tower)?
        };
        let abs = mat_vec(&self.to_abs, x.coeffs(), self.p);
        let packed = abs
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * self.p as u64 + d as u64);
        Ok(self.log[packed as usize])
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == ZERO_LOG || b == ZERO_LOG {
            return ZERO_LOG;
        }
        let s = a as u64 + b as u64;
        (s % self.order as u64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if a == ZERO_LOG {
            return b;
        }
        if b == ZERO_LOG {
            return a;
        }
        let d = if b >= a { b - a } else { b + self.order - a };
        let z = self.zech[d as usize];
        if z == ZERO_LOG {
            ZERO_LOG
        } else {
            self.mul(a, z)
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == ZERO_LOG {
            a
        } else {
            self.mul(a, self.order / 2)
        }
    }

    #[inline]
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == ZERO_LOG {
            None
        } else if a == 0 {
            Some(0)
        } else {
            Some(self.order - a)
        }
    }

    #[inline]
    pub fn pow(&self, a: u32, e: i64) -> Option<u32> {
        if a == ZERO_LOG {
            return match e {
                0 => Some(0),
                e if e > 0 => Some(ZERO_LOG),
                _ => None,
            };
        }
        let o = self.order as i128;
        Some((((a as i128) * (e as i128)).rem_euclid(o)) as u32)
    }

    /// Absolute trace to F_p.
    #[inline]
    pub fn trace(&self, a: u32) -> u32 {
        if a == ZERO_LOG {
            0
        } else {
            self.trace[a as usize] as u32
        }
    }

    /// Horner evaluation of Σ coeffs[i] x^i with coefficients given as logs.
    #[inline]
    pub fn eval(&self, coeffs: &[u32], x: u32) -> u32 {
        let mut acc = ZERO_LOG;
        for &c in coeffs.iter().rev() {
            acc = self.add(self.mul(acc, x), c);
        }
        acc
    }

    /// Nonzero squares have even log (Q is odd).
    #[inline]
    pub fn is_square(&self, a: u32) -> bool {
        a == ZERO_LOG || a % 2 == 0
    }

    /// One square root of a square (the other is its negative).
    #[inline]
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        if a == ZERO_LOG {
            Some(a)
        } else if a % 2 == 0 {
            Some(a / 2)
        } else {
            None
        }
    }

    /// The element g^i as a tower element (slow; for tests and diagnostics).
    pub fn element(&self, a: u32) -> FFElement {
        if a == ZERO_LOG {
            return self.tower.zero();
        }
        let packed = self
            .log
            .iter()
            .position(|&l| l == a)
            .expect("log in range") as u64;
        // packed abs coordinates → tower coordinates through the inverse map.
        let from_abs = invert_mod_p(&self.to_abs, self.p);
        let mut abs = Vec::with_capacity(self.tower.degree());
        let mut r = packed;
        for _ in 0..self.tower.degree() {
            abs.push((r % self.p as u64) as u32);
            r /= self.p as u64;
        }
        self.tower.element(&mat_vec(&from_abs, &abs, self.p))
    }
}

fn mat_vec(m: &[Vec<u32>], v: &[u32], p: u32) -> Vec<u32> {
    m.iter()
        .map(|row| {
            (row.iter()
                .zip(v)
                .map(|(&a, &b)| a as u64 * b as u64)
                .sum::<u64>()
                % p as u64) as u32
        })
        .collect()
}

/// Gauss–Jordan inverse over F_p; panics on a singular matrix.
fn invert_mod_p(m: &[Vec<u32>], p: u32) -> Vec<Vec<u32>> {
    let n = m.len();
    let pm = p as u64;
    let mut aug: Vec<Vec<u64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<u64> = row.iter().map(|&x| x as u64).collect();
            r.extend((0..n).map(|j| u64::from(i == j)));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| aug[r][col] % pm != 0)
            .expect("basis of powers of a primitive element is invertible");
        aug.swap(col, piv);
        let inv = mod_pow(aug[col][col], pm - 2, pm);
        for x in aug[col].iter_mut() {
            *x = *x * inv % pm;
        }
        for r in 0..n {
            if r != col && aug[r][col] != 0 {
                let f = aug[r][col];
                for c in 0..2 * n {
                    aug[r][c] = (aug[r][c] + (pm - f) * aug[col][c]) % pm;
                }
            }
        }
    }
    aug.into_iter()
        .map(|r| r[n..].iter().map(|&x| x as u32).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::build_tower;

    #[test]
    fn table_arithmetic_agrees_with_tower_arithmetic() {
        for (p, a, k) in [(3, 1, 3), (3, 2, 2), (5, 1, 2), (7, 1, 1), (3, 1, 1)] {
            let t = build_tower(p, a, k).unwrap();
            let tab = LogTable::build(&t, 10_000).unwrap();
            let elems: Vec<_> = t.enumerate(10_000).unwrap().iter().collect();
            let logs: Vec<u32> = elems.iter().map(|x| tab.log_of(x).unwrap()).collect();
            assert_eq!(logs[0], ZERO_LOG);
            for (x, &lx) in elems.iter().zip(&logs) {
                assert_eq!(tab.trace(lx), x.absolute_trace());
                assert_eq!(tab.log_of(&-x).unwrap(), tab.neg(lx));
                for (y, &ly) in elems.iter().zip(&logs).step_by(3) {
                    assert_eq!(tab.log_of(&(x * y)).unwrap(), tab.mul(lx, ly));
                    assert_eq!(tab.log_of(&(x + y)).unwrap(), tab.add(lx, ly));
                }
            }
        }
    }

    #[test]
    fn base_field_elements_embed_through_log_of() {
        let base = build_tower(3, 2, 1).unwrap();
        let top = build_tower(3, 2, 3).unwrap();
        let tab = LogTable::build(&top, 1000).unwrap();
        let i = base.element(&[0, 1]);
        let li = tab.log_of(&i).unwrap();
        assert_eq!(tab.mul(li, li), tab.log_of(&top.from_u32(2)).unwrap());
        assert_eq!(tab.element(li), top.element(&[0, 1]));
    }
}
