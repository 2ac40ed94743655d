//! Per-conductor lookup data for ℚ(ζ_n) in the power basis.
//!
//! For each conductor `n` we keep Φ_n and the reductions of x^e modulo Φ_n for
//! 0 ≤ e < n. Since ζ^n = 1, any power reduces through `e mod n`, so products
//! of basis elements never need polynomial division at runtime.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub(crate) struct FieldTables {
    pub n: u32,
    pub phi: usize,
    /// `powers[e]` is x^e mod Φ_n as a length-φ coefficient vector.
    pub powers: Vec<Vec<i64>>,
    /// Units k mod n with k ≠ 1, used by the norm-based inverse.
    pub nontrivial_units: Vec<u32>,
}

pub fn euler_totient(n: u32) -> usize {
    let mut n = n as u64;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result as usize
}

fn divisors(n: u32) -> Vec<u32> {
    let mut divs: Vec<u32> = (1..=n).filter(|d| n % d == 0).collect();
    divs.sort_unstable();
    divs
}

/// Exact division of integer polynomials (low-to-high coefficients) by a
/// monic divisor.
fn div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qlen = rem.len() - dd;
    let mut quot = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    quot
}

/// The n-th cyclotomic polynomial Φ_n, coefficients from x^0 upward, computed
/// from x^n − 1 = ∏_{d|n} Φ_d.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    assert!(n > 0, "cyclotomic_polynomial: n must be positive");
    let mut memo: HashMap<u32, Vec<i64>> = HashMap::new();
    for d in divisors(n) {
        let mut poly = vec![0i64; d as usize + 1];
        poly[0] = -1;
        poly[d as usize] = 1;
        for e in divisors(d) {
            if e < d {
                poly = div_monic(&poly, &memo[&e]);
            }
        }
        memo.insert(d, poly);
    }
    memo.remove(&n).unwrap()
}

impl FieldTables {
    fn build(n: u32) -> Self {
        let cyclo = cyclotomic_polynomial(n);
        let phi = cyclo.len() - 1;
        let mut powers = Vec::with_capacity(n as usize);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..n {
            powers.push(cur.clone());
            // multiply by x, then fold x^phi back using the monic Φ_n
            let top = cur[phi - 1];
            for i in (1..phi).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for i in 0..phi {
                    cur[i] -= top * cyclo[i];
                }
            }
        }
        let nontrivial_units = (2..n).filter(|&k| k.gcd(&n) == 1).collect();
        FieldTables {
            n,
            phi,
            powers,
            nontrivial_units,
        }
    }

    /// Reduces a wide product vector (any length) into the power basis.
    pub fn reduce(&self, wide: &[BigInt]) -> Vec<BigInt> {
        let mut out: Vec<BigInt> = vec![BigInt::zero(); self.phi];
        for (e, c) in wide.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if e < self.phi {
                out[e] += c;
                continue;
            }
            for (o, &p) in out.iter_mut().zip(&self.powers[e % self.n as usize]) {
                match p {
                    0 => {}
                    1 => *o += c,
                    -1 => *o -= c,
                    _ => *o += c * p,
                }
            }
        }
        out
    }

    /// Accumulates the unreduced product a·b into `acc` (length ≥ 2φ−1).
    pub fn mul_acc(&self, a: &[BigInt], b: &[BigInt], acc: &mut [BigInt]) {
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    acc[i + j] += x * y;
                }
            }
        }
    }

    pub fn mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        if self.phi == 1 {
            return vec![&a[0] * &b[0]];
        }
        let mut wide = vec![BigInt::zero(); 2 * self.phi - 1];
        self.mul_acc(a, b, &mut wide);
        self.reduce(&wide)
    }

    /// Applies the automorphism ζ ↦ ζ^k.
    pub fn galois(&self, a: &[BigInt], k: u32) -> Vec<BigInt> {
        let n = self.n as u64;
        let mut wide = vec![BigInt::zero(); self.n as usize];
        for (i, c) in a.iter().enumerate() {
            wide[((i as u64 * k as u64) % n) as usize] += c;
        }
        self.reduce(&wide)
    }
}

/// Rewrites `a ∈ ℚ(ζ_from)` in the basis of ℚ(ζ_to); requires from | to.
pub(crate) fn lift_vec(from: &FieldTables, to: &FieldTables, a: &[BigInt]) -> Vec<BigInt> {
    debug_assert_eq!(to.n % from.n, 0);
    let step = (to.n / from.n) as usize;
    let mut wide = vec![BigInt::zero(); to.n as usize];
    for (i, c) in a.iter().enumerate() {
        wide[(i * step) % to.n as usize] += c;
    }
    to.reduce(&wide)
}

/// Divides out the common content of `num` and `den` and makes `den` positive.
pub(crate) fn normalize(num: &mut [BigInt], den: &mut BigInt) {
    if num.iter().all(Zero::is_zero) {
        *den = BigInt::one();
        return;
    }
    if den.is_negative() {
        *den = -&*den;
        for x in num.iter_mut() {
            *x = -&*x;
        }
    }
    if den.is_one() {
        return;
    }
    let mut g = den.clone();
    for x in num.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
            if g.is_one() {
                return;
            }
        }
    }
    for x in num.iter_mut() {
        *x /= &g;
    }
    *den /= &g;
}

static CACHE: OnceLock<RwLock<HashMap<u32, Arc<FieldTables>>>> = OnceLock::new();

pub(crate) fn tables(n: u32) -> Arc<FieldTables> {
    assert!(n > 0, "conductor must be positive");
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = cache.read().unwrap().get(&n) {
        return Arc::clone(t);
    }
    let built = Arc::new(FieldTables::build(n));
    let mut w = cache.write().unwrap();
    Arc::clone(w.entry(n).or_insert(built))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(9), vec![1, 0, 0, 1, 0, 0, 1]);
        // first polynomial with a coefficient outside {-1, 0, 1}
        assert!(cyclotomic_polynomial(105).contains(&-2));
    }

    #[test]
    fn totient_matches_degree() {
        for n in 1..60 {
            assert_eq!(euler_totient(n), cyclotomic_polynomial(n).len() - 1, "n = {n}");
        }
    }

    #[test]
    fn power_table_wraps() {
        let t = tables(6);
        // ζ_6^2 = ζ_6 − 1
        assert_eq!(t.powers[2], vec![-1, 1]);
        // ζ_6^3 = −1
        assert_eq!(t.powers[3], vec![-1, 0]);
    }
}
