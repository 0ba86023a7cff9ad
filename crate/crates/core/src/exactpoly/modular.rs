//! Kernel computations modulo word-size primes, with rational reconstruction.
//!
//! Results are candidates only; callers verify them exactly.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Q;
use crate::linalg::QMat;

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for b in BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for b in BASES {
        let mut x = pow_mod(b, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// The largest primes below 2^62.
pub(crate) fn primes() -> &'static [u64] {
    static P: OnceLock<Vec<u64>> = OnceLock::new();
    P.get_or_init(|| {
        let mut out = Vec::new();
        let mut n = (1u64 << 62) - 1;
        while out.len() < 12 {
            if is_prime(n) {
                out.push(n);
            }
            n -= 2;
        }
        out
    })
}

/// Rows scaled to integers.
fn integer_rows(a: &QMat) -> Vec<Vec<BigInt>> {
    (0..a.nrows())
        .map(|i| {
            let row = a.row(i);
            let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
        })
        .collect()
}

fn reduce(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

/// Reduced row echelon form mod `p`; returns pivot columns and the kernel
/// basis with each free coordinate set to one in turn.
fn kernel_mod(rows: &[Vec<BigInt>], ncols: usize, p: u64) -> (Vec<usize>, Vec<Vec<u64>>) {
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|x| reduce(x, p)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(pr) = (row..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(row, pr);
        let inv = pow_mod(m[row][col], p - 2, p);
        for v in m[row].iter_mut() {
            *v = mul_mod(*v, inv, p);
        }
        for i in 0..m.len() {
            if i != row && m[i][col] != 0 {
                let f = m[i][col];
                for j in 0..ncols {
                    let t = mul_mod(f, m[row][j], p);
                    m[i][j] = (m[i][j] + p - t) % p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m[r][f]) % p;
            }
            v
        })
        .collect();
    (pivots, kernel)
}

/// Dimension of the kernel modulo one prime. Zero here implies zero over Q.
pub(crate) fn nullity_mod_p(a: &QMat) -> usize {
    if a.nrows() == 0 {
        return a.ncols();
    }
    kernel_mod(&integer_rows(a), a.ncols(), primes()[0]).1.len()
}

/// Rational `n/d` with `n = a d mod m`, `|n|, d <= sqrt(m/2)`.
fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<Q> {
    let bound = (m >> 1u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    Some(Q::new(r1, t1))
}

/// Candidate generator of a one-dimensional kernel, normalized so the free
/// coordinate is one. `None` when the modular data is inconsistent or
/// reconstruction does not stabilize.
pub(crate) fn kernel_vector_candidate(a: &QMat) -> Option<Vec<Q>> {
    let rows = integer_rows(a);
    let n = a.ncols();
    let mut modulus = BigInt::one();
    let mut acc: Vec<BigInt> = vec![BigInt::zero(); n];
    let mut ref_pivots: Option<Vec<usize>> = None;
    let mut last: Option<Vec<Q>> = None;
    for &p in primes() {
        let (pivots, kernel) = kernel_mod(&rows, n, p);
        if kernel.len() != 1 {
            return None;
        }
        match &ref_pivots {
            None => ref_pivots = Some(pivots),
            Some(rp) if *rp != pivots => return None,
            _ => {}
        }
        let bp = BigInt::from(p);
        // CRT: x = acc + modulus * ((v - acc) * modulus^{-1} mod p)
        let minv = pow_mod(reduce(&modulus, p), p - 2, p);
        for (x, &v) in acc.iter_mut().zip(&kernel[0]) {
            let diff = (v + p - reduce(x, p)) % p;
            let k = mul_mod(diff, minv, p);
            *x += &modulus * BigInt::from(k);
        }
        modulus *= bp;
        let rec: Option<Vec<Q>> = acc
            .iter()
            .map(|x| rational_reconstruct(x, &modulus))
            .collect();
        if let Some(r) = rec {
            if last.as_ref() == Some(&r) {
                return Some(r);
            }
            last = Some(r);
        }
    }
    None
}
