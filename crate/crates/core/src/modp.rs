//! Arithmetic in GF(p) for word-sized primes and exact rank by elimination.

/// Default evaluation prime, 2^62 - 57.
pub const DEFAULT_PRIME: u64 = (1u64 << 62) - 57;

#[inline]
pub fn add(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub fn sub(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        p - (b - a)
    }
}

#[inline]
pub fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base, p);
        }
        base = mul(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse by Fermat; `a` must be nonzero mod the prime `p`.
pub fn inv(a: u64, p: u64) -> Option<u64> {
    if a.is_multiple_of(p) {
        None
    } else {
        Some(pow(a, p - 2, p))
    }
}

/// Reduce a signed big integer into `[0, p)`.
pub fn reduce_bigint(v: &num_bigint::BigInt, p: u64) -> u64 {
    use num_bigint::Sign;
    use num_traits::ToPrimitive;
    let m = (v.magnitude() % p).to_u64().expect("residue fits in u64");
    match v.sign() {
        Sign::Minus if m != 0 => p - m,
        _ => m,
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(small) {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Rank of a dense matrix over GF(p). The matrix is consumed as scratch space.
pub fn rank(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv_pivot = inv(rows[rank][col], p).expect("nonzero pivot");
        for r in (rank + 1)..rows.len() {
            let factor = rows[r][col];
            if factor == 0 {
                continue;
            }
            let scale = mul(factor, inv_pivot, p);
            let (top, bottom) = rows.split_at_mut(r);
            let pivot_row = &top[rank];
            for (dst, &src) in bottom[0][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst = sub(*dst, mul(scale, src, p), p);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}
