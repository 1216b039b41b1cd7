//! Arithmetic modulo a prime below 2^62.

pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModQ {
    q: u64,
}

impl ModQ {
    pub fn new(q: u64) -> Self {
        assert!((2..1 << 62).contains(&q), "modulus out of range");
        ModQ { q }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn reduce_u128(&self, x: u128) -> u64 {
        if self.q == MERSENNE_61 {
            // x < 2^124: fold twice
            let lo = (x as u64) & MERSENNE_61;
            let hi = x >> 61;
            let t = lo as u128 + hi;
            let lo = (t as u64) & MERSENNE_61;
            let mut r = lo + (t >> 61) as u64;
            if r >= MERSENNE_61 {
                r -= MERSENNE_61;
            }
            r
        } else {
            (x % self.q as u128) as u64
        }
    }

    pub fn from_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.q as i128) as u64
    }

    /// `sum_j a_j b_j mod q` for residues below `q < 2^62`; at most 8 products
    /// accumulate in u128 before reduction.
    #[inline]
    pub fn dot(&self, a: &[u64], b: &[u64]) -> u64 {
        let mut acc: u128 = 0;
        for (chunk_a, chunk_b) in a.chunks(8).zip(b.chunks(8)) {
            for (&x, &y) in chunk_a.iter().zip(chunk_b) {
                acc += x as u128 * y as u128;
            }
            acc = self.reduce_u128(acc) as u128;
        }
        acc as u64
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
