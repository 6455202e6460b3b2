//! Exact characteristic polynomials.
//!
//! The main route scales the matrix to integers, computes `det(xI - N)` modulo a
//! sequence of 31-bit primes by Hessenberg reduction, and lifts the coefficients
//! with the Chinese remainder theorem once the product of primes exceeds twice a
//! Hadamard-type bound. [`charpoly_faddeev_leverrier`] is an independent O(n⁴)
//! route over the rationals kept for cross-checking.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::rational::{rational_to_f64, RationalMatrix};
use super::NumError;

/// Monic characteristic polynomial `det(xI - M)`; `coeffs[k]` multiplies `x^k`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CharPoly {
    coeffs: Vec<BigRational>,
}

impl CharPoly {
    /// Wraps ascending coefficients; the leading one must equal 1.
    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Result<Self, NumError> {
        match coeffs.last() {
            Some(lead) if lead.is_one() => Ok(Self { coeffs }),
            _ => Err(NumError::NotMonic),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let magnitude = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let show_coeff = k == 0 || !magnitude.is_one();
            if show_coeff {
                if magnitude.is_integer() {
                    write!(f, "{magnitude}")?;
                } else {
                    write!(f, "({magnitude})")?;
                }
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{k}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CharPoly({self})")
    }
}

/// Characteristic polynomial of `m`, exact over the rationals.
pub fn charpoly_exact(m: &RationalMatrix) -> CharPoly {
    let n = m.order();
    let (lcd, scaled) = m.to_scaled_integers();
    let int_coeffs = integer_charpoly(n, &scaled);
    // det(xI - N/D) = D^{-n} det(DxI - N), so c_k(M) = c_k(N) / D^{n-k}.
    let mut denom = BigInt::one();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    for k in (0..=n).rev() {
        coeffs[k] = BigRational::new(int_coeffs[k].clone(), denom.clone());
        denom *= &lcd;
    }
    CharPoly { coeffs }
}

/// Faddeev–LeVerrier recursion in exact rational arithmetic.
pub fn charpoly_faddeev_leverrier(m: &RationalMatrix) -> CharPoly {
    let n = m.order();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    // aux = M_k, starting from M_0 = 0
    let mut aux = RationalMatrix::zeros(n);
    for k in 1..=n {
        let mut next = m * &aux;
        let c = coeffs[n - k + 1].clone();
        for i in 0..n {
            let v = next.get(i, i) + &c;
            next.set(i, i, v);
        }
        let am = m * &next;
        coeffs[n - k] = -am.trace() / BigRational::from_integer(BigInt::from(k));
        aux = next;
    }
    CharPoly { coeffs }
}

/// Exact equality of characteristic polynomials; for symmetric input this is similarity.
pub fn similar_exact(left: &RationalMatrix, right: &RationalMatrix) -> Result<bool, NumError> {
    if left.order() != right.order() {
        return Err(NumError::OrderMismatch {
            left: left.order(),
            right: right.order(),
        });
    }
    left.check_symmetric()?;
    right.check_symmetric()?;
    Ok(charpoly_exact(left) == charpoly_exact(right))
}

enum IntEntries {
    Small(Vec<i64>),
    Big(Vec<BigInt>),
}

impl IntEntries {
    fn reduce(&self, p: u64) -> Vec<u64> {
        match self {
            IntEntries::Small(v) => v.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect(),
            IntEntries::Big(v) => {
                let pb = BigInt::from(p);
                v.iter()
                    .map(|x| x.mod_floor(&pb).to_u64().expect("residue below modulus"))
                    .collect()
            }
        }
    }
}

fn integer_charpoly(n: usize, entries: &[BigInt]) -> Vec<BigInt> {
    let bound_bits = coefficient_bound_bits(n, entries);
    let small: Option<Vec<i64>> = entries.iter().map(|x| x.to_i64()).collect();
    let ints = match small {
        Some(v) => IntEntries::Small(v),
        None => IntEntries::Big(entries.to_vec()),
    };

    // product of primes must exceed 2^(bound_bits + 1) to recover signed values
    let needed_bits = bound_bits + 2;
    let mut acc: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    let mut modulus = BigInt::one();
    let mut have_bits = 0u64;
    let mut index = 0;
    while have_bits < needed_bits {
        let p = prime(index);
        index += 1;
        let mut h = ints.reduce(p);
        let residues = charpoly_mod_p(n, &mut h, p);
        crt_accumulate(&mut acc, &modulus, &residues, p);
        modulus *= p;
        have_bits += 30;
    }
    let half = &modulus >> 1usize;
    acc.into_iter()
        .map(|x| if x > half { x - &modulus } else { x })
        .collect()
}

/// Bits needed to bound |c_k| for every coefficient of the integer char poly.
///
/// c_{n-j} is a signed sum of the C(n, j) principal j×j minors, each bounded by the product of
/// its column norms, so |c_{n-j}| ≤ 2^n · max_col_norm^j.
fn coefficient_bound_bits(n: usize, entries: &[BigInt]) -> u64 {
    let max_sq = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let x = &entries[i * n + j];
                    x * x
                })
                .sum::<BigInt>()
        })
        .max()
        .unwrap_or_else(BigInt::zero);
    let norm_bits = max_sq.bits().div_ceil(2).max(1);
    n as u64 + n as u64 * norm_bits + 1
}

fn crt_accumulate(acc: &mut [BigInt], modulus: &BigInt, residues: &[u64], p: u64) {
    let pb = BigInt::from(p);
    let m_mod_p = modulus.mod_floor(&pb).to_u64().unwrap();
    let inv = pow_mod(m_mod_p, p - 2, p);
    for (x, &r) in acc.iter_mut().zip(residues) {
        let x_mod_p = x.mod_floor(&pb).to_u64().unwrap();
        let t = ((r + p - x_mod_p) % p) * inv % p;
        if t != 0 {
            *x += modulus * t;
        }
    }
}

/// Char poly mod p of the row-major integer matrix `h` (destroyed), ascending coefficients.
fn charpoly_mod_p(n: usize, h: &mut [u64], p: u64) -> Vec<u64> {
    let idx = |i: usize, j: usize| i * n + j;
    // reduce to upper Hessenberg by similarity transforms
    for j in 0..n.saturating_sub(2) {
        let Some(pivot) = (j + 1..n).find(|&i| h[idx(i, j)] != 0) else {
            continue;
        };
        if pivot != j + 1 {
            for c in 0..n {
                h.swap(idx(pivot, c), idx(j + 1, c));
            }
            for r in 0..n {
                h.swap(idx(r, pivot), idx(r, j + 1));
            }
        }
        let inv = pow_mod(h[idx(j + 1, j)], p - 2, p);
        for r in j + 2..n {
            let u = h[idx(r, j)] * inv % p;
            if u == 0 {
                continue;
            }
            // row_r -= u * row_{j+1}
            for c in 0..n {
                let sub = u * h[idx(j + 1, c)] % p;
                h[idx(r, c)] = (h[idx(r, c)] + p - sub) % p;
            }
            // col_{j+1} += u * col_r
            for rr in 0..n {
                h[idx(rr, j + 1)] = (h[idx(rr, j + 1)] + u * h[idx(rr, r)]) % p;
            }
        }
    }

    // p_k = (x - h_kk) p_{k-1} - sum_i h_{ik} (prod_{j=i+1..k} h_{j,j-1}) p_{i-1}
    let mut polys: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
    polys.push(vec![1]);
    for k in 1..=n {
        let prev = &polys[k - 1];
        let mut next = vec![0u64; k + 1];
        let diag = h[idx(k - 1, k - 1)];
        for (d, &c) in prev.iter().enumerate() {
            next[d + 1] = (next[d + 1] + c) % p;
            next[d] = (next[d] + p - c * diag % p) % p;
        }
        let mut t = 1u64;
        for i in (1..k).rev() {
            t = t * h[idx(i, i - 1)] % p;
            if t == 0 {
                break;
            }
            let f = t * h[idx(i - 1, k - 1)] % p;
            if f == 0 {
                continue;
            }
            for (d, &c) in polys[i - 1].iter().enumerate() {
                next[d] = (next[d] + p - f * c % p) % p;
            }
        }
        polys.push(next);
    }
    polys.pop().unwrap()
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut result = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    result
}

const CACHED_PRIMES: usize = 512;

/// The `index`-th prime below 2^31, counting down.
fn prime(index: usize) -> u64 {
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| primes_below_2_31(CACHED_PRIMES, (1 << 31) - 1));
    if index < cache.len() {
        return cache[index];
    }
    let start = cache.last().unwrap() - 2;
    primes_below_2_31(index - cache.len() + 1, start)[index - cache.len()]
}

fn primes_below_2_31(count: usize, start: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut candidate = start | 1;
    while out.len() < count {
        if is_prime(candidate) {
            out.push(candidate);
        }
        candidate -= 2;
    }
    out
}

fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    if x.is_multiple_of(2) {
        return x == 2;
    }
    let mut d = 3;
    while d * d <= x {
        if x.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}
