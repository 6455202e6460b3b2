use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::gram::OrthogonalMap;
use crate::numkernel::{dot_exact, rat, RationalMatrix, RationalVector};

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs of `R`'s
/// diagonal moved into `Q`.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OrthogonalMap {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (k, mut col) in q.column_iter_mut().enumerate() {
        if r[(k, k)] < 0.0 {
            col.neg_mut();
        }
    }
    OrthogonalMap { q }
}

/// Orthogonal matrix with rational entries, `Q = P H_1 ⋯ H_k`, where `P` is a signed
/// permutation (`P[i][perm[i]] = sign[i]`) and each `H` is the reflection
/// `I - 2 v vᵀ / (vᵀv)` through a sparse integer vector.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalOrthogonal {
    perm: Vec<usize>,
    signs: Vec<i64>,
    reflectors: Vec<RationalVector>,
}

impl RationalOrthogonal {
    pub fn permutation(perm: Vec<usize>) -> Self {
        let n = perm.len();
        Self {
            perm,
            signs: vec![1; n],
            reflectors: Vec::new(),
        }
    }

    /// Uniform signed permutation followed by `max(2, n / 3)` reflections whose vectors
    /// have between two and four entries drawn from `{±1, ±2}`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let signs = (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let count = if n >= 2 { (n / 3).max(2) } else { 0 };
        let reflectors = (0..count)
            .map(|_| {
                let support = rng.random_range(2..=n.min(4));
                let mut v = vec![BigRational::zero(); n];
                for i in index::sample(rng, n, support) {
                    let magnitude = rng.random_range(1..=2i64);
                    let sign = if rng.random::<bool>() { 1 } else { -1 };
                    v[i] = rat(sign * magnitude, 1);
                }
                v
            })
            .collect();
        Self {
            perm,
            signs,
            reflectors,
        }
    }

    pub fn order(&self) -> usize {
        self.perm.len()
    }

    fn inverse_perm(&self) -> Vec<usize> {
        let mut inv = vec![0; self.order()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        inv
    }

    pub fn to_matrix(&self) -> RationalMatrix {
        let n = self.order();
        let mut q = RationalMatrix::zeros(n);
        for (i, &p) in self.perm.iter().enumerate() {
            q.set(i, p, rat(self.signs[i], 1));
        }
        for v in &self.reflectors {
            let c = reflector_scale(v);
            // q ← q - c (q v) vᵀ
            let qv = q.mul_vec(v).expect("orders agree");
            for (i, qvi) in qv.iter().enumerate() {
                if qvi.is_zero() {
                    continue;
                }
                for (j, vj) in v.iter().enumerate() {
                    if !vj.is_zero() {
                        let updated = q.get(i, j) - &c * qvi * vj;
                        q.set(i, j, updated);
                    }
                }
            }
        }
        q
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        self.to_matrix().to_f64()
    }

    /// `Qᵀ v`.
    pub fn apply_transpose(&self, v: &[BigRational]) -> RationalVector {
        let inv = self.inverse_perm();
        let mut out: RationalVector = (0..self.order())
            .map(|a| &v[inv[a]] * rat(self.signs[inv[a]], 1))
            .collect();
        for r in &self.reflectors {
            let c = reflector_scale(r);
            let coef = &c * dot_exact(r, &out);
            for (o, ri) in out.iter_mut().zip(r) {
                if !ri.is_zero() {
                    *o -= &coef * ri;
                }
            }
        }
        out
    }

    /// `Qᵀ A Q` for symmetric `A`.
    pub fn conjugate(&self, a: &RationalMatrix) -> RationalMatrix {
        let n = self.order();
        let inv = self.inverse_perm();
        let mut out = RationalMatrix::zeros(n);
        for x in 0..n {
            for y in 0..n {
                let (i, j) = (inv[x], inv[y]);
                let value = a.get(i, j) * rat(self.signs[i] * self.signs[j], 1);
                out.set(x, y, value);
            }
        }
        for v in &self.reflectors {
            out = reflect_both_sides(&out, v);
        }
        out
    }
}

fn reflector_scale(v: &[BigRational]) -> BigRational {
    rat(2, 1) / dot_exact(v, v)
}

/// `H A H` for `H = I - c v vᵀ`, touching only rows and columns in the support of `v`.
fn reflect_both_sides(a: &RationalMatrix, v: &[BigRational]) -> RationalMatrix {
    let n = a.order();
    let c = reflector_scale(v);
    let support: Vec<usize> = (0..n).filter(|&i| !v[i].is_zero()).collect();
    let w: RationalVector = (0..n)
        .map(|i| {
            support
                .iter()
                .fold(BigRational::zero(), |acc, &k| acc + a.get(i, k) * &v[k])
        })
        .collect();
    let gamma = dot_exact(v, &w);
    let c2g = &c * &c * gamma;
    let mut out = a.clone();
    for (i, wi) in w.iter().enumerate() {
        for &j in &support {
            // - c w_i v_j
            let delta = -(&c * wi * &v[j]);
            let updated = out.get(i, j) + &delta;
            out.set(i, j, updated);
            let updated = out.get(j, i) + &delta;
            out.set(j, i, updated);
        }
    }
    for &i in &support {
        for &j in &support {
            let updated = out.get(i, j) + &c2g * &v[i] * &v[j];
            out.set(i, j, updated);
        }
    }
    out
}

/// `QᵀQ = I` in exact arithmetic.
#[cfg(test)]
fn is_exactly_orthogonal(q: &RationalMatrix) -> bool {
    &q.transpose() * q == RationalMatrix::identity(q.order())
}
