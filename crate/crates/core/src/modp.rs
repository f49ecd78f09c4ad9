//! Dense linear algebra over Z/p^k: products, powers, diagonalization with
//! transform tracking, kernels split into free and torsion parts, inverses
//! of unit-determinant matrices, and the stabilized idempotent of iterated
//! powers.

use crate::{Error, Result};

/// Row-major matrix over Z/m with m = p^k.
#[derive(Clone, Debug, PartialEq)]
pub struct ModMatrix {
    pub rows: usize,
    pub cols: usize,
    pub m: u64,
    pub a: Vec<u64>,
}

impl ModMatrix {
    pub fn zero(rows: usize, cols: usize, m: u64) -> Self {
        ModMatrix { rows, cols, m, a: vec![0; rows * cols] }
    }
    pub fn identity(n: usize, m: u64) -> Self {
        let mut out = Self::zero(n, n, m);
        for i in 0..n {
            out.set(i, i, 1);
        }
        out
    }
    pub fn at(&self, i: usize, j: usize) -> u64 {
        self.a[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.a[i * self.cols + j] = v % self.m;
    }
    pub fn add_at(&mut self, i: usize, j: usize, v: u64) {
        let cur = self.at(i, j);
        self.set(i, j, (cur + v % self.m) % self.m);
    }

    pub fn mul(&self, o: &ModMatrix) -> ModMatrix {
        assert_eq!(self.cols, o.rows);
        assert_eq!(self.m, o.m);
        let mut out = ModMatrix::zero(self.rows, o.cols, self.m);
        let m128 = self.m as u128;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let v = self.at(i, k);
                if v == 0 {
                    continue;
                }
                let v = v as u128;
                for j in 0..o.cols {
                    let idx = i * o.cols + j;
                    let cur = out.a[idx] as u128;
                    out.a[idx] = ((cur + v * o.at(k, j) as u128) % m128) as u64;
                }
            }
        }
        out
    }

    pub fn add(&self, o: &ModMatrix) -> ModMatrix {
        assert_eq!((self.rows, self.cols, self.m), (o.rows, o.cols, o.m));
        let mut out = self.clone();
        for i in 0..self.a.len() {
            out.a[i] = (out.a[i] + o.a[i]) % self.m;
        }
        out
    }

    pub fn sub(&self, o: &ModMatrix) -> ModMatrix {
        assert_eq!((self.rows, self.cols, self.m), (o.rows, o.cols, o.m));
        let mut out = self.clone();
        for i in 0..self.a.len() {
            out.a[i] = (out.a[i] + self.m - o.a[i]) % self.m;
        }
        out
    }

    pub fn scale(&self, c: u64) -> ModMatrix {
        let mut out = self.clone();
        let m128 = self.m as u128;
        for v in out.a.iter_mut() {
            *v = ((*v as u128 * c as u128) % m128) as u64;
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> ModMatrix {
        assert_eq!(self.rows, self.cols);
        let mut base = self.clone();
        let mut acc = ModMatrix::identity(self.rows, self.m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn transpose(&self) -> ModMatrix {
        let mut out = ModMatrix::zero(self.cols, self.rows, self.m);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j));
            }
        }
        out
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len());
        let m128 = self.m as u128;
        (0..self.rows)
            .map(|i| {
                let mut acc = 0u128;
                for j in 0..self.cols {
                    acc = (acc + self.at(i, j) as u128 * v[j] as u128) % m128;
                }
                acc as u64
            })
            .collect()
    }

    pub fn commutes_with(&self, o: &ModMatrix) -> bool {
        self.mul(o) == o.mul(self)
    }

    pub fn stack(&self, o: &ModMatrix) -> ModMatrix {
        assert_eq!(self.cols, o.cols);
        assert_eq!(self.m, o.m);
        let mut a = self.a.clone();
        a.extend_from_slice(&o.a);
        ModMatrix { rows: self.rows + o.rows, cols: self.cols, m: self.m, a }
    }
}

fn val_p(mut x: u64, p: u64) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

pub fn inv_unit(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        let r2 = r0 - q * r1;
        let s2 = s0 - q * s1;
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
    }
    assert_eq!(r0, 1, "inv_unit of non-unit");
    (s0.rem_euclid(m as i128)) as u64
}

/// Diagonalize over Z/p^k tracking column operations: returns the diagonal
/// p-valuations (capped at k) and V such that ker(A) = V * ker(D).
pub fn diagonalize(a: &ModMatrix, p: u64, k: u32) -> (Vec<u32>, ModMatrix) {
    let mut w = a.clone();
    let n = w.cols;
    let mut v = ModMatrix::identity(n, w.m);
    let steps = w.rows.min(w.cols);
    let mut dvals = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut best: Option<(usize, usize, u32)> = None;
        for i in t..w.rows {
            for j in t..w.cols {
                let val = val_p(w.at(i, j), p);
                if val == u32::MAX {
                    continue;
                }
                if best.map_or(true, |(_, _, bv)| val < bv) {
                    best = Some((i, j, val));
                }
            }
        }
        let (pi, pj, pv) = match best {
            None => {
                for _ in t..steps {
                    dvals.push(k);
                }
                return (dvals, v);
            }
            Some(b) => b,
        };
        if pi != t {
            for j in 0..w.cols {
                let (x, y) = (w.at(t, j), w.at(pi, j));
                w.set(t, j, y);
                w.set(pi, j, x);
            }
        }
        if pj != t {
            for i in 0..w.rows {
                let (x, y) = (w.at(i, t), w.at(i, pj));
                w.set(i, t, y);
                w.set(i, pj, x);
            }
            for i in 0..n {
                let (x, y) = (v.at(i, t), v.at(i, pj));
                v.set(i, t, y);
                v.set(i, pj, x);
            }
        }
        // normalize the pivot column so the pivot becomes exactly p^pv
        let piv = w.at(t, t);
        let unit = piv / p.pow(pv);
        let uinv = inv_unit(unit % w.m, w.m);
        for i in 0..w.rows {
            let x = (w.at(i, t) as u128 * uinv as u128 % w.m as u128) as u64;
            w.set(i, t, x);
        }
        for i in 0..n {
            let x = (v.at(i, t) as u128 * uinv as u128 % v.m as u128) as u64;
            v.set(i, t, x);
        }
        debug_assert_eq!(w.at(t, t), p.pow(pv) % w.m);
        for i in (t + 1)..w.rows {
            let x = w.at(i, t);
            if x == 0 {
                continue;
            }
            let f = x / p.pow(pv);
            for j in 0..w.cols {
                let sub = (f as u128 * w.at(t, j) as u128 % w.m as u128) as u64;
                let cur = w.at(i, j);
                w.set(i, j, (cur + w.m - sub) % w.m);
            }
        }
        for j in (t + 1)..w.cols {
            let x = w.at(t, j);
            if x == 0 {
                continue;
            }
            let f = x / p.pow(pv);
            for i in 0..w.rows {
                let sub = (f as u128 * w.at(i, t) as u128 % w.m as u128) as u64;
                let cur = w.at(i, j);
                w.set(i, j, (cur + w.m - sub) % w.m);
            }
            for i in 0..n {
                let sub = (f as u128 * v.at(i, t) as u128 % v.m as u128) as u64;
                let cur = v.at(i, j);
                v.set(i, j, (cur + v.m - sub) % v.m);
            }
        }
        dvals.push(pv.min(k));
    }
    (dvals, v)
}

pub struct KernelData {
    /// columns forming a basis of the free kernel summand
    pub free: Vec<Vec<u64>>,
    /// torsion generators p^{k-d} * column, with d the pivot valuation
    pub torsion: Vec<(u32, Vec<u64>)>,
    /// dimension of ker(A mod p)
    pub mod_p_dim: usize,
}

pub fn kernel(a: &ModMatrix, p: u64, k: u32) -> KernelData {
    let n = a.cols;
    let (dvals, v) = diagonalize(a, p, k);
    let dof = |j: usize| -> u32 {
        if j < dvals.len() {
            dvals[j]
        } else {
            k
        }
    };
    let col = |j: usize| -> Vec<u64> { (0..n).map(|i| v.at(i, j)).collect() };
    let mut free = Vec::new();
    let mut torsion = Vec::new();
    for j in 0..n {
        let d = dof(j);
        if d >= k {
            free.push(col(j));
        } else if d > 0 {
            let scale = p.pow(k - d);
            let c: Vec<u64> = col(j)
                .into_iter()
                .map(|x| (x as u128 * scale as u128 % a.m as u128) as u64)
                .collect();
            torsion.push((d, c));
        }
    }
    let mod_p_dim = (0..n).filter(|&j| dof(j) >= 1).count();
    KernelData { free, torsion, mod_p_dim }
}

/// Inverse of a square matrix invertible mod p.
pub fn inverse(a: &ModMatrix, p: u64) -> Result<ModMatrix> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut w = a.clone();
    let mut inv = ModMatrix::identity(n, a.m);
    for t in 0..n {
        let mut piv = None;
        for i in t..n {
            if w.at(i, t) % p != 0 {
                piv = Some(i);
                break;
            }
        }
        let piv = piv.ok_or_else(|| Error::Precondition("matrix not invertible mod p".into()))?;
        if piv != t {
            for j in 0..n {
                let (x, y) = (w.at(t, j), w.at(piv, j));
                w.set(t, j, y);
                w.set(piv, j, x);
                let (x, y) = (inv.at(t, j), inv.at(piv, j));
                inv.set(t, j, y);
                inv.set(piv, j, x);
            }
        }
        let u = inv_unit(w.at(t, t), w.m);
        for j in 0..n {
            let x = (w.at(t, j) as u128 * u as u128 % w.m as u128) as u64;
            w.set(t, j, x);
            let x = (inv.at(t, j) as u128 * u as u128 % w.m as u128) as u64;
            inv.set(t, j, x);
        }
        for i in 0..n {
            if i == t {
                continue;
            }
            let f = w.at(i, t);
            if f == 0 {
                continue;
            }
            for j in 0..n {
                let sub = (f as u128 * w.at(t, j) as u128 % w.m as u128) as u64;
                let cur = w.at(i, j);
                w.set(i, j, (cur + w.m - sub) % w.m);
                let sub = (f as u128 * inv.at(t, j) as u128 % w.m as u128) as u64;
                let cur = inv.at(i, j);
                inv.set(i, j, (cur + w.m - sub) % w.m);
            }
        }
    }
    Ok(inv)
}

/// The idempotent lim A^{n!} mod p^k: iterate B <- B^p from B = A^{phi(p^k)}
/// until stable, then certify B^2 = B.
pub fn ordinary_idempotent(a: &ModMatrix, p: u64, k: u32) -> Result<ModMatrix> {
    let phi = p.pow(k - 1) * (p - 1);
    let mut b = a.pow(phi);
    for _ in 0..64 {
        let nb = b.pow(p);
        if nb == b {
            if b.mul(&b) != b {
                return Err(Error::VerificationFailed(
                    "stabilized power is not idempotent".into(),
                ));
            }
            return Ok(b);
        }
        b = nb;
    }
    Err(Error::Precision("ordinary projector did not stabilize".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_kernel() {
        let m = 7u64.pow(4);
        let mut a = ModMatrix::identity(3, m);
        a.set(0, 1, 5);
        a.set(1, 2, 9);
        let inv = inverse(&a, 7).unwrap();
        assert_eq!(a.mul(&inv), ModMatrix::identity(3, m));
        let mut b = ModMatrix::zero(2, 3, m);
        b.set(0, 0, 1);
        b.set(1, 1, 7);
        let kd = kernel(&b, 7, 4);
        assert_eq!(kd.free.len(), 1);
        assert_eq!(kd.mod_p_dim, 2);
        assert_eq!(kd.torsion.len(), 1);
        for x in kd.free.iter().chain(kd.torsion.iter().map(|(_, c)| c)) {
            assert!(b.apply(x).iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn idempotent_examples() {
        let m = 7u64.pow(4);
        let mut a = ModMatrix::identity(2, m);
        a.set(0, 1, 3);
        let e = ordinary_idempotent(&a, 7, 4).unwrap();
        assert_eq!(e, ModMatrix::identity(2, m));
        let mut znil = ModMatrix::zero(2, 2, m);
        znil.set(0, 0, 7);
        znil.set(1, 1, 14);
        let e = ordinary_idempotent(&znil, 7, 4).unwrap();
        assert_eq!(e, ModMatrix::zero(2, 2, m));
        let mut mx = ModMatrix::zero(2, 2, m);
        mx.set(0, 0, 3);
        mx.set(1, 1, 7);
        let e = ordinary_idempotent(&mx, 7, 4).unwrap();
        let mut expect = ModMatrix::zero(2, 2, m);
        expect.set(0, 0, 1);
        assert_eq!(e, expect);
    }
}
