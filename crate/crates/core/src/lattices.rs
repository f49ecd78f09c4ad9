//! Lattices in B as free rank-4 O_F-modules (O_F Euclidean at the supported
//! degrees): canonical HNF bases, orders and saturation to maximal orders,
//! the standard Eichler level cut, short vector enumeration with exact
//! arithmetic, unit groups, the ideal isomorphism test, |v|+1 neighbors, the
//! Eichler mass, and class sets certified by the mass formula.

use crate::arith::{big, floor_sqrt_rat, rat};
use crate::basefield::{FieldElem, KvElem, PrimeIdeal, TotallyRealField};
use crate::quatalg::{LocalSplitting, PadicMat, QuatElem, QuaternionAlgebra};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Euclidean division and HNF over O_F
// ---------------------------------------------------------------------------

/// Nearest-integer division a = q b + r with |N(r)| < |N(b)|, valid for the
/// norm-Euclidean fields supported here (Q and Q(sqrt D), D in {2,3,5,13}).
pub fn euclid_div(f: &TotallyRealField, a: &FieldElem, b: &FieldElem) -> (FieldElem, FieldElem) {
    assert!(!b.is_zero());
    let quo = f.div(a, b);
    let q = FieldElem::new(round_nearest(&quo.a), round_nearest(&quo.b));
    let r = f.sub(a, &f.mul(&q, b));
    debug_assert!(
        f.norm(&r).abs() < f.norm(b).abs(),
        "euclidean division failed; base field not in the supported list"
    );
    (q, r)
}

fn round_nearest(x: &BigRational) -> BigRational {
    let shifted = x + BigRational::new(big(1), big(2));
    BigRational::from_integer(shifted.floor().to_integer())
}

/// Row HNF over O_F for a rectangular system; entries may be fractional
/// (the module structure is over O_F). Returns the canonical staircase basis.
pub fn hnf_rows(f: &TotallyRealField, rows: Vec<Vec<FieldElem>>, ncols: usize) -> Vec<Vec<FieldElem>> {
    let mut work: Vec<Vec<FieldElem>> = rows
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut result: Vec<Vec<FieldElem>> = Vec::new();
    for col in 0..ncols {
        let mut pivot: Option<Vec<FieldElem>> = None;
        let mut rest: Vec<Vec<FieldElem>> = Vec::new();
        for row in work.into_iter() {
            if row[col].is_zero() {
                rest.push(row);
                continue;
            }
            match pivot {
                None => pivot = Some(row),
                Some(ref mut p) => {
                    let mut r = row;
                    loop {
                        if r[col].is_zero() {
                            break;
                        }
                        let (q, _) = euclid_div(f, &r[col], &p[col]);
                        for k in 0..ncols {
                            let t = f.mul(&q, &p[k]);
                            r[k] = f.sub(&r[k], &t);
                        }
                        if r[col].is_zero() {
                            break;
                        }
                        std::mem::swap(p, &mut r);
                    }
                    if r.iter().any(|x| !x.is_zero()) {
                        rest.push(r);
                    }
                }
            }
        }
        if let Some(mut p) = pivot {
            let unit_fix = f.div(&f.totally_positive_associate(&p[col]), &p[col]);
            for k in 0..ncols {
                p[k] = f.mul(&p[k], &unit_fix);
            }
            result.push(p);
        }
        work = rest;
    }
    debug_assert!(work.iter().all(|r| r.iter().all(|x| x.is_zero())));
    // reduce entries above each pivot for canonicity
    let pivots: Vec<usize> = result
        .iter()
        .map(|r| r.iter().position(|x| !x.is_zero()).unwrap())
        .collect();
    for i in 0..result.len() {
        for jx in (i + 1)..result.len() {
            let pc = pivots[jx];
            if result[i][pc].is_zero() {
                continue;
            }
            let (q, _) = euclid_div(f, &result[i][pc].clone(), &result[jx][pc].clone());
            for k in 0..ncols {
                let t = f.mul(&q, &result[jx][k]);
                result[i][k] = f.sub(&result[i][k], &t);
            }
        }
    }
    result
}

/// Generators over O_F of {c : sum_i c_i row_i = 0}.
pub fn kernel_rows(f: &TotallyRealField, rows: &[Vec<FieldElem>], ncols: usize) -> Vec<Vec<FieldElem>> {
    let n = rows.len();
    let mut aug: Vec<Vec<FieldElem>> = Vec::with_capacity(n);
    for (i, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        for jx in 0..n {
            v.push(if jx == i { FieldElem::one() } else { FieldElem::zero() });
        }
        aug.push(v);
    }
    let h = hnf_rows(f, aug, ncols + n);
    let mut out = Vec::new();
    for r in h {
        if r[..ncols].iter().all(|x| x.is_zero()) {
            out.push(r[ncols..].to_vec());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Free rank-4 lattices in B
// ---------------------------------------------------------------------------

/// A full O_F-lattice in B with canonical HNF basis (rows of coordinates in
/// the F-basis {1, s, j, sj}).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FLattice {
    pub rows: Vec<Vec<FieldElem>>,
}

pub fn quat_coords(b: &QuatElem) -> Vec<FieldElem> {
    vec![b.x.x.clone(), b.x.y.clone(), b.y.x.clone(), b.y.y.clone()]
}

pub fn quat_from_coords(v: &[FieldElem]) -> QuatElem {
    QuatElem::new(
        crate::cmfield::KElem::new(v[0].clone(), v[1].clone()),
        crate::cmfield::KElem::new(v[2].clone(), v[3].clone()),
    )
}

impl FLattice {
    pub fn from_generators(f: &TotallyRealField, gens: &[QuatElem]) -> FLattice {
        let rows = gens.iter().map(quat_coords).collect();
        FLattice { rows: hnf_rows(f, rows, 4) }
    }

    pub fn basis_quats(&self) -> Vec<QuatElem> {
        self.rows.iter().map(|r| quat_from_coords(r)).collect()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
    pub fn is_full(&self) -> bool {
        self.rank() == 4
    }

    /// O_F-coordinates of x in this basis if x lies in the lattice.
    pub fn coords_of(&self, f: &TotallyRealField, x: &QuatElem) -> Option<Vec<FieldElem>> {
        let mut v = quat_coords(x);
        let mut out = vec![FieldElem::zero(); self.rows.len()];
        for (i, row) in self.rows.iter().enumerate() {
            let pc = row.iter().position(|e| !e.is_zero()).unwrap();
            if v[..pc].iter().any(|e| !e.is_zero()) {
                return None;
            }
            if v[pc].is_zero() {
                continue;
            }
            let c = f.div(&v[pc], &row[pc]);
            if !c.is_integral() {
                return None;
            }
            for k in 0..4 {
                let t = f.mul(&c, &row[k]);
                v[k] = f.sub(&v[k], &t);
            }
            out[i] = c;
        }
        if v.iter().all(|e| e.is_zero()) {
            Some(out)
        } else {
            None
        }
    }

    pub fn contains(&self, f: &TotallyRealField, x: &QuatElem) -> bool {
        self.coords_of(f, x).is_some()
    }

    pub fn contains_lattice(&self, f: &TotallyRealField, other: &FLattice) -> bool {
        other.basis_quats().iter().all(|b| self.contains(f, b))
    }

    pub fn equal(&self, other: &FLattice) -> bool {
        self.rows == other.rows
    }

    pub fn sum(&self, f: &TotallyRealField, other: &FLattice) -> FLattice {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.clone());
        FLattice { rows: hnf_rows(f, rows, 4) }
    }

    /// Lattice product: span of pairwise algebra products.
    pub fn product(&self, alg: &QuaternionAlgebra, other: &FLattice) -> FLattice {
        let mut gens = Vec::with_capacity(16);
        for a in self.basis_quats() {
            for b in other.basis_quats() {
                gens.push(alg.mul(&a, &b));
            }
        }
        FLattice::from_generators(alg.field(), &gens)
    }

    pub fn scale_quat_left(&self, alg: &QuaternionAlgebra, x: &QuatElem) -> FLattice {
        let gens: Vec<QuatElem> = self.basis_quats().iter().map(|b| alg.mul(x, b)).collect();
        FLattice::from_generators(alg.field(), &gens)
    }

    pub fn scale_quat_right(&self, alg: &QuaternionAlgebra, x: &QuatElem) -> FLattice {
        let gens: Vec<QuatElem> = self.basis_quats().iter().map(|b| alg.mul(b, x)).collect();
        FLattice::from_generators(alg.field(), &gens)
    }

    pub fn scale_field(&self, alg: &QuaternionAlgebra, c: &FieldElem) -> FLattice {
        let gens: Vec<QuatElem> = self.basis_quats().iter().map(|b| alg.scale_f(b, c)).collect();
        FLattice::from_generators(alg.field(), &gens)
    }

    pub fn conj_lattice(&self, alg: &QuaternionAlgebra) -> FLattice {
        let gens: Vec<QuatElem> = self.basis_quats().iter().map(|b| alg.conj(b)).collect();
        FLattice::from_generators(alg.field(), &gens)
    }

    /// Intersection of two full lattices.
    pub fn intersect(&self, f: &TotallyRealField, other: &FLattice) -> FLattice {
        let mut rows: Vec<Vec<FieldElem>> = Vec::new();
        for r in &self.rows {
            rows.push(r.clone());
        }
        for r in &other.rows {
            rows.push(r.iter().map(|x| f.neg(x)).collect());
        }
        let ker = kernel_rows(f, &rows, 4);
        let mut gens = Vec::new();
        for k in &ker {
            let mut acc = vec![FieldElem::zero(); 4];
            for (i, c) in k[..self.rows.len()].iter().enumerate() {
                for t in 0..4 {
                    let term = f.mul(c, &self.rows[i][t]);
                    acc[t] = f.add(&acc[t], &term);
                }
            }
            gens.push(acc);
        }
        FLattice { rows: hnf_rows(f, gens, 4) }
    }

    /// Generator of the index ideal [self : other] for other inside self.
    pub fn index_ideal(&self, f: &TotallyRealField, other: &FLattice) -> FieldElem {
        let mut coeffs: Vec<Vec<FieldElem>> = Vec::new();
        for b in other.basis_quats() {
            let c = self.coords_of(f, &b).expect("index_ideal: not a sublattice");
            coeffs.push(c);
        }
        let det = det4(f, &coeffs);
        f.totally_positive_associate(&det)
    }

    pub fn det_gen(&self, f: &TotallyRealField) -> FieldElem {
        f.totally_positive_associate(&det4(f, &self.rows))
    }

    /// Z-basis: the O_F-basis multiplied through {1, w}.
    pub fn z_basis(&self, alg: &QuaternionAlgebra) -> Vec<QuatElem> {
        let mut out = Vec::new();
        let omega = FieldElem::new(BigRational::zero(), BigRational::one());
        for b in self.basis_quats() {
            out.push(b.clone());
            if alg.field().degree == 2 {
                out.push(alg.scale_f(&b, &omega));
            }
        }
        out
    }

    /// Gram matrix of Tr_{F/Q}(Trd(x ybar)) on the Z-basis.
    pub fn gram(&self, alg: &QuaternionAlgebra) -> Vec<Vec<BigRational>> {
        let zb = self.z_basis(alg);
        let f = alg.field();
        let n = zb.len();
        let mut g = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for jx in i..n {
                let v = f.trace(&alg.trd(&alg.mul(&zb[i], &alg.conj(&zb[jx]))));
                g[i][jx] = v.clone();
                g[jx][i] = v;
            }
        }
        g
    }

    /// Totally positive generator of Nr(I), the ideal generated by reduced
    /// norms of lattice elements.
    pub fn norm_ideal_gen(&self, alg: &QuaternionAlgebra) -> FieldElem {
        let f = alg.field();
        let zb = self.z_basis(alg);
        let mut vals: Vec<FieldElem> = Vec::new();
        for i in 0..zb.len() {
            vals.push(alg.nrd(&zb[i]));
            for jx in (i + 1)..zb.len() {
                vals.push(alg.trd(&alg.mul(&zb[i], &alg.conj(&zb[jx]))));
            }
        }
        ideal_gen(f, &vals)
    }
}

fn det4(f: &TotallyRealField, m: &[Vec<FieldElem>]) -> FieldElem {
    assert_eq!(m.len(), 4, "det4 needs a full-rank basis");
    let mut det = FieldElem::zero();
    for (p, sgn) in permutations4().iter() {
        let mut term = FieldElem::from_int(*sgn);
        for i in 0..4 {
            term = f.mul(&term, &m[i][p[i]]);
        }
        det = f.add(&det, &term);
    }
    det
}

fn permutations4() -> [([usize; 4], i64); 24] {
    let mut out = [([0usize; 4], 0i64); 24];
    let mut idx = 0;
    let items = [0usize, 1, 2, 3];
    fn sign(p: &[usize; 4]) -> i64 {
        let mut s = 1i64;
        for i in 0..4 {
            for jx in (i + 1)..4 {
                if p[i] > p[jx] {
                    s = -s;
                }
            }
        }
        s
    }
    for a in items {
        for b in items {
            if b == a {
                continue;
            }
            for c in items {
                if c == a || c == b {
                    continue;
                }
                let d = 6 - a - b - c;
                let p = [a, b, c, d];
                out[idx] = (p, sign(&p));
                idx += 1;
            }
        }
    }
    out
}

/// A generator of the O_F-ideal spanned by the given elements.
pub fn ideal_gen(f: &TotallyRealField, vals: &[FieldElem]) -> FieldElem {
    let nz: Vec<&FieldElem> = vals.iter().filter(|v| !v.is_zero()).collect();
    assert!(!nz.is_empty(), "ideal_gen of the zero ideal");
    if f.degree == 1 {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for v in &nz {
            num = num.gcd(v.a.numer());
            den = den.lcm(v.a.denom());
        }
        return FieldElem::from_rat(BigRational::new(num, den));
    }
    let rows: Vec<Vec<FieldElem>> = nz.iter().map(|v| vec![(*v).clone()]).collect();
    let h = hnf_rows(f, rows, 1);
    assert_eq!(h.len(), 1);
    f.totally_positive_associate(&h[0][0])
}

// ---------------------------------------------------------------------------
// Short vectors (Fincke-Pohst with exact rational bounds)
// ---------------------------------------------------------------------------

/// All nonzero integer vectors x with x^T G x <= bound, one of each +-pair
/// (the one whose first nonzero coordinate is positive).
pub fn short_vectors(g: &[Vec<BigRational>], bound: &BigRational) -> Vec<Vec<i64>> {
    let n = g.len();
    let mut d = vec![BigRational::zero(); n];
    let mut l = vec![vec![BigRational::zero(); n]; n];
    let mut m: Vec<Vec<BigRational>> = g.to_vec();
    for k in 0..n {
        d[k] = m[k][k].clone();
        assert!(d[k].is_positive(), "short_vectors: form not positive definite");
        for jx in (k + 1)..n {
            l[k][jx] = &m[k][jx] / &d[k];
        }
        for i in (k + 1)..n {
            for jx in (k + 1)..n {
                let t = &m[k][i] * &m[k][jx] / &d[k];
                m[i][jx] = &m[i][jx] - t;
            }
        }
    }
    fn rec(
        k: isize,
        n: usize,
        d: &[BigRational],
        l: &[Vec<BigRational>],
        budget: &BigRational,
        x: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if k < 0 {
            if x.iter().any(|&c| c != 0) {
                let first = x.iter().find(|&&c| c != 0).copied().unwrap();
                if first > 0 {
                    out.push(x.clone());
                }
            }
            return;
        }
        let ku = k as usize;
        let mut c = BigRational::zero();
        for jx in (ku + 1)..n {
            if x[jx] != 0 {
                c += &l[ku][jx] * BigRational::from_integer(big(x[jx]));
            }
        }
        // admissible x: (x + c)^2 <= r; overestimate the endpoints with the
        // ceiling square root, then adjust by exact comparison
        let r = budget / &d[ku];
        let s = crate::arith::ceil_sqrt_rat(&r);
        let sq_ok = |v: i64| -> bool {
            let t = BigRational::from_integer(big(v)) + &c;
            &t * &t <= r
        };
        let mut hi = i64::try_from(&(-&c + BigRational::from_integer(s.clone())).floor().to_integer()).unwrap();
        let lo_floor = i64::try_from(&(-&c - BigRational::from_integer(s)).ceil().to_integer()).unwrap();
        while hi >= lo_floor && !sq_ok(hi) {
            hi -= 1;
        }
        let mut lo = lo_floor;
        while lo <= hi && !sq_ok(lo) {
            lo += 1;
        }
        for v in lo..=hi {
            let t = BigRational::from_integer(big(v)) + &c;
            let used = &d[ku] * &t * &t;
            if &used > budget {
                continue;
            }
            x[ku] = v;
            let nb = budget - used;
            rec(k - 1, n, d, l, &nb, x, out);
            x[ku] = 0;
        }
    }
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    rec(n as isize - 1, n, &d, &l, bound, &mut x, &mut out);
    out.sort();
    out
}

/// Lattice elements with Tr_{F/Q}(Nrd) <= bound, one per +-pair.
pub fn short_lattice_elements(
    alg: &QuaternionAlgebra,
    lat: &FLattice,
    bound: &BigRational,
) -> Vec<QuatElem> {
    let zb = lat.z_basis(alg);
    let g = lat.gram(alg);
    short_vectors(&g, bound)
        .into_iter()
        .map(|v| {
            let mut acc = QuatElem::zero();
            for (i, c) in v.iter().enumerate() {
                if *c != 0 {
                    acc = alg.add(&acc, &alg.scale_rat(&zb[i], &rat(*c)));
                }
            }
            acc
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Orders: naive order, saturation to a maximal order, Eichler level cut
// ---------------------------------------------------------------------------

/// The order O_F<1, theta, j, theta j>.
pub fn naive_order(alg: &QuaternionAlgebra) -> FLattice {
    let one = QuatElem::one();
    let th = alg.theta_quat();
    let jj = QuatElem::jay();
    let tj = alg.mul(&th, &jj);
    FLattice::from_generators(alg.field(), &[one, th, jj, tj])
}

fn is_integral_elem(alg: &QuaternionAlgebra, x: &QuatElem) -> bool {
    alg.trd(x).is_integral() && alg.nrd(x).is_integral()
}

pub fn is_order(alg: &QuaternionAlgebra, lat: &FLattice) -> bool {
    let f = alg.field();
    if !lat.is_full() || !lat.contains(f, &QuatElem::one()) {
        return false;
    }
    let bs = lat.basis_quats();
    for a in &bs {
        if !is_integral_elem(alg, a) {
            return false;
        }
        for b in &bs {
            if !lat.contains(f, &alg.mul(a, b)) {
                return false;
            }
        }
    }
    true
}

/// Multiplicative closure of the span; None if it does not stabilize on an
/// integral order.
fn ring_closure(alg: &QuaternionAlgebra, gens: &[QuatElem]) -> Option<FLattice> {
    let f = alg.field();
    let mut lat = FLattice::from_generators(f, gens);
    for _ in 0..8 {
        let bs = lat.basis_quats();
        for b in &bs {
            if !is_integral_elem(alg, b) {
                return None;
            }
        }
        let mut prods = bs.clone();
        for a in &bs {
            for b in &bs {
                prods.push(alg.mul(a, b));
            }
        }
        let bigger = FLattice::from_generators(f, &prods);
        if bigger.equal(&lat) {
            return if is_order(alg, &lat) { Some(lat) } else { None };
        }
        lat = bigger;
    }
    None
}

/// Saturate to a maximal order: enlarge at rational primes dividing the Gram
/// determinant until no enlargement exists.
pub fn maximal_order(alg: &QuaternionAlgebra, start: &FLattice) -> Result<FLattice> {
    let f = alg.field();
    let mut order = start.clone();
    assert!(is_order(alg, &order), "maximal_order: start is not an order");
    'outer: loop {
        let g = order.gram(alg);
        let det = det_rational(&g);
        let det_int = det.to_integer();
        let det_u: u64 = u64::try_from(&det_int.abs())
            .map_err(|_| Error::Precondition("order discriminant too large".into()))?;
        for (q, _) in crate::arith::factor_u64(det_u) {
            let zb = order.z_basis(alg);
            let n = zb.len();
            let mut counter = vec![0u64; n];
            loop {
                let mut i = 0;
                while i < n {
                    counter[i] += 1;
                    if counter[i] < q {
                        break;
                    }
                    counter[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
                let mut acc = QuatElem::zero();
                for (k, &c) in counter.iter().enumerate() {
                    if c != 0 {
                        acc = alg.add(&acc, &alg.scale_rat(&zb[k], &rat(c as i64)));
                    }
                }
                let cand = alg.scale_rat(&acc, &BigRational::new(big(1), big(q as i64)));
                if !is_integral_elem(alg, &cand) || order.contains(f, &cand) {
                    continue;
                }
                let mut gens = order.basis_quats();
                gens.push(cand);
                if let Some(bigger) = ring_closure(alg, &gens) {
                    if !bigger.equal(&order) {
                        order = bigger;
                        continue 'outer;
                    }
                }
            }
        }
        return Ok(order);
    }
}

fn det_rational(g: &[Vec<BigRational>]) -> BigRational {
    let n = g.len();
    let mut m: Vec<Vec<BigRational>> = g.to_vec();
    let mut det = BigRational::one();
    for k in 0..n {
        let mut piv = None;
        for i in k..n {
            if !m[i][k].is_zero() {
                piv = Some(i);
                break;
            }
        }
        let piv = match piv {
            Some(p) => p,
            None => return BigRational::zero(),
        };
        if piv != k {
            m.swap(piv, k);
            det = -det;
        }
        det *= m[k][k].clone();
        for i in (k + 1)..n {
            let fct = &m[i][k] / &m[k][k];
            for jx in k..n {
                let t = &m[k][jx] * &fct;
                m[i][jx] = &m[i][jx] - t;
            }
        }
    }
    det
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EichlerOrder {
    /// Level exponent at p.
    pub m: u32,
    pub lattice: FLattice,
    pub maximal: FLattice,
}

/// The standard Eichler order: cut the maximal order by lower-left
/// congruences through the fixed splittings at v | n^+ p.
pub fn standard_eichler_order(
    alg: &QuaternionAlgebra,
    maximal: &FLattice,
    cuts: &[(LocalSplitting, PrimeIdeal, u32)],
    m_label: u32,
) -> Result<EichlerOrder> {
    let f = alg.field();
    let frat = crate::basefield::make_field(1).expect("Q");
    let mut lat = maximal.clone();
    for (sp, v, e) in cuts {
        if *e == 0 {
            continue;
        }
        let qe = big(v.q as i64).pow(*e);
        let zb = lat.z_basis(alg);
        let n = zb.len();
        let mut lvals: Vec<BigInt> = Vec::with_capacity(n);
        for b in &zb {
            let mat = sp.mat_of(alg, b)?;
            let ent = mat
                .entry_mod(2, *e)
                .map_err(|_| Error::Precision("splitting precision too low for the level".into()))?;
            lvals.push(BigInt::from(ent));
        }
        // integer combos c with sum c_i lvals_i = 0 mod q^e
        let mut aug: Vec<Vec<FieldElem>> = Vec::new();
        for (i, lv) in lvals.iter().enumerate() {
            let mut r = vec![FieldElem::from_rat(BigRational::from_integer(lv.clone()))];
            for jx in 0..n {
                r.push(if jx == i { FieldElem::one() } else { FieldElem::zero() });
            }
            aug.push(r);
        }
        let mut last = vec![FieldElem::from_rat(BigRational::from_integer(qe.clone()))];
        last.extend(std::iter::repeat(FieldElem::zero()).take(n));
        aug.push(last);
        let h = hnf_rows(&frat, aug, n + 1);
        let mut rows: Vec<Vec<FieldElem>> = Vec::new();
        for r in h {
            if r[0].is_zero() {
                let mut acc = QuatElem::zero();
                for (i, c) in r[1..].iter().enumerate() {
                    if !c.is_zero() {
                        acc = alg.add(&acc, &alg.scale_rat(&zb[i], &c.a));
                    }
                }
                rows.push(quat_coords(&acc));
            }
        }
        for b in &zb {
            rows.push(quat_coords(&alg.scale_rat(b, &BigRational::from_integer(qe.clone()))));
        }
        lat = FLattice { rows: hnf_rows(f, rows, 4) };
    }
    if !is_order(alg, &lat) {
        return Err(Error::VerificationFailed("level cut is not an order".into()));
    }
    let idx = maximal.index_ideal(f, &lat);
    let idx_norm = f.norm(&idx).abs();
    let mut expect = BigRational::one();
    for (_, v, e) in cuts {
        expect *= BigRational::from_integer(big(v.norm as i64).pow(*e));
    }
    if idx_norm != expect {
        return Err(Error::VerificationFailed(format!(
            "Eichler order index {idx_norm} differs from expected {expect}"
        )));
    }
    Ok(EichlerOrder { m: m_label, lattice: lat, maximal: maximal.clone() })
}

// ---------------------------------------------------------------------------
// Unit groups, left orders, ideal isomorphism
// ---------------------------------------------------------------------------

/// Norm-one elements of the order, one per +-pair; this is the reduced unit
/// group O^x / O_F^x.
pub fn unit_group(alg: &QuaternionAlgebra, order: &FLattice) -> Vec<QuatElem> {
    let f = alg.field();
    let bound = rat(2 * f.degree as i64);
    let mut out: Vec<QuatElem> = short_lattice_elements(alg, order, &bound)
        .into_iter()
        .filter(|x| alg.nrd(x) == FieldElem::one())
        .collect();
    out.sort_by_key(|x| format!("{x:?}"));
    out
}

/// Left order of a right ideal: {x : x I <= I}.
pub fn left_order(alg: &QuaternionAlgebra, ideal: &FLattice) -> FLattice {
    let f = alg.field();
    let mut acc: Option<FLattice> = None;
    for b in ideal.basis_quats() {
        let binv = alg.inv(&b);
        let lat = ideal.scale_quat_right(alg, &binv);
        acc = Some(match acc {
            None => lat,
            Some(a) => a.intersect(f, &lat),
        });
    }
    acc.expect("left_order of empty basis")
}

pub fn right_order(alg: &QuaternionAlgebra, ideal: &FLattice) -> FLattice {
    let f = alg.field();
    let mut acc: Option<FLattice> = None;
    for b in ideal.basis_quats() {
        let binv = alg.inv(&b);
        let lat = ideal.scale_quat_left(alg, &binv);
        acc = Some(match acc {
            None => lat,
            Some(a) => a.intersect(f, &lat),
        });
    }
    acc.expect("right_order of empty basis")
}

/// beta with beta J = I if the right ideals are in the same class, found by
/// short vectors in I * Jbar; None otherwise. Complete for definite B.
pub fn ideal_isomorphism(
    alg: &QuaternionAlgebra,
    i_lat: &FLattice,
    j_lat: &FLattice,
) -> Option<QuatElem> {
    let f = alg.field();
    let m = i_lat.product(alg, &j_lat.conj_lattice(alg));
    let nr_i = i_lat.norm_ideal_gen(alg);
    let nr_j = j_lat.norm_ideal_gen(alg);
    let target = f.mul(&nr_i, &nr_j);
    // the trace form evaluates to 2 Tr_{F/Q}(Nrd), so bounds carry that factor
    let bound = if f.degree == 1 {
        rat(2) * &target.a
    } else {
        // minimal-trace totally positive associate of the target norm is at
        // most about 3 sqrt(N); take a safe ceiling times 2
        let nt = f.norm(&target).abs();
        BigRational::from_integer(big(8) * (floor_sqrt_rat(&nt) + big(1)))
    };
    let cands = short_lattice_elements(alg, &m, &bound);
    let nrj_inv = f.inv(&nr_j);
    for x in cands {
        let nx = alg.nrd(&x);
        if nx.is_zero() {
            continue;
        }
        let ratio = f.div(&nx, &target);
        if !ratio.is_integral() || !f.norm(&ratio).abs().is_one() {
            continue;
        }
        let beta = alg.scale_f(&x, &nrj_inv);
        let bj = j_lat.scale_quat_left(alg, &beta);
        if bj.equal(i_lat) {
            return Some(beta);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Neighbors at a prime v not dividing p n^-
// ---------------------------------------------------------------------------

/// The |v|+1 right ideals J with I > J > pi_v I of norm Nr(I) * v.
pub fn neighbors(
    alg: &QuaternionAlgebra,
    order: &FLattice,
    ideal: &FLattice,
    v: &PrimeIdeal,
) -> Result<Vec<FLattice>> {
    let f = alg.field();
    for w in &alg.disc_primes {
        if w.q == v.q && w.gen == v.gen {
            return Err(Error::Precondition(format!(
                "neighbors at a ramified prime above {}",
                v.q
            )));
        }
    }
    let k = f.residue_field(v);
    let ib = ideal.basis_quats();
    let rb = order.basis_quats();
    let mut mults: Vec<Vec<Vec<KvElem>>> = Vec::new();
    for r in &rb {
        let mut rows = Vec::new();
        for b in &ib {
            let prod = alg.mul(b, r);
            let coords = ideal
                .coords_of(f, &prod)
                .expect("ideal is not stable under its right order");
            rows.push(coords.iter().map(|c| f.reduce_mod(v, c)).collect::<Vec<KvElem>>());
        }
        mults.push(rows);
    }
    let mut found = Vec::new();
    let elems = k.elements();
    for p1 in 0..4usize {
        for p2 in (p1 + 1)..4 {
            let free1: Vec<usize> = (0..4).filter(|&c| c > p1 && c != p2).collect();
            let free2: Vec<usize> = (0..4).filter(|&c| c > p2).collect();
            let total = free1.len() + free2.len();
            let mut idxs = vec![0usize; total];
            loop {
                let mut w1 = [k.zero(); 4];
                let mut w2 = [k.zero(); 4];
                w1[p1] = k.one();
                w2[p2] = k.one();
                for (t, &c) in free1.iter().enumerate() {
                    w1[c] = elems[idxs[t]];
                }
                for (t, &c) in free2.iter().enumerate() {
                    w2[c] = elems[idxs[free1.len() + t]];
                }
                let in_span = |vv: &[KvElem; 4]| -> bool {
                    let mut v2 = *vv;
                    let c = v2[p1];
                    if !k.is_zero(c) {
                        for t in 0..4 {
                            v2[t] = k.sub(v2[t], k.mul(c, w1[t]));
                        }
                    }
                    let c = v2[p2];
                    if !k.is_zero(c) {
                        for t in 0..4 {
                            v2[t] = k.sub(v2[t], k.mul(c, w2[t]));
                        }
                    }
                    v2.iter().all(|&e| k.is_zero(e))
                };
                let mut stable = true;
                'stab: for mult in &mults {
                    for w in [&w1, &w2] {
                        let mut img = [k.zero(); 4];
                        for i in 0..4 {
                            if k.is_zero(w[i]) {
                                continue;
                            }
                            for t in 0..4 {
                                img[t] = k.add(img[t], k.mul(w[i], mult[i][t]));
                            }
                        }
                        if !in_span(&img) {
                            stable = false;
                            break 'stab;
                        }
                    }
                }
                if stable {
                    let mut gens: Vec<QuatElem> = Vec::new();
                    for w in [&w1, &w2] {
                        let mut acc = QuatElem::zero();
                        for i in 0..4 {
                            if !k.is_zero(w[i]) {
                                let lift = f.lift_residue(v, w[i]);
                                acc = alg.add(&acc, &alg.scale_f(&ib[i], &lift));
                            }
                        }
                        gens.push(acc);
                    }
                    for b in &ib {
                        gens.push(alg.scale_f(b, &v.gen));
                    }
                    found.push(FLattice::from_generators(f, &gens));
                }
                let mut t = 0;
                while t < total {
                    idxs[t] += 1;
                    if idxs[t] < elems.len() {
                        break;
                    }
                    idxs[t] = 0;
                    t += 1;
                }
                if t == total {
                    break;
                }
            }
        }
    }
    let nr_i = ideal.norm_ideal_gen(alg);
    let target = f.totally_positive_associate(&f.mul(&nr_i, &v.gen));
    let mut out = Vec::new();
    for j in found {
        let nr_j = j.norm_ideal_gen(alg);
        let ratio = f.div(&nr_j, &target);
        if ratio.is_integral() && f.norm(&ratio).abs().is_one() {
            out.push(j);
        }
    }
    let expected = (v.norm + 1) as usize;
    if out.len() != expected {
        return Err(Error::VerificationFailed(format!(
            "neighbor count {} differs from |v|+1 = {}",
            out.len(),
            expected
        )));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Mass formula and class sets
// ---------------------------------------------------------------------------

/// The Eichler mass in the fixed normalization: over Q, weights count full
/// unit groups (the Hurwitz order has weight 24); over real quadratic fields,
/// unit groups modulo O_F^x (the icosian order has weight 60). In both cases
/// the constant in front is zeta-value/2 times the Euler factors.
pub fn mass(
    field: &TotallyRealField,
    n_minus_norms: &[u64],
    level_factors: &[(u64, u32)],
) -> BigRational {
    let mut m = field.zeta_minus_one.clone() / rat(2);
    for q in n_minus_norms {
        m *= rat(*q as i64 - 1);
    }
    for (nv, e) in level_factors {
        m *= BigRational::from_integer(big(*nv as i64).pow(e - 1) * big(*nv as i64 + 1));
    }
    m
}

/// Weight of a class in the mass normalization above.
pub fn mass_weight(field: &TotallyRealField, reduced_unit_order: u64) -> u64 {
    if field.degree == 1 {
        2 * reduced_unit_order
    } else {
        reduced_unit_order
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassRep {
    pub ideal: FLattice,
    pub left_order: FLattice,
    /// Norm-one units of the left order, one per +-pair.
    pub units: Vec<QuatElem>,
    /// |O_L^x / O_F^x|.
    pub reduced_unit_order: u64,
    /// Mass weight in the fixed normalization.
    pub weight: u64,
    /// p-trivialization: ideal_p = g_p (R_m)_p when a p-splitting exists.
    pub g_p: Option<PadicMat>,
    /// Theta fingerprint for fast class discrimination (degree 1 only).
    pub fingerprint: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassSet {
    pub level_m: u32,
    pub reps: Vec<ClassRep>,
    pub mass: BigRational,
}

pub fn fingerprint(alg: &QuaternionAlgebra, ideal: &FLattice) -> Vec<u64> {
    if alg.field().degree != 1 {
        return Vec::new();
    }
    let nr = ideal.norm_ideal_gen(alg);
    let nv = nr.a.clone();
    let bound = &nv * rat(12);
    let elems = short_lattice_elements(alg, ideal, &bound);
    let mut counts = vec![0u64; 12];
    for x in elems {
        let q = alg.field().trace(&alg.nrd(&x));
        let ratio = &q / &nv;
        if ratio.is_integer() {
            let ri = i64::try_from(&ratio.to_integer()).unwrap();
            if (1..=12).contains(&ri) {
                counts[(ri - 1) as usize] += 1;
            }
        }
    }
    counts
}

/// Reduce an ideal to a small-norm integral primitive representative of its
/// class, transporting the p-trivialization.
pub fn reduce_ideal(
    alg: &QuaternionAlgebra,
    ideal: &FLattice,
    splitting: Option<&LocalSplitting>,
    g_p: Option<&PadicMat>,
) -> Result<(FLattice, Option<PadicMat>)> {
    let f = alg.field();
    let mut bound = rat(1);
    let shortest = loop {
        let elems = short_lattice_elements(alg, ideal, &bound);
        let best = elems
            .iter()
            .filter(|x| !alg.nrd(x).is_zero())
            .min_by_key(|x| f.trace(&alg.nrd(x)));
        if let Some(x) = best {
            break x.clone();
        }
        bound *= rat(4);
        if bound > rat(1 << 30) {
            return Err(Error::SearchExhausted("ideal reduction".into()));
        }
    };
    let xinv = alg.inv(&shortest);
    let reduced = ideal.scale_quat_left(alg, &xinv);
    let mut den = BigInt::one();
    for r in &reduced.rows {
        for e in r {
            den = den.lcm(e.a.denom());
            den = den.lcm(e.b.denom());
        }
    }
    let den_f = FieldElem::from_rat(BigRational::from_integer(den));
    let scaled = reduced.scale_field(alg, &den_f);
    let mut entries: Vec<FieldElem> = Vec::new();
    for r in &scaled.rows {
        for e in r {
            if !e.is_zero() {
                entries.push(e.clone());
            }
        }
    }
    let content = ideal_gen(f, &entries);
    let cinv = f.inv(&content);
    let final_lat = scaled.scale_field(alg, &cinv);
    let new_gp = match (splitting, g_p) {
        (Some(sp), Some(gp)) => {
            let xinv_mat = sp.mat_of(alg, &xinv)?;
            let scalar = f.mul(&den_f, &cinv);
            let smat = sp.from_rational([
                scalar.a.clone(),
                BigRational::zero(),
                BigRational::zero(),
                scalar.a.clone(),
            ])?;
            Some(xinv_mat.mul(gp).mul(&smat))
        }
        _ => None,
    };
    Ok((final_lat, new_gp))
}

/// Complete set of right ideal class representatives by neighbor traversal
/// at v0, certified against the expected mass.
pub fn right_ideal_classes(
    alg: &QuaternionAlgebra,
    order: &FLattice,
    level_m: u32,
    v0: &PrimeIdeal,
    expected_mass: &BigRational,
    splitting: Option<&LocalSplitting>,
) -> Result<ClassSet> {
    let f = alg.field();
    let mut reps: Vec<ClassRep> = Vec::new();
    let mut queue: Vec<(FLattice, Option<PadicMat>)> = Vec::new();
    let id_gp = splitting.map(|sp| PadicMat::identity(sp.q, sp.prec));
    queue.push((order.clone(), id_gp));
    let mut acc_mass = BigRational::zero();
    let mut guard = 0usize;
    while let Some((raw_ideal, raw_gp)) = queue.pop() {
        guard += 1;
        if guard > 20_000 {
            return Err(Error::MassMismatch {
                expected: expected_mass.to_string(),
                found: acc_mass.to_string(),
            });
        }
        let (ideal, gp) = reduce_ideal(alg, &raw_ideal, splitting, raw_gp.as_ref())?;
        let fp = fingerprint(alg, &ideal);
        let mut known = false;
        for rep in &reps {
            if f.degree == 1 && rep.fingerprint != fp {
                continue;
            }
            if ideal_isomorphism(alg, &ideal, &rep.ideal).is_some() {
                known = true;
                break;
            }
        }
        if known {
            continue;
        }
        let lo = left_order(alg, &ideal);
        let units = unit_group(alg, &lo);
        let w = units.len() as u64;
        let rep = ClassRep {
            weight: mass_weight(f, w),
            reduced_unit_order: w,
            fingerprint: fp,
            left_order: lo,
            units,
            g_p: gp.clone(),
            ideal: ideal.clone(),
        };
        acc_mass += BigRational::new(big(1), big(rep.weight as i64));
        reps.push(rep);
        if &acc_mass == expected_mass {
            break;
        }
        if &acc_mass > expected_mass {
            return Err(Error::MassMismatch {
                expected: expected_mass.to_string(),
                found: acc_mass.to_string(),
            });
        }
        for nb in neighbors(alg, order, &ideal, v0)? {
            queue.push((nb, gp.clone()));
        }
    }
    if &acc_mass != expected_mass {
        return Err(Error::MassMismatch {
            expected: expected_mass.to_string(),
            found: acc_mass.to_string(),
        });
    }
    Ok(ClassSet { level_m, reps, mass: acc_mass })
}

impl ClassSet {
    /// Index of the class containing the given right ideal, with the
    /// conjugating witness beta (beta * reps[i] = ideal).
    pub fn classify(
        &self,
        alg: &QuaternionAlgebra,
        ideal: &FLattice,
    ) -> Result<(usize, QuatElem)> {
        let f = alg.field();
        let fp = fingerprint(alg, ideal);
        for (i, rep) in self.reps.iter().enumerate() {
            if f.degree == 1 && !fp.is_empty() && rep.fingerprint != fp {
                continue;
            }
            if let Some(beta) = ideal_isomorphism(alg, ideal, &rep.ideal) {
                return Ok((i, beta));
            }
        }
        Err(Error::VerificationFailed(
            "ideal not isomorphic to any class representative; class set incomplete".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basefield::make_field;
    use crate::cmfield::make_cm;
    use crate::quatalg::{choose_beta, choose_theta, make_algebra};

    fn hamilton_q() -> QuaternionAlgebra {
        let f = make_field(1).unwrap();
        let cm = make_cm(&f, FieldElem::from_int(-1)).unwrap();
        let theta = crate::cmfield::KElem::new(FieldElem::zero(), FieldElem::one());
        let n2 = f.primes_above(2);
        make_algebra(&cm, theta, FieldElem::from_int(-1), &n2).unwrap()
    }

    fn base_algebra() -> QuaternionAlgebra {
        let f = make_field(1).unwrap();
        let cm = make_cm(&f, FieldElem::from_int(-3)).unwrap();
        let mut primes = Vec::new();
        for q in [3u64, 7, 11] {
            primes.extend(f.primes_above(q));
        }
        let theta = choose_theta(&cm, &primes, 20).unwrap();
        let n_minus = f.primes_above(11);
        let beta = choose_beta(&cm, &[], &n_minus, &f.primes_above(7), &f.primes_above(3), 400).unwrap();
        make_algebra(&cm, theta, beta, &n_minus).unwrap()
    }

    fn icosian_algebra() -> QuaternionAlgebra {
        let f = make_field(5).unwrap();
        let cm = make_cm(&f, FieldElem::from_int(-1)).unwrap();
        let theta = crate::cmfield::KElem::new(FieldElem::zero(), FieldElem::one());
        make_algebra(&cm, theta, FieldElem::from_int(-1), &[]).unwrap()
    }

    #[test]
    fn hnf_and_membership() {
        let f = make_field(1).unwrap();
        let alg = hamilton_q();
        let o = naive_order(&alg);
        assert!(o.is_full());
        assert!(o.contains(&f, &QuatElem::one()));
        assert!(is_order(&alg, &o));
        let half = alg.scale_rat(&QuatElem::one(), &BigRational::new(big(1), big(2)));
        assert!(!o.contains(&f, &half));
    }

    #[test]
    fn hurwitz_from_lipschitz() {
        let alg = hamilton_q();
        let f = alg.field();
        let o = naive_order(&alg);
        let omax = maximal_order(&alg, &o).unwrap();
        // index 2, contains (1+i+j+ij)/2
        assert_eq!(
            f.norm(&omax.index_ideal(f, &o)).abs(),
            BigRational::from_integer(big(2))
        );
        let hur = alg.scale_rat(
            &alg.add(
                &alg.add(&QuatElem::one(), &alg.theta_quat()),
                &alg.add(&QuatElem::jay(), &alg.mul(&alg.theta_quat(), &QuatElem::jay())),
            ),
            &BigRational::new(big(1), big(2)),
        );
        assert!(omax.contains(f, &hur));
        // units: 24 mod sign = 12
        let u = unit_group(&alg, &omax);
        assert_eq!(u.len(), 12);
        // mass
        let m = mass(f, &[2], &[]);
        assert_eq!(m, BigRational::new(big(1), big(24)));
    }

    #[test]
    fn disc11_class_set() {
        let alg = base_algebra();
        let f = alg.field();
        let o = naive_order(&alg);
        let omax = maximal_order(&alg, &o).unwrap();
        let m = mass(f, &[11], &[]);
        assert_eq!(m, BigRational::new(big(5), big(12)));
        let v2 = &f.primes_above(2)[0];
        let cs = right_ideal_classes(&alg, &omax, 0, v2, &m, None).unwrap();
        assert_eq!(cs.reps.len(), 2);
        let mut ws: Vec<u64> = cs.reps.iter().map(|r| r.reduced_unit_order).collect();
        ws.sort();
        assert_eq!(ws, vec![2, 3]);
        // neighbor closure: every neighbor of every representative lands in
        // some class
        for rep in &cs.reps {
            for nb in neighbors(&alg, &omax, &rep.ideal, v2).unwrap() {
                cs.classify(&alg, &nb).unwrap();
            }
        }
        // the two classes are distinct
        assert!(ideal_isomorphism(&alg, &cs.reps[0].ideal, &cs.reps[1].ideal).is_none());
    }

    #[test]
    fn icosians() {
        let alg = icosian_algebra();
        let f = alg.field();
        let o = naive_order(&alg);
        let omax = maximal_order(&alg, &o).unwrap();
        let u = unit_group(&alg, &omax);
        assert_eq!(u.len(), 60);
        let m = mass(f, &[], &[]);
        assert_eq!(m, BigRational::new(big(1), big(60)));
        let v2 = &f.primes_above(2)[0];
        let cs = right_ideal_classes(&alg, &omax, 0, v2, &m, None).unwrap();
        assert_eq!(cs.reps.len(), 1);
    }

    #[test]
    fn neighbor_counts() {
        let alg = base_algebra();
        let f = alg.field();
        let omax = maximal_order(&alg, &naive_order(&alg)).unwrap();
        let v2 = &f.primes_above(2)[0];
        let nbs = neighbors(&alg, &omax, &omax, v2).unwrap();
        assert_eq!(nbs.len(), 3);
        // each neighbor has norm Nr(I) * 2
        for nb in &nbs {
            assert_eq!(nb.norm_ideal_gen(&alg), FieldElem::from_int(2));
        }
        let v3 = &f.primes_above(3)[0];
        let nbs = neighbors(&alg, &omax, &omax, v3).unwrap();
        assert_eq!(nbs.len(), 4);
        // ramified prime of B rejected
        let v11 = &f.primes_above(11)[0];
        assert!(neighbors(&alg, &omax, &omax, v11).is_err());
    }

    #[test]
    fn ideal_isomorphism_relation() {
        let alg = base_algebra();
        let omax = maximal_order(&alg, &naive_order(&alg)).unwrap();
        // (I, I) gives a unit witness
        let beta = ideal_isomorphism(&alg, &omax, &omax).unwrap();
        assert!(alg.nrd(&beta) == FieldElem::one() || alg.nrd(&beta) == FieldElem::from_int(-1));
        // (xI, I) recovers x up to units
        let x = alg.add(&QuatElem::one(), &alg.theta_quat()); // 1 + theta
        let xi = omax.scale_quat_left(&alg, &x);
        let beta = ideal_isomorphism(&alg, &xi, &omax).unwrap();
        let xb = xi.scale_quat_left(&alg, &alg.inv(&beta));
        assert!(xb.equal(&omax));
    }

    #[test]
    fn eichler_level_7() {
        let alg = base_algebra();
        let f = alg.field();
        let omax = maximal_order(&alg, &naive_order(&alg)).unwrap();
        let v7 = f.primes_above(7)[0].clone();
        let sp = LocalSplitting::new(&alg, &v7, 16).unwrap();
        let e1 = standard_eichler_order(&alg, &omax, &[(sp.clone(), v7.clone(), 1)], 1).unwrap();
        assert!(is_order(&alg, &e1.lattice));
        assert_eq!(
            f.norm(&omax.index_ideal(f, &e1.lattice)).abs(),
            BigRational::from_integer(big(7))
        );
        // nested in m
        let e2 = standard_eichler_order(&alg, &omax, &[(sp, v7, 2)], 2).unwrap();
        assert!(e1.lattice.contains_lattice(f, &e2.lattice));
        assert_eq!(
            f.norm(&e1.lattice.index_ideal(f, &e2.lattice)).abs(),
            BigRational::from_integer(big(7))
        );
        // mass at level 7
        let m = mass(f, &[11], &[(7, 1)]);
        assert_eq!(m, BigRational::new(big(10), big(3)));
        let v2 = &f.primes_above(2)[0];
        let cs = right_ideal_classes(&alg, &e1.lattice, 1, v2, &m, None).unwrap();
        // 6 classes with trivial units, 2 with units of order 3
        let mut ws: Vec<u64> = cs.reps.iter().map(|r| r.reduced_unit_order).collect();
        ws.sort();
        assert_eq!(ws, vec![1, 1, 1, 1, 1, 1, 3, 3]);
    }

    #[test]
    fn left_orders_and_units_level7() {
        let alg = base_algebra();
        let f = alg.field();
        let omax = maximal_order(&alg, &naive_order(&alg)).unwrap();
        let v7 = f.primes_above(7)[0].clone();
        let sp = LocalSplitting::new(&alg, &v7, 16).unwrap();
        let e1 = standard_eichler_order(&alg, &omax, &[(sp, v7, 1)], 1).unwrap();
        // the right order of the unit ideal is the order itself
        let ro = right_order(&alg, &e1.lattice);
        assert!(ro.equal(&e1.lattice));
        let lo = left_order(&alg, &e1.lattice);
        assert!(lo.equal(&e1.lattice));
    }
}

#[cfg(test)]
mod debug_tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn short_vectors_identity4() {
        // standard form 2*I_4 (like Trd(x xbar) on Z^4 for Hamilton)
        let g: Vec<Vec<BigRational>> = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| if i == j { rat(2) } else { rat(0) })
                    .collect()
            })
            .collect();
        let v = short_vectors(&g, &rat(2));
        // 4 vectors up to sign
        assert_eq!(v.len(), 4, "{v:?}");
        let _ = BigRational::one();
    }

    #[test]
    fn short_vectors_hurwitz_gram() {
        let g: Vec<Vec<BigRational>> = vec![
            vec![rat(2), rat(0), rat(0), rat(1)],
            vec![rat(0), rat(2), rat(0), rat(1)],
            vec![rat(0), rat(0), rat(2), rat(1)],
            vec![rat(1), rat(1), rat(1), rat(2)],
        ];
        let v = short_vectors(&g, &rat(2));
        assert_eq!(v.len(), 12, "{v:?}");
    }
}
