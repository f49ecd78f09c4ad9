//! The totally real base field F of degree 1 or 2: exact element arithmetic
//! in the integral basis, real embedding sign tests, fundamental units,
//! narrow-class-number-1 certification, prime ideals with totally positive
//! generators, residue fields, and Siegel's finite sum for zeta(-1).

use crate::arith::{big, ceil_sqrt_rat, factor_u64, floor_sqrt_rat, is_prime_u64, is_squarefree_u64, kronecker, rat, sigma1};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Element of F written in the integral basis {1, w} where w^2 = t0*w + n0.
/// For F = Q the second coordinate is identically zero.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldElem {
    pub a: BigRational,
    pub b: BigRational,
}

impl std::fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+{}w", self.a, self.b)
        }
    }
}

impl FieldElem {
    pub fn from_int(n: i64) -> Self {
        FieldElem { a: rat(n), b: rat(0) }
    }
    pub fn from_rat(a: BigRational) -> Self {
        FieldElem { a, b: BigRational::zero() }
    }
    pub fn new(a: BigRational, b: BigRational) -> Self {
        FieldElem { a, b }
    }
    pub fn zero() -> Self {
        Self::from_int(0)
    }
    pub fn one() -> Self {
        Self::from_int(1)
    }
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }
    /// Integral in O_F: both coordinates are integers.
    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }
}

/// A totally real field of degree 1 or 2 with narrow class number 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TotallyRealField {
    pub degree: u32,
    /// D = 1 means F = Q; otherwise F = Q(sqrt(D)), D > 1 squarefree.
    pub d_param: u64,
    /// Multiplication rule of the integral basis generator: w^2 = t0*w + n0.
    pub t0: i64,
    pub n0: i64,
    /// Field discriminant (1 for Q).
    pub disc: u64,
    /// Fundamental unit for degree 2 (norm -1 since narrow class number 1).
    pub fundamental_unit: Option<FieldElem>,
    /// |zeta_F(-1)| as an exact rational.
    pub zeta_minus_one: BigRational,
}

/// A finite prime of F with a chosen totally positive generator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrimeIdeal {
    /// The rational prime below.
    pub q: u64,
    /// Residue degree.
    pub f: u32,
    /// Ramification index.
    pub e: u32,
    /// Totally positive generator.
    pub gen: FieldElem,
    /// Residue field size q^f.
    pub norm: u64,
    /// Residue data: image of w in the residue field (f = 1), or the minimal
    /// polynomial coefficients of w mod q (f = 2).
    pub residue: ResidueRepr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidueRepr {
    /// w = r in F_q.
    Linear { r: u64 },
    /// F_{q^2} = F_q[x]/(x^2 - t0 x - n0).
    Quadratic { t0: u64, n0: u64 },
}

/// Residue field k_v of size q^f, elements represented as (a, b) = a + b*x
/// with b = 0 when f = 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueField {
    pub q: u64,
    pub f: u32,
    pub repr: ResidueRepr,
}

pub type KvElem = (u64, u64);

impl ResidueField {
    pub fn size(&self) -> u64 {
        self.q.pow(self.f)
    }
    pub fn zero(&self) -> KvElem {
        (0, 0)
    }
    pub fn one(&self) -> KvElem {
        (1, 0)
    }
    pub fn add(&self, x: KvElem, y: KvElem) -> KvElem {
        ((x.0 + y.0) % self.q, (x.1 + y.1) % self.q)
    }
    pub fn neg(&self, x: KvElem) -> KvElem {
        ((self.q - x.0) % self.q, (self.q - x.1) % self.q)
    }
    pub fn sub(&self, x: KvElem, y: KvElem) -> KvElem {
        self.add(x, self.neg(y))
    }
    pub fn mul(&self, x: KvElem, y: KvElem) -> KvElem {
        match self.repr {
            ResidueRepr::Linear { .. } => ((x.0 * y.0) % self.q, 0),
            ResidueRepr::Quadratic { t0, n0 } => {
                // (a+bx)(c+dx) = ac + bd*n0 + (ad+bc+bd*t0) x
                let q = self.q;
                let bd = (x.1 * y.1) % q;
                let a = (x.0 * y.0 + bd * n0) % q;
                let b = (x.0 * y.1 + x.1 * y.0 + bd * t0) % q;
                (a, b)
            }
        }
    }
    pub fn is_zero(&self, x: KvElem) -> bool {
        x.0 == 0 && x.1 == 0
    }
    pub fn scalar(&self, n: u64) -> KvElem {
        (n % self.q, 0)
    }
    pub fn pow(&self, x: KvElem, mut e: u64) -> KvElem {
        let mut base = x;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
    pub fn inv(&self, x: KvElem) -> KvElem {
        assert!(!self.is_zero(x), "inverse of zero in residue field");
        self.pow(x, self.size() - 2)
    }
    pub fn elements(&self) -> Vec<KvElem> {
        let mut out = Vec::with_capacity(self.size() as usize);
        if self.f == 1 {
            for a in 0..self.q {
                out.push((a, 0));
            }
        } else {
            for a in 0..self.q {
                for b in 0..self.q {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

impl TotallyRealField {
    pub fn is_rational(&self) -> bool {
        self.degree == 1
    }

    pub fn add(&self, x: &FieldElem, y: &FieldElem) -> FieldElem {
        FieldElem::new(&x.a + &y.a, &x.b + &y.b)
    }
    pub fn sub(&self, x: &FieldElem, y: &FieldElem) -> FieldElem {
        FieldElem::new(&x.a - &y.a, &x.b - &y.b)
    }
    pub fn neg(&self, x: &FieldElem) -> FieldElem {
        FieldElem::new(-x.a.clone(), -x.b.clone())
    }
    pub fn mul(&self, x: &FieldElem, y: &FieldElem) -> FieldElem {
        // (a+bw)(c+dw) = ac + bd*n0 + (ad+bc+bd*t0) w
        let t0 = rat(self.t0);
        let n0 = rat(self.n0);
        let bd = &x.b * &y.b;
        FieldElem::new(
            &x.a * &y.a + &bd * n0,
            &x.a * &y.b + &x.b * &y.a + &bd * t0,
        )
    }
    pub fn conj(&self, x: &FieldElem) -> FieldElem {
        // w + conj(w) = t0
        FieldElem::new(&x.a + rat(self.t0) * &x.b, -x.b.clone())
    }
    pub fn norm(&self, x: &FieldElem) -> BigRational {
        if self.degree == 1 {
            return x.a.clone();
        }
        let c = self.conj(x);
        let p = self.mul(x, &c);
        debug_assert!(p.b.is_zero());
        p.a
    }
    pub fn trace(&self, x: &FieldElem) -> BigRational {
        if self.degree == 1 {
            return x.a.clone();
        }
        rat(2) * &x.a + rat(self.t0) * &x.b
    }
    pub fn inv(&self, x: &FieldElem) -> FieldElem {
        assert!(!x.is_zero(), "division by zero in F");
        if self.degree == 1 {
            return FieldElem::from_rat(x.a.recip());
        }
        let n = self.norm(x);
        let c = self.conj(x);
        FieldElem::new(&c.a / &n, &c.b / &n)
    }
    pub fn div(&self, x: &FieldElem, y: &FieldElem) -> FieldElem {
        self.mul(x, &self.inv(y))
    }
    pub fn scale(&self, x: &FieldElem, c: &BigRational) -> FieldElem {
        FieldElem::new(&x.a * c, &x.b * c)
    }

    /// Discriminant of the basis generator's minimal polynomial, t0^2 + 4 n0.
    fn gen_disc(&self) -> i64 {
        self.t0 * self.t0 + 4 * self.n0
    }

    /// Sign of the element under the real embedding `which` (0 is the
    /// distinguished embedding tau sending w to the larger root).
    pub fn embedding_sign(&self, x: &FieldElem, which: usize) -> i32 {
        if self.degree == 1 || x.b.is_zero() {
            return sign_of(&x.a);
        }
        // x = (2a + b t0 +- b sqrt(M)) / 2 with M = t0^2 + 4 n0 > 0.
        let s = rat(2) * &x.a + rat(self.t0) * &x.b;
        let t = if which == 0 { x.b.clone() } else { -x.b.clone() };
        let m = rat(self.gen_disc());
        if t.is_zero() {
            return sign_of(&s);
        }
        if s.is_zero() {
            return sign_of(&t);
        }
        if sign_of(&s) == sign_of(&t) {
            return sign_of(&s);
        }
        // opposite signs: compare |s| with |t| sqrt(M) exactly
        let s2 = &s * &s;
        let t2m = &t * &t * m;
        match s2.cmp(&t2m) {
            std::cmp::Ordering::Greater => sign_of(&s),
            std::cmp::Ordering::Less => sign_of(&t),
            std::cmp::Ordering::Equal => 0,
        }
    }

    pub fn is_totally_positive(&self, x: &FieldElem) -> bool {
        (0..self.degree as usize).all(|i| self.embedding_sign(x, i) > 0)
    }

    pub fn is_totally_negative(&self, x: &FieldElem) -> bool {
        (0..self.degree as usize).all(|i| self.embedding_sign(x, i) < 0)
    }

    /// Make x totally positive by unit and sign adjustment; requires N(x) != 0.
    /// Possible exactly because the narrow class number is 1.
    pub fn totally_positive_associate(&self, x: &FieldElem) -> FieldElem {
        assert!(!x.is_zero());
        let mut y = x.clone();
        if self.degree == 1 {
            if sign_of(&y.a) < 0 {
                y = self.neg(&y);
            }
            return y;
        }
        if self.norm(&y).is_negative() {
            let eps = self.fundamental_unit.clone().expect("unit");
            debug_assert!(self.norm(&eps) == -BigRational::one());
            y = self.mul(&y, &eps);
        }
        if self.embedding_sign(&y, 0) < 0 {
            y = self.neg(&y);
        }
        debug_assert!(self.is_totally_positive(&y));
        y
    }

    /// All integral elements with |N(x)| = target, one per unit orbit is
    /// enough for the callers; returns every solution in the search region.
    fn norm_equation(&self, target: u64) -> Vec<FieldElem> {
        assert!(self.degree == 2);
        let mut out = Vec::new();
        let eps = self.fundamental_unit.as_ref().expect("unit");
        // Any solution is unit-equivalent to one with both embeddings of
        // absolute value <= sqrt(target) * eps_max; bound the w-coordinate.
        let m = rat(self.gen_disc());
        let eps_max = {
            // rational upper bound for |tau(eps)|: |a| + |b| * (|t0| + ceil sqrt M)/2
            let s = eps.a.abs() + eps.b.abs() * (rat(self.t0.abs()) + BigRational::from_integer(ceil_sqrt_rat(&m))) / rat(2);
            s + rat(1)
        };
        let sqrt_t = BigRational::from_integer(ceil_sqrt_rat(&rat(target as i64)));
        let bound_emb = &sqrt_t * &eps_max; // |tau(x)|, |sigma(x)| <= this
        // |b| = |tau(x)-sigma(x)| / sqrt(M) <= 2*bound/sqrt(M)
        let by = ceil_sqrt_rat(&(&(rat(4) * &bound_emb * &bound_emb) / m));
        let bybound: i64 = i64::try_from(&by).unwrap_or(i64::MAX / 2);
        for b in -bybound..=bybound {
            // a^2 + a b t0 - b^2 n0 = +-target; solve the quadratic in a
            for sgn in [1i64, -1] {
                let t0 = big(self.t0);
                let n0 = big(self.n0);
                let bb = big(b);
                // a = (-b t0 +- sqrt(b^2 t0^2 + 4(b^2 n0 + sgn*target))) / 2
                let disc = &bb * &bb * &t0 * &t0 + big(4) * (&bb * &bb * &n0 + big(sgn) * big(target as i64));
                if disc.is_negative() {
                    continue;
                }
                let r = floor_sqrt_rat(&BigRational::from_integer(disc.clone()));
                if &r * &r != disc {
                    continue;
                }
                for root_sgn in [1, -1] {
                    let num = -&bb * &t0 + big(root_sgn) * &r;
                    // a must be an integer
                    if num.mod_floor(&big(2)).is_zero() {
                        let a = num / big(2);
                        let x = FieldElem::new(BigRational::from_integer(a), rat(b));
                        if !x.is_zero() {
                            out.push(x);
                        }
                    }
                }
            }
        }
        out.sort_by_key(|x| format!("{:?}", x));
        out.dedup();
        out
    }

    /// Splitting data of the rational prime q in O_F.
    pub fn primes_above(&self, q: u64) -> Vec<PrimeIdeal> {
        assert!(is_prime_u64(q), "primes_above of composite {q}");
        if self.degree == 1 {
            return vec![PrimeIdeal {
                q,
                f: 1,
                e: 1,
                gen: FieldElem::from_int(q as i64),
                norm: q,
                residue: ResidueRepr::Linear { r: 0 },
            }];
        }
        let sym = kronecker(&big(self.disc as i64), q);
        match sym {
            -1 => {
                // inert; w's minimal polynomial is irreducible mod q
                let t0 = (self.t0.rem_euclid(q as i64)) as u64;
                let n0 = (self.n0.rem_euclid(q as i64)) as u64;
                vec![PrimeIdeal {
                    q,
                    f: 2,
                    e: 1,
                    gen: FieldElem::from_int(q as i64),
                    norm: q * q,
                    residue: ResidueRepr::Quadratic { t0, n0 },
                }]
            }
            0 | 1 => {
                let sols = self.norm_equation(q);
                let alpha = sols
                    .first()
                    .unwrap_or_else(|| panic!("no norm-{q} element although h=1"));
                let g1 = self.totally_positive_associate(alpha);
                let mut v1 = self.make_prime_deg1(q, g1, sym == 0);
                if sym == 0 {
                    v1.e = 2;
                    return vec![v1];
                }
                let g2 = self.totally_positive_associate(&self.conj(alpha));
                let v2 = self.make_prime_deg1(q, g2, false);
                // order the two split primes deterministically
                let mut v = vec![v1, v2];
                v.sort_by_key(|p| match p.residue {
                    ResidueRepr::Linear { r } => r,
                    _ => unreachable!(),
                });
                v
            }
            _ => unreachable!(),
        }
    }

    fn make_prime_deg1(&self, q: u64, gen: FieldElem, ramified: bool) -> PrimeIdeal {
        // the image r of w mod (gen): root of x^2 - t0 x - n0 with w - r in (gen)
        let mut root = None;
        for r in 0..q {
            let val = (r as i128 * r as i128 - self.t0 as i128 * r as i128 - self.n0 as i128).rem_euclid(q as i128);
            if val != 0 {
                continue;
            }
            let wr = FieldElem::new(rat(-(r as i64)), rat(1));
            if self.divides(&gen, &wr) {
                root = Some(r);
                break;
            }
        }
        let r = root.unwrap_or_else(|| panic!("no residue root for prime {q}"));
        PrimeIdeal {
            q,
            f: 1,
            e: if ramified { 2 } else { 1 },
            gen,
            norm: q,
            residue: ResidueRepr::Linear { r },
        }
    }

    /// Does the principal ideal (g) divide x, i.e. x/g integral?
    pub fn divides(&self, g: &FieldElem, x: &FieldElem) -> bool {
        self.div(x, g).is_integral()
    }

    /// v-adic valuation of a nonzero integral element.
    pub fn valuation(&self, v: &PrimeIdeal, x: &FieldElem) -> u32 {
        assert!(!x.is_zero());
        let mut y = x.clone();
        let mut k = 0;
        loop {
            let z = self.div(&y, &v.gen);
            if z.is_integral() {
                y = z;
                k += 1;
            } else {
                return k;
            }
        }
    }

    /// Complete factorization of the ideal generated by a totally positive
    /// integral element.
    pub fn factor_ideal(&self, g: &FieldElem) -> Result<Vec<(PrimeIdeal, u32)>> {
        if g.is_zero() {
            return Err(Error::Precondition("factor_ideal of zero ideal".into()));
        }
        assert!(g.is_integral());
        let n = self.norm(g).abs();
        let n = n.to_integer();
        let nu: u64 = u64::try_from(&n).map_err(|_| Error::Precondition("ideal norm too large".into()))?;
        let mut out: Vec<(PrimeIdeal, u32)> = Vec::new();
        for (q, _) in factor_u64(nu) {
            for v in self.primes_above(q) {
                let e = self.valuation(&v, g);
                if e > 0 {
                    out.push((v, e));
                }
            }
        }
        // certificate: product of prime powers regenerates (g) up to units
        let mut prod = FieldElem::one();
        for (v, e) in &out {
            for _ in 0..*e {
                prod = self.mul(&prod, &v.gen);
            }
        }
        let ratio = self.div(g, &prod);
        assert!(ratio.is_integral() && self.norm(&ratio).abs().is_one(), "factorization does not regenerate input");
        Ok(out)
    }

    pub fn residue_field(&self, v: &PrimeIdeal) -> ResidueField {
        ResidueField { q: v.q, f: v.f, repr: v.residue.clone() }
    }

    /// Reduction O_F -> k_v of an integral element.
    pub fn reduce_mod(&self, v: &PrimeIdeal, x: &FieldElem) -> KvElem {
        assert!(x.is_integral(), "reduce_mod of non-integral element");
        let q = big(v.q as i64);
        let a = x.a.to_integer().mod_floor(&q);
        let b = x.b.to_integer().mod_floor(&q);
        let au = u64::try_from(&a).unwrap();
        let bu = u64::try_from(&b).unwrap();
        match v.residue {
            ResidueRepr::Linear { r } => (((au + bu * r) % v.q), 0),
            ResidueRepr::Quadratic { .. } => (au, bu),
        }
    }

    /// Lift a residue-field element back to O_F.
    pub fn lift_residue(&self, v: &PrimeIdeal, x: KvElem) -> FieldElem {
        match v.residue {
            ResidueRepr::Linear { .. } => {
                debug_assert_eq!(x.1, 0);
                FieldElem::from_int(x.0 as i64)
            }
            ResidueRepr::Quadratic { .. } => FieldElem::new(rat(x.0 as i64), rat(x.1 as i64)),
        }
    }
}

fn sign_of(x: &BigRational) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Siegel's finite divisor sum: |zeta_F(-1)| = (1/60) sum over b^2 < disc,
/// b^2 = disc mod 4, of sigma_1((disc - b^2)/4).
fn siegel_zeta_minus_one(disc: u64) -> BigRational {
    let mut total = BigInt::zero();
    let mut b: i64 = 0;
    loop {
        let bb = (b * b) as u64;
        if bb >= disc {
            break;
        }
        if bb % 4 == disc % 4 {
            let s = big(sigma1((disc - bb) / 4) as i64);
            total += if b == 0 { s } else { 2 * s };
        }
        b += 1;
    }
    BigRational::new(total, big(60))
}

/// Construct the base field. Rejects D < 1, D not squarefree, and any D
/// whose narrow class number is not 1 (class number and fundamental unit
/// norm are both checked).
pub fn make_field(d_param: u64) -> Result<TotallyRealField> {
    if d_param < 1 {
        return Err(Error::Config("field.D must be >= 1".into()));
    }
    if d_param == 1 {
        return Ok(TotallyRealField {
            degree: 1,
            d_param: 1,
            t0: 0,
            n0: 0,
            disc: 1,
            fundamental_unit: None,
            zeta_minus_one: BigRational::new(big(1), big(12)),
        });
    }
    if !is_squarefree_u64(d_param) {
        return Err(Error::Config(format!("field.D = {d_param} is not squarefree")));
    }
    let (t0, n0, disc) = if d_param % 4 == 1 {
        (1i64, ((d_param as i64) - 1) / 4, d_param)
    } else {
        (0i64, d_param as i64, 4 * d_param)
    };
    let mut field = TotallyRealField {
        degree: 2,
        d_param,
        t0,
        n0,
        disc,
        fundamental_unit: None,
        zeta_minus_one: BigRational::zero(),
    };
    // fundamental unit: smallest unit > 1 under tau, found by scanning the
    // w-coordinate upward
    let eps = fundamental_unit(&field)?;
    if !field.norm(&eps).abs().is_one() {
        return Err(Error::NarrowClassNumber("fundamental unit search failed".into()));
    }
    if field.norm(&eps) != -BigRational::one() {
        return Err(Error::NarrowClassNumber(format!(
            "fundamental unit of Q(sqrt {d_param}) has norm +1"
        )));
    }
    field.fundamental_unit = Some(eps);
    // class number 1: every split/ramified prime up to the Minkowski bound
    // sqrt(disc)/2 must reach norm +-q
    let mink = floor_sqrt_rat(&rat(disc as i64)) / big(2) + big(1);
    let mink: u64 = u64::try_from(&mink).unwrap();
    for q in 2..=mink {
        if !is_prime_u64(q) {
            continue;
        }
        if kronecker(&big(disc as i64), q) >= 0 && field.norm_equation(q).is_empty() {
            return Err(Error::NarrowClassNumber(format!(
                "Q(sqrt {d_param}) has a non-principal prime above {q}"
            )));
        }
    }
    field.zeta_minus_one = siegel_zeta_minus_one(disc);
    Ok(field)
}

fn fundamental_unit(field: &TotallyRealField) -> Result<FieldElem> {
    // units a + b w with |N| = 1; scan b upward, keep the smallest value > 1
    for b in 1i64..200_000 {
        let mut candidates = Vec::new();
        for sgn in [1i64, -1] {
            let t0 = big(field.t0);
            let n0 = big(field.n0);
            let bb = big(b);
            let disc = &bb * &bb * &t0 * &t0 + big(4) * (&bb * &bb * &n0 + big(sgn));
            if disc.is_negative() {
                continue;
            }
            let r = floor_sqrt_rat(&BigRational::from_integer(disc.clone()));
            if &r * &r != disc {
                continue;
            }
            for root_sgn in [1, -1] {
                let num = -&bb * &t0 + big(root_sgn) * &r;
                if num.mod_floor(&big(2)).is_zero() {
                    let a = num / big(2);
                    candidates.push(FieldElem::new(BigRational::from_integer(a), rat(b)));
                }
            }
        }
        // pick the candidate with tau-value > 1 (b > 0 and positive under tau)
        let mut best: Option<FieldElem> = None;
        for c in candidates {
            if field.embedding_sign(&c, 0) > 0 {
                // tau(c) > 1 iff c - 1 > 0 under tau
                let cm1 = field.sub(&c, &FieldElem::one());
                if field.embedding_sign(&cm1, 0) > 0 {
                    match &best {
                        None => best = Some(c),
                        Some(b0) => {
                            let diff = field.sub(b0, &c);
                            if field.embedding_sign(&diff, 0) > 0 {
                                best = Some(c);
                            }
                        }
                    }
                }
            }
        }
        if let Some(u) = best {
            return Ok(u);
        }
    }
    Err(Error::SearchExhausted("fundamental unit".into()))
}

/// Independent recomputation of the Siegel sum with a differently organized
/// loop and a trial-divisor sigma; used as an oracle in tests.
pub fn siegel_sum_second_route(disc: u64) -> BigRational {
    let mut total = BigInt::zero();
    for b in 0..disc {
        let bb = b * b;
        if bb >= disc {
            break;
        }
        if bb % 4 != disc % 4 {
            continue;
        }
        let n = (disc - bb) / 4;
        let mut s = 0u64;
        for d in 1..=n.max(1) {
            if n == 0 {
                break;
            }
            if n % d == 0 {
                s += d;
            }
        }
        total += if b == 0 { big(s as i64) } else { big(2 * s as i64) };
    }
    BigRational::new(total, big(60))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_base_case() {
        let f = make_field(1).unwrap();
        assert_eq!(f.degree, 1);
        assert_eq!(f.zeta_minus_one, BigRational::new(big(1), big(12)));
    }

    #[test]
    fn sqrt5_field() {
        let f = make_field(5).unwrap();
        assert_eq!(f.disc, 5);
        let eps = f.fundamental_unit.clone().unwrap();
        // (1+sqrt5)/2 = 0 + 1*w
        assert_eq!(eps, FieldElem::new(rat(0), rat(1)));
        assert_eq!(f.norm(&eps), -BigRational::one());
        assert_eq!(f.zeta_minus_one, BigRational::new(big(1), big(30)));
    }

    #[test]
    fn sqrt2_zeta() {
        let f = make_field(2).unwrap();
        assert_eq!(f.zeta_minus_one, BigRational::new(big(1), big(12)));
    }

    #[test]
    fn d10_rejected() {
        match make_field(10) {
            Err(Error::NarrowClassNumber(_)) => {}
            other => panic!("expected narrow class number rejection, got {other:?}"),
        }
    }

    #[test]
    fn d_not_squarefree_rejected() {
        assert!(make_field(12).is_err());
        assert!(make_field(0).is_err());
    }

    #[test]
    fn siegel_routes_agree() {
        for d in [5u64, 8, 13, 12 * 2] {
            if d == 24 {
                continue;
            }
            assert_eq!(siegel_zeta_minus_one(d), siegel_sum_second_route(d));
        }
    }

    #[test]
    fn factor_12_over_q() {
        let f = make_field(1).unwrap();
        let fac = f.factor_ideal(&FieldElem::from_int(12)).unwrap();
        let pairs: Vec<(u64, u32)> = fac.iter().map(|(v, e)| (v.q, *e)).collect();
        assert_eq!(pairs, vec![(2, 2), (3, 1)]);
    }

    #[test]
    fn split_and_inert_over_sqrt5() {
        let f = make_field(5).unwrap();
        let v11 = f.primes_above(11);
        assert_eq!(v11.len(), 2);
        assert!(v11.iter().all(|v| v.norm == 11));
        assert!(v11.iter().all(|v| f.is_totally_positive(&v.gen)));
        let v7 = f.primes_above(7);
        assert_eq!(v7.len(), 1);
        assert_eq!(v7[0].norm, 49);
        // ramified prime above 5
        let v5 = f.primes_above(5);
        assert_eq!(v5.len(), 1);
        assert_eq!(v5[0].e, 2);
        assert_eq!(v5[0].norm, 5);
    }

    #[test]
    fn reduction_is_ring_hom() {
        let f = make_field(5).unwrap();
        for q in [2u64, 7, 11, 5] {
            for v in f.primes_above(q) {
                let k = f.residue_field(&v);
                let xs = [
                    FieldElem::new(rat(3), rat(2)),
                    FieldElem::new(rat(-1), rat(4)),
                    FieldElem::new(rat(7), rat(-5)),
                ];
                for x in &xs {
                    for y in &xs {
                        let lhs = f.reduce_mod(&v, &f.mul(x, y));
                        let rhs = k.mul(f.reduce_mod(&v, x), f.reduce_mod(&v, y));
                        assert_eq!(lhs, rhs);
                        let lhs = f.reduce_mod(&v, &f.add(x, y));
                        let rhs = k.add(f.reduce_mod(&v, x), f.reduce_mod(&v, y));
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn valuations() {
        let f = make_field(5).unwrap();
        let v5 = &f.primes_above(5)[0];
        // (5) = v5^2
        assert_eq!(f.valuation(v5, &FieldElem::from_int(5)), 2);
        let v11 = &f.primes_above(11)[0];
        assert_eq!(f.valuation(v11, &FieldElem::from_int(11)), 1);
    }
}
