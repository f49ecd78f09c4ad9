//! Small exact-arithmetic helpers shared across modules: integer square
//! roots of rationals, Kronecker symbols, Hensel lifting mod p^k, divisor
//! sums, and primality at desk scale.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_integer::Roots as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(big(n))
}

/// floor(sqrt(x)) for a nonnegative rational x.
pub fn floor_sqrt_rat(x: &BigRational) -> BigInt {
    assert!(!x.is_negative(), "floor_sqrt_rat of negative rational");
    if x.is_zero() {
        return BigInt::zero();
    }
    let p = x.numer().to_biguint().unwrap();
    let q = x.denom().to_biguint().unwrap();
    // floor(sqrt(p/q)) = floor(floor(sqrt(p*q)) / q)
    let s = (&p * &q).sqrt();
    BigInt::from(s / q)
}

/// ceil(sqrt(x)) for a nonnegative rational x.
pub fn ceil_sqrt_rat(x: &BigRational) -> BigInt {
    let f = floor_sqrt_rat(x);
    let f2 = BigRational::from_integer(&f * &f);
    if &f2 == x {
        f
    } else {
        f + BigInt::one()
    }
}

/// Trial-division primality; fine for desk-scale inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree_u64(n: u64) -> bool {
    factor_u64(n).iter().all(|&(_, e)| e == 1)
}

/// Sum of positive divisors sigma_1(n).
pub fn sigma1(n: u64) -> u64 {
    let mut s = 1u64;
    for (p, e) in factor_u64(n) {
        let mut t = 1u64;
        let mut pe = 1u64;
        for _ in 0..e {
            pe *= p;
            t += pe;
        }
        s *= t;
    }
    s
}

/// Legendre symbol (a|p) for odd prime p.
pub fn legendre(a: &BigInt, p: u64) -> i32 {
    let pb = big(p as i64);
    let mut r = a.mod_floor(&pb);
    if r.is_zero() {
        return 0;
    }
    // Euler criterion with u64 exponentiation mod p.
    let ru = r.to_biguint().unwrap();
    let e = (p - 1) / 2;
    let m = ru.modpow(&BigUint::from(e), &BigUint::from(p));
    if m.is_one() {
        1
    } else {
        r = BigInt::from(m);
        debug_assert_eq!(r, big(p as i64 - 1));
        -1
    }
}

/// Kronecker symbol (a|n) for n > 0.
pub fn kronecker(a: &BigInt, n: u64) -> i32 {
    if n == 0 {
        return 0;
    }
    let mut result = 1i32;
    for (p, e) in factor_u64(n) {
        let s = if p == 2 {
            if a.is_even() {
                0
            } else {
                // (a|2) = (2|a) = (-1)^((a^2-1)/8)
                let a8 = a.mod_floor(&big(8));
                if a8 == big(1) || a8 == big(7) {
                    1
                } else {
                    -1
                }
            }
        } else {
            legendre(a, p)
        };
        if s == 0 {
            return 0;
        }
        if e % 2 == 1 {
            result *= s;
        }
    }
    result
}

/// x with x^2 = a mod p^k and x = seed mod p, by Hensel lifting (p odd,
/// a and seed units). Panics if seed^2 != a mod p.
pub fn hensel_sqrt(a: &BigUint, seed: u64, p: u64, k: u32) -> BigUint {
    let pk = BigUint::from(p).pow(k);
    let mut x = BigUint::from(seed);
    assert_eq!(
        (&x * &x) % BigUint::from(p),
        a % BigUint::from(p),
        "hensel seed is not a square root mod p"
    );
    // Newton iteration x <- (x + a/x)/2 doubles precision each step.
    let mut prec = 1u32;
    while prec < k {
        prec = (prec * 2).min(k);
        let m = BigUint::from(p).pow(prec);
        let inv_x = modinv(&(&x % &m), &m);
        let inv2 = modinv(&BigUint::from(2u32), &m);
        x = ((&x + (a % &m) * inv_x) % &m * inv2) % &m;
    }
    x % pk
}

/// Modular inverse for a unit mod m (m a prime power in our uses).
pub fn modinv(a: &BigUint, m: &BigUint) -> BigUint {
    let ai = BigInt::from(a.clone());
    let mi = BigInt::from(m.clone());
    let e = ai.extended_gcd(&mi);
    assert!(e.gcd.is_one(), "modinv of non-unit");
    e.x.mod_floor(&mi).to_biguint().unwrap()
}

/// Teichmueller lift of a unit mod p^k (p odd): the unique root of unity of
/// order dividing p-1 congruent to a mod p.
pub fn teichmuller(a: &BigUint, p: u64, k: u32) -> BigUint {
    let pk = BigUint::from(p).pow(k);
    let mut x = a % &pk;
    // Iterating x -> x^p converges to the Teichmueller representative.
    for _ in 0..k {
        x = x.modpow(&BigUint::from(p), &pk);
    }
    x
}

/// Unique square root of a in the group 1 + pZ/p^k (p odd, a = 1 mod p).
pub fn sqrt_one_plus_p(a: &BigUint, p: u64, k: u32) -> BigUint {
    let pk = BigUint::from(p).pow(k);
    let a = a % &pk;
    assert!(
        (&a % BigUint::from(p)).is_one(),
        "sqrt_one_plus_p needs a = 1 mod p"
    );
    if k == 1 {
        return BigUint::one();
    }
    // (1+pZ)/p^k is cyclic of order p^(k-1); squaring is inverted by
    // raising to ((p^(k-1))+1)/2.
    let ord = BigUint::from(p).pow(k - 1);
    let e = (&ord + BigUint::one()) / BigUint::from(2u32);
    a.modpow(&e, &pk)
}

/// gcd of two BigInts, nonnegative.
pub fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_rat_bounds() {
        let x = BigRational::new(big(50), big(2)); // 25
        assert_eq!(floor_sqrt_rat(&x), big(5));
        assert_eq!(ceil_sqrt_rat(&x), big(5));
        let y = BigRational::new(big(26), big(1));
        assert_eq!(floor_sqrt_rat(&y), big(5));
        assert_eq!(ceil_sqrt_rat(&y), big(6));
        let z = BigRational::new(big(1), big(2));
        assert_eq!(floor_sqrt_rat(&z), big(0));
        assert_eq!(ceil_sqrt_rat(&z), big(1));
    }

    #[test]
    fn legendre_small() {
        assert_eq!(legendre(&big(-3), 7), 1); // -3 = 4 mod 7
        assert_eq!(legendre(&big(-3), 11), -1);
        assert_eq!(legendre(&big(5), 11), 1); // 5 = 16 mod 11
        assert_eq!(legendre(&big(5), 7), -1);
        assert_eq!(legendre(&big(14), 7), 0);
    }

    #[test]
    fn hensel_and_teichmuller() {
        // sqrt(-143) mod 7^4 from seed 2 (-143 = 4 mod 7)
        let p7_4 = BigUint::from(7u32).pow(4);
        let a = BigInt::from(-143).mod_floor(&big(2401)).to_biguint().unwrap();
        let r = hensel_sqrt(&a, 2, 7, 4);
        assert_eq!((&r * &r) % &p7_4, a);
        let t = teichmuller(&BigUint::from(3u32), 7, 4);
        assert_eq!(t.modpow(&BigUint::from(6u32), &p7_4), BigUint::one());
        assert_eq!(&t % BigUint::from(7u32), BigUint::from(3u32));
    }

    #[test]
    fn sqrt_in_one_plus_p() {
        // spec worked value: 22^2 = 43 mod 49, sqrt(43) = 22
        let r = sqrt_one_plus_p(&BigUint::from(43u32), 7, 2);
        assert_eq!(r, BigUint::from(22u32));
        let a = BigUint::from(1u32 + 7 * 5);
        let s = sqrt_one_plus_p(&((&a * &a) % BigUint::from(2401u32)), 7, 4);
        assert_eq!(s, a);
    }

    #[test]
    fn sigma_and_factor() {
        assert_eq!(sigma1(1), 1);
        assert_eq!(sigma1(2), 3);
        assert_eq!(sigma1(12), 28);
        assert!(is_squarefree_u64(143));
        assert!(!is_squarefree_u64(121));
    }
}
