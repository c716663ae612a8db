//! The curated high-degree feedback polynomials are accepted by table
//! lookup at runtime. This proves them primitive with separate 128-bit
//! GF(2)[x] arithmetic: Rabin's irreducibility test plus the order of `x`
//! against the known factorization of `2^u − 1`.

use wiretap_auth::lfsr_hash::{validate_poly, GenPoly, CURATED_POLYNOMIALS};

fn degree(a: u128) -> i32 {
    127 - a.leading_zeros() as i32
}

fn mulmod(mut a: u128, mut b: u128, m: u128) -> u128 {
    let dm = degree(m);
    let mut r = 0;
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
        if (a >> dm) & 1 == 1 {
            a ^= m;
        }
    }
    r
}

fn powmod_x(mut e: u128, m: u128) -> u128 {
    let mut result = 1u128;
    let mut base = 2u128;
    while e > 0 {
        if e & 1 == 1 {
            result = mulmod(result, base, m);
        }
        base = mulmod(base, base, m);
        e >>= 1;
    }
    result
}

/// `x^(2^k) mod m` by repeated squaring.
fn x_pow_2k(k: u32, m: u128) -> u128 {
    let mut r = 2u128;
    for _ in 0..k {
        r = mulmod(r, r, m);
    }
    r
}

fn poly_mod(mut a: u128, m: u128) -> u128 {
    let dm = degree(m);
    while a != 0 && degree(a) >= dm {
        a ^= m << (degree(a) - dm);
    }
    a
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

fn full(poly: &GenPoly) -> u128 {
    (1u128 << poly.degree()) | poly.taps()
}

fn is_primitive(poly: &GenPoly, order_prime_factors: &[u128]) -> bool {
    let m = full(poly);
    let u = poly.degree() as u32;
    if x_pow_2k(u, m) != 2 {
        return false;
    }
    let prime_divisors_of_u: Vec<u32> = (2..=u)
        .filter(|d| u % d == 0 && (2..*d).all(|k| d % k != 0))
        .collect();
    for r in prime_divisors_of_u {
        if gcd(m, x_pow_2k(u / r, m) ^ 2) != 1 {
            return false;
        }
    }
    let order = (1u128 << u) - 1;
    assert_eq!(
        order_prime_factors.iter().product::<u128>(),
        order,
        "factorization must be square-free and complete"
    );
    order_prime_factors
        .iter()
        .all(|&f| powmod_x(order / f, m) != 1)
}

#[test]
fn curated_degree_101_is_primitive() {
    let poly = GenPoly::from_exponents(&[101, 84, 66, 49, 32, 16, 0]).unwrap();
    assert!(is_primitive(
        &poly,
        &[7_432_339_208_719, 341_117_531_003_194_129]
    ));
    assert!(validate_poly(&poly));
}

#[test]
fn curated_degree_64_is_primitive() {
    let poly = GenPoly::from_exponents(&[64, 9, 8, 7, 6, 3, 0]).unwrap();
    assert!(is_primitive(
        &poly,
        &[3, 5, 17, 257, 641, 65_537, 6_700_417]
    ));
    assert!(validate_poly(&poly));
}

#[test]
fn curated_table_has_exactly_those_entries() {
    assert_eq!(CURATED_POLYNOMIALS.len(), 2);
    assert_eq!(
        GenPoly::curated(101).unwrap().exponents(),
        vec![101, 84, 66, 49, 32, 16, 0]
    );
    assert_eq!(
        GenPoly::curated(64).unwrap().exponents(),
        vec![64, 9, 8, 7, 6, 3, 0]
    );
    assert!(GenPoly::curated(80).is_none());
}

#[test]
fn rabin_check_agrees_with_exact_check_at_small_degree() {
    // 2^7 − 1 is prime, so every irreducible degree-7 polynomial is primitive.
    for taps in (1u128..128).step_by(2) {
        let poly = GenPoly::new(7, taps).unwrap();
        assert_eq!(
            is_primitive(&poly, &[127]),
            validate_poly(&poly),
            "taps {taps:#b}"
        );
    }
}
