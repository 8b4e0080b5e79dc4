//! Adams' function `m(s)`, the order `n(q)`, and the divisibility verdict.

use crate::prelude::*;

use num_bigint::BigUint;
use num_integer::Integer;

use crate::error::{Error, Result};

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Largest `e` with `p^e | n`.
pub fn nu_p(p: u64, n: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if n == 0 {
        return Err(Error::Invalid("valuation of 0 is undefined".into()));
    }
    let (mut n, mut e) = (n, 0);
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    Ok(e)
}

/// Primes `p` with `(p-1) | s`; the only ones contributing to `m(s)`.
fn contributing_primes(s: u64) -> Vec<u64> {
    (2..=s + 1).filter(|&p| is_prime(p) && s % (p - 1) == 0).collect()
}

/// `m(s) = Π_p p^{ν_p(m(s))}` with `ν_2 = 2 + ν_2(s)` for even `s`, `1` for odd `s`,
/// and `ν_p = 1 + ν_p(s)` for odd `p` with `(p-1) | s`.
pub fn adams_m(s: u64) -> Result<BigUint> {
    if s == 0 {
        return Err(Error::Invalid("m(s) needs s ≥ 1".into()));
    }
    let mut m = BigUint::from(1u32);
    for p in contributing_primes(s) {
        let e = if p == 2 {
            if s.is_even() {
                2 + nu_p(2, s)?
            } else {
                1
            }
        } else {
            1 + nu_p(p, s)?
        };
        m *= BigUint::from(p).pow(e);
    }
    Ok(m)
}

fn check_q(q: u64) -> Result<()> {
    if q < 4 || (q % 8 != 0 && q % 8 != 4) {
        return Err(Error::InadmissibleQ(q));
    }
    Ok(())
}

/// `n(q) = m(q/2)` for `q ≡ 0 mod 8`, `2 m(q/2)` for `q ≡ 4 mod 8`.
pub fn n_of_q(q: u64) -> Result<BigUint> {
    check_q(q)?;
    let m = adams_m(q / 2)?;
    Ok(if q % 8 == 0 { m } else { m * 2u32 })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JGroupInfo {
    pub q: u64,
    pub s: u64,
    /// `m(q/2)`.
    pub m: BigUint,
    pub n: BigUint,
    /// Order of `J(S^q)`, equal to `m(2s)`.
    pub j_order: BigUint,
}

pub fn jgroup_info(q: u64) -> Result<JGroupInfo> {
    check_q(q)?;
    let m = adams_m(q / 2)?;
    Ok(JGroupInfo { q, s: q / 4, n: n_of_q(q)?, j_order: m.clone(), m })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    /// Bifurcation is guaranteed; `false` means no conclusion, not absence.
    pub bifurcates: bool,
    pub mu: i64,
    pub n: BigUint,
    /// `|μ| mod n(q)`.
    pub residue: BigUint,
}

pub fn verdict(mu: i64, q: u64) -> Result<Verdict> {
    let n = n_of_q(q)?;
    let residue = BigUint::from(mu.unsigned_abs()) % &n;
    Ok(Verdict { bifurcates: residue != BigUint::from(0u32), mu, n, residue })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn valuations() {
        assert_eq!(nu_p(2, 24).unwrap(), 3);
        assert_eq!(nu_p(3, 24).unwrap(), 1);
        assert_eq!(nu_p(5, 24).unwrap(), 0);
        assert!(matches!(nu_p(4, 24), Err(Error::NotPrime(4))));
    }

    #[test]
    fn adams_values() {
        assert_eq!(adams_m(1).unwrap(), big(2));
        assert_eq!(adams_m(2).unwrap(), big(24));
        assert_eq!(adams_m(4).unwrap(), big(240));
        assert_eq!(adams_m(6).unwrap(), big(504));
    }

    #[test]
    fn n_values() {
        assert_eq!(n_of_q(4).unwrap(), big(48));
        assert_eq!(n_of_q(8).unwrap(), big(240));
        assert_eq!(n_of_q(12).unwrap(), big(1008));
        assert!(matches!(n_of_q(6), Err(Error::InadmissibleQ(6))));
        assert!(n_of_q(0).is_err());
    }

    #[test]
    fn jgroup_of_eight() {
        let j = jgroup_info(8).unwrap();
        assert_eq!((j.m.clone(), j.n.clone(), j.j_order.clone(), j.s), (big(240), big(240), big(240), 2));
    }

    #[test]
    fn verdicts() {
        assert!(verdict(4, 4).unwrap().bifurcates);
        assert!(verdict(-4, 4).unwrap().bifurcates);
        assert!(!verdict(0, 4).unwrap().bifurcates);
        assert!(!verdict(48, 4).unwrap().bifurcates);
    }

    #[test]
    fn m_is_even() {
        for s in 1..=40 {
            assert!(adams_m(s).unwrap().is_even());
        }
    }

    proptest! {
        #[test]
        fn verdict_sign_and_residue_invariant(mu in -10_000i64..10_000, k in -20i64..20, qi in 1u64..4) {
            let q = 4 * qi;
            let n: i64 = n_of_q(q).unwrap().try_into().unwrap();
            let a = verdict(mu, q).unwrap().bifurcates;
            prop_assert_eq!(a, verdict(-mu, q).unwrap().bifurcates);
            prop_assert_eq!(a, verdict(mu + k * n, q).unwrap().bifurcates);
        }
    }
}
