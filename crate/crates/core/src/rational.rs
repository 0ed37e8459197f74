//! Rational scalars and the π-tagged extension used for circular sections.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rational = num_rational::BigRational;

/// Shorthand constructor `n/d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical text form: `n` for integers, `n/d` otherwise.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Always `num/den`, the form used in JSON artifacts.
pub fn fmt_fraction(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `n`, `-n` or `n/d`.
pub fn parse_fraction(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    (!d.is_zero()).then(|| Rational::new(n, d))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// A value `coef · π^pi_pow`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiRational {
    pub coef: Rational,
    pub pi_pow: i32,
}

impl PiRational {
    pub fn new(coef: Rational, pi_pow: i32) -> Self {
        PiRational { coef, pi_pow }
    }

    pub fn rational(coef: Rational) -> Self {
        PiRational { coef, pi_pow: 0 }
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.coef) * std::f64::consts::PI.powi(self.pi_pow)
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_zero()
    }
}

impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_pow {
            _ if self.coef.is_zero() => write!(f, "0"),
            0 => write!(f, "{}", fmt_rational(&self.coef)),
            1 => write!(f, "{}*pi", fmt_rational(&self.coef)),
            k => write!(f, "{}*pi^{}", fmt_rational(&self.coef), k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_round_trip() {
        for s in ["3/10", "-7", "0", "12/4"] {
            let r = parse_fraction(s).unwrap();
            assert_eq!(parse_fraction(&fmt_fraction(&r)).unwrap(), r);
        }
        assert_eq!(fmt_rational(&rat(12, 4)), "3");
        assert!(parse_fraction("1/0").is_none());
        assert!(parse_fraction("0.3").is_none());
    }

    #[test]
    fn pi_tagged_float() {
        let v = PiRational::new(rat(1, 2), 1);
        assert!((v.to_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(v.to_string(), "1/2*pi");
    }
}
