//! Zeta values of `F_q[t]` and truncated Euler products over monic
//! irreducibles, evaluated in binary fixed point with a rigorous tail bound.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{odd_prime_power, Field};
use crate::poly::{irreducible_count, irreducibles_up_to};

/// Fractional bits of the fixed-point format (about 96 decimal digits).
pub const FRAC_BITS: u64 = 320;

/// A real number `m / 2^FRAC_BITS`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixed(BigInt);

impl Fixed {
    pub fn one() -> Fixed {
        Fixed(BigInt::one() << FRAC_BITS)
    }

    pub fn zero() -> Fixed {
        Fixed(BigInt::zero())
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.0
    }

    /// `num / den`, rounded to the nearest representable value.
    pub fn from_ratio(num: &BigInt, den: &BigInt) -> Fixed {
        let n = (num << (FRAC_BITS + 1)) + den;
        Fixed(n.div_floor(&(den * 2)))
    }

    pub fn from_rational(x: &BigRational) -> Fixed {
        Fixed::from_ratio(x.numer(), x.denom())
    }

    pub fn from_int(n: i64) -> Fixed {
        Fixed(BigInt::from(n) << FRAC_BITS)
    }

    fn round_shift(x: BigInt) -> BigInt {
        (x + (BigInt::one() << (FRAC_BITS - 1))) >> FRAC_BITS
    }

    pub fn mul(&self, other: &Fixed) -> Fixed {
        Fixed(Fixed::round_shift(&self.0 * &other.0))
    }

    pub fn div(&self, other: &Fixed) -> Result<Fixed> {
        if other.0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Fixed::from_ratio(&self.0, &other.0))
    }

    pub fn add(&self, other: &Fixed) -> Fixed {
        Fixed(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Fixed) -> Fixed {
        Fixed(&self.0 - &other.0)
    }

    pub fn mul_int(&self, n: &BigInt) -> Fixed {
        Fixed(&self.0 * n)
    }

    pub fn pow(&self, mut e: u128) -> Fixed {
        let mut base = self.clone();
        let mut acc = Fixed::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn abs(&self) -> Fixed {
        Fixed(self.0.abs())
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        let shift = FRAC_BITS.saturating_sub(64);
        (&self.0 >> shift).to_f64().unwrap_or(f64::NAN) / 2f64.powi((FRAC_BITS - shift) as i32)
    }

    /// `ln(1 - z)` for `0 <= z < 1`, via `-2 atanh(z / (2 - z))`.
    pub fn ln_one_minus(z: &Fixed) -> Result<Fixed> {
        if z.is_negative() || *z >= Fixed::one() {
            return Err(Error::Domain("ln(1 - z) needs 0 <= z < 1".into()));
        }
        let y = z.div(&Fixed::from_int(2).sub(z))?;
        let y2 = y.mul(&y);
        let mut term = y;
        let mut sum = Fixed::zero();
        let mut n = 1i64;
        while !term.0.is_zero() {
            sum = sum.add(&Fixed(&term.0 / n));
            term = term.mul(&y2);
            n += 2;
        }
        Ok(Fixed(-(sum.0 << 1u32)))
    }

    /// `e^x` by halving into the range where the Taylor series is short.
    pub fn exp(&self) -> Fixed {
        let mut halvings = 0u32;
        let mut x = self.clone();
        let small = BigInt::one() << (FRAC_BITS - 12);
        while x.0.abs() > small {
            x = Fixed(x.0 >> 1);
            halvings += 1;
        }
        let mut sum = Fixed::one();
        let mut term = Fixed::one();
        let mut n = 1i64;
        loop {
            term = Fixed(term.mul(&x).0 / n);
            if term.0.is_zero() {
                break;
            }
            sum = sum.add(&term);
            n += 1;
        }
        for _ in 0..halvings {
            sum = sum.mul(&sum);
        }
        sum
    }

    /// Decimal expansion truncated to `digits` places after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let neg = self.0.is_negative();
        let scaled = (self.0.abs() * BigInt::from(10u32).pow(digits as u32)) >> FRAC_BITS;
        let s = format!("{:0>width$}", scaled.to_string(), width = digits + 1);
        let (int, frac) = s.split_at(s.len() - digits);
        format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(50))
    }
}

/// `zeta_q(s) = 1 / (1 - q^(1-s))` for integers `s >= 2`.
pub fn zeta_q(s: u32, q: u64) -> Result<BigRational> {
    if s < 2 {
        return Err(Error::Domain(format!("zeta_q(s) is evaluated only for s >= 2, got {s}")));
    }
    if q < 2 {
        return Err(Error::Domain(format!("q must be at least 2, got {q}")));
    }
    let t = BigInt::from(q).pow(s - 1);
    Ok(BigRational::new(t.clone(), t - 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EulerKind {
    /// `prod (1 - |P|^-2 / (1 + |P|^-1)^2)`.
    L,
    /// `prod (1 + 3|P|^-1) / ((1 + |P|^-1)(1 + 2|P|^-1))`.
    K,
    /// `prod |P|^(b-1) (|P| + b) / (|P| + 1)^b`.
    LBeta(u32),
}

impl EulerKind {
    /// The factor at `|P| = x` as an exact ratio.
    pub fn factor(self, x: &BigInt) -> (BigInt, BigInt) {
        let x1: BigInt = x + 1;
        match self {
            EulerKind::L => (x * (x + 2u32), &x1 * &x1),
            EulerKind::K => (x * (x + 3u32), &x1 * (x + 2u32)),
            EulerKind::LBeta(b) => (x.pow(b - 1) * (x + b), x1.pow(b)),
        }
    }

    /// A constant `c` with `0 <= 1 - factor <= c / |P|^2`.
    fn tail_constant(self) -> u64 {
        match self {
            EulerKind::L => 1,
            EulerKind::K => 2,
            EulerKind::LBeta(b) => (1u64 << b) - 1 - b as u64,
        }
    }

    pub fn label(self) -> String {
        match self {
            EulerKind::L => "L".into(),
            EulerKind::K => "K".into(),
            EulerKind::LBeta(b) => format!("L_{b}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerProductSpec {
    pub q: u64,
    pub kind: EulerKind,
    pub max_degree: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EulerValue {
    pub spec: EulerProductSpec,
    /// Product over irreducibles of degree at most `max_degree`.
    pub value: Fixed,
    /// The full product lies in `[value - tail_bound, value]`.
    pub tail_bound: f64,
}

impl EulerValue {
    pub fn lower(&self) -> f64 {
        self.value.to_f64() - self.tail_bound
    }

    pub fn upper(&self) -> f64 {
        self.value.to_f64()
    }
}

/// Degrees whose monic polynomials are few enough to test one by one.
const EXPLICIT_LIMIT: u128 = 20_000;
const MAX_DEGREE: u32 = 64;

/// `sum_{nu > d} q^-nu / nu <= q^-(d+1) / ((d+1)(1 - 1/q))`.
fn tail_sum(q: u64, d: u32) -> f64 {
    (q as f64).powi(-(d as i32 + 1)) / ((d as f64 + 1.0) * (1.0 - 1.0 / q as f64))
}

pub fn euler_product(spec: &EulerProductSpec) -> Result<EulerValue> {
    let mut all = euler_truncations(spec.q, &[spec.kind], spec.max_degree)?;
    Ok(all.remove(0).pop().expect("at least one truncation"))
}

/// For each kind, the truncations at every degree `1..=max_degree`.
///
/// Irreducibles of small degree are enumerated once and multiplied in one by
/// one; above that the factor of a degree is raised to the number of
/// irreducibles of that degree.
pub fn euler_truncations(q: u64, kinds: &[EulerKind], max_degree: u32) -> Result<Vec<Vec<EulerValue>>> {
    odd_prime_power(q)?;
    if max_degree == 0 || max_degree > MAX_DEGREE {
        return Err(Error::Domain(format!("truncation degree must be in 1..={MAX_DEGREE}")));
    }
    if kinds.contains(&EulerKind::LBeta(0)) {
        return Err(Error::Domain("beta must be at least 1".into()));
    }
    let explicit_top =
        (1..=max_degree.min(6)).take_while(|&nu| (q as u128).pow(nu) <= EXPLICIT_LIMIT).last().unwrap_or(0);
    let explicit = if explicit_top > 0 {
        let k = Field::with_q(q)?;
        irreducibles_up_to(&k, explicit_top as usize)
    } else {
        Vec::new()
    };
    for (i, polys) in explicit.iter().enumerate() {
        let count = irreducible_count(q, i as u32 + 1);
        if polys.len() as u128 != count {
            return Err(Error::Structural(format!(
                "degree {}: {} irreducibles found, {count} expected",
                i + 1,
                polys.len()
            )));
        }
    }
    let mut out = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let mut value = Fixed::one();
        let mut rows = Vec::with_capacity(max_degree as usize);
        for nu in 1..=max_degree {
            match explicit.get(nu as usize - 1) {
                Some(polys) => {
                    for p in polys {
                        let (num, den) = kind.factor(&BigInt::from(q).pow(p.deg() as u32));
                        value = value.mul(&Fixed::from_ratio(&num, &den));
                    }
                }
                None => {
                    let (num, den) = kind.factor(&BigInt::from(q).pow(nu));
                    value = value.mul(&Fixed::from_ratio(&num, &den).pow(irreducible_count(q, nu)));
                }
            }
            let tail_bound = value.to_f64() * kind.tail_constant() as f64 * tail_sum(q, nu);
            rows.push(EulerValue { spec: EulerProductSpec { q, kind, max_degree: nu }, value: value.clone(), tail_bound });
        }
        out.push(rows);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Remark44Row {
    pub degree: u32,
    /// `(1 - 1/(q^nu + 1)^2)^(q^nu / nu)`.
    pub factor: Fixed,
    /// Product of the factors up to `degree`.
    pub value: Fixed,
    pub tail_bound: f64,
}

/// Truncations of `prod_nu (1 - 1/(q^nu+1)^2)^(q^nu/nu)` for `nu <= 1..=max_degree`.
pub fn remark44(q: u64, max_degree: u32) -> Result<Vec<Remark44Row>> {
    if q < 3 {
        return Err(Error::Domain(format!("q must be at least 3, got {q}")));
    }
    if max_degree == 0 || max_degree > MAX_DEGREE {
        return Err(Error::Domain(format!("truncation degree must be in 1..={MAX_DEGREE}")));
    }
    let mut log_sum = Fixed::zero();
    let mut rows = Vec::new();
    for nu in 1..=max_degree {
        let x = BigInt::from(q).pow(nu);
        let z = Fixed::from_ratio(&BigInt::one(), &((&x + 1) * (&x + 1)));
        let log = Fixed::ln_one_minus(&z)?;
        let log = Fixed::from_ratio(&(log.0 * &x), &(BigInt::from(nu) << FRAC_BITS));
        log_sum = log_sum.add(&log);
        let value = log_sum.exp();
        let tail_bound = value.to_f64() * tail_sum(q, nu);
        rows.push(Remark44Row { degree: nu, factor: log.exp(), value, tail_bound });
    }
    Ok(rows)
}
