//! Dense univariate polynomials over `F_q`.
//!
//! A [`Poly`] does not carry its field; every operation that needs field
//! arithmetic takes the [`Field`] explicitly. Coefficients are stored in
//! ascending degree order with trailing zeros trimmed, so the zero polynomial
//! is the empty vector.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Elem, Field};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Elem>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Elem>) -> Poly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_indices(indices: &[u32]) -> Poly {
        Poly::new(indices.iter().map(|&i| Elem(i)).collect())
    }

    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly { coeffs: vec![Elem::ONE] }
    }

    pub fn constant(c: Elem) -> Poly {
        Poly::new(vec![c])
    }

    /// The monic linear polynomial `t - a`.
    pub fn linear_root(k: &Field, a: Elem) -> Poly {
        Poly::new(vec![k.neg(a), Elem::ONE])
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(Elem::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0; callers must rule out zero first.
    pub fn deg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<Elem> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(Elem::ONE)
    }

    pub fn add(&self, other: &Poly, k: &Field) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| k.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn neg(&self, k: &Field) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| k.neg(c)).collect())
    }

    pub fn sub(&self, other: &Poly, k: &Field) -> Poly {
        self.add(&other.neg(k), k)
    }

    pub fn scale(&self, c: Elem, k: &Field) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| k.mul(a, c)).collect())
    }

    pub fn mul(&self, other: &Poly, k: &Field) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Elem::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = k.add(out[i + j], k.mul(a, b));
            }
        }
        Poly::new(out)
    }

    pub fn divrem(&self, divisor: &Poly, k: &Field) -> Result<(Poly, Poly)> {
        let lead = divisor.leading().ok_or(Error::DivisionByZero)?;
        let lead_inv = k.inv(lead)?;
        let dd = divisor.deg();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![Elem::ZERO; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = k.mul(rem[i], lead_inv);
            if c.is_zero() {
                continue;
            }
            quot[i - dd] = c;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[i - dd + j] = k.sub(rem[i - dd + j], k.mul(c, d));
            }
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    pub fn rem(&self, divisor: &Poly, k: &Field) -> Result<Poly> {
        Ok(self.divrem(divisor, k)?.1)
    }

    /// Exact quotient; errors if `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Poly, k: &Field) -> Result<Poly> {
        let (q, r) = self.divrem(divisor, k)?;
        if !r.is_zero() {
            return Err(Error::Domain(format!("{divisor} does not divide {self}")));
        }
        Ok(q)
    }

    pub fn divides(&self, other: &Poly, k: &Field) -> Result<bool> {
        Ok(other.rem(self, k)?.is_zero())
    }

    /// Scales to leading coefficient 1; the zero polynomial is returned unchanged.
    pub fn monic(&self, k: &Field) -> Poly {
        match self.leading() {
            Some(c) if c != Elem::ONE => self.scale(k.inv(c).expect("nonzero leading coefficient"), k),
            _ => self.clone(),
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly, k: &Field) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b, k).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic(k)
    }

    pub fn is_coprime(&self, other: &Poly, k: &Field) -> bool {
        self.gcd(other, k).deg() == 0 && !(self.is_zero() && other.is_zero())
    }

    pub fn derivative(&self, k: &Field) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| k.mul(k.from_int(i as i64), c))
                .collect(),
        )
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Elem, k: &Field) -> Elem {
        self.coeffs.iter().rev().fold(Elem::ZERO, |acc, &c| k.add(k.mul(acc, x), c))
    }

    /// True iff no irreducible factor is repeated, decided by `gcd(f, f')`.
    pub fn is_squarefree(&self, k: &Field) -> Result<bool> {
        if self.is_zero() {
            return Err(Error::Domain("square-freeness of the zero polynomial".into()));
        }
        if self.is_constant() {
            return Ok(true);
        }
        let d = self.derivative(k);
        if d.is_zero() {
            // f is a p-th power of positive degree
            return Ok(false);
        }
        Ok(self.gcd(&d, k).is_constant())
    }

    /// Value of `chi(F(infinity))`: 0 for odd degree, otherwise the character
    /// of the leading coefficient.
    pub fn infinity_character(&self, k: &Field) -> Result<i8> {
        let lead = self
            .leading()
            .ok_or_else(|| Error::Domain("character at infinity of the zero polynomial".into()))?;
        Ok(if self.deg() % 2 == 1 { 0 } else { k.chi(lead) })
    }

    /// The reversal `t^deg f(1/t)`, trimmed.
    pub fn reverse(&self) -> Result<Poly> {
        if self.is_zero() {
            return Err(Error::Domain("reversal of the zero polynomial".into()));
        }
        Ok(Poly::new(self.coeffs.iter().rev().copied().collect()))
    }

    /// `self^exp mod modulus`.
    pub fn pow_mod(&self, mut exp: u64, modulus: &Poly, k: &Field) -> Result<Poly> {
        let mut base = self.rem(modulus, k)?;
        let mut acc = Poly::one().rem(modulus, k)?;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base, k).rem(modulus, k)?;
            }
            base = base.mul(&base, k).rem(modulus, k)?;
            exp >>= 1;
        }
        Ok(acc)
    }

    /// Ben-Or test: `f` of degree `n` is irreducible iff `gcd(f, t^(q^i) - t) = 1`
    /// for every `1 <= i <= n/2`.
    pub fn is_irreducible(&self, k: &Field) -> bool {
        let Some(n) = self.degree() else { return false };
        if n == 0 {
            return false;
        }
        let t = Poly::from_indices(&[0, 1]);
        let mut frob = t.clone();
        for _ in 1..=n / 2 {
            frob = frob.pow_mod(k.q() as u64, self, k).expect("nonzero modulus");
            if !self.gcd(&frob.sub(&t, k), k).is_constant() {
                return false;
            }
        }
        true
    }

    /// Parses the ascending comma-separated index format, e.g. `0,1` for `t`.
    pub fn parse(text: &str, k: &Field) -> Result<Poly> {
        let mut coeffs = Vec::new();
        for part in text.split(',') {
            let idx: u32 = part
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient {part:?} in {text:?}")))?;
            coeffs.push(k.elem(idx)?);
        }
        Ok(Poly::new(coeffs))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// One of the sets `V_d` (monic), `F_d` (monic square-free) or the
/// non-monic square-free set of degree exactly `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PolySet {
    pub degree: usize,
    pub monic: bool,
    pub squarefree: bool,
}

impl PolySet {
    pub fn new(degree: usize, monic: bool, squarefree: bool) -> PolySet {
        PolySet { degree, monic, squarefree }
    }

    /// Number of coefficient vectors before the square-free filter.
    pub fn raw_count(&self, q: u64) -> u128 {
        let base = (q as u128).pow(self.degree as u32);
        if self.monic {
            base
        } else {
            base * (q as u128 - 1)
        }
    }

    /// Closed-form cardinality, no enumeration.
    pub fn count(&self, q: u64) -> u128 {
        if !self.squarefree {
            return self.raw_count(q);
        }
        let q = q as u128;
        let monic = match self.degree {
            0 => 1,
            1 => q,
            d => q.pow(d as u32) - q.pow(d as u32 - 1),
        };
        if self.monic {
            monic
        } else {
            monic * (q - 1)
        }
    }

    /// The polynomial at position `rank` of the lexicographic order
    /// (ascending packed index of the coefficient vector, leading coefficient slowest).
    pub fn from_rank(&self, k: &Field, rank: u128) -> Poly {
        let q = k.q() as u128;
        let mut coeffs = Vec::with_capacity(self.degree + 1);
        let mut x = rank;
        for _ in 0..self.degree {
            coeffs.push(Elem((x % q) as u32));
            x /= q;
        }
        coeffs.push(if self.monic { Elem::ONE } else { Elem(x as u32 + 1) });
        Poly::new(coeffs)
    }

    /// Members with raw rank in `start..end`, in order.
    pub fn iter_range<'a>(&self, k: &'a Field, start: u128, end: u128) -> impl Iterator<Item = Poly> + 'a {
        let set = *self;
        (start..end.min(set.raw_count(k.q() as u64)))
            .map(move |r| set.from_rank(k, r))
            .filter(move |f| !set.squarefree || f.is_squarefree(k).expect("nonzero"))
    }

    pub fn iter<'a>(&self, k: &'a Field) -> impl Iterator<Item = Poly> + 'a {
        self.iter_range(k, 0, self.raw_count(k.q() as u64))
    }

    pub fn collect(&self, k: &Field) -> Vec<Poly> {
        self.iter(k).collect()
    }
}

/// Monic irreducibles grouped by degree: entry `nu - 1` holds degree `nu`.
pub fn irreducibles_up_to(k: &Field, max_degree: usize) -> Vec<Vec<Poly>> {
    (1..=max_degree)
        .map(|nu| PolySet::new(nu, true, false).iter(k).filter(|f| f.is_irreducible(k)).collect())
        .collect()
}

pub fn mobius(n: u64) -> i64 {
    let (mut n, mut mu, mut d) = (n, 1i64, 2u64);
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            mu = -mu;
        }
        d += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Number of monic irreducibles of degree `nu` over `F_q`:
/// `(1/nu) * sum_{d | nu} mu(d) q^(nu/d)`.
pub fn irreducible_count(q: u64, nu: u32) -> u128 {
    let total: i128 = (1..=nu)
        .filter(|d| nu % d == 0)
        .map(|d| mobius(d as u64) as i128 * (q as i128).pow(nu / d))
        .sum();
    (total / nu as i128) as u128
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: &Field, s: &str) -> Poly {
        Poly::parse(s, k).unwrap()
    }

    #[test]
    fn gcd_examples() {
        let k = Field::with_q(3).unwrap();
        // t^2 + 2 = (t + 1)(t + 2)
        assert_eq!(p(&k, "2,0,1").gcd(&p(&k, "2,1"), &k), p(&k, "2,1"));
        let f = p(&k, "1,2,2");
        assert_eq!(f.gcd(&Poly::zero(), &k), f.monic(&k));
        assert!(f.gcd(&Poly::zero(), &k).is_monic());
    }

    #[test]
    fn derivative_in_characteristic_three() {
        let k = Field::with_q(3).unwrap();
        assert!(p(&k, "1,0,0,1").derivative(&k).is_zero());
        assert_eq!(p(&k, "1,1,1").derivative(&k), p(&k, "1,2"));
    }

    #[test]
    fn squarefree_examples() {
        let k = Field::with_q(3).unwrap();
        assert!(p(&k, "0,1,1").is_squarefree(&k).unwrap());
        assert!(!p(&k, "0,0,1").is_squarefree(&k).unwrap());
        assert!(!p(&k, "1,0,0,1").is_squarefree(&k).unwrap());
        assert!(Poly::zero().is_squarefree(&k).is_err());
        assert!(Poly::constant(Elem(2)).is_squarefree(&k).unwrap());
    }

    #[test]
    fn evaluation() {
        let k = Field::with_q(3).unwrap();
        assert_eq!(p(&k, "1,0,1").eval(Elem(2), &k), Elem(2));
        assert_eq!(Poly::constant(Elem(2)).eval(Elem(1), &k), Elem(2));
        let f = p(&k, "2,1,1,2");
        assert_eq!(f.eval(Elem::ZERO, &k), Elem(2));
    }

    #[test]
    fn infinity_convention() {
        let k = Field::with_q(3).unwrap();
        assert_eq!(p(&k, "0,1,1").infinity_character(&k).unwrap(), 1);
        assert_eq!(p(&k, "1,0,2").infinity_character(&k).unwrap(), -1);
        assert_eq!(p(&k, "0,0,0,1").infinity_character(&k).unwrap(), 0);
        assert!(Poly::zero().infinity_character(&k).is_err());
    }

    #[test]
    fn reversal() {
        let k = Field::with_q(3).unwrap();
        assert_eq!(p(&k, "1,2,0,1").reverse().unwrap(), p(&k, "1,0,2,1"));
        assert_eq!(p(&k, "2").reverse().unwrap(), p(&k, "2"));
        let f = p(&k, "2,1,0,1");
        assert_eq!(f.reverse().unwrap().reverse().unwrap(), f);
        // a root at zero is lost by the reversal
        assert_eq!(p(&k, "0,1").reverse().unwrap(), p(&k, "1"));
    }

    #[test]
    fn divrem_and_text() {
        let k = Field::with_q(5).unwrap();
        let a = p(&k, "1,2,3,4");
        let b = p(&k, "3,0,2");
        let (q, r) = a.divrem(&b, &k).unwrap();
        assert_eq!(q.mul(&b, &k).add(&r, &k), a);
        assert!(r.deg() < b.deg());
        assert!(a.divrem(&Poly::zero(), &k).is_err());
        assert_eq!(a.to_string(), "1,2,3,4");
        assert_eq!(Poly::zero().to_string(), "0");
        assert_eq!(p(&k, "0"), Poly::zero());
        assert!(Poly::parse("1,x", &k).is_err());
        assert!(Poly::parse("1,5", &k).is_err());
    }

    #[test]
    fn enumeration_counts() {
        for q in [3u64, 5] {
            let k = Field::with_q(q).unwrap();
            for d in 0..=5usize {
                if q == 5 && d == 5 {
                    continue;
                }
                let v = PolySet::new(d, true, false);
                assert_eq!(v.iter(&k).count() as u128, q.pow(d as u32) as u128);
                let fd = PolySet::new(d, true, true);
                assert_eq!(fd.iter(&k).count() as u128, fd.count(q));
                if d >= 2 {
                    assert_eq!(fd.count(q), (q.pow(d as u32) - q.pow(d as u32 - 1)) as u128);
                }
                if d <= 4 {
                    let hat = PolySet::new(d, false, true);
                    assert_eq!(hat.iter(&k).count() as u128, (q as u128 - 1) * fd.count(q));
                }
            }
        }
        let k = Field::with_q(3).unwrap();
        assert_eq!(PolySet::new(3, true, true).iter(&k).count(), 18);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let k = Field::with_q(3).unwrap();
        let set = PolySet::new(2, false, false);
        let all: Vec<Poly> = set.iter(&k).collect();
        assert_eq!(all.len(), 18);
        assert_eq!(all[0], p(&k, "0,0,1"));
        assert_eq!(all[1], p(&k, "1,0,1"));
        assert_eq!(all[9], p(&k, "0,0,2"));
        let split: Vec<Poly> = set.iter_range(&k, 0, 7).chain(set.iter_range(&k, 7, 18)).collect();
        assert_eq!(split, all);
    }

    #[test]
    fn irreducible_counts_match_necklace_formula() {
        let k = Field::with_q(3).unwrap();
        let irr = irreducibles_up_to(&k, 4);
        let counts: Vec<usize> = irr.iter().map(|v| v.len()).collect();
        assert_eq!(counts, vec![3, 3, 8, 18]);
        for (i, c) in counts.iter().enumerate() {
            assert_eq!(*c as u128, irreducible_count(3, i as u32 + 1));
        }
        let k9 = Field::with_q(9).unwrap();
        assert_eq!(irreducibles_up_to(&k9, 2)[1].len() as u128, irreducible_count(9, 2));
    }

    #[test]
    fn irreducibles_agree_with_sieve() {
        // Sieve: a monic polynomial of degree nu is reducible iff it is a
        // product of two monic polynomials of positive degree.
        let k = Field::with_q(5).unwrap();
        let max = 4;
        let monic: Vec<Vec<Poly>> = (0..=max).map(|d| PolySet::new(d, true, false).collect(&k)).collect();
        let mut reducible = std::collections::HashSet::new();
        for a in 1..max {
            for b in a..=max - a {
                for f in &monic[a] {
                    for g in &monic[b] {
                        reducible.insert(f.mul(g, &k));
                    }
                }
            }
        }
        let irr = irreducibles_up_to(&k, max);
        for nu in 1..=max {
            let sieved: Vec<&Poly> = monic[nu].iter().filter(|f| !reducible.contains(*f)).collect();
            assert_eq!(sieved.len(), irr[nu - 1].len(), "degree {nu}");
            assert!(sieved.iter().zip(&irr[nu - 1]).all(|(a, b)| *a == b));
        }
    }
}
