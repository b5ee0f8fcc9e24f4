//! The random model: `S^` over a family behaves like a sum of `q + 1`
//! independent copies of a three-valued variable.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::family::MAX_R;
use crate::field::odd_prime_power;
use crate::trace::TraceHistogram;

/// A finitely supported distribution with exact rational weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discrete {
    pub q: u64,
    pub r: u32,
    /// `(value, probability)` in increasing value order.
    pub atoms: Vec<(i64, BigRational)>,
}

impl Discrete {
    pub fn total(&self) -> BigRational {
        self.atoms.iter().map(|(_, p)| p.clone()).sum()
    }

    /// `E[X^b]`.
    pub fn moment(&self, b: u32) -> BigRational {
        self.atoms.iter().map(|(v, p)| p * BigRational::from_integer(BigInt::from(*v).pow(b))).sum()
    }
}

fn check(q: u64, r: u32) -> Result<()> {
    odd_prime_power(q).map_err(|e| Error::Domain(e.to_string()))?;
    if r == 0 || r > MAX_R {
        return Err(Error::Domain(format!("r must be in 1..={MAX_R}, got {r}")));
    }
    Ok(())
}

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Distribution of the local contribution `sum_J chi(p_J(x))` at one point.
///
/// Values `-1`, `2^(r-1) - 1`, `2^r - 1` with probabilities
/// `(2^r-1)(q+2^r-2)`, `2(2^r-1)` and `q`, all over `2^r (q+2^r-1)`.
pub fn xi_distribution(q: u64, r: u32) -> Result<Discrete> {
    check(q, r)?;
    let t = 1u64 << r;
    let den = t * (q + t - 1);
    Ok(Discrete {
        q,
        r,
        atoms: vec![
            (-1, ratio((t - 1) * (q + t - 2), den)),
            ((t / 2) as i64 - 1, ratio(2 * (t - 1), den)),
            (t as i64 - 1, ratio(q, den)),
        ],
    })
}

/// Distribution of the number of points in one fiber: `1 + X`.
pub fn fiber_distribution(q: u64, r: u32) -> Result<Discrete> {
    let mut d = xi_distribution(q, r)?;
    for (v, _) in d.atoms.iter_mut() {
        *v += 1;
    }
    Ok(d)
}

/// Exact law of a sum of `n` independent copies of a discrete variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumPmf {
    pub q: u64,
    pub r: u32,
    pub n: u32,
    /// Numerators over the common denominator, keyed by the value of the sum.
    pub numerators: BTreeMap<i64, BigUint>,
    pub denominator: BigUint,
}

impl SumPmf {
    /// Reduced probability of `m` (zero outside the support).
    pub fn prob(&self, m: i64) -> BigRational {
        let num = self.numerators.get(&m).cloned().unwrap_or_default();
        BigRational::new(num.into(), self.denominator.clone().into())
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.numerators.keys().copied()
    }

    pub fn total(&self) -> BigRational {
        BigRational::new(self.numerators.values().sum::<BigUint>().into(), self.denominator.clone().into())
    }

    /// `E[S^k]` computed from the mass function.
    pub fn moment(&self, k: u32) -> BigRational {
        let num: BigInt =
            self.numerators.iter().map(|(&m, c)| BigInt::from(m).pow(k) * BigInt::from(c.clone())).sum();
        BigRational::new(num, self.denominator.clone().into())
    }
}

/// Convolve `n` copies of `x` in exact integer arithmetic.
pub fn sum_distribution(x: &Discrete, n: u32) -> SumPmf {
    let den = x.atoms.iter().fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
    let weights: Vec<(i64, BigUint)> = x
        .atoms
        .iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(v, p)| (*v, (p * BigRational::from_integer(den.clone())).to_integer().to_biguint().unwrap_or_default()))
        .collect();
    let mut acc: BTreeMap<i64, BigUint> = [(0, BigUint::one())].into_iter().collect();
    for _ in 0..n {
        let mut next: BTreeMap<i64, BigUint> = BTreeMap::new();
        for (s, c) in &acc {
            for (v, w) in &weights {
                *next.entry(s + v).or_default() += c * w;
            }
        }
        acc = next;
    }
    let denominator = den.to_biguint().unwrap_or_default().pow(n);
    SumPmf { q: x.q, r: x.r, n, numerators: acc, denominator }
}

/// The model law of `S^` over a family in `F_q`: `q + 1` copies of `X`.
pub fn model_pmf(q: u64, r: u32) -> Result<SumPmf> {
    Ok(sum_distribution(&xi_distribution(q, r)?, (q + 1) as u32))
}

/// `(k-1)!!` for even `k`, zero for odd `k`.
pub fn gaussian_moment(k: u32) -> BigUint {
    if k % 2 == 1 {
        return BigUint::zero();
    }
    (1..k).step_by(2).map(BigUint::from).product()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelMoment {
    pub k: u32,
    /// `E[S^k]`.
    pub raw: BigRational,
    /// `raw / (q+1)^(k/2)`, exact for even `k`.
    pub normalized_exact: Option<BigRational>,
    pub normalized: f64,
    /// `raw / (n E[X^2])^(k/2)`, exact for even `k`.
    pub standardized_exact: Option<BigRational>,
    pub standardized: f64,
    pub gaussian: BigUint,
}

pub fn model_moments(pmf: &SumPmf, x: &Discrete, max_k: u32) -> Vec<ModelMoment> {
    let var = BigRational::from_integer(pmf.n.into()) * x.moment(2);
    let q1 = BigRational::from_integer((pmf.q + 1).into());
    (0..=max_k)
        .map(|k| {
            let raw = pmf.moment(k);
            let even = k % 2 == 0;
            let normalized_exact = even.then(|| &raw / q1.pow(k as i32 / 2));
            let standardized_exact = even.then(|| &raw / var.pow(k as i32 / 2));
            let rawf = raw.to_f64().unwrap_or(f64::NAN);
            ModelMoment {
                k,
                normalized: rawf / (pmf.q as f64 + 1.0).powf(k as f64 / 2.0),
                standardized: rawf / var.to_f64().unwrap_or(f64::NAN).powf(k as f64 / 2.0),
                raw,
                normalized_exact,
                standardized_exact,
                gaussian: gaussian_moment(k),
            }
        })
        .collect()
}

/// Total variation distance between an empirical histogram and a model law.
pub fn tv_distance(h: &TraceHistogram, pmf: &SumPmf) -> Result<BigRational> {
    if h.total == 0 {
        return Err(Error::Domain("empty histogram".into()));
    }
    if h.family.q != pmf.q || h.family.r != pmf.r {
        return Err(Error::Domain(format!(
            "histogram for (q, r) = ({}, {}) compared with model for ({}, {})",
            h.family.q, h.family.r, pmf.q, pmf.r
        )));
    }
    let support: std::collections::BTreeSet<i64> = h.counts.keys().copied().chain(pmf.support()).collect();
    let sum: BigRational = support.into_iter().map(|m| (h.probability(m) - pmf.prob(m)).abs()).sum();
    Ok(sum / BigRational::from_integer(2.into()))
}
