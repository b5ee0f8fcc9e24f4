//! Point counts through quadratic-character sums and their distribution over
//! a family.
//!
//! For a tuple with subextension polynomials `p_J`, the fiber over a point
//! `x` of the projective line has `1 + sum_J chi(p_J(x))` rational points, so
//! `#C(F_q) = q + 1 + S^` with `S^ = sum_x sum_J chi(p_J(x))` and the trace of
//! Frobenius is `-S^`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{mask_count, subextension_poly, FamilySpec, QuadTuple, SubextMask, TupleSampler, TupleSpace};
use crate::field::{Elem, Field};
use crate::poly::Poly;

/// A point of `P^1(F_q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Finite(Elem),
    Infinity,
}

/// The `q + 1` rational points: finite points by index, then infinity.
pub fn points(k: &Field) -> impl Iterator<Item = Point> + '_ {
    k.elements().map(Point::Finite).chain(std::iter::once(Point::Infinity))
}

/// `chi(f(x))`, with the degree-parity convention at infinity.
pub fn character_at(k: &Field, f: &Poly, x: Point) -> Result<i8> {
    match x {
        Point::Finite(a) => Ok(k.chi(f.eval(a, k))),
        Point::Infinity => f.infinity_character(k),
    }
}

/// Number of rational points above `x`: `1 + sum_J chi(p_J(x))`.
pub fn fiber_count(k: &Field, t: &QuadTuple, x: Point) -> Result<i64> {
    let mut total = 1i64;
    for mask in SubextMask::all(t.r()) {
        total += character_at(k, &subextension_poly(k, t, mask), x)? as i64;
    }
    Ok(total)
}

/// `S^ = sum over P^1(F_q) of sum_J chi(p_J(x))`.
pub fn s_hat(k: &Field, t: &QuadTuple) -> Result<i64> {
    let subext: Vec<Poly> = SubextMask::all(t.r()).map(|m| subextension_poly(k, t, m)).collect();
    let mut total = 0i64;
    for x in points(k) {
        for p in &subext {
            total += character_at(k, p, x)? as i64;
        }
    }
    Ok(total)
}

pub fn point_count(k: &Field, t: &QuadTuple) -> Result<i64> {
    points(k).map(|x| fiber_count(k, t, x)).sum()
}

/// Trace of Frobenius, `-S^`.
pub fn trace(k: &Field, t: &QuadTuple) -> Result<i64> {
    Ok(-s_hat(k, t)?)
}

/// Characters of one polynomial at every finite point, plus what is needed at
/// infinity (degree parity and the character of the leading coefficient).
#[derive(Clone, Debug)]
pub struct CharacterProfile {
    finite: Vec<i8>,
    odd_degree: bool,
    lead_chi: i8,
}

impl CharacterProfile {
    pub fn new(k: &Field, f: &Poly) -> CharacterProfile {
        CharacterProfile {
            finite: k.elements().map(|x| k.chi(f.eval(x, k))).collect(),
            odd_degree: f.deg() % 2 == 1,
            lead_chi: f.leading().map_or(0, |c| k.chi(c)),
        }
    }
}

/// `S^` from per-component profiles: `chi(p_J(x))` is the product of the
/// component characters with odd incidence, and at infinity `p_J` has odd
/// degree or leading coefficient the product of the component ones.
pub struct FastTrace {
    incidence: Vec<Vec<usize>>,
    q: usize,
}

impl FastTrace {
    pub fn new(r: u32, q: u32) -> FastTrace {
        let incidence = SubextMask::all(r)
            .map(|m| (0..mask_count(r)).filter(|&pos| m.includes_component(pos as u32 + 1)).collect())
            .collect();
        FastTrace { incidence, q: q as usize }
    }

    pub fn s_hat(&self, profiles: &[&CharacterProfile]) -> i64 {
        let mut total = 0i64;
        for x in 0..self.q {
            for inc in &self.incidence {
                total += inc.iter().map(|&pos| profiles[pos].finite[x]).product::<i8>() as i64;
            }
        }
        for inc in &self.incidence {
            let odd = inc.iter().filter(|&&pos| profiles[pos].odd_degree).count() % 2 == 1;
            if !odd {
                total += inc.iter().map(|&pos| profiles[pos].lead_chi).product::<i8>() as i64;
            }
        }
        total
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Sampled { size: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHistogram {
    /// Count of tuples per value `M` of `S^`.
    pub counts: BTreeMap<i64, u64>,
    pub total: u64,
    pub family: FamilySpec,
    pub mode: Mode,
}

/// Dense counts indexed by `M + (q + 1)`.
struct Dense(Vec<u64>);

impl Dense {
    fn new(q: u64, r: u32) -> Dense {
        Dense(vec![0; ((1u64 << r) * (q + 1) + 1) as usize])
    }

    fn add(&mut self, m: i64, offset: i64) {
        self.0[(m + offset) as usize] += 1;
    }

    fn merge(mut self, other: Dense) -> Dense {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
        self
    }
}

/// Draws per independently seeded block in sampling mode.
const SAMPLE_BLOCK: u64 = 4096;
const MAX_REJECTIONS: usize = 1_000_000;

pub fn trace_histogram(k: &Field, fs: &FamilySpec, mode: Mode) -> Result<TraceHistogram> {
    fs.validate()?;
    if k.q() as u64 != fs.q {
        return Err(Error::Domain(format!("field has q = {}, family has q = {}", k.q(), fs.q)));
    }
    let (q, r) = (fs.q, fs.r);
    let offset = q as i64 + 1;
    let dense = match mode {
        Mode::Exhaustive => {
            let space = TupleSpace::new(k, fs)?;
            let profiles: Vec<Vec<CharacterProfile>> = space
                .pools()
                .iter()
                .map(|(_, polys)| polys.iter().map(|f| CharacterProfile::new(k, f)).collect())
                .collect();
            let fast = FastTrace::new(r, k.q());
            space.par_fold(
                || Dense::new(q, r),
                |acc, t| {
                    let prof: Vec<&CharacterProfile> = (0..t.len())
                        .map(|pos| {
                            let (pool, i) = t.key(pos);
                            &profiles[pool][i]
                        })
                        .collect();
                    acc.add(fast.s_hat(&prof), offset);
                },
                Dense::merge,
            )
        }
        Mode::Sampled { size, seed } => {
            if size == 0 {
                return Err(Error::Domain("sample size must be positive".into()));
            }
            let sampler = TupleSampler::new(k, fs)?;
            let blocks = size.div_ceil(SAMPLE_BLOCK);
            (0..blocks)
                .into_par_iter()
                .map(|b| -> Result<Dense> {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(b);
                    let mut acc = Dense::new(q, r);
                    let draws = SAMPLE_BLOCK.min(size - b * SAMPLE_BLOCK);
                    for _ in 0..draws {
                        let t = sampler.sample(&mut rng, MAX_REJECTIONS).ok_or_else(|| {
                            Error::Domain("rejection sampling found no member; the family may be empty".into())
                        })?;
                        acc.add(s_hat(k, &t)?, offset);
                    }
                    Ok(acc)
                })
                .try_reduce(|| Dense::new(q, r), |a, b| Ok(a.merge(b)))?
        }
    };
    let counts: BTreeMap<i64, u64> = dense
        .0
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i as i64 - offset, c))
        .collect();
    let total = counts.values().sum();
    Ok(TraceHistogram { counts, total, family: fs.clone(), mode })
}

impl TraceHistogram {
    pub fn probability(&self, m: i64) -> BigRational {
        let c = self.counts.get(&m).copied().unwrap_or(0);
        BigRational::new(c.into(), self.total.max(1).into())
    }

    pub fn mean(&self) -> Result<BigRational> {
        Ok(empirical_moments(self, 1)?.remove(1).shat_raw)
    }
}

/// One empirical moment of `S^` (and of the trace `-S^`).
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMoment {
    pub k: u32,
    /// `sum count(M) M^k / total`.
    pub shat_raw: BigRational,
    /// Same for the trace, `(-1)^k` times the above.
    pub trace_raw: BigRational,
    /// `shat_raw / (1 + q)^(k/2)`, exact for even `k`.
    pub normalized_exact: Option<BigRational>,
    pub shat_normalized: f64,
    pub trace_normalized: f64,
}

pub fn empirical_moments(h: &TraceHistogram, max_k: u32) -> Result<Vec<EmpiricalMoment>> {
    if h.total == 0 {
        return Err(Error::Domain("empty histogram".into()));
    }
    let q1 = BigInt::from(h.family.q + 1);
    let total = BigInt::from(h.total);
    (0..=max_k)
        .map(|k| {
            let sum: BigInt = h.counts.iter().map(|(&m, &c)| BigInt::from(c) * BigInt::from(m).pow(k)).sum();
            let raw = BigRational::new(sum, total.clone());
            let trace_raw = if k % 2 == 1 { -raw.clone() } else { raw.clone() };
            let normalized_exact = (k % 2 == 0).then(|| &raw / BigRational::from_integer(q1.pow(k / 2)));
            let scale = ((h.family.q + 1) as f64).powf(k as f64 / 2.0);
            let shat_normalized = raw.to_f64().unwrap_or(f64::NAN) / scale;
            let trace_normalized = trace_raw.to_f64().unwrap_or(f64::NAN) / scale;
            Ok(EmpiricalMoment { k, shat_raw: raw, trace_raw, normalized_exact, shat_normalized, trace_normalized })
        })
        .collect()
}

/// Absolute value helper for exact comparisons in reports.
pub fn abs_diff(a: &BigRational, b: &BigRational) -> BigRational {
    (a - b).abs()
}

pub fn is_probability_vector(h: &TraceHistogram) -> bool {
    let s: BigRational = h.counts.keys().map(|&m| h.probability(m)).sum();
    h.total > 0 && s.is_one() || h.total == 0 && s.is_zero()
}
