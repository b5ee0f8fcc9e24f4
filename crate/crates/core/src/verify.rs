//! Brute-force checks of the counting statements: value-constrained censuses
//! of square-free polynomials and tuples against their main terms, the census
//! of residue tuples modulo `(t - a)^2`, and the genus comparison.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::euler::{euler_product, zeta_q, EulerKind, EulerProductSpec, EulerValue};
use crate::family::{
    genus_branch, genus_branch_degrees, genus_subext, genus_subext_degrees, h_from_tuple, mask_count,
    subextension_poly, FamilySpec, QuadTuple, SubextMask, TupleSpace, MAX_R,
};
use crate::field::{Elem, Field};
use crate::poly::{irreducibles_up_to, Poly, PolySet};
use crate::trace::Point;

/// Relative tolerance for the asymptotic statements.
pub const DEFAULT_TOLERANCE: f64 = 0.2;
/// Truncation degree of the Euler products entering main terms.
pub const EULER_DEGREE: u32 = 12;
/// Largest number of residue tuples the fiber census will walk through.
pub const FIBER_LIMIT: u128 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Exact identity holds.
    Exact,
    Mismatch,
    /// Relative error within tolerance for every value in the main-term interval.
    Within,
    Outside,
    Agree,
    /// Literal formula disagrees with the ramification count.
    Flagged,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Exact => "exact",
            Verdict::Mismatch => "mismatch",
            Verdict::Within => "within",
            Verdict::Outside => "outside",
            Verdict::Agree => "agree",
            Verdict::Flagged => "flagged",
        })
    }
}

/// Main term of a statement: a point value and an enclosing interval.
#[derive(Clone, Debug, PartialEq)]
pub struct MainTerm {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: Option<BigRational>,
}

impl MainTerm {
    fn exact(x: BigRational) -> MainTerm {
        let v = x.to_f64().unwrap_or(f64::NAN);
        MainTerm { value: v, lower: v, upper: v, exact: Some(x) }
    }

    /// `factor` times a product of Euler values known up to their tails.
    fn with_constants(factor: BigRational, constants: &[&EulerValue]) -> MainTerm {
        let f = factor.to_f64().unwrap_or(f64::NAN);
        let (mut value, mut lower, mut upper) = (f, f, f);
        for c in constants {
            value *= c.value.to_f64();
            lower *= c.lower();
            upper *= c.upper();
        }
        MainTerm { value, lower, upper, exact: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusReport {
    pub statement: String,
    pub params: String,
    pub exact_count: BigInt,
    /// Size of the family the count is taken in, for ratio statements.
    pub family_size: Option<BigInt>,
    pub main_term: MainTerm,
    pub rel_error: f64,
    pub verdict: Verdict,
}

impl CensusReport {
    fn asymptotic(statement: &str, params: String, count: u128, family: Option<u128>, main: MainTerm, tol: f64) -> Self {
        let c = count as f64;
        let rel = |m: f64| if m == 0.0 { f64::INFINITY } else { (c - m).abs() / m };
        let worst = rel(main.lower).max(rel(main.upper));
        CensusReport {
            statement: statement.into(),
            params,
            exact_count: count.into(),
            family_size: family.map(BigInt::from),
            rel_error: rel(main.value),
            verdict: if worst <= tol { Verdict::Within } else { Verdict::Outside },
            main_term: main,
        }
    }

    fn identity(statement: &str, params: String, lhs: BigInt, rhs: BigInt) -> Self {
        let rel = if rhs.is_zero() {
            if lhs.is_zero() { 0.0 } else { f64::INFINITY }
        } else {
            ((&lhs - &rhs).abs().to_f64().unwrap_or(f64::NAN)) / rhs.abs().to_f64().unwrap_or(f64::NAN)
        };
        CensusReport {
            statement: statement.into(),
            params,
            verdict: if lhs == rhs { Verdict::Exact } else { Verdict::Mismatch },
            main_term: MainTerm::exact(BigRational::from_integer(rhs)),
            exact_count: lhs,
            family_size: None,
            rel_error: rel,
        }
    }

    /// `exact_count / family_size`, when the statement is a ratio.
    pub fn ratio(&self) -> Option<BigRational> {
        self.family_size.as_ref().map(|n| BigRational::new(self.exact_count.clone(), n.clone()))
    }
}

fn rat(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn check_points(k: &Field, points: &[Elem]) -> Result<()> {
    if points.len() > k.q() as usize {
        return Err(Error::Domain(format!("at most q = {} points, got {}", k.q(), points.len())));
    }
    for (i, x) in points.iter().enumerate() {
        if x.index() >= k.q() {
            return Err(Error::Domain(format!("{x} is not an element of F_{}", k.q())));
        }
        if points[..i].contains(x) {
            return Err(Error::Domain(format!("point {x} repeated")));
        }
    }
    Ok(())
}

fn check_projective_points(k: &Field, points: &[Point]) -> Result<()> {
    if points.len() > k.q() as usize + 1 {
        return Err(Error::Domain(format!("at most q + 1 = {} points, got {}", k.q() + 1, points.len())));
    }
    for (i, x) in points.iter().enumerate() {
        if let Point::Finite(a) = x {
            if a.index() >= k.q() {
                return Err(Error::Domain(format!("{a} is not an element of F_{}", k.q())));
            }
        }
        if points[..i].contains(x) {
            return Err(Error::Domain(format!("point {x:?} repeated")));
        }
    }
    Ok(())
}

fn check_u(k: &Field, u: &Poly, points: &[Elem]) -> Result<()> {
    if u.is_zero() {
        return Err(Error::Domain("U must be nonzero".into()));
    }
    for &x in points {
        if u.eval(x, k).is_zero() {
            return Err(Error::Domain(format!("constraint at x = {x}, a root of U")));
        }
    }
    Ok(())
}

/// The distinct monic irreducible factors of `f`, by trial division.
pub fn distinct_prime_factors(k: &Field, f: &Poly) -> Result<Vec<Poly>> {
    Ok(factor(k, f)?.into_iter().map(|(p, _)| p).collect())
}

/// Monic irreducible factors with multiplicities, by trial division up to half
/// the degree; whatever survives is prime.
pub fn factor(k: &Field, f: &Poly) -> Result<Vec<(Poly, u32)>> {
    if f.is_zero() {
        return Err(Error::Domain("cannot factor the zero polynomial".into()));
    }
    let mut rest = f.monic(k);
    let mut out = Vec::new();
    'outer: for (i, polys) in irreducibles_up_to(k, f.deg() / 2).iter().enumerate() {
        for p in polys {
            if rest.deg() < 2 * (i + 1) {
                break 'outer;
            }
            let mut e = 0;
            while p.divides(&rest, k)? {
                rest = rest.div_exact(p, k)?;
                e += 1;
            }
            if e > 0 {
                out.push((p.clone(), e));
            }
        }
    }
    if rest.deg() > 0 {
        match out.iter_mut().find(|(p, _)| *p == rest) {
            Some((_, e)) => *e += 1,
            None => out.push((rest, 1)),
        }
    }
    out.sort_by(|a, b| a.0.deg().cmp(&b.0.deg()).then_with(|| a.0.coeffs().cmp(b.0.coeffs())));
    Ok(out)
}

/// Pairwise coprime squarefree `a_i` with `monic(f) = prod a_i^{e_i}`, by
/// repeated gcds with the derivative and `p`-th roots.
fn squarefree_decomposition(k: &Field, f: &Poly) -> Result<Vec<(Poly, u32)>> {
    let mut out = Vec::new();
    let f = f.monic(k);
    if f.deg() == 0 {
        return Ok(out);
    }
    let mut c = f.gcd(&f.derivative(k), k);
    let mut w = f.div_exact(&c, k)?;
    let mut i = 1;
    while w.deg() > 0 {
        let y = w.gcd(&c, k);
        let z = w.div_exact(&y, k)?;
        if z.deg() > 0 {
            out.push((z, i));
        }
        c = c.div_exact(&y, k)?;
        w = y;
        i += 1;
    }
    if c.deg() > 0 {
        let p = k.p() as usize;
        let root_exp = (k.q() / k.p()) as u64;
        let root = Poly::new((0..=c.deg() / p).map(|j| k.pow(c.coeff(j * p), root_exp)).collect());
        for (g, e) in squarefree_decomposition(k, &root)? {
            out.push((g, e * p as u32));
        }
    }
    Ok(out)
}

/// The product of the monic primes dividing `f` to an odd power, and the
/// leading coefficient of `f`.
pub fn squarefree_part(k: &Field, f: &Poly) -> Result<(Elem, Poly)> {
    let lc = f.leading().ok_or_else(|| Error::Domain("zero polynomial".into()))?;
    let part = squarefree_decomposition(k, f)?
        .into_iter()
        .filter(|(_, e)| e % 2 == 1)
        .fold(Poly::one(), |acc, (p, _)| acc.mul(&p, k));
    Ok((lc, part.monic(k)))
}

/// Check every `p_J` against the square-free part of `prod_{i in J} h_i`,
/// up to a nonzero square scalar.
pub fn subextensions_match_oracle(k: &Field, t: &QuadTuple) -> Result<bool> {
    let h = h_from_tuple(k, t);
    for mask in SubextMask::all(t.r()) {
        let prod = (0..t.r())
            .filter(|i| mask.bits() >> i & 1 == 1)
            .fold(Poly::one(), |acc, i| acc.mul(&h[i as usize], k));
        let (lc, part) = squarefree_part(k, &prod)?;
        let p = subextension_poly(k, t, mask);
        if p.monic(k) != part {
            return Ok(false);
        }
        let ratio = k.mul(p.leading().unwrap_or(Elem::ZERO), k.inv(lc)?);
        if !k.is_square(ratio) || ratio.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `prod_{P | U} |P| / (|P| + beta)`.
fn u_correction(k: &Field, u: &Poly, beta: u64) -> Result<BigRational> {
    let q = BigInt::from(k.q());
    Ok(distinct_prime_factors(k, u)?
        .iter()
        .map(|p| {
            let size = q.pow(p.deg() as u32);
            BigRational::new(size.clone(), size + beta)
        })
        .fold(BigRational::one(), |a, b| a * b))
}

fn euler(q: u64, kind: EulerKind) -> Result<EulerValue> {
    euler_product(&EulerProductSpec { q, kind, max_degree: EULER_DEGREE })
}

fn show_elems(xs: &[Elem]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Count pairwise coprime tuples drawn from `pools`.
fn count_coprime_tuples(k: &Field, pools: &[Vec<Poly>]) -> u128 {
    fn rec(k: &Field, pools: &[Vec<Poly>], chosen: &mut Vec<Poly>) -> u128 {
        let Some((first, rest)) = pools.split_first() else { return 1 };
        let mut n = 0;
        for f in first {
            if chosen.iter().all(|g| f.is_coprime(g, k)) {
                chosen.push(f.clone());
                n += rec(k, rest, chosen);
                chosen.pop();
            }
        }
        n
    }
    let Some((first, rest)) = pools.split_first() else { return 1 };
    first.par_iter().map(|f| rec(k, rest, &mut vec![f.clone()])).sum()
}

/// Monic square-free polynomials of degree `d`, coprime to `u`, with
/// prescribed values.
fn constrained_pool(k: &Field, d: usize, u: &Poly, points: &[Elem], values: &[Elem]) -> Vec<Poly> {
    PolySet::new(d, true, true)
        .iter(k)
        .filter(|f| points.iter().zip(values).all(|(&x, &a)| f.eval(x, k) == a) && f.is_coprime(u, k))
        .collect()
}

/// Square-free monic polynomials of degree `d` coprime to `u` with `F(x_i) = a_i`.
pub fn census_s(k: &Field, d: usize, u: &Poly, points: &[Elem], values: &[Elem], tol: f64) -> Result<CensusReport> {
    check_points(k, points)?;
    check_u(k, u, points)?;
    if values.len() != points.len() {
        return Err(Error::Domain("one value per point is required".into()));
    }
    if values.iter().any(|a| a.is_zero()) {
        return Err(Error::Domain("prescribed values must be nonzero".into()));
    }
    let count = constrained_pool(k, d, u, points, values).len() as u128;
    let q = k.q() as u64;
    let l = points.len() as i32;
    let main = BigRational::from_integer(BigInt::from(q).pow(d as u32)) / zeta_q(2, q)?
        * rat(q, q * q - 1).pow(l)
        * u_correction(k, u, 1)?;
    let params = format!("q={q} d={d} U={u} x=[{}] a=[{}]", show_elems(points), show_elems(values));
    Ok(CensusReport::asymptotic("lemma-S", params, count, None, MainTerm::exact(main), tol))
}

/// Pairwise coprime tuples of monic square-free polynomials, each coprime to
/// `u`, with `f_j(x_i) = values[j][i]`.
pub fn census_r(
    k: &Field,
    degrees: &[usize],
    u: &Poly,
    points: &[Elem],
    values: &[Vec<Elem>],
    tol: f64,
) -> Result<CensusReport> {
    check_points(k, points)?;
    check_u(k, u, points)?;
    let beta = degrees.len();
    if beta == 0 {
        return Err(Error::Domain("at least one degree is required".into()));
    }
    if values.len() != beta || values.iter().any(|v| v.len() != points.len()) {
        return Err(Error::Domain(format!("expected {beta} value rows of length {}", points.len())));
    }
    if values.iter().flatten().any(|a| a.is_zero()) {
        return Err(Error::Domain("prescribed values must be nonzero".into()));
    }
    let pools: Vec<Vec<Poly>> =
        degrees.iter().zip(values).map(|(&d, vals)| constrained_pool(k, d, u, points, vals)).collect();
    let count = count_coprime_tuples(k, &pools);
    let q = k.q() as u64;
    let l = points.len() as i32;
    let total: u32 = degrees.iter().map(|&d| d as u32).sum();
    let factor = BigRational::from_integer(BigInt::from(q).pow(total)) / zeta_q(2, q)?.pow(beta as i32)
        * rat(q, BigInt::from(q - 1).pow(beta as u32) * (q + beta as u64)).pow(l)
        * u_correction(k, u, beta as u64)?;
    let main = if beta == 1 {
        MainTerm::exact(factor)
    } else {
        MainTerm::with_constants(factor, &[&euler(q, EulerKind::LBeta(beta as u32))?])
    };
    let rows: Vec<String> = values.iter().map(|v| show_elems(v)).collect();
    let params = format!("q={q} n={degrees:?} U={u} x=[{}] a=[{}]", show_elems(points), rows.join("; "));
    Ok(CensusReport::asymptotic("lemma-R", params, count, None, main, tol))
}

/// A condition on the product of some components at one point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Value(Elem),
    Character(i8),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductCondition {
    pub point: Point,
    /// Positions of the components whose product is constrained.
    pub positions: Vec<usize>,
    pub target: Target,
}

/// Number of tuples of the family meeting all conditions, and the family size.
pub fn count_constrained(k: &Field, fs: &FamilySpec, conditions: &[ProductCondition]) -> Result<(u128, u128)> {
    let m = mask_count(fs.r);
    let mut finite: Vec<Elem> = Vec::new();
    for c in conditions {
        if c.positions.iter().any(|&p| p >= m) {
            return Err(Error::Domain(format!("component position out of range (family has {m})")));
        }
        match (c.point, &c.target) {
            (Point::Infinity, Target::Value(_)) => {
                return Err(Error::Domain("values at infinity are not defined; use a character".into()))
            }
            (Point::Finite(x), _) if !finite.contains(&x) => finite.push(x),
            _ => {}
        }
    }
    let space = TupleSpace::new(k, fs)?;
    // Per pool polynomial: values at the finite points, degree parity, leading coefficient.
    let tables: Vec<Vec<(Vec<Elem>, bool, Elem)>> = space
        .pools()
        .iter()
        .map(|(_, polys)| {
            polys
                .iter()
                .map(|f| {
                    let vals = finite.iter().map(|&x| f.eval(x, k)).collect();
                    (vals, f.deg() % 2 == 1, f.leading().unwrap_or(Elem::ZERO))
                })
                .collect()
        })
        .collect();
    let slots: Vec<Option<usize>> = conditions
        .iter()
        .map(|c| match c.point {
            Point::Finite(x) => finite.iter().position(|&y| y == x),
            Point::Infinity => None,
        })
        .collect();
    let count = space.par_fold(
        || 0u128,
        |acc, t| {
            let entry = |pos: usize| {
                let (pool, i) = t.key(pos);
                &tables[pool][i]
            };
            let ok = conditions.iter().zip(&slots).all(|(c, slot)| match slot {
                Some(s) => {
                    let v = c.positions.iter().fold(Elem::ONE, |acc, &p| k.mul(acc, entry(p).0[*s]));
                    match c.target {
                        Target::Value(a) => v == a,
                        Target::Character(e) => k.chi(v) == e,
                    }
                }
                None => {
                    let odd = c.positions.iter().filter(|&&p| entry(p).1).count() % 2 == 1;
                    let chi = if odd {
                        0
                    } else {
                        k.chi(c.positions.iter().fold(Elem::ONE, |acc, &p| k.mul(acc, entry(p).2)))
                    };
                    c.target == Target::Character(chi)
                }
            });
            if ok {
                *acc += 1;
            }
        },
        |a, b| a + b,
    );
    Ok((count, space.cardinality()))
}

/// Positions of `f1`, `f2`, `f` in an `r = 2` tuple.
const F1: usize = 0;
const F2: usize = 1;
const F: usize = 2;

/// Tuples of `F_(n1, n2, n)` (degrees in component order) with
/// `f f1 (x_i) = a_i`, `f f2 (x_i) = b_i`.
pub fn census_prop45(
    k: &Field,
    degrees: [usize; 3],
    points: &[Elem],
    a: &[Elem],
    b: &[Elem],
    tol: f64,
) -> Result<CensusReport> {
    check_points(k, points)?;
    if a.len() != points.len() || b.len() != points.len() {
        return Err(Error::Domain("one value pair per point is required".into()));
    }
    if a.iter().chain(b).any(|v| v.is_zero()) {
        return Err(Error::Domain("prescribed values must be nonzero".into()));
    }
    let fs = FamilySpec::new(k.q() as u64, 2, degrees.to_vec(), false, false)?;
    let conditions: Vec<ProductCondition> = points
        .iter()
        .zip(a.iter().zip(b))
        .flat_map(|(&x, (&ai, &bi))| {
            [
                ProductCondition { point: Point::Finite(x), positions: vec![F, F1], target: Target::Value(ai) },
                ProductCondition { point: Point::Finite(x), positions: vec![F, F2], target: Target::Value(bi) },
            ]
        })
        .collect();
    let (count, _) = count_constrained(k, &fs, &conditions)?;
    let q = k.q() as u64;
    let total: u32 = degrees.iter().map(|&d| d as u32).sum();
    let factor = BigRational::from_integer(BigInt::from(q).pow(total)) / zeta_q(2, q)?.pow(3)
        * rat(q, (q - 1) * (q - 1) * (q + 3)).pow(points.len() as i32);
    let main = MainTerm::with_constants(factor, &[&euler(q, EulerKind::K)?, &euler(q, EulerKind::L)?]);
    let params =
        format!("q={q} n={degrees:?} x=[{}] a=[{}] b=[{}]", show_elems(points), show_elems(a), show_elems(b));
    Ok(CensusReport::asymptotic("prop45", params, count, None, main, tol))
}

/// Prescribed data at one point for the value statement with zeros allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointTarget {
    /// `f f1 = a`, `f f2 = b`, both nonzero.
    Nonzero { a: Elem, b: Elem },
    /// `f = 0` and `f1 f2 = c`.
    FZero { c: Elem },
    /// `f1 = 0` and `f f2 = b`.
    F1Zero { b: Elem },
    /// `f2 = 0` and `f f1 = a`.
    F2Zero { a: Elem },
}

impl std::fmt::Display for PointTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointTarget::Nonzero { a, b } => write!(f, "({},{},0)", a.0, b.0),
            PointTarget::FZero { c } => write!(f, "(0,0,{})", c.0),
            PointTarget::F1Zero { b } => write!(f, "(0,{},0)", b.0),
            PointTarget::F2Zero { a } => write!(f, "({},0,0)", a.0),
        }
    }
}

impl PointTarget {
    /// From a triple `(a, b, c)` of prescribed `f f1`, `f f2`, `f1 f2`; at a
    /// point without zeros `c` is determined by `a`, `b` and `f`, so pass zero.
    pub fn from_triple(a: Elem, b: Elem, c: Elem) -> Result<PointTarget> {
        match (a.is_zero(), b.is_zero(), c.is_zero()) {
            (false, false, true) => Ok(PointTarget::Nonzero { a, b }),
            (true, true, false) => Ok(PointTarget::FZero { c }),
            (true, false, true) => Ok(PointTarget::F1Zero { b }),
            (false, true, true) => Ok(PointTarget::F2Zero { a }),
            _ => Err(Error::Domain(format!(
                "target ({a}, {b}, {c}) fits no allowed shape: (a, b, 0), (0, 0, c), (0, b, 0) or (a, 0, 0) with the rest nonzero"
            ))),
        }
    }

    fn has_zero(self) -> bool {
        !matches!(self, PointTarget::Nonzero { .. })
    }

    fn conditions(self, x: Elem) -> Vec<ProductCondition> {
        let p = Point::Finite(x);
        let cond = |positions: Vec<usize>, v: Elem| ProductCondition { point: p, positions, target: Target::Value(v) };
        match self {
            PointTarget::Nonzero { a, b } => vec![cond(vec![F, F1], a), cond(vec![F, F2], b)],
            PointTarget::FZero { c } => vec![cond(vec![F], Elem::ZERO), cond(vec![F1, F2], c)],
            PointTarget::F1Zero { b } => vec![cond(vec![F1], Elem::ZERO), cond(vec![F, F2], b)],
            PointTarget::F2Zero { a } => vec![cond(vec![F2], Elem::ZERO), cond(vec![F, F1], a)],
        }
    }
}

fn ratio_report(
    statement: &str,
    params: String,
    count: u128,
    family: u128,
    ratio: BigRational,
    tol: f64,
) -> CensusReport {
    let main = MainTerm::exact(ratio * BigRational::from_integer(family.into()));
    CensusReport::asymptotic(statement, params, count, Some(family), main, tol)
}

/// Value constraints with prescribed zeros, as a ratio to `|F_(n1, n2, n)|`.
pub fn census_cor46(
    k: &Field,
    degrees: [usize; 3],
    points: &[Elem],
    targets: &[PointTarget],
    tol: f64,
) -> Result<CensusReport> {
    check_points(k, points)?;
    if targets.len() != points.len() {
        return Err(Error::Domain("one target per point is required".into()));
    }
    let fs = FamilySpec::new(k.q() as u64, 2, degrees.to_vec(), false, false)?;
    let conditions: Vec<ProductCondition> =
        points.iter().zip(targets).flat_map(|(&x, t)| t.conditions(x)).collect();
    let (count, family) = count_constrained(k, &fs, &conditions)?;
    let q = k.q() as u64;
    let m = targets.iter().filter(|t| t.has_zero()).count() as i32;
    let l = points.len() as i32;
    let ratio = rat(1, (q - 1) * (q + 3)).pow(m) * rat(q, (q - 1) * (q - 1) * (q + 3)).pow(l - m);
    let params = format!("q={q} n={degrees:?} x=[{}] targets=[{}] m={m}", show_elems(points), targets.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "));
    Ok(ratio_report("cor46", params, count, family, ratio, tol))
}

/// Characters `(e1, e2, e)` of `f f1`, `f f2`, `f1 f2` at one point.
pub type CharacterPattern = (i8, i8, i8);

/// Number of zero entries, after checking the pattern is attainable: no zero
/// and `e = e1 e2`, or exactly two zeros.
fn pattern_zeros(p: CharacterPattern) -> Result<usize> {
    let (e1, e2, e) = p;
    if [e1, e2, e].iter().any(|v| !(-1..=1).contains(v)) {
        return Err(Error::Domain(format!("characters must be -1, 0 or 1, got {p:?}")));
    }
    let zeros = [e1, e2, e].iter().filter(|&&v| v == 0).count();
    match zeros {
        0 if e == e1 * e2 => Ok(0),
        2 => Ok(2),
        _ => Err(Error::Domain(format!("incompatible character pattern {p:?}"))),
    }
}

fn pattern_conditions(x: Point, p: CharacterPattern) -> [ProductCondition; 3] {
    let cond = |positions: Vec<usize>, e: i8| ProductCondition { point: x, positions, target: Target::Character(e) };
    [cond(vec![F, F1], p.0), cond(vec![F, F2], p.1), cond(vec![F1, F2], p.2)]
}

/// `C_m^l = (1/(2(q+3)))^m (q/(4(q+3)))^(l-m)`.
pub fn c_ml(q: u64, m: usize, l: usize) -> BigRational {
    rat(1, 2 * (q + 3)).pow(m as i32) * rat(q, 4 * (q + 3)).pow((l - m) as i32)
}

fn character_census(
    statement: &str,
    k: &Field,
    fs: &FamilySpec,
    points: &[Point],
    patterns: &[CharacterPattern],
    tol: f64,
) -> Result<CensusReport> {
    check_projective_points(k, points)?;
    if patterns.len() != points.len() {
        return Err(Error::Domain("one character pattern per point is required".into()));
    }
    let zeros = patterns.iter().map(|&p| pattern_zeros(p)).collect::<Result<Vec<_>>>()?;
    let m = zeros.iter().filter(|&&z| z > 0).count();
    let conditions: Vec<ProductCondition> =
        points.iter().zip(patterns).flat_map(|(&x, &p)| pattern_conditions(x, p)).collect();
    let (count, family) = count_constrained(k, fs, &conditions)?;
    let ratio = c_ml(fs.q, m, points.len());
    let params = format!(
        "q={} n={:?}{} x={points:?} e={patterns:?} m={m}",
        fs.q,
        fs.degrees,
        if fs.bracket { " bracket hat" } else { "" }
    );
    Ok(ratio_report(statement, params, count, family, ratio, tol))
}

/// Character constraints over `F_(n1, n2, n)` at finite points.
pub fn census_cor47(
    k: &Field,
    degrees: [usize; 3],
    points: &[Elem],
    patterns: &[CharacterPattern],
    tol: f64,
) -> Result<CensusReport> {
    let fs = FamilySpec::new(k.q() as u64, 2, degrees.to_vec(), false, false)?;
    let pts: Vec<Point> = points.iter().map(|&x| Point::Finite(x)).collect();
    character_census("cor47", k, &fs, &pts, patterns, tol)
}

/// Character constraints over the bracket family at points of `P^1`.
pub fn census_cor48(
    k: &Field,
    degrees: [usize; 3],
    points: &[Point],
    patterns: &[CharacterPattern],
    tol: f64,
) -> Result<CensusReport> {
    let fs = FamilySpec::new(k.q() as u64, 2, degrees.to_vec(), true, true)?;
    character_census("cor48", k, &fs, points, patterns, tol)
}

/// Value constraints on `h_1..h_r` over `F_(n_1, ..., n_{2^r-1})`; at a point
/// with a zero exactly one `h_j` may vanish.
pub fn census_cor68(
    k: &Field,
    r: u32,
    degrees: &[usize],
    points: &[Elem],
    values: &[Vec<Elem>],
    tol: f64,
) -> Result<CensusReport> {
    check_points(k, points)?;
    if r == 0 || r > MAX_R {
        return Err(Error::Domain(format!("r must be in 1..={MAX_R}")));
    }
    if values.len() != points.len() || values.iter().any(|v| v.len() != r as usize) {
        return Err(Error::Domain(format!("expected one row of {r} values per point")));
    }
    let fs = FamilySpec::new(k.q() as u64, r, degrees.to_vec(), false, false)?;
    let mut m = 0i32;
    let mut conditions = Vec::new();
    for (&x, row) in points.iter().zip(values) {
        let zeros = row.iter().filter(|a| a.is_zero()).count();
        if zeros > 1 {
            return Err(Error::Domain(format!(
                "at x = {x} {zeros} of the h_j vanish; the statement's main term covers exactly one"
            )));
        }
        m += (zeros == 1) as i32;
        for (j, &a) in row.iter().enumerate() {
            let positions = (1..=mask_count(r) as u32).filter(|mask| mask >> j & 1 == 1).map(|mask| mask as usize - 1);
            conditions.push(ProductCondition { point: Point::Finite(x), positions: positions.collect(), target: Target::Value(a) });
        }
    }
    let (count, family) = count_constrained(k, &fs, &conditions)?;
    let q = k.q() as u64;
    let t = 1u64 << r;
    let l = points.len() as i32;
    let ratio = rat(q, BigInt::from(q - 1).pow(r) * (q + t - 1)).pow(l - m)
        * rat(1, BigInt::from(q - 1).pow(r - 1) * (q + t - 1)).pow(m);
    let rows: Vec<String> = values.iter().map(|v| show_elems(v)).collect();
    let params = format!("q={q} r={r} n={degrees:?} x=[{}] h=[{}] m={m}", show_elems(points), rows.join("; "));
    Ok(ratio_report("cor68", params, count, family, ratio, tol))
}

/// Counts of admissible residue tuples modulo `(t - a)^2` by fiber type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberCensus {
    pub q: u64,
    pub r: u32,
    pub total: u128,
    /// All component values nonzero: the fiber is unramified.
    pub case_i: u128,
    /// Exactly one component value is zero.
    pub case_ii: u128,
    /// Case I with `2^r` rational points.
    pub ia: u128,
    pub ib: u128,
    /// Case II with `2^(r-1)` rational points.
    pub iia: u128,
    pub iib: u128,
}

impl FiberCensus {
    /// The closed forms: total `q^(m-1)(q-1)^m(q+m)`, case I `q^m (q-1)^m`,
    /// case II `m q^(m-1)(q-1)^m`, with `Ia = I / 2^r` and `IIa = II / 2^(r-1)`.
    pub fn expected(q: u64, r: u32) -> FiberCensus {
        let m = mask_count(r) as u32;
        let (q, t) = (q as u128, 1u128 << r);
        let base = q.pow(m - 1) * (q - 1).pow(m);
        let case_i = q.pow(m) * (q - 1).pow(m);
        let case_ii = m as u128 * base;
        FiberCensus {
            q: q as u64,
            r,
            total: base * (q + m as u128),
            case_i,
            case_ii,
            ia: case_i / t,
            ib: case_i - case_i / t,
            iia: case_ii / (t / 2),
            iib: case_ii - case_ii / (t / 2),
        }
    }

    pub fn reports(&self) -> Vec<CensusReport> {
        let e = FiberCensus::expected(self.q, self.r);
        let params = format!("q={} r={}", self.q, self.r);
        [
            ("total", self.total, e.total),
            ("I", self.case_i, e.case_i),
            ("II", self.case_ii, e.case_ii),
            ("Ia", self.ia, e.ia),
            ("Ib", self.ib, e.ib),
            ("IIa", self.iia, e.iia),
            ("IIb", self.iib, e.iib),
        ]
        .into_iter()
        .map(|(name, got, want)| CensusReport::identity("fibers", format!("{params} case={name}"), got.into(), want.into()))
        .collect()
    }
}

/// Walk all `(q^2)^(2^r - 1)` residue tuples `(f_j(a), f_j'(a))`, keep those
/// with every pair nonzero and at most one vanishing value, and classify the
/// fiber by its number of rational points `1 + sum_J prod chi(f_j(a))`.
pub fn fiber_census(k: &Field, r: u32) -> Result<FiberCensus> {
    if r == 0 || r > MAX_R {
        return Err(Error::Domain(format!("r must be in 1..={MAX_R}")));
    }
    let m = mask_count(r);
    let q = k.q() as u128;
    let pairs = q * q;
    let work = pairs.checked_pow(m as u32).unwrap_or(u128::MAX);
    if work > FIBER_LIMIT {
        return Err(Error::Infeasible { what: format!("fiber census at q = {q}, r = {r}"), work, limit: FIBER_LIMIT });
    }
    let chi: Vec<i8> = k.elements().map(|x| k.chi(x)).collect();
    let incidence: Vec<Vec<usize>> = SubextMask::all(r)
        .map(|mask| (0..m).filter(|&pos| mask.includes_component(pos as u32 + 1)).collect())
        .collect();
    let t = 1i64 << r;
    let rest = work / pairs;
    let counts = (0..pairs)
        .into_par_iter()
        .map(|first| -> Result<[u128; 4]> {
            let mut c = [0u128; 4];
            let mut values = vec![0u32; m];
            for idx in 0..rest {
                let mut n = idx * pairs + first;
                let mut zeros = 0;
                let mut admissible = true;
                for v in values.iter_mut() {
                    let pair = (n % pairs) as u32;
                    n /= pairs;
                    *v = pair % q as u32;
                    if pair == 0 {
                        admissible = false;
                        break;
                    }
                    zeros += (*v == 0) as usize;
                }
                if !admissible || zeros > 1 {
                    continue;
                }
                let fiber = 1 + incidence
                    .iter()
                    .map(|inc| inc.iter().map(|&pos| chi[values[pos] as usize]).product::<i8>() as i64)
                    .sum::<i64>();
                let slot = match (zeros, fiber) {
                    (0, f) if f == t => 0,
                    (0, 0) => 1,
                    (1, f) if f == t / 2 => 2,
                    (1, 0) => 3,
                    _ => {
                        return Err(Error::Structural(format!(
                            "fiber with {fiber} points and {zeros} vanishing values"
                        )))
                    }
                };
                c[slot] += 1;
            }
            Ok(c)
        })
        .try_reduce(|| [0; 4], |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]))?;
    let [ia, ib, iia, iib] = counts;
    Ok(FiberCensus {
        q: q as u64,
        r,
        total: ia + ib + iia + iib,
        case_i: ia + ib,
        case_ii: iia + iib,
        ia,
        ib,
        iia,
        iib,
    })
}

/// Both sides of `(q^2-1)^m - sum_{k=2}^m C(m,k) q^(m-k) (q-1)^m = q^(m-1)(q-1)^m(q+m)`.
pub fn identity_sides(q: u64, m: u32) -> Result<(BigInt, BigInt)> {
    if q == 0 || m == 0 {
        return Err(Error::Domain("q and m must be positive".into()));
    }
    let q = BigInt::from(q);
    let qm1: BigInt = &q - 1;
    let mut binom = BigInt::one();
    let mut sum = BigInt::zero();
    for k in 1..=m {
        binom = binom * (m - k + 1) / k;
        if k >= 2 {
            sum += &binom * q.pow(m - k) * qm1.pow(m);
        }
    }
    let lhs = (&q * &q - 1u32).pow(m) - sum;
    let rhs = q.pow(m - 1) * qm1.pow(m) * (q + m);
    Ok((lhs, rhs))
}

/// One exact report per `m` in `1..=max_m`.
pub fn identity_reports(q: u64, max_m: u32) -> Result<Vec<CensusReport>> {
    (1..=max_m)
        .map(|m| {
            let (l, r) = identity_sides(q, m)?;
            Ok(CensusReport::identity("identity", format!("q={q} m={m}"), l, r))
        })
        .collect()
}

pub fn identity_check(q: u64, m: u32) -> Result<bool> {
    let (l, r) = identity_sides(q, m)?;
    Ok(l == r)
}

/// Genus of an `r = 2` family by three routes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenusRow {
    /// Degrees of `f1`, `f2`, `f`.
    pub degrees: [usize; 3],
    pub branch: i64,
    pub subext: i64,
    /// `n1 + n2 + n + e - 4` with `e = 2` when all degrees are even, else 1.
    pub literal: i64,
    pub verdict: Verdict,
}

pub fn genus_formula_report(triples: &[[usize; 3]]) -> Vec<GenusRow> {
    triples
        .iter()
        .map(|&d| {
            let branch = genus_branch_degrees(2, &d);
            let subext = genus_subext_degrees(2, &d);
            let e = if d.iter().all(|n| n % 2 == 0) { 2 } else { 1 };
            let literal = d.iter().sum::<usize>() as i64 + e - 4;
            let verdict = if branch != subext {
                Verdict::Mismatch
            } else if literal != branch {
                Verdict::Flagged
            } else {
                Verdict::Agree
            };
            GenusRow { degrees: d, branch, subext, literal, verdict }
        })
        .collect()
}

impl GenusRow {
    pub fn report(&self) -> CensusReport {
        let (b, l) = (self.branch, self.literal);
        CensusReport {
            statement: "genus".into(),
            params: format!("n={:?} subext={}", self.degrees, self.subext),
            exact_count: b.into(),
            family_size: None,
            main_term: MainTerm::exact(BigRational::from_integer(l.into())),
            rel_error: if l == 0 { if b == 0 { 0.0 } else { f64::INFINITY } } else { ((b - l) as f64 / l as f64).abs() },
            verdict: self.verdict,
        }
    }
}

/// Over every tuple of a family: the two genus routes agree and each `p_J`
/// matches the square-free part oracle. Returns `(tuples, failures)`.
pub fn subextension_census(k: &Field, fs: &FamilySpec) -> Result<(u128, u128)> {
    let tuples = TupleSpace::new(k, fs)?.tuples();
    let failures = tuples
        .par_iter()
        .map(|t| -> Result<u128> {
            let ok = genus_branch(t) == genus_subext(t) && subextensions_match_oracle(k, t)?;
            Ok((!ok) as u128)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok((tuples.len() as u128, failures))
}
