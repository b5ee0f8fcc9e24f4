//! Parametrization of r-quadratic covers by tuples of pairwise-coprime
//! square-free polynomials.
//!
//! A cover `y_i^2 = h_i(t)`, `i = 1..r`, corresponds to a tuple
//! `(f_1, ..., f_{2^r - 1})` indexed by nonzero bitmasks `j`: `f_j` collects
//! the irreducible factors shared by exactly the `h_i` whose bit is set in `j`.
//! For `r = 2` the tuple is `(f_1, f_2, f)` with `f = gcd(h_1, h_2)` stored at
//! mask 3.

use num_bigint::{BigUint, RandBigInt};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{odd_prime_power, Elem, Field};
use crate::poly::{Poly, PolySet};

/// Largest number of generators accepted anywhere in the crate.
pub const MAX_R: u32 = 6;

pub fn mask_count(r: u32) -> usize {
    (1usize << r) - 1
}

/// A nonempty subset `J` of the generators, as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubextMask(u32);

impl SubextMask {
    pub fn new(mask: u32, r: u32) -> Result<SubextMask> {
        if mask == 0 || mask as usize > mask_count(r) {
            return Err(Error::Domain(format!("mask {mask} is not a nonzero subset of {r} generators")));
        }
        Ok(SubextMask(mask))
    }

    pub fn all(r: u32) -> impl Iterator<Item = SubextMask> {
        (1..=mask_count(r) as u32).map(SubextMask)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// True when component `j` enters `p_J` (odd incidence).
    pub fn includes_component(self, j: u32) -> bool {
        (self.0 & j).count_ones() % 2 == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadTuple {
    r: u32,
    polys: Vec<Poly>,
}

impl QuadTuple {
    /// Validates square-freeness and pairwise coprimality.
    pub fn new(k: &Field, r: u32, polys: Vec<Poly>) -> Result<QuadTuple> {
        check_r(r)?;
        if polys.len() != mask_count(r) {
            return Err(Error::Domain(format!(
                "expected {} components for r = {r}, got {}",
                mask_count(r),
                polys.len()
            )));
        }
        for (i, f) in polys.iter().enumerate() {
            if !f.is_squarefree(k)? {
                return Err(Error::Domain(format!("component {} = {f} is not square-free", i + 1)));
            }
        }
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                if !polys[i].is_coprime(&polys[j], k) {
                    return Err(Error::Domain(format!("components {} and {} share a factor", i + 1, j + 1)));
                }
            }
        }
        Ok(QuadTuple { r, polys })
    }

    pub(crate) fn from_parts(r: u32, polys: Vec<Poly>) -> QuadTuple {
        debug_assert_eq!(polys.len(), mask_count(r));
        QuadTuple { r, polys }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn components(&self) -> &[Poly] {
        &self.polys
    }

    /// Component at nonzero mask `j`.
    pub fn component(&self, j: u32) -> &Poly {
        &self.polys[j as usize - 1]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.polys.iter().map(Poly::deg).collect()
    }

    pub fn total_degree(&self) -> usize {
        self.polys.iter().map(Poly::deg).sum()
    }

    /// Scales the last component to be monic.
    pub fn normalized(&self, k: &Field) -> QuadTuple {
        let mut polys = self.polys.clone();
        if let Some(last) = polys.last_mut() {
            *last = last.monic(k);
        }
        QuadTuple { r: self.r, polys }
    }
}

fn check_r(r: u32) -> Result<()> {
    if r == 0 || r > MAX_R {
        return Err(Error::Structural(format!("r = {r} outside 1..={MAX_R}")));
    }
    Ok(())
}

/// `h_i = prod_{j : bit i of j set} f_j`.
pub fn h_from_tuple(k: &Field, t: &QuadTuple) -> Vec<Poly> {
    (0..t.r)
        .map(|i| {
            (1..=mask_count(t.r) as u32)
                .filter(|j| j & (1 << i) != 0)
                .fold(Poly::one(), |acc, j| acc.mul(t.component(j), k))
        })
        .collect()
}

/// `p_J = prod_{j : |j & J| odd} f_j`, the square-free polynomial of the
/// quadratic subextension indexed by `J`.
pub fn subextension_poly(k: &Field, t: &QuadTuple, mask: SubextMask) -> Poly {
    (1..=mask_count(t.r) as u32)
        .filter(|&j| mask.includes_component(j))
        .fold(Poly::one(), |acc, j| acc.mul(t.component(j), k))
}

/// Degree of `p_J` without forming the product.
pub fn subextension_degree(degrees: &[usize], mask: SubextMask) -> usize {
    degrees
        .iter()
        .enumerate()
        .filter(|(i, _)| mask.includes_component(*i as u32 + 1))
        .map(|(_, d)| d)
        .sum()
}

/// Inverse of [`h_from_tuple`] through gcds only.
///
/// Component `j` is the gcd of the `h_i` with bit `i` set in `j`, stripped of
/// every factor shared with the remaining `h_i`. All components are monic
/// except the single-generator masks `1 << i`, which carry the leading
/// coefficient of `h_i`.
pub fn tuple_from_h(k: &Field, h: &[Poly]) -> Result<QuadTuple> {
    let r = h.len() as u32;
    check_r(r)?;
    for (i, hi) in h.iter().enumerate() {
        if !hi.is_squarefree(k)? {
            return Err(Error::Domain(format!("h_{} = {hi} is not square-free", i + 1)));
        }
    }
    let mut polys = Vec::with_capacity(mask_count(r));
    for j in 1..=mask_count(r) as u32 {
        let mut f = h
            .iter()
            .enumerate()
            .filter(|(i, _)| j & (1 << i) != 0)
            .fold(Poly::zero(), |acc, (_, hi)| acc.gcd(hi, k));
        for (_, hi) in h.iter().enumerate().filter(|(i, _)| j & (1 << i) == 0) {
            let g = f.gcd(hi, k);
            if !g.is_constant() {
                f = f.div_exact(&g, k)?;
            }
        }
        if j.is_power_of_two() {
            let lead = h[j.trailing_zeros() as usize].leading().expect("nonzero");
            f = f.scale(lead, k);
        }
        polys.push(f);
    }
    let t = QuadTuple { r, polys };
    let back = h_from_tuple(k, &t);
    if back.as_slice() != h {
        return Err(Error::Structural("gcd lattice does not reproduce the generators".into()));
    }
    Ok(t)
}

/// Genus from the degrees of the components, by counting branch points.
///
/// Each root of a component is a branch point with inertia of order 2, and
/// infinity is a branch point iff some `p_J` has odd degree.
pub fn genus_branch_degrees(r: u32, degrees: &[usize]) -> i64 {
    let finite: usize = degrees.iter().sum();
    let infinity = SubextMask::all(r).any(|m| subextension_degree(degrees, m) % 2 == 1);
    let branch = (finite + infinity as usize) as i64;
    // 2g - 2 = 2^r (0 - 2) + branch * 2^(r-1)
    ((1i64 << r) * branch) / 4 + 1 - (1i64 << r)
}

/// Genus as the sum of the hyperelliptic genera `floor((deg p_J - 1) / 2)`.
pub fn genus_subext_degrees(r: u32, degrees: &[usize]) -> i64 {
    SubextMask::all(r)
        .map(|m| (subextension_degree(degrees, m) as i64 - 1).div_euclid(2))
        .sum()
}

pub fn genus_branch(t: &QuadTuple) -> i64 {
    genus_branch_degrees(t.r, &t.degrees())
}

pub fn genus_subext(t: &QuadTuple) -> i64 {
    genus_subext_degrees(t.r, &t.degrees())
}

/// A family of tuples: one or (bracket mode) four degree patterns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub q: u64,
    pub r: u32,
    /// Target degree per component, in mask order `1..2^r`.
    pub degrees: Vec<usize>,
    pub bracket: bool,
    pub hat: bool,
}

impl FamilySpec {
    pub fn new(q: u64, r: u32, degrees: Vec<usize>, bracket: bool, hat: bool) -> Result<FamilySpec> {
        let fs = FamilySpec { q, r, degrees, bracket, hat };
        fs.validate()?;
        Ok(fs)
    }

    pub fn validate(&self) -> Result<()> {
        odd_prime_power(self.q)?;
        check_r(self.r)?;
        if self.degrees.len() != mask_count(self.r) {
            return Err(Error::Domain(format!(
                "r = {} needs {} degrees, got {}",
                self.r,
                mask_count(self.r),
                self.degrees.len()
            )));
        }
        if self.bracket && self.r != 2 {
            return Err(Error::Unsupported("bracket families are defined only for r = 2".into()));
        }
        Ok(())
    }

    /// Degree patterns making up the family, in fixed order.
    pub fn patterns(&self) -> Vec<Vec<usize>> {
        let mut out = vec![self.degrees.clone()];
        if self.bracket {
            for i in 0..self.degrees.len() {
                if self.degrees[i] > 0 {
                    let mut d = self.degrees.clone();
                    d[i] -= 1;
                    out.push(d);
                }
            }
        }
        out
    }

    /// The polynomial set for component at position `pos` (mask `pos + 1`).
    pub fn component_set(&self, pos: usize, degree: usize) -> PolySet {
        let last = pos + 1 == mask_count(self.r);
        PolySet::new(degree, !self.hat || last, true)
    }
}

/// Precomputed candidate lists for every component slot of a family.
pub struct TupleSpace<'k> {
    field: &'k Field,
    spec: FamilySpec,
    pools: Vec<(PolySet, Vec<Poly>)>,
    /// Pool index per component, per pattern.
    patterns: Vec<Vec<usize>>,
}

/// A tuple visited during enumeration, borrowed from the pools.
pub struct TupleRef<'a> {
    pools: &'a [(PolySet, Vec<Poly>)],
    slots: &'a [usize],
    idx: &'a [usize],
}

impl TupleRef<'_> {
    /// Component at position `pos` (mask `pos + 1`).
    pub fn poly(&self, pos: usize) -> &Poly {
        &self.pools[self.slots[pos]].1[self.idx[pos]]
    }

    /// Pool and position of the component, usable as a key into per-pool caches.
    pub fn key(&self, pos: usize) -> (usize, usize) {
        (self.slots[pos], self.idx[pos])
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn to_tuple(&self, r: u32) -> QuadTuple {
        QuadTuple::from_parts(r, (0..self.len()).map(|i| self.poly(i).clone()).collect())
    }
}

impl<'k> TupleSpace<'k> {
    pub fn new(field: &'k Field, spec: &FamilySpec) -> Result<TupleSpace<'k>> {
        spec.validate()?;
        if field.q() as u64 != spec.q {
            return Err(Error::Domain(format!("field has q = {}, family has q = {}", field.q(), spec.q)));
        }
        let mut pools: Vec<(PolySet, Vec<Poly>)> = Vec::new();
        let mut patterns = Vec::new();
        for pattern in spec.patterns() {
            let mut slots = Vec::with_capacity(pattern.len());
            for (pos, &d) in pattern.iter().enumerate() {
                let set = spec.component_set(pos, d);
                let slot = match pools.iter().position(|(s, _)| *s == set) {
                    Some(i) => i,
                    None => {
                        pools.push((set, set.collect(field)));
                        pools.len() - 1
                    }
                };
                slots.push(slot);
            }
            patterns.push(slots);
        }
        Ok(TupleSpace { field, spec: spec.clone(), pools, patterns })
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn field(&self) -> &Field {
        self.field
    }

    pub fn pools(&self) -> &[(PolySet, Vec<Poly>)] {
        &self.pools
    }

    /// Units of parallel work: (pattern, index of the first component), in order.
    fn work_items(&self) -> Vec<(usize, usize)> {
        self.patterns
            .iter()
            .enumerate()
            .flat_map(|(p, slots)| (0..self.pools[slots[0]].1.len()).map(move |i| (p, i)))
            .collect()
    }

    fn visit_item<F: FnMut(&TupleRef)>(&self, (pattern, first): (usize, usize), visit: &mut F) {
        let slots = &self.patterns[pattern];
        let mut idx = vec![0usize; slots.len()];
        idx[0] = first;
        self.descend(slots, &mut idx, 1, visit);
    }

    fn descend<F: FnMut(&TupleRef)>(&self, slots: &[usize], idx: &mut Vec<usize>, depth: usize, visit: &mut F) {
        if depth == slots.len() {
            visit(&TupleRef { pools: &self.pools, slots, idx });
            return;
        }
        let pool = &self.pools[slots[depth]].1;
        for (i, cand) in pool.iter().enumerate() {
            let ok = (0..depth).all(|d| {
                let prev = &self.pools[slots[d]].1[idx[d]];
                cand.is_constant() || prev.is_constant() || cand.is_coprime(prev, self.field)
            });
            if ok {
                idx[depth] = i;
                self.descend(slots, idx, depth + 1, visit);
            }
        }
    }

    /// Sequential visit in deterministic order.
    pub fn for_each<F: FnMut(&TupleRef)>(&self, mut visit: F) {
        for item in self.work_items() {
            self.visit_item(item, &mut visit);
        }
    }

    /// Parallel fold over the family; `merge` must be associative and commutative
    /// for the result to be independent of scheduling.
    pub fn par_fold<A, I, F, M>(&self, identity: I, fold: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, &TupleRef) + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        self.work_items()
            .into_par_iter()
            .map(|item| {
                let mut acc = identity();
                self.visit_item(item, &mut |t| fold(&mut acc, t));
                acc
            })
            .reduce(&identity, &merge)
    }

    pub fn cardinality(&self) -> u128 {
        self.par_fold(|| 0u128, |n, _| *n += 1, |a, b| a + b)
    }

    pub fn tuples(&self) -> Vec<QuadTuple> {
        let r = self.spec.r;
        self.work_items()
            .into_par_iter()
            .flat_map_iter(|item| {
                let mut out = Vec::new();
                self.visit_item(item, &mut |t| out.push(t.to_tuple(r)));
                out
            })
            .collect()
    }
}

/// Every tuple of the family, in deterministic order.
pub fn enumerate_tuples(k: &Field, fs: &FamilySpec) -> Result<Vec<QuadTuple>> {
    Ok(TupleSpace::new(k, fs)?.tuples())
}

pub fn family_cardinality(k: &Field, fs: &FamilySpec) -> Result<u128> {
    Ok(TupleSpace::new(k, fs)?.cardinality())
}

/// `|F^_[n,n1,n2]| / (q(q^2 - 1))`, the automorphism-weighted curve count.
pub fn family_weight(k: &Field, fs: &FamilySpec) -> Result<BigRational> {
    if fs.r != 2 || !fs.bracket || !fs.hat {
        return Err(Error::Unsupported("the moduli weight is defined for r = 2 bracket hat families".into()));
    }
    let count = family_cardinality(k, fs)?;
    let q = fs.q as i64;
    Ok(BigRational::new(count.into(), (q * (q * q - 1)).into()))
}

/// Draws tuples uniformly from a family by rejection from uniform coefficient vectors.
pub struct TupleSampler<'k> {
    field: &'k Field,
    spec: FamilySpec,
    patterns: Vec<Vec<usize>>,
    /// Cumulative raw sizes of the patterns' coefficient spaces.
    cumulative: Vec<BigUint>,
}

impl<'k> TupleSampler<'k> {
    pub fn new(field: &'k Field, spec: &FamilySpec) -> Result<TupleSampler<'k>> {
        spec.validate()?;
        let patterns = spec.patterns();
        let mut cumulative = Vec::with_capacity(patterns.len());
        let mut acc = BigUint::from(0u32);
        for pattern in &patterns {
            let size = pattern
                .iter()
                .enumerate()
                .fold(BigUint::from(1u32), |s, (pos, &d)| s * spec.component_set(pos, d).raw_count(spec.q));
            acc += size;
            cumulative.push(acc.clone());
        }
        Ok(TupleSampler { field, spec: spec.clone(), patterns, cumulative })
    }

    fn raw_poly<R: Rng>(&self, set: PolySet, rng: &mut R) -> Poly {
        let q = self.field.q();
        let mut coeffs: Vec<Elem> = (0..set.degree).map(|_| Elem(rng.gen_range(0..q))).collect();
        coeffs.push(if set.monic { Elem::ONE } else { Elem(rng.gen_range(1..q)) });
        Poly::new(coeffs)
    }

    /// One uniform draw; `None` only if `max_attempts` rejections occur in a row.
    pub fn sample<R: Rng>(&self, rng: &mut R, max_attempts: usize) -> Option<QuadTuple> {
        let total = self.cumulative.last().expect("at least one pattern");
        for _ in 0..max_attempts {
            let ticket = rng.gen_biguint_below(total);
            let pattern = self.cumulative.iter().position(|c| &ticket < c).expect("ticket below total");
            let degrees = &self.patterns[pattern];
            let mut polys: Vec<Poly> = Vec::with_capacity(degrees.len());
            let mut ok = true;
            for (pos, &d) in degrees.iter().enumerate() {
                let f = self.raw_poly(self.spec.component_set(pos, d), rng);
                if !f.is_squarefree(self.field).expect("nonzero")
                    || polys.iter().any(|g| !f.is_coprime(g, self.field))
                {
                    ok = false;
                    break;
                }
                polys.push(f);
            }
            if ok {
                return Some(QuadTuple::from_parts(self.spec.r, polys));
            }
        }
        None
    }

    /// Fraction of the raw space expected to be accepted, for diagnostics.
    pub fn raw_size(&self) -> f64 {
        self.cumulative.last().and_then(|c| c.to_f64()).unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Field {
        Field::with_q(3).unwrap()
    }

    fn p(k: &Field, s: &str) -> Poly {
        Poly::parse(s, k).unwrap()
    }

    #[test]
    fn h_from_tuple_examples() {
        let k = k3();
        let t = QuadTuple::new(&k, 2, vec![p(&k, "0,1"), p(&k, "1,1"), p(&k, "1")]).unwrap();
        assert_eq!(h_from_tuple(&k, &t), vec![p(&k, "0,1"), p(&k, "1,1")]);
        let t = QuadTuple::new(&k, 2, vec![p(&k, "1,1"), p(&k, "2,1"), p(&k, "0,1")]).unwrap();
        let t_t1 = p(&k, "0,1").mul(&p(&k, "1,1"), &k);
        let t_t2 = p(&k, "0,1").mul(&p(&k, "2,1"), &k);
        assert_eq!(h_from_tuple(&k, &t), vec![t_t1, t_t2]);
        let t = QuadTuple::new(&k, 1, vec![p(&k, "1,0,1")]).unwrap();
        assert_eq!(h_from_tuple(&k, &t), vec![p(&k, "1,0,1")]);
    }

    #[test]
    fn tuple_validation() {
        let k = k3();
        assert!(QuadTuple::new(&k, 2, vec![p(&k, "0,1"), p(&k, "0,2"), p(&k, "1")]).is_err());
        assert!(QuadTuple::new(&k, 2, vec![p(&k, "0,0,1"), p(&k, "1"), p(&k, "1")]).is_err());
        assert!(QuadTuple::new(&k, 2, vec![p(&k, "1"), p(&k, "1")]).is_err());
    }

    #[test]
    fn subextension_polys_r2() {
        let k = k3();
        let (f1, f2, f) = (p(&k, "1,1"), p(&k, "2,1"), p(&k, "0,1"));
        let t = QuadTuple::new(&k, 2, vec![f1.clone(), f2.clone(), f.clone()]).unwrap();
        let pj = |m| subextension_poly(&k, &t, SubextMask::new(m, 2).unwrap());
        assert_eq!(pj(1), f1.mul(&f, &k));
        assert_eq!(pj(2), f2.mul(&f, &k));
        assert_eq!(pj(3), f1.mul(&f2, &k));
    }

    #[test]
    fn subextension_r3_full_mask() {
        let k = Field::with_q(5).unwrap();
        let polys: Vec<Poly> = (0..7).map(|i| Poly::linear_root(&k, Elem(i % 5))).collect();
        // only five distinct linears exist; use constants for the rest
        let polys: Vec<Poly> = polys
            .into_iter()
            .enumerate()
            .map(|(i, f)| if i < 5 { f } else { Poly::constant(Elem(2)) })
            .collect();
        let t = QuadTuple::new(&k, 3, polys.clone()).unwrap();
        let expected = [1u32, 2, 4, 7].iter().fold(Poly::one(), |acc, &j| acc.mul(&polys[j as usize - 1], &k));
        assert_eq!(subextension_poly(&k, &t, SubextMask::new(7, 3).unwrap()), expected);
    }

    #[test]
    fn tuple_from_h_examples() {
        let k = k3();
        let h1 = p(&k, "0,1").mul(&p(&k, "1,1"), &k);
        let h2 = p(&k, "0,1").mul(&p(&k, "2,1"), &k);
        let t = tuple_from_h(&k, &[h1, h2]).unwrap();
        assert_eq!(t.components(), &[p(&k, "1,1"), p(&k, "2,1"), p(&k, "0,1")]);
        let (h1, h2) = (p(&k, "1,1"), p(&k, "0,2"));
        let t = tuple_from_h(&k, &[h1.clone(), h2.clone()]).unwrap();
        assert_eq!(t.components(), &[h1.clone(), h2, Poly::one()]);
        let t = tuple_from_h(&k, &[h1.clone()]).unwrap();
        assert_eq!(t.components(), &[h1]);
        assert!(tuple_from_h(&k, &[p(&k, "0,0,1"), p(&k, "1,1")]).is_err());
        assert!(matches!(tuple_from_h(&k, &[]), Err(Error::Structural(_))));
    }

    #[test]
    fn genus_examples() {
        assert_eq!(genus_branch_degrees(2, &[1, 1, 1]), 0);
        assert_eq!(genus_subext_degrees(2, &[1, 1, 1]), 0);
        assert_eq!(genus_branch_degrees(2, &[3, 3, 0]), 4);
        assert_eq!(genus_subext_degrees(2, &[3, 3, 0]), 4);
        assert_eq!(genus_branch_degrees(1, &[6]), 2);
        assert_eq!(genus_subext_degrees(1, &[6]), 2);
        assert_eq!(genus_branch_degrees(2, &[2, 2, 2]), 3);
        assert_eq!(genus_subext_degrees(2, &[2, 2, 2]), 3);
        assert_eq!(genus_branch_degrees(2, &[2, 1, 1]), 2);
        assert_eq!(genus_subext_degrees(2, &[2, 1, 1]), 2);
        // Constant data: 2^r copies of the line, arithmetic genus 1 - 2^r.
        for r in 1..=4 {
            let zeros = vec![0; mask_count(r)];
            assert_eq!(genus_branch_degrees(r, &zeros), 1 - (1 << r));
            assert_eq!(genus_subext_degrees(r, &zeros), 1 - (1 << r));
        }
    }

    #[test]
    fn genus_formulas_agree_on_degree_vectors() {
        for r in 1..=4u32 {
            let m = mask_count(r);
            let top = if r <= 3 { 3 } else { 1 };
            let mut degrees = vec![0usize; m];
            loop {
                assert_eq!(genus_branch_degrees(r, &degrees), genus_subext_degrees(r, &degrees), "{degrees:?}");
                let odd = SubextMask::all(r).filter(|&j| subextension_degree(&degrees, j) % 2 == 1).count();
                assert!(odd == 0 || 2 * odd == m + 1, "{degrees:?}");
                let mut i = 0;
                while i < m && degrees[i] == top {
                    degrees[i] = 0;
                    i += 1;
                }
                if i == m {
                    break;
                }
                degrees[i] += 1;
            }
        }
    }

    #[test]
    fn family_counts() {
        let k = k3();
        let fs = FamilySpec::new(3, 2, vec![1, 1, 0], false, false).unwrap();
        assert_eq!(family_cardinality(&k, &fs).unwrap(), 6);
        let zero = FamilySpec::new(3, 2, vec![0, 0, 0], false, false).unwrap();
        let tuples = enumerate_tuples(&k, &zero).unwrap();
        assert_eq!(tuples.len(), 1);
        assert!(tuples[0].components().iter().all(|f| *f == Poly::one()));
        for degrees in [vec![1, 1, 1], vec![2, 1, 1], vec![2, 2, 1], vec![1, 2, 0]] {
            let monic = FamilySpec::new(3, 2, degrees.clone(), false, false).unwrap();
            let hat = FamilySpec::new(3, 2, degrees, false, true).unwrap();
            assert_eq!(family_cardinality(&k, &hat).unwrap(), 4 * family_cardinality(&k, &monic).unwrap());
        }
    }

    #[test]
    fn bracket_is_union_of_patterns() {
        let k = k3();
        let fs = FamilySpec::new(3, 2, vec![2, 1, 1], true, true).unwrap();
        let total: u128 = fs
            .patterns()
            .into_iter()
            .map(|d| family_cardinality(&k, &FamilySpec::new(3, 2, d, false, true).unwrap()).unwrap())
            .sum();
        assert_eq!(family_cardinality(&k, &fs).unwrap(), total);
        assert!(FamilySpec::new(3, 3, vec![1; 7], true, false).is_err());
        assert_eq!(
            family_weight(&k, &fs).unwrap(),
            BigRational::new((total as i64).into(), 24.into())
        );
        assert!(family_weight(&k, &FamilySpec::new(3, 2, vec![1, 1, 1], false, true).unwrap()).is_err());
    }

    #[test]
    fn enumeration_is_deterministic_and_valid() {
        let k = k3();
        let fs = FamilySpec::new(3, 2, vec![2, 2, 1], true, true).unwrap();
        let a = enumerate_tuples(&k, &fs).unwrap();
        let b = enumerate_tuples(&k, &fs).unwrap();
        assert_eq!(a, b);
        for t in a.iter().step_by(17) {
            QuadTuple::new(&k, 2, t.components().to_vec()).unwrap();
            assert!(t.components()[2].is_monic());
        }
        let mut seq = Vec::new();
        TupleSpace::new(&k, &fs).unwrap().for_each(|t| seq.push(t.to_tuple(2)));
        assert_eq!(seq, a);
    }

    #[test]
    fn s3_symmetry_of_subextensions() {
        // Permuting (f1, f2, f) permutes the three quadratic subextensions.
        let k = Field::with_q(5).unwrap();
        let fs = FamilySpec::new(5, 2, vec![1, 1, 1], false, false).unwrap();
        for t in enumerate_tuples(&k, &fs).unwrap().iter().take(20) {
            let c = t.components();
            let base: std::collections::BTreeSet<Poly> =
                SubextMask::all(2).map(|m| subextension_poly(&k, t, m)).collect();
            for perm in [[1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]] {
                let u = QuadTuple::new(&k, 2, perm.iter().map(|&i| c[i].clone()).collect()).unwrap();
                let other: std::collections::BTreeSet<Poly> =
                    SubextMask::all(2).map(|m| subextension_poly(&k, &u, m)).collect();
                assert_eq!(base, other);
            }
        }
    }

    #[test]
    fn sampler_stays_in_family() {
        use rand::SeedableRng;
        let k = k3();
        let fs = FamilySpec::new(3, 2, vec![2, 2, 2], true, true).unwrap();
        let sampler = TupleSampler::new(&k, &fs).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let patterns = fs.patterns();
        for _ in 0..200 {
            let t = sampler.sample(&mut rng, 10_000).unwrap();
            QuadTuple::new(&k, 2, t.components().to_vec()).unwrap();
            assert!(patterns.contains(&t.degrees()));
            assert!(t.components()[2].is_monic());
        }
    }
}
