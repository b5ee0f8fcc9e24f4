//! Arithmetic in `F_q` for odd prime powers `q = p^e`.
//!
//! Elements are packed into a single integer index whose base-`p` digits are
//! the coordinates in the polynomial basis `1, t, ..., t^(e-1)` of
//! `F_p[t] / (modulus)`. Index 0 is zero and index 1 is one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field size.
pub const MAX_Q: u32 = 1 << 16;

/// Above this size the extension-field product table is not materialized.
const TABLE_LIMIT: u32 = 729;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^e` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let (mut rest, mut e) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// Validates that `q` is an odd prime power and returns `(p, e)`.
pub fn odd_prime_power(q: u64) -> Result<(u64, u32)> {
    match prime_power(q) {
        Some((2, _)) => Err(Error::InvalidField(format!("q = {q} is even; characteristic 2 is excluded"))),
        Some(pe) => Ok(pe),
        None => Err(Error::InvalidField(format!("q = {q} is not a prime power"))),
    }
}

/// Field designation as written on the command line: `P^E` or a plain prime power `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDesignation {
    pub p: u32,
    pub e: u32,
}

impl FieldDesignation {
    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.e)
    }
}

impl FromStr for FieldDesignation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad field size {s:?}")))
        };
        let (p, e) = match s.split_once('^') {
            Some((p, e)) => {
                let (p, e) = (parse(p)?, parse(e)?);
                if !is_prime(p) {
                    return Err(Error::InvalidField(format!("{p} is not prime")));
                }
                if p == 2 {
                    return Err(Error::InvalidField("characteristic 2 is excluded".into()));
                }
                if e == 0 {
                    return Err(Error::InvalidField("extension degree must be at least 1".into()));
                }
                (p, e as u32)
            }
            None => odd_prime_power(parse(s)?)?,
        };
        Ok(FieldDesignation { p: p as u32, e })
    }
}

/// The finite field `F_q`, immutable after construction.
#[derive(Clone, Debug)]
pub struct Field {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus over `F_p`, ascending coefficients, length `e + 1`.
    modulus: Vec<u32>,
    mul_table: Option<Vec<u32>>,
    inv_table: Vec<u32>,
    chi_table: Vec<i8>,
}

impl Field {
    pub fn new(p: u32, e: u32) -> Result<Field> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if p == 2 {
            return Err(Error::InvalidField("characteristic 2 is excluded".into()));
        }
        if e == 0 {
            return Err(Error::InvalidField("extension degree must be at least 1".into()));
        }
        let q = (p as u64).checked_pow(e).filter(|&q| q <= MAX_Q as u64).ok_or_else(|| {
            Error::InvalidField(format!("{p}^{e} exceeds the supported size {MAX_Q}"))
        })? as u32;
        let modulus = if e == 1 { vec![0, 1] } else { least_irreducible(p, e) };
        let mut field = Field { p, e, q, modulus, mul_table: None, inv_table: Vec::new(), chi_table: Vec::new() };
        if e > 1 && q <= TABLE_LIMIT {
            let mut table = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in a..q {
                    let c = field.mul_slow(a, b);
                    table[(a * q + b) as usize] = c;
                    table[(b * q + a) as usize] = c;
                }
            }
            field.mul_table = Some(table);
        }
        field.inv_table = (0..q)
            .map(|a| if a == 0 { 0 } else { field.pow(Elem(a), (q - 2) as u64).0 })
            .collect();
        let mut chi = vec![-1i8; q as usize];
        chi[0] = 0;
        for a in 1..q {
            let sq = field.mul(Elem(a), Elem(a));
            chi[sq.0 as usize] = 1;
        }
        field.chi_table = chi;
        Ok(field)
    }

    pub fn with_q(q: u64) -> Result<Field> {
        let (p, e) = odd_prime_power(q)?;
        Field::new(p as u32, e)
    }

    pub fn from_designation(d: FieldDesignation) -> Result<Field> {
        Field::new(d.p, d.e)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients over `F_p`, ascending; `[0, 1]` for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elem(&self, index: u32) -> Result<Elem> {
        if index < self.q {
            Ok(Elem(index))
        } else {
            Err(Error::Domain(format!("element index {index} out of range for q = {}", self.q)))
        }
    }

    /// All `q` elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.q).map(Elem)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.e == 1 {
            return Elem((a.0 + b.0) % self.p);
        }
        let (p, mut x, mut y, mut out, mut place) = (self.p, a.0, b.0, 0, 1);
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        Elem(out)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if self.e == 1 {
            return Elem((self.p - a.0) % self.p);
        }
        let (p, mut x, mut out, mut place) = (self.p, a.0, 0, 1);
        while x > 0 {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        Elem(out)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if self.e == 1 {
            return Elem(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32);
        }
        match &self.mul_table {
            Some(t) => Elem(t[(a.0 * self.q + b.0) as usize]),
            None => Elem(self.mul_slow(a.0, b.0)),
        }
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(Elem(self.inv_table[a.0 as usize]))
        }
    }

    pub fn pow(&self, a: Elem, mut exp: u64) -> Elem {
        let (mut base, mut acc) = (a, Elem::ONE);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// The element `n * 1` for an integer `n`.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem(n.rem_euclid(self.p as i64) as u32)
    }

    /// Quadratic character from the precomputed square table.
    pub fn chi(&self, a: Elem) -> i8 {
        self.chi_table[a.0 as usize]
    }

    /// Quadratic character by Euler's criterion `a^((q-1)/2)`.
    pub fn chi_euler(&self, a: Elem) -> i8 {
        if a.is_zero() {
            return 0;
        }
        let r = self.pow(a, ((self.q - 1) / 2) as u64);
        if r == Elem::ONE {
            1
        } else {
            debug_assert_eq!(r, self.neg(Elem::ONE));
            -1
        }
    }

    pub fn is_square(&self, a: Elem) -> bool {
        self.chi(a) >= 0
    }

    fn digits(&self, mut x: u32) -> Vec<u32> {
        let mut d = vec![0; self.e as usize];
        for slot in d.iter_mut() {
            *slot = x % self.p;
            x /= self.p;
        }
        d
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let (p, e) = (self.p as u64, self.e as usize);
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        for k in (e..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for (i, &m) in self.modulus[..e].iter().enumerate() {
                prod[k - e + i] = (prod[k - e + i] + (p - c) * m as u64) % p;
            }
            prod[k] = 0;
        }
        prod[..e].iter().rev().fold(0u64, |acc, &c| acc * p + c) as u32
    }
}

/// Lexicographically least (by packed index) monic irreducible of degree `e` over `F_p`.
fn least_irreducible(p: u32, e: u32) -> Vec<u32> {
    let base = (p as u64).pow(e);
    for low in 0..base {
        let mut coeffs = Vec::with_capacity(e as usize + 1);
        let mut x = low;
        for _ in 0..e {
            coeffs.push((x % p as u64) as u32);
            x /= p as u64;
        }
        coeffs.push(1);
        if prime_field_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Trial division by every monic polynomial of degree at most `deg / 2`.
fn prime_field_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut x = low;
            for _ in 0..d {
                g.push((x % p as u64) as u32);
                x /= p as u64;
            }
            g.push(1);
            if prime_field_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn prime_field_rem(f: &[u32], g: &[u32], p: u32) -> Vec<u32> {
    let mut r = f.to_vec();
    let dg = g.len() - 1;
    for k in (dg..r.len()).rev() {
        let c = r[k];
        if c == 0 {
            continue;
        }
        for i in 0..=dg {
            r[k - dg + i] = (r[k - dg + i] + (p - c) * g[i]) % p;
        }
    }
    r.truncate(dg);
    r
}
