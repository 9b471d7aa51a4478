//! The polynomial ring A = F_q[T] and its arithmetic functions.
//!
//! A [`Poly`] is a plain coefficient vector; the operations live on a
//! [`PolyRing`] that knows the coefficient field.  The same ring type also
//! serves F_{q²}[T] when handed the larger field.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ffield::{Fe, GfField};

/// Degree of the zero polynomial.
pub const NEG_INF: i64 = i64::MIN / 4;

/// Coefficients low to high with no trailing zeros; the zero polynomial is empty.
#[derive(Clone, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub struct Poly {
    pub c: Vec<Fe>,
}

impl Poly {
    pub fn new(mut c: Vec<Fe>) -> Poly {
        while c.last() == Some(&0) {
            c.pop();
        }
        Poly { c }
    }

    pub fn zero() -> Poly {
        Poly { c: vec![] }
    }

    pub fn one() -> Poly {
        Poly { c: vec![1] }
    }

    pub fn constant(a: Fe) -> Poly {
        Poly::new(vec![a])
    }

    /// The variable T.
    pub fn t() -> Poly {
        Poly { c: vec![0, 1] }
    }

    /// a·T^k.
    pub fn monomial(a: Fe, k: usize) -> Poly {
        let mut c = vec![0; k + 1];
        c[k] = a;
        Poly::new(c)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c == [1]
    }

    pub fn deg(&self) -> i64 {
        if self.c.is_empty() {
            NEG_INF
        } else {
            self.c.len() as i64 - 1
        }
    }

    /// Leading coefficient (sgn); zero for the zero polynomial.
    pub fn lead(&self) -> Fe {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    /// The polynomial whose base-q digits of `idx` are its coefficients.
    pub fn from_index(mut idx: u64, q: u32) -> Poly {
        let mut c = vec![];
        while idx > 0 {
            c.push((idx % q as u64) as Fe);
            idx /= q as u64;
        }
        Poly { c }
    }

    pub fn index(&self, q: u32) -> u64 {
        self.c.iter().rev().fold(0u64, |acc, &x| acc * q as u64 + x as u64)
    }

    /// All polynomials of degree < n, in index order (zero first).
    pub fn all_below(q: u32, n: u32) -> impl Iterator<Item = Poly> {
        (0..(q as u64).pow(n)).map(move |i| Poly::from_index(i, q))
    }

    /// Monic polynomials of degree exactly n, in index order.
    pub fn monics(q: u32, n: u32) -> impl Iterator<Item = Poly> {
        let base = (q as u64).pow(n);
        (0..base).map(move |i| Poly::from_index(base + i, q))
    }

    /// `[c0,c1,...]`.
    pub fn to_list_string(&self) -> String {
        let parts: Vec<String> = self.c.iter().map(|x| x.to_string()).collect();
        format!("[{}]", parts.join(","))
    }

    pub fn from_list_str(s: &str, q: u32) -> Result<Poly> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Invalid(format!("expected [c0,...], got {s:?}")))?;
        if inner.trim().is_empty() {
            return Ok(Poly::zero());
        }
        let mut c = vec![];
        for t in inner.split(',') {
            let x: u32 = t.trim().parse().map_err(|_| Error::Invalid(format!("bad coefficient {t:?}")))?;
            if x >= q {
                return Err(Error::Invalid(format!("coefficient {x} out of range for q = {q}")));
            }
            c.push(x as Fe);
        }
        Ok(Poly::new(c))
    }

    /// Human-readable form in the variable `var`, high degree first.
    pub fn fmt_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms = vec![];
        for (i, &c) in self.c.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            terms.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}*{mono}"),
            });
        }
        terms.join("+")
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_var("T"))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_var("T"))
    }
}

impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.c.len().cmp(&other.c.len()).then_with(|| self.c.iter().rev().cmp(other.c.iter().rev()))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Factorization a = unit · ∏ P_i^{e_i}, factors monic and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub unit: Fe,
    pub factors: Vec<(Poly, u32)>,
}

/// Counting statistics of a nonzero polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithStats {
    /// Number of distinct monic irreducible divisors.
    pub omega: u32,
    /// Number of monic divisors.
    pub d: u64,
    /// Σ_{d | a monic} |d|.
    pub sigma1: u128,
}

/// Arithmetic in F[T] for a finite field F.
#[derive(Clone, Copy)]
pub struct PolyRing<'a> {
    pub f: &'a GfField,
    /// Seed for the randomized equal-degree splitting.
    pub seed: u64,
}

static DEFAULT_SEED: AtomicU64 = AtomicU64::new(0);

/// Sets the splitting seed used by every later [`PolyRing::new`].
pub fn set_default_seed(seed: u64) {
    DEFAULT_SEED.store(seed, AtomicOrdering::Relaxed);
}

pub fn default_seed() -> u64 {
    DEFAULT_SEED.load(AtomicOrdering::Relaxed)
}

impl<'a> PolyRing<'a> {
    pub fn new(f: &'a GfField) -> PolyRing<'a> {
        PolyRing { f, seed: default_seed() }
    }

    pub fn with_seed(f: &'a GfField, seed: u64) -> PolyRing<'a> {
        PolyRing { f, seed }
    }

    pub fn q(&self) -> u32 {
        self.f.size()
    }

    /// Parses `T^2+2*T+1` style input; integer coefficients are field encodings.
    pub fn parse(&self, s: &str) -> Result<Poly> {
        let bad = |m: &str| Error::Invalid(format!("cannot parse polynomial {s:?}: {m}"));
        let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return Err(bad("empty"));
        }
        if src.starts_with('[') {
            return Poly::from_list_str(&src, self.q());
        }
        let mut acc = Poly::zero();
        let mut rest = src.as_str();
        while !rest.is_empty() {
            let mut negative = false;
            if let Some(r) = rest.strip_prefix('+') {
                rest = r;
            } else if let Some(r) = rest.strip_prefix('-') {
                rest = r;
                negative = true;
            }
            let end = rest.find(['+', '-']).unwrap_or(rest.len());
            let (term, tail) = rest.split_at(end);
            rest = tail;
            if term.is_empty() {
                return Err(bad("empty term"));
            }
            let (coef_str, mono) = match term.find(['T', 'x', 'X']) {
                Some(pos) => (term[..pos].trim_end_matches('*'), Some(&term[pos + 1..])),
                None => (term, None),
            };
            let coef: Fe = if coef_str.is_empty() {
                1
            } else {
                let v: u32 = coef_str.parse().map_err(|_| bad("bad coefficient"))?;
                if self.f.degree() == 1 {
                    self.f.from_int(v as i64)
                } else if v < self.q() {
                    v as Fe
                } else {
                    return Err(bad("coefficient out of range"));
                }
            };
            let exp: usize = match mono {
                None => 0,
                Some("") => 1,
                Some(e) => e.strip_prefix('^').and_then(|e| e.parse().ok()).ok_or_else(|| bad("bad exponent"))?,
            };
            let coef = if negative { self.f.neg(coef) } else { coef };
            acc = self.add(&acc, &Poly::monomial(coef, exp));
        }
        Ok(acc)
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let (long, short) = if a.c.len() >= b.c.len() { (a, b) } else { (b, a) };
        let mut c = long.c.clone();
        for (i, &x) in short.c.iter().enumerate() {
            c[i] = self.f.add(c[i], x);
        }
        Poly::new(c)
    }

    pub fn neg(&self, a: &Poly) -> Poly {
        Poly { c: a.c.iter().map(|&x| self.f.neg(x)).collect() }
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &Poly, s: Fe) -> Poly {
        if s == 0 {
            return Poly::zero();
        }
        Poly { c: a.c.iter().map(|&x| self.f.mul(x, s)).collect() }
    }

    /// a · T^k.
    pub fn shift(&self, a: &Poly, k: usize) -> Poly {
        if a.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0; k];
        c.extend_from_slice(&a.c);
        Poly { c }
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0 as Fe; a.c.len() + b.c.len() - 1];
        for (i, &x) in a.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.c.iter().enumerate() {
                c[i + j] = self.f.add(c[i + j], self.f.mul(x, y));
            }
        }
        Poly::new(c)
    }

    pub fn square(&self, a: &Poly) -> Poly {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &Poly, mut e: u64) -> Poly {
        let mut acc = Poly::one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    pub fn divrem(&self, a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if a.deg() < b.deg() {
            return Ok((Poly::zero(), a.clone()));
        }
        let db = b.c.len() - 1;
        let inv = self.f.inv(b.lead());
        let mut r = a.c.clone();
        let mut q = vec![0 as Fe; a.c.len() - db];
        for top in (db..r.len()).rev() {
            let c = self.f.mul(r[top], inv);
            if c == 0 {
                continue;
            }
            q[top - db] = c;
            for (i, &bi) in b.c.iter().enumerate() {
                let k = top - db + i;
                r[k] = self.f.sub(r[k], self.f.mul(c, bi));
            }
        }
        Ok((Poly::new(q), Poly::new(r)))
    }

    pub fn rem(&self, a: &Poly, b: &Poly) -> Poly {
        self.divrem(a, b).expect("nonzero modulus").1
    }

    /// a / b when b divides a exactly.
    pub fn div_exact(&self, a: &Poly, b: &Poly) -> Option<Poly> {
        match self.divrem(a, b) {
            Ok((q, r)) if r.is_zero() => Some(q),
            _ => None,
        }
    }

    pub fn divides(&self, d: &Poly, a: &Poly) -> bool {
        !d.is_zero() && self.rem(a, d).is_zero()
    }

    pub fn monic(&self, a: &Poly) -> Poly {
        if a.is_zero() {
            return Poly::zero();
        }
        self.scale(a, self.f.inv(a.lead()))
    }

    /// Monic gcd (zero when both inputs are zero).
    pub fn gcd(&self, a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        self.monic(&a)
    }

    /// (g, s, t) with s·a + t·b = g monic.
    pub fn xgcd(&self, a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = self.divrem(&r0, &r1).expect("nonzero");
            r0 = std::mem::replace(&mut r1, r);
            let s = self.sub(&s0, &self.mul(&q, &s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = self.sub(&t0, &self.mul(&q, &t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let u = self.f.inv(r0.lead());
        (self.scale(&r0, u), self.scale(&s0, u), self.scale(&t0, u))
    }

    /// Inverse of a modulo m, when it exists.
    pub fn inv_mod(&self, a: &Poly, m: &Poly) -> Option<Poly> {
        let (g, s, _) = self.xgcd(&self.rem(a, m), m);
        g.is_one().then(|| self.rem(&s, m))
    }

    pub fn mulmod(&self, a: &Poly, b: &Poly, m: &Poly) -> Poly {
        self.rem(&self.mul(a, b), m)
    }

    pub fn powmod(&self, a: &Poly, mut e: u64, m: &Poly) -> Poly {
        let mut acc = self.rem(&Poly::one(), m);
        let mut base = self.rem(a, m);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mulmod(&acc, &base, m);
            }
            e >>= 1;
            if e > 0 {
                base = self.mulmod(&base, &base, m);
            }
        }
        acc
    }

    pub fn eval(&self, a: &Poly, x: Fe) -> Fe {
        a.c.iter().rev().fold(0, |acc, &c| self.f.add(self.f.mul(acc, x), c))
    }

    pub fn deriv(&self, a: &Poly) -> Poly {
        let c = a.c.iter().enumerate().skip(1).map(|(i, &x)| self.f.mul(x, self.f.from_int(i as i64))).collect();
        Poly::new(c)
    }

    /// Applies x ↦ x^(p^k) to every coefficient.
    pub fn frob_coeffs(&self, a: &Poly, k: u32) -> Poly {
        Poly::new(a.c.iter().map(|&x| self.f.frob(x, k)).collect())
    }

    /// The p-th root of a polynomial with vanishing derivative.
    fn pth_root(&self, a: &Poly) -> Poly {
        let p = self.f.char() as usize;
        let n = self.f.degree();
        let c = a.c.iter().step_by(p).map(|&x| self.f.frob(x, n - 1)).collect();
        Poly::new(c)
    }

    /// Rabin's test over F.
    pub fn is_irreducible(&self, a: &Poly) -> bool {
        let n = a.deg();
        if n < 1 {
            return false;
        }
        if n == 1 {
            return true;
        }
        let q = self.q() as u64;
        let x = Poly::t();
        let frob_pow = |k: i64| {
            let mut h = self.rem(&x, a);
            for _ in 0..k {
                h = self.powmod(&h, q, a);
            }
            h
        };
        if !self.sub(&frob_pow(n), &self.rem(&x, a)).is_zero() {
            return false;
        }
        prime_divisors(n as u64).into_iter().all(|d| self.gcd(&self.sub(&frob_pow(n / d as i64), &x), a).is_one())
    }

    /// Squarefree decomposition of a monic polynomial: pairwise coprime
    /// squarefree parts with multiplicities.
    pub fn squarefree(&self, a: &Poly) -> Vec<(Poly, u32)> {
        let mut out = vec![];
        if a.deg() < 1 {
            return out;
        }
        let p = self.f.char();
        let da = self.deriv(a);
        if da.is_zero() {
            for (g, e) in self.squarefree(&self.pth_root(a)) {
                out.push((g, e * p));
            }
            return out;
        }
        let mut c = self.gcd(a, &da);
        let mut w = self.div_exact(a, &c).expect("gcd divides");
        let mut i = 1;
        while !w.is_one() {
            let y = self.gcd(&w, &c);
            let z = self.div_exact(&w, &y).expect("gcd divides");
            if !z.is_one() {
                out.push((z, i));
            }
            i += 1;
            w = y;
            c = self.div_exact(&c, &w).expect("gcd divides");
        }
        if !c.is_one() {
            for (g, e) in self.squarefree(&self.pth_root(&c)) {
                out.push((g, e * p));
            }
        }
        out
    }

    /// Distinct-degree factorization of a squarefree monic polynomial.
    fn ddf(&self, a: &Poly) -> Vec<(Poly, u32)> {
        let q = self.q() as u64;
        let x = Poly::t();
        let mut f = a.clone();
        let mut h = self.rem(&x, &f);
        let mut out = vec![];
        let mut d = 1;
        while 2 * d <= f.deg() {
            h = self.powmod(&h, q, &f);
            let g = self.gcd(&self.sub(&h, &x), &f);
            if !g.is_one() {
                f = self.div_exact(&f, &g).expect("gcd divides");
                h = self.rem(&h, &f);
                out.push((g, d as u32));
            }
            d += 1;
        }
        if f.deg() > 0 {
            let deg = f.deg() as u32;
            out.push((f, deg));
        }
        out
    }

    /// Splits a product of distinct monic irreducibles of degree d.
    fn edf(&self, a: &Poly, d: u32, rng: &mut ChaCha8Rng) -> Vec<Poly> {
        let n = a.deg() as u32;
        if n == d {
            return vec![a.clone()];
        }
        let q = self.q() as u64;
        loop {
            let r = Poly::new((0..n).map(|_| rng.gen_range(0..self.q()) as Fe).collect());
            if r.deg() < 1 {
                continue;
            }
            let b = if self.f.char() == 2 {
                // Absolute trace from F_{q^d} to F_2 of r, modulo a.
                let mut acc = Poly::zero();
                let mut x = self.rem(&r, a);
                for _ in 0..self.f.degree() * d {
                    acc = self.add(&acc, &x);
                    x = self.mulmod(&x, &x, a);
                }
                acc
            } else {
                // r^((q^d - 1)/2) = (r^(1 + q + ... + q^(d-1)))^((q-1)/2).
                let mut norm = self.rem(&Poly::one(), a);
                let mut x = self.rem(&r, a);
                for _ in 0..d {
                    norm = self.mulmod(&norm, &x, a);
                    x = self.powmod(&x, q, a);
                }
                self.sub(&self.powmod(&norm, (q - 1) / 2, a), &Poly::one())
            };
            let g = self.gcd(&b, a);
            if g.deg() > 0 && g.deg() < a.deg() {
                let h = self.div_exact(a, &g).expect("gcd divides");
                let mut out = self.edf(&g, d, rng);
                out.extend(self.edf(&h, d, rng));
                return out;
            }
        }
    }

    pub fn factor(&self, a: &Poly) -> Result<Factorization> {
        if a.is_zero() {
            return Err(Error::Invalid("cannot factor the zero polynomial".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let unit = a.lead();
        let m = self.monic(a);
        let mut factors = vec![];
        for (s, e) in self.squarefree(&m) {
            for (g, d) in self.ddf(&s) {
                for p in self.edf(&g, d, &mut rng) {
                    factors.push((p, e));
                }
            }
        }
        factors.sort();
        let mut merged: Vec<(Poly, u32)> = vec![];
        for (p, e) in factors {
            match merged.last_mut() {
                Some((last, le)) if *last == p => *le += e,
                _ => merged.push((p, e)),
            }
        }
        Ok(Factorization { unit, factors: merged })
    }

    pub fn expand(&self, fac: &Factorization) -> Poly {
        let mut acc = Poly::constant(fac.unit);
        for (p, e) in &fac.factors {
            acc = self.mul(&acc, &self.pow(p, *e as u64));
        }
        acc
    }

    /// Monic d of maximal degree with d² | a and d² | b.
    pub fn gcd2(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::Invalid("gcd2 of zero".into()));
        }
        let g = self.gcd(a, b);
        let mut acc = Poly::one();
        for (p, _) in self.factor(&g)?.factors {
            let k = self.valuation(&p, a).min(self.valuation(&p, b)) / 2;
            acc = self.mul(&acc, &self.pow(&p, k as u64));
        }
        Ok(acc)
    }

    /// Exponent of the irreducible p in a ≠ 0.
    pub fn valuation(&self, p: &Poly, a: &Poly) -> u32 {
        let mut k = 0;
        let mut x = a.clone();
        while let Some(y) = self.div_exact(&x, p) {
            x = y;
            k += 1;
        }
        k
    }

    pub fn arith_stats(&self, a: &Poly) -> Result<ArithStats> {
        let fac = self.factor(a)?;
        let q = self.q() as u128;
        let mut st = ArithStats { omega: fac.factors.len() as u32, d: 1, sigma1: 1 };
        for (p, e) in &fac.factors {
            st.d *= *e as u64 + 1;
            let np = q.pow(p.deg() as u32);
            st.sigma1 *= (0..=*e).map(|k| np.pow(k)).sum::<u128>();
        }
        Ok(st)
    }

    /// All monic divisors of a ≠ 0, sorted.
    pub fn divisors(&self, a: &Poly) -> Result<Vec<Poly>> {
        let fac = self.factor(a)?;
        let mut ds = vec![Poly::one()];
        for (p, e) in &fac.factors {
            let mut next = vec![];
            for d in &ds {
                let mut x = d.clone();
                for _ in 0..=*e {
                    next.push(x.clone());
                    x = self.mul(&x, p);
                }
            }
            ds = next;
        }
        ds.sort();
        Ok(ds)
    }

    /// ∏_{P | f} (1 − 1/|P|)^{-1}.
    pub fn mertens_product(&self, f: &Poly) -> Result<BigRational> {
        if f.deg() < 1 {
            return Err(Error::Invalid("mertens_product needs a nonconstant polynomial".into()));
        }
        let q = BigInt::from(self.q());
        let mut acc = BigRational::one();
        for (p, _) in self.factor(f)?.factors {
            let np = num_traits::pow(q.clone(), p.deg() as usize);
            acc *= BigRational::new(np.clone(), np - 1);
        }
        Ok(acc)
    }
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = vec![];
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn mobius(n: u64) -> i128 {
    let mut m = n;
    let mut k = 0;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            m /= d;
            if m % d == 0 {
                return 0;
            }
            k += 1;
        }
        d += 1;
    }
    if m > 1 {
        k += 1;
    }
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Number of monic irreducible polynomials of degree n over F_q.
pub fn count_monic_irreducibles(q: u32, n: u32) -> Result<u128> {
    if n == 0 {
        return Err(Error::Invalid("degree must be positive".into()));
    }
    let mut s: i128 = 0;
    for d in 1..=n as u64 {
        if n as u64 % d == 0 {
            s += mobius(n as u64 / d) * (q as i128).pow(d as u32);
        }
    }
    Ok((s / n as i128) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(q: u32) -> GfField {
        GfField::new(q, 1).unwrap()
    }

    fn brute_irreducible(r: &PolyRing, a: &Poly) -> bool {
        let n = a.deg() as u32;
        (1..=n / 2).all(|d| Poly::monics(r.q(), d).all(|m| !r.divides(&m, a)))
    }

    #[test]
    fn basic_examples() {
        let f3 = f(3);
        let r = PolyRing::new(&f3);
        let t = Poly::t();
        let t2mt = r.parse("T^2-T").unwrap();
        assert_eq!(r.gcd(&t2mt, &t), t);
        let a = r.parse("T-T^2").unwrap();
        assert_eq!(r.mul(&a, &a), r.parse("T^4+T^3+T^2").unwrap());
        let fac = r.factor(&a).unwrap();
        assert_eq!(fac.unit, 2);
        assert_eq!(fac.factors, vec![(t.clone(), 1), (r.parse("T+2").unwrap(), 1)]);

        let f2 = f(2);
        let r2 = PolyRing::new(&f2);
        let (qq, rr) = r2.divrem(&r2.parse("T^2+T").unwrap(), &r2.parse("T+1").unwrap()).unwrap();
        assert_eq!((qq, rr), (t.clone(), Poly::zero()));
        assert!(r2.is_irreducible(&r2.parse("T^2+T+1").unwrap()));
        assert_eq!(r2.factor(&r2.parse("T^4").unwrap()).unwrap().factors, vec![(t, 4)]);
        assert!(r2.divrem(&Poly::one(), &Poly::zero()).is_err());
        assert!(r2.factor(&Poly::zero()).is_err());
    }

    #[test]
    fn parse_and_print() {
        let f3 = f(3);
        let r = PolyRing::new(&f3);
        let a = r.parse("T^2+2*T+1").unwrap();
        assert_eq!(a.c, vec![1, 2, 1]);
        assert_eq!(a.to_list_string(), "[1,2,1]");
        assert_eq!(r.parse(&a.to_string()).unwrap(), a);
        assert_eq!(r.parse("[1,2,1]").unwrap(), a);
        assert_eq!(r.parse("-T").unwrap().c, vec![0, 2]);
        assert!(r.parse("T^").is_err());
        assert!(r.parse("[3]").is_err());
        let f4 = f(4);
        let r4 = PolyRing::new(&f4);
        assert_eq!(r4.parse("3*T+2").unwrap().c, vec![2, 3]);
    }

    #[test]
    fn gcd2_examples() {
        let f2 = f(2);
        let r = PolyRing::new(&f2);
        let t = Poly::t();
        assert_eq!(r.gcd2(&r.pow(&t, 4), &r.pow(&t, 6)).unwrap(), r.pow(&t, 2));
        let b = r.mul(&t, &r.pow(&r.parse("T+1").unwrap(), 2));
        assert_eq!(r.gcd2(&r.pow(&t, 3), &b).unwrap(), Poly::one());
        // Oracle: the largest-degree monic d with d² dividing both, by search.
        for a in Poly::monics(2, 6) {
            let g = r.gcd2(&a, &a).unwrap();
            let best = (0..=3)
                .flat_map(|d| Poly::monics(2, d).collect::<Vec<_>>())
                .filter(|d| r.divides(&r.square(d), &a))
                .max_by_key(|d| d.deg())
                .unwrap();
            assert_eq!(g.deg(), best.deg());
            assert!(r.divides(&r.square(&g), &a));
        }
    }

    #[test]
    fn stats_examples() {
        let f2 = f(2);
        let r = PolyRing::new(&f2);
        let a = r.parse("T^3+T^2").unwrap();
        let st = r.arith_stats(&a).unwrap();
        assert_eq!(st, ArithStats { omega: 2, d: 6, sigma1: 21 });
        let divs = r.divisors(&a).unwrap();
        assert_eq!(divs.len(), 6);
        assert_eq!(divs.iter().map(|d| 1u128 << d.deg()).sum::<u128>(), 21);
        assert_eq!(r.arith_stats(&Poly::one()).unwrap(), ArithStats { omega: 0, d: 1, sigma1: 1 });
        let st = r.arith_stats(&r.parse("T^2").unwrap()).unwrap();
        assert_eq!(st.sigma1, 7);
    }

    #[test]
    fn irreducible_counts() {
        assert_eq!(count_monic_irreducibles(2, 1).unwrap(), 2);
        assert_eq!(count_monic_irreducibles(3, 1).unwrap(), 3);
        assert_eq!(count_monic_irreducibles(2, 2).unwrap(), 1);
        assert_eq!(count_monic_irreducibles(3, 2).unwrap(), 3);
        assert!(count_monic_irreducibles(2, 0).is_err());
        for q in [2, 3, 4] {
            let fq = f(q);
            let r = PolyRing::new(&fq);
            for n in 1..=if q == 4 { 3 } else { 5 } {
                let brute = Poly::monics(q, n).filter(|a| brute_irreducible(&r, a)).count() as u128;
                assert_eq!(count_monic_irreducibles(q, n).unwrap(), brute);
                let rabin = Poly::monics(q, n).filter(|a| r.is_irreducible(a)).count() as u128;
                assert_eq!(rabin, brute);
            }
        }
    }

    #[test]
    fn mertens_examples() {
        let f2 = f(2);
        let r = PolyRing::new(&f2);
        let t = Poly::t();
        assert_eq!(r.mertens_product(&t).unwrap(), BigRational::from_integer(2.into()));
        let tt1 = r.parse("T^2+T").unwrap();
        assert_eq!(r.mertens_product(&tt1).unwrap(), BigRational::from_integer(4.into()));
        assert_eq!(r.mertens_product(&r.pow(&t, 5)).unwrap(), r.mertens_product(&t).unwrap());
        assert!(r.mertens_product(&Poly::one()).is_err());
    }

    #[test]
    fn factor_exhaustive_small() {
        for (q, maxdeg) in [(2u32, 8u32), (3, 6), (4, 4)] {
            let fq = f(q);
            let r = PolyRing::new(&fq);
            for n in 1..=maxdeg {
                for a in Poly::monics(q, n) {
                    let fac = r.factor(&a).unwrap();
                    assert_eq!(r.expand(&fac), a);
                    for (p, e) in &fac.factors {
                        assert!(*e >= 1 && p.is_monic() && r.is_irreducible(p));
                    }
                }
            }
        }
    }

    #[test]
    fn factor_char3_degree8_with_unit() {
        let f3 = f(3);
        let r = PolyRing::new(&f3);
        for idx in (0..3u64.pow(8)).step_by(7) {
            let a = r.scale(&Poly::from_index(3u64.pow(8) + idx, 3), 2);
            let fac = r.factor(&a).unwrap();
            assert_eq!(fac.unit, 2);
            assert_eq!(r.expand(&fac), a);
        }
    }

    #[test]
    fn factor_over_f9_and_f16() {
        for q in [9, 16] {
            let fq = f(q);
            let r = PolyRing::with_seed(&fq, 7);
            for idx in (0..(q as u64).pow(4)).step_by(37) {
                let a = Poly::from_index((q as u64).pow(4) + idx, q);
                let fac = r.factor(&a).unwrap();
                assert_eq!(r.expand(&fac), a);
                assert!(fac.factors.iter().all(|(p, _)| r.is_irreducible(p)));
            }
        }
    }

    proptest! {
        #[test]
        fn ring_axioms(a in 0u64..6561, b in 0u64..6561, c in 1u64..729) {
            let f3 = f(3);
            let r = PolyRing::new(&f3);
            let (a, b, c) = (Poly::from_index(a, 3), Poly::from_index(b, 3), Poly::from_index(c, 3));
            prop_assert_eq!(r.mul(&a, &b), r.mul(&b, &a));
            prop_assert_eq!(r.mul(&a, &r.add(&b, &c)), r.add(&r.mul(&a, &b), &r.mul(&a, &c)));
            let (qq, rr) = r.divrem(&a, &c).unwrap();
            prop_assert!(rr.deg() < c.deg());
            prop_assert_eq!(r.add(&r.mul(&qq, &c), &rr), a.clone());
            let (g, s, t) = r.xgcd(&a, &c);
            prop_assert_eq!(r.add(&r.mul(&s, &a), &r.mul(&t, &c)), g.clone());
            prop_assert!(r.divides(&g, &a) || a.is_zero());
            prop_assert!(r.divides(&g, &c));
        }

        #[test]
        fn ordering_matches_index(a in 0u64..100000, b in 0u64..100000) {
            let (pa, pb) = (Poly::from_index(a, 5), Poly::from_index(b, 5));
            prop_assert_eq!(pa.cmp(&pb), a.cmp(&b));
            prop_assert_eq!(pa.index(5), a);
        }
    }
}
