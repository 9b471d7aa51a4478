//! Finite fields F_{p^n} with table-driven arithmetic, and the pair F_q ⊂ F_{q²}.
//!
//! Elements are encoded as integers whose base-p digits are the coordinates
//! of the element in the power basis of the defining modulus (digit i is the
//! coefficient of x^i).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// An encoded field element.
pub type Fe = u16;

/// Largest supported field size.
pub const MAX_FIELD_SIZE: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("field of order {p}^{n} exceeds 2^16")]
    TooLarge { p: u32, n: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different fields")]
    Mismatch,
    #[error("operation requires odd characteristic")]
    NeedsOddChar,
    #[error("operation requires characteristic 2")]
    NeedsChar2,
    #[error("modulus is not irreducible of degree {0}")]
    Reducible(u32),
    #[error("bad field descriptor: {0}")]
    BadDescriptor(String),
}

/// Defining data of F_{q^m}, q = p^r, as a degree r·m extension of F_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct FieldDesc {
    pub p: u32,
    pub r: u32,
    pub m: u32,
    /// Monic modulus over F_p, coefficients low to high (length r·m + 1).
    pub modulus: Vec<u32>,
}

impl FieldDesc {
    pub fn degree(&self) -> u32 {
        self.r * self.m
    }

    pub fn size(&self) -> u32 {
        self.p.pow(self.degree())
    }
}

impl fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.p, self.r, self.m)?;
        for c in &self.modulus {
            write!(f, ",{c}")?;
        }
        Ok(())
    }
}

impl FromStr for FieldDesc {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, FieldError> {
        let bad = || FieldError::BadDescriptor(s.to_string());
        let nums: Vec<u32> = s
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        if nums.len() < 4 {
            return Err(bad());
        }
        let desc = FieldDesc { p: nums[0], r: nums[1], m: nums[2], modulus: nums[3..].to_vec() };
        GfField::from_desc(&desc)?;
        Ok(desc)
    }
}

pub fn is_prime(n: u32) -> bool {
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

/// Splits q = p^r, or returns `None` when q is not a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while q % p != 0 {
        p += 1;
    }
    let (mut t, mut r) = (q, 0);
    while t % p == 0 {
        t /= p;
        r += 1;
    }
    (t == 1).then_some((p, r))
}

// Dense polynomials over F_p, used only to find and test moduli.
mod fp {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut a = a.to_vec();
        trim(&mut a);
        let dm = m.len() - 1;
        let inv_lead = inv(m[dm], p);
        while a.len() > dm {
            let top = a.len() - 1;
            let c = a[top] * inv_lead % p;
            for (i, &mi) in m.iter().enumerate() {
                let k = top - dm + i;
                a[k] = (a[k] + p - c * mi % p) % p;
            }
            trim(&mut a);
        }
        a
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u32; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        rem(&out, m, p)
    }

    pub fn inv(x: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let (mut b, mut e) = (x as u64 % p as u64, p as u64 - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let (mut a, mut b) = (a.to_vec(), b.to_vec());
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    fn sub_x(a: &[u32], p: u32) -> Vec<u32> {
        let mut a = a.to_vec();
        if a.len() < 2 {
            a.resize(2, 0);
        }
        a[1] = (a[1] + p - 1) % p;
        trim(&mut a);
        a
    }

    /// x^(p^k) mod m.
    fn frob_x(m: &[u32], p: u32, k: u32) -> Vec<u32> {
        let mut h = rem(&[0, 1], m, p);
        for _ in 0..k {
            let mut acc = vec![1u32];
            let mut base = h.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(&acc, &base, m, p);
                }
                base = mulmod(&base, &base, m, p);
                e >>= 1;
            }
            h = acc;
        }
        h
    }

    /// Rabin's irreducibility test for monic `m` of degree n over F_p.
    pub fn is_irreducible(m: &[u32], p: u32) -> bool {
        let n = (m.len() - 1) as u32;
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        if !sub_x(&frob_x(m, p, n), p).is_empty() {
            return false;
        }
        let mut primes = vec![];
        let mut t = n;
        let mut d = 2;
        while t > 1 {
            if t % d == 0 {
                primes.push(d);
                while t % d == 0 {
                    t /= d;
                }
            }
            d += 1;
        }
        primes.into_iter().all(|d| {
            let g = gcd(&sub_x(&frob_x(m, p, n / d), p), m, p);
            g.len() == 1
        })
    }
}

/// The lexicographically least monic irreducible polynomial of degree n over
/// F_p, ordering candidates by the integer Σ c_i p^i of their lower
/// coefficients (so c_{n-1} is compared first).
pub fn least_irreducible(p: u32, n: u32) -> Vec<u32> {
    let count = p.pow(n);
    for idx in 0..count {
        let mut m: Vec<u32> = (0..n).map(|i| idx / p.pow(i) % p).collect();
        m.push(1);
        if fp::is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Table-driven arithmetic in F_{p^n}.
pub struct GfField {
    desc: FieldDesc,
    p: u32,
    n: u32,
    size: u32,
    exp: Vec<Fe>,
    log: Vec<u32>,
    add_tab: Option<Vec<Fe>>,
    neg_tab: Vec<Fe>,
    as_root: Vec<Fe>,
}

impl fmt::Debug for GfField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}) [{}]", self.size, self.desc)
    }
}

impl PartialEq for GfField {
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc
    }
}

impl GfField {
    /// F_{q^m} with the default (least irreducible) modulus.
    pub fn new(q: u32, m: u32) -> Result<GfField, FieldError> {
        let (p, r) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        if (q as u64).pow(m) > MAX_FIELD_SIZE as u64 {
            return Err(FieldError::TooLarge { p, n: r * m });
        }
        let modulus = least_irreducible(p, r * m);
        GfField::from_desc(&FieldDesc { p, r, m, modulus })
    }

    pub fn from_desc(desc: &FieldDesc) -> Result<GfField, FieldError> {
        let p = desc.p;
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if desc.r == 0 || !(1..=2).contains(&desc.m) {
            return Err(FieldError::BadDescriptor(desc.to_string()));
        }
        let n = desc.degree();
        if (p as u64).pow(n) > MAX_FIELD_SIZE as u64 {
            return Err(FieldError::TooLarge { p, n });
        }
        if desc.modulus.len() != n as usize + 1
            || desc.modulus[n as usize] != 1
            || desc.modulus.iter().any(|&c| c >= p)
            || !fp::is_irreducible(&desc.modulus, p)
        {
            return Err(FieldError::Reducible(n));
        }
        let size = p.pow(n);
        let coords = |x: u32| -> Vec<u32> {
            let mut v: Vec<u32> = (0..n).map(|i| x / p.pow(i) % p).collect();
            fp::trim(&mut v);
            v
        };
        let encode = |v: &[u32]| -> u32 { v.iter().enumerate().map(|(i, &c)| c * p.pow(i as u32)).sum() };
        let mul_slow = |a: u32, b: u32| encode(&fp::mulmod(&coords(a), &coords(b), &desc.modulus, p));

        // Smallest primitive element.
        let order = size - 1;
        let mut exp = vec![0 as Fe; 2 * order as usize];
        let mut log = vec![0u32; size as usize];
        let mut found = false;
        for g in 1..size {
            let mut x = 1u32;
            let mut ok = true;
            for k in 0..order {
                exp[k as usize] = x as Fe;
                if k > 0 && x == 1 {
                    ok = false;
                    break;
                }
                x = mul_slow(x, g);
            }
            if ok && x == 1 {
                found = true;
                break;
            }
        }
        assert!(found, "multiplicative group is cyclic");
        for k in 0..order as usize {
            exp[k + order as usize] = exp[k];
            log[exp[k] as usize] = k as u32;
        }

        let add_digits = |a: u32, b: u32| -> u32 {
            let (mut a, mut b, mut pw, mut out) = (a, b, 1u32, 0u32);
            while a > 0 || b > 0 {
                out += (a % p + b % p) % p * pw;
                a /= p;
                b /= p;
                pw *= p;
            }
            out
        };
        let neg_digits = |a: u32| -> u32 {
            let (mut a, mut pw, mut out) = (a, 1u32, 0u32);
            while a > 0 {
                out += (p - a % p) % p * pw;
                a /= p;
                pw *= p;
            }
            out
        };
        let add_tab = if p != 2 && size <= 1024 {
            let mut t = vec![0 as Fe; (size * size) as usize];
            for a in 0..size {
                for b in 0..size {
                    t[(a * size + b) as usize] = add_digits(a, b) as Fe;
                }
            }
            Some(t)
        } else {
            None
        };
        let neg_tab = (0..size).map(|a| neg_digits(a) as Fe).collect();

        let mut f = GfField {
            desc: desc.clone(),
            p,
            n,
            size,
            exp,
            log,
            add_tab,
            neg_tab,
            as_root: vec![],
        };
        if p == 2 {
            let mut roots = vec![Fe::MAX; size as usize];
            for y in 0..size {
                let c = f.add(f.mul(y as Fe, y as Fe), y as Fe);
                if roots[c as usize] == Fe::MAX {
                    roots[c as usize] = y as Fe;
                }
            }
            f.as_root = roots;
        }
        Ok(f)
    }

    pub fn desc(&self) -> &FieldDesc {
        &self.desc
    }
    pub fn char(&self) -> u32 {
        self.p
    }
    /// Degree over F_p.
    pub fn degree(&self) -> u32 {
        self.n
    }
    pub fn size(&self) -> u32 {
        self.size
    }
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.size).map(|x| x as Fe)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.p == 2 {
            a ^ b
        } else if let Some(t) = &self.add_tab {
            t[a as usize * self.size as usize + b as usize]
        } else {
            let p = self.p;
            let (mut a, mut b, mut pw, mut out) = (a as u32, b as u32, 1u32, 0u32);
            while a > 0 || b > 0 {
                out += (a % p + b % p) % p * pw;
                a /= p;
                b /= p;
                pw *= p;
            }
            out as Fe
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        self.neg_tab[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    /// Panics on zero; see [`GfField::try_inv`].
    #[inline]
    pub fn inv(&self, a: Fe) -> Fe {
        assert!(a != 0, "inverse of zero");
        let o = self.size - 1;
        self.exp[((o - self.log[a as usize]) % o) as usize]
    }

    pub fn try_inv(&self, a: Fe) -> Result<Fe, FieldError> {
        if a == 0 {
            Err(FieldError::DivisionByZero)
        } else {
            Ok(self.inv(a))
        }
    }

    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let o = (self.size - 1) as u64;
        self.exp[(self.log[a as usize] as u64 * (e % o) % o) as usize]
    }

    #[inline]
    pub fn log(&self, a: Fe) -> u32 {
        self.log[a as usize]
    }

    #[inline]
    pub fn exp(&self, k: u32) -> Fe {
        self.exp[(k % (self.size - 1)) as usize]
    }

    /// x^(p^k).
    pub fn frob(&self, a: Fe, k: u32) -> Fe {
        self.pow(a, (self.p as u64).pow(k))
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, k: i64) -> Fe {
        k.rem_euclid(self.p as i64) as Fe
    }

    pub fn coords(&self, a: Fe) -> Vec<u32> {
        (0..self.n).map(|i| a as u32 / self.p.pow(i) % self.p).collect()
    }

    pub fn from_coords(&self, v: &[u32]) -> Fe {
        v.iter().enumerate().map(|(i, &c)| (c % self.p) * self.p.pow(i as u32)).sum::<u32>() as Fe
    }

    /// Absolute trace to F_p, as an integer in [0, p).
    pub fn trace(&self, a: Fe) -> u32 {
        let mut acc = 0;
        let mut x = a;
        for _ in 0..self.n {
            acc = self.add(acc, x);
            x = self.pow(x, self.p as u64);
        }
        acc as u32
    }

    /// Squareness test via Euler's criterion (odd characteristic).
    pub fn is_square(&self, a: Fe) -> Result<bool, FieldError> {
        if self.p == 2 {
            return Err(FieldError::NeedsOddChar);
        }
        Ok(a == 0 || self.pow(a, ((self.size - 1) / 2) as u64) == 1)
    }

    /// A square root, choosing the root with the smaller encoding.
    pub fn sqrt(&self, a: Fe) -> Option<Fe> {
        if a == 0 {
            return Some(0);
        }
        if self.p == 2 {
            return Some(self.pow(a, (self.size / 2) as u64));
        }
        let l = self.log[a as usize];
        if l % 2 == 1 {
            return None;
        }
        let y = self.exp(l / 2);
        Some(y.min(self.neg(y)))
    }

    /// Roots (y, y + 1) of y² + y = c, the smaller-encoded root first; `None`
    /// when the absolute trace of c is nonzero.
    pub fn artin_schreier(&self, c: Fe) -> Result<Option<(Fe, Fe)>, FieldError> {
        if self.p != 2 {
            return Err(FieldError::NeedsChar2);
        }
        let y = self.as_root[c as usize];
        Ok((y != Fe::MAX).then_some((y, y ^ 1)))
    }
}

/// A field element bundled with its field, for checked arithmetic.
#[derive(Clone)]
pub struct FFElem {
    pub field: Arc<GfField>,
    pub rep: Fe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfOp {
    Add,
    Mul,
    Div,
}

impl FFElem {
    pub fn new(field: &Arc<GfField>, rep: Fe) -> FFElem {
        FFElem { field: field.clone(), rep }
    }

    pub fn coords(&self) -> Vec<u32> {
        self.field.coords(self.rep)
    }

    pub fn arith(&self, other: &FFElem, op: FfOp) -> Result<FFElem, FieldError> {
        if self.field.desc != other.field.desc {
            return Err(FieldError::Mismatch);
        }
        let f = &self.field;
        let rep = match op {
            FfOp::Add => f.add(self.rep, other.rep),
            FfOp::Mul => f.mul(self.rep, other.rep),
            FfOp::Div => f.mul(self.rep, f.try_inv(other.rep)?),
        };
        Ok(FFElem::new(&self.field, rep))
    }
}

impl fmt::Debug for FFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

/// F_q together with F_{q²} and the embedding between them.  Polynomials over
/// A = F_q[T] use `fq`; all series arithmetic happens over `fq2`.
pub struct Fields {
    pub q: u32,
    pub p: u32,
    pub r: u32,
    pub fq: Arc<GfField>,
    pub fq2: Arc<GfField>,
    emb: Vec<Fe>,
    restrict: Vec<Fe>,
    frob_q: Vec<Fe>,
}

impl fmt::Debug for Fields {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fields(q={}; {}; {})", self.q, self.fq.desc, self.fq2.desc)
    }
}

impl Fields {
    pub fn new(q: u32) -> Result<Arc<Fields>, FieldError> {
        let fq = GfField::new(q, 1)?;
        Self::with_base(fq)
    }

    /// Uses a caller-chosen modulus for F_q.
    pub fn with_modulus(q: u32, modulus: Vec<u32>) -> Result<Arc<Fields>, FieldError> {
        let (p, r) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        let fq = GfField::from_desc(&FieldDesc { p, r, m: 1, modulus })?;
        Self::with_base(fq)
    }

    fn with_base(fq: GfField) -> Result<Arc<Fields>, FieldError> {
        let (p, r) = (fq.desc.p, fq.desc.r);
        let q = p.pow(r);
        let fq2 = GfField::new(q, 2)?;
        // Image of the generator of F_q: least-encoded root of its modulus.
        let modulus = &fq.desc.modulus;
        let theta = fq2
            .elements()
            .find(|&t| {
                let mut acc: Fe = 0;
                for &c in modulus.iter().rev() {
                    acc = fq2.add(fq2.mul(acc, t), c as Fe);
                }
                acc == 0
            })
            .expect("F_q embeds in F_{q^2}");
        let emb: Vec<Fe> = fq
            .elements()
            .map(|x| {
                let mut acc: Fe = 0;
                for &c in fq.coords(x).iter().rev() {
                    acc = fq2.add(fq2.mul(acc, theta), c as Fe);
                }
                acc
            })
            .collect();
        let mut restrict = vec![Fe::MAX; fq2.size as usize];
        for (x, &y) in emb.iter().enumerate() {
            restrict[y as usize] = x as Fe;
        }
        let frob_q = fq2.elements().map(|x| fq2.pow(x, q as u64)).collect();
        Ok(Arc::new(Fields { q, p, r, fq: Arc::new(fq), fq2: Arc::new(fq2), emb, restrict, frob_q }))
    }

    #[inline]
    pub fn emb(&self, x: Fe) -> Fe {
        self.emb[x as usize]
    }

    /// Preimage in F_q of an element of F_{q²}, if it lies in the subfield.
    #[inline]
    pub fn restrict(&self, y: Fe) -> Option<Fe> {
        let x = self.restrict[y as usize];
        (x != Fe::MAX).then_some(x)
    }

    /// y ↦ y^q on F_{q²}.
    #[inline]
    pub fn frob_q(&self, y: Fe) -> Fe {
        self.frob_q[y as usize]
    }

    pub fn frob_table(&self) -> &[Fe] {
        &self.frob_q
    }

    pub fn odd(&self) -> bool {
        self.p != 2
    }

    /// Least-encoded non-square of F_q (odd q).
    pub fn nonsquare(&self) -> Option<Fe> {
        self.fq.elements().find(|&x| x != 0 && !self.fq.is_square(x).unwrap_or(true))
    }

    /// Least-encoded c ∈ F_q with X² + X + c irreducible (q even).
    pub fn as_nonsplit(&self) -> Option<Fe> {
        if self.p != 2 {
            return None;
        }
        self.fq.elements().find(|&c| self.fq.artin_schreier(c).ok().flatten().is_none())
    }

    /// Canonical square root in F_{q²} of x ∈ F_q (odd q).
    pub fn sqrt_fq2(&self, x: Fe) -> Result<Fe, FieldError> {
        if self.p == 2 {
            return Err(FieldError::NeedsOddChar);
        }
        Ok(self.fq2.sqrt(self.emb(x)).expect("every element of F_q is a square in F_q^2"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_square(f: &GfField, x: Fe) -> bool {
        f.elements().any(|y| f.mul(y, y) == x)
    }

    #[test]
    fn small_products() {
        let f3 = GfField::new(3, 1).unwrap();
        assert_eq!(f3.mul(2, 2), 1);
        // F_4 = F_2[w]/(w^2 + w + 1): w is encoded as 2, w + 1 as 3.
        let f4 = GfField::new(2, 2).unwrap();
        assert_eq!(f4.desc().modulus, vec![1, 1, 1]);
        assert_eq!(f4.mul(2, 2), 3);
        let f9 = GfField::new(9, 1).unwrap();
        for x in 1..9 {
            assert_eq!(f9.div(x, x), 1);
        }
    }

    #[test]
    fn default_moduli() {
        assert_eq!(GfField::new(3, 2).unwrap().desc().modulus, vec![1, 0, 1]);
        assert_eq!(GfField::new(8, 1).unwrap().desc().modulus, vec![1, 1, 0, 1]);
        assert_eq!(GfField::new(5, 2).unwrap().desc().modulus, vec![2, 0, 1]);
    }

    #[test]
    fn fermat_and_squares_exhaustive() {
        for (q, m) in [(2, 1), (3, 1), (4, 1), (5, 1), (2, 2), (3, 2), (4, 2), (9, 1), (8, 1), (9, 2)] {
            let f = GfField::new(q, m).unwrap();
            let n = f.size() as u64;
            for x in 1..f.size() as Fe {
                assert_eq!(f.pow(x, n - 1), 1);
                assert_eq!(f.mul(x, f.inv(x)), 1);
                if f.char() != 2 {
                    assert_eq!(f.is_square(x).unwrap(), brute_square(&f, x));
                }
                let s = f.sqrt(x);
                assert_eq!(s.is_some(), brute_square(&f, x));
                if let Some(s) = s {
                    assert_eq!(f.mul(s, s), x);
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_f9() {
        let f = GfField::new(9, 1).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.sub(f.add(a, b), b), a);
                for c in f.elements() {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn artin_schreier_exhaustive() {
        let f2 = GfField::new(2, 1).unwrap();
        assert_eq!(f2.artin_schreier(0).unwrap(), Some((0, 1)));
        assert_eq!(f2.artin_schreier(1).unwrap(), None);
        let f4 = GfField::new(2, 2).unwrap();
        assert_eq!(f4.artin_schreier(1).unwrap(), Some((2, 3)));
        for (q, m) in [(2, 1), (4, 1), (2, 2), (8, 1), (4, 2), (16, 1)] {
            let f = GfField::new(q, m).unwrap();
            for c in f.elements() {
                let trace = {
                    let mut t = 0;
                    let mut x = c;
                    for _ in 0..f.degree() {
                        t ^= x;
                        x = f.mul(x, x);
                    }
                    t
                };
                let r = f.artin_schreier(c).unwrap();
                assert_eq!(r.is_some(), trace == 0);
                if let Some((y0, y1)) = r {
                    assert_eq!(y1, f.add(y0, 1));
                    assert_eq!(f.add(f.mul(y0, y0), y0), c);
                    assert_eq!(f.add(f.mul(y1, y1), y1), c);
                }
            }
        }
        assert!(GfField::new(3, 1).unwrap().artin_schreier(1).is_err());
    }

    #[test]
    fn embedding_is_a_ring_map() {
        for q in [2, 3, 4, 5, 8, 9] {
            let fl = Fields::new(q).unwrap();
            for a in fl.fq.elements() {
                assert_eq!(fl.restrict(fl.emb(a)), Some(a));
                assert_eq!(fl.frob_q(fl.emb(a)), fl.emb(a));
                for b in fl.fq.elements() {
                    assert_eq!(fl.emb(fl.fq.mul(a, b)), fl.fq2.mul(fl.emb(a), fl.emb(b)));
                    assert_eq!(fl.emb(fl.fq.add(a, b)), fl.fq2.add(fl.emb(a), fl.emb(b)));
                }
            }
            let sub = fl.fq2.elements().filter(|&y| fl.restrict(y).is_some()).count();
            assert_eq!(sub as u32, q);
        }
    }

    #[test]
    fn sqrt_fq2_roots() {
        let fl = Fields::new(3).unwrap();
        assert_eq!(fl.sqrt_fq2(1).unwrap(), 1);
        let e = fl.sqrt_fq2(2).unwrap();
        assert_eq!(fl.fq2.mul(e, e), fl.emb(2));
        assert!(fl.restrict(e).is_none());
        let all: Vec<Fe> = fl.fq2.elements().filter(|&y| fl.fq2.mul(y, y) == fl.emb(2)).collect();
        assert_eq!(all.len(), 2);
        assert_eq!(e, all[0]);
        for q in [5, 9] {
            let fl = Fields::new(q).unwrap();
            for x in 1..q as Fe {
                let e = fl.sqrt_fq2(x).unwrap();
                assert_eq!(fl.fq2.mul(e, e), fl.emb(x));
            }
        }
        assert!(Fields::new(4).unwrap().sqrt_fq2(1).is_err());
    }

    #[test]
    fn f3_squares_in_f9() {
        let fl = Fields::new(3).unwrap();
        for x in 1..3 {
            assert!(fl.fq2.is_square(fl.emb(x)).unwrap());
        }
        assert!(!fl.fq.is_square(2).unwrap());
        assert!(fl.fq.is_square(1).unwrap());
        assert!(GfField::new(2, 1).unwrap().is_square(1).is_err());
    }

    #[test]
    fn checked_elements() {
        let f3 = Arc::new(GfField::new(3, 1).unwrap());
        let f9 = Arc::new(GfField::new(9, 1).unwrap());
        let a = FFElem::new(&f3, 2);
        let b = FFElem::new(&f9, 2);
        assert_eq!(a.arith(&b, FfOp::Add).unwrap_err(), FieldError::Mismatch);
        assert_eq!(a.arith(&FFElem::new(&f3, 0), FfOp::Div).unwrap_err(), FieldError::DivisionByZero);
        assert_eq!(a.arith(&a, FfOp::Mul).unwrap().rep, 1);
        assert_eq!(a.coords().len(), 1);
        assert_eq!(b.coords().len(), 2);
    }

    #[test]
    fn descriptor_round_trip() {
        let f = GfField::new(3, 2).unwrap();
        let s = f.desc().to_string();
        assert_eq!(s, "3,1,2,1,0,1");
        let d: FieldDesc = s.parse().unwrap();
        assert_eq!(&d, f.desc());
        assert!("3,1,2,2,0,1".parse::<FieldDesc>().is_err());
        assert!("4,1,1,0,1".parse::<FieldDesc>().is_err());
        assert!(GfField::new(6, 1).is_err());
        assert!(GfField::new(257, 2).is_err());
    }
}
