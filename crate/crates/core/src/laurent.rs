//! Truncated Laurent series in t = 1/T over F_{q²}, with absolute precision.
//!
//! A [`Series`] stores the coefficients of T^{-v}, T^{-v-1}, ...; every
//! coefficient of T^{-j} with j < prec past the stored ones is zero, and
//! everything from T^{-prec} on is unknown.  The first stored coefficient is
//! nonzero, and a series that vanishes to its precision has no coefficients
//! and `v == prec`.  Exact values use the precision [`EXACT`].
//!
//! Products are computed by splitting each F_{q²} coefficient into its F_p
//! coordinates and running plain integer convolutions, which the compiler
//! vectorizes; the F_p reduction happens once per output coefficient.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ffield::{Fe, Fields, GfField};
use crate::poly::Poly;

/// Precision used for exactly known values.
pub const EXACT: i64 = 1 << 50;

/// Longest expansion an inverse or root will produce.
const MAX_LEN: i64 = 1 << 24;

#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    /// Valuation: the exponent of t = 1/T of the first stored coefficient.
    pub v: i64,
    pub c: Vec<Fe>,
    /// Absolute precision: coefficients of t^j for j ≥ prec are unknown.
    pub prec: i64,
}

impl Series {
    pub fn zero(prec: i64) -> Series {
        Series { v: prec, c: vec![], prec }
    }

    /// Builds a series from coefficients of t^v, t^{v+1}, ..., normalizing.
    pub fn from_coeffs(v: i64, c: Vec<Fe>, prec: i64) -> Series {
        let mut c = c;
        c.truncate((prec - v).max(0) as usize);
        while c.last() == Some(&0) {
            c.pop();
        }
        let lead = c.iter().position(|&x| x != 0);
        match lead {
            None => Series::zero(prec),
            Some(k) => {
                c.drain(..k);
                Series { v: v + k as i64, c, prec }
            }
        }
    }

    /// Whether the value is known exactly.
    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT / 2
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Number of known coefficients from the leading one on.
    pub fn rel_prec(&self) -> i64 {
        self.prec - self.v
    }

    /// deg = log_q |x| = −v.
    pub fn deg(&self) -> i64 {
        -self.v
    }

    /// Leading coefficient (sgn); zero when the series vanishes to precision.
    pub fn lead(&self) -> Fe {
        self.c.first().copied().unwrap_or(0)
    }

    /// Coefficient of t^j (zero outside the stored window; caller checks precision).
    pub fn coeff(&self, j: i64) -> Fe {
        if j < self.v || j >= self.prec {
            0
        } else {
            self.c.get((j - self.v) as usize).copied().unwrap_or(0)
        }
    }

    /// Coefficient of T^k.
    pub fn coeff_t(&self, k: i64) -> Fe {
        self.coeff(-k)
    }

    /// Drops digits so that at most `prec` is claimed.
    pub fn truncated(&self, prec: i64) -> Series {
        if prec >= self.prec {
            return self.clone();
        }
        Series::from_coeffs(self.v, self.c.clone(), prec)
    }

    /// Keeps at most `r` digits past the leading one.
    pub fn truncated_rel(&self, r: i64) -> Series {
        self.truncated(self.v + r)
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.c.iter().map(|x| x.to_string()).collect();
        write!(f, "v={} prec={} coeffs=[{}]", self.v, self.prec, parts.join(","))
    }
}

/// Arithmetic on [`Series`] over F_{q²}.
#[derive(Clone)]
pub struct SeriesRing {
    pub fl: Arc<Fields>,
    p: u32,
    n: usize,
    /// coords[x*n + k]: the k-th F_p coordinate of x.
    coords: Vec<u32>,
    /// red[d*n + k]: k-th coordinate of x^d in the power basis, d < 2n − 1.
    red: Vec<u32>,
    /// Encodings of the basis powers p^k.
    pw: Vec<u32>,
}

impl fmt::Debug for SeriesRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SeriesRing({:?})", self.fl)
    }
}

impl SeriesRing {
    pub fn new(fl: Arc<Fields>) -> SeriesRing {
        let f2 = &fl.fq2;
        let p = f2.char();
        let n = f2.degree() as usize;
        let mut coords = vec![0u32; f2.size() as usize * n];
        for x in f2.elements() {
            for (k, c) in f2.coords(x).into_iter().enumerate() {
                coords[x as usize * n + k] = c;
            }
        }
        let x_elem = if n == 1 { 0 } else { p as Fe };
        let mut red = vec![0u32; (2 * n - 1) * n];
        let mut xp: Fe = 1;
        for d in 0..2 * n - 1 {
            for (k, c) in f2.coords(xp).into_iter().enumerate() {
                red[d * n + k] = c;
            }
            xp = if n == 1 { xp } else { f2.mul(xp, x_elem) };
        }
        let pw = (0..n).map(|k| p.pow(k as u32)).collect();
        SeriesRing { fl, p, n, coords, red, pw }
    }

    pub fn f(&self) -> &GfField {
        &self.fl.fq2
    }

    pub fn q(&self) -> u32 {
        self.fl.q
    }

    pub fn constant(&self, a: Fe, prec: i64) -> Series {
        Series::from_coeffs(0, vec![a], prec)
    }

    pub fn one(&self, prec: i64) -> Series {
        self.constant(1, prec)
    }

    /// The exact monomial a·T^k known to precision `prec`.
    pub fn monomial(&self, a: Fe, k: i64, prec: i64) -> Series {
        Series::from_coeffs(-k, vec![a], prec)
    }

    /// A polynomial over F_q (embedded in F_{q²}) known to precision `prec`.
    pub fn from_poly(&self, a: &Poly, prec: i64) -> Series {
        let c: Vec<Fe> = a.c.iter().rev().map(|&x| self.fl.emb(x)).collect();
        Series::from_coeffs(-a.deg().max(0), c, prec)
    }

    /// A polynomial with F_{q²} coefficients known to precision `prec`.
    pub fn from_poly2(&self, a: &Poly, prec: i64) -> Series {
        let c: Vec<Fe> = a.c.iter().rev().copied().collect();
        Series::from_coeffs(-a.deg().max(0), c, prec)
    }

    pub fn add(&self, x: &Series, y: &Series) -> Series {
        let prec = x.prec.min(y.prec);
        let v = x.v.min(y.v);
        if v >= prec {
            return Series::zero(prec);
        }
        let top = |s: &Series| if s.c.is_empty() { i64::MIN } else { s.v + s.c.len() as i64 };
        let end = top(x).max(top(y)).min(prec);
        if end <= v {
            return Series::zero(prec);
        }
        let len = (end - v) as usize;
        let mut c = vec![0 as Fe; len];
        let f = self.f();
        for (s, sh) in [(x, x.v - v), (y, y.v - v)] {
            let sh = sh as usize;
            for (i, &a) in s.c.iter().enumerate().take(len.saturating_sub(sh)) {
                c[sh + i] = f.add(c[sh + i], a);
            }
        }
        Series::from_coeffs(v, c, prec)
    }

    pub fn neg(&self, x: &Series) -> Series {
        let f = self.f();
        Series { v: x.v, c: x.c.iter().map(|&a| f.neg(a)).collect(), prec: x.prec }
    }

    pub fn sub(&self, x: &Series, y: &Series) -> Series {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, x: &Series, s: Fe) -> Series {
        if s == 0 {
            return Series::zero(x.prec);
        }
        let f = self.f();
        Series { v: x.v, c: x.c.iter().map(|&a| f.mul(a, s)).collect(), prec: x.prec }
    }

    /// x · T^k.
    pub fn shift(&self, x: &Series, k: i64) -> Series {
        Series { v: x.v - k, c: x.c.clone(), prec: x.prec - k }
    }

    fn split(&self, c: &[Fe], len: usize) -> Vec<Vec<u32>> {
        let n = self.n;
        let mut out = vec![vec![0u32; len]; n];
        for (i, &x) in c.iter().take(len).enumerate() {
            let base = x as usize * n;
            for k in 0..n {
                out[k][i] = self.coords[base + k];
            }
        }
        out
    }

    /// First `len` coefficients of the product of two coefficient vectors.
    fn conv(&self, a: &[Fe], b: &[Fe], len: usize) -> Vec<Fe> {
        let n = self.n;
        let sa = self.split(a, len.min(a.len()));
        let sb = self.split(b, len.min(b.len()));
        let mut acc = vec![vec![0u32; len]; 2 * n - 1];
        // Keep accumulators below 2^32 by reducing every `chunk` rows.
        let pm = (self.p - 1) as u64;
        let chunk = ((u32::MAX as u64 / 2) / (pm * pm * n as u64).max(1)).max(1) as usize;
        let p = self.p;
        for k in 0..n {
            for l in 0..n {
                let out = &mut acc[k + l];
                let (ak, bl) = (&sa[k], &sb[l]);
                let mut since = 0;
                for (i, &x) in ak.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    if i >= len {
                        break;
                    }
                    let m = (len - i).min(bl.len());
                    let dst = &mut out[i..i + m];
                    for (d, &y) in dst.iter_mut().zip(&bl[..m]) {
                        *d += x * y;
                    }
                    since += 1;
                    if since >= chunk {
                        for d in out.iter_mut() {
                            *d %= p;
                        }
                        since = 0;
                    }
                }
                if since > 0 && n > 1 {
                    for d in out.iter_mut() {
                        *d %= p;
                    }
                }
            }
        }
        let mut res = vec![0 as Fe; len];
        let mut coord = vec![0u64; n];
        for (i, r) in res.iter_mut().enumerate() {
            coord.iter_mut().for_each(|c| *c = 0);
            for (d, row) in acc.iter().enumerate() {
                let s = (row[i] % p) as u64;
                if s == 0 {
                    continue;
                }
                for k in 0..n {
                    coord[k] += s * self.red[d * n + k] as u64;
                }
            }
            *r = coord.iter().zip(&self.pw).map(|(&c, &w)| (c % p as u64) as u32 * w).sum::<u32>() as Fe;
        }
        res
    }

    pub fn mul(&self, x: &Series, y: &Series) -> Series {
        if x.is_zero() || y.is_zero() {
            return Series::zero((x.prec + y.v).min(y.prec + x.v));
        }
        let v = x.v + y.v;
        let rel = x.rel_prec().min(y.rel_prec());
        let len = rel.min((x.c.len() + y.c.len() - 1) as i64) as usize;
        Series::from_coeffs(v, self.conv(&x.c, &y.c, len), v + rel)
    }

    pub fn square(&self, x: &Series) -> Series {
        if self.p == 2 {
            return self.frob_p(x);
        }
        self.mul(x, x)
    }

    /// x^p, coefficientwise (exponents scale by p).
    fn frob_p(&self, x: &Series) -> Series {
        let f = self.f();
        let p = self.p as usize;
        if x.is_zero() {
            return Series::zero(x.prec * p as i64);
        }
        let mut c = vec![0 as Fe; (x.c.len() - 1) * p + 1];
        for (i, &a) in x.c.iter().enumerate() {
            c[i * p] = f.pow(a, p as u64);
        }
        Series { v: x.v * p as i64, c, prec: x.prec * p as i64 }
    }

    /// x^q: coefficients raised to the q-th power, exponents multiplied by q.
    pub fn frob(&self, x: &Series) -> Series {
        let q = self.q() as usize;
        if x.is_zero() {
            return Series::zero(x.prec * q as i64);
        }
        let mut c = vec![0 as Fe; (x.c.len() - 1) * q + 1];
        for (i, &a) in x.c.iter().enumerate() {
            c[i * q] = self.fl.frob_q(a);
        }
        Series { v: x.v * q as i64, c, prec: x.prec * q as i64 }
    }

    pub fn frob_k(&self, x: &Series, k: u32) -> Series {
        let mut y = x.clone();
        for _ in 0..k {
            y = self.frob(&y);
        }
        y
    }

    pub fn pow(&self, x: &Series, mut e: u64) -> Series {
        if e == 0 {
            return self.one(EXACT);
        }
        let mut acc = self.one(EXACT);
        let mut base = x.clone();
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                acc = if first { base.clone() } else { self.mul(&acc, &base) };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = self.square(&base);
            }
        }
        acc
    }

    /// Inverse of the unit part u = c/c0 to length `len` by Newton iteration.
    fn inv_coeffs(&self, c: &[Fe], len: usize) -> Vec<Fe> {
        let f = self.f();
        let inv0 = f.inv(c[0]);
        const BASE: usize = 32;
        let base = len.min(BASE);
        let mut b = vec![0 as Fe; base];
        b[0] = inv0;
        for k in 1..base {
            let mut s: Fe = 0;
            for i in 1..=k.min(c.len().saturating_sub(1)) {
                s = f.add(s, f.mul(c[i], b[k - i]));
            }
            b[k] = f.neg(f.mul(inv0, s));
        }
        while b.len() < len {
            let m = (2 * b.len()).min(len);
            // b ← b·(2 − c·b) = b − b·(c·b − 1).
            let mut cb = self.conv(c, &b, m);
            cb[0] = f.sub(cb[0], 1);
            let corr = self.conv(&b, &cb, m);
            let mut nb = b.clone();
            nb.resize(m, 0);
            for (x, y) in nb.iter_mut().zip(corr) {
                *x = f.sub(*x, y);
            }
            b = nb;
        }
        b.truncate(len);
        b
    }

    pub fn inv(&self, x: &Series) -> Result<Series> {
        if x.is_zero() {
            return Err(Error::Precision(format!("inverting a series that vanishes to precision {}", x.prec)));
        }
        let len = x.rel_prec();
        if len > MAX_LEN {
            return Err(Error::Precision("inverse of an exact series needs a target precision".into()));
        }
        let c = self.inv_coeffs(&x.c, len as usize);
        Ok(Series::from_coeffs(-x.v, c, -x.v + len))
    }

    pub fn div(&self, x: &Series, y: &Series) -> Result<Series> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    /// x · a for an exact polynomial a over F_q; relative precision is kept.
    pub fn mul_poly(&self, x: &Series, a: &Poly) -> Series {
        if a.is_zero() {
            return Series::zero(EXACT);
        }
        let d = a.deg();
        if x.is_zero() {
            return Series::zero(x.prec - d);
        }
        let f = self.f();
        let len = (x.c.len() + d as usize).min(x.rel_prec() as usize);
        let mut c = vec![0 as Fe; len];
        // a = Σ a_k T^k contributes a_k·t^{d−k} relative to T^d.
        for (k, &ak) in a.c.iter().enumerate() {
            if ak == 0 {
                continue;
            }
            let ak = self.fl.emb(ak);
            let off = (d - k as i64) as usize;
            for i in 0..len.saturating_sub(off).min(x.c.len()) {
                c[i + off] = f.add(c[i + off], f.mul(ak, x.c[i]));
            }
        }
        Series::from_coeffs(x.v - d, c, x.prec - d)
    }

    /// x / a for an exact nonzero polynomial a over F_q; relative precision is kept.
    pub fn div_poly(&self, x: &Series, a: &Poly) -> Result<Series> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let d = a.deg();
        if x.is_zero() {
            return Ok(Series::zero(x.prec + d));
        }
        let len = x.rel_prec();
        if len > MAX_LEN {
            return Err(Error::Precision("quotient of an exact series needs a target precision".into()));
        }
        let len = len as usize;
        let ac: Vec<Fe> = a.c.iter().rev().map(|&y| self.fl.emb(y)).collect();
        let ia = self.inv_coeffs(&ac, len);
        let c = self.conv(&x.c, &ia, len);
        Ok(Series::from_coeffs(x.v + d, c, x.prec + d))
    }

    /// x · (1 − t^m)^{-1} for m ≥ 1.
    pub fn mul_geom(&self, x: &Series, m: usize) -> Series {
        let f = self.f();
        let mut c = x.c.clone();
        if !x.is_zero() {
            c.resize(x.rel_prec().min(MAX_LEN) as usize, 0);
        }
        for i in m..c.len() {
            c[i] = f.add(c[i], c[i - m]);
        }
        Series::from_coeffs(x.v, c, x.prec)
    }

    /// x · (1 − t^m) for m ≥ 1.
    pub fn mul_binom(&self, x: &Series, m: usize) -> Series {
        let f = self.f();
        let mut c = x.c.clone();
        if !x.is_zero() {
            c.resize((x.c.len() + m).min(x.rel_prec() as usize), 0);
        }
        for i in (m..c.len()).rev() {
            c[i] = f.sub(c[i], c[i - m]);
        }
        Series::from_coeffs(x.v, c, x.prec)
    }

    /// Whether x and y agree on every digit known for both.
    pub fn agree(&self, x: &Series, y: &Series) -> bool {
        self.sub(x, y).is_zero()
    }

    /// Square root with canonical leading coefficient (odd characteristic).
    pub fn sqrt(&self, x: &Series) -> Result<Series> {
        let f = self.f();
        if self.p == 2 {
            return Err(Error::Field(crate::ffield::FieldError::NeedsOddChar));
        }
        if x.is_zero() {
            return Err(Error::Precision("square root of a series vanishing to precision".into()));
        }
        if x.v % 2 != 0 {
            return Err(Error::Invalid("square root of a series of odd valuation".into()));
        }
        let y0 = f.sqrt(x.c[0]).ok_or_else(|| Error::Invalid("leading coefficient is not a square".into()))?;
        let len = x.rel_prec();
        if len > MAX_LEN {
            return Err(Error::Precision("square root of an exact series needs a target precision".into()));
        }
        let len = len as usize;
        let inv2y0 = f.inv(f.add(y0, y0));
        let mut y = vec![0 as Fe; len];
        y[0] = y0;
        for k in 1..len {
            let mut s = x.c.get(k).copied().unwrap_or(0);
            for i in 1..k {
                s = f.sub(s, f.mul(y[i], y[k - i]));
            }
            y[k] = f.mul(s, inv2y0);
        }
        Ok(Series::from_coeffs(x.v / 2, y, x.v / 2 + len as i64))
    }

    /// The root y of y² + y = s with the canonical constant term (p = 2, v(s) ≥ 0).
    pub fn artin_schreier(&self, s: &Series) -> Result<Series> {
        let f = self.f();
        if self.p != 2 {
            return Err(Error::Field(crate::ffield::FieldError::NeedsChar2));
        }
        if s.v < 0 {
            return Err(Error::Invalid("Artin-Schreier root of a series with a pole".into()));
        }
        if s.prec > MAX_LEN {
            return Err(Error::Precision("Artin-Schreier root of an exact series needs a target precision".into()));
        }
        let len = s.prec.max(0) as usize;
        let mut y = vec![0 as Fe; len];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = s.coeff(i as i64);
        }
        let (r0, _) = f
            .artin_schreier(y.first().copied().unwrap_or(0))?
            .ok_or_else(|| Error::Invalid("constant term has no Artin-Schreier root in F_{q^2}".into()))?;
        if len > 0 {
            y[0] = r0;
        }
        for i in 1..len {
            if i % 2 == 0 {
                let h = y[i / 2];
                y[i] = f.add(y[i], f.mul(h, h));
            }
        }
        if len == 0 {
            return Ok(Series::from_coeffs(0, vec![r0], 1).truncated(s.prec));
        }
        Ok(Series::from_coeffs(0, y, len as i64))
    }

    /// Exact polynomial in F_{q²}[T] when x has no known negative-degree digits
    /// other than zeros and is known down to T^0.
    pub fn as_poly2(&self, x: &Series) -> Option<Poly> {
        if x.prec < 1 {
            return None;
        }
        if x.is_zero() {
            return Some(Poly::zero());
        }
        if x.v > 0 {
            return None;
        }
        if x.c.iter().skip((1 - x.v) as usize).any(|&a| a != 0) {
            return None;
        }
        let deg = -x.v;
        Some(Poly::new((0..=deg).map(|k| x.coeff_t(k)).collect()))
    }

    /// Like [`SeriesRing::as_poly2`] but also requires F_q coefficients.
    pub fn as_poly(&self, x: &Series) -> Option<Poly> {
        let p2 = self.as_poly2(x)?;
        let c: Option<Vec<Fe>> = p2.c.iter().map(|&a| self.fl.restrict(a)).collect();
        c.map(Poly::new)
    }
}

/// π̃^{q−1} = −T^q ∏_{k≥1} (1 − t^{q^k − 1})^{−(q−1)}, to relative precision `rel`.
pub fn pi_qm1(ring: &SeriesRing, rel: i64) -> Series {
    let q = ring.q() as i64;
    let minus_one = ring.f().neg(1);
    let mut x = Series::from_coeffs(0, vec![minus_one], rel);
    let mut m = q - 1;
    while m < rel {
        for _ in 0..q - 1 {
            x = ring.mul_geom(&x, m as usize);
        }
        m = m * q + q - 1;
    }
    ring.shift(&x, q)
}

/// D_i = ∏_{k<i} (T^{q^i} − T^{q^k}) as an exact polynomial over F_q.
pub fn carlitz_d(q: u32, i: u32, f: &GfField) -> Poly {
    let r = crate::poly::PolyRing::new(f);
    let qi = (q as usize).pow(i);
    let mut acc = Poly::one();
    for k in 0..i {
        let qk = (q as usize).pow(k);
        let factor = r.sub(&Poly::monomial(1, qi), &Poly::monomial(1, qk));
        acc = r.mul(&acc, &factor);
    }
    acc
}

/// log_q |D_i| = i·q^i.
pub fn carlitz_d_deg(q: u32, i: u32) -> i64 {
    i as i64 * (q as i64).pow(i)
}

/// P_k = (π̃^{q−1})^{(q^k−1)/(q−1)} = π̃^{q^k − 1}, to relative precision `rel`.
pub fn pi_power(ring: &SeriesRing, k: u32, rel: i64) -> Series {
    let q = ring.q() as i64;
    let e = ((q.pow(k)) - 1) / (q - 1);
    // Sign (−1)^e, and the product ∏_{l<k} U(t^{q^l}) with U the unit part of π̃^{q−1}.
    let sign = if e % 2 == 1 { ring.f().neg(1) } else { 1 };
    let mut x = Series::from_coeffs(0, vec![sign], rel);
    for l in 0..k {
        let ql = q.pow(l);
        let mut m = q - 1;
        while m * ql < rel {
            for _ in 0..q - 1 {
                x = ring.mul_geom(&x, (m * ql) as usize);
            }
            m = m * q + q - 1;
        }
    }
    ring.shift(&x, q * e)
}

/// C_i = π̃^{q^i − 1} / D_i, to relative precision `rel`.
pub fn carlitz_c(ring: &SeriesRing, i: u32, rel: i64) -> Series {
    let q = ring.q() as i64;
    let x = pi_power(ring, i, rel);
    // 1/D_i = t^{i q^i} ∏_{k<i} (1 − t^{q^i − q^k})^{−1}.
    let qi = q.pow(i);
    let mut y = x;
    for k in 0..i {
        let m = qi - q.pow(k);
        if m < rel {
            y = ring.mul_geom(&y, m as usize);
        }
    }
    ring.shift(&y, -(i as i64) * qi)
}

/// v(C_i) = i q^i − q (q^i − 1)/(q − 1).
pub fn carlitz_c_val(q: u32, i: u32) -> i64 {
    let q = q as i64;
    i as i64 * q.pow(i) - q * (q.pow(i) - 1) / (q - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::PolyRing;
    use proptest::prelude::*;

    fn ring(q: u32) -> SeriesRing {
        SeriesRing::new(Fields::new(q).unwrap())
    }

    /// Table-driven schoolbook product, independent of the convolution engine.
    fn naive_mul(r: &SeriesRing, x: &Series, y: &Series) -> Series {
        let f = r.f();
        let len = x.rel_prec().min(y.rel_prec()) as usize;
        let mut c = vec![0 as Fe; len];
        for i in 0..len {
            for j in 0..len - i {
                let (a, b) = (x.coeff(x.v + i as i64), y.coeff(y.v + j as i64));
                c[i + j] = f.add(c[i + j], f.mul(a, b));
            }
        }
        Series::from_coeffs(x.v + y.v, c, x.v + y.v + len as i64)
    }

    fn series_from(q2: u32, v: i64, raw: &[u16]) -> Series {
        let mut c: Vec<Fe> = raw.iter().map(|&x| x % q2 as u16).collect();
        if c[0] == 0 {
            c[0] = 1;
        }
        let len = c.len() as i64;
        Series::from_coeffs(v, c, v + len)
    }

    #[test]
    fn geometric_inverse() {
        let r = ring(3);
        let x = Series::from_coeffs(0, vec![1, r.f().neg(1)], 20);
        let y = r.inv(&x).unwrap();
        assert_eq!(y.v, 0);
        assert_eq!(y.prec, 20);
        assert!(y.c.iter().all(|&a| a == 1));
    }

    #[test]
    fn poly_times_inverse() {
        let r = ring(2);
        let a = Poly::new(vec![1, 1, 1]);
        let x = r.from_poly(&a, 40);
        let y = r.inv(&x).unwrap();
        let one = r.mul(&x, &y);
        assert!(r.agree(&one, &r.one(EXACT)));
        assert_eq!(one.v, 0);
        let z = r.div_poly(&r.one(40), &a).unwrap();
        assert!(r.agree(&z, &y));
        assert_eq!(r.mul_poly(&z, &a).c[0], 1);
    }

    #[test]
    fn sqrt_examples() {
        let r = ring(3);
        let m1 = r.f().neg(1);
        let x = Series::from_coeffs(0, vec![1, m1], 30);
        let y = r.sqrt(&x).unwrap();
        assert_eq!(&y.c[..3], &[1, 1, 1]);
        assert!(r.agree(&r.mul(&y, &y), &x));
        // (1 − t)^{1/2} = ∏_k (1 − t^{3^k})^{-1} since 1/2 = −(1 + 3 + 9 + ...) in Z_3.
        let mut oracle = r.one(30);
        for m in [1, 3, 9, 27] {
            oracle = r.mul_geom(&oracle, m);
        }
        assert_eq!(y, oracle);
        let t2 = r.monomial(1, 2, 30);
        let s = r.sqrt(&t2).unwrap();
        assert_eq!((s.v, s.c[0]), (-1, 1));
        assert!(s.c[1..].iter().all(|&a| a == 0));
        assert!(r.sqrt(&r.monomial(1, 1, 10)).is_err());
    }

    #[test]
    fn artin_schreier_examples() {
        let r = ring(2);
        let y = r.artin_schreier(&Series::zero(20)).unwrap();
        assert!(y.is_zero());
        let s = Series::from_coeffs(0, vec![1, 0, 1, 1, 0, 1], 30);
        let y = r.artin_schreier(&s).unwrap();
        assert!(r.fl.restrict(y.c[0]).is_none());
        let chk = r.add(&r.mul(&y, &y), &y);
        assert!(r.agree(&chk, &s));
        let y1 = r.add(&y, &r.one(EXACT));
        assert!(r.agree(&r.add(&r.mul(&y1, &y1), &y1), &s));
        assert!(r.artin_schreier(&r.monomial(1, 1, 10)).is_err());
    }

    #[test]
    fn carlitz_period_q2() {
        let r = ring(2);
        let p = pi_qm1(&r, 12);
        assert_eq!(p.v, -2);
        // T^2 + T + 1 + 0·T^{-1}.
        assert_eq!(&p.c[..4], &[1, 1, 1, 0]);
    }

    #[test]
    fn carlitz_period_valuations_and_product() {
        for q in [2u32, 3, 4] {
            let r = ring(q);
            let p = pi_qm1(&r, 60);
            assert_eq!(p.v, -(q as i64));
            // Undo the product: multiply by ∏ (1 − T^{1−q^k})^{q−1} and compare with −T^q·... = −T.
            let mut x = p.clone();
            let mut m = (q - 1) as i64;
            while m < 60 {
                for _ in 0..q - 1 {
                    x = r.mul_binom(&x, m as usize);
                }
                m = m * q as i64 + q as i64 - 1;
            }
            let target = r.monomial(r.f().neg(1), q as i64, EXACT);
            assert!(r.agree(&x, &target));
            assert_eq!(x.rel_prec(), 60);
        }
    }

    #[test]
    fn carlitz_d_values() {
        let f3 = GfField::new(3, 1).unwrap();
        assert_eq!(carlitz_d(3, 0, &f3), Poly::one());
        assert_eq!(carlitz_d(3, 1, &f3), Poly::new(vec![0, 2, 0, 1]));
        assert_eq!(carlitz_d(3, 2, &f3).deg(), carlitz_d_deg(3, 2));
    }

    #[test]
    fn carlitz_c_matches_direct_quotient() {
        for q in [2u32, 3] {
            let r = ring(q);
            let fq = GfField::new(q, 1).unwrap();
            let p = pi_qm1(&r, 80);
            for i in 0..4u32 {
                let e = ((q as u64).pow(i) - 1) / (q as u64 - 1);
                let num = if e == 0 { r.one(80) } else { r.pow(&p, e) };
                let direct = r.div_poly(&num, &carlitz_d(q, i, &fq)).unwrap();
                let c = carlitz_c(&r, i, 80);
                assert_eq!(c.v, carlitz_c_val(q, i));
                assert!(r.agree(&direct, &c));
                if e > 0 {
                    assert!(r.agree(&pi_power(&r, i, 80), &r.pow(&p, e)));
                }
            }
        }
    }

    #[test]
    fn series_ring_f3_matches_poly_mul() {
        let f3 = GfField::new(3, 1).unwrap();
        let pr = PolyRing::new(&f3);
        let r = ring(3);
        let a = pr.parse("T^3+2*T+1").unwrap();
        let b = pr.parse("2*T^2+T").unwrap();
        let prod = r.mul(&r.from_poly(&a, 50), &r.from_poly(&b, 50));
        assert_eq!(r.as_poly(&prod), Some(pr.mul(&a, &b)));
    }

    #[test]
    fn debug_dump_format() {
        let s = Series::from_coeffs(-1, vec![1, 0, 2], 2);
        assert_eq!(format!("{s:?}"), "v=-1 prec=2 coeffs=[1,0,2]");
    }

    proptest! {
        #[test]
        fn mul_matches_naive(q in prop::sample::select(vec![2u32, 3, 4, 5]),
                             v1 in -5i64..5, v2 in -5i64..5,
                             a in prop::collection::vec(0u16..625, 1..70),
                             b in prop::collection::vec(0u16..625, 1..70)) {
            let r = ring(q);
            let q2 = q * q;
            let x = series_from(q2, v1, &a);
            let y = series_from(q2, v2, &b);
            let m = r.mul(&x, &y);
            prop_assert_eq!(&m, &naive_mul(&r, &x, &y));
            prop_assert_eq!(m.v, x.v + y.v);
            prop_assert_eq!(m.lead(), r.f().mul(x.lead(), y.lead()));
        }

        #[test]
        fn inverse_and_sqrt_identities(q in prop::sample::select(vec![3u32, 5]),
                                       v in -4i64..4,
                                       a in prop::collection::vec(0u16..625, 1..90)) {
            let r = ring(q);
            let x = series_from(q * q, 2 * v, &a);
            let y = r.inv(&x).unwrap();
            prop_assert!(r.agree(&r.mul(&x, &y), &r.one(EXACT)));
            let x2 = r.mul(&x, &x);
            let s = r.sqrt(&x2).unwrap();
            prop_assert!(r.agree(&r.mul(&s, &s), &x2));
            prop_assert_eq!(s.rel_prec(), x2.rel_prec());
            prop_assert!(r.agree(&s, &x) || r.agree(&s, &r.neg(&x)));
        }

        #[test]
        fn precision_is_sound(q in prop::sample::select(vec![2u32, 3]),
                              a in prop::collection::vec(0u16..81, 10..60),
                              b in prop::collection::vec(0u16..81, 10..60),
                              cut in 2usize..9) {
            // Truncating inputs and recomputing agrees with the full result on all claimed digits.
            let r = ring(q);
            let x = series_from(q * q, -1, &a);
            let y = series_from(q * q, 2, &b);
            let full = r.div(&r.add(&r.mul(&x, &y), &r.frob(&x)), &y).unwrap();
            let xt = x.truncated_rel(cut as i64);
            let yt = y.truncated_rel(cut as i64 + 1);
            let part = r.div(&r.add(&r.mul(&xt, &yt), &r.frob(&xt)), &yt).unwrap();
            prop_assert!(part.prec <= full.prec);
            prop_assert!(r.agree(&part, &full));
        }
    }
}
