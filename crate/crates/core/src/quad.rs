//! Imaginary quadratic extensions K = k(ξ) of k = F_q(T), their orders, and
//! the completion of K at ∞.
//!
//! Three presentations are supported:
//! * odd q: ξ² = D_K with D_K squarefree;
//! * even q, separable: ξ² + ξ = B/C in Hasse normal form;
//! * even q, inseparable: ξ² = T.
//!
//! In every case ξ² = α + βξ with α ∈ k and β ∈ {0, 1}.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::ffield::{Fe, Fields};
use crate::laurent::{Series, SeriesRing, EXACT};
use crate::poly::{Poly, PolyRing};

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum FieldData {
    Odd { dk: Poly },
    EvenSep { b: Poly, c: Poly, g: Poly, rad_g: Poly },
    EvenInsep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Flavor {
    Odd,
    EvenSep,
    EvenInsep,
}

/// An imaginary quadratic extension of k.
#[derive(Clone)]
pub struct QuadField {
    pub fl: Arc<Fields>,
    pub data: FieldData,
    /// Whether ∞ is inert (otherwise it ramifies).
    pub inert: bool,
}

impl fmt::Debug for QuadField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.data {
            FieldData::Odd { dk } => write!(f, "k(sqrt({dk}))"),
            FieldData::EvenSep { b, c, .. } => write!(f, "k(xi), xi^2+xi=({b})/({c})"),
            FieldData::EvenInsep => write!(f, "k(sqrt(T))"),
        }
    }
}

impl QuadField {
    pub fn ring(&self) -> PolyRing<'_> {
        PolyRing::new(&self.fl.fq)
    }

    pub fn flavor(&self) -> Flavor {
        match self.data {
            FieldData::Odd { .. } => Flavor::Odd,
            FieldData::EvenSep { .. } => Flavor::EvenSep,
            FieldData::EvenInsep => Flavor::EvenInsep,
        }
    }

    /// k(√D) for odd q, returning the field and the conductor f of A[√D]
    /// (D = f²·D_K with D_K squarefree).
    pub fn odd_from_disc(fl: &Arc<Fields>, d: &Poly) -> Result<(QuadField, Poly)> {
        if !fl.odd() {
            return Err(Error::Invalid("k(sqrt D) presentation needs odd q".into()));
        }
        if d.is_zero() {
            return Err(Error::Invalid("D = 0".into()));
        }
        let deg = d.deg();
        let inert = deg % 2 == 0;
        if inert && fl.fq.is_square(d.lead())? {
            return Err(Error::Invalid(format!(
                "D = {d} has even degree and square leading coefficient, so k(sqrt D) is not imaginary"
            )));
        }
        let r = PolyRing::new(&fl.fq);
        let fac = r.factor(d)?;
        let mut f = Poly::one();
        let mut dk = Poly::constant(fac.unit);
        for (p, e) in &fac.factors {
            f = r.mul(&f, &r.pow(p, (*e / 2) as u64));
            if e % 2 == 1 {
                dk = r.mul(&dk, p);
            }
        }
        Ok((QuadField { fl: fl.clone(), data: FieldData::Odd { dk }, inert }, f))
    }

    /// k(ξ) with ξ² + ξ = B/C, checking the Hasse normal form conditions.
    pub fn even_sep(fl: &Arc<Fields>, b: &Poly, c: &Poly) -> Result<QuadField> {
        if fl.odd() {
            return Err(Error::Invalid("Artin-Schreier presentation needs even q".into()));
        }
        let r = PolyRing::new(&fl.fq);
        if b.is_zero() || !c.is_monic() {
            return Err(Error::Invalid("need B nonzero and C monic".into()));
        }
        if !r.gcd(b, c).is_one() {
            return Err(Error::Invalid("gcd(B, C) must be 1".into()));
        }
        if b.deg() < c.deg() {
            return Err(Error::Invalid("need deg B >= deg C".into()));
        }
        let fac = r.factor(c)?;
        let mut g = Poly::one();
        let mut rad_g = Poly::one();
        for (p, e) in &fac.factors {
            if e % 2 == 0 {
                return Err(Error::Invalid(format!("C has the even exponent {e} at {p}")));
            }
            g = r.mul(&g, &r.pow(p, e.div_ceil(2) as u64));
            rad_g = r.mul(&rad_g, p);
        }
        let diff = b.deg() - c.deg();
        let inert = diff == 0;
        if diff > 0 && diff % 2 == 0 {
            return Err(Error::Invalid("deg B - deg C must be odd when positive".into()));
        }
        if inert && fl.fq.artin_schreier(b.lead())?.is_some() {
            return Err(Error::Invalid("X^2 + X + sgn(B) must be irreducible when deg B = deg C".into()));
        }
        Ok(QuadField { fl: fl.clone(), data: FieldData::EvenSep { b: b.clone(), c: c.clone(), g, rad_g }, inert })
    }

    /// F = k(√T) for even q.
    pub fn even_insep(fl: &Arc<Fields>) -> Result<QuadField> {
        if fl.odd() {
            return Err(Error::Invalid("k(sqrt T) is inseparable only for even q".into()));
        }
        Ok(QuadField { fl: fl.clone(), data: FieldData::EvenInsep, inert: false })
    }

    /// α and β with ξ² = α + βξ; α as numerator and monic denominator.
    pub fn alpha(&self) -> (Poly, Poly) {
        match &self.data {
            FieldData::Odd { dk } => (dk.clone(), Poly::one()),
            FieldData::EvenSep { b, c, .. } => (b.clone(), c.clone()),
            FieldData::EvenInsep => (Poly::t(), Poly::one()),
        }
    }

    pub fn beta(&self) -> Fe {
        match self.data {
            FieldData::EvenSep { .. } => 1,
            _ => 0,
        }
    }

    /// v_∞(ξ) in half-units: v_∞(α) for the ramified presentations, 2 v_∞(ξ) in general.
    pub fn v2_xi(&self) -> i64 {
        let (n, d) = self.alpha();
        let v = d.deg() - n.deg();
        match self.data {
            FieldData::EvenSep { .. } if v >= 0 => 0,
            _ => v,
        }
    }

    /// Discriminant of the maximal order (None for k(√T)).
    pub fn dk(&self) -> Option<Poly> {
        match &self.data {
            FieldData::Odd { dk } => Some(dk.clone()),
            FieldData::EvenSep { g, .. } => Some(self.ring().square(g)),
            FieldData::EvenInsep => None,
        }
    }

    /// Whether K = F_{q²}(T), i.e. D_K is constant.
    pub fn is_constant_extension(&self) -> bool {
        self.inert && self.dk().is_some_and(|d| d.deg() == 0)
    }

    /// ξ^q = u + wξ, with u and w as (numerator, monic denominator).
    pub fn frob_xi(&self) -> ((Poly, Poly), (Poly, Poly)) {
        let r = self.ring();
        let q = self.fl.q as u64;
        match &self.data {
            FieldData::Odd { dk } => ((Poly::zero(), Poly::one()), (r.pow(dk, (q - 1) / 2), Poly::one())),
            FieldData::EvenInsep => ((Poly::monomial(1, (q / 2) as usize), Poly::one()), (Poly::zero(), Poly::one())),
            FieldData::EvenSep { b, c, .. } => {
                // ξ^{2^j} = ξ + Σ_{i<j} α^{2^i}.
                let (mut un, mut ud) = (Poly::zero(), Poly::one());
                let (mut an, mut ad) = (b.clone(), c.clone());
                for _ in 0..self.fl.r {
                    un = r.add(&r.mul(&un, &ad), &r.mul(&an, &ud));
                    ud = r.mul(&ud, &ad);
                    let g = r.gcd(&un, &ud);
                    if !un.is_zero() {
                        un = r.div_exact(&un, &g).expect("gcd divides");
                        ud = r.div_exact(&ud, &g).expect("gcd divides");
                    }
                    an = r.square(&an);
                    ad = r.square(&ad);
                }
                ((un, ud), (Poly::one(), Poly::one()))
            }
        }
    }

    /// Quadratic character at a monic irreducible P.
    pub fn chi_prime(&self, p: &Poly) -> Result<i32> {
        let r = self.ring();
        if !p.is_monic() || !r.is_irreducible(p) {
            return Err(Error::Invalid(format!("{p} is not monic irreducible")));
        }
        match &self.data {
            FieldData::EvenInsep => Ok(0),
            FieldData::Odd { dk } => {
                if r.divides(p, dk) {
                    return Ok(0);
                }
                // D^{(|P|-1)/2} = N(D)^{(q-1)/2} with N the norm from A/P to F_q.
                let d = p.deg() as u32;
                let q = self.fl.q as u64;
                let mut norm = r.rem(&Poly::one(), p);
                let mut x = r.rem(dk, p);
                for _ in 0..d {
                    norm = r.mulmod(&norm, &x, p);
                    x = r.powmod(&x, q, p);
                }
                let e = r.powmod(&norm, (q - 1) / 2, p);
                Ok(if e.is_one() { 1 } else { -1 })
            }
            FieldData::EvenSep { b, c, .. } => {
                if r.divides(p, c) {
                    return Ok(0);
                }
                // x² + x = B/C is solvable in A/P iff the absolute trace of B/C vanishes.
                let s = r.mulmod(b, &r.inv_mod(c, p).expect("P does not divide C"), p);
                let mut tr = Poly::zero();
                let mut x = s;
                for _ in 0..self.fl.r * p.deg() as u32 {
                    tr = r.add(&tr, &x);
                    x = r.mulmod(&x, &x, p);
                }
                debug_assert!(tr.deg() <= 0);
                Ok(if tr.is_zero() { 1 } else { -1 })
            }
        }
    }

    /// χ(a) for monic a, multiplicatively over the factorization.
    pub fn chi(&self, a: &Poly) -> Result<i32> {
        let fac = self.ring().factor(a)?;
        let mut acc = 1;
        for (p, e) in &fac.factors {
            let c = self.chi_prime(p)?;
            acc *= c.pow(*e);
        }
        Ok(acc)
    }

    /// Descriptor in the JSON form used by reports.
    pub fn descriptor(&self) -> serde_json::Value {
        match &self.data {
            FieldData::Odd { dk } => serde_json::json!({"flavor": "odd", "D_K": dk.c}),
            FieldData::EvenSep { b, c, .. } => serde_json::json!({"flavor": "even_sep", "B": b.c, "C": c.c}),
            FieldData::EvenInsep => serde_json::json!({"flavor": "even_insep"}),
        }
    }
}

/// The order A + f·O_K of conductor f.
#[derive(Clone, Debug)]
pub struct Order {
    pub field: QuadField,
    pub f: Poly,
}

impl Order {
    pub fn new(field: QuadField, f: Poly) -> Result<Order> {
        if !f.is_monic() {
            return Err(Error::Invalid("conductor must be monic".into()));
        }
        if f.is_one() && field.is_constant_extension() {
            return Err(Error::Invalid(
                "the maximal order of F_{q^2}(T) has j = 0 only; it is not a CM order of the kind enumerated here".into(),
            ));
        }
        Ok(Order { field, f })
    }

    /// The unique order of discriminant D (odd q).
    pub fn from_disc(fl: &Arc<Fields>, d: &Poly) -> Result<Order> {
        let (field, f) = QuadField::odd_from_disc(fl, d)?;
        Order::new(field, f)
    }

    pub fn flavor(&self) -> Flavor {
        self.field.flavor()
    }

    pub fn fl(&self) -> &Arc<Fields> {
        &self.field.fl
    }

    pub fn q(&self) -> u32 {
        self.field.fl.q
    }

    /// D_O = f²·D_K (separable flavors).
    pub fn disc(&self) -> Option<Poly> {
        let r = self.field.ring();
        self.field.dk().map(|dk| r.mul(&r.square(&self.f), &dk))
    }

    /// log_q of the size used to bound enumerations and sweeps: deg D for odd
    /// q; deg(f²G²) + max(0, deg B − deg C) for the Artin-Schreier flavor;
    /// deg(f²T) for k(√T).
    pub fn size_log(&self) -> i64 {
        let df = self.f.deg();
        match &self.field.data {
            FieldData::Odd { dk } => 2 * df + dk.deg(),
            FieldData::EvenSep { b, c, g, .. } => 2 * df + 2 * g.deg() + (b.deg() - c.deg()).max(0),
            FieldData::EvenInsep => 2 * df + 1,
        }
    }

    /// Unit index [O_K^× : O^×].
    pub fn unit_index(&self) -> u32 {
        if self.field.is_constant_extension() && !self.f.is_one() {
            self.q() + 1
        } else {
            1
        }
    }

    pub fn descriptor(&self) -> serde_json::Value {
        let mut d = self.field.descriptor();
        d["f"] = serde_json::json!(self.f.c);
        if let Some(disc) = self.disc() {
            d["D"] = serde_json::json!(disc.c);
        }
        d
    }
}

/// Exact element (x + yξ)/den of K, with x, y, den ∈ A and den monic up to units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadElem {
    pub x: Poly,
    pub y: Poly,
    pub den: Poly,
}

impl QuadField {
    pub fn elem_mul(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        let r = self.ring();
        let (an, ad) = self.alpha();
        let beta = self.beta();
        let yy = r.mul(&a.y, &b.y);
        let x = r.add(&r.mul(&r.mul(&a.x, &b.x), &ad), &r.mul(&an, &yy));
        let cross = r.add(&r.mul(&a.x, &b.y), &r.mul(&a.y, &b.x));
        let y = r.mul(&r.add(&cross, &r.scale(&yy, beta)), &ad);
        QuadElem { x, y, den: r.mul(&r.mul(&a.den, &b.den), &ad) }
    }

    /// The nontrivial automorphism (the identity on k(√T)).
    pub fn conj(&self, a: &QuadElem) -> QuadElem {
        let r = self.ring();
        match self.data {
            FieldData::EvenInsep => a.clone(),
            _ => QuadElem { x: r.add(&a.x, &r.scale(&a.y, self.beta())), y: r.neg(&a.y), den: a.den.clone() },
        }
    }

    /// N(a) as (numerator, denominator): x² + βxy − αy² over den².
    pub fn norm(&self, a: &QuadElem) -> (Poly, Poly) {
        let r = self.ring();
        let (an, ad) = self.alpha();
        let xy = r.scale(&r.mul(&a.x, &a.y), self.beta());
        let num = r.sub(&r.mul(&r.add(&r.square(&a.x), &xy), &ad), &r.mul(&an, &r.square(&a.y)));
        (num, r.mul(&r.square(&a.den), &ad))
    }

    /// v_∞ of an exact nonzero element in half-units (= v_∞ of its norm).
    pub fn val2(&self, a: &QuadElem) -> i64 {
        let (n, d) = self.norm(a);
        d.deg() - n.deg()
    }
}

/// Arithmetic in the completion K_∞, generic over its presentation.
pub trait LocalAlg: Sync + Send {
    type E: Clone + Send + Sync + fmt::Debug;

    fn ring(&self) -> &SeriesRing;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E {
        self.add(a, &self.neg(b))
    }
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul_series(&self, a: &Self::E, s: &Series) -> Self::E;
    fn mul_poly(&self, a: &Self::E, p: &Poly) -> Self::E;
    fn scale(&self, a: &Self::E, c: Fe) -> Self::E;
    fn inv(&self, a: &Self::E) -> Result<Self::E>;
    /// a ↦ a^q.
    fn frob(&self, a: &Self::E) -> Self::E;
    /// Valuation in half-units (equals `prec2` when a vanishes to precision).
    fn val2(&self, a: &Self::E) -> i64;
    /// Absolute precision in half-units.
    fn prec2(&self, a: &Self::E) -> i64;
    fn is_zero(&self, a: &Self::E) -> bool {
        self.val2(a) >= self.prec2(a)
    }
    fn truncate2(&self, a: &Self::E, p2: i64) -> Self::E;
    fn from_series(&self, s: Series) -> Self::E;
    /// Embeds an exact element with `rel2` half-units of relative precision.
    fn embed(&self, z: &QuadElem, rel2: i64) -> Result<Self::E>;
    /// The value as a single series when it lies in F_{q²}((1/T)).
    fn flat(&self, a: &Self::E) -> Option<Series>;
    fn parts(&self, a: &Self::E) -> LocalVal;
    fn from_parts(&self, v: &LocalVal) -> Self::E;
    fn one(&self) -> Self::E {
        self.from_series(Series::from_coeffs(0, vec![1], EXACT))
    }
    fn pow(&self, a: &Self::E, e: u64) -> Self::E {
        let mut acc = self.one();
        let mut base = a.clone();
        let mut e = e;
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
}

/// A value x + yξ of K_∞ detached from its algebra; y is exactly zero for
/// inert ∞, where x already lies in F_{q²}((1/T)).
#[derive(Clone, Debug)]
pub struct LocalVal {
    pub x: Series,
    pub y: Series,
}

fn series_from_ratio(ring: &SeriesRing, num: &Poly, den: &Poly, prec: i64) -> Result<Series> {
    if num.is_zero() {
        return Ok(Series::zero(prec));
    }
    ring.div_poly(&ring.from_poly(num, prec - den.deg()), den)
}

fn mul_ratio(ring: &SeriesRing, s: &Series, num: &Poly, den: &Poly) -> Result<Series> {
    let t = ring.mul_poly(s, num);
    if den.is_one() {
        return Ok(t);
    }
    ring.div_poly(&t, den)
}

/// K_∞ = F_{q²}((1/T)) for inert ∞; ξ is realized as a series.
pub struct FlatAlg {
    pub ring: SeriesRing,
    pub field: QuadField,
    xi: Mutex<Option<Series>>,
}

impl FlatAlg {
    pub fn new(field: &QuadField) -> Result<FlatAlg> {
        if !field.inert {
            return Err(Error::Invalid("flat completion needs ∞ inert".into()));
        }
        let ring = SeriesRing::new(field.fl.clone());
        let alg = FlatAlg { ring, field: field.clone(), xi: Mutex::new(None) };
        alg.xi(16)?;
        Ok(alg)
    }

    /// ξ to at least `rel` digits of relative precision.
    pub fn xi(&self, rel: i64) -> Result<Series> {
        let mut cache = self.xi.lock().expect("xi cache");
        let have = cache.as_ref().map_or(0, Series::rel_prec);
        if have < rel {
            let rel = rel.max(2 * have);
            let r = &self.ring;
            let s = match &self.field.data {
                FieldData::Odd { dk } => {
                    let v = -dk.deg();
                    r.sqrt(&r.from_poly(dk, v + rel))?
                }
                FieldData::EvenSep { b, c, .. } => r.artin_schreier(&series_from_ratio(r, b, c, rel)?)?,
                FieldData::EvenInsep => unreachable!("k(sqrt T) is ramified at ∞"),
            };
            *cache = Some(s);
        }
        Ok(cache.as_ref().expect("filled above").truncated_rel(rel))
    }
}

impl LocalAlg for FlatAlg {
    type E = Series;

    fn ring(&self) -> &SeriesRing {
        &self.ring
    }
    fn add(&self, a: &Series, b: &Series) -> Series {
        self.ring.add(a, b)
    }
    fn neg(&self, a: &Series) -> Series {
        self.ring.neg(a)
    }
    fn mul(&self, a: &Series, b: &Series) -> Series {
        self.ring.mul(a, b)
    }
    fn mul_series(&self, a: &Series, s: &Series) -> Series {
        self.ring.mul(a, s)
    }
    fn mul_poly(&self, a: &Series, p: &Poly) -> Series {
        self.ring.mul_poly(a, p)
    }
    fn scale(&self, a: &Series, c: Fe) -> Series {
        self.ring.scale(a, c)
    }
    fn inv(&self, a: &Series) -> Result<Series> {
        self.ring.inv(a)
    }
    fn frob(&self, a: &Series) -> Series {
        self.ring.frob(a)
    }
    fn val2(&self, a: &Series) -> i64 {
        2 * a.v
    }
    fn prec2(&self, a: &Series) -> i64 {
        2 * a.prec
    }
    fn truncate2(&self, a: &Series, p2: i64) -> Series {
        a.truncated(p2.div_euclid(2))
    }
    fn from_series(&self, s: Series) -> Series {
        s
    }
    fn embed(&self, z: &QuadElem, rel2: i64) -> Result<Series> {
        let r = &self.ring;
        let rel = (rel2 + 1).div_euclid(2);
        let xi = self.xi(rel + 2)?;
        let d = z.den.deg();
        // No cancellation between x and yξ: their leading terms lie in F_q and
        // (F_{q²} ∖ F_q)·F_q^× respectively.
        let vy = if z.y.is_zero() { EXACT } else { -z.y.deg() + xi.v };
        let vx = if z.x.is_zero() { EXACT } else { -z.x.deg() };
        let vz = vx.min(vy);
        let prec = vz + rel;
        let mut acc = r.from_poly(&z.x, prec);
        if !z.y.is_zero() {
            acc = r.add(&acc, &r.mul_poly(&xi, &z.y).truncated(prec));
        }
        let out = r.div_poly(&acc.truncated(prec), &z.den)?;
        debug_assert_eq!(out.v, vz + d);
        Ok(out)
    }
    fn flat(&self, a: &Series) -> Option<Series> {
        Some(a.clone())
    }
    fn parts(&self, a: &Series) -> LocalVal {
        LocalVal { x: a.clone(), y: Series::zero(EXACT) }
    }
    fn from_parts(&self, v: &LocalVal) -> Series {
        debug_assert!(v.y.is_zero());
        v.x.clone()
    }
}

/// K_∞ as pairs x + yξ over F_{q²}((1/T)) for ramified ∞.
pub struct QuadAlg {
    pub ring: SeriesRing,
    pub field: QuadField,
    alpha: (Poly, Poly),
    beta: Fe,
    v2xi: i64,
    frob_u: (Poly, Poly),
    frob_w: (Poly, Poly),
}

#[derive(Clone, Debug)]
pub struct QElem {
    pub x: Series,
    pub y: Series,
}

impl QuadAlg {
    pub fn new(field: &QuadField) -> Result<QuadAlg> {
        if field.inert {
            return Err(Error::Invalid("pair presentation is for ramified ∞".into()));
        }
        let (frob_u, frob_w) = field.frob_xi();
        Ok(QuadAlg {
            ring: SeriesRing::new(field.fl.clone()),
            field: field.clone(),
            alpha: field.alpha(),
            beta: field.beta(),
            v2xi: field.v2_xi(),
            frob_u,
            frob_w,
        })
    }

    pub fn v2_xi(&self) -> i64 {
        self.v2xi
    }

    /// x + yξ ↦ (x + βy) − yξ.
    pub fn conj(&self, a: &QElem) -> QElem {
        let r = &self.ring;
        let x = if self.beta == 0 { a.x.clone() } else { r.add(&a.x, &a.y) };
        QElem { x, y: r.neg(&a.y) }
    }

    /// x² + βxy − αy² as a series.
    pub fn norm(&self, a: &QElem) -> Result<Series> {
        let r = &self.ring;
        let mut n = r.square(&a.x);
        if self.beta != 0 {
            n = r.add(&n, &r.mul(&a.x, &a.y));
        }
        let ay = mul_ratio(r, &r.square(&a.y), &self.alpha.0, &self.alpha.1)?;
        Ok(r.sub(&n, &ay))
    }
}

impl LocalAlg for QuadAlg {
    type E = QElem;

    fn ring(&self) -> &SeriesRing {
        &self.ring
    }
    fn add(&self, a: &QElem, b: &QElem) -> QElem {
        QElem { x: self.ring.add(&a.x, &b.x), y: self.ring.add(&a.y, &b.y) }
    }
    fn neg(&self, a: &QElem) -> QElem {
        QElem { x: self.ring.neg(&a.x), y: self.ring.neg(&a.y) }
    }
    fn mul(&self, a: &QElem, b: &QElem) -> QElem {
        let r = &self.ring;
        let yy = r.mul(&a.y, &b.y);
        let ayy = mul_ratio(r, &yy, &self.alpha.0, &self.alpha.1).expect("α has a nonzero denominator");
        let x = r.add(&r.mul(&a.x, &b.x), &ayy);
        let mut y = r.add(&r.mul(&a.x, &b.y), &r.mul(&a.y, &b.x));
        if self.beta != 0 {
            y = r.add(&y, &yy);
        }
        QElem { x, y }
    }
    fn mul_series(&self, a: &QElem, s: &Series) -> QElem {
        QElem { x: self.ring.mul(&a.x, s), y: self.ring.mul(&a.y, s) }
    }
    fn mul_poly(&self, a: &QElem, p: &Poly) -> QElem {
        QElem { x: self.ring.mul_poly(&a.x, p), y: self.ring.mul_poly(&a.y, p) }
    }
    fn scale(&self, a: &QElem, c: Fe) -> QElem {
        QElem { x: self.ring.scale(&a.x, c), y: self.ring.scale(&a.y, c) }
    }
    fn inv(&self, a: &QElem) -> Result<QElem> {
        let n = self.norm(a)?;
        let ni = self.ring.inv(&n)?;
        let c = self.conj(a);
        Ok(self.mul_series(&c, &ni))
    }
    fn frob(&self, a: &QElem) -> QElem {
        let r = &self.ring;
        let xq = r.frob(&a.x);
        let yq = r.frob(&a.y);
        let (un, ud) = &self.frob_u;
        let (wn, wd) = &self.frob_w;
        let mut x = xq;
        if !un.is_zero() {
            x = r.add(&x, &mul_ratio(r, &yq, un, ud).expect("nonzero denominator"));
        }
        let y = if wn.is_zero() { Series::zero(EXACT) } else { mul_ratio(r, &yq, wn, wd).expect("nonzero denominator") };
        QElem { x, y }
    }
    fn val2(&self, a: &QElem) -> i64 {
        (2 * a.x.v).min(2 * a.y.v + self.v2xi)
    }
    fn prec2(&self, a: &QElem) -> i64 {
        (2 * a.x.prec).min(2 * a.y.prec + self.v2xi)
    }
    fn truncate2(&self, a: &QElem, p2: i64) -> QElem {
        QElem { x: a.x.truncated(p2.div_euclid(2)), y: a.y.truncated((p2 - self.v2xi).div_euclid(2)) }
    }
    fn from_series(&self, s: Series) -> QElem {
        QElem { y: Series::zero(EXACT), x: s }
    }
    fn embed(&self, z: &QuadElem, rel2: i64) -> Result<QElem> {
        let r = &self.ring;
        let d = z.den.deg();
        let v2x = if z.x.is_zero() { EXACT } else { 2 * (d - z.x.deg()) };
        let v2y = if z.y.is_zero() { EXACT } else { 2 * (d - z.y.deg()) + self.v2xi };
        let p2 = v2x.min(v2y) + rel2;
        let px = (p2 + 1).div_euclid(2);
        let py = (p2 - self.v2xi + 1).div_euclid(2);
        Ok(QElem { x: series_from_ratio(r, &z.x, &z.den, px)?, y: series_from_ratio(r, &z.y, &z.den, py)? })
    }
    fn flat(&self, a: &QElem) -> Option<Series> {
        a.y.is_zero().then(|| a.x.clone())
    }
    fn parts(&self, a: &QElem) -> LocalVal {
        LocalVal { x: a.x.clone(), y: a.y.clone() }
    }
    fn from_parts(&self, v: &LocalVal) -> QElem {
        QElem { x: v.x.clone(), y: v.y.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn odd_field(q: u32, d: &str) -> QuadField {
        let fl = Fields::new(q).unwrap();
        let r = PolyRing::new(&fl.fq);
        let d = r.parse(d).unwrap();
        QuadField::odd_from_disc(&fl, &d).unwrap().0
    }

    #[test]
    fn validation_odd() {
        let fl = Fields::new(3).unwrap();
        let r = PolyRing::new(&fl.fq);
        let (k, f) = QuadField::odd_from_disc(&fl, &Poly::t()).unwrap();
        assert!(!k.inert && f.is_one());
        let (k, _) = QuadField::odd_from_disc(&fl, &r.parse("T-T^2").unwrap()).unwrap();
        assert!(k.inert);
        assert!(QuadField::odd_from_disc(&fl, &r.parse("T^2").unwrap()).is_err());
        assert!(QuadField::odd_from_disc(&fl, &Poly::zero()).is_err());
        let (k, f) = QuadField::odd_from_disc(&fl, &r.parse("2*T^3").unwrap()).unwrap();
        assert_eq!(f, Poly::t());
        assert_eq!(k.dk().unwrap(), r.parse("2*T").unwrap());
        assert!(Order::from_disc(&fl, &Poly::constant(2)).is_err());
        let o = Order::from_disc(&fl, &r.parse("2*T^2").unwrap()).unwrap();
        assert_eq!(o.unit_index(), 4);
        assert_eq!(o.disc().unwrap(), r.parse("2*T^2").unwrap());
    }

    #[test]
    fn validation_even() {
        let fl = Fields::new(2).unwrap();
        let r = PolyRing::new(&fl.fq);
        let k = QuadField::even_sep(&fl, &r.parse("T^2+1").unwrap(), &r.parse("T").unwrap()).unwrap();
        match &k.data {
            FieldData::EvenSep { g, rad_g, c, .. } => {
                assert_eq!(g, &Poly::t());
                assert_eq!(r.square(g), r.mul(c, rad_g));
            }
            _ => unreachable!(),
        }
        assert!(!k.inert);
        let k = QuadField::even_sep(&fl, &r.parse("T+1").unwrap(), &r.parse("T^3").unwrap());
        assert!(k.is_err());
        let k = QuadField::even_sep(&fl, &r.parse("T^3+T+1").unwrap(), &r.parse("T^3").unwrap()).unwrap();
        assert!(k.inert);
        match &k.data {
            FieldData::EvenSep { g, rad_g, c, .. } => assert_eq!(r.square(g), r.mul(c, rad_g)),
            _ => unreachable!(),
        }
        assert!(QuadField::even_sep(&fl, &r.parse("T^2").unwrap(), &Poly::one()).is_err());
        assert!(QuadField::even_sep(&fl, &r.parse("T^2+1").unwrap(), &r.parse("T^2").unwrap()).is_err());
        assert!(QuadField::even_sep(&fl, &r.parse("T^2+1").unwrap(), &r.parse("T+1").unwrap()).is_err());
        let k = QuadField::even_sep(&fl, &Poly::one(), &Poly::one()).unwrap();
        assert!(k.is_constant_extension());
        assert!(Order::new(k.clone(), Poly::one()).is_err());
        let o = Order::new(k, Poly::t()).unwrap();
        assert_eq!(o.disc().unwrap(), r.parse("T^2").unwrap());
        let f = QuadField::even_insep(&fl).unwrap();
        let o = Order::new(f, Poly::t()).unwrap();
        assert!(o.disc().is_none());
        assert_eq!(o.size_log(), 3);
    }

    #[test]
    fn chi_examples() {
        let k = odd_field(3, "T-T^2");
        let r = k.ring();
        assert_eq!(k.chi_prime(&Poly::t()).unwrap(), 0);
        assert_eq!(k.chi_prime(&r.parse("T+1").unwrap()).unwrap(), 1);
        assert_eq!(k.chi_prime(&r.parse("T+2").unwrap()).unwrap(), 0);
        assert!(k.chi_prime(&r.parse("T^2+2*T+1").unwrap()).is_err());
    }

    /// χ(P) = 1 iff the defining equation has a root modulo P, by brute force.
    #[test]
    fn chi_matches_root_search() {
        for (q, d) in [(3, "T^3+2*T+1"), (3, "2*T^2+T+1"), (5, "T^3+T+3")] {
            let k = odd_field(q, d);
            let r = k.ring();
            let dk = k.dk().unwrap();
            for n in 1..=3 {
                for p in Poly::monics(q, n).filter(|p| r.is_irreducible(p)) {
                    let has_root = Poly::all_below(q, n).any(|x| r.rem(&r.sub(&r.square(&x), &dk), &p).is_zero());
                    let c = k.chi_prime(&p).unwrap();
                    let expect = if r.divides(&p, &dk) { 0 } else if has_root { 1 } else { -1 };
                    assert_eq!(c, expect);
                }
            }
        }
        let fl = Fields::new(2).unwrap();
        let r = PolyRing::new(&fl.fq);
        for (b, c) in [("T^2+1", "T"), ("T^5+T^2+1", "T^2+T+1"), ("T^3+T+1", "1")] {
            let k = QuadField::even_sep(&fl, &r.parse(b).unwrap(), &r.parse(c).unwrap()).unwrap();
            let (b, c) = (r.parse(b).unwrap(), r.parse(c).unwrap());
            for n in 1..=4 {
                for p in Poly::monics(2, n).filter(|p| r.is_irreducible(p)) {
                    let ch = k.chi_prime(&p).unwrap();
                    if r.divides(&p, &c) {
                        assert_eq!(ch, 0);
                        continue;
                    }
                    // x²C + xC ≡ B (mod P).
                    let has_root = Poly::all_below(2, n).any(|x| {
                        let lhs = r.mul(&r.add(&r.square(&x), &x), &c);
                        r.rem(&r.sub(&lhs, &b), &p).is_zero()
                    });
                    assert_eq!(ch, if has_root { 1 } else { -1 });
                }
            }
        }
    }

    #[test]
    fn conj_properties() {
        let fl = Fields::new(2).unwrap();
        let r = PolyRing::new(&fl.fq);
        let k = QuadField::even_sep(&fl, &r.parse("T^2+1").unwrap(), &r.parse("T").unwrap()).unwrap();
        let xi = QuadElem { x: Poly::zero(), y: Poly::one(), den: Poly::one() };
        let cxi = k.conj(&xi);
        assert_eq!(cxi, QuadElem { x: Poly::one(), y: Poly::one(), den: Poly::one() });
        let prod = k.elem_mul(&xi, &cxi);
        // ξ·ξ̄ = B/C.
        assert!(prod.y.is_zero());
        assert_eq!(r.mul(&prod.x, &r.parse("T").unwrap()), r.mul(&r.parse("T^2+1").unwrap(), &prod.den));
        assert_eq!(k.conj(&k.conj(&cxi)), cxi);
    }

    #[test]
    fn embed_sqrt_example() {
        let k = odd_field(3, "T-T^2");
        let alg = FlatAlg::new(&k).unwrap();
        let z = QuadElem { x: Poly::zero(), y: Poly::one(), den: Poly::one() };
        let s = alg.embed(&z, 40).unwrap();
        assert_eq!(s.v, -1);
        let e = s.lead();
        let f2 = alg.ring.f();
        assert_eq!(f2.mul(e, e), alg.ring.fl.emb(2));
        let sq = alg.mul(&s, &s);
        let d = alg.ring.from_poly(&k.ring().parse("T-T^2").unwrap(), EXACT);
        assert!(alg.ring.agree(&sq, &d));
    }

    #[test]
    fn insep_sqrt_t_valuation() {
        let fl = Fields::new(2).unwrap();
        let k = QuadField::even_insep(&fl).unwrap();
        let alg = QuadAlg::new(&k).unwrap();
        let z = QuadElem { x: Poly::zero(), y: Poly::one(), den: Poly::one() };
        let e = alg.embed(&z, 20).unwrap();
        assert_eq!(alg.val2(&e), -1);
        assert_eq!(k.val2(&z), -1);
        // (√T)^2 = T.
        let sq = alg.mul(&e, &e);
        assert_eq!(alg.flat(&sq).unwrap().v, -1);
    }

    fn check_norms<A: LocalAlg>(alg: &A, k: &QuadField, seeds: &[(u64, u64, u64)]) {
        let q = k.fl.q;
        for &(a, b, c) in seeds {
            let z = QuadElem { x: Poly::from_index(a, q), y: Poly::from_index(b, q), den: Poly::from_index(c + 1, q) };
            if z.x.is_zero() && z.y.is_zero() {
                continue;
            }
            let e = alg.embed(&z, 30).unwrap();
            assert_eq!(alg.val2(&e), k.val2(&z));
            assert!(alg.prec2(&e) - alg.val2(&e) >= 30);
            // Exact norm versus z·z̄ computed in the algebra and versus |z|².
            let (nn, nd) = k.norm(&z);
            let zc = alg.embed(&k.conj(&z), 30).unwrap();
            let prod = alg.mul(&e, &zc);
            let flat = alg.flat(&prod).unwrap_or_else(|| panic!("z·z̄ must lie in k_∞"));
            let r = &alg.ring();
            let expect = r.div_poly(&r.from_poly(&nn, flat.prec - nd.deg()), &nd).unwrap();
            assert!(r.agree(&flat, &expect));
            let inv = alg.inv(&e).unwrap();
            let one = alg.mul(&e, &inv);
            assert!(r.agree(&alg.flat(&one).unwrap(), &r.one(EXACT)));
            // Frobenius is multiplicative.
            let f1 = alg.frob(&alg.mul(&e, &zc));
            let f2 = alg.mul(&alg.frob(&e), &alg.frob(&zc));
            assert!(alg.is_zero(&alg.sub(&f1, &f2)));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn norms_all_flavors(seeds in prop::collection::vec((0u64..500, 0u64..500, 0u64..60), 4)) {
            let k = odd_field(3, "T-T^2");
            check_norms(&FlatAlg::new(&k).unwrap(), &k, &seeds);
            let k = odd_field(3, "T^3+2*T+1");
            check_norms(&QuadAlg::new(&k).unwrap(), &k, &seeds);
            let fl = Fields::new(2).unwrap();
            let r = PolyRing::new(&fl.fq);
            let k = QuadField::even_sep(&fl, &r.parse("T^2+1").unwrap(), &r.parse("T").unwrap()).unwrap();
            check_norms(&QuadAlg::new(&k).unwrap(), &k, &seeds);
            let k = QuadField::even_sep(&fl, &r.parse("T^2+T+1").unwrap(), &r.parse("T^2+T+1").unwrap());
            prop_assert!(k.is_err());
            let k = QuadField::even_sep(&fl, &r.parse("T^3+T+1").unwrap(), &r.parse("T^2+1").unwrap());
            prop_assert!(k.is_err());
            let k = QuadField::even_sep(&fl, &r.parse("T^3+T+1").unwrap(), &r.parse("T^3").unwrap()).unwrap();
            check_norms(&FlatAlg::new(&k).unwrap(), &k, &seeds);
            let k = QuadField::even_insep(&fl).unwrap();
            check_norms(&QuadAlg::new(&k).unwrap(), &k, &seeds);
            let fl4 = Fields::new(4).unwrap();
            let r4 = PolyRing::new(&fl4.fq);
            let k = QuadField::even_sep(&fl4, &r4.parse("T^3+2").unwrap(), &Poly::one()).unwrap();
            check_norms(&QuadAlg::new(&k).unwrap(), &k, &seeds);
        }
    }
}
