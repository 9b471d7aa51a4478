//! Counting bounds for quadratic congruences over A, analytic estimates for
//! divisor statistics, the upper and lower bounds for the height of a
//! singular modulus, the isogeny height shift and the explicit discriminant
//! certificate.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cm::CmPoint;
use crate::error::{Error, Result};
use crate::ffield::Fields;
use crate::interval::{ln2, Interval};
use crate::laurent::{Series, EXACT};
use crate::poly::{count_monic_irreducibles, Poly, PolyRing};
use crate::quad::{FieldData, FlatAlg, Order, QuadField};

fn br(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// q^e as an exact rational, e of any sign.
fn qpow_r(q: u32, e: i64) -> BigRational {
    let b = br(q as i64);
    if e >= 0 {
        num_traits::pow(b, e as usize)
    } else {
        num_traits::pow(b, (-e) as usize).recip()
    }
}

fn lnq(q: u32) -> Interval {
    static CACHE: OnceLock<Mutex<HashMap<u32, Interval>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("ln cache").get(&q) {
        return v.clone();
    }
    let v = Interval::int(q as i64).ln();
    cache.lock().expect("ln cache").insert(q, v.clone());
    v
}

fn rat_i(x: &BigRational) -> Interval {
    Interval::exact(x.clone())
}

fn logq(x: &Interval, q: u32) -> Interval {
    x.ln().div(&lnq(q))
}

/// Whether |x| < ε·|a| when log_q |x| = deg (None for x = 0).
fn within(q: u32, deg: Option<i64>, deg_a: i64, eps: &BigRational) -> bool {
    match deg {
        None => true,
        Some(d) => qpow_r(q, d - deg_a) < *eps,
    }
}

fn poly_deg(x: &Poly) -> Option<i64> {
    (!x.is_zero()).then(|| x.deg())
}

// ---------------------------------------------------------------------------
// Quadratic congruences

/// The congruence b² ≡ D (mod a) for odd q, or b² + δb ≡ μ (mod a) for even q.
#[derive(Clone, Debug)]
pub enum Congruence {
    Square { d: Poly },
    ArtinSchreier { delta: Poly, mu: Poly },
}

impl Congruence {
    fn value(&self, r: &PolyRing, b: &Poly) -> Poly {
        match self {
            Congruence::Square { d } => r.sub(&r.square(b), d),
            Congruence::ArtinSchreier { delta, mu } => r.sub(&r.add(&r.square(b), &r.mul(delta, b)), mu),
        }
    }

    /// The polynomial whose square-part with a gives the class modulus.
    fn gcd2_target(&self, r: &PolyRing) -> Poly {
        match self {
            Congruence::Square { d } => d.clone(),
            Congruence::ArtinSchreier { delta, .. } => r.square(delta),
        }
    }

    /// The same congruence with its data reduced modulo a.
    pub fn reduced(&self, r: &PolyRing, a: &Poly) -> Congruence {
        match self {
            Congruence::Square { d } => Congruence::Square { d: r.rem(d, a) },
            Congruence::ArtinSchreier { delta, mu } => {
                Congruence::ArtinSchreier { delta: r.rem(delta, a), mu: r.rem(mu, a) }
            }
        }
    }
}

/// βδ = b₁ + ζ with b₁ ∈ A and |ζ| < 1; `zeta_deg` bounds log_q |ζ| from
/// above (it is exact when ζ was resolved).
#[derive(Clone, Debug, Serialize)]
pub struct Shift {
    pub b1: Poly,
    pub zeta_deg: Option<i64>,
}

impl Shift {
    pub fn none() -> Shift {
        Shift { b1: Poly::zero(), zeta_deg: None }
    }
}

/// Solutions modulo P^s and the at most two classes modulo P^m containing them.
#[derive(Clone, Debug, Serialize)]
pub struct PrimeClasses {
    pub p: Poly,
    pub s: u32,
    /// min(v_P of the congruence data, s).
    pub nu: u32,
    /// m with the classes taken modulo P^m.
    pub class_exp: u32,
    pub classes: Vec<Poly>,
    /// Number of solutions modulo P^s.
    pub solutions: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub a: Poly,
    pub omega: u32,
    pub local: Vec<PrimeClasses>,
    /// Solutions modulo a, sorted.
    pub residues: Vec<Poly>,
    /// a / gcd₂(a, D) or a / gcd₂(a, δ²).
    pub class_modulus: Poly,
    /// Number of classes modulo `class_modulus` met by the solutions.
    pub classes: usize,
    pub gcd2: Poly,
}

struct LocalRaw {
    p: Poly,
    s: u32,
    ps: Poly,
}

/// Solves quadratic congruences modulo a fixed monic a, one prime power at a
/// time, and recombines the local solutions by the Chinese remainder theorem.
pub struct CongruenceSolver<'a> {
    r: PolyRing<'a>,
    a: Poly,
    primes: Vec<LocalRaw>,
}

impl<'a> CongruenceSolver<'a> {
    pub fn new(r: PolyRing<'a>, a: &Poly) -> Result<CongruenceSolver<'a>> {
        if !a.is_monic() {
            return Err(Error::Invalid(format!("modulus {a} must be monic")));
        }
        let primes = if a.deg() == 0 {
            vec![]
        } else {
            r.factor(a)?
                .factors
                .into_iter()
                .map(|(p, s)| {
                    let ps = r.pow(&p, s as u64);
                    LocalRaw { p, s, ps }
                })
                .collect()
        };
        Ok(CongruenceSolver { r, a: a.clone(), primes })
    }

    pub fn modulus(&self) -> &Poly {
        &self.a
    }

    fn check_kind(&self, c: &Congruence) -> Result<()> {
        let even = self.r.f.char() == 2;
        match c {
            Congruence::Square { .. } if even => Err(Error::Invalid("b² ≡ D needs odd q".into())),
            Congruence::ArtinSchreier { .. } if !even => Err(Error::Invalid("b² + δb ≡ μ needs even q".into())),
            Congruence::ArtinSchreier { delta, .. } if delta.is_zero() => Err(Error::Invalid("δ = 0".into())),
            Congruence::Square { d } if d.is_zero() => Err(Error::Invalid("D = 0".into())),
            _ => Ok(()),
        }
    }

    /// v_P(x) capped at s, with x = 0 giving s.
    fn capped_val(&self, loc: &LocalRaw, x: &Poly) -> u32 {
        let xm = self.r.rem(x, &loc.ps);
        if xm.is_zero() {
            loc.s
        } else {
            self.r.valuation(&loc.p, &xm)
        }
    }

    fn expand(&self, loc: &LocalRaw, classes: &[Poly], m: u32) -> Vec<Poly> {
        let r = &self.r;
        let step = r.pow(&loc.p, m as u64);
        let free = (loc.p.deg() as u32) * (loc.s - m);
        let mut out = vec![];
        for c in classes {
            for t in Poly::all_below(r.q(), free) {
                out.push(r.add(c, &r.mul(&t, &step)));
            }
        }
        out
    }

    /// b² ≡ D (mod P^s): the class of 0 modulo P^{⌈s/2⌉} when P^s | D, nothing
    /// when v_P(D) < s is odd, and ±P^{ν/2}·√(D/P^ν) modulo P^{s−ν/2} otherwise.
    fn local_square(&self, loc: &LocalRaw, d: &Poly) -> Result<(PrimeClasses, Vec<Poly>)> {
        let r = &self.r;
        let nu = self.capped_val(loc, d);
        let expected_exp = loc.s - (nu / 2).min(loc.s / 2);
        let (classes, m) = if nu >= loc.s {
            (vec![Poly::zero()], loc.s.div_ceil(2))
        } else if nu % 2 == 1 {
            (vec![], expected_exp)
        } else {
            let h = nu / 2;
            let k = loc.s - nu;
            let pk = r.pow(&loc.p, k as u64);
            let pnu = r.pow(&loc.p, nu as u64);
            let d1 = r.rem(&r.div_exact(&r.rem(d, &loc.ps), &pnu).expect("P^ν divides D mod P^s"), &pk);
            let d1p = r.rem(&d1, &loc.p);
            let root = Poly::all_below(r.q(), loc.p.deg() as u32)
                .find(|c| r.rem(&r.sub(&r.square(c), &d1p), &loc.p).is_zero());
            match root {
                None => (vec![], loc.s - h),
                Some(mut x) => {
                    let two = r.f.from_int(2);
                    let mut e = 1u32;
                    while e < k {
                        e = (2 * e).min(k);
                        let m = r.pow(&loc.p, e as u64);
                        let inv = r.inv_mod(&r.scale(&x, two), &m).expect("P does not divide the root");
                        let corr = r.mulmod(&r.sub(&r.square(&x), &d1), &inv, &m);
                        x = r.rem(&r.sub(&x, &corr), &m);
                    }
                    let ph = r.pow(&loc.p, h as u64);
                    let mh = r.pow(&loc.p, (loc.s - h) as u64);
                    let c1 = r.rem(&r.mul(&ph, &x), &mh);
                    let c2 = r.rem(&r.neg(&c1), &mh);
                    (vec![c1, c2], loc.s - h)
                }
            }
        };
        let residues = self.expand(loc, &classes, m);
        let pc = PrimeClasses {
            p: loc.p.clone(),
            s: loc.s,
            nu,
            class_exp: m,
            classes,
            solutions: residues.len(),
        };
        self.verify_local(loc, pc, &Congruence::Square { d: d.clone() }, expected_exp, residues)
    }

    /// b² + δb ≡ μ (mod P^s) by lifting the roots modulo P one power at a time.
    fn local_as(&self, loc: &LocalRaw, delta: &Poly, mu: &Poly) -> Result<(PrimeClasses, Vec<Poly>)> {
        let r = &self.r;
        let cong = Congruence::ArtinSchreier { delta: delta.clone(), mu: mu.clone() };
        let dp = loc.p.deg() as u32;
        let mut sols: Vec<Poly> =
            Poly::all_below(r.q(), dp).filter(|b| r.rem(&cong.value(r, b), &loc.p).is_zero()).collect();
        let mut pk = loc.p.clone();
        for _ in 1..loc.s {
            let pk1 = r.mul(&pk, &loc.p);
            let mut next = vec![];
            for b in &sols {
                for t in Poly::all_below(r.q(), dp) {
                    let c = r.add(b, &r.mul(&t, &pk));
                    if r.rem(&cong.value(r, &c), &pk1).is_zero() {
                        next.push(c);
                    }
                }
            }
            sols = next;
            pk = pk1;
        }
        let nu = self.capped_val(loc, delta);
        let m = loc.s - nu.min(loc.s / 2);
        let pm = r.pow(&loc.p, m as u64);
        let classes = match sols.first() {
            None => vec![],
            Some(b0) => {
                let c0 = r.rem(b0, &pm);
                let c1 = r.rem(&r.sub(b0, delta), &pm);
                if c0 == c1 {
                    vec![c0]
                } else {
                    vec![c0, c1]
                }
            }
        };
        let pc = PrimeClasses {
            p: loc.p.clone(),
            s: loc.s,
            nu,
            class_exp: m,
            classes,
            solutions: sols.len(),
        };
        self.verify_local(loc, pc, &cong, m, sols)
    }

    fn verify_local(
        &self,
        loc: &LocalRaw,
        pc: PrimeClasses,
        cong: &Congruence,
        expected_exp: u32,
        residues: Vec<Poly>,
    ) -> Result<(PrimeClasses, Vec<Poly>)> {
        let r = &self.r;
        let fail = |what: &str| Err(Error::Invariant(format!("modulo {}^{}: {what}", loc.p, loc.s)));
        if pc.classes.len() > 2 {
            return fail("more than two classes");
        }
        if pc.class_exp != expected_exp {
            return fail("class modulus differs from P^{s − min(⌊ν/2⌋, ⌊s/2⌋)}");
        }
        let pm = r.pow(&loc.p, pc.class_exp as u64);
        for b in &residues {
            if !r.rem(&cong.value(r, b), &loc.ps).is_zero() {
                return fail(&format!("{b} is not a solution"));
            }
            if !pc.classes.contains(&r.rem(b, &pm)) {
                return fail(&format!("{b} lies outside the classes"));
            }
        }
        {
            let free = qpow_r(r.q(), loc.p.deg() * (loc.s - pc.class_exp) as i64);
            if br(residues.len() as i64) != br(pc.classes.len() as i64) * free {
                return fail("solutions are not the full union of the classes");
            }
        }
        Ok((PrimeClasses { solutions: residues.len(), ..pc }, residues))
    }

    /// All solutions modulo a with the class structure checked prime by prime
    /// and globally (at most 2^ω classes modulo a / gcd₂).
    pub fn solve(&self, cong: &Congruence) -> Result<Solution> {
        self.check_kind(cong)?;
        let r = &self.r;
        let mut local = vec![];
        let mut local_res = vec![];
        for loc in &self.primes {
            let (pc, res) = match cong {
                Congruence::Square { d } => self.local_square(loc, d)?,
                Congruence::ArtinSchreier { delta, mu } => self.local_as(loc, delta, mu)?,
            };
            local.push(pc);
            local_res.push(res);
        }
        let mut res = vec![Poly::zero()];
        let mut m = Poly::one();
        for (loc, ys) in self.primes.iter().zip(&local_res) {
            let inv = r.inv_mod(&r.rem(&m, &loc.ps), &loc.ps).expect("coprime prime powers");
            let mut next = Vec::with_capacity(res.len() * ys.len());
            for x in &res {
                for y in ys {
                    let t = r.mulmod(&r.sub(y, x), &inv, &loc.ps);
                    next.push(r.add(x, &r.mul(&m, &t)));
                }
            }
            res = next;
            m = r.mul(&m, &loc.ps);
        }
        res.sort();
        // gcd₂(a, X) = ∏ P^{min(⌊s/2⌋, ⌊v_P(X)/2⌋)}, with v_P(0) = ∞.
        let target = cong.gcd2_target(r);
        let mut g = Poly::one();
        for loc in &self.primes {
            let v = self.capped_val(loc, &target);
            g = r.mul(&g, &r.pow(&loc.p, (v / 2).min(loc.s / 2) as u64));
        }
        let mb = r.div_exact(&self.a, &g).expect("gcd₂ divides a");
        let reds: BTreeSet<Poly> = res.iter().map(|b| r.rem(b, &mb)).collect();
        let omega = self.primes.len() as u32;
        if reds.len() > 1usize << omega {
            return Err(Error::Invariant(format!(
                "{} classes modulo {mb} exceed 2^ω = {}",
                reds.len(),
                1u64 << omega
            )));
        }
        {
            let fibre = qpow_r(r.q(), self.a.deg() - mb.deg());
            if br(res.len() as i64) != br(reds.len() as i64) * fibre {
                return Err(Error::Invariant(format!("solutions modulo {} are not a union of classes modulo {mb}", self.a)));
            }
        }
        Ok(Solution { a: self.a.clone(), omega, local, residues: res, class_modulus: mb, classes: reds.len(), gcd2: g })
    }

    /// Card{b : congruence, |b + βδ| < ε|a|} from the solutions modulo a.
    pub fn count(&self, sol: &Solution, eps: &BigRational, shift: &Shift) -> u64 {
        let r = &self.r;
        let q = r.q();
        let da = self.a.deg();
        let mut n = 0;
        for res in &sol.residues {
            // The only b in the class with |b + b₁| < |a| is c − b₁, c = (res + b₁) mod a.
            let c = r.rem(&r.add(res, &shift.b1), &self.a);
            let deg = if c.is_zero() { shift.zeta_deg } else { Some(c.deg()) };
            if within(q, deg, da, eps) {
                n += 1;
            }
        }
        n
    }
}

/// 2^ω · max(1, qε|gcd₂|).
pub fn congruence_bound(q: u32, sol: &Solution, eps: &BigRational) -> BigRational {
    let m = (br(q as i64) * eps * qpow_r(q, sol.gcd2.deg())).max(BigRational::one());
    br(1i64 << sol.omega) * m
}

#[derive(Clone, Debug, Serialize)]
pub struct CongruenceCount {
    pub count: u64,
    pub congruence_bound: String,
    pub solution: Solution,
}

/// Exact count of {b : b² ≡ D (mod a), |b| < ε|a|} (odd q) or
/// {b : b² + δb ≡ μ (mod a), |b + βδ| < ε|a|} (even q), asserting the class
/// structure and the cardinality bound.
pub fn count_congruence(
    r: PolyRing,
    a: &Poly,
    cong: &Congruence,
    eps: &BigRational,
    shift: &Shift,
) -> Result<CongruenceCount> {
    if !eps.is_positive() || *eps > BigRational::one() {
        return Err(Error::Invalid(format!("ε = {eps} outside (0, 1]")));
    }
    let solver = CongruenceSolver::new(r, a)?;
    let solution = solver.solve(cong)?;
    let count = solver.count(&solution, eps, shift);
    let bound = congruence_bound(r.q(), &solution, eps);
    if br(count as i64) > bound {
        return Err(Error::Invariant(format!("count {count} exceeds 2^ω max(1, qε|gcd₂|) = {bound}")));
    }
    Ok(CongruenceCount { count, congruence_bound: bound.to_string(), solution })
}

/// The same count by testing every b with deg b < max(deg a, deg b₁ + 1) + 2.
pub fn count_brute_force(r: PolyRing, a: &Poly, cong: &Congruence, eps: &BigRational, shift: &Shift) -> u64 {
    let q = r.q();
    let width = (a.deg().max(shift.b1.deg() + 1) + 2) as u32;
    let mut n = 0;
    for b in Poly::all_below(q, width) {
        if !r.rem(&cong.value(&r, &b), a).is_zero() {
            continue;
        }
        let c = r.add(&b, &shift.b1);
        let deg = if c.is_zero() { shift.zeta_deg } else { Some(c.deg()) };
        if within(q, deg, a.deg(), eps) {
            n += 1;
        }
    }
    n
}

#[derive(Clone, Debug, Serialize)]
pub struct CongruenceSweep {
    pub q: u32,
    pub max_deg_a: u32,
    pub max_deg_data: u32,
    /// Number of (a, data) instances checked.
    pub instances: u64,
    /// Number of distinct (a, data mod a) solution sets constructed.
    pub constructions: u64,
    pub epsilons: Vec<String>,
    pub failures: Vec<String>,
}

impl CongruenceSweep {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn sweep_epsilons(q: u32) -> Vec<BigRational> {
    vec![BigRational::one(), BigRational::new(1.into(), 2.into()), qpow_r(q, -1), qpow_r(q, -2)]
}

/// Compares the constructed solution sets and counts with a brute-force
/// table for every monic a with deg a ≤ `max_deg_a` and every congruence
/// datum of degree ≤ `max_deg_data` (D ≠ 0 for odd q; δ ≠ 0 and μ for
/// even q). All checked quantities depend on the data only modulo a, so the
/// verdict for each residue is computed once and reused.
pub fn congruence_sweep(q: u32, max_deg_a: u32, max_deg_data: u32) -> Result<CongruenceSweep> {
    let fl = Fields::new(q)?;
    let r = PolyRing::new(&fl.fq);
    let even = fl.fq.char() == 2;
    let epss = sweep_epsilons(q);
    let mut rep = CongruenceSweep {
        q,
        max_deg_a,
        max_deg_data,
        instances: 0,
        constructions: 0,
        epsilons: epss.iter().map(|e| e.to_string()).collect(),
        failures: vec![],
    };
    let data: Vec<Poly> = Poly::all_below(q, max_deg_data + 1).collect();
    for da in 0..=max_deg_a {
        for a in Poly::monics(q, da) {
            let solver = CongruenceSolver::new(r, &a)?;
            let bs: Vec<Poly> = Poly::all_below(q, da + 2).collect();
            let mut verdicts: HashMap<(Poly, Poly), bool> = HashMap::new();
            let mut check = |cong: Congruence, key: (Poly, Poly), rep: &mut CongruenceSweep, table: &HashMap<Poly, Vec<Poly>>| {
                rep.instances += 1;
                if let Some(&ok) = verdicts.get(&key) {
                    if !ok {
                        rep.failures.push(format!("a = {a}, {cong:?}: see first failure for this residue"));
                    }
                    return;
                }
                rep.constructions += 1;
                let ok = match sweep_one(&solver, &cong, &key.0, table, &epss, q) {
                    Ok(()) => true,
                    Err(e) => {
                        rep.failures.push(format!("a = {a}, {cong:?}: {e}"));
                        false
                    }
                };
                verdicts.insert(key, ok);
            };
            if !even {
                let mut table: HashMap<Poly, Vec<Poly>> = HashMap::new();
                for b in &bs {
                    table.entry(r.rem(&r.square(b), &a)).or_default().push(b.clone());
                }
                for d in data.iter().filter(|d| !d.is_zero()) {
                    let key = (r.rem(d, &a), Poly::zero());
                    check(Congruence::Square { d: d.clone() }, key, &mut rep, &table);
                }
            } else {
                for delta in data.iter().filter(|d| !d.is_zero()) {
                    let dm = r.rem(delta, &a);
                    let mut table: HashMap<Poly, Vec<Poly>> = HashMap::new();
                    for b in &bs {
                        table.entry(r.rem(&r.add(&r.square(b), &r.mul(&dm, b)), &a)).or_default().push(b.clone());
                    }
                    for mu in &data {
                        let key = (r.rem(mu, &a), dm.clone());
                        check(Congruence::ArtinSchreier { delta: delta.clone(), mu: mu.clone() }, key, &mut rep, &table);
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// `table` maps the value of the congruence polynomial at b (mod a) to the
/// b with deg b < deg a + 2 attaining it; `target` is the residue to match.
fn sweep_one(
    solver: &CongruenceSolver,
    cong: &Congruence,
    target: &Poly,
    table: &HashMap<Poly, Vec<Poly>>,
    epss: &[BigRational],
    q: u32,
) -> Result<()> {
    let a = solver.modulus();
    let sol = solver.solve(cong)?;
    // The table is keyed by b² (+ δb) mod a, so the solutions are the b with key D (or μ).
    let brute: Vec<&Poly> = table.get(target).map(|v| v.iter().collect()).unwrap_or_default();
    let mut reduced: Vec<Poly> =
        brute.iter().filter(|b| b.is_zero() || b.deg() < a.deg()).map(|b| (*b).clone()).collect();
    reduced.sort();
    if reduced != sol.residues {
        return Err(Error::Invariant(format!(
            "constructed {} residues, brute force {}",
            sol.residues.len(),
            reduced.len()
        )));
    }
    for eps in epss {
        let n = solver.count(&sol, eps, &Shift::none());
        let nb = brute.iter().filter(|b| within(q, poly_deg(b), a.deg(), eps)).count() as u64;
        if n != nb {
            return Err(Error::Invariant(format!("ε = {eps}: count {n}, brute force {nb}")));
        }
        let bound = congruence_bound(q, &sol, eps);
        if br(n as i64) > bound {
            return Err(Error::Invariant(format!("ε = {eps}: count {n} exceeds {bound}")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidueCounting {
    pub q: u32,
    pub max_deg_m: u32,
    pub cases: u64,
    /// Largest count / max(1, qM/|m|) seen.
    pub worst_ratio: String,
    pub failures: Vec<String>,
}

/// Card{b ≡ b₀ (mod m), |b| < M} ≤ max(1, qM/|m|) for every monic m with
/// deg m ≤ `max_deg_m`, every b₀ mod m, and M ∈ {q^k, q^k·1001/1000}.
pub fn residue_count_sweep(q: u32, max_deg_m: u32) -> Result<ResidueCounting> {
    let fl = Fields::new(q)?;
    let r = PolyRing::new(&fl.fq);
    let mut rep =
        ResidueCounting { q, max_deg_m, cases: 0, worst_ratio: "0".into(), failures: vec![] };
    let mut worst = BigRational::zero();
    let factors = [BigRational::one(), BigRational::new(1001.into(), 1000.into())];
    for dm in 0..=max_deg_m {
        let top = dm + 3;
        for m in Poly::monics(q, dm) {
            // counts[residue][k] = #{b ≡ residue, deg b < k}.
            let mut counts: HashMap<Poly, Vec<u64>> = HashMap::new();
            for b in Poly::all_below(q, top + 1) {
                let e = counts.entry(r.rem(&b, &m)).or_insert_with(|| vec![0; top as usize + 2]);
                let start = if b.is_zero() { 0 } else { b.deg() as usize + 1 };
                for slot in e.iter_mut().skip(start) {
                    *slot += 1;
                }
            }
            for b0 in Poly::all_below(q, dm) {
                let row = counts.get(&b0);
                for k in -1..=(top as i64) {
                    for f in &factors {
                        let big_m = qpow_r(q, k) * f;
                        // |b| < M  ⇔  deg b < k, or deg b ≤ k when M > q^k.
                        let kk = if f.is_one() { k } else { k + 1 };
                        let n = if kk <= 0 {
                            u64::from(b0.is_zero() && kk == 0 || b0.is_zero() && kk > 0)
                        } else {
                            row.map_or(0, |v| v[(kk as usize).min(v.len() - 1)])
                        };
                        let n = if kk == 0 { u64::from(b0.is_zero()) } else { n };
                        let bound = (br(q as i64) * &big_m / qpow_r(q, dm as i64)).max(BigRational::one());
                        rep.cases += 1;
                        let ratio = br(n as i64) / &bound;
                        if ratio > worst {
                            worst = ratio.clone();
                        }
                        if br(n as i64) > bound {
                            rep.failures.push(format!("m = {m}, b0 = {b0}, M = {big_m}: {n} > {bound}"));
                        }
                    }
                }
            }
        }
    }
    rep.worst_ratio = worst.to_string();
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Analytic estimates

#[derive(Clone, Debug, Serialize)]
pub struct DegreeStats {
    pub n: u32,
    pub monics: u64,
    pub irreducibles: u64,
    pub irreducibles_formula: u128,
    /// a_n ≤ q^n and a_n ≤ q^n/n + (2/3)q^{n/2}.
    pub an_bounds: bool,
    pub max_omega: u32,
    pub max_divisors: u64,
    /// max σ₁(f)/|f|, against deg f + 1.
    pub max_sigma_ratio: String,
    pub sigma_ok: bool,
    /// max ∏_{P|f}(1 − 1/|P|)^{-1} / deg f.
    pub max_mertens_ratio: String,
    pub mertens_ok: bool,
    pub mertens37_ok: bool,
    /// log_q d ≤ 15 n / log_q n (n ≥ 2).
    pub divisor_ok: Option<bool>,
    /// ω ≤ (15/log_q 2) n / log_q n (n ≥ 2).
    pub omega_ok: Option<bool>,
    /// max log_q d · log_q n / n.
    pub divisor_constant: Option<Interval>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticReport {
    pub q: u32,
    pub max_deg: u32,
    /// e^{1 + (2/3)/(√q − 1) + 1/(q − 1)}.
    pub mertens_constant: Interval,
    pub mertens_constant_le_37: bool,
    pub degrees: Vec<DegreeStats>,
}

impl AnalyticReport {
    pub fn ok(&self) -> bool {
        self.mertens_constant_le_37
            && self.degrees.iter().all(|d| {
                d.monics == 0
                    || (d.irreducibles as u128 == d.irreducibles_formula
                        && d.an_bounds
                        && d.sigma_ok
                        && d.mertens_ok
                        && d.mertens37_ok
                        && d.divisor_ok != Some(false)
                        && d.omega_ok != Some(false))
            })
    }
}

#[derive(Clone, Copy)]
struct Acc {
    deg: u32,
    omega: u32,
    d: u64,
    sigma1: u128,
    mert_num: u128,
    mert_den: u128,
}

struct Tally {
    monics: u64,
    max_omega: u32,
    max_d: u64,
    sigma: (u128, u128),
    mert: (u128, u128),
    sigma_ok: bool,
    mert37_ok: bool,
}

fn dfs(irr: &[(u32, u128)], start: usize, acc: Acc, max_deg: u32, q: u128, t: &mut [Tally]) {
    for i in start..irr.len() {
        let (dp, np) = irr[i];
        if acc.deg + dp > max_deg {
            break;
        }
        let mut e = 1u32;
        let mut pe = np;
        let mut geo = 1 + np;
        while acc.deg + e * dp <= max_deg {
            let nacc = Acc {
                deg: acc.deg + e * dp,
                omega: acc.omega + 1,
                d: acc.d * (e as u64 + 1),
                sigma1: acc.sigma1 * geo,
                mert_num: acc.mert_num * np,
                mert_den: acc.mert_den * (np - 1),
            };
            let n = nacc.deg as usize;
            let tl = &mut t[n];
            tl.monics += 1;
            tl.max_omega = tl.max_omega.max(nacc.omega);
            tl.max_d = tl.max_d.max(nacc.d);
            let size = q.pow(nacc.deg);
            // σ₁/|f| ≤ n + 1.
            if nacc.sigma1 > (n as u128 + 1) * size {
                tl.sigma_ok = false;
            }
            if nacc.sigma1 * tl.sigma.1 > tl.sigma.0 * size {
                tl.sigma = (nacc.sigma1, size);
            }
            if nacc.mert_num > 37 * n as u128 * nacc.mert_den {
                tl.mert37_ok = false;
            }
            if nacc.mert_num * tl.mert.1 > tl.mert.0 * nacc.mert_den * n as u128 {
                tl.mert = (nacc.mert_num, nacc.mert_den * n as u128);
            }
            dfs(irr, i + 1, nacc, max_deg, q, t);
            e += 1;
            pe *= np;
            geo += pe;
        }
    }
}

/// Divisor statistics of every monic polynomial of degree ≤ `max_deg`
/// (the statistics are invariant under units), built from the complete
/// list of monic irreducibles found by testing every monic polynomial.
pub fn analytic_sweep(q: u32, max_deg: u32) -> Result<AnalyticReport> {
    if q.checked_pow(max_deg).is_none_or(|x| x > 1 << 24) {
        return Err(Error::Invalid(format!("q^{max_deg} is beyond the exhaustive range")));
    }
    let fl = Fields::new(q)?;
    let r = PolyRing::new(&fl.fq);
    let mut irr: Vec<(u32, u128)> = vec![];
    let mut an = vec![0u64; max_deg as usize + 1];
    for n in 1..=max_deg {
        for p in Poly::monics(q, n) {
            if r.is_irreducible(&p) {
                an[n as usize] += 1;
                irr.push((n, (q as u128).pow(n)));
            }
        }
    }
    let mut tallies: Vec<Tally> = (0..=max_deg)
        .map(|_| Tally {
            monics: 0,
            max_omega: 0,
            max_d: 0,
            sigma: (0, 1),
            mert: (0, 1),
            sigma_ok: true,
            mert37_ok: true,
        })
        .collect();
    let one = Acc { deg: 0, omega: 0, d: 1, sigma1: 1, mert_num: 1, mert_den: 1 };
    dfs(&irr, 0, one, max_deg, q as u128, &mut tallies);

    let lq = lnq(q);
    let sq = Interval::int(q as i64).sqrt();
    let mc = Interval::int(1)
        .add(&Interval::ratio(2, 3).div(&sq.sub(&Interval::int(1))))
        .add(&Interval::ratio(1, q as i64 - 1))
        .exp();
    let mc37 = mc.certainly_le(&Interval::int(37));
    let mut degrees = vec![];
    for n in 1..=max_deg {
        let t = &tallies[n as usize];
        let qn = br(q as i64).pow(n as i32);
        let a = br(an[n as usize] as i64);
        // a_n ≤ q^n/n + (2/3) q^{n/2}  ⇔  x ≤ 0 or 9x² ≤ 4q^n with x = a_n − q^n/n.
        let x = &a - &qn / br(n as i64);
        let rosen = !x.is_positive() || br(9) * &x * &x <= br(4) * &qn;
        let an_bounds = a <= qn && rosen;
        let mert = BigRational::new(BigInt::from(t.mert.0), BigInt::from(t.mert.1));
        let mertens_ok = rat_i(&mert).certainly_le(&mc);
        let (divisor_ok, omega_ok, constant) = if n >= 2 {
            let ln_n = Interval::int(n as i64).ln();
            let rhs = lq.square().scale(15 * n as i64);
            let ln_d = Interval::int(t.max_d as i64).ln();
            let lhs_d = ln_d.mul(&ln_n);
            let lhs_w = ln2().scale(t.max_omega as i64).mul(&ln_n);
            let c = lhs_d.div(&lq.square().scale(n as i64));
            (Some(lhs_d.certainly_le(&rhs)), Some(lhs_w.certainly_le(&rhs)), Some(c))
        } else {
            (None, None, None)
        };
        degrees.push(DegreeStats {
            n,
            monics: t.monics,
            irreducibles: an[n as usize],
            irreducibles_formula: count_monic_irreducibles(q, n)?,
            an_bounds,
            max_omega: t.max_omega,
            max_divisors: t.max_d,
            max_sigma_ratio: BigRational::new(BigInt::from(t.sigma.0), BigInt::from(t.sigma.1)).to_string(),
            sigma_ok: t.sigma_ok,
            max_mertens_ratio: mert.to_string(),
            mertens_ok,
            mertens37_ok: t.mert37_ok,
            divisor_ok,
            omega_ok,
            divisor_constant: constant,
        });
        if t.monics != (q as u64).pow(n) {
            return Err(Error::Invariant(format!("degree {n}: {} monic products, expected q^n", t.monics)));
        }
    }
    Ok(AnalyticReport { q, max_deg, mertens_constant: mc, mertens_constant_le_37: mc37, degrees })
}

// ---------------------------------------------------------------------------
// Points near elliptic points

/// log_q of the discriminant size: deg D (separable flavors).
fn disc_deg(order: &Order) -> Result<i64> {
    order.disc().map(|d| d.deg()).ok_or_else(|| Error::Invalid("k(√T) has no discriminant".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct NearPoint {
    pub a: Poly,
    pub b: Poly,
    pub eps_log: i64,
    /// |a| = |D|^{1/2} (odd q) or |a| = |fG| (even q).
    pub abs_a: bool,
    /// |b| < ε|a| (odd q) or |b + βfG| < ε|a| (even q).
    pub b_small: bool,
    /// |√D/(2e) − a| < ε|a| (odd q) or |fG − a| < ε|a| (even q).
    pub a_close: bool,
    /// ξ − e ∈ k_∞ (even q).
    pub beta_rational: Option<bool>,
}

impl NearPoint {
    pub fn ok(&self) -> bool {
        self.abs_a && self.b_small && self.a_close && self.beta_rational != Some(false)
    }
}

/// Whether |s| < q^bound; a series that vanishes to its precision counts as small
/// when the precision reaches the bound.
fn series_below(s: &Series, bound: i64) -> bool {
    if s.is_zero() {
        -s.prec < bound
    } else {
        s.deg() < bound
    }
}

fn series_t_part(alg: &FlatAlg, s: &Series) -> Result<Shift> {
    let fl = &alg.field.fl;
    let top = s.deg().max(0);
    let mut c = vec![];
    for k in 0..=top {
        let x = s.coeff_t(k);
        c.push(fl.restrict(x).ok_or_else(|| Error::Invariant("βδ has a coefficient outside F_q".into()))?);
    }
    let frac = alg.ring.sub(s, &alg.ring.from_poly(&Poly::new(c.clone()), EXACT));
    let zeta_deg = if frac.is_zero() { Some(-frac.prec) } else { Some(frac.deg()) };
    Ok(Shift { b1: Poly::new(c), zeta_deg })
}

fn beta_series(order: &Order, alg: &FlatAlg, e: u16, rel: i64) -> Result<(Series, bool)> {
    let xi = alg.xi(rel)?;
    let beta = alg.ring.sub(&xi, &alg.ring.constant(e, EXACT));
    let fl = order.fl();
    let rational = beta.c.iter().all(|&x| fl.restrict(x).is_some());
    Ok((beta, rational))
}

/// The near-elliptic-point inequalities for a point with |z − e| < q^{eps_log},
/// or None when the point is farther away.
pub fn near_point_check(order: &Order, alg: &FlatAlg, pt: &CmPoint, eps_log: i64) -> Result<Option<NearPoint>> {
    let Some(nb) = pt.neighbor else { return Ok(None) };
    if nb.dist_deg >= eps_log {
        return Ok(None);
    }
    let r = order.field.ring();
    let ring = &alg.ring;
    let da = pt.a.deg();
    let bound = da + eps_log;
    let rel = 2 * da + 16 - eps_log;
    let small = |x: &Poly| x.is_zero() || x.deg() < bound;
    match &order.field.data {
        FieldData::Odd { .. } => {
            let dd = disc_deg(order)?;
            let sqrt_d = ring.mul_poly(&alg.xi(rel)?, &order.f);
            let f2 = &order.fl().fq2;
            let inv2e = f2.inv(f2.mul(order.fl().emb(order.fl().fq.from_int(2)), nb.e));
            let s = ring.sub(&ring.scale(&sqrt_d, inv2e), &ring.from_poly(&pt.a, EXACT));
            Ok(Some(NearPoint {
                a: pt.a.clone(),
                b: pt.b.clone(),
                eps_log,
                abs_a: 2 * da == dd,
                b_small: small(&pt.b),
                a_close: series_below(&s, bound),
                beta_rational: None,
            }))
        }
        FieldData::EvenSep { g, .. } => {
            let fg = r.mul(&order.f, g);
            let (beta, rational) = beta_series(order, alg, nb.e, rel)?;
            let s = ring.add(&ring.from_poly(&pt.b, EXACT), &ring.mul_poly(&beta, &fg));
            Ok(Some(NearPoint {
                a: pt.a.clone(),
                b: pt.b.clone(),
                eps_log,
                abs_a: da == fg.deg(),
                b_small: series_below(&s, bound),
                a_close: small(&r.sub(&fg, &pt.a)),
                beta_rational: Some(rational),
            }))
        }
        FieldData::EvenInsep => Ok(None),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NearCount {
    pub eps_log: i64,
    pub card: usize,
    pub bound: Interval,
    pub holds: bool,
    /// Points near elliptic points failing the near-point inequalities.
    pub near_point_failures: Vec<String>,
    /// Moduli a whose points outnumber the congruence count.
    pub count_failures: Vec<String>,
}

impl NearCount {
    pub fn ok(&self) -> bool {
        self.holds && self.near_point_failures.is_empty() && self.count_failures.is_empty()
    }
}

/// 3qε|D|^{1/2} |D|^{15/(2 log_q log_q |D|^{1/2})} log_q |D|^{1/2} with ε = q^{eps_log}.
pub fn near_count_bound(q: u32, deg_d: i64, eps_log: i64) -> Interval {
    let k = disc_consts(q, deg_d);
    let base = Interval::exact(br(3 * q as i64) * qpow_r(q, eps_log)).mul(&k.sqrt_d);
    base.mul(&k.big).mul(&Interval::ratio(deg_d, 2))
}

/// Quantities depending only on (q, log_q|D|) shared by the height bounds.
struct DiscConsts {
    /// log_q log_q |D|^{1/2}.
    llq: Interval,
    /// |D|^{1/2}.
    sqrt_d: Interval,
    /// |D|^{15/(2 log_q log_q |D|^{1/2})}.
    big: Interval,
}

/// |D|^{1/2} for log_q|D| = deg_d.
fn sqrt_abs(q: u32, deg_d: i64) -> Interval {
    let half = Interval::exact(qpow_r(q, deg_d.div_euclid(2)));
    if deg_d % 2 == 0 {
        half
    } else {
        half.mul(&Interval::int(q as i64).sqrt())
    }
}

/// Needs log_q|D| ≥ 3 so that log_q log_q |D|^{1/2} > 0.
fn disc_consts(q: u32, deg_d: i64) -> Arc<DiscConsts> {
    assert!(deg_d >= 3, "log_q log_q |D|^(1/2) must be positive");
    static CACHE: OnceLock<Mutex<HashMap<(u32, i64), Arc<DiscConsts>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(k) = cache.lock().expect("constant cache").get(&(q, deg_d)) {
        return k.clone();
    }
    let llq = logq(&Interval::ratio(deg_d, 2), q);
    let big = Interval::int(q as i64).pow(&Interval::int(15 * deg_d).div(&llq.scale(2)));
    let k = Arc::new(DiscConsts { llq, sqrt_d: sqrt_abs(q, deg_d), big });
    cache.lock().expect("constant cache").insert((q, deg_d), k.clone());
    k
}

/// Card C_ε ≤ the bound for ε = q^{eps_log}, plus the near-point inequalities
/// and the per-a congruence counts for the points of C_ε. Needs |D| ≥ q⁴.
pub fn near_count_check(order: &Order, points: &[CmPoint], eps_log: i64) -> Result<NearCount> {
    let q = order.q();
    let dd = disc_deg(order)?;
    if dd < 4 {
        return Err(Error::Invalid("the bound on Card C_ε needs |D| ≥ q⁴".into()));
    }
    let near: Vec<&CmPoint> = points.iter().filter(|p| p.neighbor.is_some_and(|nb| nb.dist_deg < eps_log)).collect();
    let bound = near_count_bound(q, dd, eps_log);
    let holds = Interval::int(near.len() as i64).certainly_le(&bound);
    let mut rep = NearCount {
        eps_log,
        card: near.len(),
        bound,
        holds,
        near_point_failures: vec![],
        count_failures: vec![],
    };
    if near.is_empty() {
        return Ok(rep);
    }
    let alg = FlatAlg::new(&order.field)?;
    let r = order.field.ring();
    let eps = qpow_r(q, eps_log);
    let mut by_a: HashMap<Poly, usize> = HashMap::new();
    for pt in &near {
        let np = near_point_check(order, &alg, pt, eps_log)?.expect("point is near");
        if !np.ok() {
            rep.near_point_failures.push(format!("a = {}, b = {}: {np:?}", pt.a, pt.b));
        }
        *by_a.entry(pt.a.clone()).or_default() += 1;
    }
    let mut keys: Vec<&Poly> = by_a.keys().collect();
    keys.sort();
    for a in keys {
        let have = by_a[a];
        let (cong, shift) = match &order.field.data {
            FieldData::Odd { .. } => (Congruence::Square { d: order.disc().expect("odd") }, Shift::none()),
            FieldData::EvenSep { g, b, rad_g, .. } => {
                let fg = r.mul(&order.f, g);
                let mu = r.mul(&r.mul(&r.square(&order.f), rad_g), b);
                let e = near.iter().find_map(|p| p.neighbor).expect("near points have neighbors").e;
                let (beta, _) = beta_series(order, &alg, e, 2 * a.deg() + 16)?;
                let shift = series_t_part(&alg, &alg.ring.mul_poly(&beta, &fg))?;
                (Congruence::ArtinSchreier { delta: fg, mu }, shift)
            }
            FieldData::EvenInsep => unreachable!("no discriminant"),
        };
        let c = count_congruence(r, a, &cong, &eps, &shift)?;
        if (c.count as usize) < have {
            rep.count_failures.push(format!("a = {a}: {have} points, congruence count {}", c.count));
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Height bounds

#[derive(Clone, Debug, Serialize)]
pub struct UpperBound {
    pub epsilon: String,
    /// (q+1)log_q(1/ε) + (3q(q+1)ε/4)(|D|^{1/2}/h)|D|^{15/(2 log_q log_q |D|^{1/2})}(log_q|D|)².
    pub at_epsilon: Interval,
    /// (q+1)log_q(|D|^{1/2}/h) + 10(q+1) log_q|D| / log_q log_q |D|^{1/2}.
    pub optimized: Interval,
    /// log_q(1/ε*) for the optimizing ε, and the ε-bound evaluated there.
    pub log_inv_eps_star: Interval,
    pub at_eps_star: Interval,
    /// at_eps_star ≤ optimized, and 0 < ε* ≤ 1.
    pub chain_ok: bool,
    pub conditional_on: &'static str,
}

fn upper_at(q: u32, deg_d: i64, h: u64, eps: &Interval) -> Interval {
    let k = disc_consts(q, deg_d);
    let sqrt_over_h = k.sqrt_d.div(&Interval::int(h as i64));
    let t1 = logq(&eps.recip(), q).scale(q as i64 + 1);
    let t2 = Interval::ratio(3 * (q * (q + 1)) as i64, 4)
        .mul(eps)
        .mul(&sqrt_over_h)
        .mul(&k.big)
        .mul(&Interval::int(deg_d * deg_d));
    t1.add(&t2)
}

fn upper_optimized(q: u32, deg_d: i64, h: u64) -> Interval {
    let k = disc_consts(q, deg_d);
    let sqrt_over_h = k.sqrt_d.div(&Interval::int(h as i64));
    logq(&sqrt_over_h, q)
        .scale(q as i64 + 1)
        .add(&Interval::int(10 * (q as i64 + 1) * deg_d).div(&k.llq))
}

/// The upper bounds for h(α) valid when α is a unit, for an inert order with
/// class number `h` and |D| ≥ q⁴.
pub fn upper_bound_h(order: &Order, h: u64, eps: &BigRational) -> Result<UpperBound> {
    if !order.field.inert {
        return Err(Error::Invalid("the upper bound applies to inert ∞".into()));
    }
    let deg_d = disc_deg(order)?;
    upper_bound_from(order.q(), deg_d, h, eps)
}

pub fn upper_bound_from(q: u32, deg_d: i64, h: u64, eps: &BigRational) -> Result<UpperBound> {
    if deg_d < 4 {
        return Err(Error::Invalid(format!("|D| = q^{deg_d} < q⁴")));
    }
    if !eps.is_positive() || *eps > BigRational::one() {
        return Err(Error::Invalid(format!("ε = {eps} outside (0, 1]")));
    }
    let k = disc_consts(q, deg_d);
    // ε* = q^{-1}(h/|D|^{1/2})|D|^{−15/(2 log_q log_q |D|^{1/2})}(log_q|D|)^{−2}, where the
    // second term of the ε-bound collapses to 3(q+1)/4.
    let qq = q as i64;
    let log_inv_eps_star = Interval::int(1)
        .add(&logq(&k.sqrt_d.div(&Interval::int(h as i64)), q))
        .add(&Interval::int(15 * deg_d).div(&k.llq.scale(2)))
        .add(&logq(&Interval::int(deg_d), q).scale(2));
    let at_eps_star = log_inv_eps_star.scale(qq + 1).add(&Interval::ratio(3 * (qq + 1), 4));
    let optimized = upper_optimized(q, deg_d, h);
    let chain_ok = at_eps_star.certainly_le(&optimized) && !log_inv_eps_star.lo.is_negative();
    Ok(UpperBound {
        epsilon: eps.to_string(),
        at_epsilon: upper_at(q, deg_d, h, &rat_i(eps)),
        optimized,
        log_inv_eps_star,
        at_eps_star,
        chain_ok,
        conditional_on: "alpha is an algebraic unit",
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBounds {
    /// |D|^{1/2}/h(O), for |D| ≥ q.
    pub easy: Option<Interval>,
    /// The bound in terms of log_q|D_K| and log_q|f|.
    pub wei: Option<Interval>,
    /// (ln 2/120) log_q|D| − 3 ln q − 8.
    pub log_disc: Option<Interval>,
}

impl LowerBounds {
    /// The largest lower bound, rounded down.
    pub fn best(&self) -> Option<BigRational> {
        [&self.easy, &self.wei, &self.log_disc].into_iter().flatten().map(|i| i.lo.clone()).max()
    }
}

/// log_q⁺ x = log_q max(1, x).
fn logq_plus(x: i64, q: u32) -> Interval {
    if x <= 1 {
        Interval::int(0)
    } else {
        logq(&Interval::int(x), q)
    }
}

pub fn wei_bound(q: u32, deg_dk: i64, deg_f: i64) -> Interval {
    let lq = lnq(q);
    let sq = Interval::int(q as i64).sqrt();
    let qq = q as i64;
    let first = Interval::ratio(deg_dk, 10)
        .mul(&Interval::ratio(1, 2).sub(&sq.add(&Interval::int(1)).recip()))
        .mul(&lq);
    let second = Interval::ratio(7 * qq - 5, 4 * qq - 4).add(&Interval::int(8).div(&lq)).mul(&lq).div(&Interval::int(5));
    let third = Interval::ratio(deg_f, 10);
    let fourth = Interval::ratio(4 * qq * qq, 5 * (qq - 1) * (qq - 1)).mul(&logq_plus(deg_f, q));
    first.sub(&second).add(&third).sub(&fourth)
}

pub fn log_disc_bound(q: u32, deg_d: i64) -> Interval {
    ln2().mul(&Interval::ratio(deg_d, 120)).sub(&lnq(q).scale(3)).sub(&Interval::int(8))
}

pub fn easy_bound(q: u32, deg_d: i64, h: u64) -> Interval {
    sqrt_abs(q, deg_d).div(&Interval::int(h as i64))
}

/// The lower bounds for the height of a singular modulus of the order, whose
/// class number is `h`.
pub fn lower_bounds_h(order: &Order, h: u64) -> Result<LowerBounds> {
    let Some(d) = order.disc() else {
        return Ok(LowerBounds { easy: None, wei: None, log_disc: None });
    };
    let q = order.q();
    let dd = d.deg();
    let dk = order.field.dk().expect("separable").deg();
    Ok(LowerBounds {
        easy: (dd >= 1).then(|| easy_bound(q, dd, h)),
        wei: Some(wei_bound(q, dk, order.f.deg())),
        log_disc: Some(log_disc_bound(q, dd)),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TaguchiTerm {
    pub v: Poly,
    pub deg: i64,
    pub chi: i32,
    pub vf: u32,
    pub e: String,
    /// e_f(v) ≤ 2/(|v| − 1) · q/(q − 1) ≤ 2q²/((q − 1)²|v|).
    pub bound_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaguchiShift {
    /// ½ log_q|f| − ½ Σ deg(v) e_f(v).
    pub shift: String,
    pub half_sum: String,
    pub terms: Vec<TaguchiTerm>,
    /// ½ Σ deg(v) e_f(v) ≤ q/(q−1)² for deg f = 1, ≤ 4q²/(q−1)² log_q⁺ deg f otherwise.
    pub sum_bound_ok: bool,
}

/// e_f(v) = (1 − χ)(1 − |v|^{−v(f)}) / ((|v| − χ)(1 − |v|^{−1})).
pub fn e_f(q: u32, deg_v: i64, chi: i32, vf: u32) -> BigRational {
    let nv = qpow_r(q, deg_v);
    let one = BigRational::one();
    let c = br(chi as i64);
    let num = (&one - &c) * (&one - nv.recip().pow(vf as i32));
    let den = (&nv - &c) * (&one - nv.recip());
    num / den
}

pub fn taguchi_shift(f: &Poly, field: &QuadField) -> Result<TaguchiShift> {
    if !f.is_monic() {
        return Err(Error::Invalid("conductor must be monic".into()));
    }
    if field.dk().is_none() {
        return Err(Error::Invalid("the shift formula applies to separable fields".into()));
    }
    let q = field.fl.q;
    let qq = q as i64;
    let r = field.ring();
    let mut terms = vec![];
    let mut sum = BigRational::zero();
    if f.deg() > 0 {
        for (v, vf) in r.factor(f)?.factors {
            let chi = field.chi_prime(&v)?;
            let e = e_f(q, v.deg(), chi, vf);
            let nv = qpow_r(q, v.deg());
            let b1 = br(2) / (&nv - BigRational::one()) * br(qq) / br(qq - 1);
            let b2 = br(2 * qq * qq) / (br((qq - 1) * (qq - 1)) * &nv);
            sum += br(v.deg()) * &e;
            terms.push(TaguchiTerm { deg: v.deg(), chi, vf, e: e.to_string(), bound_ok: e <= b1 && b1 <= b2, v });
        }
    }
    let half_sum = sum / br(2);
    let sum_bound_ok = match f.deg() {
        0 => half_sum.is_zero(),
        1 => half_sum <= BigRational::new(qq.into(), ((qq - 1) * (qq - 1)).into()),
        d => rat_i(&half_sum)
            .certainly_le(&Interval::ratio(4 * qq * qq, (qq - 1) * (qq - 1)).mul(&logq_plus(d, q))),
    };
    let shift = br(f.deg()) / br(2) - &half_sum;
    Ok(TaguchiShift { shift: shift.to_string(), half_sum: half_sum.to_string(), terms, sum_bound_ok })
}

// ---------------------------------------------------------------------------
// The explicit bound

#[derive(Clone, Debug, Serialize)]
pub struct Branch {
    pub name: String,
    pub assumption: String,
    pub conclusion: String,
    /// The bound in the conclusion.
    pub bound: Interval,
    /// The implied bound on log_q log_q |D|^{1/2}.
    pub loglog: Interval,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleCheck {
    pub x: String,
    pub value: Interval,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub q: u32,
    pub ln2: Interval,
    pub ln_q: Interval,
    pub branches: Vec<Branch>,
    /// Bound on log_q log_q |D|^{1/2}: the maximum over the branches.
    pub final_bound_loglog: Interval,
    /// 2400(q+1)/ln 2 attains the maximum.
    pub final_is_first: bool,
    /// 240(q+1)/(ln 2 ln q): g is increasing beyond it.
    pub g_threshold: Interval,
    pub g_derivative: Vec<SampleCheck>,
    pub g_at_square: Vec<SampleCheck>,
    pub f_derivative: Vec<SampleCheck>,
    /// f(10N²) ≥ 0 for N ≥ q + 1.
    pub f_at_10n2: Vec<SampleCheck>,
    /// |D|^{1/2}/h(O) ≤ 10(q+1)² in the last branch.
    pub ratio_cap: i64,
    /// x − 2 log_q x ≥ x/3 at sampled x ≥ 5.
    pub log_slack: Vec<SampleCheck>,
    pub log_slack_holds: bool,
    /// Case constants, maximum and monotonicity samples all check.
    pub ok: bool,
}

fn sample(x: &BigRational, v: Interval) -> SampleCheck {
    let holds = !v.lo.is_negative();
    SampleCheck { x: Interval::exact(x.clone()).to_decimal(6).0, value: v, holds }
}

fn loglog_of_logd(x: &Interval, q: u32) -> Interval {
    logq(&x.div(&Interval::int(2)), q)
}

pub fn final_certificate(q: u32) -> Result<CertificateReport> {
    if q < 2 || crate::ffield::prime_power(q).is_none() {
        return Err(Error::Invalid(format!("q = {q} is not a prime power")));
    }
    let qq = q as i64;
    let l2 = ln2();
    let lq = lnq(q);
    let first = Interval::int(2400 * (qq + 1)).div(&l2);
    let n0 = Interval::int(240 * (qq + 1)).div(&l2.mul(&lq));
    let second = n0.square();
    let fourth = Interval::int(1200 * (qq + 1) * (qq + 1))
        .div(&l2)
        .add(&Interval::int(120).mul(&lq.scale(3).add(&Interval::int(8))).div(&l2));
    let branches = vec![
        Branch {
            name: "lower_small".into(),
            assumption: "M is the lower bound (ln 2/120)log_q|D| - 3 ln q - 8 and its coefficient is at most half of ln 2/120".into(),
            conclusion: "log_q log_q |D|^(1/2) <= 2400(q+1)/ln 2".into(),
            bound: first.clone(),
            loglog: first.clone(),
        },
        Branch {
            name: "lower_large".into(),
            assumption: "M is the lower bound (ln 2/120)log_q|D| - 3 ln q - 8 and its coefficient exceeds half of ln 2/120".into(),
            conclusion: "log_q|D| <= (240(q+1)/(ln 2 ln q))^2".into(),
            bound: second.clone(),
            loglog: loglog_of_logd(&second, q),
        },
        Branch {
            name: "ratio_small".into(),
            assumption: "M = |D|^(1/2)/h(O) and 1 - 1200(q+1)/(ln 2 log_q log_q |D|^(1/2)) <= 1/2".into(),
            conclusion: "log_q log_q |D|^(1/2) <= 2400(q+1)/ln 2".into(),
            bound: first.clone(),
            loglog: first.clone(),
        },
        Branch {
            name: "ratio_large".into(),
            assumption: "M = |D|^(1/2)/h(O), the coefficient exceeds 1/2, so |D|^(1/2)/h(O) <= 10(q+1)^2".into(),
            conclusion: "log_q|D| <= 1200(q+1)^2/ln 2 + 120(3 ln q + 8)/ln 2".into(),
            bound: fourth.clone(),
            loglog: loglog_of_logd(&fourth, q),
        },
    ];
    let final_bound = branches.iter().skip(1).fold(branches[0].loglog.clone(), |m, b| m.max(&b.loglog));
    let final_is_first =
        [&branches[1], &branches[3]].iter().all(|b| b.loglog.certainly_le(&first)) && final_bound == first;

    // g(x) = x − (240(q+1)/ln 2) log_q((ln 2/120)x) − (720 ln q + 1920)/ln 2.
    let c240 = Interval::int(240 * (qq + 1)).div(&l2);
    let g_const = lq.scale(720).add(&Interval::int(1920)).div(&l2);
    let g = |x: &Interval| x.sub(&c240.mul(&logq(&l2.mul(x).div(&Interval::int(120)), q))).sub(&g_const);
    let g_der = |x: &Interval| Interval::int(1).sub(&c240.div(&lq.mul(x)));
    let n0_hi = n0.hi.clone();
    let scales = [br(1), BigRational::new(3.into(), 2.into()), br(2), br(10), br(1000)];
    // g' = 1 − 240(q+1)/(ln 2 ln q x) is increasing in x, so sampling just past N0 covers x ≥ N0.
    let g_derivative: Vec<SampleCheck> = scales
        .iter()
        .map(|s| {
            let x = &n0_hi * s * BigRational::new(1001.into(), 1000.into());
            sample(&x, g_der(&rat_i(&x)))
        })
        .collect();
    let g_at_square: Vec<SampleCheck> = scales
        .iter()
        .map(|s| {
            let n = &n0_hi * s;
            let x = &n * &n;
            sample(&x, g(&rat_i(&x)))
        })
        .collect();

    // f(x) = x/2 − N log_q x − (3/2) ln q − 4.
    let f_val = |n: i64, x: &Interval| {
        x.div(&Interval::int(2))
            .sub(&logq(x, q).scale(n))
            .sub(&lq.mul(&Interval::ratio(3, 2)))
            .sub(&Interval::int(4))
    };
    let ns: Vec<i64> = vec![qq + 1, qq + 2, 2 * (qq + 1), 10 * (qq + 1), 100 * (qq + 1)];
    let mut f_derivative = vec![];
    let mut f_at_10n2 = vec![];
    for &n in &ns {
        let thr = Interval::int(2 * n).div(&lq).hi;
        for s in [BigRational::new(1001.into(), 1000.into()), br(2), br(10)] {
            let x = &thr * s;
            let d = Interval::ratio(1, 2).sub(&Interval::int(n).div(&lq.mul(&rat_i(&x))));
            f_derivative.push(sample(&x, d));
        }
        let x = br(10 * n * n);
        // 10N² lies in the increasing range.
        let v = f_val(n, &rat_i(&x));
        let in_range = rat_i(&thr).certainly_le(&rat_i(&x));
        let mut sc = sample(&x, v);
        sc.holds &= in_range;
        f_at_10n2.push(sc);
    }

    // x − 2 log_q x − x/3 ≥ 0 for x ≥ 5.
    let xs: Vec<BigRational> = [5, 6, 7, 8, 9, 10, 12, 16, 20, 50, 100, 1000]
        .iter()
        .map(|&x| br(x))
        .chain([BigRational::new(11.into(), 2.into())])
        .collect();
    let log_slack: Vec<SampleCheck> = xs
        .iter()
        .map(|x| {
            let xi = rat_i(x);
            sample(x, xi.sub(&logq(&xi, q).scale(2)).sub(&xi.div(&Interval::int(3))))
        })
        .collect();
    let log_slack_holds = log_slack.iter().all(|s| s.holds);
    let ok = final_is_first
        && g_derivative.iter().all(|s| s.holds)
        && g_at_square.iter().all(|s| s.holds)
        && f_derivative.iter().all(|s| s.holds)
        && f_at_10n2.iter().all(|s| s.holds);
    Ok(CertificateReport {
        q,
        ln2: l2,
        ln_q: lq,
        branches,
        final_bound_loglog: final_bound,
        final_is_first,
        g_threshold: n0,
        g_derivative,
        g_at_square,
        f_derivative,
        f_at_10n2,
        ratio_cap: 10 * (qq + 1) * (qq + 1),
        log_slack,
        log_slack_holds,
        ok,
    })
}

/// Scan of the step from the bound in terms of (D_K, f) to the bound in
/// terms of D: (1/10)x − (4q²/(5(q−1)²)) log_q⁺ x ≥ (ln 2/120)·2x − 8 for
/// x = log_q|f| ∈ [0, max_x]. Returns the x where it fails.
pub fn conductor_step_failures(q: u32, max_x: i64) -> Vec<i64> {
    let qq = q as i64;
    let c = Interval::ratio(4 * qq * qq, 5 * (qq - 1) * (qq - 1));
    (0..=max_x)
        .filter(|&x| {
            let lhs = Interval::ratio(x, 10).sub(&c.mul(&logq_plus(x, q)));
            let rhs = ln2().mul(&Interval::ratio(2 * x, 120)).sub(&Interval::int(8));
            !rhs.certainly_le(&lhs)
        })
        .collect()
}

/// Exact Weil height of a singular modulus from its conjugate valuations.
pub fn height_from_valuations(vals: &[Ratio<i64>]) -> Ratio<i64> {
    crate::brown::weil_height(vals)
}
