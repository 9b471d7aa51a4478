//! Numerical evaluation of g, Δ and j at CM points through t-expansions,
//! with truncation points derived from the valuation of each omitted term.
//!
//! π̃ itself is never formed. With P = π̃^{q−1} ∈ k_∞ and
//! S_a = e_C(π̃az)/π̃ = Σ_i C_i (az)^{q^i}, C_i = P^{(q^i−1)/(q−1)}/D_i, one has
//! t(az)^{q−1} = P^{−1} S_a^{1−q}, so that
//! g̃ = g/π̃^{q−1} = 1 − (T^q − T) P^{−1} Σ_a S_a^{1−q},
//! Δ̃ = Δ/π̃^{q²−1} = −P^{−1} Σ_a a^{q(q−1)} S_a^{1−q},
//! j = g̃^{q+1}/Δ̃.
//! S_a is obtained from S = S_1 through the Carlitz action:
//! S_a = Σ_k [a]_k P_k S^{q^k} with φ_a = Σ_k [a]_k τ^k and P_k = π̃^{q^k−1}.

use num_rational::Ratio;
use rayon::prelude::*;

use crate::brown::log_abs_j;
use crate::cm::{enumerate, CmPoint};
use crate::error::{Error, Result};
use crate::laurent::{carlitz_c, carlitz_c_val, pi_power, pi_qm1, Series, SeriesRing, EXACT};
use crate::poly::{Poly, PolyRing};
use crate::quad::{FieldData, FlatAlg, LocalAlg, LocalVal, Order, QuadAlg, QuadElem};

/// The completion attached to an order, in whichever presentation fits ∞.
pub enum AnyAlg {
    Flat(FlatAlg),
    Quad(QuadAlg),
}

impl AnyAlg {
    pub fn new(order: &Order) -> Result<AnyAlg> {
        if order.field.inert {
            Ok(AnyAlg::Flat(FlatAlg::new(&order.field)?))
        } else {
            Ok(AnyAlg::Quad(QuadAlg::new(&order.field)?))
        }
    }

    pub fn ring(&self) -> &SeriesRing {
        match self {
            AnyAlg::Flat(a) => &a.ring,
            AnyAlg::Quad(a) => &a.ring,
        }
    }

    pub fn v2_xi(&self) -> i64 {
        match self {
            AnyAlg::Flat(_) => 0,
            AnyAlg::Quad(a) => a.v2_xi(),
        }
    }
}

/// Dispatches a generic computation on the concrete algebra.
macro_rules! with_alg {
    ($any:expr, $a:ident => $body:expr) => {
        match $any {
            AnyAlg::Flat($a) => $body,
            AnyAlg::Quad($a) => $body,
        }
    };
}

/// Truncation data of one evaluation.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Plan {
    /// Absolute precision (half-units) targeted for Σ_a S_a^{1−q}.
    pub target2: i64,
    /// Largest deg a kept in the sums over A_+.
    pub max_deg_a: u32,
    /// Number of e_C terms kept for S.
    pub ec_terms: u32,
}

/// Valuation data of a point: q, n and 2ε.
#[derive(Clone, Copy, Debug)]
struct PointCtx {
    q: i64,
    n: i64,
    e2: i64,
    deg2: i64,
}

const BIG: i64 = i64::MAX / 16;

impl PointCtx {
    fn new(q: u32, pt: &CmPoint) -> PointCtx {
        PointCtx { q: q as i64, n: pt.n, e2: 2 * pt.n - pt.deg2, deg2: pt.deg2 }
    }

    fn qpow(&self, e: i64) -> i64 {
        u32::try_from(e).ok().and_then(|e| self.q.checked_pow(e)).unwrap_or(BIG).min(BIG)
    }

    /// 2·v(t(az)^{q−1}) for deg a = d, as predicted: (2q − (q−1)·2ε)·q^{n+d}.
    fn tau2(&self, d: i64) -> i64 {
        (2 * self.q - (self.q - 1) * self.e2).saturating_mul(self.qpow(self.n + d)).min(BIG)
    }

    /// 2·v(S_a) for deg a = d, as predicted.
    fn vs2(&self, d: i64) -> i64 {
        (2 * self.q - self.tau2(d)) / (self.q - 1)
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// Carlitz coefficients [T^i]_k for i ≤ m, indexed [i][k].
fn carlitz_table(r: &PolyRing, m: usize) -> Vec<Vec<Poly>> {
    let q = r.q() as u64;
    let mut tab = vec![vec![Poly::one()]];
    for i in 0..m {
        let prev = &tab[i];
        let mut next = vec![Poly::zero(); i + 2];
        for (k, slot) in next.iter_mut().enumerate() {
            let mut v = if k <= i { r.mul(&Poly::t(), &prev[k]) } else { Poly::zero() };
            if k >= 1 {
                v = r.add(&v, &r.pow(&prev[k - 1], q));
            }
            *slot = v;
        }
        tab.push(next);
    }
    tab
}

/// [a]_k for k ≤ deg a.
fn carlitz_coeffs(r: &PolyRing, tab: &[Vec<Poly>], a: &Poly) -> Vec<Poly> {
    let d = a.deg().max(0) as usize;
    (0..=d)
        .map(|k| {
            let mut acc = Poly::zero();
            for (i, &c) in a.c.iter().enumerate() {
                if c != 0 && k <= i {
                    acc = r.add(&acc, &r.scale(&tab[i][k], c));
                }
            }
            acc
        })
        .collect()
}

/// S = Σ_i C_i z^{q^i} to absolute precision `prec2`, keeping exactly the
/// terms whose valuation is below `prec2`; the loop stops once the term
/// valuations are increasing and past `prec2`.
fn s_series<A: LocalAlg>(alg: &A, z: &QuadElem, ctx: &PointCtx, prec2: i64) -> Result<(A::E, u32)> {
    let q = ctx.q;
    let ring = alg.ring();
    let mut acc: Option<A::E> = None;
    let mut terms = 0;
    let mut i: i64 = 0;
    loop {
        let qi = ctx.qpow(i);
        let u = 2i64.saturating_mul(carlitz_c_val(q as u32, i as u32)).saturating_sub(qi.saturating_mul(ctx.deg2));
        let past_turn = (2 * i - ctx.deg2) * (q - 1) >= 2 * q;
        if u >= prec2 && past_turn {
            break;
        }
        if u < prec2 {
            let need = prec2 - u;
            let mut zf = alg.embed(z, ceil_div(need, qi) + 4)?;
            for _ in 0..i {
                zf = alg.frob(&zf);
            }
            let term = if i == 0 { zf } else { alg.mul_series(&zf, &carlitz_c(ring, i as u32, ceil_div(need, 2) + 2)) };
            let term = alg.truncate2(&term, prec2);
            acc = Some(match acc {
                None => term,
                Some(s) => alg.add(&s, &term),
            });
            terms = i as u32 + 1;
        }
        i += 1;
        if i > 62 {
            return Err(Error::Precision("e_C expansion did not reach the requested precision".into()));
        }
    }
    let s = acc.ok_or_else(|| Error::Precision("e_C expansion has no term below the requested precision".into()))?;
    Ok((alg.truncate2(&s, prec2), terms))
}

/// S_a for all monic a with deg a ≤ max_d, each to absolute precision
/// `need(d)` (half-units), through the Carlitz action on S.
fn s_family<A: LocalAlg>(
    alg: &A,
    pt: &CmPoint,
    ctx: &PointCtx,
    max_d: i64,
    need: &dyn Fn(i64) -> i64,
) -> Result<(Vec<(Poly, i64, A::E)>, u32)> {
    let q = ctx.q;
    let ring = alg.ring();
    let rq = PolyRing::new(&ring.fl.fq);
    let mut need_w = vec![i64::MIN; max_d as usize + 1];
    for d in 0..=max_d {
        for k in 0..=d {
            let w = need(d) + 2 * ctx.qpow(k) * (d - k);
            need_w[k as usize] = need_w[k as usize].max(w);
        }
    }
    let rel_w: Vec<i64> = (0..=max_d).map(|k| need_w[k as usize] - ctx.vs2(k)).collect();
    let rel_s = (0..=max_d).map(|k| ceil_div(rel_w[k as usize], ctx.qpow(k))).max().unwrap_or(0) + 4;
    let (s, terms) = s_series(alg, &pt.z, ctx, ctx.vs2(0) + rel_s)?;
    let mut ws = Vec::with_capacity(max_d as usize + 1);
    let mut sk = s.clone();
    for k in 0..=max_d {
        if k > 0 {
            sk = alg.frob(&sk);
        }
        let w = if k == 0 {
            sk.clone()
        } else {
            alg.mul_series(&sk, &pi_power(ring, k as u32, ceil_div(rel_w[k as usize], 2) + 2))
        };
        ws.push(alg.truncate2(&w, need_w[k as usize]));
    }
    let tab = carlitz_table(&rq, max_d as usize);
    let mut out = Vec::new();
    for d in 0..=max_d {
        for a in Poly::monics(q as u32, d as u32) {
            let coeffs = carlitz_coeffs(&rq, &tab, &a);
            let mut acc: Option<A::E> = None;
            for (k, ck) in coeffs.iter().enumerate() {
                if ck.is_zero() {
                    continue;
                }
                let t = alg.mul_poly(&ws[k], ck);
                acc = Some(match acc {
                    None => t,
                    Some(x) => alg.add(&x, &t),
                });
            }
            let sa = acc.expect("[a]_{deg a} = 1 for monic a");
            out.push((a, d, alg.truncate2(&sa, need(d))));
        }
    }
    Ok((out, terms))
}

/// One evaluation of j at fixed truncation.
fn eval_fixed<A: LocalAlg>(alg: &A, pt: &CmPoint, ctx: &PointCtx, target2: i64) -> Result<(A::E, Plan)> {
    let q = ctx.q;
    // Keep deg a = d while a term of Σ a^{q(q−1)} S_a^{1−q} can fall below the target.
    let mut max_d = 0;
    while ctx.tau2(max_d + 1) - 2 * q - 2 * q * (q - 1) * (max_d + 1) < target2 {
        max_d += 1;
    }
    let need = |d: i64| {
        let target_x = target2 + 2 * q * (q - 1) * d;
        let rel = target_x - (ctx.tau2(d) - 2 * q);
        ctx.vs2(d) + rel.max(2) + 4
    };
    let (family, ec_terms) = s_family(alg, pt, ctx, max_d, &need)?;
    let rq = PolyRing::new(&alg.ring().fl.fq);
    let qq = (q * (q - 1)) as u64;
    let mut u: Option<A::E> = None;
    let mut v: Option<A::E> = None;
    for (a, _, sa) in &family {
        let x = alg.mul(sa, &alg.inv(&alg.frob(sa))?);
        let xv = alg.mul_poly(&x, &rq.pow(a, qq));
        u = Some(match u {
            None => x,
            Some(s) => alg.add(&s, &x),
        });
        v = Some(match v {
            None => xv,
            Some(s) => alg.add(&s, &xv),
        });
    }
    let u = alg.truncate2(&u.expect("a = 1 is always kept"), target2);
    let v = alg.truncate2(&v.expect("a = 1 is always kept"), target2);
    let ring = alg.ring();
    let rel_p = ceil_div(target2 - ctx.tau2(0) + 2 * q, 2) + q + 4;
    let pinv = ring.inv(&pi_qm1(ring, rel_p.max(4)))?;
    let tq_t = rq.sub(&Poly::monomial(1, q as usize), &Poly::t());
    let g = alg.sub(&alg.one(), &alg.mul_poly(&alg.mul_series(&u, &pinv), &tq_t));
    let delta = alg.neg(&alg.mul_series(&v, &pinv));
    let j = alg.mul(&alg.mul(&g, &alg.frob(&g)), &alg.inv(&delta)?);
    Ok((j, Plan { target2, max_deg_a: max_d as u32, ec_terms }))
}

/// j(z) to absolute precision at least `want2` (half-units), retrying with
/// larger truncation targets until the tracked precision suffices.
fn eval_j_alg<A: LocalAlg>(alg: &A, order: &Order, pt: &CmPoint, want2: i64) -> Result<(A::E, Plan)> {
    let ctx = PointCtx::new(order.q(), pt);
    let deg = log_abs_j(order, pt)?;
    let deg2 = (deg * 2).ceil().to_integer().max(0);
    let near = pt.neighbor.map_or(0, |nb| -2 * nb.dist_deg);
    let mut target2 = (want2 + deg2 + near + 8).max(ctx.tau2(0) - 2 * ctx.q + 8);
    for _ in 0..8 {
        let (j, plan) = eval_fixed(alg, pt, &ctx, target2)?;
        let p2 = alg.prec2(&j);
        if p2 >= want2 && !alg.is_zero(&j) {
            return Ok((j, plan));
        }
        target2 += (want2 - p2).max(16);
    }
    Err(Error::Precision(format!("j not resolved to precision {want2} at a = {}", pt.a)))
}

/// A numerically evaluated singular modulus.
#[derive(Clone, Debug)]
pub struct JValue {
    pub val: LocalVal,
    /// 2·v_∞(j) measured on the numeric value.
    pub val2: i64,
    pub prec2: i64,
    pub plan: Plan,
}

impl JValue {
    /// log_q |j| read from the numeric value.
    pub fn log_abs(&self) -> Ratio<i64> {
        Ratio::new(-self.val2, 2)
    }
}

/// Evaluates j at one point to absolute precision `want` (in units of 1/T).
pub fn eval_j(order: &Order, alg: &AnyAlg, pt: &CmPoint, want: i64) -> Result<JValue> {
    with_alg!(alg, a => {
        let (j, plan) = eval_j_alg(a, order, pt, 2 * want)?;
        Ok(JValue { val: a.parts(&j), val2: a.val2(&j), prec2: a.prec2(&j), plan })
    })
}

/// Measured against predicted valuations of t(az) for one point.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ValuationCheck {
    pub a: String,
    pub computed: String,
    pub predicted: String,
}

/// v(t(az)) = (q/(q−1) − ε)·q^{n + deg a} for every monic a with deg a ≤ max_deg.
pub fn t_valuations(order: &Order, alg: &AnyAlg, pt: &CmPoint, max_deg: i64) -> Result<Vec<ValuationCheck>> {
    let q = order.q() as i64;
    let ctx = PointCtx::new(order.q(), pt);
    let eps = pt.eps();
    with_alg!(alg, al => {
        let (fam, _) = s_family(al, pt, &ctx, max_deg, &|d| ctx.vs2(d) + 12)?;
        let mut out = Vec::with_capacity(fam.len());
        for (a, d, sa) in fam {
            if al.is_zero(&sa) {
                return Err(Error::Precision(format!("S_a vanishes to precision for a = {a}")));
            }
            // v(t) = q/(q−1) − v(S_a).
            let computed = Ratio::new(q, q - 1) - Ratio::new(al.val2(&sa), 2);
            let predicted = (Ratio::new(q, q - 1) - eps) * ctx.qpow(pt.n + d);
            out.push(ValuationCheck { a: a.to_string(), computed: computed.to_string(), predicted: predicted.to_string() });
        }
        Ok(out)
    })
}

/// Result of evaluating Σ_{deg a ≤ 2} a^μ t(az)^δ δ_a(z)^ν.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SumCheck {
    pub computed: String,
    pub predicted: String,
    /// Valuation of the block of each degree m (None when it vanishes to precision).
    pub blocks: Vec<Option<String>>,
}

/// Evaluates Σ_m Σ_{a ∈ A_{+,m}} a^μ t(az)^δ δ_a(z)^ν over deg a ≤ 2, with
/// δ_a(z) = 1/t(az) − π̃az, and compares its valuation with
/// (δ − ν)(q/(q−1) − ε)qⁿ.
///
/// Every term carries the common factor π̃^{ν−δ}: the sum equals
/// π̃^{ν−δ} Σ a^μ S_a^{−δ} (S_a − az)^ν.
pub fn twisted_sum(order: &Order, alg: &AnyAlg, pt: &CmPoint, delta: u32, mu: u32, nu: u32) -> Result<SumCheck> {
    let q = order.q() as i64;
    let eps = pt.eps();
    let qn = Ratio::from_integer(q.pow(pt.n as u32));
    let (d, m, n) = (delta as i64, mu as i64, nu as i64);
    if d < n + 1 {
        return Err(Error::Invalid("need δ ≥ ν + 1".into()));
    }
    let bound = qn * (d - n) * (Ratio::from_integer(q) - eps * (q - 1));
    if Ratio::from_integer(m) >= bound {
        return Err(Error::Invalid(format!("need μ < qⁿ(δ−ν)(q − ε(q−1)) = {bound}")));
    }
    let ctx = PointCtx::new(order.q(), pt);
    let rq = PolyRing::new(&order.fl().fq);
    let pi_v = Ratio::new(q, q - 1);
    let predicted = Ratio::from_integer(d - n) * (pi_v - eps) * qn;
    with_alg!(alg, al => {
        let rel = 24 + 4 * (d + n);
        let (fam, _) = s_family(al, pt, &ctx, 2, &|dd| ctx.vs2(dd) + rel)?;
        let mut blocks: Vec<Option<A2Block>> = vec![None, None, None];
        for (a, dd, sa) in &fam {
            let az = QuadElem { x: rq.mul(&pt.z.x, a), y: rq.mul(&pt.z.y, a), den: pt.z.den.clone() };
            let aze = al.embed(&az, al.prec2(sa) - al.val2(sa) + 8)?;
            let diff = al.sub(sa, &aze);
            let term = al.mul_poly(&al.mul(&al.pow(&al.inv(sa)?, delta as u64), &al.pow(&diff, nu as u64)), &rq.pow(a, mu as u64));
            let slot = &mut blocks[*dd as usize];
            *slot = Some(match slot.take() {
                None => A2Block(al.parts(&term)),
                Some(A2Block(prev)) => A2Block(al.parts(&al.add(&al.from_parts(&prev), &term))),
            });
        }
        let mut total: Option<_> = None;
        let mut block_vals = Vec::new();
        for b in blocks.into_iter().flatten() {
            let e = al.from_parts(&b.0);
            block_vals.push((!al.is_zero(&e)).then(|| (pi_v * (d - n) + Ratio::new(al.val2(&e), 2)).to_string()));
            total = Some(match total {
                None => e,
                Some(t) => al.add(&t, &e),
            });
        }
        let total = total.expect("three blocks");
        if al.is_zero(&total) {
            return Err(Error::Precision("the sum vanishes to the working precision".into()));
        }
        let computed = pi_v * (d - n) + Ratio::new(al.val2(&total), 2);
        Ok(SumCheck { computed: computed.to_string(), predicted: predicted.to_string(), blocks: block_vals })
    })
}

struct A2Block(LocalVal);

/// A distinct singular modulus of an order with its representative point.
#[derive(Clone, Debug)]
pub struct SingularModulus {
    pub point: CmPoint,
    /// log_q |j| from the position of the point.
    pub log_abs_j: Ratio<i64>,
    pub numeric: JValue,
    /// Number of reduced points giving this value.
    pub multiplicity: usize,
}

fn local_sub(ring: &SeriesRing, a: &LocalVal, b: &LocalVal) -> LocalVal {
    LocalVal { x: ring.sub(&a.x, &b.x), y: ring.sub(&a.y, &b.y) }
}

fn local_is_zero(a: &LocalVal) -> bool {
    a.x.is_zero() && a.y.is_zero()
}

/// Evaluates j at every reduced point (in parallel) to absolute precision `want`.
pub fn eval_points(order: &Order, alg: &AnyAlg, points: &[CmPoint], want: i64) -> Result<Vec<JValue>> {
    points.par_iter().map(|p| eval_j(order, alg, p, want)).collect()
}

/// Groups points into distinct singular moduli; two values are identified
/// when they agree on every digit known to both.
pub fn dedup(order: &Order, alg: &AnyAlg, points: Vec<CmPoint>, values: Vec<JValue>) -> Result<Vec<SingularModulus>> {
    let ring = alg.ring();
    let mut out: Vec<SingularModulus> = Vec::new();
    for (p, v) in points.into_iter().zip(values) {
        let brown = log_abs_j(order, &p)?;
        if let Some(m) = out.iter_mut().find(|m| m.log_abs_j == brown && local_is_zero(&local_sub(ring, &m.numeric.val, &v.val))) {
            m.multiplicity += 1;
            continue;
        }
        out.push(SingularModulus { point: p, log_abs_j: brown, numeric: v, multiplicity: 1 });
    }
    Ok(out)
}

/// Default absolute precision (units of 1/T) beyond T^0 used for moduli.
pub const GUARD: i64 = 24;

/// The distinct singular moduli of an order.
pub fn moduli_of(order: &Order, want: i64) -> Result<Vec<SingularModulus>> {
    let alg = AnyAlg::new(order)?;
    let points = enumerate(order)?;
    let values = eval_points(order, &alg, &points, want)?;
    dedup(order, &alg, points, values)
}

/// ∏ (X − j_i) over the distinct moduli with coefficients rounded to A, or to
/// F_q[√T] for k(√T).
#[derive(Clone, Debug)]
pub struct HilbertPoly {
    /// Coefficients from X^0 up to the leading 1. For k(√T) each entry is
    /// (x, y) standing for x + y√T; otherwise y = 0.
    pub coeffs: Vec<(Poly, Poly)>,
    /// Absolute precision (units of 1/T) to which each rounding residual vanishes.
    pub residuals: Vec<i64>,
    pub plans: Vec<Plan>,
    pub moduli: Vec<SingularModulus>,
}

impl HilbertPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// log_q of the absolute value of the constant term.
    pub fn constant_term_degree(&self) -> Ratio<i64> {
        let (x, y) = &self.coeffs[0];
        let dy = if y.is_zero() { i64::MIN } else { 2 * y.deg() + 1 };
        let dx = if x.is_zero() { i64::MIN } else { 2 * x.deg() };
        Ratio::new(dx.max(dy), 2)
    }
}

/// Rounds a series to a polynomial over F_q when all digits past T^0 vanish
/// to at least `guard` places.
fn round_poly(ring: &SeriesRing, s: &Series, guard: i64) -> Option<Poly> {
    if s.prec < guard + 1 {
        return None;
    }
    ring.as_poly(s)
}

/// Assembles the Hilbert class polynomial from numeric moduli computed with
/// absolute precision `want`, raising the precision until every coefficient
/// rounds with `guard` vanishing digits past T^0.
pub fn hilbert_poly(order: &Order, want: i64, guard: i64) -> Result<HilbertPoly> {
    let alg = AnyAlg::new(order)?;
    let points = enumerate(order)?;
    let ring = alg.ring().clone();
    let positive: Ratio<i64> = points
        .iter()
        .map(|p| log_abs_j(order, p).map(|v| v.max(Ratio::from_integer(0))))
        .sum::<Result<Ratio<i64>>>()?;
    let mut want = want.max(positive.ceil().to_integer() + guard + 2);
    for _ in 0..6 {
        let values = eval_points(order, &alg, &points, want)?;
        let moduli = dedup(order, &alg, points.clone(), values)?;
        let coeffs = with_alg!(&alg, al => {
            let mut poly: Vec<_> = vec![al.one()];
            for m in &moduli {
                let j = al.from_parts(&m.numeric.val);
                let mut next = vec![al.from_series(Series::zero(EXACT)); poly.len() + 1];
                for (k, c) in poly.iter().enumerate() {
                    next[k + 1] = al.add(&next[k + 1], c);
                    next[k] = al.sub(&next[k], &al.mul(c, &j));
                }
                poly = next;
            }
            poly.iter().map(|c| al.parts(c)).collect::<Vec<_>>()
        });
        let insep = matches!(order.field.data, FieldData::EvenInsep);
        let mut rounded = Vec::with_capacity(coeffs.len());
        let mut residuals = Vec::with_capacity(coeffs.len());
        let mut ok = true;
        for c in &coeffs {
            let x = round_poly(&ring, &c.x, guard);
            let y = if insep {
                round_poly(&ring, &c.y, guard)
            } else if c.y.is_zero() && 2 * c.y.prec + alg.v2_xi() >= 2 * (guard + 1) {
                Some(Poly::zero())
            } else {
                None
            };
            match (x, y) {
                (Some(x), Some(y)) => {
                    rounded.push((x, y));
                    residuals.push(c.x.prec.min(c.y.prec));
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let plans = moduli.iter().map(|m| m.numeric.plan.clone()).collect();
            return Ok(HilbertPoly { coeffs: rounded, residuals, plans, moduli });
        }
        want *= 2;
    }
    Err(Error::Precision("Hilbert class polynomial coefficients did not round".into()))
}

/// Outcome of the unit test on a Hilbert class polynomial.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum UnitStatus {
    Unit,
    NonUnit { norm_degree: String },
}

/// A root of a monic integral polynomial is a unit iff the constant term is a nonzero constant.
pub fn unit_check(coeffs: &[(Poly, Poly)]) -> UnitStatus {
    let (x, y) = &coeffs[0];
    if y.is_zero() && x.deg() == 0 {
        return UnitStatus::Unit;
    }
    let dy = if y.is_zero() { i64::MIN } else { 2 * y.deg() + 1 };
    let dx = if x.is_zero() { i64::MIN } else { 2 * x.deg() };
    UnitStatus::NonUnit { norm_degree: Ratio::new(dx.max(dy), 2).to_string() }
}

/// log_q of |∏ j_i| over distinct moduli, read from the numeric product.
pub fn norm_degree_numeric(order: &Order, moduli: &[SingularModulus]) -> Result<Ratio<i64>> {
    let alg = AnyAlg::new(order)?;
    with_alg!(&alg, al => {
        let mut acc = al.one();
        for m in moduli {
            acc = al.mul(&acc, &al.from_parts(&m.numeric.val));
        }
        if al.is_zero(&acc) {
            return Err(Error::Precision("product of conjugates vanishes to precision".into()));
        }
        Ok(Ratio::new(-al.val2(&acc), 2))
    })
}
