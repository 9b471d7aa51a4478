//! Desk-scale sweeps over every imaginary quadratic order of bounded size:
//! valuation checks, class numbers, the André–Oort product search, the unit
//! search and the counting bounds near elliptic points.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, near_count_check, upper_bound_h, NearCount, UpperBound};
use crate::brown::{log_abs_j, ramified_nonunit_certificate, weil_height};
use crate::classno::{check_class_bound, class_report, ClassBound, ClassReport};
use crate::cm::{enumerate, CmPoint};
use crate::error::{Error, Result};
use crate::laurent::Series;
use crate::ffield::{Fe, Fields};
use crate::modforms::{
    eval_j, moduli_of,
    dedup, eval_points, hilbert_poly, t_valuations, twisted_sum, norm_degree_numeric, unit_check, AnyAlg, SingularModulus,
    UnitStatus,
};
use crate::poly::{Poly, PolyRing};
use crate::quad::{Flavor, LocalVal, Order, QuadField};

/// Every order with log_q of its size (`Order::size_log`) at most `max_size`,
/// in a fixed order: odd q by discriminant; even q by (C, B, f), then k(√T).
///
/// For odd q, D runs over polynomials with leading coefficient 1 or the least
/// nonsquare (one representative per square class). For even q, B/C runs over
/// Hasse normal forms whose polynomial part has only odd-degree monomials
/// besides a constant in {0, λ}, λ the least element with X² + X + λ
/// irreducible; this removes the presentations differing by x² + x with x ∈ A.
pub fn orders(fl: &Arc<Fields>, max_size: i64) -> Result<Vec<Order>> {
    let q = fl.q;
    let r = PolyRing::new(&fl.fq);
    let mut out = vec![];
    if max_size < 1 {
        return Ok(out);
    }
    if fl.odd() {
        let g = fl.nonsquare().expect("odd q has nonsquares");
        for deg in 1..=max_size as u32 {
            let leads: Vec<Fe> = if deg % 2 == 0 { vec![g] } else { vec![fl.fq.from_int(1), g] };
            for lead in leads {
                for m in Poly::monics(q, deg) {
                    out.push(Order::from_disc(fl, &r.scale(&m, lead))?);
                }
            }
        }
        return Ok(out);
    }
    let lambda = fl.as_nonsplit().expect("even q has a non-split Artin-Schreier constant");
    for dc in 0..max_size as u32 {
        for c in Poly::monics(q, dc) {
            let Some(g) = hasse_g(&r, &c)? else { continue };
            let base = 2 * g.deg();
            if base > max_size {
                continue;
            }
            let rems: Vec<Poly> = if c.is_one() {
                vec![Poly::zero()]
            } else {
                Poly::all_below(q, dc).filter(|x| !x.is_zero() && r.gcd(x, &c).is_one()).collect()
            };
            for qpart in polynomial_parts(&fl.fq, lambda, max_size - base) {
                for rem in &rems {
                    let b = r.add(&r.mul(&qpart, &c), rem);
                    let field = QuadField::even_sep(fl, &b, &c)?;
                    push_conductors(&mut out, &field, max_size)?;
                }
            }
        }
    }
    let insep = QuadField::even_insep(fl)?;
    push_conductors(&mut out, &insep, max_size)?;
    Ok(out)
}

/// G with C = ∏ P^e and G = ∏ P^{⌈e/2⌉}, or None when some e is even.
fn hasse_g(r: &PolyRing, c: &Poly) -> Result<Option<Poly>> {
    if c.is_one() {
        return Ok(Some(Poly::one()));
    }
    let mut g = Poly::one();
    for (p, e) in r.factor(c)?.factors {
        if e % 2 == 0 {
            return Ok(None);
        }
        g = r.mul(&g, &r.pow(&p, e.div_ceil(2) as u64));
    }
    Ok(Some(g))
}

/// Nonzero polynomials with constant term in {0, λ}, only odd-degree
/// monomials otherwise, and degree at most `max_deg`.
fn polynomial_parts(f: &crate::ffield::GfField, lambda: Fe, max_deg: i64) -> Vec<Poly> {
    let q = f.size() as u64;
    let odd_degs: Vec<usize> = (1..=max_deg.max(0) as usize).filter(|d| d % 2 == 1).collect();
    let mut out = vec![];
    for c0 in [0, lambda] {
        for idx in 0..q.pow(odd_degs.len() as u32) {
            let mut coeffs = vec![0 as Fe; odd_degs.last().map_or(1, |d| d + 1)];
            coeffs[0] = c0;
            let mut x = idx;
            for &d in &odd_degs {
                coeffs[d] = (x % q) as Fe;
                x /= q;
            }
            let p = Poly::new(coeffs);
            if !p.is_zero() {
                out.push(p);
            }
        }
    }
    out.sort_by_key(|p| (p.deg(), p.clone()));
    out
}

fn push_conductors(out: &mut Vec<Order>, field: &QuadField, max_size: i64) -> Result<()> {
    let base = Order { field: field.clone(), f: Poly::one() }.size_log();
    if base > max_size {
        return Ok(());
    }
    for df in 0..=(max_size - base) / 2 {
        for f in Poly::monics(field.fl.q, df as u32) {
            if f.is_one() && field.is_constant_extension() {
                continue;
            }
            out.push(Order::new(field.clone(), f)?);
        }
    }
    Ok(())
}

/// What to compute for each order besides the valuations and class numbers.
#[derive(Clone, Debug)]
pub struct SurveyOptions {
    /// Absolute precision (units of 1/T) of the singular moduli.
    pub want: i64,
    /// The t(az) valuations for deg a ≤ 2 and the twisted sums at every point.
    pub valuations: bool,
    /// Unit status, height bounds and the counts near elliptic points.
    pub bounds: bool,
    /// Assemble the Hilbert class polynomial when Σ max(0, log_q|j|) is at most this.
    pub hilbert_limit: i64,
}

impl Default for SurveyOptions {
    fn default() -> Self {
        SurveyOptions { want: crate::modforms::GUARD, valuations: true, bounds: true, hilbert_limit: 20 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitSurvey {
    pub method: &'static str,
    /// log_q |∏ j_i| over the distinct moduli.
    pub norm_degree: String,
    /// The same from the exact absolute values of the points.
    pub position_norm_degree: String,
    /// log_q of the constant term of the assembled Hilbert class polynomial.
    pub hilbert_constant_degree: Option<String>,
    pub is_unit: bool,
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitHeightCheck {
    pub height: String,
    pub upper: UpperBound,
    /// h(α) exceeds the bound valid for units, so α is not a unit.
    pub exceeds_upper: bool,
    pub nonunit: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValuationSurvey {
    pub t_checks: usize,
    pub sum_checks: usize,
    pub failures: Vec<String>,
}

/// The triples (δ, μ, ν) at which the twisted sums are evaluated.
pub const SUM_TRIPLES: [(u32, u32, u32); 3] = [(2, 0, 0), (2, 1, 1), (3, 1, 1)];

#[derive(Clone, Debug, Serialize)]
pub struct OrderSurvey {
    pub order: serde_json::Value,
    pub flavor: &'static str,
    /// ∞ is inert in the field.
    pub inert: bool,
    pub size_log: i64,
    pub disc_deg: Option<i64>,
    pub points: usize,
    pub moduli: usize,
    /// log_q |j| of the distinct moduli.
    pub log_abs_j: Vec<String>,
    /// Points whose numeric |j| differs from the exact value.
    pub brown_mismatches: Vec<String>,
    pub class: Option<ClassReport>,
    pub class_bound: Option<ClassBound>,
    pub height: String,
    pub unit: Option<UnitSurvey>,
    pub lower_bounds: Option<bounds::LowerBounds>,
    pub unit_height: Option<UnitHeightCheck>,
    pub near_counts: Vec<NearCount>,
    pub valuations: Option<ValuationSurvey>,
    /// Steps that ended in an error, as "step: error".
    pub errors: Vec<String>,
}

impl OrderSurvey {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
            && self.brown_mismatches.is_empty()
            && self.class.as_ref().is_none_or(|c| c.agree && c.orbit as usize == self.moduli)
            && self.class.as_ref().and_then(|c| c.l_route.as_ref()).is_none_or(|l| l.functional_equation_residual == 0)
            && self.class_bound.as_ref().is_none_or(|b| b.holds && b.holds_ok != Some(false))
            && self.unit.as_ref().is_none_or(|u| u.consistent && !u.is_unit)
            && self.unit_height.as_ref().is_none_or(|l| l.holds)
            && self.near_counts.iter().all(|c| c.ok())
            && self.valuations.as_ref().is_none_or(|a| a.failures.is_empty())
    }
}

pub fn flavor_name(f: Flavor) -> &'static str {
    match f {
        Flavor::Odd => "odd",
        Flavor::EvenSep => "even_sep",
        Flavor::EvenInsep => "even_insep",
    }
}

fn note<T>(errors: &mut Vec<String>, step: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(x) => Some(x),
        Err(e) => {
            errors.push(format!("{step}: {e}"));
            None
        }
    }
}

/// Everything the sweeps check for one order.
pub fn survey_order(order: &Order, opts: &SurveyOptions) -> Result<OrderSurvey> {
    let mut errors = vec![];
    let alg = AnyAlg::new(order)?;
    let points = enumerate(order)?;
    let values = eval_points(order, &alg, &points, opts.want)?;
    let mut brown_mismatches = vec![];
    for (p, v) in points.iter().zip(&values) {
        let exact = log_abs_j(order, p)?;
        if v.log_abs() != exact {
            brown_mismatches.push(format!("a = {}, b = {}: numeric {}, exact {exact}", p.a, p.b, v.log_abs()));
        }
    }
    let moduli = dedup(order, &alg, points.clone(), values)?;
    let logs: Vec<Ratio<i64>> = moduli.iter().map(|m| m.log_abs_j).collect();
    let height = weil_height(&logs);
    let class = note(&mut errors, "class numbers", class_report(order, opts.want));
    let h = moduli.len() as u64;
    let class_bound = if order.field.inert && order.disc().is_some_and(|d| d.deg() >= 1) {
        class.as_ref().and_then(|c| note(&mut errors, "class bound", check_class_bound(order, h as i64, c.h_ok)))
    } else {
        None
    };
    let mut unit = None;
    let mut lower_bounds = None;
    let mut unit_height = None;
    let mut near_counts = vec![];
    if opts.bounds {
        unit = note(&mut errors, "unit status", unit_survey(order, &points, &moduli, opts));
        lower_bounds = note(&mut errors, "lower bounds", bounds::lower_bounds_h(order, h));
        let dd = order.disc().map(|d| d.deg());
        if order.field.inert && dd.is_some_and(|d| d >= 4) {
            if let Some(up) = note(&mut errors, "upper bound", upper_bound_h(order, h, &BigRational::one())) {
                let hq = BigRational::new(BigInt::from(*height.numer()), BigInt::from(*height.denom()));
                let exceeds_upper = hq > up.optimized.hi;
                let nonunit = unit.as_ref().is_some_and(|u| !u.is_unit);
                unit_height = Some(UnitHeightCheck { height: height.to_string(), upper: up, exceeds_upper, nonunit, holds: exceeds_upper || nonunit });
            }
            for eps_log in [0, -1, -2] {
                if let Some(c) = note(&mut errors, "near count", near_count_check(order, &points, eps_log)) {
                    near_counts.push(c);
                }
            }
        }
    }
    let valuations = if opts.valuations { Some(valuation_survey(order, &alg, &points, &mut errors)) } else { None };
    Ok(OrderSurvey {
        order: order.descriptor(),
        flavor: flavor_name(order.flavor()),
        inert: order.field.inert,
        size_log: order.size_log(),
        disc_deg: order.disc().map(|d| d.deg()),
        points: points.len(),
        moduli: moduli.len(),
        log_abs_j: logs.iter().map(|v| v.to_string()).collect(),
        brown_mismatches,
        class,
        class_bound,
        height: height.to_string(),
        unit,
        lower_bounds,
        unit_height,
        near_counts,
        valuations,
        errors,
    })
}

fn unit_survey(order: &Order, points: &[CmPoint], moduli: &[SingularModulus], opts: &SurveyOptions) -> Result<UnitSurvey> {
    let position: Ratio<i64> = moduli.iter().map(|m| m.log_abs_j).sum();
    if !order.field.inert && order.flavor() != Flavor::EvenInsep {
        let cert = ramified_nonunit_certificate(order, points)?;
        let distinct: Ratio<i64> = moduli.iter().map(|m| m.log_abs_j).sum();
        return Ok(UnitSurvey {
            method: "ramified certificate",
            norm_degree: distinct.to_string(),
            position_norm_degree: position.to_string(),
            hilbert_constant_degree: None,
            is_unit: false,
            consistent: !cert.valuations.is_empty(),
        });
    }
    let nd = norm_degree_numeric(order, moduli)?;
    let positive: Ratio<i64> = moduli.iter().map(|m| m.log_abs_j.max(Ratio::zero())).sum();
    let hilbert = if positive <= Ratio::from_integer(opts.hilbert_limit) {
        let hp = hilbert_poly(order, opts.want, 8)?;
        let status = unit_check(&hp.coeffs);
        let deg = hp.constant_term_degree();
        if status == UnitStatus::Unit && !deg.is_zero() || hp.degree() != moduli.len() {
            return Err(Error::Invariant("Hilbert class polynomial disagrees with the moduli".into()));
        }
        Some(deg)
    } else {
        None
    };
    Ok(UnitSurvey {
        method: "norm degree",
        norm_degree: nd.to_string(),
        position_norm_degree: position.to_string(),
        hilbert_constant_degree: hilbert.map(|d| d.to_string()),
        is_unit: nd.is_zero(),
        consistent: nd == position && hilbert.is_none_or(|d| d == nd),
    })
}

fn valuation_survey(order: &Order, alg: &AnyAlg, points: &[CmPoint], errors: &mut Vec<String>) -> ValuationSurvey {
    let mut s = ValuationSurvey { t_checks: 0, sum_checks: 0, failures: vec![] };
    for p in points {
        let tag = format!("a = {}, b = {}", p.a, p.b);
        if let Some(checks) = note(errors, &format!("t valuations at {tag}"), t_valuations(order, alg, p, 2)) {
            for c in checks {
                s.t_checks += 1;
                if c.computed != c.predicted {
                    s.failures.push(format!("t valuation at {tag}, a = {}: {} vs {}", c.a, c.computed, c.predicted));
                }
            }
        }
        for (d, m, n) in SUM_TRIPLES {
            if let Some(c) = note(errors, &format!("twisted sum ({d},{m},{n}) at {tag}"), twisted_sum(order, alg, p, d, m, n)) {
                s.sum_checks += 1;
                if c.computed != c.predicted {
                    s.failures.push(format!("twisted sum ({d},{m},{n}) at {tag}: {} vs {}", c.computed, c.predicted));
                }
            }
        }
    }
    s
}

/// Surveys every order of size at most q^max_size, in parallel, in the order of [`orders`].
pub fn survey(fl: &Arc<Fields>, max_size: i64, opts: &SurveyOptions) -> Result<Vec<OrderSurvey>> {
    let os = orders(fl, max_size)?;
    os.par_iter().map(|o| survey_order(o, opts)).collect()
}

/// One distinct singular modulus in a pairwise search.
struct Entry {
    order: usize,
    modulus: SingularModulus,
}

/// A pair whose product is a polynomial to the working precision.
#[derive(Clone, Debug, Serialize)]
pub struct ProductHit {
    pub order1: serde_json::Value,
    pub point1: String,
    pub log_abs_j1: String,
    pub order2: serde_json::Value,
    pub point2: String,
    pub log_abs_j2: String,
    pub deg: i64,
    /// The product with coefficients written in F_q, or in F_{q²} when some lie outside F_q.
    pub product: String,
    pub coefficients_in_fq: bool,
    /// Absolute precision (in units of 1/T) to which the product was checked.
    pub precision: i64,
}

/// A candidate pair the search could not decide.
#[derive(Clone, Debug, Serialize)]
pub struct SkippedPair {
    pub order1: serde_json::Value,
    pub point1: String,
    pub order2: serde_json::Value,
    pub point2: String,
    /// log_q |j₁ j₂|.
    pub deg: String,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AndreOortReport {
    pub q: u32,
    pub max_size: i64,
    pub deg_bound: i64,
    pub guard: i64,
    pub orders: usize,
    pub moduli: usize,
    /// Unordered pairs (equal pairs included) with log_q|j₁j₂| an integer in [0, deg_bound].
    pub candidates: usize,
    /// Candidates with one ramified value whose ξ-component is visibly nonzero.
    pub ramified_excluded: usize,
    /// Candidates whose product has a nonzero digit below T^0.
    pub not_polynomial: usize,
    pub hits: Vec<ProductHit>,
    pub skipped: Vec<SkippedPair>,
    /// q² − 2: no hit may have degree at most this.
    pub forbidden_max_deg: i64,
    pub min_hit_deg: Option<i64>,
    pub errors: Vec<String>,
}

impl AndreOortReport {
    /// No polynomial product of degree ≤ q² − 2 was found and none could hide among the skipped pairs.
    pub fn ok(&self) -> bool {
        let forbidden = Ratio::from_integer(self.forbidden_max_deg);
        self.errors.is_empty()
            && self.hits.iter().all(|h| h.deg > self.forbidden_max_deg)
            && self.skipped.iter().all(|s| s.deg.parse::<Ratio<i64>>().map_or(true, |d| d > forbidden))
    }
}

fn point_label(p: &CmPoint) -> String {
    format!("a = {}, b = {}", p.a, p.b)
}

/// Coefficient of t^k in x·y.
fn product_coeff(f2: &crate::ffield::GfField, x: &Series, y: &Series, k: i64) -> Fe {
    let mut acc = 0;
    for (n, &a) in x.c.iter().enumerate() {
        let b = y.coeff(k - x.v - n as i64);
        if a != 0 && b != 0 {
            acc = f2.add(acc, f2.mul(a, b));
        }
    }
    acc
}

/// What became of the candidate pairs starting at one value.
#[derive(Default)]
struct PairTally {
    candidates: usize,
    ramified_excluded: usize,
    not_polynomial: usize,
    hits: Vec<ProductHit>,
    skipped: Vec<SkippedPair>,
}

/// Searches all pairs of singular moduli of orders of size at most
/// q^max_size for products lying in F_{q²}[T] with degree at most
/// `deg_bound`.
///
/// |j₁j₂| is known exactly from the positions of the points, so only pairs
/// with log_q|j₁j₂| an integer in [0, deg_bound] are evaluated. Values
/// with ramified ∞ are x + yξ with ξ outside F_{q²}((1/T)); a pair of one
/// such value and a value in F_{q²}((1/T)) has no product in F_{q²}[T] when
/// y is nonzero. Products of two values with ramified ∞ have
/// log_q|j₁j₂| ≥ q(q+1) and are reported as skipped if the bound admits them.
pub fn andre_oort_search(fl: &Arc<Fields>, max_size: i64, deg_bound: i64, guard: i64) -> Result<AndreOortReport> {
    let q = fl.q as i64;
    let os = orders(fl, max_size)?;
    let algs: Vec<AnyAlg> = os.iter().map(AnyAlg::new).collect::<Result<_>>()?;
    let per_order: Vec<Vec<SingularModulus>> = os.par_iter().map(|o| moduli_of(o, guard)).collect::<Result<_>>()?;
    let mut entries: Vec<Entry> = vec![];
    for (i, ms) in per_order.into_iter().enumerate() {
        entries.extend(ms.into_iter().map(|m| Entry { order: i, modulus: m }));
    }
    let mut by_log: Vec<usize> = (0..entries.len()).collect();
    by_log.sort_by_key(|&i| (entries[i].modulus.log_abs_j, i));
    let logs: Vec<Ratio<i64>> = by_log.iter().map(|&i| entries[i].modulus.log_abs_j).collect();
    let inert: Vec<bool> = entries.iter().map(|e| os[e.order].field.inert).collect();
    let y_nonzero: Vec<bool> = entries.iter().map(|e| !e.modulus.numeric.val.y.is_zero()).collect();
    let logs = &logs;
    let partners = |s: usize| {
        let li = logs[s];
        let start = logs.partition_point(|l| *l < -li);
        let end = logs.partition_point(|l| *l <= Ratio::from_integer(deg_bound) - li);
        (start..end).filter(move |&t| (li + logs[t]).is_integer())
    };
    let partners = &partners;
    // Pairs needing a product: not both ramified, and no visibly nonzero ξ-component.
    let multiplied = |i: usize, j: usize| {
        (inert[i] || inert[j]) && !(!inert[i] && y_nonzero[i]) && !(!inert[j] && y_nonzero[j])
    };

    // The product is known to absolute precision min(P₁ − deg j₂, P₂ − deg j₁).
    let need: Vec<i64> = (0..by_log.len())
        .into_par_iter()
        .map(|s| {
            let i = by_log[s];
            partners(s)
                .filter(|&t| multiplied(i, by_log[t]))
                .map(|t| guard + 1 + logs[t].ceil().to_integer().max(0))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let refined: Vec<(usize, Result<LocalVal>)> = (0..by_log.len())
        .into_par_iter()
        .filter(|&s| need[s] > entries[by_log[s]].modulus.numeric.val.x.prec)
        .map(|s| {
            let e = &entries[by_log[s]];
            (by_log[s], eval_j(&os[e.order], &algs[e.order], &e.modulus.point, need[s]).map(|v| v.val))
        })
        .collect();
    let mut vals: Vec<LocalVal> = entries.iter().map(|e| e.modulus.numeric.val.clone()).collect();
    let mut failed = vec![false; entries.len()];
    let mut errors = vec![];
    for (i, r) in refined {
        match r {
            Ok(v) => vals[i] = v,
            Err(e) => {
                failed[i] = true;
                errors.push(format!("re-evaluation at {}: {e}", point_label(&entries[i].modulus.point)));
            }
        }
    }

    let ring = crate::laurent::SeriesRing::new(fl.clone());
    let f2 = &fl.fq2;
    let skip = |a: usize, b: usize, reason: &str| {
        let (a, b) = (&entries[a], &entries[b]);
        SkippedPair {
            order1: os[a.order].descriptor(),
            point1: point_label(&a.modulus.point),
            order2: os[b.order].descriptor(),
            point2: point_label(&b.modulus.point),
            deg: (a.modulus.log_abs_j + b.modulus.log_abs_j).to_string(),
            reason: reason.into(),
        }
    };
    let tallies: Vec<PairTally> = (0..by_log.len())
        .into_par_iter()
        .map(|s| {
            let mut tally = PairTally::default();
            for t in partners(s).filter(|&t| t >= s) {
                let (i, j) = (by_log[s].min(by_log[t]), by_log[s].max(by_log[t]));
                tally.candidates += 1;
                if !inert[i] && !inert[j] {
                    tally.skipped.push(skip(i, j, "both values have ramified ∞"));
                    continue;
                }
                if !multiplied(i, j) || !inert[i] && !vals[i].y.is_zero() || !inert[j] && !vals[j].y.is_zero() {
                    tally.ramified_excluded += 1;
                    continue;
                }
                if failed[i] || failed[j] {
                    tally.skipped.push(skip(i, j, "precision exhausted"));
                    continue;
                }
                let (x, y) = (&vals[i].x, &vals[j].x);
                if product_coeff(f2, x, y, 1) != 0 {
                    tally.not_polynomial += 1;
                    continue;
                }
                let prod = ring.mul(x, y);
                if prod.prec < guard {
                    tally.skipped.push(skip(i, j, &format!("product known only to precision {}", prod.prec)));
                    continue;
                }
                let Some(p2) = ring.as_poly2(&prod) else {
                    tally.not_polynomial += 1;
                    continue;
                };
                if !inert[i] || !inert[j] {
                    tally.skipped.push(skip(i, j, "ramified value with ξ-component zero to precision"));
                    continue;
                }
                let (a, b) = (&entries[i], &entries[j]);
                let restricted: Option<Vec<Fe>> = p2.c.iter().map(|&c| fl.restrict(c)).collect();
                let coefficients_in_fq = restricted.is_some();
                let product = match restricted {
                    Some(c) => Poly::new(c).to_string(),
                    None => format!("{p2} over F_{{q^2}}"),
                };
                tally.hits.push(ProductHit {
                    order1: os[a.order].descriptor(),
                    point1: point_label(&a.modulus.point),
                    log_abs_j1: a.modulus.log_abs_j.to_string(),
                    order2: os[b.order].descriptor(),
                    point2: point_label(&b.modulus.point),
                    log_abs_j2: b.modulus.log_abs_j.to_string(),
                    deg: p2.deg(),
                    product,
                    coefficients_in_fq,
                    precision: prod.prec,
                });
            }
            tally
        })
        .collect();

    let mut report = AndreOortReport {
        q: fl.q,
        max_size,
        deg_bound,
        guard,
        orders: os.len(),
        moduli: entries.len(),
        candidates: 0,
        ramified_excluded: 0,
        not_polynomial: 0,
        hits: vec![],
        skipped: vec![],
        forbidden_max_deg: q * q - 2,
        min_hit_deg: None,
        errors,
    };
    for t in tallies {
        report.candidates += t.candidates;
        report.ramified_excluded += t.ramified_excluded;
        report.not_polynomial += t.not_polynomial;
        report.hits.extend(t.hits);
        report.skipped.extend(t.skipped);
    }
    report.hits.sort_by_key(|h| h.deg);
    report.min_hit_deg = report.hits.first().map(|h| h.deg);
    Ok(report)
}

/// Unit status of one order.
#[derive(Clone, Debug, Serialize)]
pub struct UnitRow {
    pub order: serde_json::Value,
    pub flavor: &'static str,
    pub size_log: i64,
    pub moduli: usize,
    pub unit: Option<UnitSurvey>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitSearch {
    pub q: u32,
    pub max_size: i64,
    pub rows: Vec<UnitRow>,
    /// Orders whose singular moduli are units.
    pub units: usize,
    /// Orders with an error or an inconsistent norm degree.
    pub failures: usize,
}

impl UnitSearch {
    pub fn ok(&self) -> bool {
        self.units == 0 && self.failures == 0
    }
}

fn unit_row(order: &Order, opts: &SurveyOptions) -> UnitRow {
    let status = (|| {
        let alg = AnyAlg::new(order)?;
        let points = enumerate(order)?;
        let values = eval_points(order, &alg, &points, opts.want)?;
        let moduli = dedup(order, &alg, points.clone(), values)?;
        Ok::<_, Error>((moduli.len(), unit_survey(order, &points, &moduli, opts)?))
    })();
    let (moduli, unit, error) = match status {
        Ok((m, u)) => (m, Some(u), None),
        Err(e) => (0, None, Some(e.to_string())),
    };
    UnitRow { order: order.descriptor(), flavor: flavor_name(order.flavor()), size_log: order.size_log(), moduli, unit, error }
}

/// Unit status and norm degree of every order of size at most q^max_size.
pub fn unit_search(fl: &Arc<Fields>, max_size: i64, opts: &SurveyOptions) -> Result<UnitSearch> {
    let os = orders(fl, max_size)?;
    let rows: Vec<UnitRow> = os.par_iter().map(|o| unit_row(o, opts)).collect();
    let units = rows.iter().filter(|r| r.unit.as_ref().is_some_and(|u| u.is_unit)).count();
    let failures = rows.iter().filter(|r| r.error.is_some() || r.unit.as_ref().is_some_and(|u| !u.consistent)).count();
    Ok(UnitSearch { q: fl.q, max_size, rows, units, failures })
}

/// Sizes of the exhaustive sweeps run by [`verify`].
#[derive(Clone, Debug, Serialize)]
pub struct VerifyOptions {
    pub max_size: i64,
    pub deg_bound: i64,
    pub congruence_deg_a: u32,
    pub congruence_deg_data: u32,
    pub residue_deg_m: u32,
    pub analytic_deg: u32,
    #[serde(skip)]
    pub survey: SurveyOptions,
}

impl VerifyOptions {
    /// Sweep sizes scaled so that each sweep touches about as many
    /// polynomials as it does for q = 3.
    pub fn for_q(q: u32, max_size: i64) -> VerifyOptions {
        let largest = |budget: u64| (0..).take_while(|&d| (q as u64).pow(d) <= budget).last().unwrap_or(0);
        let deg_a = largest(243).min(5);
        VerifyOptions {
            max_size,
            deg_bound: (q * q) as i64 - 1,
            congruence_deg_a: deg_a,
            congruence_deg_data: deg_a + 1,
            residue_deg_m: largest(81).min(4),
            analytic_deg: largest(59049).min(10),
            survey: SurveyOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyCheck {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub q: u32,
    pub options: VerifyOptions,
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

fn order_check(name: &'static str, surveys: &[OrderSurvey], bad: impl Fn(&OrderSurvey) -> bool) -> VerifyCheck {
    let failing: Vec<String> = surveys.iter().filter(|s| bad(s)).map(|s| s.order.to_string()).collect();
    let detail = match failing.first() {
        None => format!("{} orders", surveys.len()),
        Some(first) => format!("{} of {} orders fail, first {first}", failing.len(), surveys.len()),
    };
    VerifyCheck { name, ok: failing.is_empty(), detail }
}

/// Runs every check: the per-order survey, the exhaustive counting and
/// analytic sweeps, the discriminant certificate and the product search.
pub fn verify(fl: &Arc<Fields>, opts: &VerifyOptions) -> Result<VerifyReport> {
    let q = fl.q;
    let surveys = survey(fl, opts.max_size, &opts.survey)?;
    let mut checks = vec![
        order_check("survey errors", &surveys, |s| !s.errors.is_empty()),
        order_check("valuations at every point", &surveys, |s| !s.brown_mismatches.is_empty()),
        order_check("class numbers by three routes", &surveys, |s| {
            s.class.as_ref().is_some_and(|c| {
                !c.agree
                    || c.orbit as usize != s.moduli
                    || c.l_route.as_ref().is_some_and(|l| l.functional_equation_residual != 0)
            })
        }),
        order_check("class number bound", &surveys, |s| {
            s.class_bound.as_ref().is_some_and(|b| !b.holds || b.holds_ok == Some(false))
        }),
        order_check("no units", &surveys, |s| s.unit.as_ref().is_some_and(|u| u.is_unit || !u.consistent)),
        order_check("height against the unit bound", &surveys, |s| s.unit_height.as_ref().is_some_and(|l| !l.holds)),
        order_check("points near elliptic points", &surveys, |s| s.near_counts.iter().any(|c| !c.ok())),
        order_check("t(az) valuations and twisted sums", &surveys, |s| {
            s.valuations.as_ref().is_some_and(|a| !a.failures.is_empty())
        }),
    ];
    let cong = bounds::congruence_sweep(q, opts.congruence_deg_a, opts.congruence_deg_data)?;
    checks.push(VerifyCheck {
        name: "quadratic congruence counts",
        ok: cong.ok(),
        detail: format!("{} instances, {} failures", cong.instances, cong.failures.len()),
    });
    let res = bounds::residue_count_sweep(q, opts.residue_deg_m)?;
    checks.push(VerifyCheck {
        name: "residue class counts",
        ok: res.failures.is_empty(),
        detail: format!("{} cases, worst ratio {}", res.cases, res.worst_ratio),
    });
    let an = bounds::analytic_sweep(q, opts.analytic_deg)?;
    checks.push(VerifyCheck {
        name: "divisor statistics",
        ok: an.ok(),
        detail: format!("degrees ≤ {}, Mertens constant {}", opts.analytic_deg, an.mertens_constant),
    });
    let cert = bounds::final_certificate(q)?;
    checks.push(VerifyCheck {
        name: "discriminant certificate",
        ok: cert.ok,
        detail: format!("log_q log_q |D|^(1/2) ≤ {}", cert.final_bound_loglog),
    });
    let ao = andre_oort_search(fl, opts.max_size, opts.deg_bound, opts.survey.want)?;
    checks.push(VerifyCheck {
        name: "products of singular moduli",
        ok: ao.ok(),
        detail: format!(
            "{} candidates, {} hits, least degree {}, {} skipped",
            ao.candidates,
            ao.hits.len(),
            ao.min_hit_deg.map_or("-".into(), |d| d.to_string()),
            ao.skipped.len()
        ),
    });
    Ok(VerifyReport { q, options: opts.clone(), checks })
}
