//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with its own harness so the lines are printed on every run. A
//! criterion listed in `KNOWN_FAILURES` prints FAIL without failing the run;
//! the README explains each entry.

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

use drinfeld_cm::bounds::{analytic_sweep, congruence_sweep, final_certificate, residue_count_sweep};
use drinfeld_cm::ffield::Fields;
use drinfeld_cm::laurent::EXACT;
use drinfeld_cm::modforms::{eval_j, hilbert_poly, moduli_of, AnyAlg, GUARD};
use drinfeld_cm::poly::PolyRing;
use drinfeld_cm::quad::Order;
use drinfeld_cm::sweep::{andre_oort_search, survey, OrderSurvey, SurveyOptions};

/// Largest log_q of the order size in the sweeps.
const MAX_SIZE: i64 = 6;

/// Criteria expected to fail, with the reason printed next to them.
const KNOWN_FAILURES: [(u32, &str); 1] =
    [(8, "the q = 2 window [10387.5, 10387.6] excludes 2400·3/ln 2 = 10387.4042...")];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fields(q: u32) -> Arc<Fields> {
    Fields::new(q).unwrap()
}

fn order_t_minus_t2() -> Order {
    let fl = fields(3);
    let d = PolyRing::new(&fl.fq).parse("T-T^2").unwrap();
    Order::from_disc(&fl, &d).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let o = order_t_minus_t2();
    let r = o.field.ring();
    let d = r.parse("T-T^2").unwrap();
    let ms = moduli_of(&o, 100).unwrap();
    let logs: Vec<Ratio<i64>> = ms.iter().map(|m| m.log_abs_j).collect();
    let numeric: Vec<Ratio<i64>> = ms.iter().map(|m| m.numeric.log_abs()).collect();
    let logs_ok = logs == [Ratio::from_integer(9), Ratio::from_integer(-1)] && numeric == logs;

    let hp = hilbert_poly(&o, 100, 8).unwrap();
    let constant_ok = hp.degree() == 2 && hp.coeffs[0].0 == r.pow(&d, 4) && hp.coeffs[0].1.is_zero();

    // (T − T²)²(1 + T + √(T² − T))⁵ for either square root.
    let alg = AnyAlg::new(&o).unwrap();
    let ring = alg.ring().clone();
    let big = ms.iter().find(|m| m.log_abs_j == Ratio::from_integer(9)).unwrap();
    let j = eval_j(&o, &alg, &big.point, 100).unwrap().val.x;
    let root = ring.sqrt(&ring.from_poly(&r.parse("T^2-T").unwrap(), EXACT).truncated(j.prec + 20)).unwrap();
    let matches = [root.clone(), ring.neg(&root)]
        .iter()
        .filter(|s| {
            let base = ring.add(&ring.from_poly(&r.parse("1+T").unwrap(), EXACT), s);
            let cand = ring.mul(&ring.square(&ring.from_poly(&d, EXACT)), &ring.pow(&base, 5));
            ring.agree(&cand, &j)
        })
        .count();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        logs_ok && constant_ok && matches == 1 && secs < 60.0,
        format!(
            "log_q|j| = {}, constant term {} = (T-T^2)^4: {constant_ok}, closed form matches {matches} branch to 1/T^{}, {secs:.1} s",
            logs.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", "),
            hp.coeffs[0].0,
            j.prec
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for q in [2u32, 3] {
        let fl = fields(q);
        let rep = andre_oort_search(&fl, MAX_SIZE, (q * q) as i64 - 1, GUARD).unwrap();
        let low_hit = rep.hits.iter().any(|h| h.deg <= (q * q) as i64 - 2);
        let ok = rep.ok() && !low_hit && (q != 3 || rep.hits.iter().any(|h| h.deg == 8));
        pass &= ok;
        parts.push(format!(
            "q = {q}: {} moduli, {} candidate pairs, {} hits, least degree {}, {} skipped",
            rep.moduli,
            rep.candidates,
            rep.hits.len(),
            rep.min_hit_deg.map_or("-".into(), |d| d.to_string()),
            rep.skipped.len()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_3(surveys: &[(u32, Vec<OrderSurvey>)]) -> Outcome {
    let mut points = 0;
    let mut mismatches = 0;
    let mut flavors = std::collections::BTreeSet::new();
    for (_, ss) in surveys {
        for s in ss {
            points += s.points;
            mismatches += s.brown_mismatches.len();
            flavors.insert(s.flavor);
        }
    }
    outcome(
        mismatches == 0 && flavors.len() == 3,
        format!("{points} points over flavors {flavors:?}, {mismatches} mismatches"),
    )
}

fn criterion_4(surveys: &[(u32, Vec<OrderSurvey>)]) -> Outcome {
    let mut checked = 0;
    let mut bad = 0;
    for (_, ss) in surveys {
        for s in ss.iter().filter(|s| s.inert && s.flavor != "even_insep") {
            let Some(l) = s.class.as_ref().and_then(|c| c.l_route.as_ref()) else {
                bad += 1;
                continue;
            };
            let c = s.class.as_ref().unwrap();
            checked += 1;
            if !(c.agree && c.orbit as usize == s.moduli && l.functional_equation_residual == 0) {
                bad += 1;
            }
        }
    }
    let o = order_t_minus_t2();
    let rep = drinfeld_cm::classno::class_report(&o, GUARD).unwrap();
    let l = rep.l_route.clone().unwrap();
    let hayes_ok = rep.h_ok == 2
        && l.lambda == [1, 1]
        && l.lambda.iter().sum::<i64>() == 2 * l.h_k
        && l.functional_equation_residual == 0;
    outcome(
        bad == 0 && checked > 0 && hayes_ok,
        format!(
            "{checked} inert separable orders agree ({bad} disagree); D = T-T^2: h = {}, Lambda = {:?}, Lambda(1) = {}, residual {}",
            rep.h_ok,
            l.lambda,
            l.lambda.iter().sum::<i64>(),
            l.functional_equation_residual
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for q in [2u32, 3] {
        let c = congruence_sweep(q, 5, 6).unwrap();
        let e = residue_count_sweep(q, 4).unwrap();
        pass &= c.ok() && e.failures.is_empty();
        parts.push(format!(
            "q = {q}: {} congruences ({} constructions, {} failures), {} residue counts ({} failures)",
            c.instances,
            c.constructions,
            c.failures.len(),
            e.cases,
            e.failures.len()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for q in [2u32, 3] {
        let a = analytic_sweep(q, 10).unwrap();
        pass &= a.ok();
        parts.push(format!("q = {q}: degrees 1..=10, ok = {}, Mertens constant {}", a.ok(), a.mertens_constant));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_7(surveys: &[(u32, Vec<OrderSurvey>)]) -> Outcome {
    let (mut ramified, mut assembled, mut by_norm, mut units, mut bad, mut heights, mut height_bad) = (0, 0, 0, 0, 0, 0, 0);
    for (_, ss) in surveys {
        for s in ss {
            let Some(u) = &s.unit else {
                bad += 1;
                continue;
            };
            if u.is_unit {
                units += 1;
            }
            if !u.consistent {
                bad += 1;
            }
            match (u.method, &u.hilbert_constant_degree) {
                ("ramified certificate", _) => ramified += 1,
                (_, Some(d)) => {
                    assembled += 1;
                    if d.parse::<Ratio<i64>>().unwrap() <= Ratio::from_integer(0) {
                        bad += 1;
                    }
                }
                (_, None) => {
                    by_norm += 1;
                    if u.norm_degree.parse::<Ratio<i64>>().unwrap() <= Ratio::from_integer(0) {
                        bad += 1;
                    }
                }
            }
            if s.inert && s.disc_deg.is_some_and(|d| d >= 4) {
                heights += 1;
                if !s.unit_height.as_ref().is_some_and(|h| h.holds) {
                    height_bad += 1;
                }
            }
        }
    }
    outcome(
        units == 0 && bad == 0 && height_bad == 0 && heights > 0,
        format!(
            "{units} units; {ramified} ramified orders certified, {assembled} by assembled Hilbert constant term, {by_norm} by Σ log_q|j_i| > 0; {bad} failures; height consistency on {heights} inert orders with |D| >= q^4, {height_bad} failures"
        ),
    )
}

fn f64_close(x: &drinfeld_cm::interval::Interval, want: f64) -> bool {
    let width_ok = x.width() <= BigRational::new(BigInt::from(1), BigInt::from(10).pow(12));
    width_ok && (x.mid_f64() - want).abs() <= 1e-9 * want.abs().max(1.0)
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for q in [2u32, 3, 4, 5, 7, 8, 9] {
        let c = final_certificate(q).unwrap();
        let (qf, l2, lq) = (q as f64, std::f64::consts::LN_2, (q as f64).ln());
        let first = 2400.0 * (qf + 1.0) / l2;
        let second = (240.0 * (qf + 1.0) / (l2 * lq)).powi(2);
        let fourth = 1200.0 * (qf + 1.0).powi(2) / l2 + 120.0 * (3.0 * lq + 8.0) / l2;
        let ok = c.ok
            && f64_close(&c.final_bound_loglog, first)
            && f64_close(&c.branches[0].bound, first)
            && f64_close(&c.branches[1].bound, second)
            && f64_close(&c.branches[3].bound, fourth)
            && c.final_is_first;
        pass &= ok;
        if !ok {
            parts.push(format!("q = {q}: constants or monotonicity samples fail"));
        }
    }
    let c2 = final_certificate(2).unwrap();
    let lo = BigRational::new(BigInt::from(103875), BigInt::from(10));
    let hi = BigRational::new(BigInt::from(103876), BigInt::from(10));
    let in_window = c2.final_bound_loglog.lo >= lo && c2.final_bound_loglog.hi <= hi;
    parts.push(format!(
        "q in {{2,3,4,5,7,8,9}}: 2400(q+1)/ln 2 and the other branch constants reproduced with outward rounding: {pass}; q = 2 bound {} in [10387.5, 10387.6]: {in_window}",
        c2.final_bound_loglog
    ));
    outcome(pass && in_window, parts.join("; "))
}

fn criterion_9(surveys: &[(u32, Vec<OrderSurvey>)]) -> Outcome {
    let (mut t, mut sums, mut failures, mut errors) = (0, 0, 0, 0);
    for (_, ss) in surveys {
        for s in ss {
            match &s.valuations {
                Some(v) => {
                    t += v.t_checks;
                    sums += v.sum_checks;
                    failures += v.failures.len();
                }
                None => errors += 1,
            }
            errors += s.errors.iter().filter(|e| e.starts_with("t valuations") || e.starts_with("twisted sum")).count();
        }
    }
    outcome(
        failures == 0 && errors == 0 && t > 0 && sums > 0,
        format!("{t} t(az) valuations with deg a <= 2 and {sums} twisted sums, {failures} mismatches, {errors} errors"),
    )
}

fn main() {
    let start = Instant::now();
    let surveys: Vec<(u32, Vec<OrderSurvey>)> = [2u32, 3]
        .iter()
        .map(|&q| (q, survey(&fields(q), MAX_SIZE, &SurveyOptions::default()).unwrap()))
        .collect();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "singular moduli of discriminant T - T^2", criterion_1()),
        (2, "products of singular moduli", criterion_2()),
        (3, "valuations from positions vs numeric", criterion_3(&surveys)),
        (4, "class numbers by three routes", criterion_4(&surveys)),
        (5, "quadratic congruence counts", criterion_5()),
        (6, "divisor statistics", criterion_6()),
        (7, "no units", criterion_7(&surveys)),
        (8, "discriminant certificate constants", criterion_8()),
        (9, "t(az) valuations and twisted sums", criterion_9(&surveys)),
    ];
    let mut unexpected = vec![];
    for (n, name, o) in &results {
        let known = KNOWN_FAILURES.iter().find(|(k, _)| k == n);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} {verdict}: {name}: {}", o.detail);
        if !o.pass {
            match known {
                Some((_, why)) => println!("    known failure: {why}"),
                None => unexpected.push(*n),
            }
        }
    }
    println!("acceptance finished in {:.0} s", start.elapsed().as_secs_f64());
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
