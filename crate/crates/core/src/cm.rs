//! Reduced CM points of an order and their position relative to the
//! elliptic points F_{q²} ∖ F_q.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::ffield::Fe;
use crate::laurent::Series;
use crate::poly::Poly;
use crate::quad::{FieldData, FlatAlg, LocalAlg, Order, QuadElem};

/// The nearest elliptic point e of a point with |z| = 1, and log_q |z − e|.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub e: Fe,
    pub dist_deg: i64,
}

/// A reduced CM point z built from (a, b, c).
#[derive(Clone, Debug)]
pub struct CmPoint {
    pub a: Poly,
    pub b: Poly,
    pub c: Poly,
    pub z: QuadElem,
    /// 2·log_q |z|.
    pub deg2: i64,
    /// Smallest integer n ≥ log_q |z|.
    pub n: i64,
    pub neighbor: Option<Neighbor>,
}

impl CmPoint {
    /// ε = n − log_q |z|.
    pub fn eps(&self) -> Ratio<i64> {
        Ratio::new(2 * self.n - self.deg2, 2)
    }
}

/// Upper bound on deg a for reduced points: |a|² ≤ |ac|.
fn max_deg_a(order: &Order) -> i64 {
    order.size_log() / 2
}

/// c from a and b, or None when a does not divide the norm form value.
fn solve_c(order: &Order, a: &Poly, b: &Poly) -> Option<Poly> {
    let r = order.field.ring();
    let f = &order.f;
    match &order.field.data {
        FieldData::Odd { .. } => {
            let d = order.disc().expect("odd orders have a discriminant");
            let num = r.sub(&r.square(b), &d);
            let four_a = r.scale(a, order.fl().fq.from_int(4));
            r.div_exact(&num, &four_a)
        }
        FieldData::EvenSep { g, rad_g, b: bb, .. } => {
            let fg = r.mul(f, g);
            let num = r.add(&r.add(&r.square(b), &r.mul(b, &fg)), &r.mul(&r.mul(&r.square(f), rad_g), bb));
            r.div_exact(&num, a)
        }
        FieldData::EvenInsep => {
            let num = r.add(&r.square(b), &r.mul(&r.square(f), &Poly::t()));
            r.div_exact(&num, a)
        }
    }
}

fn primitive(order: &Order, a: &Poly, b: &Poly, c: &Poly) -> bool {
    let r = order.field.ring();
    match order.field.data {
        FieldData::Odd { .. } => r.gcd(&r.gcd(a, b), c).is_one(),
        _ => r.gcd(&r.gcd(a, c), &order.f).is_one(),
    }
}

/// The exact element z attached to (a, b).
pub fn point_elem(order: &Order, a: &Poly, b: &Poly) -> QuadElem {
    let r = order.field.ring();
    match &order.field.data {
        FieldData::Odd { .. } => {
            QuadElem { x: r.neg(b), y: order.f.clone(), den: r.scale(a, order.fl().fq.from_int(2)) }
        }
        FieldData::EvenSep { g, .. } => QuadElem { x: b.clone(), y: r.mul(&order.f, g), den: a.clone() },
        FieldData::EvenInsep => QuadElem { x: b.clone(), y: order.f.clone(), den: a.clone() },
    }
}

/// Lower bound for log_q |z − e|: −deg D / 2 (odd q) or −deg(fG) (even q).
pub fn neighbor_floor(order: &Order) -> i64 {
    match &order.field.data {
        FieldData::Odd { .. } => -order.disc().expect("odd orders have a discriminant").deg() / 2,
        FieldData::EvenSep { g, .. } => -(order.f.deg() + g.deg()),
        FieldData::EvenInsep => 0,
    }
}

/// All reduced CM points of the order, sorted by (deg a, a, b).
pub fn enumerate(order: &Order) -> Result<Vec<CmPoint>> {
    let q = order.q();
    let flat = if order.field.inert { Some(FlatAlg::new(&order.field)?) } else { None };
    let mut out = Vec::new();
    for da in 0..=max_deg_a(order) {
        for a in Poly::monics(q, da as u32) {
            let bs: Box<dyn Iterator<Item = Poly>> =
                if da == 0 { Box::new(std::iter::once(Poly::zero())) } else { Box::new(Poly::all_below(q, da as u32)) };
            for b in bs {
                let Some(c) = solve_c(order, &a, &b) else { continue };
                if c.is_zero() || c.deg() < da || !primitive(order, &a, &b, &c) {
                    continue;
                }
                let z = point_elem(order, &a, &b);
                let deg2 = -order.field.val2(&z);
                let n = (deg2 + 1).div_euclid(2);
                let mut pt = CmPoint { a: a.clone(), b, c, z, deg2, n, neighbor: None };
                if let Some(alg) = &flat {
                    pt.neighbor = elliptic_neighbor(order, alg, &pt)?;
                }
                out.push(pt);
            }
        }
    }
    Ok(out)
}

/// The elliptic point e with |z − e| < 1 and the exact distance, when |z| = 1.
pub fn elliptic_neighbor(order: &Order, alg: &FlatAlg, pt: &CmPoint) -> Result<Option<Neighbor>> {
    if pt.deg2 != 0 || !order.field.inert {
        return Ok(None);
    }
    let fl = order.fl();
    let floor = neighbor_floor(order);
    let mut rel = 2 * (2 - floor);
    let cap = 64 * (2 - floor) + 256;
    loop {
        let s: Series = alg.embed(&pt.z, rel)?;
        debug_assert_eq!(s.v, 0);
        let e = s.lead();
        if fl.restrict(e).is_some() {
            return Ok(None);
        }
        let diff = alg.ring.sub(&s, &alg.ring.constant(e, crate::laurent::EXACT));
        if !diff.is_zero() {
            let nb = Neighbor { e, dist_deg: -diff.v };
            check_neighbor(order, nb, floor)?;
            return Ok(Some(nb));
        }
        if rel > cap {
            return Err(Error::Precision(format!("|z - e| not resolved at relative precision {rel}")));
        }
        rel *= 2;
    }
}

fn check_neighbor(order: &Order, nb: Neighbor, floor: i64) -> Result<()> {
    let f2 = &order.fl().fq2;
    let fl = order.fl();
    let ok = match &order.field.data {
        FieldData::Odd { .. } => {
            let sgn = order.disc().expect("odd orders have a discriminant").lead();
            // e² = sgn(D)/4.
            f2.mul(f2.mul(nb.e, nb.e), fl.emb(fl.fq.from_int(4))) == fl.emb(sgn)
        }
        FieldData::EvenSep { b, .. } => f2.add(f2.mul(nb.e, nb.e), nb.e) == fl.emb(b.lead()),
        FieldData::EvenInsep => false,
    };
    if !ok {
        return Err(Error::Invariant(format!("elliptic point {} fails its defining equation", nb.e)));
    }
    if nb.dist_deg >= 0 || nb.dist_deg < floor {
        return Err(Error::Invariant(format!("log_q|z - e| = {} outside [{floor}, 0)", nb.dist_deg)));
    }
    Ok(())
}

/// Points with an elliptic neighbor at distance < q^{eps_log}.
pub fn c_epsilon_set(points: &[CmPoint], eps_log: Ratio<i64>) -> Vec<&CmPoint> {
    points.iter().filter(|p| p.neighbor.is_some_and(|nb| Ratio::from_integer(nb.dist_deg) < eps_log)).collect()
}

/// 2·log_q |z|_A, with |z|_A = min over a ∈ A of |z − a|.
///
/// With z = (x + yξ)/den, the parts x/den ∈ k_∞ and yξ/den never cancel at
/// the leading term, so |z − a| = max(|x/den − a|, |yξ/den|) and the
/// minimum is attained at the polynomial part of x/den.
pub fn abs_a_deg2(order: &Order, z: &QuadElem) -> i64 {
    let r = order.field.ring();
    let d2 = 2 * z.den.deg();
    let y_part = if z.y.is_zero() { i64::MIN } else { 2 * z.y.deg() - order.field.v2_xi() - d2 };
    let frac = r.rem(&z.x, &z.den);
    let x_part = if frac.is_zero() { i64::MIN } else { 2 * frac.deg() - d2 };
    x_part.max(y_part)
}

/// TSV row: a, b, c, n, ε, e, log_q |z − e|.
pub fn tsv_row(pt: &CmPoint) -> String {
    let (e, d) = match pt.neighbor {
        Some(nb) => (nb.e.to_string(), nb.dist_deg.to_string()),
        None => ("-".into(), "-".into()),
    };
    format!("{}\t{}\t{}\t{}\t{}\t{}\t{}", pt.a, pt.b, pt.c, pt.n, pt.eps(), e, d)
}

/// Checks the defining identity of every point by exact arithmetic.
pub fn replay(order: &Order, pt: &CmPoint) -> bool {
    solve_c(order, &pt.a, &pt.b).is_some_and(|c| c == pt.c)
        && pt.a.is_monic()
        && (pt.b.is_zero() || pt.b.deg() < pt.a.deg())
        && pt.a.deg() <= pt.c.deg()
        && primitive(order, &pt.a, &pt.b, &pt.c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::Fields;
    use crate::poly::PolyRing;
    use crate::quad::QuadField;

    fn odd_order(q: u32, d: &str) -> Order {
        let fl = Fields::new(q).unwrap();
        let d = PolyRing::new(&fl.fq).parse(d).unwrap();
        Order::from_disc(&fl, &d).unwrap()
    }

    #[test]
    fn example_inert_t_minus_t2() {
        let o = odd_order(3, "T-T^2");
        let pts = enumerate(&o).unwrap();
        let r = o.field.ring();
        let got: Vec<(Poly, Poly)> = pts.iter().map(|p| (p.a.clone(), p.b.clone())).collect();
        let want: Vec<(Poly, Poly)> = [("1", "0"), ("T", "0"), ("T+1", "1"), ("T+1", "2"), ("T+2", "0")]
            .iter()
            .map(|(a, b)| (r.parse(a).unwrap(), r.parse(b).unwrap()))
            .collect();
        assert_eq!(got, want);
        let at = &pts[1];
        assert_eq!(at.c, r.parse("T+2").unwrap());
        assert_eq!(at.n, 0);
        let nb = at.neighbor.unwrap();
        assert_eq!(nb.dist_deg, -1);
        let f2 = &o.fl().fq2;
        assert_eq!(f2.mul(nb.e, nb.e), o.fl().emb(2));
        assert_eq!(pts[0].n, 1);
        assert!(pts[0].neighbor.is_none());
        let eps = c_epsilon_set(&pts, Ratio::from_integer(-1));
        assert!(eps.is_empty());
        assert_eq!(c_epsilon_set(&pts, Ratio::from_integer(0)).len(), pts.iter().filter(|p| p.neighbor.is_some()).count());
    }

    #[test]
    fn seed_point_ramified() {
        let o = odd_order(3, "T");
        let pts = enumerate(&o).unwrap();
        assert_eq!(pts[0].a, Poly::one());
        assert_eq!(pts[0].c, o.field.ring().parse("2*T").unwrap());
        assert_eq!(pts[0].deg2, 1);
        assert_eq!(pts[0].n, 1);
        assert_eq!(pts[0].eps(), Ratio::new(1, 2));
    }

    /// Whether e lies in the lattice A + Az with z = point_elem(a, b).
    fn in_lattice(o: &Order, z: &QuadElem, e: &QuadElem) -> bool {
        let r = o.field.ring();
        let Some(n) = r.div_exact(&r.mul(&e.y, &z.den), &r.mul(&e.den, &z.y)) else {
            return false;
        };
        let m_num = r.sub(&r.mul(&e.x, &z.den), &r.mul(&r.mul(&n, &z.x), &e.den));
        r.divides(&r.mul(&e.den, &z.den), &m_num)
    }

    /// The multiplier ring of A + Az is exactly the order: no element
    /// (f/p)·Gξ with p | f maps the lattice into itself.
    fn proper(o: &Order, a: &Poly, b: &Poly) -> bool {
        let r = o.field.ring();
        let z = point_elem(o, a, b);
        let g = match &o.field.data {
            FieldData::EvenSep { g, .. } => g.clone(),
            _ => Poly::one(),
        };
        if o.f.is_one() {
            return true;
        }
        r.factor(&o.f).unwrap().factors.iter().all(|(p, _)| {
            let w = QuadElem { x: Poly::zero(), y: r.mul(&r.div_exact(&o.f, p).unwrap(), &g), den: Poly::one() };
            !(in_lattice(o, &z, &w) && in_lattice(o, &z, &o.field.elem_mul(&w, &z)))
        })
    }

    /// Independent enumeration: exhaustive triple search over every a, b, c
    /// of bounded degree, checked against the closed-form conditions.
    fn brute_force(o: &Order) -> Vec<(Poly, Poly)> {
        let q = o.q();
        let r = o.field.ring();
        let bound = o.size_log() as u32 + 1;
        let mut out = vec![];
        for da in 0..bound {
            for a in Poly::monics(q, da) {
                for b in Poly::all_below(q, bound) {
                    if !b.is_zero() && b.deg() >= a.deg() {
                        continue;
                    }
                    for c in Poly::all_below(q, bound + 1) {
                        if c.is_zero() || c.deg() < a.deg() {
                            continue;
                        }
                        let ok = match &o.field.data {
                            FieldData::Odd { .. } => {
                                let four = o.fl().fq.from_int(4);
                                r.sub(&r.square(&b), &r.scale(&r.mul(&a, &c), four)) == o.disc().unwrap()
                                    && r.gcd(&r.gcd(&a, &b), &c).is_one()
                            }
                            FieldData::EvenSep { g, rad_g, b: bb, .. } => {
                                let rhs = r.add(
                                    &r.add(&r.square(&b), &r.mul(&b, &r.mul(&o.f, g))),
                                    &r.mul(&r.mul(&r.square(&o.f), rad_g), bb),
                                );
                                r.mul(&a, &c) == rhs && proper(o, &a, &b)
                            }
                            FieldData::EvenInsep => {
                                r.mul(&a, &c) == r.add(&r.square(&b), &r.mul(&r.square(&o.f), &Poly::t()))
                                    && proper(o, &a, &b)
                            }
                        };
                        if ok {
                            out.push((a.clone(), b.clone()));
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    fn check_order(o: &Order) {
        let pts = enumerate(o).unwrap();
        let mut got: Vec<(Poly, Poly)> = pts.iter().map(|p| (p.a.clone(), p.b.clone())).collect();
        got.sort();
        assert_eq!(got, brute_force(o), "{o:?}");
        let floor = neighbor_floor(o);
        for p in &pts {
            assert!(replay(o, p));
            assert!(p.deg2 >= 0);
            assert_eq!(abs_a_deg2(o, &p.z), p.deg2);
            if let Some(nb) = p.neighbor {
                assert!(nb.dist_deg >= floor);
                // The neighbor floor gives |a| = √|D| (odd) or |a| = |fG| (even).
                assert_eq!(2 * p.a.deg(), -2 * floor);
            }
        }
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for d in ["T-T^2", "T", "2*T^2+T+2", "T^3+2*T+1", "2*T^2", "2*T^4+T+2"] {
            check_order(&odd_order(3, d));
        }
        let fl = Fields::new(2).unwrap();
        let r = PolyRing::new(&fl.fq);
        for (b, c, f) in [("T^2+1", "T", "1"), ("T^2+1", "T", "T"), ("T^2+1", "T", "T^2"), ("T^3+T+1", "T^3", "1"), ("T^3+T+1", "T^2+T+1", "T"), ("1", "1", "T"), ("T^3+T+1", "1", "T+1"), ("T^2+T+1", "T^2+T+1", "1")] {
            let Ok(k) = QuadField::even_sep(&fl, &r.parse(b).unwrap(), &r.parse(c).unwrap()) else { continue };
            check_order(&Order::new(k, r.parse(f).unwrap()).unwrap());
        }
        for f in ["1", "T", "T^2", "T^2+T"] {
            check_order(&Order::new(QuadField::even_insep(&fl).unwrap(), r.parse(f).unwrap()).unwrap());
        }
    }

    /// |z|_A by direct search over a with deg a ≤ deg z + 1 using exact norms.
    #[test]
    fn abs_a_matches_search() {
        let o = odd_order(3, "2*T^4+T+1");
        let r = o.field.ring();
        for p in enumerate(&o).unwrap() {
            let top = (p.deg2 / 2 + 1) as u32;
            let best = Poly::all_below(3, top + 1)
                .map(|a| {
                    let w = QuadElem { x: r.sub(&p.z.x, &r.mul(&a, &p.z.den)), ..p.z.clone() };
                    -o.field.val2(&w)
                })
                .min()
                .unwrap();
            assert_eq!(best, p.deg2);
        }
    }
}
