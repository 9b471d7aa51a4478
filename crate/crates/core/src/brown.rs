//! Exact absolute values of singular moduli from the position of the CM
//! point, and the quantities derived from them (Weil heights, product
//! degrees, the non-unit certificate for ramified ∞).

use num_rational::Ratio;
use num_traits::Zero;

use crate::cm::CmPoint;
use crate::error::{Error, Result};
use crate::quad::Order;

fn qpow(q: i64, e: i64) -> Result<i64> {
    u32::try_from(e)
        .ok()
        .and_then(|e| q.checked_pow(e))
        .ok_or_else(|| Error::Invalid(format!("q^{e} does not fit the exact range")))
}

/// log_q |j(z)|:
/// * ramified ∞: (q+1)qⁿ/2 with n ≥ 1;
/// * inert ∞, n ≥ 1: q^{n+1};
/// * inert ∞, n = 0: q + (q+1)·log_q |z − e|.
pub fn log_abs_j(order: &Order, pt: &CmPoint) -> Result<Ratio<i64>> {
    let q = order.q() as i64;
    if !order.field.inert {
        if pt.n < 1 {
            return Err(Error::Invariant(format!("reduced point with n = {} for ramified ∞", pt.n)));
        }
        return Ok(Ratio::new((q + 1) * qpow(q, pt.n)?, 2));
    }
    if pt.n >= 1 {
        return Ok(Ratio::from_integer(qpow(q, pt.n + 1)?));
    }
    let nb = pt
        .neighbor
        .ok_or_else(|| Error::Invariant("n = 0 point for inert ∞ without an elliptic neighbor".into()))?;
    Ok(Ratio::from_integer(q + (q + 1) * nb.dist_deg))
}

/// Weil height of a singular modulus from the valuations of its distinct
/// conjugates: finite places contribute nothing since j is integral over A.
pub fn weil_height(conjugates: &[Ratio<i64>]) -> Ratio<i64> {
    if conjugates.is_empty() {
        return Ratio::zero();
    }
    let s: Ratio<i64> = conjugates.iter().map(|v| v.max(&Ratio::zero()).to_owned()).sum();
    s / conjugates.len() as i64
}

/// log_q |j₁ j₂|.
pub fn product_degree(a: Ratio<i64>, b: Ratio<i64>) -> Ratio<i64> {
    a + b
}

/// Every conjugate of a singular modulus with ramified ∞ has |j| ≥ q^{q(q+1)/2} > 1.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RamifiedCertificate {
    pub floor: String,
    pub valuations: Vec<String>,
    pub norm_degree: String,
}

pub fn ramified_nonunit_certificate(order: &Order, points: &[CmPoint]) -> Result<RamifiedCertificate> {
    if order.field.inert {
        return Err(Error::Invalid("the certificate applies to ramified ∞ only".into()));
    }
    let q = order.q() as i64;
    let floor = Ratio::new(q * (q + 1), 2);
    let mut vals = Vec::with_capacity(points.len());
    for p in points {
        let v = log_abs_j(order, p)?;
        if v < floor {
            return Err(Error::Invariant(format!("conjugate with log_q|j| = {v} below {floor}")));
        }
        vals.push(v);
    }
    let total: Ratio<i64> = vals.iter().copied().sum();
    Ok(RamifiedCertificate {
        floor: floor.to_string(),
        valuations: vals.iter().map(|v| v.to_string()).collect(),
        norm_degree: total.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cm::enumerate;
    use crate::ffield::Fields;
    use crate::poly::{Poly, PolyRing};
    use crate::quad::QuadField;

    #[test]
    fn hayes_order_valuations() {
        let fl = Fields::new(3).unwrap();
        let d = PolyRing::new(&fl.fq).parse("T-T^2").unwrap();
        let o = Order::from_disc(&fl, &d).unwrap();
        let pts = enumerate(&o).unwrap();
        assert_eq!(log_abs_j(&o, &pts[0]).unwrap(), Ratio::from_integer(9));
        assert_eq!(log_abs_j(&o, &pts[1]).unwrap(), Ratio::from_integer(-1));
        let h = weil_height(&[Ratio::from_integer(9), Ratio::from_integer(-1)]);
        assert_eq!(h, Ratio::new(9, 2));
        assert!(h >= Ratio::new(3, 2));
        assert_eq!(product_degree(Ratio::from_integer(9), Ratio::from_integer(-1)), Ratio::from_integer(8));
        assert!(ramified_nonunit_certificate(&o, &pts).is_err());
    }

    #[test]
    fn ramified_certificates() {
        let fl = Fields::new(3).unwrap();
        let o = Order::from_disc(&fl, &Poly::t()).unwrap();
        let pts = enumerate(&o).unwrap();
        let c = ramified_nonunit_certificate(&o, &pts).unwrap();
        assert!(c.valuations.iter().all(|v| v.parse::<Ratio<i64>>().unwrap() >= Ratio::from_integer(6)));
        let fl = Fields::new(2).unwrap();
        let f = QuadField::even_insep(&fl).unwrap();
        let o = Order::new(f.clone(), Poly::one()).unwrap();
        let pts = enumerate(&o).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(log_abs_j(&o, &pts[0]).unwrap(), Ratio::from_integer(3));
        let o = Order::new(f, Poly::t()).unwrap();
        let pts = enumerate(&o).unwrap();
        let c = ramified_nonunit_certificate(&o, &pts).unwrap();
        assert!(c.valuations.iter().all(|v| v.parse::<Ratio<i64>>().unwrap() >= Ratio::from_integer(3)));
    }
}
