//! Piecewise 5G profit for the uniform market when WiFi has users.

use crate::error::{Error, Result};
use crate::model::MarketParams;
use crate::stage2::{boundary_polynomial, interior_polynomial, solve_x2_hat};

/// 5G revenue from the piecewise expression in the WiFi region:
///
/// * `N·p1` when `p1 ≤ V1 − ū − k(1 − αx̄2²)²`;
/// * `N·p1(s + αx2*²)` when `p1` lies between that bound and
///   `V1 − ū − k·x̄2′²(1 − αx̄2′)²`,
///
/// where `s = √((V1 − ū − p1)/k)`, `x̄2` is the greatest full-market root
/// in `[x̂2, 1)`, `x̄2′` the greatest interior root in `(0, 1)` that is an
/// actual interior split (`0 ≤ s − x + αx²` and `s + αx² < 1`), and `x2*`
/// is the larger root admissible at `p1`.
///
/// Needs `V1 = V2`, `β = 0` and `α > 0`; prices outside both pieces are
/// reported as unsupported.
pub fn pi1_simplified(params: &MarketParams, p1: f64, p2: f64) -> Result<f64> {
    if !params.is_baseline() || params.alpha() == 0.0 {
        return Err(Error::Unsupported(
            "the piecewise profit needs V1 = V2, beta = 0 and alpha > 0".into(),
        ));
    }
    for (what, v) in [("p1", p1), ("p2", p2)] {
        if !(v >= 0.0) {
            return Err(Error::Domain {
                what,
                value: v,
                domain: "[0, ∞)",
            });
        }
    }
    if p1 == 0.0 {
        return Ok(0.0);
    }
    let (a, k, m, n) = (params.alpha(), params.k(), params.margin(), params.n());
    let x_hat = solve_x2_hat(a)?;
    let x_full = boundary_polynomial(params, p2)
        .real_roots_in(x_hat, 1.0)
        .into_iter()
        .rfind(|&x| x < 1.0);
    if let Some(x) = x_full {
        if p1 <= m - k * (1.0 - a * x * x).powi(2) {
            return Ok(n * p1);
        }
    }
    let (x_int, s) = match interior_polynomial(params, p1, p2) {
        Some((poly, s)) => (
            poly.real_roots_in(0.0, 1.0)
                .into_iter()
                .rfind(|&x| x > 0.0 && x < 1.0 && s - x + a * x * x >= 0.0 && s + a * x * x < 1.0),
            s,
        ),
        None => (None, 0.0),
    };
    let lower = x_full.map_or(f64::NEG_INFINITY, |x| m - k * (1.0 - a * x * x).powi(2));
    if let Some(xi) = x_int {
        let upper = m - k * xi * xi * (1.0 - a * xi).powi(2);
        if p1 > lower && p1 < upper {
            // Past the first piece the full-market root is no longer an
            // equilibrium, so the larger of the two admissible roots is x̄2′.
            return Ok(n * p1 * (s + a * xi * xi));
        }
    }
    Err(Error::Unsupported(format!(
        "(p1, p2) = ({p1}, {p2}) is outside the WiFi region"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::profit_5g;
    use crate::stage2::{equilibrium_uniform, Regime};

    fn params(q: f64) -> MarketParams {
        MarketParams::default().with(|r| r.q = q).unwrap()
    }

    #[test]
    fn full_market_piece() {
        let p = params(180.0);
        assert_eq!(pi1_simplified(&p, 100.0, 20.0).unwrap(), 1e5 * 100.0);
        assert_eq!(pi1_simplified(&p, 0.0, 20.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_other_markets() {
        let p = params(60.0).with(|r| r.beta = 10.0).unwrap();
        assert!(matches!(pi1_simplified(&p, 100.0, 20.0), Err(Error::Unsupported(_))));
        let p = params(60.0).with(|r| r.alpha = 0.0).unwrap();
        assert!(pi1_simplified(&p, 100.0, 20.0).is_err());
        assert!(pi1_simplified(&params(60.0), 3000.0, 20.0).is_err());
    }

    #[test]
    fn agrees_with_solved_market() {
        for q in [30.0, 60.0, 180.0] {
            let p = params(q);
            let mut checked = 0;
            for i in 1..=15 {
                for j in 1..=15 {
                    let p1 = p.margin() * i as f64 / 16.0;
                    let p2 = 400.0 * j as f64 / 16.0;
                    let eq = equilibrium_uniform(&p, p1, p2).unwrap();
                    if !matches!(eq.regime, Regime::FullMarketSplit | Regime::InteriorSplit) {
                        continue;
                    }
                    let Ok(v) = pi1_simplified(&p, p1, p2) else { continue };
                    let want = profit_5g(&p, &eq.state, p1);
                    assert!((v - want).abs() <= 1e-6 * want, "Q={q} p1={p1} p2={p2}: {v} vs {want}");
                    checked += 1;
                }
            }
            assert!(checked > 0, "Q={q}");
        }
    }
}
