//! Growth classes of coefficient sequences read off `limsup |c_{±k}|^{1/k^p}`.

use serde::{Deserialize, Serialize};

use super::coefficients::FourierSeq;
use crate::error::{Error, Result};
use crate::logdomain::ext_real;
use crate::sequences::{window_max, SeminormNet, WeightSequence, WindowPoint};

/// Shortest stored range the classifiers accept.
pub const MIN_ORDER: u64 = 64;

/// Default band half-width around 1.
pub const TAU_C: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CircleClass {
    Analytic,
    Hyperfunction,
    NotHyperfunction,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleClassification {
    /// `ln` of the root-test estimate in the final window.
    #[serde(with = "ext_real")]
    pub l_hat: f64,
    #[serde(with = "ext_real")]
    pub estimate: f64,
    pub window_trace: Vec<WindowPoint>,
    pub tau_c: f64,
    pub class: CircleClass,
}

/// Tail maxima of `ln|c_k| / k^{1/m}` over both signs of `k`, windows ending at `K/4, K/2, K`.
fn two_sided_trace(c: &FourierSeq, m: f64) -> Result<Vec<WindowPoint>> {
    let k_max = c.k_max();
    if k_max < MIN_ORDER {
        return Err(Error::WindowTooShort { n: k_max, min: MIN_ORDER });
    }
    let w = WeightSequence::new(m)?;
    let side = |sign: i64| SeminormNet::from_logs((1..=k_max).map(|k| (k, c.ln_abs(sign * k as i64))).collect());
    let (plus, minus) = (side(1)?, side(-1)?);
    [k_max / 4, k_max / 2, k_max]
        .iter()
        .map(|&end| {
            let l = window_max(&plus, &w, end)?.max(window_max(&minus, &w, end)?);
            Ok(WindowPoint { end, l_hat: l })
        })
        .collect()
}

fn non_increasing(t: &[WindowPoint]) -> bool {
    t.windows(2).all(|p| p[1].l_hat <= p[0].l_hat)
}

fn non_decreasing(t: &[WindowPoint]) -> bool {
    t.windows(2).all(|p| p[1].l_hat >= p[0].l_hat)
}

/// Analytic (`limsup |c_k|^{1/|k|} < 1`), hyperfunction (`<= 1`) or neither.
pub fn classify_circle_object(c: &FourierSeq, tau_c: f64) -> Result<CircleClassification> {
    let trace = two_sided_trace(c, 1.0)?;
    let l_hat = trace[2].l_hat;
    let estimate = l_hat.exp();
    let class = if estimate < 1.0 - tau_c {
        if non_increasing(&trace) {
            CircleClass::Analytic
        } else {
            CircleClass::Hyperfunction
        }
    } else if estimate <= 1.0 + tau_c {
        CircleClass::Hyperfunction
    } else if non_decreasing(&trace) {
        CircleClass::NotHyperfunction
    } else {
        CircleClass::Inconclusive
    };
    Ok(CircleClassification { l_hat, estimate, window_trace: trace, tau_c, class })
}

/// Membership read off `L_m = limsup |c_{±k}|^{k^{-1/m}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Membership {
    /// Coefficients vanish beyond `|k| = nu`.
    FiniteSupport {
        nu: u64,
    },
    /// `L_m = e^{-β} < 1`: the class with every `ν' > nu`, `nu = (m/β)^m`; the endpoint itself is not claimed.
    Member {
        nu: f64,
    },
    NotMember,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmClassification {
    pub m: f64,
    #[serde(with = "ext_real")]
    pub l_hat: f64,
    #[serde(with = "ext_real")]
    pub estimate: f64,
    pub window_trace: Vec<WindowPoint>,
    pub membership: Membership,
}

pub fn classify_am(c: &FourierSeq, m: f64, tau_c: f64) -> Result<AmClassification> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::InvalidParameter(format!("m must lie in (0, 1), got {m}")));
    }
    let trace = two_sided_trace(c, m)?;
    let l_hat = trace[2].l_hat;
    let estimate = l_hat.exp();
    let membership = if l_hat == f64::NEG_INFINITY && c.tail() == super::TailCertificate::Exact {
        Membership::FiniteSupport { nu: c.degree().unwrap_or(0) }
    } else if estimate < 1.0 - tau_c {
        Membership::Member { nu: (m / -l_hat).powf(m) }
    } else if non_decreasing(&trace) {
        Membership::NotMember
    } else {
        Membership::Inconclusive
    };
    Ok(AmClassification { m, l_hat, estimate, window_trace: trace, membership })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::coefficients::CoeffGenerator;

    fn gen(a: f64, p: f64, k: u64) -> FourierSeq {
        FourierSeq::from_generator(CoeffGenerator::ExpPower { a, p }, k)
    }

    #[test]
    fn root_test_examples() {
        let r = classify_circle_object(&gen(0.5f64.ln(), 1.0, 256), TAU_C).unwrap();
        assert!((r.estimate - 0.5).abs() < 1e-14);
        assert_eq!(r.class, CircleClass::Analytic);
        let r = classify_circle_object(&gen(2f64.ln(), 1.0, 256), TAU_C).unwrap();
        assert!((r.estimate - 2.0).abs() < 1e-13);
        assert_eq!(r.class, CircleClass::NotHyperfunction);
        let r = classify_circle_object(&gen(1.0, 0.5, 8192), TAU_C).unwrap();
        assert!(r.estimate > 1.0 && r.estimate < 1.0 + TAU_C);
        assert_eq!(r.class, CircleClass::Hyperfunction);
        assert!(non_increasing(&r.window_trace));
    }

    #[test]
    fn infra_exponential_needs_long_range() {
        // 1/√(K/2) is still above τ_c at K = 4096
        let r = classify_circle_object(&gen(1.0, 0.5, 4096), TAU_C).unwrap();
        assert_eq!(r.class, CircleClass::Inconclusive);
    }

    #[test]
    fn am_examples() {
        let r = classify_am(&gen(-2.0, 2.0, 128), 0.5, TAU_C).unwrap();
        assert!((r.estimate - (-2f64).exp()).abs() < 1e-15);
        match r.membership {
            Membership::Member { nu } => assert!((nu - 0.5).abs() < 1e-14),
            ref m => panic!("{m:?}"),
        }
        let f = FourierSeq::sparse(70, &[(-3, 1.0), (5, 2.0)]).unwrap();
        let r = classify_am(&f, 0.5, TAU_C).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.membership, Membership::FiniteSupport { nu: 5 });
        let r = classify_am(&gen(0.0, 0.0, 128), 0.7, TAU_C).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.membership, Membership::NotMember);
    }

    #[test]
    fn short_range_is_rejected() {
        assert!(matches!(
            classify_circle_object(&gen(-1.0, 1.0, 63), TAU_C),
            Err(Error::WindowTooShort { n: 63, min: 64 })
        ));
    }
}
