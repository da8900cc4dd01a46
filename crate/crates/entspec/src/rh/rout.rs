//! Diagonal of the correction matrix at `z = 0`.
//!
//! Only the `(0,0)` and `(1,1)` entries of `R(0)` enter the determinant
//! ratios, so this module exposes them as a pair.  Two routes exist: the
//! assembled matrix product of [`super::parametrix::r0_assembled`],
//! which works for any admissible symbol, and a closed form for the step
//! symbol in which the products of the cross blocks collapse into
//! gamma-function combinations.  The closed form exists in two phase
//! transcriptions; see [`super::PhaseConvention`].

use std::f64::consts::PI;

use num_complex::Complex64 as C;

use crate::specfun::gamma;
use crate::{Error, Result};

use super::{parametrix, FisherHartwigData, PhaseConvention};

/// Validity guard shared with the density contour: the correction is an
/// expansion in the jump exponents and loses meaning at the edge of the
/// principal strip.
pub(crate) const EXPONENT_LIMIT: f64 = 0.5;

fn check_exponents(fh: &FisherHartwigData) -> Result<()> {
    let worst = fh.beta.re.abs().max(fh.beta_tilde.re.abs());
    if worst >= EXPONENT_LIMIT {
        return Err(Error::ContourExponent {
            re: fh.lambda.re,
            im: fh.lambda.im,
            value: worst,
            limit: EXPONENT_LIMIT,
        });
    }
    Ok(())
}

/// `(R(0)_{00}, R(0)_{11})` to first correction order.
///
/// Requires `k, l, m >= 1` (the expansion parameters) and jump exponents
/// inside the principal strip.  `Derived` assembles the full matrix
/// product and is valid for every representation; `Printed` uses the
/// step-symbol closed form in its alternative phase transcription and is
/// kept only so consistency checks can detect the wrong orientation.
pub fn r_out_diag(
    fh: &FisherHartwigData,
    k: f64,
    l: f64,
    m: f64,
    convention: PhaseConvention,
) -> Result<(C, C)> {
    for (name, v) in [("k", k), ("l", l), ("m", m)] {
        if !(v.is_finite() && v >= 1.0) {
            return Err(Error::InvalidGeometry(format!(
                "correction scale {name} = {v} must be at least 1"
            )));
        }
    }
    check_exponents(fh)?;
    // A jump-free target (constant symbol) has a trivial correction
    // problem; the generic entries would hit removable 0/0 forms in the
    // sine factors, so return the exact identity directly.
    if fh.s_beta.norm() < 1e-14 && fh.s_beta_tilde.norm() < 1e-14 {
        return Ok((C::new(1.0, 0.0), C::new(1.0, 0.0)));
    }
    match convention {
        PhaseConvention::Derived => {
            let r0 = parametrix::r0_assembled(fh, k, l, m)?;
            Ok((r0[(0, 0)], r0[(1, 1)]))
        }
        PhaseConvention::Printed => {
            let (c11, c22) = closed_cross(fh, k, l, m, convention);
            let b2 = fh.beta * fh.beta;
            let bt2 = fh.beta_tilde * fh.beta_tilde;
            Ok((1.0 - 2.0 * b2 / k + c11, 1.0 - 2.0 * bt2 / l + c22))
        }
    }
}

/// Closed-form cross terms for the step symbol: the `(0,0)` and `(1,1)`
/// entries of the second-order block
/// `(z_F M_L M_R - z_F^{-1} M_R M_L) / (2 i m^2 sin p_F)`.
///
/// The interval scales enter through `exp(2 b log(2 k sin p_F))`, the
/// step-symbol value of `d^2 e^{2 i pi b} k^{2b} / r` and its relatives,
/// which is what makes this form representation-specific.
fn closed_cross(
    fh: &FisherHartwigData,
    k: f64,
    l: f64,
    m: f64,
    convention: PhaseConvention,
) -> (C, C) {
    let (b, bt) = (fh.beta, fh.beta_tilde);
    let s = fh.fermi_momentum.sin();
    let big_k = (2.0 * b * (2.0 * k * s).ln()).exp();
    let big_l = (2.0 * bt * (2.0 * l * s).ln()).exp();
    let (kn, ln_) = (big_k.powi(-1), big_l.powi(-1));
    let sb = (b * PI).sin() / PI;
    let sbt = (bt * PI).sin() / PI;
    let g2 = |x: C| gamma(x).powi(2);
    let ep = C::from_polar(1.0, fh.fermi_momentum);
    let en = ep.conj();
    let pref = (C::i() * 2.0 * m * m * s * sb * sbt).powi(-1);

    match convention {
        PhaseConvention::Derived => {
            let c22 = pref
                * (ep * big_k * ln_ / (g2(-bt) * g2(b)) - ep * kn * ln_ / (g2(-bt) * g2(-b))
                    - en * kn * big_l / (g2(bt) * g2(-b))
                    + en * big_k * big_l / (g2(bt) * g2(b)));
            let c11 = pref
                * (ep * kn * big_l / (g2(bt) * g2(-b)) - ep * kn * ln_ / (g2(-bt) * g2(-b))
                    - en * big_k * ln_ / (g2(-bt) * g2(b))
                    + en * big_k * big_l / (g2(bt) * g2(b)));
            (c11, c22)
        }
        PhaseConvention::Printed => {
            let c22 = pref
                * (en * big_k * ln_ / (g2(-bt) * g2(b)) - en * kn * ln_ / (g2(-bt) * g2(-b))
                    - ep * kn * big_l / (g2(bt) * g2(-b))
                    + ep * big_k * big_l / (g2(bt) * g2(b)));
            let c11 = pref
                * (ep * big_k * ln_ / (g2(-bt) * g2(b)) + ep * big_k * big_l / (g2(bt) * g2(b))
                    - en * kn * big_l / (g2(bt) * g2(-b))
                    - en * kn * ln_ / (g2(-bt) * g2(-b)));
            (c11, c22)
        }
    }
}
