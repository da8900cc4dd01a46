//! Model solutions of the 4x4 Riemann-Hilbert problem and their first
//! correction.
//!
//! Three nested approximations of the true solution `Y(z)`:
//!
//! - [`y_out`]: the global outer solution, exact away from the Fermi
//!   points, built from branched powers `x(z)^{b}` and the scalar
//!   Wiener-Hopf factors.
//! - [`y_mid_ii`]: the local solution in an annulus around one Fermi
//!   point, confluent hypergeometric in the stretched variable
//!   `w = k zeta`, valid for `zeta` in the second quadrant.
//! - [`y_in_ii`]: the refinement of the middle solution that also resolves
//!   the finite separation `m` between the two intervals through
//!   incomplete-gamma tails.
//!
//! The mismatch between consecutive layers shrinks like `1/(k |zeta|)`
//! resp. `1/m`; [`mismatch_mid_out`] and [`mismatch_in_mid`] measure it
//! directly and back the matching acceptance checks.  The residue data of
//! the mismatch is what feeds the correction matrix: [`w_matrix`] holds
//! the `1/k` self-coupling block at one Fermi point, [`m_matrix`] the
//! `1/m` cross-coupling block, and [`r0_assembled`] combines both sides
//! into the corrected value `R(0)` used by the determinant-ratio and
//! density formulas.

use std::f64::consts::PI;

use num_complex::Complex64 as C;

use crate::dense::Mat;
use crate::specfun::{eq_func, exp_gamma0, gamma, p_func, q_func, Branched};
use crate::{Error, Result};

use super::{FisherHartwigData, Side};

/// Which layer of the nested solution a matrix value belongs to.
///
/// The quadrant label refers to the local variable `zeta = log(z / z_s)`:
/// the second quadrant covers the approach to the Fermi point from
/// inside the unit circle, counterclockwise, which is the only approach
/// the matching diagnostics need.  `MidI` is listed for completeness;
/// no constructor currently produces it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Out,
    MidI,
    MidII,
    InII,
}

/// A 4x4 model-solution value tagged with its layer and Fermi point.
#[derive(Debug, Clone)]
pub struct ParametrixMatrix {
    mat: Mat,
    /// Layer the value belongs to.
    pub region: Region,
    /// Fermi point the local layers are attached to; `None` for the
    /// global outer solution.
    pub side: Option<Side>,
}

impl ParametrixMatrix {
    fn new(mat: Mat, region: Region, side: Option<Side>) -> Self {
        Self { mat, region, side }
    }

    pub(crate) fn mat(&self) -> &Mat {
        &self.mat
    }

    /// Entry `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> C {
        self.mat[(row, col)]
    }

    /// Determinant; every model solution is unimodular.
    pub fn det(&self) -> C {
        crate::dense::lu_factor(&self.mat).det()
    }
}

fn check_scale(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidModel(format!(
            "parametrix scale {name} = {v} must be positive and finite"
        )));
    }
    Ok(())
}

/// Global outer solution.
///
/// Anti-diagonal inside the unit circle, diagonal outside; the branched
/// powers put the only discontinuities on the two symbol cuts.  On the
/// circle itself the inside limit is returned.
pub fn y_out(fh: &FisherHartwigData, z: C) -> Result<ParametrixMatrix> {
    let (b, bt) = (fh.beta, fh.beta_tilde);
    let mut y = Mat::zeros(4);
    if z.norm() <= 1.0 {
        y[(0, 3)] = fh.x_pow(z, b) * (-C::i() * PI * b).exp() * fh.f_plus(z)?;
        y[(1, 2)] = fh.x_pow(z, bt) * (-C::i() * PI * bt).exp() * fh.f_plus_tilde(z)?;
        y[(2, 1)] = -fh.x_pow(z, -bt) * (C::i() * PI * bt).exp() / fh.f_plus_tilde(z)?;
        y[(3, 0)] = -fh.x_pow(z, -b) * (C::i() * PI * b).exp() / fh.f_plus(z)?;
    } else {
        y[(0, 0)] = fh.x_pow(z, b) / fh.f_minus(z)?;
        y[(1, 1)] = fh.x_pow(z, bt) / fh.f_minus_tilde(z)?;
        y[(2, 2)] = fh.x_pow(z, -bt) * fh.f_minus_tilde(z)?;
        y[(3, 3)] = fh.x_pow(z, -b) * fh.f_minus(z)?;
    }
    Ok(ParametrixMatrix::new(y, Region::Out, None))
}

/// Middle-layer solution near one Fermi point, second quadrant of the
/// local variable `zeta = log(z / z_s)`.
///
/// `k` and `l` are the interval scales stretching the two confluent
/// families; they enter only through `w = k zeta`, `l zeta` and the
/// normalizing powers `k^b`, `l^{b~}`, so non-integer values are fine
/// (the matching diagnostics push them to 1e12).
pub fn y_mid_ii(
    fh: &FisherHartwigData,
    zeta: &Branched,
    side: Side,
    k: f64,
    l: f64,
) -> Result<ParametrixMatrix> {
    check_scale("k", k)?;
    check_scale("l", l)?;
    let (b, bt) = fh.exponents(side);
    let (d, dt) = fh.d_pair(side);
    let (r, rt) = (fh.r, fh.r_tilde);
    let kb = (b * k.ln()).exp();
    let lbt = (bt * l.ln()).exp();
    let wk = zeta.scaled(k);
    let wl = zeta.scaled(l);

    let mut y = Mat::zeros(4);
    y[(0, 0)] = d / (r * kb) * eq_func(0, b, &wk)?;
    y[(0, 3)] = d / kb * p_func(0, b, &wk)?;
    y[(1, 1)] = dt / (rt * lbt) * eq_func(0, bt, &wl)?;
    y[(1, 2)] = dt / lbt * p_func(0, bt, &wl)?;
    let c3 = -(-C::i() * 2.0 * PI * bt).exp() * gamma(C::new(1.0, 0.0) - bt)
        / (dt * gamma(bt))
        * lbt;
    y[(2, 1)] = c3 * eq_func(1, bt, &wl)?;
    y[(2, 2)] = c3 * rt * p_func(1, bt, &wl)?;
    let c4 =
        -(-C::i() * 2.0 * PI * b).exp() * gamma(C::new(1.0, 0.0) - b) / (d * gamma(b)) * kb;
    y[(3, 0)] = c4 * eq_func(1, b, &wk)?;
    y[(3, 3)] = c4 * r * p_func(1, b, &wk)?;
    Ok(ParametrixMatrix::new(y, Region::MidII, Some(side)))
}

/// Inner-layer solution: the middle layer plus the four tail entries
/// that resolve the finite separation `m` through `e^{w} Gamma_0(w)` at
/// `w = -m zeta` and `+m zeta` on the principal branch.
pub fn y_in_ii(
    fh: &FisherHartwigData,
    zeta: &Branched,
    side: Side,
    k: f64,
    l: f64,
    m: f64,
) -> Result<ParametrixMatrix> {
    check_scale("m", m)?;
    let mid = y_mid_ii(fh, zeta, side, k, l)?;
    let (b, bt) = fh.exponents(side);
    let (d, dt) = fh.d_pair(side);
    let (r, rt) = (fh.r, fh.r_tilde);
    let tau = fh.kind.tau();
    let kb = (b * k.ln()).exp();
    let lbt = (bt * l.ln()).exp();
    let sb = (b * PI).sin() / PI;
    let sbt = (bt * PI).sin() / PI;
    let wk = zeta.scaled(k);
    let wl = zeta.scaled(l);
    let gm = exp_gamma0(&Branched::principal(-(zeta.value() * m)));
    let gp = exp_gamma0(&Branched::principal(zeta.value() * m));

    let mut y = mid.mat;
    y[(0, 2)] = -tau * d * sb * q_func(0, b, &wk)? * gm / kb;
    y[(1, 3)] = -dt * sbt * q_func(0, bt, &wl)? * gp / (tau * lbt);
    y[(2, 3)] = rt * gamma(C::new(1.0, 0.0) - bt) * sbt * q_func(1, bt, &wl)? * gp
        / (dt * tau * (C::i() * 2.0 * PI * bt).exp() * gamma(bt))
        * lbt;
    y[(3, 2)] = tau * r * gamma(C::new(1.0, 0.0) - b) * sb * eq_func(1, b, &wk)? * gm
        / (d * (C::i() * 2.0 * PI * b).exp() * gamma(b))
        * kb;
    Ok(ParametrixMatrix::new(y, Region::InII, Some(side)))
}

/// Leading diagonal of the mid/out mismatch: the simple pole
/// `z_s/(z - z_s) diag(b^2/k, b~^2/l, b~^2/l, b^2/k)`.  Unchanged under
/// the side flip because the exponents enter squared.
pub(crate) fn delta_r_mid_out_diag(
    fh: &FisherHartwigData,
    z: C,
    side: Side,
    k: f64,
    l: f64,
) -> Mat {
    let (b, bt) = (fh.beta, fh.beta_tilde);
    let zs = fh.singular_point(side);
    let pole = zs / (z - zs);
    let mut m = Mat::zeros(4);
    m[(0, 0)] = pole * b * b / k;
    m[(1, 1)] = pole * bt * bt / l;
    m[(2, 2)] = pole * bt * bt / l;
    m[(3, 3)] = pole * b * b / k;
    m
}

/// Full residue block of the mid/out mismatch at one Fermi point: the
/// diagonal of [`delta_r_mid_out_diag`] with signs split across the two
/// halves of the spectrum plus the four anti-diagonal couplings.
pub(crate) fn w_matrix(fh: &FisherHartwigData, side: Side, k: f64, l: f64) -> Mat {
    let (b, bt) = fh.exponents(side);
    let (d, dt) = fh.d_pair(side);
    let (r, rt) = (fh.r, fh.r_tilde);
    let sb = (b * PI).sin() / PI;
    let sbt = (bt * PI).sin() / PI;
    let k2b = (b * 2.0 * k.ln()).exp();
    let l2bt = (bt * 2.0 * l.ln()).exp();
    let mut w = Mat::zeros(4);
    w[(0, 0)] = b * b / k;
    w[(1, 1)] = bt * bt / l;
    w[(2, 2)] = -bt * bt / l;
    w[(3, 3)] = -b * b / k;
    w[(0, 3)] =
        b * b * gamma(b).powi(2) * sb * d * d * (C::i() * 2.0 * PI * b).exp() / (r * k2b * k);
    w[(3, 0)] =
        r * (-C::i() * 2.0 * PI * b).exp() * k2b / (d * d * gamma(b).powi(2) * sb * k);
    w[(1, 2)] = bt * bt * gamma(bt).powi(2) * sbt * dt * dt * (C::i() * 2.0 * PI * bt).exp()
        / (rt * l2bt * l);
    w[(2, 1)] =
        rt * (-C::i() * 2.0 * PI * bt).exp() * l2bt / (dt * dt * gamma(bt).powi(2) * sbt * l);
    w
}

/// Full mid/out mismatch matrix `z_s/(z - z_s) W` at one Fermi point.
pub(crate) fn delta_r_full(fh: &FisherHartwigData, z: C, side: Side, k: f64, l: f64) -> Mat {
    let zs = fh.singular_point(side);
    w_matrix(fh, side, k, l).scale(zs / (z - zs))
}

/// Cross-coupling block of the in/mid mismatch at one Fermi point; its
/// `1/m`-weighted pair at the two Fermi points feeds the correction.
pub(crate) fn m_matrix(fh: &FisherHartwigData, side: Side, k: f64, l: f64) -> Mat {
    let (b, bt) = fh.exponents(side);
    let (d, dt) = fh.d_pair(side);
    let (r, rt) = (fh.r, fh.r_tilde);
    let tau = fh.kind.tau();
    let kb = (b * k.ln()).exp();
    let lbt = (bt * l.ln()).exp();
    let sb = (b * PI).sin() / PI;
    let sbt = (bt * PI).sin() / PI;
    let g = gamma;
    let eip = |x: C| (C::i() * PI * x).exp();

    let mut m = Mat::zeros(4);
    m[(0, 1)] = -tau * d * eip(b - bt) * lbt / (dt * g(bt) * g(-b) * sbt * kb);
    m[(0, 2)] = tau * dt * d * eip(b + bt) / (rt * g(-bt) * g(-b) * sbt * kb * lbt);
    m[(1, 0)] = dt * eip(bt - b) * kb / (tau * d * g(-bt) * g(b) * sb * lbt);
    m[(1, 3)] = -d * dt * eip(bt + b) / (tau * r * g(-bt) * g(-b) * sb * kb * lbt);
    m[(2, 0)] = -rt * eip(-(b + bt)) * lbt * kb / (tau * dt * d * g(bt) * g(b) * sb);
    m[(2, 3)] = d * rt * eip(b - bt) * lbt / (dt * r * tau * g(bt) * g(-b) * sb * kb);
    m[(3, 1)] = tau * r * eip(-(b + bt)) * lbt * kb / (d * dt * g(bt) * g(b) * sbt);
    m[(3, 2)] = -dt * r * tau * eip(bt - b) * kb / (d * rt * g(b) * g(-bt) * lbt * sbt);
    // The jump-matching fixes the relative signs of four entries
    // opposite to their naive transcription.
    for (i, j) in [(0, 1), (1, 0), (2, 0), (3, 1)] {
        m[(i, j)] = -m[(i, j)];
    }
    m
}

/// Corrected value of the correction matrix at `z = 0`:
/// `I - W_L - W_R - (M_L + M_R)/m + C` with the cross term
/// `C = (z_F M_L M_R - z_F^{-1} M_R M_L) / (2 i m^2 sin p_F)`.
pub(crate) fn r0_assembled(fh: &FisherHartwigData, k: f64, l: f64, m: f64) -> Result<Mat> {
    check_scale("k", k)?;
    check_scale("l", l)?;
    check_scale("m", m)?;
    let ml = m_matrix(fh, Side::Left, k, l);
    let mr = m_matrix(fh, Side::Right, k, l);
    let wl = w_matrix(fh, Side::Left, k, l);
    let wr = w_matrix(fh, Side::Right, k, l);
    let zf = fh.z_f();
    let cross = ml
        .matmul(&mr)
        .scale(zf)
        .sub(&mr.matmul(&ml).scale(zf.powi(-1)))
        .scale((C::i() * 2.0 * m * m * fh.fermi_momentum.sin()).powi(-1));
    Ok(Mat::eye(4)
        .sub(&wl)
        .sub(&wr)
        .sub(&ml.add(&mr).scale(C::new(1.0 / m, 0.0)))
        .add(&cross))
}

/// Largest entry of `Y_mid Y_out^{-1} - I - dR` at `z = z_s e^{zeta}`,
/// with the full residue block `dR = z_s/(z - z_s) W` subtracted.  The
/// remainder is the curvature of the matching and shrinks like
/// `1/(k |zeta|)^2` as `zeta -> 0` at fixed large `k`.
pub fn mismatch_mid_out(
    fh: &FisherHartwigData,
    zeta: &Branched,
    side: Side,
    k: f64,
    l: f64,
) -> Result<f64> {
    let zs = fh.singular_point(side);
    let z = zs * zeta.value().exp();
    let mid = y_mid_ii(fh, zeta, side, k, l)?;
    let out = y_out(fh, z)?;
    let product = mid.mat().matmul(&out.mat().inverse()?);
    let residue = delta_r_full(fh, z, side, k, l);
    Ok(product.sub(&Mat::eye(4)).sub(&residue).max_abs())
}

/// Largest entry of `Y_in Y_mid^{-1} - I` at fixed `zeta`; decays like
/// `1/m` as the interval separation grows.
pub fn mismatch_in_mid(
    fh: &FisherHartwigData,
    zeta: &Branched,
    side: Side,
    k: f64,
    l: f64,
    m: f64,
) -> Result<f64> {
    let inner = y_in_ii(fh, zeta, side, k, l, m)?;
    let mid = y_mid_ii(fh, zeta, side, k, l)?;
    let product = inner.mat().matmul(&mid.mat().inverse()?);
    Ok(product.sub(&Mat::eye(4)).max_abs())
}
