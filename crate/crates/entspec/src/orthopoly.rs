//! Triangular-decomposition machinery on the two-interval covariance
//! matrix: the eta ladder of leading-minor ratios, the four chi
//! normalization constants, determinant ratios that grow one interval by a
//! site, and the vector orthogonal polynomials encoding them.
//!
//! Two independent numerical routes live here on purpose. The eta route is
//! unpivoted elimination whose i-th pivot is the ratio of consecutive
//! leading principal minors; the polynomial route is a pivoted LU solve for
//! a column of the inverse. They must agree on the chi constants, and
//! [`t_matrix_check`] verifies exactly that.

use crate::dense::{self, Mat};
use crate::gaussian_core::{build_covariance, CovarianceKind, CovarianceMatrix, Geometry};
use crate::symbol::OccupationSymbol;
use crate::{Error, Result};
use num_complex::Complex64 as C;
use serde::Serialize;

/// Eta ladder of `F = lambda I + M` plus the four chi constants.
///
/// `etas[i-1] = D_i / D_{i-1}` with `D_i` the i-th leading principal minor,
/// so the ladder telescopes to the full determinant. Each chi is the same
/// final ratio taken after moving one distinguished site to the end of the
/// ordering; by Toeplitz translation invariance this realizes the four ways
/// of shrinking an interval by one boundary site.
#[derive(Clone, Debug)]
pub struct ChiLadder {
    pub etas: Vec<C>,
    pub chis: ChiSet,
}

#[derive(Clone, Copy, Debug)]
pub struct ChiSet {
    /// `D_{k,l,n} / D_{k-1,l,n}`: drop the rightmost site of A.
    pub one_plus: C,
    /// `D_{k,l,n} / D_{k,l-1,n}`: drop the rightmost site of B.
    pub two_plus: C,
    /// `D_{k,l,n} / D_{k-1,l,n-1}`: drop the leftmost site of A.
    pub one_minus: C,
    /// `D_{k,l,n} / D_{k,l-1,n+1}`: drop the leftmost site of B.
    pub two_minus: C,
}

impl ChiSet {
    pub fn get(&self, family: Family) -> C {
        match family {
            Family::OnePlus => self.one_plus,
            Family::TwoPlus => self.two_plus,
            Family::OneMinus => self.one_minus,
            Family::TwoMinus => self.two_minus,
        }
    }
}

/// `F = lambda I + M`.
fn shifted(cov: &CovarianceMatrix, lambda: C) -> Mat {
    let n = cov.geometry.size();
    Mat::from_fn(n, |r, c| {
        let mut v = cov.entry(r, c);
        if r == c {
            v += lambda;
        }
        v
    })
}

/// Computes the eta ladder and the chi constants at `lambda`. Ordering is
/// semantically fixed (the i-th eta must not depend on the matrix size), so
/// elimination is unpivoted and a singular leading minor is an error naming
/// its index rather than a silent row swap.
pub fn chi_ladder(cov: &CovarianceMatrix, lambda: C) -> Result<ChiLadder> {
    let f = shifted(cov, lambda);
    let size = f.n();
    let etas = dense::leading_minor_ratios(&f)?;
    let last_ratio = |moved: usize| -> Result<C> {
        let perm: Vec<usize> = (0..size).filter(|&i| i != moved).chain([moved]).collect();
        let pf = Mat::from_fn(size, |r, c| f[(perm[r], perm[c])]);
        Ok(*dense::leading_minor_ratios(&pf)?
            .last()
            .expect("matrix is nonempty"))
    };
    let k = cov.geometry.k;
    Ok(ChiLadder {
        chis: ChiSet {
            one_plus: last_ratio(k)?,
            two_plus: *etas.last().expect("matrix is nonempty"),
            one_minus: last_ratio(0)?,
            two_minus: last_ratio(k + 1)?,
        },
        etas,
    })
}

/// Which interval the determinant ratio grows by one site.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowDirection {
    GrowL,
    GrowK,
}

/// Determinant ratio between neighboring geometries via the chi ladder,
/// without evaluating either full determinant: `D_{k,l,n} / D_{k,l-1,n}`
/// for [`GrowDirection::GrowL`], `D_{k-1,l,n} / D_{k,l,n}` for
/// [`GrowDirection::GrowK`].
pub fn det_ratio(
    sym: &OccupationSymbol,
    geo: Geometry,
    lambda: C,
    kind: CovarianceKind,
    which: GrowDirection,
) -> Result<C> {
    let cov = build_covariance(sym, geo, kind)?;
    let ladder = chi_ladder(&cov, lambda)?;
    Ok(match which {
        GrowDirection::GrowL => ladder.chis.two_plus,
        GrowDirection::GrowK => 1.0 / ladder.chis.one_plus,
    })
}

/// The four polynomial families: component sigma is normalized, plus means
/// monic at the top degree, minus means unit moment at the bottom row (its
/// value at zero is then the reciprocal chi).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    OnePlus,
    TwoPlus,
    OneMinus,
    TwoMinus,
}

impl Family {
    /// Row of the moment system that carries the normalization; all other
    /// rows annihilate the polynomial.
    fn target(self, geo: Geometry) -> usize {
        match self {
            Family::OnePlus => geo.k,
            Family::TwoPlus => geo.size() - 1,
            Family::OneMinus => 0,
            Family::TwoMinus => geo.k + 1,
        }
    }

    fn is_monic(self) -> bool {
        matches!(self, Family::OnePlus | Family::TwoPlus)
    }
}

/// Pair of polynomials `(psi_1, psi_2)` of degrees at most `k` and `l`,
/// stored as ascending coefficient lists, with the family normalization
/// constant chi.
#[derive(Clone, Debug)]
pub struct VectorOrthoPoly {
    pub psi_one: Vec<C>,
    pub psi_two: Vec<C>,
    pub family: Family,
    pub chi: C,
}

/// Solves the moment conditions for one family: the coefficient vector is
/// the `target` column of `F^{-1}`, scaled to make the distinguished
/// component monic for the plus families and left with unit target moment
/// for the minus families.
pub fn ortho_poly(cov: &CovarianceMatrix, lambda: C, family: Family) -> Result<VectorOrthoPoly> {
    let f = shifted(cov, lambda);
    let lu = dense::lu_factor(&f);
    let det = lu.det();
    if !det.is_finite() || det == C::new(0.0, 0.0) {
        return Err(Error::NoSolution(format!(
            "moment system singular at lambda = {lambda}"
        )));
    }
    let size = f.n();
    let geo = cov.geometry;
    let target = family.target(geo);
    let mut rhs = vec![C::new(0.0, 0.0); size];
    rhs[target] = C::new(1.0, 0.0);
    let u = lu.solve(&rhs);
    if u[target].norm() == 0.0 {
        return Err(Error::SingularMinor { index: target });
    }
    let chi = 1.0 / u[target];
    let scale = if family.is_monic() { chi } else { C::new(1.0, 0.0) };
    let coeffs: Vec<C> = u.iter().map(|&x| scale * x).collect();
    Ok(VectorOrthoPoly {
        psi_one: coeffs[..=geo.k].to_vec(),
        psi_two: coeffs[geo.k + 1..].to_vec(),
        family,
        chi,
    })
}

/// Moment of a polynomial pair against row `(sigma', j)` of the symbol
/// system: the circle integral of `z^{-j}` times the block symbol acting on
/// `(psi_1, psi_2)`, plus the `lambda` diagonal term. Evaluated exactly as
/// a finite convolution of Fourier coefficients; quadrature appears only in
/// tests.
pub fn moment(
    sym: &OccupationSymbol,
    geo: Geometry,
    kind: CovarianceKind,
    lambda: C,
    sigma_prime: usize,
    j: usize,
    poly: &VectorOrthoPoly,
) -> Result<C> {
    let tau = kind.tau();
    let tau2 = tau * tau;
    let n = geo.n as i64;
    let jj = j as i64;
    let p1 = &poly.psi_one;
    let p2 = &poly.psi_two;
    let mut total = C::new(0.0, 0.0);
    match sigma_prime {
        1 => {
            if j < p1.len() {
                total += lambda * p1[j];
            }
            for (i, &a) in p1.iter().enumerate() {
                total += a * sym.fourier_coeff(jj - i as i64)?;
            }
            for (i, &b) in p2.iter().enumerate() {
                total += tau * b * sym.fourier_coeff(jj - i as i64 - n)?;
            }
        }
        2 => {
            if j < p2.len() {
                total += lambda * p2[j];
            }
            for (i, &a) in p1.iter().enumerate() {
                total += tau * a * sym.fourier_coeff(jj + n - i as i64)?;
            }
            for (i, &b) in p2.iter().enumerate() {
                total += tau2 * b * sym.fourier_coeff(jj - i as i64)?;
            }
        }
        other => {
            return Err(Error::Config(format!(
                "moment row family must be 1 or 2, got {other}"
            )))
        }
    }
    Ok(total)
}

/// Relative residuals of the four transfer-matrix identities at `z = 0`,
/// for the CLI's verification report.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TMatrixReport {
    pub t23_residual: f64,
    pub t14_residual: f64,
    pub t41_residual: f64,
    pub t32_residual: f64,
}

impl TMatrixReport {
    pub fn max_residual(&self) -> f64 {
        self.t23_residual
            .max(self.t14_residual)
            .max(self.t41_residual)
            .max(self.t32_residual)
    }
}

fn rel(lhs: C, rhs: C) -> f64 {
    (lhs - rhs).norm() / rhs.norm().max(1e-300)
}

/// Verifies the four transfer-matrix entries at `z = 0` against the chi
/// ladder: the monic families reproduce their chi through an explicit
/// moment, the unit families reproduce the reciprocal chi through their
/// value at zero. Left sides go through LU solves and coefficient
/// convolutions, right sides through unpivoted eta ladders, so agreement
/// cross-checks the two factorization routes end to end.
pub fn t_matrix_check(
    sym: &OccupationSymbol,
    geo: Geometry,
    kind: CovarianceKind,
    lambda: C,
) -> Result<TMatrixReport> {
    if geo.k == 0 || geo.l == 0 {
        return Err(Error::InvalidGeometry(
            "transfer-matrix check needs k >= 1 and l >= 1".into(),
        ));
    }
    let sub = |k, l, n| -> Result<(CovarianceMatrix, Geometry)> {
        let g = Geometry::new(k, l, n)?;
        Ok((build_covariance(sym, g, kind)?, g))
    };

    // Row 2, column 3: the monic second family one A-site down.
    let (cov, g) = sub(geo.k - 1, geo.l, geo.n)?;
    let poly = ortho_poly(&cov, lambda, Family::TwoPlus)?;
    let lhs23 = moment(sym, g, kind, lambda, 2, g.l, &poly)?;
    let rhs23 = chi_ladder(&cov, lambda)?.chis.two_plus;

    // Row 1, column 4: the monic first family one B-site down.
    let (cov, g) = sub(geo.k, geo.l - 1, geo.n)?;
    let poly = ortho_poly(&cov, lambda, Family::OnePlus)?;
    let lhs14 = moment(sym, g, kind, lambda, 1, g.k, &poly)?;
    let rhs14 = chi_ladder(&cov, lambda)?.chis.one_plus;

    // Rows 4 and 1 / 3 and 2: the unit families one site down on both
    // intervals, evaluated at z = 0. These rows enter the transfer matrix
    // with a minus sign, carried on both sides.
    let (cov, _) = sub(geo.k - 1, geo.l - 1, geo.n)?;
    let ladder = chi_ladder(&cov, lambda)?;
    let poly = ortho_poly(&cov, lambda, Family::OneMinus)?;
    let lhs41 = -poly.psi_one[0];
    let rhs41 = -1.0 / ladder.chis.one_minus;
    let poly = ortho_poly(&cov, lambda, Family::TwoMinus)?;
    let lhs32 = -poly.psi_two[0];
    let rhs32 = -1.0 / ladder.chis.two_minus;

    Ok(TMatrixReport {
        t23_residual: rel(lhs23, rhs23),
        t14_residual: rel(lhs14, rhs14),
        t41_residual: rel(lhs41, rhs41),
        t32_residual: rel(lhs32, rhs32),
    })
}
