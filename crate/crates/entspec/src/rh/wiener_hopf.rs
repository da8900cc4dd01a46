//! Wiener-Hopf factorization of the shifted symbol on the unit circle.
//!
//! The factorization target is
//!
//! ```text
//! g(e^{i theta}) = (lambda + s2 f(theta)) / ph(theta),
//! ph = e^{+i pi beta} inside the Fermi sea, e^{-i pi beta} outside,
//! ```
//!
//! where `s2` is `1` for the plain branch and `tau^2` for the deformed one.
//! The denominator phase absorbs the jump of `f` at the Fermi points exactly,
//! so `g` extends continuously across them; this cancellation is executed as
//! a numerical assertion before any quadrature runs. `log g` then splits by a
//! Cauchy integral into a part analytic inside the disk and a part analytic
//! outside, with the whole constant coefficient assigned to `F+` and the
//! normalization `F-(inf) = 1`.

use std::f64::consts::PI;

use num_complex::Complex64 as C;

use crate::quad::gauss_legendre;
use crate::symbol::OccupationSymbol;
use crate::{Error, Result};

/// Gauss-Legendre order per panel.
const PANEL_ORDER: usize = 24;
/// Maximum base panel width in radians.
const BASE_WIDTH: f64 = 2.0 * PI / 24.0;
/// Dyadic refinement depth toward an evaluation angle on or near the circle.
const REFINE_DEPTH: u32 = 20;

/// One multiplicative split `F+ F- = g` of a factorization target.
#[derive(Clone, Debug)]
pub(crate) enum WhFactor {
    /// Step and constant symbols: `g` is identically `r`, so `F+ = r` and
    /// `F- = 1` everywhere.
    Constant { r: C },
    /// Sampled symbols, factored by panel quadrature of the Cauchy integral.
    Cauchy(CauchyFactor),
}

impl WhFactor {
    /// Factorization of a constant target: `F+ = r`, `F- = 1`.
    pub fn constant(r: C) -> Self {
        WhFactor::Constant { r }
    }

    /// Cauchy-integral factorization of the phase-divided sampled symbol.
    pub fn cauchy(sym: &OccupationSymbol, lambda: C, s2: f64, beta: C) -> Result<Self> {
        Ok(WhFactor::Cauchy(CauchyFactor::build(sym, lambda, s2, beta)?))
    }

    /// `log F+(0)`: for the Cauchy split this is the full zeroth Fourier
    /// coefficient of `log g`, computed without exponentiating.
    pub fn log_f_plus_zero(&self) -> Result<C> {
        match self {
            WhFactor::Constant { r } => Ok(r.ln()),
            WhFactor::Cauchy(c) => Ok(CauchyFactor::cauchy_sum(
                &c.grid,
                C::new(0.0, 0.0),
                None,
            )),
        }
    }

    /// `F+` inside the closed unit disk (boundary values are the limits from
    /// inside).
    pub fn f_plus(&self, z: C) -> Result<C> {
        match self {
            WhFactor::Constant { r } => Ok(*r),
            WhFactor::Cauchy(c) => c.f_plus(z),
        }
    }

    /// `F-` outside the closed unit disk (boundary values from outside);
    /// `F-(inf) = 1`.
    pub fn f_minus(&self, z: C) -> Result<C> {
        match self {
            WhFactor::Constant { .. } => Ok(C::new(1.0, 0.0)),
            WhFactor::Cauchy(c) => c.f_minus(z),
        }
    }

    /// The target `g` at angle `theta`, for residual checks.
    pub fn target(&self, theta: f64) -> C {
        match self {
            WhFactor::Constant { r } => *r,
            WhFactor::Cauchy(c) => c.g_value(theta),
        }
    }

    /// Sup-norm of `F+ F- / g - 1` over probe angles on the unit circle,
    /// staying clear of the Fermi points. Boundary values are taken by
    /// radial Richardson extrapolation so the two factors are computed
    /// independently of the identity being tested.
    pub fn residual_on_circle(&self, n_probe: usize) -> Result<f64> {
        let p_f = match self {
            WhFactor::Constant { .. } => return Ok(0.0),
            WhFactor::Cauchy(c) => c.p_f,
        };
        let mut worst = 0.0f64;
        for i in 0..n_probe {
            let theta = -PI + (i as f64 + 0.5) * 2.0 * PI / n_probe as f64;
            if (theta.abs() - p_f).abs() < 0.05 {
                continue;
            }
            let g = self.target(theta);
            let eps = 2e-4;
            let mut plus = [C::new(0.0, 0.0); 3];
            let mut minus = [C::new(0.0, 0.0); 3];
            for (j, &scale) in [4.0, 2.0, 1.0].iter().enumerate() {
                let rho = scale * eps;
                plus[j] = self.f_plus(C::from_polar(1.0 - rho, theta))?;
                minus[j] = self.f_minus(C::from_polar(1.0 + rho, theta))?;
            }
            let fp = (8.0 * plus[2] - 6.0 * plus[1] + plus[0]) / 3.0;
            let fm = (8.0 * minus[2] - 6.0 * minus[1] + minus[0]) / 3.0;
            worst = worst.max((fp * fm / g - C::new(1.0, 0.0)).norm());
        }
        Ok(worst)
    }
}

/// Panel-quadrature data for one factorization target.
#[derive(Clone, Debug)]
pub(crate) struct CauchyFactor {
    sym: OccupationSymbol,
    lambda: C,
    s2: f64,
    beta: C,
    p_f: f64,
    /// Default node set used away from the unit circle.
    grid: NodeGrid,
}

#[derive(Clone, Debug)]
struct NodeGrid {
    /// Node angles, ascending over one period.
    thetas: Vec<f64>,
    /// `i e^{i theta} w` per node: the `d xi` measure including the GL weight.
    dxi: Vec<C>,
    /// Unwrapped `log g` at the nodes.
    log_g: Vec<C>,
}

impl CauchyFactor {
    pub fn build(sym: &OccupationSymbol, lambda: C, s2: f64, beta: C) -> Result<Self> {
        let p_f = sym.fermi_momentum();
        let mut fac = CauchyFactor {
            sym: sym.clone(),
            lambda,
            s2,
            beta,
            p_f,
            grid: NodeGrid { thetas: Vec::new(), dxi: Vec::new(), log_g: Vec::new() },
        };
        fac.assert_continuous_at_fermi_point()?;
        fac.grid = fac.assemble(&fac.breakpoints(None))?;
        Ok(fac)
    }

    /// The phase-divided target is continuous across `z_F` by construction of
    /// `beta`; this executes that cancellation as a check before integrating.
    fn assert_continuous_at_fermi_point(&self) -> Result<()> {
        let eps = 1e-7;
        let a = self.g_value(self.p_f - eps);
        let b = self.g_value(self.p_f + eps);
        let scale = a.norm().max(1.0);
        if (a - b).norm() > 1e-4 * scale {
            return Err(Error::QuadratureDiverged(format!(
                "factorization target jumps by {:.2e} across the Fermi point; \
                 the phase built from beta does not cancel the symbol jump",
                (a - b).norm() / scale
            )));
        }
        Ok(())
    }

    /// `g` at angle `theta` (principal-branch value).
    fn g_value(&self, theta: f64) -> C {
        let f = self.sym.evaluate(theta);
        let num = self.lambda + C::new(self.s2 * f, 0.0);
        let folded = (theta + PI).rem_euclid(2.0 * PI) - PI;
        let sign = if folded.abs() < self.p_f { 1.0 } else { -1.0 };
        let phase = (C::new(0.0, sign * PI) * self.beta).exp();
        num / phase
    }

    /// Panel breakpoints over one period, split at the Fermi points and
    /// optionally refined dyadically toward a target angle.
    fn breakpoints(&self, refine_at: Option<f64>) -> Vec<f64> {
        let mut pts = vec![-PI, -self.p_f, self.p_f, PI];
        if let Some(phi) = refine_at {
            let phi = (phi + PI).rem_euclid(2.0 * PI) - PI;
            pts.push(phi);
            let gap = pts
                .iter()
                .filter(|&&p| (p - phi).abs() > 1e-12)
                .map(|&p| (p - phi).abs())
                .fold(f64::INFINITY, f64::min)
                .min(0.5);
            for j in 0..=REFINE_DEPTH {
                let w = gap * 0.5f64.powi(j as i32);
                for cand in [phi - w, phi + w] {
                    // Wrap refinement points that cross the period seam so
                    // the kernel peak stays resolved when phi is near +-pi.
                    let wrapped = (cand + PI).rem_euclid(2.0 * PI) - PI;
                    if wrapped > -PI && wrapped < PI {
                        pts.push(wrapped);
                    }
                }
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        // Subdivide wide gaps down to the base width.
        let mut out = Vec::new();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let splits = ((b - a) / BASE_WIDTH).ceil().max(1.0) as usize;
            for s in 0..splits {
                out.push(a + (b - a) * s as f64 / splits as f64);
            }
        }
        out.push(PI);
        out
    }

    /// Builds the node set over the given breakpoints and unwraps `log g`
    /// sequentially along it, enforcing zero total winding.
    fn assemble(&self, breakpoints: &[f64]) -> Result<NodeGrid> {
        let (gx, gw) = gauss_legendre(PANEL_ORDER);
        let mut grid = NodeGrid { thetas: Vec::new(), dxi: Vec::new(), log_g: Vec::new() };
        for w in breakpoints.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in gx.iter().zip(gw.iter()) {
                let theta = mid + half * x;
                grid.thetas.push(theta);
                grid.dxi.push(C::new(0.0, 1.0) * C::from_polar(1.0, theta) * (wt * half));
                grid.log_g.push(self.g_value(theta).ln());
            }
        }
        let mut prev = grid.log_g[0].im;
        for v in grid.log_g.iter_mut().skip(1) {
            let mut im = v.im;
            while im - prev > PI {
                im -= 2.0 * PI;
            }
            while im - prev < -PI {
                im += 2.0 * PI;
            }
            v.im = im;
            prev = im;
        }
        let gap = grid.log_g.last().unwrap().im - grid.log_g[0].im;
        let winding = (gap / (2.0 * PI)).round();
        if winding != 0.0 {
            return Err(Error::NoSolution(format!(
                "log of the factorization target winds {winding} times around the \
                 circle; lambda is enclosed by the shifted symbol range"
            )));
        }
        Ok(grid)
    }

    /// `log` of the target at `theta`, branch-aligned with the unwrapped node
    /// values of `grid`.
    fn log_g_aligned(&self, theta: f64, grid: &NodeGrid) -> C {
        let mut lg = self.g_value(theta).ln();
        let idx = grid
            .thetas
            .binary_search_by(|t| t.partial_cmp(&theta).unwrap())
            .unwrap_or_else(|i| i.min(grid.thetas.len() - 1));
        let anchor = grid.log_g[idx].im;
        while lg.im - anchor > PI {
            lg.im -= 2.0 * PI;
        }
        while lg.im - anchor < -PI {
            lg.im += 2.0 * PI;
        }
        lg
    }

    /// Cauchy sum `(1/2 pi i) sum log g / (xi - z) dxi` over a node grid.
    fn cauchy_sum(grid: &NodeGrid, z: C, subtract: Option<C>) -> C {
        let mut acc = C::new(0.0, 0.0);
        for ((theta, dxi), lg) in
            grid.thetas.iter().zip(grid.dxi.iter()).zip(grid.log_g.iter())
        {
            let xi = C::from_polar(1.0, *theta);
            let num = match subtract {
                Some(c) => lg - c,
                None => *lg,
            };
            acc += num / (xi - z) * dxi;
        }
        acc / C::new(0.0, 2.0 * PI)
    }

    pub fn f_plus(&self, z: C) -> Result<C> {
        let rho = z.norm();
        if rho < 0.7 {
            return Ok(Self::cauchy_sum(&self.grid, z, None).exp());
        }
        // Near or on the circle the kernel peaks at the projected angle, so
        // re-panel with dyadic refinement there and subtract the local value
        // of log g, which removes the peak up to a constant handled exactly
        // (the constant integrates to itself inside, to half on the circle).
        if rho > 1.0 + 1e-12 {
            return Err(Error::InvalidModel(format!(
                "F+ requested at |z| = {rho} outside the unit disk"
            )));
        }
        // The constant-subtraction identity gives the same expression for
        // interior points and for boundary limits from inside: the principal
        // value of the subtracted kernel is an ordinary integral and the
        // constant contributes itself either way.
        let phi = z.arg();
        let grid = self.assemble(&self.breakpoints(Some(phi)))?;
        let lg0 = self.log_g_aligned(phi, &grid);
        let sub = Self::cauchy_sum(&grid, z, Some(lg0));
        Ok((sub + lg0).exp())
    }

    pub fn f_minus(&self, z: C) -> Result<C> {
        let rho = z.norm();
        if rho > 1.4 {
            return Ok((-Self::cauchy_sum(&self.grid, z, None)).exp());
        }
        if rho < 1.0 - 1e-12 {
            return Err(Error::InvalidModel(format!(
                "F- requested at |z| = {rho} inside the unit disk"
            )));
        }
        let phi = z.arg();
        let grid = self.assemble(&self.breakpoints(Some(phi)))?;
        let lg0 = self.log_g_aligned(phi, &grid);
        let sub = Self::cauchy_sum(&grid, z, Some(lg0));
        Ok((-sub).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rh::fh_data;
    use crate::gaussian_core::CovarianceKind;
    use std::f64::consts::FRAC_PI_2;

    fn cx(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    /// A sampled profile that is secretly an ideal step: the factors
    /// have the closed form F+ = r, F- = 1.
    fn flat_profile_symbol(c: f64, p_f: f64) -> OccupationSymbol {
        OccupationSymbol::from_samples(p_f, vec![c; 12]).unwrap()
    }

    /// A smooth monotone modulation of the sea.
    fn bump_symbol() -> OccupationSymbol {
        let n = 24;
        let p_f = 1.3;
        let samples: Vec<f64> = (0..n)
            .map(|t| {
                let u = t as f64 / (n - 1) as f64;
                0.95 - 0.35 * u * u
            })
            .collect();
        OccupationSymbol::from_samples(p_f, samples).unwrap()
    }

    #[test]
    fn flat_profile_reduces_to_step_factors() {
        let sym = flat_profile_symbol(0.6, FRAC_PI_2);
        let lambda = cx(0.4, 1.2);
        let fh = fh_data(&sym, lambda, CovarianceKind::Plain).unwrap();
        // For a constant target g = r everywhere: F+ = r, F- = 1.
        let r = fh.r;
        for z in [
            cx(0.0, 0.0),
            cx(0.3, 0.2),
            C::from_polar(0.95, 2.1),
            C::from_polar(1.0, -0.4),
        ] {
            let fp = fh.f_plus(z).unwrap();
            assert!(
                (fp - r).norm() < 1e-10 * r.norm(),
                "F+({z}) = {fp}, want {r}"
            );
        }
        for z in [cx(2.0, 0.0), C::from_polar(1.05, 0.9), C::from_polar(1.0, 2.8)] {
            let fm = fh.f_minus(z).unwrap();
            assert!((fm - 1.0).norm() < 1e-10, "F-({z}) = {fm}, want 1");
        }
    }

    #[test]
    fn smooth_profile_factorization_residual_is_tiny() {
        let sym = bump_symbol();
        for (lambda, kind) in [
            (cx(0.0, 2.0), CovarianceKind::Plain),
            (cx(0.7, 1.1), CovarianceKind::Negativity),
            (cx(-1.8, 0.6), CovarianceKind::Plain),
        ] {
            let fh = fh_data(&sym, lambda, kind).unwrap();
            let resid = fh.factorization_residual(40).unwrap();
            assert!(
                resid < 1e-8,
                "factorization residual {resid:.2e} at lambda = {lambda}"
            );
        }
    }

    #[test]
    fn evaluation_paths_agree_where_both_apply() {
        // The plain sum over the default grid and the refined subtracted
        // route are independent quadratures of the same Cauchy integral.
        // At mid radii both are well conditioned, so they must coincide.
        let sym = bump_symbol();
        let lambda = cx(0.0, 2.0);
        let fh = fh_data(&sym, lambda, CovarianceKind::Plain).unwrap();
        let c = CauchyFactor::build(&sym, lambda, 1.0, fh.beta).unwrap();
        for theta in [0.3, -2.0] {
            let zi = C::from_polar(0.85, theta);
            let plain = CauchyFactor::cauchy_sum(&c.grid, zi, None).exp();
            let refined = c.f_plus(zi).unwrap();
            assert!(
                (plain - refined).norm() < 1e-10 * plain.norm(),
                "F+ route mismatch at {zi}: {plain} vs {refined}"
            );
            let zo = C::from_polar(1.18, theta);
            let plain = (-CauchyFactor::cauchy_sum(&c.grid, zo, None)).exp();
            let refined = c.f_minus(zo).unwrap();
            assert!(
                (plain - refined).norm() < 1e-10 * plain.norm(),
                "F- route mismatch at {zo}: {plain} vs {refined}"
            );
        }
    }

    #[test]
    fn out_of_domain_requests_are_refused() {
        let sym = bump_symbol();
        let fh = fh_data(&sym, cx(0.0, 2.0), CovarianceKind::Plain).unwrap();
        assert!(fh.f_plus(cx(1.2, 0.0)).is_err());
        assert!(fh.f_minus(cx(0.5, 0.0)).is_err());
    }
}
