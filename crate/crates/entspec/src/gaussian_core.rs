//! Exact covariance path for two disjoint intervals: assembly of the plain
//! and partial-transpose-deformed matrices, diagonalization, and the
//! entanglement measures derived from the single-particle spectrum.
//!
//! This module is the brute-force oracle the asymptotic route is checked
//! against, so it stays deliberately direct: dense matrices, full
//! eigensolves, no approximations beyond the symbol's own coefficients.

use crate::dense::{self, Mat};
use crate::symbol::OccupationSymbol;
use crate::{Error, Result};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

/// Interval layout: `A` covers sites `0..=k`, `B` covers `n..=n+l`, so the
/// sizes are `k+1` and `l+1` and disjointness requires `n >= k+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub k: usize,
    pub l: usize,
    pub n: usize,
}

impl Geometry {
    pub fn new(k: usize, l: usize, n: usize) -> Result<Self> {
        let geo = Geometry { k, l, n };
        geo.validate()?;
        Ok(geo)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < self.k + 1 {
            return Err(Error::InvalidGeometry(format!(
                "intervals overlap: n = {} < k + 1 = {}",
                self.n,
                self.k + 1
            )));
        }
        Ok(())
    }

    /// Complementary distance `m = n + l - k`; positive whenever the
    /// geometry is valid.
    pub fn m(&self) -> usize {
        self.n + self.l - self.k
    }

    /// Total number of sites `k + l + 2`.
    pub fn size(&self) -> usize {
        self.k + self.l + 2
    }

    /// Swaps the two intervals: `(k, l, n) -> (l, k, m)`. The spectrum is
    /// invariant under this relabeling.
    pub fn mirror(&self) -> Geometry {
        Geometry {
            k: self.l,
            l: self.k,
            n: self.m(),
        }
    }
}

/// Which covariance matrix to assemble: the plain one for entanglement
/// entropy, or the deformed one whose spectrum yields the negativity. The
/// deformation multiplies off-diagonal blocks by `tau = i` and the `BB`
/// block by `tau^2 = -1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    Plain,
    Negativity,
}

impl CovarianceKind {
    /// Block phase: `1` plain, `i` for the partial transpose.
    pub fn tau(self) -> C {
        match self {
            CovarianceKind::Plain => C::new(1.0, 0.0),
            CovarianceKind::Negativity => C::new(0.0, 1.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CovarianceMatrix {
    pub(crate) entries: Mat,
    pub geometry: Geometry,
    pub kind: CovarianceKind,
}

impl CovarianceMatrix {
    pub fn entry(&self, r: usize, c: usize) -> C {
        self.entries[(r, c)]
    }
}

/// Assembles the block matrix over sites of `A` then `B`: `AA` and `BB`
/// blocks are Toeplitz in the site difference, the off-diagonal blocks are
/// shifted by the interval distance `n`. Coefficients are requested up to
/// lag `n + max(k, l) + 1`, which covers every entry; a symbol that cannot
/// resolve those lags fails loudly here rather than truncating.
pub fn build_covariance(
    sym: &OccupationSymbol,
    geo: Geometry,
    kind: CovarianceKind,
) -> Result<CovarianceMatrix> {
    geo.validate()?;
    let max_lag = geo.n + geo.k.max(geo.l) + 1;
    let mut coeffs = Vec::with_capacity(max_lag + 1);
    for j in 0..=max_lag {
        coeffs.push(sym.fourier_coeff(j as i64)?);
    }
    let f = |lag: i64| coeffs[lag.unsigned_abs() as usize];
    let tau = kind.tau();
    let tau2 = tau * tau;
    let n = geo.n as i64;
    let entries = Mat::from_fn(geo.size(), |r, c| {
        let (r_in_a, u) = split_site(r, geo.k);
        let (c_in_a, v) = split_site(c, geo.k);
        match (r_in_a, c_in_a) {
            (true, true) => C::from(f(u - v)),
            (true, false) => tau * f(u - v - n),
            (false, true) => tau * f(u + n - v),
            (false, false) => tau2 * f(u - v),
        }
    });
    Ok(CovarianceMatrix {
        entries,
        geometry: geo,
        kind,
    })
}

/// Maps a matrix row/column to (interval A?, site offset within interval).
fn split_site(r: usize, k: usize) -> (bool, i64) {
    if r <= k {
        (true, r as i64)
    } else {
        (false, (r - k - 1) as i64)
    }
}

/// Full single-particle spectrum plus the measure the kind supports.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub geometry: Geometry,
    pub kind: CovarianceKind,
    /// Ascending by (real, imaginary) part; real for the plain kind.
    pub eigenvalues: Vec<C>,
    pub entropy: Option<f64>,
    pub log_negativity: Option<f64>,
}

impl SpectrumResult {
    /// CSV rows `(index, re_lambda, im_lambda, nu_plus, nu_minus)` with the
    /// occupation-pair moduli `|(1 +- lambda)/2|`; for the plain kind these
    /// are the occupations themselves.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re_lambda,im_lambda,nu_plus,nu_minus\n");
        for (i, lam) in self.eigenvalues.iter().enumerate() {
            let nu_p = ((1.0 + lam) / 2.0).norm();
            let nu_m = ((1.0 - lam) / 2.0).norm();
            out.push_str(&format!(
                "{i},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                lam.re, lam.im, nu_p, nu_m
            ));
        }
        out
    }
}

/// Diagonalizes the covariance matrix. The plain kind goes through the real
/// symmetric solver and also reports the entropy; the deformed kind uses the
/// general complex solver (the matrix is complex symmetric, not Hermitian)
/// and reports the logarithmic negativity.
pub fn spectrum(cov: &CovarianceMatrix) -> Result<SpectrumResult> {
    let size = cov.entries.n();
    let mut eigenvalues = match cov.kind {
        CovarianceKind::Plain => {
            let mut real = vec![0.0; size * size];
            for r in 0..size {
                for c in 0..size {
                    real[r * size + c] = cov.entries[(r, c)].re;
                }
            }
            dense::symmetric_eigenvalues(&real, size)?
                .into_iter()
                .map(C::from)
                .collect::<Vec<_>>()
        }
        CovarianceKind::Negativity => dense::complex_eigenvalues(&cov.entries)?,
    };
    eigenvalues.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("finite eigenvalues")
    });
    let entropy = match cov.kind {
        CovarianceKind::Plain => {
            let real: Vec<f64> = eigenvalues.iter().map(|z| z.re).collect();
            Some(entropy_from_eigenvalues(&real)?)
        }
        CovarianceKind::Negativity => None,
    };
    let log_negativity = match cov.kind {
        CovarianceKind::Negativity => Some(negativity_from_eigenvalues(&eigenvalues)),
        CovarianceKind::Plain => None,
    };
    Ok(SpectrumResult {
        geometry: cov.geometry,
        kind: cov.kind,
        eigenvalues,
        entropy,
        log_negativity,
    })
}

/// Binary entropy sum over occupations `nu = (1 + lambda)/2`. Eigenvalues
/// may overshoot `[-1, 1]` at machine level; overshoot up to `1e-8` is
/// clipped with a warning, anything larger is an error.
pub(crate) fn entropy_from_eigenvalues(eigenvalues: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &lam in eigenvalues {
        let excess = lam.abs() - 1.0;
        if excess > 1e-8 {
            return Err(Error::NumericalRange { value: lam, excess });
        }
        if excess > 1e-13 {
            eprintln!("warning: eigenvalue {lam:.17e} clipped into [-1, 1]");
        }
        let nu = ((1.0 + lam) / 2.0).clamp(0.0, 1.0);
        if nu > 0.0 && nu < 1.0 {
            total -= nu * nu.ln() + (1.0 - nu) * (1.0 - nu).ln();
        }
    }
    Ok(total)
}

fn negativity_from_eigenvalues(eigenvalues: &[C]) -> f64 {
    eigenvalues
        .iter()
        .map(|lam| (((1.0 - lam) / 2.0).norm() + ((1.0 + lam) / 2.0).norm()).ln())
        .sum()
}

/// Entropy of a plain-kind spectrum.
pub fn entropy(res: &SpectrumResult) -> Result<f64> {
    res.entropy.ok_or_else(|| {
        Error::InvalidModel("entropy requires a plain-kind spectrum".into())
    })
}

/// Logarithmic negativity of a deformed-kind spectrum.
pub fn log_negativity(res: &SpectrumResult) -> Result<f64> {
    res.log_negativity.ok_or_else(|| {
        Error::InvalidModel("log-negativity requires a negativity-kind spectrum".into())
    })
}

/// Characteristic determinant `D(lambda) = det(lambda I + M)` via pivoted
/// LU. Vanishes exactly at the negated eigenvalues.
pub fn char_poly(cov: &CovarianceMatrix, lambda: C) -> C {
    let size = cov.entries.n();
    let shifted = Mat::from_fn(size, |r, c| {
        let mut v = cov.entries[(r, c)];
        if r == c {
            v += lambda;
        }
        v
    });
    dense::lu_factor(&shifted).det()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn step() -> OccupationSymbol {
        OccupationSymbol::from_step(PI / 2.0).unwrap()
    }

    fn fj(j: i64) -> f64 {
        step().fourier_coeff(j).unwrap()
    }

    #[test]
    fn geometry_validation_and_mirror() {
        assert!(Geometry::new(2, 3, 3).is_ok());
        assert!(matches!(
            Geometry::new(2, 3, 2),
            Err(Error::InvalidGeometry(_))
        ));
        let geo = Geometry::new(2, 3, 5).unwrap();
        assert_eq!(geo.m(), 6);
        assert_eq!(geo.size(), 7);
        let mir = geo.mirror();
        assert_eq!((mir.k, mir.l, mir.n), (3, 2, 6));
        assert!(mir.validate().is_ok());
        assert_eq!(mir.mirror(), geo);
    }

    #[test]
    fn two_site_blocks_match_definition() {
        let geo = Geometry::new(0, 0, 2).unwrap();
        let plain = build_covariance(&step(), geo, CovarianceKind::Plain).unwrap();
        assert_eq!(plain.entry(0, 0), C::from(fj(0)));
        assert_eq!(plain.entry(0, 1), C::from(fj(2)));
        assert_eq!(plain.entry(1, 0), C::from(fj(2)));
        assert_eq!(plain.entry(1, 1), C::from(fj(0)));

        let neg = build_covariance(&step(), geo, CovarianceKind::Negativity).unwrap();
        assert_eq!(neg.entry(0, 0), C::from(fj(0)));
        assert_eq!(neg.entry(0, 1), C::new(0.0, fj(2)));
        assert_eq!(neg.entry(1, 0), C::new(0.0, fj(2)));
        assert_eq!(neg.entry(1, 1), C::from(-fj(0)));
    }

    #[test]
    fn unit_symbol_gives_identity_and_zero_entropy() {
        let sym = OccupationSymbol::from_constant(1.0);
        let geo = Geometry::new(1, 2, 4).unwrap();
        let cov = build_covariance(&sym, geo, CovarianceKind::Plain).unwrap();
        for r in 0..geo.size() {
            for c in 0..geo.size() {
                let want = if r == c { 1.0 } else { 0.0 };
                assert_eq!(cov.entry(r, c), C::from(want));
            }
        }
        let res = spectrum(&cov).unwrap();
        for lam in &res.eigenvalues {
            assert!((lam - C::from(1.0)).norm() < 1e-14);
        }
        assert!(entropy(&res).unwrap().abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_modes_give_ln2_each() {
        let sym = OccupationSymbol::from_constant(0.0);
        let geo = Geometry::new(0, 0, 2).unwrap();
        let cov = build_covariance(&sym, geo, CovarianceKind::Plain).unwrap();
        let res = spectrum(&cov).unwrap();
        let s = entropy(&res).unwrap();
        assert!((s - 2.0 * std::f64::consts::LN_2).abs() < 1e-13);
    }

    #[test]
    fn plain_spectrum_matches_frozen_oracle() {
        // Independent diagonalization of the same assembly (numpy eigvalsh)
        // for (k, l, n) = (1, 1, 3) at the half-filled step.
        let want = [
            -8.488_263_631_567_752_88e-1,
            -4.244_131_815_783_875_88e-1,
            4.244_131_815_783_874_22e-1,
            8.488_263_631_567_751_77e-1,
        ];
        let geo = Geometry::new(1, 1, 3).unwrap();
        let cov = build_covariance(&step(), geo, CovarianceKind::Plain).unwrap();
        let res = spectrum(&cov).unwrap();
        assert_eq!(res.eigenvalues.len(), 4);
        for (got, want) in res.eigenvalues.iter().zip(want) {
            assert!(got.im == 0.0);
            assert!((got.re - want).abs() < 1e-10, "{} vs {want}", got.re);
        }
    }

    #[test]
    fn adjacent_negativity_matches_frozen_oracle() {
        // numpy eigvals of the deformed matrix, k = l = 8, n = 9.
        let geo = Geometry::new(8, 8, 9).unwrap();
        let cov = build_covariance(&step(), geo, CovarianceKind::Negativity).unwrap();
        let res = spectrum(&cov).unwrap();
        let e = log_negativity(&res).unwrap();
        assert!(e > 0.0);
        assert!(
            (e - 7.004_061_076_916_165_97e-1).abs() < 1e-9,
            "log negativity {e}"
        );
    }

    #[test]
    fn negativity_spectrum_closed_under_conjugation() {
        let geo = Geometry::new(2, 1, 4).unwrap();
        let cov = build_covariance(&step(), geo, CovarianceKind::Negativity).unwrap();
        let res = spectrum(&cov).unwrap();
        // Pair each eigenvalue with the nearest conjugate; sorting is not
        // stable against roundoff ties in the real parts.
        for lam in &res.eigenvalues {
            let nearest = res
                .eigenvalues
                .iter()
                .map(|mu| (mu.conj() - lam).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-9, "unpaired eigenvalue {lam}");
        }
    }

    #[test]
    fn mirror_geometry_preserves_plain_spectrum() {
        let geo = Geometry::new(2, 3, 5).unwrap();
        let a = spectrum(&build_covariance(&step(), geo, CovarianceKind::Plain).unwrap()).unwrap();
        let b = spectrum(
            &build_covariance(&step(), geo.mirror(), CovarianceKind::Plain).unwrap(),
        )
        .unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn added_site_interlaces_plain_spectrum() {
        let sym = step();
        let small = spectrum(
            &build_covariance(&sym, Geometry::new(2, 2, 4).unwrap(), CovarianceKind::Plain)
                .unwrap(),
        )
        .unwrap();
        let large = spectrum(
            &build_covariance(&sym, Geometry::new(2, 3, 4).unwrap(), CovarianceKind::Plain)
                .unwrap(),
        )
        .unwrap();
        // Cauchy interlacing for a Hermitian matrix and its principal
        // submatrix: mu_i <= lambda_i <= mu_{i+1}.
        let mu: Vec<f64> = large.eigenvalues.iter().map(|z| z.re).collect();
        let lam: Vec<f64> = small.eigenvalues.iter().map(|z| z.re).collect();
        for (i, &x) in lam.iter().enumerate() {
            assert!(mu[i] <= x + 1e-12 && x <= mu[i + 1] + 1e-12);
        }
    }

    #[test]
    fn char_poly_matches_closed_form_and_eigenproduct() {
        let geo = Geometry::new(0, 0, 2).unwrap();
        let lambda = C::new(0.37, 0.81);
        for kind in [CovarianceKind::Plain, CovarianceKind::Negativity] {
            let cov = build_covariance(&step(), geo, kind).unwrap();
            let tau2 = kind.tau() * kind.tau();
            let want = (lambda + fj(0)) * (lambda + tau2 * fj(0)) - tau2 * fj(2) * fj(2);
            let got = char_poly(&cov, lambda);
            assert!((got - want).norm() < 1e-14, "{kind:?}: {got} vs {want}");
        }

        let geo = Geometry::new(2, 1, 4).unwrap();
        for kind in [CovarianceKind::Plain, CovarianceKind::Negativity] {
            let cov = build_covariance(&step(), geo, kind).unwrap();
            let res = spectrum(&cov).unwrap();
            let lambda = C::new(0.9, -0.4);
            let want: C = res
                .eigenvalues
                .iter()
                .fold(C::from(1.0), |acc, lam| acc * (lambda + lam));
            let got = char_poly(&cov, lambda);
            assert!(
                (got - want).norm() <= 1e-9 * want.norm(),
                "{kind:?}: {got} vs {want}"
            );
        }

        // Leading coefficient is 1: D / lambda^N -> 1.
        let cov = build_covariance(&step(), geo, CovarianceKind::Plain).unwrap();
        let big = C::from(1e6);
        let ratio = char_poly(&cov, big) / big.powu(geo.size() as u32);
        assert!((ratio - C::from(1.0)).norm() < 1e-4);
    }

    #[test]
    fn entropy_range_checks_and_clipping() {
        assert!(entropy_from_eigenvalues(&[1.0, -1.0]).unwrap().abs() == 0.0);
        let s = entropy_from_eigenvalues(&[0.0]).unwrap();
        assert!((s - std::f64::consts::LN_2).abs() < 1e-15);
        // Overshoot below the threshold is clipped to a zero contribution.
        let s = entropy_from_eigenvalues(&[1.0 + 5e-9]).unwrap();
        assert_eq!(s, 0.0);
        assert!(matches!(
            entropy_from_eigenvalues(&[1.0 + 2e-8]),
            Err(Error::NumericalRange { .. })
        ));
    }

    #[test]
    fn unresolvable_lag_fails_loudly() {
        let p_f = 1.1;
        let s = 257;
        let samples: Vec<f64> = (0..s)
            .map(|t| {
                let x = t as f64 / (s - 1) as f64;
                0.1 + 0.7 * (1.0 - x * x)
            })
            .collect();
        let sym = OccupationSymbol::from_samples(p_f, samples)
            .unwrap()
            .with_dft_size(64)
            .unwrap();
        let geo = Geometry::new(1, 1, 40).unwrap();
        assert!(matches!(
            build_covariance(&sym, geo, CovarianceKind::Plain),
            Err(Error::LagOutOfRange { .. })
        ));
    }

    #[test]
    fn csv_layout_is_stable() {
        let geo = Geometry::new(0, 0, 2).unwrap();
        let sym = OccupationSymbol::from_constant(0.0);
        let cov = build_covariance(&sym, geo, CovarianceKind::Plain).unwrap();
        let res = spectrum(&cov).unwrap();
        let csv = res.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "index,re_lambda,im_lambda,nu_plus,nu_minus"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("0,"));
        assert_eq!(row.split(',').count(), 5);
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }
}
