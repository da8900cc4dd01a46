//! Microscopic chain-reservoir model producing the occupation function.
//!
//! Each momentum mode of a tight-binding chain, dispersion
//! `eps(p) = hopping * (1 - cos p)`, hybridizes with a ladder of discrete
//! reservoir levels `G_n = band_bottom + level_spacing * n` (n = 1..N)
//! through couplings `H_n`. The dressed mode frequencies solve
//!
//! `omega = eps(p) + alpha_tilde(omega)`,
//! `alpha_tilde(omega) = coupling^2 * level_spacing * sum_n H_n^2 / (omega - G_n)`,
//!
//! one root per gap between consecutive levels plus one below and one above,
//! N + 1 in total. The ground state fills every dressed mode below the Fermi
//! energy, so the chain-site occupation of momentum `p` is the total
//! spectral weight of the sub-Fermi roots. Units: `hbar = 1`, lattice
//! spacing 1.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of the chain-reservoir model.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReservoirSpec {
    /// Chain hopping scale; sets the band `eps(p) in [0, 2 * hopping]`.
    pub hopping: f64,
    /// Chain-reservoir hybridization strength (the global prefactor alpha).
    pub coupling: f64,
    /// Bottom of the reservoir ladder; level n sits at
    /// `band_bottom + n * level_spacing`.
    pub band_bottom: f64,
    /// Spacing between consecutive reservoir levels. Must be positive.
    pub level_spacing: f64,
    /// Couplings `H_n`, one per reservoir level. A vanishing entry
    /// decouples that level: it stays in the mode list with weight zero.
    pub couplings: Vec<f64>,
    /// Fermi energy of the filled ground state.
    pub fermi_energy: f64,
}

/// Dressed mode frequencies and spectral weights at one momentum.
#[derive(Clone, Debug)]
pub struct ModeSolution {
    /// All `N + 1` dressed frequencies, ascending.
    pub roots: Vec<f64>,
    /// Spectral weight of each root on the chain mode; sums to one.
    pub weights: Vec<f64>,
}

impl ReservoirSpec {
    /// Validates positivity and finiteness constraints.
    pub fn validate(&self) -> Result<()> {
        if !(self.hopping > 0.0) || !self.hopping.is_finite() {
            return Err(Error::InvalidModel(format!(
                "hopping must be positive and finite, got {}",
                self.hopping
            )));
        }
        if !(self.level_spacing > 0.0) || !self.level_spacing.is_finite() {
            return Err(Error::InvalidModel(format!(
                "level_spacing must be positive and finite, got {}",
                self.level_spacing
            )));
        }
        if self.couplings.is_empty() {
            return Err(Error::InvalidModel(
                "at least one reservoir level is required".into(),
            ));
        }
        for (n, h) in self.couplings.iter().enumerate() {
            if !h.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "coupling H_{} is not finite",
                    n + 1
                )));
            }
        }
        if !self.coupling.is_finite() || !self.band_bottom.is_finite() {
            return Err(Error::InvalidModel(
                "coupling and band_bottom must be finite".into(),
            ));
        }
        if !self.fermi_energy.is_finite() {
            return Err(Error::InvalidModel("fermi_energy must be finite".into()));
        }
        Ok(())
    }

    /// Bare chain dispersion `hopping * (1 - cos p)`.
    pub fn dispersion(&self, p: f64) -> f64 {
        self.hopping * (1.0 - p.cos())
    }

    /// Position of reservoir level `n` (1-based as in the ladder).
    fn level(&self, n: usize) -> f64 {
        self.band_bottom + self.level_spacing * (n as f64 + 1.0)
    }

    /// Whether level `n` actually hybridizes: both the global coupling and
    /// its own matrix element must be nonzero.
    fn is_coupled(&self, n: usize) -> bool {
        self.coupling != 0.0 && self.couplings[n] != 0.0
    }

    /// The reservoir-dressed self-energy
    /// `alpha_tilde(omega) = coupling^2 * spacing * sum H_n^2 / (omega - G_n)`.
    ///
    /// Decoupled levels do not contribute.
    pub fn self_energy(&self, omega: f64) -> f64 {
        let pref = self.coupling * self.coupling * self.level_spacing;
        let mut s = 0.0;
        for (n, &h) in self.couplings.iter().enumerate() {
            if self.is_coupled(n) {
                s += h * h / (omega - self.level(n));
            }
        }
        pref * s
    }

    fn weight_at(&self, omega: f64) -> f64 {
        let pref = self.coupling * self.coupling * self.level_spacing;
        let mut s = 0.0;
        for (n, &h) in self.couplings.iter().enumerate() {
            if self.is_coupled(n) {
                let d = omega - self.level(n);
                s += h * h / (d * d);
            }
        }
        1.0 / (1.0 + pref * s)
    }
}

/// Solves the dispersion relation at momentum `p`.
///
/// The roots interlace the coupled reservoir levels; each gap between
/// consecutive coupled levels holds exactly one root, plus one root below
/// the ladder and one above. Decoupled levels (zero coupling) are returned
/// as exact roots with weight zero.
pub fn dispersion_roots(spec: &ReservoirSpec, p: f64) -> Result<ModeSolution> {
    spec.validate()?;
    let eps = spec.dispersion(p);
    let coupled: Vec<f64> = (0..spec.couplings.len())
        .filter(|&n| spec.is_coupled(n))
        .map(|n| spec.level(n))
        .collect();
    let decoupled: Vec<f64> = (0..spec.couplings.len())
        .filter(|&n| !spec.is_coupled(n))
        .map(|n| spec.level(n))
        .collect();

    let mut entries: Vec<(f64, f64)> = decoupled.iter().map(|&g| (g, 0.0)).collect();

    if coupled.is_empty() {
        // Fully decoupled chain: the bare dispersion is the only dressed
        // mode and carries all the weight.
        entries.push((eps, 1.0));
    } else {
        let phi = |om: f64| om - eps - spec.self_energy(om);
        let span: f64 = spec.coupling * spec.coupling
            * spec.level_spacing
            * spec.couplings.iter().map(|h| h * h).sum::<f64>();

        // Below the ladder.
        let first = coupled[0];
        let mut lo = first.min(eps) - span - 1.0;
        let mut grow = 1.0;
        while phi(lo) > 0.0 {
            grow *= 2.0;
            lo -= grow;
            if grow > 1e12 {
                return Err(Error::NoSolution(
                    "left bracket of the dispersion relation not found".into(),
                ));
            }
        }
        let hi = approach_pole_from_left(&phi, first, first - lo)?;
        let root = bracketed_root(&phi, lo, hi);
        entries.push((root, spec.weight_at(root)));

        // One root per interior gap.
        for w in coupled.windows(2) {
            let width = w[1] - w[0];
            let lo = approach_pole_from_right(&phi, w[0], width)?;
            let hi = approach_pole_from_left(&phi, w[1], width)?;
            let root = bracketed_root(&phi, lo, hi);
            entries.push((root, spec.weight_at(root)));
        }

        // Above the ladder.
        let last = *coupled.last().expect("nonempty");
        let mut hi = last.max(eps) + span + 1.0;
        let mut grow = 1.0;
        while phi(hi) < 0.0 {
            grow *= 2.0;
            hi += grow;
            if grow > 1e12 {
                return Err(Error::NoSolution(
                    "right bracket of the dispersion relation not found".into(),
                ));
            }
        }
        let lo = approach_pole_from_right(&phi, last, hi - last)?;
        let root = bracketed_root(&phi, lo, hi);
        entries.push((root, spec.weight_at(root)));
    }

    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ModeSolution {
        roots: entries.iter().map(|e| e.0).collect(),
        weights: entries.iter().map(|e| e.1).collect(),
    })
}

/// Finds `g - delta` with `phi(g - delta) > 0` (the function diverges to
/// `+infinity` at the pole from the left).
fn approach_pole_from_left(phi: &impl Fn(f64) -> f64, g: f64, scale: f64) -> Result<f64> {
    let mut delta = scale * 1e-3;
    for _ in 0..200 {
        let x = g - delta;
        if phi(x) > 0.0 {
            return Ok(x);
        }
        delta *= 0.01;
        if delta < f64::MIN_POSITIVE * 1e4 {
            break;
        }
    }
    Err(Error::NoSolution(format!(
        "could not bracket the root left of the level at {g}"
    )))
}

fn approach_pole_from_right(phi: &impl Fn(f64) -> f64, g: f64, scale: f64) -> Result<f64> {
    let mut delta = scale * 1e-3;
    for _ in 0..200 {
        let x = g + delta;
        if phi(x) < 0.0 {
            return Ok(x);
        }
        delta *= 0.01;
        if delta < f64::MIN_POSITIVE * 1e4 {
            break;
        }
    }
    Err(Error::NoSolution(format!(
        "could not bracket the root right of the level at {g}"
    )))
}

/// Root of a strictly increasing function on a sign-changing bracket.
/// Bisection narrows the bracket, then secant steps finish; every secant
/// step is clipped to the current bracket so the iteration cannot escape.
fn bracketed_root(phi: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    debug_assert!(lo < hi);
    let mut flo = phi(lo);
    let mut fhi = phi(hi);
    debug_assert!(flo <= 0.0 && fhi >= 0.0);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    for _ in 0..80 {
        if hi - lo <= 1e-9 * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = phi(mid);
        if fm <= 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    for _ in 0..60 {
        if hi - lo <= 1e-15 * scale {
            break;
        }
        let denom = fhi - flo;
        let mut x = if denom != 0.0 {
            lo - flo * (hi - lo) / denom
        } else {
            0.5 * (lo + hi)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = phi(x);
        if fx <= 0.0 {
            if x == lo {
                break;
            }
            lo = x;
            flo = fx;
        } else {
            if x == hi {
                break;
            }
            hi = x;
            fhi = fx;
        }
    }
    0.5 * (lo + hi)
}

/// Ground-state occupation of chain momentum `p`: the summed weight of all
/// dressed modes strictly below the Fermi energy.
///
/// A dressed mode degenerate with the Fermi energy (within `1e-12` of the
/// frequency scale) makes the occupation ill-defined and is an error.
pub fn occupation(spec: &ReservoirSpec, p: f64) -> Result<f64> {
    let sol = dispersion_roots(spec, p)?;
    let scale = spec
        .fermi_energy
        .abs()
        .max(sol.roots.iter().fold(0.0_f64, |m, r| m.max(r.abs())))
        .max(1.0);
    let mut occ = 0.0;
    for (&r, &w) in sol.roots.iter().zip(&sol.weights) {
        if (r - spec.fermi_energy).abs() < 1e-12 * scale {
            return Err(Error::DegenerateFermiLevel { p });
        }
        if r < spec.fermi_energy {
            occ += w;
        }
    }
    Ok(occ)
}

/// The Fermi momentum: the momentum whose dressed chain branch crosses the
/// Fermi energy, solving `eps(p_F) = fermi_energy - alpha_tilde(fermi_energy)`.
pub fn fermi_momentum(spec: &ReservoirSpec) -> Result<f64> {
    spec.validate()?;
    let scale = spec.fermi_energy.abs().max(1.0);
    for n in 0..spec.couplings.len() {
        if spec.is_coupled(n) && (spec.fermi_energy - spec.level(n)).abs() < 1e-12 * scale {
            return Err(Error::NoSolution(
                "Fermi energy coincides with a coupled reservoir level".into(),
            ));
        }
    }
    let target = spec.fermi_energy - spec.self_energy(spec.fermi_energy);
    if !(target > 0.0 && target < 2.0 * spec.hopping) {
        return Err(Error::NoSolution(format!(
            "dressed Fermi energy {target} outside the open band (0, {})",
            2.0 * spec.hopping
        )));
    }
    Ok((1.0 - target / spec.hopping).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn oracle_spec() -> ReservoirSpec {
        ReservoirSpec {
            hopping: 1.0,
            coupling: 0.25,
            band_bottom: 1.3,
            level_spacing: 0.17,
            couplings: vec![0.9, 0.7, 1.0, 0.55, 0.8, 0.65],
            fermi_energy: 1.0,
        }
    }

    #[test]
    fn roots_and_weights_match_high_precision_reference() {
        // Frozen from an independent 30-digit evaluation of the same model.
        let spec = oracle_spec();
        let sol = dispersion_roots(&spec, 0.3).unwrap();
        let roots = [
            2.275_982_741_293_357_95e-2,
            1.475_676_010_555_455_61,
            1.643_170_506_127_440_42,
            1.816_017_202_232_058_43,
            1.981_694_497_741_009_59,
            2.153_295_650_270_572_01,
            2.322_049_816_534_924_37,
        ];
        let weights = [
            9.875_390_364_144_065_46e-1,
            3.725_022_263_653_658_08e-3,
            1.924_337_078_787_532_19e-3,
            3.391_073_445_499_989_85e-3,
            8.919_940_374_930_213_95e-4,
            1.593_695_705_792_969_43e-3,
            9.348_410_543_663_300_72e-4,
        ];
        assert_eq!(sol.roots.len(), 7);
        for i in 0..7 {
            assert_relative_eq!(sol.roots[i], roots[i], max_relative = 1e-12);
            assert_relative_eq!(sol.weights[i], weights[i], max_relative = 1e-10);
        }
        assert_relative_eq!(
            occupation(&spec, 0.3).unwrap(),
            9.875_390_364_144_065_46e-1,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            occupation(&spec, 1.0).unwrap(),
            9.784_544_005_164_698_13e-1,
            max_relative = 1e-12
        );
        // Above the Fermi point every dressed mode is above the Fermi
        // energy, so the occupation vanishes identically.
        assert_eq!(occupation(&spec, 2.0).unwrap(), 0.0);
        assert_relative_eq!(
            fermi_momentum(&spec).unwrap(),
            1.622_976_726_789_113_98,
            max_relative = 1e-13
        );
    }

    #[test]
    fn single_level_matches_quadratic_closed_form() {
        // One level: (omega - eps)(omega - g) = c with c = alpha^2 D H^2.
        let spec = ReservoirSpec {
            hopping: 1.0,
            coupling: 0.4,
            band_bottom: 1.1,
            level_spacing: 0.5,
            couplings: vec![0.8],
            fermi_energy: 1.0,
        };
        let p = 0.9;
        let eps = spec.dispersion(p);
        let g = spec.band_bottom + spec.level_spacing;
        let c = spec.coupling.powi(2) * spec.level_spacing * 0.8_f64.powi(2);
        let disc = ((eps - g) * (eps - g) + 4.0 * c).sqrt();
        let lo = 0.5 * (eps + g - disc);
        let hi = 0.5 * (eps + g + disc);
        let sol = dispersion_roots(&spec, p).unwrap();
        assert_relative_eq!(sol.roots[0], lo, max_relative = 1e-13);
        assert_relative_eq!(sol.roots[1], hi, max_relative = 1e-13);
        // Closed-form weights 1/(1 + c/(omega - g)^2).
        for (r, w) in sol.roots.iter().zip(&sol.weights) {
            let expect = 1.0 / (1.0 + c / ((r - g) * (r - g)));
            assert_relative_eq!(*w, expect, max_relative = 1e-11);
        }
    }

    #[test]
    fn decoupled_level_keeps_weight_zero() {
        let mut spec = oracle_spec();
        spec.couplings[2] = 0.0;
        let sol = dispersion_roots(&spec, 0.7).unwrap();
        assert_eq!(sol.roots.len(), 7);
        let g3 = spec.band_bottom + 3.0 * spec.level_spacing;
        let hit = sol
            .roots
            .iter()
            .zip(&sol.weights)
            .find(|(r, _)| (**r - g3).abs() < 1e-14)
            .expect("decoupled level must appear as a root");
        assert_eq!(*hit.1, 0.0);
        let total: f64 = sol.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_coupling_reduces_to_bare_chain() {
        let mut spec = oracle_spec();
        spec.coupling = 0.0;
        for p in [0.2, 1.0, 2.4] {
            let sol = dispersion_roots(&spec, p).unwrap();
            // One root is the bare dispersion with full weight.
            let eps = spec.dispersion(p);
            let chain = sol
                .roots
                .iter()
                .zip(&sol.weights)
                .find(|(_, w)| **w > 0.5)
                .unwrap();
            assert_relative_eq!(*chain.0, eps, max_relative = 1e-12);
            assert_relative_eq!(*chain.1, 1.0, max_relative = 1e-12);
            let occ = occupation(&spec, p).unwrap();
            assert_eq!(occ, if eps < spec.fermi_energy { 1.0 } else { 0.0 });
        }
        // And the Fermi momentum collapses to arccos(1 - eF / hopping).
        let pf = fermi_momentum(&spec).unwrap();
        assert_relative_eq!(
            pf,
            (1.0_f64 - spec.fermi_energy / spec.hopping).acos(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn fermi_energy_outside_band_is_rejected() {
        let mut spec = oracle_spec();
        spec.fermi_energy = 5.0;
        assert!(matches!(fermi_momentum(&spec), Err(Error::NoSolution(_))));
    }

    #[test]
    fn degenerate_fermi_level_is_reported() {
        let spec = oracle_spec();
        // Tune the momentum so the chain branch sits exactly at the Fermi
        // energy: that is the definition of the Fermi momentum.
        let pf = fermi_momentum(&spec).unwrap();
        match occupation(&spec, pf) {
            Err(Error::DegenerateFermiLevel { .. }) => {}
            other => panic!("expected DegenerateFermiLevel, got {other:?}"),
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = oracle_spec();
        let text = serde_json::to_string(&spec).unwrap();
        let back: ReservoirSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn weights_sum_to_one_and_roots_interlace(
            seed in 0u64..1u64 << 48,
            nlev in 1usize..12,
            p in 0.01f64..3.1,
        ) {
            let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            let couplings: Vec<f64> = (0..nlev).map(|_| 0.2 + next()).collect();
            let spec = ReservoirSpec {
                hopping: 0.5 + next(),
                coupling: 0.05 + 0.4 * next(),
                band_bottom: 0.5 + next(),
                level_spacing: 0.05 + 0.3 * next(),
                couplings,
                fermi_energy: 1.0,
            };
            let sol = dispersion_roots(&spec, p).unwrap();
            prop_assert_eq!(sol.roots.len(), nlev + 1);
            let total: f64 = sol.weights.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10, "weight sum {}", total);
            // Roots strictly interlace the levels.
            for (i, w) in sol.roots.windows(2).enumerate() {
                prop_assert!(w[0] < w[1], "roots not ascending at {}", i);
            }
            for (n, _) in spec.couplings.iter().enumerate() {
                let g = spec.band_bottom + spec.level_spacing * (n as f64 + 1.0);
                let below = sol.roots.iter().filter(|r| **r < g).count();
                prop_assert!(below >= n + 1);
            }
            // The dispersion relation itself is satisfied at every
            // positive-weight root.
            for (&r, &w) in sol.roots.iter().zip(&sol.weights) {
                if w > 0.0 {
                    let resid = r - spec.dispersion(p) - spec.self_energy(r);
                    prop_assert!(resid.abs() < 1e-9, "residual {resid} at root {r}");
                }
            }
        }

        #[test]
        fn occupation_is_even_in_momentum(p in 0.0f64..3.14) {
            let spec = oracle_spec();
            let a = occupation(&spec, p).unwrap();
            let b = occupation(&spec, -p).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
