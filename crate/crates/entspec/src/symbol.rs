//! Occupation symbol `f(z)` on the unit circle: jump data, pointwise
//! evaluation and Fourier coefficients, shared by the exact and the
//! asymptotic computation paths.
//!
//! The symbol is even, `f(z) = f(1/z)`, equals the outside value `f_o` for
//! `|p| > p_F`, and carries a genuine jump at the Fermi points `±p_F`.
//! Fourier coefficients split into the closed-form coefficients of an ideal
//! step plus a smooth remainder handled by a uniform-grid discrete
//! transform, so the jump never degrades convergence.

use crate::model::{self, ReservoirSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default size of the uniform-grid transform for the smooth remainder.
pub const DEFAULT_DFT_SIZE: usize = 1 << 12;

/// How the inside profile is stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Representation {
    /// Ideal step: `f = f_i` strictly inside the sea, `f_o` outside.
    Step,
    /// Smooth modulation sampled on the uniform grid `t * p_F / (S - 1)`,
    /// `t = 0..S`; the final sample is the one-sided limit at the jump.
    Sampled { samples: Vec<f64> },
    /// Constant symbol. Degenerate test input with no sea boundary; it
    /// violates the genuine-jump invariant on purpose and is rejected by
    /// the factorization layer.
    Constant { value: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccupationSymbol {
    fermi_momentum: f64,
    /// `(f_i, f_o)`: one-sided limits at the jump from inside / outside.
    jump_values: (f64, f64),
    representation: Representation,
    #[serde(skip_serializing, default = "default_dft_size")]
    dft_size: usize,
}

fn default_dft_size() -> usize {
    DEFAULT_DFT_SIZE
}

fn check_fermi_momentum(p_f: f64) -> Result<()> {
    if !(p_f > 0.0 && p_f < PI) {
        return Err(Error::InvalidModel(format!(
            "Fermi momentum {p_f} outside (0, pi)"
        )));
    }
    Ok(())
}

impl OccupationSymbol {
    /// Ideal step symbol: `f = 1` inside the Fermi sea, `-1` outside.
    pub fn from_step(p_f: f64) -> Result<Self> {
        check_fermi_momentum(p_f)?;
        Ok(Self {
            fermi_momentum: p_f,
            jump_values: (1.0, -1.0),
            representation: Representation::Step,
            dft_size: DEFAULT_DFT_SIZE,
        })
    }

    /// Constant symbol `f = value`. Test constructor for degenerate limits;
    /// carries no jump, so the Riemann-Hilbert layer refuses it.
    pub fn from_constant(value: f64) -> Self {
        Self {
            fermi_momentum: PI / 2.0,
            jump_values: (value, value),
            representation: Representation::Constant { value },
            dft_size: DEFAULT_DFT_SIZE,
        }
    }

    /// Sampled symbol from explicit profile values on the uniform grid
    /// `t * p_F / (samples.len() - 1)`; the last entry is the inside limit
    /// `f_i` at the jump. The outside value is `-1`.
    pub fn from_samples(p_f: f64, samples: Vec<f64>) -> Result<Self> {
        check_fermi_momentum(p_f)?;
        if samples.len() < 8 {
            return Err(Error::InvalidModel(format!(
                "need at least 8 profile samples, got {}",
                samples.len()
            )));
        }
        for (t, &v) in samples.iter().enumerate() {
            if !v.is_finite() || v.abs() > 1.0 + 1e-9 {
                return Err(Error::InvalidModel(format!(
                    "profile sample {t} = {v} outside [-1, 1]"
                )));
            }
        }
        let f_i = *samples.last().expect("nonempty");
        if (f_i - (-1.0)).abs() <= 1e-9 {
            return Err(Error::InvalidModel(
                "profile limit equals the outside value; no jump at p_F".into(),
            ));
        }
        Ok(Self {
            fermi_momentum: p_f,
            jump_values: (f_i, -1.0),
            representation: Representation::Sampled { samples },
            dft_size: DEFAULT_DFT_SIZE,
        })
    }

    /// Symbol of the reservoir-coupled chain: `f(p) = 2 n(p) - 1` with
    /// `n(p)` the ground-state occupation, sampled on `grid_size` points of
    /// `[0, p_F]`. The inside limit at the jump comes from one-sided
    /// quadratic extrapolation of the three innermost samples.
    ///
    /// The dressed mode count below the Fermi energy is scanned across the
    /// band first; any occupation jump beyond the single pair at `±p_F` is
    /// refused.
    pub fn from_occupation(spec: &ReservoirSpec, grid_size: usize) -> Result<Self> {
        spec.validate()?;
        if grid_size < 8 {
            return Err(Error::InvalidModel(format!(
                "need at least 8 profile samples, got {grid_size}"
            )));
        }
        let p_f = model::fermi_momentum(spec)?;

        // Scan where the count of dressed modes below the Fermi energy
        // changes. Each dressed branch is monotone in p and confined to its
        // own gap of the reservoir ladder, so genuine occupation jumps are
        // exactly these count changes; no value threshold is involved.
        let scan = 512;
        let mut counts = Vec::with_capacity(scan);
        for t in 0..scan {
            let p = (t as f64 + 0.5) * PI / scan as f64;
            let sol = model::dispersion_roots(spec, p)?;
            counts.push(sol.roots.iter().filter(|&&r| r < spec.fermi_energy).count());
        }
        let cells = jump_cells(&counts);
        if cells.len() > 1 {
            let locs: Vec<String> = cells
                .iter()
                .map(|&t| format!("{:.4}", (t as f64 + 1.0) * PI / scan as f64))
                .collect();
            return Err(Error::MultipleJumps(format!(
                "occupation jumps near p = {}",
                locs.join(", ")
            )));
        }
        if cells.is_empty() {
            return Err(Error::MultipleJumps(
                "occupation has no jump on (0, pi)".into(),
            ));
        }
        let p_cell = (cells[0] as f64 + 1.0) * PI / scan as f64;
        if (p_cell - p_f).abs() > 2.0 * PI / scan as f64 {
            return Err(Error::MultipleJumps(format!(
                "occupation jump near p = {p_cell:.4} does not match the Fermi momentum {p_f:.4}"
            )));
        }

        let s = grid_size;
        let h = p_f / (s - 1) as f64;
        let mut samples = Vec::with_capacity(s);
        for t in 0..s - 1 {
            samples.push(2.0 * model::occupation(spec, t as f64 * h)? - 1.0);
        }
        // One-sided extrapolation to the jump from p_F - h, p_F - 2h,
        // p_F - 3h; exact for quadratic profiles.
        let f1 = samples[s - 2];
        let f2 = samples[s - 3];
        let f3 = samples[s - 4];
        let f_i = 3.0 * f1 - 3.0 * f2 + f3;
        samples.push(f_i.clamp(-1.0, 1.0));
        Self::from_samples(p_f, samples)
    }

    /// Replaces the size of the remainder transform (default `2^12`).
    pub fn with_dft_size(mut self, size: usize) -> Result<Self> {
        if size < 64 || size % 2 != 0 {
            return Err(Error::Config(format!(
                "transform size must be even and at least 64, got {size}"
            )));
        }
        self.dft_size = size;
        Ok(self)
    }

    pub fn fermi_momentum(&self) -> f64 {
        self.fermi_momentum
    }

    /// `(f_i, f_o)`: inside / outside limits at the jump.
    pub fn jump_values(&self) -> (f64, f64) {
        self.jump_values
    }

    pub fn representation(&self) -> &Representation {
        &self.representation
    }

    pub fn dft_size(&self) -> usize {
        self.dft_size
    }

    /// Pointwise value `f(e^{ip})`; even and `2 pi` periodic in `p`.
    pub fn evaluate(&self, p: f64) -> f64 {
        let q = fold_momentum(p);
        match &self.representation {
            Representation::Constant { value } => *value,
            Representation::Step => {
                if q < self.fermi_momentum {
                    self.jump_values.0
                } else {
                    self.jump_values.1
                }
            }
            Representation::Sampled { samples } => {
                if q >= self.fermi_momentum {
                    self.jump_values.1
                } else {
                    Pchip::on_uniform(samples, self.fermi_momentum).eval(q)
                }
            }
        }
    }

    /// Fourier coefficient `f_j = (1/2pi) \oint f(e^{i t}) e^{-i j t} dt`,
    /// real and even in `j`. The ideal-step part is closed form; the smooth
    /// remainder of a sampled profile goes through a uniform transform of
    /// size [`Self::dft_size`], which resolves lags up to half its size.
    pub fn fourier_coeff(&self, j: i64) -> Result<f64> {
        let ja = j.unsigned_abs() as usize;
        match &self.representation {
            Representation::Constant { value } => Ok(if j == 0 { *value } else { 0.0 }),
            Representation::Step => Ok(self.step_coeff(ja)),
            Representation::Sampled { samples } => {
                let max = (self.dft_size / 2) as i64;
                if ja as i64 > max {
                    return Err(Error::LagOutOfRange { lag: j, max });
                }
                Ok(self.step_coeff(ja) + self.remainder_coeff(samples, ja))
            }
        }
    }

    fn step_coeff(&self, ja: usize) -> f64 {
        let (f_i, f_o) = self.jump_values;
        let p_f = self.fermi_momentum;
        if ja == 0 {
            f_o + (f_i - f_o) * p_f / PI
        } else {
            let jf = ja as f64;
            (f_i - f_o) * (jf * p_f).sin() / (PI * jf)
        }
    }

    /// Transform of the remainder `g = f - step`, supported on
    /// `(-p_F, p_F)` and continuous at the jump by construction.
    fn remainder_coeff(&self, samples: &[f64], ja: usize) -> f64 {
        let m = self.dft_size;
        let interp = Pchip::on_uniform(samples, self.fermi_momentum);
        let f_i = self.jump_values.0;
        let mut acc = interp.eval(0.0) - f_i; // t = 0 term
        let step = 2.0 * PI / m as f64;
        let jf = ja as f64;
        let mut t = 1;
        loop {
            let theta = t as f64 * step;
            if theta >= self.fermi_momentum {
                break;
            }
            // g is even, so grid points theta and 2 pi - theta contribute
            // equally; g vanishes outside the sea.
            acc += 2.0 * (interp.eval(theta) - f_i) * (jf * theta).cos();
            t += 1;
        }
        acc / m as f64
    }

    /// Inverse of the inside profile: the momentum `theta in (0, p_F)` with
    /// `f(theta) = value`. Requires a strictly monotone sampled profile.
    pub fn theta_of(&self, value: f64) -> Result<f64> {
        let samples = match &self.representation {
            Representation::Sampled { samples } => samples,
            _ => {
                return Err(Error::NoSolution(
                    "symbol has no smooth inside profile to invert".into(),
                ))
            }
        };
        let increasing = samples.windows(2).all(|w| w[1] > w[0]);
        let decreasing = samples.windows(2).all(|w| w[1] < w[0]);
        if !increasing && !decreasing {
            return Err(Error::NoSolution(
                "inside profile is not strictly monotone on (0, p_F)".into(),
            ));
        }
        let (lo, hi) = if increasing {
            (samples[0], *samples.last().expect("nonempty"))
        } else {
            (*samples.last().expect("nonempty"), samples[0])
        };
        if !(value >= lo && value <= hi) {
            return Err(Error::NoSolution(format!(
                "value {value} outside the profile range [{lo}, {hi}]"
            )));
        }
        let interp = Pchip::on_uniform(samples, self.fermi_momentum);
        // Bisection on the interpolant; monotone by the slope limiter.
        let (mut a, mut b) = (0.0, self.fermi_momentum);
        for _ in 0..90 {
            let mid = 0.5 * (a + b);
            let fm = interp.eval(mid);
            if (fm < value) == increasing {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// Wraps `p` into `[0, pi]` using periodicity and evenness.
fn fold_momentum(p: f64) -> f64 {
    let q = p.rem_euclid(2.0 * PI);
    if q > PI {
        2.0 * PI - q
    } else {
        q
    }
}

/// Cells where an integer sequence changes value.
fn jump_cells(counts: &[usize]) -> Vec<usize> {
    counts
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(t, _)| t)
        .collect()
}

/// Shape-preserving cubic interpolant on a uniform grid over `[0, span]`
/// (Fritsch-Carlson slope limiting, second-order one-sided end slopes).
pub(crate) struct Pchip {
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Pchip {
    pub(crate) fn on_uniform(y: &[f64], span: f64) -> Self {
        let s = y.len();
        assert!(s >= 3, "interpolation needs at least 3 nodes");
        let h = span / (s - 1) as f64;
        let d: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut m = vec![0.0; s];
        m[0] = 1.5 * d[0] - 0.5 * d[1];
        m[s - 1] = 1.5 * d[s - 2] - 0.5 * d[s - 3];
        if m[0] * d[0] <= 0.0 {
            m[0] = 0.0;
        }
        if m[s - 1] * d[s - 2] <= 0.0 {
            m[s - 1] = 0.0;
        }
        for t in 1..s - 1 {
            m[t] = if d[t - 1] * d[t] <= 0.0 {
                0.0
            } else {
                0.5 * (d[t - 1] + d[t])
            };
        }
        for t in 0..s - 1 {
            if d[t] == 0.0 {
                m[t] = 0.0;
                m[t + 1] = 0.0;
                continue;
            }
            let a = m[t] / d[t];
            let b = m[t + 1] / d[t];
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                m[t] = tau * a * d[t];
                m[t + 1] = tau * b * d[t];
            }
        }
        Self { h, y: y.to_vec(), m }
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        let s = self.y.len();
        let t = ((x / self.h).floor() as usize).min(s - 2);
        let u = (x - t as f64 * self.h) / self.h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.y[t]
            + self.h * h10 * self.m[t]
            + h01 * self.y[t + 1]
            + self.h * h11 * self.m[t + 1]
    }
}
