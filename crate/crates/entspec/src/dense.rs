//! Dense linear algebra shared by the exact route.
//!
//! Matrices here are small (a few hundred rows at the very most), so the
//! implementations favor determinism and clarity over blocking. Three
//! factorizations are provided: partially pivoted LU for determinants and
//! solves, unpivoted elimination for leading-principal-minor ladders, and
//! eigenvalue-only reductions (Householder tridiagonal + implicit QL for the
//! real symmetric case, Hessenberg + shifted QR for the general complex
//! case).

use num_complex::Complex64 as C;

use crate::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Clone, Debug)]
pub(crate) struct Mat {
    n: usize,
    a: Vec<C>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat { n, a: vec![C::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eye(n: usize) -> Self {
        Mat::from_fn(n, |i, j| if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) })
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        debug_assert_eq!(self.n, rhs.n);
        let n = self.n;
        Mat::from_fn(n, |i, j| (0..n).map(|p| self[(i, p)] * rhs[(p, j)]).sum())
    }

    /// Inverse via pivoted LU, one solve per column.
    pub fn inverse(&self) -> Result<Mat> {
        let n = self.n;
        let lu = lu_factor(self);
        if lu.det().norm() == 0.0 {
            return Err(Error::SingularMinor { index: n });
        }
        let mut out = Mat::zeros(n);
        for j in 0..n {
            let mut e = vec![C::new(0.0, 0.0); n];
            e[j] = C::new(1.0, 0.0);
            let col = lu.solve(&e);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    /// Largest entry modulus, the norm used by the matching diagnostics.
    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        debug_assert_eq!(self.n, rhs.n);
        Mat::from_fn(self.n, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        debug_assert_eq!(self.n, rhs.n);
        Mat::from_fn(self.n, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn scale(&self, s: C) -> Mat {
        Mat::from_fn(self.n, |i, j| s * self[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.a[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.a[i * self.n + j]
    }
}

/// LU factorization with partial pivoting. The determinant is exact up to
/// roundoff even for singular input; `solve` is only meaningful when the
/// matrix is nonsingular.
pub(crate) struct Lu {
    n: usize,
    lu: Vec<C>,
    piv: Vec<usize>,
    det: C,
}

pub(crate) fn lu_factor(m: &Mat) -> Lu {
    let n = m.n;
    let mut lu = m.a.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut det = C::new(1.0, 0.0);
    for p in 0..n {
        let mut best = p;
        let mut best_norm = lu[p * n + p].norm_sqr();
        for r in (p + 1)..n {
            let v = lu[r * n + p].norm_sqr();
            if v > best_norm {
                best = r;
                best_norm = v;
            }
        }
        if best != p {
            for c in 0..n {
                lu.swap(p * n + c, best * n + c);
            }
            piv.swap(p, best);
            det = -det;
        }
        let pivot = lu[p * n + p];
        det *= pivot;
        if pivot.norm_sqr() == 0.0 {
            continue;
        }
        for r in (p + 1)..n {
            let factor = lu[r * n + p] / pivot;
            lu[r * n + p] = factor;
            for c in (p + 1)..n {
                let sub = factor * lu[p * n + c];
                lu[r * n + c] -= sub;
            }
        }
    }
    Lu { n, lu, piv, det }
}

impl Lu {
    pub fn det(&self) -> C {
        self.det
    }

    /// Solves `A x = b` for one right-hand side.
    pub fn solve(&self, b: &[C]) -> Vec<C> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x: Vec<C> = self.piv.iter().map(|&p| b[p]).collect();
        for r in 1..n {
            for c in 0..r {
                let sub = self.lu[r * n + c] * x[c];
                x[r] -= sub;
            }
        }
        for r in (0..n).rev() {
            for c in (r + 1)..n {
                let sub = self.lu[r * n + c] * x[c];
                x[r] -= sub;
            }
            x[r] /= self.lu[r * n + r];
        }
        x
    }
}

/// Unpivoted Gaussian elimination returning the pivot at every step. Pivot
/// `i` (1-based entry `i-1` of the result) equals the ratio of the leading
/// principal minors of orders `i` and `i-1`.
///
/// The error threshold is deliberately tiny: an intermediate minor crossing
/// it means the ladder genuinely degenerates at that order and a NaN would
/// otherwise propagate silently.
pub(crate) fn leading_minor_ratios(m: &Mat) -> Result<Vec<C>> {
    let n = m.n;
    let mut a = m.a.clone();
    let mut etas = Vec::with_capacity(n);
    for p in 0..n {
        let pivot = a[p * n + p];
        if pivot.norm() < 1e-150 {
            return Err(Error::SingularMinor { index: p + 1 });
        }
        etas.push(pivot);
        for r in (p + 1)..n {
            let factor = a[r * n + p] / pivot;
            for c in p..n {
                let sub = factor * a[p * n + c];
                a[r * n + c] -= sub;
            }
        }
    }
    Ok(etas)
}

/// Eigenvalues of a real symmetric matrix (row major, full storage),
/// ascending. Householder reduction to tridiagonal form followed by the
/// implicit-shift QL sweep, eigenvalues only.
pub(crate) fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = a.to_vec();
    let (d, e) = householder_tridiag(&mut m, n);
    ql_eigenvalues(d, e)
}

fn householder_tridiag(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += a[i * n + k].abs();
            }
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f_acc += e[j] * a[i * n + j];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
    }
    let d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    (d, e)
}

fn ql_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenDiverged { size: n });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            if g < 0.0 {
                r = -r;
            }
            g = d[m] - d[l] + e[l] / (g + r);
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                f = (d[i] - g) * s + 2.0 * c * b;
                p = s * f;
                d[i + 1] = g + p;
                g = c * f - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues of a general complex matrix: unitary Householder reduction to
/// upper Hessenberg form, then explicit single-shift QR with Wilkinson
/// shifts. Eigenvalues are returned sorted by real part, then imaginary
/// part.
pub(crate) fn complex_eigenvalues(m: &Mat) -> Result<Vec<C>> {
    let n = m.n;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = m.clone();
    hessenberg(&mut h);
    let mut eig = hessenberg_qr(&mut h)?;
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}

fn unit_phase(z: C) -> C {
    let r = z.norm();
    if r == 0.0 {
        C::new(1.0, 0.0)
    } else {
        z / r
    }
}

fn hessenberg(h: &mut Mat) {
    let n = h.n();
    if n < 3 {
        return;
    }
    for k in 0..(n - 2) {
        let norm2: f64 = ((k + 1)..n).map(|r| h[(r, k)].norm_sqr()).sum();
        if norm2 == 0.0 {
            continue;
        }
        let alpha = -unit_phase(h[(k + 1, k)]) * norm2.sqrt();
        let mut v: Vec<C> = ((k + 1)..n).map(|r| h[(r, k)]).collect();
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vn2;
        for c in k..n {
            let s: C = v
                .iter()
                .enumerate()
                .map(|(j, vj)| vj.conj() * h[(k + 1 + j, c)])
                .sum();
            let bs = beta * s;
            for (j, vj) in v.iter().enumerate() {
                let sub = bs * vj;
                h[(k + 1 + j, c)] -= sub;
            }
        }
        for r in 0..n {
            let s: C = v
                .iter()
                .enumerate()
                .map(|(j, vj)| h[(r, k + 1 + j)] * vj)
                .sum();
            let bs = beta * s;
            for (j, vj) in v.iter().enumerate() {
                let sub = bs * vj.conj();
                h[(r, k + 1 + j)] -= sub;
            }
        }
        h[(k + 1, k)] = alpha;
        for r in (k + 2)..n {
            h[(r, k)] = C::new(0.0, 0.0);
        }
    }
}

fn wilkinson_shift(a: C, b: C, c: C, d: C) -> C {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let mu1 = tr_half + disc;
    let mu2 = tr_half - disc;
    if (mu1 - d).norm_sqr() <= (mu2 - d).norm_sqr() {
        mu1
    } else {
        mu2
    }
}

fn hessenberg_qr(h: &mut Mat) -> Result<Vec<C>> {
    let n = h.n();
    let mut eig = Vec::with_capacity(n);
    let mut hi = n;
    let mut stuck = 0usize;
    let mut budget = 80 * n.max(1);
    while hi > 0 {
        if hi == 1 {
            eig.push(h[(0, 0)]);
            hi = 0;
            continue;
        }
        // Deflate a converged trailing eigenvalue if possible.
        let sub = h[(hi - 1, hi - 2)].norm();
        let diag = h[(hi - 1, hi - 1)].norm() + h[(hi - 2, hi - 2)].norm();
        if sub <= f64::EPSILON * diag.max(1e-300) {
            eig.push(h[(hi - 1, hi - 1)]);
            hi -= 1;
            stuck = 0;
            continue;
        }
        if budget == 0 {
            return Err(Error::EigenDiverged { size: n });
        }
        budget -= 1;
        // Active block lo..hi: walk up until a negligible subdiagonal.
        let mut lo = hi - 1;
        while lo > 0 {
            let s = h[(lo, lo - 1)].norm();
            let d = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if s <= f64::EPSILON * d.max(1e-300) {
                h[(lo, lo - 1)] = C::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        stuck += 1;
        let mu = if stuck % 12 == 0 {
            // Exceptional shift to break slow-convergence cycles.
            h[(hi - 1, hi - 1)] + C::new(0.75, 0.0) * h[(hi - 1, hi - 2)].norm()
        } else {
            wilkinson_shift(
                h[(hi - 2, hi - 2)],
                h[(hi - 2, hi - 1)],
                h[(hi - 1, hi - 2)],
                h[(hi - 1, hi - 1)],
            )
        };
        for i in lo..hi {
            h[(i, i)] -= mu;
        }
        // QR step with Givens rotations on the shifted Hessenberg block.
        let mut rot = Vec::with_capacity(hi - lo - 1);
        for i in lo..(hi - 1) {
            let a = h[(i, i)];
            let b = h[(i + 1, i)];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (C::new(1.0, 0.0), C::new(0.0, 0.0))
            } else {
                (a / r, b / r)
            };
            for j in i..hi {
                let x = h[(i, j)];
                let y = h[(i + 1, j)];
                h[(i, j)] = c.conj() * x + s.conj() * y;
                h[(i + 1, j)] = -s * x + c * y;
            }
            rot.push((c, s));
        }
        for (idx, (c, s)) in rot.iter().enumerate() {
            let i = lo + idx;
            let rmax = (i + 2).min(hi);
            for r in lo..rmax {
                let x = h[(r, i)];
                let y = h[(r, i + 1)];
                h[(r, i)] = c * x + s * y;
                h[(r, i + 1)] = -s.conj() * x + c.conj() * y;
            }
        }
        for i in lo..hi {
            h[(i, i)] += mu;
        }
    }
    Ok(eig)
}
