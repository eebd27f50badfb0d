//! Gaussian mixtures with analytic gradient and Hessian, reproducible
//! sampling, and mode finding.
//!
//! Sampling uses ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`) for the
//! uniform stream and `rand_distr::StandardNormal` (ziggurat) for normal
//! variates. Each draw consumes one uniform to pick the component, then `d`
//! normals that are mapped through the Cholesky factor of its covariance.
//! Changing any of this changes every fixture sample.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::geometry::PointSet;

/// JSON form of a mixture: `{d, weights[], means[][], covariances[][][]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub d: usize,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug)]
struct Component {
    mean: Vec<f64>,
    // Row-major inverse covariance.
    precision: Vec<f64>,
    // Row-major lower Cholesky factor of the covariance.
    chol: Vec<f64>,
    // w * (2 pi)^{-d/2} * det^{-1/2}
    coef: f64,
}

/// Finite mixture of multivariate normals. Immutable after construction.
#[derive(Clone, Debug)]
pub struct GaussianMixture {
    spec: MixtureSpec,
    comps: Vec<Component>,
}

const FIXTURES: &[(&str, &str)] = &[
    (
        "bimodal-close",
        include_str!("../fixtures/bimodal-close.json"),
    ),
    (
        "bimodal-separated",
        include_str!("../fixtures/bimodal-separated.json"),
    ),
    ("trimodal", include_str!("../fixtures/trimodal.json")),
    ("quadrimodal", include_str!("../fixtures/quadrimodal.json")),
];

impl GaussianMixture {
    pub fn new(spec: MixtureSpec) -> Result<Self> {
        let d = spec.d;
        let k = spec.weights.len();
        if d == 0 || k == 0 {
            return input_err("mixture needs d >= 1 and at least one component");
        }
        if spec.means.len() != k || spec.covariances.len() != k {
            return input_err(format!(
                "{k} weights but {} means and {} covariances",
                spec.means.len(),
                spec.covariances.len()
            ));
        }
        if spec.weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return input_err("mixture weights must be positive");
        }
        let total: f64 = spec.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return input_err(format!("mixture weights sum to {total}, not 1"));
        }
        let mut comps = Vec::with_capacity(k);
        for (c, ((w, mean), cov)) in spec
            .weights
            .iter()
            .zip(&spec.means)
            .zip(&spec.covariances)
            .enumerate()
        {
            if mean.len() != d || mean.iter().any(|m| !m.is_finite()) {
                return input_err(format!("component {c}: mean must have {d} finite entries"));
            }
            if cov.len() != d || cov.iter().any(|row| row.len() != d) {
                return input_err(format!("component {c}: covariance must be {d}x{d}"));
            }
            let sigma = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
            let asym = (&sigma - sigma.transpose()).amax();
            if asym > 1e-12 * sigma.amax().max(1.0) || !sigma.iter().all(|v| v.is_finite()) {
                return input_err(format!("component {c}: covariance is not symmetric"));
            }
            let eig = SymmetricEigen::new(sigma.clone());
            if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
                return input_err(format!(
                    "component {c}: covariance is not positive definite"
                ));
            }
            let chol = sigma
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Input(format!("component {c}: Cholesky failed")))?;
            let precision = chol.inverse();
            let det: f64 = eig.eigenvalues.iter().product();
            let coef = w * (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0) / det.sqrt();
            let l = chol.l();
            comps.push(Component {
                mean: mean.clone(),
                precision: (0..d * d)
                    .map(|idx| precision[(idx / d, idx % d)])
                    .collect(),
                chol: (0..d * d).map(|idx| l[(idx / d, idx % d)]).collect(),
                coef,
            });
        }
        Ok(Self { spec, comps })
    }

    /// One of the bundled fixtures, by name.
    pub fn fixture(name: &str) -> Result<Self> {
        let (_, text) = FIXTURES.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            Error::Input(format!(
                "unknown mixture fixture {name:?}; known: {}",
                Self::fixture_names().join(", ")
            ))
        })?;
        Self::from_json(text)
    }

    pub fn fixture_names() -> Vec<&'static str> {
        FIXTURES.iter().map(|(n, _)| *n).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn spec(&self) -> &MixtureSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.d
    }

    pub fn components(&self) -> usize {
        self.comps.len()
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.spec.means
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Mahalanobis quadratic form `(x-mu)' P (x-mu)` and the component value.
    #[inline]
    fn comp_value(c: &Component, x: &[f64], d: usize) -> f64 {
        let mut quad = 0.0;
        for i in 0..d {
            let di = x[i] - c.mean[i];
            let mut ui = 0.0;
            for j in 0..d {
                ui += c.precision[i * d + j] * (x[j] - c.mean[j]);
            }
            quad += di * ui;
        }
        c.coef * (-0.5 * quad).exp()
    }

    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.pdf_unchecked(x))
    }

    pub(crate) fn pdf_unchecked(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        self.comps.iter().map(|c| Self::comp_value(c, x, d)).sum()
    }

    /// Density and gradient in one pass; `grad` must have length `d`.
    pub(crate) fn pdf_grad_into(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.dim();
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut f = 0.0;
        for c in &self.comps {
            let e = Self::comp_value(c, x, d);
            f += e;
            for i in 0..d {
                let mut ui = 0.0;
                for j in 0..d {
                    ui += c.precision[i * d + j] * (x[j] - c.mean[j]);
                }
                grad[i] -= e * ui;
            }
        }
        f
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut g = vec![0.0; self.dim()];
        self.pdf_grad_into(x, &mut g);
        Ok(g)
    }

    /// `sum_k w_k N_k(x) (u u' - P_k)` with `u = P_k (x - mu_k)`.
    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        Ok(self.hessian_unchecked(x))
    }

    fn hessian_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        let mut u = vec![0.0; d];
        for c in &self.comps {
            let e = Self::comp_value(c, x, d);
            for i in 0..d {
                u[i] = (0..d)
                    .map(|j| c.precision[i * d + j] * (x[j] - c.mean[j]))
                    .sum();
            }
            for i in 0..d {
                for j in 0..d {
                    h[(i, j)] += e * (u[i] * u[j] - c.precision[i * d + j]);
                }
            }
        }
        h
    }

    /// `n` iid draws seeded by `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<PointSet> {
        Ok(self.sample_labeled(n, seed)?.0)
    }

    /// Like [`sample`](Self::sample), also returning the component of each draw.
    pub fn sample_labeled(&self, n: usize, seed: u64) -> Result<(PointSet, Vec<usize>)> {
        if n == 0 {
            return input_err("sample size must be at least 1");
        }
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cumulative = Vec::with_capacity(self.comps.len());
        let mut acc = 0.0;
        for w in &self.spec.weights {
            acc += w;
            cumulative.push(acc);
        }
        let mut coords = Vec::with_capacity(n * d);
        let mut labels = Vec::with_capacity(n);
        let mut z = vec![0.0; d];
        for _ in 0..n {
            let u: f64 = rng.random();
            let k = cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(self.comps.len() - 1);
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            let c = &self.comps[k];
            for i in 0..d {
                let lz: f64 = (0..=i).map(|j| c.chol[i * d + j] * z[j]).sum();
                coords.push(c.mean[i] + lz);
            }
            labels.push(k);
        }
        Ok((PointSet::new(d, coords)?, labels))
    }

    /// Axis-aligned box covering every component mean +- `sigmas` marginal
    /// standard deviations.
    pub fn bounding_box(&self, sigmas: f64) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for (mean, cov) in self.spec.means.iter().zip(&self.spec.covariances) {
            for i in 0..d {
                let s = sigmas * cov[i][i].sqrt();
                lo[i] = lo[i].min(mean[i] - s);
                hi[i] = hi[i].max(mean[i] + s);
            }
        }
        (lo, hi)
    }

    /// Smallest marginal standard deviation over components; a natural length
    /// scale for step sizes.
    pub(crate) fn min_scale(&self) -> f64 {
        self.spec
            .covariances
            .iter()
            .flat_map(|cov| (0..self.dim()).map(move |i| cov[i][i].sqrt()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Local maxima of the density, found by damped Newton ascent from every
    /// component mean plus a coarse grid of auxiliary starts.
    pub fn find_modes(&self, opts: &ModeOptions) -> Result<ModeSet> {
        let d = self.dim();
        let mut starts: Vec<Vec<f64>> = self.spec.means.clone();
        if d <= opts.max_grid_dim && opts.grid_per_axis > 0 {
            let (lo, hi) = self.bounding_box(opts.box_sigmas);
            let g = opts.grid_per_axis;
            let total = g.pow(d as u32);
            for idx in 0..total {
                let mut rem = idx;
                let p = (0..d)
                    .map(|i| {
                        let t = rem % g;
                        rem /= g;
                        lo[i] + (t as f64 + 0.5) / g as f64 * (hi[i] - lo[i])
                    })
                    .collect();
                starts.push(p);
            }
        }

        let mut modes: Vec<Vec<f64>> = Vec::new();
        for start in starts {
            let Some(m) = self.ascend(start, opts)? else {
                continue;
            };
            match modes
                .iter()
                .position(|q| self.same_peak(q, &m, opts.dedup_tol))
            {
                Some(k) => {
                    if self.pdf_unchecked(&m) > self.pdf_unchecked(&modes[k]) {
                        modes[k] = m;
                    }
                }
                None => modes.push(m),
            }
        }
        modes.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = modes.iter().map(|m| self.pdf_unchecked(m)).collect();
        Ok(ModeSet { modes, values })
    }

    /// Two converged candidates are one mode when they are within `tol`, or
    /// close and joined by a segment with no density dip (flat-topped peaks
    /// stop the ascent short of the exact maximum).
    fn same_peak(&self, a: &[f64], b: &[f64], tol: f64) -> bool {
        let dist = crate::geometry::dist2(a, b).sqrt();
        if dist <= tol {
            return true;
        }
        if dist > 0.1 * self.min_scale() {
            return false;
        }
        let floor = self.pdf_unchecked(a).min(self.pdf_unchecked(b)) * (1.0 - 1e-9);
        (1..16).all(|k| {
            let t = k as f64 / 16.0;
            let x: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect();
            self.pdf_unchecked(&x) >= floor
        })
    }

    /// Ascends from `x` to a local maximum. `None` when the start lies where the
    /// density underflows to zero.
    fn ascend(&self, mut x: Vec<f64>, opts: &ModeOptions) -> Result<Option<Vec<f64>>> {
        let d = self.dim();
        let step = 0.1 * self.min_scale();
        let mut g = vec![0.0; d];
        let mut escapes = 0;
        for _ in 0..opts.max_iter {
            let f = self.pdf_grad_into(&x, &mut g);
            if f <= 0.0 {
                return Ok(None);
            }
            let gnorm = norm(&g);
            let h = self.hessian_unchecked(&x);
            if gnorm <= opts.grad_tol * f {
                let eig = SymmetricEigen::new(h);
                let (top, top_val) = eig.eigenvalues.iter().enumerate().fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
                );
                if top_val < -opts.hessian_tol * f {
                    return Ok(Some(x));
                }
                if top_val > opts.hessian_tol * f && escapes < 8 {
                    // Saddle or minimum: leave along the direction of positive curvature.
                    escapes += 1;
                    let v = eig.eigenvectors.column(top);
                    let plus: Vec<f64> = (0..d).map(|i| x[i] + step * v[i]).collect();
                    let minus: Vec<f64> = (0..d).map(|i| x[i] - step * v[i]).collect();
                    x = if self.pdf_unchecked(&plus) >= self.pdf_unchecked(&minus) {
                        plus
                    } else {
                        minus
                    };
                    continue;
                }
                return Err(Error::Degenerate(format!(
                    "critical point {x:?} has Hessian eigenvalue {top_val:e} (density {f:e})"
                )));
            }
            let gv = DVector::from_column_slice(&g);
            let newton = (-h).cholesky().map(|c| c.solve(&gv));
            let dir: Vec<f64> = match newton {
                Some(p) => p.iter().copied().collect(),
                None => g.iter().map(|gi| gi / gnorm * step).collect(),
            };
            let dir_norm = norm(&dir);
            let mut t = 1.0;
            loop {
                let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
                if self.pdf_unchecked(&y) >= f || t * dir_norm < 1e-9 * step {
                    x = y;
                    break;
                }
                t *= 0.5;
            }
        }
        Err(Error::Degenerate(format!(
            "mode ascent did not converge within {} iterations",
            opts.max_iter
        )))
    }
}

/// Euclidean norm, scaled so that tiny tail gradients do not underflow.
pub(crate) fn norm(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

/// Tolerances for [`GaussianMixture::find_modes`].
#[derive(Clone, Debug)]
pub struct ModeOptions {
    /// Convergence when `||grad f|| <= grad_tol * f`.
    pub grad_tol: f64,
    /// A converged point is a mode when its largest Hessian eigenvalue is
    /// below `-hessian_tol * f`; within `+-hessian_tol * f` it is degenerate.
    pub hessian_tol: f64,
    /// Candidates closer than this are the same mode.
    pub dedup_tol: f64,
    pub grid_per_axis: usize,
    /// The auxiliary grid is skipped above this dimension.
    pub max_grid_dim: usize,
    pub box_sigmas: f64,
    pub max_iter: usize,
}

impl Default for ModeOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            hessian_tol: 1e-6,
            dedup_tol: 1e-4,
            grid_per_axis: 16,
            max_grid_dim: 3,
            box_sigmas: 3.0,
            max_iter: 1000,
        }
    }
}

/// Detected local maxima with their density values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub modes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Index and distance of the mode nearest to `x`.
    pub fn nearest(&self, x: &[f64]) -> Option<(usize, f64)> {
        self.modes
            .iter()
            .map(|m| crate::geometry::dist2(m, x))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, d2)| (i, d2.sqrt()))
    }
}
