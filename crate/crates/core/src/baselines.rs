//! Continuous-side reference machinery: the flat-kernel density estimate,
//! medoid Max Shift over data points, Max Shift on a known density, and
//! basin-of-attraction assignment by integrating the gradient ascent flow.

use crate::algorithm::{Clustering, Path};
use crate::density::{norm, GaussianMixture, ModeSet};
use crate::error::{input_err, Error, Result};
use crate::geometry::PointSet;
use crate::par;

/// Volume of the unit ball in `R^d`, `pi^{d/2} / Gamma(d/2 + 1)`, via the
/// recurrence `v_d = 2 pi / d * v_{d-2}` from `v_0 = 1`, `v_1 = 2`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// Flat-kernel density estimate at a point: the closed-ball count and the
/// normalized value `count / (v_d n eps^d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatKernelEstimate {
    pub count: usize,
    pub value: f64,
}

pub fn flat_kde(ps: &PointSet, eps: f64, x: &[f64]) -> Result<FlatKernelEstimate> {
    if x.len() != ps.dim() {
        return Err(Error::Dimension {
            expected: ps.dim(),
            got: x.len(),
        });
    }
    if !(eps > 0.0) {
        return input_err(format!("bandwidth must be positive, got {eps}"));
    }
    let eps2 = eps * eps;
    let count = ps.iter().filter(|y| sq_dist(x, y) <= eps2).count();
    Ok(FlatKernelEstimate {
        count,
        value: count as f64 / flat_kde_scale(ps.dim(), ps.len(), eps),
    })
}

/// `v_d n eps^d`, the factor turning ball counts into density values.
pub fn flat_kde_scale(d: usize, n: usize, eps: f64) -> f64 {
    unit_ball_volume(d) * n as f64 * eps.powi(d as i32)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += (x - y) * (x - y);
    }
    s
}

/// Medoid Max Shift with the flat kernel: moves between data points only,
/// to the point of highest estimated density within the search radius.
///
/// Counts are computed by brute force over all pairs, with no spatial index,
/// so this serves as an independent check on graph-based climbing.
pub struct MedoidMaxShift<'a> {
    ps: &'a PointSet,
    radius2: f64,
    counts: Vec<usize>,
}

impl<'a> MedoidMaxShift<'a> {
    pub fn new(ps: &'a PointSet, bandwidth: f64, radius: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && radius > 0.0) {
            return input_err("bandwidth and radius must be positive");
        }
        let b2 = bandwidth * bandwidth;
        let counts = par::map_range(ps.len(), |i| {
            let yi = ps.point(i);
            ps.iter().filter(|y| sq_dist(yi, y) <= b2).count()
        });
        Ok(Self {
            ps,
            radius2: radius * radius,
            counts,
        })
    }

    /// Ball counts at every data point (the unnormalized estimate).
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    fn step(&self, k: usize) -> usize {
        let yk = self.ps.point(k);
        let mut best = k;
        for (j, y) in self.ps.iter().enumerate() {
            if sq_dist(yk, y) <= self.radius2 && (self.counts[j], j) > (self.counts[best], best) {
                best = j;
            }
        }
        best
    }

    pub fn path(&self, start: usize) -> Result<Path> {
        if start >= self.ps.len() {
            return input_err(format!("start index {start} outside 0..{}", self.ps.len()));
        }
        let mut nodes = vec![start];
        let mut cur = start;
        loop {
            let next = self.step(cur);
            if next == cur {
                return Ok(Path::from_nodes(nodes));
            }
            nodes.push(next);
            cur = next;
        }
    }
}

/// Medoid Max Shift path with bandwidth and search radius both `eps`.
pub fn medoid_max_shift(ps: &PointSet, eps: f64, start: usize) -> Result<Path> {
    MedoidMaxShift::new(ps, eps, eps)?.path(start)
}

/// How the ball argmax in [`max_shift_density`] is approximated.
#[derive(Clone, Debug, PartialEq)]
pub enum BallSampling {
    /// Center plus `radii x angles` polar grid; `d = 2` only.
    Polar { radii: usize, angles: usize },
    /// Center plus `count` Halton points inside the ball; any dimension.
    QuasiRandom { count: usize },
}

#[derive(Clone, Debug)]
pub struct DensityShiftOptions {
    pub sampling: BallSampling,
    /// Stop when the best sample improves the density by no more than this.
    pub stop_tol: f64,
    pub max_steps: usize,
}

impl Default for DensityShiftOptions {
    fn default() -> Self {
        Self {
            sampling: BallSampling::Polar {
                radii: 8,
                angles: 64,
            },
            stop_tol: 1e-12,
            max_steps: 10_000,
        }
    }
}

/// Offsets (relative to the ball center) used to approximate the argmax.
fn ball_offsets(d: usize, r: f64, sampling: &BallSampling) -> Result<Vec<Vec<f64>>> {
    match *sampling {
        BallSampling::Polar { radii, angles } => {
            if d != 2 {
                return Err(Error::UnsupportedDimension(d));
            }
            let mut out = Vec::with_capacity(radii * angles);
            for i in 1..=radii {
                let rho = r * i as f64 / radii as f64;
                for a in 0..angles {
                    let theta = 2.0 * std::f64::consts::PI * a as f64 / angles as f64;
                    out.push(vec![rho * theta.cos(), rho * theta.sin()]);
                }
            }
            Ok(out)
        }
        BallSampling::QuasiRandom { count } => {
            const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
            if d > PRIMES.len() {
                return Err(Error::UnsupportedDimension(d));
            }
            let mut out = Vec::with_capacity(count);
            let mut idx = 1u64;
            while out.len() < count {
                let p: Vec<f64> = PRIMES[..d]
                    .iter()
                    .map(|&b| 2.0 * radical_inverse(idx, b) - 1.0)
                    .collect();
                idx += 1;
                if norm(&p) <= 1.0 {
                    out.push(p.into_iter().map(|c| c * r).collect());
                }
            }
            Ok(out)
        }
    }
}

/// Van der Corput radical inverse of `i` in base `b`.
pub(crate) fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    out
}

/// Max Shift on the true density: from `x0`, repeatedly jump to the sampled
/// point of the closed ball of radius `r` with the highest density.
pub fn max_shift_density(
    gm: &GaussianMixture,
    x0: &[f64],
    r: f64,
    opts: &DensityShiftOptions,
) -> Result<Vec<Vec<f64>>> {
    let d = gm.dim();
    if x0.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: x0.len(),
        });
    }
    if !(r > 0.0) {
        return input_err(format!("search radius must be positive, got {r}"));
    }
    let offsets = ball_offsets(d, r, &opts.sampling)?;
    let mut path = vec![x0.to_vec()];
    let mut cur = x0.to_vec();
    let mut f_cur = gm.pdf_unchecked(&cur);
    let mut cand = vec![0.0; d];
    for _ in 0..opts.max_steps {
        let mut best: Option<(f64, usize)> = None;
        for (k, off) in offsets.iter().enumerate() {
            for i in 0..d {
                cand[i] = cur[i] + off[i];
            }
            let f = gm.pdf_unchecked(&cand);
            if best.is_none_or(|(bf, _)| f > bf) {
                best = Some((f, k));
            }
        }
        let Some((f_best, k)) = best else { break };
        if f_best - f_cur <= opts.stop_tol {
            break;
        }
        cur = cur.iter().zip(&offsets[k]).map(|(c, o)| c + o).collect();
        f_cur = f_best;
        path.push(cur.clone());
    }
    Ok(path)
}

/// Integration settings for [`gradient_flow_assign`].
#[derive(Clone, Debug)]
pub struct FlowOptions {
    /// Target displacement per step as a fraction of the mixture's 3-sigma
    /// bounding-box diameter.
    pub step_fraction: f64,
    pub capture_radius: f64,
    /// The flow is considered stalled when `||grad f|| <= grad_tol * f`.
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            step_fraction: 0.01,
            capture_radius: 1e-3,
            grad_tol: 1e-8,
            max_iter: 100_000,
        }
    }
}

/// Where a flow line ended and which mode (if any) captured it.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowAssignment {
    pub mode: Option<usize>,
    pub terminal: Vec<f64>,
    pub steps: usize,
}

/// A recorded flow line: accepted points with their density values.
#[derive(Clone, Debug, Default)]
pub struct FlowTrace {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

fn box_diameter(gm: &GaussianMixture) -> f64 {
    let (lo, hi) = gm.bounding_box(3.0);
    lo.iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt()
}

fn captured(modes: &ModeSet, x: &[f64], radius: f64) -> Option<usize> {
    modes
        .nearest(x)
        .filter(|&(_, d)| d <= radius)
        .map(|(i, _)| i)
}

/// RK4 integration of `x' = grad f(x)` with displacement-capped steps. A step
/// that lowers `f` is retried at half the step; the next step may grow by 2x.
fn integrate(
    gm: &GaussianMixture,
    modes: &ModeSet,
    x0: &[f64],
    opts: &FlowOptions,
    mut trace: Option<&mut FlowTrace>,
) -> FlowAssignment {
    let d = gm.dim();
    let max_disp = opts.step_fraction * box_diameter(gm);
    let mut x = x0.to_vec();
    let mut g = vec![0.0; d];
    let mut f = gm.pdf_grad_into(&x, &mut g);
    if let Some(t) = trace.as_deref_mut() {
        t.points.push(x.clone());
        t.values.push(f);
    }
    let done = |x: Vec<f64>, steps| {
        let mode = captured(modes, &x, opts.capture_radius);
        FlowAssignment {
            mode,
            terminal: x,
            steps,
        }
    };
    if captured(modes, &x, opts.capture_radius).is_some() {
        return done(x, 0);
    }

    let (mut k2, mut k3, mut k4) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut tmp = vec![0.0; d];
    let mut next = vec![0.0; d];
    let mut g_next = vec![0.0; d];
    let mut h = f64::INFINITY;
    let mut steps = 0;
    let mut iter = 0;
    while iter < opts.max_iter {
        iter += 1;
        let gnorm = norm(&g);
        if !(f > 0.0) || gnorm <= opts.grad_tol * f {
            break;
        }
        h = h.min(max_disp / gnorm);
        for i in 0..d {
            tmp[i] = x[i] + 0.5 * h * g[i];
        }
        gm.pdf_grad_into(&tmp, &mut k2);
        for i in 0..d {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        gm.pdf_grad_into(&tmp, &mut k3);
        for i in 0..d {
            tmp[i] = x[i] + h * k3[i];
        }
        gm.pdf_grad_into(&tmp, &mut k4);
        for i in 0..d {
            next[i] = x[i] + h / 6.0 * (g[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let f_next = gm.pdf_grad_into(&next, &mut g_next);
        if f_next < f {
            h *= 0.5;
            if h * gnorm < 1e-15 * max_disp {
                break;
            }
            continue;
        }
        std::mem::swap(&mut x, &mut next);
        std::mem::swap(&mut g, &mut g_next);
        f = f_next;
        steps += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.points.push(x.clone());
            t.values.push(f);
        }
        if captured(modes, &x, opts.capture_radius).is_some() {
            break;
        }
        h *= 2.0;
    }
    done(x, steps)
}

/// Follows the gradient ascent flow from `x` and reports the capturing mode,
/// or `None` when the flow stalls or runs out of iterations first.
pub fn gradient_flow_assign(
    gm: &GaussianMixture,
    modes: &ModeSet,
    x: &[f64],
    opts: &FlowOptions,
) -> Result<FlowAssignment> {
    if x.len() != gm.dim() {
        return Err(Error::Dimension {
            expected: gm.dim(),
            got: x.len(),
        });
    }
    Ok(integrate(gm, modes, x, opts, None))
}

/// Same integration as [`gradient_flow_assign`], recording every accepted point.
pub fn gradient_flow_trace(
    gm: &GaussianMixture,
    modes: &ModeSet,
    x: &[f64],
    opts: &FlowOptions,
) -> Result<(FlowAssignment, FlowTrace)> {
    if x.len() != gm.dim() {
        return Err(Error::Dimension {
            expected: gm.dim(),
            got: x.len(),
        });
    }
    let mut trace = FlowTrace::default();
    let a = integrate(gm, modes, x, opts, Some(&mut trace));
    Ok((a, trace))
}

/// Flow assignment of every point, in point order.
pub fn flow_assignments(
    gm: &GaussianMixture,
    modes: &ModeSet,
    ps: &PointSet,
    opts: &FlowOptions,
) -> Result<Vec<FlowAssignment>> {
    if ps.dim() != gm.dim() {
        return Err(Error::Dimension {
            expected: gm.dim(),
            got: ps.dim(),
        });
    }
    Ok(par::map_range(ps.len(), |i| {
        integrate(gm, modes, ps.point(i), opts, None)
    }))
}

/// Basin-of-attraction partition of a point set. Labels follow mode order
/// (modes without members are skipped); unassigned points get `None`. Each
/// cluster's representative is its member closest to the mode.
pub fn reference_partition(
    gm: &GaussianMixture,
    modes: &ModeSet,
    ps: &PointSet,
    opts: &FlowOptions,
) -> Result<Clustering> {
    let assignments = flow_assignments(gm, modes, ps, opts)?;
    let mut best: Vec<Option<(f64, usize)>> = vec![None; modes.len()];
    for (i, a) in assignments.iter().enumerate() {
        if let Some(m) = a.mode {
            let dist = sq_dist(ps.point(i), &modes.modes[m]);
            if best[m].is_none_or(|(bd, _)| dist < bd) {
                best[m] = Some((dist, i));
            }
        }
    }
    let mut label_of_mode = vec![None; modes.len()];
    let mut representatives = Vec::new();
    for (m, b) in best.iter().enumerate() {
        if let Some((_, i)) = b {
            label_of_mode[m] = Some(representatives.len());
            representatives.push(*i);
        }
    }
    let labels = assignments
        .iter()
        .map(|a| a.mode.and_then(|m| label_of_mode[m]))
        .collect();
    Clustering::new(labels, representatives)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{MixtureSpec, ModeOptions};

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
        // pi^2 / 2
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn flat_kde_examples() {
        let ps = PointSet::new(2, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(flat_kde(&ps, 0.5, &[5.0, 5.0]).unwrap().count, 0);
        assert_eq!(flat_kde(&ps, 0.5, &[5.0, 5.0]).unwrap().value, 0.0);
        let one = PointSet::new(2, vec![0.3, 0.4]).unwrap();
        let est = flat_kde(&one, 0.5, &[0.3, 0.4]).unwrap();
        assert_eq!(est.count, 1);
        assert!((est.value - 1.0 / (std::f64::consts::PI * 0.25)).abs() < 1e-12);
        assert!(flat_kde(&ps, 0.5, &[0.0]).is_err());
    }

    #[test]
    fn medoid_isolated_point() {
        let ps = PointSet::new(1, vec![0.0, 10.0]).unwrap();
        assert_eq!(medoid_max_shift(&ps, 1.0, 1).unwrap().nodes(), &[1]);
    }

    #[test]
    fn medoid_collinear_example() {
        // 1D points 0,1,2,3,4,4.5 with eps = 1.2: counts (2,3,3,3,3,2).
        let ps = PointSet::new(1, vec![0.0, 1.0, 2.0, 3.0, 4.0, 4.5]).unwrap();
        let ms = MedoidMaxShift::new(&ps, 1.2, 1.2).unwrap();
        assert_eq!(ms.counts(), &[2, 3, 3, 3, 3, 2]);
        assert_eq!(ms.path(0).unwrap().nodes(), &[0, 1, 2, 3, 4]);
        assert_eq!(ms.path(5).unwrap().nodes(), &[5, 4]);
    }

    fn single(mean: [f64; 2]) -> GaussianMixture {
        GaussianMixture::new(MixtureSpec {
            d: 2,
            weights: vec![1.0],
            means: vec![mean.to_vec()],
            covariances: vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
        })
        .unwrap()
    }

    #[test]
    fn density_shift_at_mode_stays() {
        let gm = single([0.5, -0.5]);
        let p = max_shift_density(&gm, &[0.5, -0.5], 0.3, &DensityShiftOptions::default()).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn density_shift_heads_for_the_mean() {
        let gm = single([0.0, 0.0]);
        let opts = DensityShiftOptions::default();
        let p = max_shift_density(&gm, &[2.0, 1.3], 0.25, &opts).unwrap();
        let angular = 2.0 * std::f64::consts::PI / 64.0;
        for w in p.windows(2) {
            let step = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
            let to_mean = [-w[0][0], -w[0][1]];
            if norm(&to_mean) < 0.25 {
                continue;
            }
            let cos =
                (step[0] * to_mean[0] + step[1] * to_mean[1]) / (norm(&step) * norm(&to_mean));
            assert!(cos.clamp(-1.0, 1.0).acos() <= angular / 2.0 + 1e-9);
        }
        assert!(norm(p.last().unwrap()) < 0.25);
    }

    #[test]
    fn polar_sampling_needs_two_dimensions() {
        let gm = GaussianMixture::new(MixtureSpec {
            d: 1,
            weights: vec![1.0],
            means: vec![vec![0.0]],
            covariances: vec![vec![vec![1.0]]],
        })
        .unwrap();
        let err = max_shift_density(&gm, &[1.0], 0.1, &DensityShiftOptions::default());
        assert!(matches!(err, Err(Error::UnsupportedDimension(1))));
        let opts = DensityShiftOptions {
            sampling: BallSampling::QuasiRandom { count: 64 },
            ..Default::default()
        };
        let p = max_shift_density(&gm, &[1.0], 0.1, &opts).unwrap();
        assert!(p.last().unwrap()[0].abs() < 0.1);
    }

    #[test]
    fn flow_from_mode_takes_no_steps() {
        let gm = GaussianMixture::fixture("bimodal-close").unwrap();
        let modes = gm.find_modes(&ModeOptions::default()).unwrap();
        for (i, m) in modes.modes.iter().enumerate() {
            let a = gradient_flow_assign(&gm, &modes, m, &FlowOptions::default()).unwrap();
            assert_eq!(a.mode, Some(i));
            assert_eq!(a.steps, 0);
        }
    }

    #[test]
    fn single_gaussian_flow_always_reaches_mean() {
        let gm = single([1.0, 2.0]);
        let modes = gm.find_modes(&ModeOptions::default()).unwrap();
        let (lo, hi) = gm.bounding_box(3.0);
        for i in 0..50u64 {
            let x = [
                lo[0] + radical_inverse(i + 1, 2) * (hi[0] - lo[0]),
                lo[1] + radical_inverse(i + 1, 3) * (hi[1] - lo[1]),
            ];
            let a = gradient_flow_assign(&gm, &modes, &x, &FlowOptions::default()).unwrap();
            assert_eq!(a.mode, Some(0), "start {x:?}");
        }
    }

    #[test]
    fn flow_increases_density_every_step() {
        let gm = GaussianMixture::fixture("trimodal").unwrap();
        let modes = gm.find_modes(&ModeOptions::default()).unwrap();
        let (_, trace) =
            gradient_flow_trace(&gm, &modes, &[0.3, -0.2], &FlowOptions::default()).unwrap();
        assert!(trace.values.len() > 2);
        assert!(trace.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn mirrored_points_get_mirrored_modes() {
        let gm = GaussianMixture::fixture("bimodal-close").unwrap();
        let modes = gm.find_modes(&ModeOptions::default()).unwrap();
        assert_eq!(modes.len(), 2);
        let mirror = |m: usize| {
            let p = &modes.modes[m];
            modes.nearest(&[-p[0], p[1]]).unwrap().0
        };
        for i in 0..40u64 {
            let x = [
                -2.5 + 5.0 * radical_inverse(i + 1, 2),
                -2.0 + 4.0 * radical_inverse(i + 1, 3),
            ];
            if x[0].abs() < 1e-3 {
                continue;
            }
            let opts = FlowOptions::default();
            let a = gradient_flow_assign(&gm, &modes, &x, &opts).unwrap();
            let b = gradient_flow_assign(&gm, &modes, &[-x[0], x[1]], &opts).unwrap();
            assert_eq!(b.mode, a.mode.map(mirror), "start {x:?}");
        }
    }

    #[test]
    fn reference_partition_examples() {
        let gm = single([0.0, 0.0]);
        let modes = gm.find_modes(&ModeOptions::default()).unwrap();
        let ps = gm.sample(300, 1).unwrap();
        let opts = FlowOptions::default();
        let c = reference_partition(&gm, &modes, &ps, &opts).unwrap();
        assert_eq!(c.k(), 1);
        assert!(c.labels().iter().all(|l| *l == Some(0)));
        assert_eq!(c, reference_partition(&gm, &modes, &ps, &opts).unwrap());
    }
}
