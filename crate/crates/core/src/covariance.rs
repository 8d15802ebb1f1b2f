//! The free covariance `C(x xi x, y phi y)` with optional complex momentum
//! shifts, the decay function `F_{t,t',d}` and the analytic identities and
//! bounds of the covariance.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{E, PI};
use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::lattice::{enumerate_momenta, reduce_scalar, LatticeSpec, Spin, TimeGrid};
use crate::model::{dispersion_complex, ModelParams};
use crate::Error;

/// Largest covariance matrix we build.
pub const MAX_MATRIX_DIM: usize = 4096;

/// `F(r) = r/(2A) + sqrt(r^2/(4A^2) + 1)` with `A = |t| + 2(d-1)|t'|`.
pub fn decay_function(r: f64, params: &ModelParams, d: usize) -> Result<f64, Error> {
    let a = params.t.abs() + 2.0 * (d as f64 - 1.0) * params.t_prime.abs();
    if a == 0.0 {
        return Err(Error::TrivialHopping);
    }
    let q = r / (2.0 * a);
    Ok(q + (q * q + 1.0).sqrt())
}

/// `(F^{1/(2 e pi d)} + 1) / (F^{1/(2 e pi d)} - 1)` with `F = F(pi/(2 beta))`.
pub fn l1_kernel(params: &ModelParams, d: usize) -> Result<f64, Error> {
    let f = decay_function(PI / (2.0 * params.beta), params, d)?;
    let g = f.powf(1.0 / (2.0 * E * PI * d as f64));
    Ok((g + 1.0) / (g - 1.0))
}

/// `4 beta K^d`, the bound on the time-space L1 norm of the covariance.
pub fn l1_bound_rhs(params: &ModelParams, d: usize) -> Result<f64, Error> {
    Ok(4.0 * params.beta * l1_kernel(params, d)?.powi(d as i32))
}

/// `(e^{i 2 pi n / L} - 1) / (2 pi / L)`.
pub fn chord(n: i64, l: usize) -> Complex64 {
    let s = 2.0 * PI / l as f64;
    (Complex64::from_polar(1.0, s * n as f64) - 1.0) / s
}

/// Which argument of `F` fixes an imaginary-shift radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusConstant {
    /// `F(pi / (2 beta))`, as in the proof of the contour formula.
    PiOverTwoBeta,
    /// `F(beta / (2 pi))`, as written in the statements.
    BetaOverTwoPi,
}

/// `1/2 log F(r)` for the chosen `r`.
pub fn shift_radius(params: &ModelParams, d: usize, which: RadiusConstant) -> Result<f64, Error> {
    let r = match which {
        RadiusConstant::PiOverTwoBeta => PI / (2.0 * params.beta),
        RadiusConstant::BetaOverTwoPi => params.beta / (2.0 * PI),
    };
    Ok(0.5 * decay_function(r, params, d)?.ln())
}

/// Contour radius `r_n = (1/(2n)) log F(.)`.
pub fn contour_radius(
    params: &ModelParams,
    d: usize,
    n: usize,
    which: RadiusConstant,
) -> Result<f64, Error> {
    Ok(shift_radius(params, d, which)? / n as f64)
}

/// A point `(x, xi, x)` of space, spin and imaginary time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceTimePoint {
    pub site: usize,
    pub spin: Spin,
    pub time: f64,
}

impl SpaceTimePoint {
    pub fn new(site: usize, spin: Spin, time: f64) -> Self {
        SpaceTimePoint { site, spin, time }
    }
}

/// `e^{-tau E} (1_{tau<=0}/(1+e^{beta E}) - 1_{tau>0}/(1+e^{-beta E}))`, arranged
/// so that no intermediate exponential overflows.
fn time_factor(tau: f64, e: Complex64, beta: f64) -> Complex64 {
    if tau <= 0.0 {
        if e.re > 0.0 {
            (-(tau + beta) * e).exp() / (1.0 + (-beta * e).exp())
        } else {
            (-tau * e).exp() / (1.0 + (beta * e).exp())
        }
    } else if e.re < 0.0 {
        -((beta - tau) * e).exp() / ((beta * e).exp() + 1.0)
    } else {
        -(-tau * e).exp() / (1.0 + (-beta * e).exp())
    }
}

/// The covariance of a lattice model, with momentum shifts `sum_j z_j e_{p_j}`.
#[derive(Clone, Debug)]
pub struct CovarianceSpec {
    pub lattice: LatticeSpec,
    pub params: ModelParams,
    pub shifts: Vec<(Complex64, usize)>,
    momenta: Vec<Vec<f64>>,
    energies: Vec<Complex64>,
}

impl CovarianceSpec {
    /// Checks every shifted dispersion has `|Im E| < pi / beta`.
    pub fn new(
        lattice: LatticeSpec,
        params: ModelParams,
        shifts: Vec<(Complex64, usize)>,
    ) -> Result<Self, Error> {
        params.validate(lattice.d)?;
        let momenta = enumerate_momenta(&lattice);
        let energies = shifted_energies(&lattice, &params, &momenta, &shifts)?;
        Ok(CovarianceSpec {
            lattice,
            params,
            shifts,
            momenta,
            energies,
        })
    }

    pub fn unshifted(lattice: LatticeSpec, params: ModelParams) -> Result<Self, Error> {
        Self::new(lattice, params, Vec::new())
    }

    pub fn energies(&self) -> &[Complex64] {
        &self.energies
    }

    pub fn momenta(&self) -> &[Vec<f64>] {
        &self.momenta
    }

    fn eval(&self, energies: &[Complex64], a: &SpaceTimePoint, b: &SpaceTimePoint) -> Complex64 {
        if a.spin != b.spin {
            return Complex64::new(0.0, 0.0);
        }
        let xa = self.lattice.site_coords(a.site);
        let xb = self.lattice.site_coords(b.site);
        let tau = b.time - a.time;
        let mut s = Complex64::new(0.0, 0.0);
        for (k, e) in self.momenta.iter().zip(energies) {
            let phase: f64 = k
                .iter()
                .zip(xb.iter().zip(&xa))
                .map(|(kj, (y, x))| kj * (y - x) as f64)
                .sum();
            s += Complex64::from_polar(1.0, phase) * time_factor(tau, *e, self.params.beta);
        }
        s / self.lattice.site_count() as f64
    }

    /// `C(a, b)(shifts)`.
    pub fn value(&self, a: &SpaceTimePoint, b: &SpaceTimePoint) -> Complex64 {
        self.eval(&self.energies, a, b)
    }

    /// `C(a, b)(shifts + extra)`; fails when the extra shift breaks the imaginary-part guard.
    pub fn pair_value(
        &self,
        a: &SpaceTimePoint,
        b: &SpaceTimePoint,
        extra: &[(Complex64, usize)],
    ) -> Result<Complex64, Error> {
        if extra.is_empty() {
            return Ok(self.value(a, b));
        }
        let mut all = self.shifts.clone();
        all.extend_from_slice(extra);
        let energies = shifted_energies(&self.lattice, &self.params, &self.momenta, &all)?;
        Ok(self.eval(&energies, a, b))
    }

    /// Row/column index of `(site, spin, k-th grid time)`.
    pub fn index(&self, site: usize, spin: Spin, time_idx: usize) -> usize {
        time_idx * self.lattice.mode_count() + self.lattice.mode(site, spin)
    }

    pub fn point_of_index(&self, grid: &TimeGrid, i: usize) -> SpaceTimePoint {
        let m = self.lattice.mode_count();
        let (site, spin) = self.lattice.mode_parts(i % m);
        SpaceTimePoint::new(site, spin, grid.point(i / m))
    }

    /// `C_h` over `Gamma x {up,down} x [0,beta)_h`, time slowest.
    pub fn matrix(&self, grid: &TimeGrid) -> Result<DMatrix<Complex64>, Error> {
        self.matrix_with(grid, &self.energies)
    }

    fn matrix_with(
        &self,
        grid: &TimeGrid,
        energies: &[Complex64],
    ) -> Result<DMatrix<Complex64>, Error> {
        check_grid(grid, &self.params)?;
        let n = self.lattice.mode_count() * grid.len();
        if n > MAX_MATRIX_DIM {
            return Err(Error::TooLarge {
                what: "covariance matrix",
                size: n,
                limit: MAX_MATRIX_DIM,
            });
        }
        let pts: Vec<SpaceTimePoint> = (0..n).map(|i| self.point_of_index(grid, i)).collect();
        Ok(DMatrix::from_fn(n, n, |i, j| {
            self.eval(energies, &pts[i], &pts[j])
        }))
    }
}

fn check_grid(grid: &TimeGrid, params: &ModelParams) -> Result<(), Error> {
    if grid.beta != params.beta {
        return Err(Error::InvalidTimeGrid("grid beta differs from model beta"));
    }
    Ok(())
}

fn shifted_energies(
    lattice: &LatticeSpec,
    params: &ModelParams,
    momenta: &[Vec<f64>],
    shifts: &[(Complex64, usize)],
) -> Result<Vec<Complex64>, Error> {
    let limit = PI / params.beta;
    let mut out = Vec::with_capacity(momenta.len());
    for (i, k) in momenta.iter().enumerate() {
        let mut kc: Vec<Complex64> = k.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for &(z, p) in shifts {
            if p >= lattice.d {
                return Err(Error::AxisOutOfRange {
                    axis: p,
                    d: lattice.d,
                });
            }
            kc[p] += z;
        }
        let e = dispersion_complex(&kc, params);
        if e.im.abs() >= limit {
            return Err(Error::ImaginaryPartGuard {
                momentum: i,
                im: e.im.abs(),
                limit,
            });
        }
        out.push(e);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetIdentityReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub relative_error: f64,
}

/// `det C_h` against `prod_k (1 + e^{beta E_k})^{-2}`.
pub fn det_identity_check(
    cs: &CovarianceSpec,
    grid: &TimeGrid,
) -> Result<DetIdentityReport, Error> {
    let lhs = cs.matrix(grid)?.determinant();
    if lhs.norm() < 1e-300 {
        return Err(Error::Singular("det C_h underflows"));
    }
    let mut rhs = Complex64::new(1.0, 0.0);
    for e in cs.energies() {
        let f = 1.0 + (cs.params.beta * e).exp();
        rhs /= f * f;
    }
    Ok(DetIdentityReport {
        lhs,
        rhs,
        relative_error: (lhs - rhs).norm() / rhs.norm(),
    })
}

/// Matsubara frequencies `pi(2n+1)/beta` in `(-pi h, pi h)`, ascending.
pub fn matsubara_frequencies(grid: &TimeGrid) -> Vec<f64> {
    let n = grid.len() as i64;
    (-(n / 2)..(n / 2))
        .map(|j| PI * (2 * j + 1) as f64 / grid.beta)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatsubaraReport {
    pub max_off_diagonal: f64,
    pub max_diagonal_deviation: f64,
}

/// Conjugates `C_h` with the space-time Fourier matrix and compares with
/// `diag (1 - e^{-i omega / h + E_k / h})^{-1}`.
pub fn matsubara_check(cs: &CovarianceSpec, grid: &TimeGrid) -> Result<MatsubaraReport, Error> {
    let c = cs.matrix(grid)?;
    let n = c.nrows();
    let m = cs.lattice.mode_count();
    let omegas = matsubara_frequencies(grid);
    let norm = 1.0 / ((grid.len() * cs.lattice.site_count()) as f64).sqrt();
    let h = grid.h();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for (w_idx, w) in omegas.iter().enumerate() {
        for (k_idx, k) in cs.momenta().iter().enumerate() {
            for phi in Spin::BOTH {
                let row = w_idx * m + cs.lattice.mode(k_idx, phi);
                for col in 0..n {
                    let p = cs.point_of_index(grid, col);
                    if p.spin != phi {
                        continue;
                    }
                    let x = cs.lattice.site_coords(p.site);
                    let kx: f64 = k.iter().zip(&x).map(|(a, b)| a * *b as f64).sum();
                    y[(row, col)] = Complex64::from_polar(norm, kx - w * p.time);
                }
            }
        }
    }
    let d = &y * c * y.adjoint();
    let mut off: f64 = 0.0;
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(d[(i, j)].norm());
            }
        }
        let w = omegas[i / m];
        let (k_idx, _) = cs.lattice.mode_parts(i % m);
        let e = cs.energies()[k_idx];
        let want = 1.0 / (1.0 - (Complex64::new(0.0, -w / h) + e / h).exp());
        dev = dev.max((d[(i, i)] - want).norm());
    }
    Ok(MatsubaraReport {
        max_off_diagonal: off,
        max_diagonal_deviation: dev,
    })
}

/// Max over grid pairs of `|e^{i 2 pi <x-y, e_q>/L} C(shifts) - C(shifts + (2 pi/L) e_q)|`.
pub fn u1_shift_identity_check(
    cs: &CovarianceSpec,
    grid: &TimeGrid,
    q: usize,
) -> Result<f64, Error> {
    check_grid(grid, &cs.params)?;
    let l = cs.lattice.l;
    let shift = [(Complex64::new(2.0 * PI / l as f64, 0.0), q)];
    let mut all = cs.shifts.clone();
    all.extend_from_slice(&shift);
    let shifted = shifted_energies(&cs.lattice, &cs.params, &cs.momenta, &all)?;
    let n = cs.lattice.mode_count() * grid.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let a = cs.point_of_index(grid, i);
        for j in 0..n {
            let b = cs.point_of_index(grid, j);
            let dq = cs.lattice.site_coords(a.site)[q] - cs.lattice.site_coords(b.site)[q];
            let phase = Complex64::from_polar(1.0, 2.0 * PI * dq as f64 / l as f64);
            let lhs = phase * cs.value(&a, &b);
            let rhs = cs.eval(&shifted, &a, &b);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourReport {
    pub direct: Complex64,
    pub quadrature: Complex64,
    pub deviation: f64,
    pub radius: f64,
}

/// Compares `chord_q(x - y)^n C(a, b)(shifts)` with the iterated
/// `theta`-average of the circle integrals of `C(shifts + sum_j w_j e_q)`.
/// Trapezoid rule on each circle, Gauss-Legendre on each `theta` segment.
pub fn contour_formula_check(
    cs: &CovarianceSpec,
    a: &SpaceTimePoint,
    b: &SpaceTimePoint,
    q: usize,
    n: usize,
    circle_nodes: usize,
    theta_nodes: usize,
    which: RadiusConstant,
) -> Result<ContourReport, Error> {
    if n == 0 || n > 2 {
        return Err(Error::InvalidParams("contour order n must be 1 or 2"));
    }
    if q >= cs.lattice.d {
        return Err(Error::AxisOutOfRange {
            axis: q,
            d: cs.lattice.d,
        });
    }
    let l = cs.lattice.l;
    let r = contour_radius(&cs.params, cs.lattice.d, n, which)?;
    let dq = cs.lattice.site_coords(a.site)[q] - cs.lattice.site_coords(b.site)[q];
    let direct = chord(dq, l).powu(n as u32) * cs.value(a, b);

    let seg = 2.0 * PI / l as f64;
    let (gx, gw) = gauss_legendre(theta_nodes);
    let thetas: Vec<(f64, f64)> = gx
        .iter()
        .zip(&gw)
        .map(|(x, w)| (0.5 * seg * (x + 1.0), 0.5 * w))
        .collect();
    let circle: Vec<Complex64> = (0..circle_nodes)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / circle_nodes as f64))
        .collect();
    // each factor: (L/2pi) int dtheta (1/(2 pi)) int dphi e^{-i phi}/r f(theta + r e^{i phi})
    let cw = 1.0 / (circle_nodes as f64 * r);
    let mut total = Complex64::new(0.0, 0.0);
    let eval = |w: Complex64| cs.pair_value(a, b, &[(w, q)]);
    match n {
        1 => {
            for &(t, tw) in &thetas {
                for c in &circle {
                    total += tw * cw * c.conj() * eval(t + r * c)?;
                }
            }
        }
        _ => {
            for &(t1, w1) in &thetas {
                for &(t2, w2) in &thetas {
                    for c1 in &circle {
                        for c2 in &circle {
                            let f = eval(t1 + t2 + r * (c1 + c2))?;
                            total += w1 * w2 * cw * cw * (c1 * c2).conj() * f;
                        }
                    }
                }
            }
        }
    }
    Ok(ContourReport {
        direct,
        quadrature: total,
        deviation: (total - direct).norm(),
        radius: r,
    })
}

/// `2 F(pi/(2 beta))^{-(1/(4ed)) sum_q |chord_q(x - y)|}`.
pub fn chord_envelope(cs: &CovarianceSpec, x_minus_y: &[i64]) -> Result<f64, Error> {
    let d = cs.lattice.d;
    let f = decay_function(PI / (2.0 * cs.params.beta), &cs.params, d)?;
    let s: f64 = x_minus_y
        .iter()
        .map(|&n| chord(n, cs.lattice.l).norm())
        .sum();
    Ok(2.0 * f.powf(-s / (4.0 * E * d as f64)))
}

/// `2 F(pi/(2 beta))^{-(1/(2 e pi d)) sum_q |<x - y, e_q>|}` on the reduced window.
pub fn window_envelope(cs: &CovarianceSpec, x_minus_y: &[i64]) -> Result<f64, Error> {
    let d = cs.lattice.d;
    let f = decay_function(PI / (2.0 * cs.params.beta), &cs.params, d)?;
    let s: f64 = x_minus_y
        .iter()
        .map(|&n| reduce_scalar(n, cs.lattice.l).abs() as f64)
        .sum();
    Ok(2.0 * f.powf(-s / (2.0 * E * PI * d as f64)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayReport {
    pub worst_chord_ratio: f64,
    pub worst_window_ratio: f64,
}

/// Worst `|C| / envelope` over all grid pairs, for both envelopes.
pub fn decay_envelope_check(cs: &CovarianceSpec, grid: &TimeGrid) -> Result<DecayReport, Error> {
    check_grid(grid, &cs.params)?;
    let mut rep = DecayReport {
        worst_chord_ratio: 0.0,
        worst_window_ratio: 0.0,
    };
    let sites = cs.lattice.site_count();
    let times = grid.points();
    for xs in 0..sites {
        for ys in 0..sites {
            let diff: Vec<i64> = cs
                .lattice
                .site_coords(xs)
                .iter()
                .zip(cs.lattice.site_coords(ys))
                .map(|(a, b)| a - b)
                .collect();
            let ce = chord_envelope(cs, &diff)?;
            let we = window_envelope(cs, &diff)?;
            for &tx in &times {
                for &ty in &times {
                    let c = cs
                        .value(
                            &SpaceTimePoint::new(xs, Spin::Up, tx),
                            &SpaceTimePoint::new(ys, Spin::Up, ty),
                        )
                        .norm();
                    rep.worst_chord_ratio = rep.worst_chord_ratio.max(c / ce);
                    rep.worst_window_ratio = rep.worst_window_ratio.max(c / we);
                }
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L1Report {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// `(1/h) sum_{x in [-beta, beta)_h} sum_x |C(x xi x, 0 xi 0)|` against `4 beta K^d`.
pub fn l1_bound_check(cs: &CovarianceSpec, grid: &TimeGrid) -> Result<L1Report, Error> {
    check_grid(grid, &cs.params)?;
    let origin = SpaceTimePoint::new(0, Spin::Up, 0.0);
    let mut lhs = 0.0;
    for t in grid.symmetric_points() {
        for s in 0..cs.lattice.site_count() {
            lhs += cs
                .value(&SpaceTimePoint::new(s, Spin::Up, t), &origin)
                .norm();
        }
    }
    lhs /= grid.h();
    let rhs = l1_bound_rhs(&cs.params, cs.lattice.d)?;
    Ok(L1Report {
        lhs,
        rhs,
        satisfied: lhs <= rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetDecayReport {
    pub det: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// `|det(C(a_j, b_k))|` against `2 4^n F^{-(1/(4ed)) sum_q |chord_q(sum a - sum b)|}`.
pub fn det_decay_check(
    cs: &CovarianceSpec,
    points: &[(SpaceTimePoint, SpaceTimePoint)],
) -> Result<DetDecayReport, Error> {
    let n = points.len();
    let m = DMatrix::from_fn(n, n, |j, k| cs.value(&points[j].0, &points[k].1));
    let det = if n == 0 { 1.0 } else { m.determinant().norm() };
    let mut diff = vec![0i64; cs.lattice.d];
    for (a, b) in points {
        for (j, (p, q)) in cs
            .lattice
            .site_coords(a.site)
            .iter()
            .zip(cs.lattice.site_coords(b.site))
            .enumerate()
        {
            diff[j] += p - q;
        }
    }
    let bound = 4f64.powi(n as i32) * chord_envelope(cs, &diff)?;
    Ok(DetDecayReport {
        det,
        bound,
        ratio: det / bound,
    })
}
