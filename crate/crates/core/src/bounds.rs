//! Closed-form bounds and their numerical verification: the determinant bound,
//! the time-space integral `D` of the covariance, the Taylor-coefficient bounds
//! of the Schwinger function and the decay envelopes of correlation functions.

use alloc::vec::Vec;
use core::f64::consts::{E, PI};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::covariance::{
    chord, decay_function, shift_radius, CovarianceSpec, RadiusConstant, SpaceTimePoint,
};
use crate::fock::{build_hamiltonian, CorrelationQuery, ThermalState};
use crate::grassmann::{hubbard_taylor, schwinger_taylor, HubbardVariant};
use crate::lattice::{LatticeSpec, Spin, TimeGrid};
use crate::model::{check_smallness, InteractionCoefficients, ModelParams, SmallnessVariant};
use crate::Error;

/// The determinant-bound constant `B` and the covariance integral `D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundContext {
    pub det_bound_b: f64,
    pub l1_integral_d: f64,
}

impl BoundContext {
    /// `B = 4` and `D` computed from `C_h`.
    pub fn new(cs: &CovarianceSpec, grid: &TimeGrid) -> Result<Self, Error> {
        Ok(BoundContext {
            det_bound_b: 4.0,
            l1_integral_d: covariance_l1_d(cs, grid)?,
        })
    }

    pub fn with_b(self, b: f64) -> Result<Self, Error> {
        if !(b >= 1.0) {
            return Err(Error::InvalidParams("B must be at least 1"));
        }
        Ok(BoundContext {
            det_bound_b: b,
            ..self
        })
    }
}

/// `D = max(max_y (1/h) sum_x |C_h(x, y)|, max_y (1/h) sum_x |C_h(y, x)|)`.
pub fn covariance_l1_d(cs: &CovarianceSpec, grid: &TimeGrid) -> Result<f64, Error> {
    let g = cs.matrix(grid)?;
    let n = g.nrows();
    let mut best: f64 = 0.0;
    for j in 0..n {
        let col: f64 = (0..n).map(|i| g[(i, j)].norm()).sum();
        let row: f64 = (0..n).map(|i| g[(j, i)].norm()).sum();
        best = best.max(col).max(row);
    }
    Ok(best / grid.h())
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `|b_0| <= B^m_hat`, `|b_m| <= (m_hat 4^m_hat B^m_hat / m) (sum_l l 4^l B^{l-1} ||U_l|| D)^m`.
///
/// `norms` holds `(l, ||U_{L,l}||_{L,l})`.
pub fn schwinger_coefficient_bound(
    m: usize,
    m_hat: usize,
    ctx: &BoundContext,
    norms: &[(usize, f64)],
) -> f64 {
    let b = ctx.det_bound_b;
    let bm = b.powi(m_hat as i32);
    if m == 0 {
        return bm;
    }
    let rate: f64 = norms
        .iter()
        .map(|&(l, n)| {
            l as f64 * 4f64.powi(l as i32) * b.powi(l as i32 - 1) * n * ctx.l1_integral_d
        })
        .fold(0.0, |a, x| a + x);
    m_hat as f64 * 4f64.powi(m_hat as i32) * bm / m as f64 * rate.powi(m as i32)
}

/// `|c_m| <= (4 B^2 / (3m + 4)) binom(3m + 4, m) (D B |U|)^m`.
pub fn onsite_coefficient_bound(m: usize, ctx: &BoundContext, u: f64) -> f64 {
    let b = ctx.det_bound_b;
    let m64 = m as u64;
    4.0 * b * b / (3 * m + 4) as f64
        * binomial(3 * m64 + 4, m64)
        * (ctx.l1_integral_d * b * u.abs()).powi(m as i32)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetBoundReport {
    /// `max |det| / 4^n` over the trials.
    pub worst_ratio: f64,
    pub worst_n: usize,
    pub trials: usize,
}

fn unit_vector(rng: &mut ChaCha8Rng, m: usize) -> DVector<Complex64> {
    loop {
        let v = DVector::from_fn(m, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let norm = v.norm();
        if norm > 1e-3 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, spec: &LatticeSpec, beta: f64) -> SpaceTimePoint {
    let site = rng.gen_range(0..spec.site_count());
    let spin = if rng.gen_bool(0.5) {
        Spin::Up
    } else {
        Spin::Down
    };
    SpaceTimePoint::new(site, spin, rng.gen_range(0.0..beta))
}

fn det_trial(cs: &CovarianceSpec, n: usize, m: usize, rng: &mut ChaCha8Rng) -> f64 {
    let beta = cs.params.beta;
    let xs: Vec<SpaceTimePoint> = (0..n)
        .map(|_| random_point(rng, &cs.lattice, beta))
        .collect();
    let ys: Vec<SpaceTimePoint> = (0..n)
        .map(|_| random_point(rng, &cs.lattice, beta))
        .collect();
    let us: Vec<DVector<Complex64>> = (0..n).map(|_| unit_vector(rng, m)).collect();
    let vs: Vec<DVector<Complex64>> = (0..n).map(|_| unit_vector(rng, m)).collect();
    let mat = DMatrix::from_fn(n, n, |j, k| us[j].dotc(&vs[k]) * cs.value(&xs[j], &ys[k]));
    mat.determinant().norm() / 4f64.powi(n as i32)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Samples `|det(<u_j, v_k> C(x_j, y_k))| / 4^n` at random points and unit vectors in `C^m`.
pub fn det_bound_sample(
    cs: &CovarianceSpec,
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<DetBoundReport, Error> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParams("n and m must be positive"));
    }
    let mut report = DetBoundReport {
        worst_ratio: 0.0,
        worst_n: n,
        trials,
    };
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        report.worst_ratio = report.worst_ratio.max(det_trial(cs, n, m, &mut rng));
    }
    Ok(report)
}

/// Like [`det_bound_sample`] with `n <= n_max`, `m <= m_max` drawn per trial and a
/// random momentum shift `z e_p` with `|Im z| <= im_fraction * (1/2) log F(pi/(2 beta))`.
pub fn det_bound_scan(
    lattice: LatticeSpec,
    params: ModelParams,
    n_max: usize,
    m_max: usize,
    trials: usize,
    seed: u64,
    im_fraction: f64,
) -> Result<DetBoundReport, Error> {
    if n_max == 0 || m_max == 0 {
        return Err(Error::InvalidParams("n and m must be positive"));
    }
    if !(0.0..=1.0).contains(&im_fraction) {
        return Err(Error::InvalidParams("im_fraction must lie in [0, 1]"));
    }
    let radius = shift_radius(&params, lattice.d, RadiusConstant::PiOverTwoBeta)?;
    let mut report = DetBoundReport {
        worst_ratio: 0.0,
        worst_n: 0,
        trials,
    };
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let n = rng.gen_range(1..=n_max);
        let m = rng.gen_range(1..=m_max);
        let shifts = if im_fraction > 0.0 {
            let z = Complex64::new(
                rng.gen_range(-PI..PI),
                rng.gen_range(-1.0..=1.0) * im_fraction * radius,
            );
            alloc::vec![(z, rng.gen_range(0..lattice.d))]
        } else {
            Vec::new()
        };
        let cs = CovarianceSpec::new(lattice, params, shifts)?;
        let r = det_trial(&cs, n, m, &mut rng);
        if r > report.worst_ratio {
            report.worst_ratio = r;
            report.worst_n = n;
        }
    }
    Ok(report)
}

/// Which decay theorem's constant to use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnvelopeVariant {
    /// `4^{m+1} - m 4^{2m+1} log(1 - R)`.
    General { r: f64 },
    /// `324`, for the on-site interaction and `m_hat = 2`.
    Hubbard,
}

/// Distance entering the exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceMode {
    /// `sum_p |chord_L(n_p)|`, valid at finite `L`.
    Chord { l: usize },
    /// `||n||_2`, the infinite-volume statement.
    Euclidean,
}

/// `(1/(4ed)) * dist(sum x_hat - sum y_hat)`.
pub fn envelope_exponent(q: &CorrelationQuery, d: usize, mode: DistanceMode) -> f64 {
    let diff: Vec<i64> = (0..d)
        .map(|p| {
            q.x_hat.iter().map(|x| x[p]).sum::<i64>() - q.y_hat.iter().map(|y| y[p]).sum::<i64>()
        })
        .collect();
    let dist = match mode {
        DistanceMode::Chord { l } => diff.iter().map(|&n| chord(n, l).norm()).sum::<f64>(),
        DistanceMode::Euclidean => diff.iter().map(|&n| (n * n) as f64).sum::<f64>().sqrt(),
    };
    dist / (4.0 * E * d as f64)
}

pub fn envelope_prefactor(m_hat: usize, variant: EnvelopeVariant) -> Result<f64, Error> {
    match variant {
        EnvelopeVariant::General { r } => {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidParams("R must lie in (0, 1)"));
            }
            let m = m_hat as i32;
            Ok(4f64.powi(m + 1) - m_hat as f64 * 4f64.powi(2 * m + 1) * (1.0 - r).ln())
        }
        EnvelopeVariant::Hubbard => Ok(324.0),
    }
}

/// `prefactor * F(pi/(2 beta))^{-exponent}`.
pub fn theorem_envelope(
    q: &CorrelationQuery,
    params: &ModelParams,
    d: usize,
    variant: EnvelopeVariant,
    mode: DistanceMode,
) -> Result<f64, Error> {
    let f = decay_function(PI / (2.0 * params.beta), params, d)?;
    Ok(envelope_prefactor(q.m_hat(), variant)? * f.powf(-envelope_exponent(q, d, mode)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorRow {
    pub m: usize,
    pub computed: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

fn row(m: usize, computed: f64, bound: f64) -> TaylorRow {
    TaylorRow {
        m,
        computed,
        bound,
        ratio: if bound > 0.0 {
            computed / bound
        } else if computed == 0.0 {
            0.0
        } else {
            f64::INFINITY
        },
        pass: computed <= bound * (1.0 + 1e-12) + 1e-300,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorReport {
    pub ctx: BoundContext,
    /// `|b_m|` against the general bound.
    pub general: Vec<TaylorRow>,
    /// `|c_m|` with the interaction pinned at the origin.
    pub hubbard_pinned: Option<Vec<TaylorRow>>,
    /// `|c_m|` with the interaction on every site.
    pub hubbard_full: Option<Vec<TaylorRow>>,
}

impl TaylorReport {
    pub fn all_pass(&self) -> bool {
        let ok = |rows: &Vec<TaylorRow>| rows.iter().all(|r| r.pass);
        ok(&self.general)
            && self.hubbard_pinned.as_ref().map_or(true, ok)
            && self.hubbard_full.as_ref().map_or(true, ok)
    }
}

fn is_hubbard_query(q: &CorrelationQuery) -> bool {
    q.m_hat() == 2 && q.xi_hat == [Spin::Up, Spin::Down] && q.phi_hat == [Spin::Up, Spin::Down]
}

/// Compares `b_m` (and `c_m` for the on-site interaction with a 4-point query)
/// to their closed-form bounds for `m <= m_max`.
pub fn verify_taylor_bounds(
    cs: &CovarianceSpec,
    grid: &TimeGrid,
    u: &InteractionCoefficients,
    q: &CorrelationQuery,
    m_max: usize,
    ctx: &BoundContext,
) -> Result<TaylorReport, Error> {
    let norms: Vec<(usize, f64)> = (1..=u.max_order())
        .map(|l| (l, u.norm(l, Some(&cs.lattice))))
        .collect();
    let b = schwinger_taylor(cs, grid, u, q, m_max)?;
    let general = b
        .coefficients
        .iter()
        .enumerate()
        .map(|(m, c)| {
            row(
                m,
                c.norm(),
                schwinger_coefficient_bound(m, q.m_hat(), ctx, &norms),
            )
        })
        .collect();
    let (mut pinned, mut full) = (None, None);
    if let (Some(coupling), true) = (u.hubbard_coupling(), is_hubbard_query(q)) {
        let x = [q.x_hat[0].clone(), q.x_hat[1].clone()];
        let y = [q.y_hat[0].clone(), q.y_hat[1].clone()];
        let rows = |variant| -> Result<Vec<TaylorRow>, Error> {
            let c = hubbard_taylor(cs, grid, coupling, x.clone(), y.clone(), variant, m_max)?;
            Ok(c.coefficients
                .iter()
                .enumerate()
                .map(|(m, v)| row(m, v.norm(), onsite_coefficient_bound(m, ctx, coupling)))
                .collect())
        };
        pinned = Some(rows(HubbardVariant::Pinned(0))?);
        full = Some(rows(HubbardVariant::Full)?);
    }
    Ok(TaylorReport {
        ctx: *ctx,
        general,
        hubbard_pinned: pinned,
        hubbard_full: full,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeReport {
    pub query: CorrelationQuery,
    /// `|<A + A^dagger>|` by exact trace.
    pub computed: f64,
    /// Envelope with the chord-distance exponent.
    pub envelope: f64,
    /// Envelope with the Euclidean exponent, for reference.
    pub envelope_euclidean: f64,
    pub pass: bool,
}

/// Checks `|<A + A^dagger>| <= envelope` for each query after verifying the
/// smallness hypothesis of the chosen theorem.
pub fn verify_theorem_envelope(
    spec: &LatticeSpec,
    params: &ModelParams,
    u: &InteractionCoefficients,
    queries: &[CorrelationQuery],
    variant: EnvelopeVariant,
) -> Result<Vec<EnvelopeReport>, Error> {
    let sv = match variant {
        EnvelopeVariant::General { r } => SmallnessVariant::General { r },
        EnvelopeVariant::Hubbard => SmallnessVariant::Hubbard,
    };
    let s = check_smallness(u, params, spec, sv)?;
    if !s.satisfied {
        return Err(Error::SmallnessViolated {
            lhs: s.lhs,
            rhs: s.rhs,
        });
    }
    let state = ThermalState::new(&build_hamiltonian(spec, params, u, None)?, params.beta)?;
    let mut out = Vec::with_capacity(queries.len());
    for q in queries {
        if variant == EnvelopeVariant::Hubbard && !is_hubbard_query(q) {
            return Err(Error::InvalidParams(
                "the on-site envelope needs an (up, down) 4-point query",
            ));
        }
        let computed = state.average(&q.observable(spec)?)?.norm();
        let envelope = theorem_envelope(
            q,
            params,
            spec.d,
            variant,
            DistanceMode::Chord { l: spec.l },
        )?;
        let envelope_euclidean =
            theorem_envelope(q, params, spec.d, variant, DistanceMode::Euclidean)?;
        out.push(EnvelopeReport {
            query: q.clone(),
            computed,
            envelope,
            envelope_euclidean,
            pass: computed <= envelope,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn binomials() {
        assert_eq!(binomial(7, 1), 7.0);
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(3, 4), 0.0);
    }

    #[test]
    fn schwinger_coefficient_bounds() {
        let ctx = BoundContext {
            det_bound_b: 4.0,
            l1_integral_d: 0.5,
        };
        assert_eq!(schwinger_coefficient_bound(0, 1, &ctx, &[(2, 0.1)]), 4.0);
        let want = 16.0 * (2.0 * 16.0 * 4.0 * 0.1 * 0.5);
        assert!((schwinger_coefficient_bound(1, 1, &ctx, &[(2, 0.1)]) - want).abs() < 1e-12);
        assert_eq!(schwinger_coefficient_bound(3, 2, &ctx, &[(2, 0.0)]), 0.0);
    }

    #[test]
    fn onsite_coefficient_bounds() {
        let ctx = BoundContext {
            det_bound_b: 4.0,
            l1_integral_d: 0.7,
        };
        assert_eq!(onsite_coefficient_bound(0, &ctx, 0.3), 16.0);
        assert!((onsite_coefficient_bound(1, &ctx, 0.3) - 4.0 * 64.0 * 0.7 * 0.3).abs() < 1e-12);
    }

    #[test]
    fn fuss_catalan_series() {
        // sum_m (4/(3m+4)) binom(3m+4, m) x^m = B(x)^4 with B = 1 + x B^3
        let series = |x: f64, terms: u64| -> f64 {
            (0..terms)
                .map(|m| 4.0 / (3 * m + 4) as f64 * binomial(3 * m + 4, m) * x.powi(m as i32))
                .sum()
        };
        let x = 0.1;
        let mut b = 1.0;
        for _ in 0..200 {
            b = 1.0 + x * b * b * b;
        }
        assert!((series(x, 150) - b.powi(4)).abs() < 1e-12);
        // at the radius 4/27 the root is B = 3/2 and the sum is 81/16
        let r = 4.0 / 27.0;
        assert!((1.0 + r * 1.5f64.powi(3) - 1.5).abs() < 1e-15);
        let partial = series(r, 150);
        assert!(partial < 81.0 / 16.0 && partial > 4.5, "{partial}");
    }

    #[test]
    fn envelope_prefactors() {
        let q = CorrelationQuery::new(
            vec![vec![0], vec![1]],
            vec![vec![1], vec![0]],
            vec![Spin::Up, Spin::Down],
            vec![Spin::Up, Spin::Down],
        )
        .unwrap();
        let p = ModelParams::new(1.0, 0.0, 0.2, 1.0);
        assert_eq!(envelope_exponent(&q, 1, DistanceMode::Chord { l: 4 }), 0.0);
        assert_eq!(
            theorem_envelope(&q, &p, 1, EnvelopeVariant::Hubbard, DistanceMode::Euclidean).unwrap(),
            324.0
        );
        let g = envelope_prefactor(2, EnvelopeVariant::General { r: 0.5 }).unwrap();
        assert!((g - (64.0 + 2048.0 * core::f64::consts::LN_2)).abs() < 1e-10);
        assert!(envelope_prefactor(2, EnvelopeVariant::General { r: 1.0 }).is_err());
    }

    #[test]
    fn single_site_d() {
        let spec = LatticeSpec::new(1, 1).unwrap();
        let p = ModelParams::new(1.0, 0.0, 0.2, 1.0);
        let cs = CovarianceSpec::unshifted(spec, p).unwrap();
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let o = SpaceTimePoint::new(0, Spin::Up, 0.0);
        let direct: f64 = grid
            .points()
            .iter()
            .map(|&x| cs.value(&SpaceTimePoint::new(0, Spin::Up, x), &o).norm())
            .sum::<f64>()
            / grid.h();
        let d = covariance_l1_d(&cs, &grid).unwrap();
        assert!((d - direct).abs() < 1e-14);
    }

    #[test]
    fn det_bound_one_by_one() {
        let spec = LatticeSpec::new(1, 4).unwrap();
        let cs = CovarianceSpec::unshifted(spec, ModelParams::new(1.0, 0.0, 0.2, 1.0)).unwrap();
        let r = det_bound_sample(&cs, 1, 1, 50, 3).unwrap();
        assert!(r.worst_ratio <= 0.25);
        let again = det_bound_sample(&cs, 1, 1, 50, 3).unwrap();
        assert_eq!(r, again);
    }
}
