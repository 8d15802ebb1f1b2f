//! Model parameters, hopping matrix, dispersion relation and interaction coefficients.

mod antisym;
mod interaction;

pub use antisym::{
    antisymmetric_norm, antisymmetrize, coupling_table_norm, hubbard_fc, AntisymmetricCoefficients,
    CouplingTable,
};
pub use interaction::{
    check_smallness, DensityEntry, InteractionCoefficients, InteractionKey, LambdaCoefficients,
    LambdaKey, SmallnessReport, SmallnessVariant, Term, PAULI,
};

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::lattice::{enumerate_momenta, LatticeSpec};
use crate::Error;

/// Hopping amplitudes, chemical potential and inverse temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub t: f64,
    /// Next-to-nearest hopping; ignored when `d = 1`.
    pub t_prime: f64,
    pub mu: f64,
    pub beta: f64,
}

impl ModelParams {
    pub fn new(t: f64, t_prime: f64, mu: f64, beta: f64) -> Self {
        ModelParams {
            t,
            t_prime,
            mu,
            beta,
        }
    }

    /// `|t| + |t'| 1_{d >= 2}`.
    pub fn hopping_scale(&self, d: usize) -> f64 {
        self.t.abs() + if d >= 2 { self.t_prime.abs() } else { 0.0 }
    }

    /// Checks `beta > 0` and that the hopping does not vanish.
    pub fn validate(&self, d: usize) -> Result<(), Error> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParams("beta must be positive and finite"));
        }
        if self.hopping_scale(d) == 0.0 {
            return Err(Error::TrivialHopping);
        }
        Ok(())
    }
}

/// Hopping matrix over `(site, spin)` modes in global order, without the
/// nonzero-hopping check. Used directly only for the trivial-hopping case.
pub fn hopping_matrix_unchecked(spec: &LatticeSpec, params: &ModelParams) -> DMatrix<Complex64> {
    let n = spec.mode_count();
    let mut t = DMatrix::<Complex64>::zeros(n, n);
    let d = spec.d;
    for x in 0..spec.site_count() {
        let cx = spec.site_coords(x);
        let mut add = |offset: &[i64], amp: f64| {
            let y: Vec<i64> = cx.iter().zip(offset).map(|(a, b)| a + b).collect();
            let ry = spec.site_rank(&y);
            for s in 0..2 {
                t[(2 * x + s, 2 * ry + s)] += Complex64::new(amp, 0.0);
            }
        };
        for j in 0..d {
            let mut e = alloc::vec![0i64; d];
            e[j] = 1;
            add(&e, -params.t);
            e[j] = -1;
            add(&e, -params.t);
        }
        if d >= 2 {
            for j in 0..d {
                for k in (j + 1)..d {
                    for (sj, sk) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        let mut e = alloc::vec![0i64; d];
                        e[j] = sj;
                        e[k] = sk;
                        add(&e, -params.t_prime);
                    }
                }
            }
        }
        for s in 0..2 {
            t[(2 * x + s, 2 * x + s)] -= Complex64::new(params.mu, 0.0);
        }
    }
    t
}

/// The hopping matrix `T(x xi, y phi)`.
pub fn hopping_matrix(
    spec: &LatticeSpec,
    params: &ModelParams,
) -> Result<DMatrix<Complex64>, Error> {
    params.validate(spec.d)?;
    Ok(hopping_matrix_unchecked(spec, params))
}

/// Dispersion `E_{k + sum_j z_j e_{p_j}}`; each shift is added inside the cosine of its axis.
pub fn dispersion(
    k: &[f64],
    params: &ModelParams,
    shifts: &[(Complex64, usize)],
) -> Result<Complex64, Error> {
    let d = k.len();
    let mut kc: Vec<Complex64> = k.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for &(z, p) in shifts {
        if p >= d {
            return Err(Error::AxisOutOfRange { axis: p, d });
        }
        kc[p] += z;
    }
    Ok(dispersion_complex(&kc, params))
}

pub(crate) fn dispersion_complex(kc: &[Complex64], params: &ModelParams) -> Complex64 {
    let d = kc.len();
    let cos: Vec<Complex64> = kc.iter().map(|k| k.cos()).collect();
    let mut e = Complex64::new(-params.mu, 0.0);
    for c in &cos {
        e -= 2.0 * params.t * c;
    }
    if d >= 2 {
        for j in 0..d {
            for l in (j + 1)..d {
                e -= 4.0 * params.t_prime * cos[j] * cos[l];
            }
        }
    }
    e
}

/// Max over momenta of `|E_k - sum_x T(x xi, 0 xi) e^{-i<k,x>}|`.
pub fn check_fourier_consistency(spec: &LatticeSpec, params: &ModelParams) -> f64 {
    let t = hopping_matrix_unchecked(spec, params);
    let mut worst: f64 = 0.0;
    for k in enumerate_momenta(spec) {
        let e = dispersion(&k, params, &[]).expect("unshifted dispersion");
        let mut sym = Complex64::new(0.0, 0.0);
        for x in 0..spec.site_count() {
            let cx = spec.site_coords(x);
            let phase: f64 = k.iter().zip(&cx).map(|(a, b)| a * *b as f64).sum();
            sym += t[(2 * x, 0)] * Complex64::from_polar(1.0, -phase);
        }
        worst = worst.max((e - sym).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn hopping_entries() {
        let s = LatticeSpec::new(1, 4).unwrap();
        let p = ModelParams::new(1.0, 0.0, 0.0, 1.0);
        let t = hopping_matrix(&s, &p).unwrap();
        assert_eq!(t[(0, 2)].re, -1.0);
        assert_eq!(t[(0, 3)].re, 0.0);
        assert_eq!(t[(1, 2)].re, 0.0);
        let s = LatticeSpec::new(2, 4).unwrap();
        let p = ModelParams::new(0.0, 0.5, 0.0, 1.0);
        let t = hopping_matrix(&s, &p).unwrap();
        let y = s.site_rank(&[1, 1]);
        assert_eq!(t[(0, 2 * y)].re, -0.5);
        assert!((&t - t.adjoint()).camax() == 0.0);
    }

    #[test]
    fn rejects_zero_hopping() {
        let s = LatticeSpec::new(1, 4).unwrap();
        let p = ModelParams::new(0.0, 1.0, 0.0, 1.0);
        assert!(matches!(hopping_matrix(&s, &p), Err(Error::TrivialHopping)));
    }

    #[test]
    fn dispersion_values() {
        let p = ModelParams::new(1.0, 0.0, 0.0, 1.0);
        assert_eq!(
            dispersion(&[0.0], &p, &[]).unwrap(),
            Complex64::new(-2.0, 0.0)
        );
        let p2 = ModelParams::new(1.0, 0.5, 0.2, 1.0);
        let e = dispersion(&[PI, PI], &p2, &[]).unwrap();
        assert!((e.re - 1.8).abs() < 1e-14 && e.im == 0.0);
        let e = dispersion(&[0.0], &p, &[(Complex64::new(0.0, 0.3), 0)]).unwrap();
        assert!((e.re + 2.0 * num_traits::Float::cosh(0.3f64)).abs() < 1e-14);
        assert!(e.im.abs() < 1e-15);
        assert!(dispersion(&[0.0], &p, &[(Complex64::new(0.0, 0.3), 1)]).is_err());
    }

    #[test]
    fn fourier_symbol() {
        let s = LatticeSpec::new(1, 4).unwrap();
        assert!(check_fourier_consistency(&s, &ModelParams::new(1.0, 0.0, 0.3, 1.0)) <= 1e-10);
        let s = LatticeSpec::new(2, 2).unwrap();
        assert!(check_fourier_consistency(&s, &ModelParams::new(1.0, 0.4, 0.0, 1.0)) <= 1e-10);
        let s = LatticeSpec::new(1, 1).unwrap();
        let p = ModelParams::new(0.7, 0.0, 0.3, 1.0);
        let t = hopping_matrix(&s, &p).unwrap();
        assert!((t[(0, 0)].re - (-2.0 * 0.7 - 0.3)).abs() < 1e-15);
        assert!(check_fourier_consistency(&s, &p) <= 1e-12);
    }

    #[test]
    fn circulant_eigenvalues_match_dispersion() {
        let s = LatticeSpec::new(1, 5).unwrap();
        let p = ModelParams::new(0.8, 0.0, -0.1, 1.0);
        let t = hopping_matrix(&s, &p).unwrap();
        let mut ev: Vec<f64> = t.symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut want: Vec<f64> = enumerate_momenta(&s)
            .iter()
            .flat_map(|k| {
                let e = dispersion(k, &p, &[]).unwrap().re;
                [e, e]
            })
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
