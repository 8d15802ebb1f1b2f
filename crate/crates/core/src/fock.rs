//! Exact fermionic Fock space on `Gamma x {up,down}`: Jordan-Wigner operators,
//! Hamiltonians, thermal averages and correlation functions by direct trace.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::lattice::{LatticeSpec, Spin};
use crate::model::{
    hopping_matrix_unchecked, InteractionCoefficients, LambdaCoefficients, LambdaKey, ModelParams,
};
use crate::Error;

/// Hard cap on the number of modes of a Fock space.
pub const MAX_MODES: usize = 24;
/// Cap on the number of modes for dense diagonalization (dimension 4096).
pub const MAX_DENSE_MODES: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// The Fock space of `modes` fermionic modes; basis states are bitmasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockSpace {
    modes: usize,
}

impl FockSpace {
    pub fn new(modes: usize) -> Result<Self, Error> {
        if modes > MAX_MODES {
            return Err(Error::TooLarge {
                what: "Fock space modes",
                size: modes,
                limit: MAX_MODES,
            });
        }
        Ok(FockSpace { modes })
    }

    pub fn for_lattice(spec: &LatticeSpec) -> Result<Self, Error> {
        Self::new(spec.mode_count())
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    /// Applies `o_1 o_2 .. o_k` (rightmost first) to the basis state `state`.
    pub fn apply_word(&self, word: &[(usize, Ladder)], state: usize) -> Option<(usize, f64)> {
        let mut s = state;
        let mut sign = 1.0;
        for &(mode, op) in word.iter().rev() {
            let bit = 1usize << mode;
            let occupied = s & bit != 0;
            match (op, occupied) {
                (Ladder::Annihilate, true) | (Ladder::Create, false) => {
                    if (s & (bit - 1)).count_ones() % 2 == 1 {
                        sign = -sign;
                    }
                    s ^= bit;
                }
                _ => return None,
            }
        }
        Some((s, sign))
    }
}

/// A sparse operator on a Fock space, stored by `(row, column)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    dim: usize,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl FockOperator {
    pub fn zero(space: &FockSpace) -> Self {
        FockOperator {
            dim: space.dim(),
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(space: &FockSpace) -> Self {
        let mut o = Self::zero(space);
        for i in 0..o.dim {
            o.entries.insert((i, i), Complex64::new(1.0, 0.0));
        }
        o
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries.get(&(row, col)).copied().unwrap_or(ZERO)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Adds `coef * o_1 .. o_k`.
    pub fn add_word(
        &mut self,
        space: &FockSpace,
        coef: Complex64,
        word: &[(usize, Ladder)],
    ) -> Result<(), Error> {
        for &(m, _) in word {
            if m >= space.modes() {
                return Err(Error::ModeOutOfRange {
                    mode: m,
                    modes: space.modes(),
                });
            }
        }
        if coef == ZERO {
            return Ok(());
        }
        for col in 0..space.dim() {
            if let Some((row, sign)) = space.apply_word(word, col) {
                *self.entries.entry((row, col)).or_insert(ZERO) += coef * sign;
            }
        }
        Ok(())
    }

    pub fn from_word(
        space: &FockSpace,
        coef: Complex64,
        word: &[(usize, Ladder)],
    ) -> Result<Self, Error> {
        let mut o = Self::zero(space);
        o.add_word(space, coef, word)?;
        Ok(o)
    }

    pub fn add(&self, other: &FockOperator) -> FockOperator {
        let mut out = self.clone();
        for (k, v) in &other.entries {
            *out.entries.entry(*k).or_insert(ZERO) += *v;
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> FockOperator {
        FockOperator {
            dim: self.dim,
            entries: self.entries.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &FockOperator) -> FockOperator {
        let mut rows_of: BTreeMap<usize, Vec<(usize, Complex64)>> = BTreeMap::new();
        for (&(r, c), v) in &other.entries {
            rows_of.entry(r).or_default().push((c, *v));
        }
        let mut out = BTreeMap::new();
        for (&(r, k), a) in &self.entries {
            if let Some(row) = rows_of.get(&k) {
                for &(c, b) in row {
                    *out.entry((r, c)).or_insert(ZERO) += a * b;
                }
            }
        }
        FockOperator {
            dim: self.dim,
            entries: out,
        }
    }

    pub fn adjoint(&self) -> FockOperator {
        FockOperator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|(&(r, c), v)| ((c, r), v.conj()))
                .collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |H - H^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.add(&self.adjoint().scale(Complex64::new(-1.0, 0.0)))
            .max_abs()
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dim);
        for (&(r, c), a) in &self.entries {
            out[r] += a * v[c];
        }
        out
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>, Error> {
        if self.dim > 1 << MAX_DENSE_MODES {
            return Err(Error::TooLarge {
                what: "dense Fock matrix dimension",
                size: self.dim,
                limit: 1 << MAX_DENSE_MODES,
            });
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(r, c), v) in &self.entries {
            m[(r, c)] += *v;
        }
        Ok(m)
    }
}

/// `psi*_mode` or `psi_mode`.
pub fn mode_operator(space: &FockSpace, mode: usize, kind: Ladder) -> Result<FockOperator, Error> {
    FockOperator::from_word(space, Complex64::new(1.0, 0.0), &[(mode, kind)])
}

/// `psi*_{a_1} .. psi*_{a_l} psi_{b_l} .. psi_{b_1}` as a word.
pub fn normal_word(creators: &[usize], annihilators: &[usize]) -> Vec<(usize, Ladder)> {
    let mut w: Vec<(usize, Ladder)> = creators.iter().map(|&a| (a, Ladder::Create)).collect();
    w.extend(annihilators.iter().rev().map(|&b| (b, Ladder::Annihilate)));
    w
}

/// `H_0 + V (+ lambda terms)` without the nonzero-hopping check.
pub fn build_hamiltonian_unchecked(
    spec: &LatticeSpec,
    params: &ModelParams,
    u: &InteractionCoefficients,
    lambda: Option<&LambdaCoefficients>,
) -> Result<FockOperator, Error> {
    u.validate()?;
    let space = FockSpace::for_lattice(spec)?;
    let mut h = FockOperator::zero(&space);
    let t = hopping_matrix_unchecked(spec, params);
    for a in 0..spec.mode_count() {
        for b in 0..spec.mode_count() {
            if t[(a, b)] != ZERO {
                h.add_word(
                    &space,
                    t[(a, b)],
                    &[(a, Ladder::Create), (b, Ladder::Annihilate)],
                )?;
            }
        }
    }
    for term in u.terms(spec) {
        let a: Vec<usize> = term
            .sites
            .iter()
            .zip(&term.xi)
            .map(|(s, x)| spec.mode(*s, *x))
            .collect();
        let b: Vec<usize> = term
            .sites
            .iter()
            .zip(&term.phi)
            .map(|(s, p)| spec.mode(*s, *p))
            .collect();
        h.add_word(&space, term.coef, &normal_word(&a, &b))?;
    }
    if let Some(lam) = lambda {
        for (c, xs, xi, ys, phi) in lam.terms(spec) {
            let a: Vec<usize> = xs.iter().zip(&xi).map(|(s, x)| spec.mode(*s, *x)).collect();
            let b: Vec<usize> = ys
                .iter()
                .zip(&phi)
                .map(|(s, p)| spec.mode(*s, *p))
                .collect();
            h.add_word(&space, c, &normal_word(&a, &b))?;
        }
    }
    Ok(h)
}

/// `H_lambda = H_0 + V_lambda` on the Fock space of `spec`.
pub fn build_hamiltonian(
    spec: &LatticeSpec,
    params: &ModelParams,
    u: &InteractionCoefficients,
    lambda: Option<&LambdaCoefficients>,
) -> Result<FockOperator, Error> {
    params.validate(spec.d)?;
    build_hamiltonian_unchecked(spec, params, u, lambda)
}

/// Eigendecomposition of `H` with Boltzmann weights `e^{-beta (E_i - E_min)}`.
#[derive(Clone, Debug)]
pub struct ThermalState {
    pub beta: f64,
    pub energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
    weights: Vec<f64>,
    weight_sum: f64,
    e_min: f64,
}

impl ThermalState {
    pub fn new(h: &FockOperator, beta: f64) -> Result<Self, Error> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParams("beta must be positive and finite"));
        }
        let dense = h.to_dense()?;
        let herm = (&dense + dense.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let energies: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = energies
            .iter()
            .map(|e| (-beta * (e - e_min)).exp())
            .collect();
        let weight_sum = weights.iter().sum();
        Ok(ThermalState {
            beta,
            energies,
            vectors: eig.eigenvectors,
            weights,
            weight_sum,
            e_min,
        })
    }

    /// `log Tr e^{-beta H}`.
    pub fn log_partition(&self) -> f64 {
        -self.beta * self.e_min + self.weight_sum.ln()
    }

    /// `Tr(e^{-beta H} O) / Tr e^{-beta H}`.
    pub fn average(&self, o: &FockOperator) -> Result<Complex64, Error> {
        if o.dim() != self.vectors.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.vectors.nrows(),
                found: o.dim(),
            });
        }
        let mut acc = ZERO;
        for (i, w) in self.weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let v: DVector<Complex64> = self.vectors.column(i).into_owned();
            let ov = o.apply(&v);
            acc += v.dotc(&ov) * *w;
        }
        Ok(acc / self.weight_sum)
    }
}

pub fn thermal_average(h: &FockOperator, o: &FockOperator, beta: f64) -> Result<Complex64, Error> {
    ThermalState::new(h, beta)?.average(o)
}

/// Sites and spins of the observable
/// `psi*_{x1 xi1}..psi*_{xm xim} psi_{ym phim}..psi_{y1 phi1} + h.c.`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrelationQuery {
    pub x_hat: Vec<Vec<i64>>,
    pub y_hat: Vec<Vec<i64>>,
    pub xi_hat: Vec<Spin>,
    pub phi_hat: Vec<Spin>,
}

impl CorrelationQuery {
    pub fn new(
        x_hat: Vec<Vec<i64>>,
        y_hat: Vec<Vec<i64>>,
        xi_hat: Vec<Spin>,
        phi_hat: Vec<Spin>,
    ) -> Result<Self, Error> {
        let m = x_hat.len();
        if m == 0 || y_hat.len() != m || xi_hat.len() != m || phi_hat.len() != m {
            return Err(Error::InvalidParams(
                "query lists must have equal positive length",
            ));
        }
        Ok(CorrelationQuery {
            x_hat,
            y_hat,
            xi_hat,
            phi_hat,
        })
    }

    pub fn m_hat(&self) -> usize {
        self.x_hat.len()
    }

    /// The query with `(X, Xi)` and `(Y, Phi)` exchanged.
    pub fn swapped(&self) -> Self {
        CorrelationQuery {
            x_hat: self.y_hat.clone(),
            y_hat: self.x_hat.clone(),
            xi_hat: self.phi_hat.clone(),
            phi_hat: self.xi_hat.clone(),
        }
    }

    pub fn creator_modes(&self, spec: &LatticeSpec) -> Vec<usize> {
        self.x_hat
            .iter()
            .zip(&self.xi_hat)
            .map(|(x, s)| spec.mode(spec.site_rank(x), *s))
            .collect()
    }

    pub fn annihilator_modes(&self, spec: &LatticeSpec) -> Vec<usize> {
        self.y_hat
            .iter()
            .zip(&self.phi_hat)
            .map(|(y, s)| spec.mode(spec.site_rank(y), *s))
            .collect()
    }

    pub fn lambda_key(&self) -> LambdaKey {
        LambdaKey {
            x: self.x_hat.clone(),
            y: self.y_hat.clone(),
            xi: self.xi_hat.clone(),
            phi: self.phi_hat.clone(),
        }
    }

    /// The observable `A + A^dagger` on the Fock space of `spec`.
    pub fn observable(&self, spec: &LatticeSpec) -> Result<FockOperator, Error> {
        let space = FockSpace::for_lattice(spec)?;
        let a = self.creator_modes(spec);
        let b = self.annihilator_modes(spec);
        let mut o = FockOperator::zero(&space);
        let one = Complex64::new(1.0, 0.0);
        o.add_word(&space, one, &normal_word(&a, &b))?;
        o.add_word(&space, one, &normal_word(&b, &a))?;
        Ok(o)
    }
}

/// `<A + A^dagger>` for a given Hamiltonian.
pub fn correlation_with_hamiltonian(
    spec: &LatticeSpec,
    h: &FockOperator,
    beta: f64,
    q: &CorrelationQuery,
) -> Result<Complex64, Error> {
    ThermalState::new(h, beta)?.average(&q.observable(spec)?)
}

/// Exact correlation function of the query in the model `(params, u)`.
pub fn correlation(
    spec: &LatticeSpec,
    params: &ModelParams,
    u: &InteractionCoefficients,
    q: &CorrelationQuery,
) -> Result<Complex64, Error> {
    let h = build_hamiltonian(spec, params, u, None)?;
    correlation_with_hamiltonian(spec, &h, params.beta, q)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaDerivativeReport {
    pub correlation: f64,
    pub finite_difference: f64,
    pub deviation: f64,
}

/// Central difference of `-(1/beta) log Tr e^{-beta H_lambda}` in the single
/// source parameter of the query, against the direct correlation.
pub fn lambda_derivative_check(
    spec: &LatticeSpec,
    params: &ModelParams,
    u: &InteractionCoefficients,
    q: &CorrelationQuery,
    step: f64,
) -> Result<LambdaDerivativeReport, Error> {
    let log_z = |lam: f64| -> Result<f64, Error> {
        let l = LambdaCoefficients::single(q.lambda_key(), lam)?;
        let h = build_hamiltonian(spec, params, u, Some(&l))?;
        Ok(ThermalState::new(&h, params.beta)?.log_partition())
    };
    let fd = -(log_z(step)? - log_z(-step)?) / (2.0 * step * params.beta);
    let c = correlation(spec, params, u, q)?.re;
    Ok(LambdaDerivativeReport {
        correlation: c,
        finite_difference: fd,
        deviation: (c - fd).abs(),
    })
}

/// Number operator `psi*_a psi_a`.
pub fn number_operator(space: &FockSpace, mode: usize) -> Result<FockOperator, Error> {
    FockOperator::from_word(
        space,
        Complex64::new(1.0, 0.0),
        &[(mode, Ladder::Create), (mode, Ladder::Annihilate)],
    )
}

/// Max entry of `{A, B} - delta Id` over all pairs of ladder operators.
pub fn car_defect(space: &FockSpace) -> Result<f64, Error> {
    let n = space.modes();
    let mut ops = Vec::new();
    for m in 0..n {
        ops.push((m, Ladder::Create, mode_operator(space, m, Ladder::Create)?));
        ops.push((
            m,
            Ladder::Annihilate,
            mode_operator(space, m, Ladder::Annihilate)?,
        ));
    }
    let id = FockOperator::identity(space);
    let mut worst: f64 = 0.0;
    for (ma, ka, a) in &ops {
        for (mb, kb, b) in &ops {
            let mut anti = a.mul(b).add(&b.mul(a));
            if ma == mb && ka != kb {
                anti = anti.add(&id.scale(Complex64::new(-1.0, 0.0)));
            }
            worst = worst.max(anti.max_abs());
        }
    }
    Ok(worst)
}
