//! Finite Grassmann calculus: Gaussian expectations by Wick determinants and by
//! brute-force Berezin integration, the discretized partition function, the
//! Schwinger function and its Taylor coefficients in the coupling `eta`.
//!
//! Generators are `psibar_0..psibar_{N-1}, psi_0..psi_{N-1}`. A monomial is a
//! bitmask over `2N` bits (barred family in the low `N` bits), read as the
//! product of its generators in ascending bit order.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::covariance::CovarianceSpec;
use crate::fock::CorrelationQuery;
use crate::lattice::{Spin, TimeGrid};
use crate::model::{InteractionCoefficients, LambdaCoefficients};
use crate::Error;

/// Generator cap for the polynomial and Wick engines.
pub const MAX_WICK_GENERATORS: usize = 24;
/// Generator cap for the dense Berezin engine.
pub const MAX_BEREZIN_GENERATORS: usize = 10;
/// Cap on stored monomials in a polynomial exponential.
pub const MAX_POLY_TERMS: usize = 1 << 20;
/// Cap on visited vertex configurations in a Wick sum.
pub const MAX_CONFIGURATIONS: usize = 20_000_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The `N` space-time labels `(site, spin, grid time)`, each doubled into a
/// barred and an unbarred generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrassmannIndexSpace {
    n: usize,
}

impl GrassmannIndexSpace {
    pub fn new(n: usize) -> Result<Self, Error> {
        if n > MAX_WICK_GENERATORS {
            return Err(Error::TooLarge {
                what: "Grassmann generators",
                size: n,
                limit: MAX_WICK_GENERATORS,
            });
        }
        Ok(GrassmannIndexSpace { n })
    }

    /// `N = 2 L^d beta h`; always a multiple of 4.
    pub fn for_model(cs: &CovarianceSpec, grid: &TimeGrid) -> Result<Self, Error> {
        let n = cs.lattice.mode_count() * grid.len();
        debug_assert!(n % 4 == 0);
        Self::new(n)
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Bar(usize),
    Psi(usize),
}

/// `(-1)^{#{(i in a, j in b): i > j}}`, the sign of `m_a m_b` reordered.
fn merge_sign(a: u64, b: u64) -> f64 {
    let mut inv = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inv += (a >> j >> 1).count_ones();
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A polynomial in `2N` Grassmann generators.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannPolynomial {
    n: usize,
    terms: BTreeMap<u64, Complex64>,
}

impl GrassmannPolynomial {
    pub fn zero(n: usize) -> Self {
        assert!(n <= 32, "at most 32 generators per family");
        GrassmannPolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        let mut p = Self::zero(n);
        p.terms.insert(0, ONE);
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn bit(&self, g: Generator) -> Result<u64, Error> {
        let (i, off) = match g {
            Generator::Bar(i) => (i, 0),
            Generator::Psi(i) => (i, self.n),
        };
        if i >= self.n {
            return Err(Error::ModeOutOfRange {
                mode: i,
                modes: self.n,
            });
        }
        Ok(1u64 << (i + off))
    }

    /// `coef * g_1 g_2 .. g_k`.
    pub fn from_word(n: usize, coef: Complex64, word: &[Generator]) -> Result<Self, Error> {
        let mut p = Self::zero(n);
        let mut mask = 0u64;
        let mut sign = 1.0;
        for g in word {
            let b = p.bit(*g)?;
            if mask & b != 0 {
                return Ok(p);
            }
            sign *= merge_sign(mask, b);
            mask |= b;
        }
        if coef != ZERO {
            p.terms.insert(mask, coef * sign);
        }
        Ok(p)
    }

    /// `coef * psibar_{a_1}..psibar_{a_l} psi_{b_l}..psi_{b_1}`.
    pub fn vertex(
        n: usize,
        coef: Complex64,
        creators: &[usize],
        annihilators: &[usize],
    ) -> Result<Self, Error> {
        let mut w: Vec<Generator> = creators.iter().map(|&a| Generator::Bar(a)).collect();
        w.extend(annihilators.iter().rev().map(|&b| Generator::Psi(b)));
        Self::from_word(n, coef, &w)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the canonical monomial with the given barred and unbarred masks.
    pub fn coefficient(&self, barred: u64, unbarred: u64) -> Complex64 {
        self.terms
            .get(&(barred | (unbarred << self.n)))
            .copied()
            .unwrap_or(ZERO)
    }

    /// `(barred mask, unbarred mask, coefficient)` of every stored monomial.
    pub fn monomials(&self) -> impl Iterator<Item = (u64, u64, Complex64)> + '_ {
        let low = (1u64 << self.n) - 1;
        self.terms
            .iter()
            .map(move |(m, c)| (m & low, m >> self.n, *c))
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            *out.terms.entry(*m).or_insert(ZERO) += *c;
        }
        out.terms.retain(|_, v| *v != ZERO);
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.n);
        if c != ZERO {
            out.terms = self.terms.iter().map(|(m, v)| (*m, v * c)).collect();
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                *out.terms.entry(a | b).or_insert(ZERO) += x * y * merge_sign(*a, *b);
            }
        }
        out.terms.retain(|_, v| *v != ZERO);
        out
    }

    /// `e^p` for `p` without constant term (nilpotent, so the series terminates).
    pub fn exp(&self) -> Result<Self, Error> {
        if self.terms.contains_key(&0) {
            return Err(Error::InvalidParams(
                "exp needs a polynomial without constant term",
            ));
        }
        let mut result = Self::one(self.n);
        let mut term = Self::one(self.n);
        let mut k = 1.0;
        loop {
            term = term.mul(self).scale(Complex64::new(1.0 / k, 0.0));
            if term.is_empty() {
                break;
            }
            if term.len() > MAX_POLY_TERMS || result.len() > MAX_POLY_TERMS {
                return Err(Error::TooLarge {
                    what: "polynomial exponential terms",
                    size: term.len().max(result.len()),
                    limit: MAX_POLY_TERMS,
                });
            }
            result = result.add(&term);
            k += 1.0;
        }
        Ok(result)
    }
}

fn sub_det(g: &DMatrix<Complex64>, rows: &[usize], cols: &[usize]) -> Complex64 {
    if rows.is_empty() {
        return ONE;
    }
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| g[(rows[i], cols[j])]).determinant()
}

/// `int psibar_{j_k}..psibar_{j_1} psi_{p_1}..psi_{p_k} dmu_G = det G(j_u, p_v)`.
pub fn wick_expectation(
    barred: &[usize],
    unbarred: &[usize],
    g: &DMatrix<Complex64>,
) -> Result<Complex64, Error> {
    for &i in barred.iter().chain(unbarred) {
        if i >= g.nrows() {
            return Err(Error::ModeOutOfRange {
                mode: i,
                modes: g.nrows(),
            });
        }
    }
    if barred.len() != unbarred.len() {
        return Ok(ZERO);
    }
    Ok(sub_det(g, barred, unbarred))
}

fn bits(mask: u64) -> Vec<usize> {
    let mut v = Vec::new();
    let mut m = mask;
    while m != 0 {
        v.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    v
}

/// Gaussian integral of a polynomial, monomial by monomial through [`wick_expectation`].
pub fn wick_integrate(f: &GrassmannPolynomial, g: &DMatrix<Complex64>) -> Result<Complex64, Error> {
    if g.nrows() != f.n() || g.ncols() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            found: g.nrows(),
        });
    }
    let mut acc = ZERO;
    for (a, b, c) in f.monomials() {
        let (ra, rb) = (bits(a), bits(b));
        if ra.len() != rb.len() {
            continue;
        }
        let k = ra.len();
        // canonical psibar_{a_1}..psibar_{a_k} is the reversal of the paired ordering
        let s = if (k * k.saturating_sub(1) / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        acc += c * s * sub_det(g, &ra, &rb);
    }
    Ok(acc)
}

/// `int f e^{-<psi, G^{-1} psibar>} / int e^{-<psi, G^{-1} psibar>}` by full
/// expansion in the `2^{2N}`-dimensional Grassmann algebra.
pub fn berezin_gaussian(
    f: &GrassmannPolynomial,
    g: &DMatrix<Complex64>,
) -> Result<Complex64, Error> {
    let n = f.n();
    if n > MAX_BEREZIN_GENERATORS {
        return Err(Error::TooLarge {
            what: "Berezin generators",
            size: n,
            limit: MAX_BEREZIN_GENERATORS,
        });
    }
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.nrows(),
        });
    }
    let inv = g
        .clone()
        .try_inverse()
        .ok_or(Error::Singular("covariance matrix"))?;
    let size = 1usize << (2 * n);
    let mut e = vec![ZERO; size];
    e[0] = ONE;
    // exp(-sum psi_a M_ab psibar_b) = prod_{a,b} (1 - M_ab psi_a psibar_b)
    for a in 0..n {
        for b in 0..n {
            let q = -inv[(a, b)];
            if q == ZERO {
                continue;
            }
            let bb = 1usize << b;
            let ba = 1usize << (n + a);
            for m in (0..size).rev() {
                if m & (ba | bb) != 0 || e[m] == ZERO {
                    continue;
                }
                let mut sign = merge_sign(bb as u64, m as u64);
                sign *= merge_sign(ba as u64, (m | bb) as u64);
                let v = e[m] * q * sign;
                e[m | ba | bb] += v;
            }
        }
    }
    let full = size - 1;
    if e[full] == ZERO {
        return Err(Error::Singular("Gaussian normalization"));
    }
    let mut acc = ZERO;
    for (m, c) in &f.terms {
        let comp = full as u64 ^ m;
        acc += c * merge_sign(*m, comp) * e[comp as usize];
    }
    Ok(acc / e[full])
}

/// A truncated power series `a_0 + a_1 eta + .. + a_M eta^M`.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaSeries {
    pub coefficients: Vec<Complex64>,
}

impl EtaSeries {
    pub fn new(coefficients: Vec<Complex64>) -> Self {
        EtaSeries { coefficients }
    }

    pub fn m_max(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, eta: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(ZERO, |acc, c| acc * eta + c)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        EtaSeries::new(self.coefficients.iter().map(|a| a * c).collect())
    }

    /// Power-series quotient, truncated to the shorter length.
    pub fn div(&self, den: &EtaSeries) -> Result<EtaSeries, Error> {
        let len = self.coefficients.len().min(den.coefficients.len());
        let d0 = *den
            .coefficients
            .first()
            .ok_or(Error::Singular("empty series"))?;
        if d0 == ZERO {
            return Err(Error::Singular("series denominator vanishes at eta = 0"));
        }
        let mut q: Vec<Complex64> = Vec::with_capacity(len);
        for m in 0..len {
            let mut v = self.coefficients[m];
            for k in 1..=m {
                v -= den.coefficients[k] * q[m - k];
            }
            q.push(v / d0);
        }
        Ok(EtaSeries::new(q))
    }
}

/// One summand `weight * psibar_{c_1}..psibar_{c_l} psi_{a_l}..psi_{a_1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub weight: Complex64,
    pub creators: Vec<usize>,
    pub annihilators: Vec<usize>,
}

impl Vertex {
    pub fn order(&self) -> usize {
        self.creators.len()
    }

    fn masks(&self) -> Option<(u64, u64)> {
        let mut r = 0u64;
        let mut c = 0u64;
        for &i in &self.creators {
            if r & (1 << i) != 0 {
                return None;
            }
            r |= 1 << i;
        }
        for &j in &self.annihilators {
            if c & (1 << j) != 0 {
                return None;
            }
            c |= 1 << j;
        }
        Some((r, c))
    }
}

/// The time-replicated vertices `-(U / h) psibar..psi` of an interaction.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexSet {
    pub n: usize,
    pub vertices: Vec<Vertex>,
}

impl VertexSet {
    pub fn from_interaction(
        cs: &CovarianceSpec,
        grid: &TimeGrid,
        u: &InteractionCoefficients,
        lambda: Option<&LambdaCoefficients>,
    ) -> Result<Self, Error> {
        let space = GrassmannIndexSpace::for_model(cs, grid)?;
        let spec = &cs.lattice;
        let h = grid.h();
        let mut vertices = Vec::new();
        for term in u.terms(spec) {
            for s in 0..grid.len() {
                vertices.push(Vertex {
                    weight: -term.coef / h,
                    creators: term
                        .sites
                        .iter()
                        .zip(&term.xi)
                        .map(|(x, p)| cs.index(*x, *p, s))
                        .collect(),
                    annihilators: term
                        .sites
                        .iter()
                        .zip(&term.phi)
                        .map(|(x, p)| cs.index(*x, *p, s))
                        .collect(),
                });
            }
        }
        if let Some(lam) = lambda {
            for (c, xs, xi, ys, phi) in lam.terms(spec) {
                for s in 0..grid.len() {
                    vertices.push(Vertex {
                        weight: -c / h,
                        creators: xs
                            .iter()
                            .zip(&xi)
                            .map(|(x, p)| cs.index(*x, *p, s))
                            .collect(),
                        annihilators: ys
                            .iter()
                            .zip(&phi)
                            .map(|(x, p)| cs.index(*x, *p, s))
                            .collect(),
                    });
                }
            }
        }
        Ok(VertexSet {
            n: space.n(),
            vertices,
        })
    }

    /// On-site vertices `-(U / h) psibar_up psibar_down psi_down psi_up` at one site.
    pub fn hubbard_site(
        cs: &CovarianceSpec,
        grid: &TimeGrid,
        u: f64,
        site: usize,
    ) -> Result<Self, Error> {
        let space = GrassmannIndexSpace::for_model(cs, grid)?;
        if site >= cs.lattice.site_count() {
            return Err(Error::InvalidParams("site out of range"));
        }
        let w = Complex64::new(-u / grid.h(), 0.0);
        let vertices = (0..grid.len())
            .map(|s| Vertex {
                weight: w,
                creators: vec![cs.index(site, Spin::Up, s), cs.index(site, Spin::Down, s)],
                annihilators: vec![cs.index(site, Spin::Up, s), cs.index(site, Spin::Down, s)],
            })
            .collect();
        Ok(VertexSet {
            n: space.n(),
            vertices,
        })
    }

    /// `sum_v weight_v V_v`.
    pub fn polynomial(&self) -> Result<GrassmannPolynomial, Error> {
        let mut p = GrassmannPolynomial::zero(self.n);
        for v in &self.vertices {
            p = p.add(&GrassmannPolynomial::vertex(
                self.n,
                v.weight,
                &v.creators,
                &v.annihilators,
            )?);
        }
        Ok(p)
    }

    /// `sum_v |weight_v| 4^{l_v}`.
    pub fn majorant(&self, det_bound: f64) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.weight.norm() * det_bound.powi(v.order() as i32))
            .sum()
    }
}

struct SubsetSum<'a> {
    g: &'a DMatrix<Complex64>,
    vertices: Vec<(&'a Vertex, u64, u64)>,
    max_m: usize,
    visited: usize,
    out: Vec<Complex64>,
}

impl SubsetSum<'_> {
    fn rec(
        &mut self,
        start: usize,
        rows: &mut Vec<usize>,
        cols: &mut Vec<usize>,
        used: (u64, u64),
        m: usize,
        w: Complex64,
    ) -> Result<(), Error> {
        self.visited += 1;
        if self.visited > MAX_CONFIGURATIONS {
            return Err(Error::TooLarge {
                what: "vertex configurations",
                size: self.visited,
                limit: MAX_CONFIGURATIONS,
            });
        }
        self.out[m] += w * sub_det(self.g, rows, cols);
        if m == self.max_m {
            return Ok(());
        }
        for i in start..self.vertices.len() {
            let (v, r, c) = self.vertices[i];
            if used.0 & r != 0 || used.1 & c != 0 {
                continue;
            }
            let (nr, nc) = (rows.len(), cols.len());
            rows.extend_from_slice(&v.creators);
            cols.extend_from_slice(&v.annihilators);
            self.rec(
                i + 1,
                rows,
                cols,
                (used.0 | r, used.1 | c),
                m + 1,
                w * v.weight,
            )?;
            rows.truncate(nr);
            cols.truncate(nc);
        }
        Ok(())
    }
}

/// `sum_{|S| = m} prod_{v in S} weight_v det G(base ++ rows_S, base ++ cols_S)` for `m <= max_m`.
fn vertex_sums(
    g: &DMatrix<Complex64>,
    set: &VertexSet,
    base_rows: &[usize],
    base_cols: &[usize],
    max_m: usize,
) -> Result<Vec<Complex64>, Error> {
    if set.n > 64 {
        return Err(Error::TooLarge {
            what: "Grassmann generators",
            size: set.n,
            limit: 64,
        });
    }
    let base = Vertex {
        weight: ONE,
        creators: base_rows.to_vec(),
        annihilators: base_cols.to_vec(),
    };
    let used = match base.masks() {
        Some(u) => u,
        None => return Ok(vec![ZERO; max_m + 1]),
    };
    let vertices = set
        .vertices
        .iter()
        .filter(|v| v.weight != ZERO)
        .filter_map(|v| v.masks().map(|(r, c)| (v, r, c)))
        .collect();
    let mut s = SubsetSum {
        g,
        vertices,
        max_m,
        visited: 0,
        out: vec![ZERO; max_m + 1],
    };
    let mut rows = base_rows.to_vec();
    let mut cols = base_cols.to_vec();
    s.rec(0, &mut rows, &mut cols, used, 0, ONE)?;
    Ok(s.out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionResult {
    /// The (possibly truncated) sum.
    pub value: Complex64,
    /// Contributions per vertex count `m`.
    pub by_order: Vec<Complex64>,
    /// Rigorous bound on the omitted orders; zero for the full sum.
    pub tail_bound: f64,
}

/// `sum_{k > m} w^k / k!`.
pub fn exponential_tail(w: f64, m: usize) -> f64 {
    let mut k = m + 1;
    let mut term = 1.0;
    for j in 1..=k {
        term *= w / j as f64;
    }
    let mut sum = 0.0;
    loop {
        sum += term;
        let ratio = w / (k + 1) as f64;
        if ratio < 0.5 && term <= 1e-17 * sum {
            return sum + term * ratio / (1.0 - ratio);
        }
        if sum == 0.0 && term == 0.0 {
            return 0.0;
        }
        term *= ratio;
        k += 1;
    }
}

/// The discretized ratio `(Tr e^{-beta H_lambda} / Tr e^{-beta H_0})_h` as a
/// sum over sets of distinct time-replicated vertices of Wick determinants.
///
/// With `m_max`, only sets of at most `m_max` vertices are summed and the
/// omitted orders are bounded through `|det| <= 4^n`.
pub fn discrete_partition(
    cs: &CovarianceSpec,
    grid: &TimeGrid,
    u: &InteractionCoefficients,
    lambda: Option<&LambdaCoefficients>,
    m_max: Option<usize>,
) -> Result<PartitionResult, Error> {
    let set = VertexSet::from_interaction(cs, grid, u, lambda)?;
    let g = cs.matrix(grid)?;
    let full = set.vertices.len();
    let max_m = m_max.map_or(full, |m| m.min(full));
    let by_order = vertex_sums(&g, &set, &[], &[], max_m)?;
    let tail_bound = if max_m >= full {
        0.0
    } else {
        exponential_tail(set.majorant(4.0), max_m)
    };
    Ok(PartitionResult {
        value: by_order.iter().sum(),
        by_order,
        tail_bound,
    })
}

/// `int e^{eta sum U V} dmu_{C_h}` by expanding the exponential of the interaction polynomial.
pub fn partition_via_exponential(
    cs: &CovarianceSpec,
    grid: &TimeGrid,
    u: &InteractionCoefficients,
    eta: Complex64,
) -> Result<Complex64, Error> {
    let set = VertexSet::from_interaction(cs, grid, u, None)?;
    let g = cs.matrix(grid)?;
    let w = set.polynomial()?.scale(eta);
    wick_integrate(&w.exp()?, &g)
}

fn query_blocks(cs: &CovarianceSpec, q: &CorrelationQuery, s: usize) -> (Vec<usize>, Vec<usize>) {
    let spec = &cs.lattice;
    let rows = q
        .x_hat
        .iter()
        .zip(&q.xi_hat)
        .map(|(x, p)| cs.index(spec.site_rank(x), *p, s))
        .collect();
    let cols = q
        .y_hat
        .iter()
        .zip(&q.phi_hat)
        .map(|(y, p)| cs.index(spec.site_rank(y), *p, s))
        .collect();
    (rows, cols)
}

/// Numerator, denominator and quotient of the Schwinger function as series in `eta`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchwingerSeries {
    /// `int V^{m_hat} e^{eta W} dmu` per order.
    pub numerator: EtaSeries,
    /// `int e^{eta W} dmu` per order.
    pub denominator: EtaSeries,
    /// `-(1/beta) numerator / denominator`.
    pub coefficients: EtaSeries,
    pub beta: f64,
}

impl SchwingerSeries {
    /// `S(eta)` from the full numerator and denominator polynomials.
    pub fn value(&self, eta: Complex64) -> Result<Complex64, Error> {
        let d = self.denominator.eval(eta);
        if d.norm() < 1e-12 {
            return Err(Error::Singular("Schwinger denominator"));
        }
        Ok(-self.numerator.eval(eta) / d / self.beta)
    }
}

/// Series of the Schwinger function for an arbitrary vertex set, to order `m_max`.
pub fn schwinger_series(
    cs: &CovarianceSpec,
    grid: &TimeGrid,
    set: &VertexSet,
    q: &CorrelationQuery,
    m_max: usize,
) -> Result<SchwingerSeries, Error> {
    let g = cs.matrix(grid)?;
    let h = grid.h();
    let den = vertex_sums(&g, set, &[], &[], m_max)?;
    let mut num = vec![ZERO; m_max + 1];
    for s in 0..grid.len() {
        let (rows, cols) = query_blocks(cs, q, s);
        let part = vertex_sums(&g, set, &rows, &cols, m_max)?;
        for (a, b) in num.iter_mut().zip(part) {
            *a += b * (-1.0 / h);
        }
    }
    let numerator = EtaSeries::new(num);
    let denominator = EtaSeries::new(den);
    let coefficients = numerator
        .div(&denominator)?
        .scale(Complex64::new(-1.0 / cs.params.beta, 0.0));
    Ok(SchwingerSeries {
        numerator,
        denominator,
        coefficients,
        beta: cs.params.beta,
    })
}

/// Taylor coefficients `b_0..b_{m_max}` of `S(C_h, eta)` for the interaction `u`.
pub fn schwinger_taylor(
    cs: &CovarianceSpec,
    grid: &TimeGrid,
    u: &InteractionCoefficients,
    q: &CorrelationQuery,
    m_max: usize,
) -> Result<EtaSeries, Error> {
    let set = VertexSet::from_interaction(cs, grid, u, None)?;
    Ok(schwinger_series(cs, grid, &set, q, m_max)?.coefficients)
}

/// Which on-site interaction enters the Hubbard Schwinger function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HubbardVariant {
    /// Only the site with this rank carries the interaction.
    Pinned(usize),
    /// Every site carries the interaction.
    Full,
}

/// Coefficients `c_0..c_{m_max}` of the on-site Schwinger function for the
/// observable `psibar_{x1 up} psibar_{x2 down} psi_{y2 down} psi_{y1 up}`.
pub fn hubbard_taylor(
    cs: &CovarianceSpec,
    grid: &TimeGrid,
    u: f64,
    x_hat: [Vec<i64>; 2],
    y_hat: [Vec<i64>; 2],
    variant: HubbardVariant,
    m_max: usize,
) -> Result<EtaSeries, Error> {
    let [x1, x2] = x_hat;
    let [y1, y2] = y_hat;
    let q = CorrelationQuery::new(
        vec![x1, x2],
        vec![y1, y2],
        vec![Spin::Up, Spin::Down],
        vec![Spin::Up, Spin::Down],
    )?;
    let set = match variant {
        HubbardVariant::Pinned(site) => VertexSet::hubbard_site(cs, grid, u, site)?,
        HubbardVariant::Full => VertexSet::from_interaction(
            cs,
            grid,
            &InteractionCoefficients::hubbard(cs.lattice.d, u),
            None,
        )?,
    };
    Ok(schwinger_series(cs, grid, &set, &q, m_max)?.coefficients)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannCorrelation {
    pub half_steps: usize,
    pub h: f64,
    /// `S_{X,Y}(C_h, 1) + S_{Y,X}(C_h, 1)`.
    pub value: Complex64,
    /// `(Tr e^{-beta H} / Tr e^{-beta H_0})_h`.
    pub partition: Complex64,
}

/// The correlation `<A + A^dagger>` through the Grassmann formulation, for each grid.
pub fn correlation_via_grassmann(
    cs: &CovarianceSpec,
    u: &InteractionCoefficients,
    q: &CorrelationQuery,
    grids: &[TimeGrid],
) -> Result<Vec<GrassmannCorrelation>, Error> {
    let mut out = Vec::with_capacity(grids.len());
    for grid in grids {
        let set = VertexSet::from_interaction(cs, grid, u, None)?;
        let full = set.vertices.len();
        let one = ONE;
        let a = schwinger_series(cs, grid, &set, q, full)?;
        let b = schwinger_series(cs, grid, &set, &q.swapped(), full)?;
        out.push(GrassmannCorrelation {
            half_steps: grid.half_steps,
            h: grid.h(),
            value: a.value(one)? + b.value(one)?,
            partition: a.denominator.eval(one),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::model::ModelParams;

    fn test_matrix(n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |i, j| {
            let x = (i * 7 + j * 3) as f64;
            Complex64::new((x * 0.37).sin() * 0.4, (x * 0.11).cos() * 0.3)
                + if i == j { ONE } else { ZERO }
        })
    }

    #[test]
    fn merge_signs() {
        assert_eq!(merge_sign(0b01, 0b10), 1.0);
        assert_eq!(merge_sign(0b10, 0b01), -1.0);
        assert_eq!(merge_sign(0b110, 0b001), 1.0);
    }

    #[test]
    fn word_antisymmetry() {
        let a = GrassmannPolynomial::from_word(3, ONE, &[Generator::Psi(1), Generator::Bar(2)])
            .unwrap();
        let b = GrassmannPolynomial::from_word(3, ONE, &[Generator::Bar(2), Generator::Psi(1)])
            .unwrap();
        assert_eq!(a.add(&b).len(), 0);
        let z = GrassmannPolynomial::from_word(3, ONE, &[Generator::Psi(1), Generator::Psi(1)])
            .unwrap();
        assert!(z.is_empty());
    }

    #[test]
    fn single_pair_and_normalization() {
        let g = test_matrix(3);
        let one = GrassmannPolynomial::one(3);
        assert!((berezin_gaussian(&one, &g).unwrap() - ONE).norm() < 1e-13);
        for j in 0..3 {
            for p in 0..3 {
                let f =
                    GrassmannPolynomial::from_word(3, ONE, &[Generator::Bar(j), Generator::Psi(p)])
                        .unwrap();
                let b = berezin_gaussian(&f, &g).unwrap();
                assert!((b - g[(j, p)]).norm() < 1e-13, "{j} {p}");
                assert!((wick_integrate(&f, &g).unwrap() - g[(j, p)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn paired_ordering_matches_berezin() {
        let g = test_matrix(4);
        let f = GrassmannPolynomial::from_word(
            4,
            ONE,
            &[
                Generator::Bar(3),
                Generator::Bar(0),
                Generator::Psi(2),
                Generator::Psi(1),
            ],
        )
        .unwrap();
        let want = wick_expectation(&[0, 3], &[2, 1], &g).unwrap();
        assert!((berezin_gaussian(&f, &g).unwrap() - want).norm() < 1e-12);
        assert!((wick_integrate(&f, &g).unwrap() - want).norm() < 1e-12);
    }

    #[test]
    fn vertex_products_are_concatenated_determinants() {
        let g = test_matrix(6);
        let v1 = GrassmannPolynomial::vertex(6, ONE, &[0, 4], &[1, 5]).unwrap();
        let v2 = GrassmannPolynomial::vertex(6, ONE, &[2], &[3]).unwrap();
        let v3 = GrassmannPolynomial::vertex(6, ONE, &[1, 5, 3], &[0, 2, 4]).unwrap();
        let want12 = sub_det(&g, &[0, 4, 2], &[1, 5, 3]);
        assert!((berezin_gaussian(&v1.mul(&v2), &g).unwrap() - want12).norm() < 1e-12);
        let want23 = sub_det(&g, &[2, 1, 5, 3], &[3, 0, 2, 4]);
        assert!((berezin_gaussian(&v2.mul(&v3), &g).unwrap() - want23).norm() < 1e-12);
        assert!((berezin_gaussian(&v3.mul(&v2), &g).unwrap() - want23).norm() < 1e-12);
    }

    #[test]
    fn wick_edge_cases() {
        let g = test_matrix(3);
        assert_eq!(wick_expectation(&[], &[], &g).unwrap(), ONE);
        assert_eq!(wick_expectation(&[0, 1], &[2, 2], &g).unwrap().norm(), 0.0);
        assert_eq!(wick_expectation(&[0], &[], &g).unwrap(), ZERO);
        assert!(wick_expectation(&[3], &[0], &g).is_err());
    }

    #[test]
    fn series_division() {
        let num = EtaSeries::new(vec![ONE, ONE]);
        let den = EtaSeries::new(vec![ONE, -ONE, ZERO]);
        let q = num.div(&den).unwrap();
        assert_eq!(q.coefficients, vec![ONE, Complex64::new(2.0, 0.0)]);
        assert!((num.eval(Complex64::new(2.0, 0.0)) - Complex64::new(3.0, 0.0)).norm() == 0.0);
    }

    #[test]
    fn tail_of_exponential() {
        let t = exponential_tail(1.0, 0);
        assert!((t - (core::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!(exponential_tail(0.0, 3) == 0.0);
    }

    fn atom(u: f64, half: usize) -> (CovarianceSpec, TimeGrid, InteractionCoefficients) {
        let spec = LatticeSpec::new(1, 1).unwrap();
        let p = ModelParams::new(1.0, 0.0, 0.2, 1.0);
        (
            CovarianceSpec::unshifted(spec, p).unwrap(),
            TimeGrid::new(1.0, half).unwrap(),
            InteractionCoefficients::hubbard(1, u),
        )
    }

    #[test]
    fn free_partition_is_one() {
        let (cs, grid, _) = atom(0.0, 1);
        let r =
            discrete_partition(&cs, &grid, &InteractionCoefficients::new(1), None, None).unwrap();
        assert_eq!(r.value, ONE);
        assert_eq!(r.tail_bound, 0.0);
    }

    #[test]
    fn partition_routes_agree_on_atom() {
        let (cs, grid, u) = atom(0.2, 1);
        let a = discrete_partition(&cs, &grid, &u, None, None)
            .unwrap()
            .value;
        let b = partition_via_exponential(&cs, &grid, &u, ONE).unwrap();
        assert!((a - b).norm() < 1e-13);
        let g = cs.matrix(&grid).unwrap();
        let w = VertexSet::from_interaction(&cs, &grid, &u, None)
            .unwrap()
            .polynomial()
            .unwrap();
        let c = berezin_gaussian(&w.exp().unwrap(), &g).unwrap();
        assert!((a - c).norm() < 1e-12);
        assert_eq!(
            partition_via_exponential(&cs, &grid, &u, ZERO).unwrap(),
            ONE
        );
    }

    #[test]
    fn truncated_partition_within_tail() {
        let (cs, grid, u) = atom(0.5, 2);
        let full = discrete_partition(&cs, &grid, &u, None, None)
            .unwrap()
            .value;
        let t = discrete_partition(&cs, &grid, &u, None, Some(1)).unwrap();
        assert!((full - t.value).norm() <= t.tail_bound);
        assert!(t.tail_bound > 0.0);
    }

    #[test]
    fn b0_is_covariance() {
        let spec = LatticeSpec::new(1, 2).unwrap();
        let p = ModelParams::new(1.0, 0.0, 0.2, 1.0);
        let cs = CovarianceSpec::unshifted(spec, p).unwrap();
        let grid = TimeGrid::new(1.0, 1).unwrap();
        let q = CorrelationQuery::new(vec![vec![0]], vec![vec![1]], vec![Spin::Up], vec![Spin::Up])
            .unwrap();
        let b = schwinger_taylor(&cs, &grid, &InteractionCoefficients::new(1), &q, 2).unwrap();
        let g = cs.matrix(&grid).unwrap();
        assert!(
            (b.coefficients[0] - g[(cs.index(0, Spin::Up, 0), cs.index(1, Spin::Up, 0))]).norm()
                < 1e-14
        );
        assert_eq!(b.coefficients[1], ZERO);
        assert_eq!(b.coefficients[2], ZERO);
    }

    #[test]
    fn atom_correlation_approaches_trace() {
        let (cs, _, u) = atom(0.3, 1);
        let spec = cs.lattice;
        let q = CorrelationQuery::new(vec![vec![0]], vec![vec![0]], vec![Spin::Up], vec![Spin::Up])
            .unwrap();
        let exact = crate::fock::correlation(&spec, &cs.params, &u, &q)
            .unwrap()
            .re;
        let grids: Vec<TimeGrid> = [1, 2, 4]
            .iter()
            .map(|&k| TimeGrid::new(1.0, k).unwrap())
            .collect();
        let vals = correlation_via_grassmann(&cs, &u, &q, &grids).unwrap();
        let errs: Vec<f64> = vals.iter().map(|v| (v.value.re - exact).abs()).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2]);
    }
}
