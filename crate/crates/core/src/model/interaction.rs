//! Interaction coefficients `U_l`, their periodic restriction and norms.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::covariance::{decay_function, l1_kernel};
use crate::lattice::{periodic_reduce, LatticeSpec, Spin};
use crate::model::ModelParams;
use crate::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pauli matrices `P^(1), P^(2), P^(3)` indexed `[l][xi][phi]` with `Up = 0`.
pub const PAULI: [[[Complex64; 2]; 2]; 3] = [
    [[ZERO, ONE], [ONE, ZERO]],
    [[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]],
    [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]],
];

/// Argument of `U_l`: sites `X` and the creation/annihilation spins.
///
/// For `l >= 2` the last site is the anchor and must be the origin.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InteractionKey {
    pub x: Vec<Vec<i64>>,
    pub xi: Vec<Spin>,
    pub phi: Vec<Spin>,
}

impl InteractionKey {
    pub fn new(x: Vec<Vec<i64>>, xi: Vec<Spin>, phi: Vec<Spin>) -> Self {
        InteractionKey { x, xi, phi }
    }

    pub fn order(&self) -> usize {
        self.xi.len()
    }

    fn conjugate_partner(&self) -> InteractionKey {
        InteractionKey {
            x: self.x.clone(),
            xi: self.phi.clone(),
            phi: self.xi.clone(),
        }
    }
}

/// One summand of `V` on a finite lattice: sites as ranks, in the order of
/// `psi*_{x1 xi1} .. psi*_{xl xil} psi_{xl phil} .. psi_{x1 phi1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coef: Complex64,
    pub sites: Vec<usize>,
    pub xi: Vec<Spin>,
    pub phi: Vec<Spin>,
}

/// Sparse multi-body coefficients `U_1, .., U_n`.
///
/// Translation invariance for `l >= 2` is structural: only anchored arguments
/// are stored. One-body terms are site dependent; a separate translation
/// invariant one-body table applies to every site.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InteractionCoefficients {
    d: usize,
    orders: BTreeMap<usize, BTreeMap<InteractionKey, Complex64>>,
    uniform_one_body: BTreeMap<(Spin, Spin), Complex64>,
}

/// Entry of a density-density table `U^dd_l(X, Xi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityEntry {
    pub x: Vec<Vec<i64>>,
    pub spins: Vec<Spin>,
    pub value: f64,
}

impl InteractionCoefficients {
    pub fn new(d: usize) -> Self {
        InteractionCoefficients {
            d,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Highest order with a stored coefficient.
    pub fn max_order(&self) -> usize {
        let top = self.orders.keys().next_back().copied().unwrap_or(0);
        if top == 0 && !self.uniform_one_body.is_empty() {
            1
        } else {
            top.max(if self.uniform_one_body.is_empty() {
                0
            } else {
                1
            })
        }
    }

    pub fn is_zero(&self) -> bool {
        self.orders.values().all(|m| m.values().all(|v| *v == ZERO))
            && self.uniform_one_body.values().all(|v| *v == ZERO)
    }

    /// Adds `value` to the coefficient at `key`. Non-anchored keys of order
    /// `l >= 2` are translated so that `x_l = 0`.
    pub fn add(&mut self, key: InteractionKey, value: Complex64) -> Result<(), Error> {
        let l = key.order();
        if l == 0 || key.x.len() != l || key.phi.len() != l {
            return Err(Error::InvalidInteraction(
                "X, Xi and Phi must have equal positive length",
            ));
        }
        if key.x.iter().any(|v| v.len() != self.d) {
            return Err(Error::InvalidInteraction("site vector has wrong dimension"));
        }
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::InvalidInteraction("coefficient is not finite"));
        }
        let key = if l >= 2 {
            let anchor = key.x[l - 1].clone();
            let x = key
                .x
                .iter()
                .map(|v| v.iter().zip(&anchor).map(|(a, b)| a - b).collect())
                .collect();
            InteractionKey { x, ..key }
        } else {
            key
        };
        *self.orders.entry(l).or_default().entry(key).or_insert(ZERO) += value;
        Ok(())
    }

    /// Adds a one-body term `c(xi, phi)` present at every site.
    pub fn add_uniform_one_body(&mut self, xi: Spin, phi: Spin, value: Complex64) {
        *self.uniform_one_body.entry((xi, phi)).or_insert(ZERO) += value;
    }

    pub fn get(&self, key: &InteractionKey) -> Complex64 {
        self.orders
            .get(&key.order())
            .and_then(|m| m.get(key))
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn entries(&self, l: usize) -> impl Iterator<Item = (&InteractionKey, &Complex64)> {
        self.orders.get(&l).into_iter().flat_map(|m| m.iter())
    }

    pub fn uniform_one_body(&self) -> impl Iterator<Item = (&(Spin, Spin), &Complex64)> {
        self.uniform_one_body.iter()
    }

    /// Checks `conj U_l(X, Xi, Phi) = U_l(X, Phi, Xi)` exactly; the error names the first offending entry.
    pub fn validate(&self) -> Result<(), Error> {
        for (l, m) in &self.orders {
            for (k, v) in m {
                let partner = m.get(&k.conjugate_partner()).copied().unwrap_or(ZERO);
                if partner != v.conj() {
                    return Err(Error::NotHermitian {
                        order: *l,
                        key: k.clone(),
                        value: *v,
                        partner,
                    });
                }
            }
        }
        for (&(a, b), v) in &self.uniform_one_body {
            let partner = self.uniform_one_body.get(&(b, a)).copied().unwrap_or(ZERO);
            if partner != v.conj() {
                return Err(Error::NotHermitian {
                    order: 1,
                    key: InteractionKey::new(vec![], vec![a], vec![b]),
                    value: *v,
                    partner,
                });
            }
        }
        Ok(())
    }

    /// The periodic restriction `U_{L,l}`: stored sites are reduced into the
    /// centered window. When two entries reduce to the same argument the one
    /// already inside the window is kept.
    pub fn restrict(&self, spec: &LatticeSpec) -> InteractionCoefficients {
        let mut out = InteractionCoefficients::new(self.d);
        out.uniform_one_body = self.uniform_one_body.clone();
        for (l, m) in &self.orders {
            let dst = out.orders.entry(*l).or_default();
            for (k, v) in m {
                let x: Vec<Vec<i64>> = k.x.iter().map(|s| periodic_reduce(s, spec.l)).collect();
                let in_window = x == k.x;
                let rk = InteractionKey {
                    x,
                    xi: k.xi.clone(),
                    phi: k.phi.clone(),
                };
                if in_window || !dst.contains_key(&rk) {
                    dst.insert(rk, *v);
                }
            }
        }
        out
    }

    /// All summands of `V` on the lattice `spec`, built from the restriction.
    pub fn terms(&self, spec: &LatticeSpec) -> Vec<Term> {
        let r = self.restrict(spec);
        let mut out = Vec::new();
        for x in 0..spec.site_count() {
            for (&(a, b), v) in &r.uniform_one_body {
                if *v != ZERO {
                    out.push(Term {
                        coef: *v,
                        sites: vec![x],
                        xi: vec![a],
                        phi: vec![b],
                    });
                }
            }
        }
        for (l, m) in &r.orders {
            for (k, v) in m {
                if *v == ZERO {
                    continue;
                }
                if *l == 1 {
                    out.push(Term {
                        coef: *v,
                        sites: vec![spec.site_rank(&k.x[0])],
                        xi: k.xi.clone(),
                        phi: k.phi.clone(),
                    });
                    continue;
                }
                for anchor in 0..spec.site_count() {
                    let ca = spec.site_coords(anchor);
                    let sites =
                        k.x.iter()
                            .map(|rel| {
                                let s: Vec<i64> = rel.iter().zip(&ca).map(|(p, q)| p + q).collect();
                                spec.site_rank(&s)
                            })
                            .collect();
                    out.push(Term {
                        coef: *v,
                        sites,
                        xi: k.xi.clone(),
                        phi: k.phi.clone(),
                    });
                }
            }
        }
        out
    }

    /// `||U_l||_l`, or `||U_{L,l}||_{L,l}` when a lattice is given.
    ///
    /// For `l >= 2` this is the printed formula: max over the pinned index `j`
    /// and its spin `xi_j`, summed over the free sites `x_1..x_{l-1}` with the
    /// anchor at the origin, all other spins and all of `Phi`.
    pub fn norm(&self, l: usize, finite: Option<&LatticeSpec>) -> f64 {
        let owned;
        let src = match finite {
            Some(spec) => {
                owned = self.restrict(spec);
                &owned
            }
            None => self,
        };
        if l == 1 {
            let mut per_site: BTreeMap<(Vec<i64>, Spin), f64> = BTreeMap::new();
            let uni = |xi: Spin, phi: Spin| {
                src.uniform_one_body
                    .get(&(xi, phi))
                    .copied()
                    .unwrap_or(ZERO)
            };
            let mut site_values: BTreeMap<Vec<i64>, [[Complex64; 2]; 2]> = BTreeMap::new();
            for (k, v) in src.entries(1) {
                let e = site_values.entry(k.x[0].clone()).or_insert([[ZERO; 2]; 2]);
                e[k.xi[0].index()][k.phi[0].index()] += *v;
            }
            for (x, tab) in &site_values {
                for xi in Spin::BOTH {
                    let s: f64 = Spin::BOTH
                        .iter()
                        .map(|&phi| (tab[xi.index()][phi.index()] + uni(xi, phi)).norm())
                        .sum();
                    per_site.insert((x.clone(), xi), s);
                }
            }
            let uniform_only = Spin::BOTH
                .iter()
                .map(|&xi| {
                    Spin::BOTH
                        .iter()
                        .map(|&phi| uni(xi, phi).norm())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            return per_site.values().copied().fold(uniform_only, f64::max);
        }
        let mut best: f64 = 0.0;
        for j in 0..l {
            for s in Spin::BOTH {
                let total: f64 = src
                    .entries(l)
                    .filter(|(k, _)| k.xi[j] == s)
                    .map(|(_, v)| v.norm())
                    .sum();
                best = best.max(total);
            }
        }
        best
    }

    /// On-site coupling `U` if this is exactly `U sum_x n_up n_down` in the canonical encoding.
    pub fn hubbard_coupling(&self) -> Option<f64> {
        if !self.uniform_one_body.is_empty() {
            return None;
        }
        let mut found = None;
        for (l, m) in &self.orders {
            for (k, v) in m {
                if *v == ZERO {
                    continue;
                }
                let origin = vec![0i64; self.d];
                let canonical = *l == 2
                    && k.x == vec![origin.clone(), origin]
                    && k.xi == [Spin::Up, Spin::Down]
                    && k.phi == [Spin::Up, Spin::Down]
                    && v.im == 0.0;
                if !canonical || found.is_some() {
                    return None;
                }
                found = Some(v.re);
            }
        }
        Some(found.unwrap_or(0.0))
    }

    /// `U sum_x psi*_{x up} psi*_{x down} psi_{x down} psi_{x up}`.
    pub fn hubbard(d: usize, u: f64) -> Self {
        let mut c = InteractionCoefficients::new(d);
        let o = vec![0i64; d];
        c.add(
            InteractionKey::new(
                vec![o.clone(), o],
                vec![Spin::Up, Spin::Down],
                vec![Spin::Up, Spin::Down],
            ),
            Complex64::new(u, 0.0),
        )
        .expect("well-formed key");
        c
    }

    /// Density-density interaction `sum U^dd_l(X, Xi) prod_j n_{x_j xi_j}`.
    pub fn density_density(d: usize, table: &[DensityEntry]) -> Result<Self, Error> {
        let mut c = InteractionCoefficients::new(d);
        for e in table {
            if !e.value.is_finite() {
                return Err(Error::InvalidInteraction(
                    "density coefficient is not finite",
                ));
            }
            let l = e.spins.len();
            for a in 0..l {
                for b in (a + 1)..l {
                    if e.x[a] == e.x[b] && e.spins[a] == e.spins[b] {
                        return Err(Error::InvalidInteraction(
                            "density entry repeats a (site, spin) pair",
                        ));
                    }
                }
            }
            c.add(
                InteractionKey::new(e.x.clone(), e.spins.clone(), e.spins.clone()),
                Complex64::new(e.value, 0.0),
            )?;
        }
        Ok(c)
    }

    /// Coupling `sum_x <B_x, S_x>` to a local field given on finitely many sites.
    pub fn spin_field(d: usize, field: &[(Vec<i64>, [f64; 3])]) -> Result<Self, Error> {
        let mut c = InteractionCoefficients::new(d);
        for (x, b) in field {
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInteraction("field component is not finite"));
            }
            for xi in Spin::BOTH {
                for phi in Spin::BOTH {
                    let mut v = ZERO;
                    for (l, bl) in b.iter().enumerate() {
                        v += 0.5 * bl * PAULI[l][xi.index()][phi.index()];
                    }
                    if v != ZERO {
                        c.add(InteractionKey::new(vec![x.clone()], vec![xi], vec![phi]), v)?;
                    }
                }
            }
        }
        Ok(c)
    }

    /// Spin-spin interaction `sum_{x,y} w_L(x - y) <S_x, S_y>` for a finitely supported `w`.
    pub fn spin_spin(d: usize, w: &[(Vec<i64>, f64)]) -> Result<Self, Error> {
        let mut c = InteractionCoefficients::new(d);
        let origin = vec![0i64; d];
        for (r, wr) in w {
            if !wr.is_finite() {
                return Err(Error::InvalidInteraction(
                    "spin-spin coupling is not finite",
                ));
            }
            if r.len() != d {
                return Err(Error::InvalidInteraction("site vector has wrong dimension"));
            }
            if *r == origin {
                for xi in Spin::BOTH {
                    for phi in Spin::BOTH {
                        let mut v = ZERO;
                        for p in &PAULI {
                            for tau in 0..2 {
                                v += p[xi.index()][tau] * p[tau][phi.index()];
                            }
                        }
                        v *= wr / 4.0;
                        if v != ZERO {
                            c.add_uniform_one_body(xi, phi, v);
                        }
                    }
                }
            }
            for x1 in Spin::BOTH {
                for x2 in Spin::BOTH {
                    for p1 in Spin::BOTH {
                        for p2 in Spin::BOTH {
                            let mut v = ZERO;
                            for p in &PAULI {
                                v += p[x1.index()][p1.index()] * p[x2.index()][p2.index()];
                            }
                            v *= wr / 4.0;
                            if v != ZERO {
                                c.add(
                                    InteractionKey::new(
                                        vec![r.clone(), origin.clone()],
                                        vec![x1, x2],
                                        vec![p1, p2],
                                    ),
                                    v,
                                )?;
                            }
                        }
                    }
                }
            }
        }
        Ok(c)
    }
}

/// Key of a source coefficient `lambda(X, Y, Xi, Phi)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LambdaKey {
    pub x: Vec<Vec<i64>>,
    pub y: Vec<Vec<i64>>,
    pub xi: Vec<Spin>,
    pub phi: Vec<Spin>,
}

/// Real source parameters of order `m_hat`. Each entry `lambda(X, Y, Xi, Phi)`
/// enters the Hamiltonian through `U_{lambda, m_hat}(X, Y, Xi, Phi)` and
/// `U_{lambda, m_hat}(Y, X, Phi, Xi)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LambdaCoefficients {
    pub m_hat: usize,
    pub entries: BTreeMap<LambdaKey, f64>,
}

impl LambdaCoefficients {
    pub fn new(m_hat: usize) -> Self {
        LambdaCoefficients {
            m_hat,
            entries: BTreeMap::new(),
        }
    }

    pub fn single(key: LambdaKey, value: f64) -> Result<Self, Error> {
        let mut l = LambdaCoefficients::new(key.xi.len());
        l.set(key, value)?;
        Ok(l)
    }

    pub fn set(&mut self, key: LambdaKey, value: f64) -> Result<(), Error> {
        let m = self.m_hat;
        if key.x.len() != m || key.y.len() != m || key.xi.len() != m || key.phi.len() != m {
            return Err(Error::InvalidInteraction(
                "lambda key lengths must equal m_hat",
            ));
        }
        self.entries.insert(key, value);
        Ok(())
    }

    /// Creation/annihilation summands `(coef, X, Xi, Y, Phi)` of `V_lambda - V`,
    /// with sites reduced to ranks on `spec`.
    pub fn terms(
        &self,
        spec: &LatticeSpec,
    ) -> Vec<(Complex64, Vec<usize>, Vec<Spin>, Vec<usize>, Vec<Spin>)> {
        let mut out = Vec::new();
        for (k, v) in &self.entries {
            if *v == 0.0 {
                continue;
            }
            let xs: Vec<usize> = k.x.iter().map(|s| spec.site_rank(s)).collect();
            let ys: Vec<usize> = k.y.iter().map(|s| spec.site_rank(s)).collect();
            let c = Complex64::new(*v, 0.0);
            out.push((c, xs.clone(), k.xi.clone(), ys.clone(), k.phi.clone()));
            out.push((c, ys, k.phi.clone(), xs, k.xi.clone()));
        }
        out
    }
}

/// Which smallness hypothesis to test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SmallnessVariant {
    /// `sum_l l 16^l ||U_l||_l < beta^{-1} K^{-d} R`.
    General { r: f64 },
    /// `|U| <= (108 beta)^{-1} K^{-d}` for the on-site interaction.
    Hubbard,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallnessReport {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// Evaluates the smallness condition of the chosen decay theorem.
///
/// `K = (F^{1/(2 e pi d)} + 1) / (F^{1/(2 e pi d)} - 1)` with `F = F(pi / (2 beta))`.
pub fn check_smallness(
    u: &InteractionCoefficients,
    params: &ModelParams,
    spec: &LatticeSpec,
    variant: SmallnessVariant,
) -> Result<SmallnessReport, Error> {
    params.validate(spec.d)?;
    let kernel = l1_kernel(params, spec.d)?;
    let _ = decay_function(0.0, params, spec.d)?;
    match variant {
        SmallnessVariant::General { r } => {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidParams("R must lie in (0, 1)"));
            }
            let mut lhs = 0.0;
            for l in 1..=u.max_order() {
                lhs += l as f64 * 16f64.powi(l as i32) * u.norm(l, None);
            }
            let rhs = r / (params.beta * kernel.powi(spec.d as i32));
            Ok(SmallnessReport {
                lhs,
                rhs,
                satisfied: lhs < rhs,
            })
        }
        SmallnessVariant::Hubbard => {
            let coupling = u.hubbard_coupling().ok_or(Error::InvalidInteraction(
                "interaction is not the on-site Hubbard term",
            ))?;
            let lhs = coupling.abs();
            let rhs = 1.0 / (108.0 * params.beta * kernel.powi(spec.d as i32));
            Ok(SmallnessReport {
                lhs,
                rhs,
                satisfied: lhs <= rhs,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key1(x: i64, a: Spin, b: Spin) -> InteractionKey {
        InteractionKey::new(vec![vec![x]], vec![a], vec![b])
    }

    #[test]
    fn hermiticity_validation() {
        let mut c = InteractionCoefficients::new(1);
        c.add(key1(0, Spin::Up, Spin::Down), Complex64::new(0.0, 1.0))
            .unwrap();
        assert!(matches!(c.validate(), Err(Error::NotHermitian { .. })));
        c.add(key1(0, Spin::Down, Spin::Up), Complex64::new(0.0, -1.0))
            .unwrap();
        assert!(c.validate().is_ok());
        assert!(InteractionCoefficients::hubbard(2, 0.7).validate().is_ok());
        assert!(
            InteractionCoefficients::spin_spin(1, &[(vec![0], 1.0), (vec![1], 0.3)])
                .unwrap()
                .validate()
                .is_ok()
        );
        assert!(
            InteractionCoefficients::spin_field(1, &[(vec![0], [0.1, 0.2, 0.3])])
                .unwrap()
                .validate()
                .is_ok()
        );
    }

    #[test]
    fn anchoring_and_restriction() {
        let mut c = InteractionCoefficients::new(1);
        c.add(
            InteractionKey::new(
                vec![vec![7], vec![2]],
                vec![Spin::Up, Spin::Up],
                vec![Spin::Up, Spin::Up],
            ),
            ONE,
        )
        .unwrap();
        let k = InteractionKey::new(
            vec![vec![5], vec![0]],
            vec![Spin::Up, Spin::Up],
            vec![Spin::Up, Spin::Up],
        );
        assert_eq!(c.get(&k), ONE);
        let spec = LatticeSpec::new(1, 4).unwrap();
        let r = c.restrict(&spec);
        let k1 = InteractionKey::new(
            vec![vec![1], vec![0]],
            vec![Spin::Up, Spin::Up],
            vec![Spin::Up, Spin::Up],
        );
        assert_eq!(r.get(&k1), ONE);

        let mut c = InteractionCoefficients::new(1);
        c.add(key1(3, Spin::Up, Spin::Up), ONE).unwrap();
        assert_eq!(c.restrict(&spec).get(&key1(-1, Spin::Up, Spin::Up)), ONE);

        let h = InteractionCoefficients::hubbard(1, 0.4);
        for l in 1..6 {
            let s = LatticeSpec::new(1, l).unwrap();
            assert_eq!(h.restrict(&s), h);
        }
    }

    #[test]
    fn norms() {
        let mut c = InteractionCoefficients::new(1);
        c.add(key1(0, Spin::Up, Spin::Up), Complex64::new(-0.3, 0.0))
            .unwrap();
        c.add(key1(0, Spin::Down, Spin::Down), Complex64::new(-0.3, 0.0))
            .unwrap();
        assert!((c.norm(1, None) - 0.3).abs() < 1e-15);
        assert_eq!(InteractionCoefficients::new(1).norm(2, None), 0.0);
        let h = InteractionCoefficients::hubbard(1, -0.8);
        assert!((h.norm(2, None) - 0.8).abs() < 1e-15);
        assert!(h.norm(2, None) >= 0.4);
    }

    #[test]
    fn spin_examples() {
        let f = InteractionCoefficients::spin_field(1, &[(vec![0], [0.0, 0.0, 0.6])]).unwrap();
        assert_eq!(
            f.get(&key1(0, Spin::Up, Spin::Up)),
            Complex64::new(0.3, 0.0)
        );
        assert_eq!(
            f.get(&key1(0, Spin::Down, Spin::Down)),
            Complex64::new(-0.3, 0.0)
        );
        assert_eq!(f.get(&key1(0, Spin::Up, Spin::Down)), ZERO);

        let s = InteractionCoefficients::spin_spin(1, &[(vec![0], 2.0)]).unwrap();
        let diag: Vec<_> = s.uniform_one_body().collect();
        assert_eq!(diag.len(), 2);
        for (_, v) in diag {
            assert_eq!(*v, Complex64::new(1.5, 0.0));
        }
        let k = InteractionKey::new(
            vec![vec![0], vec![0]],
            vec![Spin::Up, Spin::Down],
            vec![Spin::Down, Spin::Up],
        );
        assert_eq!(s.get(&k), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn density_rejects_repeated_pair() {
        let bad = DensityEntry {
            x: vec![vec![0], vec![0]],
            spins: vec![Spin::Up, Spin::Up],
            value: 1.0,
        };
        assert!(InteractionCoefficients::density_density(1, &[bad]).is_err());
    }

    #[test]
    fn terms_cover_lattice() {
        let spec = LatticeSpec::new(1, 3).unwrap();
        let h = InteractionCoefficients::hubbard(1, 1.0);
        let t = h.terms(&spec);
        assert_eq!(t.len(), 3);
        assert_eq!(t[2].sites, vec![2, 2]);
    }
}
