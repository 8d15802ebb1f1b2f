//! Anti-symmetrized form of an order-`l` coupling on a finite lattice.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::lattice::{LatticeSpec, Spin};
use crate::model::InteractionCoefficients;
use crate::Error;

/// A coupling `g(X, Xi, Phi)` over `Gamma^l x {up,down}^l x {up,down}^l`,
/// multiplying `psi*_{x1 xi1} .. psi*_{xl xil} psi_{xl phil} .. psi_{x1 phi1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTable {
    pub spec: LatticeSpec,
    pub order: usize,
    pub entries: BTreeMap<(Vec<usize>, Vec<Spin>, Vec<Spin>), Complex64>,
}

impl CouplingTable {
    pub fn new(spec: LatticeSpec, order: usize) -> Self {
        CouplingTable {
            spec,
            order,
            entries: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, sites: Vec<usize>, xi: Vec<Spin>, phi: Vec<Spin>, v: Complex64) {
        debug_assert!(
            sites.len() == self.order && xi.len() == self.order && phi.len() == self.order
        );
        *self
            .entries
            .entry((sites, xi, phi))
            .or_insert(Complex64::new(0.0, 0.0)) += v;
    }

    /// The order-`l` part of `V` as a table over the whole lattice.
    pub fn from_interaction(u: &InteractionCoefficients, spec: &LatticeSpec, order: usize) -> Self {
        let mut g = CouplingTable::new(*spec, order);
        for t in u.terms(spec) {
            if t.sites.len() == order {
                g.add(t.sites, t.xi, t.phi, t.coef);
            }
        }
        g
    }

    /// Normal-ordered canonical form of `sum g psi*..psi* psi_{xl}..psi_{x1}`.
    pub fn canonical(&self) -> BTreeMap<(Vec<usize>, Vec<usize>), Complex64> {
        let mut out = BTreeMap::new();
        for ((sites, xi, phi), v) in &self.entries {
            let a: Vec<usize> = sites
                .iter()
                .zip(xi)
                .map(|(s, x)| self.spec.mode(*s, *x))
                .collect();
            let b: Vec<usize> = sites
                .iter()
                .zip(phi)
                .rev()
                .map(|(s, p)| self.spec.mode(*s, *p))
                .collect();
            accumulate_canonical(&mut out, &a, &b, *v);
        }
        out
    }
}

/// Coefficients `f(A, B)` over modes, multiplying `psi*_{a1}..psi*_{al} psi_{b1}..psi_{bl}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntisymmetricCoefficients {
    pub order: usize,
    pub entries: BTreeMap<(Vec<usize>, Vec<usize>), Complex64>,
}

impl AntisymmetricCoefficients {
    pub fn get(&self, a: &[usize], b: &[usize]) -> Complex64 {
        self.entries
            .get(&(a.to_vec(), b.to_vec()))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn canonical(&self) -> BTreeMap<(Vec<usize>, Vec<usize>), Complex64> {
        let mut out = BTreeMap::new();
        for ((a, b), v) in &self.entries {
            accumulate_canonical(&mut out, a, b, *v);
        }
        out
    }

    /// Max deviation from `f(sigma A, rho B) = sgn(sigma) sgn(rho) f(A, B)`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let perms = permutations(self.order);
        let mut worst: f64 = 0.0;
        for ((a, b), v) in &self.entries {
            for (p, sp) in &perms {
                for (q, sq) in &perms {
                    let pa: Vec<usize> = p.iter().map(|&i| a[i]).collect();
                    let qb: Vec<usize> = q.iter().map(|&i| b[i]).collect();
                    let w = self.get(&pa, &qb);
                    worst = worst.max((w - *v * (sp * sq)).norm());
                }
            }
        }
        worst
    }
}

fn accumulate_canonical(
    out: &mut BTreeMap<(Vec<usize>, Vec<usize>), Complex64>,
    a: &[usize],
    b: &[usize],
    v: Complex64,
) {
    if v == Complex64::new(0.0, 0.0) {
        return;
    }
    let (sa, ka) = match sort_sign(a) {
        Some(x) => x,
        None => return,
    };
    let (sb, kb) = match sort_sign(b) {
        Some(x) => x,
        None => return,
    };
    *out.entry((ka, kb)).or_insert(Complex64::new(0.0, 0.0)) += v * (sa * sb);
}

/// Sorts ascending and returns the permutation sign; `None` if an index repeats.
fn sort_sign(v: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mut w = v.to_vec();
    let mut sign = 1.0;
    for i in 1..w.len() {
        let mut j = i;
        while j > 0 && w[j - 1] > w[j] {
            w.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if w.windows(2).any(|p| p[0] == p[1]) {
        return None;
    }
    Some((sign, w))
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for k in 0..n {
        let mut next = Vec::new();
        for (p, s) in &out {
            for pos in 0..=k {
                let mut q: Vec<usize> = p.clone();
                q.insert(pos, k);
                let sign = if (k - pos) % 2 == 0 { *s } else { -*s };
                next.push((q, sign));
            }
        }
        out = next;
    }
    out
}

/// Anti-symmetrizes `u(X_Xi, Y_Phi) = g(X, Xi, Phi) delta_{X,Y} (-1)^{l(l-1)/2}`
/// over permutations of creation and annihilation modes.
pub fn antisymmetrize(g: &CouplingTable) -> Result<AntisymmetricCoefficients, Error> {
    let l = g.order;
    if l > g.spec.mode_count() {
        return Err(Error::InvalidInteraction(
            "order exceeds the number of modes",
        ));
    }
    let perms = permutations(l);
    let fact = perms.len() as f64;
    let sign0 = if (l * (l.saturating_sub(1)) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let mut entries: BTreeMap<(Vec<usize>, Vec<usize>), Complex64> = BTreeMap::new();
    for ((sites, xi, phi), v) in &g.entries {
        let a: Vec<usize> = sites
            .iter()
            .zip(xi)
            .map(|(s, x)| g.spec.mode(*s, *x))
            .collect();
        let b: Vec<usize> = sites
            .iter()
            .zip(phi)
            .map(|(s, p)| g.spec.mode(*s, *p))
            .collect();
        let val = *v * (sign0 / (fact * fact));
        for (p, sp) in &perms {
            let pa: Vec<usize> = p.iter().map(|&i| a[i]).collect();
            for (q, sq) in &perms {
                let qb: Vec<usize> = q.iter().map(|&i| b[i]).collect();
                *entries
                    .entry((pa.clone(), qb))
                    .or_insert(Complex64::new(0.0, 0.0)) += val * (sp * sq);
            }
        }
    }
    entries.retain(|_, v| v.norm() != 0.0);
    Ok(AntisymmetricCoefficients { order: l, entries })
}

/// `max{ max_{a1} sum_{a2..} sum_B |f|, max_{b1} sum_A sum_{b2..} |f| }`.
pub fn antisymmetric_norm(f: &AntisymmetricCoefficients) -> f64 {
    let mut rows: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, f64> = BTreeMap::new();
    for ((a, b), v) in &f.entries {
        if a.is_empty() {
            continue;
        }
        *rows.entry(a[0]).or_insert(0.0) += v.norm();
        *cols.entry(b[0]).or_insert(0.0) += v.norm();
    }
    rows.values()
        .chain(cols.values())
        .copied()
        .fold(0.0, f64::max)
}

/// Right side of the norm comparison: pin one `(x_j, xi_j)` (or `(x_j, phi_j)`)
/// and sum `|g|` over the remaining arguments.
pub fn coupling_table_norm(g: &CouplingTable) -> f64 {
    let mut best: f64 = 0.0;
    for j in 0..g.order {
        let mut by_xi: BTreeMap<(usize, Spin), f64> = BTreeMap::new();
        let mut by_phi: BTreeMap<(usize, Spin), f64> = BTreeMap::new();
        for ((sites, xi, phi), v) in &g.entries {
            *by_xi.entry((sites[j], xi[j])).or_insert(0.0) += v.norm();
            *by_phi.entry((sites[j], phi[j])).or_insert(0.0) += v.norm();
        }
        for v in by_xi.values().chain(by_phi.values()) {
            best = best.max(*v);
        }
    }
    best
}

/// The closed form of the anti-symmetrized on-site interaction, paired with
/// `psi*_{a1} psi*_{a2} psi_{b1} psi_{b2}`.
pub fn hubbard_fc(spec: &LatticeSpec, u: f64) -> AntisymmetricCoefficients {
    let mut entries = BTreeMap::new();
    let sgn = |a: Spin, b: Spin| match (a, b) {
        (Spin::Up, Spin::Down) => 1.0,
        (Spin::Down, Spin::Up) => -1.0,
        _ => 0.0,
    };
    for x in 0..spec.site_count() {
        for (x1, x2) in [(Spin::Up, Spin::Down), (Spin::Down, Spin::Up)] {
            for (p1, p2) in [(Spin::Up, Spin::Down), (Spin::Down, Spin::Up)] {
                let v = -u / 4.0 * sgn(x1, x2) * sgn(p1, p2);
                entries.insert(
                    (
                        vec![spec.mode(x, x1), spec.mode(x, x2)],
                        vec![spec.mode(x, p1), spec.mode(x, p2)],
                    ),
                    Complex64::new(v, 0.0),
                );
            }
        }
    }
    AntisymmetricCoefficients { order: 2, entries }
}
