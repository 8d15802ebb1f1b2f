//! The periodic lattice `(Z/LZ)^d`, its momenta, spin labels and discrete time grids.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::Error;

/// Spin coordinate. `Up` is mode offset 0, `Down` is mode offset 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn from_index(i: usize) -> Spin {
        if i == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spin::Up => f.write_str("up"),
            Spin::Down => f.write_str("down"),
        }
    }
}

/// A hyper-cubic lattice of linear size `l` in `d` dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeSpec {
    pub d: usize,
    pub l: usize,
}

impl LatticeSpec {
    pub fn new(d: usize, l: usize) -> Result<Self, Error> {
        if d == 0 || l == 0 {
            return Err(Error::InvalidLattice { d, l });
        }
        Ok(LatticeSpec { d, l })
    }

    pub fn site_count(&self) -> usize {
        self.l.pow(self.d as u32)
    }

    pub fn mode_count(&self) -> usize {
        2 * self.site_count()
    }

    /// Lexicographic rank of a site; coordinates are reduced mod `L` first.
    pub fn site_rank(&self, x: &[i64]) -> usize {
        debug_assert_eq!(x.len(), self.d);
        let l = self.l as i64;
        x.iter()
            .fold(0usize, |acc, &c| acc * self.l + c.rem_euclid(l) as usize)
    }

    /// Coordinates in `{0,..,L-1}^d` of the site with the given rank.
    pub fn site_coords(&self, rank: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.d];
        let mut r = rank;
        for j in (0..self.d).rev() {
            out[j] = (r % self.l) as i64;
            r /= self.l;
        }
        out
    }

    /// Rank of `x + y` on the torus.
    pub fn add_sites(&self, a: usize, b: usize) -> usize {
        let xa = self.site_coords(a);
        let xb = self.site_coords(b);
        let s: Vec<i64> = xa.iter().zip(&xb).map(|(p, q)| p + q).collect();
        self.site_rank(&s)
    }

    /// Componentwise `x - y`, reduced into the centered window.
    pub fn displacement(&self, a: usize, b: usize) -> Vec<i64> {
        let xa = self.site_coords(a);
        let xb = self.site_coords(b);
        let diff: Vec<i64> = xa.iter().zip(&xb).map(|(p, q)| p - q).collect();
        periodic_reduce(&diff, self.l)
    }

    /// Global mode index `rank * 2 + spin`.
    pub fn mode(&self, rank: usize, spin: Spin) -> usize {
        2 * rank + spin.index()
    }

    pub fn mode_parts(&self, mode: usize) -> (usize, Spin) {
        (mode / 2, Spin::from_index(mode % 2))
    }
}

/// All sites in lexicographic order of their coordinates.
pub fn enumerate_sites(spec: &LatticeSpec) -> Vec<Vec<i64>> {
    (0..spec.site_count())
        .map(|r| spec.site_coords(r))
        .collect()
}

/// All momenta `2 pi n / L`, in the same order as [`enumerate_sites`].
pub fn enumerate_momenta(spec: &LatticeSpec) -> Vec<Vec<f64>> {
    let scale = 2.0 * PI / spec.l as f64;
    (0..spec.site_count())
        .map(|r| {
            spec.site_coords(r)
                .into_iter()
                .map(|n| scale * n as f64)
                .collect()
        })
        .collect()
}

/// Representative of `x` mod `L` in `{-floor(L/2), .., -floor(L/2) + L - 1}`.
pub fn reduce_scalar(x: i64, l: usize) -> i64 {
    let l = l as i64;
    let lo = -(l / 2);
    (x - lo).rem_euclid(l) + lo
}

/// Componentwise [`reduce_scalar`].
pub fn periodic_reduce(x: &[i64], l: usize) -> Vec<i64> {
    x.iter().map(|&c| reduce_scalar(c, l)).collect()
}

/// Discrete imaginary-time grid `[0, beta)_h` with `h = 2 * half_steps / beta`.
///
/// The pair `(beta, half_steps)` is stored so that `beta * h` is an exact even integer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub beta: f64,
    pub half_steps: usize,
}

impl TimeGrid {
    pub fn new(beta: f64, half_steps: usize) -> Result<Self, Error> {
        if half_steps == 0 {
            return Err(Error::InvalidTimeGrid("half_steps must be at least 1"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidTimeGrid("beta must be positive and finite"));
        }
        Ok(TimeGrid { beta, half_steps })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_steps as f64 / self.beta
    }

    /// Number of points `beta * h`.
    pub fn len(&self) -> usize {
        2 * self.half_steps
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, k: usize) -> f64 {
        k as f64 * self.beta / self.len() as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// The grid `[-beta, beta)_h`, `2 beta h` points.
    pub fn symmetric_points(&self) -> Vec<f64> {
        let n = self.len() as i64;
        (-n..n).map(|k| k as f64 * self.beta / n as f64).collect()
    }
}

/// Convenience wrapper for [`TimeGrid::new`].
pub fn time_grid(beta: f64, half_steps: usize) -> Result<TimeGrid, Error> {
    TimeGrid::new(beta, half_steps)
}
