//! Lattice points in axis-aligned boxes.
//!
//! The box is rescaled to the unit cube, the scaled basis is LLL reduced and
//! a Fincke-Pohst search enumerates the ball of radius `sqrt(n)` that
//! circumscribes the cube. Every candidate is then tested against the box
//! with the backend's own comparisons, so on the exact backend the result is
//! exact including the closed/open faces.

use serde::Serialize;

use super::reduce::{gram_schmidt, lll, GramSchmidt};
use super::{AxisBox, Lattice};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Float decisions closer than this to a face are flagged.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct EnumOptions {
    pub node_budget: u64,
    /// Stop once this many nonzero box points are found.
    pub stop_after: Option<usize>,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self {
            node_budget: DEFAULT_NODE_BUDGET,
            stop_after: None,
        }
    }
}

impl EnumOptions {
    pub fn first_hit(self) -> Self {
        Self {
            stop_after: Some(1),
            ..self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticePoint<T> {
    /// Integer coordinates with respect to the lattice basis.
    pub coeffs: Vec<i64>,
    #[serde(skip)]
    pub coords: Vec<T>,
}

impl<T: Scalar> LatticePoint<T> {
    pub fn is_origin(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration<T> {
    /// All lattice points in the box, origin included, sorted by `coeffs`.
    pub points: Vec<LatticePoint<T>>,
    /// Smallest distance from a nonzero candidate to a face of the box.
    pub margin: Option<T>,
    /// Set on the float backend when `margin` is below [`BOUNDARY_MARGIN`].
    pub boundary_ambiguous: bool,
    pub nodes: u64,
}

impl<T: Scalar> Enumeration<T> {
    pub fn nonzero(&self) -> impl Iterator<Item = &LatticePoint<T>> {
        self.points.iter().filter(|p| !p.is_origin())
    }

    pub fn nonzero_count(&self) -> usize {
        self.nonzero().count()
    }
}

struct Search<'a, T> {
    gs: &'a GramSchmidt<T>,
    radius_sq: T,
    coeffs: Vec<i64>,
    nodes: u64,
    budget: u64,
    out: Vec<Vec<i64>>,
    basis: &'a [Vec<T>],
    closed: &'a [bool],
    stop_after: Option<usize>,
    hits: usize,
}

impl<T: Scalar> Search<'_, T> {
    fn fits(&self, level: usize, c: i64, center: &T, rem: &T) -> bool {
        let d = T::from_i64(c) - center.clone();
        self.gs.norms[level].clone() * d.clone() * d <= *rem
    }

    /// Nonzero and inside the rescaled box.
    fn hit(&self) -> bool {
        if self.coeffs.iter().all(|&c| c == 0) {
            return false;
        }
        let n = self.coeffs.len();
        (0..n).all(|i| {
            let mut y = T::zero();
            for (j, &c) in self.coeffs.iter().enumerate() {
                if c != 0 {
                    y = y + self.basis[j][i].clone() * T::from_i64(c);
                }
            }
            let y = y.abs();
            if self.closed[i] {
                y <= T::one()
            } else {
                y < T::one()
            }
        })
    }

    fn done(&self) -> bool {
        self.stop_after.is_some_and(|k| self.hits >= k)
    }

    fn run(&mut self, level: usize, partial: T) -> Result<()> {
        let n = self.coeffs.len();
        let mut center = T::zero();
        for j in level + 1..n {
            if self.coeffs[j] != 0 {
                center = center - self.gs.mu[j][level].clone() * T::from_i64(self.coeffs[j]);
            }
        }
        let rem = self.radius_sq.clone() - partial.clone();
        if rem < T::zero() {
            return Ok(());
        }
        let cf = center.to_f64();
        let r = (rem.to_f64() / self.gs.norms[level].to_f64()).max(0.0).sqrt();
        let as_int = |x: f64| -> Result<i64> {
            if x.is_finite() && x.abs() < 4.0e18 {
                Ok(x as i64)
            } else {
                Err(Error::OutOfRange("enumeration interval exceeds i64".into()))
            }
        };
        let mut lo = as_int((cf - r).ceil())?;
        let mut hi = as_int((cf + r).floor())?;
        while self.fits(level, lo - 1, &center, &rem) {
            lo -= 1;
        }
        while lo <= hi && !self.fits(level, lo, &center, &rem) {
            lo += 1;
        }
        while self.fits(level, hi + 1, &center, &rem) {
            hi += 1;
        }
        while hi >= lo && !self.fits(level, hi, &center, &rem) {
            hi -= 1;
        }
        if lo > hi {
            self.coeffs[level] = 0;
            return Ok(());
        }
        let mid = as_int(cf.round())?.clamp(lo, hi);
        for c in zigzag(mid, lo, hi) {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::NodeBudget(self.budget));
            }
            self.coeffs[level] = c;
            let d = T::from_i64(c) - center.clone();
            let next = partial.clone() + self.gs.norms[level].clone() * d.clone() * d;
            if level == 0 {
                self.out.push(self.coeffs.clone());
                if self.stop_after.is_some() && self.hit() {
                    self.hits += 1;
                }
            } else {
                self.run(level - 1, next)?;
            }
            if self.done() {
                return Ok(());
            }
        }
        self.coeffs[level] = 0;
        Ok(())
    }
}

/// `mid, mid+1, mid-1, mid+2, ...` restricted to `[lo, hi]`.
fn zigzag(mid: i64, lo: i64, hi: i64) -> impl Iterator<Item = i64> {
    let span = (hi - mid).max(mid - lo);
    (0..=span).flat_map(move |d| {
        let up = Some(mid + d).filter(|&c| c <= hi);
        let down = Some(mid - d).filter(|&c| d > 0 && c >= lo);
        up.into_iter().chain(down)
    })
}

pub fn enumerate_in_box<T: Scalar>(
    lattice: &Lattice<T>,
    bx: &AxisBox<T>,
    opts: &EnumOptions,
) -> Result<Enumeration<T>> {
    let n = lattice.n();
    if bx.dim() != n {
        return Err(Error::dim(format!("box of dimension {} for a rank {n} lattice", bx.dim())));
    }
    let basis = lattice.basis();
    let scaled: Vec<Vec<T>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| basis[(i, j)].clone() / bx.bounds()[i].clone())
                .collect()
        })
        .collect();
    let reduced = lll(&scaled, &T::ratio(3, 4))?;
    let gs = gram_schmidt(&reduced.basis)?;
    let mut radius_sq = T::from_i64(n as i64);
    if !T::is_exact() {
        radius_sq = radius_sq * (T::one() + T::ratio(1, 1_000_000));
    }
    let mut search = Search {
        gs: &gs,
        radius_sq,
        coeffs: vec![0; n],
        nodes: 0,
        budget: opts.node_budget,
        out: Vec::new(),
        basis: &reduced.basis,
        closed: bx.closed_flags(),
        stop_after: opts.stop_after,
        hits: 0,
    };
    search.run(n - 1, T::zero())?;
    let nodes = search.nodes;

    let mut points = Vec::new();
    let mut margin: Option<T> = None;
    for cr in search.out {
        let mut coeffs = vec![0i64; n];
        for (j, &c) in cr.iter().enumerate() {
            if c != 0 {
                for (dst, &t) in coeffs.iter_mut().zip(&reduced.transform[j]) {
                    *dst = t
                        .checked_mul(c)
                        .and_then(|p| dst.checked_add(p))
                        .ok_or_else(|| Error::OutOfRange("lattice coefficient overflowed i64".into()))?;
                }
            }
        }
        let coords = basis.mul_int_vec(&coeffs)?;
        let origin = coeffs.iter().all(|&c| c == 0);
        if !origin {
            let m = bx.face_distance(&coords);
            if margin.as_ref().is_none_or(|cur| m < *cur) {
                margin = Some(m);
            }
        }
        if bx.contains(&coords) {
            points.push(LatticePoint { coeffs, coords });
        }
    }
    points.sort_by(|a, b| a.coeffs.cmp(&b.coeffs));
    let boundary_ambiguous = !T::is_exact()
        && margin
            .as_ref()
            .is_some_and(|m| m.to_f64() < BOUNDARY_MARGIN);
    Ok(Enumeration {
        points,
        margin,
        boundary_ambiguous,
        nodes,
    })
}
