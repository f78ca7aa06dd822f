//! Test sets on the paraboloid and random test functions on `F^d`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use crate::error::Result;
use crate::field::{FieldCtx, Scalar};
use crate::fourier::{GridFunc, LatticeFunc, MeasureTag};
use crate::geometry::{max_affine_subspace, Point, SurfaceSet};
use crate::grid::{Grid, Limits};

/// A uniformly random subset of `set` with `size` points, in the set's order.
pub fn random_subset<R: Rng + ?Sized>(set: &SurfaceSet, size: usize, rng: &mut R) -> SurfaceSet {
    let mut picked = sample(rng, set.len(), size.min(set.len())).into_vec();
    picked.sort_unstable();
    let keep: BTreeSet<usize> = picked.into_iter().collect();
    let mut i = 0;
    set.filter(|_| {
        let hit = keep.contains(&i);
        i += 1;
        hit
    })
}

/// Points of `P` whose underline lies on the sphere `x̲·x̲ = j`.
pub fn sphere_slice(ctx: &FieldCtx, par: &SurfaceSet, j: Scalar) -> SurfaceSet {
    par.filter(|pt| ctx.dot(pt.underline(), pt.underline()) == j.value())
}

/// Points of `P` whose underline vanishes beyond the first `m` coordinates.
pub fn sub_paraboloid(par: &SurfaceSet, m: usize) -> SurfaceSet {
    par.filter(|pt| pt.underline().iter().skip(m).all(|&c| c == 0))
}

/// `G_y(z) = (z̲ + y̲, z_d + 2 z̲·y̲ + y̲·y̲)`, the map sending the origin to `y`.
pub fn galilean_inverse(ctx: &FieldCtx, y: &Point, z: &Point) -> Point {
    let under: Vec<u32> = z.underline().iter().zip(y.underline()).map(|(&a, &b)| (a + b) % ctx.p()).collect();
    Point::lift(ctx, &under)
}

/// Union of `copies` translates (by random `G_y`, `y ∈ P`) of the largest
/// line or plane inside `P`; `None` when `P` contains no line.
pub fn flat_union<R: Rng + ?Sized>(
    ctx: &FieldCtx,
    par: &SurfaceSet,
    copies: usize,
    rng: &mut R,
    limits: &Limits,
) -> Result<Option<SurfaceSet>> {
    let d = par.require_paraboloid()?;
    let witness = match max_affine_subspace(ctx, d, 2, limits)? {
        Some(w) => w,
        None => match max_affine_subspace(ctx, d, 1, limits)? {
            Some(w) => w,
            None => return Ok(None),
        },
    };
    let flat = witness.points(ctx);
    let mut under: BTreeSet<Vec<u32>> = BTreeSet::new();
    for _ in 0..copies.max(1) {
        let y = &par.points()[rng.gen_range(0..par.len())];
        for z in &flat {
            under.insert(galilean_inverse(ctx, y, z).underline().to_vec());
        }
    }
    Ok(Some(SurfaceSet::lift_underlines(ctx, d, under)?))
}

/// Scan families for subsets of `P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Random,
    Slice,
    Flats,
    SubParaboloid,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Random, Family::Slice, Family::Flats, Family::SubParaboloid];

    pub fn name(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::Slice => "slice",
            Family::Flats => "flats",
            Family::SubParaboloid => "subparab",
        }
    }

    /// One member of the family; parameters are drawn from `rng`.
    pub fn sample<R: Rng + ?Sized>(
        self,
        ctx: &FieldCtx,
        par: &SurfaceSet,
        max_size: usize,
        rng: &mut R,
        limits: &Limits,
    ) -> Result<SurfaceSet> {
        let d = par.require_paraboloid()?;
        let cap = max_size.min(par.len()).max(1);
        let set = match self {
            Family::Random => random_subset(par, rng.gen_range(1..=cap), rng),
            Family::Slice => sphere_slice(ctx, par, ctx.scalar(rng.gen_range(0..ctx.p() as i64))),
            Family::Flats => match flat_union(ctx, par, rng.gen_range(1..=4), rng, limits)? {
                Some(s) => s,
                None => random_subset(par, rng.gen_range(1..=cap), rng),
            },
            Family::SubParaboloid => sub_paraboloid(par, rng.gen_range(1..d)),
        };
        Ok(if set.len() > cap { random_subset(&set, cap, rng) } else { set })
    }
}

/// Indicator on `F^d` of a random set of `size` points.
pub fn random_indicator<R: Rng + ?Sized>(grid: Grid, size: usize, rng: &mut R) -> GridFunc {
    let mut g = LatticeFunc::zeros(grid, MeasureTag::CountingOnGrid);
    for i in sample(rng, grid.len(), size.clamp(1, grid.len())) {
        g.values_mut()[i] = Complex64::new(1.0, 0.0);
    }
    g
}

/// Random complex values on a random support; moduli spread over several dyadic scales.
pub fn random_grid_func<R: Rng + ?Sized>(grid: Grid, rng: &mut R) -> GridFunc {
    let mut g = LatticeFunc::zeros(grid, MeasureTag::CountingOnGrid);
    let size = rng.gen_range(1..=grid.len());
    let depth = rng.gen_range(0.0..8.0);
    for i in sample(rng, grid.len(), size) {
        let modulus = 2f64.powf(-rng.gen_range(0.0..=depth));
        g.values_mut()[i] = Complex64::from_polar(modulus, rng.gen_range(0.0..std::f64::consts::TAU));
    }
    g
}

/// Random values with both signs and a fixed support density; used by the `L^2` audits.
pub fn random_dense_func<R: Rng + ?Sized>(grid: Grid, rng: &mut R) -> GridFunc {
    let values = (0..grid.len())
        .map(|_| {
            if rng.gen_bool(0.5) {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    LatticeFunc::grid_from_values(grid, values).expect("length matches grid")
}
