//! Fourier analysis on `F^d` under the three measures in play: counting
//! measure on the grid, normalized counting measure on the dual grid, and
//! the surface measure `dσ` giving each surface point mass `1/|S|`.
//!
//! Conventions: `ĝ(ξ) = Σ_x g(x) e(-x·ξ)` and
//! `G^∨(x) = p^{-d} Σ_ξ G(ξ) e(ξ·x)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::geometry::SurfaceSet;
use crate::grid::{Grid, Limits};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureTag {
    /// Mass 1 per point of `F^d`.
    CountingOnGrid,
    /// Mass `p^{-d}` per point of the dual space.
    NormalizedOnDual,
    /// Mass `1/size` per point of a surface.
    SurfaceSigma { size: usize },
}

/// Anything carrying complex values under a measure.
pub trait Measured {
    fn measure(&self) -> MeasureTag;
    fn values(&self) -> &[Complex64];

    /// Mass of a single point.
    fn point_weight(&self) -> f64 {
        match self.measure() {
            MeasureTag::CountingOnGrid => 1.0,
            MeasureTag::NormalizedOnDual => 1.0 / self.values().len() as f64,
            MeasureTag::SurfaceSigma { size } => 1.0 / size as f64,
        }
    }
}

/// A dense function on `F^d` (or its dual), lexicographically indexed.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunc {
    grid: Grid,
    measure: MeasureTag,
    values: Vec<Complex64>,
}

/// Function on `F^d` with counting measure.
pub type GridFunc = LatticeFunc;
/// Function on the dual space `F^d_*` with normalized counting measure.
pub type DualFunc = LatticeFunc;

impl LatticeFunc {
    fn build(grid: Grid, measure: MeasureTag, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(LatticeFunc { grid, measure, values })
    }

    pub fn grid_from_values(grid: Grid, values: Vec<Complex64>) -> Result<GridFunc> {
        Self::build(grid, MeasureTag::CountingOnGrid, values)
    }

    pub fn dual_from_values(grid: Grid, values: Vec<Complex64>) -> Result<DualFunc> {
        Self::build(grid, MeasureTag::NormalizedOnDual, values)
    }

    pub fn zeros(grid: Grid, measure: MeasureTag) -> Self {
        LatticeFunc { grid, measure, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn constant(grid: Grid, measure: MeasureTag, c: Complex64) -> Self {
        LatticeFunc { grid, measure, values: vec![c; grid.len()] }
    }

    /// Counting-measure function equal to 1 at `coords` and 0 elsewhere.
    pub fn delta(grid: Grid, coords: &[u32]) -> GridFunc {
        let mut f = Self::zeros(grid, MeasureTag::CountingOnGrid);
        f.values[grid.index(coords)] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn at(&self, coords: &[u32]) -> Complex64 {
        self.values[self.grid.index(coords)]
    }

    /// Number of points where the value is nonzero.
    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|v| **v != Complex64::new(0.0, 0.0)).count()
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    fn require(&self, tag: MeasureTag) -> Result<()> {
        if self.measure != tag {
            return Err(Error::MeasureMismatch { left: self.measure, right: tag });
        }
        Ok(())
    }
}

impl Measured for LatticeFunc {
    fn measure(&self) -> MeasureTag {
        self.measure
    }

    fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// A function on the points of a [`SurfaceSet`], under `dσ`.
#[derive(Debug, Clone)]
pub struct SurfaceFunc<'s> {
    surface: &'s SurfaceSet,
    values: Vec<Complex64>,
}

impl<'s> SurfaceFunc<'s> {
    pub fn new(surface: &'s SurfaceSet, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != surface.len() {
            return Err(Error::DimensionMismatch { expected: surface.len(), got: values.len() });
        }
        Ok(SurfaceFunc { surface, values })
    }

    pub fn constant(surface: &'s SurfaceSet, c: Complex64) -> Self {
        SurfaceFunc { surface, values: vec![c; surface.len()] }
    }

    /// Indicator of the points of `surface` that also belong to `subset`.
    pub fn indicator(surface: &'s SurfaceSet, subset: &SurfaceSet) -> Self {
        let values = surface
            .iter()
            .map(|pt| if subset.contains(pt) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
            .collect();
        SurfaceFunc { surface, values }
    }

    pub fn surface(&self) -> &'s SurfaceSet {
        self.surface
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
}

impl Measured for SurfaceFunc<'_> {
    fn measure(&self) -> MeasureTag {
        MeasureTag::SurfaceSigma { size: self.surface.len() }
    }

    fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// One pass of length-`p` transforms along `axis`; `sign` is +1 or -1.
fn transform_axis(ctx: &FieldCtx, grid: Grid, values: &mut [Complex64], axis: usize, sign: i64) {
    let p = grid.p as usize;
    let stride = crate::grid::pow_size(grid.p, grid.d - 1 - axis) as usize;
    let block = p * stride;
    let kernel: Vec<Complex64> = (0..p * p)
        .map(|i| {
            let (xi, x) = (i / p, i % p);
            ctx.e(ctx.scalar(sign * (xi * x) as i64).value())
        })
        .collect();
    values.par_chunks_mut(block).for_each(|chunk| {
        let mut line = vec![Complex64::new(0.0, 0.0); p];
        for offset in 0..stride {
            for (x, slot) in line.iter_mut().enumerate() {
                *slot = chunk[offset + x * stride];
            }
            for xi in 0..p {
                let row = &kernel[xi * p..(xi + 1) * p];
                let acc: Complex64 = row.iter().zip(&line).map(|(k, v)| k * v).sum();
                chunk[offset + xi * stride] = acc;
            }
        }
    });
}

fn transform(ctx: &FieldCtx, grid: Grid, values: &mut [Complex64], sign: i64) {
    for axis in 0..grid.d {
        transform_axis(ctx, grid, values, axis, sign);
    }
}

/// `ĝ(ξ) = Σ_x g(x) e(-x·ξ)`, one axis at a time.
pub fn dft_forward(ctx: &FieldCtx, g: &GridFunc) -> Result<DualFunc> {
    g.require(MeasureTag::CountingOnGrid)?;
    check_field(ctx, g.grid)?;
    let mut values = g.values.clone();
    transform(ctx, g.grid, &mut values, -1);
    Ok(LatticeFunc { grid: g.grid, measure: MeasureTag::NormalizedOnDual, values })
}

/// `G^∨(x) = p^{-d} Σ_ξ G(ξ) e(ξ·x)`.
pub fn idft(ctx: &FieldCtx, big_g: &DualFunc) -> Result<GridFunc> {
    big_g.require(MeasureTag::NormalizedOnDual)?;
    check_field(ctx, big_g.grid)?;
    let mut values = big_g.values.clone();
    transform(ctx, big_g.grid, &mut values, 1);
    let scale = 1.0 / big_g.grid.len() as f64;
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(LatticeFunc { grid: big_g.grid, measure: MeasureTag::CountingOnGrid, values })
}

fn check_field(ctx: &FieldCtx, grid: Grid) -> Result<()> {
    if ctx.p() != grid.p {
        return Err(Error::BadParameter(format!("grid over F_{} used with F_{}", grid.p, ctx.p())));
    }
    Ok(())
}

/// Grid indices of the points of a surface in `F^d`.
pub fn surface_indices(grid: Grid, surface: &SurfaceSet) -> Result<Vec<usize>> {
    surface
        .iter()
        .map(|pt| {
            if pt.dim() != grid.d {
                Err(Error::DimensionMismatch { expected: grid.d, got: pt.dim() })
            } else {
                Ok(grid.index(pt.coords()))
            }
        })
        .collect()
}

/// `(f dσ)^∨(x) = |P|^{-1} Σ_{ξ∈P} f(ξ) e(x·ξ)` on all of `F^d`.
pub fn extension(ctx: &FieldCtx, f: &SurfaceFunc<'_>, limits: &Limits) -> Result<GridFunc> {
    let d = f.surface.require_paraboloid()?;
    let grid = Grid::new(ctx.p(), d, limits)?;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (idx, v) in surface_indices(grid, f.surface)?.into_iter().zip(&f.values) {
        values[idx] += *v;
    }
    transform(ctx, grid, &mut values, 1);
    let scale = 1.0 / f.surface.len() as f64;
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(LatticeFunc { grid, measure: MeasureTag::CountingOnGrid, values })
}

/// Values of `big_g` on the points of `surface`, under `dσ`.
pub fn restrict_to_surface<'s>(big_g: &DualFunc, surface: &'s SurfaceSet) -> Result<SurfaceFunc<'s>> {
    let values = surface_indices(big_g.grid, surface)?.into_iter().map(|i| big_g.values[i]).collect();
    Ok(SurfaceFunc { surface, values })
}

/// `(Σ w·|h|^r)^{1/r}` with the measure's point weight; `r = ∞` gives the max modulus.
pub fn lp_norm<M: Measured + ?Sized>(h: &M, r: f64) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::BadExponent(r));
    }
    if r.is_infinite() {
        return Ok(h.values().iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let w = h.point_weight();
    let sum: f64 = if r == 2.0 {
        h.values().iter().map(|v| v.norm_sqr()).sum()
    } else {
        h.values().iter().map(|v| v.norm().powf(r)).sum()
    };
    Ok((w * sum).powf(1.0 / r))
}

/// `Σ w·a·conj(b)` under the shared measure.
pub fn inner_product<M: Measured + ?Sized>(a: &M, b: &M) -> Result<Complex64> {
    if a.measure() != b.measure() {
        return Err(Error::MeasureMismatch { left: a.measure(), right: b.measure() });
    }
    if a.values().len() != b.values().len() {
        return Err(Error::DimensionMismatch { expected: a.values().len(), got: b.values().len() });
    }
    let sum: Complex64 = a.values().iter().zip(b.values()).map(|(x, y)| x * y.conj()).sum();
    Ok(sum * a.point_weight())
}

/// `(a*b)(x) = Σ_y a(y) b(x-y)`, with an extra `p^{-d}` under the normalized measure.
pub fn convolve(a: &LatticeFunc, b: &LatticeFunc) -> Result<LatticeFunc> {
    if a.measure != b.measure {
        return Err(Error::MeasureMismatch { left: a.measure, right: b.measure });
    }
    if a.grid != b.grid {
        return Err(Error::DimensionMismatch { expected: a.grid.len(), got: b.grid.len() });
    }
    let grid = a.grid;
    let support: Vec<(usize, Complex64)> = a
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
        .map(|(i, v)| (i, *v))
        .collect();
    let weight = match a.measure {
        MeasureTag::NormalizedOnDual => 1.0 / grid.len() as f64,
        _ => 1.0,
    };
    let values = (0..grid.len())
        .into_par_iter()
        .map(|x| {
            let acc: Complex64 =
                support.iter().map(|&(y, av)| av * b.values[grid.sub_index(x, y)]).sum();
            acc * weight
        })
        .collect();
    Ok(LatticeFunc { grid, measure: a.measure, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dft_of_delta_and_constant() {
        let f = FieldCtx::new(5).unwrap();
        let grid = Grid { p: 5, d: 2 };
        let delta = LatticeFunc::delta(grid, &[0, 0]);
        let hat = dft_forward(&f, &delta).unwrap();
        assert!(hat.values().iter().all(|v| (v - c(1.0)).norm() < 1e-12));
        let one = LatticeFunc::constant(grid, MeasureTag::CountingOnGrid, c(1.0));
        let hat = dft_forward(&f, &one).unwrap();
        assert!((hat.at(&[0, 0]) - c(25.0)).norm() < 1e-9);
        assert!(hat.values()[1..].iter().all(|v| v.norm() < 1e-9));
    }

    #[test]
    fn dft_p3_d1_indicator_of_one() {
        let f = FieldCtx::new(3).unwrap();
        let grid = Grid { p: 3, d: 1 };
        let g = LatticeFunc::delta(grid, &[1]);
        let hat = dft_forward(&f, &g).unwrap();
        for xi in 0..3u32 {
            let expected = f.additive_char(f.scalar(-(xi as i64)));
            assert!((hat.at(&[xi]) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn idft_examples() {
        let f = FieldCtx::new(3).unwrap();
        let grid = Grid { p: 3, d: 1 };
        let mut big = LatticeFunc::zeros(grid, MeasureTag::NormalizedOnDual);
        big.values_mut()[0] = c(1.0);
        let g = idft(&f, &big).unwrap();
        assert!(g.values().iter().all(|v| (v - c(1.0 / 3.0)).norm() < 1e-12));

        let grid = Grid { p: 5, d: 2 };
        let ones = LatticeFunc::constant(grid, MeasureTag::NormalizedOnDual, c(1.0));
        let g = idft(&FieldCtx::new(5).unwrap(), &ones).unwrap();
        assert!((g.at(&[0, 0]) - c(1.0)).norm() < 1e-12);
        assert!(g.values()[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn measure_mismatch_errors() {
        let f = FieldCtx::new(3).unwrap();
        let grid = Grid { p: 3, d: 2 };
        let a = LatticeFunc::zeros(grid, MeasureTag::CountingOnGrid);
        let b = LatticeFunc::zeros(grid, MeasureTag::NormalizedOnDual);
        assert!(matches!(convolve(&a, &b), Err(Error::MeasureMismatch { .. })));
        assert!(matches!(dft_forward(&f, &b), Err(Error::MeasureMismatch { .. })));
        assert!(matches!(idft(&f, &a), Err(Error::MeasureMismatch { .. })));
    }

    #[test]
    fn lp_norm_examples() {
        let grid = Grid { p: 5, d: 3 };
        let delta = LatticeFunc::delta(grid, &[1, 2, 3]);
        for r in [0.5, 1.0, 2.0, 4.0, f64::INFINITY] {
            assert!((lp_norm(&delta, r).unwrap() - 1.0).abs() < 1e-12);
        }
        let one = LatticeFunc::constant(grid, MeasureTag::CountingOnGrid, c(1.0));
        assert!((lp_norm(&one, 2.0).unwrap() - 125f64.sqrt()).abs() < 1e-9);
        assert!(matches!(lp_norm(&one, 0.0), Err(Error::BadExponent(_))));
        assert!(matches!(lp_norm(&one, -1.0), Err(Error::BadExponent(_))));

        let f = FieldCtx::new(5).unwrap();
        let par = SurfaceSet::paraboloid(&f, 3, &Limits::default()).unwrap();
        let sf = SurfaceFunc::constant(&par, c(1.0));
        for r in [1.0, 2.0, 3.5] {
            assert!((lp_norm(&sf, r).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn extension_examples() {
        let f = FieldCtx::new(5).unwrap();
        let l = Limits::default();
        let par = SurfaceSet::paraboloid(&f, 3, &l).unwrap();
        let ext = extension(&f, &SurfaceFunc::constant(&par, c(1.0)), &l).unwrap();
        assert!((ext.at(&[0, 0, 0]) - c(1.0)).norm() < 1e-12);

        let mut vals = vec![c(0.0); par.len()];
        vals[7] = c(1.0);
        let ext = extension(&f, &SurfaceFunc::new(&par, vals).unwrap(), &l).unwrap();
        let flat = 1.0 / par.len() as f64;
        assert!(ext.values().iter().all(|v| (v.norm() - flat).abs() < 1e-12));

        let sphere = SurfaceSet::sphere(&f, 3, f.scalar(1), &l).unwrap();
        let sf = SurfaceFunc::constant(&sphere, c(1.0));
        assert!(matches!(extension(&f, &sf, &l), Err(Error::WrongVariety { .. })));
    }

    #[test]
    fn restriction_examples() {
        let f = FieldCtx::new(3).unwrap();
        let l = Limits::default();
        let par = SurfaceSet::paraboloid(&f, 3, &l).unwrap();
        let grid = Grid { p: 3, d: 3 };
        let hat = dft_forward(&f, &LatticeFunc::delta(grid, &[0, 0, 0])).unwrap();
        let r = restrict_to_surface(&hat, &par).unwrap();
        assert!(r.values().iter().all(|v| (v - c(1.0)).norm() < 1e-12));
        assert!((lp_norm(&r, 2.0).unwrap() - 1.0).abs() < 1e-12);

        let constant = LatticeFunc::constant(grid, MeasureTag::NormalizedOnDual, c(2.5));
        let r = restrict_to_surface(&constant, &par).unwrap();
        assert!(r.values().iter().all(|v| *v == c(2.5)));
    }

    #[test]
    fn convolution_identity_and_counts() {
        let grid = Grid { p: 3, d: 2 };
        let mut b = LatticeFunc::zeros(grid, MeasureTag::CountingOnGrid);
        for (i, v) in b.values_mut().iter_mut().enumerate() {
            *v = Complex64::new(i as f64, -(i as f64) / 2.0);
        }
        let delta = LatticeFunc::delta(grid, &[0, 0]);
        assert_eq!(convolve(&delta, &b).unwrap(), b);

        // 1_P * 1_P counts representations; the sum of squares is the energy 15.
        let f = FieldCtx::new(3).unwrap();
        let par = SurfaceSet::paraboloid(&f, 2, &Limits::default()).unwrap();
        let mut ind = LatticeFunc::zeros(grid, MeasureTag::CountingOnGrid);
        for pt in par.iter() {
            ind.values_mut()[grid.index(pt.coords())] = c(1.0);
        }
        let r = convolve(&ind, &ind).unwrap();
        let total: f64 = r.values().iter().map(|v| v.re * v.re).sum();
        assert!((total - 15.0).abs() < 1e-9);
    }
}
