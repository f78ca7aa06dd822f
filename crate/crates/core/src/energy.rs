//! Additive energy of paraboloid subsets.
//!
//! `Λ(E) = #{(x, y, z, w) ∈ E⁴ : x + y = z + w}` is computed three
//! independent ways, each behind [`EnergyCounter`]:
//!
//! * `sumset` accumulates `r_E(s) = #{(a, b) : a + b = s}` in a hash map and
//!   returns `Σ r_E(s)²`;
//! * `quadruple` is the literal four-fold loop, for small sets only;
//! * `l4` reads the energy off `‖(1_E dσ)^∨‖_4^4 = p^{4-3d} Λ(E)`.
//!
//! The module also splits the triple count `#{x - z + y ∈ P}` into the
//! isotropic part `M1` and the rest `M2`, and audits the incidence bound
//! `#{x ∈ A, y ∈ B : x - y ∈ P} ≤ |A||B|/p + p^{(d-2)/2} (|A||B|)^{1/2}`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::fourier::{extension, lp_norm, SurfaceFunc};
use crate::geometry::SurfaceSet;
use crate::grid::{pow_size, Limits};

/// Largest set the quadruple oracle accepts.
pub const QUADRUPLE_ORACLE_MAX: usize = 64;

/// One way of computing `Λ(E)` exactly.
pub trait EnergyCounter: Send + Sync {
    fn name(&self) -> &'static str;
    fn count(&self, ctx: &FieldCtx, set: &SurfaceSet, limits: &Limits) -> Result<u64>;
}

pub struct SumsetMap;
pub struct QuadrupleLoop;
pub struct L4Norm;

impl EnergyCounter for SumsetMap {
    fn name(&self) -> &'static str {
        "sumset"
    }

    fn count(&self, ctx: &FieldCtx, set: &SurfaceSet, limits: &Limits) -> Result<u64> {
        energy_count(ctx, set, limits)
    }
}

impl EnergyCounter for QuadrupleLoop {
    fn name(&self) -> &'static str {
        "quadruple"
    }

    fn count(&self, ctx: &FieldCtx, set: &SurfaceSet, _limits: &Limits) -> Result<u64> {
        energy_quadruple_oracle(ctx, set)
    }
}

impl EnergyCounter for L4Norm {
    fn name(&self) -> &'static str {
        "l4"
    }

    fn count(&self, ctx: &FieldCtx, set: &SurfaceSet, limits: &Limits) -> Result<u64> {
        energy_via_l4(ctx, set, limits)
    }
}

/// Every built-in counter, in a fixed order.
pub fn energy_counters() -> Vec<Box<dyn EnergyCounter>> {
    vec![Box::new(SumsetMap), Box::new(QuadrupleLoop), Box::new(L4Norm)]
}

/// Looks a counter up by [`EnergyCounter::name`].
pub fn energy_counter(name: &str) -> Option<Box<dyn EnergyCounter>> {
    energy_counters().into_iter().find(|c| c.name() == name)
}

fn flat_coords(set: &SurfaceSet) -> (usize, Vec<u32>) {
    let dim = set.points().first().map_or(0, |pt| pt.dim());
    let mut flat = Vec::with_capacity(dim * set.len());
    for pt in set.iter() {
        flat.extend_from_slice(pt.coords());
    }
    (dim, flat)
}

/// `Σ_s r_E(s)²` with an exact integer accumulator keyed by packed sums.
pub fn energy_count(ctx: &FieldCtx, set: &SurfaceSet, limits: &Limits) -> Result<u64> {
    let n = set.len() as u128;
    limits.check("sumset pairs", n * n, limits.max_pairs)?;
    let (dim, flat) = flat_coords(set);
    if pow_size(ctx.p(), dim) == u128::MAX {
        return Err(Error::InstanceTooLarge { what: "sumset key", size: u128::MAX, cap: u128::MAX - 1 });
    }
    let p = ctx.p();
    let mut reps: HashMap<u128, u64> = HashMap::with_capacity(set.len() * set.len() / 2 + 1);
    for a in flat.chunks_exact(dim.max(1)) {
        for b in flat.chunks_exact(dim.max(1)) {
            let key = a.iter().zip(b).fold(0u128, |acc, (x, y)| acc * p as u128 + ((x + y) % p) as u128);
            *reps.entry(key).or_insert(0) += 1;
        }
    }
    Ok(reps.values().map(|r| r * r).sum())
}

/// Literal count of quadruples with `x + y = z + w`; independent of [`energy_count`].
pub fn energy_quadruple_oracle(ctx: &FieldCtx, set: &SurfaceSet) -> Result<u64> {
    if set.len() > QUADRUPLE_ORACLE_MAX {
        return Err(Error::InstanceTooLarge {
            what: "quadruple oracle",
            size: set.len() as u128,
            cap: QUADRUPLE_ORACLE_MAX as u128,
        });
    }
    let p = ctx.p();
    let pts = set.points();
    let mut count = 0u64;
    for x in pts {
        for y in pts {
            for z in pts {
                for w in pts {
                    let hit = (0..x.dim()).all(|k| {
                        (x.coords()[k] + y.coords()[k]) % p == (z.coords()[k] + w.coords()[k]) % p
                    });
                    if hit {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// `Λ(E) = p^{3d-4} ‖(1_E dσ)^∨‖_4^4`, rounded; errors if the float is not
/// within `1e-6 Λ` of an integer.
pub fn energy_via_l4(ctx: &FieldCtx, set: &SurfaceSet, limits: &Limits) -> Result<u64> {
    let d = set.require_paraboloid()?;
    let par = SurfaceSet::paraboloid(ctx, d, limits)?;
    let f = SurfaceFunc::indicator(&par, set);
    let ext = extension(ctx, &f, limits)?;
    let norm = lp_norm(&ext, 4.0)?;
    let value = norm.powi(4) * (ctx.p() as f64).powi(3 * d as i32 - 4);
    let rounded = value.round();
    if (value - rounded).abs() >= 1e-6 * rounded.max(1.0) {
        return Err(Error::NumericalInconsistency(format!(
            "L4 energy {value} is not within 1e-6 of an integer"
        )));
    }
    Ok(rounded as u64)
}

/// Energy counts and the bound terms `|E|³/p` and `p^{(d-2)/2}|E|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub d: usize,
    pub set_size: usize,
    pub lambda: u64,
    pub m1: Option<u64>,
    pub m2: Option<u64>,
    /// Present for even `d ≥ 4`, where the energy bound is stated.
    pub bound_first: Option<f64>,
    pub bound_second: Option<f64>,
    pub ratio: Option<f64>,
}

impl EnergyReport {
    fn new(p: u32, d: usize, set_size: usize, lambda: u64, split: Option<(u64, u64)>) -> Self {
        let n = set_size as f64;
        let pf = p as f64;
        let (bound_first, bound_second, ratio) = if d >= 4 && d.is_multiple_of(2) {
            let first = n.powi(3) / pf;
            let second = pf.powf((d as f64 - 2.0) / 2.0) * n * n;
            (Some(first), Some(second), Some(lambda as f64 / (first + second)))
        } else {
            (None, None, None)
        };
        EnergyReport {
            d,
            set_size,
            lambda,
            m1: split.map(|s| s.0),
            m2: split.map(|s| s.1),
            bound_first,
            bound_second,
            ratio,
        }
    }

    /// `2|E|² - |E| ≤ Λ ≤ |E|³` and `Λ ≤ M1 + M2` when the split is known.
    pub fn invariants_hold(&self) -> bool {
        let n = self.set_size as u64;
        let lower = if n == 0 { 0 } else { 2 * n * n - n };
        let split_ok = match (self.m1, self.m2) {
            (Some(a), Some(b)) => self.lambda <= a + b,
            _ => true,
        };
        self.lambda >= lower && self.lambda <= n * n * n && split_ok
    }
}

/// Counts triples `(x, y, z) ∈ E³` with `x - z + y ∈ P`, split by whether
/// `z̲ - y̲` is isotropic (`M1`) or not (`M2`).
pub fn m1_m2_counts(ctx: &FieldCtx, set: &SurfaceSet, limits: &Limits) -> Result<(u64, u64)> {
    set.require_paraboloid()?;
    let n = set.len() as u128;
    limits.check("energy triples", n * n * n, limits.max_triples)?;
    let (dim, flat) = flat_coords(set);
    if set.is_empty() {
        return Ok((0, 0));
    }
    let p = ctx.p();
    let pts: Vec<&[u32]> = flat.chunks_exact(dim).collect();
    let (m1, m2) = pts
        .par_iter()
        .map(|y| {
            let mut local = (0u64, 0u64);
            let mut w = vec![0u32; dim];
            let mut diff = vec![0u32; dim - 1];
            for z in &pts {
                for k in 0..dim - 1 {
                    diff[k] = (z[k] + p - y[k]) % p;
                }
                let isotropic = ctx.dot(&diff, &diff) == 0;
                for x in &pts {
                    for k in 0..dim {
                        w[k] = (x[k] + y[k] + p - z[k]) % p;
                    }
                    if ctx.dot(&w[..dim - 1], &w[..dim - 1]) == w[dim - 1] {
                        if isotropic {
                            local.0 += 1;
                        } else {
                            local.1 += 1;
                        }
                    }
                }
            }
            local
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((m1, m2))
}

/// Full report: `Λ`, the `M1/M2` split, and bound terms when `d` is even and `≥ 4`.
pub fn m1_m2_decompose(ctx: &FieldCtx, set: &SurfaceSet, limits: &Limits) -> Result<EnergyReport> {
    let d = set.require_paraboloid()?;
    let split = m1_m2_counts(ctx, set, limits)?;
    let lambda = energy_count(ctx, set, limits)?;
    Ok(EnergyReport::new(ctx.p(), d, set.len(), lambda, Some(split)))
}

/// `Λ(E)` against `|E|³/p + p^{(d-2)/2}|E|²`; the ratio is recorded, not asserted.
/// The `M1/M2` split is filled in when `|E|³` fits the triple cap.
pub fn energy_bound_report(ctx: &FieldCtx, set: &SurfaceSet, limits: &Limits) -> Result<EnergyReport> {
    let d = set.require_paraboloid()?;
    if d < 4 || d % 2 == 1 {
        return Err(Error::UnsupportedDimension { d, reason: "the energy bound is stated for even d >= 4" });
    }
    let lambda = energy_count(ctx, set, limits)?;
    let n = set.len() as u128;
    let split = if n * n * n <= limits.max_triples { Some(m1_m2_counts(ctx, set, limits)?) } else { None };
    Ok(EnergyReport::new(ctx.p(), d, set.len(), lambda, split))
}

/// Outcome of the incidence audit for one pair `(A, B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceReport {
    pub count: u64,
    /// Same count via the underline condition `x̲·y̲ = y̲·y̲ ≠ 0`.
    pub count_underline: u64,
    pub bound: f64,
    pub holds: bool,
}

/// `#{x ∈ A, y ∈ B : x - y ∈ P}` by direct pair scan and by the underline
/// condition, checked against `|A||B|/p + p^{(d-2)/2}(|A||B|)^{1/2}`.
pub fn incidence_count(ctx: &FieldCtx, a: &SurfaceSet, b: &SurfaceSet) -> Result<IncidenceReport> {
    let d = a.require_paraboloid()?;
    let db = b.require_paraboloid()?;
    if d != db {
        return Err(Error::DimensionMismatch { expected: d, got: db });
    }
    if let Some(bad) = b.iter().find(|y| ctx.dot(y.underline(), y.underline()) == 0) {
        return Err(Error::PreconditionViolated(format!("B contains {bad}, which lies in S_0 x {{0}}")));
    }
    let p = ctx.p();
    let mut direct = 0u64;
    let mut under = 0u64;
    let mut w = vec![0u32; d];
    for x in a.iter() {
        for y in b.iter() {
            for k in 0..d {
                w[k] = (x.coords()[k] + p - y.coords()[k]) % p;
            }
            if ctx.dot(&w[..d - 1], &w[..d - 1]) == w[d - 1] {
                direct += 1;
            }
            let yy = ctx.dot(y.underline(), y.underline());
            if yy != 0 && ctx.dot(x.underline(), y.underline()) == yy {
                under += 1;
            }
        }
    }
    if direct != under {
        return Err(Error::NumericalInconsistency(format!(
            "incidence counts disagree: direct {direct}, underline {under}"
        )));
    }
    let ab = (a.len() * b.len()) as f64;
    let pf = p as f64;
    let bound = ab / pf + pf.powf((d as f64 - 2.0) / 2.0) * ab.sqrt();
    Ok(IncidenceReport { count: direct, count_underline: under, bound, holds: direct as f64 <= bound + 1e-9 * bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn ctx(p: u64) -> FieldCtx {
        FieldCtx::new(p).unwrap()
    }

    #[test]
    fn energy_of_small_sets() {
        let f = ctx(3);
        let l = Limits::default();
        let par = SurfaceSet::paraboloid(&f, 2, &l).unwrap();
        for counter in energy_counters() {
            assert_eq!(counter.count(&f, &par, &l).unwrap(), 15, "{}", counter.name());
        }
        let single = SurfaceSet::lift_underlines(&f, 2, [[1u32]]).unwrap();
        for counter in energy_counters() {
            assert_eq!(counter.count(&f, &single, &l).unwrap(), 1, "{}", counter.name());
        }
    }

    #[test]
    fn counter_lookup() {
        assert_eq!(energy_counter("l4").unwrap().name(), "l4");
        assert!(energy_counter("fft").is_none());
    }

    #[test]
    fn oracle_size_guard() {
        let f = ctx(5);
        let par = SurfaceSet::paraboloid(&f, 4, &Limits::default()).unwrap();
        assert!(matches!(energy_quadruple_oracle(&f, &par), Err(Error::InstanceTooLarge { .. })));
    }

    #[test]
    fn l4_requires_paraboloid() {
        let f = ctx(5);
        let l = Limits::default();
        let sphere = SurfaceSet::sphere(&f, 3, f.scalar(1), &l).unwrap();
        assert!(matches!(energy_via_l4(&f, &sphere, &l), Err(Error::WrongVariety { .. })));
    }

    #[test]
    fn m1_m2_examples() {
        let f = ctx(3);
        let l = Limits::default();
        let par = SurfaceSet::paraboloid(&f, 2, &l).unwrap();
        let r = m1_m2_decompose(&f, &par, &l).unwrap();
        assert_eq!((r.m1, r.m2, r.lambda), (Some(9), Some(6), 15));
        assert!(r.invariants_hold());
        assert_eq!(r.ratio, None);

        let single = SurfaceSet::lift_underlines(&f, 4, [[2u32, 0, 1]]).unwrap();
        let r = m1_m2_decompose(&f, &single, &l).unwrap();
        assert_eq!((r.m1, r.m2), (Some(1), Some(0)));
    }

    #[test]
    fn energy_bound_single_point() {
        let f = ctx(3);
        let l = Limits::default();
        let single = SurfaceSet::lift_underlines(&f, 4, [[0u32, 0, 0]]).unwrap();
        let r = energy_bound_report(&f, &single, &l).unwrap();
        assert!((r.ratio.unwrap() - 0.3).abs() < 1e-12);
        let odd = SurfaceSet::lift_underlines(&f, 3, [[0u32, 0]]).unwrap();
        assert!(matches!(energy_bound_report(&f, &odd, &l), Err(Error::UnsupportedDimension { .. })));
    }

    #[test]
    fn incidence_examples() {
        let f = ctx(3);
        let l = Limits::default();
        let par = SurfaceSet::paraboloid(&f, 2, &l).unwrap();
        let b = SurfaceSet::lift_underlines(&f, 2, [[1u32], [2]]).unwrap();
        let r = incidence_count(&f, &par, &b).unwrap();
        assert_eq!(r.count, 2);
        assert!((r.bound - (2.0 + 6f64.sqrt())).abs() < 1e-12);
        assert!(r.holds);

        let y = SurfaceSet::lift_underlines(&f, 4, [[1u32, 0, 0]]).unwrap();
        let r = incidence_count(&f, &y, &y).unwrap();
        assert_eq!(r.count, 1);
        assert!(r.holds);

        let bad = SurfaceSet::lift_underlines(&f, 4, [[1u32, 1, 1]]).unwrap();
        assert!(matches!(incidence_count(&f, &y, &bad), Err(Error::PreconditionViolated(_))));
        let origin = SurfaceSet::subset_of(&f, &crate::geometry::Variety::Paraboloid { d: 2 }, vec![Point::origin(2)]).unwrap();
        assert!(matches!(incidence_count(&f, &par, &origin), Err(Error::PreconditionViolated(_))));
    }
}
