//! Point sets on the paraboloid `P = {(x̲, x̲·x̲)}` and on spheres
//! `S_j = {x : x·x = j}`, the Galilean maps of `P`, affine flats inside `P`
//! and the exponent constraints those flats force.

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, Scalar};
use crate::grid::{pow_size, Grid, Limits};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    coords: Vec<u32>,
}

impl Point {
    /// Builds a point from arbitrary integers, reducing mod p.
    pub fn new(ctx: &FieldCtx, coords: &[i64]) -> Self {
        Point { coords: coords.iter().map(|&c| ctx.scalar(c).value()).collect() }
    }

    /// Builds a point from residues already in `[0, p)`.
    pub fn from_residues(coords: Vec<u32>) -> Self {
        Point { coords }
    }

    pub fn origin(d: usize) -> Self {
        Point { coords: vec![0; d] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    /// All coordinates except the last.
    pub fn underline(&self) -> &[u32] {
        &self.coords[..self.coords.len() - 1]
    }

    pub fn last(&self) -> Scalar {
        Scalar::from_reduced(self.coords[self.coords.len() - 1])
    }

    pub fn is_on_paraboloid(&self, ctx: &FieldCtx) -> bool {
        self.dim() >= 2 && ctx.dot(self.underline(), self.underline()) == self.last().value()
    }

    /// Lifts `x̲` to `(x̲, x̲·x̲)`.
    pub fn lift(ctx: &FieldCtx, underline: &[u32]) -> Self {
        let mut coords = underline.to_vec();
        coords.push(ctx.dot(underline, underline));
        Point { coords }
    }

    pub fn add(&self, ctx: &FieldCtx, other: &Point) -> Point {
        let p = ctx.p();
        Point { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| (a + b) % p).collect() }
    }

    pub fn sub(&self, ctx: &FieldCtx, other: &Point) -> Point {
        let p = ctx.p();
        Point {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| (a + p - b) % p).collect(),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Variety {
    /// The full paraboloid in `F^d`.
    Paraboloid { d: usize },
    /// The full sphere `x·x = j` in `F^n`.
    Sphere { n: usize, j: u32 },
    /// A subset of the contained variety.
    Subset(Box<Variety>),
}

impl Variety {
    /// Ambient dimension `d` when this is `P` or a subset of `P`.
    pub fn paraboloid_dim(&self) -> Option<usize> {
        match self {
            Variety::Paraboloid { d } => Some(*d),
            Variety::Sphere { .. } => None,
            Variety::Subset(inner) => inner.paraboloid_dim(),
        }
    }

    fn root(&self) -> &Variety {
        match self {
            Variety::Subset(inner) => inner.root(),
            v => v,
        }
    }

    fn name(&self) -> &'static str {
        match self.root() {
            Variety::Paraboloid { .. } => "paraboloid",
            _ => "sphere",
        }
    }
}

impl fmt::Display for Variety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variety::Paraboloid { d } => write!(f, "paraboloid(d={d})"),
            Variety::Sphere { n, j } => write!(f, "sphere(n={n}, j={j})"),
            Variety::Subset(inner) => write!(f, "subset of {inner}"),
        }
    }
}

/// A finite point set on a variety, with a lookup from underline
/// coordinates (all coordinates, for spheres) to position.
#[derive(Debug, Clone)]
pub struct SurfaceSet {
    variety: Variety,
    p: u32,
    points: Vec<Point>,
    underline_index: HashMap<u64, usize>,
}

fn pack(p: u32, coords: &[u32]) -> u64 {
    coords.iter().fold(0u64, |acc, &c| acc * p as u64 + c as u64)
}

impl SurfaceSet {
    /// All `p^{d-1}` points of the paraboloid, lexicographic in `x̲`.
    pub fn paraboloid(ctx: &FieldCtx, d: usize, limits: &Limits) -> Result<Self> {
        if d < 2 {
            return Err(Error::BadParameter(format!("paraboloid needs d >= 2, got {d}")));
        }
        let under = Grid::new(ctx.p(), d - 1, limits)?;
        let mut points = Vec::with_capacity(under.len());
        under.for_each(|_, c| points.push(Point::lift(ctx, c)));
        Self::assemble(ctx, Variety::Paraboloid { d }, points)
    }

    /// All `x ∈ F^n` with `x·x = j`.
    pub fn sphere(ctx: &FieldCtx, n: usize, j: Scalar, limits: &Limits) -> Result<Self> {
        if n < 1 {
            return Err(Error::BadParameter("sphere needs n >= 1".into()));
        }
        let grid = Grid::new(ctx.p(), n, limits)?;
        let mut points = Vec::new();
        grid.for_each(|_, c| {
            if ctx.dot(c, c) == j.value() {
                points.push(Point::from_residues(c.to_vec()));
            }
        });
        Self::assemble(ctx, Variety::Sphere { n, j: j.value() }, points)
    }

    /// Lifts a list of underline vectors `x̲ ∈ F^{d-1}` to a subset of `P`.
    pub fn lift_underlines<I>(ctx: &FieldCtx, d: usize, underlines: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: AsRef<[u32]>,
    {
        let mut points = Vec::new();
        for u in underlines {
            let u = u.as_ref();
            if u.len() + 1 != d {
                return Err(Error::DimensionMismatch { expected: d - 1, got: u.len() });
            }
            points.push(Point::lift(ctx, u));
        }
        Self::assemble(ctx, Variety::Subset(Box::new(Variety::Paraboloid { d })), points)
    }

    /// Validates `points` against `parent` and wraps them as a subset of it.
    pub fn subset_of(ctx: &FieldCtx, parent: &Variety, points: Vec<Point>) -> Result<Self> {
        let root = parent.root().clone();
        for pt in &points {
            Self::check_on(ctx, &root, pt)?;
        }
        Self::assemble(ctx, Variety::Subset(Box::new(root)), points)
    }

    /// Keeps the points selected by `keep`, preserving order.
    pub fn filter(&self, mut keep: impl FnMut(&Point) -> bool) -> SurfaceSet {
        let points: Vec<Point> = self.points.iter().filter(|pt| keep(pt)).cloned().collect();
        let variety = Variety::Subset(Box::new(self.variety.root().clone()));
        let underline_index = points
            .iter()
            .enumerate()
            .map(|(i, pt)| (pack(self.p, self.key_coords(pt)), i))
            .collect();
        SurfaceSet { variety, p: self.p, points, underline_index }
    }

    fn check_on(ctx: &FieldCtx, variety: &Variety, pt: &Point) -> Result<()> {
        let ok = match variety.root() {
            Variety::Paraboloid { d } => pt.dim() == *d && pt.is_on_paraboloid(ctx),
            Variety::Sphere { n, j } => pt.dim() == *n && ctx.dot(pt.coords(), pt.coords()) == *j,
            Variety::Subset(_) => unreachable!(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NotOnVariety { coords: pt.coords().to_vec(), variety: variety.name() })
        }
    }

    fn key_coords<'a>(&self, pt: &'a Point) -> &'a [u32] {
        match self.variety.root() {
            Variety::Paraboloid { .. } => pt.underline(),
            _ => pt.coords(),
        }
    }

    fn assemble(ctx: &FieldCtx, variety: Variety, points: Vec<Point>) -> Result<Self> {
        let mut set =
            SurfaceSet { variety, p: ctx.p(), points: Vec::new(), underline_index: HashMap::new() };
        set.underline_index.reserve(points.len());
        for (i, pt) in points.iter().enumerate() {
            let key = pack(ctx.p(), set.key_coords(pt));
            if set.underline_index.insert(key, i).is_some() {
                return Err(Error::BadParameter(format!("duplicate point {pt}")));
            }
        }
        set.points = points;
        Ok(set)
    }

    pub fn variety(&self) -> &Variety {
        &self.variety
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    /// Ambient `d` if the set lies on a paraboloid.
    pub fn paraboloid_dim(&self) -> Option<usize> {
        self.variety.paraboloid_dim()
    }

    /// Errors unless the set lies on a paraboloid; returns its `d`.
    pub fn require_paraboloid(&self) -> Result<usize> {
        self.paraboloid_dim().ok_or_else(|| Error::WrongVariety { got: self.variety.to_string() })
    }

    /// Position of the point whose underline (all coordinates, for spheres) is `key`.
    pub fn position_of_underline(&self, key: &[u32]) -> Option<usize> {
        self.underline_index.get(&pack(self.p, key)).copied()
    }

    pub fn contains(&self, pt: &Point) -> bool {
        match self.position_of_underline(self.key_coords(pt)) {
            Some(i) => self.points[i] == *pt,
            None => false,
        }
    }
}

/// `G_{-y}(z) = (z̲ - y̲, z_d - 2 z̲·y̲ + y̲·y̲)`, which sends `y` to the origin.
pub fn galilean(ctx: &FieldCtx, y: &Point, z: &Point) -> Result<Point> {
    for pt in [y, z] {
        if !pt.is_on_paraboloid(ctx) {
            return Err(Error::NotOnVariety { coords: pt.coords().to_vec(), variety: "paraboloid" });
        }
    }
    if y.dim() != z.dim() {
        return Err(Error::DimensionMismatch { expected: y.dim(), got: z.dim() });
    }
    let p = ctx.p();
    let (yu, zu) = (y.underline(), z.underline());
    let mut coords: Vec<u32> = zu.iter().zip(yu).map(|(a, b)| (a + p - b) % p).collect();
    let zy = ctx.dot(zu, yu) as u64;
    let yy = ctx.dot(yu, yu) as u64;
    let p64 = p as u64;
    let last = (z.last().value() as u64 + 2 * (p64 - zy) + yy) % p64;
    coords.push(last as u32);
    Ok(Point::from_residues(coords))
}

/// `x / (x·x)` for `x` off the 0-sphere.
pub fn sphere_inversion(ctx: &FieldCtx, x: &[u32]) -> Option<Vec<u32>> {
    let norm = ctx.dot(x, x);
    if norm == 0 {
        return None;
    }
    let inv = ctx.inv(Scalar::from_reduced(norm)).ok()?;
    Some(x.iter().map(|&c| ctx.mul(Scalar::from_reduced(c), inv).value()).collect())
}

/// An affine `k`-flat `base + span(directions)` lying inside `P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceWitness {
    pub base: Point,
    pub directions: Vec<Vec<u32>>,
    pub k: usize,
}

impl SubspaceWitness {
    /// All `p^k` points of the flat, lexicographic in the parameters.
    pub fn points(&self, ctx: &FieldCtx) -> Vec<Point> {
        let params = Grid { p: ctx.p(), d: self.k };
        let p = ctx.p() as u64;
        let mut out = Vec::with_capacity(params.len());
        params.for_each(|_, t| {
            let coords = (0..self.base.dim())
                .map(|c| {
                    let mut v = self.base.coords()[c] as u64;
                    for (ti, dir) in t.iter().zip(&self.directions) {
                        v += *ti as u64 * dir[c] as u64;
                    }
                    (v % p) as u32
                })
                .collect();
            out.push(Point::from_residues(coords));
        });
        out
    }

    /// Exhaustively checks that every point of the flat lies on `P`.
    pub fn verify(&self, ctx: &FieldCtx) -> bool {
        self.directions.len() == self.k && self.points(ctx).iter().all(|pt| pt.is_on_paraboloid(ctx))
    }
}

/// Searches for an affine `k_target`-flat inside the paraboloid in `F^d`.
///
/// Galilean maps are affine bijections of `P`, so any flat in `P` can be
/// moved to pass through the origin; the search therefore fixes the base at
/// the origin. A flat through the origin lies in `P` exactly when its
/// directions `v` have `v_d = 0` and pairwise orthogonal isotropic
/// underlines, so candidates are normalized isotropic vectors (first nonzero
/// coordinate equal to 1) in lexicographic order. Returns `Ok(None)` once
/// the candidate space is exhausted.
pub fn max_affine_subspace(
    ctx: &FieldCtx,
    d: usize,
    k_target: usize,
    limits: &Limits,
) -> Result<Option<SubspaceWitness>> {
    if !(1..=2).contains(&k_target) {
        return Err(Error::BadParameter(format!("k_target must be 1 or 2, got {k_target}")));
    }
    if d < 2 {
        return Err(Error::BadParameter(format!("paraboloid needs d >= 2, got {d}")));
    }
    limits.check("subspace search grid", pow_size(ctx.p(), d), limits.max_subspace_grid)?;
    let under = Grid { p: ctx.p(), d: d - 1 };
    let mut isotropic: Vec<Vec<u32>> = Vec::new();
    under.for_each(|_, c| {
        let lead = c.iter().find(|&&x| x != 0);
        if lead == Some(&1) && ctx.dot(c, c) == 0 {
            isotropic.push(c.to_vec());
        }
    });

    let as_direction = |v: &[u32]| {
        let mut dir = v.to_vec();
        dir.push(0);
        dir
    };
    let found = match k_target {
        1 => isotropic.first().map(|v| vec![as_direction(v)]),
        _ => {
            let mut pair = None;
            'outer: for (i, a) in isotropic.iter().enumerate() {
                for b in &isotropic[i + 1..] {
                    if ctx.dot(a, b) == 0 {
                        pair = Some(vec![as_direction(a), as_direction(b)]);
                        break 'outer;
                    }
                }
            }
            pair
        }
    };
    let Some(directions) = found else {
        return Ok(None);
    };
    let witness = SubspaceWitness { base: Point::origin(d), directions, k: k_target };
    if !witness.verify(ctx) {
        return Err(Error::NumericalInconsistency(format!(
            "candidate flat {witness:?} failed point-by-point verification"
        )));
    }
    Ok(Some(witness))
}

/// Smallest `r` allowed by a `k`-flat in `P`:
/// `max(2d/(d-1), p(d-k)/((p-1)(d-1-k)))`.
pub fn necessary_r(p_exp: Ratio<i64>, d: usize, k: usize) -> Result<Ratio<i64>> {
    if p_exp <= Ratio::from_integer(1) {
        return Err(Error::BadExponent(*p_exp.numer() as f64 / *p_exp.denom() as f64));
    }
    if d < 2 {
        return Err(Error::BadParameter(format!("d must be >= 2, got {d}")));
    }
    if k + 1 >= d {
        return Err(Error::DegenerateSubspace { d, k });
    }
    let (d, k) = (d as i64, k as i64);
    let stein = Ratio::new(2 * d, d - 1);
    let flat = p_exp * Ratio::from_integer(d - k) / ((p_exp - 1) * Ratio::from_integer(d - 1 - k));
    Ok(stein.max(flat))
}
