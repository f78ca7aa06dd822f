//! Verification suites selected by name, and the drivers that run them over
//! a grid of `(p, d)` and collect report rows in a fixed order.

use std::time::Instant;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::char_sums::{
    gauss_sum_eta, gauss_sum_t, kernel_modulus, kernel_k, sphere_fourier_closed, surface_inverse_table,
    twisted_kloosterman,
};
use crate::energy::{energy_count, energy_counters, incidence_count, m1_m2_decompose, EnergyReport};
use crate::error::{Error, Result};
use crate::families::{random_dense_func, random_grid_func, random_indicator, random_subset, sphere_slice, Family};
use crate::field::{FieldCtx, Scalar};
use crate::fourier::{
    convolve, dft_forward, extension, idft, inner_product, lp_norm, restrict_to_surface, LatticeFunc, MeasureTag,
    Measured, SurfaceFunc,
};
use crate::geometry::{galilean, max_affine_subspace, necessary_r, SurfaceSet};
use crate::grid::{pow_size, Grid, Limits};
use crate::report::{Num, ReportRow};
use crate::restriction::{
    comb_estimate_check, norm_lower_bound, slice_bound_check, stein_tomas_check, theorem_pipeline, NormMethod,
};

/// Regression caps on recorded ratios.
pub const ENERGY_RATIO_CAP: f64 = 16.0;
pub const SLICE_RATIO_CAP: f64 = 8.0;
pub const COMB_RATIO_CAP: f64 = 8.0;
pub const PIPELINE_RATIO_CAP: f64 = 32.0;
pub const NORM_CAP: f64 = 4.0;

/// Largest set handed to the quadruple oracle and the triple split.
const ENERGY_SET_CAP: usize = 48;
const INCIDENCE_SET_CAP: usize = 1024;
const SLICE_SUPPORT_CAP: usize = 512;
const NORM_ITERS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub primes: Vec<u64>,
    pub dims: Vec<usize>,
    pub suites: Vec<String>,
    pub trials: usize,
    pub seed: u64,
    pub limits: Limits,
    /// Fill the `ms` column with wall time; off by default so reports are reproducible.
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            primes: vec![3, 5, 7],
            dims: vec![2, 3, 4],
            suites: SuiteRegistry::builtin().names().iter().map(|s| s.to_string()).collect(),
            trials: 50,
            seed: 0,
            limits: Limits::default(),
            timings: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self, registry: &SuiteRegistry) -> Result<()> {
        if self.primes.is_empty() {
            return Err(Error::BadParameter("no primes given".into()));
        }
        for &p in &self.primes {
            FieldCtx::new(p)?;
        }
        if self.dims.is_empty() {
            return Err(Error::BadParameter("no dimensions given".into()));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(Error::BadParameter(format!("dimension {d} is below 2")));
        }
        if self.trials == 0 {
            return Err(Error::BadParameter("trials must be at least 1".into()));
        }
        if self.suites.is_empty() {
            return Err(Error::BadParameter("empty suite list".into()));
        }
        for s in &self.suites {
            if registry.get(s).is_none() {
                return Err(Error::BadParameter(format!(
                    "unknown suite {s:?}; known: {}",
                    registry.names().join(",")
                )));
            }
        }
        Ok(())
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `seed ⊕ hash(suite, p, d, trial)`.
pub fn trial_seed(seed: u64, suite: &str, p: u32, d: usize, trial: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let bytes = suite
        .bytes()
        .chain([0xff])
        .chain(p.to_le_bytes())
        .chain((d as u64).to_le_bytes())
        .chain((trial as u64).to_le_bytes());
    for b in bytes {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    seed ^ splitmix(h)
}

/// Everything a suite sees for one `(p, d)`.
pub struct SuiteEnv<'a> {
    pub suite: &'static str,
    pub ctx: &'a FieldCtx,
    pub p: u32,
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    pub limits: &'a Limits,
    pub timings: bool,
}

impl SuiteEnv<'_> {
    pub fn seed_for(&self, trial: usize) -> u64 {
        trial_seed(self.seed, self.suite, self.p, self.d, trial)
    }

    fn row(&self, case: String, lhs: Num, rhs: Num, ratio: Num, pass: bool, seed: u64, ms: u64) -> ReportRow {
        ReportRow { suite: self.suite.into(), p: self.p, d: self.d, case, lhs, rhs, ratio, pass, seed, ms }
    }

    /// A row asserting `lhs ≤ rhs + τ`.
    pub fn assert_row(&self, case: String, lhs: Num, rhs: Num, seed: u64, ms: u64) -> ReportRow {
        let (l, r) = (lhs.as_f64(), rhs.as_f64());
        let pass = l <= r + 1e-9 * (1.0 + r.abs());
        self.row(case, lhs, rhs, Num::Real(ratio(l, r)), pass, seed, ms)
    }

    /// A row recording `lhs / rhs` against a regression cap.
    pub fn record_row(&self, case: String, lhs: Num, rhs: Num, cap: f64, seed: u64, ms: u64) -> ReportRow {
        let q = ratio(lhs.as_f64(), rhs.as_f64());
        self.row(case, lhs, rhs, Num::Real(q), q <= cap, seed, ms)
    }

    /// Runs `trial` for every trial index in parallel; rows come back in trial order.
    pub fn per_trial<F>(&self, trial: F) -> Result<Vec<ReportRow>>
    where
        F: Fn(usize, u64, &mut Timer) -> Result<Vec<ReportRow>> + Sync,
    {
        let chunks: Vec<Vec<ReportRow>> = (0..self.trials)
            .into_par_iter()
            .map(|t| {
                let mut timer = Timer::new(self.timings);
                trial(t, self.seed_for(t), &mut timer)
            })
            .collect::<Result<_>>()?;
        Ok(chunks.into_iter().flatten().collect())
    }
}

fn ratio(l: f64, r: f64) -> f64 {
    if r == 0.0 {
        if l == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        l / r
    }
}

/// Milliseconds since the last lap, or always 0 when timings are off.
pub struct Timer {
    start: Option<Instant>,
}

impl Timer {
    pub fn new(enabled: bool) -> Self {
        Timer { start: enabled.then(Instant::now) }
    }

    pub fn lap(&mut self) -> u64 {
        match self.start.as_mut() {
            Some(s) => {
                let ms = s.elapsed().as_millis() as u64;
                *s = Instant::now();
                ms
            }
            None => 0,
        }
    }
}

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    /// Whether the suite has anything to check at dimension `d`.
    fn applies(&self, _d: usize) -> bool {
        true
    }
    fn run(&self, env: &SuiteEnv<'_>) -> Result<Vec<ReportRow>>;
}

pub struct SuiteRegistry {
    suites: Vec<Box<dyn Suite>>,
}

impl SuiteRegistry {
    pub fn builtin() -> Self {
        SuiteRegistry {
            suites: vec![
                Box::new(Identities),
                Box::new(CharSums),
                Box::new(Energy),
                Box::new(Mlem1),
                Box::new(SteinTomas),
                Box::new(Pipeline),
                Box::new(Norms),
                Box::new(Subspaces),
            ],
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.iter().map(|s| s.name()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&dyn Suite> {
        self.suites.iter().find(|s| s.name() == name).map(|s| s.as_ref())
    }
}

/// Runs the configured suites in `(suite, p, d)` order.
pub fn run_verify(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let registry = SuiteRegistry::builtin();
    cfg.validate(&registry)?;
    let mut rows = Vec::new();
    for name in &cfg.suites {
        let suite = registry.get(name).expect("validated");
        for &p in &cfg.primes {
            let ctx = FieldCtx::new(p)?;
            for &d in &cfg.dims {
                if !suite.applies(d) {
                    continue;
                }
                let env = SuiteEnv {
                    suite: suite.name(),
                    ctx: &ctx,
                    p: ctx.p(),
                    d,
                    trials: cfg.trials,
                    seed: cfg.seed,
                    limits: &cfg.limits,
                    timings: cfg.timings,
                };
                rows.extend(suite.run(&env)?);
            }
        }
    }
    Ok(rows)
}

/// Like [`run_verify`], followed by one `max` row per `(suite, p, d)` holding
/// the largest finite ratio seen.
pub fn run_scan(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let rows = run_verify(cfg)?;
    let mut out: Vec<ReportRow> = Vec::with_capacity(rows.len());
    let mut i = 0;
    while i < rows.len() {
        let key = (&rows[i].suite, rows[i].p, rows[i].d);
        let mut j = i;
        while j < rows.len() && (&rows[j].suite, rows[j].p, rows[j].d) == key {
            j += 1;
        }
        let group = &rows[i..j];
        let max = group.iter().map(|r| r.ratio.as_f64()).filter(|x| x.is_finite()).fold(0.0, f64::max);
        let summary = ReportRow {
            suite: rows[i].suite.clone(),
            p: rows[i].p,
            d: rows[i].d,
            case: "max".into(),
            lhs: Num::Real(max),
            rhs: Num::Int(group.len() as u64),
            ratio: Num::Real(max),
            pass: group.iter().all(|r| r.pass),
            seed: trial_seed(cfg.seed, "summary", rows[i].p, rows[i].d, 0),
            ms: 0,
        };
        out.extend_from_slice(group);
        out.push(summary);
        i = j;
    }
    Ok(out)
}

/// 0 when every row passes, 1 otherwise.
pub fn exit_code(rows: &[ReportRow]) -> i32 {
    if rows.iter().all(|r| r.pass) {
        0
    } else {
        1
    }
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn random_surface_func<'s>(par: &'s SurfaceSet, rng: &mut ChaCha8Rng) -> SurfaceFunc<'s> {
    let vals = (0..par.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    SurfaceFunc::new(par, vals).expect("length matches")
}

/// Orthogonality, Parseval, inversion, adjointness and the convolution theorem.
struct Identities;

impl Suite for Identities {
    fn name(&self) -> &'static str {
        "identities"
    }

    fn run(&self, env: &SuiteEnv<'_>) -> Result<Vec<ReportRow>> {
        let ctx = env.ctx;
        let grid = Grid::new(env.p, env.d, env.limits)?;
        let par = SurfaceSet::paraboloid(ctx, env.d, env.limits)?;
        let n = grid.len() as f64;
        env.per_trial(|t, seed, timer| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = Vec::new();

            // Σ_x e(x·(ξ - η)) = p^d δ(ξ, η), summed directly.
            let xi = rng.gen_range(0..grid.len());
            let eta = if rng.gen_bool(0.5) { xi } else { rng.gen_range(0..grid.len()) };
            let diff = grid.coords(grid.sub_index(xi, eta));
            let mut sum = Complex64::new(0.0, 0.0);
            grid.for_each(|_, x| sum += ctx.additive_char(Scalar::from_reduced(ctx.dot(x, &diff))));
            let expected = if xi == eta { n } else { 0.0 };
            let err = (sum - expected).norm() / n;
            rows.push(env.assert_row(format!("orthogonality-{t}"), Num::Real(err), Num::Real(1e-9), seed, timer.lap()));

            let g = random_dense_func(grid, &mut rng);
            let hat = dft_forward(ctx, &g)?;
            let l2 = lp_norm(&g, 2.0)?.powi(2);
            let hat_l2 = lp_norm(&hat, 2.0)?.powi(2);
            let err = (l2 - hat_l2).abs() / (1.0 + l2);
            rows.push(env.assert_row(format!("parseval-{t}"), Num::Real(err), Num::Real(1e-9), seed, timer.lap()));

            let back = idft(ctx, &hat)?;
            let scale = 1.0 + lp_norm(&g, f64::INFINITY)?;
            let err = max_abs_diff(back.values(), g.values()) / scale;
            rows.push(env.assert_row(format!("roundtrip-{t}"), Num::Real(err), Num::Real(1e-9), seed, timer.lap()));

            // Σ_x (f dσ)^∨(x) conj(g(x)) = ⟨f, ĝ⟩ in L^2(P, dσ).
            let f = random_surface_func(&par, &mut rng);
            let ext = extension(ctx, &f, env.limits)?;
            let left = inner_product(&ext, &g)?;
            let right = inner_product(&f, &restrict_to_surface(&hat, &par)?)?;
            let mass = 1.0 + ext.values().iter().zip(g.values()).map(|(a, b)| (a * b).norm()).sum::<f64>();
            let err = (left - right).norm() / mass;
            rows.push(env.assert_row(format!("adjoint-{t}"), Num::Real(err), Num::Real(1e-9), seed, timer.lap()));

            // (a * b)^ = â b̂ with a sparse.
            let a = random_indicator(grid, rng.gen_range(1..=8usize.min(grid.len())), &mut rng);
            let conv_hat = dft_forward(ctx, &convolve(&a, &g)?)?;
            let a_hat = dft_forward(ctx, &a)?;
            let prod: Vec<Complex64> = a_hat.values().iter().zip(hat.values()).map(|(x, y)| x * y).collect();
            let scale = 1.0 + prod.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let err = max_abs_diff(conv_hat.values(), &prod) / scale;
            rows.push(env.assert_row(format!("convolution-{t}"), Num::Real(err), Num::Real(1e-9), seed, timer.lap()));
            Ok(rows)
        })
    }
}

/// Gauss and twisted Kloosterman moduli, closed forms of `(dσ)^∨` and
/// `S_j^∨`, and sphere sizes. Runs once per `(p, d)`; `trials` is unused.
struct CharSums;

impl Suite for CharSums {
    fn name(&self) -> &'static str {
        "charsums"
    }

    fn run(&self, env: &SuiteEnv<'_>) -> Result<Vec<ReportRow>> {
        let ctx = env.ctx;
        let (p, d) = (env.p, env.d);
        let seed = env.seed_for(0);
        let mut timer = Timer::new(env.timings);
        let root = (p as f64).sqrt();
        let mut rows = Vec::new();

        let gauss_err = ctx
            .elements()
            .skip(1)
            .map(|t| gauss_sum_t(ctx, t).map(|g| (g.norm() - root).abs()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rows.push(env.assert_row("gauss".into(), Num::Real(gauss_err), Num::Real(1e-9), seed, timer.lap()));
        let eta_err = (gauss_sum_eta(ctx).norm() - root).abs();
        rows.push(env.assert_row("gauss-eta".into(), Num::Real(eta_err), Num::Real(1e-9), seed, timer.lap()));

        let tk_max = ctx
            .elements()
            .flat_map(|a| ctx.elements().map(move |b| (a, b)))
            .map(|(a, b)| twisted_kloosterman(ctx, a, b).norm())
            .fold(0.0, f64::max);
        rows.push(env.assert_row("kloosterman".into(), Num::Real(tk_max), Num::Real(2.0 * root), seed, timer.lap()));

        let par = SurfaceSet::paraboloid(ctx, d, env.limits)?;
        let closed = surface_inverse_table(ctx, d, env.limits)?;
        let direct = extension(ctx, &SurfaceFunc::constant(&par, Complex64::new(1.0, 0.0)), env.limits)?;
        let err = max_abs_diff(closed.values(), direct.values());
        rows.push(env.assert_row("evaluation".into(), Num::Real(err), Num::Real(1e-8), seed, timer.lap()));

        let kernel = kernel_k(ctx, d, env.limits)?.values;
        let modulus = kernel_modulus(p, d);
        let kerr = kernel
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| if i % p as usize == 0 { v.norm() } else { (v.norm() - modulus).abs() })
            .fold(0.0, f64::max);
        rows.push(env.assert_row("kernel-modulus".into(), Num::Real(kerr), Num::Real(1e-12), seed, timer.lap()));

        // Sphere transforms in F^n with n = d, against enumeration through the inverse DFT.
        let n = d;
        let grid = Grid::new(p, n, env.limits)?;
        let mut err: f64 = 0.0;
        let mut co_max: f64 = 0.0;
        let mut s0 = 0usize;
        for j in ctx.elements() {
            let mut ind = LatticeFunc::zeros(grid, MeasureTag::NormalizedOnDual);
            let mut size = 0;
            grid.for_each(|idx, x| {
                if ctx.dot(x, x) == j.value() {
                    ind.values_mut()[idx] = Complex64::new(1.0, 0.0);
                    size += 1;
                }
            });
            let enumerated = idft(ctx, &ind)?;
            let mut coords = vec![0u32; n];
            for (idx, v) in enumerated.values().iter().enumerate() {
                grid.coords_into(idx, &mut coords);
                let c = sphere_fourier_closed(ctx, n, j, &coords)?;
                err = err.max((c - v).norm());
                if j.is_zero() && idx != 0 {
                    co_max = co_max.max(c.norm());
                }
            }
            if j.is_zero() {
                s0 = size;
            }
        }
        rows.push(env.assert_row("sphere-closed".into(), Num::Real(err), Num::Real(1e-8), seed, timer.lap()));
        let decay = if n % 2 == 1 { (n as f64 + 1.0) / 2.0 } else { n as f64 / 2.0 };
        let co_bound = 3.0 * (p as f64).powf(-decay);
        rows.push(env.assert_row("sphere-cobound".into(), Num::Real(co_max), Num::Real(co_bound), seed, timer.lap()));
        if n >= 3 {
            let expected = pow_size(p, n - 1) as f64;
            let size = s0 as u64;
            rows.push(env.assert_row("sphere-size-upper".into(), Num::Int(size), Num::Real(2.0 * expected), seed, 0));
            rows.push(env.assert_row("sphere-size-lower".into(), Num::Real(expected / 2.0), Num::Int(size), seed, 0));
        }
        Ok(rows)
    }
}

fn apply_galilean(ctx: &FieldCtx, set: &SurfaceSet, y_pos: usize) -> Result<SurfaceSet> {
    let y = &set.points()[y_pos];
    let d = set.require_paraboloid()?;
    let moved = set.iter().map(|z| galilean(ctx, y, z).map(|pt| pt.underline().to_vec())).collect::<Result<Vec<_>>>()?;
    SurfaceSet::lift_underlines(ctx, d, moved)
}

/// Three-way energy agreement, the `M1/M2` split, Galilean invariance, and
/// for even `d ≥ 4` the energy-bound ratio.
struct Energy;

impl Suite for Energy {
    fn name(&self) -> &'static str {
        "energy"
    }

    fn run(&self, env: &SuiteEnv<'_>) -> Result<Vec<ReportRow>> {
        let ctx = env.ctx;
        let par = SurfaceSet::paraboloid(ctx, env.d, env.limits)?;
        let counters = energy_counters();
        let even = env.d >= 4 && env.d.is_multiple_of(2);
        env.per_trial(|t, seed, timer| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fam = Family::ALL[t % Family::ALL.len()];
            let set = fam.sample(ctx, &par, ENERGY_SET_CAP, &mut rng, env.limits)?;
            let tag = format!("{}-{t}", fam.name());
            let mut rows = Vec::new();
            if set.is_empty() {
                return Ok(rows);
            }

            let counts = counters.iter().map(|c| c.count(ctx, &set, env.limits)).collect::<Result<Vec<u64>>>()?;
            let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
            rows.push(env.assert_row(format!("agree-{tag}"), Num::Int(spread), Num::Int(0), seed, timer.lap()));

            let report: EnergyReport = m1_m2_decompose(ctx, &set, env.limits)?;
            let split = report.m1.unwrap_or(0) + report.m2.unwrap_or(0);
            rows.push(env.assert_row(format!("m1m2-{tag}"), Num::Int(report.lambda), Num::Int(split), seed, timer.lap()));

            let moved = apply_galilean(ctx, &set, rng.gen_range(0..set.len()))?;
            let lam = energy_count(ctx, &moved, env.limits)?;
            let moved_report = m1_m2_decompose(ctx, &moved, env.limits)?;
            let moved_split = moved_report.m1.unwrap_or(0) + moved_report.m2.unwrap_or(0);
            let drift = lam.abs_diff(report.lambda) + moved_split.abs_diff(split);
            rows.push(env.assert_row(format!("galilean-{tag}"), Num::Int(drift), Num::Int(0), seed, timer.lap()));

            if even {
                // The bound is checked on the family member at full size; only `Λ` is needed.
                let big = fam.sample(ctx, &par, par.len(), &mut rng, env.limits)?;
                let lam = energy_count(ctx, &big, env.limits)?;
                let (n, pf) = (big.len() as f64, env.p as f64);
                let bound = n.powi(3) / pf + pf.powf((env.d as f64 - 2.0) / 2.0) * n * n;
                rows.push(env.record_row(
                    format!("ae-{}-{t}-n{}", fam.name(), big.len()),
                    Num::Int(lam),
                    Num::Real(bound),
                    ENERGY_RATIO_CAP,
                    seed,
                    timer.lap(),
                ));
            }
            Ok(rows)
        })
    }
}

/// The incidence bound `|A||B|/p + p^{(d-2)/2}(|A||B|)^{1/2}` with constant 1, one row per trial.
struct Mlem1;

impl Suite for Mlem1 {
    fn name(&self) -> &'static str {
        "mlem1"
    }

    fn run(&self, env: &SuiteEnv<'_>) -> Result<Vec<ReportRow>> {
        let ctx = env.ctx;
        let par = SurfaceSet::paraboloid(ctx, env.d, env.limits)?;
        let allowed = par.filter(|pt| ctx.dot(pt.underline(), pt.underline()) != 0);
        env.per_trial(|t, seed, timer| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cap = INCIDENCE_SET_CAP.min(par.len());
            let a = match t % 3 {
                0 => random_subset(&par, rng.gen_range(1..=cap), &mut rng),
                1 => {
                    let s = sphere_slice(ctx, &par, ctx.scalar(rng.gen_range(0..env.p as i64)));
                    random_subset(&s, cap, &mut rng)
                }
                _ => random_subset(&par, cap, &mut rng),
            };
            let b_cap = INCIDENCE_SET_CAP.min(allowed.len());
            let b = random_subset(&allowed, rng.gen_range(1..=b_cap), &mut rng);
            let inc = incidence_count(ctx, &a, &b)?;
            let case = format!("incidence-{t}-a{}-b{}", a.len(), b.len());
            Ok(vec![env.assert_row(case, Num::Int(inc.count), Num::Real(inc.bound), seed, timer.lap())])
        })
    }
}

fn inequality_rows(
    env: &SuiteEnv<'_>,
    t: usize,
    seed: u64,
    result: Result<(f64, f64, f64)>,
    ms: u64,
) -> Result<Vec<ReportRow>> {
    match result {
        Ok((lhs, r1, r2)) => Ok(vec![
            env.assert_row(format!("decay-{t}"), Num::Real(lhs), Num::Real(r1), seed, ms),
            env.assert_row(format!("parseval-{t}"), Num::Real(lhs), Num::Real(r2), seed, 0),
        ]),
        Err(Error::InequalityViolation { name, lhs, rhs }) => {
            Ok(vec![env.assert_row(format!("{name}-{t}"), Num::Real(lhs), Num::Real(rhs), seed, ms)])
        }
        Err(e) => Err(e),
    }
}

/// Both constant-1 `L^2` restriction estimates on random `g`; trial 0 also
/// checks the equality case `g ≡ 1`.
struct SteinTomas;

impl Suite for SteinTomas {
    fn name(&self) -> &'static str {
        "steintomas"
    }

    fn run(&self, env: &SuiteEnv<'_>) -> Result<Vec<ReportRow>> {
        let ctx = env.ctx;
        let grid = Grid::new(env.p, env.d, env.limits)?;
        env.per_trial(|t, seed, timer| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_dense_func(grid, &mut rng);
            let res = stein_tomas_check(ctx, &g, env.limits).map(|r| (r.lhs, r.decay_rhs, r.parseval_rhs));
            let mut rows = inequality_rows(env, t, seed, res, timer.lap())?;
            if t == 0 {
                let one = LatticeFunc::constant(grid, MeasureTag::CountingOnGrid, Complex64::new(1.0, 0.0));
                let r = stein_tomas_check(ctx, &one, env.limits)?;
                let gap = (r.lhs - r.parseval_rhs).abs();
                rows.push(env.assert_row(
                    "equality-constant".into(),
                    Num::Real(gap),
                    Num::Real(1e-9 * r.parseval_rhs),
                    seed,
                    timer.lap(),
                ));
            }
            Ok(rows)
        })
    }
}

/// Slice bound, three-regime estimate and the level-set pipeline, for even `d ≥ 4`.
struct Pipeline;

impl Suite for Pipeline {
    fn name(&self) -> &'static str {
        "pipeline"
    }

    fn applies(&self, d: usize) -> bool {
        d >= 4 && d.is_multiple_of(2)
    }

    fn run(&self, env: &SuiteEnv<'_>) -> Result<Vec<ReportRow>> {
        let ctx = env.ctx;
        let grid = Grid::new(env.p, env.d, env.limits)?;
        let n = grid.len();
        env.per_trial(|t, seed, timer| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = Vec::new();

            let g = random_grid_func(grid, &mut rng);
            let rep = theorem_pipeline(ctx, &g, env.limits)?;
            let total = rep.sum_i + rep.sum_ii + rep.sum_iii + rep.tail;
            rows.push(env.record_row(
                format!("pipeline-{t}"),
                Num::Real(rep.lhs),
                Num::Real(total),
                PIPELINE_RATIO_CAP,
                seed,
                timer.lap(),
            ));
            let bad_levels = if rep.support_bounds_hold { 0 } else { 1 };
            rows.push(env.assert_row(format!("level-support-{t}"), Num::Int(bad_levels), Num::Int(0), seed, 0));

            // Support sizes log-uniform over [1, p^d] so all three regimes appear.
            let size = (n as f64).powf(rng.gen_range(0.0..=1.0)).round().max(1.0) as usize;
            let ind = random_indicator(grid, size, &mut rng);
            let comb = comb_estimate_check(ctx, &ind, env.limits)?;
            rows.push(env.record_row(
                format!("comb-{}-{t}", comb.regime.label()),
                Num::Real(comb.lhs),
                Num::Real(comb.bound),
                COMB_RATIO_CAP,
                seed,
                timer.lap(),
            ));

            let ind = random_indicator(grid, size.min(SLICE_SUPPORT_CAP), &mut rng);
            let slice = slice_bound_check(ctx, &ind, env.limits)?;
            rows.push(env.record_row(
                format!("slice-{t}"),
                Num::Real(slice.lhs),
                Num::Real(slice.rhs),
                SLICE_RATIO_CAP,
                seed,
                timer.lap(),
            ));
            let bad = slice.slices.iter().filter(|s| !s.inequality_holds(env.p, env.d) || s.identity_error() > 1e-8);
            rows.push(env.assert_row(format!("slice-identity-{t}"), Num::Int(bad.count() as u64), Num::Int(0), seed, 0));
            Ok(rows)
        })
    }
}

/// Lower bounds for the `L^2 → L^4` extension constant.
struct Norms;

impl Suite for Norms {
    fn name(&self) -> &'static str {
        "norms"
    }

    fn run(&self, env: &SuiteEnv<'_>) -> Result<Vec<ReportRow>> {
        let ctx = env.ctx;
        let (two, four) = (Ratio::from_integer(2), Ratio::from_integer(4));
        env.per_trial(|t, seed, timer| {
            let est = norm_lower_bound(ctx, env.d, two, four, NORM_ITERS, seed, env.limits)?;
            let ms = timer.lap();
            let single = est.candidates.iter().find(|c| c.0 == NormMethod::SinglePoint).map_or(0.0, |c| c.1);
            let again = est.recompute(ctx, env.limits)?;
            Ok(vec![
                env.record_row(
                    format!("norm-{}-{t}", est.method.label()),
                    Num::Real(est.best_value),
                    Num::Int(1),
                    NORM_CAP,
                    seed,
                    ms,
                ),
                env.assert_row(format!("norm-certified-{t}"), Num::Real(single), Num::Real(est.best_value), seed, 0),
                env.assert_row(
                    format!("norm-recompute-{t}"),
                    Num::Real((again - est.best_value).abs()),
                    Num::Real(1e-12 * (1.0 + est.best_value)),
                    seed,
                    timer.lap(),
                ),
            ])
        })
    }
}

/// Lines and planes inside `P`, with the exponent each forces. Runs once per `(p, d)`.
struct Subspaces;

impl Suite for Subspaces {
    fn name(&self) -> &'static str {
        "subspaces"
    }

    fn run(&self, env: &SuiteEnv<'_>) -> Result<Vec<ReportRow>> {
        let ctx = env.ctx;
        let seed = env.seed_for(0);
        let mut timer = Timer::new(env.timings);
        let mut rows = Vec::new();
        for k in 1..=2usize {
            let found = match max_affine_subspace(ctx, env.d, k, env.limits) {
                Ok(w) => w,
                Err(Error::InstanceTooLarge { .. }) => continue,
                Err(e) => return Err(e),
            };
            let size = found.as_ref().map_or(0, |w| w.points(ctx).len() as u64);
            let verified = found.as_ref().is_none_or(|w| w.verify(ctx));
            let row = env.row(
                format!("flat-k{k}"),
                Num::Int(size),
                Num::Int(pow_size(env.p, k) as u64),
                Num::Real(ratio(size as f64, pow_size(env.p, k) as f64)),
                verified,
                seed,
                timer.lap(),
            );
            rows.push(row);
            if found.is_some() && k + 1 < env.d {
                let r = necessary_r(Ratio::from_integer(2), env.d, k)?;
                let rf = *r.numer() as f64 / *r.denom() as f64;
                let stein = 2.0 * env.d as f64 / (env.d as f64 - 1.0);
                rows.push(env.row(
                    format!("necessary-r-k{k}-{}/{}", r.numer(), r.denom()),
                    Num::Real(rf),
                    Num::Real(stein),
                    Num::Real(rf / stein),
                    rf >= stein,
                    seed,
                    0,
                ));
            }
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(suites: &[&str], primes: &[u64], dims: &[usize], trials: usize) -> RunConfig {
        RunConfig {
            primes: primes.to_vec(),
            dims: dims.to_vec(),
            suites: suites.iter().map(|s| s.to_string()).collect(),
            trials,
            seed: 42,
            ..RunConfig::default()
        }
    }

    #[test]
    fn trial_seeds_differ_and_are_stable() {
        let a = trial_seed(42, "energy", 3, 2, 0);
        assert_eq!(a, trial_seed(42, "energy", 3, 2, 0));
        assert_ne!(a, trial_seed(42, "energy", 3, 2, 1));
        assert_ne!(a, trial_seed(42, "mlem1", 3, 2, 0));
        assert_ne!(a, trial_seed(43, "energy", 3, 2, 0));
    }

    #[test]
    fn config_validation() {
        let reg = SuiteRegistry::builtin();
        assert!(cfg(&["energy"], &[3], &[2], 1).validate(&reg).is_ok());
        assert_eq!(
            cfg(&["energy"], &[2], &[2], 1).validate(&reg).unwrap_err(),
            Error::CharacteristicTwoUnsupported { p: 2 }
        );
        assert!(cfg(&[], &[3], &[2], 1).validate(&reg).is_err());
        assert!(cfg(&["nope"], &[3], &[2], 1).validate(&reg).is_err());
        assert!(cfg(&["energy"], &[3], &[1], 1).validate(&reg).is_err());
        assert!(cfg(&["energy"], &[3], &[2], 0).validate(&reg).is_err());
    }

    #[test]
    fn mlem1_emits_one_row_per_trial() {
        let rows = run_verify(&cfg(&["mlem1"], &[3, 5], &[4], 20)).unwrap();
        assert_eq!(rows.len(), 40);
        assert!(rows.iter().all(|r| r.pass));
    }

    #[test]
    fn identities_pass_small() {
        let rows = run_verify(&cfg(&["identities"], &[3], &[2], 3)).unwrap();
        assert!(rows.iter().any(|r| r.case.starts_with("parseval")));
        assert!(rows.iter().any(|r| r.case.starts_with("orthogonality")));
        assert_eq!(exit_code(&rows), 0);
    }

    #[test]
    fn every_suite_runs_and_passes_small() {
        let names = SuiteRegistry::builtin().names();
        let rows = run_verify(&cfg(&names, &[3], &[2, 3, 4], 2)).unwrap();
        if let Some(r) = rows.iter().find(|r| !r.pass) {
            panic!("failing row {}", r.table_line());
        }
        for name in names {
            assert!(rows.iter().any(|r| r.suite == name), "{name} produced no rows");
        }
    }

    #[test]
    fn scan_adds_summaries_and_is_deterministic() {
        let c = cfg(&["energy", "pipeline"], &[3], &[4], 4);
        let a = run_scan(&c).unwrap();
        let b = run_scan(&c).unwrap();
        assert_eq!(a, b);
        let maxes: Vec<&ReportRow> = a.iter().filter(|r| r.case == "max").collect();
        assert_eq!(maxes.len(), 2);
        assert_eq!(a.last().unwrap().case, "max");
    }
}
