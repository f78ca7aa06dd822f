//! Gauss sums, twisted Kloosterman sums, and the closed forms of `(dσ)^∨`
//! and of the sphere transforms `S_j^∨` built from them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, Scalar};
use crate::fourier::{GridFunc, LatticeFunc, MeasureTag};
use crate::geometry::Point;
use crate::grid::{pow_size, Grid, Limits};

/// `𝒢(t) = Σ_{s∈F} e(t s²)` for `t ≠ 0`.
pub fn gauss_sum_t(ctx: &FieldCtx, t: Scalar) -> Result<Complex64> {
    if t.is_zero() {
        return Err(Error::BadParameter("gauss sum needs t != 0".into()));
    }
    Ok(ctx.elements().map(|s| ctx.additive_char(ctx.mul(t, ctx.mul(s, s)))).sum())
}

/// `𝒢(η) = Σ_{s≠0} η(s) e(s)`.
pub fn gauss_sum_eta(ctx: &FieldCtx) -> Complex64 {
    ctx.elements().skip(1).map(|s| ctx.additive_char(s) * ctx.quadratic_char(s) as f64).sum()
}

/// `TK(a, b) = Σ_{s≠0} η(s) e(a s + b s^{-1})`.
pub fn twisted_kloosterman(ctx: &FieldCtx, a: Scalar, b: Scalar) -> Complex64 {
    ctx.elements()
        .skip(1)
        .map(|s| {
            let inv = ctx.inv(s).expect("s is nonzero");
            let arg = ctx.add(ctx.mul(a, s), ctx.mul(b, inv));
            ctx.additive_char(arg) * ctx.quadratic_char(s) as f64
        })
        .sum()
}

/// All `𝒢(t)`, index `t`; entry 0 is unused and set to zero.
fn gauss_table(ctx: &FieldCtx) -> Vec<Complex64> {
    let mut table = vec![Complex64::new(0.0, 0.0)];
    table.extend(ctx.elements().skip(1).map(|t| gauss_sum_t(ctx, t).expect("t is nonzero")));
    table
}

/// `x̲·x̲ / (-4 x_d)` as a residue; `x_d` must be nonzero.
fn quadratic_phase(ctx: &FieldCtx, underline: &[u32], last: Scalar) -> Scalar {
    let denom = ctx.mul(ctx.scalar(-4), last);
    let inv = ctx.inv(denom).expect("x_d is nonzero and p is odd");
    ctx.mul(Scalar::from_reduced(ctx.dot(underline, underline)), inv)
}

fn closed_value(ctx: &FieldCtx, gauss: &[Complex64], x: &[u32]) -> Complex64 {
    let d = x.len();
    let last = Scalar::from_reduced(x[d - 1]);
    if last.is_zero() {
        return if x.iter().all(|&c| c == 0) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let phase = ctx.additive_char(quadratic_phase(ctx, &x[..d - 1], last));
    let scale = (ctx.p() as f64).powi(1 - d as i32);
    phase * gauss[last.value() as usize].powu(d as u32 - 1) * scale
}

/// Closed form of `(dσ)^∨(x) = p^{1-d} Σ_{ξ∈P} e(x·ξ)`:
/// 1 at the origin, 0 on the rest of `{x_d = 0}`, and
/// `p^{1-d} e(x̲·x̲/(-4x_d)) 𝒢(x_d)^{d-1}` otherwise.
pub fn surface_inverse_closed(ctx: &FieldCtx, d: usize, x: &Point) -> Result<Complex64> {
    if d < 2 {
        return Err(Error::BadParameter(format!("d must be >= 2, got {d}")));
    }
    if x.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.dim() });
    }
    let last = x.last();
    if last.is_zero() {
        return Ok(closed_value(ctx, &[], x.coords()));
    }
    let g = gauss_sum_t(ctx, last)?;
    let phase = ctx.additive_char(quadratic_phase(ctx, x.underline(), last));
    Ok(phase * g.powu(d as u32 - 1) * (ctx.p() as f64).powi(1 - d as i32))
}

/// Closed form of `S_j^∨(α) = p^{-n} Σ_{ξ∈S_j} e(α·ξ)` for `α ∈ F^n`:
/// `p^{-1}δ(α) + p^{-n-1} η(-1)^n 𝒢(η)^n Σ_{r≠0} η(r)^n e(jr + α·α/(4r))`.
pub fn sphere_fourier_closed(ctx: &FieldCtx, n: usize, j: Scalar, alpha: &[u32]) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::BadParameter(format!("sphere transform needs n >= 2, got {n}")));
    }
    if alpha.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: alpha.len() });
    }
    let p = ctx.p() as f64;
    let eta_pow = |t: Scalar| -> f64 {
        if n.is_multiple_of(2) {
            1.0
        } else {
            ctx.quadratic_char(t) as f64
        }
    };
    let aa = Scalar::from_reduced(ctx.dot(alpha, alpha));
    let four = ctx.scalar(4);
    let sum: Complex64 = ctx
        .elements()
        .skip(1)
        .map(|r| {
            let inv = ctx.inv(ctx.mul(four, r)).expect("4r is nonzero");
            let arg = ctx.add(ctx.mul(j, r), ctx.mul(aa, inv));
            ctx.additive_char(arg) * eta_pow(r)
        })
        .sum();
    let lead = eta_pow(ctx.scalar(-1)) * gauss_sum_eta(ctx).powu(n as u32) * p.powi(-(n as i32) - 1);
    let delta = if alpha.iter().all(|&c| c == 0) { 1.0 / p } else { 0.0 };
    Ok(lead * sum + delta)
}

/// The non-singular part `K` of `(dσ)^∨ = δ + K`, tabulated on `F^d`.
#[derive(Debug, Clone)]
pub struct ClosedFormKernel {
    pub d: usize,
    pub values: GridFunc,
}

/// Tabulates `K(x) = p^{1-d} e(x̲·x̲/(-4x_d)) 𝒢(x_d)^{d-1}` for `x_d ≠ 0`, zero elsewhere.
pub fn kernel_k(ctx: &FieldCtx, d: usize, limits: &Limits) -> Result<ClosedFormKernel> {
    if d < 2 {
        return Err(Error::BadParameter(format!("d must be >= 2, got {d}")));
    }
    let grid = Grid::new(ctx.p(), d, limits)?;
    let gauss = gauss_table(ctx);
    let mut values = LatticeFunc::zeros(grid, MeasureTag::CountingOnGrid);
    let out = values.values_mut();
    grid.for_each(|idx, x| {
        if x[d - 1] != 0 {
            out[idx] = closed_value(ctx, &gauss, x);
        }
    });
    Ok(ClosedFormKernel { d, values })
}

/// `(dσ)^∨` tabulated on all of `F^d` from the closed form.
pub fn surface_inverse_table(ctx: &FieldCtx, d: usize, limits: &Limits) -> Result<GridFunc> {
    let mut k = kernel_k(ctx, d, limits)?.values;
    k.values_mut()[0] = Complex64::new(1.0, 0.0);
    Ok(k)
}

/// Expected `|K(x)|` off the hyperplane `x_d = 0`.
pub fn kernel_modulus(p: u32, d: usize) -> f64 {
    (p as f64).powf((1.0 - d as f64) / 2.0)
}

/// `|S_0|` computed from the closed form at `α = 0`, for cross-checks.
pub fn sphere_size_from_closed(ctx: &FieldCtx, n: usize) -> Result<f64> {
    let zero = vec![0u32; n];
    Ok(sphere_fourier_closed(ctx, n, Scalar::ZERO, &zero)?.re * pow_size(ctx.p(), n) as f64)
}
