//! Extended interpolants: the original data is extrapolated onto `d` extra
//! nodes per side, either through discrete Taylor series whose derivatives
//! come from a small rational interpolant at each boundary, or through the
//! equivalent linear map with precomputed coefficients. Includes the
//! barycentric evaluator over the extended grid and the reduced form that
//! rewrites the interpolant in terms of the original data only.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fh::{
    derivative_rows_mp, fh_weights, normalized_derivative_rows_mp, WeightFamily, WeightVector,
};
use crate::grid::{EquispacedGrid, ExtendedGrid};
use crate::stability::precision::{Direction, MpContext, MpFloat, PrecisionPolicy};

/// Parameter tuple of an extended interpolant: `n + 1` data nodes, `d` extra
/// nodes per side, and a boundary stencil of `ntilde + 1` nodes blended at
/// degree `dtilde` for the extrapolation derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExtendedConfig {
    n: usize,
    d: usize,
    ntilde: usize,
    dtilde: usize,
}

impl ExtendedConfig {
    pub fn new(n: usize, d: usize, ntilde: usize, dtilde: usize) -> Result<Self> {
        if dtilde > ntilde {
            return Err(Error::InvalidConfig { constraint: "dtilde <= ntilde" });
        }
        if ntilde >= n {
            return Err(Error::InvalidConfig { constraint: "ntilde < n" });
        }
        Ok(Self { n, d, ntilde, dtilde })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ntilde(&self) -> usize {
        self.ntilde
    }

    pub fn dtilde(&self) -> usize {
        self.dtilde
    }

    /// Approximation-order exponent `mu = min(d, dtilde)`.
    pub fn mu(&self) -> usize {
        self.d.min(self.dtilde)
    }

    /// Whether the two boundary stencils overlap (`2*ntilde >= n`), which
    /// selects the reduced-form branch.
    pub fn two_sided_overlap(&self) -> bool {
        2 * self.ntilde >= self.n
    }
}

/// Values over the extended index range `-d ..= n + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedVec<T> {
    offset: isize,
    values: Vec<T>,
}

impl<T> ExtendedVec<T> {
    pub fn new(offset: isize, values: Vec<T>) -> Self {
        Self { offset, values }
    }

    pub fn first_index(&self) -> isize {
        self.offset
    }

    pub fn last_index(&self) -> isize {
        self.offset + self.values.len() as isize - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: isize) -> &T {
        &self.values[(i - self.offset) as usize]
    }

    pub fn get_mut(&mut self, i: isize) -> &mut T {
        &mut self.values[(i - self.offset) as usize]
    }

    /// Values in storage order, starting at `first_index()`.
    pub fn values(&self) -> &[T] {
        &self.values
    }
}

impl ExtendedVec<f64> {
    pub fn at(&self, i: isize) -> f64 {
        *self.get(i)
    }
}

impl ExtendedVec<MpFloat> {
    pub fn to_f64(&self) -> ExtendedVec<f64> {
        ExtendedVec::new(self.offset, self.values.iter().map(MpFloat::to_f64).collect())
    }
}

/// The linear extrapolation map in coefficient form: `a(i, j)` feeds the left
/// extension (`-d <= i < 0`, `0 <= j <= ntilde`) and `b(i, j)` the right one
/// (`0 < i <= d`, `-ntilde <= j <= 0`). The coefficients depend only on
/// `(ntilde, dtilde)`; `d` just fixes how many rows are materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationMap {
    ntilde: usize,
    dtilde: usize,
    d: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ExtrapolationMap {
    pub fn ntilde(&self) -> usize {
        self.ntilde
    }

    pub fn dtilde(&self) -> usize {
        self.dtilde
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Left coefficient, `-d <= i <= -1`, `0 <= j <= ntilde`.
    pub fn a(&self, i: isize, j: usize) -> f64 {
        debug_assert!((-(self.d as isize)..0).contains(&i) && j <= self.ntilde);
        self.a[(-i - 1) as usize * (self.ntilde + 1) + j]
    }

    /// Right coefficient, `1 <= i <= d`, `-ntilde <= j <= 0`.
    pub fn b(&self, i: usize, j: isize) -> f64 {
        debug_assert!((1..=self.d).contains(&i) && (-(self.ntilde as isize)..=0).contains(&j));
        self.b[(i - 1) * (self.ntilde + 1) + (j + self.ntilde as isize) as usize]
    }

    pub fn max_abs_a(&self) -> f64 {
        self.a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_b(&self) -> f64 {
        self.b.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Extrapolation coefficients held in extended precision, for workflows that
/// keep the whole pipeline above working precision.
#[derive(Debug, Clone)]
pub struct MpExtrapolationMap {
    ntilde: usize,
    d: usize,
    a: Vec<Vec<MpFloat>>,
    b: Vec<Vec<MpFloat>>,
}

impl MpExtrapolationMap {
    pub fn ntilde(&self) -> usize {
        self.ntilde
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn a(&self, i: isize, j: usize) -> &MpFloat {
        &self.a[(-i - 1) as usize][j]
    }

    pub fn b(&self, i: usize, j: isize) -> &MpFloat {
        &self.b[i - 1][(j + self.ntilde as isize) as usize]
    }

    pub fn to_f64(&self, dtilde: usize) -> ExtrapolationMap {
        ExtrapolationMap {
            ntilde: self.ntilde,
            dtilde,
            d: self.d,
            a: self.a.iter().flatten().map(MpFloat::to_f64).collect(),
            b: self.b.iter().flatten().map(MpFloat::to_f64).collect(),
        }
    }
}

/// Mantissa width used to precompute extrapolation coefficients before they
/// are rounded to working precision.
pub const COEFF_PRECISION_BITS: u32 = 320;

/// Extrapolation coefficients in the requested precision context:
/// `a(i, j) = sum_k Ebar^(k)_{0 j} i^k` and
/// `b(i, j) = sum_k Ebar^(k)_{ntilde (j+ntilde)} i^k`, truncated at
/// `k = dtilde`. Every row of either block sums to one, since the `k >= 1`
/// rows of the normalized derivative matrices sum to zero.
pub fn extrapolation_coeffs_mp(
    ntilde: usize,
    dtilde: usize,
    d: usize,
    ctx: &MpContext,
) -> Result<MpExtrapolationMap> {
    if dtilde > ntilde {
        return Err(Error::InvalidConfig { constraint: "dtilde <= ntilde" });
    }
    if d == 0 {
        return Ok(MpExtrapolationMap { ntilde, d, a: Vec::new(), b: Vec::new() });
    }
    let w = fh_weights(ntilde, dtilde)?;
    let left = normalized_derivative_rows_mp(&w, 0, dtilde, ctx);
    let right = normalized_derivative_rows_mp(&w, ntilde, dtilde, ctx);
    let assemble = |rows: &Vec<Vec<MpFloat>>, i: i64| -> Vec<MpFloat> {
        let step = MpFloat::from_i64(i);
        (0..=ntilde)
            .map(|j| {
                let mut acc = rows[0][j].clone();
                let mut power = MpFloat::one();
                for row in rows.iter().skip(1) {
                    power = ctx.mul(&power, &step);
                    acc = ctx.add(&acc, &ctx.mul(&row[j], &power));
                }
                acc
            })
            .collect()
    };
    let a: Vec<Vec<MpFloat>> = (1..=d as i64).map(|k| assemble(&left, -k)).collect();
    let b: Vec<Vec<MpFloat>> = (1..=d as i64).map(|k| assemble(&right, k)).collect();
    Ok(MpExtrapolationMap { ntilde, d, a, b })
}

fn coeff_cache() -> &'static Mutex<HashMap<(usize, usize, usize), ExtrapolationMap>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, usize), ExtrapolationMap>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Working-precision extrapolation coefficients for `(ntilde, dtilde, d)`.
/// Computed once at [`COEFF_PRECISION_BITS`] bits, rounded to `f64`, and
/// cached for reuse.
pub fn extrapolation_coeffs(ntilde: usize, dtilde: usize, d: usize) -> Result<ExtrapolationMap> {
    let key = (ntilde, dtilde, d);
    if let Some(map) = coeff_cache().lock().unwrap().get(&key) {
        return Ok(map.clone());
    }
    let ctx = MpContext::new(COEFF_PRECISION_BITS, Direction::Nearest);
    let map = extrapolation_coeffs_mp(ntilde, dtilde, d, &ctx)?.to_f64(dtilde);
    coeff_cache().lock().unwrap().insert(key, map.clone());
    Ok(map)
}

/// Weights of the extended interpolant: the usual weights for `n + 2d` nodes
/// at blending degree `d`, reindexed to `-d ..= n + d`.
pub fn extended_weights(n: usize, d: usize) -> WeightVector {
    let w = fh_weights(n + 2 * d, d).expect("d <= n + 2d always holds");
    let ints: Vec<i128> = (0..=(n + 2 * d) as isize).map(|i| w.get_int(i).unwrap()).collect();
    WeightVector::from_ints(WeightFamily::ExtendedFh { n, d }, -(d as isize), ints)
}

/// Extrapolated data values through the discrete Taylor route, carried in the
/// precision policy's arithmetic. The derivatives of the boundary interpolant
/// and the Taylor sums are evaluated once per rounding direction, so an
/// alternating policy reproduces the per-index directed-rounding procedure.
/// Interior values are copied unchanged.
pub fn extrapolate_taylor_mp(
    grid: &EquispacedGrid,
    cfg: &ExtendedConfig,
    y: &[MpFloat],
    policy: &PrecisionPolicy,
) -> Result<ExtendedVec<MpFloat>> {
    let n = cfg.n();
    if grid.n() != n {
        return Err(Error::DimensionMismatch { expected: n + 1, got: grid.n() + 1 });
    }
    if y.len() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: y.len() });
    }
    let d = cfg.d() as isize;
    let ntilde = cfg.ntilde();
    let dtilde = cfg.dtilde();
    let w = fh_weights(ntilde, dtilde)?;
    let h = MpFloat::from_f64(grid.spacing());
    let facts: Vec<MpFloat> = {
        let mut f = vec![MpFloat::one()];
        let mut acc = num_bigint::BigUint::from(1u32);
        for k in 1..=dtilde {
            acc *= k;
            f.push(MpFloat::from_biguint(acc.clone()));
        }
        f
    };

    // Boundary derivatives depend on the rounding direction in play, not on
    // the extended index itself; evaluate them lazily per direction.
    let mut derivative_cache: HashMap<Direction, (Vec<MpFloat>, Vec<MpFloat>)> = HashMap::new();
    let mut derivatives = |dir: Direction| -> (Vec<MpFloat>, Vec<MpFloat>) {
        derivative_cache
            .entry(dir)
            .or_insert_with(|| {
                let ctx = MpContext::new(policy.mantissa_bits, dir);
                let left_rows = derivative_rows_mp(&w, 0, dtilde, &h, &ctx);
                let right_rows = derivative_rows_mp(&w, ntilde, dtilde, &h, &ctx);
                let dot = |row: &[MpFloat], ys: &[MpFloat]| -> MpFloat {
                    let mut acc = MpFloat::zero();
                    for (e, yv) in row.iter().zip(ys) {
                        acc = ctx.add(&acc, &ctx.mul(e, yv));
                    }
                    acc
                };
                let left: Vec<MpFloat> =
                    (1..=dtilde).map(|k| dot(&left_rows[k], &y[..=ntilde])).collect();
                let right: Vec<MpFloat> =
                    (1..=dtilde).map(|k| dot(&right_rows[k], &y[n - ntilde..])).collect();
                (left, right)
            })
            .clone()
    };

    let mut out = Vec::with_capacity(n + 2 * cfg.d() + 1);
    for i in -d..=(n as isize + d) {
        if (0..=n as isize).contains(&i) {
            out.push(y[i as usize].clone());
            continue;
        }
        let dir = policy.direction_for_index(i);
        let ctx = MpContext::new(policy.mantissa_bits, dir);
        let (anchor, step_index, derivs) = if i < 0 {
            (&y[0], i, derivatives(dir).0)
        } else {
            (&y[n], i - n as isize, derivatives(dir).1)
        };
        let step = ctx.mul(&MpFloat::from_i64(step_index as i64), &h);
        let mut acc = anchor.clone();
        let mut power = MpFloat::one();
        for (k, dk) in derivs.iter().enumerate() {
            power = ctx.mul(&power, &step);
            let term = ctx.div(&ctx.mul(dk, &power), &facts[k + 1]);
            acc = ctx.add(&acc, &term);
        }
        out.push(acc);
    }
    Ok(ExtendedVec::new(-d, out))
}

/// Working-precision convenience wrapper around [`extrapolate_taylor_mp`]:
/// lifts `f64` data exactly, extrapolates under the policy, and rounds the
/// result back to `f64`.
pub fn extrapolate_taylor(
    grid: &EquispacedGrid,
    cfg: &ExtendedConfig,
    y: &[f64],
    policy: &PrecisionPolicy,
) -> Result<ExtendedVec<f64>> {
    let y_mp: Vec<MpFloat> = y.iter().map(|&v| MpFloat::from_f64(v)).collect();
    Ok(extrapolate_taylor_mp(grid, cfg, &y_mp, policy)?.to_f64())
}

/// Extrapolated data values through the coefficient map: plain dot products
/// against the `a` and `b` rows, identity in the middle.
pub fn extrapolate_matrix(y: &[f64], map: &ExtrapolationMap) -> Result<ExtendedVec<f64>> {
    let ntilde = map.ntilde();
    if y.len() <= ntilde {
        return Err(Error::DimensionMismatch { expected: ntilde + 1, got: y.len() });
    }
    let n = y.len() - 1;
    let d = map.d() as isize;
    let mut out = Vec::with_capacity(y.len() + 2 * map.d());
    for i in -d..0 {
        let mut acc = 0.0;
        for j in 0..=ntilde {
            acc += map.a(i, j) * y[j];
        }
        out.push(acc);
    }
    out.extend_from_slice(y);
    for i in 1..=map.d() {
        let mut acc = 0.0;
        for j in -(ntilde as isize)..=0 {
            acc += map.b(i, j) * y[(n as isize + j) as usize];
        }
        out.push(acc);
    }
    Ok(ExtendedVec::new(-d, out))
}

/// Matrix-route extrapolation in a precision context.
pub fn extrapolate_matrix_mp(
    y: &[MpFloat],
    map: &MpExtrapolationMap,
    ctx: &MpContext,
) -> Result<ExtendedVec<MpFloat>> {
    let ntilde = map.ntilde();
    if y.len() <= ntilde {
        return Err(Error::DimensionMismatch { expected: ntilde + 1, got: y.len() });
    }
    let n = y.len() - 1;
    let d = map.d() as isize;
    let mut out = Vec::with_capacity(y.len() + 2 * map.d());
    for i in -d..0 {
        let mut acc = MpFloat::zero();
        for j in 0..=ntilde {
            acc = ctx.add(&acc, &ctx.mul(map.a(i, j), &y[j]));
        }
        out.push(acc);
    }
    out.extend_from_slice(y);
    for i in 1..=map.d() {
        let mut acc = MpFloat::zero();
        for j in -(ntilde as isize)..=0 {
            acc = ctx.add(&acc, &ctx.mul(map.b(i, j), &y[(n as isize + j) as usize]));
        }
        out.push(acc);
    }
    Ok(ExtendedVec::new(-d, out))
}

/// Barycentric evaluation over the extended grid. A `t` bitwise equal to an
/// extended node returns the extended data value there.
pub fn extended_eval(
    gridx: &ExtendedGrid,
    weights: &WeightVector,
    ytilde: &ExtendedVec<f64>,
    t: f64,
) -> Result<f64> {
    let lo = gridx.first_index();
    let hi = gridx.last_index();
    if weights.first_index() != lo || weights.last_index() != hi {
        return Err(Error::DimensionMismatch { expected: gridx.len(), got: weights.len() });
    }
    if ytilde.first_index() != lo || ytilde.last_index() != hi {
        return Err(Error::DimensionMismatch { expected: gridx.len(), got: ytilde.len() });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in lo..=hi {
        let xi = gridx.node(i);
        if t == xi {
            return Ok(ytilde.at(i));
        }
        let q = weights.get(i) / (t - xi);
        num += q * ytilde.at(i);
        den += q;
    }
    if den == 0.0 {
        return Err(Error::ZeroDenominator { t });
    }
    let r = num / den;
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonFinite { t })
    }
}

/// Extended node coordinates in a precision context, `a + i*h` with both
/// constants taken exactly from the grid.
pub fn extended_nodes_mp(gridx: &ExtendedGrid, ctx: &MpContext) -> Vec<MpFloat> {
    let a = MpFloat::from_f64(gridx.base().a());
    let h = MpFloat::from_f64(gridx.base().spacing());
    gridx
        .indices()
        .map(|i| ctx.add(&a, &ctx.mul(&MpFloat::from_i64(i as i64), &h)))
        .collect()
}

/// Barycentric evaluation over the extended grid in a precision context.
/// `nodes` comes from [`extended_nodes_mp`] on the same grid and context.
pub fn extended_eval_mp(
    nodes: &[MpFloat],
    weights: &WeightVector,
    ytilde: &ExtendedVec<MpFloat>,
    t: &MpFloat,
    ctx: &MpContext,
) -> Result<MpFloat> {
    if nodes.len() != weights.len() || nodes.len() != ytilde.len() {
        return Err(Error::DimensionMismatch { expected: nodes.len(), got: ytilde.len() });
    }
    let lo = weights.first_index();
    let mut num = MpFloat::zero();
    let mut den = MpFloat::zero();
    for (k, xi) in nodes.iter().enumerate() {
        let i = lo + k as isize;
        if t == xi {
            return Ok(ytilde.get(i).clone());
        }
        let q = ctx.div(&weights.get_mp(i), &ctx.sub(t, xi));
        num = ctx.add(&num, &ctx.mul(&q, ytilde.get(i)));
        den = ctx.add(&den, &q);
    }
    if den.is_zero() {
        return Err(Error::ZeroDenominatorSum);
    }
    Ok(ctx.div(&num, &den))
}

/// The common denominator `Q(t) = sum_i w_i / (t - x_i)` over the extended
/// grid. `t` must not be a node.
pub fn q_denominator(gridx: &ExtendedGrid, weights: &WeightVector, t: f64) -> f64 {
    let mut q = 0.0;
    for i in gridx.indices() {
        q += weights.get(i) / (t - gridx.node(i));
    }
    q
}

/// A general linear extrapolation map `h(i, j)` stored densely: one row of
/// `n + 1` coefficients per off-range index `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralMap {
    n: usize,
    d: usize,
    /// Rows for `i = -d..=-1` followed by rows for `i = n+1..=n+d`.
    rows: Vec<Vec<f64>>,
}

impl GeneralMap {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self { n, d, rows: vec![vec![0.0; n + 1]; 2 * d] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn row_slot(&self, i: isize) -> usize {
        if i < 0 {
            debug_assert!(i >= -(self.d as isize));
            (i + self.d as isize) as usize
        } else {
            debug_assert!(i > self.n as isize && i <= (self.n + self.d) as isize);
            self.d + (i - self.n as isize - 1) as usize
        }
    }

    pub fn get(&self, i: isize, j: usize) -> f64 {
        self.rows[self.row_slot(i)][j]
    }

    pub fn set(&mut self, i: isize, j: usize, v: f64) {
        let slot = self.row_slot(i);
        self.rows[slot][j] = v;
    }

    /// Embed Taylor-route coefficients into the dense layout: `a` rows on the
    /// left block, `b` rows on the right, zeros elsewhere.
    pub fn from_taylor(map: &ExtrapolationMap, n: usize) -> Self {
        let d = map.d();
        let ntilde = map.ntilde();
        let mut out = Self::zeros(n, d);
        for i in -(d as isize)..0 {
            for j in 0..=ntilde {
                out.set(i, j, map.a(i, j));
            }
        }
        for i in 1..=d {
            for j in -(ntilde as isize)..=0 {
                out.set(n as isize + i as isize, (n as isize + j) as usize, map.b(i, j));
            }
        }
        out
    }
}

fn check_not_node(gridx: &ExtendedGrid, t: f64) -> Result<()> {
    for i in gridx.indices() {
        if t == gridx.node(i) {
            return Err(Error::AtNode { t });
        }
    }
    Ok(())
}

/// One reduced coefficient: the node's own pole plus the extrapolation
/// tails that involve `y_j`. Term order is fixed (own pole, then left tail
/// by ascending `i`, then right tail) so the Taylor-specific and general
/// paths agree bitwise.
fn reduced_coeff_terms(
    weights: &WeightVector,
    gridx: &ExtendedGrid,
    t: f64,
    j: usize,
    left: Option<&dyn Fn(isize) -> f64>,
    right: Option<&dyn Fn(isize) -> f64>,
) -> f64 {
    let n = gridx.base().n();
    let d = gridx.d() as isize;
    let mut c = weights.get(j as isize) / (t - gridx.base().node(j));
    if let Some(coeff) = left {
        for i in -d..0 {
            let hij = coeff(i);
            if hij != 0.0 {
                c += weights.get(i) * hij / (t - gridx.node(i));
            }
        }
    }
    if let Some(coeff) = right {
        for i in (n as isize + 1)..=(n as isize + d) {
            let hij = coeff(i);
            if hij != 0.0 {
                c += weights.get(i) * hij / (t - gridx.node(i));
            }
        }
    }
    c
}

/// Reduced-form coefficients `c_j(t)`, `j = 0..=n`, for the Taylor-based
/// extrapolation map. With disjoint boundary stencils (`2*ntilde < n`) the
/// middle coefficients stay bare poles; with overlapping stencils
/// (`2*ntilde >= n`) both tails contribute where the stencils meet. Both
/// cases reduce to the same membership tests: the left tail touches
/// `j <= ntilde` and the right one `j >= n - ntilde`.
pub fn reduced_coeffs(
    cfg: &ExtendedConfig,
    map: &ExtrapolationMap,
    weights: &WeightVector,
    gridx: &ExtendedGrid,
    t: f64,
) -> Result<Vec<f64>> {
    check_not_node(gridx, t)?;
    let n = cfg.n();
    let ntilde = cfg.ntilde();
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let has_left = j <= ntilde;
        let has_right = j >= n - ntilde;
        let left_fn = |i: isize| map.a(i, j);
        let right_fn = |i: isize| map.b((i - n as isize) as usize, j as isize - n as isize);
        let c = reduced_coeff_terms(
            weights,
            gridx,
            t,
            j,
            if has_left { Some(&left_fn) } else { None },
            if has_right { Some(&right_fn) } else { None },
        );
        out.push(c);
    }
    Ok(out)
}

/// A single reduced coefficient `c_j(t)`, avoiding the full vector when only
/// one data index is under scrutiny.
pub fn reduced_coeff(
    cfg: &ExtendedConfig,
    map: &ExtrapolationMap,
    weights: &WeightVector,
    gridx: &ExtendedGrid,
    t: f64,
    j: usize,
) -> Result<f64> {
    check_not_node(gridx, t)?;
    let n = cfg.n();
    let ntilde = cfg.ntilde();
    let has_left = j <= ntilde;
    let has_right = j >= n - ntilde;
    let left_fn = |i: isize| map.a(i, j);
    let right_fn = |i: isize| map.b((i - n as isize) as usize, j as isize - n as isize);
    Ok(reduced_coeff_terms(
        weights,
        gridx,
        t,
        j,
        if has_left { Some(&left_fn) } else { None },
        if has_right { Some(&right_fn) } else { None },
    ))
}

/// Reduced-form coefficients for an arbitrary linear extrapolation map,
/// `d_j(t) = w_j/(t - x_j) + sum_i w_i h_ij / (t - x_i)` over the off-range
/// `i`. Zero coefficients are skipped, so on a Taylor-embedded map the result
/// is bitwise the one from [`reduced_coeffs`].
pub fn general_reduced_coeffs(
    map: &GeneralMap,
    weights: &WeightVector,
    gridx: &ExtendedGrid,
    t: f64,
) -> Result<Vec<f64>> {
    check_not_node(gridx, t)?;
    let n = map.n();
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let left_fn = |i: isize| map.get(i, j);
        let right_fn = |i: isize| map.get(i, j);
        let c = reduced_coeff_terms(weights, gridx, t, j, Some(&left_fn), Some(&right_fn));
        out.push(c);
    }
    Ok(out)
}

/// Evaluate the reduced form `sum_j c_j y_j / q`.
pub fn reduced_eval(c: &[f64], y: &[f64], q: f64) -> Result<f64> {
    if c.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: c.len(), got: y.len() });
    }
    if q == 0.0 {
        return Err(Error::ZeroDenominatorSum);
    }
    let mut acc = 0.0;
    for (cj, yj) in c.iter().zip(y) {
        acc += cj * yj;
    }
    Ok(acc / q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, d: usize, ntilde: usize, dtilde: usize) -> ExtendedConfig {
        ExtendedConfig::new(n, d, ntilde, dtilde).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ExtendedConfig::new(50, 3, 11, 7).is_ok());
        assert_eq!(
            ExtendedConfig::new(50, 3, 7, 11).unwrap_err(),
            Error::InvalidConfig { constraint: "dtilde <= ntilde" }
        );
        assert_eq!(
            ExtendedConfig::new(7, 3, 7, 7).unwrap_err(),
            Error::InvalidConfig { constraint: "ntilde < n" }
        );
        assert_eq!(cfg(50, 3, 11, 7).mu(), 3);
        assert!(!cfg(50, 3, 11, 7).two_sided_overlap());
        assert!(cfg(21, 3, 11, 7).two_sided_overlap());
        assert!(cfg(22, 3, 11, 7).two_sided_overlap());
        assert!(!cfg(23, 3, 11, 7).two_sided_overlap());
    }

    #[test]
    fn linear_extrapolation_coefficients() {
        let map = extrapolation_coeffs(1, 1, 1).unwrap();
        assert_eq!(map.a(-1, 0), 2.0);
        assert_eq!(map.a(-1, 1), -1.0);
        assert_eq!(map.b(1, -1), -1.0);
        assert_eq!(map.b(1, 0), 2.0);
        let y = [3.0, 5.0];
        let out = extrapolate_matrix(&y, &map).unwrap();
        assert_eq!(out.at(-1), 1.0);
        assert_eq!(out.at(2), 7.0);
    }

    #[test]
    fn coefficient_rows_sum_to_one() {
        for (ntilde, dtilde, d) in [(1usize, 1usize, 1usize), (5, 3, 4), (8, 8, 6), (12, 7, 3)] {
            let map = extrapolation_coeffs(ntilde, dtilde, d).unwrap();
            for i in -(d as isize)..0 {
                let sum: f64 = (0..=ntilde).map(|j| map.a(i, j)).sum();
                let scale: f64 = (0..=ntilde).map(|j| map.a(i, j).abs()).sum();
                assert!((sum - 1.0).abs() <= 1e-12 * scale.max(1.0), "a row {i}");
            }
            for i in 1..=d {
                let sum: f64 = (-(ntilde as isize)..=0).map(|j| map.b(i, j)).sum();
                let scale: f64 = (-(ntilde as isize)..=0).map(|j| map.b(i, j).abs()).sum();
                assert!((sum - 1.0).abs() <= 1e-12 * scale.max(1.0), "b row {i}");
            }
        }
    }

    #[test]
    fn mirror_symmetry_of_coefficients() {
        for ntilde in [2usize, 5, 9, 12] {
            let map = extrapolation_coeffs(ntilde, ntilde, 3).unwrap();
            for i in 1..=3usize {
                for j in -(ntilde as isize)..=0 {
                    let b = map.b(i, j);
                    let a = map.a(-(i as isize), (-j) as usize);
                    assert!(
                        (b - a).abs() <= 1e-10 * a.abs().max(1.0),
                        "ntilde={ntilde} i={i} j={j}: {b} vs {a}"
                    );
                }
            }
        }
    }

    #[test]
    fn coefficients_do_not_depend_on_d() {
        let small = extrapolation_coeffs(6, 4, 2).unwrap();
        let large = extrapolation_coeffs(6, 4, 5).unwrap();
        for i in -2isize..0 {
            for j in 0..=6usize {
                assert_eq!(small.a(i, j).to_bits(), large.a(i, j).to_bits());
            }
        }
    }

    #[test]
    fn extended_weights_are_reindexed_usual_weights() {
        let w = extended_weights(4, 2);
        assert_eq!(w.first_index(), -2);
        assert_eq!(w.last_index(), 6);
        let base = fh_weights(8, 2).unwrap();
        for i in -2isize..=6 {
            assert_eq!(w.get(i), base.get(i + 2));
        }
        assert_eq!(w.get(-2).abs(), 1.0);
        assert_eq!(w.get(6).abs(), 1.0);

        let w = extended_weights(5, 0);
        let base = fh_weights(5, 0).unwrap();
        assert_eq!(w.values(), base.values());
    }

    #[test]
    fn taylor_is_exact_for_polynomials() {
        // Squares on a unit-spacing grid starting at zero: the discrete
        // Taylor series of a quadratic reproduces it at the ghost node.
        let grid = EquispacedGrid::new(0.0, 6.0, 6).unwrap();
        let c = cfg(6, 1, 2, 2);
        let y: Vec<f64> = (0..=6).map(|i| (i * i) as f64).collect();
        let out = extrapolate_taylor(&grid, &c, &y, &PrecisionPolicy::precise(160)).unwrap();
        assert!((out.at(-1) - 1.0).abs() < 1e-12);
        assert!((out.at(7) - 49.0).abs() < 1e-12);
        // Constant data extrapolates to the constant.
        let y = vec![2.5; 7];
        let out = extrapolate_taylor(&grid, &c, &y, &PrecisionPolicy::working()).unwrap();
        for i in out.first_index()..=out.last_index() {
            assert_eq!(out.at(i), 2.5);
        }
    }

    #[test]
    fn taylor_and_matrix_routes_agree_at_high_precision() {
        let n = 14;
        let c = cfg(n, 4, 6, 5);
        let grid = EquispacedGrid::new(-1.0, 1.0, n).unwrap();
        let ctx = MpContext::new(320, Direction::Nearest);
        let policy = PrecisionPolicy::new(320, crate::stability::precision::Rounding::Nearest, "high");
        let y: Vec<f64> = (0..=n).map(|i| ((i * 37 + 11) % 19) as f64 / 19.0 - 0.4).collect();
        let y_mp: Vec<MpFloat> = y.iter().map(|&v| MpFloat::from_f64(v)).collect();
        let taylor = extrapolate_taylor_mp(&grid, &c, &y_mp, &policy).unwrap();
        let map = extrapolation_coeffs_mp(c.ntilde(), c.dtilde(), c.d(), &ctx).unwrap();
        let matrix = extrapolate_matrix_mp(&y_mp, &map, &ctx).unwrap();
        for i in taylor.first_index()..=taylor.last_index() {
            let a = taylor.get(i);
            let b = matrix.get(i);
            let diff = ctx.sub(a, b);
            if diff.is_zero() {
                continue;
            }
            let rel = ctx.div(&diff, a).to_f64().abs();
            assert!(rel <= 1e-40, "i = {i}: rel = {rel}");
        }
    }

    #[test]
    fn extended_eval_reproduces_data_and_constants() {
        let n = 10;
        let c = cfg(n, 2, 4, 3);
        let grid = EquispacedGrid::new(-1.0, 1.0, n).unwrap();
        let gridx = grid.extend(c.d());
        let w = extended_weights(n, c.d());
        let map = extrapolation_coeffs(c.ntilde(), c.dtilde(), c.d()).unwrap();
        let y = vec![1.0; n + 1];
        let yt = extrapolate_matrix(&y, &map).unwrap();
        for k in 0..200 {
            let t = -1.0 + 2.0 * k as f64 / 199.0;
            let r = extended_eval(&gridx, &w, &yt, t).unwrap();
            assert!((r - 1.0).abs() < 1e-13, "t = {t}: {r}");
        }
        let y: Vec<f64> = (0..=n).map(|i| (i as f64).sin()).collect();
        let yt = extrapolate_matrix(&y, &map).unwrap();
        for i in 0..=n {
            assert_eq!(extended_eval(&gridx, &w, &yt, grid.node(i)).unwrap(), y[i]);
        }
    }

    #[test]
    fn reduced_form_matches_barycentric() {
        for (n, d, ntilde, dtilde) in [(20usize, 3usize, 5usize, 4usize), (12, 2, 6, 3), (9, 3, 6, 2)]
        {
            let c = cfg(n, d, ntilde, dtilde);
            let grid = EquispacedGrid::new(-1.0, 1.0, n).unwrap();
            let gridx = grid.extend(d);
            let w = extended_weights(n, d);
            let map = extrapolation_coeffs(ntilde, dtilde, d).unwrap();
            let y: Vec<f64> = (0..=n).map(|i| ((i * 29 + 3) % 13) as f64 / 13.0 - 0.5).collect();
            let yt = extrapolate_matrix(&y, &map).unwrap();
            for k in 0..101 {
                let t = -0.993 + 1.97 * k as f64 / 100.0;
                let bary = extended_eval(&gridx, &w, &yt, t).unwrap();
                let cjs = reduced_coeffs(&c, &map, &w, &gridx, t).unwrap();
                let q = q_denominator(&gridx, &w, t);
                let red = reduced_eval(&cjs, &y, q).unwrap();
                assert!(
                    (bary - red).abs() <= 1e-10 * bary.abs().max(1.0),
                    "cfg ({n},{d},{ntilde},{dtilde}) t={t}: {bary} vs {red}"
                );
            }
        }
    }

    #[test]
    fn middle_reduced_coeffs_are_bare_poles() {
        let c = cfg(20, 3, 5, 4);
        let grid = EquispacedGrid::new(-1.0, 1.0, 20).unwrap();
        let gridx = grid.extend(3);
        let w = extended_weights(20, 3);
        let map = extrapolation_coeffs(5, 4, 3).unwrap();
        let t = 0.123456;
        let cjs = reduced_coeffs(&c, &map, &w, &gridx, t).unwrap();
        for j in 6..15usize {
            let expect = w.get(j as isize) / (t - grid.node(j));
            assert_eq!(cjs[j].to_bits(), expect.to_bits(), "j = {j}");
        }
    }

    #[test]
    fn general_map_matches_taylor_reduced_coeffs_bitwise() {
        for (n, d, ntilde, dtilde) in [(20usize, 3usize, 5usize, 4usize), (10, 2, 6, 3)] {
            let c = cfg(n, d, ntilde, dtilde);
            let grid = EquispacedGrid::new(-1.0, 1.0, n).unwrap();
            let gridx = grid.extend(d);
            let w = extended_weights(n, d);
            let map = extrapolation_coeffs(ntilde, dtilde, d).unwrap();
            let dense = GeneralMap::from_taylor(&map, n);
            for k in 0..37 {
                let t = -0.97 + 1.9 * k as f64 / 36.0;
                let a = reduced_coeffs(&c, &map, &w, &gridx, t).unwrap();
                let b = general_reduced_coeffs(&dense, &w, &gridx, t).unwrap();
                for j in 0..=n {
                    assert_eq!(a[j].to_bits(), b[j].to_bits(), "j = {j}, t = {t}");
                }
            }
        }
    }

    #[test]
    fn zero_map_reduced_coeffs_are_poles_only() {
        let n = 8;
        let d = 2;
        let grid = EquispacedGrid::new(0.0, 1.0, n).unwrap();
        let gridx = grid.extend(d);
        let w = extended_weights(n, d);
        let dense = GeneralMap::zeros(n, d);
        let t = 0.3711;
        let cjs = general_reduced_coeffs(&dense, &w, &gridx, t).unwrap();
        for j in 0..=n {
            let expect = w.get(j as isize) / (t - grid.node(j));
            assert_eq!(cjs[j].to_bits(), expect.to_bits());
        }
    }

    #[test]
    fn reduced_coeffs_reject_nodes() {
        let c = cfg(10, 2, 4, 3);
        let grid = EquispacedGrid::new(-1.0, 1.0, 10).unwrap();
        let gridx = grid.extend(2);
        let w = extended_weights(10, 2);
        let map = extrapolation_coeffs(4, 3, 2).unwrap();
        let t = grid.node(4);
        assert_eq!(reduced_coeffs(&c, &map, &w, &gridx, t).unwrap_err(), Error::AtNode { t });
    }

    #[test]
    fn reduced_eval_linearity_and_errors() {
        assert_eq!(reduced_eval(&[1.0, 2.0], &[0.0, 1.0], 4.0).unwrap(), 0.5);
        assert_eq!(reduced_eval(&[1.0], &[1.0], 0.0).unwrap_err(), Error::ZeroDenominatorSum);
        assert_eq!(
            reduced_eval(&[1.0, 2.0], &[1.0], 1.0).unwrap_err(),
            Error::DimensionMismatch { expected: 2, got: 1 }
        );
    }

    #[test]
    fn constant_reproduction_through_reduced_form() {
        let c = cfg(15, 3, 6, 4);
        let grid = EquispacedGrid::new(-1.0, 1.0, 15).unwrap();
        let gridx = grid.extend(3);
        let w = extended_weights(15, 3);
        let map = extrapolation_coeffs(6, 4, 3).unwrap();
        for k in 0..57 {
            let t = -0.99 + 1.98 * k as f64 / 56.0;
            let cjs = reduced_coeffs(&c, &map, &w, &gridx, t).unwrap();
            let q = q_denominator(&gridx, &w, t);
            let one: f64 = cjs.iter().sum::<f64>() / q;
            assert!((one - 1.0).abs() <= 1e-10, "t = {t}: {one}");
        }
    }
}
