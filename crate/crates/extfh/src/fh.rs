//! The usual Floater-Hormann interpolant family on equispaced nodes: exact
//! integer barycentric weights, the production barycentric evaluator, the
//! blended form it is algebraically equal to, and the recurrences for the
//! derivatives of the interpolant at a node.

use crate::error::{Error, Result};
use crate::grid::EquispacedGrid;
use crate::stability::precision::{MpContext, MpFloat};

/// Which construction produced a weight vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightFamily {
    /// `w_{n,delta,i}` of the interpolant blending degree-`delta` local
    /// polynomials over `n + 1` nodes.
    Fh { n: usize, delta: usize },
    /// Weights of the extended interpolant, indexed `-d ..= n + d`.
    ExtendedFh { n: usize, d: usize },
    Custom,
}

/// Barycentric weights with a logical index range. Weights of the `Fh` and
/// `ExtendedFh` families are integers; they are computed exactly and
/// converted to floating point once, so the integer values stay available
/// for extended-precision arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    family: WeightFamily,
    offset: isize,
    vals: Vec<f64>,
    ints: Option<Vec<i128>>,
}

impl WeightVector {
    pub fn custom(values: Vec<f64>) -> Self {
        Self { family: WeightFamily::Custom, offset: 0, vals: values, ints: None }
    }

    pub(crate) fn from_ints(family: WeightFamily, offset: isize, ints: Vec<i128>) -> Self {
        let vals = ints.iter().map(|&w| w as f64).collect();
        Self { family, offset, vals, ints: Some(ints) }
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn first_index(&self) -> isize {
        self.offset
    }

    pub fn last_index(&self) -> isize {
        self.offset + self.vals.len() as isize - 1
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Weight at logical index `i`.
    pub fn get(&self, i: isize) -> f64 {
        self.vals[(i - self.offset) as usize]
    }

    /// Exact integer weight, when the family has one.
    pub fn get_int(&self, i: isize) -> Option<i128> {
        self.ints.as_ref().map(|w| w[(i - self.offset) as usize])
    }

    /// Values in storage order (logical index `first_index()..`).
    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    /// Exact conversion of the weight at logical index `i`.
    pub(crate) fn get_mp(&self, i: isize) -> MpFloat {
        match self.get_int(i) {
            Some(w) => MpFloat::from_i128(w),
            None => MpFloat::from_f64(self.get(i)),
        }
    }
}

fn binomial(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Barycentric weights of the usual interpolant with blending degree `delta`:
/// `w_i = (-1)^(i-delta) * sum_j C(delta, i-j)` over the local-polynomial
/// windows containing node `i`. Computed in integer arithmetic.
pub fn fh_weights(n: usize, delta: usize) -> Result<WeightVector> {
    if delta > n {
        return Err(Error::DeltaOutOfRange { delta, n });
    }
    let mut ints = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let lo = i.saturating_sub(delta);
        let hi = (n - delta).min(i);
        let mut sum: i128 = 0;
        for j in lo..=hi {
            sum += binomial(delta, i - j);
        }
        let sign = if (i as isize - delta as isize).rem_euclid(2) == 0 { 1 } else { -1 };
        ints.push(sign * sum);
    }
    Ok(WeightVector::from_ints(WeightFamily::Fh { n, delta }, 0, ints))
}

/// Evaluate the interpolant in barycentric form. A `t` that is bitwise equal
/// to a node returns the corresponding data value; there is no near-node
/// tolerance, since the quotient is stable arbitrarily close to nodes.
pub fn fh_eval_barycentric(
    grid: &EquispacedGrid,
    weights: &WeightVector,
    y: &[f64],
    t: f64,
) -> Result<f64> {
    let n = grid.n();
    if weights.len() != n + 1 || weights.first_index() != 0 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: weights.len() });
    }
    if y.len() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: y.len() });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..=n {
        let xi = grid.node(i);
        if t == xi {
            return Ok(y[i]);
        }
        let q = weights.get(i as isize) / (t - xi);
        num += q * y[i];
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

/// Evaluate a polynomial through `(xs[k], ys[k])` at `t` using Newton divided
/// differences, computed left to right.
fn newton_eval(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let m = xs.len();
    let mut c = ys.to_vec();
    for level in 1..m {
        for k in (level..m).rev() {
            c[k] = (c[k] - c[k - 1]) / (xs[k] - xs[k - level]);
        }
    }
    let mut acc = c[m - 1];
    for k in (0..m - 1).rev() {
        acc = acc * (t - xs[k]) + c[k];
    }
    acc
}

/// Evaluate the interpolant in its original blended form: the weighted
/// average of the local degree-`delta` interpolating polynomials, with
/// weights `(-1)^i / prod (t - x_j)`. Algebraically identical to
/// [`fh_eval_barycentric`]; intended as an independent cross-check at small
/// `n`.
pub fn fh_eval_blended(grid: &EquispacedGrid, delta: usize, y: &[f64], t: f64) -> Result<f64> {
    let n = grid.n();
    if delta > n {
        return Err(Error::DeltaOutOfRange { delta, n });
    }
    if y.len() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: y.len() });
    }
    let nodes = grid.nodes();
    for i in 0..=n {
        if t == nodes[i] {
            return Ok(y[i]);
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..=(n - delta) {
        let mut prod = 1.0;
        for j in i..=(i + delta) {
            prod *= t - nodes[j];
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let lambda = sign / prod;
        let p = newton_eval(&nodes[i..=i + delta], &y[i..=i + delta], t);
        num += lambda * p;
        den += lambda;
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

/// Matrix of the `k`-th derivative of the rational interpolant at the nodes:
/// entry `(i, j)` is the weight of `y_j` in the derivative at `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeMatrix {
    order: usize,
    normalized: bool,
    dim: usize,
    data: Vec<f64>,
}

impl DerivativeMatrix {
    fn new(order: usize, normalized: bool, dim: usize) -> Self {
        Self { order, normalized, dim, data: vec![0.0; dim * dim] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    /// Number of rows/columns (node count of the stencil).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Derivative matrices `E^(0) .. E^(k_max)` for arbitrary distinct nodes and
/// nonzero weights, by the inductive recurrence: `E^(0)` is the identity,
/// `E^(k)_ij = k/(x_i - x_j) * ((w_j/w_i) E^(k-1)_ii - E^(k-1)_ij)` off the
/// diagonal, and each diagonal entry closes its row to a zero sum.
pub fn derivative_matrices(
    nodes: &[f64],
    weights: &WeightVector,
    k_max: usize,
) -> Result<Vec<DerivativeMatrix>> {
    let dim = nodes.len();
    if weights.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: weights.len() });
    }
    for idx in 0..dim {
        let i = weights.first_index() + idx as isize;
        if weights.get(i) == 0.0 {
            return Err(Error::ZeroWeight { index: i });
        }
    }
    let w = weights.values();
    let mut out = Vec::with_capacity(k_max + 1);
    let mut prev = DerivativeMatrix::new(0, false, dim);
    for i in 0..dim {
        prev.set(i, i, 1.0);
    }
    out.push(prev);
    for k in 1..=k_max {
        let prev = out.last().unwrap();
        let mut next = DerivativeMatrix::new(k, false, dim);
        for i in 0..dim {
            let eii = prev.get(i, i);
            let mut row_sum = 0.0;
            for j in 0..dim {
                if j == i {
                    continue;
                }
                let v = k as f64 * ((w[j] / w[i]) * eii - prev.get(i, j)) / (nodes[i] - nodes[j]);
                next.set(i, j, v);
                row_sum += v;
            }
            next.set(i, i, -row_sum);
        }
        out.push(next);
    }
    Ok(out)
}

/// Normalized matrices `h^k E^(k) / k!`. On an equispaced grid these depend
/// only on the weights, not on the spacing.
pub fn normalize_derivative_matrices(
    matrices: &[DerivativeMatrix],
    h: f64,
) -> Vec<DerivativeMatrix> {
    matrices
        .iter()
        .map(|e| {
            let mut factor = 1.0;
            for k in 1..=e.order {
                factor *= h / k as f64;
            }
            let mut out = DerivativeMatrix::new(e.order, true, e.dim);
            for i in 0..e.dim {
                for j in 0..e.dim {
                    out.set(i, j, factor * e.get(i, j));
                }
            }
            out
        })
        .collect()
}

/// Apply one row of a derivative matrix to data values: the `k`-th derivative
/// of the interpolant at the first (`row = 0`) or last (`row = dim - 1`) node
/// of the stencil.
pub fn fh_derivative_at_boundary(y: &[f64], e: &DerivativeMatrix, row: usize) -> f64 {
    assert!(
        row == 0 || row == e.dim() - 1,
        "derivative rows are tracked at the stencil boundary only"
    );
    assert_eq!(y.len(), e.dim());
    let mut acc = 0.0;
    for (j, &yj) in y.iter().enumerate() {
        acc += e.get(row, j) * yj;
    }
    acc
}

/// One row of the normalized matrices, carried through the recurrence in a
/// precision context. Returns `rows[k][j]` for `k = 0..=k_max`. The
/// normalized recurrence divides by the index difference `i - j`, so the
/// entries are independent of the grid spacing.
pub(crate) fn normalized_derivative_rows_mp(
    weights: &WeightVector,
    row: usize,
    k_max: usize,
    ctx: &MpContext,
) -> Vec<Vec<MpFloat>> {
    let dim = weights.len();
    debug_assert!(row < dim);
    let wi = weights.get_mp(weights.first_index() + row as isize);
    let ratios: Vec<MpFloat> = (0..dim)
        .map(|j| ctx.div(&weights.get_mp(weights.first_index() + j as isize), &wi))
        .collect();
    let mut rows: Vec<Vec<MpFloat>> = Vec::with_capacity(k_max + 1);
    let mut current: Vec<MpFloat> = (0..dim)
        .map(|j| if j == row { MpFloat::one() } else { MpFloat::zero() })
        .collect();
    rows.push(current.clone());
    for _k in 1..=k_max {
        let eii = current[row].clone();
        let mut next: Vec<MpFloat> = vec![MpFloat::zero(); dim];
        let mut row_sum = MpFloat::zero();
        for (j, next_j) in next.iter_mut().enumerate() {
            if j == row {
                continue;
            }
            let num = ctx.sub(&ctx.mul(&ratios[j], &eii), &current[j]);
            let v = ctx.div(&num, &MpFloat::from_i64(row as i64 - j as i64));
            row_sum = ctx.add(&row_sum, &v);
            *next_j = v;
        }
        next[row] = row_sum.neg();
        rows.push(next.clone());
        current = next;
    }
    rows
}

/// One row of the unnormalized matrices `E^(k)` on an equispaced stencil with
/// spacing `h`, each arithmetic step rounded by the context. Node differences
/// enter as the exact products `(i - j) * h`.
pub(crate) fn derivative_rows_mp(
    weights: &WeightVector,
    row: usize,
    k_max: usize,
    h: &MpFloat,
    ctx: &MpContext,
) -> Vec<Vec<MpFloat>> {
    let dim = weights.len();
    debug_assert!(row < dim);
    let wi = weights.get_mp(weights.first_index() + row as isize);
    let ratios: Vec<MpFloat> = (0..dim)
        .map(|j| ctx.div(&weights.get_mp(weights.first_index() + j as isize), &wi))
        .collect();
    let diffs: Vec<MpFloat> = (0..dim)
        .map(|j| ctx.mul(&MpFloat::from_i64(row as i64 - j as i64), h))
        .collect();
    let mut rows: Vec<Vec<MpFloat>> = Vec::with_capacity(k_max + 1);
    let mut current: Vec<MpFloat> = (0..dim)
        .map(|j| if j == row { MpFloat::one() } else { MpFloat::zero() })
        .collect();
    rows.push(current.clone());
    for k in 1..=k_max {
        let eii = current[row].clone();
        let kf = MpFloat::from_i64(k as i64);
        let mut next: Vec<MpFloat> = vec![MpFloat::zero(); dim];
        let mut row_sum = MpFloat::zero();
        for (j, next_j) in next.iter_mut().enumerate() {
            if j == row {
                continue;
            }
            let num = ctx.sub(&ctx.mul(&ratios[j], &eii), &current[j]);
            let v = ctx.div(&ctx.mul(&kf, &num), &diffs[j]);
            row_sum = ctx.add(&row_sum, &v);
            *next_j = v;
        }
        next[row] = row_sum.neg();
        rows.push(next.clone());
        current = next;
    }
    rows
}
