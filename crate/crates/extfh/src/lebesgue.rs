//! Lebesgue functions and constants: the condition numbers of the
//! interpolation operators with respect to data perturbations. For the
//! extended interpolant the correct Lebesgue function must be taken over the
//! original data, which routes every extrapolation coefficient through the
//! reduced form; the "naive" transplant of the usual formula to the extended
//! weights is also provided, as the bound it pretends to be.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::{
    extended_eval, extended_weights, extrapolate_matrix, extrapolation_coeffs, q_denominator,
    reduced_coeffs, ExtendedConfig, ExtrapolationMap,
};
use crate::fh::{fh_weights, WeightVector};
use crate::grid::{EquispacedGrid, ExtendedGrid};

/// Default number of scan samples per internodal interval.
pub const DEFAULT_SAMPLES_PER_INTERVAL: usize = 256;

/// Relative tolerance of the golden-section refinement.
pub const REFINEMENT_TOLERANCE: f64 = 1e-6;

/// A sampled Lebesgue constant. The reported value is a certified lower
/// bound: the maximum of the function over every scanned and refined point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LebesgueReport {
    pub constant: f64,
    pub argmax_t: f64,
    pub samples_per_interval: usize,
    pub refinement_tolerance: f64,
    /// Maximum of the naive bound function over the same scan, when the
    /// report concerns an extended interpolant.
    pub naive_bound_constant: Option<f64>,
    /// `2 + ln(n + 2d)`, the logarithmic growth claimed for the naive bound.
    pub log_bound: Option<f64>,
}

/// Lebesgue function of the usual interpolant,
/// `sum_j |w_j / (t - x_j)| / |sum_j w_j / (t - x_j)|`; at a node the limit
/// value 1 is returned.
pub fn fh_lebesgue_function(grid: &EquispacedGrid, weights: &WeightVector, t: f64) -> f64 {
    let n = grid.n();
    debug_assert_eq!(weights.len(), n + 1);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..=n {
        let xi = grid.node(i);
        if t == xi {
            return 1.0;
        }
        let q = weights.get(i as isize) / (t - xi);
        num += q.abs();
        den += q;
    }
    num / den.abs()
}

/// Correct Lebesgue function of the extended interpolant,
/// `sum_j |c_j(t)| / |Q(t)|` with the reduced coefficients `c_j`. Defined on
/// the base interval; the limit value at a node is 1.
pub fn extended_lebesgue_function(
    cfg: &ExtendedConfig,
    map: &ExtrapolationMap,
    weights: &WeightVector,
    gridx: &ExtendedGrid,
    t: f64,
) -> f64 {
    for i in gridx.indices() {
        if t == gridx.node(i) {
            return 1.0;
        }
    }
    let c = reduced_coeffs(cfg, map, weights, gridx, t)
        .expect("node evaluation excluded above");
    let q = q_denominator(gridx, weights, t);
    c.iter().map(|v| v.abs()).sum::<f64>() / q.abs()
}

/// The right-hand side that transplants the usual Lebesgue formula onto the
/// extended weights, `sum |w_j/(t - x_j)| / |sum w_j/(t - x_j)|` over the
/// extended range. It bounds the correct Lebesgue function only if the
/// extrapolated values were error-free, which extrapolation never grants.
pub fn naive_bound_function(weights: &WeightVector, gridx: &ExtendedGrid, t: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in gridx.indices() {
        let xi = gridx.node(i);
        if t == xi {
            return 1.0;
        }
        let q = weights.get(i) / (t - xi);
        num += q.abs();
        den += q;
    }
    num / den.abs()
}

/// Golden-section maximization on `[a, b]`, assuming the bracket came from a
/// scan local maximum. Returns the best probed point.
fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc >= fd { (fc, c) } else { (fd, d) };
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best.0 {
                best = (fc, c);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best.0 {
                best = (fd, d);
            }
        }
    }
    best
}

/// Scan one interval on an endpoint-inclusive uniform mesh (so doubling the
/// sample count refines the same point set) and refine every scan-local
/// maximum by golden section.
fn scan_interval_max<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    samples: usize,
) -> (f64, f64) {
    let width = hi - lo;
    let ts: Vec<f64> = (0..=samples).map(|k| lo + width * k as f64 / samples as f64).collect();
    let vs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let mut best = (vs[0], ts[0]);
    for k in 0..=samples {
        if vs[k] > best.0 {
            best = (vs[k], ts[k]);
        }
        let left_ok = k == 0 || vs[k] >= vs[k - 1];
        let right_ok = k == samples || vs[k] >= vs[k + 1];
        if left_ok && right_ok {
            let a = if k == 0 { lo } else { ts[k - 1] };
            let b = if k == samples { hi } else { ts[k + 1] };
            let refined = golden_max(f, a, b, REFINEMENT_TOLERANCE * width);
            if refined.0 > best.0 {
                best = refined;
            }
        }
    }
    best
}

/// Maximum of `f` over the base interval of the grid: a uniform scan of each
/// internodal interval followed by golden-section refinement around each
/// local maximum. The reported constant is a certified lower bound for the
/// supremum (every contributing point was evaluated).
pub fn lebesgue_constant<F: Fn(f64) -> f64>(
    f: F,
    grid: &EquispacedGrid,
    samples_per_interval: usize,
) -> LebesgueReport {
    assert!(samples_per_interval >= 16, "need at least 16 samples per interval");
    let mut best = (f64::NEG_INFINITY, grid.a());
    for (lo, hi) in grid.intervals() {
        let found = scan_interval_max(&f, lo, hi, samples_per_interval);
        if found.0 > best.0 {
            best = found;
        }
    }
    LebesgueReport {
        constant: best.0,
        argmax_t: best.1,
        samples_per_interval,
        refinement_tolerance: REFINEMENT_TOLERANCE,
        naive_bound_constant: None,
        log_bound: None,
    }
}

/// Full report for an extended interpolant: the correct constant, the
/// maximum of the naive bound over the same scan, and the logarithmic level
/// `2 + ln(n + 2d)` the naive bound is claimed not to exceed.
pub fn extended_lebesgue_report(
    cfg: &ExtendedConfig,
    map: &ExtrapolationMap,
    weights: &WeightVector,
    gridx: &ExtendedGrid,
    samples_per_interval: usize,
) -> LebesgueReport {
    let base = gridx.base();
    let mut report = lebesgue_constant(
        |t| extended_lebesgue_function(cfg, map, weights, gridx, t),
        base,
        samples_per_interval,
    );
    let naive = lebesgue_constant(
        |t| naive_bound_function(weights, gridx, t),
        base,
        samples_per_interval,
    );
    report.naive_bound_constant = Some(naive.constant);
    report.log_bound = Some(2.0 + ((cfg.n() + 2 * cfg.d()) as f64).ln());
    report
}

/// Lebesgue constant of polynomial interpolation at `d + 1` equispaced
/// nodes. The maximum is located in the first internodal interval (where it
/// is attained) and confirmed against a global scan.
pub fn poly_lebesgue_constant(d: usize) -> f64 {
    assert!(d >= 1, "need at least two nodes");
    let grid = EquispacedGrid::new(0.0, d as f64, d).unwrap();
    let w = fh_weights(d, d).unwrap();
    let f = |t: f64| fh_lebesgue_function(&grid, &w, t);
    let first = scan_interval_max(&f, 0.0, 1.0, 4 * DEFAULT_SAMPLES_PER_INTERVAL);
    let global = lebesgue_constant(f, &grid, DEFAULT_SAMPLES_PER_INTERVAL);
    first.0.max(global.constant)
}

/// The factor `kappa_d = 1 - d/(2^d - 1) - 2^-d` relating the extended
/// Lebesgue constant to the polynomial one.
pub fn kappa(d: usize) -> f64 {
    assert!(d >= 2, "the lower-bound factor needs d >= 2");
    let p = (d as f64).exp2();
    1.0 - d as f64 / (p - 1.0) - 1.0 / p
}

/// The alternating data vector that witnesses the exponential lower bound:
/// `y_0 = y_1 = (-1)^d` and `y_j = (-1)^(d+j-1)` for `j >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseVector {
    pub values: Vec<f64>,
    pub d: usize,
}

pub fn worst_case_vector(n: usize, d: usize) -> Result<WorstCaseVector> {
    if !(n > d + 1 && d + 1 >= 3) {
        return Err(Error::InvalidConfig { constraint: "n > d + 1 >= 3" });
    }
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut values = Vec::with_capacity(n + 1);
    values.push(sign(d));
    values.push(sign(d));
    for j in 2..=n {
        values.push(sign(d + j - 1));
    }
    Ok(WorstCaseVector { values, d })
}

/// Outcome of the exponential-lower-bound check: the extended interpolant of
/// the worst-case vector, evaluated at the argmax of the polynomial Lebesgue
/// function inside the first interval, must reach `kappa_d` times the
/// polynomial Lebesgue constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub n: usize,
    pub d: usize,
    /// `|r[y*](t*)|`, a certified lower bound for the extended Lebesgue
    /// constant.
    pub lhs: f64,
    /// `kappa_d * Lambda_d`.
    pub rhs: f64,
    pub holds: bool,
    pub t_star: f64,
    pub kappa: f64,
    pub poly_lebesgue: f64,
    /// The scanned extended Lebesgue constant, for context.
    pub sampled_extended_lebesgue: f64,
}

pub fn theorem1_check(n: usize, d: usize) -> Result<Theorem1Report> {
    if !(n > d + 1 && d + 1 >= 3) {
        return Err(Error::InvalidConfig { constraint: "n > d + 1 >= 3" });
    }
    let cfg = ExtendedConfig::new(n, d, d, d)?;
    // Work on the unit-spacing grid; Lebesgue quantities are affine
    // invariants.
    let grid = EquispacedGrid::new(0.0, n as f64, n)?;
    let gridx = grid.extend(d);
    let w = extended_weights(n, d);
    let map = extrapolation_coeffs(d, d, d)?;

    // Argmax of the polynomial Lebesgue function on the first d + 1 nodes,
    // restricted to the first interval where its maximum lives.
    let poly_grid = EquispacedGrid::new(0.0, d as f64, d)?;
    let poly_w = fh_weights(d, d)?;
    let poly_f = |t: f64| fh_lebesgue_function(&poly_grid, &poly_w, t);
    let (_, t_star) = scan_interval_max(&poly_f, 0.0, 1.0, 4 * DEFAULT_SAMPLES_PER_INTERVAL);

    let y = worst_case_vector(n, d)?;
    let ytilde = extrapolate_matrix(&y.values, &map)?;
    let lhs = extended_eval(&gridx, &w, &ytilde, t_star)?.abs();

    let kappa_d = kappa(d);
    let poly_lebesgue = poly_lebesgue_constant(d);
    let rhs = kappa_d * poly_lebesgue;

    let sampled = extended_lebesgue_report(&cfg, &map, &w, &gridx, DEFAULT_SAMPLES_PER_INTERVAL);
    Ok(Theorem1Report {
        n,
        d,
        lhs,
        rhs,
        holds: lhs >= rhs,
        t_star,
        kappa: kappa_d,
        poly_lebesgue,
        sampled_extended_lebesgue: sampled.constant,
    })
}
