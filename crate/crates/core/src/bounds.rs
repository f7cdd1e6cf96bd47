//! Closed-form approximation factors of the solvers and the curves comparing them.

use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("c_min = {0} outside [0, 1]")]
    CMinOutOfRange(f64),
    #[error("b = {0} must be positive")]
    BOutOfRange(f64),
    #[error("alpha = {0} outside (0, 1]")]
    AlphaOutOfRange(f64),
    #[error("step = {0} outside (0, 0.1]")]
    StepOutOfRange(f64),
}

fn one_minus_inv_e<F: Scalar>() -> F {
    F::one() - (-F::one()).exp()
}

fn check_c_min<F: Scalar>(c_min: F) -> Result<(), BoundsError> {
    if c_min >= F::zero() && c_min <= F::one() {
        Ok(())
    } else {
        Err(BoundsError::CMinOutOfRange(c_min.as_f64()))
    }
}

/// `(1 − 1/e)·c_min`: greedy seed selection that ignores edges entirely.
pub fn factor_seed_only<F: Scalar>(c_min: F) -> Result<F, BoundsError> {
    check_c_min(c_min)?;
    Ok(one_minus_inv_e::<F>() * c_min)
}

/// `1 − e^{−c_min/(1+c_min)}`: partial enumeration (prefix size at least 4) plus greedy completion.
pub fn factor_lb_greedy<F: Scalar>(c_min: F) -> Result<F, BoundsError> {
    check_c_min(c_min)?;
    Ok(F::one() - (-(c_min / (F::one() + c_min))).exp())
}

/// Half of [`factor_lb_greedy`]: the plain three-ratio greedy with single-pair fallback.
pub fn factor_lb_greedy_single<F: Scalar>(c_min: F) -> Result<F, BoundsError> {
    Ok(factor_lb_greedy(c_min)? / F::of(2.0))
}

/// `1 − e^{−bα/(bα+b+α+2)}` for the four-move greedy with an α-approximate bundle sub-solver.
pub fn factor_general<F: Scalar>(b: F, alpha: F) -> Result<F, BoundsError> {
    if !(b > F::zero()) || !b.is_finite() {
        return Err(BoundsError::BOutOfRange(b.as_f64()));
    }
    if !(alpha > F::zero() && alpha <= F::one()) {
        return Err(BoundsError::AlphaOutOfRange(alpha.as_f64()));
    }
    let two = F::of(2.0);
    let ba = b * alpha;
    Ok(F::one() - (-(ba / (ba + b + alpha + two))).exp())
}

/// Approximation factor of the greedy bundle sub-solver at threshold `b`: `(1 − 1/e)/(b + 1)`.
pub fn alpha_for_threshold<F: Scalar>(b: F) -> F {
    one_minus_inv_e::<F>() / (b + F::one())
}

fn general_at<F: Scalar>(b: F) -> F {
    factor_general(b, alpha_for_threshold(b)).unwrap_or_else(|_| F::zero())
}

/// Upper end of the search interval for [`optimal_b`].
pub const B_SEARCH_MAX: f64 = 64.0;

/// Threshold maximizing the general factor, and the factor it attains.
///
/// Grid scan over `(0, 64]` followed by golden-section refinement.
pub fn optimal_b<F: Scalar>() -> (F, F) {
    let steps = 6400;
    let h = F::of(B_SEARCH_MAX / steps as f64);
    let (mut best_i, mut best_v) = (1, F::neg_infinity());
    for i in 1..=steps {
        let v = general_at(h * F::of_usize(i));
        if v > best_v {
            best_i = i;
            best_v = v;
        }
    }
    let mut lo = h * F::of_usize(best_i - 1).max(F::of(1e-6));
    let mut hi = h * F::of_usize((best_i + 1).min(steps));
    let inv_phi = F::of((5f64.sqrt() - 1.0) / 2.0);
    let tol = F::of(1e-9).max(F::epsilon().sqrt());
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (general_at(x1), general_at(x2));
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = general_at(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = general_at(x1);
        }
    }
    let b = (lo + hi) / F::of(2.0);
    (b, general_at(b))
}

/// The three factors at one value of `c_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundProfile<F> {
    pub c_min: F,
    pub seed_only: F,
    pub lb_greedy: F,
    pub general_const: F,
}

impl<F: Scalar> BoundProfile<F> {
    pub fn at(c_min: F) -> Result<Self, BoundsError> {
        Ok(BoundProfile {
            c_min,
            seed_only: factor_seed_only(c_min)?,
            lb_greedy: factor_lb_greedy(c_min)?,
            general_const: optimal_b::<F>().1,
        })
    }
}

/// Sampled factor curves plus their crossing points.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure1<F> {
    pub rows: Vec<BoundProfile<F>>,
    /// `c_min` where the enumeration curve overtakes the constant general factor.
    pub general_meets_lb: F,
    /// `c_min` where the seed-only curve overtakes the enumeration curve.
    pub seed_only_meets_lb: F,
}

impl<F: Scalar> Figure1<F> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("c_min,seed_only,lb_greedy,general_const\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.c_min, r.seed_only, r.lb_greedy, r.general_const
            );
        }
        out
    }
}

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
fn bisect<F: Scalar>(f: impl Fn(F) -> F, mut lo: F, mut hi: F) -> F {
    let tol = F::of(1e-9).max(F::epsilon() * F::of(4.0));
    let mut f_lo = f(lo);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) / F::of(2.0);
        let f_mid = f(mid);
        if (f_mid < F::zero()) == (f_lo < F::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / F::of(2.0)
}

/// First sign change of `f` on a fine grid over `[0, 1]`, refined by bisection.
fn crossing<F: Scalar>(f: impl Fn(F) -> F) -> F {
    let n = 10_000;
    let grid = |i: usize| F::of_usize(i) / F::of_usize(n);
    let mut prev = f(grid(0));
    for i in 1..=n {
        let cur = f(grid(i));
        if prev == F::zero() {
            return grid(i - 1);
        }
        if (cur < F::zero()) != (prev < F::zero()) {
            return bisect(&f, grid(i - 1), grid(i));
        }
        prev = cur;
    }
    F::nan()
}

pub fn figure1_table<F: Scalar>(step: F) -> Result<Figure1<F>, BoundsError> {
    if !(step > F::zero() && step <= F::of(0.1)) {
        return Err(BoundsError::StepOutOfRange(step.as_f64()));
    }
    let general = optimal_b::<F>().1;
    let count = (F::one() / step).round().to_usize().unwrap_or(0);
    let mut rows = Vec::with_capacity(count + 1);
    for i in 0..=count {
        let c = (step * F::of_usize(i)).min(F::one());
        rows.push(BoundProfile {
            c_min: c,
            seed_only: factor_seed_only(c)?,
            lb_greedy: factor_lb_greedy(c)?,
            general_const: general,
        });
    }
    if rows.last().map(|r| r.c_min < F::one()).unwrap_or(true) {
        rows.push(BoundProfile {
            c_min: F::one(),
            seed_only: factor_seed_only(F::one())?,
            lb_greedy: factor_lb_greedy(F::one())?,
            general_const: general,
        });
    }
    let lb = |c: F| factor_lb_greedy(c).unwrap_or_else(|_| F::nan());
    let so = |c: F| factor_seed_only(c).unwrap_or_else(|_| F::nan());
    // Skip c_min = 0 where seed-only and enumeration curves touch trivially.
    let seed_only_meets_lb = {
        let f = |c: F| lb(c) - so(c);
        let lo = F::of(0.01);
        bisect(f, lo, F::one())
    };
    Ok(Figure1 {
        rows,
        general_meets_lb: crossing(|c| lb(c) - general),
        seed_only_meets_lb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn seed_only_values() {
        assert_abs_diff_eq!(factor_seed_only(1.0).unwrap(), 0.632_120_558_828_557_7, epsilon = 1e-15);
        assert_eq!(factor_seed_only(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(factor_seed_only(0.5).unwrap(), 0.316_060_279_414_278_8, epsilon = 1e-12);
        assert!(factor_seed_only(1.5).is_err());
        assert!(factor_seed_only(-0.1).is_err());
    }

    #[test]
    fn lb_greedy_values() {
        assert_abs_diff_eq!(factor_lb_greedy(1.0).unwrap(), 1.0 - (-0.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(factor_lb_greedy(1.0).unwrap(), 0.3935, epsilon = 1e-4);
        assert_eq!(factor_lb_greedy(0.0).unwrap(), 0.0);
        let c = 0.3821;
        assert_abs_diff_eq!(
            factor_lb_greedy(c).unwrap(),
            factor_seed_only(c).unwrap(),
            epsilon = 1e-4
        );
        assert!(factor_lb_greedy(f64::NAN).is_err());
    }

    #[test]
    fn general_values() {
        let alpha = (1.0 - (-1.0f64).exp()) / 2.6;
        assert_abs_diff_eq!(factor_general(1.6, alpha).unwrap(), 0.0878, epsilon = 1e-4);
        assert!(factor_general(1.6, 0.3).unwrap() > factor_general(1.6, 0.2).unwrap());
        assert!(factor_general(1e-9, 0.5).unwrap() < 1e-8);
        assert!(factor_general(0.0, 0.5).is_err());
        assert!(factor_general(1.0, 0.0).is_err());
        assert!(factor_general(1.0, 1.5).is_err());
    }

    #[test]
    fn optimal_b_against_dense_scan() {
        let (b, f) = optimal_b::<f64>();
        assert!(f > 0.0878);
        // independent dense scan with step 1e-4
        let (mut best_b, mut best_f) = (0.0, f64::NEG_INFINITY);
        let mut x: f64 = 1e-4;
        while x <= 10.0 {
            let a = (1.0 - (-1.0f64).exp()) / (x + 1.0);
            let v = 1.0 - (-(x * a) / (x * a + x + a + 2.0)).exp();
            if v > best_f {
                best_f = v;
                best_b = x;
            }
            x += 1e-4;
        }
        assert!((b - best_b).abs() < 1e-3, "b = {b}, scan = {best_b}");
        assert!((b - 1.6).abs() < 0.1);
        assert!(f >= best_f - 1e-12);
        for db in [-0.5, 0.5] {
            assert!(general_at(b + db) < f);
        }
    }

    #[test]
    fn search_cap_is_not_binding() {
        // factor decreases along the tail of the search interval
        let tail: Vec<f64> = (0..=16).map(|i| general_at(4.0 + 4.0 * i as f64)).collect();
        assert!(tail.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn figure_intersections() {
        let fig = figure1_table::<f64>(0.01).unwrap();
        assert!((fig.general_meets_lb - 0.1011).abs() < 1e-3, "{}", fig.general_meets_lb);
        assert!((fig.seed_only_meets_lb - 0.3821).abs() < 1e-3, "{}", fig.seed_only_meets_lb);
        let first = fig.rows[0];
        assert_eq!((first.c_min, first.seed_only, first.lb_greedy), (0.0, 0.0, 0.0));
        assert!(first.general_const > 0.0878);
        assert_eq!(fig.rows.last().unwrap().c_min, 1.0);
        assert_eq!(fig.rows.len(), 101);
        assert!(figure1_table(0.0).is_err());
        assert!(figure1_table(0.2).is_err());
    }

    #[test]
    fn seed_only_crossing_is_unique() {
        // lb_greedy >= seed_only below the crossing, <= above it
        let x = figure1_table::<f64>(0.1).unwrap().seed_only_meets_lb;
        for i in 1..1000 {
            let c = i as f64 / 1000.0;
            let d = factor_lb_greedy(c).unwrap() - factor_seed_only(c).unwrap();
            if c < x - 1e-6 {
                assert!(d >= 0.0, "c = {c}");
            } else if c > x + 1e-6 {
                assert!(d <= 0.0, "c = {c}");
            }
        }
    }

    #[test]
    fn all_factors_below_hardness_threshold() {
        let limit = 1.0 - (-1.0f64).exp();
        for i in 0..=100 {
            let c = i as f64 / 100.0;
            let p = BoundProfile::at(c).unwrap();
            assert!(p.lb_greedy < limit);
            assert!(p.general_const < limit);
            if i < 100 {
                assert!(p.seed_only < limit);
            }
            assert!((0.0..=1.0).contains(&p.seed_only));
        }
        assert_abs_diff_eq!(factor_seed_only(1.0).unwrap(), limit, epsilon = 1e-15);
    }

    #[test]
    fn single_precision_curves() {
        let (b, f) = optimal_b::<f32>();
        assert!((b - 1.622).abs() < 0.01);
        assert!(f > 0.0878);
        let fig = figure1_table(0.05f32).unwrap();
        assert!((fig.seed_only_meets_lb - 0.3821).abs() < 1e-3);
    }

    #[test]
    fn csv_header() {
        let csv = figure1_table(0.1).unwrap().to_csv();
        assert!(csv.starts_with("c_min,seed_only,lb_greedy,general_const\n"));
        assert_eq!(csv.lines().count(), 12);
    }
}
