//! Numerical kernels shared by the solvers: the two-sided dictionary
//! operator, a matrix-free conjugate gradient routine, the soft-threshold
//! proximal map, closed-form ridge shrinkage, and the three ridge least
//! squares sub-solvers built on top of them.

use ndarray::{Array, Array2, Dimension, Zip};

use crate::error::{Error, Result};

/// The two-sided dictionary operator `C -> left * C * right`, applied
/// without materializing the equivalent Kronecker matrix.
///
/// For `left` of shape (n_pixels x k1) and `right` of shape (k2 x n_bands),
/// [`forward`](Self::forward) maps a k1 x k2 coefficient matrix to an
/// n_pixels x n_bands band matrix. Stacking columns, the same map is the
/// Kronecker product `rightᵀ (x) left` acting on the vectorized
/// coefficients; tests certify that identity, the implementation never
/// builds the big matrix.
#[derive(Debug, Clone, Copy)]
pub struct BilinearMap<'a> {
    left: &'a Array2<f64>,
    right: &'a Array2<f64>,
}

impl<'a> BilinearMap<'a> {
    pub fn new(left: &'a Array2<f64>, right: &'a Array2<f64>) -> Self {
        Self { left, right }
    }

    /// Shape a coefficient matrix must have: (left cols, right rows).
    pub fn coeff_shape(&self) -> (usize, usize) {
        (self.left.ncols(), self.right.nrows())
    }

    /// Shape of the forward image: (left rows, right cols).
    pub fn output_shape(&self) -> (usize, usize) {
        (self.left.nrows(), self.right.ncols())
    }

    /// `left * coeffs * right`. Panics if `coeffs` has the wrong shape.
    pub fn forward(&self, coeffs: &Array2<f64>) -> Array2<f64> {
        self.left.dot(coeffs).dot(self.right)
    }

    /// Adjoint under the Frobenius inner product: `W -> leftᵀ * W * rightᵀ`.
    pub fn adjoint(&self, w: &Array2<f64>) -> Array2<f64> {
        self.left.t().dot(w).dot(&self.right.t())
    }
}

/// Accuracy knobs for the conjugate gradient solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsqConfig {
    /// Relative residual target, `||A x - b|| / ||b||`.
    pub tol: f64,
    /// Iteration cap; the best iterate so far is returned when it is hit.
    pub max_iter: usize,
}

impl Default for LsqConfig {
    fn default() -> Self {
        // Two orders tighter than the outer stopping tests, so inner solve
        // error never masks outer convergence.
        Self {
            tol: 1e-6,
            max_iter: 100,
        }
    }
}

/// Outcome of a conjugate gradient run.
#[derive(Debug, Clone)]
pub struct CgOutcome<D: Dimension> {
    pub solution: Array<f64, D>,
    /// Iterations actually performed.
    pub iterations: usize,
    /// Whether the relative residual target was met.
    pub converged: bool,
    /// Final relative residual from the CG recurrence.
    pub rel_residual: f64,
}

fn inner<D: Dimension>(a: &Array<f64, D>, b: &Array<f64, D>) -> f64 {
    Zip::from(a).and(b).fold(0.0, |acc, &x, &y| acc + x * y)
}

/// Conjugate gradient for `A x = b` with a symmetric positive semidefinite
/// `A` given as a closure. Starts from zero, works on any array dimension
/// (inner products are taken elementwise), and fails loudly on NaN or
/// infinity, naming the iteration.
pub fn cg_solve<D, F>(apply: F, b: &Array<f64, D>, cfg: &LsqConfig) -> Result<CgOutcome<D>>
where
    D: Dimension,
    F: Fn(&Array<f64, D>) -> Array<f64, D>,
{
    if !(cfg.tol > 0.0) {
        return Err(Error::invalid(format!(
            "cg tolerance must be positive, got {}",
            cfg.tol
        )));
    }
    if cfg.max_iter == 0 {
        return Err(Error::invalid("cg max_iter must be at least 1"));
    }
    let b_norm = inner(b, b).sqrt();
    if !b_norm.is_finite() {
        return Err(Error::invalid(
            "cg right-hand side contains non-finite values",
        ));
    }
    let mut x = Array::zeros(b.raw_dim());
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            converged: true,
            rel_residual: 0.0,
        });
    }

    let mut r = b.clone();
    let mut p = b.clone();
    let mut rs = inner(&r, &r);
    let mut iterations = 0;
    let mut converged = false;
    for k in 0..cfg.max_iter {
        let ap = apply(&p);
        let p_ap = inner(&p, &ap);
        if !p_ap.is_finite() {
            return Err(Error::NonFinite {
                context: "cg curvature".into(),
                iteration: k,
            });
        }
        if p_ap <= 0.0 {
            // Null-space direction of a PSD operator; the iterate is already
            // stationary along p, nothing further to gain.
            break;
        }
        let alpha = rs / p_ap;
        Zip::from(&mut x).and(&p).for_each(|x, &p| *x += alpha * p);
        Zip::from(&mut r).and(&ap).for_each(|r, &ap| *r -= alpha * ap);
        let rs_next = inner(&r, &r);
        if !rs_next.is_finite() {
            return Err(Error::NonFinite {
                context: "cg residual".into(),
                iteration: k,
            });
        }
        iterations = k + 1;
        if rs_next.sqrt() / b_norm <= cfg.tol {
            converged = true;
            rs = rs_next;
            break;
        }
        let beta = rs_next / rs;
        Zip::from(&mut p).and(&r).for_each(|p, &r| *p = r + beta * *p);
        rs = rs_next;
    }
    Ok(CgOutcome {
        solution: x,
        iterations,
        converged,
        rel_residual: rs.sqrt() / b_norm,
    })
}

/// Soft threshold of a single value: the minimizer of
/// `tau * |p| + 1/2 * (p - v)^2`.
pub fn soft_threshold_scalar(v: f64, tau: f64) -> f64 {
    let shrunk = v.abs() - tau;
    if shrunk <= 0.0 {
        0.0
    } else {
        shrunk * v.signum()
    }
}

/// Elementwise soft threshold, `sign(v) * max(|v| - tau, 0)`. Rejects a
/// negative (or NaN) threshold.
pub fn soft_threshold<D: Dimension>(v: &Array<f64, D>, tau: f64) -> Result<Array<f64, D>> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!(
            "soft threshold needs tau >= 0, got {tau}"
        )));
    }
    Ok(v.mapv(|x| soft_threshold_scalar(x, tau)))
}

/// Closed-form minimizer of `lambda * ||R||_F^2 + mu * ||R - a||_F^2`,
/// namely `mu / (lambda + mu) * a`.
pub fn ridge_shrink<D: Dimension>(
    a: &Array<f64, D>,
    lambda: f64,
    mu: f64,
) -> Result<Array<f64, D>> {
    if !(mu > 0.0) {
        return Err(Error::invalid(format!(
            "ridge shrink needs mu > 0, got {mu}"
        )));
    }
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!(
            "ridge shrink needs lambda >= 0, got {lambda}"
        )));
    }
    let factor = mu / (lambda + mu);
    Ok(a.mapv(|x| factor * x))
}

fn ensure_shape(op: &str, name: &str, a: &Array2<f64>, want: (usize, usize)) -> Result<()> {
    if a.dim() != want {
        return Err(Error::shape(format!(
            "{op}: {name} is {}x{} but {}x{} is required",
            a.nrows(),
            a.ncols(),
            want.0,
            want.1
        )));
    }
    Ok(())
}

fn ensure_weights(op: &str, fit_weight: f64, tie_weight: f64) -> Result<()> {
    if !fit_weight.is_finite() || !tie_weight.is_finite() || fit_weight < 0.0 || tie_weight < 0.0 {
        return Err(Error::invalid(format!(
            "{op}: weights must be finite and nonnegative, got fit {fit_weight}, tie {tie_weight}"
        )));
    }
    if fit_weight + tie_weight == 0.0 {
        return Err(Error::invalid(format!(
            "{op}: at least one of the weights must be positive"
        )));
    }
    Ok(())
}

/// Ridge update of the coefficient block: minimizes
///
/// ```text
/// fit_weight * || residual_proxy - (observed - left C right) - residual_relax ||_F^2
///   + tie_weight * || coeff_proxy - C - coeff_relax ||_F^2
/// ```
///
/// over `C` by conjugate gradient on the normal equations, applying the
/// two-sided operator matrix-free. With `fit_weight = 0` the fit decouples
/// and the solve returns `coeff_proxy - coeff_relax`.
#[allow(clippy::too_many_arguments)]
pub fn solve_coeffs(
    observed: &Array2<f64>,
    left: &Array2<f64>,
    right: &Array2<f64>,
    residual_proxy: &Array2<f64>,
    residual_relax: &Array2<f64>,
    coeff_proxy: &Array2<f64>,
    coeff_relax: &Array2<f64>,
    fit_weight: f64,
    tie_weight: f64,
    cfg: &LsqConfig,
) -> Result<Array2<f64>> {
    let op = "solve_coeffs";
    ensure_weights(op, fit_weight, tie_weight)?;
    let map = BilinearMap::new(left, right);
    ensure_shape(op, "observed", observed, map.output_shape())?;
    ensure_shape(op, "residual_proxy", residual_proxy, map.output_shape())?;
    ensure_shape(op, "residual_relax", residual_relax, map.output_shape())?;
    ensure_shape(op, "coeff_proxy", coeff_proxy, map.coeff_shape())?;
    ensure_shape(op, "coeff_relax", coeff_relax, map.coeff_shape())?;

    // Fit target: the proxy equation rearranged to left C right = target.
    let target = observed + residual_relax - residual_proxy;
    let anchor = coeff_proxy - coeff_relax;

    let mut rhs = map.adjoint(&target);
    rhs.mapv_inplace(|v| v * fit_weight);
    rhs.scaled_add(tie_weight, &anchor);

    let outcome = cg_solve(
        |c| {
            let mut out = map.adjoint(&map.forward(c));
            out.mapv_inplace(|v| v * fit_weight);
            out.scaled_add(tie_weight, c);
            out
        },
        &rhs,
        cfg,
    )?;
    Ok(outcome.solution)
}

/// Ridge update of the left factor: minimizes
///
/// ```text
/// fit_weight * || residual_proxy - (observed - L coeffs right) - residual_relax ||_F^2
///   + tie_weight * || left_proxy - L - left_relax ||_F^2
/// ```
///
/// over `L` via CG on the normal equations with the Gram matrix of
/// `M = coeffs * right`.
#[allow(clippy::too_many_arguments)]
pub fn solve_left(
    observed: &Array2<f64>,
    coeffs: &Array2<f64>,
    right: &Array2<f64>,
    residual_proxy: &Array2<f64>,
    residual_relax: &Array2<f64>,
    left_proxy: &Array2<f64>,
    left_relax: &Array2<f64>,
    fit_weight: f64,
    tie_weight: f64,
    cfg: &LsqConfig,
) -> Result<Array2<f64>> {
    let op = "solve_left";
    ensure_weights(op, fit_weight, tie_weight)?;
    if coeffs.ncols() != right.nrows() {
        return Err(Error::shape(format!(
            "{op}: coeffs is {}x{} but right has {} rows",
            coeffs.nrows(),
            coeffs.ncols(),
            right.nrows()
        )));
    }
    let (n_out, k) = (observed.nrows(), coeffs.nrows());
    ensure_shape(op, "observed", observed, (n_out, right.ncols()))?;
    ensure_shape(op, "residual_proxy", residual_proxy, observed.dim())?;
    ensure_shape(op, "residual_relax", residual_relax, observed.dim())?;
    ensure_shape(op, "left_proxy", left_proxy, (n_out, k))?;
    ensure_shape(op, "left_relax", left_relax, (n_out, k))?;

    let m = coeffs.dot(right); // k x n_bands
    let gram = m.dot(&m.t()); // k x k
    let target = observed + residual_relax - residual_proxy;
    let anchor = left_proxy - left_relax;

    let mut rhs = target.dot(&m.t());
    rhs.mapv_inplace(|v| v * fit_weight);
    rhs.scaled_add(tie_weight, &anchor);

    let outcome = cg_solve(
        |l: &Array2<f64>| {
            let mut out = l.dot(&gram);
            out.mapv_inplace(|v| v * fit_weight);
            out.scaled_add(tie_weight, l);
            out
        },
        &rhs,
        cfg,
    )?;
    Ok(outcome.solution)
}

/// Ridge update of the right factor: mirror of [`solve_left`] with
/// `M = left * coeffs`, minimizing over `R` in `observed ~ M R`.
#[allow(clippy::too_many_arguments)]
pub fn solve_right(
    observed: &Array2<f64>,
    left: &Array2<f64>,
    coeffs: &Array2<f64>,
    residual_proxy: &Array2<f64>,
    residual_relax: &Array2<f64>,
    right_proxy: &Array2<f64>,
    right_relax: &Array2<f64>,
    fit_weight: f64,
    tie_weight: f64,
    cfg: &LsqConfig,
) -> Result<Array2<f64>> {
    let op = "solve_right";
    ensure_weights(op, fit_weight, tie_weight)?;
    if left.ncols() != coeffs.nrows() {
        return Err(Error::shape(format!(
            "{op}: left is {}x{} but coeffs has {} rows",
            left.nrows(),
            left.ncols(),
            coeffs.nrows()
        )));
    }
    let k = coeffs.ncols();
    ensure_shape(op, "observed", observed, (left.nrows(), observed.ncols()))?;
    ensure_shape(op, "residual_proxy", residual_proxy, observed.dim())?;
    ensure_shape(op, "residual_relax", residual_relax, observed.dim())?;
    ensure_shape(op, "right_proxy", right_proxy, (k, observed.ncols()))?;
    ensure_shape(op, "right_relax", right_relax, (k, observed.ncols()))?;

    let m = left.dot(coeffs); // n_pixels x k
    let gram = m.t().dot(&m); // k x k
    let target = observed + residual_relax - residual_proxy;
    let anchor = right_proxy - right_relax;

    let mut rhs = m.t().dot(&target);
    rhs.mapv_inplace(|v| v * fit_weight);
    rhs.scaled_add(tie_weight, &anchor);

    let outcome = cg_solve(
        |r: &Array2<f64>| {
            let mut out = gram.dot(r);
            out.mapv_inplace(|v| v * fit_weight);
            out.scaled_add(tie_weight, r);
            out
        },
        &rhs,
        cfg,
    )?;
    Ok(outcome.solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array1, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn soft_threshold_analytic_cases() {
        // Values chosen to be exact in binary so the shrunk results are too.
        let v = Array1::from(vec![0.75, -0.125, -1.0]);
        let out = soft_threshold(&v, 0.25).unwrap();
        assert_eq!(out[0], 0.5);
        assert_eq!(out[1], 0.0);
        assert_eq!(out[2], -0.75);
        assert!(soft_threshold(&v, -0.1).is_err());
        assert!(soft_threshold(&v, f64::NAN).is_err());
    }

    #[test]
    fn soft_threshold_matches_a_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let v = rng.random::<f64>() * 4.0 - 2.0;
            let tau = rng.random::<f64>();
            let got = soft_threshold_scalar(v, tau);
            // Brute-force minimizer of tau |p| + 1/2 (p - v)^2 over a grid.
            let mut best = f64::INFINITY;
            let mut best_p = 0.0;
            let mut p: f64 = -3.0;
            while p <= 3.0 {
                let f = tau * p.abs() + 0.5 * (p - v) * (p - v);
                if f < best {
                    best = f;
                    best_p = p;
                }
                p += 1e-3;
            }
            assert!(
                (got - best_p).abs() <= 1.5e-3,
                "v {v}, tau {tau}: got {got}, grid {best_p}"
            );
        }
    }

    #[test]
    fn soft_threshold_is_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let u = random_matrix(5, 4, &mut rng);
            let v = random_matrix(5, 4, &mut rng);
            let tau = rng.random::<f64>();
            let su = soft_threshold(&u, tau).unwrap();
            let sv = soft_threshold(&v, tau).unwrap();
            let d_in = inner(&(&u - &v), &(&u - &v)).sqrt();
            let d_out = inner(&(&su - &sv), &(&su - &sv)).sqrt();
            assert!(d_out <= d_in + 1e-12);
        }
    }

    #[test]
    fn ridge_shrink_closed_form() {
        let a = Array2::from_elem((2, 2), 1.0);
        // lambda = 0 leaves the input untouched.
        assert_eq!(ridge_shrink(&a, 0.0, 3.0).unwrap(), a);
        // The default spectral-penalty weights shrink by exactly 1/11.
        let out = ridge_shrink(&a, 1e4, 1e3).unwrap();
        assert_eq!(out[[0, 0]], 1.0 / 11.0);
        assert!(ridge_shrink(&a, 1.0, 0.0).is_err());
        assert!(ridge_shrink(&a, -1.0, 1.0).is_err());
    }

    #[test]
    fn ridge_shrink_satisfies_stationarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let a = random_matrix(3, 5, &mut rng);
            let lambda = rng.random::<f64>() * 10.0;
            let mu = rng.random::<f64>() * 10.0 + 0.1;
            let r = ridge_shrink(&a, lambda, mu).unwrap();
            // Gradient of lambda ||R||^2 + mu ||R - a||^2 at the output.
            let grad = 2.0 * lambda * &r + 2.0 * mu * (&r - &a);
            assert!(grad.iter().all(|g| g.abs() <= 1e-12));
        }
    }

    #[test]
    fn cg_identity_system_is_exact() {
        let b = Array1::from(vec![1.0, -2.0, 3.0, 0.5, -0.25]);
        let out = cg_solve(|x| x.clone(), &b, &LsqConfig::default()).unwrap();
        assert!(out.converged);
        for (x, b) in out.solution.iter().zip(b.iter()) {
            assert!((x - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn cg_zero_rhs_returns_zero_immediately() {
        let b = Array1::<f64>::zeros(7);
        let out = cg_solve(|x| x.clone(), &b, &LsqConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert!(out.solution.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cg_reports_non_finite_operators() {
        let b = Array1::from(vec![1.0, 2.0]);
        let err = cg_solve(|_| Array1::from(vec![f64::NAN, 0.0]), &b, &LsqConfig::default())
            .unwrap_err();
        assert!(err.to_string().contains("iteration 0"), "got: {err}");
    }

    #[test]
    fn cg_solves_a_small_spd_system() {
        // A = Bᵀ B + I is SPD; compare against residual directly.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bmat = random_matrix(8, 8, &mut rng);
        let a = bmat.t().dot(&bmat) + Array2::<f64>::eye(8);
        let rhs = Array1::from((0..8).map(|i| (i as f64) - 3.5).collect::<Vec<_>>());
        let out = cg_solve(|x| a.dot(x), &rhs, &LsqConfig::default()).unwrap();
        assert!(out.converged, "rel residual {}", out.rel_residual);
        let resid = &a.dot(&out.solution) - &rhs;
        let rel = resid.dot(&resid).sqrt() / rhs.dot(&rhs).sqrt();
        assert!(rel <= 1e-6, "relative residual {rel}");
    }

    #[test]
    fn solve_coeffs_identity_dictionaries() {
        // With identity dictionaries, zero proxies and unit weights the
        // normal equations read 2 C = observed.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = random_matrix(4, 4, &mut rng);
        let eye = Array2::<f64>::eye(4);
        let zero = Array2::<f64>::zeros((4, 4));
        let c = solve_coeffs(
            &y,
            &eye,
            &eye,
            &zero,
            &zero,
            &zero,
            &zero,
            1.0,
            1.0,
            &LsqConfig::default(),
        )
        .unwrap();
        for (got, want) in c.iter().zip(y.iter()) {
            assert!((got - want / 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn solve_coeffs_decouples_when_fit_weight_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let y = random_matrix(4, 3, &mut rng);
        let left = random_matrix(4, 4, &mut rng);
        let right = random_matrix(3, 3, &mut rng);
        let zero_out = Array2::<f64>::zeros((4, 3));
        let proxy = random_matrix(4, 3, &mut rng);
        let q = random_matrix(4, 3, &mut rng);
        let b2 = random_matrix(4, 3, &mut rng);
        let c = solve_coeffs(
            &y,
            &left,
            &right,
            &proxy,
            &zero_out,
            &q,
            &b2,
            0.0,
            1.0,
            &LsqConfig::default(),
        )
        .unwrap();
        let want = &q - &b2;
        assert_eq!(c, want);
    }

    #[test]
    fn solve_left_identity_gram() {
        // coeffs * right = I makes the normal equations 2 L = observed.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let y = random_matrix(4, 3, &mut rng);
        let eye3 = Array2::<f64>::eye(3);
        let zero_out = Array2::<f64>::zeros((4, 3));
        let zero_l = Array2::<f64>::zeros((4, 3));
        let l = solve_left(
            &y,
            &eye3,
            &eye3,
            &zero_out,
            &zero_out,
            &zero_l,
            &zero_l,
            1.0,
            1.0,
            &LsqConfig::default(),
        )
        .unwrap();
        for (got, want) in l.iter().zip(y.iter()) {
            assert!((got - want / 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn solve_left_decouples_when_fit_weight_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let y = random_matrix(4, 3, &mut rng);
        let coeffs = random_matrix(5, 3, &mut rng);
        let right = random_matrix(3, 3, &mut rng);
        let zero_out = Array2::<f64>::zeros((4, 3));
        let r_proxy = random_matrix(4, 5, &mut rng);
        let b3 = random_matrix(4, 5, &mut rng);
        let l = solve_left(
            &y,
            &coeffs,
            &right,
            &zero_out,
            &zero_out,
            &r_proxy,
            &b3,
            0.0,
            1.0,
            &LsqConfig::default(),
        )
        .unwrap();
        assert_eq!(l, &r_proxy - &b3);
    }

    #[test]
    fn solve_right_identity_gram() {
        // left * coeffs = I makes the normal equations 2 R = observed.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y = random_matrix(3, 5, &mut rng);
        let eye3 = Array2::<f64>::eye(3);
        let zero_out = Array2::<f64>::zeros((3, 5));
        let zero_r = Array2::<f64>::zeros((3, 5));
        let r = solve_right(
            &y,
            &eye3,
            &eye3,
            &zero_out,
            &zero_out,
            &zero_r,
            &zero_r,
            1.0,
            1.0,
            &LsqConfig::default(),
        )
        .unwrap();
        for (got, want) in r.iter().zip(y.iter()) {
            assert!((got - want / 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn solve_right_decouples_when_fit_weight_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let y = random_matrix(4, 3, &mut rng);
        let left = random_matrix(4, 5, &mut rng);
        let coeffs = random_matrix(5, 2, &mut rng);
        let zero_out = Array2::<f64>::zeros((4, 3));
        let s_proxy = random_matrix(2, 3, &mut rng);
        let b4 = random_matrix(2, 3, &mut rng);
        let r = solve_right(
            &y,
            &left,
            &coeffs,
            &zero_out,
            &zero_out,
            &s_proxy,
            &b4,
            0.0,
            1.0,
            &LsqConfig::default(),
        )
        .unwrap();
        assert_eq!(r, &s_proxy - &b4);
    }

    #[test]
    fn sub_solvers_reject_inconsistent_shapes() {
        let y = Array2::<f64>::zeros((4, 3));
        let left = Array2::<f64>::zeros((4, 2));
        let right = Array2::<f64>::zeros((2, 3));
        let bad = Array2::<f64>::zeros((5, 3));
        let cz = Array2::<f64>::zeros((2, 2));
        let cfg = LsqConfig::default();
        assert!(solve_coeffs(&y, &left, &right, &bad, &y, &cz, &cz, 1.0, 1.0, &cfg).is_err());
        assert!(solve_coeffs(&y, &left, &right, &y, &y, &cz, &bad, 1.0, 1.0, &cfg).is_err());
        assert!(solve_coeffs(&y, &left, &right, &y, &y, &cz, &cz, 0.0, 0.0, &cfg).is_err());
    }
}
