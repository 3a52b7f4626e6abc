//! Oracle tests: the iterative and structured solvers are checked against
//! naive dense reference computations that share no code with the library.

mod common;

use common::{dense_solve, kron, unvec_cm, vec_cm};
use hsdenoise_core::{
    cg_solve, solve_coeffs, solve_left, solve_right, BilinearMap, LsqConfig,
};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random::<f64>() * 2.0 - 1.0)
}

#[test]
fn cg_matches_dense_gaussian_elimination_on_spd_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let n = 50;
    for trial in 0..20 {
        // M^T M + I is symmetric positive definite.
        let m = random_matrix(n, n, &mut rng);
        let a = m.t().dot(&m) + Array2::<f64>::eye(n);
        let b = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 2.0 - 1.0);

        let cfg = LsqConfig {
            tol: 1e-12,
            max_iter: 2000,
        };
        let outcome = cg_solve(|x| a.dot(x), &b, &cfg).unwrap();
        assert!(outcome.converged, "trial {trial}: cg did not converge");

        let dense = dense_solve(&a, b.as_slice().unwrap());
        let num: f64 = outcome
            .solution
            .iter()
            .zip(&dense)
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        let den: f64 = dense.iter().map(|v| v * v).sum();
        let rel = (num / den).sqrt();
        assert!(rel <= 1e-6, "trial {trial}: relative error {rel}");
    }
}

#[test]
fn bilinear_map_agrees_with_the_kronecker_vectorization_identity() {
    // vec(D1 Z D2) = kron(D2^T, D1) vec(Z), and the adjoint is the
    // transpose of that matrix.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..20 {
        let np = rng.random_range(1..=12);
        let nb = rng.random_range(1..=12);
        let k1 = rng.random_range(1..=12);
        let k2 = rng.random_range(1..=12);
        let d1 = random_matrix(np, k1, &mut rng);
        let d2 = random_matrix(k2, nb, &mut rng);
        let z = random_matrix(k1, k2, &mut rng);
        let w = random_matrix(np, nb, &mut rng);

        let map = BilinearMap::new(&d1, &d2);
        let big = kron(&d2.t().to_owned(), &d1);

        let forward = vec_cm(&map.forward(&z));
        let oracle: Vec<f64> = big
            .rows()
            .into_iter()
            .map(|row| row.iter().zip(&vec_cm(&z)).map(|(a, b)| a * b).sum())
            .collect();
        for (i, (a, b)) in forward.iter().zip(&oracle).enumerate() {
            assert!(
                (a - b).abs() <= 1e-10,
                "trial {trial}, forward entry {i}: {a} vs {b}"
            );
        }

        let adjoint = vec_cm(&map.adjoint(&w));
        let wt = vec_cm(&w);
        let oracle: Vec<f64> = (0..big.ncols())
            .map(|j| (0..big.nrows()).map(|i| big[[i, j]] * wt[i]).sum())
            .collect();
        for (i, (a, b)) in adjoint.iter().zip(&oracle).enumerate() {
            assert!(
                (a - b).abs() <= 1e-10,
                "trial {trial}, adjoint entry {i}: {a} vs {b}"
            );
        }
    }
}

struct SplitFixture {
    y: Array2<f64>,
    d1: Array2<f64>,
    d2: Array2<f64>,
    z: Array2<f64>,
    p: Array2<f64>,
    b1: Array2<f64>,
    q: Array2<f64>,
    b2: Array2<f64>,
    r: Array2<f64>,
    b3: Array2<f64>,
    s: Array2<f64>,
    b4: Array2<f64>,
    mu: f64,
    mu1: f64,
    mu2: f64,
    mu3: f64,
}

impl SplitFixture {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (np, nb, k1, k2) = (4, 3, 4, 3);
        Self {
            y: random_matrix(np, nb, &mut rng),
            d1: random_matrix(np, k1, &mut rng),
            d2: random_matrix(k2, nb, &mut rng),
            z: random_matrix(k1, k2, &mut rng),
            p: random_matrix(np, nb, &mut rng),
            b1: random_matrix(np, nb, &mut rng),
            q: random_matrix(k1, k2, &mut rng),
            b2: random_matrix(k1, k2, &mut rng),
            r: random_matrix(np, k1, &mut rng),
            b3: random_matrix(np, k1, &mut rng),
            s: random_matrix(k2, nb, &mut rng),
            b4: random_matrix(k2, nb, &mut rng),
            mu: 10.0,
            mu1: 10.0,
            mu2: 1e3,
            mu3: 1e3,
        }
    }

    fn cfg() -> LsqConfig {
        LsqConfig {
            tol: 1e-14,
            max_iter: 5000,
        }
    }

    /// The quadratic sub-objective of the coefficient block:
    /// `mu ||P - (Y - D1 Z D2) - B1||_F^2 + mu1 ||Q - Z - B2||_F^2`.
    fn coeff_subobjective(&self, z: &Array2<f64>) -> f64 {
        let fit_gap = &self.p - &(&self.y - &self.d1.dot(z).dot(&self.d2)) - &self.b1;
        let tie_gap = &self.q - z - &self.b2;
        self.mu * fit_gap.iter().map(|v| v * v).sum::<f64>()
            + self.mu1 * tie_gap.iter().map(|v| v * v).sum::<f64>()
    }
}

#[test]
fn coefficient_solve_matches_the_dense_normal_equations() {
    for seed in [1, 2, 3] {
        let f = SplitFixture::new(seed);
        let got = solve_coeffs(
            &f.y, &f.d1, &f.d2, &f.p, &f.b1, &f.q, &f.b2, f.mu, f.mu1,
            &SplitFixture::cfg(),
        )
        .unwrap();

        // mu kron(D2 D2^T, D1^T D1) + mu1 I, against mu D1^T C D2^T + mu1 (Q - B2).
        let c = &f.y + &f.b1 - &f.p;
        let gram = kron(&f.d2.dot(&f.d2.t()), &f.d1.t().dot(&f.d1));
        let k = gram.nrows();
        let a = gram.mapv(|v| f.mu * v) + Array2::<f64>::eye(k).mapv(|v| f.mu1 * v);
        let rhs_mat =
            f.d1.t().dot(&c).dot(&f.d2.t()).mapv(|v| f.mu * v) + (&f.q - &f.b2).mapv(|v| f.mu1 * v);
        let x = dense_solve(&a, &vec_cm(&rhs_mat));
        let want = unvec_cm(&x, 4, 3);

        let err = (&got - &want).iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(err <= 1e-8, "seed {seed}: max deviation {err}");

        // The solve can only improve its own sub-objective.
        let before = f.coeff_subobjective(&f.z);
        let after = f.coeff_subobjective(&got);
        assert!(after <= before + 1e-9, "seed {seed}: {before} -> {after}");
    }
}

#[test]
fn spatial_dictionary_solve_matches_the_dense_normal_equations() {
    for seed in [4, 5, 6] {
        let f = SplitFixture::new(seed);
        let got = solve_left(
            &f.y, &f.z, &f.d2, &f.p, &f.b1, &f.r, &f.b3, f.mu, f.mu2,
            &SplitFixture::cfg(),
        )
        .unwrap();

        // D1 (M M^T) vectorizes as kron(M M^T, I_np) vec(D1) with M = Z D2.
        let c = &f.y + &f.b1 - &f.p;
        let m = f.z.dot(&f.d2);
        let gram = kron(&m.dot(&m.t()), &Array2::<f64>::eye(4));
        let k = gram.nrows();
        let a = gram.mapv(|v| f.mu * v) + Array2::<f64>::eye(k).mapv(|v| f.mu2 * v);
        let rhs_mat = c.dot(&m.t()).mapv(|v| f.mu * v) + (&f.r - &f.b3).mapv(|v| f.mu2 * v);
        let x = dense_solve(&a, &vec_cm(&rhs_mat));
        let want = unvec_cm(&x, 4, 4);

        let err = (&got - &want).iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(err <= 1e-8, "seed {seed}: max deviation {err}");

        let fit_before = &f.p - &(&f.y - &f.d1.dot(&f.z).dot(&f.d2)) - &f.b1;
        let tie_before = &f.r - &f.d1 - &f.b3;
        let before = f.mu * fit_before.iter().map(|v| v * v).sum::<f64>()
            + f.mu2 * tie_before.iter().map(|v| v * v).sum::<f64>();
        let fit_after = &f.p - &(&f.y - &got.dot(&f.z).dot(&f.d2)) - &f.b1;
        let tie_after = &f.r - &got - &f.b3;
        let after = f.mu * fit_after.iter().map(|v| v * v).sum::<f64>()
            + f.mu2 * tie_after.iter().map(|v| v * v).sum::<f64>();
        assert!(after <= before + 1e-9, "seed {seed}: {before} -> {after}");
    }
}

#[test]
fn spectral_dictionary_solve_matches_the_dense_normal_equations() {
    for seed in [7, 8, 9] {
        let f = SplitFixture::new(seed);
        let got = solve_right(
            &f.y, &f.d1, &f.z, &f.p, &f.b1, &f.s, &f.b4, f.mu, f.mu3,
            &SplitFixture::cfg(),
        )
        .unwrap();

        // (M^T M) D2 vectorizes as kron(I_nb, M^T M) vec(D2) with M = D1 Z.
        let c = &f.y + &f.b1 - &f.p;
        let m = f.d1.dot(&f.z);
        let gram = kron(&Array2::<f64>::eye(3), &m.t().dot(&m));
        let k = gram.nrows();
        let a = gram.mapv(|v| f.mu * v) + Array2::<f64>::eye(k).mapv(|v| f.mu3 * v);
        let rhs_mat = m.t().dot(&c).mapv(|v| f.mu * v) + (&f.s - &f.b4).mapv(|v| f.mu3 * v);
        let x = dense_solve(&a, &vec_cm(&rhs_mat));
        let want = unvec_cm(&x, 3, 3);

        let err = (&got - &want).iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(err <= 1e-8, "seed {seed}: max deviation {err}");

        let fit_before = &f.p - &(&f.y - &f.d1.dot(&f.z).dot(&f.d2)) - &f.b1;
        let tie_before = &f.s - &f.d2 - &f.b4;
        let before = f.mu * fit_before.iter().map(|v| v * v).sum::<f64>()
            + f.mu3 * tie_before.iter().map(|v| v * v).sum::<f64>();
        let fit_after = &f.p - &(&f.y - &f.d1.dot(&f.z).dot(&got)) - &f.b1;
        let tie_after = &f.s - &got - &f.b4;
        let after = f.mu * fit_after.iter().map(|v| v * v).sum::<f64>()
            + f.mu3 * tie_after.iter().map(|v| v * v).sum::<f64>();
        assert!(after <= before + 1e-9, "seed {seed}: {before} -> {after}");
    }
}
