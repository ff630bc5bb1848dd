use nalgebra::DMatrix;
use std::time::Instant;

fn main() {
    for n in [512usize, 1024, 2048] {
        // SPD-ish random symmetric matrix
        let mut state = 1u64;
        let mut rng = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = DMatrix::from_fn(n, n, |_, _| rng());
        let s = &a * a.transpose() + DMatrix::identity(n, n);
        let t0 = Instant::now();
        let chol = s.clone().cholesky().unwrap();
        let t_chol = t0.elapsed();
        let t0 = Instant::now();
        let eig = nalgebra::SymmetricEigen::try_new(s, f64::EPSILON, 0).unwrap();
        println!(
            "n={n}: cholesky {:.2?}, sym eigen {:.2?} (lmax {:.3})",
            t_chol,
            t0.elapsed(),
            eig.eigenvalues.amax()
        );
        let _ = chol;
    }
}
