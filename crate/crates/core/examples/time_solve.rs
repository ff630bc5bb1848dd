use polybddc::bddc::BddcPreconditioner;
use polybddc::experiments::{preconditioned_eigenvalues, scaling_study, Family, manufactured_source};
use polybddc::mesh::{agglomerate, build_cartesian};
use polybddc::methods::{assemble_condensed, Method, MethodConfig};
use std::sync::Arc;

fn main() {
    // kappa across np at fixed H/h
    let res = scaling_study(Method::Hdg, Family::Simplicial, &[8], &[4, 16, 64], &[1], 1e-8).unwrap();
    for row in &res.rows {
        println!(
            "np={:3} it={:2} kappa={:.4} lmax={:.4}",
            row.np.unwrap(),
            row.iterations.unwrap(),
            row.kappa.unwrap(),
            row.lambda_max.unwrap()
        );
    }

    // dense spectrum with floating subdomains: 12x12 cartesian, 3x3 partition
    let mesh = Arc::new(build_cartesian(12, 12, polybddc::geometry::Box2::unit()).unwrap());
    let partition = agglomerate(&mesh, 3, 3).unwrap();
    let config = MethodConfig::new(Method::Hho, 0);
    let space = Arc::new(config.make_space(Arc::clone(&mesh)).unwrap());
    let system = assemble_condensed(&space, &config, manufactured_source).unwrap();
    let precond = BddcPreconditioner::new(&system, &partition).unwrap();
    let eigs = preconditioned_eigenvalues(&system, &precond).unwrap();
    println!(
        "3x3 floating case: n={} eig range [{:.8}, {:.6}]",
        system.n_unknowns(),
        eigs[0],
        eigs.last().unwrap()
    );
    // count eigenvalues away from 1
    let away = eigs.iter().filter(|&&e| (e - 1.0).abs() > 1e-8).count();
    println!("eigenvalues away from 1: {away}");
}
