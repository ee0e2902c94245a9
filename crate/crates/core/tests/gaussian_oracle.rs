use cavlab::combstate::{ground_state, symplectic_eigenvalues, QuadraticForm};
use cavlab::matfun::SymMatrix;

/// Ground state of `e_a(n_a + 1/2) + e_b(n_b + 1/2) + 2s(a^dag b^dag + a b)`
/// in the `n_a = n_b` Fock sector, truncated at `n_max` pairs.
/// Returns energy, `<n>` and `<ab>`.
fn fock_ground(e_a: f64, e_b: f64, s: f64, n_max: usize) -> (f64, f64, f64) {
    let d = n_max + 1;
    let h = SymMatrix::<f64>::from_fn(d, |i, j| {
        if i == j {
            (e_a + e_b) * (i as f64 + 0.5)
        } else if i.abs_diff(j) == 1 {
            2.0 * s * (i.max(j) as f64)
        } else {
            0.0
        }
    })
    .unwrap();
    let (vals, vecs) = h.eigh();
    let c = vecs.column(0);
    let n_mean: f64 = (0..d).map(|n| n as f64 * c[n] * c[n]).sum();
    let ab: f64 = (1..d).map(|n| n as f64 * c[n - 1] * c[n]).sum();
    (vals[0], n_mean, ab)
}

#[test]
fn two_mode_fock_truncation_oracle() {
    for (e_a, e_b, s) in [(1.0, 1.3, 0.2), (0.8, 0.8, 0.25), (1.5, 0.9, -0.3)] {
        let (energy, n_mean, ab) = fock_ground(e_a, e_b, s, 40);
        let r = SymMatrix::<f64>::from_fn(2, |i, j| if i == j { 0.0 } else { s }).unwrap();
        let qf = QuadraticForm::from_energies(&[e_a, e_b], &r).unwrap();
        let gs = ground_state(&qf).unwrap();
        assert!((gs.energy - energy).abs() <= 1e-6 * energy.abs(), "{} vs {energy}", gs.energy);
        let sig = gs.sigma.as_matrix();
        let diag = n_mean + 0.5;
        let expect = [
            [diag, ab, 0.0, 0.0],
            [ab, diag, 0.0, 0.0],
            [0.0, 0.0, diag, -ab],
            [0.0, 0.0, -ab, diag],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((sig[(i, j)] - expect[i][j]).abs() <= 1e-6, "({i},{j}) {} vs {}", sig[(i, j)], expect[i][j]);
            }
        }
        for nu in symplectic_eigenvalues(&gs.sigma).unwrap() {
            assert!((nu - 0.5).abs() < 1e-9);
        }
    }
}
