//! On Z^3 the free Laplacian is subcritical: radial cutoffs cannot make the
//! deficit form small, so a small perturbation never produces a certificate.

fn cutoff(r: f64, m: f64, n: f64) -> f64 {
    ((n - r) / (n - m)).clamp(0.0, 1.0)
}

/// Σ over nearest-neighbour edges of (a(x) - a(y))² with ψ ≡ 1.
fn linear_cutoff_energy_3d(m: f64, n: f64) -> f64 {
    let l = n.ceil() as i64 + 1;
    let a = |x: i64, y: i64, z: i64| cutoff(((x * x + y * y + z * z) as f64).sqrt(), m, n);
    let mut total = 0.0;
    for x in -l..=l {
        for y in -l..=l {
            for z in -l..=l {
                let v = a(x, y, z);
                for (dx, dy, dz) in [(1, 0, 0), (0, 1, 0), (0, 0, 1)] {
                    let d = v - a(x + dx, y + dy, z + dz);
                    total += d * d;
                }
            }
        }
    }
    total
}

#[test]
fn linear_cutoff_energy_grows_with_n() {
    let energies: Vec<f64> = [8.0, 16.0, 32.0].iter().map(|&n| linear_cutoff_energy_3d(2.0, n)).collect();
    assert!(energies.windows(2).all(|w| w[1] > w[0]), "{energies:?}");
    // continuum value 4π(N³ - M³)/(3(N - M)²) up to lattice corrections
    let continuum = 4.0 * std::f64::consts::PI * (32f64.powi(3) - 8.0) / (3.0 * 30f64.powi(2));
    assert!((energies[2] / continuum - 1.0).abs() < 0.2, "{} vs {continuum}", energies[2]);
}

#[test]
fn small_perturbation_has_no_certificate() {
    // V = 0.01 δ₀, g = -δ₀: the pairing is -0.01 and ⟨g|E0 - h|g⟩ = 6, so
    // every N would need a cutoff energy below p²/D_g
    let budget = 0.01f64.powi(2) / 6.0;
    let smallest = [4.0, 8.0, 16.0, 32.0]
        .iter()
        .map(|&n| linear_cutoff_energy_3d(1.0, n))
        .fold(f64::INFINITY, f64::min);
    assert!(smallest > budget, "{smallest} vs {budget}");
}
