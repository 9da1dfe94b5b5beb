use spectral_lab::dynamics::transfer_solve;
use spectral_lab::eigen::{all_eigenvalues, eigenvalues_outside_band, EigenRequest};
use spectral_lab::lattice::{Lattice, Potential};
use spectral_lab::variational::{cutoff_energy, CutoffProfile, GroundStateModel};
use spectral_lab::wvn::build_wvn;
use spectral_lab::{PotentialF32, TridiagonalSystemF32};

#[test]
fn free_chain_spectrum_in_f32() {
    let sys = TridiagonalSystemF32::free(9).unwrap();
    let values = all_eigenvalues(&sys, 1e-6);
    for (k, v) in values.iter().enumerate() {
        let exact = -2.0 * (std::f32::consts::PI * (k as f32 + 1.0) / 10.0).cos();
        assert!((v - exact).abs() < 1e-5, "{k}: {v} vs {exact}");
    }
}

#[test]
fn single_site_bound_state_in_f32() {
    let v = PotentialF32::single_site(Lattice::WholeLine, 0, 1.0).unwrap();
    let sys = v.truncate(-200, 200).unwrap();
    let list = eigenvalues_outside_band(&EigenRequest::new(&sys).tolerance(1e-6)).unwrap();
    assert_eq!(list.len(), 1);
    assert!((list.entries[0].energy - 5f32.sqrt()).abs() < 1e-5);
}

#[test]
fn wvn_pipeline_runs_in_f32() {
    let pair = build_wvn(2.0f32, 2000).unwrap();
    assert!(pair.eigen_residual().unwrap() < 1e-4);
    let t = transfer_solve(&Potential::<f32>::zero(Lattice::HalfLine), 0.0, 0.0, 1000).unwrap();
    assert!(t.log_envelope.iter().all(|&x| x.abs() < 1e-6));
    let e = cutoff_energy(&GroundStateModel::<f32>::free_1d(), &CutoffProfile::linear(2.0, 12.0).unwrap()).unwrap();
    assert!((e - 0.2).abs() < 1e-6);
}
