use iscat2d::*;
use ndarray::Array2;
use num_complex::Complex64;
use std::time::Instant;

#[test]
fn probe_table1() {
    let t0 = Instant::now();
    let setup = scene::make_setup_free_space(300e6, 10.0 * 0.999308, 12, 12).unwrap();
    let lambda = setup.lambda_b;
    let inv_grid = scene::make_grid(lambda, 60).unwrap();
    let fwd_grid = scene::make_grid(lambda, 75).unwrap();
    for chi_val in [0.3, 0.5, 0.7, 1.0] {
        let phantom = scene::Phantom::Kite { chi: Complex64::new(chi_val, 0.0), fill: 0.8 };
        let chi_fwd = scene::rasterize(&phantom, &fwd_grid).unwrap();
        let chi_inv = scene::rasterize(&phantom, &inv_grid).unwrap();
        let t1 = Instant::now();
        let sol = forward::solve_forward(&chi_fwd, &fwd_grid, &setup).unwrap();
        let t_fwd = t1.elapsed();
        let e_t_inv = forward::interp_field(&fwd_grid, &sol.e_t.values, &inv_grid);
        let mut sums = [0.0f64; 3];
        let seeds = [1u64, 2, 3];
        for &seed in &seeds {
            let data = forward::add_noise(&sol.e_s.values, 30.0, seed);
            let params = linear_inv::LinearParams {
                noise_norm: linear_inv::noise_norm_from_snr(&data, 30.0),
                selection: linear_inv::ThresholdSelection::BestNmse,
                ..Default::default()
            };
            let born = linear_inv::run_born(&data, &inv_grid, &setup, &params, Some(&chi_inv)).unwrap();
            let y0 = linear_inv::run_y0_ba(&data, &inv_grid, &setup, &params, Some(&chi_inv)).unwrap();
            let ideal = linear_inv::run_ideal(
                &data,
                &forward::MultiviewField::new(forward::FieldKind::Total, e_t_inv.clone()),
                &inv_grid, &setup, &params, Some(&chi_inv)).unwrap();
            sums[0] += ideal.nmse.unwrap();
            sums[1] += y0.nmse.unwrap();
            sums[2] += born.nmse.unwrap();
            println!("chi={chi_val} seed={seed}: ideal={:.3} (t={:.0e},k={}), y0={:.3} (t={:.0e},k={}), born={:.3} (t={:.0e},k={})",
                ideal.nmse.unwrap(), ideal.threshold, ideal.retained,
                y0.nmse.unwrap(), y0.threshold, y0.retained,
                born.nmse.unwrap(), born.threshold, born.retained);
        }
        println!("chi={chi_val} MEAN: ideal={:.3} y0={:.3} born={:.3}  [fwd {t_fwd:?}]",
            sums[0]/3.0, sums[1]/3.0, sums[2]/3.0);
        let _ = Array2::<f64>::zeros((1,1));
    }
    println!("total {:?}", t0.elapsed());
}
