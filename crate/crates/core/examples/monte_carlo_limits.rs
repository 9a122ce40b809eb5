//! Monte Carlo CLT, large-deviation and LLN statistics on the two-state
//! model, next to the theorem bounds. Seeded, so reruns print the same.

use chaos_certs::bounds::BoundEvaluator;
use chaos_certs::optimize::{optimize_bundle, Objective, DEFAULT_MARGIN};
use chaos_certs::precision::{Arith, Precision};
use chaos_certs::shift::{
    center, empirical_clt, empirical_ldp, empirical_lln, equilibrium_measure, green_kubo_sigma2, sample_trajectory,
    simulated_variance, CylinderFunction, MarkovShiftModel,
};

fn main() -> chaos_certs::Result<()> {
    let model = MarkovShiftModel::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], 0.5)?;
    let eq = equilibrium_measure(&model)?;
    let phi = center(&eq, &CylinderFunction::from_fn(2, 0, |w| if w[0] == 0 { 1.0 } else { 0.0 }));
    let seed = 2024;

    let path = sample_trajectory(&model, 40, seed)?;
    println!("a sample path: {}", path.iter().map(|s| s.to_string()).collect::<String>());

    let params = model.system_params(&phi)?;
    let ar = Arith::certified(Precision::default());
    let opt = optimize_bundle(&params, Objective::AsymptoticRate, DEFAULT_MARGIN, &ar)?;
    let ev = BoundEvaluator::new(&params, &opt.bundle, &ar)?;

    let gk = green_kubo_sigma2(&model, &phi, 1e-12, Some(&ev))?;
    let var = simulated_variance(&model, &phi, 4096, 2000, seed)?;
    println!("\nvariance: Green-Kubo {:.6}, simulated {:.6} +- {:.6}", gk.sigma2, var.estimate, var.std_error);

    let clt = empirical_clt(&model, &phi, gk.sigma2, 1.0, 1024, 20_000, seed)?;
    println!(
        "\nCLT at t = 1, n = 1024: |E e^(itS/sqrt n) - e^(-t^2 s^2/2)| = {:.4} +- {:.4}; bound {:.3e}",
        clt.distance,
        clt.std_error,
        ev.clt_error(1.0, 1024).hi_f64()
    );

    let ldp = empirical_ldp(&model, &phi, 0.1, 200, 20_000, seed)?;
    println!(
        "P(|S_n/n| >= 0.1) at n = 200: {:.5} +- {:.5}; bound {:.3e}",
        ldp.frequency,
        ldp.std_error,
        ev.ldp(0.1, 200).hi_f64()
    );

    let lln = empirical_lln(&model, &phi, 0.2, 5000, 50, seed)?;
    let censored = lln.censored.iter().filter(|&&c| c).count();
    println!("LLN thresholds at delta = 0.2: max {}, mean {:.1}, {censored} censored", lln.max, lln.mean);
    match ev.lln(0.2) {
        Ok(s) => println!("  bound {}", s.value.to_sci(6)),
        Err(e) => println!("  bound: {e}"),
    }
    Ok(())
}
