//! Exact computations on a two-state depth-one Markov shift: the transfer
//! operator, its invariant measure, correlation decay against the theorem
//! bound, and the Green–Kubo variance.

use chaos_certs::bounds::BoundEvaluator;
use chaos_certs::optimize::{optimize_bundle, Objective, DEFAULT_MARGIN};
use chaos_certs::precision::{Arith, Precision};
use chaos_certs::shift::{
    center, correlation_profile, equilibrium_measure, green_kubo_sigma2, operator_identities, transfer_matrix,
    CylinderFunction, MarkovShiftModel,
};

fn main() -> chaos_certs::Result<()> {
    let model = MarkovShiftModel::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], 0.5)?;
    let eq = equilibrium_measure(&model)?;
    let indicator = CylinderFunction::from_fn(2, 0, |w| if w[0] == 0 { 1.0 } else { 0.0 });
    let phi = center(&eq, &indicator);

    let id = operator_identities(&model, 100, 1)?;
    println!("|P1 - 1| = {:e}, duality defect = {:e}", id.constant_defect, id.duality_defect);
    println!("marginal of x0: {:?}", id.marginal);

    let op = transfer_matrix(&model, 1)?;
    let eig = op.dense().complex_eigenvalues();
    println!("transfer-matrix eigenvalues: {:?}", eig.iter().map(|z| z.re).collect::<Vec<_>>());

    let params = model.system_params(&phi)?;
    let ar = Arith::certified(Precision::default());
    let opt = optimize_bundle(&params, Objective::BoundAtN(50), DEFAULT_MARGIN, &ar)?;
    let ev = BoundEvaluator::new(&params, &opt.bundle, &ar)?;
    let profile = correlation_profile(&model, &phi, 50)?;
    println!("\n  n   |P^n phi|      ratio     bound");
    for n in [0usize, 1, 2, 5, 10, 20, 50] {
        let ratio = if n > 0 { profile[n] / profile[n - 1] } else { f64::NAN };
        println!("{n:3}   {:.6e}   {ratio:.6}   {:.3e}", profile[n], ev.correlation(n as u64).hi_f64());
    }

    let gk = green_kubo_sigma2(&model, &phi, 1e-12, Some(&ev))?;
    println!("\nGreen-Kubo variance {:.13} (tail bound {:e}, {} terms)", gk.sigma2, gk.tail_bound, gk.terms);
    println!("closed form 1.2592592592593");
    Ok(())
}
