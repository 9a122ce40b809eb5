//! The reverse-martingale decomposition φ = ψ_n + H_n - H_{n+1}∘σ on a
//! depth-one model, with its exact checks and the theorem envelopes.

use chaos_certs::bounds::BoundEvaluator;
use chaos_certs::optimize::{optimize_bundle, Objective, DEFAULT_MARGIN};
use chaos_certs::precision::{Arith, Precision};
use chaos_certs::shift::{center, equilibrium_measure, martingale_decomposition, CylinderFunction, MarkovShiftModel};

fn main() -> chaos_certs::Result<()> {
    let model = MarkovShiftModel::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], 0.5)?;
    let eq = equilibrium_measure(&model)?;
    let phi = center(&eq, &CylinderFunction::from_fn(2, 0, |w| if w[0] == 0 { 1.0 } else { 0.0 }));

    let dec = martingale_decomposition(&model, &phi, 50)?;
    println!("summed per-step defects: {:e}", dec.step_defect_sum());
    let tel = dec.check_telescoping(10_000, 11);
    println!(
        "telescoping on {} {} words of length {}: max residual {:e}",
        tel.words,
        if tel.exhaustive { "(all)" } else { "sampled" },
        dec.word_len(),
        tel.max_residual
    );
    println!("orthogonality defect: {:e}", dec.orthogonality_defect(&eq));

    let params = model.system_params(&phi)?;
    let ar = Arith::certified(Precision::default());
    let opt = optimize_bundle(&params, Objective::BoundAtN(50), DEFAULT_MARGIN, &ar)?;
    let ev = BoundEvaluator::new(&params, &opt.bundle, &ar)?;
    println!("\nsup |H_n|   = {:.6} <= {:.3e}", dec.sup_h(), ev.coboundary_envelope().hi_f64());
    println!("sup |psi_n| = {:.6} <= {:.3e}", dec.sup_psi(), ev.martingale_sup_envelope().hi_f64());
    let lips = dec.psi_norms(model.theta());
    for n in [0usize, 1, 5, 50] {
        println!("  n = {n:2}: |psi_n| Lipschitz norm {:.6}", lips[n]);
    }
    Ok(())
}
