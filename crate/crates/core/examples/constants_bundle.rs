//! Derived constants for θ = 0.5, ‖φ_p‖ = 1: the admissible region, the
//! optimiser's two objectives, and a hand-picked bundle with its margins.

use chaos_certs::constants::{compute_a_interval, epsilon_range, z0_range, ConstantsBundle, SystemParams, Z0_CONSTRAINTS};
use chaos_certs::optimize::{midpoint_bundle, optimize_bundle, Objective, DEFAULT_MARGIN};
use chaos_certs::precision::{Arith, Precision};

fn main() -> chaos_certs::Result<()> {
    let params = SystemParams::new(0.5, 1.0, 1.0)?;
    let ar = Arith::certified(Precision::default());

    let a = compute_a_interval(&params, &ar);
    let er = epsilon_range(&params, &a, &ar);
    println!("a       = {}", a.to_sci(25));
    println!("eps_max = {} (binding: {})", er.eps_max.to_sci(25), er.binding);

    let eps = ar.parse("0.1")?;
    let zr = z0_range(&params, &a, &eps, &ar)?;
    println!("\nat eps = 0.1 the candidates for ln Z are");
    for (name, c) in Z0_CONSTRAINTS.iter().zip(&zr.log_candidates) {
        println!("  {name:28} {}", c.to_sci(15));
    }
    println!("  Z - 1 = {} (binding: {})", zr.w_max.to_sci(15), Z0_CONSTRAINTS[zr.binding]);

    let b = ConstantsBundle::from_decimal(&params, "0.1", "1.001", &ar)?;
    println!("\nbundle eps = 0.1, z0 = 1.001: admissible = {}", b.admissible);
    for m in &b.margins {
        println!("  {:28} slack {:+.3e}", m.constraint, m.slack);
    }

    for objective in [Objective::AsymptoticRate, Objective::BoundAtN(100)] {
        let opt = optimize_bundle(&params, objective, DEFAULT_MARGIN, &ar)?;
        println!(
            "\n{objective:?}: eps = {:.6e}, z0 - 1 = {:.6e}, score {:.6e} ({} evaluations)",
            opt.bundle.epsilon.mid_f64(),
            opt.bundle.w.mid_f64(),
            opt.score,
            opt.evaluations
        );
    }
    let naive = midpoint_bundle(&params, &ar)?;
    println!("midpoint choice: z0 - 1 = {:.6e}", naive.w.mid_f64());
    Ok(())
}
