//! The coupling renewal chain for θ = 0.5, ‖φ_p‖ = 1: exact occupation
//! probabilities, the generating-function identity, the key inequality for an
//! optimised bundle, and a Monte Carlo check.

use chaos_certs::constants::SystemParams;
use chaos_certs::optimize::{optimize_bundle, Objective, DEFAULT_MARGIN};
use chaos_certs::precision::{Arith, Precision};
use chaos_certs::renewal::{
    monte_carlo_occupation, occupation_at_zero, occupation_series, tau_series, verify_key_inequality, RenewalChain,
};

fn main() -> chaos_certs::Result<()> {
    let params = SystemParams::new(0.5, 1.0, 1.0)?;
    let ar = Arith::certified(Precision::default());
    let chain = RenewalChain::canonical(&params);

    let table = occupation_at_zero(&chain, 2000)?;
    println!("gamma*_k for k = 0..=5:");
    for k in 0..=5 {
        println!("  {k}: {:.12}", table.occupation[k]);
    }
    println!("renewal-equation residual (k <= 500): {:e}", {
        let short = occupation_at_zero(&chain, 500)?;
        short.renewal_residual()
    });

    let z = 1.05;
    let f = tau_series(&chain, &ar.num(z), 1e-15, &ar)?;
    let (g, terms) = occupation_series(&table, z);
    let rhs = 1.0 / (1.0 - f.value.hi_f64());
    println!("\nat z = {z}: sum P(tau=k) z^k = {} ({} terms)", f.value.to_sci(16), f.terms);
    println!("  sum gamma*_k z^k = {g:.15} ({terms} terms), 1/(1-F) = {rhs:.15}, rel diff {:e}", (g - rhs).abs() / rhs);

    let opt = optimize_bundle(&params, Objective::BoundAtN(100), DEFAULT_MARGIN, &ar)?;
    let report = verify_key_inequality(&params, &opt.bundle, &ar)?;
    println!("\nkey inequality, bound-at-100 bundle (eps = {:e}, z0 - 1 = {:e}):", opt.bundle.epsilon.mid_f64(), opt.bundle.w.mid_f64());
    for v in &report.verdicts {
        println!("  [{}] {}: {:e} vs {:e}", if v.holds { "ok" } else { "FAIL" }, v.check, v.lhs, v.rhs);
    }

    let paths = 200_000;
    let counts = monte_carlo_occupation(&chain, 20, paths, 7);
    println!("\nMonte Carlo, {paths} paths:");
    for k in [1, 2, 5, 10, 20] {
        let p = table.occupation[k];
        let sd = (p * (1.0 - p) / paths as f64).sqrt();
        let hat = counts[k] as f64 / paths as f64;
        println!("  k={k:2}: exact {p:.6}  empirical {hat:.6}  ({:+.2} sd)", (hat - p) / sd);
    }
    Ok(())
}
