//! The four bounds for one bundle, their building blocks, and how the LLN
//! series reports a coefficient too small to sum.

use chaos_certs::bounds::{lln_series_bound, BoundEvaluator};
use chaos_certs::constants::{ConstantsBundle, SystemParams};
use chaos_certs::precision::{Arith, Precision};

fn main() -> chaos_certs::Result<()> {
    let params = SystemParams::new(0.5, 1.0, 1.0)?;
    let ar = Arith::certified(Precision::default());
    let bundle = ConstantsBundle::from_decimal(&params, "0.1", "1.001", &ar)?;
    let ev = BoundEvaluator::new(&params, &bundle, &ar)?;

    println!("ln sqrt(z0) = {}", ev.log_sqrt_z0().to_sci(20));
    println!("1 - a - eps = {}", ev.one_minus_a_eps().to_sci(20));

    println!("\ncorrelation bound:");
    for n in [0u64, 100, 1000, 10_000, 100_000] {
        println!("  n = {n:6}: {}", ev.correlation(n).upper().to_sci(12));
    }

    let [c1, c2, c3, total] = ev.clt_terms(1.0, 1_000_000);
    println!("\nclt error at t = 1, n = 1e6: {}", total.upper().to_sci(12));
    println!("  terms: {} + {} + {}", c1.to_sci(6), c2.to_sci(6), c3.to_sci(6));

    let (k1, k2) = ev.ldp_coefficients();
    println!("\nldp coefficients: {} and {}", k1.to_sci(12), k2.to_sci(12));
    for n in [1_000u64, 1 << 40, 1 << 60] {
        println!("  ldp bound at u = 0.5, n = {n:e}: {}", ev.ldp(0.5, n).upper().to_sci(12));
    }

    match ev.lln(0.25) {
        Ok(s) => println!("\nlln bound: {}", s.value.to_sci(12)),
        Err(e) => println!("\nlln bound for this bundle: {e}"),
    }
    let s = lln_series_bound(&ar.parse("0.01")?, &ar.parse("0.5")?, 0.25, &ar)?;
    println!("lln series with c = 0.5: {} ({} terms, tail {:e})", s.value.to_sci(12), s.terms, s.tail);
    Ok(())
}
