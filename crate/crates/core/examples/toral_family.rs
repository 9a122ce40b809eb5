//! The symmetric toral automorphisms f_d for d = 1..4: structure, spectrum
//! against the closed form, and the derived shift parameters.

use chaos_certs::toral::{build_family_matrix, closed_form_eigs};

fn main() -> chaos_certs::Result<()> {
    for d in 1..=4 {
        let map = build_family_matrix(d)?;
        println!("d = {d}: det {}, symmetric {}, {} expanding eigenvalues", map.determinant, map.is_symmetric(), map.unstable_count());
        if d == 1 {
            println!("  f = {:?}", map.matrix);
        }
        let closed = closed_form_eigs(d);
        let dev = map.eigenvalues.iter().zip(&closed).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
        println!("  eigenvalues {:?}", map.eigenvalues.iter().map(|l| format!("{l:.6}")).collect::<Vec<_>>());
        println!("  closed form agrees to {dev:.1e}; product defect {:.1e}", map.product_defect());
        let p = map.shift_params(1.0)?;
        println!("  theta = {:.10}, phi_p norm = {:.10}", p.theta_f64(), p.phi_p_norm_f64());
    }
    Ok(())
}
