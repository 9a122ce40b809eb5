//! Outward-rounded enclosures next to round-to-nearest values, and the effect
//! of raising the working precision.

use chaos_certs::precision::{eval_log1p, Arith, CertifiedReal, Precision, Rounding};

fn main() -> chaos_certs::Result<()> {
    for digits in [30, 60, 120] {
        let p = Precision::new(digits)?;
        let cert = Arith::certified(p);
        let near = Arith::nearest(p);
        let x = cert.parse("1e-12")?;
        let y = &x.log1p() / &x;
        println!("{digits:3} digits: log1p(x)/x in [{}, {}]", y.lower().to_sci(30), y.upper().to_sci(30));
        let z = &near.parse("1e-12")?.log1p() / &near.parse("1e-12")?;
        println!("             nearest      {}", z.to_sci(30));
        println!("             pi width     {:e}", cert.pi().rel_width());
    }
    let p = Precision::default();
    let v = eval_log1p(&CertifiedReal::parse("8.3e-10", p, Rounding::TowardPosInf)?)?;
    println!("\nlog1p(8.3e-10) rounded up: {}", v.to_sci(20));
    Ok(())
}
