//! A full toral report from a matrix file, as the command-line tool would
//! produce it, printed as CSV.

use chaos_certs::bounds::BoundQuery;
use chaos_certs::commands::{run_toral, ToralRequest, ToralSource};
use chaos_certs::optimize::Objective;
use chaos_certs::precision::Precision;
use chaos_certs::toral::MatrixFile;

fn main() -> chaos_certs::Result<()> {
    let file: MatrixFile = chaos_certs::Error::from_json(r#"{"dimension": 2, "rows": [[2, 1], [1, 1]]}"#, "matrix")?;
    let report = run_toral(
        &ToralRequest {
            source: ToralSource::Matrix(file),
            phi_norm: 1.0,
            objective: Objective::BoundAtN(1000),
            query: BoundQuery { n: 1000, t: 0.5, u: 0.1, delta: 0.25 },
        },
        Precision::default(),
    )?;
    print!("{}", report.to_csv()?);
    println!("\npassed: {}", report.passed);
    Ok(())
}
