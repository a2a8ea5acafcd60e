// Volume and total variation of the square-root sections.

use dircorr::analytic::{section_integrals, variation_bound, PhiParams, SectionIntegrals};
use dircorr::quadrature::QuadratureConfig;

pub fn run_example() -> dircorr::Result<Vec<((f64, f64), SectionIntegrals)>> {
    let cfg = QuadratureConfig::default();
    [(0.0, 0.0), (0.7, -0.3), (-1.5, 1.9)]
        .iter()
        .map(|&(a, b)| Ok(((a, b), section_integrals(&PhiParams::new(a, b)?, &cfg)?)))
        .collect()
}

fn main() -> dircorr::Result<()> {
    for ((a, b), s) in run_example()? {
        println!("({a}, {b}): volume {:.10}, variation {:.8}", s.volume, s.total_variation);
    }
    println!("2π/3 = {:.10}, variation bound {:.8}", std::f64::consts::TAU / 3.0, variation_bound());
    Ok(())
}
