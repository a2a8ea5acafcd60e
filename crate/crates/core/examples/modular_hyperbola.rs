// Points on x y ≡ h (mod q) in a box, and a smooth weighted sum over them.

use dircorr::numtheory::{hyperbola_count, weighted_hyperbola_sum, HalfOpen, HyperbolaCount, HyperbolaQuery, Modulus, WeightedSum};
use dircorr::quadrature::QuadratureConfig;

pub fn run_example() -> dircorr::Result<(HyperbolaCount, WeightedSum)> {
    let q = Modulus::new(1009)?;
    let query = HyperbolaQuery::new(q, 5, HalfOpen::new(100, 700)?, HalfOpen::new(0, 500)?)?;
    let count = hyperbola_count(&query);
    let weighted = weighted_hyperbola_sum(&query, |a, b| (1.0 + a / 1009.0) * (b / 1009.0), &QuadratureConfig::default())?;
    Ok((count, weighted))
}

fn main() -> dircorr::Result<()> {
    let (c, w) = run_example()?;
    println!("count {} vs main term {:.2} (error {:.2})", c.count, c.main_term, c.error);
    println!("weighted sum {:.3} vs main term {:.3}", w.sum, w.main_term);
    Ok(())
}
