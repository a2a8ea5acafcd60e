// Aligned clusters and the certified 6-level lower bound for an irrational observer.

use dircorr::divergence::{r6_divergence_demo, rational_divergence_demo, DivergenceConfig, DivergenceReport};

pub fn run_example() -> dircorr::Result<(Vec<DivergenceReport>, f64)> {
    let (x, y) = (std::f64::consts::SQRT_2 - 1.0, 3f64.sqrt() - 1.0);
    let cfg = DivergenceConfig::default();
    let reports = [1u64 << 10, 1 << 12]
        .iter()
        .map(|&q| r6_divergence_demo(x, y, q, &[1.0; 5], &cfg))
        .collect::<dircorr::Result<_>>()?;
    let rational = rational_divergence_demo(1, 1, 2, 64, &[1.0; 5], false, 0)?;
    Ok((reports, rational.r6_lower_bound))
}

fn main() -> dircorr::Result<()> {
    let (reports, rational) = run_example()?;
    for r in &reports {
        println!(
            "Q = {:>5}: q = {}, {} clusters, longest run {}, R6 >= {:.4} (floor {:.3}, reached: {})",
            r.radius, r.approx.q, r.cluster_count, r.max_run, r.r6_lower_bound, r.growth_floor, r.floor_reached
        );
    }
    println!("observer (1/2, 1/2), Q = 64: R6 >= {rational:.4}");
    Ok(())
}
