// Pair correlation of directions seen from one observer, by both engines.

use dircorr::correlations::{pair_correlation_fast, pair_correlation_oracle, poisson_baseline, CorrelationSpec};
use dircorr::lattice::Observer;

pub struct PairSummary {
    pub fast_count: u128,
    pub oracle_count: u128,
    pub value: f64,
    pub poisson: f64,
}

pub fn run_example() -> dircorr::Result<PairSummary> {
    let obs = Observer::new(0.3, 0.7)?;
    let spec = CorrelationSpec::pair(15, 1.0, obs)?;
    let fast = pair_correlation_fast(&spec)?;
    let oracle = pair_correlation_oracle(&spec)?;
    Ok(PairSummary {
        fast_count: fast.tuple_count,
        oracle_count: oracle.tuple_count,
        value: fast.value,
        poisson: poisson_baseline(2, &[1.0])?,
    })
}

fn main() -> dircorr::Result<()> {
    let s = run_example()?;
    println!("pairs: fast {} oracle {}", s.fast_count, s.oracle_count);
    println!("R2 = {:.6} (Poisson {})", s.value, s.poisson);
    Ok(())
}
