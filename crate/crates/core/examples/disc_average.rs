// Pair correlation averaged over observers in a disc, against 2πλ/3.

use dircorr::averaging::{average_pair_correlation, grid_average_pair_correlation, AverageReport, Disc};

pub fn run_example() -> dircorr::Result<(AverageReport, AverageReport)> {
    let disc = Disc::new(0.5, 0.5, 0.25)?;
    let mc = average_pair_correlation(&disc, 80, 1.0, 32, 7)?;
    let grid = grid_average_pair_correlation(&disc, 80, 1.0, 0.08)?;
    Ok((mc, grid))
}

fn main() -> dircorr::Result<()> {
    let (mc, grid) = run_example()?;
    println!("Monte Carlo: {:.4} ± {:.4} over {} observers", mc.mean, mc.standard_error, mc.sample_count);
    println!("grid:        {:.4} over {} observers", grid.mean, grid.sample_count);
    println!("limit 2π/3 = {:.4}", mc.theory);
    Ok(())
}
