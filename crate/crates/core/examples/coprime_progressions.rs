// Coprime terms of progressions and the coprime direction pairs built on them.

use dircorr::numtheory::{build_solution_pairs, coprime_progression_count, coprime_split};

pub struct CoprimeSummary {
    pub split_360_6: (u64, u64),
    pub count_1_6_360: u64,
    pub pairs: Vec<(u64, u64)>,
}

pub fn run_example() -> dircorr::Result<CoprimeSummary> {
    Ok(CoprimeSummary {
        split_360_6: coprime_split(360, 6),
        count_1_6_360: coprime_progression_count(1, 6, 360)?,
        pairs: build_solution_pairs(1, 2, 5)?.pairs,
    })
}

fn main() -> dircorr::Result<()> {
    let s = run_example()?;
    println!("360 = {} * {}", s.split_360_6.0, s.split_360_6.1);
    println!("#{{0 <= m < 720 : gcd(1 + 6m, 360) = 1}} = {}", s.count_1_6_360);
    println!("{} direction pairs for (a, b, q) = (1, 2, 5): {:?}", s.pairs.len(), s.pairs);
    Ok(())
}
