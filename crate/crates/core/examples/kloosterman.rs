// Kloosterman sums, their incomplete versions and the Weil bound.

use dircorr::numtheory::{kloosterman, kloosterman_extremes, primes_up_to, HalfOpen, KloostermanTable, Modulus};

pub struct KloostermanSummary {
    pub k_1_1_7: f64,
    pub ramanujan_12: f64,
    /// `(p, max |K|, 2√p)`.
    pub worst: Vec<(u64, f64, f64)>,
    pub incomplete_full: f64,
}

pub fn run_example() -> dircorr::Result<KloostermanSummary> {
    let q7 = Modulus::new(7)?;
    let worst = primes_up_to(60)
        .into_iter()
        .map(|p| Ok((p, kloosterman_extremes(Modulus::new(p)?).0, 2.0 * (p as f64).sqrt())))
        .collect::<dircorr::Result<_>>()?;
    let table = KloostermanTable::new(Modulus::new(31)?);
    Ok(KloostermanSummary {
        k_1_1_7: kloosterman(1, 1, q7).re,
        ramanujan_12: kloosterman(1, 0, Modulus::new(12)?).re,
        worst,
        incomplete_full: (table.incomplete(HalfOpen::new(0, 31)?, 5)? - table.sum(0, 5)).norm(),
    })
}

fn main() -> dircorr::Result<()> {
    let s = run_example()?;
    println!("K(1,1;7) = {:.6}", s.k_1_1_7);
    println!("Ramanujan sum c_12(1) = {:.6}", s.ramanujan_12);
    for (p, k, b) in &s.worst {
        println!("p = {p:>2}: max|K| = {k:.4} <= {b:.4}");
    }
    Ok(())
}
