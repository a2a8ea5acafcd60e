// Strip-area and pair sums approaching their limits.

use dircorr::analytic::{g_sum_gq, g_sum_limit, mq_main_term, s_sum_limit, s_sum_sq};
use dircorr::averaging::Disc;

pub struct SumsSummary {
    pub gq: f64,
    pub gq_limit: f64,
    pub sq: Vec<(u64, f64)>,
    pub sq_limit: f64,
    pub mq: f64,
}

pub fn run_example() -> dircorr::Result<SumsSummary> {
    let disc = Disc::new(0.5, 0.5, 0.25)?;
    let sq = [25, 50, 100].iter().map(|&q| Ok((q, s_sum_sq(q, &disc)?))).collect::<dircorr::Result<_>>()?;
    Ok(SumsSummary {
        gq: g_sum_gq(30, 0.5, &disc)?,
        gq_limit: g_sum_limit(0.5, &disc),
        sq,
        sq_limit: s_sum_limit(&disc),
        mq: mq_main_term(1000, 0.25)?,
    })
}

fn main() -> dircorr::Result<()> {
    let s = run_example()?;
    println!("G_30 = {:.5}, limit {:.5}", s.gq, s.gq_limit);
    for (q, v) in &s.sq {
        println!("S_{q} = {v:.6}");
    }
    println!("limit π r0²/6 = {:.6}; closed-form main term at Q=1000: {:.6}", s.sq_limit, s.mq);
    Ok(())
}
