// Describing a run as a config, executing it and writing CSV.

use dircorr::cli::{run, write_table, Experiment, ExperimentConfig, GlobalOptions};

pub fn run_example() -> dircorr::Result<String> {
    let config = ExperimentConfig {
        options: GlobalOptions::default(),
        experiment: Experiment::Mq { radius: vec![100, 1000, 10_000], r0: 1.0 },
    };
    let restored = ExperimentConfig::from_json(&config.to_json())?;
    assert_eq!(restored, config);
    let mut out = Vec::new();
    write_table(&run(&restored)?, &restored, &mut out)?;
    Ok(String::from_utf8(out).expect("csv is utf-8"))
}

fn main() -> dircorr::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
