//! Two-stage bootstrap IMSE bandwidth search.

use casekin::{select_bandwidth, simulate_dataset, BandwidthConfig, EstimatorConfig, FrailtyKind, Scenario, SimConfig};

fn main() -> casekin::Result<()> {
    casekin::io::configure_threads_from_env();
    let model = Scenario::high_event_rate(FrailtyKind::Gamma, 0.5).model(1, 3)?;
    let ds = simulate_dataset(&SimConfig::new(model, 500, 1, 1, 4))?.dataset;
    let cfg = BandwidthConfig {
        seed: 17,
        ..BandwidthConfig::default()
    };
    let sel = select_bandwidth(&ds, &cfg, &EstimatorConfig::default())?;
    for c in sel.stage1.iter().chain(&sel.stage2) {
        match c.imse {
            Some(v) => println!("h = {:.2}\tIMSE = {v:.5}", c.h),
            None => println!("h = {:.2}\tfailed", c.h),
        }
    }
    println!("stage one picked {:.2}, final h = {:.2}", sel.h1, sel.h);
    Ok(())
}
