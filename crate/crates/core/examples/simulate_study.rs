//! Simulates one case-control family study under a shared gamma frailty and
//! writes it as CSV to stdout.
//!
//!     cargo run --release --example simulate_study > study.csv

use casekin::io::write_csv;
use casekin::{simulate_dataset, FrailtyKind, Scenario, SimConfig};

fn main() -> casekin::Result<()> {
    let model = Scenario::high_event_rate(FrailtyKind::Gamma, 0.5).model(1, 3)?;
    let study = simulate_dataset(&SimConfig::new(model.clone(), 200, 1, 2, 7))?;
    let ds = &study.dataset;
    eprintln!(
        "{} case and {} control families, {} relatives, censoring lower bound {:.1}",
        ds.n1(),
        ds.n0(),
        ds.n_relatives(),
        model.censoring_lower.unwrap_or(f64::NAN)
    );
    for p in [0.9, 0.75, 0.5] {
        eprintln!("S(t) = {p} at t = {:.2}", model.age_at_survival(p));
    }
    write_csv(ds, std::io::stdout().lock())
}
