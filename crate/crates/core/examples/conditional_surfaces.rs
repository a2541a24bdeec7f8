//! Estimated conditional survival of a relative given the proband's age,
//! compared with the frailty model's closed forms.

use casekin::surfaces::default_grids;
use casekin::{build_conditional_surfaces, simulate_dataset, FitOptions, FrailtyKind, Scenario, SimConfig};

fn main() -> casekin::Result<()> {
    let model = Scenario::high_event_rate(FrailtyKind::Gamma, 0.5).model(1, 3)?;
    let ds = simulate_dataset(&SimConfig::new(model.clone(), 2000, 1, 1, 5))?.dataset;
    let (s_grid, u_grid) = default_grids(&ds, 21, 100)?;
    let surf = build_conditional_surfaces(&ds, 0.5, &s_grid, &u_grid, &FitOptions::default())?;

    let u = 80.0;
    let (j, _) = u_grid.locate(u);
    println!("s\tproband_age\tS0_hat\tS0\tS1_hat\tS1");
    for (i, &s) in s_grid.points().iter().enumerate().step_by(4) {
        let t = surf.transform.inverse(s);
        println!(
            "{s:.2}\t{t:.1}\t{:.3}\t{:.3}\t{:.3}\t{:.3}",
            surf.s0.get(i, j),
            model.s0(u_grid.points()[j], t),
            surf.s1.get(i, j),
            model.s1(u_grid.points()[j], t)
        );
    }
    eprintln!("{:?}", surf.diagnostics);
    Ok(())
}
