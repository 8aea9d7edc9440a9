//! Reduced versus full dynamics on a random regular experiment, with the
//! deviation shrinking as the step is halved.

use schmidt_sphere::factor::regularity_margin;
use schmidt_sphere::lift::{equivalence_check, PhaseMode};
use schmidt_sphere::reduced::{integrate_reduced, ControlSchedule};
use schmidt_sphere::sampling;
use schmidt_sphere::{Kind, Shape};

fn main() -> schmidt_sphere::Result<()> {
    let mut rng = sampling::rng(6);
    let shape = Shape::fermionic(5)?;
    let (h0, schedule, p0) = loop {
        let h0 = sampling::random_coupling(Kind::Fermionic, 5, 5, 2, &mut rng);
        let schedule = ControlSchedule::random(shape, 1.0, 4, &mut rng);
        let p0 = sampling::random_point(&shape, &mut rng);
        let traj = integrate_reduced(&h0, &schedule, &p0, 1e-3)?;
        if traj.points.iter().all(|p| regularity_margin(p.as_slice()) > 0.05) {
            break (h0, schedule, p0);
        }
    };
    for dt in [0.04, 0.02, 0.01, 0.005] {
        let r = equivalence_check(&h0, &schedule, &p0, dt, PhaseMode::Sensitive)?;
        println!(
            "dt = {dt}: max_dev {:.3e}, state deviation {:.3e}, regular fraction {}",
            r.max_dev, r.max_state_dev, r.regular_fraction
        );
    }
    Ok(())
}
