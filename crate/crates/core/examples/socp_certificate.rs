//! The raw cone program behind `extent`: iteration trace and the primal/dual
//! certificate for a random dictionary.
//!
//!     cargo run --release --example socp_certificate

use extentlab::rng::{haar_sample, trial_rng};
use extentlab::socp::{build_extent_socp, check_dual_feasibility, solve, SolverOptions};
use extentlab::Dictionary;

fn main() -> extentlab::Result<()> {
    let mut rng = trial_rng("socp-example", 0, 0);
    let dict = Dictionary::new((0..60).map(|_| haar_sample(6, &mut rng)).collect())?;
    let psi = haar_sample(6, &mut rng);

    let problem = build_extent_socp(&dict, &psi)?;
    let opts = SolverOptions { trace: true, ..SolverOptions::default() };
    let sol = solve(&problem, &opts)?;
    for it in &sol.diagnostics.trace {
        println!(
            "{:3}  primal {:.10}  dual {:.10}  gap {:.1e}  step {:.3}",
            it.iteration, it.primal_objective, it.dual_objective, it.relative_gap, it.step
        );
    }
    let (feasible, max) = check_dual_feasibility(&dict, &sol.witness(), 1e-8)?;
    println!("status {:?}, xi = {:.10}", sol.status, sol.primal_objective.powi(2));
    println!("witness feasible {feasible} (max overlap {max:.12})");
    Ok(())
}
