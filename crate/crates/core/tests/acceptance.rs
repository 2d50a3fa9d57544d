//! Acceptance suite. Prints one line per measured check and exits nonzero if
//! any check fails.

use std::process::ExitCode;

use gaugeflow::verify::{self, tolerances as tol, Check, DEFAULT_SEED};

fn main() -> ExitCode {
    let groups: Vec<(&str, fn() -> Vec<Check>)> = vec![
        ("stored model expressions match derivation", verify::symbolic_regressions),
        ("structural identities on random potentials", || {
            verify::structural_identities(tol::STRUCTURAL_CASES, DEFAULT_SEED)
        }),
        ("functional derivative matches perturbation quotient", || {
            verify::functional_derivative_oracle(tol::ORACLE_CASES, DEFAULT_SEED)
        }),
        ("free gaussian fidelity", verify::free_particle_fidelity),
        ("norm conservation", verify::conservation),
        ("gauge equivalence of direct and mapped runs", verify::gauge_equivalence),
        ("dg current linearizes under gauge", verify::current_linearization),
        ("dg reduces to rescaled linear equation", verify::dg_linearization),
        ("transformed equation residual order", || verify::transformed_residual_order(DEFAULT_SEED)),
        ("rk4 temporal order", verify::rk4_order),
        ("spectral derivative accuracy", verify::spectral_accuracy),
    ];
    let mut failed = 0;
    for (title, run) in groups {
        println!("== {title}");
        let checks = run();
        if checks.is_empty() {
            println!("FAIL {title}: no checks produced");
            failed += 1;
        }
        for c in &checks {
            println!("{c}");
            failed += usize::from(!c.pass);
        }
    }
    println!("acceptance: {failed} failed");
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
