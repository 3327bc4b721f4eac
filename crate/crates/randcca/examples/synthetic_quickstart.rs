//! Fits the randomized solver and the Horst baseline on a synthetic
//! power-law instance and compares both against the exact oracle.
//!
//! Run with `cargo run --release -p randcca --example synthetic_quickstart`.

use randcca::horst::{horst_iterate, HorstConfig, HorstInit};
use randcca::oracle::{exact_cca, DenseTwoView};
use randcca::rcca::{randomized_cca, CcaConfig, Regularization};
use randcca::synth::PowerLawSpec;
use randcca::twoview::View;

fn main() -> randcca::Result<()> {
    let spec = PowerLawSpec::default();
    let ds = spec.generate()?;
    println!(
        "synthetic instance: n = {}, d_a = {}, d_b = {}, latent rank = {}",
        ds.n(),
        ds.dim(View::A),
        ds.dim(View::B),
        spec.rank
    );

    let k = 5;
    let reg = Regularization::ScaleFree { nu: 0.01 };
    let (lambda_a, lambda_b) = reg.resolve(ds.stats(), ds.dim(View::A), ds.dim(View::B));

    let oracle = exact_cca(
        &DenseTwoView::from_dataset(&ds)?,
        lambda_a,
        lambda_b,
        k,
        false,
    )?;
    println!("\noracle objective: {:.6}", oracle.objective());

    println!("\nrandomized solver, narrow sketch (p = 10):");
    for q in 0..4 {
        let model = randomized_cca(
            &ds,
            &CcaConfig {
                k,
                p: 10,
                q,
                reg: reg.clone(),
                seed: 7,
                centered: false,
            },
        )?;
        println!(
            "  q = {q}: objective {:.6} ({} data passes, gap {:.2e})",
            model.objective(),
            model.passes_used,
            (oracle.objective() - model.objective()).abs() / oracle.objective()
        );
    }
    println!("\nfull-width sketch (k + p = min dims), two passes:");
    let full = randomized_cca(
        &ds,
        &CcaConfig {
            k,
            p: 35,
            q: 1,
            reg: reg.clone(),
            seed: 7,
            centered: false,
        },
    )?;
    println!(
        "  objective {:.6} (gap {:.2e})",
        full.objective(),
        (oracle.objective() - full.objective()).abs() / oracle.objective()
    );

    let warm = randomized_cca(
        &ds,
        &CcaConfig {
            k,
            p: 35,
            q: 1,
            reg: reg.clone(),
            seed: 7,
            centered: false,
        },
    )?;
    for (name, init) in [
        ("random init", HorstInit::Random),
        ("warm start", HorstInit::Warm(Box::new(warm))),
    ] {
        let (model, trace) = horst_iterate(
            &ds,
            &HorstConfig {
                k,
                reg: reg.clone(),
                max_sweeps: 200,
                inner_steps: 3,
                tol: 1e-9,
                seed: 7,
                init,
                centered: false,
            },
        )?;
        println!(
            "\nhorst ({name}): objective {:.6} after {} sweeps, {} data passes",
            model.objective(),
            trace.sweeps(),
            model.passes_used
        );
        println!(
            "  correlations: {:?}",
            model
                .correlations
                .iter()
                .map(|c| (c * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        );
    }
    Ok(())
}
