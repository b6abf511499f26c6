use std::time::Instant;

use anyhow::anyhow;
use wsol_core::verify::{self, CheckGroup, VerifyConfig};
use wsol_trainer::check_model_gradients;

use super::write_json;
use crate::exit::{Failure, Outcome, VERIFY};
use crate::VerifyArgs;

/// Relative tolerance of the network-composition gradient check.
const MODEL_GRAD_RTOL: f64 = 1e-4;

pub fn run(args: &VerifyArgs) -> Outcome<()> {
    let only = args
        .only
        .iter()
        .map(|s| s.trim().parse::<CheckGroup>())
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = VerifyConfig {
        cases: args.cases,
        samples: args.samples,
        seed: args.seed,
    };
    let start = Instant::now();
    let mut report = verify::run(&cfg, &only)?;
    if only.is_empty() || only.contains(&CheckGroup::Gradient) {
        report
            .results
            .push(check_model_gradients(cfg.cases.min(100), cfg.seed, MODEL_GRAD_RTOL));
    }
    for r in &report.results {
        println!("{r}");
    }
    let failed = report.failures().count();
    println!(
        "{} checks, {} failed, seed {}, {} samples, {:.1}s",
        report.results.len(),
        failed,
        cfg.seed,
        cfg.samples,
        start.elapsed().as_secs_f64()
    );
    if let Some(path) = &args.json {
        write_json(path, &report)?;
    }
    if failed > 0 {
        let names: Vec<_> = report.failures().map(|r| format!("{}/{}", r.group, r.name)).collect();
        return Err(Failure::new(VERIFY, anyhow!("failing checks: {}", names.join(", "))));
    }
    Ok(())
}
