mod args;
mod report;

use std::process::ExitCode;

use clap::Parser;
use ndarray::Array1;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use qudit_purify::gates::{bell_state, teleport_check, BellLabel};
use qudit_purify::purification::{
    convergence_radius, critical_fidelity, efficiency_sweep, purify_with, OutcomeAccounting, ProtocolKind,
    PurifyOptions, WernerSpec,
};
use qudit_purify::qlinalg::{HilbertShape, Ket};

use args::{Cli, Command, RunArgs};
use report::RadiusRow;

const TELEPORT_TOL: f64 = 1e-9;

fn options(run: &RunArgs) -> PurifyOptions {
    let mut opts = PurifyOptions::new(run.target, run.max_steps);
    if run.baseline_single_outcome {
        opts.accounting = OutcomeAccounting::SingleOutcome;
    }
    opts
}

fn random_ket(dim: usize, rng: &mut ChaCha8Rng) -> Result<Ket, String> {
    let amps = Array1::from_shape_fn(dim, |_| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    Ket::new(HilbertShape::qudits(dim, 1).map_err(err)?, amps).map_err(err)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Bell { dim, l, m } => {
            let ket = bell_state(BellLabel::new(l, m, dim).map_err(err)?);
            print!("{}", report::bell_amplitudes(&ket, dim));
            Ok(true)
        }
        Command::TeleportCheck { dim, trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = f64::INFINITY;
            for _ in 0..trials {
                let chi = random_ket(dim, &mut rng)?;
                let (j, k) = (rng.random_range(0..dim), rng.random_range(0..dim));
                worst = worst.min(teleport_check(&chi, j, k).map_err(err)?.worst_fidelity);
            }
            let ok = worst >= 1.0 - TELEPORT_TOL;
            println!("dim={dim} trials={trials} seed={seed} worst_fidelity={} {}", report::float(worst), if ok { "ok" } else { "FAILED" });
            Ok(ok)
        }
        Command::Purify { dim, protocol, fidelity, run, out } => {
            let spec = WernerSpec::from_fidelity(dim, fidelity).map_err(err)?;
            let result = purify_with(spec, protocol, &options(&run)).map_err(err)?;
            out.write(&report::purify(&result, out.format))?;
            Ok(true)
        }
        Command::Sweep { dim, protocols, grid, run, out } => {
            let floor = critical_fidelity(dim);
            if let Some(bad) = grid.0.iter().find(|f| !(**f > floor && **f <= 1.0)) {
                return Err(format!("grid point {bad} outside (1/{dim}, 1]"));
            }
            let rows = efficiency_sweep(dim, &protocols, &grid.0, &options(&run)).map_err(err)?;
            out.write(&report::sweep(&rows, out.format))?;
            Ok(true)
        }
        Command::Radius { dims, protocols, tol, run, out } => {
            let jobs: Vec<(usize, ProtocolKind)> =
                dims.0.iter().flat_map(|&d| protocols.iter().map(move |&k| (d, k))).collect();
            let rows = jobs
                .into_par_iter()
                .map(|(dim, protocol)| {
                    let f_min = convergence_radius(dim, protocol, run.target, run.max_steps, tol)?;
                    Ok(RadiusRow { dim, protocol, f_min, f_critical: critical_fidelity(dim) })
                })
                .collect::<qudit_purify::Result<Vec<_>>>()
                .map_err(err)?;
            out.write(&report::radius(&rows, out.format))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(msg) => {
            eprintln!("qpurify: {msg}");
            ExitCode::FAILURE
        }
    }
}
