use std::fs;
use std::process::ExitCode;

use clap::Parser;

use spinpair::cli::{build_request, Cli};
use spinpair::output::{trace_file_name, unix_ms_now, write_batch_summary, write_trace_csv, RunManifest};
use spinpair::trajectory::run_batch;
use spinpair::SimError;

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits with 2 on malformed flags
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                // Bad parameters are usage errors; anything else is runtime.
                SimError::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: &Cli) -> spinpair::Result<()> {
    let request = build_request(cli)?;
    let config = &request.config;

    let started = unix_ms_now();
    let batch = run_batch(config)?;
    let finished = unix_ms_now();

    let run_dir = request
        .out_dir
        .join(format!("{}-seed{}", config.protocol, config.seed));
    fs::create_dir_all(&run_dir).map_err(|source| SimError::Io {
        path: run_dir.clone(),
        source,
    })?;

    for trace in &batch.traces {
        write_trace_csv(trace, &run_dir.join(trace_file_name(trace.trajectory_id)))?;
    }
    let manifest = RunManifest::new(&batch, started, finished);
    write_batch_summary(&batch, &manifest, &run_dir)?;

    let mean_final_entropy: f64 = batch
        .traces
        .iter()
        .map(|t| t.final_summary.entropy_bits)
        .sum::<f64>()
        / batch.traces.len() as f64;

    println!(
        "protocol {}: {}+{} atoms, chi_tau {}, {} photons, {} trajectories, seed {}",
        config.protocol,
        config.atoms_per_sample_1,
        config.atoms_per_sample_2,
        config.chi_tau,
        config.total_photons(),
        config.trajectories,
        config.seed
    );
    println!("mean final entropy: {mean_final_entropy:.4} bits");
    if let Some(s) = &batch.capture {
        println!(
            "capture fraction (overlap >= 0.99): {:.4} ({}/{}), 95% CI [{:.4}, {:.4}]",
            s.fraction, s.captured, s.total, s.ci_low, s.ci_high
        );
    }
    println!(
        "wrote {} trace files, average.csv, manifest.txt -> {}",
        batch.traces.len(),
        run_dir.display()
    );
    Ok(())
}
