//! Coarse grid search of the regularization weight by PSNR.
//!
//! `cargo run --release -p varlp --example lambda_search -- denoise tvp 0.1,0.3,1`
//! `cargo run --release -p varlp --example lambda_search -- tomo tvp 1e-3,3e-3 mode=bootstrap`

use varlp::experiment::{run_denoise, run_tomo, Command, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let command: Command = args.first().ok_or("missing command")?.parse()?;
    let reg = args.get(1).ok_or("missing regularizer")?;
    let grid: Vec<f64> = args.get(2).ok_or("missing lambda grid")?.split(',').map(str::parse).collect::<Result<_, _>>()?;
    for &lambda in &grid {
        let mut cfg = ExperimentConfig::defaults(command);
        cfg.set("output_dir=unused")?;
        cfg.set(&format!("regularizer={reg}"))?;
        for extra in &args[3..] {
            cfg.set(extra)?;
        }
        if reg == "tgv2" {
            cfg.set(&format!("solver.lambda1={lambda}"))?;
            cfg.set(&format!("solver.lambda2={lambda}"))?;
        } else {
            cfg.set(&format!("solver.lambda={lambda}"))?;
        }
        let t = std::time::Instant::now();
        let psnr = match command {
            Command::Denoise => run_denoise(&cfg)?.psnr_result.unwrap_or(f64::NAN),
            Command::Tomo => {
                let run = run_tomo(&cfg)?;
                println!("  fbp psnr {:.3}", run.psnr_fbp);
                run.psnr_result
            }
            _ => return Err("only denoise and tomo are searchable".into()),
        };
        println!("{reg} lambda {lambda}: psnr {psnr:.3} dB ({:.1} s)", t.elapsed().as_secs_f64());
    }
    Ok(())
}
