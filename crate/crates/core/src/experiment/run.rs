use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bench::{bench_table, run_bench, BenchConfig};
use crate::error::{Error, Result};
use crate::exponent::{bimodal_exponent, bootstrap_exponent, exponent_stages, BootstrapData, EdgeScale, ExponentRecipe};
use crate::grid::{GridSpec, ScalarField};
use crate::io::{read_image, write_csv, write_csv_rows, write_image, write_image_in_range, BitDepth, ReadOptions};
use crate::kernels::ExponentMap;
use crate::metrics::psnr;
use crate::noise::{add_noise, add_noise_values, NoiseSpec};
use crate::phantom::{square_grid, square_phantom, tomo_grid, tomo_phantom};
use crate::solvers::{solve, ConvergenceLog, Initial, ProblemSpec, Regularizer, SolverConfig};
use crate::tomo::{fbp, forward, FanBeamGeometry, FbpConfig, FbpFilter, Sinogram};

use super::config::{Command, ExperimentConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegularizerKind {
    Tv,
    Tvp,
    Tgv2,
    Tikhonov,
}

impl RegularizerKind {
    fn parse(cfg: &ExperimentConfig) -> Result<Self> {
        match cfg.raw("regularizer")? {
            "tv" => Ok(RegularizerKind::Tv),
            "tvp" => Ok(RegularizerKind::Tvp),
            "tgv2" => Ok(RegularizerKind::Tgv2),
            "tikhonov" => Ok(RegularizerKind::Tikhonov),
            other => Err(cfg.key_error("regularizer", format!("{other:?} is not tv, tvp, tgv2 or tikhonov"))),
        }
    }

    fn with_map(self, p: Option<ExponentMap<f64>>) -> Regularizer<f64> {
        match self {
            RegularizerKind::Tv => Regularizer::Tv,
            RegularizerKind::Tvp => Regularizer::Tvp(p.expect("tvp runs build an exponent map")),
            RegularizerKind::Tgv2 => Regularizer::Tgv2,
            RegularizerKind::Tikhonov => Regularizer::Tikhonov,
        }
    }
}

fn checked<V>(
    cfg: &ExperimentConfig,
    key: &str,
    ok: impl Fn(V) -> bool,
    what: &str,
) -> Result<V>
where
    V: Copy + std::fmt::Display + std::str::FromStr,
    V::Err: std::fmt::Display,
{
    let v: V = cfg.get(key)?;
    if ok(v) {
        Ok(v)
    } else {
        Err(cfg.key_error(key, format!("{v} {what}")))
    }
}

fn solver_config(cfg: &ExperimentConfig) -> Result<SolverConfig> {
    let nonneg = |v: f64| v >= 0.0 && v.is_finite();
    let s = SolverConfig {
        lambda: checked(cfg, "solver.lambda", nonneg, "must be >= 0")?,
        lambda1: checked(cfg, "solver.lambda1", nonneg, "must be >= 0")?,
        lambda2: checked(cfg, "solver.lambda2", nonneg, "must be >= 0")?,
        iterations: checked(cfg, "solver.iterations", |v: usize| v > 0, "must be positive")?,
        theta: checked(cfg, "solver.theta", |v: f64| (0.0..=1.0).contains(&v), "must lie in [0, 1]")?,
        step_scale: checked(cfg, "solver.step_scale", |v: f64| v > 0.0 && v < 1.0, "must lie in (0, 1)")?,
        opnorm_power_iters: checked(cfg, "solver.opnorm_power_iters", |v: usize| v > 0, "must be positive")?,
    };
    s.validate()?;
    Ok(s)
}

fn recipe(cfg: &ExperimentConfig, spec: &GridSpec) -> Result<ExponentRecipe> {
    let s1: f64 = checked(cfg, "recipe.sigma1", |v: f64| v > 0.0, "must be > 0")?;
    let s2: f64 = checked(cfg, "recipe.sigma2", |v: f64| v > s1, "must exceed recipe.sigma1")?;
    let scale = match cfg.get_auto::<f64>("recipe.c")? {
        Some(c) if c > 0.0 && c.is_finite() => EdgeScale::Fixed(c),
        Some(c) => return Err(cfg.key_error("recipe.c", format!("{c} must be > 0"))),
        None => EdgeScale::Percentile(checked(cfg, "recipe.percentile", |v: f64| v > 0.0 && v <= 1.0, "must lie in (0, 1]")?),
    };
    let delta: f64 = checked(cfg, "recipe.delta_snap", |v: f64| (0.0..1.0).contains(&v), "must lie in [0, 1)")?;
    ExponentRecipe::in_cells(spec, s1, s2, scale, delta)
}

fn noise(cfg: &ExperimentConfig, key: &str, seed: u64) -> Result<NoiseSpec> {
    let level: f64 = checked(cfg, key, |v: f64| v >= 0.0 && v.is_finite(), "must be >= 0")?;
    NoiseSpec::new(level, seed)
}

fn fbp_config(cfg: &ExperimentConfig, filter_key: &str, cutoff_key: &str) -> Result<FbpConfig> {
    let filter = match cfg.raw(filter_key)? {
        "ramlak" => FbpFilter::RamLak,
        "hann" => FbpFilter::Hann,
        other => return Err(cfg.key_error(filter_key, format!("{other:?} is not ramlak or hann"))),
    };
    let cutoff = checked(cfg, cutoff_key, |v: f64| v > 0.0 && v <= 1.0, "must lie in (0, 1]")?;
    FbpConfig::new(filter, cutoff)
}

fn grid_size(cfg: &ExperimentConfig) -> Result<usize> {
    checked(cfg, "grid.size", |v: usize| v >= 4, "must be at least 4")
}

fn input_image(cfg: &ExperimentConfig) -> Result<Option<ScalarField<f64>>> {
    let path = cfg.raw("input")?;
    if path.is_empty() {
        return Ok(None);
    }
    let opts = ReadOptions {
        luma: true,
        extent: None,
    };
    read_image(path, &opts).map(Some)
}

fn expect_command(cfg: &ExperimentConfig, command: Command) -> Result<()> {
    if cfg.command() == command {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{} configuration passed to the {} runner",
            cfg.command().name(),
            command.name()
        )))
    }
}

fn psnr_or_none(f: &ScalarField<f64>, reference: &ScalarField<f64>) -> Option<f64> {
    psnr(f, reference).ok()
}

/// Denoising run: phantom (or input image), noise, optional exponent map, reconstruction.
#[derive(Clone, Debug)]
pub struct DenoiseRun {
    pub regularizer: RegularizerKind,
    pub truth: ScalarField<f64>,
    pub noisy: ScalarField<f64>,
    pub exponent: Option<ExponentMap<f64>>,
    pub result: ScalarField<f64>,
    pub log: ConvergenceLog,
    pub psnr_noisy: Option<f64>,
    pub psnr_result: Option<f64>,
}

pub fn run_denoise(cfg: &ExperimentConfig) -> Result<DenoiseRun> {
    expect_command(cfg, Command::Denoise)?;
    let seed: u64 = cfg.get("seed")?;
    let truth = match input_image(cfg)? {
        Some(f) => f,
        None => square_phantom(&square_grid(grid_size(cfg)?)?)?,
    };
    let spec = *truth.spec();
    let noisy = add_noise(&truth, &noise(cfg, "noise.level", seed)?).data;
    let kind = RegularizerKind::parse(cfg)?;
    let exponent = match kind {
        RegularizerKind::Tvp => Some(bootstrap_exponent(BootstrapData::Image(&noisy), &recipe(cfg, &spec)?)?),
        _ => None,
    };
    let prob = ProblemSpec::denoise(noisy.clone(), kind.with_map(exponent.clone()), solver_config(cfg)?);
    let (result, log) = solve(&prob)?;
    Ok(DenoiseRun {
        regularizer: kind,
        psnr_noisy: psnr_or_none(&noisy, &truth),
        psnr_result: psnr_or_none(&result, &truth),
        truth,
        noisy,
        exponent,
        result,
        log,
    })
}

/// Tomography run on the built-in phantom.
#[derive(Clone, Debug)]
pub struct TomoRun {
    pub regularizer: RegularizerKind,
    pub bimodal: bool,
    pub truth: ScalarField<f64>,
    pub primary: Sinogram<f64>,
    /// Only simulated for bimodal TVᵖ runs.
    pub secondary: Option<Sinogram<f64>>,
    pub fbp: ScalarField<f64>,
    pub exponent: Option<ExponentMap<f64>>,
    pub result: ScalarField<f64>,
    pub log: ConvergenceLog,
    pub psnr_fbp: f64,
    pub psnr_result: f64,
}

fn geometry(cfg: &ExperimentConfig, spec: &GridSpec) -> Result<FanBeamGeometry> {
    let angles = checked(cfg, "geometry.angles", |v: usize| v > 0, "must be positive")?;
    let dets = checked(cfg, "geometry.detectors", |v: usize| v > 0, "must be positive")?;
    let auto = FanBeamGeometry::default_for(spec, angles, dets)?;
    let rs = cfg.get_auto("geometry.source_radius")?.unwrap_or(auto.source_radius);
    let rd = cfg.get_auto("geometry.detector_radius")?.unwrap_or(rs);
    let default_extent = if rs == auto.source_radius && rd == auto.detector_radius {
        auto.detector_extent
    } else {
        let r = spec.circumradius();
        2.1 * (rs + rd) * r / (rs * rs - r * r).max(f64::MIN_POSITIVE).sqrt()
    };
    let extent = cfg.get_auto("geometry.detector_extent")?.unwrap_or(default_extent);
    let g = FanBeamGeometry::new(angles, rs, rd, dets, extent).map_err(|e| cfg.key_error("geometry.angles", e))?;
    g.validate_for(spec).map_err(|e| cfg.key_error("geometry.source_radius", e))?;
    Ok(g)
}

pub fn run_tomo(cfg: &ExperimentConfig) -> Result<TomoRun> {
    expect_command(cfg, Command::Tomo)?;
    let seed: u64 = cfg.get("seed")?;
    let spec = tomo_grid(grid_size(cfg)?)?;
    let truth = tomo_phantom::<f64>(&spec)?;
    let geom = geometry(cfg, &spec)?;
    let kind = RegularizerKind::parse(cfg)?;
    let bimodal = match cfg.raw("exponent.mode")? {
        "bimodal" => true,
        "bootstrap" => false,
        other => return Err(cfg.key_error("exponent.mode", format!("{other:?} is not bootstrap or bimodal"))),
    };
    let base_cfg = fbp_config(cfg, "fbp.filter", "fbp.cutoff")?;
    let exp_cfg = fbp_config(cfg, "exponent.fbp_filter", "exponent.fbp_cutoff")?;
    let recipe = recipe(cfg, &spec)?;
    let solver = solver_config(cfg)?;

    let clean = forward(&truth, &geom)?;
    let primary = Sinogram::new(geom, add_noise_values(clean.values(), &noise(cfg, "noise.primary", seed)?).data)?;
    let use_secondary = bimodal && kind == RegularizerKind::Tvp;
    let secondary = if use_secondary {
        let spec2 = noise(cfg, "noise.secondary", seed.wrapping_add(1))?;
        Some(Sinogram::new(geom, add_noise_values(clean.values(), &spec2).data)?)
    } else {
        None
    };

    let fbp_image = fbp(&primary, &base_cfg, &spec)?;
    let exponent = match (kind, &secondary) {
        (RegularizerKind::Tvp, Some(sec)) => Some(bimodal_exponent(sec, &exp_cfg, &spec, &recipe)?),
        (RegularizerKind::Tvp, None) => {
            let data = BootstrapData::Sinogram {
                sinogram: &primary,
                fbp: &exp_cfg,
                spec: &spec,
            };
            Some(bootstrap_exponent(data, &recipe)?)
        }
        _ => None,
    };
    let prob = ProblemSpec::tomography(primary.clone(), spec, kind.with_map(exponent.clone()), solver)
        .with_initial(Initial::Fbp(base_cfg));
    let (result, log) = solve(&prob)?;
    Ok(TomoRun {
        regularizer: kind,
        bimodal: use_secondary,
        psnr_fbp: psnr(&fbp_image, &truth)?,
        psnr_result: psnr(&result, &truth)?,
        truth,
        primary,
        secondary,
        fbp: fbp_image,
        exponent,
        result,
        log,
    })
}

/// The four stages of the exponent construction.
#[derive(Clone, Debug)]
pub struct ExponentRun {
    pub input: ScalarField<f64>,
    pub laplacian: ScalarField<f64>,
    pub rectified: ScalarField<f64>,
    pub threshold: ScalarField<f64>,
    pub exponent: ExponentMap<f64>,
    pub c: f64,
}

pub fn run_exponent(cfg: &ExperimentConfig) -> Result<ExponentRun> {
    expect_command(cfg, Command::Exponent)?;
    let seed: u64 = cfg.get("seed")?;
    let image = match input_image(cfg)? {
        Some(f) => f,
        None => run_phantom_field(cfg)?,
    };
    let input = add_noise(&image, &noise(cfg, "noise.level", seed)?).data;
    let stages = exponent_stages(&input, &recipe(cfg, input.spec())?)?;
    Ok(ExponentRun {
        input,
        laplacian: stages.laplacian,
        rectified: stages.rectified,
        threshold: stages.threshold,
        exponent: stages.exponent,
        c: stages.c,
    })
}

fn run_phantom_field(cfg: &ExperimentConfig) -> Result<ScalarField<f64>> {
    let n = grid_size(cfg)?;
    match cfg.raw("phantom")? {
        "square" => square_phantom(&square_grid(n)?),
        "tomo" => tomo_phantom(&tomo_grid(n)?),
        other => Err(cfg.key_error("phantom", format!("{other:?} is not square or tomo"))),
    }
}

pub fn run_phantom(cfg: &ExperimentConfig) -> Result<ScalarField<f64>> {
    expect_command(cfg, Command::Phantom)?;
    run_phantom_field(cfg)
}

fn save(dir: &Path, name: &str, f: &ScalarField<f64>) -> Result<()> {
    write_csv(f, dir.join(format!("{name}.csv")))?;
    write_image(f, dir.join(format!("{name}.png")), BitDepth::Eight)?;
    Ok(())
}

fn save_exponent(dir: &Path, p: &ExponentMap<f64>) -> Result<()> {
    write_csv(p.as_field(), dir.join("exponent.csv"))?;
    write_image_in_range(p.as_field(), dir.join("exponent.png"), BitDepth::Eight, Some((1.0, 2.0)))?;
    Ok(())
}

fn save_sinogram(dir: &Path, name: &str, s: &Sinogram<f64>) -> Result<()> {
    write_csv_rows(s.values(), s.geometry().num_detectors, dir.join(format!("{name}.csv")))?;
    write_image(&s.to_field(), dir.join(format!("{name}.png")), BitDepth::Eight)?;
    Ok(())
}

fn write_text(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn fmt_db(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |x| format!("{x}"))
}

/// Runs the configured command and writes its outputs. Returns the report text.
pub fn execute(cfg: &ExperimentConfig) -> Result<String> {
    cfg.check_required()?;
    let dir = PathBuf::from(cfg.raw("output_dir")?);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_text(dir.join("resolved.cfg"), &cfg.resolved_text())?;
    let mut report = String::new();
    match cfg.command() {
        Command::Denoise => {
            let run = run_denoise(cfg)?;
            save(&dir, "truth", &run.truth)?;
            save(&dir, "noisy", &run.noisy)?;
            save(&dir, "result", &run.result)?;
            if let Some(p) = &run.exponent {
                save_exponent(&dir, p)?;
            }
            run.log.write_csv(dir.join("convergence.csv"))?;
            let _ = writeln!(report, "regularizer = {:?}", run.regularizer);
            let _ = writeln!(report, "psnr_noisy = {}", fmt_db(run.psnr_noisy));
            let _ = writeln!(report, "psnr_result = {}", fmt_db(run.psnr_result));
            let _ = writeln!(report, "final_objective = {}", run.log.final_objective().unwrap_or(f64::NAN));
            let _ = writeln!(report, "initial = {}", run.log.initial);
        }
        Command::Tomo => {
            let run = run_tomo(cfg)?;
            save(&dir, "truth", &run.truth)?;
            save_sinogram(&dir, "sinogram_primary", &run.primary)?;
            if let Some(s) = &run.secondary {
                save_sinogram(&dir, "sinogram_secondary", s)?;
            }
            save(&dir, "fbp", &run.fbp)?;
            save(&dir, "result", &run.result)?;
            if let Some(p) = &run.exponent {
                save_exponent(&dir, p)?;
            }
            run.log.write_csv(dir.join("convergence.csv"))?;
            let _ = writeln!(report, "regularizer = {:?}", run.regularizer);
            let _ = writeln!(report, "exponent_source = {}", match (&run.exponent, run.bimodal) {
                (None, _) => "none",
                (Some(_), true) => "secondary",
                (Some(_), false) => "primary",
            });
            let _ = writeln!(report, "psnr_fbp = {}", run.psnr_fbp);
            let _ = writeln!(report, "psnr_result = {}", run.psnr_result);
            let _ = writeln!(report, "final_objective = {}", run.log.final_objective().unwrap_or(f64::NAN));
            let _ = writeln!(report, "initial = {}", run.log.initial);
        }
        Command::Exponent => {
            let run = run_exponent(cfg)?;
            save(&dir, "input", &run.input)?;
            save(&dir, "stage_l", &run.laplacian)?;
            save(&dir, "stage_a", &run.rectified)?;
            save(&dir, "stage_t", &run.threshold)?;
            write_csv(run.exponent.as_field(), dir.join("stage_p.csv"))?;
            write_image_in_range(run.exponent.as_field(), dir.join("stage_p.png"), BitDepth::Eight, Some((1.0, 2.0)))?;
            let _ = writeln!(report, "c = {}", run.c);
            let _ = writeln!(report, "cells_p1 = {}", run.exponent.count_ones());
            let _ = writeln!(report, "cells = {}", run.exponent.values().len());
        }
        Command::Bench => {
            let bench = BenchConfig {
                points: checked(cfg, "bench.points", |v: usize| v > 0, "must be positive")?,
                newton_iters: cfg.get("bench.newton_iters")?,
                repeats: checked(cfg, "bench.repeats", |v: usize| v > 0, "must be positive")?,
                seed: cfg.get("seed")?,
            };
            let table = bench_table(&run_bench(&bench)?, &bench);
            write_text(dir.join("bench.csv"), &table)?;
            report.push_str(&table);
        }
        Command::Phantom => {
            save(&dir, "phantom", &run_phantom(cfg)?)?;
            let _ = writeln!(report, "phantom = {}", cfg.raw("phantom")?);
        }
    }
    write_text(dir.join("report.txt"), &report)?;
    Ok(report)
}
