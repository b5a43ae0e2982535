//! `cns` — salient object detection in the color name space.

mod manifest;
mod settings;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use cns_core::eval::{self, Dataset, SweepGrid};
use cns_core::raster::{self, GrayField};
use cns_core::{combine, BoolMap, Rgb8Image};
use manifest::DatasetManifest;
use rayon::prelude::*;
use settings::{format_params, ParamFlags};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "cns",
    version,
    about = "Salient object detection in the color name space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the saliency map of a single image
    Detect {
        /// Input image (PNG, JPEG, or BMP)
        input: PathBuf,
        /// Output saliency map (8-bit grayscale PNG)
        output: PathBuf,
        #[command(flatten)]
        params: ParamFlags,
    },
    /// Compute saliency maps for every image in a directory
    Batch {
        /// Directory of input images
        image_dir: PathBuf,
        /// Directory the maps are written into (created if missing)
        output_dir: PathBuf,
        #[command(flatten)]
        params: ParamFlags,
    },
    /// Score saliency maps against ground-truth masks
    Eval {
        /// Directory of saliency maps
        maps_dir: PathBuf,
        /// Directory of ground-truth masks (matched by file stem)
        gt_dir: PathBuf,
        /// Where the precision/recall/F curves CSV is written
        #[arg(long, default_value = "curves.csv")]
        curves: PathBuf,
        /// Where the score summary is written
        #[arg(long, default_value = "summary.txt")]
        summary: PathBuf,
        /// Cap on worker threads
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Sweep detector parameters over a ground-truthed image set
    Sweep {
        /// Directory of input images
        image_dir: PathBuf,
        /// Directory of ground-truth masks (matched by file stem)
        gt_dir: PathBuf,
        /// Axis spec `name=start:step:end` or `name=v1,v2,...`;
        /// repeatable. Default: the built-in ranges for all five parameters
        #[arg(long = "grid")]
        grids: Vec<String>,
        /// Where the sweep CSV is written
        #[arg(long, default_value = "sweep.csv")]
        output: PathBuf,
        #[command(flatten)]
        params: ParamFlags,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn cap_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // Ignore failure: the global pool may already exist.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run() -> Result<()> {
    // Usage errors exit 1 (clap defaults to 2); --help and --version exit 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.exit_code() == 0 => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    match cli.command {
        Command::Detect {
            input,
            output,
            params,
        } => cmd_detect(&input, &output, &params),
        Command::Batch {
            image_dir,
            output_dir,
            params,
        } => cmd_batch(&image_dir, &output_dir, &params),
        Command::Eval {
            maps_dir,
            gt_dir,
            curves,
            summary,
            threads,
        } => {
            cap_threads(threads);
            cmd_eval(&maps_dir, &gt_dir, &curves, &summary)
        }
        Command::Sweep {
            image_dir,
            gt_dir,
            grids,
            output,
            params,
        } => cmd_sweep(&image_dir, &gt_dir, &grids, &output, &params),
    }
}

fn read_image(path: &Path) -> Result<Rgb8Image> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    raster::decode_image(&bytes).with_context(|| format!("cannot decode {}", path.display()))
}

// temp-and-rename so readers never observe a half-written map
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("png.tmp");
    std::fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("cannot rename to {}", path.display()))?;
    Ok(())
}

fn cmd_detect(input: &Path, output: &Path, flags: &ParamFlags) -> Result<()> {
    cap_threads(flags.threads);
    let settings = settings::resolve(flags)?;
    let table = settings::load_table(&settings);
    let img = read_image(input)?;
    let map = combine::detect(&img, &settings.params, &table)?;
    write_atomic(output, &raster::encode_gray_png(&map)?)?;
    println!("{}", format_params(&settings.params));
    Ok(())
}

fn cmd_batch(image_dir: &Path, output_dir: &Path, flags: &ParamFlags) -> Result<()> {
    cap_threads(flags.threads);
    let settings = settings::resolve(flags)?;
    let table = settings::load_table(&settings);
    let files: Vec<(String, PathBuf)> = manifest::image_files(image_dir)
        .with_context(|| format!("cannot list {}", image_dir.display()))?
        .into_iter()
        .collect();
    std::fs::create_dir_all(output_dir)
        .with_context(|| format!("cannot create {}", output_dir.display()))?;

    let start = Instant::now();
    let results: Vec<std::result::Result<(), String>> = files
        .par_iter()
        .map(|(stem, path)| {
            let work = || -> Result<()> {
                let img = read_image(path)?;
                let map = combine::detect(&img, &settings.params, &table)?;
                write_atomic(
                    &output_dir.join(format!("{stem}.png")),
                    &raster::encode_gray_png(&map)?,
                )
            };
            work().map_err(|e| format!("{}: {e:#}", path.display()))
        })
        .collect();

    let mut ok = 0usize;
    let mut failed = 0usize;
    for r in results {
        match r {
            Ok(()) => ok += 1,
            Err(msg) => {
                failed += 1;
                eprintln!("skipped {msg}");
            }
        }
    }
    println!(
        "processed {ok} image(s), {failed} failed in {:.1}s [{}]",
        start.elapsed().as_secs_f64(),
        format_params(&settings.params)
    );
    Ok(())
}

fn load_pairs(man: &DatasetManifest) -> Result<(Vec<GrayField>, Vec<BoolMap>)> {
    let loaded: Vec<Result<(GrayField, BoolMap)>> = man
        .pairs
        .par_iter()
        .map(|(_, map_path, gt_path)| {
            let map = raster::to_gray_mean(&read_image(map_path)?);
            let gt = eval::ground_truth_from_image(&read_image(gt_path)?);
            Ok((map, gt))
        })
        .collect();
    let mut maps = Vec::with_capacity(loaded.len());
    let mut gts = Vec::with_capacity(loaded.len());
    for item in loaded {
        let (m, g) = item?;
        maps.push(m);
        gts.push(g);
    }
    Ok((maps, gts))
}

fn cmd_eval(maps_dir: &Path, gt_dir: &Path, curves_out: &Path, summary_out: &Path) -> Result<()> {
    let man = DatasetManifest::pair_directories(maps_dir, gt_dir)?;
    let (maps, gts) = load_pairs(&man)?;
    let (curves, summary) = eval::evaluate(&maps, &gts)?;
    std::fs::write(curves_out, curves.to_csv())
        .with_context(|| format!("cannot write {}", curves_out.display()))?;
    std::fs::write(summary_out, summary.to_text())
        .with_context(|| format!("cannot write {}", summary_out.display()))?;
    println!(
        "AvgF = {:.4}  MaxF = {:.4} (at t = {})  AdaptF = {:.4}  [{} image(s)]",
        summary.avg_f,
        summary.max_f,
        summary.max_f_threshold,
        summary.adapt_f,
        maps.len()
    );
    Ok(())
}

fn cmd_sweep(
    image_dir: &Path,
    gt_dir: &Path,
    grid_specs: &[String],
    output: &Path,
    flags: &ParamFlags,
) -> Result<()> {
    cap_threads(flags.threads);
    let settings = settings::resolve(flags)?;
    let table = settings::load_table(&settings);

    let man = DatasetManifest::pair_directories(image_dir, gt_dir)?;
    let images: Vec<Rgb8Image> = man
        .pairs
        .iter()
        .map(|(_, img, _)| read_image(img))
        .collect::<Result<_>>()?;
    let gts: Vec<BoolMap> = man
        .pairs
        .iter()
        .map(|(_, _, gt)| Ok(eval::ground_truth_from_image(&read_image(gt)?)))
        .collect::<Result<_>>()?;
    let dataset = Dataset::new(images, gts)?;

    let grid = if grid_specs.is_empty() {
        SweepGrid::default_ranges()
    } else {
        let mut g = SweepGrid::default();
        for spec in grid_specs {
            settings::parse_grid_spec(&mut g, spec)?;
        }
        g
    };

    let report = eval::parameter_sweep(&[dataset], &grid, &settings.params, &table)?;
    std::fs::write(output, report.to_csv())
        .with_context(|| format!("cannot write {}", output.display()))?;
    println!(
        "best: {} (MaxF = {:.4}); base was {}",
        format_params(&report.best),
        report.best_max_f,
        format_params(&settings.params)
    );
    Ok(())
}
