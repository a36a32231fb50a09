use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use clutterlab::blocker::plan_removal;
use clutterlab::config::RunConfig;
use clutterlab::dataset::{build_record_pool, training_library, training_scene, training_scene_seed, BalancedBatcher, RecordPool};
use clutterlab::error::Error;
use clutterlab::eval::{run_ablation, Variant};
use clutterlab::pipeline::GraspPipeline;
use clutterlab::scene::{cloud_to_ply, load_scene, save_scene};
use clutterlab::seed;

#[derive(Parser)]
#[command(name = "clutterlab", version, about = "Cascaded 6-DOF grasp synthesis in clutter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config overriding defaults; falls back to $CLUTTERLAB_CONFIG
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config value
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut config = RunConfig::resolve(self.config.as_deref()).context("loading config")?;
        if let Some(s) = self.seed {
            config.seed = s;
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate random cluttered scenes with their rendered clouds
    GenScenes {
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Objects per scene; defaults to the config value
        #[arg(long)]
        objects: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rank grasps for one target of a scene
    Plan {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        target: u32,
        /// Output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the ablation benchmark
    Bench {
        /// Comma-separated `sampler:collider:labeling` list; defaults to the config value
        #[arg(long, value_delimiter = ',')]
        variants: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
        /// Print wall-clock time to stderr
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Export balanced training batches as JSON lines
    ExportDataset {
        /// Directory of scene JSON files
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, default_value_t = 1)]
        batches: usize,
        /// Only this instance in every scene; all objects when absent
        #[arg(long)]
        target: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Plan blocker removals until the target is graspable
    RemoveBlockers {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        target: u32,
        /// Output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gen_scenes(n: usize, objects: Option<usize>, out: &Path, config: &RunConfig) -> Result<()> {
    let library = training_library(config);
    let pipeline = GraspPipeline::from_config(config)?;
    fs::create_dir_all(out)?;
    let written: Vec<(String, usize, usize)> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<(String, usize, usize)> {
            let scene = training_scene(config, &library, i as u64, objects)?;
            let cloud = pipeline.observe(&scene, training_scene_seed(config, i as u64))?;
            let name = format!("scene_{i:04}");
            save_scene(&scene, &out.join(format!("{name}.json")))?;
            fs::write(out.join(format!("{name}.ply")), cloud_to_ply(&cloud))?;
            Ok((name, scene.objects().len(), cloud.len()))
        })
        .collect::<Result<_>>()?;
    for (name, objects, points) in written {
        println!("{name}: {objects} objects, {points} points");
    }
    Ok(())
}

fn plan(scene: &Path, target: u32, out: Option<&Path>, config: &RunConfig) -> Result<()> {
    let scene = load_scene(scene).with_context(|| format!("loading {}", scene.display()))?;
    let pipeline = GraspPipeline::from_config(config)?;
    let plan = pipeline.plan_scene(&scene, target, config.seed)?;
    write_output(out, &plan.to_json())?;
    if out.is_some() {
        println!("target {target}: {} candidates, {} ranked", plan.candidates.len(), plan.ranked.len());
    }
    Ok(())
}

fn bench(variants: Option<Vec<String>>, out: &Path, timing: bool, config: &RunConfig) -> Result<()> {
    let start = Instant::now();
    let names = variants.unwrap_or_else(|| config.bench.variants.clone());
    let parsed: Vec<Variant> = names.iter().map(|s| s.trim().parse()).collect::<Result<_, Error>>()?;
    let report = run_ablation(config, &parsed, None)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), report.to_json())?;
    fs::write(out.join("curves.csv"), report.to_csv())?;
    for s in &report.summaries {
        println!(
            "{}: {} scenes, mean AUC {:.4}, success {:.4}, coverage {:.4}",
            s.variant, s.scenes, s.mean_auc, s.mean_success_rate, s.mean_coverage
        );
    }
    if timing {
        eprintln!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    }
    Ok(())
}

fn export_dataset(
    scenes: &Path,
    out: &Path,
    batch: usize,
    batches: usize,
    target: Option<u32>,
    config: &RunConfig,
) -> Result<()> {
    if batch == 0 {
        bail!("batch size must be positive");
    }
    let mut files: Vec<PathBuf> = fs::read_dir(scenes)
        .with_context(|| format!("reading {}", scenes.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|x| x == "json"));
    files.sort();
    if files.is_empty() {
        bail!("no scene JSON files in {}", scenes.display());
    }
    let mut jobs = Vec::new();
    for (i, path) in files.iter().enumerate() {
        let scene = load_scene(path).with_context(|| format!("loading {}", path.display()))?;
        let name = path.file_name().expect("file").to_string_lossy().into_owned();
        let ids: Vec<u32> = match target {
            Some(t) => {
                scene.require(t)?;
                vec![t]
            }
            None => scene.objects().iter().map(|o| o.instance_id()).collect(),
        };
        for t in ids {
            jobs.push((i, name.clone(), scene.clone(), t));
        }
    }
    let pools: Vec<Option<RecordPool>> = jobs
        .par_iter()
        .map(|(i, name, scene, t)| {
            let s = seed::derive(config.seed, seed::streams::EXPORT, ((*i as u64) << 32) | *t as u64);
            match build_record_pool(scene, name, *t, config, s) {
                Ok(p) => Ok(Some(p)),
                Err(Error::InstanceAbsent(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, Error>>()?;
    let mut pool = RecordPool::default();
    let mut skipped = 0;
    for p in pools {
        match p {
            Some(p) => {
                pool.positive.extend(p.positive);
                pool.negative.extend(p.negative);
                pool.hard_negative.extend(p.hard_negative);
                pool.free.extend(p.free);
            }
            None => skipped += 1,
        }
    }
    let mut batcher = BalancedBatcher::new(&pool, config.seed)?;
    let mut text = String::new();
    for _ in 0..batches {
        for r in batcher.next_batch(batch) {
            text.push_str(&r.to_json_line());
            text.push('\n');
        }
    }
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    let [a, b, c, d] = pool.subsets().map(|s| s.len());
    println!(
        "{} targets ({skipped} unobserved skipped); pool {a} positive, {b} negative, {c} hard negative, {d} free; wrote {} records",
        jobs.len() - skipped,
        batch * batches
    );
    Ok(())
}

fn remove_blockers(scene: &Path, target: u32, out: Option<&Path>, config: &RunConfig) -> Result<()> {
    let scene = load_scene(scene).with_context(|| format!("loading {}", scene.display()))?;
    scene.require(target)?;
    let pipeline = GraspPipeline::from_config(config)?;
    let cloud = pipeline.observe(&scene, config.seed)?;
    let plan = plan_removal(
        &cloud,
        target,
        &pipeline,
        config.blocker.max_removals,
        scene.table_height(),
        Some(&scene),
        config.seed,
    )?;
    write_output(out, &plan.to_json())?;
    if out.is_some() {
        let ids: Vec<u32> = plan.removals.iter().map(|r| r.instance_id).collect();
        println!("target {target}: remove {ids:?}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenScenes { n, objects, out, common } => gen_scenes(n, objects, &out, &common.resolve()?),
        Command::Plan { scene, target, out, common } => plan(&scene, target, out.as_deref(), &common.resolve()?),
        Command::Bench { variants, out, timing, common } => bench(variants, &out, timing, &common.resolve()?),
        Command::ExportDataset { scenes, out, batch, batches, target, common } => {
            export_dataset(&scenes, &out, batch, batches, target, &common.resolve()?)
        }
        Command::RemoveBlockers { scene, target, out, common } => {
            remove_blockers(&scene, target, out.as_deref(), &common.resolve()?)
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
