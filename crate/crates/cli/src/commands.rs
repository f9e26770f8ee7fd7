use std::path::Path;

use tabkip::data::{gen_synthetic, load_csv, split, standardize, write_csv, SplitSpec};
use tabkip::distill::{distill_traced, export_coreset, read_coreset_csv, DistillConfig, DistillTrace};
use tabkip::eval::{sweep, ClassifierSpec, SweepPlan};
use tabkip::kernel::{median_bandwidth, KernelSpec};
use tabkip::objectives::{calibrate_g_with, CalibrationSettings, Objective};
use tabkip::pca::{projection_csv, projection_report};
use tabkip::{Dataset, SyntheticSet};

use crate::config::{self, ClassifierKind, KernelKind, RunConfig};
use crate::output::RunDir;
use crate::Failure;

type CmdResult = Result<(), Failure>;

/// The configured dataset, standardized unless disabled, with its name.
fn load_dataset(cfg: &RunConfig) -> Result<(Dataset, String), Failure> {
    let d = &cfg.data;
    let (ds, default_name) = match &d.path {
        Some(p) => {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned());
            (load_csv(p, &d.label_column, &d.positive_value)?, stem.unwrap_or_default())
        }
        None => {
            let s = &d.synthetic;
            let seed = s.seed.unwrap_or(cfg.run.seed);
            (gen_synthetic(s.n, s.d, s.ir, s.separation, seed)?, "synthetic".to_string())
        }
    };
    let ds = if d.standardize { standardize(&ds) } else { ds };
    Ok((ds, d.name.clone().unwrap_or(default_name)))
}

fn split_dataset(cfg: &RunConfig, ds: &Dataset) -> Result<(Dataset, Dataset), Failure> {
    let spec = SplitSpec {
        test_fraction: cfg.split.test_fraction,
        stratified: cfg.split.stratified,
        seed: cfg.run.seed,
    };
    Ok(split(ds, &spec)?)
}

fn resolve_kernel(cfg: &RunConfig, train: &Dataset) -> Result<KernelSpec, Failure> {
    let k = &cfg.kernel;
    let spec = match k.kind {
        KernelKind::Rbf => KernelSpec::Rbf {
            bandwidth: match k.bandwidth {
                Some(h) => h,
                None => median_bandwidth(train.features(), cfg.run.seed)?,
            },
        },
        KernelKind::Linear => KernelSpec::Linear,
        KernelKind::Polynomial => KernelSpec::Polynomial {
            degree: k.degree,
            offset: k.offset,
        },
    };
    spec.validate()?;
    Ok(spec)
}

fn distill_config(cfg: &RunConfig, objective: Objective, kernel: KernelSpec) -> DistillConfig {
    let d = &cfg.distill;
    DistillConfig {
        m: d.m,
        epochs: d.epochs,
        lr_x: d.lr_x,
        lr_y: d.lr_y,
        batch_size: d.batch_size,
        learn_labels: d.learn_labels,
        init: d.init,
        noise_sigma: d.noise_sigma,
        synthetic_ir: d.synthetic_ir,
        objective,
        kernel,
        ridge: d.ridge,
        seed: cfg.run.seed,
        snapshot_every: d.snapshot_every,
    }
}

fn classifier(cfg: &RunConfig, kind: ClassifierKind, kernel: KernelSpec) -> ClassifierSpec {
    let c = &cfg.classifiers;
    match kind {
        ClassifierKind::Krr => ClassifierSpec::Krr {
            ridge: c.krr.ridge,
            kernel,
            regress_on_support_labels: c.krr.regress_on_support_labels,
        },
        ClassifierKind::Logreg => ClassifierSpec::Logreg {
            l2: c.logreg.l2,
            max_iter: c.logreg.max_iter,
        },
        ClassifierKind::Knn => ClassifierSpec::Knn { k: c.knn.k },
        ClassifierKind::Cart => ClassifierSpec::Cart {
            max_depth: c.cart.max_depth,
            min_leaf: c.cart.min_leaf,
        },
        ClassifierKind::Forest => ClassifierSpec::Forest {
            n_trees: c.forest.n_trees,
            feature_fraction: c.forest.feature_fraction,
            max_depth: c.forest.max_depth,
            min_leaf: c.forest.min_leaf,
            seed: cfg.run.seed,
        },
    }
}

fn start(cfg: &RunConfig, out: &Path, force: bool) -> Result<RunDir, Failure> {
    let mut dir = RunDir::create(out, force)?;
    // the snapshot leaves out the output location so relocated reruns match
    let mut snap = cfg.clone();
    snap.run.out = None;
    dir.write("config.toml", config::snapshot(&snap)?.as_bytes())?;
    Ok(dir)
}

pub fn cmd_distill(cfg: &RunConfig, out: &Path, force: bool) -> CmdResult {
    let (ds, _) = load_dataset(cfg)?;
    let (train, _) = split_dataset(cfg, &ds)?;
    let kernel = resolve_kernel(cfg, &train)?;
    let objective = Objective::from_kind(cfg.objective.kind, &cfg.objective.params(), &train)?;
    let dc = distill_config(cfg, objective, kernel);
    dc.validate(&train)?;

    let mut dir = start(cfg, out, force)?;
    let mut trace = DistillTrace::default();
    let outcome = distill_traced(&train, &dc, &mut trace);
    dir.write("trace.csv", trace.to_csv().as_bytes())?;
    let coreset = match outcome {
        Ok(s) => s,
        Err(e) => {
            dir.finish("distill")?;
            return Err(e.into());
        }
    };
    let final_loss = trace.last_loss();
    dir.write_with_sidecar("coreset", |p| export_coreset(&coreset, &train, &dc, final_loss, p))?;
    dir.finish("distill")?;
    let loss = final_loss.map_or("none".to_string(), |l| format!("{l:.6}"));
    println!(
        "distilled m={} objective={} final_loss={loss} out={}",
        dc.m,
        objective.kind(),
        out.display()
    );
    Ok(())
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path, force: bool) -> CmdResult {
    let (ds, name) = load_dataset(cfg)?;
    let (train, test) = split_dataset(cfg, &ds)?;
    let kernel = resolve_kernel(cfg, &train)?;
    let s = &cfg.sweep;
    let objectives = s
        .objectives
        .iter()
        .map(|&k| Objective::from_kind(k, &cfg.objective.params(), &train))
        .collect::<Result<Vec<_>, _>>()?;
    let plan = SweepPlan {
        dataset: name,
        objectives,
        sizes: s.sizes.clone(),
        classifiers: s.classifiers.iter().map(|&k| classifier(cfg, k, kernel)).collect(),
        seeds: s.seeds.clone().unwrap_or_else(|| vec![cfg.run.seed]),
        include_random_baseline: s.include_random_baseline,
        include_full_baseline: s.include_full_baseline,
        distill: distill_config(cfg, Objective::Mse, kernel),
        threshold: s.threshold,
        jobs: cfg.run.jobs,
        keep_coresets_at: s.project_at,
    };
    let mut dir = start(cfg, out, force)?;
    let output = sweep(&train, &test, &plan)?;
    dir.write("sweep.csv", output.result.to_csv()?.as_bytes())?;
    dir.write("sweep.json", output.result.to_json()?.as_bytes())?;
    if s.project_at.is_some() {
        let first_seed = plan.seeds[0];
        let coresets: Vec<(String, &SyntheticSet)> = output
            .coresets
            .iter()
            .filter(|c| c.seed == first_seed)
            .map(|c| (c.objective.clone(), &c.set))
            .collect();
        let rows = projection_report(&ds, &coresets)?;
        dir.write("projection.csv", projection_csv(&rows).as_bytes())?;
    }
    dir.finish("sweep")?;
    let failed = output.result.failures().count();
    println!(
        "sweep rows={} failed={failed} out={}",
        output.result.rows.len(),
        out.display()
    );
    Ok(())
}

pub fn cmd_calibrate(cfg: &RunConfig, out: &Path, force: bool) -> CmdResult {
    let (ds, _) = load_dataset(cfg)?;
    let c = &cfg.calibrate;
    let settings = CalibrationSettings {
        m: c.m,
        epochs: c.epochs,
        validation_fraction: c.validation_fraction,
        ridge: cfg.distill.ridge,
        objective: cfg.objective.params(),
        jobs: cfg.run.jobs,
    };
    let mut dir = start(cfg, out, force)?;
    let result = calibrate_g_with(&ds, &c.grid_alpha, &c.grid_beta, cfg.run.seed, &settings)?;
    let text = serde_json::to_string_pretty(&result).map_err(|e| Failure::Lib(e.into()))?;
    dir.write("calibration.json", text.as_bytes())?;
    dir.finish("calibrate")?;
    println!(
        "calibrated alpha_g={} beta_g={} validation_auc={:.4} out={}",
        result.alpha_g,
        result.beta_g,
        result.auc,
        out.display()
    );
    Ok(())
}

pub fn cmd_project(cfg: &RunConfig, out: &Path, force: bool) -> CmdResult {
    let (ds, _) = load_dataset(cfg)?;
    let p = &cfg.project;
    let labels: Vec<String> = match &p.labels {
        Some(l) if l.len() != p.coresets.len() => {
            return Err(Failure::Config(format!(
                "{} labels for {} coresets",
                l.len(),
                p.coresets.len()
            )))
        }
        Some(l) => l.clone(),
        None => p
            .coresets
            .iter()
            .map(|c| c.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
            .collect(),
    };
    let mut sets = Vec::new();
    for path in &p.coresets {
        let mut file = read_coreset_csv(path)?;
        if file.set.x.ncols() != ds.n_features() {
            return Err(tabkip::Error::DimensionMismatch(format!(
                "{}: {} feature columns, dataset has {}",
                path.display(),
                file.set.x.ncols(),
                ds.n_features()
            ))
            .into());
        }
        // coresets are stored in original units
        if let Some(st) = ds.standardization() {
            file.set.x = st.apply(&file.set.x)?;
        }
        sets.push(file.set);
    }
    let pairs: Vec<(String, &SyntheticSet)> = labels.into_iter().zip(sets.iter()).collect();
    let rows = projection_report(&ds, &pairs)?;
    let mut dir = start(cfg, out, force)?;
    dir.write("projection.csv", projection_csv(&rows).as_bytes())?;
    dir.finish("project")?;
    println!("projected rows={} out={}", rows.len(), out.display());
    Ok(())
}

pub fn cmd_gen(cfg: &RunConfig, out: &Path, force: bool) -> CmdResult {
    let s = &cfg.data.synthetic;
    let ds = gen_synthetic(s.n, s.d, s.ir, s.separation, s.seed.unwrap_or(cfg.run.seed))?;
    let mut dir = start(cfg, out, force)?;
    dir.write_with_sidecar("data", |p| write_csv(&ds, p))?;
    dir.finish("gen")?;
    let (neg, pos) = ds.class_counts();
    println!("generated n={} positives={pos} negatives={neg} out={}", ds.n_rows(), out.display());
    Ok(())
}
