use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use mrdpi::denoise::{denoisers, shrink_decomposition, Denoiser, MrdpiConfig, MrdpiDenoiser};
use mrdpi::features::{extract_with, feature_sets, FeatureConfig, FeatureSetId, FeatureTable};
use mrdpi::grid::{run_grid, GridSpec};
use mrdpi::io::{
    import_csv, read_bundle, read_dataset, read_decomposition, synth_dataset, write_bundle, write_dataset,
    write_decomposition, DecomposedSignal, SynthSpec, Tags,
};
use mrdpi::learn::{cross_validate, fit, ClassifierKind, ClassifierSpec, CvPlan, FittedModel};
use mrdpi::lifting::inverse;
use mrdpi::metrics::{
    confusion, macro_metrics, masked_powers, rms_energy_map, snr_db_capped, snr_vs_reference, SnrResult, SNR_CAP_DB,
};
use mrdpi::report::heat_map_svg;
use mrdpi::signal::{LabeledDataset, Record, Signal};
use mrdpi::threshold::ThresholdScheme;

use crate::{ClassifierArgs, Command};

/// Writes to `path`, or to stdout when there is none.
fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_json(path: Option<&Path>, v: &serde_json::Value) -> Result<()> {
    emit(path, |w| {
        writeln!(w, "{}", serde_json::to_string_pretty(v)?)?;
        Ok(())
    })
}

fn read(p: &Path) -> Result<Signal> {
    read_bundle(p).with_context(|| format!("reading {}", p.display()))
}

fn bundle_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "bnd"))
        .collect();
    v.sort();
    if v.is_empty() {
        return Err(mrdpi::Error::NoData).with_context(|| format!("no bundles in {}", dir.display()));
    }
    Ok(v)
}

/// Applies `den` to one bundle, or to every bundle of a directory keeping
/// file names.
fn denoise_path(den: &dyn Denoiser, input: &Path, out: &Path) -> Result<()> {
    if input.is_dir() {
        fs::create_dir_all(out)?;
        for p in bundle_files(input)? {
            let s = read(&p)?;
            write_bundle(&den.denoise(&s)?, out.join(p.file_name().unwrap()))?;
        }
    } else {
        write_bundle(&den.denoise(&read(input)?)?, out)?;
    }
    Ok(())
}

fn load_labeled(input: &Path) -> Result<LabeledDataset> {
    if input.is_dir() {
        Ok(read_dataset(input).with_context(|| format!("reading dataset {}", input.display()))?.0)
    } else {
        Ok(LabeledDataset::new(vec![Record::from_tagged(read(input)?)?])?)
    }
}

fn load_table(path: &Path) -> Result<FeatureTable> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(FeatureTable::read_csv(BufReader::new(f))?)
}

fn classifier_spec(name: &str, p: &ClassifierArgs) -> Result<ClassifierSpec> {
    let kind: ClassifierKind = name.parse()?;
    let spec = ClassifierSpec {
        knn_k: p.k,
        rf_trees: p.rf_trees,
        rf_max_depth: p.rf_max_depth,
        lda_ridge: p.ridge,
        rng_seed: p.seed,
        ..ClassifierSpec::new(kind)
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_range(s: &str, len: usize) -> Result<Vec<bool>> {
    let (a, b) = s.split_once(':').context("active range must be START:END")?;
    let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
    if a >= b || b > len {
        return Err(mrdpi::Error::InvalidConfig(format!("active range {a}:{b} outside 0:{len}")).into());
    }
    Ok((0..len).map(|t| (a..b).contains(&t)).collect())
}

fn snr_json(r: &SnrResult) -> serde_json::Value {
    json!({
        "snr_db": r.snr_db,
        "p_signal": r.p_signal,
        "p_noise": r.p_noise,
        "capped": r.snr_db >= SNR_CAP_DB,
    })
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth { out, seed, channels, classes, trials, duration, fs, snr_db, noise_sigma, rest } => {
            let spec = SynthSpec {
                fs,
                duration_s: duration,
                channels,
                n_classes: classes,
                trials,
                noise_sigma: noise_sigma.unwrap_or(0.0),
                target_snr_db: if noise_sigma.is_some() { None } else { Some(snr_db) },
                include_rest: rest,
                rng_seed: seed,
                ..SynthSpec::default()
            };
            let d = synth_dataset(&spec)?;
            write_dataset(&out, &d.noisy, Some(&d.clean))?;
        }
        Command::Import { csv, fs, out, subject, trial, class_label } => {
            let s = import_csv(&csv, fs, Tags { subject_id: subject, trial_id: trial, class_label })?;
            write_bundle(&s, &out)?;
        }
        Command::Decompose { input, out, srl, lifting } => {
            let den =
                MrdpiDenoiser::new(MrdpiConfig { lifting: lifting.config(srl), scheme: ThresholdScheme::new("none") })?;
            let s = read(&input)?;
            let (_, decomps) = den.decompose(&s)?;
            write_decomposition(&DecomposedSignal::new(&s, decomps), &out)?;
        }
        Command::Reconstruct { input, out, tes, shrink, sigma } => {
            let mut d = read_decomposition(&input)?;
            let scheme = ThresholdScheme { kind: tes, shrink, sigma };
            let samples = d
                .channels
                .iter_mut()
                .map(|c| {
                    shrink_decomposition(c, &scheme)?;
                    inverse(c)
                })
                .collect::<mrdpi::Result<Vec<_>>>()?;
            write_bundle(&d.to_signal(samples), &out)?;
        }
        Command::Denoise { input, out, srl, lifting, scheme } => {
            let den = MrdpiDenoiser::new(MrdpiConfig { lifting: lifting.config(srl), scheme: scheme.scheme() })?;
            denoise_path(&den, &input, &out)?;
        }
        Command::Baseline { family, input, out, levels, tes, shrink, sigma } => {
            let cfg = MrdpiConfig {
                lifting: mrdpi::lifting::LiftingConfig { levels, ..Default::default() },
                scheme: ThresholdScheme { kind: tes, shrink, sigma },
            };
            let den = denoisers().create(&family, &cfg)?;
            denoise_path(&*den, &input, &out)?;
        }
        Command::Features { input, set, out, window, deadzone } => {
            let set: FeatureSetId = set.parse()?;
            let fx = feature_sets().create(&set.to_string(), &FeatureConfig { td4_deadzone: deadzone })?;
            let table = extract_with(&load_labeled(&input)?, &*fx, &window.spec()?)?;
            emit(out.as_deref(), |w| Ok(table.write_csv(w)?))?;
        }
        Command::Train { features, classifier, out, params } => {
            let model = fit(&classifier_spec(&classifier, &params)?, &load_table(&features)?)?;
            fs::write(&out, model.to_json()?)?;
        }
        Command::Eval { features, model, cv, classifier, folds, params, out, confusion: cm_path } => {
            let table = load_table(&features)?;
            let (cm, metrics) = if cv {
                let Some(name) = classifier else { bail!("--cv needs --classifier") };
                let spec = classifier_spec(&name, &params)?;
                let report = cross_validate(&spec, &table, &CvPlan::grouped(&table, folds)?)?;
                (report.confusion, report.metrics)
            } else {
                let path = model.context("--model is required without --cv")?;
                let m = FittedModel::from_json(&fs::read_to_string(&path)?)?;
                let pred = m.predict(&table.rows)?;
                let cm = confusion(&table.labels, &pred, &m.classes)?;
                let metrics = macro_metrics(&cm, 1.0)?;
                (cm, metrics)
            };
            if let Some(p) = cm_path {
                emit(Some(&p), |w| Ok(cm.write_csv(w)?))?;
            }
            emit_json(out.as_deref(), &json!({ "rows": table.len(), "metrics": metrics }))?;
        }
        Command::Grid { data, out, features, classifiers, tes, srl, folds, deadzone, lifting, window, params } => {
            let features = features.iter().map(|s| s.parse()).collect::<mrdpi::Result<Vec<FeatureSetId>>>()?;
            let classifiers = classifiers.iter().map(|c| classifier_spec(c, &params)).collect::<Result<Vec<_>>>()?;
            let spec = GridSpec {
                lifting: lifting.config(1),
                schemes: tes.iter().map(|t| ThresholdScheme::new(t)).collect(),
                levels: srl,
                window: window.spec()?,
                feature_config: FeatureConfig { td4_deadzone: deadzone },
                folds,
                ..GridSpec::new(features, classifiers)
            };
            let (dataset, _) = read_dataset(&data).with_context(|| format!("reading dataset {}", data.display()))?;
            let report = run_grid(&dataset, &spec)?;
            emit(out.as_deref(), |w| Ok(report.write_csv(w)?))?;
        }
        Command::Snr { input, reference, active, out } => {
            let s = read(&input)?;
            let r = match (reference, active) {
                (Some(r), _) => snr_vs_reference(&read(&r)?, &s)?,
                (None, Some(a)) => {
                    let (ps, pn) = masked_powers(&s, &parse_range(&a, s.len())?)?;
                    snr_db_capped(ps, pn)
                }
                (None, None) => bail!("either --reference or --active is required"),
            };
            emit_json(out.as_deref(), &snr_json(&r))?;
        }
        Command::Energymap { input, out, svg, window } => {
            let s: Signal = read(&input)?;
            let map = rms_energy_map(&s, &window.spec()?)?;
            emit(out.as_deref(), |w| Ok(map.write_csv(w)?))?;
            if let Some(p) = svg {
                fs::write(p, heat_map_svg(&map))?;
            }
        }
    }
    Ok(())
}
