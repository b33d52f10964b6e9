use std::collections::BTreeMap;
use std::path::Path;

use neatboost::imaging::{describe_image, load_grayscale};
use neatboost::pipeline::{parse_label, CLASS_NAMES};
use neatboost::N_FEATURES;

use crate::error::{CliError, CliResult};
use crate::{Context, ExtractArgs};

fn read_labels(path: &Path) -> CliResult<BTreeMap<String, usize>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Data(format!("{}: missing column {name:?}", path.display())))
    };
    let (fc, lc) = (col("file")?, col("label")?);
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let file = rec.get(fc).unwrap_or("").trim().to_string();
        let label = parse_label(rec.get(lc).unwrap_or("").trim())?;
        out.insert(file, label);
    }
    Ok(out)
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "pgm"))
}

pub fn run(ctx: &Context, args: &ExtractArgs) -> CliResult<()> {
    let labels = read_labels(&args.labels)?;
    let dir = std::fs::read_dir(&args.images).map_err(|e| CliError::Data(format!("{}: {e}", args.images.display())))?;
    let mut files: Vec<String> = Vec::new();
    for entry in dir {
        let p = entry?.path();
        if p.is_file() && is_image(&p) {
            if let Some(name) = p.file_name().and_then(|n| n.to_str()) {
                files.push(name.to_string());
            }
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(format!(
            "no PGM or PNG images in {}",
            args.images.display()
        )));
    }

    let out_path = ctx.output("features.csv");
    let mut w = csv::Writer::from_path(&out_path)?;
    let mut header = vec!["path".to_string(), "id".to_string(), "label".to_string()];
    header.extend((1..=N_FEATURES).map(|j| format!("f{j:02}")));
    w.write_record(&header)?;
    let (mut ok, mut failed) = (0usize, 0usize);
    for name in &files {
        let Some(&label) = labels.get(name) else {
            log::warn!("skipping unlabeled image file={name}");
            failed += 1;
            continue;
        };
        let result = load_grayscale(args.images.join(name)).and_then(|img| describe_image(&img));
        match result {
            Ok((fv, _)) => {
                let id = Path::new(name).file_stem().and_then(|s| s.to_str()).unwrap_or(name);
                let mut rec = vec![name.clone(), id.to_string(), CLASS_NAMES[label].to_string()];
                rec.extend(fv.as_slice().iter().map(|v| v.to_string()));
                w.write_record(&rec)?;
                ok += 1;
            }
            Err(e) => {
                log::warn!("extraction failed file={name} error={e}");
                failed += 1;
            }
        }
    }
    w.flush()?;
    for name in labels.keys().filter(|k| files.binary_search(k).is_err()) {
        log::warn!("labeled file not found file={name}");
    }
    log::info!("extract done rows={ok} failed={failed} path={}", out_path.display());
    if ok == 0 {
        return Err(CliError::Data("no image could be processed".into()));
    }
    Ok(())
}
