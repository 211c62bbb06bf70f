use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::{Curve, GameId, HittingRecord, SweepResult};
use crate::error::{Error, Result};

pub const CURVE_HEADER: [&str; 5] = [
    "sweep_id",
    "game_id",
    "t",
    "mean_potential",
    "std_potential",
];
pub const HITTING_HEADER: [&str; 3] = ["sweep_id", "game_id", "hitting_t"];

/// `runs/sweep.csv` -> `runs/sweep.hitting.csv`.
pub fn hitting_path(path: &Path) -> PathBuf {
    sibling(path, "hitting.csv")
}

/// `runs/sweep.csv` -> `runs/sweep.meta.json`.
pub fn metadata_path(path: &Path) -> PathBuf {
    sibling(path, "meta.json")
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or_else(|| "experiment".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the curve CSV, the sibling hitting-time CSV and the metadata JSON.
pub fn export_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    out.write_record(CURVE_HEADER)?;
    for c in &result.curves {
        let gid = c.game_id.to_string();
        for ((t, m), s) in c.times.iter().zip(&c.mean).zip(&c.std) {
            out.write_record([
                c.sweep_id.as_str(),
                &gid,
                &t.to_string(),
                &float(*m),
                &float(*s),
            ])?;
        }
    }
    out.flush()?;

    let mut out = csv::Writer::from_writer(BufWriter::new(File::create(hitting_path(path))?));
    out.write_record(HITTING_HEADER)?;
    for h in &result.hitting {
        let t = h.hitting_t.map(|t| t.to_string()).unwrap_or_default();
        out.write_record([h.sweep_id.as_str(), &h.game_id.to_string(), &t])?;
    }
    out.flush()?;

    #[derive(serde::Serialize)]
    struct Meta<'a> {
        horizons: &'a BTreeMap<String, u64>,
        metadata: &'a BTreeMap<String, String>,
    }
    let meta = Meta {
        horizons: &result.horizons,
        metadata: &result.metadata,
    };
    std::fs::write(metadata_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct CurveRow {
    pub sweep_id: String,
    pub game_id: String,
    pub t: u64,
    pub mean_potential: f64,
    pub std_potential: f64,
}

fn check_header(reader: &mut csv::Reader<File>, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Format(format!(
            "expected header {expected:?}, got {header:?}"
        )));
    }
    Ok(())
}

pub fn read_curves_csv(path: impl AsRef<Path>) -> Result<Vec<CurveRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    check_header(&mut reader, &CURVE_HEADER)?;
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn read_hitting_csv(path: impl AsRef<Path>) -> Result<Vec<HittingRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    check_header(&mut reader, &HITTING_HEADER)?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let field = |i: usize| {
            rec.get(i)
                .ok_or_else(|| Error::Format("short hitting row".into()))
        };
        let t = field(2)?;
        out.push(HittingRecord {
            sweep_id: field(0)?.to_string(),
            game_id: field(1)?.parse()?,
            hitting_t: if t.is_empty() {
                None
            } else {
                Some(
                    t.parse()
                        .map_err(|_| Error::Format(format!("bad hitting_t {t:?}")))?,
                )
            },
        });
    }
    Ok(out)
}

/// Rebuilds a result from the files written by [`export_csv`]. The metadata
/// file is optional.
pub fn read_sweep_result(path: impl AsRef<Path>) -> Result<SweepResult> {
    let path = path.as_ref();
    let mut result = SweepResult::default();
    for row in read_curves_csv(path)? {
        let game_id: GameId = row.game_id.parse()?;
        let same = result
            .curves
            .last()
            .is_some_and(|c| c.sweep_id == row.sweep_id && c.game_id == game_id);
        if !same {
            result.curves.push(Curve {
                sweep_id: row.sweep_id.clone(),
                game_id,
                times: Vec::new(),
                mean: Vec::new(),
                std: Vec::new(),
            });
        }
        let c = result.curves.last_mut().expect("just pushed");
        c.times.push(row.t);
        c.mean.push(row.mean_potential);
        c.std.push(row.std_potential);
    }
    let hits = hitting_path(path);
    if hits.exists() {
        result.hitting = read_hitting_csv(hits)?;
    }
    let meta = metadata_path(path);
    if meta.exists() {
        #[derive(serde::Deserialize)]
        struct Meta {
            horizons: BTreeMap<String, u64>,
            metadata: BTreeMap<String, String>,
        }
        let m: Meta = serde_json::from_str(&std::fs::read_to_string(meta)?)?;
        result.horizons = m.horizons;
        result.metadata = m.metadata;
    }
    Ok(result)
}
