use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Channel, LabeledSignal, Provenance, Result, SignalError, TimeSeries};

pub const META_FORMAT_VERSION: u32 = 1;

/// JSON sidecar stored next to each signal CSV.
#[derive(Debug, Serialize, Deserialize)]
struct SignalMeta {
    format_version: u32,
    dt: f64,
    #[serde(default)]
    t0: f64,
    label: String,
    channels: Vec<Channel>,
    provenance: Provenance,
}

fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// Writes `<name>.csv` (header `t,<ch0>,...` plus one decimal row per sample)
/// and the `<name>.meta.json` sidecar.
pub fn write_signal(labeled: &LabeledSignal, path: &Path) -> Result<()> {
    let series = &labeled.signal;
    let mut csv = String::new();
    csv.push('t');
    for ch in series.channels() {
        csv.push(',');
        csv.push_str(&ch.name);
    }
    csv.push('\n');
    let mut row = String::new();
    for (k, t) in series.times().enumerate() {
        row.clear();
        let _ = write!(row, "{t:.15e}");
        for c in 0..series.num_channels() {
            let _ = write!(row, ",{:.15e}", series.channel_data(c)[k]);
        }
        row.push('\n');
        csv.push_str(&row);
    }
    fs::write(path, csv).map_err(|e| SignalError::io(path, e))?;

    let meta = SignalMeta {
        format_version: META_FORMAT_VERSION,
        dt: series.dt(),
        t0: series.t0(),
        label: labeled.label.clone(),
        channels: series.channels().to_vec(),
        provenance: labeled.provenance.clone(),
    };
    let json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    let mpath = meta_path(path);
    fs::write(&mpath, json).map_err(|e| SignalError::io(&mpath, e))?;
    Ok(())
}

/// Reads a signal CSV plus its metadata sidecar back into a `LabeledSignal`.
pub fn read_signal(path: &Path) -> Result<LabeledSignal> {
    let mpath = meta_path(path);
    if !mpath.exists() {
        return Err(SignalError::MissingMetadata(mpath));
    }
    let meta_text = fs::read_to_string(&mpath).map_err(|e| SignalError::io(&mpath, e))?;
    let meta: SignalMeta = serde_json::from_str(&meta_text).map_err(|e| SignalError::Format {
        path: mpath.clone(),
        message: e.to_string(),
    })?;
    if meta.format_version != META_FORMAT_VERSION {
        return Err(SignalError::Format {
            path: mpath,
            message: format!("unsupported format_version {}", meta.format_version),
        });
    }

    let text = fs::read_to_string(path).map_err(|e| SignalError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| SignalError::Parse {
        path: path.to_path_buf(),
        line: 1,
        field: "header".into(),
        message: "file is empty".into(),
    })?;
    let names: Vec<&str> = header.split(',').collect();
    if names.first() != Some(&"t") {
        return Err(SignalError::Parse {
            path: path.to_path_buf(),
            line: 1,
            field: "t".into(),
            message: "header must start with `t`".into(),
        });
    }
    if names.len() != meta.channels.len() + 1 {
        return Err(SignalError::Parse {
            path: path.to_path_buf(),
            line: 1,
            field: "header".into(),
            message: format!(
                "{} data columns but metadata declares {} channels",
                names.len() - 1,
                meta.channels.len()
            ),
        });
    }

    let ncols = names.len();
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); ncols - 1];
    for (line_idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        for col in 0..ncols {
            let field_name = names[col];
            let raw = fields.next().ok_or_else(|| SignalError::Parse {
                path: path.to_path_buf(),
                line: line_idx + 1,
                field: field_name.to_string(),
                message: "missing field".into(),
            })?;
            let value: f64 = raw.trim().parse().map_err(|_| SignalError::Parse {
                path: path.to_path_buf(),
                line: line_idx + 1,
                field: field_name.to_string(),
                message: format!("invalid number `{raw}`"),
            })?;
            if col > 0 {
                data[col - 1].push(value);
            }
        }
        if fields.next().is_some() {
            return Err(SignalError::Parse {
                path: path.to_path_buf(),
                line: line_idx + 1,
                field: "row".into(),
                message: format!("more than {ncols} fields"),
            });
        }
    }

    let series = TimeSeries::new(meta.dt, meta.t0, meta.channels, data)?;
    Ok(LabeledSignal::new(series, meta.label, meta.provenance))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_signal() -> LabeledSignal {
        let series = TimeSeries::new(
            0.01,
            0.0,
            vec![Channel::new("x", "m"), Channel::new("v", "m/s")],
            vec![
                vec![1.0, -0.25, 3.5e-7, 2.0 / 3.0],
                vec![0.0, 1.0, -2.0, 0.1234567890123],
            ],
        )
        .unwrap();
        LabeledSignal::new(series, "A", Provenance::synthetic("test", 7, 0.1))
    }

    #[test]
    fn roundtrip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.csv");
        let original = sample_signal();
        write_signal(&original, &path).unwrap();
        let back = read_signal(&path).unwrap();
        assert_eq!(back.label, original.label);
        assert_eq!(back.provenance, original.provenance);
        assert_eq!(back.signal.dt(), original.signal.dt());
        assert_eq!(back.signal.channels(), original.signal.channels());
        for c in 0..2 {
            for (a, b) in back
                .signal
                .channel_data(c)
                .iter()
                .zip(original.signal.channel_data(c))
            {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn missing_sidecar_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.csv");
        fs::write(&path, "t,x\n0,1\n").unwrap();
        let err = read_signal(&path).unwrap_err();
        assert!(matches!(err, SignalError::MissingMetadata(_)));
        assert!(err.to_string().contains("missing metadata"));
    }

    #[test]
    fn malformed_row_names_line_and_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.csv");
        write_signal(&sample_signal(), &path).unwrap();
        // corrupt one field on data line 3 (file line 4)
        let text = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let bad = lines[3].replace(',', ",oops", );
        lines[3] = bad;
        fs::write(&path, lines.join("\n")).unwrap();
        let err = read_signal(&path).unwrap_err();
        match &err {
            SignalError::Parse { line, .. } => assert_eq!(*line, 4),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
