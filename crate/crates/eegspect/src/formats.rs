//! On-disk formats owned by the pipeline: the binary `EEGT` tensor records,
//! and the CSV/JSON tables written alongside them.
//!
//! Tensor record layout (all integers little-endian):
//!
//! ```text
//! "EEGT" | version u16 | kind u8 | rank u8 | dims u32 × rank | label u8
//!        | provenance: u32 byte length + UTF-8 "source_id\tstart_s\twindow_s"
//!        | payload f64 × product(dims), row-major
//! ```
//!
//! A dataset file is a `u64` record count followed by that many records.

use std::io::{self, Read, Write};

use eegspect_core::evaluation::{MetricsReport, RankedRow, RocCurve};
use eegspect_core::representation::{FeatureTensor, Provenance, RepresentationKind};
use eegspect_core::stats::{BatteryReport, PairwiseMatrix};
use eegspect_core::windowing::{Label, SegmentationPlan};
use serde::Serialize;

pub const MAGIC: &[u8; 4] = b"EEGT";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported tensor format version {0}")]
    Version(u16),

    #[error("malformed record: {0}")]
    Malformed(String),

    #[error(transparent)]
    Core(#[from] eegspect_core::Error),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn encode_provenance(p: &Provenance) -> String {
    format!("{}\t{}\t{}", p.source_id, p.start_s, p.window_s)
}

fn decode_provenance(s: &str) -> Result<Provenance, FormatError> {
    let mut parts = s.rsplitn(3, '\t');
    let (Some(window_s), Some(start_s), Some(source_id)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(FormatError::Malformed(format!("provenance {s:?}")));
    };
    let num = |v: &str| FormatError::Malformed(format!("provenance number {v:?}"));
    Ok(Provenance {
        source_id: source_id.to_string(),
        start_s: start_s.parse().map_err(|_| num(start_s))?,
        window_s: window_s.parse().map_err(|_| num(window_s))?,
    })
}

pub fn write_tensor<W: Write>(w: &mut W, t: &FeatureTensor) -> Result<(), FormatError> {
    let rank = u8::try_from(t.dims.len()).map_err(|_| FormatError::Malformed("rank above 255".into()))?;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&[t.kind.code(), rank])?;
    for &d in &t.dims {
        let d = u32::try_from(d).map_err(|_| FormatError::Malformed(format!("dimension {d} above u32")))?;
        w.write_all(&d.to_le_bytes())?;
    }
    w.write_all(&[t.label.as_u8()])?;
    let prov = encode_provenance(&t.provenance);
    w.write_all(&(prov.len() as u32).to_le_bytes())?;
    w.write_all(prov.as_bytes())?;
    let mut payload = Vec::with_capacity(t.data.len() * 8);
    for v in &t.data {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&payload)?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_tensor<R: Read>(r: &mut R) -> Result<FeatureTensor, FormatError> {
    let magic = read_array::<4, _>(r)?;
    if &magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = u16::from_le_bytes(read_array(r)?);
    if version != FORMAT_VERSION {
        return Err(FormatError::Version(version));
    }
    let [kind, rank] = read_array(r)?;
    let kind = RepresentationKind::from_code(kind)?;
    let dims = (0..rank)
        .map(|_| Ok(u32::from_le_bytes(read_array(r)?) as usize))
        .collect::<io::Result<Vec<_>>>()?;
    let [label] = read_array(r)?;
    let label = Label::from_u8(label)?;
    let prov_len = u32::from_le_bytes(read_array(r)?) as usize;
    let mut prov = vec![0u8; prov_len];
    r.read_exact(&mut prov)?;
    let prov = String::from_utf8(prov).map_err(|_| FormatError::Malformed("provenance is not UTF-8".into()))?;
    let provenance = decode_provenance(&prov)?;
    let n: usize = dims.iter().product();
    let mut payload = vec![0u8; n * 8];
    r.read_exact(&mut payload)?;
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(FeatureTensor::new(kind, dims, data, label, provenance)?)
}

pub fn write_dataset<'a, W, I>(w: &mut W, tensors: I) -> Result<(), FormatError>
where
    W: Write,
    I: ExactSizeIterator<Item = &'a FeatureTensor>,
{
    w.write_all(&(tensors.len() as u64).to_le_bytes())?;
    for t in tensors {
        write_tensor(w, t)?;
    }
    Ok(())
}

pub fn read_dataset<R: Read>(r: &mut R) -> Result<Vec<FeatureTensor>, FormatError> {
    let count = u64::from_le_bytes(read_array(r)?);
    let mut out = Vec::with_capacity(count.min(1 << 20) as usize);
    for _ in 0..count {
        out.push(read_tensor(r)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(FormatError::Malformed("trailing bytes after last record".into()));
    }
    Ok(out)
}

fn dims_text(dims: &[usize]) -> String {
    dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

/// `index,source_id,start_s,window_s,label,kind,dims`, one row per tensor.
pub fn write_tensor_manifest<'a, W, I>(w: W, tensors: I) -> Result<(), FormatError>
where
    W: Write,
    I: IntoIterator<Item = &'a FeatureTensor>,
{
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "source_id", "start_s", "window_s", "label", "kind", "dims"])?;
    for (i, t) in tensors.into_iter().enumerate() {
        let p = &t.provenance;
        out.write_record([
            i.to_string(),
            p.source_id.clone(),
            p.start_s.to_string(),
            p.window_s.to_string(),
            t.label.as_str().to_string(),
            t.kind.as_str().to_string(),
            dims_text(&t.dims),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `source_id,start_s,window_s,label`, plans written in the given order.
pub fn write_plan_csv<'a, W, I>(w: W, plans: I) -> Result<(), FormatError>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a SegmentationPlan)>,
{
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["source_id", "start_s", "window_s", "label"])?;
    for (source_id, plan) in plans {
        for p in &plan.windows {
            out.write_record([
                source_id,
                &p.start_s.to_string(),
                &plan.window_s.to_string(),
                p.label.as_str(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Fixed-precision rendering so outputs are stable across platforms.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.10}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub model: String,
    pub representation: RepresentationKind,
    pub window_s: u32,
    pub fold: usize,
    pub report: MetricsReport,
}

/// `model,representation,window_s,fold,accuracy,precision,sensitivity,specificity,f1`;
/// undefined metrics are written as `NA`.
pub fn write_metrics_csv<W: Write>(w: W, rows: &[MetricsRow]) -> Result<(), FormatError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "model",
        "representation",
        "window_s",
        "fold",
        "accuracy",
        "precision",
        "sensitivity",
        "specificity",
        "f1",
    ])?;
    for r in rows {
        let m = &r.report;
        out.write_record([
            r.model.clone(),
            r.representation.as_str().to_string(),
            r.window_s.to_string(),
            r.fold.to_string(),
            fmt_opt(m.accuracy),
            fmt_opt(m.precision),
            fmt_opt(m.sensitivity),
            fmt_opt(m.specificity),
            fmt_opt(m.f1),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `fpr,tpr,threshold`; the leading (0, 0) point has an infinite threshold.
pub fn write_roc_csv<W: Write>(w: W, curve: &RocCurve) -> Result<(), FormatError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["fpr", "tpr", "threshold"])?;
    for p in &curve.points {
        let threshold = if p.threshold.is_infinite() { "inf".to_string() } else { fmt_f64(p.threshold) };
        out.write_record([fmt_f64(p.fpr), fmt_f64(p.tpr), threshold])?;
    }
    out.flush()?;
    Ok(())
}

/// Ranking rows carry their model name as `model|representation|window_s`.
pub fn write_ranking_csv<W: Write>(w: W, rows: &[RankedRow]) -> Result<(), FormatError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rank", "model", "signal_type", "window_size", "auc"])?;
    for r in rows {
        let mut parts = r.name.split('|');
        let model = parts.next().unwrap_or_default();
        let signal = parts.next().unwrap_or_default();
        let window = parts.next().map(|w| format!("{w}s")).unwrap_or_default();
        out.write_record([r.rank.to_string(), model.into(), signal.into(), window, fmt_opt(r.value)])?;
    }
    out.flush()?;
    Ok(())
}

/// Square matrix with group names as both header row and first column;
/// the diagonal is written as `-`.
pub fn write_matrix_csv<W: Write>(w: W, m: &PairwiseMatrix) -> Result<(), FormatError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec![String::new()];
    header.extend(m.names.iter().cloned());
    out.write_record(&header)?;
    for i in 0..m.k() {
        let mut row = vec![m.names[i].clone()];
        for j in 0..m.k() {
            row.push(if i == j { "-".into() } else { format!("{:.6}", m.p(i, j)) });
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PairJson<'a> {
    a: &'a str,
    b: &'a str,
    p_adj: f64,
    significant: bool,
}

#[derive(Serialize)]
struct EntryJson<'a> {
    test: &'a str,
    grouping: &'a str,
    fixed: &'a str,
    statistic: f64,
    p: f64,
    df: usize,
    degenerate: bool,
    pairwise: Vec<PairJson<'a>>,
}

#[derive(Serialize)]
struct BatteryJson<'a> {
    alpha: f64,
    entries: Vec<EntryJson<'a>>,
}

pub fn battery_json(report: &BatteryReport) -> String {
    let doc = BatteryJson {
        alpha: report.alpha,
        entries: report
            .entries
            .iter()
            .map(|e| EntryJson {
                test: e.test,
                grouping: e.grouping.as_str(),
                fixed: &e.fixed,
                statistic: e.result.statistic,
                p: e.result.p_value,
                df: e.result.df,
                degenerate: e.result.degenerate,
                pairwise: e
                    .significant_pairs
                    .iter()
                    .map(|(a, b, p, s)| PairJson {
                        a,
                        b,
                        p_adj: *p,
                        significant: *s,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("battery serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor() -> FeatureTensor {
        FeatureTensor::new(
            RepresentationKind::WelchPsd,
            vec![2, 3],
            vec![0.0, -1.5, f64::MIN_POSITIVE, 1e300, 2.0, 3.25],
            Label::Seizure,
            Provenance {
                source_id: "chb01\t03".into(),
                start_s: 2996,
                window_s: 10,
            },
        )
        .unwrap()
    }

    #[test]
    fn tensor_round_trip() {
        let t = tensor();
        let mut buf = Vec::new();
        write_tensor(&mut buf, &t).unwrap();
        assert_eq!(&buf[..4], MAGIC);
        assert_eq!(read_tensor(&mut buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn dataset_round_trip() {
        let ts = vec![tensor(), tensor()];
        let mut buf = Vec::new();
        write_dataset(&mut buf, ts.iter()).unwrap();
        assert_eq!(read_dataset(&mut buf.as_slice()).unwrap(), ts);
        buf.push(0);
        assert!(read_dataset(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let mut buf = Vec::new();
        write_tensor(&mut buf, &tensor()).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_tensor(&mut bad.as_slice()), Err(FormatError::BadMagic(_))));
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(matches!(read_tensor(&mut bad.as_slice()), Err(FormatError::Version(9))));
        assert!(read_tensor(&mut &buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn matrix_layout() {
        let m = PairwiseMatrix {
            names: vec!["1s".into(), "2s".into()],
            statistic: vec![0.0, 1.0, -1.0, 0.0],
            p_raw: vec![1.0, 0.5, 0.5, 1.0],
            p_adjusted: vec![1.0; 4],
        };
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), ",1s,2s\n1s,-,1.000000\n2s,1.000000,-\n");
    }
}
