//! Plain EDF (no EDF+ annotation channels): a fixed 256-byte header, 256
//! header bytes per signal, then data records of little-endian `i16` samples.
//!
//! [`write_edf`] is the inverse of [`parse_edf`] and is used both by the
//! synthetic corpus generator and as the round-trip oracle in tests.

use std::io::Read;

use eegspect_core::recording::Recording;

const FIXED_HEADER: usize = 256;
const SIGNAL_HEADER: usize = 256;

#[derive(Debug, thiserror::Error)]
pub enum EdfError {
    #[error("file truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },

    #[error("header field {field:?} is not a number: {value:?}")]
    BadNumber { field: String, value: String },

    #[error("signal {label:?} has digital_max == digital_min")]
    FlatDigitalRange { label: String },

    #[error("invalid header: {0}")]
    Invalid(String),

    #[error(transparent)]
    Recording(#[from] eegspect_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalHeader {
    pub label: String,
    pub transducer: String,
    pub physical_dimension: String,
    pub physical_min: f64,
    pub physical_max: f64,
    pub digital_min: i32,
    pub digital_max: i32,
    pub prefilter: String,
    pub samples_per_record: usize,
}

impl SignalHeader {
    fn gain(&self) -> f64 {
        (self.physical_max - self.physical_min) / (self.digital_max - self.digital_min) as f64
    }

    pub fn to_physical(&self, digital: i16) -> f64 {
        self.physical_min + (digital as i32 - self.digital_min) as f64 * self.gain()
    }

    /// Nearest digital code, clamped to the declared digital range.
    pub fn to_digital(&self, physical: f64) -> i16 {
        let d = (physical - self.physical_min) / self.gain() + self.digital_min as f64;
        let d = d.round().clamp(self.digital_min as f64, self.digital_max as f64);
        d.clamp(i16::MIN as f64, i16::MAX as f64) as i16
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdfHeader {
    pub version: String,
    pub patient: String,
    pub recording: String,
    pub start_date: String,
    pub start_time: String,
    pub record_count: usize,
    /// Seconds per data record.
    pub record_duration: f64,
    pub signals: Vec<SignalHeader>,
}

impl EdfHeader {
    pub fn signal_count(&self) -> usize {
        self.signals.len()
    }

    pub fn header_bytes(&self) -> usize {
        FIXED_HEADER + SIGNAL_HEADER * self.signals.len()
    }

    pub fn record_bytes(&self) -> usize {
        2 * self.signals.iter().map(|s| s.samples_per_record).sum::<usize>()
    }

    /// Total size implied by the header.
    pub fn file_bytes(&self) -> usize {
        self.header_bytes() + self.record_count * self.record_bytes()
    }

    pub fn duration_s(&self) -> f64 {
        self.record_count as f64 * self.record_duration
    }

    pub fn fs(&self, signal: usize) -> f64 {
        self.signals[signal].samples_per_record as f64 / self.record_duration
    }
}

struct Fields<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Fields<'a> {
    fn text(&mut self, width: usize) -> String {
        let raw = &self.bytes[self.at..self.at + width];
        self.at += width;
        String::from_utf8_lossy(raw).trim().to_string()
    }

    fn number<T: std::str::FromStr>(&mut self, width: usize, field: &str) -> Result<T, EdfError> {
        let value = self.text(width);
        value.parse().map_err(|_| EdfError::BadNumber {
            field: field.to_string(),
            value,
        })
    }
}

fn need(bytes: &[u8], needed: usize) -> Result<(), EdfError> {
    if bytes.len() < needed {
        return Err(EdfError::Truncated {
            needed,
            available: bytes.len(),
        });
    }
    Ok(())
}

/// Decodes the fixed and per-signal headers. `bytes` needs to hold at least
/// the header itself; the data records are not inspected.
pub fn parse_header(bytes: &[u8]) -> Result<EdfHeader, EdfError> {
    need(bytes, FIXED_HEADER)?;
    let mut f = Fields { bytes, at: 0 };
    let version = f.text(8);
    let patient = f.text(80);
    let recording = f.text(80);
    let start_date = f.text(8);
    let start_time = f.text(8);
    let header_bytes: usize = f.number(8, "header bytes")?;
    f.text(44);
    let record_count: i64 = f.number(8, "number of data records")?;
    let record_duration: f64 = f.number(8, "data record duration")?;
    let ns: usize = f.number(4, "number of signals")?;
    if ns == 0 {
        return Err(EdfError::Invalid("no signals".into()));
    }
    if header_bytes != FIXED_HEADER + SIGNAL_HEADER * ns {
        return Err(EdfError::Invalid(format!(
            "header size {header_bytes} does not match {ns} signals"
        )));
    }
    if !(record_duration > 0.0) {
        return Err(EdfError::Invalid("record duration must be positive".into()));
    }
    need(bytes, header_bytes)?;

    // per-signal fields are stored field-major: all labels, then all
    // transducers, and so on
    let texts = |f: &mut Fields, width| (0..ns).map(|_| f.text(width)).collect::<Vec<_>>();
    let labels = texts(&mut f, 16);
    let transducers = texts(&mut f, 80);
    let dims = texts(&mut f, 8);
    let numbers = |f: &mut Fields, field: &str| -> Result<Vec<f64>, EdfError> {
        (0..ns).map(|_| f.number::<f64>(8, field)).collect()
    };
    let pmin = numbers(&mut f, "physical minimum")?;
    let pmax = numbers(&mut f, "physical maximum")?;
    let dmin = numbers(&mut f, "digital minimum")?;
    let dmax = numbers(&mut f, "digital maximum")?;
    let prefilters = texts(&mut f, 80);
    let spr = numbers(&mut f, "samples per record")?;

    let mut signals = Vec::with_capacity(ns);
    for i in 0..ns {
        let s = SignalHeader {
            label: labels[i].clone(),
            transducer: transducers[i].clone(),
            physical_dimension: dims[i].clone(),
            physical_min: pmin[i],
            physical_max: pmax[i],
            digital_min: dmin[i] as i32,
            digital_max: dmax[i] as i32,
            prefilter: prefilters[i].clone(),
            samples_per_record: spr[i] as usize,
        };
        if s.digital_max == s.digital_min {
            return Err(EdfError::FlatDigitalRange { label: s.label });
        }
        if s.samples_per_record == 0 {
            return Err(EdfError::Invalid(format!("signal {:?} has no samples per record", s.label)));
        }
        signals.push(s);
    }

    let mut header = EdfHeader {
        version,
        patient,
        recording,
        start_date,
        start_time,
        record_count: 0,
        record_duration,
        signals,
    };
    header.record_count = match record_count {
        // -1 marks a file whose writer never patched the count in
        -1 => (bytes.len().saturating_sub(header_bytes)) / header.record_bytes(),
        n if n >= 1 => n as usize,
        n => return Err(EdfError::Invalid(format!("record count {n}"))),
    };
    if header.record_count == 0 {
        return Err(EdfError::Invalid("no data records".into()));
    }
    Ok(header)
}

/// Reads only as much of `reader` as the header occupies. A record count of
/// -1 cannot be resolved this way and is rejected.
pub fn read_header(mut reader: impl Read) -> Result<EdfHeader, EdfError> {
    let mut fixed = vec![0u8; FIXED_HEADER];
    reader.read_exact(&mut fixed).map_err(|_| EdfError::Truncated {
        needed: FIXED_HEADER,
        available: 0,
    })?;
    let ns: usize = String::from_utf8_lossy(&fixed[252..256])
        .trim()
        .parse()
        .map_err(|_| EdfError::BadNumber {
            field: "number of signals".into(),
            value: String::from_utf8_lossy(&fixed[252..256]).into(),
        })?;
    let mut rest = vec![0u8; SIGNAL_HEADER * ns];
    reader.read_exact(&mut rest).map_err(|_| EdfError::Truncated {
        needed: FIXED_HEADER + rest.len(),
        available: FIXED_HEADER,
    })?;
    fixed.extend(rest);
    parse_header(&fixed)
}

/// Later repeats of a label get `-1`, `-2`, ... so channel names stay unique;
/// CHB-MIT files repeat `T8-P8` and use `-` for unused slots.
fn unique_labels(signals: &[SignalHeader]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(signals.len());
    for s in signals {
        let base = s.label.clone();
        let mut name = base.clone();
        let mut n = 0;
        while out.contains(&name) {
            n += 1;
            name = format!("{base}-{n}");
        }
        out.push(name);
    }
    out
}

/// Decodes a complete EDF byte stream into its header and a recording in
/// physical units. `source_id` names the recording.
pub fn parse_edf(bytes: &[u8], source_id: &str) -> Result<(EdfHeader, Recording), EdfError> {
    let header = parse_header(bytes)?;
    need(bytes, header.file_bytes())?;
    let spr = header.signals[0].samples_per_record;
    if header.signals.iter().any(|s| s.samples_per_record != spr) {
        return Err(EdfError::Invalid("signals have different sampling rates".into()));
    }
    let ns = header.signal_count();
    let mut samples: Vec<Vec<f64>> = (0..ns)
        .map(|_| Vec::with_capacity(spr * header.record_count))
        .collect();
    let data = &bytes[header.header_bytes()..header.file_bytes()];
    for record in data.chunks_exact(header.record_bytes()) {
        for (i, block) in record.chunks_exact(2 * spr).enumerate() {
            let s = &header.signals[i];
            samples[i].extend(
                block
                    .chunks_exact(2)
                    .map(|b| s.to_physical(i16::from_le_bytes([b[0], b[1]]))),
            );
        }
    }
    let recording = Recording::new(source_id, unique_labels(&header.signals), samples, header.fs(0))?;
    Ok((header, recording))
}

fn put(out: &mut Vec<u8>, value: &str, width: usize) {
    let mut field: Vec<u8> = value.bytes().filter(|b| b.is_ascii()).take(width).collect();
    field.resize(width, b' ');
    out.extend(field);
}

/// Shortest decimal that fits the 8-character numeric fields.
fn number_field(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 8 {
        return plain;
    }
    for decimals in (0..8).rev() {
        let s = format!("{v:.decimals$}");
        if s.len() <= 8 {
            return s;
        }
    }
    format!("{}", v.round() as i64)
}

/// Encodes `samples` (channel-major, physical units) under `header`. Sample
/// rows must hold exactly `record_count * samples_per_record` values; values
/// outside the physical range are clamped to the digital limits.
pub fn write_edf(header: &EdfHeader, samples: &[Vec<f64>]) -> Result<Vec<u8>, EdfError> {
    if samples.len() != header.signal_count() {
        return Err(EdfError::Invalid(format!(
            "{} sample rows for {} signals",
            samples.len(),
            header.signal_count()
        )));
    }
    for (s, row) in header.signals.iter().zip(samples) {
        if row.len() != s.samples_per_record * header.record_count {
            return Err(EdfError::Invalid(format!("signal {:?} has the wrong sample count", s.label)));
        }
        if s.digital_max == s.digital_min {
            return Err(EdfError::FlatDigitalRange { label: s.label.clone() });
        }
    }
    let mut out = Vec::with_capacity(header.file_bytes());
    put(&mut out, &header.version, 8);
    put(&mut out, &header.patient, 80);
    put(&mut out, &header.recording, 80);
    put(&mut out, &header.start_date, 8);
    put(&mut out, &header.start_time, 8);
    put(&mut out, &header.header_bytes().to_string(), 8);
    put(&mut out, "", 44);
    put(&mut out, &header.record_count.to_string(), 8);
    put(&mut out, &number_field(header.record_duration), 8);
    put(&mut out, &header.signal_count().to_string(), 4);
    let sig = &header.signals;
    sig.iter().for_each(|s| put(&mut out, &s.label, 16));
    sig.iter().for_each(|s| put(&mut out, &s.transducer, 80));
    sig.iter().for_each(|s| put(&mut out, &s.physical_dimension, 8));
    sig.iter().for_each(|s| put(&mut out, &number_field(s.physical_min), 8));
    sig.iter().for_each(|s| put(&mut out, &number_field(s.physical_max), 8));
    sig.iter().for_each(|s| put(&mut out, &s.digital_min.to_string(), 8));
    sig.iter().for_each(|s| put(&mut out, &s.digital_max.to_string(), 8));
    sig.iter().for_each(|s| put(&mut out, &s.prefilter, 80));
    sig.iter().for_each(|s| put(&mut out, &s.samples_per_record.to_string(), 8));
    sig.iter().for_each(|_| put(&mut out, "", 32));
    for r in 0..header.record_count {
        for (s, row) in sig.iter().zip(samples) {
            let spr = s.samples_per_record;
            for &v in &row[r * spr..(r + 1) * spr] {
                out.extend(s.to_digital(v).to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// A 16-bit signal header with a symmetric physical range in microvolts.
pub fn microvolt_signal(label: &str, samples_per_record: usize, physical_range: f64) -> SignalHeader {
    SignalHeader {
        label: label.to_string(),
        transducer: String::new(),
        physical_dimension: "uV".into(),
        physical_min: -physical_range,
        physical_max: physical_range,
        digital_min: i16::MIN as i32,
        digital_max: i16::MAX as i32,
        prefilter: String::new(),
        samples_per_record,
    }
}
