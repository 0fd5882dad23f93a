//! CHB-MIT `*-summary.txt` files: one block per EDF, opened by `File Name:`
//! and listing `Number of Seizures in File:` followed by start/end pairs.
//! Both `Seizure Start Time:` and the numbered `Seizure 2 Start Time:` forms
//! occur in the corpus.

use std::collections::BTreeMap;

use eegspect_core::recording::SeizureAnnotation;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SummaryError {
    #[error("line {line}: malformed number in {text:?}")]
    BadNumber { line: usize, text: String },

    #[error("{file}: declares {declared} seizures but lists {found}")]
    CountMismatch { file: String, declared: usize, found: usize },

    #[error("{file}: seizure ends at {end_s} s, not after its start at {start_s} s")]
    EndBeforeStart { file: String, start_s: u64, end_s: u64 },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

struct Block {
    file: String,
    declared: Option<usize>,
    open_start: Option<u64>,
    seizures: Vec<SeizureAnnotation>,
}

fn value_after(line: &str) -> &str {
    line.split_once(':').map_or("", |(_, v)| v.trim())
}

/// Integer seconds from `"2996 seconds"` or `"2996"`.
fn seconds(text: &str, line: usize) -> Result<u64, SummaryError> {
    let digits = text.trim().trim_end_matches("seconds").trim_end_matches("sec").trim();
    digits.parse().map_err(|_| SummaryError::BadNumber {
        line,
        text: text.to_string(),
    })
}

fn finish(block: Block, out: &mut BTreeMap<String, Vec<SeizureAnnotation>>) -> Result<(), SummaryError> {
    if let Some(start) = block.open_start {
        return Err(SummaryError::Malformed {
            line: 0,
            message: format!("{}: seizure starting at {start} s has no end", block.file),
        });
    }
    if let Some(declared) = block.declared {
        if declared != block.seizures.len() {
            return Err(SummaryError::CountMismatch {
                file: block.file,
                declared,
                found: block.seizures.len(),
            });
        }
    }
    out.insert(block.file, block.seizures);
    Ok(())
}

/// Seizure annotations keyed by EDF file name, one entry per block.
pub fn parse_summary(text: &str) -> Result<BTreeMap<String, Vec<SeizureAnnotation>>, SummaryError> {
    let mut out = BTreeMap::new();
    let mut block: Option<Block> = None;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.starts_with("File Name:") {
            if let Some(b) = block.take() {
                finish(b, &mut out)?;
            }
            let file = value_after(line).to_string();
            if file.is_empty() {
                return Err(SummaryError::Malformed {
                    line: n,
                    message: "empty file name".into(),
                });
            }
            block = Some(Block {
                file,
                declared: None,
                open_start: None,
                seizures: Vec::new(),
            });
            continue;
        }
        let Some(b) = block.as_mut() else { continue };
        if line.starts_with("Number of Seizures in File:") {
            let v = value_after(line);
            b.declared = Some(v.parse().map_err(|_| SummaryError::BadNumber {
                line: n,
                text: v.to_string(),
            })?);
        } else if line.starts_with("Seizure") && line.contains("Start Time:") {
            if b.open_start.is_some() {
                return Err(SummaryError::Malformed {
                    line: n,
                    message: "seizure start without a preceding end".into(),
                });
            }
            b.open_start = Some(seconds(value_after(line), n)?);
        } else if line.starts_with("Seizure") && line.contains("End Time:") {
            let end_s = seconds(value_after(line), n)?;
            let start_s = b.open_start.take().ok_or_else(|| SummaryError::Malformed {
                line: n,
                message: "seizure end without a start".into(),
            })?;
            if end_s <= start_s {
                return Err(SummaryError::EndBeforeStart {
                    file: b.file.clone(),
                    start_s,
                    end_s,
                });
            }
            b.seizures.push(SeizureAnnotation { start_s, end_s });
        }
    }
    if let Some(b) = block {
        finish(b, &mut out)?;
    }
    Ok(out)
}

/// Writes annotations in the summary grammar, files in the given order.
pub fn render_summary(fs: f64, channels: &[String], files: &[(String, Vec<SeizureAnnotation>)]) -> String {
    let mut s = format!("Data Sampling Rate: {fs} Hz\n*************************\n\n");
    s.push_str("Channels in EDF Files:\n**********************\n");
    for (i, c) in channels.iter().enumerate() {
        s.push_str(&format!("Channel {}: {c}\n", i + 1));
    }
    for (file, seizures) in files {
        s.push_str(&format!("\nFile Name: {file}\nNumber of Seizures in File: {}\n", seizures.len()));
        for (i, a) in seizures.iter().enumerate() {
            s.push_str(&format!("Seizure {} Start Time: {} seconds\n", i + 1, a.start_s));
            s.push_str(&format!("Seizure {} End Time: {} seconds\n", i + 1, a.end_s));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHB01: &str = "\
Data Sampling Rate: 256 Hz
*************************

File Name: chb01_01.edf
File Start Time: 11:42:54
File End Time: 12:42:54
Number of Seizures in File: 0

File Name: chb01_04.edf
File Start Time: 14:43:12
File End Time: 15:43:12
Number of Seizures in File: 2
Seizure 1 Start Time: 1679 seconds
Seizure 1 End Time: 1781 seconds
Seizure 2 Start Time: 3782 seconds
Seizure 2 End Time: 3898 seconds
";

    #[test]
    fn two_seizure_block() {
        let map = parse_summary(CHB01).unwrap();
        assert_eq!(map["chb01_01.edf"], vec![]);
        let durations: Vec<u64> = map["chb01_04.edf"].iter().map(|a| a.duration_s()).collect();
        assert_eq!(durations, [102, 116]);
    }

    #[test]
    fn unnumbered_form() {
        let text = "File Name: chb02_16.edf\nNumber of Seizures in File: 1\nSeizure Start Time: 130 seconds\nSeizure End Time: 212 seconds\n";
        assert_eq!(parse_summary(text).unwrap()["chb02_16.edf"], vec![SeizureAnnotation { start_s: 130, end_s: 212 }]);
    }

    #[test]
    fn count_mismatch() {
        let text = CHB01.replace("Number of Seizures in File: 2", "Number of Seizures in File: 1");
        assert!(matches!(parse_summary(&text), Err(SummaryError::CountMismatch { declared: 1, found: 2, .. })));
    }

    #[test]
    fn end_not_after_start() {
        let text = CHB01.replace("1781 seconds", "1679 seconds");
        assert!(matches!(parse_summary(&text), Err(SummaryError::EndBeforeStart { .. })));
    }

    #[test]
    fn malformed_number() {
        let text = CHB01.replace("3782 seconds", "37x2 seconds");
        assert!(matches!(parse_summary(&text), Err(SummaryError::BadNumber { line: 15, .. })));
    }

    #[test]
    fn render_round_trip() {
        let files = vec![
            ("a.edf".to_string(), vec![]),
            ("b.edf".to_string(), vec![SeizureAnnotation { start_s: 10, end_s: 20 }]),
        ];
        let text = render_summary(256.0, &["FP1-F7".into()], &files);
        let map = parse_summary(&text).unwrap();
        assert_eq!(map.len(), 2);
        assert_eq!(map["b.edf"], files[1].1);
    }
}
