use eegspect::edf::{microvolt_signal, parse_edf, parse_header, write_edf, EdfHeader, SignalHeader};
use proptest::prelude::*;

fn header(signals: Vec<SignalHeader>, records: usize, record_duration: f64) -> EdfHeader {
    EdfHeader {
        version: "0".into(),
        patient: "P".into(),
        recording: "R".into(),
        start_date: "01.01.00".into(),
        start_time: "00.00.00".into(),
        record_count: records,
        record_duration,
        signals,
    }
}

fn case() -> impl Strategy<Value = (EdfHeader, Vec<Vec<f64>>)> {
    // physical limits are stored in 8-character text fields, so keep them integral
    (1usize..5, 1usize..40, 1usize..5, 10u32..5000).prop_flat_map(|(ns, spr, records, range)| {
        let range = range as f64;
        let n = spr * records;
        prop::collection::vec(prop::collection::vec(-range..range, n), ns).prop_map(move |samples| {
            let signals = (0..ns).map(|i| microvolt_signal(&format!("S{i}"), spr, range)).collect();
            (header(signals, records, 1.0), samples)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_within_one_step((h, samples) in case()) {
        let bytes = write_edf(&h, &samples).unwrap();
        prop_assert_eq!(bytes.len(), h.file_bytes());
        let (parsed, rec) = parse_edf(&bytes, "x").unwrap();
        prop_assert_eq!(&parsed, &h);
        for (s, (orig, back)) in h.signals.iter().zip(samples.iter().zip(rec.samples())) {
            let step = (s.physical_max - s.physical_min) / (s.digital_max - s.digital_min) as f64;
            for (a, b) in orig.iter().zip(back) {
                prop_assert!((a - b).abs() <= step / 2.0 + 1e-9, "{a} vs {b}");
            }
        }
        // decoding is a fixed point after one quantization
        prop_assert_eq!(write_edf(&h, rec.samples()).unwrap(), bytes);
    }

    #[test]
    fn scaling_is_monotone(range in 1.0f64..1e4, a in any::<i16>(), b in any::<i16>()) {
        let s = microvolt_signal("S", 1, range);
        if a < b {
            prop_assert!(s.to_physical(a) < s.to_physical(b));
        }
        prop_assert_eq!(s.to_digital(s.to_physical(a)), a);
    }
}

#[test]
fn scaling_endpoints() {
    let s = microvolt_signal("S", 1, 100.0);
    assert_eq!(s.to_physical(i16::MIN), -100.0);
    assert_eq!(s.to_physical(i16::MAX), 100.0);
    assert_eq!(s.to_digital(1e9), i16::MAX);
    assert_eq!(s.to_digital(-1e9), i16::MIN);
}

#[test]
fn header_parses_alone() {
    let h = header(vec![microvolt_signal("A", 4, 10.0)], 3, 0.5);
    let bytes = write_edf(&h, &[vec![0.0; 12]]).unwrap();
    let parsed = parse_header(&bytes).unwrap();
    assert_eq!(parsed.duration_s(), 1.5);
    assert_eq!(parsed.fs(0), 8.0);
}
