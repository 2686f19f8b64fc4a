//! Windowing: overlapping segmentation of a multi-rate trial and the
//! index pairing between modalities.

use myobench::dataset::{Modality, SignalStream, TrialRecord};
use myobench::window::{segment_trial, WindowSpec};

fn main() -> myobench::Result<()> {
    // A 2 s trial with 2 kHz EMG and 100 Hz ACC.
    let trial = TrialRecord {
        subject: 1,
        gesture: 3,
        position: Some(2),
        repetition: 1,
        streams: vec![
            SignalStream::new(Modality::Emg, 2000.0, vec![(0..4000).map(|i| i as f64).collect()]),
            SignalStream::new(Modality::Acc, 100.0, vec![(0..200).map(|i| i as f64).collect()]),
        ],
    };

    let spec = WindowSpec::default(); // 200 ms length, 100 ms increment
    println!(
        "window spec: {} ms length, {} ms increment",
        spec.length_ms, spec.increment_ms
    );
    let per_stream = segment_trial(&trial, &spec)?;
    for (stream, windows) in trial.streams.iter().zip(&per_stream) {
        println!(
            "\n{} at {} Hz: {} samples -> {} windows of {} samples (hop {})",
            stream.modality,
            stream.sample_rate_hz,
            stream.len(),
            windows.len(),
            spec.length_samples(stream.sample_rate_hz),
            spec.increment_samples(stream.sample_rate_hz),
        );
    }

    println!("\npairing by window index (start times):");
    for (we, wa) in per_stream[0].iter().zip(&per_stream[1]).take(5) {
        println!(
            "  window {:2}: emg {:.3} s  acc {:.3} s",
            we.index, we.start_time_s, wa.start_time_s
        );
    }

    // Shorter streams than one window are rejected.
    let short = SignalStream::new(Modality::Emg, 1000.0, vec![vec![0.0; 150]]);
    let err = myobench::window::segment_stream(&short, &spec, trial.key()).unwrap_err();
    println!("\n150 samples at 1 kHz: {err}");
    Ok(())
}
