use copgauss::evaluate::ks_two_sample;
use copgauss::DataMatrix;
use copgauss_harness::experiments::{run_fig1, run_fig2, run_synth, synthetic_blobs, sup_gap};
use copgauss_harness::io::{read_matrix_csv, write_matrix_csv};
use copgauss_harness::HarnessError;

#[test]
fn csv_round_trip_is_exact() {
    let m = DataMatrix::from_rows(&[
        vec![0.1, -1e-7, 1.0 / 3.0],
        vec![1e20, f64::MIN_POSITIVE, -0.0],
        vec![2.5, 12345.678, -7.0],
    ])
    .unwrap();
    let header = vec!["a".to_string(), "b".into(), "c".into()];
    let mut buf = Vec::new();
    write_matrix_csv(&mut buf, &header, &m).unwrap();
    let (h, back) = read_matrix_csv(buf.as_slice(), "mem").unwrap();
    assert_eq!(h, header);
    for c in 0..3 {
        for r in 0..3 {
            assert_eq!(back.get(r, c).to_bits(), m.get(r, c).to_bits());
        }
    }
}

#[test]
fn csv_errors_name_the_cell() {
    let text = "x1,x2\n1,2\n3,abc\n";
    let err = read_matrix_csv(text.as_bytes(), "in.csv").unwrap_err();
    assert!(matches!(err, HarnessError::Csv { .. }));
    let msg = err.to_string();
    assert!(msg.contains("in.csv") && msg.contains("abc") && msg.contains("x2"), "{msg}");
    assert!(read_matrix_csv("x1\n1\nNaN\n".as_bytes(), "n").is_err());
}

#[test]
fn fig1_diagonal_endpoints_and_gap() {
    let pts = run_fig1(500, 3, 51).unwrap();
    assert_eq!(pts.len(), 51);
    let (first, last) = (&pts[0], &pts[50]);
    assert_eq!((first.u, first.empirical, first.truth), (0.0, 0.0, 0.0));
    assert_eq!((last.u, last.empirical, last.truth), (1.0, 1.0, 1.0));
    // diagonal lies between the independence and comonotone bounds
    for p in &pts {
        assert!(p.truth >= p.u * p.u - 1e-12 && p.truth <= p.u + 1e-12);
    }
    assert!(sup_gap(&pts) < 0.1);
}

#[test]
fn fig2_round_trip_is_exact() {
    let r = run_fig2(300, 4).unwrap();
    assert_eq!(r.roundtrip_max_abs_error, 0.0);
    assert!(r.grid_exact);
    assert_eq!(r.synthesized.nrows(), 300);
}

#[test]
fn synthesized_pixels_follow_training_marginals() {
    let train = synthetic_blobs(200, 8, 8, 5).unwrap();
    let out = run_synth(&train, 200, 6).unwrap();
    assert_eq!((out.len(), out.height(), out.width()), (200, 8, 8));
    assert!(out.frames().iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    let (a, b) = (train.to_data_matrix().unwrap(), out.to_data_matrix().unwrap());
    for px in 0..64 {
        let d = ks_two_sample(b.column(px), a.column(px));
        assert!(d <= 0.2, "pixel {px}: KS {d}");
    }
    let again = run_synth(&train, 200, 6).unwrap();
    assert_eq!(again.frames(), out.frames());
}
