#![no_main]

use libfuzzer_sys::fuzz_target;
use lrk_core::linops::{parse_dense_matrix, write_dense_matrix};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_dense_matrix(text) {
        let mut buf = Vec::new();
        write_dense_matrix(&mut buf, &m).unwrap();
        let back = parse_dense_matrix(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.shape(), m.shape());
        // NaN survives the trip but never compares equal
        assert!(back.iter().zip(m.iter()).all(|(a, b)| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())));
    }
});
