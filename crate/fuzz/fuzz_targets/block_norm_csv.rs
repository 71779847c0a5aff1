#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxlab_core::spectral::container::{block_norms_from_csv, block_norms_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = block_norms_from_csv(text) {
        let again = block_norms_to_csv(&rows).unwrap();
        assert_eq!(block_norms_from_csv(&again).unwrap(), rows);
    }
});
