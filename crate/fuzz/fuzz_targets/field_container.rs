#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxlab_core::spectral::container::{decode_field, encode_field};

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = decode_field(data) {
        assert_eq!(encode_field(&field), data);
    }
});
