#![no_main]

use cmxqe::dataset::{parse_hinge_str, validate_dataset, DataFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(parsed) = parse_hinge_str(text, DataFormat::Json) {
        let _ = validate_dataset(&parsed);
    }
});
