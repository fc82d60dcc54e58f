#![no_main]

use cmxqe::nn::Checkpoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(checkpoint) = Checkpoint::decode(data, None) {
        assert_eq!(checkpoint.encode(), data);
    }
});
