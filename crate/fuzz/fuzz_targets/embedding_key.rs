#![no_main]

use cmxqe::embeddings::EmbeddingKey;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(key) = text.parse::<EmbeddingKey>() {
        assert_eq!(key.to_string(), text);
    }
});
