#![no_main]

use cmxqe::embeddings::{decode_jsonl, encode_jsonl};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for dim in [1, 2, 3, 768] {
        if let Ok(store) = decode_jsonl(text, dim) {
            let again = decode_jsonl(&encode_jsonl(&store), dim).expect("re-encoded JSONL decodes");
            assert_eq!(again.len(), store.len());
        }
    }
});
