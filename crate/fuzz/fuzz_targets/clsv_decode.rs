#![no_main]

use cmxqe::embeddings::{clsv, EmbeddingStore};
use libfuzzer_sys::fuzz_target;

fn bits(records: &[(String, Vec<f32>)]) -> Vec<(&str, Vec<u32>)> {
    let mut out: Vec<_> =
        records.iter().map(|(k, v)| (k.as_str(), v.iter().map(|x| x.to_bits()).collect())).collect();
    out.sort();
    out
}

fuzz_target!(|data: &[u8]| {
    if let Ok(contents) = clsv::decode(data, None) {
        let canonical =
            clsv::encode(contents.dim, contents.records.iter().map(|(k, v)| (k.as_str(), v.as_slice())))
                .expect("decoded contents re-encode");
        assert_eq!(canonical.len(), data.len());
        let again = clsv::decode(&canonical, Some(contents.dim)).expect("canonical bytes decode");
        assert_eq!(bits(&again.records), bits(&contents.records));
    }
    if let Ok(store) = EmbeddingStore::from_clsv_bytes(data, 768) {
        let bytes = store.to_clsv_bytes().unwrap();
        let back = EmbeddingStore::from_clsv_bytes(&bytes, 768).unwrap();
        assert!(back.bitwise_eq(&store));
    }
});
