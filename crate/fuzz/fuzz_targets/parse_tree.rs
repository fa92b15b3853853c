#![no_main]

use inflatelab::Tree;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(tree) = Tree::parse(text) {
        assert_eq!(Tree::parse(&tree.serialize()).unwrap(), tree);
    }
});
