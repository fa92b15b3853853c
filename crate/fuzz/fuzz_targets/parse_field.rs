#![no_main]

use inflatelab::TrigPolynomial;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = TrigPolynomial::parse_canonical(text) {
        let again = TrigPolynomial::parse_canonical(&f.to_canonical_string()).unwrap();
        assert_eq!(again.support_len(), f.support_len());
    }
});
