// Fuzz target: PGM decoder.
//
// Run with:
//   cargo +nightly fuzz run load_pgm -- -max_len=4096
//
// Any input may be rejected with `Err`; none may panic.
#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = edgeforce::raster::load_pgm(data) {
        assert_eq!(img.pixels().len(), img.width() * img.height());
    }
});
