#![no_main]

use edgeforce::raster::{load_pgm, save_pgm};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Whatever decodes must survive encode -> decode unchanged.
    if let Ok(img) = load_pgm(data) {
        let again = load_pgm(&save_pgm(&img)).expect("re-encoded image decodes");
        assert_eq!(again, img);
    }
});
