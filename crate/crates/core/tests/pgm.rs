use edgeforce::raster::{load_pgm, save_pgm};
use edgeforce::{Error, GrayImage};
use proptest::prelude::*;

fn arb_image() -> impl Strategy<Value = GrayImage> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), w * h).prop_map(move |px| GrayImage::new(w, h, px).unwrap())
    })
}

fn ascii(img: &GrayImage, maxval: u8) -> Vec<u8> {
    let mut s = format!("P2\n# generated\n{} {}\n{maxval}\n", img.width(), img.height());
    for row in img.pixels().chunks(img.width()) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s.into_bytes()
}

proptest! {
    #[test]
    fn binary_round_trip(img in arb_image()) {
        prop_assert_eq!(load_pgm(&save_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn ascii_matches_binary(img in arb_image()) {
        prop_assert_eq!(load_pgm(&ascii(&img, 255)).unwrap(), img);
    }

    #[test]
    fn never_panics(data in proptest::collection::vec(any::<u8>(), 0..256)) {
        let _ = load_pgm(&data);
    }

    #[test]
    fn never_panics_on_mangled_headers(img in arb_image(), cut in 0usize..64, byte in any::<u8>(), at in 0usize..64) {
        let mut data = save_pgm(&img);
        if at < data.len() {
            data[at] = byte;
        }
        data.truncate(data.len().saturating_sub(cut));
        let _ = load_pgm(&data);
    }

    #[test]
    fn truncated_payload_is_a_format_error(img in arb_image(), cut in 1usize..8) {
        let mut data = save_pgm(&img);
        let cut = cut.min(img.pixels().len());
        data.truncate(data.len() - cut);
        let is_format_error = matches!(load_pgm(&data), Err(Error::Format { .. }));
        prop_assert!(is_format_error);
    }
}

#[test]
fn samples_above_maxval_rejected() {
    let img = GrayImage::new(2, 1, vec![3, 9]).unwrap();
    assert!(matches!(load_pgm(&ascii(&img, 8)), Err(Error::Format { .. })));
    assert_eq!(load_pgm(&ascii(&img, 9)).unwrap(), img);
}
