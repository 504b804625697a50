use proptest::prelude::*;

use synesthete_core::device::{
    decode_frame, encode_frame, simulator_sink, ColorSink, FrameError, FRAME_LEN, SYNC,
};
use synesthete_core::RgbColor;

fn corners() -> Vec<RgbColor> {
    let mut out = Vec::new();
    for r in [0u8, 255] {
        for g in [0u8, 255] {
            for b in [0u8, 255] {
                out.push(RgbColor::new(r, g, b));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn decode_inverts_encode(r: u8, g: u8, b: u8) {
        let c = RgbColor::new(r, g, b);
        prop_assert_eq!(decode_frame(encode_frame(c).bytes()).unwrap(), c);
    }
}

proptest! {
    #[test]
    fn any_single_bit_flip_is_rejected(r: u8, g: u8, b: u8, byte in 0usize..FRAME_LEN, bit in 0u8..8) {
        let mut frame = *encode_frame(RgbColor::new(r, g, b)).bytes();
        frame[byte] ^= 1 << bit;
        prop_assert!(decode_frame(&frame).is_err());
    }

    #[test]
    fn simulator_recovers_after_garbage(
        noise in prop::collection::vec(any::<u8>().prop_filter("not sync", |b| *b != SYNC), 0..20),
        r: u8, g: u8, b: u8,
    ) {
        let mut sim = simulator_sink(4);
        let mut bytes = noise;
        bytes.extend_from_slice(encode_frame(RgbColor::new(r, g, b)).bytes());
        sim.receive_bytes(&bytes).unwrap();
        prop_assert_eq!(sim.last_color(), Some(RgbColor::new(r, g, b)));
    }
}

#[test]
fn corners_round_trip() {
    for c in corners() {
        assert_eq!(decode_frame(encode_frame(c).bytes()).unwrap(), c);
    }
}

#[test]
fn crafted_corruptions_are_rejected() {
    let good = *encode_frame(RgbColor::new(10, 20, 30)).bytes();

    let mut bad_sync = good;
    bad_sync[0] = 0x7F;
    assert_eq!(decode_frame(&bad_sync), Err(FrameError::BadSync(0x7F)));

    let mut bad_sum = good;
    bad_sum[4] = bad_sum[4].wrapping_add(1);
    assert!(matches!(
        decode_frame(&bad_sum),
        Err(FrameError::BadChecksum { .. })
    ));

    assert!(matches!(
        decode_frame(&good[..4]),
        Err(FrameError::BadLength(4))
    ));
    let mut long = good.to_vec();
    long.push(0);
    assert!(matches!(decode_frame(&long), Err(FrameError::BadLength(6))));
    assert!(matches!(decode_frame(&[]), Err(FrameError::BadLength(0))));
}

#[test]
fn simulator_counts_every_delivered_colour() {
    let mut sim = simulator_sink(300);
    for v in 0..=255u8 {
        sim.deliver(RgbColor::new(v, 255 - v, v / 2)).unwrap();
    }
    assert_eq!(sim.frame_count(), 256);
    assert_eq!(sim.checksum_error_count(), 0);
    assert_eq!(sim.history().count(), 256);
}
