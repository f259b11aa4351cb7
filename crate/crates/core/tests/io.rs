use std::path::{Path, PathBuf};

use proptest::prelude::*;
use vistrace::io::{
    decode_hdr, decode_pfm, decode_png, encode_hdr, encode_pfm, encode_png, encode_srgb8, export_scene, linear_to_srgb,
    parse_scene, read_pfm, read_png, rgbe_to_rgb, srgb_to_linear, to_json, write_pfm, write_png, Pfm, SceneError,
};
use vistrace::scene::ComponentKind;
use vistrace::Rgb;

fn scenes_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

fn shipped_scenes() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scenes_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    assert!(v.len() >= 3);
    v
}

#[test]
fn srgb_reference_bytes() {
    assert_eq!(encode_srgb8(0.5), 188);
    assert_eq!(encode_srgb8(0.0031308), 10);
    assert_eq!(encode_srgb8(-1.0), 0);
    assert_eq!(encode_srgb8(7.0), 255);
    assert_eq!(encode_srgb8(f64::NAN), 0);
}

proptest! {
    #[test]
    fn srgb_transfer_inverts(x in 0.0f64..=1.0) {
        prop_assert!((srgb_to_linear(linear_to_srgb(x)) - x).abs() <= 1.0 / 512.0);
        prop_assert!((linear_to_srgb(srgb_to_linear(x)) - x).abs() <= 1.0 / 512.0);
    }

    #[test]
    fn pfm_round_trip_is_bitwise(w in 1u32..6, h in 1u32..6, seed in any::<u64>(), rgb in any::<bool>()) {
        let channels = if rgb { 3 } else { 1 };
        let n = (w * h) as usize * channels;
        let mut state = seed | 1;
        let data: Vec<f32> = (0..n)
            .map(|i| match i % 7 {
                0 => f32::INFINITY,
                1 => -0.0,
                _ => {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    f32::from_bits(state as u32 & 0x7f7f_ffff)
                }
            })
            .collect();
        let img = Pfm { width: w, height: h, channels: channels as u8, data };
        let back = decode_pfm(&encode_pfm(&img).unwrap()).unwrap();
        prop_assert!(back.bitwise_eq(&img));
    }
}

#[test]
fn png_byte_188_decodes_to_half() {
    let mut bytes = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut bytes, 1, 1);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        enc.write_header().unwrap().write_image_data(&[188, 188, 188]).unwrap();
    }
    let tex = decode_png(&bytes).unwrap();
    let [r, g, b, a] = tex.texel(0, 0);
    for c in [r, g, b] {
        assert!((c - 0.502).abs() < 1e-3, "{c}");
    }
    assert_eq!(a, 1.0);
}

fn gradient(w: u32, h: u32) -> Vec<Rgb> {
    (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            Rgb::new(x / w as f64, y / h as f64, ((x * 7.0 + y * 3.0) % 11.0) / 10.0)
        })
        .collect()
}

#[test]
fn png_pfm_png_is_stable_after_first_quantization() {
    let dir = tempfile::tempdir().unwrap();
    let (w, h) = (13, 7);
    write_png(dir.path().join("a.png"), w, h, &gradient(w, h)).unwrap();
    let first = std::fs::read(dir.path().join("a.png")).unwrap();

    let tex = read_png(dir.path().join("a.png")).unwrap();
    let linear: Vec<Rgb> = tex.pixels().iter().map(|p| Rgb::new(p[0] as f64, p[1] as f64, p[2] as f64)).collect();
    write_pfm(dir.path().join("a.pfm"), &Pfm::from_rgb(w, h, &linear).unwrap()).unwrap();
    let pfm = read_pfm(dir.path().join("a.pfm")).unwrap();
    let again: Vec<Rgb> = pfm
        .data
        .chunks_exact(3)
        .map(|c| Rgb::new(c[0] as f64, c[1] as f64, c[2] as f64))
        .collect();
    assert_eq!(encode_png(w, h, &again).unwrap(), first);
}

#[test]
fn pfm_rows_are_stored_bottom_first() {
    let img = Pfm::from_scalar(1, 2, [1.0, 2.0]).unwrap();
    let bytes = encode_pfm(&img).unwrap();
    let header = b"Pf\n1 2\n-1.0\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(&bytes[header.len()..header.len() + 4], &2f32.to_le_bytes());
}

#[test]
fn writers_are_deterministic() {
    let px = gradient(9, 5);
    assert_eq!(encode_png(9, 5, &px).unwrap(), encode_png(9, 5, &px).unwrap());
    let pfm = Pfm::from_rgb(9, 5, &px).unwrap();
    assert_eq!(encode_pfm(&pfm).unwrap(), encode_pfm(&pfm).unwrap());
    assert_eq!(encode_hdr(9, 5, &px).unwrap(), encode_hdr(9, 5, &px).unwrap());
}

#[test]
fn rgbe_closed_form() {
    // m · 2^(e − 136): exponent 129 scales mantissa 128 to exactly one
    assert_eq!(rgbe_to_rgb([128, 128, 128, 129]), [1.0; 3]);
    assert_eq!(rgbe_to_rgb([128, 64, 0, 137]), [256.0, 128.0, 0.0]);
    assert_eq!(rgbe_to_rgb([200, 10, 3, 0]), [0.0; 3]);
}

fn hdr_header(w: u32, h: u32) -> Vec<u8> {
    format!("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y {h} +X {w}\n").into_bytes()
}

#[test]
fn hdr_flat_scanlines_decode() {
    let mut bytes = hdr_header(2, 1);
    bytes.extend_from_slice(&[128, 128, 128, 129, 128, 0, 64, 130]);
    let tex = decode_hdr(&bytes).unwrap();
    assert_eq!(tex.texel(0, 0), [1.0, 1.0, 1.0, 1.0]);
    assert_eq!(tex.texel(1, 0), [2.0, 0.0, 1.0, 1.0]);
}

#[test]
fn hdr_rle_scanlines_decode() {
    // width 8: red channel is a run, the rest are literal dumps
    let mut bytes = hdr_header(8, 1);
    bytes.extend_from_slice(&[2, 2, 0, 8]);
    bytes.extend_from_slice(&[128 + 8, 128]);
    bytes.push(8);
    bytes.extend_from_slice(&[0, 16, 32, 48, 64, 80, 96, 112]);
    bytes.extend_from_slice(&[128 + 8, 0]);
    bytes.extend_from_slice(&[128 + 8, 129]);
    let tex = decode_hdr(&bytes).unwrap();
    for x in 0..8 {
        assert_eq!(tex.texel(x, 0), [1.0, (16 * x) as f32 / 128.0, 0.0, 1.0]);
    }
}

#[test]
fn hdr_writer_round_trips_through_rle() {
    let (w, h) = (37, 3);
    let px: Vec<Rgb> = (0..w * h)
        .map(|i| if i % 5 < 3 { Rgb::new(0.25, 4.0, 1.0) } else { Rgb::new(i as f64, 0.5, 0.0) })
        .collect();
    let tex = decode_hdr(&encode_hdr(w, h, &px).unwrap()).unwrap();
    for (i, p) in px.iter().enumerate() {
        let t = tex.texel(i as u32 % w, i as u32 / w);
        for (a, b) in [p.x, p.y, p.z].into_iter().zip(t) {
            assert!((a - b as f64).abs() <= a.max(p.max_component()) / 128.0, "{a} vs {b}");
        }
    }
}

#[test]
fn corrupt_files_report_offsets() {
    let err = decode_hdr(b"#?RADIANCE\n\n-Y 1 +X 1\n\x01").unwrap_err().to_string();
    assert!(err.contains("byte"), "{err}");
    let err = decode_pfm(b"PX\n1 1\n-1.0\n").unwrap_err().to_string();
    assert!(err.contains("byte 0"), "{err}");
}

const FIG4: &str = r#"{
  "transforms": [
    { "name": "c_tfm", "look_at": { "eye": [3, 3, 3], "at": [0, 0, 0], "up": [0, 0, 1] } },
    { "name": "o_tfm" }
  ],
  "cameras": [{ "name": "c_cam" }],
  "meshes": [{ "name": "o_mesh", "sphere": { "radius": 1.0 } }],
  "materials": [{ "name": "o_mat", "base_color": [1, 0, 0] }],
  "entities": [
    { "name": "cam", "transform": "c_tfm", "camera": "c_cam" },
    { "name": "obj", "transform": "o_tfm", "mesh": "o_mesh", "material": "o_mat" }
  ],
  "render": { "width": 512, "height": 512, "spp": 1024 }
}"#;

#[test]
fn minimal_script_scene_builds_two_entities() {
    let parsed = parse_scene(FIG4, true).unwrap();
    assert!(parsed.warnings.is_empty());
    let reg = parsed.document.build(Path::new(".")).unwrap();
    assert_eq!(reg.entities().count(), 2);
    let cam = reg.camera_entity().expect("single camera becomes active");
    assert_eq!(reg.entity(cam).unwrap().name, "cam");
    let render = parsed.document.render.unwrap();
    assert_eq!((render.width, render.height, render.spp), (Some(512), Some(512), Some(1024)));
    assert_eq!(reg.names(ComponentKind::Material), vec!["o_mat".to_string()]);
}

#[test]
fn unresolved_reference_names_the_offender() {
    let text = FIG4.replace(r#""material": "o_mat""#, r#""material": "missing""#);
    let doc = parse_scene(&text, true).unwrap().document;
    let err = doc.build(Path::new(".")).unwrap_err();
    assert!(matches!(&err, SceneError::Unresolved { name, kind: "material", .. } if name == "missing"));
    let msg = err.to_string();
    assert!(msg.contains("missing") && msg.contains("obj"), "{msg}");
}

#[test]
fn type_errors_name_the_json_path() {
    let text = FIG4.replace(r#""radius": 1.0"#, r#""radius": "big""#);
    match parse_scene(&text, true).unwrap_err() {
        SceneError::Json { path, .. } => assert_eq!(path, "meshes[0].sphere.radius"),
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn unknown_keys_fail_strict_and_warn_lenient() {
    let text = FIG4.replace(r#"{ "name": "c_cam" }"#, r#"{ "name": "c_cam", "zoom": 2 }"#);
    match parse_scene(&text, true).unwrap_err() {
        SceneError::UnknownKeys(keys) => assert_eq!(keys, vec!["cameras[0].zoom".to_string()]),
        e => panic!("unexpected {e}"),
    }
    let lenient = parse_scene(&text, false).unwrap();
    assert_eq!(lenient.warnings.len(), 1);
    assert!(lenient.warnings[0].contains("cameras[0].zoom"));
    assert_eq!(lenient.document, parse_scene(FIG4, true).unwrap().document);
}

#[test]
fn ambiguous_sources_are_rejected() {
    let text = FIG4.replace(r#""sphere": { "radius": 1.0 }"#, r#""sphere": { "radius": 1.0 }, "plane": [1, 1]"#);
    let doc = parse_scene(&text, true).unwrap().document;
    assert!(matches!(doc.build(Path::new(".")), Err(SceneError::Invalid { .. })));
}

#[test]
fn shipped_scenes_reach_a_serialization_fixpoint() {
    for path in shipped_scenes() {
        let text = std::fs::read_to_string(&path).unwrap();
        let doc = parse_scene(&text, true).unwrap_or_else(|e| panic!("{}: {e}", path.display())).document;
        let reg = doc.build(&scenes_dir()).unwrap();
        let mut first = export_scene(&reg);
        first.render = doc.render.clone();
        first.randomization = doc.randomization.clone();

        let json = to_json(&first);
        let reparsed = parse_scene(&json, true).unwrap().document;
        assert_eq!(reparsed, first, "{}", path.display());
        let mut second = export_scene(&reparsed.build(&scenes_dir()).unwrap());
        second.render = reparsed.render.clone();
        second.randomization = reparsed.randomization.clone();
        assert_eq!(second, first, "{}", path.display());
        assert_eq!(to_json(&second), json);
    }
}

#[test]
fn export_keeps_motion_keys_and_tags() {
    let text = std::fs::read_to_string(scenes_dir().join("moving_quad.json")).unwrap();
    let reg = parse_scene(&text, true).unwrap().document.build(&scenes_dir()).unwrap();
    let doc = export_scene(&reg);
    let quad = doc.transforms.iter().find(|t| t.name == "quad_tfm").unwrap();
    assert_eq!(quad.previous.unwrap().translation, Some([0.0, 0.0, 0.0]));
    assert!(doc.transforms.iter().find(|t| t.name == "cam_tfm").unwrap().previous.is_none());
    assert_eq!(doc.entities.iter().find(|e| e.name == "quad").unwrap().tags, vec!["subject".to_string()]);
}
