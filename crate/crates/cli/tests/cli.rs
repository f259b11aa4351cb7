use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vistrace::io::{read_pfm, read_png, Pfm};

fn scene(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(name)
}

fn vistrace(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vistrace"));
    cmd.args(args);
    match workers {
        Some(w) => cmd.env(vistrace::render::WORKERS_ENV, w),
        None => cmd.env_remove(vistrace::render::WORKERS_ENV),
    };
    cmd.output().unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = vistrace(args, None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn at(img: &Pfm, x: u32, y: u32, c: usize) -> f32 {
    img.data[(y * img.width + x) as usize * img.channels as usize + c]
}

#[test]
fn script_scene_writes_a_512_square_png() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // the scene asks for 1024 spp; one sample keeps the test fast
    run_ok(&["--scene", scene("fig4_sphere.json").to_str().unwrap(), "--out", out, "--spp", "1"]);
    let tex = read_png(dir.path().join("frame_00000.png")).unwrap();
    assert_eq!((tex.width(), tex.height()), (512, 512));
    let [r, g, b, _] = tex.texel(256, 256);
    assert!(r > 2.0 * g && r > 2.0 * b, "centre pixel should be red: {r} {g} {b}");
}

#[test]
fn depth_and_seg_layers_on_the_sphere_scene() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["--scene", scene("analytic_sphere.json").to_str().unwrap(), "--out", out, "--aov", "depth,seg", "--spp", "2"]);
    let mut pfms: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".pfm"))
        .collect();
    pfms.sort();
    assert_eq!(pfms, ["frame_00000_depth.pfm", "frame_00000_seg.pfm"]);
    let depth = read_pfm(dir.path().join("frame_00000_depth.pfm")).unwrap();
    assert_eq!(depth.channels, 1);
    assert!((at(&depth, 32, 32, 0) - 2.0).abs() <= 1e-4);
    assert_eq!(at(&depth, 0, 0, 0), f32::INFINITY);
    let seg = read_pfm(dir.path().join("frame_00000_seg.pfm")).unwrap();
    assert_eq!(at(&seg, 0, 0, 0), -1.0);
    assert_eq!(at(&seg, 32, 32, 0), 1.0);
}

#[test]
fn flow_is_zero_on_the_first_frame_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["--scene", scene("moving_quad.json").to_str().unwrap(), "--out", out, "--aov", "flow,seg", "--frames", "2"]);
    let f0 = read_pfm(dir.path().join("frame_00000_flow.pfm")).unwrap();
    assert!(f0.data.iter().all(|&v| v == 0.0));
    let f1 = read_pfm(dir.path().join("frame_00001_flow.pfm")).unwrap();
    let seg = read_pfm(dir.path().join("frame_00001_seg.pfm")).unwrap();
    let quad_id = 1.0;
    let mut moving = 0;
    for y in 0..seg.height {
        for x in 0..seg.width {
            if at(&seg, x, y, 0) == quad_id {
                assert!(at(&f1, x, y, 0) > 0.5, "quad moves right");
                moving += 1;
            }
        }
    }
    assert!(moving > 20);
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn output_bytes_repeat_across_runs_and_worker_counts() {
    let path = scene("randomized_tabletop.json");
    let mut results = Vec::new();
    for workers in [Some("1"), Some("3"), None] {
        let dir = tempfile::tempdir().unwrap();
        let args = [
            "--scene",
            path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--aov",
            "depth,normal,seg,uv,flow,albedo,position",
            "--boxes",
            "--frames",
            "2",
        ];
        let out = vistrace(&args, workers);
        assert!(out.status.success());
        results.push(dir_bytes(dir.path()));
    }
    assert_eq!(results[0].len(), 2 * (1 + 7 + 1));
    assert!(results.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn seed_flag_changes_the_frame() {
    let path = scene("randomized_tabletop.json");
    let render = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        run_ok(&["--scene", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--seed", seed]);
        std::fs::read(dir.path().join("frame_00000.png")).unwrap()
    };
    assert_ne!(render("1"), render("2"));
}

#[test]
fn boxes_follow_the_published_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["--scene", scene("randomized_tabletop.json").to_str().unwrap(), "--out", out, "--boxes", "--frames", "2"]);
    for frame in 0..2 {
        let text = std::fs::read_to_string(dir.path().join(format!("frame_{frame:05}_boxes.json"))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let entities = v["entities"].as_array().unwrap();
        assert!(entities.iter().any(|e| e["name"] == "box"));
        for e in entities {
            assert!(e["name"].is_string() && e["id"].is_u64() && e["visible_pixels"].is_u64());
            assert_eq!(e["box3d_world"].as_array().unwrap().len(), 8);
            assert_eq!(e["box3d_image"].as_array().unwrap().len(), 8);
            match e["box2d"].as_array() {
                Some(b) => {
                    let b: Vec<u64> = b.iter().map(|x| x.as_u64().unwrap()).collect();
                    assert!(b[0] <= b[2] && b[1] <= b[3] && b[2] < 64 && b[3] < 48, "{b:?}");
                    assert!(e["visible_pixels"].as_u64().unwrap() > 0);
                }
                None => assert_eq!(e["visible_pixels"], 0),
            }
        }
        let cam = &v["camera"];
        assert_eq!(cam["intrinsics"]["width"], 64);
        assert_eq!(cam["intrinsics"]["cx"], 32.0);
        assert_eq!(cam["world_from_camera"].as_array().unwrap().len(), 4);
    }
    assert!(!dir.path().join("frame_00000_seg.pfm").exists(), "boxes do not imply a seg file");
}

#[test]
fn strict_mode_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scene("analytic_sphere.json")).unwrap().replacen('{', "{ \"colour\": 1,", 1);
    let path = dir.path().join("typo.json");
    std::fs::write(&path, text).unwrap();
    let out_dir = dir.path().join("out");
    let args = ["--scene", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--spp", "1"];

    let lenient = vistrace(&args, None);
    assert!(lenient.status.success());
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("colour"));

    let mut strict = args.to_vec();
    strict.push("--strict");
    let out = vistrace(&strict, None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn exit_codes_separate_scene_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = vistrace(&["--scene", dir.path().join("none.json").to_str().unwrap()], None);
    assert_eq!(missing.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{ "entities": [{ "name": "a", "material": "missing" }] }"#).unwrap();
    let out = vistrace(&["--scene", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"").unwrap();
    let unwritable = blocker.join("sub");
    let out = vistrace(
        &["--scene", scene("analytic_sphere.json").to_str().unwrap(), "--out", unwritable.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(2));

    let out = vistrace(&["--scene", scene("analytic_sphere.json").to_str().unwrap(), "--aov", "depth,bogus"], None);
    assert!(!out.status.success());
}
