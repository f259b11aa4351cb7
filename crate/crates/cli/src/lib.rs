//! Headless dataset renderer: loads a scene document, randomizes it per
//! frame, and writes beauty images, annotation layers and box metadata.

pub mod directives;

use std::path::{Path, PathBuf};

use serde::Serialize;
use vistrace::aov::{extract_boxes, render_aovs, AovLayer, EntityBoxes, AOV_TIME};
use vistrace::io::{aov_layer_pfm, parse_scene, parse_value, write_pfm, write_png, IoError, SceneError};
use vistrace::render::{render, workers_from_env, RenderConfig, RenderError, DEFAULT_CLAMP};
use vistrace::scene::{RegistryError, RenderSnapshot};

pub use directives::{apply_directives, DirectiveError, Directives, FrameMutations};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("randomization: {0}")]
    Directive(#[from] DirectiveError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl CliError {
    /// Process exit code: 2 for file system and image I/O failures, 1 for
    /// everything wrong with the scene or its settings.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            CliError::Scene(SceneError::File { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Options {
    pub scene: PathBuf,
    pub out: PathBuf,
    pub spp: Option<u32>,
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub aovs: Vec<AovLayer>,
    pub frames: u32,
    pub seed: Option<u64>,
    pub boxes: bool,
    pub strict: bool,
    /// Worker threads; falls back to the environment override.
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
    pub mutations: Vec<FrameMutations>,
}

pub fn frame_stem(frame: u32) -> String {
    format!("frame_{frame:05}")
}

/// Render seed for `frame`; frame 0 uses the base seed unchanged.
pub fn frame_seed(seed: u64, frame: u32) -> u64 {
    seed.wrapping_add((frame as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

#[derive(Serialize)]
struct BoxEntity<'a> {
    name: &'a str,
    id: u32,
    visible_pixels: u64,
    box2d: Option<[u32; 4]>,
    box3d_world: Vec<[f64; 3]>,
    box3d_image: Vec<Option<[f64; 2]>>,
}

#[derive(Serialize)]
struct Intrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
    /// Row-major pinhole matrix for the right/down/forward camera frame.
    matrix: [[f64; 3]; 3],
}

#[derive(Serialize)]
struct BoxCamera {
    intrinsics: Intrinsics,
    /// Row-major; the camera looks down its local −z with +y up.
    world_from_camera: [[f64; 4]; 4],
}

#[derive(Serialize)]
struct BoxFile<'a> {
    entities: Vec<BoxEntity<'a>>,
    camera: BoxCamera,
}

/// Serializes boxes and camera metadata for one frame.
pub fn boxes_json(boxes: &[EntityBoxes], snap: &RenderSnapshot, width: u32, height: u32) -> String {
    let k = snap.camera.camera.intrinsics(width, height).rows;
    let file = BoxFile {
        entities: boxes
            .iter()
            .map(|b| BoxEntity {
                name: &b.name,
                id: b.entity_id,
                visible_pixels: b.visibility,
                box2d: b.bbox_2d.map(|r| [r.min[0], r.min[1], r.max[0], r.max[1]]),
                box3d_world: b.corners_world.iter().map(|c| [c.x, c.y, c.z]).collect(),
                box3d_image: b.corners_image.iter().map(|c| c.map(|p| [p.x, p.y])).collect(),
            })
            .collect(),
        camera: BoxCamera {
            intrinsics: Intrinsics {
                fx: k[0][0],
                fy: k[1][1],
                cx: k[0][2],
                cy: k[1][2],
                width,
                height,
                matrix: k,
            },
            world_from_camera: snap.camera.world_from_camera(AOV_TIME).rows,
        },
    };
    let mut s = serde_json::to_string_pretty(&file).expect("box metadata serializes");
    s.push('\n');
    s
}

fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|e| IoError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Runs the whole frame loop.
///
/// Each frame first commits the previous frame's poses as the shutter-open
/// key, then applies the directives, so flow and motion blur describe the
/// change since the last frame. Frame 0 is committed after randomizing and
/// therefore has no motion.
pub fn run(opts: &Options) -> Result<Summary, CliError> {
    let text = read_text(&opts.scene)?;
    let parsed = parse_scene(&text, opts.strict)?;
    let mut summary = Summary {
        warnings: parsed.warnings,
        ..Default::default()
    };
    let doc = parsed.document;
    let directives = match &doc.randomization {
        Some(v) => {
            let (d, warnings): (Directives, _) = parse_value(v, opts.strict)?;
            summary.warnings.extend(warnings.into_iter().map(|w| format!("randomization: {w}")));
            Some(d)
        }
        None => None,
    };
    let base = opts.scene.parent().unwrap_or(Path::new("."));
    let mut reg = doc.build(base)?;
    if let Some(d) = &directives {
        d.validate(&reg)?;
    }

    let settings = doc.render.clone().unwrap_or_default();
    let mut config = RenderConfig {
        width: opts.width.or(settings.width).unwrap_or(512),
        height: opts.height.or(settings.height).unwrap_or(512),
        samples_per_pixel: opts.spp.or(settings.spp).unwrap_or(16),
        workers: opts.workers.or_else(workers_from_env),
        clamp_radiance: match settings.clamp {
            None => Some(DEFAULT_CLAMP),
            Some(c) if c > 0.0 => Some(c),
            Some(_) => None,
        },
        ..Default::default()
    };
    if let Some(d) = settings.max_depth {
        config.max_depth = d;
    }
    config.validate()?;
    let seed = opts.seed.or(settings.seed).unwrap_or(0);
    let directive_seed = opts
        .seed
        .or(directives.as_ref().and_then(|d| d.seed))
        .or(settings.seed)
        .unwrap_or(0);

    let mut layers = opts.aovs.clone();
    if opts.boxes && !layers.contains(&AovLayer::Segmentation) {
        layers.push(AovLayer::Segmentation);
    }
    std::fs::create_dir_all(&opts.out).map_err(|e| IoError::File {
        path: opts.out.display().to_string(),
        message: e.to_string(),
    })?;

    for frame in 0..opts.frames.max(1) {
        if frame > 0 {
            reg.commit_motion();
        }
        if let Some(d) = &directives {
            summary
                .mutations
                .push(apply_directives(&mut reg, d, directive_seed, frame as u64)?);
        }
        if frame == 0 {
            reg.commit_motion();
        }
        let snap = reg.take_snapshot()?;
        config.seed = frame_seed(seed, frame);
        let stem = frame_stem(frame);

        let fb = render(&snap, &config)?;
        let png = opts.out.join(format!("{stem}.png"));
        write_png(&png, fb.width, fb.height, &fb.pixels)?;
        summary.files.push(png);

        if layers.is_empty() {
            continue;
        }
        let aovs = render_aovs(&snap, &config, &layers)?;
        for &layer in &opts.aovs {
            let path = opts.out.join(format!("{stem}_{layer}.pfm"));
            write_pfm(&path, &aov_layer_pfm(&aovs, layer).expect("layer was rendered"))?;
            summary.files.push(path);
        }
        if opts.boxes {
            let boxes = extract_boxes(&aovs, &snap).expect("segmentation was rendered");
            let path = opts.out.join(format!("{stem}_boxes.json"));
            write_text(&path, &boxes_json(&boxes, &snap, config.width, config.height))?;
            summary.files.push(path);
        }
    }
    Ok(summary)
}
