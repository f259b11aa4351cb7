//! Noise-free annotation layers and bounding boxes.
//!
//! Every pixel gets one ray through its center at shutter-close, with no
//! lens offset, so labels are crisp and exactly reproducible. Beauty
//! renders are anti-aliased and motion-blurred; these layers are not.

use std::fmt;
use std::str::FromStr;

use crate::render::{par_tiles, RenderConfig, RenderError};
use crate::scene::{EntityId, RenderSnapshot};
use crate::{Hitf, Rayf, Rgb, Vec2f, Vec3f};

/// Flow value written when the previous position cannot be projected.
pub const FLOW_INVALID: f64 = 1e9;
/// Segmentation id of background pixels.
pub const BACKGROUND_ID: i64 = -1;
/// Shutter time at which annotations are evaluated.
pub const AOV_TIME: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AovLayer {
    Depth,
    Normal,
    Segmentation,
    Uv,
    Flow,
    Albedo,
    Position,
}

impl AovLayer {
    pub const ALL: [AovLayer; 7] = [
        AovLayer::Depth,
        AovLayer::Normal,
        AovLayer::Segmentation,
        AovLayer::Uv,
        AovLayer::Flow,
        AovLayer::Albedo,
        AovLayer::Position,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AovLayer::Depth => "depth",
            AovLayer::Normal => "normal",
            AovLayer::Segmentation => "seg",
            AovLayer::Uv => "uv",
            AovLayer::Flow => "flow",
            AovLayer::Albedo => "albedo",
            AovLayer::Position => "position",
        }
    }
}

impl fmt::Display for AovLayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown annotation layer `{0}` (expected one of depth, normal, seg, uv, flow, albedo, position)")]
pub struct UnknownLayer(pub String);

impl FromStr for AovLayer {
    type Err = UnknownLayer;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AovLayer::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| UnknownLayer(s.to_string()))
    }
}

/// Requested annotation layers, row-major from the top-left. Layers that
/// were not requested are `None`.
///
/// Miss pixels hold depth `+∞`, segmentation [`BACKGROUND_ID`], flow zero,
/// and zero in every other layer.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AovSet {
    pub width: u32,
    pub height: u32,
    pub depth: Option<Vec<f64>>,
    /// World-space unit shading normal.
    pub normal: Option<Vec<Vec3f>>,
    pub segmentation: Option<Vec<i64>>,
    pub uv: Option<Vec<Vec2f>>,
    /// Current minus previous pixel position; +x right, +y down.
    pub flow: Option<Vec<Vec2f>>,
    pub albedo: Option<Vec<Rgb>>,
    pub position: Option<Vec<Vec3f>>,
}

impl AovSet {
    pub fn index(&self, x: u32, y: u32) -> usize {
        (y * self.width + x) as usize
    }

    pub fn layers(&self) -> Vec<AovLayer> {
        AovLayer::ALL.into_iter().filter(|&l| self.has(l)).collect()
    }

    pub fn has(&self, layer: AovLayer) -> bool {
        match layer {
            AovLayer::Depth => self.depth.is_some(),
            AovLayer::Normal => self.normal.is_some(),
            AovLayer::Segmentation => self.segmentation.is_some(),
            AovLayer::Uv => self.uv.is_some(),
            AovLayer::Flow => self.flow.is_some(),
            AovLayer::Albedo => self.albedo.is_some(),
            AovLayer::Position => self.position.is_some(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct PixelAov {
    depth: f64,
    normal: Vec3f,
    seg: i64,
    uv: Vec2f,
    flow: Vec2f,
    albedo: Rgb,
    position: Vec3f,
}

/// Center ray of pixel `(x, y)` at shutter-close through a pinhole.
pub fn center_ray(snap: &RenderSnapshot, width: u32, height: u32, x: u32, y: u32) -> Rayf {
    let cam = &snap.camera;
    let m = cam.world_from_camera(AOV_TIME);
    let d = cam.camera.camera_direction(width, height, x as f64 + 0.5, y as f64 + 0.5);
    Rayf::new(m.transform_point(Vec3f::zero()), m.transform_direction(d).normalize(), AOV_TIME)
}

/// Pixel motion of the surface point under `hit` between the previous
/// snapshot pose (shutter-open) and the current one, as current minus
/// previous. `None` when either position is behind the camera.
pub fn compute_flow(snap: &RenderSnapshot, width: u32, height: u32, hit: &Hitf) -> Option<Vec2f> {
    let inst = &snap.ias.instances()[hit.instance as usize];
    let local = inst.inverse_at(AOV_TIME).transform_point(hit.position);
    let prev_world = inst.prev_matrix().transform_point(local);
    let cam = &snap.camera;
    let (now, _) = cam.camera.project(&cam.world_from_camera(AOV_TIME), width, height, hit.position)?;
    let (before, _) = cam.camera.project(&cam.world_from_camera(0.0), width, height, prev_world)?;
    Some(now - before)
}

/// Albedo layer value: resolved base color, unaffected by metallic or
/// transmission. Emitters without a material have zero albedo.
pub fn albedo_at(snap: &RenderSnapshot, hit: &Hitf) -> Rgb {
    snap.shading[hit.instance as usize]
        .material
        .as_ref()
        .map_or(Rgb::zero(), |m| m.albedo(hit.uv))
}

fn shade_pixel(snap: &RenderSnapshot, config: &RenderConfig, want_flow: bool, x: u32, y: u32) -> PixelAov {
    let ray = center_ray(snap, config.width, config.height, x, y);
    let Some(hit) = snap.ias.intersect(&ray) else {
        return PixelAov {
            depth: f64::INFINITY,
            seg: BACKGROUND_ID,
            ..Default::default()
        };
    };
    let flow = if want_flow {
        compute_flow(snap, config.width, config.height, &hit).unwrap_or(Vec2f::new(FLOW_INVALID, FLOW_INVALID))
    } else {
        Vec2f::zero()
    };
    PixelAov {
        depth: hit.t,
        normal: hit.shading_normal,
        seg: hit.entity_id as i64,
        uv: hit.uv,
        flow,
        albedo: albedo_at(snap, &hit),
        position: hit.position,
    }
}

/// Renders the requested annotation layers at the configuration's
/// resolution. Seed, sample count and pattern are ignored.
pub fn render_aovs(snap: &RenderSnapshot, config: &RenderConfig, layers: &[AovLayer]) -> Result<AovSet, RenderError> {
    if config.width == 0 || config.height == 0 {
        return Err(RenderError::EmptyImage);
    }
    let want = |l| layers.contains(&l);
    let px = par_tiles(config.width, config.height, config.workers, |x, y| {
        shade_pixel(snap, config, want(AovLayer::Flow), x, y)
    })?;
    let collect = |l: AovLayer| want(l).then_some(());
    Ok(AovSet {
        width: config.width,
        height: config.height,
        depth: collect(AovLayer::Depth).map(|_| px.iter().map(|p| p.depth).collect()),
        normal: collect(AovLayer::Normal).map(|_| px.iter().map(|p| p.normal).collect()),
        segmentation: collect(AovLayer::Segmentation).map(|_| px.iter().map(|p| p.seg).collect()),
        uv: collect(AovLayer::Uv).map(|_| px.iter().map(|p| p.uv).collect()),
        flow: collect(AovLayer::Flow).map(|_| px.iter().map(|p| p.flow).collect()),
        albedo: collect(AovLayer::Albedo).map(|_| px.iter().map(|p| p.albedo).collect()),
        position: collect(AovLayer::Position).map(|_| px.iter().map(|p| p.position).collect()),
    })
}

/// Inclusive pixel rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Box2 {
    pub min: [u32; 2],
    pub max: [u32; 2],
}

impl Box2 {
    pub fn area(&self) -> u64 {
        (self.max[0] - self.min[0] + 1) as u64 * (self.max[1] - self.min[1] + 1) as u64
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.min[0]..=self.max[0]).contains(&x) && (self.min[1]..=self.max[1]).contains(&y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntityBoxes {
    pub entity_id: EntityId,
    pub name: String,
    /// Tight box around the entity's segmentation pixels; `None` if unseen.
    pub bbox_2d: Option<Box2>,
    /// Corners of the mesh's local bounding box in world space.
    pub corners_world: [Vec3f; 8],
    /// Pixel projections of `corners_world`; `None` behind the camera.
    pub corners_image: [Option<Vec2f>; 8],
    /// Number of pixels labelled with this entity.
    pub visibility: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bounding boxes need the segmentation layer")]
pub struct MissingSegmentation;

/// 2D boxes from the segmentation layer and projected 3D boxes for every
/// instanced entity, in IAS order. Entities without visible pixels keep
/// their 3D box with zero visibility.
pub fn extract_boxes(aovs: &AovSet, snap: &RenderSnapshot) -> Result<Vec<EntityBoxes>, MissingSegmentation> {
    let seg = aovs.segmentation.as_ref().ok_or(MissingSegmentation)?;
    let cam = &snap.camera;
    let view = cam.world_from_camera(AOV_TIME);
    let mut out: Vec<EntityBoxes> = snap
        .ias
        .instances()
        .iter()
        .map(|inst| {
            let corners_world = inst.mesh().bounds().corners().map(|c| inst.curr_matrix().transform_point(c));
            let corners_image = corners_world.map(|c| cam.camera.project(&view, aovs.width, aovs.height, c).map(|p| p.0));
            EntityBoxes {
                entity_id: inst.entity_id(),
                name: snap.entity_name(inst.entity_id()).unwrap_or_default().to_string(),
                bbox_2d: None,
                corners_world,
                corners_image,
                visibility: 0,
            }
        })
        .collect();
    let slot: std::collections::HashMap<EntityId, usize> =
        out.iter().enumerate().map(|(i, b)| (b.entity_id, i)).collect();
    for y in 0..aovs.height {
        for x in 0..aovs.width {
            let id = seg[aovs.index(x, y)];
            if id < 0 {
                continue;
            }
            let Some(&i) = slot.get(&(id as EntityId)) else { continue };
            let b = &mut out[i];
            b.visibility += 1;
            b.bbox_2d = Some(match b.bbox_2d {
                None => Box2 { min: [x, y], max: [x, y] },
                Some(r) => Box2 {
                    min: [r.min[0].min(x), r.min[1].min(y)],
                    max: [r.max[0].max(x), r.max[1].max(y)],
                },
            });
        }
    }
    Ok(out)
}
