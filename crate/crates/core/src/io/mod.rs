//! File formats: images, scene documents and annotation layers.

mod image;
mod scene;

use std::path::Path;

pub use image::{
    decode_hdr, decode_pfm, decode_png, decode_srgb8, encode_hdr, encode_pfm, encode_png, encode_srgb8, linear_to_srgb,
    load_texture, read_hdr, read_pfm, read_png, rgb_to_rgbe, rgbe_to_rgb, srgb_to_linear, write_pfm, write_png, Pfm,
};
pub use scene::{
    export_scene, parse_scene, parse_value, to_json, CameraDesc, EntityDesc, EnvironmentDesc, LightDesc, LookAtDesc,
    MaterialDesc, MeshDesc, ParsedScene, PoseDesc, RenderDesc, SceneDocument, SceneError, SphereDesc, TextureDesc,
    TransformDesc, VolumeDesc,
};

use crate::aov::AovSet;
use crate::materials::MaterialError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("malformed {format} at byte {offset}: {message}")]
    Malformed {
        format: &'static str,
        offset: usize,
        message: String,
    },
    #[error("png: {0}")]
    Png(String),
    #[error("{len} pixels do not fill a {width}x{height} image")]
    Size { width: u32, height: u32, len: usize },
    #[error("{0}: unsupported image type (expected .png, .pfm or .hdr)")]
    UnknownExtension(String),
    #[error(transparent)]
    Texture(#[from] MaterialError),
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, IoError> {
    std::fs::read(path).map_err(|e| IoError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    std::fs::write(path, bytes).map_err(|e| IoError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// PFM encoding of one annotation layer, or `None` if it was not rendered.
///
/// Scalar layers (depth, segmentation) are single-channel; depth keeps `+∞`
/// for misses and segmentation ids are stored as floats, exact below 2²⁴.
/// Two-component layers (uv, flow) use three channels with zero blue.
pub fn aov_layer_pfm(aovs: &AovSet, layer: crate::aov::AovLayer) -> Option<Pfm> {
    use crate::aov::AovLayer;
    let (w, h) = (aovs.width, aovs.height);
    let v2 = |v: &Vec<crate::Vec2f>| Pfm::from_rgb(w, h, &v.iter().map(|p| crate::Vec3f::new(p.x, p.y, 0.0)).collect::<Vec<_>>());
    let img = match layer {
        AovLayer::Depth => Pfm::from_scalar(w, h, aovs.depth.as_ref()?.iter().copied()),
        AovLayer::Segmentation => Pfm::from_scalar(w, h, aovs.segmentation.as_ref()?.iter().map(|&s| s as f64)),
        AovLayer::Normal => Pfm::from_rgb(w, h, aovs.normal.as_ref()?),
        AovLayer::Albedo => Pfm::from_rgb(w, h, aovs.albedo.as_ref()?),
        AovLayer::Position => Pfm::from_rgb(w, h, aovs.position.as_ref()?),
        AovLayer::Uv => v2(aovs.uv.as_ref()?),
        AovLayer::Flow => v2(aovs.flow.as_ref()?),
    };
    Some(img.expect("layer sizes match the image"))
}
