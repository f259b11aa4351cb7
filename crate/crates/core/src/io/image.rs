//! PNG (8-bit sRGB), PFM (32-bit float) and Radiance HDR codecs.

use std::io::Cursor;
use std::path::Path;

use super::{read_file, write_file, IoError};
use crate::materials::Texture;
use crate::Rgb;

/// Linear to sRGB-encoded value with the standard piecewise curve.
pub fn linear_to_srgb(x: f64) -> f64 {
    if x <= 0.0031308 {
        12.92 * x
    } else {
        1.055 * x.powf(1.0 / 2.4) - 0.055
    }
}

pub fn srgb_to_linear(x: f64) -> f64 {
    if x <= 0.04045 {
        x / 12.92
    } else {
        ((x + 0.055) / 1.055).powf(2.4)
    }
}

/// Quantizes a linear value to an sRGB byte: clamp, transfer, round to
/// nearest. NaN maps to 0.
pub fn encode_srgb8(x: f64) -> u8 {
    if x.is_nan() {
        return 0;
    }
    (linear_to_srgb(x.clamp(0.0, 1.0)) * 255.0).round() as u8
}

pub fn decode_srgb8(b: u8) -> f64 {
    srgb_to_linear(b as f64 / 255.0)
}

fn check_len(width: u32, height: u32, len: usize) -> Result<(), IoError> {
    let expected = width as usize * height as usize;
    if width == 0 || height == 0 || expected != len {
        return Err(IoError::Size { width, height, len });
    }
    Ok(())
}

/// Encodes linear RGB as an 8-bit RGB PNG, top row first. Filter and
/// compression are fixed so the bytes depend only on the pixels.
pub fn encode_png(width: u32, height: u32, pixels: &[Rgb]) -> Result<Vec<u8>, IoError> {
    check_len(width, height, pixels.len())?;
    let data: Vec<u8> = pixels
        .iter()
        .flat_map(|p| [encode_srgb8(p.x), encode_srgb8(p.y), encode_srgb8(p.z)])
        .collect();
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, width, height);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    enc.set_compression(png::Compression::Balanced);
    enc.set_filter(png::Filter::Paeth);
    let png_err = |e: png::EncodingError| IoError::Png(e.to_string());
    let mut writer = enc.write_header().map_err(png_err)?;
    writer.write_image_data(&data).map_err(png_err)?;
    writer.finish().map_err(png_err)?;
    Ok(out)
}

pub fn write_png(path: impl AsRef<Path>, width: u32, height: u32, pixels: &[Rgb]) -> Result<(), IoError> {
    write_file(path.as_ref(), &encode_png(width, height, pixels)?)
}

/// Decodes any PNG into linear RGBA; color channels go through the
/// inverse sRGB curve, alpha does not.
pub fn decode_png(bytes: &[u8]) -> Result<Texture, IoError> {
    let mut dec = png::Decoder::new(Cursor::new(bytes));
    dec.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = dec.read_info().map_err(|e| IoError::Png(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| IoError::Png("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| IoError::Png(e.to_string()))?;
    let buf = &buf[..info.buffer_size()];
    let lin = |b: u8| decode_srgb8(b) as f32;
    let alpha = |b: u8| b as f32 / 255.0;
    let pixels: Vec<[f32; 4]> = match info.color_type {
        png::ColorType::Grayscale => buf.iter().map(|&g| [lin(g), lin(g), lin(g), 1.0]).collect(),
        png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).map(|c| [lin(c[0]), lin(c[0]), lin(c[0]), alpha(c[1])]).collect(),
        png::ColorType::Rgb => buf.chunks_exact(3).map(|c| [lin(c[0]), lin(c[1]), lin(c[2]), 1.0]).collect(),
        png::ColorType::Rgba => buf.chunks_exact(4).map(|c| [lin(c[0]), lin(c[1]), lin(c[2]), alpha(c[3])]).collect(),
        png::ColorType::Indexed => return Err(IoError::Png("palette was not expanded".into())),
    };
    Ok(Texture::new(info.width, info.height, pixels)?)
}

pub fn read_png(path: impl AsRef<Path>) -> Result<Texture, IoError> {
    decode_png(&read_file(path.as_ref())?)
}

/// A float image as stored in PFM: one or three channels, rows top first.
#[derive(Clone, Debug, PartialEq)]
pub struct Pfm {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub data: Vec<f32>,
}

impl Pfm {
    pub fn from_rgb(width: u32, height: u32, pixels: &[Rgb]) -> Result<Self, IoError> {
        check_len(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            channels: 3,
            data: pixels.iter().flat_map(|p| [p.x as f32, p.y as f32, p.z as f32]).collect(),
        })
    }

    pub fn from_scalar(width: u32, height: u32, values: impl IntoIterator<Item = f64>) -> Result<Self, IoError> {
        let data: Vec<f32> = values.into_iter().map(|v| v as f32).collect();
        check_len(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            channels: 1,
            data,
        })
    }

    /// Bit-exact equality, so NaN payloads and signed zeros count.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.channels == other.channels
            && self.data.len() == other.data.len()
            && self.data.iter().zip(&other.data).all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub fn to_texture(&self) -> Result<Texture, IoError> {
        let pixels = match self.channels {
            1 => self.data.iter().map(|&v| [v, v, v, 1.0]).collect(),
            _ => self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2], 1.0]).collect(),
        };
        Ok(Texture::new(self.width, self.height, pixels)?)
    }
}

/// Little-endian PFM (scale −1). PFM stores the bottom row first.
pub fn encode_pfm(img: &Pfm) -> Result<Vec<u8>, IoError> {
    let c = img.channels as usize;
    if !(c == 1 || c == 3) {
        return Err(IoError::Malformed {
            format: "PFM",
            offset: 0,
            message: format!("{c} channels (need 1 or 3)"),
        });
    }
    check_len(img.width, img.height, img.data.len() / c)?;
    let magic = if c == 3 { "PF" } else { "Pf" };
    let mut out = format!("{magic}\n{} {}\n-1.0\n", img.width, img.height).into_bytes();
    let row = img.width as usize * c;
    for r in img.data.chunks_exact(row).rev() {
        for v in r {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn write_pfm(path: impl AsRef<Path>, img: &Pfm) -> Result<(), IoError> {
    write_file(path.as_ref(), &encode_pfm(img)?)
}

/// Reads the next whitespace-delimited header token, returning it and the
/// offset just past it.
fn header_token<'a>(bytes: &'a [u8], mut pos: usize, format: &'static str) -> Result<(&'a str, usize), IoError> {
    while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    let start = pos;
    while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    if start == pos {
        return Err(IoError::Malformed {
            format,
            offset: start,
            message: "truncated header".into(),
        });
    }
    let tok = std::str::from_utf8(&bytes[start..pos]).map_err(|_| IoError::Malformed {
        format,
        offset: start,
        message: "header is not text".into(),
    })?;
    Ok((tok, pos))
}

pub fn decode_pfm(bytes: &[u8]) -> Result<Pfm, IoError> {
    let bad = |offset, message: String| IoError::Malformed {
        format: "PFM",
        offset,
        message,
    };
    let (magic, pos) = header_token(bytes, 0, "PFM")?;
    let channels = match magic {
        "PF" => 3,
        "Pf" => 1,
        m => return Err(bad(0, format!("bad magic `{m}`"))),
    };
    let (w, p1) = header_token(bytes, pos, "PFM")?;
    let width: u32 = w.parse().map_err(|_| bad(pos, format!("bad width `{w}`")))?;
    let (h, p2) = header_token(bytes, p1, "PFM")?;
    let height: u32 = h.parse().map_err(|_| bad(p1, format!("bad height `{h}`")))?;
    let (s, p3) = header_token(bytes, p2, "PFM")?;
    let scale: f64 = s.parse().map_err(|_| bad(p2, format!("bad scale `{s}`")))?;
    if width == 0 || height == 0 || scale == 0.0 || !scale.is_finite() {
        return Err(bad(p2, format!("invalid header {width}x{height} scale {scale}")));
    }
    // exactly one whitespace byte separates the header from the data
    let data_start = p3 + 1;
    let count = width as usize * height as usize * channels;
    let expected = data_start + 4 * count;
    if bytes.len() < expected {
        return Err(bad(bytes.len(), format!("truncated data: need {expected} bytes")));
    }
    let little = scale < 0.0;
    let row = width as usize * channels;
    let mut data = vec![0f32; count];
    for (i, chunk) in bytes[data_start..expected].chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        let (file_row, col) = (i / row, i % row);
        data[(height as usize - 1 - file_row) * row + col] = v;
    }
    Ok(Pfm {
        width,
        height,
        channels: channels as u8,
        data,
    })
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<Pfm, IoError> {
    decode_pfm(&read_file(path.as_ref())?)
}

/// One RGBE texel: mantissa `m` and shared exponent `e` give
/// `m · 2^(e − 136)`, and `e = 0` is black.
pub fn rgbe_to_rgb(t: [u8; 4]) -> [f32; 3] {
    if t[3] == 0 {
        return [0.0; 3];
    }
    let f = 2f64.powi(t[3] as i32 - 136);
    [(t[0] as f64 * f) as f32, (t[1] as f64 * f) as f32, (t[2] as f64 * f) as f32]
}

/// Inverse of [`rgbe_to_rgb`] with round-to-nearest mantissas.
pub fn rgb_to_rgbe(c: Rgb) -> [u8; 4] {
    let v = c.max_component();
    if !(v >= 1e-32) || !v.is_finite() {
        return [0; 4];
    }
    // smallest e with v < 2^e · (256 − ½) so rounding stays below 256
    let mut e = v.log2().floor() as i32 + 1;
    if v * 2f64.powi(8 - e) >= 255.5 {
        e += 1;
    }
    let s = 2f64.powi(8 - e);
    let q = |x: f64| (x.max(0.0) * s).round().min(255.0) as u8;
    match u8::try_from(e + 128) {
        Ok(ex) if ex > 0 => [q(c.x), q(c.y), q(c.z), ex],
        _ => [0; 4],
    }
}

/// Radiance `.hdr` writer using run-length-encoded scanlines when the
/// width allows it.
pub fn encode_hdr(width: u32, height: u32, pixels: &[Rgb]) -> Result<Vec<u8>, IoError> {
    check_len(width, height, pixels.len())?;
    let mut out = format!("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y {height} +X {width}\n").into_bytes();
    let rle = (8..=0x7fff).contains(&width);
    for row in pixels.chunks_exact(width as usize) {
        let texels: Vec<[u8; 4]> = row.iter().map(|&p| rgb_to_rgbe(p)).collect();
        if !rle {
            texels.iter().for_each(|t| out.extend_from_slice(t));
            continue;
        }
        out.extend_from_slice(&[2, 2, (width >> 8) as u8, (width & 0xff) as u8]);
        for c in 0..4 {
            let chan: Vec<u8> = texels.iter().map(|t| t[c]).collect();
            encode_rle_channel(&chan, &mut out);
        }
    }
    Ok(out)
}

fn encode_rle_channel(data: &[u8], out: &mut Vec<u8>) {
    let mut i = 0;
    while i < data.len() {
        let mut run = 1;
        while i + run < data.len() && run < 127 && data[i + run] == data[i] {
            run += 1;
        }
        if run >= 3 {
            out.extend_from_slice(&[128 + run as u8, data[i]]);
            i += run;
            continue;
        }
        // literal dump up to the next run of three
        let start = i;
        while i < data.len() && i - start < 128 {
            if i + 2 < data.len() && data[i] == data[i + 1] && data[i] == data[i + 2] {
                break;
            }
            i += 1;
        }
        out.push((i - start) as u8);
        out.extend_from_slice(&data[start..i]);
    }
}

pub fn decode_hdr(bytes: &[u8]) -> Result<Texture, IoError> {
    let bad = |offset, message: String| IoError::Malformed {
        format: "HDR",
        offset,
        message,
    };
    let mut pos = 0;
    let line = |pos: &mut usize| -> Result<String, IoError> {
        let start = *pos;
        let end = bytes[start..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| start + i)
            .ok_or_else(|| bad(start, "unterminated header line".into()))?;
        *pos = end + 1;
        Ok(String::from_utf8_lossy(&bytes[start..end]).trim_end_matches('\r').to_string())
    };
    let magic = line(&mut pos)?;
    if !magic.starts_with("#?") {
        return Err(bad(0, "missing #? signature".into()));
    }
    loop {
        let at = pos;
        let l = line(&mut pos)?;
        if l.is_empty() {
            break;
        }
        if let Some(f) = l.strip_prefix("FORMAT=") {
            if f != "32-bit_rle_rgbe" {
                return Err(bad(at, format!("unsupported format {f}")));
            }
        }
    }
    let at = pos;
    let res = line(&mut pos)?;
    let parts: Vec<&str> = res.split_whitespace().collect();
    let (height, width) = match parts.as_slice() {
        ["-Y", h, "+X", w] => (
            h.parse::<u32>().map_err(|_| bad(at, format!("bad height in `{res}`")))?,
            w.parse::<u32>().map_err(|_| bad(at, format!("bad width in `{res}`")))?,
        ),
        _ => return Err(bad(at, format!("unsupported orientation `{res}`"))),
    };
    if width == 0 || height == 0 {
        return Err(bad(at, "empty image".into()));
    }

    let w = width as usize;
    let mut texels = Vec::with_capacity(w * height as usize);
    let mut scan = vec![[0u8; 4]; w];
    let byte = |p: usize| bytes.get(p).copied().ok_or_else(|| bad(p, "truncated scanline data".into()));
    for _ in 0..height {
        let b0 = byte(pos)?;
        let b1 = byte(pos + 1)?;
        let b2 = byte(pos + 2)?;
        if (8..=0x7fff).contains(&w) && b0 == 2 && b1 == 2 && b2 & 0x80 == 0 {
            let len = ((b2 as usize) << 8) | byte(pos + 3)? as usize;
            if len != w {
                return Err(bad(pos, format!("scanline length {len} != width {w}")));
            }
            pos += 4;
            for c in 0..4 {
                let mut x = 0;
                while x < w {
                    let n = byte(pos)? as usize;
                    pos += 1;
                    if n > 128 {
                        let count = n - 128;
                        let v = byte(pos)?;
                        pos += 1;
                        if x + count > w {
                            return Err(bad(pos - 2, "run overflows scanline".into()));
                        }
                        scan[x..x + count].iter_mut().for_each(|t| t[c] = v);
                        x += count;
                    } else {
                        if n == 0 || x + n > w {
                            return Err(bad(pos - 1, format!("bad literal count {n}")));
                        }
                        for t in &mut scan[x..x + n] {
                            t[c] = byte(pos)?;
                            pos += 1;
                        }
                        x += n;
                    }
                }
            }
        } else {
            // flat texels, with the original (1,1,1,n) repeat records
            let mut x = 0;
            let mut shift = 0;
            while x < w {
                let t = [byte(pos)?, byte(pos + 1)?, byte(pos + 2)?, byte(pos + 3)?];
                pos += 4;
                if t[0] == 1 && t[1] == 1 && t[2] == 1 {
                    if x == 0 {
                        return Err(bad(pos - 4, "repeat record at scanline start".into()));
                    }
                    let count = (t[3] as usize) << shift;
                    if x + count > w {
                        return Err(bad(pos - 4, "repeat overflows scanline".into()));
                    }
                    let prev = scan[x - 1];
                    scan[x..x + count].iter_mut().for_each(|s| *s = prev);
                    x += count;
                    shift += 8;
                } else {
                    scan[x] = t;
                    x += 1;
                    shift = 0;
                }
            }
        }
        texels.extend(scan.iter().map(|&t| {
            let [r, g, b] = rgbe_to_rgb(t);
            [r, g, b, 1.0]
        }));
    }
    Ok(Texture::new(width, height, texels)?)
}

pub fn read_hdr(path: impl AsRef<Path>) -> Result<Texture, IoError> {
    decode_hdr(&read_file(path.as_ref())?)
}

/// Loads a texture by extension: `.png`, `.pfm` or `.hdr`.
pub fn load_texture(path: impl AsRef<Path>) -> Result<Texture, IoError> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "png" => read_png(path),
        "pfm" => read_pfm(path)?.to_texture(),
        "hdr" => read_hdr(path),
        _ => Err(IoError::UnknownExtension(path.display().to_string())),
    }
}
