//! Radiance RGBE (.hdr) decoding and encoding.
//!
//! A pixel is four bytes (r, g, b, e): channel value = mantissa * 2^(e-136),
//! and e = 0 means black. Only the "-Y H +X W" orientation is accepted.
//! Scanlines may be flat (4 bytes per pixel) or new-style RLE. All decode
//! errors carry the byte offset at which parsing failed.

use crate::error::{Error, Result};
use crate::math::Vec3;

/// Decoded HDR grid, row-major, row 0 first (top row of the file).
#[derive(Debug, Clone, PartialEq)]
pub struct HdrImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Vec3>,
}

impl HdrImage {
    pub fn pixel(&self, x: usize, y: usize) -> Vec3 {
        self.pixels[y * self.width + x]
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn fail<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(Error::HdrFormat {
            offset: self.pos,
            reason: reason.into(),
        })
    }

    fn read_byte(&mut self) -> Result<u8> {
        match self.bytes.get(self.pos) {
            Some(&b) => {
                self.pos += 1;
                Ok(b)
            }
            None => self.fail("unexpected end of data"),
        }
    }

    fn read_exact(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return self.fail(format!("need {n} bytes, input truncated"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    /// Reads up to a newline; the newline is consumed but not returned.
    fn read_line(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'\n' {
                let line = &self.bytes[start..self.pos];
                self.pos += 1;
                return match std::str::from_utf8(line) {
                    Ok(s) => Ok(s),
                    Err(_) => {
                        self.pos = start;
                        self.fail("header line is not valid UTF-8")
                    }
                };
            }
            self.pos += 1;
            if self.pos - start > 4096 {
                self.pos = start;
                return self.fail("header line longer than 4096 bytes");
            }
        }
        self.pos = start;
        self.fail("unterminated header line")
    }
}

fn decode_rgbe(p: [u8; 4]) -> Vec3 {
    if p[3] == 0 {
        return Vec3::ZERO;
    }
    let scale = (2.0f64).powi(p[3] as i32 - 136);
    Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64) * scale
}

fn encode_rgbe(v: Vec3) -> [u8; 4] {
    let max = v.x.max(v.y).max(v.z);
    if !(max > 1e-38) {
        return [0, 0, 0, 0];
    }
    // Normalize max into [0.5, 1): max = m * 2^e. Halving/doubling is exact.
    let mut e = 0i32;
    let mut m = max;
    while m >= 1.0 {
        m *= 0.5;
        e += 1;
    }
    while m < 0.5 {
        m *= 2.0;
        e -= 1;
    }
    if e + 128 > 255 {
        return [255, 255, 255, 255];
    }
    if e + 128 < 1 {
        return [0, 0, 0, 0];
    }
    let scale = (2.0f64).powi(8 - e);
    [
        (v.x * scale).min(255.0) as u8,
        (v.y * scale).min(255.0) as u8,
        (v.z * scale).min(255.0) as u8,
        (e + 128) as u8,
    ]
}

fn rle_allowed(width: usize) -> bool {
    (8..=0x7fff).contains(&width)
}

fn decode_scanline(r: &mut Reader, width: usize) -> Result<Vec<[u8; 4]>> {
    if rle_allowed(width) && r.pos + 4 <= r.bytes.len() {
        let head = &r.bytes[r.pos..r.pos + 4];
        if head[0] == 2 && head[1] == 2 && head[2] & 0x80 == 0 {
            let declared = ((head[2] as usize) << 8) | head[3] as usize;
            if declared != width {
                r.pos += 2;
                return r.fail(format!(
                    "RLE scanline declares width {declared}, expected {width}"
                ));
            }
            r.pos += 4;
            return decode_rle_components(r, width);
        }
    }
    let raw = r.read_exact(width * 4)?;
    Ok(raw
        .chunks_exact(4)
        .map(|c| [c[0], c[1], c[2], c[3]])
        .collect())
}

/// New-style RLE: the four components are stored one after another, each as
/// runs (count > 128: count-128 copies) and literals (count 1..=128 bytes).
fn decode_rle_components(r: &mut Reader, width: usize) -> Result<Vec<[u8; 4]>> {
    let mut pixels = vec![[0u8; 4]; width];
    for component in 0..4 {
        let mut filled = 0usize;
        while filled < width {
            let count = r.read_byte()?;
            if count > 128 {
                let run = count as usize - 128;
                if filled + run > width {
                    return r.fail("RLE run overflows scanline");
                }
                let value = r.read_byte()?;
                for p in &mut pixels[filled..filled + run] {
                    p[component] = value;
                }
                filled += run;
            } else if count > 0 {
                let n = count as usize;
                if filled + n > width {
                    return r.fail("RLE literal overflows scanline");
                }
                let data = r.read_exact(n)?;
                for (p, &b) in pixels[filled..filled + n].iter_mut().zip(data) {
                    p[component] = b;
                }
                filled += n;
            } else {
                return r.fail("zero-length RLE count");
            }
        }
    }
    Ok(pixels)
}

/// Parse a complete Radiance RGBE byte stream.
pub fn decode_hdr(bytes: &[u8]) -> Result<HdrImage> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.read_line()?;
    if !magic.starts_with("#?RADIANCE") && !magic.starts_with("#?RGBE") {
        return Err(Error::HdrFormat {
            offset: 0,
            reason: "missing #?RADIANCE / #?RGBE signature".into(),
        });
    }
    loop {
        let line_start = r.pos;
        let line = r.read_line()?;
        if line.is_empty() {
            break;
        }
        if let Some(fmt) = line.strip_prefix("FORMAT=") {
            if fmt.trim() != "32-bit_rle_rgbe" {
                return Err(Error::HdrFormat {
                    offset: line_start,
                    reason: format!("unsupported FORMAT \"{}\"", fmt.trim()),
                });
            }
        }
        // Comments, EXPOSURE, and other header variables are ignored.
    }
    let res_start = r.pos;
    let res = r.read_line()?;
    let fields: Vec<&str> = res.split_whitespace().collect();
    let (height, width) = match fields.as_slice() {
        ["-Y", h, "+X", w] => match (h.parse::<usize>(), w.parse::<usize>()) {
            (Ok(h), Ok(w)) if h >= 1 && w >= 1 => (h, w),
            _ => {
                return Err(Error::HdrFormat {
                    offset: res_start,
                    reason: format!("bad resolution values in \"{res}\""),
                })
            }
        },
        _ => {
            return Err(Error::HdrFormat {
                offset: res_start,
                reason: format!("unsupported orientation \"{res}\" (expected \"-Y H +X W\")"),
            })
        }
    };
    if width.saturating_mul(height) > 1 << 28 {
        return Err(Error::HdrFormat {
            offset: res_start,
            reason: format!("{width}x{height} exceeds the decoder size limit"),
        });
    }

    let mut pixels = Vec::with_capacity(width * height);
    for _ in 0..height {
        let row = decode_scanline(&mut r, width)?;
        pixels.extend(row.into_iter().map(decode_rgbe));
    }
    Ok(HdrImage {
        width,
        height,
        pixels,
    })
}

/// Serialize a grid as Radiance RGBE. Rows wide enough for new-style RLE
/// are run-length encoded; narrow or very wide rows are written flat.
pub fn encode_hdr(image: &HdrImage) -> Vec<u8> {
    assert_eq!(
        image.pixels.len(),
        image.width * image.height,
        "pixel count mismatch"
    );
    let mut out = Vec::new();
    out.extend_from_slice(b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n");
    out.extend_from_slice(format!("-Y {} +X {}\n", image.height, image.width).as_bytes());
    for y in 0..image.height {
        let row: Vec<[u8; 4]> = (0..image.width)
            .map(|x| encode_rgbe(image.pixel(x, y)))
            .collect();
        if rle_allowed(image.width) {
            out.push(2);
            out.push(2);
            out.push((image.width >> 8) as u8);
            out.push((image.width & 0xff) as u8);
            for component in 0..4 {
                let col: Vec<u8> = row.iter().map(|p| p[component]).collect();
                encode_rle_component(&col, &mut out);
            }
        } else {
            for p in &row {
                out.extend_from_slice(p);
            }
        }
    }
    out
}

fn encode_rle_component(col: &[u8], out: &mut Vec<u8>) {
    let mut i = 0;
    while i < col.len() {
        let mut run = 1;
        while run < 127 && i + run < col.len() && col[i + run] == col[i] {
            run += 1;
        }
        if run >= 4 {
            out.push(128 + run as u8);
            out.push(col[i]);
            i += run;
        } else {
            // Literal block: stop where a run of >= 4 begins or at 128 bytes.
            let start = i;
            let mut j = i;
            while j < col.len() && j - start < 128 {
                let mut ahead = 1;
                while ahead < 4 && j + ahead < col.len() && col[j + ahead] == col[j] {
                    ahead += 1;
                }
                if ahead >= 4 {
                    break;
                }
                j += 1;
            }
            out.push((j - start) as u8);
            out.extend_from_slice(&col[start..j]);
            i = j;
        }
    }
}
