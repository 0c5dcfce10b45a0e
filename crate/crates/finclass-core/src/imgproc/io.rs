use super::image::Image;
use crate::error::{Error, Result};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Read a PNG, binary PPM (P6) or binary PGM (P5) file, dispatching on the
/// magic bytes. PNG decodes to RGB; PGM stays single-channel.
pub fn read_image(path: &Path) -> Result<Image> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        return decode_pnm(&bytes);
    }
    if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        let decoded = image::load_from_memory(&bytes)
            .map_err(|e| Error::Decode(format!("{}: {e}", path.display())))?;
        let rgb = decoded.to_rgb8();
        return Image::new(rgb.width() as usize, rgb.height() as usize, 3, rgb.into_raw());
    }
    Err(Error::Decode(format!(
        "{}: not a PNG, P5 or P6 file",
        path.display()
    )))
}

/// Write a single-channel image as binary PGM (P5).
pub fn write_pgm(path: &Path, img: &Image) -> Result<()> {
    if img.channels() != 1 {
        return Err(Error::InvalidInput("PGM output requires 1 channel".into()));
    }
    write_pnm(path, b"P5", img)
}

/// Write an RGB image as binary PPM (P6).
pub fn write_ppm(path: &Path, img: &Image) -> Result<()> {
    if img.channels() != 3 {
        return Err(Error::InvalidInput("PPM output requires 3 channels".into()));
    }
    write_pnm(path, b"P6", img)
}

/// Write an image as PNG (gray or RGB).
pub fn write_png(path: &Path, img: &Image) -> Result<()> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let result = match img.channels() {
        1 => image::GrayImage::from_raw(w, h, img.data().to_vec())
            .expect("dimension invariant")
            .save_with_format(path, image::ImageFormat::Png),
        3 => image::RgbImage::from_raw(w, h, img.data().to_vec())
            .expect("dimension invariant")
            .save_with_format(path, image::ImageFormat::Png),
        n => return Err(Error::InvalidInput(format!("PNG output for {n} channels"))),
    };
    result.map_err(|e| Error::Decode(format!("{}: {e}", path.display())))
}

fn write_pnm(path: &Path, magic: &[u8], img: &Image) -> Result<()> {
    let mut out = Vec::with_capacity(img.data().len() + 32);
    out.extend_from_slice(magic);
    out.extend_from_slice(format!("\n{} {}\n255\n", img.width(), img.height()).as_bytes());
    out.extend_from_slice(img.data());
    let mut f = fs::File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}

fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let channels = if bytes.starts_with(b"P5") { 1 } else { 3 };
    let mut pos = 2usize;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        *field = parse_pnm_int(bytes, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Decode(format!("unsupported PNM maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let need = width * height * channels;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::Decode("truncated PNM raster".into()))?;
    Image::new(width, height, channels, raster.to_vec())
}

fn parse_pnm_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    // Skip whitespace and '#' comments.
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(Error::Decode("truncated PNM header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| b.is_ascii_digit()) {
        *pos += 1;
    }
    if *pos == start {
        return Err(Error::Decode("malformed PNM header".into()));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Decode("malformed PNM header".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        let img = Image::new(3, 2, 1, vec![0, 60, 120, 180, 240, 255]).unwrap();
        write_pgm(&path, &img).unwrap();
        assert_eq!(read_image(&path).unwrap(), img);
    }

    #[test]
    fn ppm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ppm");
        let img = Image::new(2, 2, 3, (0..12).map(|v| v * 20).collect()).unwrap();
        write_ppm(&path, &img).unwrap();
        assert_eq!(read_image(&path).unwrap(), img);
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.png");
        let img = Image::new(4, 3, 3, (0..36).map(|v| (v * 7) as u8).collect()).unwrap();
        write_png(&path, &img).unwrap();
        assert_eq!(read_image(&path).unwrap(), img);
    }

    #[test]
    fn pnm_header_with_comments() {
        let bytes = b"P5\n# a comment\n 3 2\n255\nabcdef";
        let img = decode_pnm(bytes).unwrap();
        assert_eq!(img.width(), 3);
        assert_eq!(img.height(), 2);
        assert_eq!(img.data(), b"abcdef");
    }

    #[test]
    fn junk_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.dat");
        fs::write(&path, b"not an image at all").unwrap();
        assert!(read_image(&path).is_err());
    }

    #[test]
    fn truncated_pnm_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        fs::write(&path, b"P5\n4 4\n255\nxx").unwrap();
        assert!(read_image(&path).is_err());
    }
}
