//! Plain PBM (`P1`) reading and writing for square binary images.

use std::fs;
use std::path::Path;

use super::{BinaryImage, HammingError};

/// Encodes as `P1`, then `n n`, then one line per row of space-separated bits.
pub fn to_pbm(img: &BinaryImage) -> String {
    let n = img.side();
    let mut out = format!("P1\n{n} {n}\n");
    for i in 0..n {
        let row: Vec<&str> = (0..n)
            .map(|j| if img.pixel(i, j) { "1" } else { "0" })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Decodes a plain PBM. Comments (`#` to end of line) are skipped and pixel
/// digits may be packed without separators, as the format allows.
pub fn from_pbm(text: &str) -> Result<BinaryImage, HammingError> {
    let stripped: String = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n");
    let mut tokens = stripped.split_whitespace();
    match tokens.next() {
        Some("P1") => {}
        Some(other) => return Err(HammingError::Malformed(format!("bad magic {other:?}"))),
        None => return Err(HammingError::Malformed("empty file".into())),
    }
    let mut dim = || -> Result<usize, HammingError> {
        tokens
            .next()
            .ok_or_else(|| HammingError::Malformed("missing dimensions".into()))?
            .parse()
            .map_err(|e| HammingError::Malformed(format!("bad dimension: {e}")))
    };
    let (width, height) = (dim()?, dim()?);
    if width != height {
        return Err(HammingError::Malformed(format!(
            "image is {width}x{height}, only square images are supported"
        )));
    }
    let n = width;
    let digits: Vec<char> = tokens.flat_map(|t| t.chars()).collect();
    if digits.len() != n * n {
        return Err(HammingError::Malformed(format!(
            "expected {} pixels, found {}",
            n * n,
            digits.len()
        )));
    }
    let mut img = BinaryImage::try_zeros(n)?;
    for (p, c) in digits.into_iter().enumerate() {
        match c {
            '0' => {}
            '1' => img = img.flip(p),
            other => return Err(HammingError::Malformed(format!("bad pixel {other:?}"))),
        }
    }
    Ok(img)
}

pub fn read_pbm(path: &Path) -> Result<BinaryImage, HammingError> {
    let text = fs::read_to_string(path).map_err(|e| HammingError::Io(format!("{}: {e}", path.display())))?;
    from_pbm(&text).map_err(|e| match e {
        HammingError::Malformed(m) => HammingError::Malformed(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_pbm(path: &Path, img: &BinaryImage) -> Result<(), HammingError> {
    fs::write(path, to_pbm(img)).map_err(|e| HammingError::Io(format!("{}: {e}", path.display())))
}
