use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::HammingError;

/// Largest supported side length; an image is packed into one `u64`.
pub const MAX_SIDE: usize = 8;

/// An `n x n` matrix over F2, packed row-major with pixel `(i, j)` at bit `i * n + j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryImage {
    n: u8,
    bits: u64,
}

/// Bit mask covering all `n * n` pixels.
pub fn pixel_mask(n: usize) -> u64 {
    let pixels = n * n;
    if pixels >= 64 {
        u64::MAX
    } else {
        (1u64 << pixels) - 1
    }
}

fn check_side(n: usize) -> Result<(), HammingError> {
    if n == 0 || n > MAX_SIDE {
        Err(HammingError::UnsupportedSize(n))
    } else {
        Ok(())
    }
}

impl BinaryImage {
    /// The all-zero image. Panics if `n` is 0 or larger than [`MAX_SIDE`].
    pub fn zeros(n: usize) -> Self {
        check_side(n).expect("image side out of range");
        BinaryImage { n: n as u8, bits: 0 }
    }

    pub fn ones(n: usize) -> Self {
        check_side(n).expect("image side out of range");
        BinaryImage {
            n: n as u8,
            bits: pixel_mask(n),
        }
    }

    pub fn from_bits(n: usize, bits: u64) -> Result<Self, HammingError> {
        check_side(n)?;
        if bits & !pixel_mask(n) != 0 {
            return Err(HammingError::StrayBits { n, bits });
        }
        Ok(BinaryImage { n: n as u8, bits })
    }

    /// Image with exactly the listed pixels set.
    pub fn from_pixels(n: usize, pixels: &[(usize, usize)]) -> Result<Self, HammingError> {
        let mut img = BinaryImage::try_zeros(n)?;
        for &(i, j) in pixels {
            img = img.with_pixel(i, j, true)?;
        }
        Ok(img)
    }

    pub fn try_zeros(n: usize) -> Result<Self, HammingError> {
        check_side(n)?;
        Ok(BinaryImage { n: n as u8, bits: 0 })
    }

    /// Parses rows of `0`/`1` characters, e.g. `["01", "10"]`.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, HammingError> {
        let n = rows.len();
        check_side(n)?;
        let mut bits = 0u64;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.chars().count() != n {
                return Err(HammingError::Malformed(format!(
                    "row {i} has {} pixels, expected {n}",
                    row.chars().count()
                )));
            }
            for (j, c) in row.chars().enumerate() {
                match c {
                    '0' => {}
                    '1' => bits |= 1 << (i * n + j),
                    other => {
                        return Err(HammingError::Malformed(format!(
                            "unexpected pixel character {other:?}"
                        )))
                    }
                }
            }
        }
        Ok(BinaryImage { n: n as u8, bits })
    }

    pub fn to_rows(&self) -> Vec<String> {
        let n = self.side();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if self.pixel(i, j) { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        check_side(n).expect("image side out of range");
        BinaryImage {
            n: n as u8,
            bits: rng.gen::<u64>() & pixel_mask(n),
        }
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn pixel(&self, i: usize, j: usize) -> bool {
        let n = self.side();
        assert!(i < n && j < n, "pixel ({i}, {j}) outside {n}x{n} image");
        self.bits >> (i * n + j) & 1 == 1
    }

    pub fn with_pixel(self, i: usize, j: usize, value: bool) -> Result<Self, HammingError> {
        let n = self.side();
        if i >= n || j >= n {
            return Err(HammingError::PixelOutOfRange { n, i, j });
        }
        let bit = 1u64 << (i * n + j);
        let bits = if value { self.bits | bit } else { self.bits & !bit };
        Ok(BinaryImage { n: self.n, bits })
    }

    /// Flips the pixel at flat index `p = i * n + j`.
    pub fn flip(self, p: usize) -> Self {
        assert!(p < self.side() * self.side());
        BinaryImage {
            n: self.n,
            bits: self.bits ^ (1 << p),
        }
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    fn same_size(&self, other: &Self) -> Result<(), HammingError> {
        if self.n != other.n {
            Err(HammingError::SizeMismatch {
                left: self.side(),
                right: other.side(),
            })
        } else {
            Ok(())
        }
    }

    pub fn distance(&self, other: &Self) -> Result<u32, HammingError> {
        self.same_size(other)?;
        Ok((self.bits ^ other.bits).count_ones())
    }

    /// Entrywise sum over F2.
    pub fn xor(&self, other: &Self) -> Result<Self, HammingError> {
        self.same_size(other)?;
        Ok(BinaryImage {
            n: self.n,
            bits: self.bits ^ other.bits,
        })
    }

    /// Hadamard product over F2.
    pub fn hadamard(&self, other: &Self) -> Result<Self, HammingError> {
        self.same_size(other)?;
        Ok(BinaryImage {
            n: self.n,
            bits: self.bits & other.bits,
        })
    }

    /// Standard dot product in F2^(n*n).
    pub fn dot(&self, other: &Self) -> Result<bool, HammingError> {
        self.same_size(other)?;
        Ok((self.bits & other.bits).count_ones() % 2 == 1)
    }
}

pub fn hamming_distance(a: &BinaryImage, b: &BinaryImage) -> Result<u32, HammingError> {
    a.distance(b)
}

pub fn hamming_weight(a: &BinaryImage) -> u32 {
    a.weight()
}

/// Adjacency in the Hamming graph: at most one differing pixel, loops included.
pub fn adjacent(a: &BinaryImage, b: &BinaryImage) -> Result<bool, HammingError> {
    Ok(a.distance(b)? <= 1)
}

/// The `n * n` single-pixel images, in row-major pixel order.
pub fn standard_basis(n: usize) -> Vec<BinaryImage> {
    (0..n * n)
        .map(|p| BinaryImage::zeros(n).flip(p))
        .collect()
}

impl fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryImage[{}]", self.to_rows().join("/"))
    }
}

impl fmt::Display for BinaryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rows().join("/"))
    }
}

impl Serialize for BinaryImage {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BinaryImage {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<String>::deserialize(deserializer)?;
        BinaryImage::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let z = BinaryImage::zeros(3);
        let e = BinaryImage::from_pixels(3, &[(1, 2)]).unwrap();
        assert_eq!(hamming_distance(&z, &z).unwrap(), 0);
        assert_eq!(hamming_distance(&z, &e).unwrap(), 1);
        assert_eq!(hamming_distance(&z, &BinaryImage::ones(3)).unwrap(), 9);
        assert!(hamming_distance(&z, &BinaryImage::zeros(2)).is_err());
    }

    #[test]
    fn weight_examples() {
        assert_eq!(hamming_weight(&BinaryImage::zeros(4)), 0);
        assert_eq!(hamming_weight(&BinaryImage::ones(2)), 4);
        for e in standard_basis(3) {
            assert_eq!(e.weight(), 1);
        }
    }

    #[test]
    fn adjacency_examples() {
        let z = BinaryImage::zeros(2);
        let e = BinaryImage::from_pixels(2, &[(0, 0)]).unwrap();
        let two = BinaryImage::from_pixels(2, &[(0, 0), (1, 1)]).unwrap();
        assert!(adjacent(&z, &z).unwrap());
        assert!(adjacent(&z, &e).unwrap());
        assert!(!adjacent(&z, &two).unwrap());
    }

    #[test]
    fn standard_basis_sizes() {
        assert_eq!(standard_basis(1).len(), 1);
        assert_eq!(standard_basis(2).len(), 4);
        assert_eq!(standard_basis(5).len(), 25);
    }

    #[test]
    fn adjacency_is_sum_in_basis_or_zero() {
        let basis = standard_basis(2);
        for x in 0..16u64 {
            for y in 0..16u64 {
                let a = BinaryImage::from_bits(2, x).unwrap();
                let b = BinaryImage::from_bits(2, y).unwrap();
                let sum = a.xor(&b).unwrap();
                let in_basis = sum.bits() == 0 || basis.contains(&sum);
                assert_eq!(adjacent(&a, &b).unwrap(), in_basis);
            }
        }
    }

    #[test]
    fn rows_round_trip() {
        let img = BinaryImage::from_rows(&["010", "001", "111"]).unwrap();
        assert!(img.pixel(0, 1));
        assert!(img.pixel(1, 2));
        assert!(!img.pixel(1, 0));
        assert_eq!(BinaryImage::from_rows(&img.to_rows()).unwrap(), img);
        assert!(BinaryImage::from_rows(&["01", "1"]).is_err());
        assert!(BinaryImage::from_rows(&["0x", "10"]).is_err());
    }

    #[test]
    fn size_limits() {
        assert!(BinaryImage::try_zeros(0).is_err());
        assert!(BinaryImage::try_zeros(9).is_err());
        assert_eq!(BinaryImage::ones(8).weight(), 64);
        assert!(BinaryImage::from_bits(2, 1 << 4).is_err());
    }
}
