//! The dihedral group of the square acting on pixel positions.
//!
//! Group elements are the isometries generated by `r = [[0,-1],[1,0]]` and
//! `s = [[1,0],[0,-1]]`, acting on column vectors. Symbols name `r^k` and
//! `s r^k` (matrix product `s * r^k`). Pixels are moved into centered
//! coordinates by [`gamma`], acted on, and mapped back by [`gamma_inverse`].

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HammingError;

pub type Matrix2 = [[i32; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DihedralElement {
    E,
    R,
    R2,
    R3,
    S,
    SR,
    SR2,
    SR3,
}

const ROT: Matrix2 = [[0, -1], [1, 0]];
const REFL: Matrix2 = [[1, 0], [0, -1]];
const ID: Matrix2 = [[1, 0], [0, 1]];

fn mat_mul(a: Matrix2, b: Matrix2) -> Matrix2 {
    let mut out = [[0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

impl DihedralElement {
    pub const ALL: [DihedralElement; 8] = [
        DihedralElement::E,
        DihedralElement::R,
        DihedralElement::R2,
        DihedralElement::R3,
        DihedralElement::S,
        DihedralElement::SR,
        DihedralElement::SR2,
        DihedralElement::SR3,
    ];

    fn rotations(self) -> usize {
        (self as usize) % 4
    }

    fn reflects(self) -> bool {
        (self as usize) >= 4
    }

    pub fn matrix(self) -> Matrix2 {
        let mut m = if self.reflects() { REFL } else { ID };
        for _ in 0..self.rotations() {
            m = mat_mul(m, ROT);
        }
        m
    }

    pub fn from_matrix(m: Matrix2) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.matrix() == m)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            DihedralElement::E => "e",
            DihedralElement::R => "r",
            DihedralElement::R2 => "r2",
            DihedralElement::R3 => "r3",
            DihedralElement::S => "s",
            DihedralElement::SR => "sr",
            DihedralElement::SR2 => "sr2",
            DihedralElement::SR3 => "sr3",
        }
    }

    pub fn inverse(self) -> Self {
        Self::ALL
            .into_iter()
            .find(|&g| g * self == DihedralElement::E)
            .expect("group elements are invertible")
    }

    /// Applies the matrix to a column vector `(x, y)`.
    pub fn act(self, (x, y): (i32, i32)) -> (i32, i32) {
        let m = self.matrix();
        (m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y)
    }

    /// Flat pixel permutation `p -> gamma^-1(sigma(gamma(p)))` for side `n`.
    ///
    /// The dihedral endomorphism reads output pixel `p` from input pixel `perm[p]`.
    pub fn pixel_permutation(self, n: usize) -> Vec<usize> {
        (0..n * n)
            .map(|p| {
                let c = gamma(n, (p / n, p % n)).expect("pixel in range");
                let (i, j) = gamma_inverse(n, self.act(c)).expect("D4 stabilizes U_n");
                i * n + j
            })
            .collect()
    }
}

/// Applies the dihedral endomorphism for `sigma` to a packed `n x n` image.
pub(crate) fn permute_bits(sigma: DihedralElement, n: usize, bits: u64) -> u64 {
    if sigma == DihedralElement::E {
        return bits;
    }
    let mut out = 0u64;
    for p in 0..n * n {
        let c = gamma(n, (p / n, p % n)).expect("pixel in range");
        let (i, j) = gamma_inverse(n, sigma.act(c)).expect("D4 stabilizes U_n");
        out |= (bits >> (i * n + j) & 1) << p;
    }
    out
}

impl Mul for DihedralElement {
    type Output = DihedralElement;

    /// Matrix product.
    fn mul(self, rhs: Self) -> Self {
        DihedralElement::from_matrix(mat_mul(self.matrix(), rhs.matrix()))
            .expect("D4 is closed under multiplication")
    }
}

impl fmt::Display for DihedralElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for DihedralElement {
    type Err = HammingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|g| g.symbol() == s)
            .ok_or_else(|| HammingError::UnknownDihedral(s.to_string()))
    }
}

impl From<DihedralElement> for String {
    fn from(g: DihedralElement) -> String {
        g.symbol().to_string()
    }
}

impl TryFrom<String> for DihedralElement {
    type Error = HammingError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Whether `(x, y)` lies in the centered coordinate set `U_n`.
pub fn in_centered_set(n: usize, (x, y): (i32, i32)) -> bool {
    let h = (n / 2) as i32;
    let in_square = (-h..=h).contains(&x) && (-h..=h).contains(&y);
    if n % 2 == 1 {
        in_square
    } else {
        in_square && x != 0 && y != 0
    }
}

/// Maps pixel `(i, j)` of an `n x n` image to centered coordinates.
///
/// Odd `n` uses `(-h + j, h - i)` with `h = n / 2`. Even `n` skips the zero
/// row and column, shifting the lower and right halves outward by one.
pub fn gamma(n: usize, (i, j): (usize, usize)) -> Result<(i32, i32), HammingError> {
    if n == 0 || i >= n || j >= n {
        return Err(HammingError::PixelOutOfRange { n, i, j });
    }
    let h = (n / 2) as i32;
    let (i, j) = (i as i32, j as i32);
    if n % 2 == 1 {
        return Ok((-h + j, h - i));
    }
    // i < n/2 and j < n/2 for even n are the same as i < h, j < h.
    let x = if j < h { -h + j } else { -h + j + 1 };
    let y = if i < h { h - i } else { h - i - 1 };
    Ok((x, y))
}

pub fn gamma_inverse(n: usize, (x, y): (i32, i32)) -> Result<(usize, usize), HammingError> {
    if n == 0 || !in_centered_set(n, (x, y)) {
        return Err(HammingError::CoordinateOutOfRange { n, x, y });
    }
    let h = (n / 2) as i32;
    let (i, j) = if n % 2 == 1 {
        (h - y, x + h)
    } else {
        let j = if x < 0 { x + h } else { x + h - 1 };
        let i = if y > 0 { h - y } else { h - 1 - y };
        (i, j)
    };
    Ok((i as usize, j as usize))
}
