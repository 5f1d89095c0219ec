//! Board data model and colorimetry.
//!
//! A board is the 16 × 30 grid of colorimeter measurements (CIE xyY per
//! cell). Every cell also carries its sRGB rendering, computed once at load
//! time, which is what gets shown to humans and handed to models as a flat
//! stimulus.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ROWS: usize = 16;
pub const COLS: usize = 30;
pub const CELL_COUNT: usize = ROWS * COLS;

/// D65 white point chromaticity.
pub const D65: Chromaticity = Chromaticity { x: 0.3127, y: 0.3290 };

// sRGB primaries (IEC 61966-2-1).
const SRGB_PRIMARIES: [[f64; 2]; 3] = [[0.64, 0.33], [0.30, 0.60], [0.15, 0.06]];

/// Linear channels may overshoot [0, 1] by rounding noise without counting as clipped.
const GAMUT_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ColorError {
    #[error("degenerate chromaticity: y = 0")]
    DegenerateChromaticity,
    #[error("invalid chromaticity ({x}, {y}): need x > 0, y > 0, x + y < 1")]
    InvalidChromaticity { x: f64, y: f64 },
    #[error("stimulus must be at least 1x1 pixels, got {width}x{height}")]
    EmptyImage { width: u32, height: u32 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("cell ({row}, {col}) is outside the 16x30 board")]
    OutOfRange { row: usize, col: usize },
    #[error("malformed cell label {0:?}")]
    MalformedLabel(String),
}

#[derive(Debug, Error)]
pub enum BoardError {
    #[error("board is missing cell {label} (row {row}, col {col})")]
    MissingCell { row: usize, col: usize, label: String },
    #[error("cell (row {row}, col {col}) appears more than once")]
    DuplicateCell { row: usize, col: usize },
    #[error("cell (row {row}, col {col}) is outside the 16x30 board")]
    CellOutOfRange { row: usize, col: usize },
    #[error("cell (row {row}, col {col}) has invalid chromaticity ({x}, {y})")]
    InvalidChromaticity { row: usize, col: usize, x: f64, y: f64 },
    #[error("cell (row {row}, col {col}) has invalid luminance Y = {luminance}")]
    InvalidLuminance { row: usize, col: usize, luminance: f64 },
    #[error("malformed board CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A CIE 1931 xy chromaticity coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chromaticity {
    pub x: f64,
    pub y: f64,
}

impl Chromaticity {
    pub fn new(x: f64, y: f64) -> Result<Self, ColorError> {
        let c = Chromaticity { x, y };
        if c.is_valid() {
            Ok(c)
        } else {
            Err(ColorError::InvalidChromaticity { x, y })
        }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.x > 0.0 && self.y > 0.0 && self.x + self.y < 1.0
    }

    /// Squared Euclidean distance in the xy plane.
    pub fn distance_sq(&self, other: &Chromaticity) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// CIE 1931 tristimulus values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Xyz {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Xyz {
    /// Projects back onto the xy chromaticity plane.
    pub fn chromaticity(&self) -> (f64, f64) {
        let sum = self.x + self.y + self.z;
        (self.x / sum, self.y / sum)
    }
}

/// An 8-bit sRGB triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Srgb8(pub [u8; 3]);

impl Srgb8 {
    pub fn hex(&self) -> String {
        let [r, g, b] = self.0;
        format!("#{r:02X}{g:02X}{b:02X}")
    }
}

impl fmt::Display for Srgb8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

/// Position of a cell on the board, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellPos {
    pub row: usize,
    pub col: usize,
}

impl CellPos {
    pub fn new(row: usize, col: usize) -> Result<Self, LabelError> {
        if row < ROWS && col < COLS {
            Ok(CellPos { row, col })
        } else {
            Err(LabelError::OutOfRange { row, col })
        }
    }

    /// Linear index `row * 30 + col`, used for ids on the wire and tie-breaks.
    pub fn index(&self) -> usize {
        self.row * COLS + self.col
    }

    pub fn from_index(index: usize) -> Option<Self> {
        (index < CELL_COUNT).then_some(CellPos { row: index / COLS, col: index % COLS })
    }

    /// Chebyshev (king-move) distance.
    pub fn chebyshev(&self, other: &CellPos) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }

    pub fn label(&self) -> String {
        // Constructed positions are always in range.
        grid_label(self.row, self.col).expect("CellPos in range")
    }

    pub fn all() -> impl Iterator<Item = CellPos> {
        (0..CELL_COUNT).map(|i| CellPos { row: i / COLS, col: i % COLS })
    }
}

impl fmt::Display for CellPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for CellPos {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (row, col) = parse_label(s)?;
        Ok(CellPos { row, col })
    }
}

/// Row letter A–P followed by the 1-based column, e.g. `(1, 6)` → `"B7"`.
pub fn grid_label(row: usize, col: usize) -> Result<String, LabelError> {
    if row >= ROWS || col >= COLS {
        return Err(LabelError::OutOfRange { row, col });
    }
    Ok(format!("{}{}", (b'A' + row as u8) as char, col + 1))
}

pub fn parse_label(text: &str) -> Result<(usize, usize), LabelError> {
    let malformed = || LabelError::MalformedLabel(text.to_string());
    let mut chars = text.chars();
    let letter = chars.next().ok_or_else(malformed)?.to_ascii_uppercase();
    if !letter.is_ascii_uppercase() {
        return Err(malformed());
    }
    let digits = chars.as_str();
    if digits.is_empty() || digits.len() > 2 || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return Err(malformed());
    }
    let row = (letter as u8 - b'A') as usize;
    let col: usize = digits.parse().map_err(|_| malformed())?;
    if row >= ROWS || col == 0 || col > COLS {
        return Err(malformed());
    }
    Ok((row, col - 1))
}

/// `X = xY/y`, `Z = (1 − x − y)Y/y`.
pub fn xyy_to_xyz(x: f64, y: f64, luminance: f64) -> Result<Xyz, ColorError> {
    if y == 0.0 {
        return Err(ColorError::DegenerateChromaticity);
    }
    Ok(Xyz { x: x * luminance / y, y: luminance, z: (1.0 - x - y) * luminance / y })
}

/// XYZ → linear sRGB matrix, derived from the sRGB primaries and the D65
/// white point so that white maps to (1, 1, 1) up to rounding.
static XYZ_TO_LINEAR_SRGB: LazyLock<[[f64; 3]; 3]> = LazyLock::new(|| {
    // Columns: XYZ of each primary at unit luminance.
    let mut p = [[0.0; 3]; 3];
    for (j, [x, y]) in SRGB_PRIMARIES.iter().enumerate() {
        p[0][j] = x / y;
        p[1][j] = 1.0;
        p[2][j] = (1.0 - x - y) / y;
    }
    let white = xyy_to_xyz(D65.x, D65.y, 1.0).expect("D65 has y > 0");
    let p_inv = invert3(&p);
    let s = mul3(&p_inv, [white.x, white.y, white.z]);
    let mut rgb_to_xyz = p;
    for row in rgb_to_xyz.iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= s[j];
        }
    }
    invert3(&rgb_to_xyz)
});

fn mul3(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let det = m[0][0] * cof(1, 2, 1, 2) - m[0][1] * cof(1, 2, 0, 2) + m[0][2] * cof(1, 2, 0, 1);
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    adj.map(|row| row.map(|v| v / det))
}

/// Linear (unclamped) sRGB channels for a tristimulus value.
pub fn xyz_to_linear_srgb(xyz: &Xyz) -> [f64; 3] {
    mul3(&XYZ_TO_LINEAR_SRGB, [xyz.x, xyz.y, xyz.z])
}

/// sRGB transfer function (linear → encoded), input in [0, 1].
pub fn srgb_encode(linear: f64) -> f64 {
    if linear <= 0.0031308 {
        12.92 * linear
    } else {
        1.055 * linear.powf(1.0 / 2.4) - 0.055
    }
}

/// Renders xyY as 8-bit sRGB. Channels outside [0, 1] are clamped and the
/// returned flag is set.
pub fn xyy_to_srgb8(x: f64, y: f64, luminance: f64) -> Result<(Srgb8, bool), ColorError> {
    let xyz = xyy_to_xyz(x, y, luminance)?;
    let linear = xyz_to_linear_srgb(&xyz);
    let mut clipped = false;
    let encoded = linear.map(|c| {
        if !(-GAMUT_EPS..=1.0 + GAMUT_EPS).contains(&c) {
            clipped = true;
        }
        let c = c.clamp(0.0, 1.0);
        (srgb_encode(c) * 255.0).round() as u8
    });
    Ok((Srgb8(encoded), clipped))
}

/// One measured square of the board.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardCell {
    pub row: usize,
    pub col: usize,
    pub chroma: Chromaticity,
    /// Relative luminance Y in (0, 1].
    pub luminance: f64,
    pub srgb: Srgb8,
    pub gamut_clipped: bool,
}

impl BoardCell {
    pub fn new(row: usize, col: usize, chroma: Chromaticity, luminance: f64) -> Result<Self, ColorError> {
        let (srgb, gamut_clipped) = xyy_to_srgb8(chroma.x, chroma.y, luminance)?;
        Ok(BoardCell { row, col, chroma, luminance, srgb, gamut_clipped })
    }

    pub fn pos(&self) -> CellPos {
        CellPos { row: self.row, col: self.col }
    }

    pub fn label(&self) -> String {
        self.pos().label()
    }
}

/// One row of the board CSV (`row,col,x,y,Y`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub row: usize,
    pub col: usize,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "Y")]
    pub luminance: f64,
}

/// The full 16 × 30 board, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Board {
    cells: Vec<BoardCell>,
}

impl Board {
    /// Validates a complete set of measurements and precomputes sRGB.
    pub fn from_measurements<I>(measurements: I) -> Result<Self, BoardError>
    where
        I: IntoIterator<Item = Measurement>,
    {
        let mut slots: Vec<Option<BoardCell>> = vec![None; CELL_COUNT];
        for m in measurements {
            let Measurement { row, col, x, y, luminance } = m;
            let pos = CellPos::new(row, col).map_err(|_| BoardError::CellOutOfRange { row, col })?;
            let chroma = Chromaticity::new(x, y).map_err(|_| BoardError::InvalidChromaticity { row, col, x, y })?;
            if !(luminance > 0.0 && luminance <= 1.0) {
                return Err(BoardError::InvalidLuminance { row, col, luminance });
            }
            let slot = &mut slots[pos.index()];
            if slot.is_some() {
                return Err(BoardError::DuplicateCell { row, col });
            }
            let cell = BoardCell::new(row, col, chroma, luminance).map_err(|_| BoardError::InvalidChromaticity {
                row,
                col,
                x,
                y,
            })?;
            *slot = Some(cell);
        }
        let mut cells = Vec::with_capacity(CELL_COUNT);
        for (i, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(cell) => cells.push(cell),
                None => {
                    let pos = CellPos::from_index(i).expect("index in range");
                    return Err(BoardError::MissingCell { row: pos.row, col: pos.col, label: pos.label() });
                }
            }
        }
        Ok(Board { cells })
    }

    /// Loads a board from CSV with header `row,col,x,y,Y`.
    pub fn load<R: Read>(reader: R) -> Result<Self, BoardError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let rows = rdr.deserialize::<Measurement>().collect::<Result<Vec<_>, _>>()?;
        Self::from_measurements(rows)
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Self, BoardError> {
        Self::load(std::fs::File::open(path)?)
    }

    /// Writes the board back out as `row,col,x,y,Y` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), BoardError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for m in self.measurements() {
            wtr.serialize(m)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn measurements(&self) -> impl Iterator<Item = Measurement> + '_ {
        self.cells.iter().map(|c| Measurement {
            row: c.row,
            col: c.col,
            x: c.chroma.x,
            y: c.chroma.y,
            luminance: c.luminance,
        })
    }

    /// A synthetic reference board, NOT real colorimeter data.
    ///
    /// Columns sweep hue around D65 over 330°; rows run from light and
    /// desaturated (row A) to dark and saturated (row P). Values are
    /// quantized to six decimals like a measurement file would be.
    pub fn synthetic() -> Self {
        let quantize = |v: f64| (v * 1e6).round() / 1e6;
        let measurements = CellPos::all().map(|pos| {
            let t = pos.row as f64 / (ROWS - 1) as f64;
            let hue = pos.col as f64 * (330.0 / (COLS - 1) as f64) * PI / 180.0;
            let radius = 0.03 + 0.09 * t;
            Measurement {
                row: pos.row,
                col: pos.col,
                x: quantize(D65.x + radius * hue.cos()),
                y: quantize(D65.y + radius * hue.sin()),
                luminance: quantize(0.80 - 0.60 * t),
            }
        });
        Self::from_measurements(measurements).expect("synthetic board is valid")
    }

    pub fn cell(&self, pos: CellPos) -> &BoardCell {
        &self.cells[pos.index()]
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&BoardCell> {
        CellPos::new(row, col).ok().map(|p| self.cell(p))
    }

    pub fn cell_by_index(&self, index: usize) -> Option<&BoardCell> {
        self.cells.get(index)
    }

    pub fn cells(&self) -> &[BoardCell] {
        &self.cells
    }

    pub fn clipped_count(&self) -> usize {
        self.cells.iter().filter(|c| c.gamut_clipped).count()
    }
}

/// A flat-filled image with every pixel set to the cell's sRGB color.
pub fn render_stimulus(cell: &BoardCell, width: u32, height: u32) -> Result<RgbImage, ColorError> {
    if width == 0 || height == 0 {
        return Err(ColorError::EmptyImage { width, height });
    }
    Ok(RgbImage::from_pixel(width, height, Rgb(cell.srgb.0)))
}
