//! Grayscale image I/O (IDX3 input, ASCII PGM output) and the compressed
//! image-recovery experiment.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{invalid_arg, Error, Result};
use crate::metrics::psnr;
use crate::problem::ProblemKind;
use crate::solvers::{run, Method, SolverConfig, TraceOptions};

use super::generators::generate_gaussian;
use super::instance::{sparse_instance, DEFAULT_NOISE_Q};

pub const IDX3_MAGIC: u32 = 2051;
pub const MNIST_SIDE: usize = 28;
const IDX3_HEADER_LEN: usize = 16;

/// Row-major grayscale image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(invalid_arg(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// ASCII PGM (`P2`), maxval 255, `round(255 clamp(x, 0, 1))` per pixel.
    pub fn to_pgm(&self) -> String {
        to_pgm(&self.pixels, self.width, self.height)
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_pgm())?;
        Ok(())
    }
}

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format {
            offset: bytes.len() as u64,
            message: format!(
                "file truncated inside the header (needed byte {})",
                offset + 4
            ),
        })
}

/// Image `index` of an IDX3-ubyte byte buffer, scaled to `[0, 1]`.
pub fn parse_idx3_image(bytes: &[u8], index: usize) -> Result<GrayImage> {
    let magic = be_u32(bytes, 0)?;
    if magic != IDX3_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic number {magic}, expected {IDX3_MAGIC} (IDX3 image file)"),
        });
    }
    let count = be_u32(bytes, 4)? as usize;
    let height = be_u32(bytes, 8)? as usize;
    let width = be_u32(bytes, 12)? as usize;
    if height == 0 || width == 0 {
        return Err(Error::Format {
            offset: 8,
            message: format!("degenerate image size {height}x{width}"),
        });
    }
    if index >= count {
        return Err(invalid_arg(format!(
            "image index {index} out of range; file holds {count} images"
        )));
    }
    let size = height * width;
    let start = IDX3_HEADER_LEN + index * size;
    let end = start + size;
    let raw = bytes.get(start..end).ok_or_else(|| Error::Format {
        offset: bytes.len() as u64,
        message: format!("file truncated: image {index} spans bytes {start}..{end}"),
    })?;
    GrayImage::new(
        width,
        height,
        raw.iter().map(|&p| p as f64 / 255.0).collect(),
    )
}

/// Image `index` of an MNIST IDX3 file as a row-major vector of 784 values in `[0, 1]`.
pub fn load_mnist_image(path: impl AsRef<Path>, index: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    let img = parse_idx3_image(&bytes, index)?;
    if img.width != MNIST_SIDE || img.height != MNIST_SIDE {
        return Err(Error::Format {
            offset: 8,
            message: format!(
                "expected {MNIST_SIDE}x{MNIST_SIDE} images, found {}x{}",
                img.height, img.width
            ),
        });
    }
    Ok(img.pixels)
}

pub fn to_pgm(pixels: &[f64], width: usize, height: usize) -> String {
    let mut s = format!("P2\n{width} {height}\n255\n");
    for row in pixels.chunks(width).take(height) {
        let line: Vec<String> = row
            .iter()
            .map(|&x| {
                let v = if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
                ((255.0 * v).round() as u8).to_string()
            })
            .collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

/// An 8x8 stroke image (a stylized "7") with 10 lit pixels.
pub fn synthetic_image() -> GrayImage {
    let mut p = vec![0.0; 64];
    let lit: [(usize, usize, f64); 10] = [
        (1, 1, 0.6),
        (1, 2, 1.0),
        (1, 3, 1.0),
        (1, 4, 1.0),
        (1, 5, 0.9),
        (2, 5, 0.8),
        (3, 4, 1.0),
        (4, 4, 0.7),
        (5, 3, 0.9),
        (6, 3, 1.0),
    ];
    for (r, c, v) in lit {
        p[r * 8 + c] = v;
    }
    GrayImage::new(8, 8, p).expect("fixed 8x8 layout")
}

/// One recovery experiment: `b = A x_img + e` with Gaussian `A` (m x n).
#[derive(Debug, Clone, PartialEq)]
pub struct RecoverySetting {
    pub m: usize,
    pub kind: ProblemKind,
    pub iterations: usize,
    pub methods: Vec<Method>,
    pub q: f64,
    pub tau: usize,
}

impl RecoverySetting {
    /// Underdetermined sparse setting: `m = 3n/4`, elastic net, 10000 iterations.
    pub fn sparse(n: usize, lambda: f64) -> Self {
        Self {
            m: (3 * n / 4).max(1),
            kind: ProblemKind::SparseLeastSquares { lambda },
            iterations: 10_000,
            methods: vec![Method::Rebk, Method::Crabebk, Method::Arabebk],
            q: DEFAULT_NOISE_Q,
            tau: 20,
        }
    }

    /// Overdetermined min-norm setting: `m = 2n`, 1000 iterations.
    pub fn minnorm(n: usize) -> Self {
        Self {
            m: 2 * n,
            kind: ProblemKind::MinNormLeastSquares,
            iterations: 1000,
            methods: vec![Method::Reabk, Method::Arabebk],
            q: DEFAULT_NOISE_Q,
            tau: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub method: Method,
    pub psnr: f64,
    pub rel_err: f64,
    pub image: GrayImage,
}

/// Runs every method of `setting` for the same fixed iteration budget.
pub fn recover_image(
    image: &GrayImage,
    setting: &RecoverySetting,
    seed: u64,
) -> Result<Vec<RecoveryResult>> {
    let n = image.pixels.len();
    if setting.iterations == 0 {
        return Err(Error::InvalidConfig("iteration budget must be >= 1".into()));
    }
    let a = generate_gaussian(setting.m, n, seed)?;
    let problem = sparse_instance(a, image.pixels.clone(), setting.kind, setting.q, seed)?;
    let objective = setting.kind.objective()?;
    setting
        .methods
        .iter()
        .map(|&method| {
            let cfg = SolverConfig::new(method, objective)
                .tau(setting.tau)
                .tol(None)
                .max_iters(setting.iterations)
                .seed(seed)
                .trace(TraceOptions {
                    stride: setting.iterations,
                    bregman: false,
                    dual_residual: false,
                });
            let out = run(&cfg, &problem)?;
            let x = out.state.x_primal;
            Ok(RecoveryResult {
                method,
                psnr: psnr(&x, &image.pixels)?,
                rel_err: crate::metrics::relative_error(&x, &image.pixels),
                image: GrayImage::new(image.width, image.height, x)?,
            })
        })
        .collect()
}
