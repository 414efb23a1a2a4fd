//! Shift-recovery image matching by simulated magnetic attraction.
//!
//! Each image is reduced to a *virtual edge current*: Sobel gradients at
//! significant edge points, rotated by 90 degrees so they run along the
//! edge. Two such currents interact like discretized wires; the in-plane
//! force on the displaced image points back toward alignment over a basin
//! of shifts. The pipeline:
//!
//! 1. [`raster`]: PGM/PPM I/O and synthetic test shapes.
//! 2. [`gradient`]: Sobel gradient field.
//! 3. [`edgecurrent`]: thresholding, pairwise non-maximum suppression,
//!    rotation into current elements.
//! 4. [`emforce`]: pair, per-element and total forces, z-field, force maps.
//! 5. [`matchmap`]: direction discretization, path following, basin
//!    classification, and the iterative matcher.
//! 6. [`render`]: glyph grids, TSV tables, classification rasters.
//!
//! # Quick start
//! ```
//! use edgeforce::matchmap::{default_max_steps, match_images};
//! use edgeforce::raster::synth_shape;
//! use edgeforce::{EdgeParams, ForceParams, MatchStatus, Shape, ShapeKind};
//!
//! let img = synth_shape(Shape::default_for(ShapeKind::Rectangle, 32, 32), 32, 32)?;
//! let moved = img.translated(5, -4);
//! let r = match_images(
//!     &moved,
//!     &img,
//!     &EdgeParams::default(),
//!     &ForceParams::with_height(8.0),
//!     (0, 0),
//!     default_max_steps(32, 32),
//! )?;
//! assert_eq!((r.status, r.detected_shift), (MatchStatus::Matched, (5, -4)));
//! # Ok::<(), edgeforce::Error>(())
//! ```

pub mod edgecurrent;
pub mod emforce;
pub mod error;
pub mod gradient;
pub mod matchmap;
pub mod raster;
pub mod render;

pub use edgecurrent::{CurrentElement, EdgeCurrent, EdgeMask, EdgeParams};
pub use emforce::{ForceMap, ForceParams, Vec2, Vec3};
pub use error::{Error, Result};
pub use gradient::VectorField;
pub use matchmap::{ClassificationMap, Direction8, MatchResult, MatchStatus, PointClass};
pub use raster::{GrayImage, RgbImage, Shape, ShapeKind};
