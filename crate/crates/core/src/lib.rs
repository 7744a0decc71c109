//! Fragile watermarking of black-and-white document pages by column
//! parity, and a hash-chained ledger whose records authenticate their own
//! pages.
//!
//! ```
//! use colparity::codec::{embed, extract_bits, text_to_bits};
//! use colparity::synth::generate_synthetic;
//!
//! let page = generate_synthetic(800, 400, 300, 7);
//! let wm = text_to_bits("hi");
//! let (marked, report) = embed(&page, &wm, 40).unwrap();
//! assert!(report.pixels_toggled <= wm.len());
//! assert_eq!(extract_bits(&marked, wm.len(), 40).unwrap(), wm);
//! ```

pub mod capacity;
pub mod codec;
pub mod image;
pub mod ledger;
pub mod otsu;
pub mod pnm;
pub mod steganalysis;
pub mod synth;

pub use image::{pixel_diff, BinaryImage, GrayImage};
