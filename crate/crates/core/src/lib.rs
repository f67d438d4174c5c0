//! Exact arithmetic for rank-one cutting-and-stacking transformations:
//! parameter specs, the associated words, the tower map on exact points,
//! good/bad occurrence analysis and inverse-isomorphism tests.

pub mod params;
pub mod registry;
pub mod words;
pub mod tower;
pub mod analysis;
pub mod inverseiso;
