pub mod contour;
pub mod experiment;
pub mod generate;
pub mod simulate;
pub mod solve;
pub mod spectra;
pub mod validate;
