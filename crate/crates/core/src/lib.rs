pub mod bounds;
pub mod eigensearch;
pub mod error;
pub mod geometry;
pub mod mfs;
pub mod point;
pub mod shapeopt;
pub mod specfun;
