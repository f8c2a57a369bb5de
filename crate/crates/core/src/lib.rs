pub mod assembly;
pub mod basis;
pub mod enrichment;
pub mod material;
pub mod mesh;
pub mod quadrature;
pub mod solver;

pub use num_complex::Complex64 as C64;
