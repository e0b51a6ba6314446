//! Exact CPD search over finite fields and border rings.

pub mod algebra;
pub mod border_search;
pub mod cpd_search;
pub mod error;
pub mod maxrank;
pub mod oracle;
pub mod pruners;
pub mod tensor;

pub use algebra::{BorderRing, Field, Matrix, Poly, PrimeField, Ring};
pub use error::{Error, Result};
pub use tensor::{Cpd, Tensor};

/// Tensors over a prime field.
pub type FieldTensor = Tensor<u32>;
/// Tensors over a border ring.
pub type BorderTensor = Tensor<Poly>;
pub type FieldCpd = Cpd<u32>;
pub type BorderCpd = Cpd<Poly>;
pub type FieldMatrix = Matrix<u32>;
