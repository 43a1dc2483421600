pub mod compare;
pub mod convert;
pub mod defuzzify;
pub mod fit;
pub mod simulate;
