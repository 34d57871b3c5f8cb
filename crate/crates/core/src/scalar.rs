use num_traits::{Float, FromPrimitive};

/// Real scalar backing all numeric work: `f64` for production runs,
/// `f32` for cheap smoke checks.
pub trait Scalar:
    Float + FromPrimitive + nalgebra::RealField + serde::Serialize + serde::de::DeserializeOwned
{
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("f64 conversion")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `abs` spelled out to sidestep the `Float`/`ComplexField` method clash.
pub fn fabs<T: Scalar>(x: T) -> T {
    Float::abs(x)
}
