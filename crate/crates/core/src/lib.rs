//! Multi-user time-reversal beamforming over spatially correlated 60 GHz
//! indoor channels.
//!
//! The crate is organised bottom-up:
//!
//! * [`dsp`]: convolution, DFT, least squares and null-space projection.
//! * [`channel`]: power-delay profiles, Nakagami taps and the geometric
//!   correlated channel generator.
//! * [`prefilter`]: TR, equalized TR (ETR) and interference-nulling TR (INTR).
//! * [`link`]: composite responses, power decomposition and BER simulation.
//! * [`metrics`]: closed-form predictions, sum rate and aggregation.
//!
//! Everything that carries signal samples is generic over [`Real`]
//! (`f32` or `f64`); scenario parameters are plain `f64`.

pub mod channel;
pub mod dsp;
pub mod error;
pub mod link;
pub mod metrics;
pub mod prefilter;

use std::fmt::{Debug, Display};
use std::iter::Sum;

pub use num_complex::Complex;

pub use channel::{
    ArrayGeometry, ChannelSet, PowerDelayProfile, Scenario, ScenarioParams, ScattererLayout,
};
pub use error::{Error, Result};
pub use link::{BerMode, BerResult, CompositeResponse, PowerDecomposition};
pub use prefilter::{Equalizer, PrefilterSet, Technique};

/// Scalar type for signal tensors.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::Signed
    + num_traits::NumAssign
    + rustfft::FftNum
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`.
    fn cast(x: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(x).expect("finite f64 literal")
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C32 = Complex<f32>;
pub type C64 = Complex<f64>;

pub type ChannelSet64 = ChannelSet<f64>;
pub type ChannelSet32 = ChannelSet<f32>;
pub type PrefilterSet64 = PrefilterSet<f64>;
pub type PrefilterSet32 = PrefilterSet<f32>;
pub type CompositeResponse64 = CompositeResponse<f64>;
pub type CompositeResponse32 = CompositeResponse<f32>;
pub type PowerDecomposition64 = PowerDecomposition<f64>;
pub type PowerDecomposition32 = PowerDecomposition<f32>;
pub type ComplexMatrix64 = dsp::ComplexMatrix<f64>;
pub type ComplexMatrix32 = dsp::ComplexMatrix<f32>;
