//! Fractional Fourier shape descriptor of a silhouette contour.

mod descriptor;
pub mod frft;

pub use descriptor::{
    center_contour, describe_frame, normalized_energy, resample_contour, write_descriptor_csv, ComplexSequence, Describer,
    DescriptorParams, DescriptorRow, FrameDescriptor, DEFAULT_LENGTH, DEFAULT_ORDER,
};
pub use frft::{dfrft, dfrft_reference, FrftKernel, FrftPlan};
