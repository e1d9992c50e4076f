//! Batch conversion of recorded sonar survey logs into sparse 3D
//! bathymetric point clouds, plus evaluation of object detections made
//! on sonar imagery.
//!
//! The pipeline, end to end:
//!
//! 1. [`sonarlog`] — parse the recorded log (binary `.bsl` or CSV):
//!    GPS fixes, down-scan depths, raw side-scan scanlines.
//! 2. [`geo`] — project fixes to the Web Mercator plane and shift them
//!    into a local ENU frame.
//! 3. [`scanline`] — normalize scanlines and detect the first return on
//!    each side of the track.
//! 4. [`trajectory`] — derive per-ping heading frames and calibrate the
//!    pixels-per-meter scale from a reference ping.
//! 5. [`cloud`] — place nadir and side points in 3D, prune outliers,
//!    and export XYZ/PLY.
//!
//! [`synth`] generates synthetic surveys over known depth fields for
//! testing and benchmarking, [`detect`] scores externally produced
//! object detections (IoU, mAP, confusion counts), and [`pipeline`]
//! wires stages 2-5 together behind one call.

pub mod cloud;
pub mod detect;
pub mod geo;
pub mod pipeline;
pub mod scanline;
pub mod sonarlog;
pub mod synth;
pub mod trajectory;
