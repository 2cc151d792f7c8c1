//! Synthetic vision and barometric altitude for state feedback.

pub mod barometer;
pub mod camera;
pub mod estimator;
pub mod homography;
pub mod pose;
pub mod tracking;

pub use barometer::{compensate_barometer, BaroCompensator, Barometer, BarometerModel};
pub use camera::{project, BodyPose, CameraModel, CameraPose, Pixel, Projection};
pub use estimator::{
    select_landmarks, state_pose, EstimatorConfig, LandmarkKind, LandmarkSet, PoseEstimate, VisionEstimator,
};
pub use homography::estimate_homography;
pub use pose::{planar_pose, refine_body_pose, PlanarPose};
pub use tracking::{PixelTrackFilter, TrackOutput, TrackUpdate, TrackerConfig};
