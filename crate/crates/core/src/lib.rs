//! Numerical geometry of the conifold: smoothings, the small resolution,
//! Candelas–de la Ossa metrics, balanced gluing and Hermitian–Yang–Mills
//! residuals, evaluated pointwise through jets of Kähler potentials.

pub mod analysis;
pub mod curvature;
pub mod error;
pub mod forms;
pub mod gluing;
pub mod jet;
pub mod linalg;
pub mod model;
pub mod potentials;
pub mod quad;
pub mod series;

pub use error::{GeomError, Result};
pub use jet::Jet;
pub use linalg::{M3, C};
pub use model::{make_cyl_chart, phi_map, scale_action, Chart, ModelPoint, Variety};
pub use potentials::{CutoffProfile, ResolutionProfile};
