//! Monthly predictor panel: ingestion, calendar, recession flags, training
//! windows and feature scaling.

mod load;
mod month;
mod panel;
mod recession;
mod scaler;
pub mod synthetic;
mod window;

pub use load::{load_panel, read_panel, save_panel, write_panel, DataSchema, MissingPolicy};
pub use month::Month;
pub use panel::{Panel, DEFAULT_PREDICTORS, DIVIDEND_YIELD};
pub use recession::{recession_mask, RecessionCalendar, NBER_TABLE_VERSION};
pub use scaler::FeatureScaler;
pub use window::{slice_window, WindowSpec};
