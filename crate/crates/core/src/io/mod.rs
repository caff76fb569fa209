//! Files in and out: scenarios, score tables, reports and plots.

pub mod plot;
pub mod report;
pub mod scenario;
pub mod scores;

pub use plot::{plot_simplex, rasterize, render_svg, PlotError, PlotSource, SimplexRaster};
pub use report::{emit_report, render_report, ReportError, ReportFile, ReportFormat};
pub use scenario::{load_scenario, parse_scenario, save_scenario, ScenarioFile, ScenarioFileError};
pub use scores::{ingest_scores_csv, parse_scores_csv, ScoresError};
